//! Overlap metrics of a predicted mask against a reference mask.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::BinaryMask;

/// Pixel-level confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

pub fn confusion(pred: &BinaryMask, reference: &BinaryMask) -> Result<Confusion> {
    if pred.dims() != reference.dims() {
        return Err(Error::mismatch(pred.dims(), reference.dims()));
    }
    // index by (pred << 1 | ref)
    let mut counts = [0u64; 4];
    for (&p, &r) in pred.bits().iter().zip(reference.bits()) {
        counts[((p << 1) | r) as usize] += 1;
    }
    Ok(Confusion {
        tn: counts[0b00],
        fn_: counts[0b01],
        fp: counts[0b10],
        tp: counts[0b11],
    })
}

/// `2|P ∩ R| / (|P| + |R|)` from confusion counts.
pub fn dice_from_counts(c: &Confusion) -> Result<f64> {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        return Err(Error::BothEmpty);
    }
    Ok((2 * c.tp) as f64 / denom as f64)
}

pub fn dice(pred: &BinaryMask, reference: &BinaryMask) -> Result<f64> {
    dice_from_counts(&confusion(pred, reference)?)
}

/// True positive fraction `tp / (tp + fn)`.
pub fn sensitivity(tp: u64, fn_: u64) -> Result<f64> {
    if tp + fn_ == 0 {
        return Err(Error::UndefinedFraction("sensitivity"));
    }
    Ok(tp as f64 / (tp + fn_) as f64)
}

/// True negative fraction `tn / (tn + fp)`.
pub fn specificity(tn: u64, fp: u64) -> Result<f64> {
    if tn + fp == 0 {
        return Err(Error::UndefinedFraction("specificity"));
    }
    Ok(tn as f64 / (tn + fp) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalMetrics {
    #[serde(flatten)]
    pub counts: Confusion,
    pub dice: f64,
    pub tpf: f64,
    pub tnf: f64,
}

impl EvalMetrics {
    pub fn from_counts(counts: Confusion) -> Result<Self> {
        Ok(Self {
            counts,
            dice: dice_from_counts(&counts)?,
            tpf: sensitivity(counts.tp, counts.fn_)?,
            tnf: specificity(counts.tn, counts.fp)?,
        })
    }
}

/// Confusion counts and all three ratios. Fails when any ratio is undefined.
pub fn evaluate(pred: &BinaryMask, reference: &BinaryMask) -> Result<EvalMetrics> {
    EvalMetrics::from_counts(confusion(pred, reference)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

/// Per-case aggregate of a set of evaluated images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseSummary {
    pub count: usize,
    pub dice: MeanStd,
    pub tpf: MeanStd,
    pub tnf: MeanStd,
}

pub fn summarize_case(metrics: &[EvalMetrics]) -> Result<CaseSummary> {
    if metrics.is_empty() {
        return Err(Error::EmptyInput);
    }
    let column = |f: fn(&EvalMetrics) -> f64| MeanStd::of(&metrics.iter().map(f).collect::<Vec<_>>());
    Ok(CaseSummary {
        count: metrics.len(),
        dice: column(|m| m.dice),
        tpf: column(|m| m.tpf),
        tnf: column(|m| m.tnf),
    })
}
