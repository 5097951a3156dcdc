//! Text renderings of results: JSON and CSV reports, profile dumps and the
//! `mean ± std` summary table.
//!
//! Reals in JSON and CSV carry 7 significant digits, rounded half to even on
//! the exact binary value.

use serde_json::{json, Map, Value};

use crate::metrics::{CaseSummary, EvalMetrics, MeanStd};
use crate::projection::{ProfileDerivative, ProjectionProfile};
use crate::types::SegmentationResult;

/// `x` rounded to 7 significant digits.
pub fn round_sig7(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.6e}").parse().expect("formatted float parses")
}

/// Shortest decimal text of `round_sig7(x)`.
pub fn fmt_sig7(x: f64) -> String {
    let r = round_sig7(x);
    if r == 0.0 {
        // no "-0"
        return "0".into();
    }
    format!("{r}")
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig7(x)).map_or(Value::Null, Value::Number)
}

/// One evaluated mask pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRecord {
    pub file: String,
    pub slice: Option<usize>,
    pub timepoint_ref: Option<usize>,
    pub metrics: EvalMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub images: Vec<ImageRecord>,
    pub summary: CaseSummary,
}

pub const EVAL_CSV_HEADER: &str = "slice,timepoint_ref,dice,tpf,tnf,tp,fp,tn,fn";

fn mean_std_json(m: &MeanStd) -> Value {
    json!({ "mean": num(m.mean), "std": num(m.std) })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let images: Vec<Value> = self
            .images
            .iter()
            .map(|r| {
                let m = &r.metrics;
                let mut o = Map::new();
                o.insert("file".into(), json!(r.file));
                o.insert("slice".into(), json!(r.slice));
                o.insert("timepoint_ref".into(), json!(r.timepoint_ref));
                o.insert("dice".into(), num(m.dice));
                o.insert("tpf".into(), num(m.tpf));
                o.insert("tnf".into(), num(m.tnf));
                o.insert("tp".into(), json!(m.counts.tp));
                o.insert("fp".into(), json!(m.counts.fp));
                o.insert("tn".into(), json!(m.counts.tn));
                o.insert("fn".into(), json!(m.counts.fn_));
                Value::Object(o)
            })
            .collect();
        let s = &self.summary;
        let doc = json!({
            "images": images,
            "summary": {
                "count": s.count,
                "dice": mean_std_json(&s.dice),
                "tpf": mean_std_json(&s.tpf),
                "tnf": mean_std_json(&s.tnf),
            }
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(EVAL_CSV_HEADER);
        out.push('\n');
        for r in &self.images {
            let m = &r.metrics;
            let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                opt(r.slice),
                opt(r.timepoint_ref),
                fmt_sig7(m.dice),
                fmt_sig7(m.tpf),
                fmt_sig7(m.tnf),
                m.counts.tp,
                m.counts.fp,
                m.counts.tn,
                m.counts.fn_
            ));
        }
        out
    }
}

fn pm(m: &MeanStd) -> String {
    format!("{:.4} ± {:.4}", m.mean, m.std)
}

/// One summary-table row: `label<TAB>DI<TAB>TPF<TAB>TNF`, each `mean ± std`
/// with four decimals.
pub fn table_row(label: &str, s: &CaseSummary) -> String {
    format!("{label}\t{}\t{}\t{}", pm(&s.dice), pm(&s.tpf), pm(&s.tnf))
}

pub const TABLE_HEADER: &str = "case\tDI\tTPF\tTNF";

pub fn summary_table(rows: &[(String, CaseSummary)]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (label, s) in rows {
        out.push_str(&table_row(label, s));
        out.push('\n');
    }
    out
}

/// `index,std,derivative` rows.
pub fn profile_csv(profile: &ProjectionProfile, derivative: &ProfileDerivative) -> String {
    let mut out = String::from("index,std,derivative\n");
    for (i, (p, d)) in profile.values.iter().zip(&derivative.values).enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_sig7(*p), fmt_sig7(*d)));
    }
    out
}

/// Thresholds, crop boxes and mask sizes per slice.
pub fn segmentation_json(results: &[SegmentationResult]) -> String {
    let slices: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "slice_index": r.slice_index,
                "ref_timepoint": r.ref_timepoint,
                "t_low": num(r.t_low),
                "t_high": num(r.t_high),
                "crop_box": {
                    "x0": r.crop_box.x0,
                    "x1": r.crop_box.x1,
                    "y0": r.crop_box.y0,
                    "y1": r.crop_box.y1,
                },
                "crop_box_fallback": r.crop_box_fallback,
                "brain_pixels": r.brain_mask.count(),
                "roi_pixels": r.roi_mask.count(),
            })
        })
        .collect();
    let mut out = serde_json::to_string_pretty(&json!({ "slices": slices })).expect("serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{summarize_case, Confusion};
    use crate::projection::{first_derivative, std_projection, Axis};
    use crate::types::Image2D;

    #[test]
    fn seven_significant_digits() {
        assert_eq!(fmt_sig7(8f64.sqrt()), "2.828427");
        assert_eq!(fmt_sig7(2f64.sqrt()), "1.414214");
        assert_eq!(fmt_sig7(1.0), "1");
        assert_eq!(fmt_sig7(0.0), "0");
        assert_eq!(fmt_sig7(-0.0), "0");
        assert_eq!(fmt_sig7(133.92969450), "133.9297");
        assert_eq!(fmt_sig7(0.000123456789), "0.0001234568");
        assert_eq!(fmt_sig7(123456789.0), "123456800");
        // ties go to even on exactly representable halves
        assert_eq!(fmt_sig7(1.0000005), "1.000001");
        assert_eq!(fmt_sig7(0.125), "0.125");
        assert_eq!(fmt_sig7(2.5e-8), "0.000000025");
    }

    fn metrics(dice: f64, tpf: f64, tnf: f64) -> EvalMetrics {
        EvalMetrics { counts: Confusion::default(), dice, tpf, tnf }
    }

    #[test]
    fn table_row_layout() {
        let s = summarize_case(&[metrics(0.9, 1.0, 1.0), metrics(1.0, 1.0, 1.0)]).unwrap();
        assert_eq!(table_row("7", &s), "7\t0.9500 ± 0.0707\t1.0000 ± 0.0000\t1.0000 ± 0.0000");
        assert!(summary_table(&[("7".into(), s)]).starts_with("case\tDI\tTPF\tTNF\n7\t"));
    }

    #[test]
    fn profile_csv_matches_library() {
        let img = Image2D::new(2, 2, vec![1u16, 3, 5, 7]).unwrap();
        let p = std_projection(&img, Axis::Horizontal);
        let d = first_derivative(&p).unwrap();
        assert_eq!(profile_csv(&p, &d), "index,std,derivative\n0,2.828427,0\n1,2.828427,0\n");
    }

    #[test]
    fn eval_csv_and_json() {
        let m = EvalMetrics::from_counts(Confusion { tp: 3, fp: 1, tn: 5, fn_: 1 }).unwrap();
        let report = EvalReport {
            images: vec![ImageRecord {
                file: "roi_slice0.pgm".into(),
                slice: Some(0),
                timepoint_ref: None,
                metrics: m,
            }],
            summary: summarize_case(&[m]).unwrap(),
        };
        assert_eq!(
            report.to_csv(),
            "slice,timepoint_ref,dice,tpf,tnf,tp,fp,tn,fn\n0,,0.75,0.75,0.8333333,3,1,5,1\n"
        );
        let v: Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["images"][0]["tnf"], json!(0.8333333));
        assert_eq!(v["images"][0]["fn"], json!(1));
        assert_eq!(v["summary"]["dice"]["std"], json!(0.0));
    }
}
