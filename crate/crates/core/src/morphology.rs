//! Connected-component labeling, hole filling and largest-region selection.
//!
//! Foreground regions use 8-connectivity and background regions (holes) use
//! 4-connectivity, so a diagonal line of foreground pixels both connects and
//! encloses consistently.

use crate::error::{Error, Result};
use crate::types::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Which mask value is grouped into components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Foreground,
    Background,
}

/// Component labels: 0 for non-target pixels, `1..=count` for components,
/// numbered in raster-scan order of first encounter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub count: usize,
}

impl LabelMap {
    /// Pixel count per label; index 0 is unused.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count + 1];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes[0] = 0;
        sizes
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new() -> Self {
        // slot 0 is the "no label" sentinel
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller id wins; keeps roots stable in raster order
        let (keep, drop) = if ra <= rb { (ra, rb) } else { (rb, ra) };
        self.parent[drop as usize] = keep;
        keep
    }
}

/// Two-pass union-find labeling.
pub fn label_components(mask: &BinaryMask, connectivity: Connectivity, target: Target) -> LabelMap {
    let (w, h) = mask.dims();
    let want = match target {
        Target::Foreground => 1u8,
        Target::Background => 0u8,
    };
    let bits = mask.bits();
    let mut labels = vec![0u32; w * h];
    let mut sets = DisjointSet::new();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if bits[i] != want {
                continue;
            }
            let mut current = 0u32;
            let mut join = |l: u32, sets: &mut DisjointSet| {
                if l != 0 {
                    current = if current == 0 { l } else { sets.union(current, l) };
                }
            };
            if x > 0 {
                join(labels[i - 1], &mut sets);
            }
            if y > 0 {
                join(labels[i - w], &mut sets);
                if connectivity == Connectivity::Eight {
                    if x > 0 {
                        join(labels[i - w - 1], &mut sets);
                    }
                    if x + 1 < w {
                        join(labels[i - w + 1], &mut sets);
                    }
                }
            }
            labels[i] = if current == 0 { sets.make() } else { current };
        }
    }

    let mut remap = vec![0u32; sets.parent.len()];
    let mut count = 0u32;
    for l in labels.iter_mut().filter(|l| **l != 0) {
        let root = sets.find(*l) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        *l = remap[root];
    }

    LabelMap {
        width: w,
        height: h,
        labels,
        count: count as usize,
    }
}

/// Turns every background region that does not reach the image border into
/// foreground.
pub fn fill_holes(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let bg = label_components(mask, Connectivity::Four, Target::Background);
    let mut touches_border = vec![false; bg.count + 1];
    for x in 0..w {
        touches_border[bg.labels[x] as usize] = true;
        touches_border[bg.labels[(h - 1) * w + x] as usize] = true;
    }
    for y in 0..h {
        touches_border[bg.labels[y * w] as usize] = true;
        touches_border[bg.labels[y * w + w - 1] as usize] = true;
    }
    BinaryMask::from_bools(
        w,
        h,
        mask.bits()
            .iter()
            .zip(&bg.labels)
            .map(|(&b, &l)| b == 1 || !touches_border[l as usize]),
    )
}

/// Keeps only the largest 8-connected foreground region. Ties go to the region
/// met first in raster order.
pub fn largest_component(mask: &BinaryMask) -> Result<BinaryMask> {
    let (w, h) = mask.dims();
    let fg = label_components(mask, Connectivity::Eight, Target::Foreground);
    if fg.count == 0 {
        return Err(Error::EmptyForeground);
    }
    let sizes = fg.sizes();
    let mut best = 1usize;
    for (label, &size) in sizes.iter().enumerate().skip(2) {
        if size > sizes[best] {
            best = label;
        }
    }
    let best = best as u32;
    Ok(BinaryMask::from_bools(
        w,
        h,
        fg.labels.iter().map(|&l| l == best),
    ))
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(w: usize, h: usize, rows: &[&str]) -> BinaryMask {
        let bits = rows
            .iter()
            .flat_map(|r| r.bytes().map(|c| u8::from(c == b'#')))
            .collect();
        BinaryMask::new(w, h, bits).unwrap()
    }

    #[test]
    fn empty_mask_has_no_components() {
        let l = label_components(&BinaryMask::zeros(4, 4), Connectivity::Eight, Target::Foreground);
        assert_eq!(l.count, 0);
        assert!(l.labels.iter().all(|&x| x == 0));
    }

    #[test]
    fn corners_are_isolated() {
        let m = mask(3, 3, &["#.#", "...", "#.#"]);
        for c in [Connectivity::Four, Connectivity::Eight] {
            let l = label_components(&m, c, Target::Foreground);
            assert_eq!(l.count, 4);
            assert_eq!(l.labels, vec![1, 0, 2, 0, 0, 0, 3, 0, 4]);
        }
        assert_eq!(oracle::components(&m, true, true).len(), 4);
    }

    #[test]
    fn diagonal_connectivity() {
        let m = mask(3, 3, &["#..", ".#.", "..#"]);
        assert_eq!(label_components(&m, Connectivity::Four, Target::Foreground).count, 3);
        assert_eq!(label_components(&m, Connectivity::Eight, Target::Foreground).count, 1);
        assert_eq!(label_components(&m, Connectivity::Four, Target::Background).count, 2);
    }

    #[test]
    fn u_shape_merges_under_union_find() {
        let m = mask(5, 3, &["#.#.#", "#.#.#", "#####"]);
        let l = label_components(&m, Connectivity::Four, Target::Foreground);
        assert_eq!(l.count, 1);
    }

    #[test]
    fn ring_hole_is_filled() {
        let m = mask(5, 5, &[".....", ".###.", ".#.#.", ".###.", "....."]);
        let filled = fill_holes(&m);
        assert!(filled.get(2, 2));
        assert_eq!(filled.count(), 9);
    }

    #[test]
    fn solid_and_open_masks_are_unchanged() {
        let ones = BinaryMask::ones(6, 6);
        assert_eq!(fill_holes(&ones), ones);
        // the only background is a path running down from the top border
        let m = mask(5, 5, &["##.##", "##.##", "##.##", "#####", "#####"]);
        assert_eq!(fill_holes(&m), m);
        assert_eq!(oracle::fill_holes(&m), m);
    }

    #[test]
    fn diagonal_gap_does_not_leak_hole() {
        // background at (2,2) touches the outside only diagonally
        let m = mask(5, 5, &[".....", ".##..", ".#.#.", "..##.", "....."]);
        assert!(fill_holes(&m).get(2, 2));
    }

    #[test]
    fn largest_component_examples() {
        let m = mask(7, 3, &["##..#..", "###.#..", "....#.."]);
        let out = largest_component(&m).unwrap();
        assert_eq!(out.count(), 5);
        assert!(out.get(0, 0) && !out.get(4, 0));

        let single = mask(3, 3, &[".#.", "###", ".#."]);
        assert_eq!(largest_component(&single).unwrap(), single);

        assert!(matches!(
            largest_component(&BinaryMask::zeros(3, 3)),
            Err(Error::EmptyForeground)
        ));
    }

    #[test]
    fn largest_component_tie_goes_to_first() {
        let m = mask(5, 2, &["##.##", "....."]);
        let out = largest_component(&m).unwrap();
        assert!(out.get(0, 0) && out.get(1, 0) && !out.get(3, 0));
    }

    fn mask_strategy(max: usize) -> impl Strategy<Value = BinaryMask> {
        (1usize..=max, 1usize..=max, 0.2f64..0.8).prop_flat_map(|(w, h, p)| {
            proptest::collection::vec(proptest::bool::weighted(p), w * h).prop_map(move |v| {
                BinaryMask::new(w, h, v.into_iter().map(u8::from).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn labels_match_flood_fill(m in mask_strategy(16)) {
            for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
                for (target, value) in [(Target::Foreground, true), (Target::Background, false)] {
                    let l = label_components(&m, conn, target);
                    let comps = oracle::components(&m, value, eight);
                    prop_assert_eq!(l.count, comps.len());
                    for (k, comp) in comps.iter().enumerate() {
                        for &i in comp {
                            prop_assert_eq!(l.labels[i] as usize, k + 1);
                        }
                    }
                }
            }
        }

        #[test]
        fn fill_holes_properties(m in mask_strategy(16)) {
            let f = fill_holes(&m);
            prop_assert_eq!(&f, &oracle::fill_holes(&m));
            prop_assert!(m.is_subset_of(&f));
            prop_assert_eq!(&fill_holes(&f), &f);
            let reach = oracle::border_reachable(&f);
            for (i, &b) in f.bits().iter().enumerate() {
                prop_assert!(b == 1 || reach[i]);
            }
        }

        #[test]
        fn largest_component_properties(m in mask_strategy(16)) {
            match largest_component(&m) {
                Err(_) => prop_assert_eq!(m.count(), 0),
                Ok(out) => {
                    prop_assert_eq!(Some(out.clone()), oracle::largest_component(&m));
                    prop_assert!(out.is_subset_of(&m));
                    prop_assert_eq!(
                        label_components(&out, Connectivity::Eight, Target::Foreground).count,
                        1
                    );
                }
            }
        }
    }
}
