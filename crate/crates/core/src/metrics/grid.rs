use serde::{Deserialize, Serialize};

use super::{Evaluation, MetricsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

impl AxisRange {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Self { lo, hi }
    }

    /// Lower edge of bin `k` out of `bins`.
    pub fn edge(&self, k: usize, bins: usize) -> f64 {
        self.lo + (self.hi - self.lo) * k as f64 / bins as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub count: usize,
    pub correct: usize,
    /// Set only when `count >= min_count`.
    pub accuracy: Option<f64>,
}

/// Model accuracy binned by true-caption perplexity (x) and false-caption
/// perplexity (y). `cells[y][x]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedGrid {
    pub bins: usize,
    pub min_count: usize,
    pub x: AxisRange,
    pub y: AxisRange,
    pub included: usize,
    pub cells: Vec<Vec<GridCell>>,
}

/// Equal-width bin of `v` in `range`: lower edges are inclusive, the maximum
/// lands in the top bin, and a zero-width range puts everything in bin 0.
pub fn bin_index(v: f64, range: AxisRange, bins: usize) -> usize {
    if range.hi <= range.lo {
        return 0;
    }
    // number of interior edges at or below v
    let (mut lo, mut hi) = (1usize, bins);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if range.edge(mid, bins) <= v {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo - 1
}

/// Bins every evaluated 2-candidate instance by the perplexities behind its
/// hard-set decision and tallies the model's accuracy per cell.
pub fn binned_grid(eval: &Evaluation, bins: usize, min_count: usize) -> Result<BinnedGrid, MetricsError> {
    if bins == 0 {
        return Err(MetricsError::InvalidConfig("bins must be at least 1".into()));
    }
    if let Some(o) = eval.outcomes.iter().find(|o| o.perplexities.len() != 2) {
        return Err(MetricsError::NotPairwise {
            id: o.id.clone(),
            candidates: o.perplexities.len(),
        });
    }
    if eval.outcomes.is_empty() {
        return Err(MetricsError::NoInstances);
    }
    let point = |o: &super::InstanceOutcome| (o.perplexities[o.true_index], o.perplexities[1 - o.true_index]);
    let x = AxisRange::of(eval.outcomes.iter().map(|o| point(o).0));
    let y = AxisRange::of(eval.outcomes.iter().map(|o| point(o).1));
    let mut cells = vec![
        vec![
            GridCell {
                count: 0,
                correct: 0,
                accuracy: None
            };
            bins
        ];
        bins
    ];
    for o in &eval.outcomes {
        let (px, py) = point(o);
        let cell = &mut cells[bin_index(py, y, bins)][bin_index(px, x, bins)];
        cell.count += 1;
        cell.correct += o.correct() as usize;
    }
    for cell in cells.iter_mut().flatten() {
        if cell.count >= min_count && cell.count > 0 {
            cell.accuracy = Some(cell.correct as f64 / cell.count as f64);
        }
    }
    Ok(BinnedGrid {
        bins,
        min_count,
        x,
        y,
        included: eval.outcomes.len(),
        cells,
    })
}

impl BinnedGrid {
    /// CSV with a header row of x-bin ranges and one row per y-bin (lowest
    /// first). Cells read `accuracy%|count`, or `NA|count` when undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("false_pp\\true_pp");
        for k in 0..self.bins {
            out.push_str(&format!(
                ",[{:.4};{:.4})",
                self.x.edge(k, self.bins),
                self.x.edge(k + 1, self.bins)
            ));
        }
        out.push('\n');
        for (k, row) in self.cells.iter().enumerate() {
            out.push_str(&format!(
                "[{:.4};{:.4})",
                self.y.edge(k, self.bins),
                self.y.edge(k + 1, self.bins)
            ));
            for c in row {
                match c.accuracy {
                    Some(a) => out.push_str(&format!(",{:.2}|{}", a * 100.0, c.count)),
                    None => out.push_str(&format!(",NA|{}", c.count)),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::InstanceOutcome;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn outcome(id: usize, pt: f64, pf: f64, correct: bool) -> InstanceOutcome {
        InstanceOutcome {
            id: id.to_string(),
            true_index: 0,
            prediction: if correct { 0 } else { 1 },
            model_tie: false,
            hard: pt > pf,
            relation: None,
            perplexities: vec![pt, pf],
        }
    }

    fn eval(outcomes: Vec<InstanceOutcome>) -> Evaluation {
        Evaluation {
            outcomes,
            hard_scorer: "s".into(),
            ties: 0,
            excluded: 0,
        }
    }

    /// Straight linear scan over bins, independent of `bin_index`.
    fn brute_bin(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
        if hi <= lo {
            return 0;
        }
        for k in 0..bins {
            let a = lo + (hi - lo) * k as f64 / bins as f64;
            let b = lo + (hi - lo) * (k + 1) as f64 / bins as f64;
            if a <= v && (v < b || k == bins - 1) {
                return k;
            }
        }
        unreachable!()
    }

    #[test]
    fn boundaries_go_up_and_max_goes_to_top() {
        let r = AxisRange { lo: 0.0, hi: 10.0 };
        assert_eq!(bin_index(0.0, r, 10), 0);
        assert_eq!(bin_index(1.0, r, 10), 1);
        assert_eq!(bin_index(0.999, r, 10), 0);
        assert_eq!(bin_index(10.0, r, 10), 9);
        assert_eq!(bin_index(5.0, AxisRange { lo: 5.0, hi: 5.0 }, 10), 0);
    }

    #[test]
    fn one_bin_equals_overall() {
        let os: Vec<_> = (0..37)
            .map(|i| outcome(i, i as f64, (i * 3 % 7) as f64, i % 3 != 0))
            .collect();
        let e = eval(os);
        let g = binned_grid(&e, 1, 10).unwrap();
        let r = e.report().unwrap();
        assert_eq!(g.cells[0][0].count, 37);
        assert_eq!(g.cells[0][0].accuracy, Some(r.overall_accuracy));
    }

    #[test]
    fn nine_is_undefined_ten_is_not() {
        let mut os: Vec<_> = (0..9).map(|i| outcome(i, 1.0, 1.0, true)).collect();
        os.push(outcome(100, 5.0, 5.0, false));
        let g = binned_grid(&eval(os.clone()), 2, 10).unwrap();
        assert_eq!(g.cells[0][0].count, 9);
        assert_eq!(g.cells[0][0].accuracy, None);
        os.push(outcome(101, 1.0, 1.0, false));
        let g = binned_grid(&eval(os), 2, 10).unwrap();
        assert_eq!(g.cells[0][0].accuracy, Some(0.9));
    }

    #[test]
    fn non_pair_is_rejected() {
        let mut o = outcome(0, 1.0, 2.0, true);
        o.perplexities.push(3.0);
        assert!(matches!(
            binned_grid(&eval(vec![o]), 10, 10),
            Err(MetricsError::NotPairwise { candidates: 3, .. })
        ));
    }

    #[test]
    fn brute_force_500() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let os: Vec<_> = (0..500)
            .map(|i| {
                outcome(
                    i,
                    rng.random_range(1.0..6.0),
                    rng.random_range(0.5..9.0),
                    rng.random_bool(0.6),
                )
            })
            .collect();
        let g = binned_grid(&eval(os.clone()), 10, 10).unwrap();
        let xs: Vec<f64> = os.iter().map(|o| o.perplexities[0]).collect();
        let ys: Vec<f64> = os.iter().map(|o| o.perplexities[1]).collect();
        let (xl, xh) = (
            xs.iter().cloned().fold(f64::MAX, f64::min),
            xs.iter().cloned().fold(f64::MIN, f64::max),
        );
        let (yl, yh) = (
            ys.iter().cloned().fold(f64::MAX, f64::min),
            ys.iter().cloned().fold(f64::MIN, f64::max),
        );
        let mut count = [[0usize; 10]; 10];
        let mut correct = [[0usize; 10]; 10];
        for o in &os {
            let bx = brute_bin(o.perplexities[0], xl, xh, 10);
            let by = brute_bin(o.perplexities[1], yl, yh, 10);
            count[by][bx] += 1;
            correct[by][bx] += o.correct() as usize;
        }
        let mut total = 0;
        for y in 0..10 {
            for x in 0..10 {
                let c = &g.cells[y][x];
                assert_eq!((c.count, c.correct), (count[y][x], correct[y][x]));
                assert_eq!(c.accuracy.is_some(), count[y][x] >= 10);
                total += c.count;
            }
        }
        assert_eq!(total, 500);
        let csv = g.to_csv();
        assert_eq!(csv.lines().count(), 11);
        assert!(csv.lines().all(|l| l.split(',').count() == 11));
    }

    proptest! {
        #[test]
        fn bin_index_matches_scan(lo in -50.0f64..50.0, w in 0.0f64..40.0, t in 0.0f64..=1.0, bins in 1usize..20) {
            let r = AxisRange { lo, hi: lo + w };
            let v = lo + w * t;
            prop_assert_eq!(bin_index(v, r, bins), brute_bin(v, r.lo, r.hi, bins));
        }

        #[test]
        fn counts_are_conserved(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0, any::<bool>()), 1..200), bins in 1usize..12) {
            let os: Vec<_> = pts.iter().enumerate().map(|(i, &(a, b, c))| outcome(i, a, b, c)).collect();
            let g = binned_grid(&eval(os), bins, 10).unwrap();
            let sum: usize = g.cells.iter().flatten().map(|c| c.count).sum();
            prop_assert_eq!(sum, pts.len());
        }
    }
}
