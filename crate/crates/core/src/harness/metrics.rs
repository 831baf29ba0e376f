use serde::{Deserialize, Serialize};

use super::bench::EpisodeRow;

/// Mean with a normal-approximation 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    /// 1.96 times the standard error; 0 for fewer than two samples.
    pub ci: f64,
    pub n: usize,
}

pub fn mean_ci(xs: &[f64]) -> MeanCi {
    let n = xs.len();
    if n == 0 {
        return MeanCi { mean: 0.0, ci: 0.0, n };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ci = if n < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    };
    MeanCi { mean, ci, n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub variant: String,
    /// Mean paired difference to the best variant, with its CI.
    pub delta: MeanCi,
    pub is_best: bool,
}

/// Paired differences of every variant to the one with the lowest mean
/// (first on ties). Vectors must be aligned by environment.
pub fn pairwise_vs_best(metrics: &[(String, Vec<f64>)]) -> Vec<PairwiseRow> {
    let Some(best) = metrics
        .iter()
        .enumerate()
        .min_by(|a, b| mean_ci(&a.1 .1).mean.total_cmp(&mean_ci(&b.1 .1).mean).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
    else {
        return Vec::new();
    };
    let reference = &metrics[best].1;
    metrics
        .iter()
        .enumerate()
        .map(|(i, (name, xs))| {
            let delta = if i == best {
                MeanCi {
                    mean: 0.0,
                    ci: 0.0,
                    n: xs.len(),
                }
            } else {
                let diffs: Vec<f64> = xs.iter().zip(reference).map(|(x, r)| x - r).collect();
                mean_ci(&diffs)
            };
            PairwiseRow {
                variant: name.clone(),
                delta,
                is_best: i == best,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantMetrics {
    pub variant: String,
    pub replans: MeanCi,
    pub cumulative_time: MeanCi,
    pub plan_time: MeanCi,
    pub exec_time: MeanCi,
    pub unsolved: usize,
    pub errors: usize,
}

/// Per-variant summaries and pairwise-vs-best deltas of one layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub layout: String,
    pub num_envs: usize,
    pub variants: Vec<VariantMetrics>,
    pub pairwise_replans: Vec<PairwiseRow>,
    pub pairwise_time: Vec<PairwiseRow>,
}

impl MetricsTable {
    /// Groups rows by variant in first-appearance order; rows of one variant
    /// must be in environment order.
    pub fn from_rows(layout: &str, rows: &[EpisodeRow]) -> Self {
        let mut names: Vec<String> = Vec::new();
        for r in rows {
            if !names.contains(&r.variant) {
                names.push(r.variant.clone());
            }
        }
        let mut variants = Vec::new();
        let mut replans = Vec::new();
        let mut times = Vec::new();
        for name in &names {
            let mine: Vec<&EpisodeRow> = rows.iter().filter(|r| &r.variant == name).collect();
            let col = |f: fn(&EpisodeRow) -> f64| mine.iter().map(|r| f(r)).collect::<Vec<f64>>();
            let rp = col(|r| r.replans as f64);
            let ct = col(|r| r.plan_time_s + r.exec_time_s);
            variants.push(VariantMetrics {
                variant: name.clone(),
                replans: mean_ci(&rp),
                cumulative_time: mean_ci(&ct),
                plan_time: mean_ci(&col(|r| r.plan_time_s)),
                exec_time: mean_ci(&col(|r| r.exec_time_s)),
                unsolved: mine.iter().filter(|r| !r.solved).count(),
                errors: mine.iter().filter(|r| r.error.is_some()).count(),
            });
            replans.push((name.clone(), rp));
            times.push((name.clone(), ct));
        }
        let num_envs = variants.first().map_or(0, |v| v.replans.n);
        Self {
            layout: layout.to_string(),
            num_envs,
            variants,
            pairwise_replans: pairwise_vs_best(&replans),
            pairwise_time: pairwise_vs_best(&times),
        }
    }

    pub fn variant(&self, name: &str) -> Option<&VariantMetrics> {
        self.variants.iter().find(|v| v.variant == name)
    }

    pub fn pairwise_replans_of(&self, name: &str) -> Option<&PairwiseRow> {
        self.pairwise_replans.iter().find(|r| r.variant == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors_give_zero_rows() {
        let m = vec![("a".to_string(), vec![1.0, 2.0]), ("b".to_string(), vec![1.0, 2.0])];
        let rows = pairwise_vs_best(&m);
        assert!(rows[0].is_best);
        assert!(rows.iter().all(|r| r.delta.mean == 0.0 && r.delta.ci == 0.0));
    }

    #[test]
    fn hand_arithmetic() {
        let m = vec![("a".to_string(), vec![1.0, 2.0, 3.0]), ("b".to_string(), vec![2.0, 3.0, 4.0])];
        let rows = pairwise_vs_best(&m);
        assert!(rows[0].is_best);
        assert_eq!(rows[1].delta.mean, 1.0);
        assert_eq!(rows[1].delta.ci, 0.0);
        let c = mean_ci(&[1.0, 2.0, 3.0]);
        assert!((c.ci - 1.96 / 3f64.sqrt()).abs() < 1e-15);
    }
}
