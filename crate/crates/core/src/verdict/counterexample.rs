use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};

/// Deepest ladder whose levels `ln v_k` stay finite in `f64`.
pub const MAX_COUNTEREXAMPLE_DEPTH: usize = 25;

/// One step `v_k·1_{E_k}`, stored in logarithms since `v_k` overflows and
/// `|E_k|` underflows from the second rung on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepLevel {
    pub k: usize,
    pub ln_value: f64,
    /// `ln |E_k|` with `|E_k|` normalized so that the circle has measure 1.
    pub ln_measure: f64,
    /// `ln t_{k−1}`, zero on the first rung.
    pub anchor: f64,
    /// `ln(t_{k−1}|E_k|)`, kept separately so that tail terms at the gap
    /// points do not cancel catastrophically.
    pub ln_anchored_measure: f64,
    /// Left end of the arc `E_k` in `(−π, π]`.
    pub arc_start: f64,
}

impl StepLevel {
    /// `ln` of the arc length in radians.
    pub fn ln_arc_length(&self) -> f64 {
        self.ln_measure + (2.0 * PI).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCounterexample {
    pub levels: Vec<StepLevel>,
    /// `ln t_j` for `j = 1..depth−1`, with `t_j` between rungs `j` and `j + 1`.
    pub gaps: Vec<f64>,
    pub depth: usize,
    /// The requested depth exceeded [`MAX_COUNTEREXAMPLE_DEPTH`].
    pub truncated: bool,
}

fn ln_level(k: usize) -> f64 {
    (((k + 1) * (k + 1)) as f64).exp()
}

fn logsumexp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Nonnegative step function with `t·∫_t^∞ m_h(s)/s ds ≤ 2^{−j}` at the gap
/// points `t_j` and with `Σ_k v_k^p |E_k|` at least doubling from one rung to
/// the next for every `p ≥ 0.1`.
///
/// Levels are `v_k = exp(exp((k+1)²))`, `|E_1| = 1/2` and `|E_k|` is chosen so
/// that rung `k` contributes exactly `2^{−(k+1)}` to the tail at `t_{k−1}`.
pub fn construct_tail_counterexample(depth: usize) -> Result<TailCounterexample> {
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be at least 1".into()));
    }
    let truncated = depth > MAX_COUNTEREXAMPLE_DEPTH;
    let depth = depth.min(MAX_COUNTEREXAMPLE_DEPTH);
    let gaps: Vec<f64> = (1..depth).map(|j| ln_level(j) + 1.0).collect();
    let mut levels = Vec::with_capacity(depth);
    let mut start = -PI;
    for k in 1..=depth {
        let lv = ln_level(k);
        let (anchor, ln_anchored_measure) = if k == 1 {
            (0.0, -LN_2)
        } else {
            let lt = gaps[k - 2];
            (lt, -((k + 1) as f64) * LN_2 - (lv - lt).ln())
        };
        let ln_measure = ln_anchored_measure - anchor;
        levels.push(StepLevel { k, ln_value: lv, ln_measure, anchor, ln_anchored_measure, arc_start: start });
        start += 2.0 * PI * ln_measure.exp();
    }
    Ok(TailCounterexample { levels, gaps, depth, truncated })
}

impl TailCounterexample {
    /// `t·∫_t^∞ m_h(s)/s ds = Σ_{v_k > t} |E_k|·t·ln(v_k/t)`, for `ln t ≥ 0`.
    pub fn tail_value(&self, ln_t: f64) -> f64 {
        let terms = self
            .levels
            .iter()
            .filter(|l| l.ln_value > ln_t)
            .map(|l| (ln_t - l.anchor) + l.ln_anchored_measure + (l.ln_value - ln_t).ln());
        logsumexp(terms).exp()
    }

    /// `(j, t_j·∫_{t_j}^∞ m_h(s)/s ds)` along the gap subsequence.
    pub fn gap_tail_values(&self) -> Vec<(usize, f64)> {
        self.gaps.iter().enumerate().map(|(i, &lt)| (i + 1, self.tail_value(lt))).collect()
    }

    /// `ln Σ_{k≤K} v_k^p |E_k|` for `K = 1..depth`.
    pub fn lp_partial_sums_ln(&self, p: f64) -> Vec<f64> {
        let mut acc = f64::NEG_INFINITY;
        self.levels
            .iter()
            .map(|l| {
                acc = logsumexp([acc, p * l.ln_value + l.ln_measure]);
                acc
            })
            .collect()
    }

    /// `ln((1−p)‖h‖_p)` of the full truncation.
    pub fn ln_scaled_norm(&self, p: f64) -> f64 {
        let s = self.lp_partial_sums_ln(p);
        (1.0 - p).ln() + s[s.len() - 1] / p
    }

    /// `ln h(θ)`, `−∞` off the support.
    pub fn ln_value_at(&self, theta: f64) -> f64 {
        self.levels
            .iter()
            .find(|l| theta >= l.arc_start && (theta - l.arc_start).ln() < l.ln_arc_length())
            .map_or(f64::NEG_INFINITY, |l| l.ln_value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,ln_value,ln_measure,arc_start,ln_gap\n");
        for l in &self.levels {
            let gap = self.gaps.get(l.k - 1).map_or(String::new(), |g| g.to_string());
            out.push_str(&format!("{},{},{},{},{}\n", l.k, l.ln_value, l.ln_measure, l.arc_start, gap));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `t∫_t^∞ m_h(s)/s ds` by integrating the step function `m_h` interval
    /// by interval in log space.
    fn brute_tail(h: &TailCounterexample, ln_t: f64) -> f64 {
        let mut ln_lo = 0.0_f64;
        let mut total = 0.0;
        for (i, l) in h.levels.iter().enumerate() {
            let mass = logsumexp(h.levels[i..].iter().map(|x| x.ln_measure));
            let a = ln_lo.max(ln_t);
            if l.ln_value > a {
                total += (ln_t + mass + (l.ln_value - a).ln()).exp();
            }
            ln_lo = l.ln_value;
        }
        total
    }

    #[test]
    fn depth_three_by_brute_force() {
        let h = construct_tail_counterexample(3).unwrap();
        assert_eq!(h.gaps.len(), 2);
        for (j, v) in h.gap_tail_values() {
            let b = brute_tail(&h, h.gaps[j - 1]);
            assert!((v - b).abs() <= 1e-12 * b.max(1e-300), "{v} {b}");
            assert!(b <= 0.5_f64.powi(j as i32));
        }
        for p in [0.1, 0.3, 0.5] {
            let s: Vec<f64> = h
                .levels
                .iter()
                .scan(0.0, |acc, l| {
                    *acc += (p * l.ln_value + l.ln_measure).exp();
                    Some(*acc)
                })
                .collect();
            let ln = h.lp_partial_sums_ln(p);
            for (a, b) in s.iter().zip(&ln) {
                if a.is_finite() {
                    assert!((a.ln() - b).abs() < 1e-9 * b.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn gaps_and_growth_at_depth() {
        for depth in [6, 12, MAX_COUNTEREXAMPLE_DEPTH] {
            let h = construct_tail_counterexample(depth).unwrap();
            assert!(!h.truncated);
            for (j, v) in h.gap_tail_values() {
                assert!(v <= 0.5_f64.powi(j as i32), "j = {j}: {v}");
            }
            let mut prev = Vec::new();
            for p in [0.1, 0.3, 0.5, 1.0, 2.0] {
                let s = h.lp_partial_sums_ln(p);
                assert!(s.windows(2).all(|w| w[1] - w[0] >= LN_2), "p = {p}");
                if !prev.is_empty() {
                    assert!(s.iter().zip(&prev).all(|(a, b)| a >= b));
                }
                prev = s;
            }
        }
    }

    #[test]
    fn scaled_norm_grows_with_p() {
        let h = construct_tail_counterexample(6).unwrap();
        let v: Vec<f64> = [0.9, 0.95, 0.99, 0.995].iter().map(|&p| h.ln_scaled_norm(p)).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]), "{v:?}");
    }

    #[test]
    fn truncation_and_support() {
        let h = construct_tail_counterexample(40).unwrap();
        assert!(h.truncated && h.depth == MAX_COUNTEREXAMPLE_DEPTH);
        assert!(h.levels.iter().all(|l| l.ln_value.is_finite() && l.ln_measure.is_finite()));
        assert!(construct_tail_counterexample(0).is_err());
        let total: f64 = h.levels.iter().map(|l| l.ln_measure.exp()).sum();
        assert!(total < 1.0);
        assert_eq!(h.ln_value_at(-PI + 0.1), h.levels[0].ln_value);
        assert_eq!(h.ln_value_at(0.5), f64::NEG_INFINITY);
    }
}
