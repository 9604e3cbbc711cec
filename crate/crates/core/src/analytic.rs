//! Closed-form predictions for each named configuration: critical jumping
//! rates, energy gaps, runtimes and which cells exchange amplitude.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CaseTag;

/// One constant-γ stage of a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePrediction {
    pub gamma_c: f64,
    /// `π / gap`.
    pub runtime: f64,
    pub gap: f64,
    /// Cells whose equal-weight sum the stage starts from.
    pub source: Vec<&'static str>,
    /// Cells the stage transfers amplitude onto.
    pub target: Vec<&'static str>,
    /// `p` such that the tolerated detuning from `gamma_c` is `o(M^-p)`.
    pub gamma_window_exponent: f64,
    pub evolution: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasePrediction {
    pub case: CaseTag,
    #[serde(rename = "M")]
    pub m: usize,
    pub k: usize,
    pub stages: Vec<StagePrediction>,
}

impl CasePrediction {
    pub fn stage(&self, stage: usize) -> Result<&StagePrediction> {
        stage
            .checked_sub(1)
            .and_then(|i| self.stages.get(i))
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no stage {stage}", self.case)))
    }

    pub fn total_runtime(&self) -> f64 {
        self.stages.iter().map(|s| s.runtime).sum()
    }
}

fn ket_sum(labels: &[&str]) -> String {
    labels.iter().map(|l| format!("|{l}⟩")).collect::<Vec<_>>().join("+")
}

fn stage(gamma_c: f64, gap: f64, source: &[&'static str], target: &[&'static str], exponent: f64) -> StagePrediction {
    StagePrediction {
        gamma_c,
        runtime: PI / gap,
        gap,
        source: source.to_vec(),
        target: target.to_vec(),
        gamma_window_exponent: exponent,
        evolution: format!("{} → {}", ket_sum(source), ket_sum(target)),
    }
}

/// Stage-1 rate for `k` marked vertices in one clique.
pub fn gamma_c1_k_in_clique(m: usize, k: usize) -> f64 {
    let mf = m as f64;
    (-mf + mf.sqrt() * (4.0 + 4.0 * k as f64 + mf).sqrt()) / (2.0 * mf)
}

/// Stage-1 rate for the two endpoints of an inter-clique edge.
pub fn gamma_c1_edge(m: usize) -> f64 {
    let mf = m as f64;
    (-mf + mf.sqrt() * (mf + 8.0).sqrt()) / (2.0 * mf)
}

/// Truncated series `2/M - b/M² + b²/M³` used for the two-clique cases.
fn two_clique_series(m: usize, b: f64) -> f64 {
    let mf = m as f64;
    2.0 / mf - b / (mf * mf) + b * b / (mf * mf * mf)
}

pub fn gamma_c_clique_plus_one(m: usize) -> f64 {
    let mf = m as f64;
    2.0 / (mf.sqrt() * ((mf + 8.0).sqrt() - (mf + 4.0).sqrt()))
}

pub fn predict(case: CaseTag, m: usize, k: Option<usize>) -> Result<CasePrediction> {
    if m < 5 {
        return Err(Error::InvalidSize(format!("named configurations need M >= 5, got {m}")));
    }
    let mf = m as f64;
    let two_stage_gap = 4.0 * 2f64.sqrt() / mf.powf(1.5);
    let (k, stages) = match case {
        CaseTag::TwoA | CaseTag::KInClique => {
            let k = match case {
                CaseTag::TwoA => 2,
                _ => k.ok_or_else(|| Error::InvalidMarked("k-in-clique needs k".into()))?,
            };
            if k == 0 || k >= m {
                return Err(Error::InvalidMarked(format!("k-in-clique needs 1 <= k < M, got k = {k}")));
            }
            let kf = k as f64;
            (
                k,
                vec![
                    stage(gamma_c1_k_in_clique(m, k), 2.0 * (kf + 1.0) / mf.powf(1.5), &["g"], &["b"], 2.5),
                    stage(1.0 / mf, 2.0 * (kf / mf).sqrt(), &["b"], &["a"], 1.5),
                ],
            )
        }
        CaseTag::TwoB | CaseTag::TwoC | CaseTag::TwoD => {
            let gamma = match case {
                CaseTag::TwoB => gamma_c1_edge(m),
                CaseTag::TwoC => two_clique_series(m, 6.0),
                _ => two_clique_series(m, 8.0),
            };
            (
                2,
                vec![
                    stage(gamma, two_stage_gap, &["g"], &["b"], 2.5),
                    stage(1.0 / mf, 2.0 / mf.sqrt(), &["b"], &["a"], 1.5),
                ],
            )
        }
        CaseTag::TwoE => (
            2,
            vec![
                stage(two_clique_series(m, 6.0), two_stage_gap, &["m"], &["b", "h"], 2.5),
                stage(1.0 / mf, 2.0 / mf.sqrt(), &["b", "h"], &["a", "d"], 1.5),
            ],
        ),
        CaseTag::Ring1 => (m + 1, vec![stage(1.0 / mf, 2.0 / mf.sqrt(), &["b"], &["a"], 1.5)]),
        CaseTag::CliquePlus1 => (
            m + 1,
            vec![stage(gamma_c_clique_plus_one(m), 2.0 / mf.sqrt(), &["g"], &["b"], 1.5)],
        ),
        CaseTag::Ring2 | CaseTag::Ring2Shift => (
            2 * (m + 1),
            vec![stage(1.0 / mf, 2.0 * (2.0 / mf).sqrt(), &["b"], &["a"], 1.5)],
        ),
        CaseTag::Custom => return Err(Error::UnknownCase("custom".into())),
    };
    Ok(CasePrediction { case, m, k, stages })
}

/// Predicted gap of a stage (1-based).
pub fn predicted_gap(case: CaseTag, stage: usize, m: usize, k: Option<usize>) -> Result<f64> {
    Ok(predict(case, m, k)?.stage(stage)?.gap)
}

fn check_complete(n: usize, k: usize) -> Result<()> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("complete graph needs N >= 2 and 1 <= k < N, got N = {n}, k = {k}")));
    }
    Ok(())
}

/// `ΔE = √((1 - γN)² + 4kγ)` for `k` marked vertices of `K_N`.
pub fn complete_gap(n: usize, k: usize, gamma: f64) -> Result<f64> {
    check_complete(n, k)?;
    crate::hamiltonian::check_gamma(gamma)?;
    let x = 1.0 - gamma * n as f64;
    Ok((x * x + 4.0 * k as f64 * gamma).sqrt())
}

/// The single stage of search on `K_N` at `γ = 1/N`.
pub fn predict_complete(n: usize, k: usize) -> Result<StagePrediction> {
    check_complete(n, k)?;
    let nf = n as f64;
    let mut s = stage(1.0 / nf, 2.0 * (k as f64 / nf).sqrt(), &["b"], &["a"], 1.5);
    s.evolution = "|s⟩ → |a⟩".into();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn runtime_times_gap_is_pi() {
        for m in [25, 100, 400] {
            for case in CaseTag::NAMED {
                for s in predict(case, m, None).unwrap().stages {
                    assert_relative_eq!(s.runtime * s.gap, PI, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn stage_counts_and_exponents() {
        for case in CaseTag::NAMED {
            let p = predict(case, 50, None).unwrap();
            assert_eq!(p.stages.len(), if case.is_two_marked() { 2 } else { 1 });
            if case.is_two_marked() {
                assert_eq!(p.stages[0].gamma_window_exponent, 2.5);
                assert_eq!(p.stages[1].gamma_window_exponent, 1.5);
            } else {
                assert_eq!(p.stages[0].gamma_window_exponent, 1.5);
            }
        }
    }

    #[test]
    fn two_a_values() {
        let p = predict(CaseTag::TwoA, 100, None).unwrap();
        assert_relative_eq!(p.stages[0].gamma_c, (-100.0 + (100.0f64 * 112.0).sqrt()) / 200.0, epsilon = 1e-15);
        assert_relative_eq!(p.stages[0].gamma_c, 0.029150262212918, epsilon = 1e-12);
        assert_relative_eq!(p.stages[0].gap, 0.006, epsilon = 1e-15);
        assert_relative_eq!(p.stages[0].runtime, PI * 1000.0 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(p.stages[1].gamma_c, 0.01);
        assert_relative_eq!(p.stages[1].runtime, PI / 2.0 * 50f64.sqrt(), max_relative = 1e-12);
        // γ_c1 → 3/M
        let big = 1e8 as usize;
        assert_relative_eq!(gamma_c1_k_in_clique(big, 2) * big as f64, 3.0, epsilon = 1e-6);
        assert_eq!(p.stages[0].evolution, "|g⟩ → |b⟩");
    }

    #[test]
    fn two_marked_gaps_and_rates() {
        assert_relative_eq!(predicted_gap(CaseTag::TwoB, 1, 100, None).unwrap(), 4.0 * 2f64.sqrt() / 1000.0, epsilon = 1e-15);
        for m in [50, 100, 400] {
            let c = predict(CaseTag::TwoC, m, None).unwrap();
            let e = predict(CaseTag::TwoE, m, None).unwrap();
            assert_eq!(c.stages[0].gamma_c, e.stages[0].gamma_c);
            for case in [CaseTag::TwoB, CaseTag::TwoC, CaseTag::TwoD, CaseTag::TwoE] {
                let p = predict(case, m, None).unwrap();
                assert_eq!(p.stages[0].gap, c.stages[0].gap);
                assert_eq!(p.stages[0].runtime, c.stages[0].runtime);
                assert_eq!(p.stages[1].runtime, c.stages[1].runtime);
            }
        }
        assert_eq!(predict(CaseTag::TwoE, 50, None).unwrap().stages[1].evolution, "|b⟩+|h⟩ → |a⟩+|d⟩");
    }

    #[test]
    fn series_limits() {
        // M²(γ_c1 - 2/M) → -4 for the edge case
        let mut last = f64::INFINITY;
        for m in [1_000usize, 10_000, 100_000] {
            let mf = m as f64;
            let d = (mf * mf * (gamma_c1_edge(m) - 2.0 / mf) + 4.0).abs();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-3, "{last}");
        // clique-plus-1: 1 + 3/M + ...
        let m = 100_000usize;
        assert_relative_eq!((gamma_c_clique_plus_one(m) - 1.0) * m as f64, 3.0, epsilon = 1e-3);
        assert_relative_eq!(gamma_c_clique_plus_one(100), 1.0295171936299365, epsilon = 1e-13);
    }

    #[test]
    fn table_two_runtimes() {
        let r1 = predict(CaseTag::Ring1, 100, None).unwrap();
        assert_relative_eq!(r1.stages[0].runtime, 5.0 * PI, max_relative = 1e-12);
        let r2 = predict(CaseTag::Ring2, 100, None).unwrap();
        assert_relative_eq!(r2.stages[0].gap, 2.0 * 0.02f64.sqrt(), epsilon = 1e-15);
        assert_eq!(r2.stages, predict(CaseTag::Ring2Shift, 100, None).unwrap().stages);
        assert_eq!(r1.k, 101);
    }

    #[test]
    fn complete_graph() {
        assert_relative_eq!(complete_gap(1024, 4, 1.0 / 1024.0).unwrap(), 0.125, epsilon = 1e-15);
        assert_eq!(complete_gap(10, 1, 0.0).unwrap(), 1.0);
        assert_relative_eq!(complete_gap(100, 1, 0.02).unwrap(), 1.08f64.sqrt(), epsilon = 1e-15);
        let s = predict_complete(1024, 4).unwrap();
        assert_relative_eq!(s.runtime, 8.0 * PI, max_relative = 1e-12);
        assert!(complete_gap(10, 10, 0.1).is_err());
    }

    #[test]
    fn errors() {
        assert!(predict(CaseTag::Custom, 10, None).is_err());
        assert!(predict(CaseTag::TwoA, 4, None).is_err());
        assert!(predict(CaseTag::KInClique, 10, None).is_err());
        assert!(predict(CaseTag::KInClique, 10, Some(10)).is_err());
        assert!(predicted_gap(CaseTag::Ring1, 2, 10, None).is_err());
    }
}
