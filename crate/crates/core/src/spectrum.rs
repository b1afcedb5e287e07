//! Empirical 1-eigenspace type distributions.
//!
//! For a group element h the observable is the isomorphism type of
//! `ker(h - 1)` as a module over `Z/p^f`.  Reports carry raw counts so
//! runs can be merged; frequencies are derived on demand.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RMatrix;
use crate::partition::GroupType;
use crate::symplectic::{GroupSpec, Sampler};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Montecarlo,
}

/// Counts of 1-eigenspace types over one enumeration or sampling run.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub spec: GroupSpec,
    pub mode: Mode,
    pub total: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub workers: u32,
    pub counts: BTreeMap<GroupType, u64>,
}

impl SpectrumReport {
    /// Internal consistency: counts sum to the total, exhaustive totals
    /// equal the group order.
    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.counts.values().sum();
        if sum != self.total {
            return Err(Error::Malformed(format!(
                "counts sum to {sum}, total says {}",
                self.total
            )));
        }
        if self.mode == Mode::Exhaustive && Some(self.total) != self.spec.order().to_u64() {
            return Err(Error::Malformed("exhaustive total differs from group order".into()));
        }
        Ok(())
    }

    pub fn frequency(&self, g: &GroupType) -> f64 {
        *self.counts.get(g).unwrap_or(&0) as f64 / self.total as f64
    }
}

fn eigenspace_type(h: &RMatrix, f: u32) -> GroupType {
    let one = RMatrix::identity(h.ring(), h.dim());
    let t = h.sub(&one).expect("same shape").kernel_type();
    debug_assert!(t.parts().iter().all(|&part| part <= f));
    t
}

/// Exact spectrum by full enumeration.
pub fn exhaustive_spectrum(spec: GroupSpec) -> Result<SpectrumReport> {
    let mut counts: BTreeMap<GroupType, u64> = BTreeMap::new();
    let mut total = 0u64;
    for h in spec.enumerate()? {
        *counts.entry(eigenspace_type(&h, spec.f())).or_insert(0) += 1;
        total += 1;
    }
    Ok(SpectrumReport { spec, mode: Mode::Exhaustive, total, seed: None, workers: 1, counts })
}

/// Monte Carlo spectrum; deterministic given `(seed, workers)`.
pub fn mc_spectrum(spec: GroupSpec, samples: u64, seed: u64, workers: u32) -> Result<SpectrumReport> {
    if samples == 0 {
        return Err(Error::InsufficientSamples("need at least one sample".into()));
    }
    if workers == 0 {
        return Err(Error::InvalidParameter("need at least one worker".into()));
    }
    let quota = |i: u32| samples / u64::from(workers) + u64::from(u64::from(i) < samples % u64::from(workers));
    let partials: Vec<BTreeMap<GroupType, u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|i| {
                scope.spawn(move || {
                    let mut sampler = Sampler::for_worker(spec, seed, i);
                    let mut counts: BTreeMap<GroupType, u64> = BTreeMap::new();
                    for _ in 0..quota(i) {
                        let h = sampler.draw();
                        *counts.entry(eigenspace_type(&h, spec.f())).or_insert(0) += 1;
                    }
                    counts
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    // Aggregate in worker-index order.
    let mut counts: BTreeMap<GroupType, u64> = BTreeMap::new();
    for partial in partials {
        for (g, c) in partial {
            *counts.entry(g).or_insert(0) += c;
        }
    }
    Ok(SpectrumReport { spec, mode: Mode::Montecarlo, total: samples, seed: Some(seed), workers, counts })
}

/// Combines two Monte Carlo reports over the same group.
pub fn merge(a: &SpectrumReport, b: &SpectrumReport) -> Result<SpectrumReport> {
    if a.spec != b.spec {
        return Err(Error::InvalidParameter("cannot merge reports over different groups".into()));
    }
    if a.mode != Mode::Montecarlo || b.mode != Mode::Montecarlo {
        return Err(Error::InvalidParameter(
            "only montecarlo reports merge; exhaustive reports are already complete".into(),
        ));
    }
    let mut counts = a.counts.clone();
    for (g, c) in &b.counts {
        *counts.entry(g.clone()).or_insert(0) += c;
    }
    Ok(SpectrumReport {
        spec: a.spec,
        mode: Mode::Montecarlo,
        total: a.total + b.total,
        seed: if a.seed == b.seed { a.seed } else { None },
        workers: a.workers + b.workers,
        counts,
    })
}

/// One row of a theory comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub group: GroupType,
    pub observed: f64,
    pub predicted: f64,
    pub z: f64,
    pub pass: bool,
}

/// Compares observed frequencies against the limiting distribution
/// `P_{m,q}`, for the types the limit theorem covers (exponent at most
/// f-1).  Exhaustive reports carry no sampling error, so their standard
/// error is zero and only the absolute tolerance applies.
pub fn compare_to_theory(
    report: &SpectrumReport,
    tol_sigma: f64,
    tol_abs: f64,
) -> Result<Vec<Verdict>> {
    let spec = report.spec;
    if spec.m() >= 3 {
        return Err(Error::NoClosedForm { m: spec.m() });
    }
    report.validate()?;
    let cutoff = spec.f().saturating_sub(1);
    report
        .counts
        .keys()
        .filter(|g| g.exponent() <= cutoff)
        .map(|g| {
            let predicted = crate::heuristics::p_closed(spec.m(), spec.p(), g, 1e-12)?;
            let observed = report.frequency(g);
            let se = match report.mode {
                Mode::Exhaustive => 0.0,
                Mode::Montecarlo => {
                    (predicted.value * (1.0 - predicted.value) / report.total as f64).sqrt()
                }
            };
            let diff = observed - predicted.value;
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                diff.signum() * f64::INFINITY
            };
            let pass = diff.abs() <= tol_sigma * se + tol_abs + predicted.err;
            Ok(Verdict { group: g.clone(), observed, predicted: predicted.value, z, pass })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u64, f: u32, m: u32, n: u32) -> GroupSpec {
        GroupSpec::new(p, f, m, n).unwrap()
    }

    fn gt(parts: &[u32]) -> GroupType {
        GroupType::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn gl2_f2_spectrum() {
        let r = exhaustive_spectrum(spec(2, 1, 0, 1)).unwrap();
        assert_eq!(r.total, 6);
        assert_eq!(r.counts[&gt(&[])], 2);
        assert_eq!(r.counts[&gt(&[1])], 3);
        assert_eq!(r.counts[&gt(&[1, 1])], 1);
        assert_eq!(r.seed, None);
        r.validate().unwrap();
        // Sp_2 = SL_2 and SL_2(F_2) = GL_2(F_2).
        let r1 = exhaustive_spectrum(spec(2, 1, 1, 1)).unwrap();
        assert_eq!(r1.counts, r.counts);
    }

    #[test]
    fn sl2_f3_spectrum_against_raw_count() {
        // Independent oracle: walk all 81 2x2 matrices over F_3 directly.
        let mut det1 = 0u64;
        let mut fixed_free = 0u64;
        let mut one_dim = 0u64;
        for code in 0..81u64 {
            let (a, b, c, d) = (code % 3, code / 3 % 3, code / 9 % 3, code / 27 % 3);
            if (a * d + 9 - b * c) % 3 != 1 {
                continue;
            }
            det1 += 1;
            // det(g - 1) = (a-1)(d-1) - bc mod 3
            if ((a + 2) * (d + 2) + 9 - b * c) % 3 != 0 {
                fixed_free += 1;
            } else if !(a == 1 && d == 1 && b == 0 && c == 0) {
                one_dim += 1;
            }
        }
        assert_eq!(det1, 24);
        assert_eq!(fixed_free, 15);
        let r = exhaustive_spectrum(spec(3, 1, 1, 1)).unwrap();
        assert_eq!(r.total, 24);
        assert_eq!(r.counts[&gt(&[])], fixed_free);
        assert_eq!(r.counts[&gt(&[1])], one_dim);
        assert_eq!(r.counts[&gt(&[1, 1])], 1);
    }

    #[test]
    fn montecarlo_matches_exhaustive_on_tiny_group() {
        let s = spec(2, 2, 1, 1);
        let exact = exhaustive_spectrum(s).unwrap();
        let mc = mc_spectrum(s, 100_000, 42, 4).unwrap();
        mc.validate().unwrap();
        for (g, c) in &exact.counts {
            let p = *c as f64 / exact.total as f64;
            let se = (p * (1.0 - p) / mc.total as f64).sqrt();
            let obs = mc.frequency(g);
            assert!(
                (obs - p).abs() <= 4.0 * se,
                "group {g}: observed {obs}, exact {p}, se {se}"
            );
        }
    }

    #[test]
    fn montecarlo_is_deterministic() {
        let s = spec(3, 2, 2, 1);
        let a = mc_spectrum(s, 5000, 7, 3).unwrap();
        let b = mc_spectrum(s, 5000, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = mc_spectrum(s, 5000, 8, 3).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn merge_is_associative_and_commutative() {
        let s = spec(2, 2, 2, 1);
        let r1 = mc_spectrum(s, 400, 1, 1).unwrap();
        let r2 = mc_spectrum(s, 300, 2, 1).unwrap();
        let r3 = mc_spectrum(s, 200, 3, 1).unwrap();
        let left = merge(&merge(&r1, &r2).unwrap(), &r3).unwrap();
        let right = merge(&r1, &merge(&r2, &r3).unwrap()).unwrap();
        assert_eq!(left.counts, right.counts);
        assert_eq!(left.total, 900);
        let flipped = merge(&r2, &r1).unwrap();
        assert_eq!(flipped.counts, merge(&r1, &r2).unwrap().counts);
        assert!(merge(&r1, &exhaustive_spectrum(s).unwrap()).is_err());
        assert!(merge(&r1, &mc_spectrum(spec(2, 2, 1, 1), 10, 1, 1).unwrap()).is_err());
    }

    #[test]
    fn comparison_flags_finite_n_bias_honestly() {
        // GL_2(F_2) sits far from the n -> infinity limit; with exact
        // counts the standard error is zero and the verdict must fail.
        let r = exhaustive_spectrum(spec(2, 1, 0, 1)).unwrap();
        let verdicts = compare_to_theory(&r, 4.0, 0.01).unwrap();
        assert_eq!(verdicts.len(), 1, "only the trivial type has exponent <= f-1 = 0");
        let v = &verdicts[0];
        assert!(v.group.is_trivial());
        assert!((v.observed - 1.0 / 3.0).abs() < 1e-15);
        assert!((v.predicted - 0.288788).abs() < 1e-5);
        assert!(!v.pass);
        assert!(v.z.is_infinite() && v.z > 0.0);
    }

    #[test]
    fn comparison_passes_at_moderate_n() {
        let r = mc_spectrum(spec(2, 3, 1, 3), 30_000, 42, 2).unwrap();
        let verdicts = compare_to_theory(&r, 4.0, 0.01).unwrap();
        for g in [gt(&[]), gt(&[1])] {
            let v = verdicts.iter().find(|v| v.group == g).expect("type observed");
            assert!(v.pass, "group {g}: obs {} pred {} z {}", v.observed, v.predicted, v.z);
        }
        assert!(verdicts.iter().all(|v| v.group.exponent() <= 2));
    }

    #[test]
    fn comparison_rejects_m_three() {
        let r = mc_spectrum(spec(2, 3, 3, 1), 100, 1, 1).unwrap();
        assert!(matches!(compare_to_theory(&r, 4.0, 0.01), Err(Error::NoClosedForm { m: 3 })));
    }

    #[test]
    fn distance_to_limit_shrinks_with_n() {
        let dist = |n: u32| -> f64 {
            let r = mc_spectrum(spec(2, 2, 1, n), 30_000, 11, 2).unwrap();
            compare_to_theory(&r, 4.0, 0.01)
                .unwrap()
                .iter()
                .map(|v| (v.observed - v.predicted).abs())
                .sum()
        };
        let (d1, d3) = (dist(1), dist(3));
        assert!(d3 <= d1 + 0.05, "d1 = {d1}, d3 = {d3}");
    }

    #[test]
    fn report_json_is_byte_stable() {
        let r = exhaustive_spectrum(spec(2, 1, 0, 1)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"spec":{"p":2,"f":1,"m":0,"n":1},"mode":"exhaustive","total":6,"workers":1,"counts":{"[]":2,"[1]":3,"[1,1]":1}}"#
        );
        let back: SpectrumReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let mc = mc_spectrum(spec(2, 1, 1, 1), 10, 7, 2).unwrap();
        let json = serde_json::to_string(&mc).unwrap();
        assert!(json.contains(r#""total":10,"seed":7,"workers":2"#), "{json}");
    }
}
