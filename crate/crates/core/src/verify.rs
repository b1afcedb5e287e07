//! Release-gate check suites.
//!
//! Every cross-check the crate promises is bundled into a named [`Suite`];
//! the CLI `verify` subcommand and the acceptance test drive the same
//! functions, so the gate cannot drift from what users can rerun.  All
//! tolerances and sample sizes are pinned here as constants; loosening one
//! is a release decision, not a test detail.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::heuristics::{
    check_hall, check_lemma_m1, check_weight_sum, default_max_weight, p_closed, predict,
    rank_probability_m1, u_closed, u_step, DistTable, WeightLevel, DEFAULT_EPS,
};
use crate::partition::{enumerate_types, GroupType};
use crate::pgroup::aut_order;
use crate::spectrum::{compare_to_theory, mc_spectrum};
use crate::symplectic::{sampler_selftest, GroupSpec};

/// Seed for every randomized suite; fixed so reruns are byte-identical.
pub const VERIFY_SEED: u64 = 1729;
/// Significance level for the sampler chi-square test.
pub const CHI2_SIGNIFICANCE: f64 = 0.99;
/// Samples drawn per group element in the sampler suite.
pub const SAMPLES_PER_ELEMENT: u64 = 1000;
/// Monte Carlo draws per spectrum run.
pub const SPECTRUM_SAMPLES: u64 = 200_000;
/// Sigma multiplier for spectrum comparisons.
pub const SPECTRUM_TOL_SIGMA: f64 = 4.0;
/// Absolute slack for spectrum comparisons.
pub const SPECTRUM_TOL_ABS: f64 = 0.01;
/// Residual bound for the untruncated Hall check.
pub const HALL_INF_TOL: f64 = 1e-6;
/// Exponent cutoff for the level-1 lemma sums.
pub const LEMMA_EXPONENT: u32 = 12;
/// Certified tail must stay below this in the lemma suite.
pub const LEMMA_TAIL_BOUND: f64 = 1e-3;
/// Combined error budget when the recursion meets a closed form.
pub const LEVEL_TOL: f64 = 1e-3;
/// Tolerance for the two worked level-2 values.
pub const M2_TOL: f64 = 1e-3;
/// Term-by-term slack for the grouped rank comparison.
pub const RANK_MATCH_TOL: f64 = 1e-6;
/// Weight cutoff for rank and weight-sum checks.
pub const WEIGHT_SUM_CUTOFF: u32 = 12;
/// Tolerance on the truncated weight sum.
pub const WEIGHT_SUM_TOL: f64 = 1e-2;
/// Reference value of `1/(2)_inf`, the p = 2 weight-sum limit.
pub const WEIGHT_SUM_LIMIT_P2: f64 = 3.462746;

/// One named check with its verdict and a short measurement string.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, pass: bool, detail: String) -> Self {
        CheckOutcome { name: name.into(), pass, detail }
    }
}

/// True when every outcome passed.
pub fn all_pass(outcomes: &[CheckOutcome]) -> bool {
    outcomes.iter().all(|c| c.pass)
}

/// The named suites accepted by `verify --suite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Orders,
    Sampler,
    Spectrum,
    Hall,
    Lemma,
    Level0,
    Level1,
    M2Examples,
    Weights,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Orders,
        Suite::Sampler,
        Suite::Spectrum,
        Suite::Hall,
        Suite::Lemma,
        Suite::Level0,
        Suite::Level1,
        Suite::M2Examples,
        Suite::Weights,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Orders => "orders",
            Suite::Sampler => "sampler",
            Suite::Spectrum => "spectrum",
            Suite::Hall => "hall",
            Suite::Lemma => "lemma",
            Suite::Level0 => "level0",
            Suite::Level1 => "level1",
            Suite::M2Examples => "m2-examples",
            Suite::Weights => "weights",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Runs one suite.  `workers` only affects the spectrum suite.
pub fn run_suite(suite: Suite, workers: u32) -> Result<Vec<CheckOutcome>> {
    match suite {
        Suite::Orders => orders_suite(),
        Suite::Sampler => sampler_suite(),
        Suite::Spectrum => spectrum_suite(workers),
        Suite::Hall => hall_suite(),
        Suite::Lemma => lemma_suite(),
        Suite::Level0 => level_suite(0),
        Suite::Level1 => level_suite(1),
        Suite::M2Examples => m2_suite(),
        Suite::Weights => weights_suite(),
    }
}

/// Runs every suite in declaration order.
pub fn all_suites(workers: u32) -> Result<Vec<(Suite, Vec<CheckOutcome>)>> {
    Suite::ALL.into_iter().map(|s| Ok((s, run_suite(s, workers)?))).collect()
}

/// Order formulas against exhaustive counts for every 2x2 spec with f <= 2.
fn orders_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (p, f) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2)] {
        for m in 0..=f {
            let spec = GroupSpec::new(p, f, m, 1)?;
            let counted = spec.enumerate()?.count();
            let formula = spec.order();
            out.push(CheckOutcome::new(
                format!("order({p},{f},{m},1)"),
                formula == BigUint::from(counted),
                format!("formula {formula}, enumerated {counted}"),
            ));
        }
    }
    Ok(out)
}

/// Chi-square uniformity of the sampler on fully enumerable groups.
fn sampler_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (p, f, m) in [(2u64, 1u32, 1u32), (3, 1, 1), (2, 2, 1), (2, 2, 2)] {
        let spec = GroupSpec::new(p, f, m, 1)?;
        let order = spec.order().to_u64().expect("tiny group");
        let samples = order * SAMPLES_PER_ELEMENT;
        let report = sampler_selftest(spec, samples, CHI2_SIGNIFICANCE, VERIFY_SEED)?;
        out.push(CheckOutcome::new(
            format!("chi2({p},{f},{m},1)"),
            report.pass,
            format!(
                "chi2 {:.1} vs threshold {:.1} at {} dof",
                report.chi2, report.threshold, report.dof
            ),
        ));
    }
    Ok(out)
}

/// Empirical kernel-type frequencies at (2,3,m,8) against the limit law,
/// for every type the limit theorem covers up to weight 3.
fn spectrum_suite(workers: u32) -> Result<Vec<CheckOutcome>> {
    let gated: Vec<GroupType> =
        enumerate_types(3).into_iter().filter(|g| g.exponent() <= 2).collect();
    let mut out = Vec::new();
    for m in 0..=2u32 {
        let spec = GroupSpec::new(2, 3, m, 8)?;
        let report = mc_spectrum(spec, SPECTRUM_SAMPLES, VERIFY_SEED, workers)?;
        let verdicts = compare_to_theory(&report, SPECTRUM_TOL_SIGMA, SPECTRUM_TOL_ABS)?;
        for g in &gated {
            let name = format!("spectrum(2,3,{m},8) {g}");
            match verdicts.iter().find(|v| v.group == *g) {
                Some(v) => out.push(CheckOutcome::new(
                    name,
                    v.pass,
                    format!(
                        "observed {:.5}, predicted {:.5}, z {:+.2}",
                        v.observed, v.predicted, v.z
                    ),
                )),
                None => out.push(CheckOutcome::new(name, false, "type never sampled".into())),
            }
        }
    }
    Ok(out)
}

/// Hall's convolution identity over every pair of types of weight <= 3.
fn hall_suite() -> Result<Vec<CheckOutcome>> {
    let types = enumerate_types(3);
    let levels = [
        WeightLevel::Finite(0),
        WeightLevel::Finite(1),
        WeightLevel::Finite(2),
        WeightLevel::Infinite,
    ];
    let mut out = Vec::new();
    for q in [2u64, 3] {
        for k in levels {
            let mut worst = BigRational::zero();
            let mut pass = true;
            for z in &types {
                for g in &types {
                    let c = check_hall(k, z, g, q, 6)?;
                    let ok = match k {
                        WeightLevel::Finite(_) => c.residual.is_zero(),
                        WeightLevel::Infinite => {
                            c.residual.to_f64().unwrap_or(f64::INFINITY) < HALL_INF_TOL
                        }
                    };
                    if !ok {
                        pass = false;
                    }
                    if c.residual > worst {
                        worst = c.residual;
                    }
                }
            }
            let kname = match k {
                WeightLevel::Finite(j) => j.to_string(),
                WeightLevel::Infinite => "inf".into(),
            };
            out.push(CheckOutcome::new(
                format!("hall(q={q},k={kname})"),
                pass,
                format!("{} pairs, largest residual {worst}", types.len() * types.len()),
            ));
        }
    }
    Ok(out)
}

/// The level-1 cyclic-quotient lemma with its certified geometric tail.
fn lemma_suite() -> Result<Vec<CheckOutcome>> {
    let gs = [
        GroupType::trivial(),
        GroupType::new(vec![1])?,
        GroupType::new(vec![1, 1])?,
    ];
    let mut out = Vec::new();
    for q in [2u64, 3] {
        for u in [1u32, 2] {
            for g in &gs {
                let c = check_lemma_m1(g, u, q, LEMMA_EXPONENT)?;
                let tail = c.tail.to_f64().unwrap_or(f64::INFINITY);
                out.push(CheckOutcome::new(
                    format!("lemma(q={q},u={u},g={g})"),
                    c.confirmed() && tail < LEMMA_TAIL_BOUND,
                    format!(
                        "residual {:.3e} within tail {tail:.3e}",
                        c.residual.to_f64().unwrap_or(f64::NAN)
                    ),
                ));
            }
        }
    }
    Ok(out)
}

/// The u-step recursion against the closed forms at level `m`, on every
/// type of weight <= 5.
fn level_suite(m: u32) -> Result<Vec<CheckOutcome>> {
    let targets = enumerate_types(5);
    let mut out = Vec::new();
    for q in [2u64, 3] {
        let w = default_max_weight(q);
        let mut table = DistTable::from_closed(m, q, w, DEFAULT_EPS)?;
        for u in 1..=2u32 {
            table = u_step(&table, w, q)?;
            let mut pass = true;
            let mut worst_gap = 0.0f64;
            let mut worst_budget = 0.0f64;
            for g in &targets {
                let direct = u_closed::<f64>(m, q, u, g, DEFAULT_EPS)?;
                let stepped = table
                    .get(g)
                    .ok_or_else(|| Error::InvalidParameter(format!("table misses {g}")))?;
                let gap = (stepped.value - direct.value).abs();
                let budget = stepped.err + direct.err + table.tail();
                if gap > budget || budget > LEVEL_TOL {
                    pass = false;
                }
                worst_gap = worst_gap.max(gap);
                worst_budget = worst_budget.max(budget);
            }
            out.push(CheckOutcome::new(
                format!("level{m}(q={q},u={u})"),
                pass,
                format!(
                    "{} types, worst gap {worst_gap:.2e} within budget {worst_budget:.2e}",
                    targets.len()
                ),
            ));
        }
    }
    Ok(out)
}

/// The two worked level-2 values: u = 1 at [1,1] and u = 2 at [].
fn m2_suite() -> Result<Vec<CheckOutcome>> {
    let w = default_max_weight(2);
    // both closed forms share the level-1 prefactor, which is exactly the
    // trivial-type level-1 probability
    let pref = p_closed::<f64>(1, 2, &GroupType::trivial(), DEFAULT_EPS)?;
    let cases = [
        // (p^3+p^2-1)/(p^7(p-1)) at p = 2
        (1u32, GroupType::new(vec![1, 1])?, 11.0 / 128.0),
        // (p^4)_1/(p)_1 at p = 2
        (2, GroupType::trivial(), 15.0 / 8.0),
    ];
    let mut out = Vec::new();
    for (u, g, rel) in cases {
        let table = predict(2, 2, u, w, None, DEFAULT_EPS)?;
        let got = table
            .get(&g)
            .ok_or_else(|| Error::InvalidParameter(format!("table misses {g}")))?;
        let want = rel * pref.value;
        out.push(CheckOutcome::new(
            format!("m2(u={u},{g})"),
            (got.value - want).abs() <= M2_TOL,
            format!("recursion {:.6}, closed form {want:.6}", got.value),
        ));
    }
    Ok(out)
}

/// Rank-law mass, grouped-rank agreement, and the weight-sum limit.
fn weights_suite() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for u in [0u32, 1] {
        let mut total = 0.0f64;
        let mut slack = 1e-13;
        for r in 0..=WEIGHT_SUM_CUTOFF {
            let v = rank_probability_m1::<f64>(2, u, r, DEFAULT_EPS)?;
            total += v.value;
            slack += v.err;
        }
        // the exact partial sum lies in [0.999, 1]; the float estimate may
        // poke past 1 by at most the certified error
        out.push(CheckOutcome::new(
            format!("rank-mass(u={u})"),
            total >= 0.999 && total <= 1.0 + slack,
            format!("sum over r <= {WEIGHT_SUM_CUTOFF} is {total:.6}"),
        ));
    }

    let table = predict(2, 1, 0, WEIGHT_SUM_CUTOFF, None, DEFAULT_EPS)?;
    let mut pass = true;
    let mut worst = 0.0f64;
    for r in 0..=4usize {
        let direct = rank_probability_m1::<f64>(2, 0, r as u32, DEFAULT_EPS)?;
        let mut grouped = 0.0f64;
        let mut errs = direct.err;
        for (g, v) in table.entries() {
            if g.rank() == r {
                grouped += v.value;
                errs += v.err;
            }
        }
        let gap = (grouped - direct.value).abs();
        if gap > RANK_MATCH_TOL + table.tail() + errs {
            pass = false;
        }
        worst = worst.max(gap);
    }
    out.push(CheckOutcome::new(
        "rank-grouped(r<=4)",
        pass,
        format!("worst gap {worst:.2e} against tail {:.2e}", table.tail()),
    ));

    let residual = check_weight_sum(2, WEIGHT_SUM_CUTOFF)?;
    let sum: f64 = enumerate_types(WEIGHT_SUM_CUTOFF)
        .iter()
        .map(|g| 1.0 / aut_order(g, 2).to_f64().expect("aut order fits"))
        .sum();
    out.push(CheckOutcome::new(
        format!("weight-sum(2,{WEIGHT_SUM_CUTOFF})"),
        residual < WEIGHT_SUM_TOL && (sum - WEIGHT_SUM_LIMIT_P2).abs() < WEIGHT_SUM_TOL,
        format!("sum {sum:.6} vs limit {WEIGHT_SUM_LIMIT_P2}"),
    ));
    Ok(out)
}
