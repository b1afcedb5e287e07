//! Distribution tables, the u-probability transform, and the class-group
//! predictor.
//!
//! A [`DistTable`] keeps each entry as an exact rational multiple of a
//! single shared prefactor (the only irrational in any closed form), so
//! the recursion `u_step` runs at the rational layer and conserves mass
//! exactly; rounding happens once, on read-out.

mod checks;
mod closed;

pub use checks::{check_hall, check_lemma_m1, check_weight_sum, IdentityCheck};
pub use closed::{
    p_closed, rank_probability_m1, u_closed, weight_w, WeightLevel, DEFAULT_EPS,
};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::approx::ApproxValue;
use crate::error::{Error, Result};
use crate::partition::{enumerate_types, GroupType};
use crate::pgroup::{cyclic_quotient_profile, group_order};
use crate::ring::is_prime;
use crate::spectrum::SpectrumReport;
use crate::Approx;

/// Default support cutoffs keeping the truncation tail under 1e-3.
pub fn default_max_weight(q: u64) -> u32 {
    if q == 2 {
        10
    } else {
        7
    }
}

#[derive(Clone, Debug)]
struct Entry {
    rel: BigRational,
    /// Absolute float error inherited from deserialized input; zero for
    /// tables built from closed forms or exact counts.
    extra: f64,
}

/// A (possibly truncated) distribution over group types.
#[derive(Clone, Debug)]
pub struct DistTable {
    q: u64,
    m: u32,
    u_level: u32,
    max_weight: u32,
    scale: Approx,
    entries: BTreeMap<GroupType, Entry>,
    tail: f64,
}

impl DistTable {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn u_level(&self) -> u32 {
        self.u_level
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    /// Upper bound on probability mass outside the support.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn read_out(&self, e: &Entry) -> Approx {
        let v = self.scale.mul_rational(&e.rel);
        ApproxValue::new(v.value, v.err + e.extra)
    }

    pub fn get(&self, g: &GroupType) -> Option<Approx> {
        self.entries.get(g).map(|e| self.read_out(e))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&GroupType, Approx)> {
        self.entries.iter().map(|(g, e)| (g, self.read_out(e)))
    }

    /// Sum of entry values plus the tail; close to 1 for complete tables.
    pub fn total_mass(&self) -> f64 {
        self.entries().map(|(_, v)| v.value).sum::<f64>() + self.tail
    }

    /// Sum of the rational layer, in units of the prefactor.  Invariant
    /// under `u_step` (exact mass preservation).
    pub fn rational_mass(&self) -> BigRational {
        self.entries.values().map(|e| &e.rel).sum()
    }

    fn sealed(
        q: u64,
        m: u32,
        u_level: u32,
        max_weight: u32,
        scale: Approx,
        entries: BTreeMap<GroupType, Entry>,
        extra_tail: f64,
    ) -> Self {
        let mut t = DistTable { q, m, u_level, max_weight, scale, entries, tail: 0.0 };
        let covered: f64 = t.entries.values().map(|e| t.read_out(e).lower()).sum();
        // slack for the float summation itself
        t.tail = ((1.0 - covered).max(0.0) + extra_tail) * (1.0 + 1e-12) + 1e-14;
        t
    }

    /// The level-m base table: `P_{m,q}` over all types of weight at most
    /// `max_weight`.
    pub fn from_closed(m: u32, q: u64, max_weight: u32, eps: f64) -> Result<Self> {
        let scale = closed::prefactor(m, q, eps)?;
        let entries = enumerate_types(max_weight)
            .into_iter()
            .map(|g| {
                let rel = closed::rel_closed(m, q, &g)?;
                Ok((g, Entry { rel, extra: 0.0 }))
            })
            .collect::<Result<_>>()?;
        Ok(Self::sealed(q, m, 0, max_weight, scale, entries, 0.0))
    }

    /// Closed-form u-probability table, levels 0 and 1.
    pub fn from_u_closed(m: u32, q: u64, u: u32, max_weight: u32, eps: f64) -> Result<Self> {
        let scale = closed::prefactor(m, q, eps)?;
        let entries = enumerate_types(max_weight)
            .into_iter()
            .map(|g| {
                let rel = closed::rel_u_closed(m, q, u, &g)?;
                Ok((g, Entry { rel, extra: 0.0 }))
            })
            .collect::<Result<_>>()?;
        Ok(Self::sealed(q, m, u, max_weight, scale, entries, 0.0))
    }

    /// Exact empirical distribution of a spectrum report (used as the base
    /// for levels without closed forms).
    pub fn from_report(report: &SpectrumReport) -> Result<Self> {
        report.validate()?;
        let total = BigInt::from(report.total);
        let entries: BTreeMap<GroupType, Entry> = report
            .counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(g, &c)| {
                (g.clone(), Entry { rel: BigRational::new(c.into(), total.clone()), extra: 0.0 })
            })
            .collect();
        let max_weight = entries
            .keys()
            .map(|g| u32::try_from(g.weight()).expect("weights are small"))
            .max()
            .unwrap_or(0);
        // frequencies sum to 1 exactly, so no sealing slack is needed
        Ok(DistTable {
            q: report.spec.p(),
            m: report.spec.m(),
            u_level: 0,
            max_weight,
            scale: ApproxValue::one(),
            entries,
            tail: 0.0,
        })
    }

    /// Unit mass on a single type; handy for tracing the recursion.
    pub fn point_mass(q: u64, m: u32, g: GroupType) -> Self {
        let max_weight = u32::try_from(g.weight()).expect("weights are small");
        let entries =
            [(g, Entry { rel: BigRational::one(), extra: 0.0 })].into_iter().collect();
        DistTable {
            q,
            m,
            u_level: 0,
            max_weight,
            scale: ApproxValue::one(),
            entries,
            tail: 0.0,
        }
    }

    /// Drops entries above `max_weight`, moving their mass into the tail.
    pub fn truncated(mut self, max_weight: u32) -> Self {
        let mut dropped = 0.0;
        let scale = self.scale;
        self.entries.retain(|g, e| {
            if g.weight() <= u64::from(max_weight) {
                true
            } else {
                let v = scale.mul_rational(&e.rel);
                dropped += v.upper() + e.extra;
                false
            }
        });
        self.tail = (self.tail + dropped) * (1.0 + 1e-12);
        self.max_weight = self.max_weight.min(max_weight);
        self
    }
}

/// One step of the u-probability recursion
/// `P'(G) = sum_H #{y in H : H/<y> iso G} P(H) / |H|`.
///
/// Quotients never gain weight, so the support stays closed and the tail
/// passes through unchanged; entries above `max_weight` are dropped into
/// the tail first.
pub fn u_step(t: &DistTable, max_weight: u32, p: u64) -> Result<DistTable> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("recursion counts need a prime, got {p}")));
    }
    if t.q != p {
        return Err(Error::InvalidParameter(format!(
            "table is over q = {}, recursion asked for p = {p}",
            t.q
        )));
    }
    let t = t.clone().truncated(max_weight);
    let mut out: BTreeMap<GroupType, Entry> = BTreeMap::new();
    for (h, e) in &t.entries {
        let order = BigInt::from(group_order(h, p));
        for (g, by_order) in cyclic_quotient_profile(h, p).iter() {
            let count: num_bigint::BigUint = by_order.values().sum();
            let coeff = BigRational::new(BigInt::from(count), order.clone());
            let slot = out
                .entry(g.clone())
                .or_insert_with(|| Entry { rel: BigRational::zero(), extra: 0.0 });
            slot.extra += e.extra * coeff.to_f64().unwrap_or(1.0) * (1.0 + 1e-9);
            slot.rel += &e.rel * coeff;
        }
    }
    Ok(DistTable {
        q: t.q,
        m: t.m,
        u_level: t.u_level + 1,
        max_weight: t.max_weight,
        scale: t.scale,
        entries: out,
        tail: t.tail,
    })
}

/// The class-group predictor `P^(u)_{m,p}` over types of weight at most
/// `max_weight`: closed forms for levels 0 and 1, recursion from the
/// closed level-2 base, and recursion from an empirical base for m >= 3.
pub fn predict(
    p: u64,
    m: u32,
    u: u32,
    max_weight: u32,
    base: Option<&SpectrumReport>,
    eps: f64,
) -> Result<DistTable> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("p must be prime, got {p}")));
    }
    match m {
        0 | 1 => DistTable::from_u_closed(m, p, u, max_weight, eps),
        2 => {
            let mut t = DistTable::from_closed(2, p, max_weight, eps)?;
            for _ in 0..u {
                t = u_step(&t, max_weight, p)?;
            }
            Ok(t)
        }
        _ => {
            let Some(report) = base else {
                return Err(Error::InvalidParameter(format!(
                    "no closed form at m = {m}; an empirical base report is required"
                )));
            };
            if report.spec.p() != p || report.spec.m() != m {
                return Err(Error::InvalidParameter(format!(
                    "base report is for (p, m) = ({}, {}), requested ({p}, {m})",
                    report.spec.p(),
                    report.spec.m()
                )));
            }
            let mut t = DistTable::from_report(report)?.truncated(max_weight);
            for _ in 0..u {
                t = u_step(&t, max_weight, p)?;
            }
            Ok(t)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    value: f64,
    err: f64,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    q: u64,
    u: u32,
    m: u32,
    entries: BTreeMap<GroupType, EntryJson>,
    tail: f64,
}

impl DistTable {
    pub fn to_json(&self) -> String {
        let doc = TableJson {
            q: self.q,
            u: self.u_level,
            m: self.m,
            entries: self
                .entries()
                .map(|(g, v)| (g.clone(), EntryJson { value: v.value, err: v.err }))
                .collect(),
            tail: self.tail,
        };
        serde_json::to_string(&doc).expect("table serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: TableJson =
            serde_json::from_str(s).map_err(|e| Error::Malformed(format!("table JSON: {e}")))?;
        if doc.q < 2 {
            return Err(Error::Malformed("q must be at least 2".into()));
        }
        if !(doc.tail >= 0.0) {
            return Err(Error::Malformed("tail must be nonnegative".into()));
        }
        let mut entries = BTreeMap::new();
        let mut max_weight = 0u32;
        for (g, e) in doc.entries {
            if !e.value.is_finite() || !(e.err >= 0.0) || e.value < -e.err {
                return Err(Error::Malformed(format!("bad entry for {g}")));
            }
            let rel = BigRational::from_float(e.value)
                .ok_or_else(|| Error::Malformed(format!("non-finite value for {g}")))?;
            max_weight = max_weight.max(u32::try_from(g.weight()).unwrap_or(u32::MAX));
            entries.insert(g, Entry { rel, extra: e.err });
        }
        Ok(DistTable {
            q: doc.q,
            m: doc.m,
            u_level: doc.u,
            max_weight,
            scale: ApproxValue::one(),
            entries,
            tail: doc.tail,
        })
    }

    /// Lossy flat view: the table metadata (q, u, m, tail) is dropped.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,value,err\n");
        for (g, v) in self.entries() {
            out.push_str(&format!("\"{g}\",{},{}\n", v.value, v.err));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::mc_spectrum;
    use crate::symplectic::GroupSpec;

    fn gt(parts: &[u32]) -> GroupType {
        GroupType::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn point_mass_steps_to_the_documented_split() {
        let t = DistTable::point_mass(2, 0, gt(&[1]));
        let s = u_step(&t, 4, 2).unwrap();
        assert_eq!(s.len(), 2);
        let trivial = s.get(&gt(&[])).unwrap();
        let cyclic = s.get(&gt(&[1])).unwrap();
        assert_eq!(trivial.value, 0.5);
        assert_eq!(cyclic.value, 0.5);
        assert!(trivial.err < 1e-14);
        assert_eq!(s.u_level(), 1);
        assert_eq!(s.rational_mass(), t.rational_mass());
    }

    #[test]
    fn u_step_preserves_rational_mass() {
        for q in [2u64, 3] {
            let t = DistTable::from_closed(1, q, 6, 1e-12).unwrap();
            let mass = t.rational_mass();
            let s1 = u_step(&t, 6, q).unwrap();
            let s2 = u_step(&s1, 6, q).unwrap();
            assert_eq!(s1.rational_mass(), mass);
            assert_eq!(s2.rational_mass(), mass);
            assert_eq!(s2.u_level(), 2);
        }
    }

    #[test]
    fn recursion_matches_closed_forms() {
        for m in [0u32, 1] {
            for q in [2u64, 3] {
                let w = default_max_weight(q);
                let mut stepped = DistTable::from_closed(m, q, w, 1e-12).unwrap();
                stepped = u_step(&stepped, w, q).unwrap();
                let closed = DistTable::from_u_closed(m, q, 1, w, 1e-12).unwrap();
                let budget = stepped.tail() + closed.tail();
                for g in enumerate_types(5) {
                    let a = stepped.get(&g).unwrap();
                    let b = closed.get(&g).unwrap();
                    let slack = a.err + b.err + budget;
                    assert!(
                        (a.value - b.value).abs() <= slack,
                        "m={m} q={q} g={g}: {} vs {} (slack {slack})",
                        a.value,
                        b.value
                    );
                }
            }
        }
    }

    #[test]
    fn closed_tables_carry_unit_mass() {
        for (m, q) in [(0u32, 2u64), (1, 2), (2, 2), (0, 3), (1, 3), (2, 3)] {
            let t = DistTable::from_closed(m, q, default_max_weight(q), 1e-12).unwrap();
            let mass = t.total_mass();
            assert!((mass - 1.0).abs() < 1e-9, "m={m} q={q}: {mass}");
            assert!(t.tail() < 1e-3, "m={m} q={q}: tail {}", t.tail());
        }
    }

    #[test]
    fn predictor_reproduces_level_two_examples() {
        // P^(1)_2((1,1)) = (p)inf/(p^2)inf * (p^3+p^2-1)/(p^7(p-1)) at p=2
        let t = predict(2, 2, 1, 10, None, 1e-12).unwrap();
        let got = t.get(&gt(&[1, 1])).unwrap();
        let pref = closed::prefactor::<f64>(2, 2, 1e-12).unwrap().value;
        let expected = pref * 11.0 / 128.0;
        assert!((got.value - expected).abs() <= 1e-3, "{} vs {expected}", got.value);
        assert!((got.value - 0.0360442).abs() <= 1e-3);

        // P^(2)_2(()) = (p^4)_1 (p)inf / ((p)_1 (p^2)inf) at p=2
        let t = predict(2, 2, 2, 10, None, 1e-12).unwrap();
        let got = t.get(&gt(&[])).unwrap();
        let expected = (15.0 / 16.0) / (1.0 / 2.0) * pref;
        assert!((got.value - expected).abs() <= 1e-3, "{} vs {expected}", got.value);
        assert!((got.value - 0.786419).abs() <= 1e-3);
    }

    #[test]
    fn predictor_uses_closed_forms_below_level_two() {
        let t = predict(2, 0, 1, 6, None, 1e-12).unwrap();
        let v = t.get(&gt(&[])).unwrap();
        assert!((v.value - 0.577576).abs() < 1e-6);
        assert_eq!(t.u_level(), 1);
        let t = predict(2, 1, 2, 8, None, 1e-12).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn predictor_above_level_two_needs_a_base() {
        assert!(predict(2, 3, 0, 6, None, 1e-12).is_err());
        let report = mc_spectrum(GroupSpec::new(2, 3, 3, 1).unwrap(), 4000, 9, 2).unwrap();
        let t = predict(2, 3, 1, 6, Some(&report), 1e-12).unwrap();
        assert!((t.total_mass() - 1.0).abs() < 1e-9);
        assert_eq!(t.u_level(), 1);
        assert_eq!(t.m(), 3);
        // mismatched base parameters are rejected
        assert!(predict(2, 4, 0, 6, Some(&report), 1e-12).is_err());
        assert!(predict(3, 3, 0, 6, Some(&report), 1e-12).is_err());
    }

    #[test]
    fn truncation_moves_mass_to_tail() {
        let t = DistTable::point_mass(2, 0, gt(&[3]));
        let s = u_step(&t, 2, 2).unwrap();
        assert!(s.is_empty());
        assert!(s.tail() >= 1.0);
    }

    #[test]
    fn json_round_trip_is_stable() {
        let t = predict(2, 1, 1, 6, None, 1e-12).unwrap();
        let json = t.to_json();
        assert!(json.starts_with(r#"{"q":2,"u":1,"m":1,"entries":{"[]":{"value":"#), "{json}");
        let back = DistTable::from_json(&json).unwrap();
        assert_eq!(back.q(), 2);
        assert_eq!(back.u_level(), 1);
        assert_eq!(back.max_weight(), 6);
        for (g, v) in t.entries() {
            let w = back.get(g).unwrap();
            assert!((v.value - w.value).abs() < 1e-15);
            assert!(w.err >= v.err * 0.99);
        }
        assert_eq!(t.to_json(), json);
        assert!(DistTable::from_json("{\"q\":1,\"u\":0,\"m\":0,\"entries\":{},\"tail\":0}").is_err());
        assert!(DistTable::from_json("not json").is_err());
    }

    #[test]
    fn stepping_a_deserialized_table_stays_sound() {
        let t = DistTable::from_closed(0, 2, 6, 1e-12).unwrap();
        let reloaded = DistTable::from_json(&t.to_json()).unwrap();
        let direct = u_step(&t, 6, 2).unwrap();
        let via_json = u_step(&reloaded, 6, 2).unwrap();
        for (g, v) in direct.entries() {
            let w = via_json.get(g).unwrap();
            assert!((v.value - w.value).abs() <= v.err + w.err + 1e-12, "{g}");
        }
    }

    #[test]
    fn csv_has_quoted_groups() {
        let t = predict(2, 1, 0, 3, None, 1e-12).unwrap();
        let csv = t.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("group,value,err"));
        assert!(csv.contains("\"[]\","));
        assert!(csv.contains("\"[1,1]\","));
        assert_eq!(csv.lines().count(), 1 + t.len());
    }
}
