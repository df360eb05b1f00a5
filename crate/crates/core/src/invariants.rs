//! Fricke and Siegel-Ramachandra invariants of ray classes, the elements
//! `xi_t`, and the numerical stabilizer of a Weber value.

use num_rational::Ratio;
use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modforms::{weber_h_at, HPoint, ModularValues, TorsionVector};
use crate::numeric::{compare, decimal, AppComplex, Comparison, PrecisionContext};
use crate::numtheory::gcd;
use crate::quadfield::{Field, Ideal, KElem};
use crate::rayclass::{RayClass, RayClassGroup, Subgroup};

/// The data `(omega, (r_1, r_2))` attached to a representative ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PeriodData {
    /// `omega = omega_1 / omega_2`, in the fundamental domain.
    pub omega: KElem,
    pub v: TorsionVector,
}

/// Oriented, Gauss-reduced basis `[omega_1, omega_2]` of `m c^-1` and the
/// solution of `1 = r_1 omega_1 + r_2 omega_2`.
pub fn period_data(m: &Ideal, c: &Ideal) -> Result<PeriodData> {
    if !m.is_coprime(c) {
        return Err(Error::NotCoprime);
    }
    let f = m.field();
    // m c^-1 = (m conj(c)) / N(c)
    let big = m.mul(&c.conj());
    let n = c.norm();
    let [w1, w2] = big.reduced_basis();
    // w2 / w1 is reduced; orient so that Im(omega_1 / omega_2) > 0
    let cross = f.mul(w2, f.conj(w1)).y;
    let (o1, o2) = if cross > 0 { (w2, w1) } else { (w2.neg(), w1) };
    let det = o1.x * o2.y - o2.x * o1.y;
    // n = r_1 o1 + r_2 o2 in O_K coordinates
    let r1 = Ratio::new(n * o2.y, det);
    let r2 = Ratio::new(-n * o1.y, det);
    let num = f.mul(o1, f.conj(o2));
    let omega = KElem::new(num, f.norm(o2) as i64);
    Ok(PeriodData { omega, v: TorsionVector::new(r1, r2) })
}

/// `(f_m(C), ln |g_m(C)|)` from a given representative ideal of the class.
pub fn invariant_from_ideal(m: &Ideal, c: &Ideal, ctx: &PrecisionContext) -> Result<(AppComplex, Float)> {
    let pd = period_data(m, c)?;
    let omega = HPoint::new(HPoint::field_element(m.field(), pd.omega, ctx))?;
    let mv = ModularValues::at(&omega, ctx)?;
    let v = pd.v.mod_one();
    let fv = mv.fricke(&v, ctx)?;
    let w = v.canonical();
    let lg = mv.log_abs_siegel_raw(&ctx.ratio(w.r1), &ctx.ratio(w.r2));
    let scale = 12 * m.least_positive_integer();
    Ok((fv, lg * scale))
}

/// Invariants of `C` from its deterministic representative.
pub fn invariant_at(group: &RayClassGroup, c: RayClass, ctx: &PrecisionContext) -> Result<(AppComplex, Float)> {
    if group.modulus().is_one() {
        return Err(Error::InvalidInput("the modulus must be proper".into()));
    }
    invariant_from_ideal(group.modulus(), &group.representative(c), ctx)
}

#[derive(Clone, Debug)]
pub struct InvariantEntry {
    pub class: RayClass,
    pub fricke_value: AppComplex,
    pub log_abs_siegel: Float,
}

/// One entry per class, in class index order.
#[derive(Clone, Debug)]
pub struct InvariantTable {
    pub modulus: Ideal,
    pub digits: u32,
    pub entries: Vec<InvariantEntry>,
}

pub fn invariant_table(group: &RayClassGroup, ctx: &PrecisionContext) -> Result<InvariantTable> {
    if group.modulus().is_one() {
        return Err(Error::InvalidInput("the modulus must be proper".into()));
    }
    let classes: Vec<RayClass> = group.classes().collect();
    let entries = classes
        .par_iter()
        .map(|&c| {
            let (fricke_value, log_abs_siegel) = invariant_at(group, c, ctx)?;
            Ok(InvariantEntry { class: c, fricke_value, log_abs_siegel })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantTable { modulus: *group.modulus(), digits: ctx.digits, entries })
}

impl InvariantTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fricke(&self, c: RayClass) -> &AppComplex {
        &self.entries[c.0].fricke_value
    }

    pub fn log_g(&self, c: RayClass) -> &Float {
        &self.entries[c.0].log_abs_siegel
    }

    pub fn export(&self, group: &RayClassGroup, digits: usize) -> TableExport {
        TableExport {
            modulus: self.modulus.hnf(),
            digits: self.digits,
            entries: self
                .entries
                .iter()
                .map(|e| {
                    let (re, im) = e.fricke_value.to_strings(digits);
                    EntryExport {
                        class: group.exponents(e.class),
                        fricke_re: re,
                        fricke_im: im,
                        log_abs_siegel: decimal(&e.log_abs_siegel, digits),
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryExport {
    pub class: Vec<i64>,
    pub fricke_re: String,
    pub fricke_im: String,
    pub log_abs_siegel: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableExport {
    pub modulus: (i64, i64, i64),
    pub digits: u32,
    pub entries: Vec<EntryExport>,
}

/// Largest relative deviation between the table and invariants recomputed
/// from a second representative of each class (classes with only one
/// representative found are skipped). Returns the worst deviation and the
/// number of classes compared.
pub fn representative_deviation(
    group: &RayClassGroup,
    table: &InvariantTable,
    classes: &[RayClass],
    ctx: &PrecisionContext,
) -> Result<(Float, usize)> {
    let reps = group.find_representatives(2);
    let mut worst = Float::new(ctx.bits());
    let mut compared = 0;
    for &c in classes {
        let Some(second) = reps[c.0].iter().find(|a| **a != group.representative(c)) else {
            continue;
        };
        let (fv, lg) = invariant_from_ideal(group.modulus(), second, ctx)?;
        worst = worst.max(&relative(&fv, table.fricke(c)));
        let dl = Float::with_val(ctx.bits(), &lg - table.log_g(c)).abs();
        worst = worst.max(&(dl / table.log_g(c).clone().abs().max(&Float::with_val(ctx.bits(), 1))));
        compared += 1;
    }
    Ok((worst, compared))
}

/// Largest relative deviation between the invariant at `rep(C) rep(C')` and
/// the table entry at `C C'` over all `C`. The product ideal is a different
/// representative of `C C'`, so this tests the Galois action as translation.
pub fn translation_deviation(
    group: &RayClassGroup,
    table: &InvariantTable,
    shift: RayClass,
    ctx: &PrecisionContext,
) -> Result<Float> {
    let r = group.representative(shift);
    let devs = group
        .classes()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&c| {
            let a = group.representative(c).mul(&r);
            let (fv, lg) = invariant_from_ideal(group.modulus(), &a, ctx)?;
            let target = group.mul(c, shift);
            let df = relative(&fv, table.fricke(target));
            let dl = Float::with_val(ctx.bits(), &lg - table.log_g(target)).abs()
                / table.log_g(target).clone().abs().max(&Float::with_val(ctx.bits(), 1));
            Ok(df.max(&dl))
        })
        .collect::<Result<Vec<Float>>>()?;
    Ok(devs.into_iter().fold(Float::new(ctx.bits()), |a, b| a.max(&b)))
}

/// Whether the multiset of rounded values is unchanged by translation by `shift`.
pub fn translated_multiset_matches(group: &RayClassGroup, table: &InvariantTable, shift: RayClass, digits: usize) -> bool {
    let key = |e: &AppComplex| e.to_strings(digits);
    let mut a: Vec<_> = table.entries.iter().map(|e| key(&e.fricke_value)).collect();
    let mut b: Vec<_> = group.classes().map(|c| key(table.fricke(group.mul(c, shift)))).collect();
    a.sort();
    b.sort();
    a == b
}

fn relative(a: &AppComplex, b: &AppComplex) -> Float {
    let p = a.prec();
    let scale = a.abs().max(&b.abs()).max(&Float::with_val(p, 1));
    (a - b).abs() / scale
}

fn check_xi_input(field: Field, n: i64, t: i64) -> Result<()> {
    if matches!(field.disc(), -3 | -4) {
        return Err(Error::OutOfScope("xi_t needs d_K other than -3 and -4".into()));
    }
    if n < 2 || gcd(n, t) != 1 || (t - 1).rem_euclid(n) == 0 || (t + 1).rem_euclid(n) == 0 {
        return Err(Error::InvalidInput(format!("t = {t} must be a unit other than +-1 mod {n}")));
    }
    Ok(())
}

/// `xi_t = (h(t/N) - h(1/N))^{12N}`.
pub fn xi_t(field: Field, n: i64, t: i64, ctx: &PrecisionContext) -> Result<AppComplex> {
    check_xi_input(field, n, t)?;
    let mut c = *ctx;
    for _ in 0..=ctx.max_escalations {
        let a = weber_h_at(field, &TorsionVector::from_ints(0, t, n), &c)?;
        let b = weber_h_at(field, &TorsionVector::from_ints(0, 1, n), &c)?;
        let diff = &a - &b;
        if diff.abs() >= c.pow10(-(c.digits as i32) / 2) {
            return Ok(diff.powu(12 * n as u32));
        }
        c = c.escalated();
    }
    Err(Error::DegenerateDifference)
}

/// `xi_t^{sigma(C')} = (f(C_t C') - f(C'))^{12N}` from a level-`N` table.
pub fn conjugate_xi(group: &RayClassGroup, table: &InvariantTable, t: i64, shift: RayClass) -> Result<AppComplex> {
    let n = group.rational_level()?;
    check_xi_input(group.field(), n, t)?;
    let ct = group.c_t(t)?;
    let d = table.fricke(group.mul(ct, shift)) - table.fricke(shift);
    if d.abs() < Float::with_val(d.prec(), 10).pow(-(table.digits as i32) / 2) {
        return Err(Error::DegenerateDifference);
    }
    Ok(d.powu(12 * n as u32))
}

use rug::ops::Pow;

/// Result of the numerical stabilizer computation.
#[derive(Clone, Debug)]
pub struct FixingReport {
    pub subgroup: Subgroup,
    /// Number of distinct values among the Fricke invariants of all classes.
    pub distinct_values: usize,
    /// Digits at which every comparison was decided.
    pub digits: u32,
    pub table: InvariantTable,
}

/// `{C' : f(C') = f(C_1)}` in `Cl(m)`, with hysteresis and precision escalation.
pub fn fixing_group(group: &RayClassGroup, ctx: &PrecisionContext) -> Result<FixingReport> {
    let mut c = *ctx;
    for _ in 0..=ctx.max_escalations {
        let table = invariant_table(group, &c)?;
        if let Some((members, distinct)) = classify(group, &table, &c) {
            let subgroup = group.subgroup_from(members);
            if !group.is_subgroup(&subgroup) {
                return Err(Error::Indeterminate);
            }
            return Ok(FixingReport { subgroup, distinct_values: distinct, digits: c.digits, table });
        }
        c = c.escalated();
    }
    Err(Error::Indeterminate)
}

/// Fixing set of the identity class and the number of value clusters, or
/// `None` if some comparison falls in the hysteresis band.
fn classify(group: &RayClassGroup, table: &InvariantTable, ctx: &PrecisionContext) -> Option<(Vec<RayClass>, usize)> {
    let base = table.fricke(group.identity());
    let mut members = Vec::new();
    for c in group.classes() {
        match compare(table.fricke(c), base, ctx) {
            Comparison::Equal => members.push(c),
            Comparison::Distinct => {}
            Comparison::Undecided => return None,
        }
    }
    let mut clusters: Vec<&AppComplex> = Vec::new();
    for e in &table.entries {
        let mut found = false;
        for r in &clusters {
            match compare(&e.fricke_value, r, ctx) {
                Comparison::Equal => {
                    found = true;
                    break;
                }
                Comparison::Distinct => {}
                Comparison::Undecided => return None,
            }
        }
        if !found {
            clusters.push(&e.fricke_value);
        }
    }
    Some((members, clusters.len()))
}
