//! Character sums of Siegel-Ramachandra invariants and of `ln |xi_t|`, their
//! decomposition over intermediate levels, truncated Hecke L-values and the
//! second limit formula.

use num_complex::Complex64;
use rug::Float;
use serde::Serialize;

use crate::chars::{choose_gammas, gamma_ideal, gauss_sum, primitive_descent, Character, LevelLattice};
use crate::error::{Error, Result};
use crate::invariants::{invariant_table, InvariantTable};
use crate::numeric::{AppComplex, PrecisionContext};
use crate::numtheory::smallest_prime_factors;
use crate::quadfield::Ideal;
use crate::rayclass::{RayClass, RayClassGroup};
use crate::theorems::np_nm;

/// `chi(C)` for every class, from the `D`-th roots of unity.
fn values(chi: &Character, group: &RayClassGroup, ctx: &PrecisionContext) -> Vec<AppComplex> {
    let d = chi.value_order();
    let roots: Vec<AppComplex> =
        (0..d).map(|k| AppComplex::expi2pi(&(Float::with_val(ctx.bits(), k) / Float::with_val(ctx.bits(), d)))).collect();
    group.classes().map(|c| roots[chi.value_exp(c) as usize].clone()).collect()
}

fn weighted_sum(weights: &[AppComplex], terms: impl Iterator<Item = Float>, ctx: &PrecisionContext) -> AppComplex {
    let mut acc = AppComplex::zero(ctx.bits());
    for (w, x) in weights.iter().zip(terms) {
        acc = &acc + &w.scale(&x);
    }
    acc
}

/// `S(chi) = sum_C chi(C) ln |g_m(C)|`.
pub fn stickelberger(chi: &Character, group: &RayClassGroup, table: &InvariantTable, ctx: &PrecisionContext) -> AppComplex {
    let w = values(chi, group, ctx);
    weighted_sum(&w, group.classes().map(|c| table.log_g(c).clone()), ctx)
}

/// `ln |xi_t^{sigma(C)}| = 12 N ln |f(C_t C) - f(C)|` for every class.
pub fn log_xi_conjugates(group: &RayClassGroup, table: &InvariantTable, t: i64, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    let n = group.rational_level()?;
    let ct = group.c_t(t)?;
    let tol = ctx.pow10(-(ctx.digits as i32) / 2);
    group
        .classes()
        .map(|c| {
            let d = (table.fricke(group.mul(ct, c)) - table.fricke(c)).abs();
            if d < tol {
                return Err(Error::DegenerateDifference);
            }
            Ok(d.ln() * (12 * n))
        })
        .collect()
}

/// `S(chi, xi_t) = sum_C chi(C) ln |xi_t^{sigma(C)}|`.
pub fn s_chi_xi(
    chi: &Character,
    group: &RayClassGroup,
    table: &InvariantTable,
    t: i64,
    ctx: &PrecisionContext,
) -> Result<AppComplex> {
    let logs = log_xi_conjugates(group, table, t, ctx)?;
    Ok(weighted_sum(&values(chi, group, ctx), logs.into_iter(), ctx))
}

/// One of the two level terms
/// `(N / M) sum_{B mod ker} chi(B) ln |g_(M)(C_{M, n} pi(B))| sum_{A in ker} chi(A)`.
#[derive(Clone, Debug)]
pub struct LevelTerm {
    pub level: i64,
    pub numerator: i64,
    pub kernel_order: usize,
    /// Whether the inner sum over the kernel vanishes exactly.
    pub inner_vanishes: bool,
    pub value: AppComplex,
}

fn level_term(
    chi: &Character,
    group: &RayClassGroup,
    top_table: &InvariantTable,
    level: i64,
    numerator: i64,
    ctx: &PrecisionContext,
) -> Result<LevelTerm> {
    let n = group.rational_level()?;
    let field = group.field();
    let (small, table) = if level == n {
        (group.clone(), top_table.clone())
    } else {
        let g = RayClassGroup::new(field, Ideal::rational(field, level))?;
        let t = invariant_table(&g, ctx)?;
        (g, t)
    };
    let images = group.map_to(&small)?;
    let kernel: Vec<RayClass> = group.classes().filter(|c| images[c.0] == small.identity()).collect();
    let inner_exact = chi.sum_over(kernel.iter().copied());
    let inner = inner_exact.to_complex(ctx);
    let base = small.c_t(numerator)?;
    // one representative per coset of the kernel
    let mut seen = vec![false; small.order()];
    let w = values(chi, group, ctx);
    let mut acc = AppComplex::zero(ctx.bits());
    for b in group.classes() {
        let img = images[b.0];
        if seen[img.0] {
            continue;
        }
        seen[img.0] = true;
        acc = &acc + &w[b.0].scale(table.log_g(small.mul(base, img)));
    }
    let value = (&acc * &inner).scale(&Float::with_val(ctx.bits(), n / level));
    Ok(LevelTerm { level, numerator, kernel_order: kernel.len(), inner_vanishes: inner_exact.is_zero(), value })
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub lhs: AppComplex,
    pub rhs: AppComplex,
    pub plus: LevelTerm,
    pub minus: LevelTerm,
    /// `-2 (chi(C_t) + 1) S(chi-bar)`.
    pub stickelberger_term: AppComplex,
    pub residual: Float,
}

/// Both sides of the decomposition of `S(chi-bar, xi_t)` into level-`N_+-`
/// sums and `-2 (chi(C_t) + 1) S(chi-bar)`.
pub fn decomposition_check(
    chi: &Character,
    group: &RayClassGroup,
    table: &InvariantTable,
    t: i64,
    ctx: &PrecisionContext,
) -> Result<Decomposition> {
    if chi.is_trivial_on(&group.subgroup_hilbert()) {
        return Err(Error::InvalidInput("the character must be nontrivial on Cl(K_(N)/H)".into()));
    }
    let n = group.rational_level()?;
    let chib = chi.conj();
    let lhs = s_chi_xi(&chib, group, table, t, ctx)?;
    let (np, bp, nm, bm) = np_nm(n, t);
    let plus = level_term(&chib, group, table, bp, np, ctx)?;
    let minus = level_term(&chib, group, table, bm, nm, ctx)?;
    let s_bar = stickelberger(&chib, group, table, ctx);
    let ct = chi.value_complex(group.c_t(t)?, ctx);
    let factor = (&ct + &AppComplex::one(ctx.bits())).scale(&Float::with_val(ctx.bits(), -2));
    let stickelberger_term = &factor * &s_bar;
    let rhs = &(&plus.value + &minus.value) + &stickelberger_term;
    let residual = (&lhs - &rhs).abs() / rhs.abs().max(&Float::with_val(ctx.bits(), 1));
    Ok(Decomposition { lhs, rhs, plus, minus, stickelberger_term, residual })
}

#[derive(Clone, Debug)]
pub struct CaseConstant {
    pub expected: i64,
    pub ratio: AppComplex,
    /// `|ratio - expected|`.
    pub deviation: Float,
    pub s_bar_abs: Float,
}

/// `S(chi-bar, xi_t) / S(chi-bar)` against the expected integer.
pub fn case_constant(
    chi: &Character,
    group: &RayClassGroup,
    table: &InvariantTable,
    t: i64,
    expected: i64,
    ctx: &PrecisionContext,
) -> Result<CaseConstant> {
    let chib = chi.conj();
    let num = s_chi_xi(&chib, group, table, t, ctx)?;
    let den = stickelberger(&chib, group, table, ctx);
    let s_bar_abs = den.abs();
    if s_bar_abs.is_zero() {
        return Err(Error::DegenerateDifference);
    }
    let ratio = num.div(&den);
    let deviation = (&ratio - &AppComplex::from_real(Float::with_val(ctx.bits(), expected))).abs();
    Ok(CaseConstant { expected, ratio, deviation, s_bar_abs })
}

/// Smoothed value of `L_f(1, chi_0)` with a self-reported error.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LValue {
    pub re: f64,
    pub im: f64,
    pub error: f64,
    pub cutoff: usize,
}

impl LValue {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Dirichlet coefficients `a_n = sum_{N(a) = n} chi_0([a])` over ideals prime
/// to the modulus, for `n <= cutoff`.
pub fn dirichlet_coefficients(chi0: &Character, group_f: &RayClassGroup, cutoff: usize) -> Result<Vec<Complex64>> {
    let field = group_f.field();
    let f = group_f.modulus();
    let d = chi0.value_order();
    let roots: Vec<Complex64> =
        (0..d).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / d as f64)).collect();
    let value = |p: &Ideal| -> Result<Complex64> {
        if !p.is_coprime(f) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(roots[chi0.value_exp(group_f.class_of(p)?) as usize])
    };
    let spf = smallest_prime_factors(cutoff);
    let mut a = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    a[1] = Complex64::new(1.0, 0.0);
    for p in 2..=cutoff {
        if spf[p] as usize != p {
            continue;
        }
        let primes = field.factor_rational_prime(p as u64);
        let local: Vec<Complex64> = match primes.as_slice() {
            [(q1, 1), (q2, 1)] => {
                let (x, y) = (value(q1)?, value(q2)?);
                let mut out = vec![Complex64::new(1.0, 0.0)];
                let (mut xp, mut pk) = (Complex64::new(1.0, 0.0), p);
                // a_{p^k} = x a_{p^{k-1}} + y^k
                let mut yk = Complex64::new(1.0, 0.0);
                while pk <= cutoff {
                    yk *= y;
                    xp = x * xp + yk;
                    out.push(xp);
                    pk = pk.saturating_mul(p);
                }
                out
            }
            [(q, 2)] => {
                let z = value(q)?;
                let mut out = vec![Complex64::new(1.0, 0.0)];
                let mut pk = p;
                while pk <= cutoff {
                    out.push(out.last().unwrap() * z);
                    pk = pk.saturating_mul(p);
                }
                out
            }
            [(q, 1)] => {
                let z = value(q)?;
                let mut out = vec![Complex64::new(1.0, 0.0)];
                let mut pk = p;
                let mut k = 1;
                while pk <= cutoff {
                    out.push(if k % 2 == 0 { z.powu(k / 2) } else { Complex64::new(0.0, 0.0) });
                    pk = pk.saturating_mul(p);
                    k += 1;
                }
                out
            }
            _ => unreachable!("a rational prime has at most two primes above it"),
        };
        let mut pk = p;
        for c in local.iter().skip(1) {
            a[pk] = *c;
            match pk.checked_mul(p) {
                Some(x) if x <= cutoff => pk = x,
                _ => break,
            }
        }
    }
    for n in 2..=cutoff {
        let p = spf[n] as usize;
        let mut m = n;
        let mut pk = 1;
        while m % p == 0 {
            m /= p;
            pk *= p;
        }
        if m > 1 {
            a[n] = a[pk] * a[m];
        }
    }
    Ok(a)
}

/// Cesaro mean of the partial sums `sum_{n <= x} a_n / n` over the last
/// `sqrt(cutoff)` values of `x`. The error estimate is three times the
/// change from `cutoff / 2`.
pub fn l_value(chi0: &Character, group_f: &RayClassGroup, cutoff: usize) -> Result<LValue> {
    if chi0.is_principal() || group_f.modulus().is_one() {
        return Err(Error::InvalidInput("need a nonprincipal character of a proper conductor".into()));
    }
    if cutoff < 100 {
        return Err(Error::InvalidInput("cutoff must be at least 100".into()));
    }
    let a = dirichlet_coefficients(chi0, group_f, cutoff)?;
    let mut partial = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    for n in 1..=cutoff {
        partial[n] = partial[n - 1] + a[n] / n as f64;
    }
    let mean = |x: usize| -> Complex64 {
        let len = (x as f64).sqrt() as usize;
        let s: Complex64 = partial[x + 1 - len..=x].iter().sum();
        s / len as f64
    };
    let v = mean(cutoff);
    let error = 3.0 * (v - mean(cutoff / 2)).norm();
    Ok(LValue { re: v.re, im: v.im, error, cutoff })
}

#[derive(Clone, Debug)]
pub struct KroneckerCheck {
    pub conductor: Ideal,
    pub euler_factor: AppComplex,
    pub l_value: LValue,
    pub lhs: Complex64,
    pub rhs: AppComplex,
    /// The right side with a second choice of `gamma`.
    pub rhs_alt: AppComplex,
    pub residual: f64,
    pub gamma_residual: Float,
    pub s_bar: AppComplex,
}

/// The right side of the limit formula for a given `gamma`.
fn limit_rhs(
    chi0: &Character,
    group_f: &RayClassGroup,
    gamma: crate::quadfield::KElem,
    s_bar: &AppComplex,
    ctx: &PrecisionContext,
) -> Result<AppComplex> {
    let field = group_f.field();
    let f = group_f.modulus();
    let a = gamma_ideal(field, f, gamma).ok_or(Error::NotCoprime)?;
    let chi_a = chi0.value_complex(group_f.class_of(&a)?, ctx);
    let t = gauss_sum(field, gamma, chi0, group_f, ctx)?;
    let p = ctx.bits();
    let denom_real = Float::with_val(p, 3 * f.least_positive_integer())
        * Float::with_val(p, -field.disc()).sqrt()
        * Float::with_val(p, field.unit_count_mod(f));
    let num = (&chi_a * s_bar).scale(&-ctx.pi());
    Ok(num.div(&t.scale(&denom_real)))
}

/// Relative difference between the two sides of the limit formula for
/// `chi` on `Cl(N)`.
pub fn kronecker_check(
    chi: &Character,
    group: &RayClassGroup,
    table: &InvariantTable,
    cutoff: usize,
    ctx: &PrecisionContext,
) -> Result<KroneckerCheck> {
    let lattice = LevelLattice::new(group)?;
    let (i, chi0) = primitive_descent(chi, &lattice);
    let f = lattice.divisors[i];
    if f.is_one() {
        return Err(Error::InvalidInput("the conductor must be proper".into()));
    }
    let group_f = &lattice.groups[i];
    let field = group.field();
    let mut euler = AppComplex::one(ctx.bits());
    for p in group.modulus().prime_factors() {
        if !f.divisible_by(&p) {
            let v = chi0.conj().value_complex(group_f.class_of(&p)?, ctx);
            euler = &euler * &(&AppComplex::one(ctx.bits()) - &v);
        }
    }
    let l = l_value(&chi0, group_f, cutoff)?;
    let (er, ei) = euler.to_f64();
    let lhs = Complex64::new(er, ei) * l.value();
    let s_bar = stickelberger(&chi.conj(), group, table, ctx);
    let gammas = choose_gammas(field, &f, 2)?;
    let rhs = limit_rhs(&chi0, group_f, gammas[0], &s_bar, ctx)?;
    let rhs_alt = limit_rhs(&chi0, group_f, gammas[1], &s_bar, ctx)?;
    let (rr, ri) = rhs.to_f64();
    let rhs64 = Complex64::new(rr, ri);
    let residual = (lhs - rhs64).norm() / rhs64.norm();
    let gamma_residual = (&rhs - &rhs_alt).abs() / rhs.abs().max(&Float::with_val(ctx.bits(), 1));
    Ok(KroneckerCheck { conductor: f, euler_factor: euler, l_value: l, lhs, rhs, rhs_alt, residual, gamma_residual, s_bar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chars::{conductor, dual_group};
    use crate::quadfield::Field;
    use crate::rayclass::ray_class_group;
    use crate::theorems::{case_character, case_plan};

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn setup(n: i64) -> (Field, RayClassGroup, LevelLattice) {
        let f = Field::new(-20).unwrap();
        let g = ray_class_group(f, &Ideal::rational(f, n)).unwrap();
        let l = LevelLattice::new(&g).unwrap();
        (f, g, l)
    }

    #[test]
    fn coefficients_count_ideals() {
        let (f, g, _) = setup(5);
        let principal = Character::principal(&g);
        let a = dirichlet_coefficients(&principal, &g, 300).unwrap();
        let five = Ideal::rational(f, 5);
        for n in 1..=300 {
            let count = f.ideals_of_norm(n as i64).iter().filter(|i| i.is_coprime(&five)).count();
            assert!((a[n].re - count as f64).abs() < 1e-9 && a[n].im.abs() < 1e-9, "n = {n}");
        }
        // a nonprincipal character: compare with a direct sum over ideals
        let chi = dual_group(&g).into_iter().nth(3).unwrap();
        let a = dirichlet_coefficients(&chi, &g, 200).unwrap();
        for n in 1..=200 {
            let mut s = Complex64::new(0.0, 0.0);
            for i in f.ideals_of_norm(n as i64) {
                if i.is_coprime(&five) {
                    let z = chi.value_complex(g.class_of(&i).unwrap(), &ctx()).to_f64();
                    s += Complex64::new(z.0, z.1);
                }
            }
            assert!((a[n] - s).norm() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn stickelberger_conjugation() {
        let c = ctx();
        let (_, g, _) = setup(5);
        let table = invariant_table(&g, &c).unwrap();
        for chi in dual_group(&g).into_iter().skip(1).take(6) {
            let a = stickelberger(&chi, &g, &table, &c);
            let b = stickelberger(&chi.conj(), &g, &table, &c);
            assert!((&a - &b.conj()).abs() < c.identity_tolerance());
        }
    }

    #[test]
    fn coprime_case_constant_and_decomposition() {
        let c = ctx();
        let (_, g, l) = setup(5);
        let table = invariant_table(&g, &c).unwrap();
        let plan = case_plan(5).unwrap();
        let chi = case_character(&g, &l, &plan, None).unwrap();
        let r = case_constant(&chi, &g, &table, plan.t, plan.expected, &c).unwrap();
        assert!(r.deviation < c.identity_tolerance(), "{:?}", r.ratio);
        assert!(r.s_bar_abs > 1e-10);
        let d = decomposition_check(&chi, &g, &table, 2, &c).unwrap();
        assert!(d.residual < c.identity_tolerance());
        // t and N - t give the same sum
        let a = s_chi_xi(&chi, &g, &table, 2, &c).unwrap();
        let b = s_chi_xi(&chi, &g, &table, 3, &c).unwrap();
        assert!((&a - &b).abs() < c.identity_tolerance());
        // the principal character gives a real sum
        let p = s_chi_xi(&Character::principal(&g), &g, &table, 2, &c).unwrap();
        assert!(p.im.clone().abs() < c.identity_tolerance());
    }

    #[test]
    fn inner_sums_vanish_off_the_kernel() {
        let c = ctx();
        let (_, g, l) = setup(9);
        let table = invariant_table(&g, &c).unwrap();
        let plan = case_plan(9).unwrap();
        let chi = case_character(&g, &l, &plan, None).unwrap();
        let d = decomposition_check(&chi, &g, &table, 2, &c).unwrap();
        assert_eq!((d.plus.level, d.minus.level), (3, 9));
        assert!(d.plus.inner_vanishes);
        assert!(d.residual < c.identity_tolerance());
    }

    #[test]
    fn limit_formula_small_cutoff() {
        let c = ctx();
        let (_, g, l) = setup(5);
        let table = invariant_table(&g, &c).unwrap();
        let chi = dual_group(&g).into_iter().find(|x| conductor(x, &l) == Ideal::rational(g.field(), 5)).unwrap();
        let k = kronecker_check(&chi, &g, &table, 20000, &c).unwrap();
        assert!(k.gamma_residual < c.identity_tolerance());
        assert!(k.residual < 0.05, "residual {} lhs {} rhs {:?}", k.residual, k.lhs, k.rhs);
    }
}
