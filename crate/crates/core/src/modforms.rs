//! `g_2`, `g_3`, `Delta`, `j`, the Weierstrass function, Fricke and Siegel
//! functions and the Weber function, evaluated by q-expansions.
//!
//! Normalisation carries the full powers of `2 pi`:
//! `g_2 = (2 pi)^4 E_4 / 12`, `g_3 = (2 pi)^6 E_6 / 216` and
//! `Delta = (2 pi)^12 q prod (1 - q^n)^24` for the lattice `[tau, 1]`.

use num_rational::Ratio;
use rug::Float;

use crate::error::{Error, Result};
use crate::numeric::{AppComplex, PrecisionContext};
use crate::numtheory::lcm;
use crate::quadfield::{Field, KElem};

/// A pair `(r_1, r_2)` of rationals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionVector {
    pub r1: Ratio<i64>,
    pub r2: Ratio<i64>,
}

fn frac(x: Ratio<i64>) -> Ratio<i64> {
    x - x.floor()
}

impl TorsionVector {
    pub fn new(r1: Ratio<i64>, r2: Ratio<i64>) -> Self {
        TorsionVector { r1, r2 }
    }

    /// `(a_1 / n, a_2 / n)`.
    pub fn from_ints(a1: i64, a2: i64, n: i64) -> Self {
        TorsionVector { r1: Ratio::new(a1, n), r2: Ratio::new(a2, n) }
    }

    /// Least `N` with `N v` integral.
    pub fn level(&self) -> i64 {
        lcm(*self.r1.denom(), *self.r2.denom())
    }

    pub fn is_integral(&self) -> bool {
        self.r1.is_integer() && self.r2.is_integer()
    }

    pub fn neg(&self) -> Self {
        TorsionVector { r1: -self.r1, r2: -self.r2 }
    }

    pub fn add(&self, o: &TorsionVector) -> Self {
        TorsionVector { r1: self.r1 + o.r1, r2: self.r2 + o.r2 }
    }

    pub fn sub(&self, o: &TorsionVector) -> Self {
        TorsionVector { r1: self.r1 - o.r1, r2: self.r2 - o.r2 }
    }

    /// Representative with both entries in `[0, 1)`.
    pub fn mod_one(&self) -> Self {
        TorsionVector { r1: frac(self.r1), r2: frac(self.r2) }
    }

    /// Canonical representative of `+-v mod Z^2`.
    pub fn canonical(&self) -> Self {
        let a = self.mod_one();
        let b = self.neg().mod_one();
        a.min(b)
    }

    /// Whether `v = +-u mod Z^2`.
    pub fn same_class(&self, o: &TorsionVector) -> bool {
        self.canonical() == o.canonical()
    }

    /// Row vector times matrix: `(r_1 a + r_2 c, r_1 b + r_2 d)`.
    pub fn transform(&self, g: &Sl2) -> Self {
        let (a, b, c, d) = (Ratio::from(g.a), Ratio::from(g.b), Ratio::from(g.c), Ratio::from(g.d));
        TorsionVector { r1: self.r1 * a + self.r2 * c, r2: self.r1 * b + self.r2 * d }
    }
}

/// An element `[[a, b], [c, d]]` of `SL(2, Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sl2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2 {
    pub const IDENTITY: Sl2 = Sl2 { a: 1, b: 0, c: 0, d: 1 };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Sl2> {
        if a * d - b * c != 1 {
            return Err(Error::InvalidInput("matrix is not in SL(2, Z)".into()));
        }
        Ok(Sl2 { a, b, c, d })
    }

    pub fn mul(&self, o: &Sl2) -> Sl2 {
        Sl2 {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Moebius action `(a tau + b) / (c tau + d)`.
    pub fn apply(&self, tau: &AppComplex) -> AppComplex {
        let p = tau.prec();
        let num = &tau.scale(&Float::with_val(p, self.a)) + &AppComplex::from_real(Float::with_val(p, self.b));
        let den = &tau.scale(&Float::with_val(p, self.c)) + &AppComplex::from_real(Float::with_val(p, self.d));
        num.div(&den)
    }
}

/// A point of the upper half-plane.
#[derive(Clone, Debug)]
pub struct HPoint {
    pub tau: AppComplex,
}

impl HPoint {
    pub fn new(tau: AppComplex) -> Result<HPoint> {
        if tau.im.is_sign_negative() || tau.im.is_zero() || !tau.is_finite() {
            return Err(Error::InvalidInput("point is not in the upper half-plane".into()));
        }
        Ok(HPoint { tau })
    }

    pub fn from_f64(re: f64, im: f64, ctx: &PrecisionContext) -> Result<HPoint> {
        HPoint::new(AppComplex::from_f64(ctx.bits(), re, im))
    }

    /// The field element `x + y tau_K` as a complex number.
    pub fn field_element(field: Field, e: KElem, ctx: &PrecisionContext) -> AppComplex {
        let (x, y) = e.coords();
        let t = tau_k(field, ctx);
        &AppComplex::from_real(ctx.ratio(x)) + &t.scale(&ctx.ratio(y))
    }

    /// `tau_K` itself.
    pub fn cm_point(field: Field, ctx: &PrecisionContext) -> HPoint {
        HPoint { tau: tau_k(field, ctx) }
    }

    pub fn im(&self) -> &Float {
        &self.tau.im
    }
}

/// `tau_K = (d + sqrt(d)) / 2`.
pub fn tau_k(field: Field, ctx: &PrecisionContext) -> AppComplex {
    let d = field.disc();
    let re = Float::with_val(ctx.bits(), d) / 2u32;
    let im = Float::with_val(ctx.bits(), -d).sqrt() / 2u32;
    AppComplex::new(re, im)
}

/// Moves `tau` into the standard fundamental domain, transforming `v` so that
/// `f_v(tau) = f_v'(tau')`. Returns `(tau', v', gamma)` with `tau' = gamma tau`.
pub fn reduce_to_fundamental(tau: &HPoint, v: &TorsionVector) -> (HPoint, TorsionVector, Sl2) {
    let p = tau.tau.prec();
    let mut t = tau.tau.clone();
    let mut g = Sl2::IDENTITY;
    let half = Float::with_val(p, 0.5);
    let one_minus = Float::with_val(p, 1) - Float::with_val(p, 2).pow(-(p as i32) / 2);
    for _ in 0..10_000 {
        let n = t.re.to_f64().round() as i64;
        if n != 0 {
            let shift = Sl2 { a: 1, b: -n, c: 0, d: 1 };
            t = AppComplex::new(Float::with_val(p, &t.re - n), t.im.clone());
            g = shift.mul(&g);
        }
        let r = Float::with_val(p, t.re.abs_ref());
        if r > half {
            // rounding in f64 can be off by one near half-integers
            let s: i64 = if t.re.is_sign_positive() { 1 } else { -1 };
            t = AppComplex::new(Float::with_val(p, &t.re - s), t.im.clone());
            g = Sl2 { a: 1, b: -s, c: 0, d: 1 }.mul(&g);
        }
        if t.norm_sqr() < one_minus {
            let s = Sl2 { a: 0, b: -1, c: 1, d: 0 };
            t = (&AppComplex::from_real(Float::with_val(p, -1))).div(&t);
            g = s.mul(&g);
        } else {
            break;
        }
    }
    (HPoint { tau: t }, v.transform(&g.inverse()), g)
}

use rug::ops::Pow;

/// Number of q-expansion terms so that `|q|^M < 10^-(digits + guard)`.
fn term_count(im_tau: &Float, ctx: &PrecisionContext) -> usize {
    let need = (ctx.digits + ctx.guard) as f64 * std::f64::consts::LN_10;
    let per = 2.0 * std::f64::consts::PI * im_tau.to_f64();
    (need / per).ceil() as usize + 3
}

fn sigma(n: usize, k: u32) -> u128 {
    (1..=n).filter(|d| n % d == 0).map(|d| (d as u128).pow(k)).sum()
}

/// Level-one quantities at a fixed `tau`, shared by all evaluations there.
#[derive(Clone, Debug)]
pub struct ModularValues {
    pub tau: AppComplex,
    pub q: AppComplex,
    pub e2: AppComplex,
    pub g2: AppComplex,
    pub g3: AppComplex,
    pub delta: AppComplex,
    pub j: AppComplex,
    terms: usize,
    prec: u32,
}

fn two_pi(p: u32) -> Float {
    Float::with_val(p, rug::float::Constant::Pi) * 2u32
}

impl ModularValues {
    pub fn at(tau: &HPoint, ctx: &PrecisionContext) -> Result<ModularValues> {
        Self::with_terms(tau, ctx, term_count(tau.im(), ctx))
    }

    pub fn with_terms(tau: &HPoint, ctx: &PrecisionContext, terms: usize) -> Result<ModularValues> {
        let p = ctx.bits();
        let t = &tau.tau;
        let q = t.scale(&two_pi(p)).mul_i().exp();
        let mut qn = AppComplex::one(p);
        let mut s1 = AppComplex::zero(p);
        let mut s3 = AppComplex::zero(p);
        let mut s5 = AppComplex::zero(p);
        let mut prod = AppComplex::one(p);
        let one = AppComplex::one(p);
        for n in 1..=terms {
            qn = &qn * &q;
            s1 = &s1 + &qn.scale(&Float::with_val(p, sigma(n, 1)));
            s3 = &s3 + &qn.scale(&Float::with_val(p, sigma(n, 3)));
            s5 = &s5 + &qn.scale(&Float::with_val(p, sigma(n, 5)));
            prod = &prod * &(&one - &qn);
        }
        let e2 = &one - &s1.scale(&Float::with_val(p, 24));
        let e4 = &one + &s3.scale(&Float::with_val(p, 240));
        let e6 = &one - &s5.scale(&Float::with_val(p, 504));
        let tp = two_pi(p);
        let tp2 = Float::with_val(p, tp.square_ref());
        let tp4 = Float::with_val(p, tp2.square_ref());
        let tp6 = Float::with_val(p, &tp4 * &tp2);
        let tp12 = Float::with_val(p, tp6.square_ref());
        let g2 = e4.scale(&(tp4 / 12u32));
        let g3 = e6.scale(&(tp6 / 216u32));
        let delta = (&q * &prod.powu(24)).scale(&tp12);
        let j = g2.powu(3).div(&delta).scale(&Float::with_val(p, 1728));
        let mv = ModularValues { tau: t.clone(), q, e2, g2, g3, delta, j, terms, prec: p };
        if !(mv.g2.is_finite() && mv.g3.is_finite() && mv.delta.is_finite()) {
            return Err(Error::PrecisionExhausted(0));
        }
        Ok(mv)
    }

    /// `g_2 g_3 / Delta`.
    pub fn fricke_factor(&self) -> AppComplex {
        (&self.g2 * &self.g3).div(&self.delta)
    }

    fn exp2pii(&self, x: &Float) -> AppComplex {
        AppComplex::expi2pi(x)
    }

    /// `w = e^{2 pi i z}` for `z = x tau + y`, together with `q^x`.
    fn w_of(&self, x: &Float, y: &Float) -> AppComplex {
        // e^{2 pi i (x tau + y)}
        let z = &self.tau.scale(x) + &AppComplex::from_real(y.clone());
        z.scale(&two_pi(self.prec)).mul_i().exp()
    }

    /// `(x, y)` with `z = x tau + y`, shifted so that `|x|, |y| <= 1/2`.
    pub fn coords_of(&self, z: &AppComplex) -> (Float, Float) {
        let x = Float::with_val(self.prec, &z.im / &self.tau.im);
        let y = Float::with_val(self.prec, &z.re - Float::with_val(self.prec, &x * &self.tau.re));
        (x, y)
    }

    fn shifted(&self, x: &Float, y: &Float) -> (Float, Float) {
        let xs = Float::with_val(self.prec, x - x.clone().round());
        let ys = Float::with_val(self.prec, y - y.clone().round());
        (xs, ys)
    }

    /// Weierstrass `wp(x tau + y; [tau, 1])`.
    pub fn wp_coords(&self, x: &Float, y: &Float, ctx: &PrecisionContext) -> Result<AppComplex> {
        let (x, y) = self.shifted(x, y);
        let zabs = (&self.tau.scale(&x) + &AppComplex::from_real(y.clone())).abs();
        if zabs < ctx.pow10(-(ctx.digits as i32) / 2) {
            return Err(Error::LatticePoint);
        }
        let p = self.prec;
        let w = self.w_of(&x, &y);
        let winv = w.inv();
        let one = AppComplex::one(p);
        let term = |u: &AppComplex| -> AppComplex {
            let d = &one - u;
            u.div(&d.square())
        };
        let mut acc = term(&w);
        let mut qm = AppComplex::one(p);
        for _ in 1..=self.terms + 1 {
            qm = &qm * &self.q;
            acc = &acc + &term(&(&qm * &w));
            acc = &acc + &term(&(&qm * &winv));
        }
        let base = &acc + &self.e2.scale(&(Float::with_val(p, 1) / 12u32));
        // (2 pi i)^2 = -(2 pi)^2
        let tp = two_pi(p);
        Ok(base.scale(&-Float::with_val(p, tp.square_ref())))
    }

    pub fn wp(&self, z: &AppComplex, ctx: &PrecisionContext) -> Result<AppComplex> {
        let (x, y) = self.coords_of(z);
        self.wp_coords(&x, &y, ctx)
    }

    /// Derivative `wp'(x tau + y)`.
    pub fn wp_prime_coords(&self, x: &Float, y: &Float, ctx: &PrecisionContext) -> Result<AppComplex> {
        let (x, y) = self.shifted(x, y);
        let zabs = (&self.tau.scale(&x) + &AppComplex::from_real(y.clone())).abs();
        if zabs < ctx.pow10(-(ctx.digits as i32) / 2) {
            return Err(Error::LatticePoint);
        }
        let p = self.prec;
        let w = self.w_of(&x, &y);
        let winv = w.inv();
        let one = AppComplex::one(p);
        let term = |u: &AppComplex| -> AppComplex {
            let d = &one - u;
            (u * &(&one + u)).div(&d.powu(3))
        };
        let mut acc = term(&w);
        let mut qm = AppComplex::one(p);
        for _ in 1..=self.terms + 1 {
            qm = &qm * &self.q;
            acc = &acc + &term(&(&qm * &w));
            acc = &acc - &term(&(&qm * &winv));
        }
        // (2 pi i)^3 = -i (2 pi)^3
        let tp = two_pi(p);
        let tp3 = Float::with_val(p, tp.square_ref()) * &tp;
        Ok(acc.mul_i().scale(&-tp3))
    }

    /// Fricke value `f_v(tau)` at this (unreduced) `tau`.
    pub fn fricke(&self, v: &TorsionVector, ctx: &PrecisionContext) -> Result<AppComplex> {
        if v.is_integral() {
            return Err(Error::LatticePoint);
        }
        let wp = self.wp_coords(&ctx.ratio(v.r1), &ctx.ratio(v.r2), ctx)?;
        Ok(&self.fricke_factor() * &wp)
    }

    /// `ln |g_v(tau)|` from the product, for any real `r_1` (factors with
    /// `n - r_1 < 0` are included literally).
    pub fn log_abs_siegel_raw(&self, r1: &Float, r2: &Float) -> Float {
        let p = self.prec;
        let im = &self.tau.im;
        let poly = Float::with_val(p, r1.square_ref()) - r1 + Float::with_val(p, 1) / 6u32;
        let pi = Float::with_val(p, rug::float::Constant::Pi);
        let mut acc = -(pi * im.clone() * poly);
        let one = AppComplex::one(p);
        let qr = self.w_of(r1, r2); // q^{r_1} e^{2 pi i r_2}
        let qr_inv = qr.inv();
        acc += (&one - &qr).abs().ln();
        let mut qn = AppComplex::one(p);
        for _ in 1..=self.siegel_terms(r1) {
            qn = &qn * &self.q;
            acc += (&one - &(&qn * &qr)).abs().ln();
            acc += (&one - &(&qn * &qr_inv)).abs().ln();
        }
        acc
    }

    fn siegel_terms(&self, r1: &Float) -> usize {
        self.terms + r1.to_f64().abs().ceil() as usize + 1
    }

    /// The Siegel product `g_v(tau)` itself, for any real `r_1`.
    pub fn siegel_raw(&self, r1: &Float, r2: &Float) -> AppComplex {
        let p = self.prec;
        let one = AppComplex::one(p);
        // -e^{pi i r2 (r1 - 1)} q^{(r1^2 - r1 + 1/6)/2}
        let phase = Float::with_val(p, r2 * Float::with_val(p, r1 - 1u32)) / 2u32;
        let poly = (Float::with_val(p, r1.square_ref()) - r1 + Float::with_val(p, 1) / 6u32) / 2u32;
        let qpow = self.w_of(&poly, &Float::new(p));
        let mut acc = -&(&self.exp2pii(&phase) * &qpow);
        let qr = self.w_of(r1, r2);
        let qr_inv = qr.inv();
        acc = &acc * &(&one - &qr);
        let mut qn = AppComplex::one(p);
        for _ in 1..=self.siegel_terms(r1) {
            qn = &qn * &self.q;
            acc = &acc * &(&one - &(&qn * &qr));
            acc = &acc * &(&one - &(&qn * &qr_inv));
        }
        acc
    }
}

/// `(g_2, g_3, Delta, j)` at `tau`, reducing `tau` first.
pub fn eisenstein_g2g3_delta_j(
    tau: &HPoint,
    ctx: &PrecisionContext,
) -> Result<(AppComplex, AppComplex, AppComplex, AppComplex)> {
    let mv = ModularValues::at(tau, ctx)?;
    Ok((mv.g2, mv.g3, mv.delta, mv.j))
}

/// `wp(z; [tau, 1])`.
pub fn wp(z: &AppComplex, tau: &HPoint, ctx: &PrecisionContext) -> Result<AppComplex> {
    ModularValues::at(tau, ctx)?.wp(z, ctx)
}

/// Fricke function `f_v(tau)`, evaluated after reduction to the fundamental domain.
pub fn fricke(v: &TorsionVector, tau: &HPoint, ctx: &PrecisionContext) -> Result<AppComplex> {
    if v.is_integral() {
        return Err(Error::LatticePoint);
    }
    let (t, w, _) = reduce_to_fundamental(tau, v);
    ModularValues::at(&t, ctx)?.fricke(&w.mod_one(), ctx)
}

/// `ln |g_v(tau)|`, evaluated after reduction; depends only on `+-v mod Z^2`.
pub fn log_abs_siegel(v: &TorsionVector, tau: &HPoint, ctx: &PrecisionContext) -> Result<Float> {
    if v.is_integral() {
        return Err(Error::LatticePoint);
    }
    let (t, w, _) = reduce_to_fundamental(tau, v);
    let w = w.canonical();
    Ok(ModularValues::at(&t, ctx)?.log_abs_siegel_raw(&ctx.ratio(w.r1), &ctx.ratio(w.r2)))
}

/// `g_v(tau)^k` for `12 N | k`, with `N` the level of `v`.
pub fn siegel_pow(v: &TorsionVector, tau: &HPoint, k: u32, ctx: &PrecisionContext) -> Result<AppComplex> {
    if v.is_integral() {
        return Err(Error::LatticePoint);
    }
    if k == 0 || k as i64 % (12 * v.level()) != 0 {
        return Err(Error::InvalidInput(format!("exponent {k} is not a multiple of 12N")));
    }
    let (t, w, _) = reduce_to_fundamental(tau, v);
    let w = w.canonical();
    let g = ModularValues::at(&t, ctx)?.siegel_raw(&ctx.ratio(w.r1), &ctx.ratio(w.r2));
    Ok(g.powu(k))
}

/// Weber function `h(z)` for the lattice `O_K = [tau_K, 1]`.
pub fn weber_h(field: Field, z: &AppComplex, ctx: &PrecisionContext) -> Result<AppComplex> {
    let mv = ModularValues::at(&HPoint::cm_point(field, ctx), ctx)?;
    let (x, y) = mv.coords_of(z);
    weber_h_with(&mv, field, &x, &y, ctx)
}

/// `h(r_1 tau_K + r_2)`.
pub fn weber_h_at(field: Field, v: &TorsionVector, ctx: &PrecisionContext) -> Result<AppComplex> {
    let mv = ModularValues::at(&HPoint::cm_point(field, ctx), ctx)?;
    weber_h_with(&mv, field, &ctx.ratio(v.r1), &ctx.ratio(v.r2), ctx)
}

fn weber_h_with(mv: &ModularValues, field: Field, x: &Float, y: &Float, ctx: &PrecisionContext) -> Result<AppComplex> {
    let p = mv.wp_coords(x, y, ctx)?;
    Ok(match field.disc() {
        -4 => (&mv.g2.square().div(&mv.delta)) * &p.square(),
        -3 => (&mv.g3.div(&mv.delta)) * &p.powu(3),
        _ => (&mv.fricke_factor()) * &p,
    })
}

/// Relative residual of `(f_u - f_v)^6 = j^2 (j - 1728)^3 / (2^30 3^24) *
/// g_{u+v}^6 g_{u-v}^6 / (g_u^12 g_v^12)` with the Siegel products evaluated
/// literally at the given vectors.
pub fn fricke_siegel_residual(
    u: &TorsionVector,
    v: &TorsionVector,
    tau: &HPoint,
    ctx: &PrecisionContext,
) -> Result<Float> {
    if u.is_integral() || v.is_integral() {
        return Err(Error::LatticePoint);
    }
    if u.same_class(v) {
        return Err(Error::InvalidInput("u = +-v mod Z^2".into()));
    }
    let (t, g) = {
        let (t, _, g) = reduce_to_fundamental(tau, u);
        (t, g)
    };
    let gi = g.inverse();
    let (u, v) = (u.transform(&gi), v.transform(&gi));
    let mv = ModularValues::at(&t, ctx)?;
    let p = ctx.bits();
    let lhs = (&mv.fricke(&u, ctx)? - &mv.fricke(&v, ctx)?).powu(6);
    let siegel = |w: &TorsionVector| mv.siegel_raw(&ctx.ratio(w.r1), &ctx.ratio(w.r2));
    let j = &mv.j;
    let j1728 = j - &AppComplex::from_real(Float::with_val(p, 1728));
    let constant = Float::with_val(p, rug::Integer::from(2).pow(30) * rug::Integer::from(3).pow(24));
    let jpart = (&j.square() * &j1728.powu(3)).scale(&(Float::with_val(p, 1) / constant));
    let num = &siegel(&u.add(&v)).powu(6) * &siegel(&u.sub(&v)).powu(6);
    let den = &siegel(&u).powu(12) * &siegel(&v).powu(12);
    let rhs = &jpart * &num.div(&den);
    let scale = rhs.abs().max(&Float::with_val(p, 1));
    Ok((&lhs - &rhs).abs() / scale)
}

/// A seeded sample of `(u, v, tau)` with `u != +-v mod Z^2`, denominators at
/// most `max_den` and `tau` in the standard fundamental domain.
pub fn sample_identity_inputs(seed: u64, count: usize, max_den: i64) -> Vec<(TorsionVector, TorsionVector, (f64, f64))> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let vector = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let n = rng.gen_range(2..=max_den);
        let v = TorsionVector::from_ints(rng.gen_range(0..n), rng.gen_range(0..n), n);
        if !v.is_integral() {
            return v;
        }
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (u, v) = (vector(&mut rng), vector(&mut rng));
        if u.same_class(&v) {
            continue;
        }
        let x: f64 = rng.gen_range(-0.5..0.5);
        let y = rng.gen_range((1.0 - x * x).sqrt()..2.0);
        out.push((u, v, (x, y)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    fn close(a: &AppComplex, b: &AppComplex, ctx: &PrecisionContext) -> bool {
        let scale = a.abs().max(&Float::with_val(ctx.bits(), 1));
        (a - b).abs() / scale < ctx.identity_tolerance()
    }

    fn random_tau(rng: &mut ChaCha8Rng, ctx: &PrecisionContext) -> HPoint {
        HPoint::from_f64(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..1.6), ctx).unwrap()
    }

    fn random_vector(rng: &mut ChaCha8Rng) -> TorsionVector {
        loop {
            let n = rng.gen_range(2..=12);
            let v = TorsionVector::from_ints(rng.gen_range(0..n), rng.gen_range(0..n), n);
            if !v.is_integral() {
                return v;
            }
        }
    }

    #[test]
    fn special_points() {
        let c = ctx();
        let (_, g3, _, j) = eisenstein_g2g3_delta_j(&HPoint::from_f64(0.0, 1.0, &c).unwrap(), &c).unwrap();
        assert!(g3.abs() < c.identity_tolerance());
        assert!(close(&j, &AppComplex::from_f64(c.bits(), 1728.0, 0.0), &c));
        let rho = HPoint::new(AppComplex::new(c.real(0.5), c.real(3.0).sqrt() / 2u32)).unwrap();
        let (g2, _, _, j) = eisenstein_g2g3_delta_j(&rho, &c).unwrap();
        assert!(g2.abs() < c.identity_tolerance());
        assert!(j.abs() < c.identity_tolerance());
        let (_, _, _, j2) = eisenstein_g2g3_delta_j(&HPoint::from_f64(0.0, 2.0, &c).unwrap(), &c).unwrap();
        assert!(close(&j2, &AppComplex::from_f64(c.bits(), 287496.0, 0.0), &c));
    }

    #[test]
    fn delta_matches_discriminant_and_truncation_is_converged() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let t = random_tau(&mut rng, &c);
            let mv = ModularValues::at(&t, &c).unwrap();
            let disc = &mv.g2.powu(3) - &mv.g3.square().scale(&c.real(27.0));
            assert!(close(&mv.delta, &disc, &c));
            let m = term_count(t.im(), &c);
            let doubled = ModularValues::with_terms(&t, &c, 2 * m).unwrap();
            assert!(close(&mv.j, &doubled.j, &c));
        }
    }

    #[test]
    fn wp_properties() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let t = random_tau(&mut rng, &c);
            let mv = ModularValues::at(&t, &c).unwrap();
            let z = AppComplex::from_f64(c.bits(), rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
            let p = mv.wp(&z, &c).unwrap();
            assert!(close(&p, &mv.wp(&-&z, &c).unwrap(), &c));
            assert!(close(&p, &mv.wp(&(&z + &t.tau), &c).unwrap(), &c));
            assert!(close(&p, &mv.wp(&(&z + &AppComplex::one(c.bits())), &c).unwrap(), &c));
        }
        let t = random_tau(&mut rng, &c);
        let mv = ModularValues::at(&t, &c).unwrap();
        let (x, y) = (c.real(0.23), c.real(-0.31));
        let p = mv.wp_coords(&x, &y, &c).unwrap();
        let dp = mv.wp_prime_coords(&x, &y, &c).unwrap();
        let rhs = &(&p.powu(3).scale(&c.real(4.0)) - &(&mv.g2 * &p)) - &mv.g3;
        assert!(close(&dp.square(), &rhs, &c));
        assert_eq!(mv.wp(&AppComplex::zero(c.bits()), &c), Err(Error::LatticePoint));
    }

    #[test]
    fn fricke_symmetries_and_modularity() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let t = random_tau(&mut rng, &c);
            let v = random_vector(&mut rng);
            let f = fricke(&v, &t, &c).unwrap();
            assert!(close(&f, &fricke(&v.neg(), &t, &c).unwrap(), &c));
            let shifted = v.add(&TorsionVector::from_ints(1, -2, 1));
            assert!(close(&f, &fricke(&shifted, &t, &c).unwrap(), &c));
            // f_v(gamma tau) = f_{v gamma}(tau)
            let mut g = Sl2::IDENTITY;
            for _ in 0..3 {
                let n = rng.gen_range(-3i64..4);
                g = g.mul(&Sl2 { a: 1, b: n, c: 0, d: 1 }).mul(&Sl2 { a: 0, b: -1, c: 1, d: 0 });
            }
            let gt = HPoint::new(g.apply(&t.tau)).unwrap();
            let lhs = fricke(&v, &gt, &c).unwrap();
            let rhs = fricke(&v.transform(&g), &t, &c).unwrap();
            assert!(close(&lhs, &rhs, &c), "modularity failed for {g:?}");
        }
    }

    #[test]
    fn reduction() {
        let c = ctx();
        let t = HPoint::from_f64(0.1, 1.3, &c).unwrap();
        let v = TorsionVector::from_ints(1, 2, 5);
        let (t2, v2, g) = reduce_to_fundamental(&t, &v);
        assert_eq!(g, Sl2::IDENTITY);
        assert_eq!(v2, v);
        assert!(close(&t2.tau, &t.tau, &c));
        let low = HPoint::from_f64(0.3, 0.01, &c).unwrap();
        let (r, w, _) = reduce_to_fundamental(&low, &v);
        assert!(r.im().to_f64() >= 3f64.sqrt() / 2.0 - 1e-12);
        assert!(close(&fricke(&v, &low, &c).unwrap(), &ModularValues::at(&r, &c).unwrap().fricke(&w, &c).unwrap(), &c));
    }

    #[test]
    fn siegel_properties() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let t = random_tau(&mut rng, &c);
            let v = random_vector(&mut rng);
            let k = 12 * v.level() as u32;
            let g = siegel_pow(&v, &t, k, &c).unwrap();
            assert!(g.abs() > 0);
            assert!(close(&g, &siegel_pow(&v.neg(), &t, k, &c).unwrap(), &c));
            let gt = HPoint::new(Sl2::new(0, -1, 1, 0).unwrap().apply(&t.tau)).unwrap();
            let moved = siegel_pow(&v, &gt, k, &c).unwrap();
            let back = siegel_pow(&v.transform(&Sl2::new(0, -1, 1, 0).unwrap()), &t, k, &c).unwrap();
            assert!(close(&moved, &back, &c));
            let la = log_abs_siegel(&v, &t, &c).unwrap();
            let lb = g.abs().ln() / k;
            assert!(Float::with_val(c.bits(), &la - &lb).abs() < c.identity_tolerance());
        }
        assert!(siegel_pow(&TorsionVector::from_ints(1, 0, 3), &HPoint::from_f64(0.0, 1.0, &c).unwrap(), 12, &c).is_err());
    }

    #[test]
    fn fricke_siegel_identity() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 10 {
            let t = random_tau(&mut rng, &c);
            let (u, v) = (random_vector(&mut rng), random_vector(&mut rng));
            if u.same_class(&v) {
                assert!(fricke_siegel_residual(&u, &v, &t, &c).is_err());
                continue;
            }
            let r = fricke_siegel_residual(&u, &v, &t, &c).unwrap();
            assert!(r < c.identity_tolerance(), "residual {r} for {u:?} {v:?}");
            checked += 1;
        }
    }

    #[test]
    fn weber_cases() {
        let c = ctx();
        let f = Field::new(-20).unwrap();
        let v = TorsionVector::from_ints(0, 1, 7);
        let h = weber_h_at(f, &v, &c).unwrap();
        let fv = fricke(&v, &HPoint::cm_point(f, &c), &c).unwrap();
        assert!(close(&h, &fv, &c));
        for (d, unit) in [(-4i64, (0.0, 1.0)), (-3, (-0.5, 3f64.sqrt() / 2.0))] {
            let f = Field::new(d).unwrap();
            let z = AppComplex::from_f64(c.bits(), 0.17, 0.11);
            let u = if d == -3 {
                AppComplex::new(c.real(-0.5), c.real(3.0).sqrt() / 2u32)
            } else {
                AppComplex::from_f64(c.bits(), unit.0, unit.1)
            };
            let a = weber_h(f, &z, &c).unwrap();
            let b = weber_h(f, &(&u * &z), &c).unwrap();
            assert!(close(&a, &b, &c), "d={d}");
        }
    }
}
