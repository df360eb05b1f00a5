//! Exact arithmetic in an imaginary quadratic field `K = Q(sqrt(d))`.
//!
//! Everything is expressed in the integral basis `[1, tau]` with
//! `tau = (d + sqrt(d)) / 2`, so `O_K = Z + Z tau` and `tau` satisfies
//! `tau^2 = d tau - (d^2 - d) / 4`.
//!
//! Integral ideals are Z-lattices stored in Hermite normal form
//! `a Z + (b + c tau) Z` with `c | a`, `c | b` and `0 <= b < a`; equality of
//! ideals is equality of these triples.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{self, gcd, isqrt, mod_pow};

/// An imaginary quadratic field fixed by its fundamental discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Field {
    disc: i64,
    /// `N(tau) = (d^2 - d) / 4`.
    tau_norm: i64,
    unit_count: u8,
}

/// An element `x + y tau` of `O_K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OElem {
    pub x: i64,
    pub y: i64,
}

/// An element `(x + y tau) / den` of `K` with `den > 0` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct KElem {
    pub num: OElem,
    pub den: i64,
}

/// A nonzero integral ideal in Hermite normal form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Ideal {
    #[serde(skip)]
    field: Field,
    a: i64,
    b: i64,
    c: i64,
}

/// A fractional ideal `num / den` with the common content removed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FracIdeal {
    pub num: Ideal,
    pub den: i64,
}

impl OElem {
    pub const ZERO: OElem = OElem { x: 0, y: 0 };
    pub const ONE: OElem = OElem { x: 1, y: 0 };

    pub fn new(x: i64, y: i64) -> Self {
        OElem { x, y }
    }

    pub fn rational(x: i64) -> Self {
        OElem { x, y: 0 }
    }

    pub fn add(self, o: OElem) -> OElem {
        OElem::new(self.x + o.x, self.y + o.y)
    }

    pub fn sub(self, o: OElem) -> OElem {
        OElem::new(self.x - o.x, self.y - o.y)
    }

    pub fn neg(self) -> OElem {
        OElem::new(-self.x, -self.y)
    }

    pub fn scale(self, k: i64) -> OElem {
        OElem::new(self.x * k, self.y * k)
    }

    pub fn is_zero(self) -> bool {
        self.x == 0 && self.y == 0
    }
}

impl fmt::Display for OElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.x, self.y) {
            (x, 0) => write!(f, "{x}"),
            (0, y) => write!(f, "{y}*tau"),
            (x, y) if y < 0 => write!(f, "{x} - {}*tau", -y),
            (x, y) => write!(f, "{x} + {y}*tau"),
        }
    }
}

impl KElem {
    pub fn new(num: OElem, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = den.signum();
        let (num, den) = (num.scale(sign), den * sign);
        let g = gcd(gcd(num.x, num.y), den);
        KElem { num: OElem::new(num.x / g, num.y / g), den: den / g }
    }

    pub fn integral(num: OElem) -> Self {
        KElem { num, den: 1 }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Rational coordinates `(x, y)` with the element equal to `x + y tau`.
    pub fn coords(&self) -> (Ratio<i64>, Ratio<i64>) {
        (Ratio::new(self.num.x, self.den), Ratio::new(self.num.y, self.den))
    }
}

fn check_fundamental(d: i64) -> Result<()> {
    if d >= 0 {
        return Err(Error::NotImaginary(d));
    }
    let squarefree = |m: i64| numtheory::factor(m.unsigned_abs()).iter().all(|&(_, e)| e == 1);
    let ok = match d.rem_euclid(4) {
        1 => squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m)
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NotFundamental(d))
    }
}

impl Field {
    pub fn new(d: i64) -> Result<Field> {
        check_fundamental(d)?;
        let unit_count = match d {
            -4 => 4,
            -3 => 6,
            _ => 2,
        };
        Ok(Field { disc: d, tau_norm: (d * d - d) / 4, unit_count })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn tau_norm(&self) -> i64 {
        self.tau_norm
    }

    /// Number of roots of unity in `O_K`.
    pub fn unit_count(&self) -> usize {
        self.unit_count as usize
    }

    pub fn tau(&self) -> OElem {
        OElem::new(0, 1)
    }

    /// Real and imaginary part of `tau` in double precision (for display and
    /// reduction decisions only).
    pub fn tau_f64(&self) -> (f64, f64) {
        (self.disc as f64 / 2.0, (self.disc.unsigned_abs() as f64).sqrt() / 2.0)
    }

    pub fn mul(&self, a: OElem, b: OElem) -> OElem {
        let (x1, y1, x2, y2) = (a.x as i128, a.y as i128, b.x as i128, b.y as i128);
        let yy = y1 * y2;
        let x = x1 * x2 - self.tau_norm as i128 * yy;
        let y = x1 * y2 + x2 * y1 + self.disc as i128 * yy;
        OElem::new(narrow(x), narrow(y))
    }

    pub fn conj(&self, a: OElem) -> OElem {
        OElem::new(a.x + a.y * self.disc, -a.y)
    }

    pub fn norm(&self, a: OElem) -> i128 {
        let (x, y) = (a.x as i128, a.y as i128);
        x * x + self.disc as i128 * x * y + self.tau_norm as i128 * y * y
    }

    pub fn trace(&self, a: OElem) -> i128 {
        2 * a.x as i128 + self.disc as i128 * a.y as i128
    }

    /// `Tr(a conj(b))`, the bilinear form attached to the norm.
    fn pairing(&self, a: OElem, b: OElem) -> i128 {
        self.trace(self.mul(a, self.conj(b)))
    }

    pub fn kmul(&self, a: KElem, b: KElem) -> KElem {
        KElem::new(self.mul(a.num, b.num), a.den * b.den)
    }

    pub fn kinv(&self, a: KElem) -> KElem {
        assert!(!a.is_zero(), "inverse of zero");
        let n = self.norm(a.num);
        let c = self.conj(a.num).scale(a.den);
        KElem::new(c, narrow(n))
    }

    /// `Tr_{K/Q}` of a field element as an exact rational.
    pub fn ktrace(&self, a: KElem) -> Ratio<i64> {
        Ratio::new(narrow(self.trace(a.num)), a.den)
    }

    /// The element `sqrt(d) = 2 tau - d`.
    pub fn sqrt_disc(&self) -> OElem {
        OElem::new(-self.disc, 2)
    }

    /// All elements of `O_K` with the given norm, in increasing `(x, y)` order.
    pub fn elements_of_norm(&self, n: i64) -> Vec<OElem> {
        // N(x + y tau) = ((2x + d y)^2 + |d| y^2) / 4
        let mut out = Vec::new();
        if n <= 0 {
            if n == 0 {
                out.push(OElem::ZERO);
            }
            return out;
        }
        let ad = self.disc.unsigned_abs() as i128;
        let n4 = 4 * n as i128;
        let ymax = isqrt(n4 / ad);
        for y in -ymax..=ymax {
            let rest = n4 - ad * y * y;
            if rest < 0 {
                continue;
            }
            let s = isqrt(rest);
            if s * s != rest {
                continue;
            }
            for sgn in [-1i128, 1] {
                if s == 0 && sgn == 1 {
                    continue;
                }
                let twice_x = sgn * s - self.disc as i128 * y;
                if twice_x % 2 == 0 {
                    out.push(OElem::new(narrow(twice_x / 2), narrow(y)));
                }
            }
        }
        out.sort();
        out
    }

    /// Roots of unity of `O_K`.
    pub fn units(&self) -> Vec<OElem> {
        let u = self.elements_of_norm(1);
        debug_assert_eq!(u.len(), self.unit_count());
        u
    }

    /// Kronecker symbol `(d_K / p)` for a prime `p`.
    pub fn kronecker(&self, p: u64) -> i32 {
        kronecker_symbol(self.disc, p)
    }

    pub fn one(&self) -> Ideal {
        Ideal { field: *self, a: 1, b: 0, c: 1 }
    }

    /// The different ideal `(sqrt(d_K))`.
    pub fn different(&self) -> Ideal {
        Ideal::principal(*self, self.sqrt_disc()).expect("sqrt(d) is nonzero")
    }

    /// Prime ideal factorization of the rational prime `p`.
    pub fn factor_rational_prime(&self, p: u64) -> Vec<(Ideal, u32)> {
        let p = p as i64;
        let roots = self.tau_roots_mod(p);
        let prime_above = |r: i64| {
            Ideal::from_generators(*self, &[OElem::rational(p), OElem::new(-r, 1)])
                .expect("nonzero generators")
        };
        match roots.len() {
            0 => vec![(Ideal::rational(*self, p), 1)],
            1 => vec![(prime_above(roots[0]), 2)],
            _ => {
                let mut v = vec![(prime_above(roots[0]), 1), (prime_above(roots[1]), 1)];
                v.sort_by(|x, y| x.0.cmp(&y.0));
                v
            }
        }
    }

    /// Roots of the minimal polynomial `x^2 - d x + N(tau)` modulo the prime `p`.
    fn tau_roots_mod(&self, p: i64) -> Vec<i64> {
        if p == 2 {
            return (0..2)
                .filter(|&r| (r * r - self.disc * r + self.tau_norm).rem_euclid(2) == 0)
                .collect();
        }
        let Some(s) = numtheory::sqrt_mod_prime(self.disc, p) else {
            return Vec::new();
        };
        let inv2 = (p + 1) / 2;
        let r1 = ((self.disc + s).rem_euclid(p) as i128 * inv2 as i128 % p as i128) as i64;
        let r2 = ((self.disc - s).rem_euclid(p) as i128 * inv2 as i128 % p as i128) as i64;
        if r1 == r2 {
            vec![r1]
        } else {
            let mut v = vec![r1, r2];
            v.sort();
            v
        }
    }

    /// Number of roots of unity `u` with `u = 1 (mod m)`.
    pub fn unit_count_mod(&self, m: &Ideal) -> usize {
        self.units().into_iter().filter(|&u| m.contains(u.sub(OElem::ONE))).count()
    }

    /// All integral ideals of norm exactly `n`, ordered by HNF.
    pub fn ideals_of_norm(&self, n: i64) -> Vec<Ideal> {
        let mut out = Vec::new();
        let mut c = 1i64;
        while c * c <= n {
            if n % (c * c) == 0 {
                let a1 = n / (c * c);
                for b1 in 0..a1 {
                    let v = b1 as i128 * b1 as i128
                        + self.disc as i128 * b1 as i128
                        + self.tau_norm as i128;
                    if v.rem_euclid(a1 as i128) == 0 {
                        out.push(Ideal { field: *self, a: c * a1, b: c * b1, c });
                    }
                }
            }
            c += 1;
        }
        out.sort();
        out
    }

    /// Every integral ideal of norm `<= norm_bound` coprime to `coprime_to`,
    /// ordered by `(norm, HNF)`.
    pub fn enumerate_integral_ideals(&self, norm_bound: i64, coprime_to: &Ideal) -> Vec<Ideal> {
        IdealStream::new(*self, *coprime_to).take_while(|i| i.norm() <= norm_bound).collect()
    }

    /// Reduced positive definite forms `(a, b, c)` of discriminant `d_K`.
    pub fn reduced_forms(&self) -> Vec<(i64, i64, i64)> {
        let d = self.disc;
        let mut out = Vec::new();
        let amax = isqrt((-d / 3) as i128) as i64;
        for a in 1..=amax {
            for b in -a + 1..=a {
                let num = b * b - d;
                if num % (4 * a) != 0 {
                    continue;
                }
                let c = num / (4 * a);
                if c < a || (c == a && b < 0) {
                    continue;
                }
                if gcd(gcd(a, b), c) == 1 {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// Class number `h_K`, counted from reduced forms.
    pub fn class_number(&self) -> usize {
        self.reduced_forms().len()
    }
}

fn narrow(v: i128) -> i64 {
    i64::try_from(v).expect("coordinate overflow in quadratic field arithmetic")
}

/// Kronecker symbol `(d / p)` for a prime `p`.
pub fn kronecker_symbol(d: i64, p: u64) -> i32 {
    if p == 2 {
        if d % 2 == 0 {
            return 0;
        }
        return match d.rem_euclid(8) {
            1 | 7 => 1,
            _ => -1,
        };
    }
    let p = p as i64;
    let r = mod_pow(d, ((p - 1) / 2) as u64, p);
    match r {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Hermite normal form `(a, b, c)` of the Z-span of the given coordinate
/// vectors, or `None` when they do not span a rank-2 lattice.
fn hnf(vectors: &[(i128, i128)]) -> Option<(i128, i128, i128)> {
    let mut pivot: (i128, i128) = (0, 0);
    let mut axis: i128 = 0;
    for &v0 in vectors {
        let mut v = v0;
        // Euclid on the tau-coordinate between the pivot and v.
        while v.1 != 0 {
            if pivot.1 == 0 {
                std::mem::swap(&mut pivot, &mut v);
                continue;
            }
            let q = pivot.1.div_euclid(v.1);
            pivot = (pivot.0 - q * v.0, pivot.1 - q * v.1);
            std::mem::swap(&mut pivot, &mut v);
        }
        axis = numtheory::ext_gcd(axis, v.0).0;
    }
    if pivot.1 < 0 {
        pivot = (-pivot.0, -pivot.1);
    }
    if pivot.1 == 0 || axis == 0 {
        return None;
    }
    Some((axis, pivot.0.rem_euclid(axis), pivot.1))
}

impl Ideal {
    fn from_hnf(field: Field, h: (i128, i128, i128)) -> Ideal {
        Ideal { field, a: narrow(h.0), b: narrow(h.1), c: narrow(h.2) }
    }

    /// The ideal generated by the given elements.
    pub fn from_generators(field: Field, gens: &[OElem]) -> Result<Ideal> {
        let tau = field.tau();
        let mut vecs = Vec::with_capacity(2 * gens.len());
        for &g in gens {
            let gt = field.mul(g, tau);
            vecs.push((g.x as i128, g.y as i128));
            vecs.push((gt.x as i128, gt.y as i128));
        }
        hnf(&vecs).map(|h| Self::from_hnf(field, h)).ok_or(Error::ZeroIdeal)
    }

    pub fn principal(field: Field, g: OElem) -> Result<Ideal> {
        Self::from_generators(field, &[g])
    }

    /// The ideal `(n)` for a nonzero rational integer.
    pub fn rational(field: Field, n: i64) -> Ideal {
        let n = n.abs();
        assert!(n > 0, "zero ideal");
        Ideal { field, a: n, b: 0, c: n }
    }

    /// Builds an ideal from an HNF triple, checking closure under `tau`.
    pub fn from_hnf_checked(field: Field, a: i64, b: i64, c: i64) -> Result<Ideal> {
        if a <= 0 || c <= 0 || b < 0 || b >= a {
            return Err(Error::InvalidInput(format!("({a}, {b}, {c}) is not in HNF")));
        }
        let cand = Ideal { field, a, b, c };
        let tau = field.tau();
        if cand.basis().iter().all(|&w| cand.contains(field.mul(w, tau))) {
            Ok(cand)
        } else {
            Err(Error::InvalidInput(format!("({a}, {b}, {c}) is not an ideal")))
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn hnf(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    /// Z-basis `[a, b + c tau]`.
    pub fn basis(&self) -> [OElem; 2] {
        [OElem::new(self.a, 0), OElem::new(self.b, self.c)]
    }

    pub fn norm(&self) -> i64 {
        self.a * self.c
    }

    /// Generator of `self ∩ Z`.
    pub fn least_positive_integer(&self) -> i64 {
        self.a
    }

    pub fn is_one(&self) -> bool {
        self.a == 1
    }

    pub fn contains(&self, v: OElem) -> bool {
        if v.y.rem_euclid(self.c) != 0 {
            return false;
        }
        let k = v.y / self.c;
        (v.x as i128 - k as i128 * self.b as i128).rem_euclid(self.a as i128) == 0
    }

    /// Canonical representative of `v` modulo the ideal, with
    /// `0 <= x < a` and `0 <= y < c`.
    pub fn reduce(&self, v: OElem) -> OElem {
        let k = v.y.div_euclid(self.c);
        let y = v.y - k * self.c;
        let x = (v.x as i128 - k as i128 * self.b as i128).rem_euclid(self.a as i128);
        OElem::new(x as i64, y)
    }

    /// All residues modulo the ideal in canonical form.
    pub fn residues(&self) -> impl Iterator<Item = OElem> + '_ {
        (0..self.c).flat_map(move |y| (0..self.a).map(move |x| OElem::new(x, y)))
    }

    pub fn mul(&self, o: &Ideal) -> Ideal {
        let f = self.field;
        let tau = f.tau();
        let mut vecs = Vec::with_capacity(8);
        for &u in &self.basis() {
            for &w in &o.basis() {
                let p = f.mul(u, w);
                let pt = f.mul(p, tau);
                vecs.push((p.x as i128, p.y as i128));
                vecs.push((pt.x as i128, pt.y as i128));
            }
        }
        Self::from_hnf(f, hnf(&vecs).expect("product of nonzero ideals"))
    }

    pub fn pow(&self, e: u32) -> Ideal {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// The sum `self + o`, i.e. the gcd of the two ideals.
    pub fn add(&self, o: &Ideal) -> Ideal {
        let vecs: Vec<(i128, i128)> = self
            .basis()
            .iter()
            .chain(o.basis().iter())
            .map(|w| (w.x as i128, w.y as i128))
            .collect();
        Self::from_hnf(self.field, hnf(&vecs).expect("nonzero sum"))
    }

    pub fn is_coprime(&self, o: &Ideal) -> bool {
        self.add(o).is_one()
    }

    /// Whether the element generates an ideal coprime to `self`.
    pub fn is_coprime_elem(&self, v: OElem) -> bool {
        match Ideal::principal(self.field, v) {
            Ok(p) => p.is_coprime(self),
            Err(_) => self.is_one(),
        }
    }

    /// `self | o`, i.e. `o ⊆ self`.
    pub fn divides(&self, o: &Ideal) -> bool {
        o.basis().iter().all(|&w| self.contains(w))
    }

    /// `d | self`.
    pub fn divisible_by(&self, d: &Ideal) -> bool {
        d.divides(self)
    }

    pub fn conj(&self) -> Ideal {
        let f = self.field;
        Ideal::from_generators(f, &[f.conj(self.basis()[0]), f.conj(self.basis()[1])])
            .expect("nonzero ideal")
    }

    /// Largest rational integer `g` with `self ⊆ g O_K`.
    pub fn content(&self) -> i64 {
        gcd(gcd(self.a, self.b), self.c)
    }

    fn divide_by_integer(&self, g: i64) -> Ideal {
        debug_assert_eq!(self.content() % g, 0);
        Ideal { field: self.field, a: self.a / g, b: self.b / g, c: self.c / g }
    }

    /// `self / d` when `d | self`.
    pub fn div_exact(&self, d: &Ideal) -> Option<Ideal> {
        if !d.divides(self) {
            return None;
        }
        let prod = self.mul(&d.conj());
        Some(prod.divide_by_integer(d.norm()))
    }

    pub fn inverse(&self) -> FracIdeal {
        FracIdeal::new(self.conj(), self.norm())
    }

    /// Shortest nonzero element of the lattice, found by Lagrange reduction of
    /// the norm form.
    pub fn shortest_element(&self) -> OElem {
        let f = self.field;
        let [mut w1, mut w2] = self.basis();
        if f.norm(w2) < f.norm(w1) {
            std::mem::swap(&mut w1, &mut w2);
        }
        loop {
            let n1 = f.norm(w1);
            let t = f.pairing(w1, w2);
            // mu = round(t / (2 n1))
            let mu = (t + n1).div_euclid(2 * n1);
            w2 = w2.sub(w1.scale(narrow(mu)));
            if f.norm(w2) < n1 {
                std::mem::swap(&mut w1, &mut w2);
            } else {
                return w1;
            }
        }
    }

    /// Gauss-reduced Z-basis of the lattice.
    pub fn reduced_basis(&self) -> [OElem; 2] {
        let f = self.field;
        let [mut w1, mut w2] = self.basis();
        if f.norm(w2) < f.norm(w1) {
            std::mem::swap(&mut w1, &mut w2);
        }
        loop {
            let n1 = f.norm(w1);
            let mu = (f.pairing(w1, w2) + n1).div_euclid(2 * n1);
            w2 = w2.sub(w1.scale(narrow(mu)));
            if f.norm(w2) < n1 {
                std::mem::swap(&mut w1, &mut w2);
            } else {
                return [w1, w2];
            }
        }
    }

    /// Generator of the ideal when it is principal.
    ///
    /// Lattice elements of norm `N(a)` are enumerated exhaustively in a
    /// reduced basis; any such element generates. Among the unit multiples
    /// the smallest `(x, y)` is returned.
    pub fn principal_generator(&self) -> Option<OElem> {
        let f = self.field;
        let target = self.norm() as i128;
        let [w1, w2] = self.reduced_basis();
        // Q(u, v) = A u^2 + B u v + C v^2 with 4AC - B^2 > 0.
        let qa = f.norm(w1);
        let qb = f.pairing(w1, w2);
        let qc = f.norm(w2);
        let det = 4 * qa * qc - qb * qb;
        let vmax = isqrt(4 * qa * target / det) + 1;
        let mut found: Option<OElem> = None;
        for v in -vmax..=vmax {
            // A u^2 + (B v) u + (C v^2 - target) = 0
            let disc = qb * qb * v * v - 4 * qa * (qc * v * v - target);
            if disc < 0 {
                continue;
            }
            let s = isqrt(disc);
            if s * s != disc {
                continue;
            }
            for num in [-qb * v - s, -qb * v + s] {
                if num % (2 * qa) != 0 {
                    continue;
                }
                let u = num / (2 * qa);
                let e = w1.scale(narrow(u)).add(w2.scale(narrow(v)));
                if f.norm(e) == target && !e.is_zero() {
                    found = Some(found.map_or(e, |best| best.min(e)));
                }
            }
        }
        found
    }

    pub fn is_principal(&self) -> bool {
        self.principal_generator().is_some()
    }

    /// Largest `e` with `p^e | self`.
    pub fn valuation(&self, p: &Ideal) -> u32 {
        let mut e = 0;
        let mut pe = *p;
        while pe.divides(self) {
            e += 1;
            pe = pe.mul(p);
        }
        e
    }

    /// Prime ideal factorization, primes ordered by norm then HNF.
    pub fn factor(&self) -> Vec<(Ideal, u32)> {
        let mut out = Vec::new();
        for p in numtheory::prime_divisors(self.norm() as u64) {
            for (q, _) in self.field.factor_rational_prime(p) {
                let e = self.valuation(&q);
                if e > 0 {
                    out.push((q, e));
                }
            }
        }
        out.sort();
        out
    }

    /// Prime ideals dividing `self`.
    pub fn prime_factors(&self) -> Vec<Ideal> {
        self.factor().into_iter().map(|(p, _)| p).collect()
    }

    /// All integral ideals dividing `self`, ordered by `(norm, HNF)`.
    pub fn divisors(&self) -> Vec<Ideal> {
        let mut out = vec![self.field.one()];
        for (p, e) in self.factor() {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for d in &out {
                let mut acc = *d;
                next.push(acc);
                for _ in 0..e {
                    acc = acc.mul(&p);
                    next.push(acc);
                }
            }
            out = next;
        }
        out.sort();
        out
    }
}

impl Ord for Ideal {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.norm(), self.a, self.b, self.c).cmp(&(o.norm(), o.a, o.b, o.c))
    }
}

impl PartialOrd for Ideal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Debug for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ideal[{}, {} + {}*tau]", self.a, self.b, self.c)
    }
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {} + {}*tau]", self.a, self.b, self.c)
    }
}

impl FracIdeal {
    pub fn new(num: Ideal, den: i64) -> FracIdeal {
        assert!(den > 0, "denominator must be positive");
        let g = gcd(num.content(), den);
        FracIdeal { num: num.divide_by_integer(g), den: den / g }
    }

    pub fn integral(num: Ideal) -> FracIdeal {
        FracIdeal { num, den: 1 }
    }

    pub fn mul(&self, o: &FracIdeal) -> FracIdeal {
        FracIdeal::new(self.num.mul(&o.num), self.den * o.den)
    }

    pub fn inverse(&self) -> FracIdeal {
        // (I / d)^-1 = d conj(I) / N(I)
        let conj = self.num.conj();
        let scaled = conj.mul(&Ideal::rational(self.num.field, self.den));
        FracIdeal::new(scaled, self.num.norm())
    }

    pub fn is_integral(&self) -> bool {
        self.den == 1
    }

    pub fn is_one(&self) -> bool {
        self.den == 1 && self.num.is_one()
    }

    pub fn norm(&self) -> Ratio<i64> {
        Ratio::new(self.num.norm(), self.den * self.den)
    }
}

/// Integral ideals coprime to a modulus, in increasing `(norm, HNF)` order.
pub struct IdealStream {
    field: Field,
    modulus: Ideal,
    norm: i64,
    pending: std::vec::IntoIter<Ideal>,
}

impl IdealStream {
    pub fn new(field: Field, modulus: Ideal) -> Self {
        IdealStream { field, modulus, norm: 0, pending: Vec::new().into_iter() }
    }
}

impl Iterator for IdealStream {
    type Item = Ideal;

    fn next(&mut self) -> Option<Ideal> {
        loop {
            if let Some(i) = self.pending.next() {
                return Some(i);
            }
            self.norm += 1;
            let batch: Vec<Ideal> = self
                .field
                .ideals_of_norm(self.norm)
                .into_iter()
                .filter(|i| i.is_coprime(&self.modulus))
                .collect();
            self.pending = batch.into_iter();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(d: i64) -> Field {
        Field::new(d).unwrap()
    }

    /// Every element of the ideal with norm equal to N(a), found by scanning all
    /// of O_K of that norm.
    fn generators_by_scan(a: &Ideal) -> Vec<OElem> {
        a.field().elements_of_norm(a.norm()).into_iter().filter(|&e| a.contains(e)).collect()
    }

    #[test]
    fn make_field_examples() {
        let k = f(-20);
        assert_eq!(k.unit_count(), 2);
        let (re, im) = k.tau_f64();
        assert_eq!(re, -10.0);
        assert!((im - 5f64.sqrt()).abs() < 1e-12);
        assert_eq!(f(-4).unit_count(), 4);
        assert_eq!(f(-3).unit_count(), 6);
        assert_eq!(f(-7).unit_count(), 2);
        assert_eq!(Field::new(-5), Err(Error::NotFundamental(-5)));
        assert_eq!(Field::new(-12), Err(Error::NotFundamental(-12)));
        assert_eq!(Field::new(5), Err(Error::NotImaginary(5)));
        assert_eq!(Field::new(0), Err(Error::NotImaginary(0)));
    }

    #[test]
    fn units_are_roots_of_unity() {
        for d in [-3, -4, -7, -8, -20, -23] {
            let k = f(d);
            let units = k.units();
            assert_eq!(units.len(), k.unit_count());
            for u in units {
                let mut p = u;
                let mut order = 1;
                while p != OElem::ONE {
                    p = k.mul(p, u);
                    order += 1;
                    assert!(order <= 6);
                }
            }
        }
    }

    #[test]
    fn kronecker_examples_and_brute_force() {
        assert_eq!(kronecker_symbol(-20, 2), 0);
        assert_eq!(kronecker_symbol(-31, 2), 1);
        assert_eq!(kronecker_symbol(-20, 7), 1);
        for d in [-20i64, -23, -31, -7, -3, -4, -163] {
            for &p in numtheory::primes_up_to(200).iter().skip(1) {
                let p = p as i64;
                let r = d.rem_euclid(p);
                let expect = if r == 0 {
                    0
                } else if (1..p).any(|x| x * x % p == r) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker_symbol(d, p as u64), expect, "d={d} p={p}");
            }
        }
    }

    #[test]
    fn prime_factorization_examples() {
        let k = f(-20);
        let seven = k.factor_rational_prime(7);
        assert_eq!(seven.len(), 2);
        assert!(seven.iter().all(|(p, e)| p.norm() == 7 && *e == 1));
        assert_ne!(seven[0].0, seven[1].0);
        let two = k.factor_rational_prime(2);
        assert_eq!(two.len(), 1);
        assert_eq!((two[0].0.norm(), two[0].1), (2, 2));
        let eleven = k.factor_rational_prime(11);
        assert_eq!(eleven.len(), 1);
        assert_eq!(eleven[0].0.norm(), 121);
        for d in [-3, -4, -20, -23, -31] {
            let k = f(d);
            for &p in &numtheory::primes_up_to(60) {
                let prod = k
                    .factor_rational_prime(p)
                    .iter()
                    .fold(k.one(), |acc, (q, e)| acc.mul(&q.pow(*e)));
                assert_eq!(prod, Ideal::rational(k, p as i64));
            }
        }
    }

    #[test]
    fn ideal_product_inverse_norm() {
        let k = f(-20);
        // tau = -10 + sqrt(-5), so 1 + sqrt(-5) = 11 + tau
        let p2 = Ideal::from_generators(k, &[OElem::rational(2), OElem::new(11, 1)]).unwrap();
        assert_eq!(p2.norm(), 2);
        assert_eq!(p2.mul(&p2), Ideal::rational(k, 2));
        assert!(k.one().inverse().is_one());
        let p3 = Ideal::from_generators(k, &[OElem::rational(3), OElem::new(11, 1)]).unwrap();
        assert_eq!(p3.norm(), 3);
        let inv = p3.inverse();
        assert!(FracIdeal::integral(p3).mul(&inv).is_one());
        assert_eq!(Ideal::from_generators(k, &[OElem::ZERO]), Err(Error::ZeroIdeal));
        assert_eq!(p2.least_positive_integer(), 2);
        assert_eq!(Ideal::rational(k, 9).least_positive_integer(), 9);
        assert_eq!(k.one().least_positive_integer(), 1);
        let p7 = k.factor_rational_prime(7)[0].0;
        assert_eq!(p7.least_positive_integer(), 7);
    }

    #[test]
    fn principal_examples() {
        let k = f(-20);
        let p2 = Ideal::from_generators(k, &[OElem::rational(2), OElem::new(11, 1)]).unwrap();
        assert_eq!(p2.principal_generator(), None);
        assert!(generators_by_scan(&p2).is_empty());
        let g = Ideal::rational(k, 3).principal_generator().unwrap();
        assert!(k.units().iter().any(|&u| k.mul(u, g) == OElem::rational(3)));
        let alpha = OElem::new(11, 1); // 1 + sqrt(-5)
        let ideal = Ideal::principal(k, alpha).unwrap();
        assert_eq!(ideal.norm(), 6);
        let g = ideal.principal_generator().unwrap();
        assert!(k.units().iter().any(|&u| k.mul(u, g) == alpha));
    }

    #[test]
    fn different_and_units_mod() {
        let k = f(-20);
        assert_eq!(k.different().norm(), 20);
        assert_eq!(f(-7).different().norm(), 7);
        assert!(k.different().conj() == k.different());
        assert_eq!(k.unit_count_mod(&Ideal::rational(k, 5)), 1);
        assert_eq!(k.unit_count_mod(&Ideal::rational(k, 2)), 2);
        assert_eq!(k.unit_count_mod(&k.one()), 2);
        let g = f(-4);
        assert_eq!(g.unit_count_mod(&Ideal::rational(g, 2)), 2);
    }

    #[test]
    fn ideal_enumeration() {
        let k = f(-20);
        assert_eq!(k.enumerate_integral_ideals(1, &k.one()), vec![k.one()]);
        let small = k.enumerate_integral_ideals(3, &Ideal::rational(k, 2));
        assert_eq!(small.len(), 3);
        assert_eq!(small[0], k.one());
        assert!(small[1..].iter().all(|i| i.norm() == 3));
        for d in [-20i64, -23, -3, -4] {
            let k = f(d);
            let count = k.enumerate_integral_ideals(100, &k.one()).len();
            let oracle: i64 = (1..=100)
                .map(|n: i64| {
                    (1..=n)
                        .filter(|m| n % m == 0)
                        .map(|m| {
                            numtheory::factor(m as u64)
                                .iter()
                                .map(|&(p, e)| kronecker_symbol(d, p).pow(e) as i64)
                                .product::<i64>()
                        })
                        .sum::<i64>()
                })
                .sum();
            assert_eq!(count as i64, oracle, "d={d}");
        }
    }

    #[test]
    fn class_numbers_from_forms() {
        assert_eq!(f(-20).reduced_forms(), vec![(1, 0, 5), (2, 2, 3)]);
        assert_eq!(f(-7).class_number(), 1);
        assert_eq!(f(-23).class_number(), 3);
        assert_eq!(f(-31).class_number(), 3);
        assert_eq!(f(-3).class_number(), 1);
        assert_eq!(f(-4).class_number(), 1);
    }

    #[test]
    fn divisors_and_factorization() {
        let k = f(-20);
        let twelve = Ideal::rational(k, 12);
        let fac = twelve.factor();
        // (2) = p^2, 3 splits
        assert_eq!(fac.len(), 3);
        assert_eq!(twelve.divisors().len(), 5 * 2 * 2);
        for d in twelve.divisors() {
            assert!(d.divides(&twelve));
            let q = twelve.div_exact(&d).unwrap();
            assert_eq!(q.mul(&d), twelve);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn ideal_strategy() -> impl Strategy<Value = (i64, Ideal, Ideal)> {
            (prop::sample::select(vec![-20i64, -23, -31, -4, -3, -7, -15]), 1i64..60, 1i64..60, 0usize..8, 0usize..8)
                .prop_filter_map("norm with ideals", |(d, n1, n2, i1, i2)| {
                    let k = Field::new(d).ok()?;
                    let a = k.ideals_of_norm(n1);
                    let b = k.ideals_of_norm(n2);
                    if a.is_empty() || b.is_empty() {
                        return None;
                    }
                    Some((d, a[i1 % a.len()], b[i2 % b.len()]))
                })
        }

        proptest! {
            #[test]
            fn norm_is_multiplicative((_d, a, b) in ideal_strategy()) {
                prop_assert_eq!(a.mul(&b).norm(), a.norm() * b.norm());
            }

            #[test]
            fn inverse_is_exact((_d, a, _b) in ideal_strategy()) {
                prop_assert!(FracIdeal::integral(a).mul(&a.inverse()).is_one());
            }

            #[test]
            fn generator_reproduces_ideal((_d, a, b) in ideal_strategy()) {
                let prod = a.mul(&b);
                let scanned = generators_by_scan(&prod);
                match prod.principal_generator() {
                    Some(g) => {
                        prop_assert_eq!(Ideal::principal(prod.field(), g).unwrap(), prod);
                        prop_assert!(scanned.contains(&g));
                    }
                    None => prop_assert!(scanned.is_empty()),
                }
            }

            #[test]
            fn coprimality_is_trivial_gcd((_d, a, b) in ideal_strategy()) {
                let common = a.prime_factors().iter().any(|p| p.divides(&b));
                prop_assert_eq!(a.is_coprime(&b), !common);
            }
        }
    }
}
