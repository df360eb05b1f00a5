//! Exact sums of roots of unity in `Z[x] / (x^n - 1)`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_rational::Ratio;

use crate::numeric::{AppComplex, PrecisionContext};
use crate::numtheory::gcd;

/// `exp(2 pi i num / den)` with `0 <= num < den` and `gcd(num, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootOfUnity {
    num: i64,
    den: i64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den > 0);
        let num = num.rem_euclid(den);
        let g = gcd(num, den).max(1);
        RootOfUnity { num: num / g, den: den / g }
    }

    pub fn one() -> Self {
        RootOfUnity { num: 0, den: 1 }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// The exponent as a fraction in `[0, 1)`.
    pub fn exponent(&self) -> Ratio<i64> {
        Ratio::new(self.num, self.den)
    }

    pub fn order(&self) -> i64 {
        self.den
    }

    pub fn mul(&self, o: &RootOfUnity) -> Self {
        let den = self.den / gcd(self.den, o.den) * o.den;
        RootOfUnity::new(self.num * (den / self.den) + o.num * (den / o.den), den)
    }

    pub fn conj(&self) -> Self {
        RootOfUnity::new(-self.num, self.den)
    }

    pub fn to_complex(&self, ctx: &PrecisionContext) -> AppComplex {
        AppComplex::expi2pi(&ctx.ratio(self.exponent()))
    }
}

/// An element `sum_k c_k zeta_n^k` of the group ring of `Z/n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycloSum {
    n: i64,
    coeffs: Vec<i64>,
}

fn poly_divmod_monic(num: &[i64], den: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return (Vec::new(), rem);
    }
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (dd..rem.len()).rev() {
        let c = rem[i];
        if c != 0 {
            quot[i - dd] = c;
            for (j, &dj) in den.iter().enumerate() {
                rem[i - dd + j] -= c * dj;
            }
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

/// Coefficients of the `n`-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_polynomial(n: i64) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<i64, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("cache poisoned").get(&n) {
        return p.clone();
    }
    let mut p = vec![0i64; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let (q, r) = poly_divmod_monic(&p, &cyclotomic_polynomial(d));
            debug_assert!(r.iter().all(|&x| x == 0));
            p = q;
        }
    }
    cache.lock().expect("cache poisoned").insert(n, p.clone());
    p
}

impl CycloSum {
    pub fn zero(n: i64) -> Self {
        CycloSum { n, coeffs: vec![0; n as usize] }
    }

    pub fn modulus(&self) -> i64 {
        self.n
    }

    /// Adds `c zeta_n^k`.
    pub fn add_term(&mut self, k: i64, c: i64) {
        self.coeffs[k.rem_euclid(self.n) as usize] += c;
    }

    pub fn add_root(&mut self, r: &RootOfUnity) {
        assert_eq!(self.n % r.den, 0, "root order must divide the sum modulus");
        self.add_term(r.num * (self.n / r.den), 1);
    }

    /// Whether the sum vanishes as a complex number.
    pub fn is_zero(&self) -> bool {
        let mut c = self.coeffs.clone();
        while c.last() == Some(&0) {
            c.pop();
        }
        if c.is_empty() {
            return true;
        }
        let (_, r) = poly_divmod_monic(&c, &cyclotomic_polynomial(self.n));
        r.iter().all(|&x| x == 0)
    }

    /// Whether the sum equals the given integer.
    pub fn equals_integer(&self, v: i64) -> bool {
        let mut s = self.clone();
        s.add_term(0, -v);
        s.is_zero()
    }

    pub fn to_complex(&self, ctx: &PrecisionContext) -> AppComplex {
        let mut acc = AppComplex::zero(ctx.bits());
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                let z = RootOfUnity::new(k as i64, self.n).to_complex(ctx);
                acc = &acc + &z.scale(&ctx.real(c as f64));
            }
        }
        acc
    }
}
