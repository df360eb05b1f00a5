//! Ray class groups `Cl(m)` as explicit finite abelian groups.
//!
//! A class is identified by an exact key. With Hilbert-class representatives
//! `r_0 = O_K, r_1, ...` chosen coprime to the modulus, an ideal `a` coprime to
//! `m` satisfies `a conj(r_k) = (beta)` for exactly one `k`, and `a` is
//! determined in `Cl(m)` by `k` together with the class of `beta` in
//! `(O_K/m)^* / image(units)`. Products of keys are computed with a fixed
//! cocycle `r_i r_j conj(r_k) = (delta_ij)`, so no large ideal powers are
//! ever formed.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numtheory::{self, gcd, mod_inv};
use crate::quadfield::{Field, Ideal, IdealStream, OElem};
use crate::snf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Key {
    k: u32,
    res: OElem,
}

/// An element of a ray class group, indexed in lexicographic order of its
/// invariant-factor exponent vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RayClass(pub usize);

impl RayClass {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A subgroup given by its members in increasing index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgroup {
    members: Vec<RayClass>,
    mask: Vec<bool>,
}

impl Subgroup {
    fn from_mask(mask: Vec<bool>) -> Subgroup {
        let members = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| RayClass(i)).collect();
        Subgroup { members, mask }
    }

    pub fn members(&self) -> &[RayClass] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    pub fn contains(&self, c: RayClass) -> bool {
        self.mask[c.0]
    }
}

/// Arithmetic of `(O_K / m)^*` modulo units together with the Hilbert-class
/// cocycle; everything needed to multiply keys.
#[derive(Clone, Debug)]
struct KeyArith {
    modulus: Ideal,
    units: Vec<OElem>,
    reps: Vec<Ideal>,
    reps_conj: Vec<Ideal>,
    /// `(k, delta, inverse of N(r_i) N(r_j) mod ell)` for each pair `(i, j)`.
    cocycle: Vec<Vec<(u32, OElem, i64)>>,
    primes: Vec<Ideal>,
}

impl KeyArith {
    fn new(field: Field, modulus: Ideal) -> KeyArith {
        let ell = modulus.least_positive_integer();
        let h = field.class_number();
        let coprime_to = Ideal::rational(field, ell);
        let mut reps: Vec<Ideal> = Vec::with_capacity(h);
        let mut reps_conj: Vec<Ideal> = Vec::with_capacity(h);
        for cand in IdealStream::new(field, coprime_to) {
            if reps.len() == h {
                break;
            }
            if reps_conj.iter().all(|rc| !cand.mul(rc).is_principal()) {
                reps.push(cand);
                reps_conj.push(cand.conj());
            }
        }
        let mut arith = KeyArith {
            modulus,
            units: field.units(),
            reps,
            reps_conj,
            cocycle: Vec::new(),
            primes: modulus.prime_factors(),
        };
        let mut cocycle = vec![Vec::with_capacity(h); h];
        for i in 0..h {
            for j in 0..h {
                let prod = arith.reps[i].mul(&arith.reps[j]);
                let (k, delta) = arith.hilbert_part(&prod).expect("representatives cover the class group");
                let n = (arith.reps[i].norm() as i128 * arith.reps[j].norm() as i128).rem_euclid(ell as i128);
                let inv = mod_inv(n as i64, ell).expect("representatives are coprime to the modulus");
                cocycle[i].push((k, modulus.reduce(delta), inv));
            }
        }
        arith.cocycle = cocycle;
        arith
    }

    /// `(k, beta)` with `a conj(r_k) = (beta)`.
    fn hilbert_part(&self, a: &Ideal) -> Option<(u32, OElem)> {
        self.reps_conj
            .iter()
            .enumerate()
            .find_map(|(k, rc)| a.mul(rc).principal_generator().map(|b| (k as u32, b)))
    }

    fn canon(&self, beta: OElem) -> OElem {
        let f = self.modulus.field();
        self.units.iter().map(|&u| self.modulus.reduce(f.mul(u, beta))).min().expect("at least one unit")
    }

    fn is_unit_mod(&self, beta: OElem) -> bool {
        self.primes.iter().all(|p| !p.contains(beta))
    }

    fn identity(&self) -> Key {
        Key { k: 0, res: self.canon(OElem::ONE) }
    }

    fn key_of_ideal(&self, a: &Ideal) -> Result<Key> {
        if !a.is_coprime(&self.modulus) {
            return Err(Error::NotCoprime);
        }
        let (k, beta) = self.hilbert_part(a).expect("representatives cover the class group");
        Ok(Key { k, res: self.canon(beta) })
    }

    fn key_of_element(&self, alpha: OElem) -> Result<Key> {
        if alpha.is_zero() {
            return Err(Error::ZeroIdeal);
        }
        if !self.is_unit_mod(alpha) {
            return Err(Error::NotCoprime);
        }
        Ok(Key { k: 0, res: self.canon(alpha) })
    }

    fn mul(&self, a: Key, b: Key) -> Key {
        let f = self.modulus.field();
        let (k, delta, inv) = self.cocycle[a.k as usize][b.k as usize];
        let m = &self.modulus;
        let ab = m.reduce(f.mul(a.res, b.res));
        let abd = m.reduce(f.mul(ab, delta));
        Key { k, res: self.canon(abd.scale(inv)) }
    }
}

/// `Cl(m)` with every class materialised.
#[derive(Clone, Debug)]
pub struct RayClassGroup {
    field: Field,
    arith: KeyArith,
    generators: Vec<Ideal>,
    /// Invariant factors, all `> 1`, with `d_i | d_{i+1}`.
    divisors: Vec<i64>,
    /// Row `j`: coordinates of generator `j` in invariant-factor exponents.
    gen_coords: Vec<Vec<i64>>,
    /// Row `i`: invariant-factor generator `i` in terms of `generators`.
    snf_gens: Vec<Vec<i64>>,
    keys: Vec<Key>,
    index: HashMap<Key, usize>,
    representatives: Vec<Ideal>,
}

/// `Phi(m) = |(O_K/m)^*|`.
pub fn euler_phi(m: &Ideal) -> i64 {
    m.factor()
        .iter()
        .map(|(p, e)| {
            let n = p.norm();
            (n - 1) * n.pow(e - 1)
        })
        .product()
}

/// The order `h_K Phi(m) w(m) / w_K` predicted for `Cl(m)`.
pub fn predicted_order(field: Field, m: &Ideal) -> i64 {
    field.class_number() as i64 * euler_phi(m) * field.unit_count_mod(m) as i64 / field.unit_count() as i64
}

const GENERATOR_NORM_START: i64 = 50;
const GENERATOR_NORM_CAP: i64 = 1 << 20;

/// Prime ideals coprime to `m` with norm in `(lo, hi]`, ordered by `(norm, HNF)`.
fn prime_ideals_between(field: Field, m: &Ideal, lo: i64, hi: i64) -> Vec<Ideal> {
    let mut out = Vec::new();
    for p in numtheory::primes_up_to(hi as usize) {
        for (q, _) in field.factor_rational_prime(p) {
            let n = q.norm();
            if n > lo && n <= hi && q.is_coprime(m) {
                out.push(q);
            }
        }
    }
    out.sort();
    out
}

/// The class group `Cl(O_K)`.
pub fn class_group(field: Field) -> RayClassGroup {
    RayClassGroup::new(field, field.one()).expect("the trivial modulus is valid")
}

/// The ray class group modulo `m`.
pub fn ray_class_group(field: Field, m: &Ideal) -> Result<RayClassGroup> {
    RayClassGroup::new(field, *m)
}

impl RayClassGroup {
    pub fn new(field: Field, modulus: Ideal) -> Result<RayClassGroup> {
        let arith = KeyArith::new(field, modulus);
        let target = predicted_order(field, &modulus) as usize;

        let mut elems: Vec<Key> = vec![arith.identity()];
        let mut coords: Vec<Vec<i64>> = vec![Vec::new()];
        let mut lookup: HashMap<Key, usize> = HashMap::from([(elems[0], 0)]);
        let mut generators: Vec<Ideal> = Vec::new();
        let mut relations: Vec<Vec<i64>> = Vec::new();

        let (mut lo, mut hi) = (0, GENERATOR_NORM_START);
        while elems.len() < target {
            if lo >= GENERATOR_NORM_CAP {
                return Err(Error::SearchExhausted(GENERATOR_NORM_CAP));
            }
            for p in prime_ideals_between(field, &modulus, lo, hi) {
                if elems.len() == target {
                    break;
                }
                let g = arith.key_of_ideal(&p)?;
                let mut power = g;
                let mut e = 1i64;
                while !lookup.contains_key(&power) {
                    power = arith.mul(power, g);
                    e += 1;
                }
                if e == 1 {
                    continue;
                }
                let r = generators.len();
                let mut row: Vec<i64> = coords[lookup[&power]].iter().map(|&x| -x).collect();
                row.resize(r, 0);
                row.push(e);
                relations.push(row);
                for c in coords.iter_mut() {
                    c.resize(r + 1, 0);
                }
                let old = elems.len();
                let mut step = g;
                for i in 1..e {
                    for idx in 0..old {
                        let key = arith.mul(elems[idx], step);
                        let mut c = coords[idx].clone();
                        c[r] = i;
                        lookup.insert(key, elems.len());
                        elems.push(key);
                        coords.push(c);
                    }
                    step = arith.mul(step, g);
                }
                generators.push(p);
            }
            lo = hi;
            hi *= 2;
        }
        debug_assert!(elems.len() == target);

        let r = generators.len();
        for row in relations.iter_mut() {
            row.resize(r, 0);
        }
        let (divisors, gen_coords, snf_gens) = if r == 0 {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            let s = snf::smith(&relations);
            let keep: Vec<usize> = (0..r).filter(|&i| s.diagonal[i] > 1).collect();
            let divisors: Vec<i64> = keep.iter().map(|&i| s.diagonal[i]).collect();
            let gen_coords: Vec<Vec<i64>> = (0..r)
                .map(|j| keep.iter().zip(&divisors).map(|(&c, &d)| s.v[j][c].rem_euclid(d)).collect())
                .collect();
            let snf_gens: Vec<Vec<i64>> = keep.iter().map(|&c| s.v_inv[c].clone()).collect();
            (divisors, gen_coords, snf_gens)
        };

        let mut group = RayClassGroup {
            field,
            arith,
            generators,
            divisors,
            gen_coords,
            snf_gens,
            keys: vec![elems[0]; target],
            index: HashMap::with_capacity(target),
            representatives: Vec::new(),
        };
        for (key, x) in elems.iter().zip(&coords) {
            let y = group.coords_from_generators(x);
            let idx = group.encode(&y);
            group.keys[idx] = *key;
            group.index.insert(*key, idx);
        }
        assert_eq!(group.index.len(), target, "inconsistent class enumeration");
        group.representatives = group.find_representatives(1).into_iter().map(|v| v[0]).collect();
        Ok(group)
    }

    fn coords_from_generators(&self, x: &[i64]) -> Vec<i64> {
        let mut y = vec![0i64; self.divisors.len()];
        for (j, &xj) in x.iter().enumerate() {
            for (c, yc) in y.iter_mut().enumerate() {
                *yc = (*yc + xj * self.gen_coords[j][c]).rem_euclid(self.divisors[c]);
            }
        }
        y
    }

    fn encode(&self, y: &[i64]) -> usize {
        y.iter().zip(&self.divisors).fold(0usize, |acc, (&v, &d)| acc * d as usize + v.rem_euclid(d) as usize)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn modulus(&self) -> &Ideal {
        &self.arith.modulus
    }

    /// Invariant factors `d_1 | d_2 | ...`, omitting ones.
    pub fn invariants(&self) -> &[i64] {
        &self.divisors
    }

    /// Prime ideals whose classes generate the group.
    pub fn generators(&self) -> &[Ideal] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.keys.len()
    }

    pub fn classes(&self) -> impl Iterator<Item = RayClass> {
        (0..self.order()).map(RayClass)
    }

    pub fn identity(&self) -> RayClass {
        RayClass(0)
    }

    pub fn exponents(&self, c: RayClass) -> Vec<i64> {
        let mut out = vec![0i64; self.divisors.len()];
        let mut rest = c.0;
        for (slot, &d) in out.iter_mut().zip(&self.divisors).rev() {
            *slot = (rest % d as usize) as i64;
            rest /= d as usize;
        }
        out
    }

    pub fn from_exponents(&self, y: &[i64]) -> RayClass {
        assert_eq!(y.len(), self.divisors.len());
        RayClass(self.encode(y))
    }

    pub fn mul(&self, a: RayClass, b: RayClass) -> RayClass {
        let (ya, yb) = (self.exponents(a), self.exponents(b));
        let y: Vec<i64> = ya.iter().zip(&yb).map(|(x, y)| x + y).collect();
        RayClass(self.encode(&y))
    }

    pub fn inv(&self, a: RayClass) -> RayClass {
        let y: Vec<i64> = self.exponents(a).iter().map(|x| -x).collect();
        RayClass(self.encode(&y))
    }

    pub fn pow(&self, a: RayClass, e: i64) -> RayClass {
        let y: Vec<i64> = self.exponents(a).iter().map(|x| x * e).collect();
        RayClass(self.encode(&y))
    }

    pub fn element_order(&self, a: RayClass) -> i64 {
        self.exponents(a)
            .iter()
            .zip(&self.divisors)
            .map(|(&x, &d)| d / gcd(x, d))
            .fold(1, numtheory::lcm)
    }

    /// Discrete logarithm of an ideal coprime to the modulus.
    pub fn class_of(&self, a: &Ideal) -> Result<RayClass> {
        let key = self.arith.key_of_ideal(a)?;
        Ok(RayClass(self.index[&key]))
    }

    /// Class of the principal ideal `(alpha)`.
    pub fn class_of_element(&self, alpha: OElem) -> Result<RayClass> {
        let key = self.arith.key_of_element(alpha)?;
        Ok(RayClass(self.index[&key]))
    }

    pub fn log(&self, a: &Ideal) -> Result<Vec<i64>> {
        self.class_of(a).map(|c| self.exponents(c))
    }

    /// Whether `alpha` is a unit modulo the group modulus.
    pub fn is_coprime_element(&self, alpha: OElem) -> bool {
        self.arith.is_unit_mod(alpha)
    }

    /// Class `C_t` of the principal ideal `(t)`, for a rational modulus `(N)`.
    pub fn c_t(&self, t: i64) -> Result<RayClass> {
        let n = self.rational_level()?;
        if gcd(t, n) != 1 {
            return Err(Error::NotCoprime);
        }
        self.class_of_element(OElem::rational(t.rem_euclid(n)))
    }

    /// `N` when the modulus is `(N)`.
    pub fn rational_level(&self) -> Result<i64> {
        let m = self.modulus();
        let n = m.least_positive_integer();
        if *m == Ideal::rational(self.field, n) {
            Ok(n)
        } else {
            Err(Error::InvalidInput(format!("modulus {m} is not generated by a rational integer")))
        }
    }

    /// Least-norm integral representative of the class, coprime to the modulus.
    pub fn representative(&self, c: RayClass) -> Ideal {
        self.representatives[c.0]
    }

    /// The first `count` integral ideals (by norm, then HNF) in every class.
    pub fn find_representatives(&self, count: usize) -> Vec<Vec<Ideal>> {
        let mut out: Vec<Vec<Ideal>> = vec![Vec::with_capacity(count); self.order()];
        let mut missing = self.order() * count;
        for a in IdealStream::new(self.field, *self.modulus()) {
            if missing == 0 {
                break;
            }
            let c = self.class_of(&a).expect("stream yields coprime ideals");
            if out[c.0].len() < count {
                out[c.0].push(a);
                missing -= 1;
            }
        }
        out
    }

    /// The natural surjection `Cl(self) -> Cl(target)`, as the image of every class.
    pub fn map_to(&self, target: &RayClassGroup) -> Result<Vec<RayClass>> {
        if target.field != self.field || !target.modulus().divides(self.modulus()) {
            return Err(Error::NotDivisor);
        }
        let gen_images: Vec<RayClass> =
            self.generators.iter().map(|g| target.class_of(g)).collect::<Result<_>>()?;
        let snf_images: Vec<RayClass> = self
            .snf_gens
            .iter()
            .map(|row| {
                row.iter().zip(&gen_images).fold(target.identity(), |acc, (&e, &g)| target.mul(acc, target.pow(g, e)))
            })
            .collect();
        Ok(self
            .classes()
            .map(|c| {
                self.exponents(c)
                    .iter()
                    .zip(&snf_images)
                    .fold(target.identity(), |acc, (&e, &g)| target.mul(acc, target.pow(g, e)))
            })
            .collect())
    }

    pub fn subgroup_from(&self, members: impl IntoIterator<Item = RayClass>) -> Subgroup {
        let mut mask = vec![false; self.order()];
        for c in members {
            mask[c.0] = true;
        }
        Subgroup::from_mask(mask)
    }

    /// Kernel of `Cl(self) -> Cl(target)`.
    pub fn kernel_to(&self, target: &RayClassGroup) -> Result<Subgroup> {
        let images = self.map_to(target)?;
        Ok(Subgroup::from_mask(images.iter().map(|&c| c == target.identity()).collect()))
    }

    /// Preimage of a subgroup of `target`.
    pub fn preimage(&self, target: &RayClassGroup, s: &Subgroup) -> Result<Subgroup> {
        let images = self.map_to(target)?;
        Ok(Subgroup::from_mask(images.iter().map(|&c| s.contains(c)).collect()))
    }

    /// `Cl(K_m / H)`: kernel of the map to `Cl(O_K)`.
    pub fn subgroup_hilbert(&self) -> Subgroup {
        self.kernel_to(&class_group(self.field)).expect("O_K divides every modulus")
    }

    /// `Cl(K_(N) / H_N) = {C_t}` for a rational modulus.
    pub fn subgroup_ring(&self) -> Result<Subgroup> {
        let n = self.rational_level()?;
        let members: Vec<RayClass> =
            (1..=n).filter(|&t| gcd(t, n) == 1).map(|t| self.c_t(t)).collect::<Result<_>>()?;
        Ok(self.subgroup_from(members))
    }

    /// `Cl(K_m / K_m')`: kernel of the map to `Cl(m')` for `m' | m`.
    pub fn subgroup_level(&self, target: &Ideal) -> Result<Subgroup> {
        if !target.divides(self.modulus()) {
            return Err(Error::NotDivisor);
        }
        self.kernel_to(&RayClassGroup::new(self.field, *target)?)
    }

    /// The subgroup fixing `H_{p^e}`, for `p^e || N`: preimage of the ring class
    /// subgroup of `Cl(p^e)`.
    pub fn subgroup_ring_at(&self, pe: i64) -> Result<Subgroup> {
        let small = RayClassGroup::new(self.field, Ideal::rational(self.field, pe))?;
        let ring = small.subgroup_ring()?;
        self.preimage(&small, &ring)
    }

    pub fn is_subgroup(&self, s: &Subgroup) -> bool {
        s.contains(self.identity())
            && s.members().iter().all(|&a| s.members().iter().all(|&b| s.contains(self.mul(a, b))))
    }
}

/// `[K_(N) : H]` from the prime factorization of `(N)`.
pub fn degree_kn_over_h(field: Field, n: i64) -> i64 {
    let m = Ideal::rational(field, n);
    euler_phi(&m) * field.unit_count_mod(&m) as i64 / field.unit_count() as i64
}

/// `[H_N : H] = N prod_{p | N} (1 - (d_K/p)/p)`.
pub fn degree_ring_over_h(field: Field, n: i64) -> i64 {
    numtheory::prime_divisors(n as u64).iter().fold(n, |acc, &p| {
        let p = p as i64;
        acc / p * (p - field.kronecker(p as u64) as i64)
    })
}

/// `2 || N` and 2 splits in `K`, the situation where `K_(N) = K_(N/2)`.
pub fn collapses_to_half(field: Field, n: i64) -> bool {
    n % 2 == 0 && (n / 2) % 2 == 1 && field.kronecker(2) == 1
}
