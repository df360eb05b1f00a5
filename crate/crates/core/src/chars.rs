//! Characters of ray class groups: conductors, primitive descent, Gauss sums
//! and the searches for characters with prescribed triviality and conductor.

use crate::cyclo::{CycloSum, RootOfUnity};
use crate::error::{Error, Result};
use crate::numeric::{AppComplex, PrecisionContext};
use crate::numtheory::lcm;
use crate::quadfield::{Field, Ideal, KElem};
use crate::rayclass::{RayClass, RayClassGroup, Subgroup};

/// `chi(C) = exp(2 pi i sum_j a_j c_j / d_j)` for the invariant factors `d_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    exps: Vec<i64>,
    divisors: Vec<i64>,
}

impl Character {
    pub fn new(group: &RayClassGroup, exps: Vec<i64>) -> Character {
        let divisors = group.invariants().to_vec();
        assert_eq!(exps.len(), divisors.len(), "exponent vector length");
        let exps = exps.iter().zip(&divisors).map(|(a, d)| a.rem_euclid(*d)).collect();
        Character { exps, divisors }
    }

    pub fn principal(group: &RayClassGroup) -> Character {
        Character::new(group, vec![0; group.invariants().len()])
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exps
    }

    pub fn is_principal(&self) -> bool {
        self.exps.iter().all(|&a| a == 0)
    }

    /// Exponent of the group, a common order for all values.
    pub fn value_order(&self) -> i64 {
        self.divisors.last().copied().unwrap_or(1)
    }

    fn decode(&self, c: RayClass) -> Vec<i64> {
        let mut out = vec![0i64; self.divisors.len()];
        let mut rest = c.0;
        for (slot, &d) in out.iter_mut().zip(&self.divisors).rev() {
            *slot = (rest % d as usize) as i64;
            rest /= d as usize;
        }
        out
    }

    /// `chi(C)` as `k` with value `zeta_D^k`, `D = value_order()`.
    pub fn value_exp(&self, c: RayClass) -> i64 {
        let big = self.value_order();
        self.decode(c)
            .iter()
            .zip(&self.exps)
            .zip(&self.divisors)
            .map(|((x, a), d)| x * a % d * (big / d))
            .sum::<i64>()
            .rem_euclid(big)
    }

    pub fn value(&self, c: RayClass) -> RootOfUnity {
        RootOfUnity::new(self.value_exp(c), self.value_order())
    }

    pub fn value_complex(&self, c: RayClass, ctx: &PrecisionContext) -> AppComplex {
        self.value(c).to_complex(ctx)
    }

    pub fn conj(&self) -> Character {
        Character {
            exps: self.exps.iter().zip(&self.divisors).map(|(a, d)| (-a).rem_euclid(*d)).collect(),
            divisors: self.divisors.clone(),
        }
    }

    pub fn mul(&self, o: &Character) -> Character {
        assert_eq!(self.divisors, o.divisors, "characters of different groups");
        Character {
            exps: self.exps.iter().zip(&o.exps).zip(&self.divisors).map(|((a, b), d)| (a + b) % d).collect(),
            divisors: self.divisors.clone(),
        }
    }

    pub fn is_trivial_on(&self, s: &Subgroup) -> bool {
        s.members().iter().all(|&c| self.value_exp(c) == 0)
    }

    /// Exact `sum_{C in classes} chi(C)`.
    pub fn sum_over(&self, classes: impl IntoIterator<Item = RayClass>) -> CycloSum {
        let mut s = CycloSum::zero(self.value_order());
        for c in classes {
            s.add_term(self.value_exp(c), 1);
        }
        s
    }

    /// The character of `group` whose value at each invariant-factor generator
    /// is given by `f`.
    fn from_generator_values(group: &RayClassGroup, f: impl Fn(RayClass) -> RootOfUnity) -> Character {
        let n = group.invariants().len();
        let exps = (0..n)
            .map(|i| {
                let mut unit = vec![0i64; n];
                unit[i] = 1;
                let v = f(group.from_exponents(&unit));
                let d = group.invariants()[i];
                let e = v.exponent() * d;
                assert!(e.is_integer(), "value order does not divide generator order");
                *e.numer()
            })
            .collect();
        Character::new(group, exps)
    }
}

/// All characters of the group in lexicographic order of exponent vectors.
pub fn dual_group(group: &RayClassGroup) -> Vec<Character> {
    group.classes().map(|c| Character::new(group, group.exponents(c))).collect()
}

/// Every divisor `m'` of the modulus with `Cl(m')` and the map onto it.
pub struct LevelLattice {
    field: Field,
    pub divisors: Vec<Ideal>,
    pub groups: Vec<RayClassGroup>,
    pub images: Vec<Vec<RayClass>>,
    pub kernels: Vec<Subgroup>,
}

impl LevelLattice {
    pub fn new(group: &RayClassGroup) -> Result<LevelLattice> {
        let divisors = group.modulus().divisors();
        let mut groups = Vec::with_capacity(divisors.len());
        let mut images = Vec::with_capacity(divisors.len());
        let mut kernels = Vec::with_capacity(divisors.len());
        for d in &divisors {
            let small = RayClassGroup::new(group.field(), *d)?;
            let img = group.map_to(&small)?;
            let id = small.identity();
            kernels.push(group.subgroup_from(group.classes().filter(|c| img[c.0] == id)));
            images.push(img);
            groups.push(small);
        }
        Ok(LevelLattice { field: group.field(), divisors, groups, images, kernels })
    }

    pub fn position(&self, m: &Ideal) -> Option<usize> {
        self.divisors.iter().position(|d| d == m)
    }

    pub fn top(&self) -> usize {
        self.divisors.len() - 1
    }

    /// Position of the modulus with every power of `p` removed.
    pub fn without_prime(&self, p: &Ideal) -> usize {
        let top = &self.divisors[self.top()];
        let e = top.valuation(p);
        let m = top.div_exact(&p.pow(e)).expect("p^e divides the modulus");
        self.position(&m).expect("divisor present")
    }

    pub fn field(&self) -> Field {
        self.field
    }
}

/// Position in the lattice of the conductor of `chi`.
pub fn conductor_index(chi: &Character, lattice: &LevelLattice) -> usize {
    let ok: Vec<usize> = (0..lattice.divisors.len()).filter(|&i| chi.is_trivial_on(&lattice.kernels[i])).collect();
    let minimal: Vec<usize> = ok
        .iter()
        .copied()
        .filter(|&i| !ok.iter().any(|&j| j != i && lattice.divisors[j].divides(&lattice.divisors[i])))
        .collect();
    assert_eq!(minimal.len(), 1, "conductor must be the unique minimal level");
    minimal[0]
}

pub fn conductor(chi: &Character, lattice: &LevelLattice) -> Ideal {
    lattice.divisors[conductor_index(chi, lattice)]
}

/// Whether the prime `p` of the modulus divides the conductor of `chi`.
pub fn prime_divides_conductor(chi: &Character, lattice: &LevelLattice, p: &Ideal) -> bool {
    !chi.is_trivial_on(&lattice.kernels[lattice.without_prime(p)])
}

/// The primitive character `chi_0` on `Cl(f_chi)` with `chi = chi_0 o pi`,
/// returned with the lattice position of `f_chi`.
pub fn primitive_descent(chi: &Character, lattice: &LevelLattice) -> (usize, Character) {
    let i = conductor_index(chi, lattice);
    let small = &lattice.groups[i];
    let img = &lattice.images[i];
    let n_classes = img.len();
    let chi0 = Character::from_generator_values(small, |target| {
        let pre = (0..n_classes).find(|&c| img[c] == target).expect("the map is surjective");
        chi.value(RayClass(pre))
    });
    (i, chi0)
}

/// `chi_0 o pi` as a character of the big group.
pub fn pull_back(chi0: &Character, group: &RayClassGroup, images: &[RayClass]) -> Character {
    Character::from_generator_values(group, |c| chi0.value(images[c.0]))
}

/// Whether `gamma d_K f` is an integral ideal coprime to `f`; returns it.
pub fn gamma_ideal(field: Field, f: &Ideal, gamma: KElem) -> Option<Ideal> {
    if gamma.is_zero() {
        return None;
    }
    let df = field.different().mul(f);
    let j = Ideal::principal(field, gamma.num).ok()?.mul(&df);
    if j.content() % gamma.den != 0 {
        return None;
    }
    let a = j.div_exact(&Ideal::rational(field, gamma.den))?;
    a.is_coprime(f).then_some(a)
}

const GAMMA_NORM_CAP: i64 = 100_000_000;

/// The first `count` elements `gamma` (by norm of `gamma d_K f`, then HNF)
/// with `gamma d_K f` integral and coprime to `f`.
pub fn choose_gammas(field: Field, f: &Ideal, count: usize) -> Result<Vec<KElem>> {
    if f.is_one() {
        return Err(Error::InvalidInput("the conductor must be a proper ideal".into()));
    }
    let df = field.different().mul(f);
    let df_conj = df.conj();
    let n_df = df.norm();
    let mut out = Vec::with_capacity(count);
    let mut n = 1i64;
    let mut cap = 64i64;
    while out.len() < count {
        if n > cap {
            cap *= 2;
            if cap > GAMMA_NORM_CAP {
                return Err(Error::SearchExhausted(GAMMA_NORM_CAP));
            }
        }
        for a in field.ideals_of_norm(n) {
            if out.len() == count {
                break;
            }
            if !a.is_coprime(f) {
                continue;
            }
            // a conj(df) = (beta) gives a (df)^-1 = (beta / N(df))
            if let Some(beta) = a.mul(&df_conj).principal_generator() {
                let gamma = KElem::new(beta, n_df);
                debug_assert_eq!(gamma_ideal(field, f, gamma), Some(a));
                out.push(gamma);
            }
        }
        n += 1;
    }
    Ok(out)
}

pub fn choose_gamma(field: Field, f: &Ideal) -> Result<KElem> {
    Ok(choose_gammas(field, f, 1)?[0])
}

/// `T_gamma(conj(chi_0)) = sum_{alpha in (O/f)^*} conj(chi_0)([alpha]) e^{2 pi i Tr(alpha gamma)}`
/// as an exact cyclotomic sum.
pub fn gauss_sum_exact(field: Field, gamma: KElem, chi0: &Character, group_f: &RayClassGroup) -> Result<CycloSum> {
    let f = group_f.modulus();
    if f.is_one() {
        return Err(Error::InvalidInput("Gauss sums need a proper conductor".into()));
    }
    if gamma_ideal(field, f, gamma).is_none() {
        return Err(Error::InvalidInput("gamma d_K f is not integral and coprime to f".into()));
    }
    let big = chi0.value_order();
    let n = lcm(big, gamma.den);
    let mut s = CycloSum::zero(n);
    for alpha in f.residues() {
        if !group_f.is_coprime_element(alpha) {
            continue;
        }
        let c = group_f.class_of_element(alpha)?;
        let tr = field.trace(field.mul(alpha, gamma.num)).rem_euclid(gamma.den as i128) as i64;
        let k = -chi0.value_exp(c) * (n / big) + tr * (n / gamma.den);
        s.add_term(k, 1);
    }
    Ok(s)
}

pub fn gauss_sum(
    field: Field,
    gamma: KElem,
    chi0: &Character,
    group_f: &RayClassGroup,
    ctx: &PrecisionContext,
) -> Result<AppComplex> {
    Ok(gauss_sum_exact(field, gamma, chi0, group_f)?.to_complex(ctx))
}

/// A character of `Cl(N)` with (A1) trivial on `{C_t}`, (A2) `chi(C) != 1`,
/// (A3) every prime of `(N)` dividing its conductor: the first in scan order.
pub fn find_char_a(group: &RayClassGroup, lattice: &LevelLattice, c: RayClass) -> Result<Character> {
    let ring = group.subgroup_ring()?;
    let primes = group.modulus().prime_factors();
    dual_group(group)
        .into_iter()
        .find(|chi| {
            !chi.value(c).is_one()
                && chi.is_trivial_on(&ring)
                && primes.iter().all(|p| prime_divides_conductor(chi, lattice, p))
        })
        .ok_or_else(|| Error::NoneFound("trivial on C_t, nontrivial at C, full conductor support".into()))
}

/// A character trivial on the subgroup fixing `H_{p^e}`, with conductor
/// dividing `(p^e)` and divisible by every prime above `p`.
pub fn find_char_p(group: &RayClassGroup, lattice: &LevelLattice, p: i64, e: u32) -> Result<Character> {
    let n = group.rational_level()?;
    let pe = p.pow(e);
    if n % pe != 0 || (n / pe) % p == 0 {
        return Err(Error::InvalidInput(format!("{p}^{e} does not exactly divide {n}")));
    }
    let field = group.field();
    let fixing = group.subgroup_ring_at(pe)?;
    let pe_ideal = Ideal::rational(field, pe);
    let above: Vec<Ideal> = field.factor_rational_prime(p as u64).into_iter().map(|(q, _)| q).collect();
    dual_group(group)
        .into_iter()
        .find(|chi| {
            chi.is_trivial_on(&fixing)
                && pe_ideal.divisible_by(&conductor(chi, lattice))
                && above.iter().all(|q| prime_divides_conductor(chi, lattice, q))
        })
        .ok_or_else(|| Error::NoneFound(format!("character attached to {p}^{e}")))
}

/// Characters of `group` pulled back from `Cl(O_K)`, in scan order.
pub fn class_group_characters(group: &RayClassGroup) -> Vec<Character> {
    let hilbert = group.subgroup_hilbert();
    dual_group(group).into_iter().filter(|chi| chi.is_trivial_on(&hilbert)).collect()
}

/// `chi` if it is nontrivial on `s`, otherwise `chi rho` for the first
/// class-group character `rho` nontrivial on `s`.
pub fn twist_nontrivial_on(group: &RayClassGroup, chi: &Character, s: &Subgroup) -> Result<Character> {
    if s.is_trivial() {
        return Err(Error::AlreadyImpossible);
    }
    if !chi.is_trivial_on(s) {
        return Ok(chi.clone());
    }
    class_group_characters(group)
        .into_iter()
        .find(|rho| !rho.is_trivial_on(s))
        .map(|rho| chi.mul(&rho))
        .ok_or(Error::NoTwistExists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadfield::OElem;
    use crate::rayclass::ray_class_group;

    fn setup(d: i64, n: i64) -> (Field, RayClassGroup, LevelLattice) {
        let f = Field::new(d).unwrap();
        let g = ray_class_group(f, &Ideal::rational(f, n)).unwrap();
        let l = LevelLattice::new(&g).unwrap();
        (f, g, l)
    }

    #[test]
    fn dual_group_and_orthogonality() {
        let (_, g, _) = setup(-20, 12);
        let dual = dual_group(&g);
        assert_eq!(dual.len(), g.order());
        assert!(dual[0].is_principal());
        for chi in &dual {
            let s = chi.sum_over(g.classes());
            let expect = if chi.is_principal() { g.order() as i64 } else { 0 };
            assert!(s.equals_integer(expect));
            for c in g.classes().take(5) {
                for c2 in g.classes().take(5) {
                    assert_eq!(chi.value(g.mul(c, c2)), chi.value(c).mul(&chi.value(c2)));
                }
            }
            assert!(chi.value(g.identity()).is_one());
        }
    }

    #[test]
    fn conductor_by_full_divisor_scan() {
        let (_, g, l) = setup(-20, 12);
        for chi in dual_group(&g) {
            let f = conductor(&chi, &l);
            // brute force over all divisors: factors through exactly the multiples of f
            for (i, d) in l.divisors.iter().enumerate() {
                assert_eq!(chi.is_trivial_on(&l.kernels[i]), d.divisible_by(&f));
            }
            assert_eq!(conductor(&chi.conj(), &l), f);
        }
        let (_, g9, l9) = setup(-20, 9);
        assert!(conductor(&Character::principal(&g9), &l9).is_one());
    }

    #[test]
    fn descent_round_trip() {
        let (f, g, l) = setup(-20, 9);
        let three = Ideal::rational(f, 3);
        let g3 = ray_class_group(f, &three).unwrap();
        let l3 = LevelLattice::new(&g3).unwrap();
        let img = g.map_to(&g3).unwrap();
        for chi3 in dual_group(&g3) {
            let up = pull_back(&chi3, &g, &img);
            assert!(three.divisible_by(&conductor(&up, &l)));
        }
        for chi in dual_group(&g) {
            let (i, chi0) = primitive_descent(&chi, &l);
            let back = pull_back(&chi0, &g, &l.images[i]);
            assert_eq!(back, chi);
            let l0 = LevelLattice::new(&l.groups[i]).unwrap();
            assert_eq!(conductor(&chi0, &l0), l.divisors[i]);
            let (j, again) = primitive_descent(&chi0, &l0);
            assert_eq!(j, l0.top());
            assert_eq!(again, chi0);
        }
        let _ = l3;
    }

    #[test]
    fn gamma_examples() {
        let f7 = Field::new(-7).unwrap();
        let three = Ideal::rational(f7, 3);
        let g = choose_gamma(f7, &three).unwrap();
        assert_eq!(gamma_ideal(f7, &three, g), Some(f7.one()));
        let f = Field::new(-20).unwrap();
        let five = Ideal::rational(f, 5);
        let gs = choose_gammas(f, &five, 3).unwrap();
        for gm in &gs {
            let a = gamma_ideal(f, &five, *gm).unwrap();
            assert!(a.norm() <= 50);
        }
        assert!(choose_gamma(f, &f.one()).is_err());
    }

    #[test]
    fn gauss_sum_magnitude_and_conjugation() {
        let ctx = PrecisionContext::new(40).unwrap();
        let f = Field::new(-20).unwrap();
        let five = Ideal::rational(f, 5);
        let g5 = ray_class_group(f, &five).unwrap();
        let l5 = LevelLattice::new(&g5).unwrap();
        let gamma = choose_gamma(f, &five).unwrap();
        let mut primitive = 0;
        for chi in dual_group(&g5) {
            if conductor(&chi, &l5) != five {
                continue;
            }
            primitive += 1;
            let t = gauss_sum(f, gamma, &chi, &g5, &ctx).unwrap();
            let diff = t.norm_sqr() - ctx.real(25.0);
            assert!(diff.abs() < ctx.identity_tolerance(), "|T|^2 != 25");
            // (-alpha) and (alpha) are the same ideal, so conj(T(chi)) = T(conj chi)
            let u = gauss_sum(f, gamma, &chi.conj(), &g5, &ctx).unwrap();
            assert!((&t.conj() - &u).abs() < ctx.identity_tolerance());
            // floating resummation over alpha -> -alpha
            let mut resum = AppComplex::zero(ctx.bits());
            for alpha in five.residues().filter(|&a| g5.is_coprime_element(a)) {
                let c = g5.class_of_element(five.reduce(alpha.neg())).unwrap();
                let tr = f.ktrace(f.kmul(KElem::integral(alpha.neg()), gamma));
                let e = AppComplex::expi2pi(&ctx.ratio(tr));
                resum = &resum + &(&chi.value(c).conj().to_complex(&ctx) * &e);
            }
            assert!((&resum - &t).abs() < ctx.identity_tolerance());
        }
        assert!(primitive > 0);
    }

    #[test]
    fn characters_found_by_search() {
        let (f, g8, l8) = setup(-20, 8);
        let c = g8.class_of_element(OElem::new(1, 4)).unwrap(); // (N/2) tau + 1
        let chi = find_char_a(&g8, &l8, c).unwrap();
        assert!(!chi.value(c).is_one());
        for t in [1, 3, 5, 7] {
            assert!(chi.value(g8.c_t(t).unwrap()).is_one());
        }
        let p2 = f.factor_rational_prime(2)[0].0;
        assert!(conductor(&chi, &l8).divisible_by(&p2));

        let (f, g12, l12) = setup(-20, 12);
        for (p, e) in [(2i64, 2u32), (3, 1)] {
            let chi = find_char_p(&g12, &l12, p, e).unwrap();
            let cond = conductor(&chi, &l12);
            assert!(Ideal::rational(f, p.pow(e)).divisible_by(&cond));
            for (q, _) in f.factor_rational_prime(p as u64) {
                assert!(cond.divisible_by(&q));
            }
            assert!(chi.is_trivial_on(&g12.subgroup_ring_at(p.pow(e)).unwrap()));
        }
    }

    #[test]
    fn twisting() {
        let (_, g, l) = setup(-20, 7);
        let triv = g.subgroup_from([g.identity()]);
        let chi = Character::principal(&g);
        assert_eq!(twist_nontrivial_on(&g, &chi, &triv), Err(Error::AlreadyImpossible));
        let full = g.subgroup_from(g.classes());
        let rho = twist_nontrivial_on(&g, &chi, &full).unwrap();
        assert!(!rho.is_principal());
        assert!(conductor(&rho, &l).is_one());
        let ring = g.subgroup_ring().unwrap();
        for chi in dual_group(&g).into_iter().filter(|c| !c.is_principal()).take(6) {
            let before = conductor(&chi, &l).prime_factors();
            if let Ok(tw) = twist_nontrivial_on(&g, &chi, &full) {
                assert_eq!(conductor(&tw, &l).prime_factors(), before);
            }
            let _ = &ring;
        }
    }
}
