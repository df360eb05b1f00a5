//! Small rational-integer helpers shared by the exact layers.

use num_integer::Integer;

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Returns `(g, x, y)` with `a*x + b*y = g = gcd(a, b) >= 0`.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Inverse of `a` modulo `m > 0`, if it exists. The result lies in `[0, m)`.
pub fn mod_inv(a: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as i64)
}

pub fn mod_pow(base: i64, mut exp: u64, m: i64) -> i64 {
    let m = m as i128;
    let mut b = (base as i128).rem_euclid(m);
    let mut acc = 1i128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as i64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    // Deterministic Miller-Rabin for 64-bit inputs.
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: usize) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Smallest prime factor for every integer up to `n` (0 and 1 map to themselves).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf: Vec<u32> = (0..=n as u32).collect();
    let mut i = 2;
    while i * i <= n {
        if spf[i] == i as u32 {
            let mut j = i * i;
            while j <= n {
                if spf[j] == j as u32 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
        i += 1;
    }
    spf
}

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: i128) -> i128 {
    assert!(n >= 0, "isqrt of negative number");
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// A square root of `a` modulo the odd prime `p` (Tonelli-Shanks), or `None`
/// for a non-residue.
pub fn sqrt_mod_prime(a: i64, p: i64) -> Option<i64> {
    let a = a.rem_euclid(p);
    if p == 2 {
        return Some(a);
    }
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, ((p - 1) / 2) as u64, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while mod_pow(z, ((p - 1) / 2) as u64, p) != p - 1 {
        z += 1;
    }
    let mul = |x: i64, y: i64| ((x as i128 * y as i128) % p as i128) as i64;
    let mut m = s;
    let mut c = mod_pow(z, q as u64, p);
    let mut t = mod_pow(a, q as u64, p);
    let mut r = mod_pow(a, ((q + 1) / 2) as u64, p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul(tt, tt);
            i += 1;
        }
        let mut b = c;
        for _ in 0..(m - i - 1) {
            b = mul(b, b);
        }
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    Some(r)
}

/// Solves `x = r1 (mod m1)`, `x = r2 (mod m2)` for coprime moduli, returning the
/// least nonnegative solution.
pub fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> Option<i64> {
    let (g, p, _) = ext_gcd(m1 as i128, m2 as i128);
    if g != 1 {
        return None;
    }
    let m = m1 as i128 * m2 as i128;
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128);
    let k = (diff * p).rem_euclid(m2 as i128);
    Some((r1 as i128 + m1 as i128 * k).rem_euclid(m) as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_sieve() {
        let sieve = primes_up_to(5000);
        let from_test: Vec<u64> = (0..=5000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieve, from_test);
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001));
    }

    #[test]
    fn sqrt_mod_prime_squares_back() {
        for &p in primes_up_to(400).iter().skip(1) {
            let p = p as i64;
            for a in 0..p {
                let residue = (1..p).any(|x| x * x % p == a) || a == 0;
                match sqrt_mod_prime(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert!(!residue),
                }
            }
        }
    }

    #[test]
    fn crt_and_inverse() {
        assert_eq!(crt(1, 16, 2, 3), Some(17));
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(2, 4), None);
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
    }
}
