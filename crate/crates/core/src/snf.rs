//! Smith normal form of small integer relation matrices.

/// Result of diagonalising a relation matrix `R` as `U R V = D`.
///
/// Only `V` and `V^-1` are kept: a row vector `x` of generator exponents maps
/// to invariant-factor coordinates by `x V (mod d_i)`, and row `i` of `V^-1`
/// expresses the `i`-th invariant-factor generator in the original generators.
#[derive(Clone, Debug)]
pub struct Smith {
    pub diagonal: Vec<i64>,
    pub v: Vec<Vec<i64>>,
    pub v_inv: Vec<Vec<i64>>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Diagonalises a square nonsingular integer matrix, returning invariant
/// factors `d_1 | d_2 | ... | d_n` (all positive, ones included).
pub fn smith(rel: &[Vec<i64>]) -> Smith {
    let n = rel.len();
    let mut a: Vec<Vec<i128>> = rel
        .iter()
        .map(|r| {
            assert_eq!(r.len(), n, "relation matrix must be square");
            r.iter().map(|&x| x as i128).collect()
        })
        .collect();
    let mut v = identity(n);
    let mut vi = identity(n);

    let swap_cols = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, vi: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
        vi.swap(i, j);
    };
    // col_j -= q col_k
    let col_op = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, vi: &mut Vec<Vec<i128>>, j: usize, k: usize, q: i128| {
        if q == 0 {
            return;
        }
        for row in a.iter_mut() {
            row[j] -= q * row[k];
        }
        for row in v.iter_mut() {
            row[j] -= q * row[k];
        }
        let (rj, rk) = (vi[j].clone(), &mut vi[k]);
        for (x, y) in rk.iter_mut().zip(rj) {
            *x += q * y;
        }
    };

    for k in 0..n {
        loop {
            // pivot: smallest nonzero entry of the trailing block
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if a[i][j] != 0 && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let (pi, pj) = best.expect("relation matrix is singular");
            a.swap(k, pi);
            if pj != k {
                swap_cols(&mut a, &mut v, &mut vi, k, pj);
            }
            let p = a[k][k];
            let mut clean = true;
            for i in k + 1..n {
                let q = a[i][k].div_euclid(p);
                if q != 0 {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, y) in rest[0].iter_mut().zip(&top[k]) {
                        *x -= q * y;
                    }
                }
                clean &= a[i][k] == 0;
            }
            for j in k + 1..n {
                let q = a[k][j].div_euclid(p);
                col_op(&mut a, &mut v, &mut vi, j, k, q);
                clean &= a[k][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility condition on the trailing block
            let bad = (k + 1..n).find(|&i| (k + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, y) in top[k].iter_mut().zip(&rest[0]) {
                        *x += *y;
                    }
                }
                None => break,
            }
        }
        if a[k][k] < 0 {
            for row in a.iter_mut() {
                row[k] = -row[k];
            }
            for row in v.iter_mut() {
                row[k] = -row[k];
            }
            for x in vi[k].iter_mut() {
                *x = -*x;
            }
        }
    }
    let narrow = |m: Vec<Vec<i128>>| -> Vec<Vec<i64>> {
        m.into_iter()
            .map(|r| r.into_iter().map(|x| i64::try_from(x).expect("SNF transform overflow")).collect())
            .collect()
    };
    Smith {
        diagonal: (0..n).map(|i| a[i][i] as i64).collect(),
        v: narrow(v),
        v_inv: narrow(vi),
    }
}
