//! Exact linear algebra: rational RREF and nullspaces, modular echelon
//! forms for fast rank lower bounds, Bareiss elimination for exact ranks,
//! and orthogonal projection onto integer-spanned subspaces.

use crate::scalar::{Int, Rational};
use num::bigint::BigInt;
use num::{One, Signed, Zero};

/// Mersenne prime 2^61 − 1.
pub const PRIME: u64 = (1u64 << 61) - 1;

#[inline]
fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

#[inline]
fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

#[inline]
fn invmod(a: u64) -> u64 {
    powmod(a, PRIME - 2)
}

#[inline]
pub fn int_mod(v: Int) -> u64 {
    v.0.rem_euclid(PRIME as i128) as u64
}

pub fn bigint_mod(v: &BigInt) -> u64 {
    let p = BigInt::from(PRIME);
    let r = ((v % &p) + &p) % &p;
    r.to_string().parse().unwrap()
}

/// Incremental row echelon form over GF(p). Independence mod p implies
/// independence over Q, so the rank found here is a lower bound for the
/// rational rank.
#[derive(Clone, Debug)]
pub struct ModEchelon {
    width: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    pub fn new(width: usize) -> Self {
        ModEchelon { width, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the current rows; if it stays nonzero it is added
    /// and `true` is returned.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        debug_assert_eq!(v.len(), self.width);
        for (pc, row) in &self.rows {
            let c = v[*pc];
            if c != 0 {
                let f = PRIME - c;
                for (x, r) in v.iter_mut().zip(row.iter()) {
                    if *r != 0 {
                        *x = addmod(*x, mulmod(f, *r));
                    }
                }
            }
        }
        match v.iter().position(|&x| x != 0) {
            None => false,
            Some(pc) => {
                let inv = invmod(v[pc]);
                for x in v.iter_mut() {
                    *x = mulmod(*x, inv);
                }
                self.rows.push((pc, v));
                true
            }
        }
    }

    pub fn insert_int(&mut self, v: &[Int]) -> bool {
        self.insert(v.iter().map(|&x| int_mod(x)).collect())
    }

    pub fn insert_bigint(&mut self, v: &[BigInt]) -> bool {
        self.insert(v.iter().map(bigint_mod).collect())
    }
}

/// Indices of a maximal subset of `vectors` that is independent mod p
/// (hence over Q), scanning in order. Stops early once `limit` vectors are
/// found.
pub fn select_independent(vectors: &[Vec<Int>], limit: Option<usize>) -> Vec<usize> {
    let Some(first) = vectors.first() else { return Vec::new() };
    let mut ech = ModEchelon::new(first.len());
    let mut out = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if ech.insert_int(v) {
            out.push(i);
            if Some(out.len()) == limit {
                break;
            }
        }
    }
    out
}

/// Exact rank of integer row vectors by fraction-free Bareiss elimination.
pub fn rank_bareiss(rows: &[Vec<BigInt>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let ncols = m[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            let f = m[r][col].clone();
            for c in col..ncols {
                let v = (&pivot * &m[r][c] - &f * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
        }
        prev = pivot;
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Exact rank of integer vectors. An all-zero input is rank 0 outright;
/// otherwise the GF(p) rank is a lower bound, and if it reaches `upper` (a
/// known upper bound such as the target dimension) it is exact. In the
/// remaining case the rank is recomputed with Bareiss elimination.
pub fn certified_rank(vectors: &[Vec<Int>], upper: usize) -> usize {
    if vectors.iter().all(|v| v.iter().all(|x| x.0 == 0)) {
        return 0;
    }
    let width = vectors[0].len();
    let mut ech = ModEchelon::new(width);
    for v in vectors {
        ech.insert_int(v);
        if ech.rank() >= upper {
            return ech.rank();
        }
    }
    let lower = ech.rank();
    if lower == width.min(vectors.len()) {
        return lower;
    }
    let big: Vec<Vec<BigInt>> = vectors.iter().map(|v| v.iter().map(|x| x.to_bigint()).collect()).collect();
    rank_bareiss(&big)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let mut pivots = Vec::new();
    if m.is_empty() {
        return pivots;
    }
    let ncols = m[0].len();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(pivot_row.iter()) {
                    if !y.is_zero() {
                        *x = &*x - &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

/// Basis of the right nullspace {x : M x = 0} of a rational matrix given by
/// rows, each of length `ncols`.
pub fn nullspace(rows: &[Vec<Rational>], ncols: usize) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                x[pc] = -m[i][f].clone();
            }
            x
        })
        .collect()
}

/// Rank of a rational matrix.
pub fn rank_rational(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Inverse of a square rational matrix, or `None` if singular.
pub fn inverse(a: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut m);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn to_rational_vec(v: &[Int]) -> Vec<Rational> {
    v.iter().map(|x| x.to_rational()).collect()
}

/// Subspace of a coordinate space spanned by independent integer vectors,
/// with a diagonal metric given by positive integer weights. Projection is
/// the orthogonal projection for that metric.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: Vec<Vec<Int>>,
    pub weights: Vec<Int>,
    gram_inv: Vec<Vec<Rational>>,
}

impl Subspace {
    /// Build from a spanning set; a maximal independent subset is kept.
    pub fn from_span(span: &[Vec<Int>], weights: Vec<Int>) -> Subspace {
        let idx = select_independent(span, None);
        let basis: Vec<Vec<Int>> = idx.iter().map(|&i| span[i].clone()).collect();
        Subspace::from_basis(basis, weights)
    }

    pub fn from_basis(basis: Vec<Vec<Int>>, weights: Vec<Int>) -> Subspace {
        let k = basis.len();
        let gram: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| Rational::from_integer(weighted_dot_big(&basis[i], &basis[j], &weights))).collect())
            .collect();
        let gram_inv = if k == 0 { Vec::new() } else { inverse(&gram).expect("basis vectors are independent") };
        Subspace { basis, weights, gram_inv }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.weights.len()
    }

    /// Coefficients c with P v = Σ c_j b_j.
    pub fn coefficients(&self, v: &[Rational]) -> Vec<Rational> {
        let dots: Vec<Rational> = self
            .basis
            .iter()
            .map(|b| {
                let mut s = Rational::zero();
                for ((x, y), w) in b.iter().zip(v).zip(&self.weights) {
                    if x.0 != 0 && !y.is_zero() {
                        s += y * Rational::from_integer(x.to_bigint() * w.to_bigint());
                    }
                }
                s
            })
            .collect();
        self.gram_inv
            .iter()
            .map(|row| row.iter().zip(&dots).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn combine(&self, c: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.ambient()];
        for (cj, b) in c.iter().zip(&self.basis) {
            if cj.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(b) {
                if x.0 != 0 {
                    *o += cj * x.to_rational();
                }
            }
        }
        out
    }

    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        self.combine(&self.coefficients(v))
    }

    /// Dense projector matrix (row-major).
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.ambient();
        let cols: Vec<Vec<Rational>> = (0..n)
            .map(|j| {
                let mut e = vec![Rational::zero(); n];
                e[j] = Rational::one();
                self.project(&e)
            })
            .collect();
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Orthogonal complement of `inner` inside `self` (both in the same
    /// ambient space with the same weights).
    pub fn complement_of(&self, inner: &Subspace) -> Subspace {
        let k = self.dim();
        // Coefficient vectors c with <Σ c_j b_j, a_i> = 0 for all a_i in inner.
        let rows: Vec<Vec<Rational>> = inner
            .basis
            .iter()
            .map(|a| self.basis.iter().map(|b| Rational::from_integer(weighted_dot_big(a, b, &self.weights))).collect())
            .collect();
        let ns = if rows.is_empty() {
            (0..k)
                .map(|j| (0..k).map(|i| if i == j { Rational::one() } else { Rational::zero() }).collect())
                .collect()
        } else {
            nullspace(&rows, k)
        };
        let basis: Vec<Vec<Int>> = ns
            .iter()
            .map(|c| {
                let v = self.combine(c);
                crate::scalar::primitive_from_rationals(&v).iter().map(crate::scalar::bigint_to_int).collect()
            })
            .collect();
        Subspace::from_basis(basis, self.weights.clone())
    }

    /// Subspace of vectors in `self` killed by a linear map, given as the
    /// images of the basis vectors.
    pub fn kernel_of(&self, images: &[Vec<Rational>]) -> Subspace {
        let k = self.dim();
        let width = images.first().map(|v| v.len()).unwrap_or(0);
        let rows: Vec<Vec<Rational>> = (0..width).map(|r| (0..k).map(|j| images[j][r].clone()).collect()).collect();
        let ns = nullspace(&rows, k);
        let basis: Vec<Vec<Int>> = ns
            .iter()
            .map(|c| {
                let v = self.combine(c);
                crate::scalar::primitive_from_rationals(&v).iter().map(crate::scalar::bigint_to_int).collect()
            })
            .collect();
        Subspace::from_basis(basis, self.weights.clone())
    }
}

pub fn weighted_dot(a: &[Int], b: &[Int], w: &[Int]) -> Int {
    let mut s = Int(0);
    for ((x, y), z) in a.iter().zip(b).zip(w) {
        if x.0 != 0 && y.0 != 0 {
            s = s + *x * *y * *z;
        }
    }
    s
}

/// Weighted dot product without overflow.
pub fn weighted_dot_big(a: &[Int], b: &[Int], w: &[Int]) -> BigInt {
    let mut s = BigInt::zero();
    for ((x, y), z) in a.iter().zip(b).zip(w) {
        if x.0 != 0 && y.0 != 0 {
            s += x.to_bigint() * y.to_bigint() * z.to_bigint();
        }
    }
    s
}

/// Exact Frobenius norm squared of a family of integer vectors.
pub fn norm2_big(vectors: &[Vec<Int>]) -> BigInt {
    let mut s = BigInt::zero();
    for v in vectors {
        for x in v {
            if x.0 != 0 {
                let b = x.to_bigint();
                s += &b * &b;
            }
        }
    }
    s
}

pub fn is_zero_vec<T: crate::scalar::Ring>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn abs_max(v: &[BigInt]) -> BigInt {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
}
