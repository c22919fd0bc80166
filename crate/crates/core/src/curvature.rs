//! Algebraic curvature tensors and their U(n)-irreducible components.
//!
//! Elements of Λ²⊗Λ² are stored in pair coordinates: an N×N matrix
//! `M[p][q] = R(e_i,e_j,e_k,e_l)` with p = (i<j), q = (k<l), flattened
//! row-major. The plain coordinate dot product is ¼ of the full tensor
//! contraction, so orthogonality is the same in both pictures.
//!
//! The isotypic split uses D = Cas + κ·Q, where Cas = −Σ w_a ρ(X_a)² is the
//! u(n) Casimir for the orthonormal-up-to-weight generators X_a and
//! Q = −ρ(I)² is the square of the central weight. On the module with
//! highest weight λ, D acts by 2c(λ) + κ(Σλ)², c(λ) = Σλ_i(λ_i+n+1−2i).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num::bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ModEchelon, Subspace};
use crate::par::Exec;
use crate::scalar::{primitive_from_rationals, reduce_content, Field, Int, Rational, Ring};
use crate::structure::UnStructure;
use crate::tensor::{Symmetry, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ModuleName {
    C3,
    K1,
    K2,
    #[serde(rename = "K-1")]
    Km1,
    #[serde(rename = "K-2")]
    Km2,
    C4,
    C5,
    C6,
    C7,
    C8,
    #[serde(rename = "C5++")]
    C5pp,
    #[serde(rename = "C5--")]
    C5mm,
    #[serde(rename = "C5+-")]
    C5pm,
    #[serde(rename = "C6+")]
    C6p,
    #[serde(rename = "C6-")]
    C6m,
}

impl ModuleName {
    pub const MAIN: [ModuleName; 10] = [
        ModuleName::C3,
        ModuleName::K1,
        ModuleName::K2,
        ModuleName::Km1,
        ModuleName::Km2,
        ModuleName::C4,
        ModuleName::C5,
        ModuleName::C6,
        ModuleName::C7,
        ModuleName::C8,
    ];
    pub const REFINED: [ModuleName; 5] =
        [ModuleName::C5pp, ModuleName::C5mm, ModuleName::C5pm, ModuleName::C6p, ModuleName::C6m];

    pub fn label(self) -> &'static str {
        match self {
            ModuleName::C3 => "C3",
            ModuleName::K1 => "K1",
            ModuleName::K2 => "K2",
            ModuleName::Km1 => "K-1",
            ModuleName::Km2 => "K-2",
            ModuleName::C4 => "C4",
            ModuleName::C5 => "C5",
            ModuleName::C6 => "C6",
            ModuleName::C7 => "C7",
            ModuleName::C8 => "C8",
            ModuleName::C5pp => "C5++",
            ModuleName::C5mm => "C5--",
            ModuleName::C5pm => "C5+-",
            ModuleName::C6p => "C6+",
            ModuleName::C6m => "C6-",
        }
    }

    pub fn parse(s: &str) -> Result<ModuleName> {
        ModuleName::MAIN
            .iter()
            .chain(ModuleName::REFINED.iter())
            .copied()
            .find(|m| m.label() == s.trim())
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    pub fn valid_at(self, n: usize) -> bool {
        match self {
            ModuleName::Km2 | ModuleName::C7 => n >= 3,
            ModuleName::C4 => n >= 4,
            ModuleName::C5pp | ModuleName::C5mm | ModuleName::C5pm | ModuleName::C6p | ModuleName::C6m => n == 2,
            _ => true,
        }
    }

    /// Inside 𝓚 = Cur(u(n)).
    pub fn in_kahler(self) -> bool {
        matches!(self, ModuleName::C3 | ModuleName::K1 | ModuleName::K2)
    }

    /// Highest weight of the complex U(n)-module and whether the real module
    /// is [V] (real type, factor 1) or [[V]] (complex type, factor 2).
    pub fn weight(self, n: usize) -> Option<(Vec<i64>, usize)> {
        if !self.valid_at(n) {
            return None;
        }
        let mut w = vec![0i64; n];
        let factor = match self {
            ModuleName::K1 | ModuleName::Km1 => 1,
            ModuleName::K2 | ModuleName::Km2 => {
                w[0] = 1;
                w[n - 1] = -1;
                1
            }
            ModuleName::C3 => {
                w[0] = 2;
                w[n - 1] = -2;
                1
            }
            ModuleName::C4 => {
                w[0] = 1;
                w[1] = 1;
                w[n - 2] = -1;
                w[n - 1] = -1;
                1
            }
            ModuleName::C5 => {
                w[0] = 2;
                w[1] = 2;
                2
            }
            ModuleName::C6 => {
                w[0] = 1;
                w[1] = 1;
                2
            }
            ModuleName::C7 => {
                w[0] = 2;
                w[1] = 1;
                w[n - 1] = -1;
                2
            }
            ModuleName::C8 => {
                w[0] = 2;
                2
            }
            _ => return None,
        };
        Some((w, factor))
    }

    /// Predicted real dimension from the Weyl formula.
    pub fn predicted_dim(self, n: usize) -> usize {
        match self {
            ModuleName::C5pp | ModuleName::C5mm | ModuleName::C5pm | ModuleName::C6p | ModuleName::C6m => {
                usize::from(n == 2)
            }
            _ => self.weight(n).map(|(w, f)| f * weyl_dim(&w).expect("dominant") as usize).unwrap_or(0),
        }
    }
}

impl fmt::Display for ModuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Weyl dimension ∏_{i<j} (λ_i − λ_j + j − i)/(j − i) of the U(n)-module
/// with dominant weight λ.
pub fn weyl_dim(w: &[i64]) -> Result<u64> {
    if w.windows(2).any(|p| p[0] < p[1]) {
        return Err(Error::Domain(format!("weight {:?} is not dominant", w)));
    }
    let mut num = Rational::one();
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            num = num * Rational::from_i64(w[i] - w[j] + (j - i) as i64) / Rational::from_i64((j - i) as i64);
        }
    }
    Ok(num.to_integer().try_into().expect("small dimension"))
}

/// c(λ) = Σλ_i(λ_i + n + 1 − 2i), 1-based i.
pub fn casimir_value(w: &[i64]) -> i64 {
    let n = w.len() as i64;
    w.iter().enumerate().map(|(i, &l)| l * (l + n + 1 - 2 * (i as i64 + 1))).sum()
}

type Sparse = Vec<Vec<(usize, i64)>>;

#[derive(Clone, Debug, Serialize)]
pub struct Isotypic {
    pub label: &'static str,
    pub two_c: i64,
    pub q: i64,
    pub eigenvalue: i64,
    pub modules: Vec<ModuleName>,
}

/// Pair coordinates, the symmetry operators and the invariant operator D.
#[derive(Debug)]
pub struct CurvSpace {
    pub n: usize,
    pub d: usize,
    pub np: usize,
    pub pairs: Vec<(usize, usize)>,
    /// index[i*d+j] = (pair, sign) for i ≠ j.
    index: Vec<Option<(usize, i64)>>,
    gens: Vec<(Sparse, i64)>,
    rho_i: Sparse,
    pub kappa: i64,
    pub isotypics: Vec<Isotypic>,
    /// For each pair q, the pair of (I e_k, I e_l) with its sign.
    ipair: Vec<(usize, i64)>,
}

static SPACES: [OnceLock<CurvSpace>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

impl CurvSpace {
    pub fn get(n: usize) -> Result<&'static CurvSpace> {
        let s = UnStructure::get(n)?;
        Ok(SPACES[n - 2].get_or_init(|| CurvSpace::build(s)))
    }

    fn build(s: &UnStructure) -> CurvSpace {
        let (n, d) = (s.n, s.d);
        let mut pairs = Vec::new();
        let mut index = vec![None; d * d];
        for i in 0..d {
            for j in i + 1..d {
                index[i * d + j] = Some((pairs.len(), 1));
                index[j * d + i] = Some((pairs.len(), -1));
                pairs.push((i, j));
            }
        }
        let np = pairs.len();
        // ρ(X) on 2-forms: (ρa)(e_k,e_l) = −a(Xe_k, e_l) − a(e_k, Xe_l).
        let rho = |x: &dyn Fn(usize, usize) -> i64| -> Sparse {
            let mut rows = vec![Vec::new(); np];
            for (r, &(k, l)) in pairs.iter().enumerate() {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for m in 0..d {
                    let c = x(m, k);
                    if c != 0 && m != l {
                        let (p, sg) = index[m * d + l].unwrap();
                        *acc.entry(p).or_default() -= c * sg;
                    }
                    let c = x(m, l);
                    if c != 0 && m != k {
                        let (p, sg) = index[k * d + m].unwrap();
                        *acc.entry(p).or_default() -= c * sg;
                    }
                }
                rows[r] = acc.into_iter().filter(|&(_, v)| v != 0).collect();
            }
            rows
        };
        let mut gens = Vec::new();
        for k in 0..n {
            let f = move |a: usize, b: usize| -> i64 {
                if a == 2 * k + 1 && b == 2 * k {
                    1
                } else if a == 2 * k && b == 2 * k + 1 {
                    -1
                } else {
                    0
                }
            };
            gens.push((rho(&f), 2));
        }
        for k in 0..n {
            for l in k + 1..n {
                // A: e_{2k} → e_{2l}, e_{2k+1} → e_{2l+1}, minus transpose.
                let a = move |x: usize, y: usize| -> i64 {
                    let fwd = (x == 2 * l && y == 2 * k) || (x == 2 * l + 1 && y == 2 * k + 1);
                    let bwd = (y == 2 * l && x == 2 * k) || (y == 2 * l + 1 && x == 2 * k + 1);
                    fwd as i64 - bwd as i64
                };
                // B: e_{2k} → e_{2l+1}, e_{2k+1} → −e_{2l}, minus transpose.
                let b = move |x: usize, y: usize| -> i64 {
                    let m = |x: usize, y: usize| -> i64 {
                        if x == 2 * l + 1 && y == 2 * k {
                            1
                        } else if x == 2 * l && y == 2 * k + 1 {
                            -1
                        } else {
                            0
                        }
                    };
                    m(x, y) - m(y, x)
                };
                gens.push((rho(&a), 1));
                gens.push((rho(&b), 1));
            }
        }
        let rho_i = rho(&|a, b| s.i_mat(a, b));
        let ipair = pairs
            .iter()
            .map(|&(k, l)| {
                let (ik, sk) = s.i_apply(k);
                let (il, sl) = s.i_apply(l);
                let (p, sg) = index[ik * d + il].expect("I preserves distinctness");
                (p, sk * sl * sg)
            })
            .collect();

        let present: Vec<(&'static str, ModuleName, Vec<ModuleName>)> = vec![
            ("trivial", ModuleName::K1, vec![ModuleName::K1, ModuleName::Km1]),
            ("lambda11", ModuleName::K2, if n >= 3 { vec![ModuleName::K2, ModuleName::Km2] } else { vec![ModuleName::K2] }),
            ("C3", ModuleName::C3, vec![ModuleName::C3]),
            ("C4", ModuleName::C4, vec![ModuleName::C4]),
            ("C5", ModuleName::C5, vec![ModuleName::C5]),
            ("C6", ModuleName::C6, vec![ModuleName::C6]),
            ("C7", ModuleName::C7, vec![ModuleName::C7]),
            ("C8", ModuleName::C8, vec![ModuleName::C8]),
        ]
        .into_iter()
        .filter(|(_, m, _)| m.valid_at(n))
        .collect();
        let raw: Vec<(i64, i64)> = present
            .iter()
            .map(|(_, m, _)| {
                let (w, _) = m.weight(n).unwrap();
                let s: i64 = w.iter().sum();
                (2 * casimir_value(&w), s * s)
            })
            .collect();
        let kappa = (1..)
            .find(|&k| {
                let mut ev: Vec<i64> = raw.iter().map(|(c, q)| c + k * q).collect();
                ev.sort();
                ev.windows(2).all(|w| w[0] != w[1])
            })
            .unwrap();
        let isotypics = present
            .into_iter()
            .zip(raw)
            .map(|((label, _, modules), (two_c, q))| Isotypic { label, two_c, q, eigenvalue: two_c + kappa * q, modules })
            .collect();
        CurvSpace { n, d, np, pairs, index, gens, rho_i, kappa, isotypics, ipair }
    }

    pub fn len(&self) -> usize {
        self.np * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.np == 0
    }

    pub fn dim_sym(&self) -> usize {
        self.np * (self.np + 1) / 2
    }

    /// R(e_i,e_j,e_k,e_l) read from pair coordinates.
    #[inline]
    pub fn entry<T: Ring>(&self, v: &[T], i: usize, j: usize, k: usize, l: usize) -> T {
        let d = self.d;
        match (self.index[i * d + j], self.index[k * d + l]) {
            (Some((p, s)), Some((q, t))) => {
                let x = v[p * self.np + q].clone();
                if s * t > 0 {
                    x
                } else {
                    -x
                }
            }
            _ => T::zero(),
        }
    }

    pub fn from_tensor<T: Ring>(&self, t: &Tensor<T>) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &(i, j) in &self.pairs {
            for &(k, l) in &self.pairs {
                out.push(t.get(&[i, j, k, l]).clone());
            }
        }
        out
    }

    pub fn to_tensor<T: Ring>(&self, v: &[T]) -> Tensor<T> {
        Tensor::from_fn(self.d, 4, |i| self.entry(v, i[0], i[1], i[2], i[3]))
    }

    /// M + Mᵀ (twice the pair-symmetrization).
    pub fn sym2<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let np = self.np;
        (0..np * np).map(|pq| v[pq].clone() + v[(pq % np) * np + pq / np].clone()).collect()
    }

    /// 3·b(R) = R(x,y,z,w) + R(y,z,x,w) + R(z,x,y,w).
    pub fn bianchi3<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &(x, y) in &self.pairs {
            for &(z, w) in &self.pairs {
                out.push(self.entry(v, x, y, z, w) + self.entry(v, y, z, x, w) + self.entry(v, z, x, y, w));
            }
        }
        out
    }

    /// 3·P_𝓡 on S²Λ²: 3R − 3b(R). The input must be pair-symmetric.
    pub fn pr3<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let b = self.bianchi3(v);
        v.iter().zip(b).map(|(a, b)| a.mul_i64(3) - b).collect()
    }

    /// 2·π₁: R(x,y,z,w) − R(x,y,Iz,Iw), the u(n)^⊥-part of the second pair.
    pub fn pi1_2<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let np = self.np;
        let mut out = Vec::with_capacity(self.len());
        for p in 0..np {
            for q in 0..np {
                let (iq, s) = self.ipair[q];
                let w = v[p * np + iq].clone();
                out.push(v[p * np + q].clone() - if s > 0 { w } else { -w });
            }
        }
        out
    }

    fn k_apply<T: Ring>(&self, r: &Sparse, v: &[T]) -> Vec<T> {
        let np = self.np;
        let mut out = vec![T::zero(); np * np];
        for (p, row) in r.iter().enumerate() {
            for &(s, c) in row {
                let src = &v[s * np..(s + 1) * np];
                let dst = &mut out[p * np..(p + 1) * np];
                for (o, x) in dst.iter_mut().zip(src) {
                    if !x.is_zero() {
                        o.add_assign_ref(&x.mul_i64(c));
                    }
                }
            }
        }
        for (q, row) in r.iter().enumerate() {
            for &(s, c) in row {
                for p in 0..np {
                    let x = &v[p * np + s];
                    if !x.is_zero() {
                        out[p * np + q].add_assign_ref(&x.mul_i64(c));
                    }
                }
            }
        }
        out
    }

    /// D v = −Σ w ρ(X)²v − κ ρ(I)²v on Λ²⊗Λ².
    pub fn apply_d<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        let mut add = |t: Vec<T>, w: i64| {
            for (o, x) in out.iter_mut().zip(t) {
                if !x.is_zero() {
                    o.add_assign_ref(&x.mul_i64(-w));
                }
            }
        };
        for (r, w) in &self.gens {
            let t = self.k_apply(r, &self.k_apply(r, v));
            add(t, *w);
        }
        let t = self.k_apply(&self.rho_i, &self.k_apply(&self.rho_i, v));
        add(t, self.kappa);
        out
    }

    /// Exact ∏_{j≠k}(D − d_j)v / ∏_{j≠k}(d_k − d_j): the orthogonal
    /// projection onto the k-th isotypic component for v ∈ 𝓡.
    pub fn lagrange_exact(&self, v: &[Rational], k: usize) -> Vec<Rational> {
        let mut cur = v.to_vec();
        for (j, iso) in self.isotypics.iter().enumerate() {
            if j == k || cur.iter().all(|x| x.is_zero()) {
                continue;
            }
            let dv = self.apply_d(&cur);
            cur = dv.into_iter().zip(&cur).map(|(a, b)| a - b.mul_i64(iso.eigenvalue)).collect();
        }
        let c = Rational::from_integer(self.lagrange_scalar(k));
        cur.into_iter().map(|x| x / c.clone()).collect()
    }

    pub fn iso_index(&self, m: ModuleName) -> Result<usize> {
        self.isotypics
            .iter()
            .position(|i| i.modules.contains(&m))
            .ok_or(Error::InvalidClass { label: m.label().into(), n: self.n })
    }

    /// ∏_{j≠k}(D − d_j)v, content-reduced after every factor when `reduce`.
    pub fn lagrange(&self, v: &[Int], k: usize, reduce: bool) -> Vec<Int> {
        let mut cur = v.to_vec();
        for (j, iso) in self.isotypics.iter().enumerate() {
            if j == k {
                continue;
            }
            if cur.iter().all(|x| x.0 == 0) {
                return cur;
            }
            let dv = self.apply_d(&cur);
            let e = Int(iso.eigenvalue as i128);
            cur = dv.into_iter().zip(&cur).map(|(a, b)| a - e * *b).collect();
            if reduce {
                reduce_content(&mut cur);
            }
        }
        cur
    }

    /// ∏_{j≠k}(d_k − d_j), the scalar by which [`Self::lagrange`] acts on
    /// the k-th isotypic component of 𝓡.
    pub fn lagrange_scalar(&self, k: usize) -> BigInt {
        let dk = self.isotypics[k].eigenvalue;
        self.isotypics
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .fold(BigInt::from(1), |acc, (_, i)| acc * BigInt::from(dk - i.eigenvalue))
    }

    /// Integer multiple of the orthogonal projection of x ∈ Λ²⊗Λ² onto the
    /// k-th isotypic component of 𝓡 (x ↦ L_k 3P_𝓡 (x + xᵀ)).
    pub fn isotypic_image(&self, x: &[Int], k: usize, reduce: bool) -> Vec<Int> {
        self.lagrange(&self.pr3(&self.sym2(x)), k, reduce)
    }

    /// Exact orthogonal projection of x ∈ Λ²⊗Λ² onto the k-th isotypic
    /// component of 𝓡.
    pub fn isotypic_project(&self, x: &[Rational], k: usize) -> Vec<Rational> {
        if let Some(p) = self.isotypic_project_int(x, k) {
            return p;
        }
        let six = Rational::from_i64(6);
        let y: Vec<Rational> = self.pr3(&self.sym2(x)).into_iter().map(|v| v / six.clone()).collect();
        self.lagrange_exact(&y, k)
    }

    /// Fast path for [`Self::isotypic_project`]: the content-reduced integer
    /// image w is parallel to the projection P x, and ⟨Px, x⟩ = ⟨Px, Px⟩
    /// fixes the scale. `None` when the cleared entries are too large for
    /// the i128 pipeline.
    fn isotypic_project_int(&self, x: &[Rational], k: usize) -> Option<Vec<Rational>> {
        let mut l = BigInt::from(1);
        for v in x {
            l = num::integer::lcm(l, v.denom().clone());
        }
        let lr = Rational::from_integer(l);
        let mut xi = Vec::with_capacity(x.len());
        for v in x {
            let c = (v * lr.clone()).to_integer();
            if c.bits() > 40 {
                return None;
            }
            xi.push(crate::scalar::bigint_to_int(&c));
        }
        let w = self.isotypic_image(&xi, k, true);
        if w.iter().all(|v| v.0 == 0) {
            return Some(vec![Rational::zero(); x.len()]);
        }
        let ww: BigInt = w.iter().map(|a| a.to_bigint() * a.to_bigint()).sum();
        let wx: BigInt = w.iter().zip(&xi).map(|(a, b)| a.to_bigint() * b.to_bigint()).sum();
        let c = Rational::new(wx, ww) / lr;
        Some(w.iter().map(|a| a.to_rational() * c.clone()).collect())
    }

    /// χ(a,b) = 6 a⊙b − a∧b = 6 P_𝓡(a⊙b), in pair coordinates.
    pub fn chi<T: Ring>(&self, a: &Tensor<T>, b: &Tensor<T>) -> Vec<T> {
        let ap: Vec<T> = self.pairs.iter().map(|&(i, j)| a.get(&[i, j]).clone()).collect();
        let bp: Vec<T> = self.pairs.iter().map(|&(i, j)| b.get(&[i, j]).clone()).collect();
        let mut m = Vec::with_capacity(self.len());
        for p in 0..self.np {
            for q in 0..self.np {
                m.push(ap[p].clone() * bp[q].clone());
            }
        }
        self.pr3(&self.sym2(&m))
    }

    /// Ric(X,Y) = Σ_i R(X,e_i,Y,e_i).
    pub fn ricci<T: Ring>(&self, v: &[T]) -> Tensor<T> {
        Tensor::from_fn(self.d, 2, |xy| {
            let mut acc = T::zero();
            for i in 0..self.d {
                acc.add_assign_ref(&self.entry(v, xy[0], i, xy[1], i));
            }
            acc
        })
    }

    /// Ric*(X,Y) = Σ_i R(X,e_i,IY,Ie_i).
    pub fn ric_star<T: Ring>(&self, v: &[T]) -> Tensor<T> {
        let s = UnStructure::get(self.n).expect("valid n");
        Tensor::from_fn(self.d, 2, |xy| {
            let (iy, sy) = s.i_apply(xy[1]);
            let mut acc = T::zero();
            for i in 0..self.d {
                let (ii, si) = s.i_apply(i);
                let v = self.entry(v, xy[0], i, iy, ii);
                acc.add_assign_ref(&if sy * si > 0 { v } else { -v });
            }
            acc
        })
    }

    /// Dimension of 𝓡 as dim S²Λ² minus the rank of the Bianchi (wedge) map.
    pub fn wedge_rank(&self) -> usize {
        let np = self.np;
        let mut ech = ModEchelon::new(np * np);
        for p in 0..np {
            for q in p..np {
                let mut e = vec![Int(0); np * np];
                e[p * np + q] = Int(1);
                e[q * np + p] = Int(1);
                ech.insert_int(&self.bianchi3(&e));
            }
        }
        ech.rank()
    }
}

/// Multiply a rational vector by the lcm of its denominators.
pub fn clear_denominators(x: &[Rational]) -> (Vec<Int>, BigInt) {
    let mut l = BigInt::from(1);
    for v in x {
        l = num::integer::lcm(l, v.denom().clone());
    }
    let ints = x.iter().map(|v| crate::scalar::bigint_to_int(&(v * Rational::from_integer(l.clone())).to_integer())).collect();
    (ints, l)
}

/// Algebraic curvature tensor: pair-symmetric, skew in each pair and
/// satisfying the first Bianchi identity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub n: usize,
    pub r: Tensor<Rational>,
}

impl CurvatureTensor {
    pub fn new(n: usize, r: Tensor<Rational>) -> Result<CurvatureTensor> {
        let cs = CurvSpace::get(n)?;
        if r.rank() != 4 || r.dim() != cs.d {
            return Err(Error::Shape("curvature tensors are rank 4".into()));
        }
        let v = cs.from_tensor(&r);
        if cs.to_tensor(&v) != r.clone().with_symmetry(Symmetry::None) {
            return Err(Error::Domain("not skew in each pair".into()));
        }
        let sym = cs.sym2(&v);
        if sym.iter().zip(&v).any(|(a, b)| a != &b.mul_i64(2)) {
            return Err(Error::Domain("not symmetric under pair exchange".into()));
        }
        if cs.bianchi3(&v).iter().any(|x| !x.is_zero()) {
            return Err(Error::Bianchi);
        }
        Ok(CurvatureTensor { n, r: r.with_symmetry(Symmetry::SymmetricPair) })
    }

    /// The constant-curvature tensor ⟨X,Z⟩⟨Y,W⟩ − ⟨X,W⟩⟨Y,Z⟩.
    pub fn constant(n: usize) -> Result<CurvatureTensor> {
        let d = 2 * n;
        let r = Tensor::from_fn(d, 4, |i| {
            Rational::from_i64(((i[0] == i[2] && i[1] == i[3]) as i64) - ((i[0] == i[3] && i[1] == i[2]) as i64))
        });
        CurvatureTensor::new(n, r)
    }

    pub fn coords(&self) -> Vec<Rational> {
        CurvSpace::get(self.n).expect("valid n").from_tensor(&self.r)
    }
}

pub fn ricci(r: &CurvatureTensor) -> Result<Tensor<Rational>> {
    let cs = CurvSpace::get(r.n)?;
    Ok(cs.ricci(&r.coords()))
}

pub fn ric_star(r: &CurvatureTensor) -> Result<Tensor<Rational>> {
    let cs = CurvSpace::get(r.n)?;
    Ok(cs.ric_star(&r.coords()))
}

/// Deterministic random element of 𝓡: P_𝓡 of a random pair-symmetric
/// integer tensor with entries in [−3, 3].
pub fn random_curvature(n: usize, seed: u64) -> Result<CurvatureTensor> {
    let cs = CurvSpace::get(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Int> = (0..cs.len()).map(|_| Int(rng.gen_range(-3..=3))).collect();
    let v = cs.pr3(&cs.sym2(&raw));
    let r: Vec<Rational> = v.iter().map(|x| x.to_rational() / Rational::from_i64(6)).collect();
    CurvatureTensor::new(n, cs.to_tensor(&r))
}

#[derive(Clone, Debug)]
enum Kind {
    /// The whole isotypic component k (multiplicity one).
    Isotypic(usize),
    /// The copy inside 𝓚 of a multiplicity-two isotypic component.
    Kahler(usize),
    /// The copy in 𝓚^⊥, the image of P_k π₁.
    Perp(usize),
    /// A line spanned by one vector (low-dimensional refinements).
    Line(Subspace),
}

/// A named irreducible (or refined) component. Projections are exact and
/// use the spectral operator D, so no Gram matrix of the module is needed.
#[derive(Clone, Debug)]
pub struct ModuleProjector {
    pub name: ModuleName,
    pub n: usize,
    pub rank: usize,
    pub predicted: usize,
    /// Schur scalar s with P π₁ = s·id on the module (0 inside 𝓚).
    pub schur: Rational,
    basis: Vec<Vec<Int>>,
    kind: Kind,
    /// (12·c_k·s, s) of the 𝓚^⊥ copy, for multiplicity-two components.
    split: Option<(Rational, Rational)>,
}

impl ModuleProjector {
    /// Integer basis (exact, D-eigenvectors).
    pub fn basis(&self) -> &[Vec<Int>] {
        &self.basis
    }

    fn cs(&self) -> &'static CurvSpace {
        CurvSpace::get(self.n).expect("valid n")
    }

    fn perp_of(&self, k: usize, w: &[Rational]) -> Vec<Rational> {
        let cs = self.cs();
        let half = Rational::new(1.into(), 2.into());
        let p1: Vec<Rational> = cs.pi1_2(w).into_iter().map(|x| x * half.clone()).collect();
        let s = &self.split.as_ref().expect("split component").1;
        let inv = Rational::one() / s.clone();
        cs.isotypic_project(&p1, k).into_iter().map(|x| x * inv.clone()).collect()
    }

    /// Exact orthogonal projection of a pair-coordinate vector.
    pub fn project(&self, v: &[Rational]) -> Vec<Rational> {
        let cs = self.cs();
        match &self.kind {
            Kind::Isotypic(k) => cs.isotypic_project(v, *k),
            Kind::Perp(k) => {
                let w = cs.isotypic_project(v, *k);
                self.perp_of(*k, &w)
            }
            Kind::Kahler(k) => {
                let w = cs.isotypic_project(v, *k);
                let p = self.perp_of(*k, &w);
                w.into_iter().zip(p).map(|(a, b)| a - b).collect()
            }
            Kind::Line(sp) => sp.project(v),
        }
    }

    /// A nonzero integer multiple of the projection (content-reduced), for
    /// rank computations where the scale is irrelevant.
    pub fn image(&self, v: &[Int]) -> Vec<Int> {
        let cs = self.cs();
        match &self.kind {
            Kind::Isotypic(k) => cs.isotypic_image(v, *k, true),
            Kind::Perp(k) => {
                let w = cs.isotypic_image(v, *k, true);
                cs.isotypic_image(&cs.pi1_2(&w), *k, true)
            }
            Kind::Kahler(k) => {
                let w = cs.isotypic_image(v, *k, true);
                let y = cs.isotypic_image(&cs.pi1_2(&w), *k, false);
                let scale = self.split.as_ref().expect("split component").0.clone();
                let r: Vec<Rational> =
                    w.iter().zip(&y).map(|(a, b)| a.to_rational() - b.to_rational() / scale.clone()).collect();
                primitive(&r)
            }
            Kind::Line(sp) => primitive(&sp.project(&linalg::to_rational_vec(v))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasEntry {
    pub name: String,
    pub weight: Option<Vec<i64>>,
    pub weyl_dim: usize,
    pub rank: usize,
    pub agree: bool,
    pub casimir: Option<i64>,
    pub central: Option<i64>,
    pub eigenvalue: Option<i64>,
    pub schur: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Atlas {
    pub n: usize,
    pub convention: String,
    pub dim_s2l2: usize,
    pub dim_l4: usize,
    pub dim_r: usize,
    pub kappa: i64,
    pub certified: bool,
    pub absent: Vec<String>,
    pub modules: Vec<AtlasEntry>,
    pub refinements: Vec<AtlasEntry>,
}

/// Exact bases for every curvature module at a given n.
#[derive(Debug)]
pub struct ModuleAtlas {
    pub n: usize,
    pub dim_r: usize,
    pub dim_l4: usize,
    /// Every basis vector was checked to be a D-eigenvector and the ranks
    /// add up to dim 𝓡.
    pub certified: bool,
    pub modules: BTreeMap<ModuleName, ModuleProjector>,
}

static ATLASES: [OnceLock<ModuleAtlas>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

impl ModuleAtlas {
    pub fn get(n: usize) -> Result<&'static ModuleAtlas> {
        let cs = CurvSpace::get(n)?;
        Ok(ATLASES[n - 2].get_or_init(|| ModuleAtlas::build(cs, Exec::default())))
    }

    pub fn build(cs: &CurvSpace, exec: Exec) -> ModuleAtlas {
        let n = cs.n;
        let dim_l4 = cs.wedge_rank();
        let dim_r = cs.dim_sym() - dim_l4;
        let width = cs.len();
        let seed_vec = |k: usize, i: usize| -> Vec<Int> {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + (k as u64) * 100_003 + i as u64);
            let raw: Vec<Int> = (0..width).map(|_| Int(rng.gen_range(-2..=2))).collect();
            let mut v = cs.pr3(&cs.sym2(&raw));
            reduce_content(&mut v);
            v
        };
        let found: Vec<(Vec<Vec<Int>>, bool)> = cs
            .isotypics
            .iter()
            .enumerate()
            .map(|(k, iso)| {
                let hint: usize = iso.modules.iter().map(|m| m.predicted_dim(n)).sum();
                let mut ech = ModEchelon::new(width);
                let mut basis: Vec<Vec<Int>> = Vec::new();
                let mut next = 0usize;
                let mut misses = 0usize;
                while basis.len() < hint && misses < 4 {
                    let batch = (hint - basis.len()).max(1);
                    let imgs: Vec<Vec<Int>> = exec.map_range(batch, |i| cs.lagrange(&seed_vec(k, next + i), k, true));
                    next += batch;
                    let before = basis.len();
                    for v in imgs {
                        if ech.insert_int(&v) {
                            basis.push(v);
                        }
                    }
                    if basis.len() == before {
                        misses += 1;
                    }
                }
                let e = Int(iso.eigenvalue as i128);
                let ok = exec
                    .map(&basis, |b| cs.apply_d(b).iter().zip(b).all(|(x, y)| *x == e * *y))
                    .into_iter()
                    .all(|x| x);
                (basis, ok)
            })
            .collect();
        let total: usize = found.iter().map(|(b, _)| b.len()).sum();
        let certified = total == dim_r && found.iter().all(|(_, ok)| *ok);
        let mut modules = BTreeMap::new();
        for (k, (basis, _)) in found.into_iter().enumerate() {
            let iso = &cs.isotypics[k];
            if iso.modules.len() == 1 {
                let name = iso.modules[0];
                let schur = schur_scalar(cs, &basis);
                modules.insert(
                    name,
                    ModuleProjector {
                        name,
                        n,
                        rank: basis.len(),
                        predicted: name.predicted_dim(n),
                        schur,
                        basis,
                        kind: Kind::Isotypic(k),
                        split: None,
                    },
                );
                continue;
            }
            // T = P_iso π₁ is 0 on the 𝓚-copy and s·id on the other copy;
            // isotypic_image(2π₁ b) = 12·c_k·T b.
            let imgs: Vec<Vec<Int>> = exec.map(&basis, |b| cs.isotypic_image(&cs.pi1_2(b), k, false));
            let (kb, pb, scale) = split_by_schur(cs, k, &basis, &imgs);
            let pschur = schur_scalar(cs, &pb);
            let split = scale.map(|c| (c, pschur.clone()));
            for (name, b, kind, schur) in [
                (iso.modules[0], kb, Kind::Kahler(k), Rational::zero()),
                (iso.modules[1], pb, Kind::Perp(k), pschur.clone()),
            ] {
                let m = ModuleProjector {
                    name,
                    n,
                    rank: b.len(),
                    predicted: name.predicted_dim(n),
                    schur,
                    basis: b,
                    kind,
                    split: split.clone(),
                };
                modules.insert(name, m);
            }
        }
        let mut atlas = ModuleAtlas { n, dim_r, dim_l4, certified, modules };
        if n == 2 {
            atlas.add_refinements(cs);
        }
        atlas
    }

    fn add_refinements(&mut self, cs: &CurvSpace) {
        let s = UnStructure::get(2).expect("n = 2");
        let weights = vec![Int(1); cs.len()];
        let lines: [(ModuleName, ModuleName, &Tensor<Int>, &Tensor<Int>); 5] = [
            (ModuleName::C5pp, ModuleName::C5, &s.psi_plus, &s.psi_plus),
            (ModuleName::C5mm, ModuleName::C5, &s.psi_minus, &s.psi_minus),
            (ModuleName::C5pm, ModuleName::C5, &s.psi_plus, &s.psi_minus),
            (ModuleName::C6p, ModuleName::C6, &s.psi_plus, &s.omega),
            (ModuleName::C6m, ModuleName::C6, &s.psi_minus, &s.omega),
        ];
        for (name, parent, a, b) in lines {
            let v = self.modules[&parent].image(&cs.chi(a, b));
            let schur = schur_scalar(cs, std::slice::from_ref(&v));
            let space = Subspace::from_span(std::slice::from_ref(&v), weights.clone());
            self.modules.insert(
                name,
                ModuleProjector {
                    name,
                    n: 2,
                    rank: space.dim(),
                    predicted: 1,
                    schur,
                    basis: space.basis.clone(),
                    kind: Kind::Line(space),
                    split: None,
                },
            );
        }
    }

    pub fn module(&self, m: ModuleName) -> Result<&ModuleProjector> {
        self.modules.get(&m).ok_or(Error::InvalidClass { label: m.label().into(), n: self.n })
    }

    /// Main (non-refined) modules present at this n.
    pub fn main_modules(&self) -> Vec<&ModuleProjector> {
        ModuleName::MAIN.iter().filter_map(|m| self.modules.get(m)).collect()
    }

    /// Orthogonal projection of R onto a module.
    pub fn project_module(&self, r: &CurvatureTensor, m: ModuleName) -> Result<CurvatureTensor> {
        let cs = CurvSpace::get(self.n)?;
        let p = self.module(m)?.project(&r.coords());
        CurvatureTensor::new(self.n, cs.to_tensor(&p))
    }

    /// Orthogonal projection 𝓡 → 𝓚.
    pub fn project_kahler(&self, v: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); v.len()];
        for m in self.main_modules().into_iter().filter(|m| m.name.in_kahler()) {
            for (o, x) in out.iter_mut().zip(m.project(v)) {
                *o += x;
            }
        }
        out
    }

    /// π₂: the equivariant pseudo-inverse of π₁ restricted to 𝓚^⊥,
    /// Σ_k s_k⁻¹ P_k x over the 𝓚^⊥ modules.
    pub fn pi2(&self, x: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); x.len()];
        for m in self.main_modules().into_iter().filter(|m| !m.name.in_kahler()) {
            let inv = Rational::one() / m.schur.clone();
            for (o, y) in out.iter_mut().zip(m.project(x)) {
                *o += y * inv.clone();
            }
        }
        out
    }

    pub fn atlas(&self) -> Atlas {
        let cs = CurvSpace::get(self.n).expect("valid n");
        let entry = |m: &ModuleProjector| {
            let iso = cs.iso_index(m.name).ok().map(|k| &cs.isotypics[k]);
            AtlasEntry {
                name: m.name.label().to_string(),
                weight: m.name.weight(self.n).map(|w| w.0),
                weyl_dim: m.predicted,
                rank: m.rank,
                agree: m.predicted == m.rank,
                casimir: iso.map(|i| i.two_c),
                central: iso.map(|i| i.q),
                eigenvalue: iso.map(|i| i.eigenvalue),
                schur: crate::scalar::format_rational(&m.schur),
            }
        };
        Atlas {
            n: self.n,
            convention: crate::CONVENTION.to_string(),
            dim_s2l2: cs.dim_sym(),
            dim_l4: self.dim_l4,
            dim_r: self.dim_r,
            kappa: cs.kappa,
            certified: self.certified,
            absent: ModuleName::MAIN.iter().filter(|m| !m.valid_at(self.n)).map(|m| m.label().to_string()).collect(),
            modules: self.main_modules().into_iter().map(entry).collect(),
            refinements: ModuleName::REFINED.iter().filter_map(|m| self.modules.get(m)).map(entry).collect(),
        }
    }
}

/// Split an isotypic basis into its 𝓚-copy and 𝓚^⊥-copy given
/// y_i = 12·c_k·(P π₁ b_i). The y_i span the 𝓚^⊥-copy; b_i − y_i/(12 c_k s)
/// span the 𝓚-copy. Also returns 12·c_k·s.
fn split_by_schur(
    cs: &CurvSpace,
    k: usize,
    basis: &[Vec<Int>],
    imgs: &[Vec<Int>],
) -> (Vec<Vec<Int>>, Vec<Vec<Int>>, Option<Rational>) {
    let width = cs.len();
    let perp: Vec<Vec<Int>> = linalg::select_independent(imgs, None)
        .into_iter()
        .map(|i| {
            let mut v = imgs[i].clone();
            reduce_content(&mut v);
            v
        })
        .collect();
    let Some(y) = perp.first() else { return (basis.to_vec(), Vec::new(), None) };
    let y2 = cs.isotypic_image(&cs.pi1_2(y), k, false);
    let p = y.iter().position(|x| x.0 != 0).expect("nonzero");
    let scale = Rational::new(y2[p].to_bigint(), y[p].to_bigint());
    let mut ech = ModEchelon::new(width);
    let mut kahler = Vec::new();
    for (b, img) in basis.iter().zip(imgs) {
        let v: Vec<Rational> = b.iter().zip(img).map(|(x, z)| x.to_rational() - z.to_rational() / scale.clone()).collect();
        let v = primitive(&v);
        if ech.insert_int(&v) {
            kahler.push(v);
        }
    }
    (kahler, perp, Some(scale))
}

/// s with P_k π₁ = s·id on the module: ⟨π₁v, v⟩/⟨v, v⟩ for any nonzero v.
fn schur_scalar(cs: &CurvSpace, basis: &[Vec<Int>]) -> Rational {
    let Some(v) = basis.first() else { return Rational::zero() };
    let p = cs.pi1_2(v);
    let num: BigInt = p.iter().zip(v).map(|(a, b)| a.to_bigint() * b.to_bigint()).sum();
    let den: BigInt = v.iter().map(|b| b.to_bigint() * b.to_bigint()).sum();
    Rational::new(num, den * BigInt::from(2))
}

/// One eigenvalue of an invariant operator on a subspace, with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CasimirComponent {
    pub eigenvalue: i64,
    pub dim: usize,
}

/// Eigenspace decomposition of an integer-valued, diagonalizable invariant
/// operator `apply` on the span of `basis`. Returns an error if the span is
/// not invariant. Eigenvalues are searched among 0..=`max_eigen`; the split
/// is accepted only when the multiplicities add up to the dimension.
pub fn casimir_split(
    basis: &[Vec<Int>],
    apply: impl Fn(&[Int]) -> Vec<Int>,
    max_eigen: i64,
) -> Result<Vec<CasimirComponent>> {
    let idx = linalg::select_independent(basis, None);
    let b: Vec<Vec<Int>> = idx.iter().map(|&i| basis[i].clone()).collect();
    let k = b.len();
    if k == 0 {
        return Ok(Vec::new());
    }
    let images: Vec<Vec<Int>> = b.iter().map(|v| apply(v)).collect();
    // Invariance: rank(b ∪ Db) must stay k, checked exactly.
    let mut all: Vec<Vec<Rational>> = b.iter().map(|v| linalg::to_rational_vec(v)).collect();
    all.extend(images.iter().map(|v| linalg::to_rational_vec(v)));
    if linalg::rank_rational(&all) != k {
        return Err(Error::Domain("subspace is not invariant (commutator residual nonzero)".into()));
    }
    // Restricted matrix A with D b_i = Σ_j A_ij b_j, solved exactly.
    let width = b[0].len();
    let mut sys: Vec<Vec<Rational>> = (0..width)
        .map(|r| {
            let mut row: Vec<Rational> = b.iter().map(|v| v[r].to_rational()).collect();
            row.extend(images.iter().map(|v| v[r].to_rational()));
            row
        })
        .collect();
    let piv = linalg::rref(&mut sys);
    debug_assert_eq!(piv.len(), k);
    // After rref the first k rows hold [I | Aᵀ].
    let a: Vec<Vec<Rational>> = (0..k).map(|i| (0..k).map(|j| sys[j][k + i].clone()).collect()).collect();
    let mut out = Vec::new();
    let mut total = 0usize;
    for lam in 0..=max_eigen {
        let m: Vec<Vec<Rational>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| if i == j { a[i][j].clone() - Rational::from_i64(lam) } else { a[i][j].clone() })
                    .collect()
            })
            .collect();
        let nullity = k - linalg::rank_rational(&m);
        if nullity > 0 {
            out.push(CasimirComponent { eigenvalue: lam, dim: nullity });
            total += nullity;
            if total == k {
                break;
            }
        }
    }
    if total != k {
        return Err(Error::Domain("eigenvalues outside the search range or operator not diagonalizable".into()));
    }
    Ok(out)
}

/// Casimir −Σ w ρ(X)² of u(n) on covariant tensors of any rank, with the
/// same generators as [`CurvSpace`].
pub fn tensor_casimir<T: Ring>(n: usize, t: &Tensor<T>) -> Result<Tensor<T>> {
    let s = UnStructure::get(n)?;
    let d = s.d;
    let mut out = Tensor::zeros(d, t.rank());
    for (m, w) in un_generators(n) {
        let mm: Vec<T> = m.iter().map(|&x| T::from_i64(x)).collect();
        // endo_matrix_action expects m[y*d+z] = ⟨A e_y, e_z⟩ = A[z][y].
        let mt: Vec<T> = (0..d * d).map(|yz| mm[(yz % d) * d + yz / d].clone()).collect();
        let once = crate::torsion::endo_matrix_action(&mt, d, t)?;
        let twice = crate::torsion::endo_matrix_action(&mt, d, &once)?;
        out = out.sub(&twice.scale(&T::from_i64(w)))?;
    }
    Ok(out)
}

/// Weighted generators of u(n) as d×d matrices (row-major, A[x][y] = ⟨e_x, A e_y⟩).
pub fn un_generators(n: usize) -> Vec<(Vec<i64>, i64)> {
    let d = 2 * n;
    let mut out = Vec::new();
    for k in 0..n {
        let mut m = vec![0i64; d * d];
        m[(2 * k + 1) * d + 2 * k] = 1;
        m[2 * k * d + 2 * k + 1] = -1;
        out.push((m, 2));
    }
    for k in 0..n {
        for l in k + 1..n {
            let mut a = vec![0i64; d * d];
            a[2 * l * d + 2 * k] = 1;
            a[(2 * l + 1) * d + 2 * k + 1] = 1;
            a[2 * k * d + 2 * l] = -1;
            a[(2 * k + 1) * d + 2 * l + 1] = -1;
            let mut b = vec![0i64; d * d];
            b[(2 * l + 1) * d + 2 * k] = 1;
            b[2 * l * d + 2 * k + 1] = -1;
            b[2 * k * d + 2 * l + 1] = -1;
            b[(2 * k + 1) * d + 2 * l] = 1;
            out.push((a, 1));
            out.push((b, 1));
        }
    }
    out
}

/// Primitive integer direction of a rational vector.
pub fn primitive(v: &[Rational]) -> Vec<Int> {
    primitive_from_rationals(v).iter().map(crate::scalar::bigint_to_int).collect()
}

#[allow(dead_code)]
fn _assert_field<T: Field>() {}
