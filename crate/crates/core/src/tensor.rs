//! Dense multilinear arrays over R^{2n} in an orthonormal basis.
//!
//! Components are stored row-major: the last index varies fastest. All
//! traces are metric traces in the orthonormal basis, so no index raising is
//! ever needed.

use crate::error::{Error, Result};
use crate::scalar::{Field, Int, Ring};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    Alternating,
    /// Element of S²Λ²: skew in (1,2), skew in (3,4), symmetric under pair swap.
    SymmetricPair,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    rank: usize,
    pub data: Vec<T>,
    pub symmetry: Symmetry,
}

/// Sign of a permutation given as a slice of distinct indices.
pub fn perm_sign(p: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// All permutations of `0..k` in lexicographic order, with signs.
pub fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out.into_iter().map(|p| {
        let s = perm_sign(&p);
        (p, s)
    }).collect()
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

impl<T: Ring> Tensor<T> {
    pub fn zeros(dim: usize, rank: usize) -> Self {
        Tensor { dim, rank, data: vec![T::zero(); dim.pow(rank as u32)], symmetry: Symmetry::None }
    }

    pub fn from_fn(dim: usize, rank: usize, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let len = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for s in (0..rank).rev() {
                idx[s] += 1;
                if idx[s] < dim {
                    break;
                }
                idx[s] = 0;
            }
        }
        Tensor { dim, rank, data, symmetry: Symmetry::None }
    }

    pub fn from_vec(dim: usize, rank: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim.pow(rank as u32) {
            return Err(Error::Shape(format!(
                "expected {} components for rank {} over dimension {}, got {}",
                dim.pow(rank as u32),
                rank,
                dim,
                data.len()
            )));
        }
        Ok(Tensor { dim, rank, data, symmetry: Symmetry::None })
    }

    pub fn scalar(v: T) -> Self {
        Tensor { dim: 0, rank: 0, data: vec![v], symmetry: Symmetry::None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        self.symmetry = s;
        self
    }

    #[inline]
    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    #[inline]
    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    #[inline]
    pub fn set(&mut self, idx: &[usize], v: T) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor { dim: self.dim, rank: self.rank, data: self.data.iter().map(f).collect(), symmetry: self.symmetry }
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.dim != o.dim || self.rank != o.rank {
            return Err(Error::Shape(format!(
                "shape mismatch: rank {} over {} vs rank {} over {}",
                self.rank, self.dim, o.rank, o.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a.clone() - b.clone()))
    }

    fn zip(&self, o: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Tensor {
            dim: self.dim,
            rank: self.rank,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
            symmetry: if self.symmetry == o.symmetry { self.symmetry } else { Symmetry::None },
        }
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|x| x.clone() * k.clone()).with_symmetry(self.symmetry)
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone()).with_symmetry(self.symmetry)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// u(x_0..x_{k-1}) = t(x_{σ(0)}, .., x_{σ(k-1)}).
    pub fn permuted(&self, sigma: &[usize]) -> Self {
        assert_eq!(sigma.len(), self.rank);
        let mut src = vec![0usize; self.rank];
        Tensor::from_fn(self.dim, self.rank, |idx| {
            for (s, &p) in sigma.iter().enumerate() {
                src[s] = idx[p];
            }
            self.get(&src).clone()
        })
    }

    /// Full antisymmetrization as the signed permutation sum, without the
    /// 1/k! normalization.
    pub fn alternate(&self) -> Self {
        if self.rank == 0 {
            return self.clone();
        }
        let mut acc: Tensor<T> = Tensor::zeros(self.dim, self.rank);
        for (p, s) in permutations(self.rank) {
            let t = self.permuted(&p);
            for (a, b) in acc.data.iter_mut().zip(t.data) {
                if s > 0 {
                    a.add_assign_ref(&b);
                } else {
                    a.add_assign_ref(&(-b));
                }
            }
        }
        acc.with_symmetry(Symmetry::Alternating)
    }

    /// (ã t)(X,Y,…) = t(X,Y,…) − t(Y,X,…).
    pub fn skew_pair(&self) -> Result<Self> {
        if self.rank < 2 {
            return Err(Error::Domain("rank too small".into()));
        }
        let mut sigma: Vec<usize> = (0..self.rank).collect();
        sigma.swap(0, 1);
        self.sub(&self.permuted(&sigma))
    }

    pub fn outer(&self, o: &Self) -> Result<Self> {
        if self.rank > 0 && o.rank > 0 && self.dim != o.dim {
            return Err(Error::Shape("dimension mismatch in tensor product".into()));
        }
        let dim = self.dim.max(o.dim);
        let mut data = Vec::with_capacity(self.data.len() * o.data.len());
        for a in &self.data {
            for b in &o.data {
                data.push(a.clone() * b.clone());
            }
        }
        Ok(Tensor { dim, rank: self.rank + o.rank, data, symmetry: Symmetry::None })
    }

    /// Shuffle-convention wedge product of alternating tensors:
    /// (a∧b)(x_1..x_{p+q}) = Σ_shuffles sign · a(..) b(..).
    pub fn wedge(&self, o: &Self) -> Result<Self> {
        if self.rank > 0 && o.rank > 0 && self.dim != o.dim {
            return Err(Error::Shape("dimension mismatch in wedge".into()));
        }
        let (p, q) = (self.rank, o.rank);
        let dim = self.dim.max(o.dim);
        let shuffles: Vec<(Vec<usize>, i64)> = permutations(p + q)
            .into_iter()
            .filter(|(s, _)| s[..p].windows(2).all(|w| w[0] < w[1]) && s[p..].windows(2).all(|w| w[0] < w[1]))
            .collect();
        let mut ia = vec![0usize; p];
        let mut ib = vec![0usize; q];
        let t = Tensor::from_fn(dim, p + q, |idx| {
            let mut acc = T::zero();
            for (s, sg) in &shuffles {
                for k in 0..p {
                    ia[k] = idx[s[k]];
                }
                for k in 0..q {
                    ib[k] = idx[s[p + k]];
                }
                let v = self.get(&ia).clone() * o.get(&ib).clone();
                if *sg > 0 {
                    acc.add_assign_ref(&v);
                } else {
                    acc.add_assign_ref(&(-v));
                }
            }
            acc
        });
        Ok(t.with_symmetry(Symmetry::Alternating))
    }

    /// Metric trace over two distinct slots.
    pub fn contract(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= self.rank || j >= self.rank {
            return Err(Error::Domain(format!("invalid contraction slots ({}, {}) for rank {}", i, j, self.rank)));
        }
        let rest: Vec<usize> = (0..self.rank).filter(|&s| s != i && s != j).collect();
        let mut full = vec![0usize; self.rank];
        Ok(Tensor::from_fn(self.dim, rest.len(), |idx| {
            for (k, &s) in rest.iter().enumerate() {
                full[s] = idx[k];
            }
            let mut acc = T::zero();
            for e in 0..self.dim {
                full[i] = e;
                full[j] = e;
                acc.add_assign_ref(self.get(&full));
            }
            acc
        }))
    }

    /// (x⌟a)(…) = a(x, …).
    pub fn interior(&self, x: &[T]) -> Result<Self> {
        if self.rank == 0 {
            return Err(Error::Domain("interior product of a rank-0 tensor".into()));
        }
        if x.len() != self.dim {
            return Err(Error::Shape("vector length does not match dimension".into()));
        }
        let stride = self.dim.pow(self.rank as u32 - 1);
        let mut data = vec![T::zero(); stride];
        for (k, xk) in x.iter().enumerate() {
            if xk.is_zero() {
                continue;
            }
            for (o, v) in data.iter_mut().zip(&self.data[k * stride..(k + 1) * stride]) {
                o.add_assign_ref(&(xk.clone() * v.clone()));
            }
        }
        Ok(Tensor { dim: self.dim, rank: self.rank - 1, data, symmetry: self.symmetry })
    }

    /// Plain sum of componentwise products, Σ a(i..) b(i..).
    pub fn full_dot(&self, o: &Self) -> Result<T> {
        self.same_shape(o)?;
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&o.data) {
            if !a.is_zero() && !b.is_zero() {
                acc.add_assign_ref(&(a.clone() * b.clone()));
            }
        }
        Ok(acc)
    }

    /// Antisymmetry under every transposition of slots.
    pub fn is_alternating(&self) -> bool {
        for s in 0..self.rank {
            for t in s + 1..self.rank {
                let mut sigma: Vec<usize> = (0..self.rank).collect();
                sigma.swap(s, t);
                let u = self.permuted(&sigma);
                if self.data.iter().zip(&u.data).any(|(a, b)| !(a.clone() + b.clone()).is_zero()) {
                    return false;
                }
            }
        }
        true
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        Tensor::from_fn(dim, 1, |idx| if idx[0] == i { T::one() } else { T::zero() })
    }

    /// e^{i_1}∧…∧e^{i_p} for a list of distinct basis indices.
    pub fn basis_form(dim: usize, idx: &[usize]) -> Self {
        let mut t = Tensor::scalar(T::one());
        for &i in idx {
            t = t.wedge(&Tensor::basis_vector(dim, i)).expect("same dimension");
        }
        t
    }
}

impl<T: Field> Tensor<T> {
    /// ⟨a,b⟩ = (1/p!) Σ a(e_{i_1},…) b(e_{i_1},…) on alternating tensors.
    pub fn form_inner(&self, o: &Self) -> Result<T> {
        if self.rank != o.rank {
            return Err(Error::Shape(format!("form ranks differ: {} vs {}", self.rank, o.rank)));
        }
        let s = self.full_dot(o)?;
        Ok(s / T::from_i64(factorial(self.rank)))
    }
}

impl Tensor<Int> {
    pub fn to_ring<T: Ring>(&self) -> Tensor<T> {
        self.map(|x| T::from_i64(i64::try_from(x.0).expect("small integer tensor")))
    }
}
