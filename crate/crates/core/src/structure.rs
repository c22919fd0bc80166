//! The adapted U(n)/SU(n) model on R^{2n}.
//!
//! Indices are 0-based: the basis is e_0, e_1 = I e_0, e_2, e_3 = I e_2, …
//! so e_{2k} and e_{2k+1} play the roles of e_{2k+1} and e_{2k+2} in the
//! usual 1-based labelling.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{Field, Int, Ring};
use crate::tensor::{perm_sign, Symmetry, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TypePart {
    /// (1,1)-part, the +1 eigenspace of I on 2-forms.
    Hermitian,
    /// Real (2,0)+(0,2)-part, the −1 eigenspace.
    Real20,
}

#[derive(Clone, Debug)]
pub struct UnStructure {
    pub n: usize,
    pub d: usize,
    /// I e_y = sign · e_{target}: `iperm[y] = (target, sign)`.
    iperm: Vec<(usize, i64)>,
    /// I[x][y] = ⟨e_x, I e_y⟩ = ω(x, y).
    imat: Vec<i64>,
    pub g: Tensor<Int>,
    pub omega: Tensor<Int>,
    pub psi_plus: Tensor<Int>,
    pub psi_minus: Tensor<Int>,
}

static MODELS: [OnceLock<UnStructure>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

impl UnStructure {
    pub fn build(n: usize) -> Result<Self> {
        if !(2..=5).contains(&n) {
            return Err(Error::Dimension(n));
        }
        let d = 2 * n;
        let mut iperm = vec![(0usize, 0i64); d];
        let mut imat = vec![0i64; d * d];
        for k in 0..n {
            iperm[2 * k] = (2 * k + 1, 1);
            iperm[2 * k + 1] = (2 * k, -1);
            imat[(2 * k + 1) * d + 2 * k] = 1;
            imat[2 * k * d + 2 * k + 1] = -1;
        }
        let g = Tensor::from_fn(d, 2, |i| Int((i[0] == i[1]) as i128));
        let omega = Tensor::from_fn(d, 2, |i| Int(imat[i[0] * d + i[1]] as i128)).with_symmetry(Symmetry::Alternating);
        let (psi_plus, psi_minus) = complex_volume(n);
        Ok(UnStructure { n, d, iperm, imat, g, omega, psi_plus, psi_minus })
    }

    /// Shared, lazily built model for `n`.
    pub fn get(n: usize) -> Result<&'static UnStructure> {
        if !(2..=5).contains(&n) {
            return Err(Error::Dimension(n));
        }
        Ok(MODELS[n - 2].get_or_init(|| UnStructure::build(n).expect("n checked")))
    }

    /// ⟨e_x, I e_y⟩.
    #[inline]
    pub fn i_mat(&self, x: usize, y: usize) -> i64 {
        self.imat[x * self.d + y]
    }

    /// I e_y = sign · e_target.
    #[inline]
    pub fn i_apply(&self, y: usize) -> (usize, i64) {
        self.iperm[y]
    }

    /// I acting on a coordinate vector.
    pub fn i_vec<T: Ring>(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        for (y, vy) in v.iter().enumerate() {
            let (x, s) = self.iperm[y];
            out[x] = if s > 0 { vy.clone() } else { -vy.clone() };
        }
        out
    }

    /// b(…, I X_i, …) at basis arguments: returns the tensor with slot
    /// `slot` (0-based) precomposed with I, without any sign.
    pub fn precompose_i<T: Ring>(&self, b: &Tensor<T>, slot: usize) -> Tensor<T> {
        let mut src = vec![0usize; b.rank()];
        Tensor::from_fn(b.dim(), b.rank(), |idx| {
            src.copy_from_slice(idx);
            let (x, s) = self.iperm[idx[slot]];
            src[slot] = x;
            let v = b.get(&src).clone();
            if s > 0 { v } else { -v }
        })
    }

    /// I_{(i)}b(X_1,…,X_s) = −b(X_1,…,IX_i,…,X_s), with `i` 1-based.
    pub fn i_slot<T: Ring>(&self, b: &Tensor<T>, i: usize) -> Result<Tensor<T>> {
        if i == 0 || i > b.rank() {
            return Err(Error::Domain(format!("slot {} out of range for rank {}", i, b.rank())));
        }
        let t = self.precompose_i(b, i - 1).neg();
        Ok(t.with_symmetry(b.symmetry))
    }

    /// I b(X_1,…,X_s) = (−1)^s b(IX_1,…,IX_s).
    pub fn i_total<T: Ring>(&self, b: &Tensor<T>) -> Tensor<T> {
        let mut t = b.clone();
        for s in 0..b.rank() {
            t = self.precompose_i(&t, s);
        }
        let t = if b.rank() % 2 == 1 { t.neg() } else { t };
        t.with_symmetry(b.symmetry)
    }

    /// (1,1)-part ½(a + Ia) or real (2,0)-part ½(a − Ia) of a 2-form.
    pub fn type_project<T: Field>(&self, a: &Tensor<T>, part: TypePart) -> Result<Tensor<T>> {
        if a.rank() != 2 || !a.is_alternating() {
            return Err(Error::Domain("type_project expects an alternating 2-tensor".into()));
        }
        let ia = self.i_total(a);
        let half = T::from_ratio(1, 2);
        let s = match part {
            TypePart::Hermitian => a.add(&ia)?,
            TypePart::Real20 => a.sub(&ia)?,
        };
        Ok(s.scale(&half).with_symmetry(Symmetry::Alternating))
    }

    /// Orthogonal integer basis of u(n)^⊥ ⊂ Λ², as 2-forms. Each element has
    /// four nonzero entries ±1 (form norm² 2).
    pub fn uperp_basis(&self) -> Vec<Tensor<Int>> {
        let d = self.d;
        let mut out = Vec::new();
        for k in 0..self.n {
            for l in k + 1..self.n {
                let mut a = Tensor::zeros(d, 2);
                let mut b = Tensor::zeros(d, 2);
                let put = |t: &mut Tensor<Int>, i: usize, j: usize, v: i128| {
                    t.set(&[i, j], Int(v));
                    t.set(&[j, i], Int(-v));
                };
                put(&mut a, 2 * k, 2 * l, 1);
                put(&mut a, 2 * k + 1, 2 * l + 1, -1);
                put(&mut b, 2 * k, 2 * l + 1, 1);
                put(&mut b, 2 * k + 1, 2 * l, 1);
                out.push(a.with_symmetry(Symmetry::Alternating));
                out.push(b.with_symmetry(Symmetry::Alternating));
            }
        }
        out
    }

    /// Integer basis of u(n) ⊂ Λ² (the (1,1)-forms).
    pub fn un_basis(&self) -> Vec<Tensor<Int>> {
        let d = self.d;
        let mut out = vec![];
        for k in 0..self.n {
            let mut t = Tensor::zeros(d, 2);
            t.set(&[2 * k, 2 * k + 1], Int(1));
            t.set(&[2 * k + 1, 2 * k], Int(-1));
            out.push(t);
        }
        for k in 0..self.n {
            for l in k + 1..self.n {
                let mut a = Tensor::zeros(d, 2);
                let mut b = Tensor::zeros(d, 2);
                let put = |t: &mut Tensor<Int>, i: usize, j: usize, v: i128| {
                    t.set(&[i, j], Int(v));
                    t.set(&[j, i], Int(-v));
                };
                put(&mut a, 2 * k, 2 * l, 1);
                put(&mut a, 2 * k + 1, 2 * l + 1, 1);
                put(&mut b, 2 * k, 2 * l + 1, 1);
                put(&mut b, 2 * k + 1, 2 * l, -1);
                out.push(a);
                out.push(b);
            }
        }
        out.into_iter().map(|t| t.with_symmetry(Symmetry::Alternating)).collect()
    }
}

/// Real and imaginary parts of (e^0 + i e^1)∧…∧(e^{2n−2} + i e^{2n−1}).
fn complex_volume(n: usize) -> (Tensor<Int>, Tensor<Int>) {
    let d = 2 * n;
    let mut re = Tensor::zeros(d, n);
    let mut im = Tensor::zeros(d, n);
    let len = d.pow(n as u32);
    let mut idx = vec![0usize; n];
    for off in 0..len {
        let mut r = off;
        for s in (0..n).rev() {
            idx[s] = r % d;
            r /= d;
        }
        let blocks: Vec<usize> = idx.iter().map(|&x| x / 2).collect();
        let mut seen = vec![false; n];
        if blocks.iter().any(|&b| std::mem::replace(&mut seen[b], true)) {
            continue;
        }
        let sign = perm_sign(&blocks) as i128;
        // i^m with m the number of imaginary factors.
        let m = idx.iter().filter(|&&x| x % 2 == 1).count() % 4;
        let (a, b) = match m {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        re.data[off] = Int(sign * a);
        im.data[off] = Int(sign * b);
    }
    (re.with_symmetry(Symmetry::Alternating), im.with_symmetry(Symmetry::Alternating))
}
