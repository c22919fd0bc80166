//! Curvature formulas in terms of the intrinsic torsion and its first jet.
//!
//! Every formula is split into three monomial groups: the dη̂ terms, the
//! terms linear in ∇̃ξ and the terms quadratic in ξ. Quadratic terms are
//! written as a bilinear map f(u, v) so that the audit can evaluate cross
//! terms ξ_c⊙ξ_d directly.

use std::fmt;

use crate::curvature::{CurvSpace, ModuleAtlas, ModuleName};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Ring};
use crate::structure::UnStructure;
use crate::tensor::{Symmetry, Tensor};
use crate::torsion::{connection_shift, Derivative, TorsionJet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FormulaId {
    RicDiffLc,
    RicDiffMin,
    HermDiff,
    RicstarAhA,
    RicstarAhB,
    RicAh,
    RicstarSu,
    RicSu,
    Combo31,
    Pi1Jet,
    Beta4d,
    K1k2_4d,
}

impl FormulaId {
    pub const ALL: [FormulaId; 12] = [
        FormulaId::RicDiffLc,
        FormulaId::RicDiffMin,
        FormulaId::HermDiff,
        FormulaId::RicstarAhA,
        FormulaId::RicstarAhB,
        FormulaId::RicAh,
        FormulaId::RicstarSu,
        FormulaId::RicSu,
        FormulaId::Combo31,
        FormulaId::Pi1Jet,
        FormulaId::Beta4d,
        FormulaId::K1k2_4d,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FormulaId::RicDiffLc => "ric-diff-LC",
            FormulaId::RicDiffMin => "ric-diff-min",
            FormulaId::HermDiff => "herm-diff",
            FormulaId::RicstarAhA => "ricstar-AH-a",
            FormulaId::RicstarAhB => "ricstar-AH-b",
            FormulaId::RicAh => "ric-AH",
            FormulaId::RicstarSu => "ricstar-SU",
            FormulaId::RicSu => "ric-SU",
            FormulaId::Combo31 => "combo-3-1",
            FormulaId::Pi1Jet => "pi1-jet",
            FormulaId::Beta4d => "beta-4d",
            FormulaId::K1k2_4d => "k1k2-4d",
        }
    }

    pub fn parse(s: &str) -> Result<FormulaId> {
        FormulaId::ALL.iter().copied().find(|f| f.label() == s.trim()).ok_or_else(|| Error::UnknownName(s.into()))
    }

    /// Only defined in four dimensions.
    pub fn four_dim_only(self) -> bool {
        matches!(self, FormulaId::Beta4d | FormulaId::K1k2_4d)
    }

    pub fn check_n(self, n: usize) -> Result<()> {
        if self.four_dim_only() && n != 2 {
            return Err(Error::Domain(format!("{} is only defined for n = 2", self.label())));
        }
        Ok(())
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Which monomial groups to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Terms {
    pub deta: bool,
    pub lin: bool,
    pub quad: bool,
}

impl Terms {
    pub const ALL: Terms = Terms { deta: true, lin: true, quad: true };
    pub const DETA: Terms = Terms { deta: true, lin: false, quad: false };
    pub const LIN: Terms = Terms { deta: false, lin: true, quad: false };
    pub const QUAD: Terms = Terms { deta: false, lin: false, quad: true };
}

/// Formula output: a bilinear form, or (pi1-jet) an element of Λ²⊗u(n)^⊥.
#[derive(Clone, Debug, PartialEq)]
pub enum Value<T: Ring> {
    Bilinear(Tensor<T>),
    Pi1(Tensor<T>),
}

impl<T: Ring> Value<T> {
    pub fn tensor(&self) -> &Tensor<T> {
        match self {
            Value::Bilinear(t) | Value::Pi1(t) => t,
        }
    }

    pub fn bilinear(&self) -> Result<&Tensor<T>> {
        match self {
            Value::Bilinear(t) => Ok(t),
            Value::Pi1(_) => Err(Error::Domain("pi1-jet is not a bilinear form".into())),
        }
    }
}

/// Raw formula inputs. `dxi` is ∇̃ξ (the U(n)-connection derivative), the
/// quadratic terms are evaluated as f(u, v) and `de` is dη̂.
pub struct Inputs<'a, T: Ring> {
    pub dxi: &'a Tensor<T>,
    pub u: &'a Tensor<T>,
    pub v: &'a Tensor<T>,
    pub de: &'a Tensor<T>,
}

/// Square matrices as flat row-major vectors.
struct Ops<'s> {
    s: &'s UnStructure,
    d: usize,
}

impl<'s> Ops<'s> {
    fn zero<T: Ring>(&self) -> Vec<T> {
        vec![T::zero(); self.d * self.d]
    }

    fn tr<T: Ring>(&self, b: &[T]) -> Vec<T> {
        let d = self.d;
        (0..d * d).map(|xy| b[(xy % d) * d + xy / d].clone()).collect()
    }

    /// b(IX, IY).
    fn ixiy<T: Ring>(&self, b: &[T]) -> Vec<T> {
        let d = self.d;
        let mut out = self.zero();
        for x in 0..d {
            let (ix, sx) = self.s.i_apply(x);
            for y in 0..d {
                let (iy, sy) = self.s.i_apply(y);
                let v = b[ix * d + iy].clone();
                out[x * d + y] = if sx * sy > 0 { v } else { -v };
            }
        }
        out
    }

    /// b(X, IY) (slot 1) or b(IX, Y) (slot 0).
    fn pre<T: Ring>(&self, b: &[T], slot: usize) -> Vec<T> {
        let d = self.d;
        let mut out = self.zero();
        for x in 0..d {
            for y in 0..d {
                let (src, sg) = if slot == 0 {
                    let (ix, s) = self.s.i_apply(x);
                    (ix * d + y, s)
                } else {
                    let (iy, s) = self.s.i_apply(y);
                    (x * d + iy, s)
                };
                let v = b[src].clone();
                out[x * d + y] = if sg > 0 { v } else { -v };
            }
        }
        out
    }

    /// Σ_k c_k · m_k.
    fn lin<T: Ring>(&self, terms: &[(i64, &[T])]) -> Vec<T> {
        let mut out: Vec<T> = self.zero();
        for (c, m) in terms {
            if *c == 0 {
                continue;
            }
            for (o, x) in out.iter_mut().zip(m.iter()) {
                if !x.is_zero() {
                    o.add_assign_ref(&x.mul_i64(*c));
                }
            }
        }
        out
    }

    /// T1[X,Y] = Σ_i ⟨(∇̃_{e_i}ξ)_X Y, e_i⟩.
    fn t1<T: Ring>(&self, dxi: &Tensor<T>) -> Vec<T> {
        let d = self.d;
        let mut out = self.zero();
        for x in 0..d {
            for y in 0..d {
                let mut acc = T::zero();
                for i in 0..d {
                    acc.add_assign_ref(&dxi.data[((i * d + x) * d + y) * d + i]);
                }
                out[x * d + y] = acc;
            }
        }
        out
    }

    /// T2[X,Y] = Σ_i ⟨(∇̃_X ξ)_{e_i} Y, e_i⟩.
    fn t2<T: Ring>(&self, dxi: &Tensor<T>) -> Vec<T> {
        let d = self.d;
        let mut out = self.zero();
        for x in 0..d {
            for y in 0..d {
                let mut acc = T::zero();
                for i in 0..d {
                    acc.add_assign_ref(&dxi.data[((x * d + i) * d + y) * d + i]);
                }
                out[x * d + y] = acc;
            }
        }
        out
    }

    /// p[X,Y] = Σ ⟨u_{e_i} X, e_k⟩⟨v_{e_k} Y, e_i⟩ = ⟨ξ_{ξ_{e_i}X} Y, e_i⟩.
    fn p<T: Ring>(&self, u: &Tensor<T>, v: &Tensor<T>) -> Vec<T> {
        let d = self.d;
        let mut out: Vec<T> = self.zero();
        for i in 0..d {
            for x in 0..d {
                for k in 0..d {
                    let a = &u.data[(i * d + x) * d + k];
                    if a.is_zero() {
                        continue;
                    }
                    for y in 0..d {
                        let b = &v.data[(k * d + y) * d + i];
                        if !b.is_zero() {
                            out[x * d + y].add_assign_ref(&(a.clone() * b.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// q[X,Y] = ⟨ξ_{ξ_X e_i} Y, e_i⟩.
    fn q<T: Ring>(&self, u: &Tensor<T>, v: &Tensor<T>) -> Vec<T> {
        let d = self.d;
        let mut out: Vec<T> = self.zero();
        for x in 0..d {
            for i in 0..d {
                for k in 0..d {
                    let a = &u.data[(x * d + i) * d + k];
                    if a.is_zero() {
                        continue;
                    }
                    for y in 0..d {
                        let b = &v.data[(k * d + y) * d + i];
                        if !b.is_zero() {
                            out[x * d + y].add_assign_ref(&(a.clone() * b.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// quadstar[X,Y] = ⟨ξ_X e_i, ξ_{IY} I e_i⟩.
    fn qs<T: Ring>(&self, u: &Tensor<T>, v: &Tensor<T>) -> Vec<T> {
        let d = self.d;
        let vi = self.s.precompose_i(&self.s.precompose_i(v, 0), 1);
        let mut out = self.zero();
        for x in 0..d {
            for y in 0..d {
                let mut acc = T::zero();
                for ik in 0..d * d {
                    let a = &u.data[x * d * d + ik];
                    let b = &vi.data[y * d * d + ik];
                    if !a.is_zero() && !b.is_zero() {
                        acc.add_assign_ref(&(a.clone() * b.clone()));
                    }
                }
                out[x * d + y] = acc;
            }
        }
        out
    }

    /// β-type scalar pieces: Σ ⟨(∇̃_{e_i}ξ)_{e_j} e_j, e_i⟩ and
    /// Σ ⟨ξ_{ξ_{e_i} e_j} e_j, e_i⟩.
    fn beta_lin<T: Ring>(&self, dxi: &Tensor<T>) -> T {
        let d = self.d;
        let mut acc = T::zero();
        for i in 0..d {
            for j in 0..d {
                acc.add_assign_ref(&dxi.data[((i * d + j) * d + j) * d + i]);
            }
        }
        acc
    }

    fn beta_quad<T: Ring>(&self, u: &Tensor<T>, v: &Tensor<T>) -> T {
        let d = self.d;
        let mut acc = T::zero();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let a = &u.data[(i * d + j) * d + k];
                    if !a.is_zero() {
                        acc.add_assign_ref(&(a.clone() * v.data[(k * d + j) * d + i].clone()));
                    }
                }
            }
        }
        acc
    }

    fn scalar_g<T: Ring>(&self, c: &T) -> Vec<T> {
        let d = self.d;
        (0..d * d).map(|xy| if xy / d == xy % d { c.clone() } else { T::zero() }).collect()
    }

    /// AH-skew pattern a − aᵀ − IXIY(a) + IXIY(a)ᵀ.
    fn l20_pattern<T: Ring>(&self, a: &[T]) -> Vec<T> {
        let ia = self.ixiy(a);
        self.lin(&[(1, a), (-1, &self.tr(a)), (-1, &ia), (1, &self.tr(&ia))])
    }

    /// Pattern a + aᵀ − IXIY(a) − IXIY(a)ᵀ.
    fn s20_pattern<T: Ring>(&self, a: &[T]) -> Vec<T> {
        let ia = self.ixiy(a);
        self.lin(&[(1, a), (1, &self.tr(a)), (-1, &ia), (-1, &self.tr(&ia))])
    }

    /// The Levi-Civita form Σ 2⟨(∇_{e_i}Iξ)_X IY, e_i⟩ − 2⟨(∇_X Iξ)_{e_i} IY, e_i⟩
    /// with ∇ = ∇̃ − ξ acting as a derivation on A = Iξ.
    fn ric_diff_lc<T: Ring>(&self, inp: &Inputs<T>, terms: Terms) -> Vec<T> {
        let d = self.d;
        let s = self.s;
        // A_v[x,y,z] = ⟨I ξ_x y, z⟩ = Σ_k v[x,y,k]·⟨I e_k, e_z⟩.
        let a_of = |t: &Tensor<T>, rank4: bool| -> Tensor<T> {
            let lead = if rank4 { d } else { 1 };
            let mut out: Tensor<T> = Tensor::zeros(d, if rank4 { 4 } else { 3 });
            for base in 0..lead * d * d {
                for k in 0..d {
                    let x = &t.data[base * d + k];
                    if x.is_zero() {
                        continue;
                    }
                    let (z, sg) = s.i_apply(k);
                    let val = if sg > 0 { x.clone() } else { -x.clone() };
                    out.data[base * d + z].add_assign_ref(&val);
                }
            }
            out
        };
        let mut n4: Tensor<T> = Tensor::zeros(d, 4);
        if terms.lin {
            n4 = a_of(inp.dxi, true);
        }
        if terms.quad {
            let av = a_of(inp.v, false);
            let u = inp.u;
            for a in 0..d {
                for x in 0..d {
                    for y in 0..d {
                        for z in 0..d {
                            let mut acc = T::zero();
                            for k in 0..d {
                                let c1 = &u.data[(a * d + x) * d + k];
                                if !c1.is_zero() {
                                    acc.add_assign_ref(&(c1.clone() * av.data[(k * d + y) * d + z].clone()));
                                }
                                let c2 = &u.data[(a * d + y) * d + k];
                                if !c2.is_zero() {
                                    acc.add_assign_ref(&(c2.clone() * av.data[(x * d + k) * d + z].clone()));
                                }
                                let c3 = &u.data[(a * d + z) * d + k];
                                if !c3.is_zero() {
                                    acc.add_assign_ref(&(c3.clone() * av.data[(x * d + y) * d + k].clone()));
                                }
                            }
                            n4.data[((a * d + x) * d + y) * d + z].add_assign_ref(&acc);
                        }
                    }
                }
            }
        }
        let n4 = s.precompose_i(&n4, 2);
        let mut out = self.zero();
        for x in 0..d {
            for y in 0..d {
                let mut acc = T::zero();
                for i in 0..d {
                    acc.add_assign_ref(&n4.data[((i * d + x) * d + y) * d + i].mul_i64(2));
                    acc.add_assign_ref(&n4.data[((x * d + i) * d + y) * d + i].mul_i64(-2));
                }
                out[x * d + y] = acc;
            }
        }
        out
    }

    fn pi1_jet<T: Ring>(&self, inp: &Inputs<T>, terms: Terms) -> Tensor<T> {
        let d = self.d;
        let mut t: Tensor<T> = Tensor::zeros(d, 4);
        if terms.lin {
            t = inp.dxi.clone();
        }
        if terms.quad {
            // ⟨ξ_{ξ_X Y} Z, W⟩ = Σ_k u[x,y,k] v[k,z,w].
            for xy in 0..d * d {
                for k in 0..d {
                    let a = &inp.u.data[xy * d + k];
                    if a.is_zero() {
                        continue;
                    }
                    for zw in 0..d * d {
                        let b = &inp.v.data[k * d * d + zw];
                        if !b.is_zero() {
                            t.data[xy * d * d + zw].add_assign_ref(&(a.clone() * b.clone()));
                        }
                    }
                }
            }
        }
        let mut out = Tensor::zeros(d, 4);
        for x in 0..d {
            for y in 0..d {
                for zw in 0..d * d {
                    let v = t.data[(x * d + y) * d * d + zw].clone() - t.data[(y * d + x) * d * d + zw].clone();
                    out.data[(x * d + y) * d * d + zw] = v;
                }
            }
        }
        out
    }
}

/// Evaluate a formula on raw inputs; quadratic terms are f(u, v).
pub fn eval_raw<T: Ring>(s: &UnStructure, id: FormulaId, inp: &Inputs<T>, terms: Terms) -> Result<Value<T>> {
    id.check_n(s.n)?;
    let d = s.d;
    for (t, r) in [(inp.dxi, 4), (inp.u, 3), (inp.v, 3), (inp.de, 2)] {
        if t.dim() != d || t.rank() != r {
            return Err(Error::Shape(format!("{} expects rank-{} inputs of dimension {}", id, r, d)));
        }
    }
    let o = Ops { s, d };
    let n = s.n as i64;
    let (lin, quad, dd) = (terms.lin, terms.quad, terms.deta);
    let z: Vec<T> = o.zero();
    let lin_ab = || (o.t1(inp.dxi), o.t2(inp.dxi));
    let out: Vec<T> = match id {
        FormulaId::Pi1Jet => return Ok(Value::Pi1(o.pi1_jet(inp, terms))),
        FormulaId::RicDiffLc => o.ric_diff_lc(inp, terms),
        FormulaId::RicDiffMin => {
            let mut acc = z.clone();
            if lin {
                let (a, b) = lin_ab();
                acc = o.lin(&[(1, &acc), (2, &a), (-2, &b)]);
            }
            if quad {
                let (p, q) = (o.p(inp.u, inp.v), o.q(inp.u, inp.v));
                acc = o.lin(&[(1, &acc), (2, &p), (-2, &q)]);
            }
            acc
        }
        FormulaId::HermDiff => {
            let mut acc = z.clone();
            if lin {
                let (a, b) = lin_ab();
                let m = o.lin(&[(1, &a), (-1, &b)]);
                acc = o.lin(&[(1, &acc), (1, &m), (1, &o.ixiy(&m))]);
            }
            if quad {
                let m = o.lin(&[(1, &o.p(inp.u, inp.v)), (-1, &o.q(inp.u, inp.v))]);
                acc = o.lin(&[(1, &acc), (1, &m), (1, &o.ixiy(&m))]);
            }
            acc
        }
        FormulaId::RicstarAhA => {
            let mut acc = z.clone();
            if lin {
                let (a, b) = lin_ab();
                let m = o.lin(&[(1, &a), (-1, &b)]);
                acc = o.lin(&[(1, &acc), (1, &o.l20_pattern(&m))]);
            }
            if quad {
                let q = o.q(inp.u, inp.v);
                acc = o.lin(&[(1, &acc), (1, &o.l20_pattern(&q))]);
            }
            acc
        }
        FormulaId::RicAh => {
            let mut acc = z.clone();
            if lin {
                let (a, b) = lin_ab();
                let m = o.lin(&[(-1, &a), (1, &b)]);
                acc = o.lin(&[(1, &acc), (1, &o.s20_pattern(&m))]);
            }
            if quad {
                let m = o.lin(&[(-1, &o.p(inp.u, inp.v)), (1, &o.q(inp.u, inp.v))]);
                acc = o.lin(&[(1, &acc), (1, &o.s20_pattern(&m))]);
            }
            acc
        }
        FormulaId::RicstarSu | FormulaId::RicSu => {
            let mut acc = z.clone();
            if dd {
                acc = o.lin(&[(-n, &o.pre(&inp.de.data, 1))]);
            }
            if quad {
                acc = o.lin(&[(1, &acc), (-1, &o.qs(inp.u, inp.v))]);
            }
            if id == FormulaId::RicSu {
                if quad {
                    let (p, q) = (o.p(inp.u, inp.v), o.q(inp.u, inp.v));
                    acc = o.lin(&[(1, &acc), (-2, &p), (2, &q)]);
                }
                if lin {
                    let (a, b) = lin_ab();
                    acc = o.lin(&[(1, &acc), (-2, &a), (2, &b)]);
                }
            }
            acc
        }
        FormulaId::Combo31 => {
            let mut acc = z.clone();
            if dd {
                acc = o.lin(&[(-2 * n, &o.pre(&inp.de.data, 1)), (2 * n, &o.pre(&inp.de.data, 0))]);
            }
            if lin {
                let (a, b) = lin_ab();
                let m = o.lin(&[(-1, &a), (1, &b)]);
                acc = o.lin(&[(1, &acc), (1, &m), (1, &o.ixiy(&m))]);
            }
            if quad {
                let m = o.lin(&[(-1, &o.p(inp.u, inp.v)), (1, &o.q(inp.u, inp.v))]);
                let qs = o.qs(inp.u, inp.v);
                acc = o.lin(&[(1, &acc), (1, &m), (1, &o.ixiy(&m)), (-2, &qs), (-2, &o.tr(&qs))]);
            }
            acc
        }
        FormulaId::RicstarAhB => {
            let mut acc = z.clone();
            if lin {
                // Σ_i ⟨(∇̃_{e_i}ξ)_{Ie_i} X, Y⟩, then X ↦ IX.
                let mut t: Vec<T> = o.zero();
                for i in 0..d {
                    let (ii, sg) = s.i_apply(i);
                    for xy in 0..d * d {
                        let v = &inp.dxi.data[(i * d + ii) * d * d + xy];
                        if !v.is_zero() {
                            t[xy].add_assign_ref(&v.mul_i64(sg));
                        }
                    }
                }
                acc = o.lin(&[(1, &acc), (1, &o.pre(&t, 0))]);
            }
            if quad {
                // −⟨ξ_{I ξ_{e_i} e_i} IX, Y⟩.
                let mut vk = vec![T::zero(); d];
                for i in 0..d {
                    for (k, slot) in vk.iter_mut().enumerate() {
                        slot.add_assign_ref(&inp.u.data[(i * d + i) * d + k]);
                    }
                }
                let iv = s.i_vec(&vk);
                let mut t: Vec<T> = o.zero();
                for (k, c) in iv.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for xy in 0..d * d {
                        let b = &inp.v.data[k * d * d + xy];
                        if !b.is_zero() {
                            t[xy].add_assign_ref(&(c.clone() * b.clone()));
                        }
                    }
                }
                acc = o.lin(&[(1, &acc), (-1, &o.pre(&t, 0))]);
            }
            acc
        }
        FormulaId::Beta4d => {
            let mut b = T::zero();
            if lin {
                b.add_assign_ref(&o.beta_lin(inp.dxi));
            }
            if quad {
                b.add_assign_ref(&o.beta_quad(inp.u, inp.v));
            }
            o.scalar_g(&b)
        }
        FormulaId::K1k2_4d => {
            let mut b = T::zero();
            if lin {
                b.add_assign_ref(&o.beta_lin(inp.dxi));
            }
            if quad {
                b.add_assign_ref(&o.beta_quad(inp.u, inp.v));
            }
            let mut acc = o.lin(&[(-1, &o.scalar_g(&b))]);
            if dd {
                acc = o.lin(&[(1, &acc), (-4, &o.pre(&inp.de.data, 1)), (4, &o.pre(&inp.de.data, 0))]);
            }
            if quad {
                let qs = o.qs(inp.u, inp.v);
                acc = o.lin(&[(1, &acc), (-2, &qs), (-2, &o.tr(&qs))]);
            }
            acc
        }
    };
    Ok(Value::Bilinear(Tensor::from_vec(d, 2, out)?))
}

/// Polarized quadratic part f(u,v) + f(v,u): the symmetric bilinear map of
/// the monomial ξ_c⊙ξ_d (and, for u = v, twice ξ_c⊗ξ_c).
pub fn eval_polarized<T: Ring>(s: &UnStructure, id: FormulaId, u: &Tensor<T>, v: &Tensor<T>) -> Result<Value<T>> {
    let d = s.d;
    let z4 = Tensor::zeros(d, 4);
    let z2 = Tensor::zeros(d, 2);
    let a = eval_raw(s, id, &Inputs { dxi: &z4, u, v, de: &z2 }, Terms::QUAD)?;
    let b = eval_raw(s, id, &Inputs { dxi: &z4, u: v, v: u, de: &z2 }, Terms::QUAD)?;
    let sum = a.tensor().add(b.tensor())?;
    Ok(match a {
        Value::Bilinear(_) => Value::Bilinear(sum),
        Value::Pi1(_) => Value::Pi1(sum),
    })
}

/// Evaluate a formula on a jet. The jet stores ∇̄ξ; the formulas use ∇̃ξ,
/// obtained by the connection shift.
pub fn eval(id: FormulaId, jet: &TorsionJet) -> Result<Value<Rational>> {
    eval_terms(id, jet, Terms::ALL)
}

pub fn eval_terms(id: FormulaId, jet: &TorsionJet, terms: Terms) -> Result<Value<Rational>> {
    jet.validate()?;
    let s = UnStructure::get(jet.n)?;
    let dt = connection_shift(jet, Derivative::Unitary)?;
    eval_raw(s, id, &Inputs { dxi: &dt, u: &jet.xi, v: &jet.xi, de: &jet.d_eta_hat }, terms)
}

/// Named parts of a bilinear form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Part {
    /// Trace (the ℝ part).
    Scalar,
    /// Trace-free Hermitian symmetric part, [λ₀^{1,1}].
    L11,
    /// Skew anti-Hermitian part, [[λ^{2,0}]].
    L20,
    /// Symmetric anti-Hermitian part, [[σ^{2,0}]].
    S20,
    /// ψ₊-coordinate of the [[λ^{2,0}]] part (n = 2).
    PsiPlus,
    /// ψ₋-coordinate of the [[λ^{2,0}]] part (n = 2).
    PsiMinus,
}

impl Part {
    pub const ALL: [Part; 6] = [Part::Scalar, Part::L11, Part::L20, Part::S20, Part::PsiPlus, Part::PsiMinus];

    pub fn label(self) -> &'static str {
        match self {
            Part::Scalar => "R",
            Part::L11 => "l11",
            Part::L20 => "l20",
            Part::S20 => "s20",
            Part::PsiPlus => "psi+",
            Part::PsiMinus => "psi-",
        }
    }

    pub fn parse(s: &str) -> Result<Part> {
        Part::ALL.iter().copied().find(|p| p.label() == s.trim()).ok_or_else(|| Error::UnknownName(s.into()))
    }

    /// Real dimension of the part at n.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Part::Scalar => 1,
            Part::L11 => n * n - 1,
            Part::L20 => n * (n - 1),
            Part::S20 => n * (n + 1),
            Part::PsiPlus | Part::PsiMinus => usize::from(n == 2),
        }
    }
}

/// Integer multiple of a part of b, flattened: the trace; 2n·b_HS − tr(b_HS)g
/// with b_HS = b + bᵀ + b(I·,I·) + b(I·,I·)ᵀ; the two anti-Hermitian
/// patterns; or Σ l20·ψ±.
pub fn part_of<T: Ring>(s: &UnStructure, b: &Tensor<T>, part: Part) -> Result<Vec<T>> {
    if b.rank() != 2 || b.dim() != s.d {
        return Err(Error::Shape("parts are defined for bilinear forms".into()));
    }
    let d = s.d;
    let o = Ops { s, d };
    let m = &b.data;
    Ok(match part {
        Part::Scalar => {
            let mut t = T::zero();
            for i in 0..d {
                t.add_assign_ref(&m[i * d + i]);
            }
            vec![t]
        }
        Part::L11 => {
            let im = o.ixiy(m);
            let hs = o.lin(&[(1, m), (1, &o.tr(m)), (1, &im), (1, &o.tr(&im))]);
            let mut t = T::zero();
            for i in 0..d {
                t.add_assign_ref(&hs[i * d + i]);
            }
            o.lin(&[(2 * s.n as i64, &hs), (-1, &o.scalar_g(&t))])
        }
        Part::L20 => o.l20_pattern(m),
        Part::S20 => o.s20_pattern(m),
        Part::PsiPlus | Part::PsiMinus => {
            if s.n != 2 {
                return Err(Error::InvalidClass { label: part.label().into(), n: s.n });
            }
            let psi = if part == Part::PsiPlus { &s.psi_plus } else { &s.psi_minus };
            let l = o.l20_pattern(m);
            let mut t = T::zero();
            for (a, p) in l.iter().zip(&psi.data) {
                if !p.is_zero() {
                    t.add_assign_ref(&a.mul_i64(p.0 as i64));
                }
            }
            vec![t]
        }
    })
}

/// Projection target for [`component_of`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Part(Part),
    Module(ModuleName),
}

impl Target {
    pub fn parse(s: &str) -> Result<Target> {
        Part::parse(s).map(Target::Part).or_else(|_| ModuleName::parse(s).map(Target::Module))
    }
}

/// Exact component of a formula value. Bilinear parts are returned with
/// their true normalization (Hermitian/anti-Hermitian halves, trace-free
/// part); module targets apply π₂ to the pi1-jet value and project.
pub fn component_of(id: FormulaId, jet: &TorsionJet, target: Target) -> Result<Tensor<Rational>> {
    let s = UnStructure::get(jet.n)?;
    let v = eval(id, jet)?;
    match (target, v) {
        (Target::Part(p), Value::Bilinear(b)) => {
            let raw = part_of(s, &b, p)?;
            let d = s.d;
            let scale = match p {
                Part::Scalar | Part::PsiPlus | Part::PsiMinus => Rational::one(),
                Part::L11 => Rational::new(1.into(), (8 * s.n).into()),
                Part::L20 | Part::S20 => Rational::new(1.into(), 4.into()),
            };
            let raw: Vec<Rational> = raw.into_iter().map(|x| x * scale.clone()).collect();
            if raw.len() == 1 {
                Ok(Tensor::scalar(raw.into_iter().next().unwrap()))
            } else {
                Tensor::from_vec(d, 2, raw)
            }
        }
        (Target::Module(m), Value::Pi1(x)) => {
            let cs = CurvSpace::get(jet.n)?;
            let atlas = ModuleAtlas::get(jet.n)?;
            let proj = atlas.module(m)?;
            if m.in_kahler() {
                return Ok(Tensor::zeros(s.d, 4).with_symmetry(Symmetry::SymmetricPair));
            }
            let y = atlas.pi2(&cs.from_tensor(&x));
            Ok(cs.to_tensor(&proj.project(&y)).with_symmetry(Symmetry::SymmetricPair))
        }
        (Target::Part(p), Value::Pi1(_)) => {
            Err(Error::InvalidClass { label: format!("{} (pi1-jet has module targets)", p.label()), n: jet.n })
        }
        (Target::Module(m), Value::Bilinear(_)) => {
            Err(Error::InvalidClass { label: format!("{} (bilinear formulas have part targets)", m.label()), n: jet.n })
        }
    }
}
