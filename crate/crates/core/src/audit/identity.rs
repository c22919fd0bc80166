//! The [[λ^{2,0}]]-part of d²ω.
//!
//! With α = dω written through ξ, d²ω = 𝐚(∇̃α) − 𝐚(ξα) is computed on free
//! jets, contracted with ω and projected to [[λ^{2,0}]]. On a free jet this
//! is a fixed linear combination of a handful of monomials; the relation is
//! recovered as the nullspace of the sampled coefficient matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::nullspace;
use crate::scalar::{format_rational, Int, Rational, Ring};
use crate::structure::UnStructure;
use crate::tensor::{permutations, Tensor};
use crate::torsion::{GHClass, TorsionModel};

/// Monomials of the relation, in reporting order. `D2` is included in the
/// fit and must come out zero.
pub const MONOMIALS: [&str; 9] = ["D1", "D3", "D4", "xi3.xi1", "xi3.xi2", "xi1.xi4", "xi2.xi4", "xi3.xi4", "D2"];

/// The displayed coefficients, normalized to 3 on D1.
pub fn reference_coefficients(n: usize) -> Vec<Rational> {
    let r = |p: i64, q: i64| Rational::new(p.into(), q.into());
    let n = n as i64;
    vec![r(3, 1), r(-1, 1), r(n - 2, 1), r(1, 1), r(1, 1), r(-(n - 5), n - 1), r(-(n - 2), n - 1), r(1, 1), r(0, 1)]
}

/// Class-resolved free jet with integer entries.
pub struct ClassJet {
    /// ∇̃ξ split by class (rank 4 each).
    pub dxc: Vec<Tensor<Int>>,
    /// ξ split by class (rank 3 each).
    pub xc: Vec<Tensor<Int>>,
}

impl ClassJet {
    pub fn dxi(&self) -> Tensor<Int> {
        sum(&self.dxc)
    }

    pub fn xi(&self) -> Tensor<Int> {
        sum(&self.xc)
    }
}

fn sum(ts: &[Tensor<Int>]) -> Tensor<Int> {
    let mut acc = ts[0].clone();
    for t in &ts[1..] {
        acc = acc.add(t).expect("same shape");
    }
    acc
}

fn random_class_elem(rng: &mut ChaCha8Rng, basis: &[Vec<Int>], len: usize) -> Vec<Int> {
    let mut v = vec![Int(0); len];
    for b in basis {
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            for (o, x) in v.iter_mut().zip(b) {
                *o = *o + *x * Int(c as i128);
            }
        }
    }
    v
}

/// Random jet with every U(n) class present, classes in order W1..W4.
pub fn random_class_jet(n: usize, seed: u64) -> Result<ClassJet> {
    let s = UnStructure::get(n)?;
    let m = TorsionModel::get(n)?;
    let d = s.d;
    let m3 = d * d * d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dxc = Vec::new();
    let mut xc = Vec::new();
    for c in [GHClass::W1, GHClass::W2, GHClass::W3, GHClass::W4] {
        let basis: &[Vec<Int>] = if c.valid_at(n) { m.class_basis(c)? } else { &[] };
        let mut data = Vec::with_capacity(d * m3);
        for _ in 0..d {
            data.extend(random_class_elem(&mut rng, basis, m3));
        }
        dxc.push(Tensor::from_vec(d, 4, data)?);
        xc.push(Tensor::from_vec(d, 3, random_class_elem(&mut rng, basis, m3))?);
    }
    Ok(ClassJet { dxc, xc })
}

/// 2·[[λ^{2,0}]]-part of a bilinear form: B − B(I·,I·).
fn lam2<T: Ring>(s: &UnStructure, b: &Tensor<T>) -> Tensor<T> {
    let ib = s.precompose_i(&s.precompose_i(b, 0), 1);
    b.sub(&ib).expect("same shape")
}

/// Σ_i ∇̃ξ(e_i; e_i, X, Y).
fn m_der<T: Ring>(s: &UnStructure, dx: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let b = Tensor::from_fn(d, 2, |xy| {
        let mut acc = T::zero();
        for i in 0..d {
            acc.add_assign_ref(dx.get(&[i, i, xy[0], xy[1]]));
        }
        acc
    });
    lam2(s, &b)
}

/// ⟨a_X e_i, b_{e_i} Y⟩ − (X ↔ Y).
fn m_x<T: Ring>(s: &UnStructure, a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let t = Tensor::from_fn(d, 2, |xy| {
        let mut acc = T::zero();
        for i in 0..d {
            for k in 0..d {
                let u = a.get(&[xy[0], i, k]);
                if !u.is_zero() {
                    acc.add_assign_ref(&(u.clone() * b.get(&[i, xy[1], k]).clone()));
                }
            }
        }
        acc
    });
    let tt = t.permuted(&[1, 0]);
    lam2(s, &t.sub(&tt).expect("same shape"))
}

/// ⟨a_{b_{e_i} e_i} X, Y⟩.
fn m_v<T: Ring>(s: &UnStructure, a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let v: Vec<T> = (0..d)
        .map(|k| {
            let mut acc = T::zero();
            for i in 0..d {
                acc.add_assign_ref(b.get(&[i, i, k]));
            }
            acc
        })
        .collect();
    let t = Tensor::from_fn(d, 2, |xy| {
        let mut acc = T::zero();
        for (k, vk) in v.iter().enumerate() {
            if !vk.is_zero() {
                acc.add_assign_ref(&(vk.clone() * a.get(&[k, xy[0], xy[1]]).clone()));
            }
        }
        acc
    });
    lam2(s, &t)
}

/// α(Y,Z,W) = 2(⟨ξ_Y Z, IW⟩ + ⟨ξ_W Y, IZ⟩ + ⟨ξ_Z W, IY⟩) for a rank-3 ξ, or
/// the same with a leading derivative slot for a rank-4 ∇̃ξ.
fn alpha<T: Ring>(s: &UnStructure, t: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let lead = t.rank() - 3;
    // a(.., y, z, w) = Σ_k t(.., y, z, k)⟨e_k, I e_w⟩.
    let a = Tensor::from_fn(d, t.rank(), |idx| {
        let w = idx[lead + 2];
        let (k, sg) = s.i_apply(w);
        // ⟨e_k, I e_w⟩ is nonzero only for e_k = ±I e_w.
        let v = t.get(&[&idx[..lead + 2], &[k]].concat()).clone();
        if sg > 0 { v } else { -v }
    });
    Tensor::from_fn(d, t.rank(), |idx| {
        let (y, z, w) = (idx[lead], idx[lead + 1], idx[lead + 2]);
        let pre = &idx[..lead];
        let g = |p: usize, q: usize, r: usize| a.get(&[pre, &[p, q, r]].concat()).clone();
        (g(y, z, w) + g(w, y, z) + g(z, w, y)).mul_i64(2)
    })
}

/// 2·[[λ^{2,0}]]-part of the ω-contraction of d²ω on a free jet.
pub fn d2omega_part20<T: Ring>(s: &UnStructure, dx: &Tensor<T>, xi: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let tal = alpha(s, dx);
    let al = alpha(s, xi);
    // (∇_X α)(Y,Z,W) = ∇̃_X α + α(ξ_X Y,Z,W) + α(Y,ξ_X Z,W) + α(Y,Z,ξ_X W).
    let full = Tensor::from_fn(d, 4, |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        let mut acc = tal.get(i).clone();
        for k in 0..d {
            let c1 = xi.get(&[x, y, k]);
            if !c1.is_zero() {
                acc.add_assign_ref(&(c1.clone() * al.get(&[k, z, w]).clone()));
            }
            let c2 = xi.get(&[x, z, k]);
            if !c2.is_zero() {
                acc.add_assign_ref(&(c2.clone() * al.get(&[y, k, w]).clone()));
            }
            let c3 = xi.get(&[x, w, k]);
            if !c3.is_zero() {
                acc.add_assign_ref(&(c3.clone() * al.get(&[y, z, k]).clone()));
            }
        }
        acc
    });
    let mut alt: Tensor<T> = Tensor::zeros(d, 4);
    for (p, sg) in permutations(4) {
        let t = full.permuted(&p);
        for (o, v) in alt.data.iter_mut().zip(&t.data) {
            if !v.is_zero() {
                o.add_assign_ref(&v.mul_i64(sg));
            }
        }
    }
    let c = Tensor::from_fn(d, 2, |zw| {
        let mut acc = T::zero();
        for a in 0..d {
            let (b, sg) = s.i_apply(a);
            // ω(e_b, e_a) = ⟨e_b, I e_a⟩ = sg.
            acc.add_assign_ref(&alt.get(&[b, a, zw[0], zw[1]]).mul_i64(sg));
        }
        acc
    });
    lam2(s, &c)
}

/// The monomial values at a class jet, in [`MONOMIALS`] order.
pub fn monomial_values(s: &UnStructure, j: &ClassJet) -> Vec<Tensor<Int>> {
    let (x1, x2, x3, x4) = (&j.xc[0], &j.xc[1], &j.xc[2], &j.xc[3]);
    vec![
        m_der(s, &j.dxc[0]),
        m_der(s, &j.dxc[2]),
        m_der(s, &j.dxc[3]),
        m_x(s, x3, x1),
        m_x(s, x3, x2),
        m_v(s, x1, x4),
        m_v(s, x2, x4),
        m_v(s, x3, x4),
        m_der(s, &j.dxc[1]),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct D2Relation {
    pub n: usize,
    pub monomials: Vec<String>,
    /// Derived coefficients ("p/q"), normalized to 3 on D1; `None` for a
    /// monomial dropped from the fit.
    pub coefficients: Vec<Option<String>>,
    /// The displayed values, for comparison.
    pub reference: Vec<String>,
    /// Coefficient of the d²ω term itself in the same normalization.
    pub d2omega_coefficient: String,
    pub multiplicity: usize,
    /// The relation also holds on fresh validation jets.
    pub validated: bool,
    #[serde(skip)]
    pub exact: Vec<Option<Rational>>,
}

impl D2Relation {
    pub fn coefficient(&self, label: &str) -> Option<&Rational> {
        let i = MONOMIALS.iter().position(|m| *m == label)?;
        self.exact[i].as_ref()
    }

    /// Coefficients that differ from the displayed ones.
    pub fn mismatches(&self) -> Vec<&'static str> {
        let r = reference_coefficients(self.n);
        MONOMIALS
            .iter()
            .zip(&self.exact)
            .zip(&r)
            .filter(|((_, c), r)| c.as_ref().map(|c| c != *r).unwrap_or(false))
            .map(|((m, _), _)| *m)
            .collect()
    }
}

const FIT_SAMPLES: u64 = 4;
const CHECK_SAMPLES: u64 = 2;

/// Recover the relation at `n` ≥ 3. At n = 3 the ξ₃⊙ξ₁ monomial is left
/// out: it is proportional to another monomial there and would make the
/// relation space two-dimensional.
pub fn derive_d2omega_relation(n: usize) -> Result<D2Relation> {
    derive_d2omega_relation_seeded(n, 0)
}

/// As [`derive_d2omega_relation`], drawing the fitting jets from `seed`.
/// The result is the same for every seed unless a draw is degenerate.
pub fn derive_d2omega_relation_seeded(n: usize, seed: u64) -> Result<D2Relation> {
    let base = 0xd2_0000u64.wrapping_add(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(17 * n as u64);
    if n < 3 {
        return Err(Error::Domain("the d²ω relation needs n >= 3".into()));
    }
    let s = UnStructure::get(n)?;
    let active: Vec<usize> = (0..MONOMIALS.len()).filter(|&i| !(n == 3 && MONOMIALS[i] == "xi3.xi1")).collect();
    let ncols = active.len() + 1;
    let sample = |k: u64| -> Result<Vec<Vec<Rational>>> {
        let j = random_class_jet(n, base.wrapping_add(k))?;
        let phi = d2omega_part20(s, &j.dxi(), &j.xi());
        let mons = monomial_values(s, &j);
        let mut cols: Vec<&Tensor<Int>> = vec![&phi];
        cols.extend(active.iter().map(|&i| &mons[i]));
        Ok((0..phi.data.len()).map(|e| cols.iter().map(|c| c.data[e].to_rational()).collect()).collect())
    };
    let mut rows = Vec::new();
    for k in 0..FIT_SAMPLES {
        rows.extend(sample(k)?);
    }
    let ns = nullspace(&rows, ncols);
    if ns.len() != 1 {
        return Err(Error::RelationMultiplicity(ns.len()));
    }
    let v = &ns[0];
    let d1 = active.iter().position(|&i| MONOMIALS[i] == "D1").expect("D1 active") + 1;
    if v[d1] == Rational::zero() {
        return Err(Error::Domain("relation does not involve D1".into()));
    }
    let scale = Rational::from_i64(3) / v[d1].clone();
    let norm: Vec<Rational> = v.iter().map(|x| x.clone() * scale.clone()).collect();
    let mut validated = true;
    for k in 0..CHECK_SAMPLES {
        for row in sample(1000 + k)? {
            let mut acc = Rational::zero();
            for (a, b) in row.iter().zip(&norm) {
                acc += a.clone() * b.clone();
            }
            validated &= acc == Rational::zero();
        }
    }
    let mut exact = vec![None; MONOMIALS.len()];
    for (slot, &i) in active.iter().enumerate() {
        exact[i] = Some(norm[slot + 1].clone());
    }
    Ok(D2Relation {
        n,
        monomials: MONOMIALS.iter().map(|m| m.to_string()).collect(),
        coefficients: exact.iter().map(|c| c.as_ref().map(format_rational)).collect(),
        reference: reference_coefficients(n).iter().map(format_rational).collect(),
        d2omega_coefficient: format_rational(&norm[0]),
        multiplicity: ns.len(),
        validated,
        exact,
    })
}

/// How the two Ric*_AH formulas differ on free jets: the [[λ^{2,0}]]-parts
/// of ricstar-AH-a and 2·ricstar-AH-b differ by a multiple of the d²ω part
/// plus relation monomials. The derivative monomials are eliminated with
/// the relation, so the expression is unique.
#[derive(Clone, Debug, Serialize)]
pub struct FormulaDependence {
    pub n: usize,
    /// The difference lies in the span of the d²ω part and the relation
    /// monomials (D2 excluded).
    pub in_span: bool,
    pub d2omega_coefficient: Option<String>,
    /// (monomial, coefficient) for the nonzero monomial coefficients.
    pub monomials: Vec<(String, String)>,
}

pub fn formula_dependence(n: usize) -> Result<FormulaDependence> {
    use crate::formulas::{eval_raw, part_of, FormulaId, Inputs, Part, Terms};
    if n < 3 {
        return Err(Error::Domain("the d²ω relation needs n >= 3".into()));
    }
    let s = UnStructure::get(n)?;
    let mons: Vec<usize> = (0..MONOMIALS.len() - 1).collect();
    let ncols = 2 + mons.len();
    let mut rows = Vec::new();
    for k in 0..FIT_SAMPLES + CHECK_SAMPLES {
        let j = random_class_jet(n, 0xdef0_0000 + 31 * n as u64 + k)?;
        let (dx, xi) = (j.dxi(), j.xi());
        let de = Tensor::zeros(s.d, 2);
        let inp = Inputs { dxi: &dx, u: &xi, v: &xi, de: &de };
        let a = eval_raw(s, FormulaId::RicstarAhA, &inp, Terms::ALL)?;
        let b = eval_raw(s, FormulaId::RicstarAhB, &inp, Terms::ALL)?;
        let la = part_of(s, a.tensor(), Part::L20)?;
        let lb = part_of(s, b.tensor(), Part::L20)?;
        let phi = d2omega_part20(s, &dx, &xi);
        let mv = monomial_values(s, &j);
        for e in 0..la.len() {
            let mut r = vec![(la[e] - lb[e] - lb[e]).to_rational(), phi.data[e].to_rational()];
            r.extend(mons.iter().map(|&m| mv[m].data[e].to_rational()));
            rows.push(r);
        }
    }
    // Add the constraints "D1 = D3 = D4 = 0" to pick the representative.
    for name in ["D1", "D3", "D4"] {
        let i = MONOMIALS.iter().position(|m| *m == name).expect("known monomial");
        let mut r = vec![Rational::zero(); ncols];
        r[2 + i] = Rational::one();
        rows.push(r);
    }
    let ns = nullspace(&rows, ncols);
    let with_diff: Vec<&Vec<Rational>> = ns.iter().filter(|v| v[0] != Rational::zero()).collect();
    let Some(v) = with_diff.first() else {
        return Ok(FormulaDependence { n, in_span: false, d2omega_coefficient: None, monomials: vec![] });
    };
    // diff = −(v_φ φ + Σ v_j M_j)/v_0.
    let scale = -(Rational::one() / v[0].clone());
    let monomials = mons
        .iter()
        .filter_map(|&m| {
            let c = v[2 + m].clone() * scale.clone();
            (c != Rational::zero()).then(|| (MONOMIALS[m].to_string(), format_rational(&c)))
        })
        .collect();
    Ok(FormulaDependence {
        n,
        in_span: with_diff.len() == 1,
        d2omega_coefficient: Some(format_rational(&(v[1].clone() * scale))),
        monomials,
    })
}
