//! Intrinsic torsion: the space T*⊗u(n)^⊥, its Gray–Hervella classes, the
//! SU(3) and SU(2) refinements, the η-action and first-order torsion jets.
//!
//! A torsion tensor is stored as `xi[x,y,z] = ⟨ξ_{e_x} e_y, e_z⟩`; a jet
//! derivative as `dxi[a,x,y,z] = ⟨((∇_{e_a})ξ)_{e_x} e_y, e_z⟩`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::scalar::{format_rational, parse_rational, Int, Rational, Ring};
use crate::structure::UnStructure;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GHClass {
    W1,
    W2,
    W3,
    W4,
    W1Plus,
    W1Minus,
    W2Plus,
    W2Minus,
    WPlus,
    WMinus,
}

impl GHClass {
    pub const ALL: [GHClass; 10] = [
        GHClass::W1,
        GHClass::W2,
        GHClass::W3,
        GHClass::W4,
        GHClass::W1Plus,
        GHClass::W1Minus,
        GHClass::W2Plus,
        GHClass::W2Minus,
        GHClass::WPlus,
        GHClass::WMinus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GHClass::W1 => "W1",
            GHClass::W2 => "W2",
            GHClass::W3 => "W3",
            GHClass::W4 => "W4",
            GHClass::W1Plus => "W1+",
            GHClass::W1Minus => "W1-",
            GHClass::W2Plus => "W2+",
            GHClass::W2Minus => "W2-",
            GHClass::WPlus => "Wplus",
            GHClass::WMinus => "Wminus",
        }
    }

    /// Short tag used in table row ids ("1", "2+", "+", …).
    pub fn tag(self) -> &'static str {
        match self {
            GHClass::W1 => "1",
            GHClass::W2 => "2",
            GHClass::W3 => "3",
            GHClass::W4 => "4",
            GHClass::W1Plus => "1+",
            GHClass::W1Minus => "1-",
            GHClass::W2Plus => "2+",
            GHClass::W2Minus => "2-",
            GHClass::WPlus => "+",
            GHClass::WMinus => "-",
        }
    }

    pub fn parse(s: &str) -> Result<GHClass> {
        let t = s.trim();
        GHClass::ALL
            .iter()
            .copied()
            .find(|c| c.label().eq_ignore_ascii_case(t) || c.tag() == t)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    pub fn valid_at(self, n: usize) -> bool {
        match self {
            GHClass::W1 | GHClass::W3 => n >= 3,
            GHClass::W2 | GHClass::W4 => n >= 2,
            GHClass::W1Plus | GHClass::W1Minus | GHClass::W2Plus | GHClass::W2Minus => n == 3,
            GHClass::WPlus | GHClass::WMinus => n == 2,
        }
    }

    /// The U(n) class containing a refined class.
    pub fn parent(self) -> Option<GHClass> {
        match self {
            GHClass::W1Plus | GHClass::W1Minus => Some(GHClass::W1),
            GHClass::W2Plus | GHClass::W2Minus => Some(GHClass::W2),
            _ => None,
        }
    }

    /// The four U(n) classes present at `n`.
    pub fn un_classes(n: usize) -> Vec<GHClass> {
        [GHClass::W1, GHClass::W2, GHClass::W3, GHClass::W4].into_iter().filter(|c| c.valid_at(n)).collect()
    }

    fn check(self, n: usize) -> Result<()> {
        if self.valid_at(n) {
            Ok(())
        } else {
            Err(Error::InvalidClass { label: self.label().into(), n })
        }
    }
}

impl fmt::Display for GHClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Exact class subspaces of T*⊗u(n)^⊥ ⊂ ⊗³R^{2n}, in full tensor
/// coordinates with the plain componentwise inner product.
#[derive(Debug)]
pub struct TorsionModel {
    pub n: usize,
    pub total: Subspace,
    classes: BTreeMap<GHClass, Subspace>,
}

static TORSION: [OnceLock<TorsionModel>; 4] = [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];

fn unit_weights(len: usize) -> Vec<Int> {
    vec![Int(1); len]
}

fn to_vec(t: &Tensor<Int>) -> Vec<Int> {
    t.data.clone()
}

fn from_vec(d: usize, v: &[Int]) -> Tensor<Int> {
    Tensor::from_vec(d, 3, v.to_vec()).expect("rank-3 data")
}

impl TorsionModel {
    pub fn get(n: usize) -> Result<&'static TorsionModel> {
        let s = UnStructure::get(n)?;
        Ok(TORSION[n - 2].get_or_init(|| TorsionModel::build(s)))
    }

    fn build(s: &UnStructure) -> TorsionModel {
        let d = s.d;
        let len = d * d * d;
        let w = unit_weights(len);
        let up = s.uperp_basis();
        let mut tbasis = Vec::new();
        for a in 0..d {
            for u in &up {
                let t = Tensor::from_fn(d, 3, |i| if i[0] == a { *u.get(&i[1..]) } else { Int(0) });
                tbasis.push(to_vec(&t));
            }
        }
        let total = Subspace::from_basis(tbasis.clone(), w.clone());
        let l_op = |v: &[Int]| -> Vec<Int> {
            let t = from_vec(d, v);
            to_vec(&s.precompose_i(&s.precompose_i(&t, 0), 1))
        };
        let w12_span: Vec<Vec<Int>> =
            tbasis.iter().map(|v| v.iter().zip(l_op(v)).map(|(a, b)| *a - b).collect()).collect();
        let w34_span: Vec<Vec<Int>> =
            tbasis.iter().map(|v| v.iter().zip(l_op(v)).map(|(a, b)| *a + b).collect()).collect();
        let w12 = Subspace::from_span(&w12_span, w.clone());
        let w34 = Subspace::from_span(&w34_span, w.clone());

        // W1: totally skew elements of W1+W2.
        let swap01: Vec<Vec<Rational>> = w12
            .basis
            .iter()
            .map(|v| {
                let t = from_vec(d, v);
                let u = t.permuted(&[1, 0, 2]);
                t.data.iter().zip(&u.data).map(|(a, b)| (*a + *b).to_rational()).collect()
            })
            .collect();
        let w1 = w12.kernel_of(&swap01);
        let w2 = w12.complement_of(&w1);

        // W4: u(n)^⊥-parts of X ↦ θ ∧ X^♭ type tensors.
        let mut w4_span = Vec::new();
        for k in 0..d {
            let t = Tensor::from_fn(d, 3, |i| {
                Int(((i[0] == i[1] && i[2] == k) as i128) - ((i[0] == i[2] && i[1] == k) as i128))
            });
            let it = s.precompose_i(&s.precompose_i(&t, 1), 2);
            let p = t.sub(&it).expect("same shape");
            let pv = to_vec(&p);
            let lv = l_op(&pv);
            w4_span.push(pv.iter().zip(lv).map(|(a, b)| *a + b).collect::<Vec<Int>>());
        }
        let w4 = Subspace::from_span(&w4_span, w.clone());
        let w3 = w34.complement_of(&w4);

        let mut classes = BTreeMap::new();
        if s.n == 3 {
            for (c, plus, minus) in
                [(&w1, GHClass::W1Plus, GHClass::W1Minus), (&w2, GHClass::W2Plus, GHClass::W2Minus)]
            {
                let (sk, sy): (Vec<_>, Vec<_>) = c
                    .basis
                    .iter()
                    .map(|v| {
                        let r = r_form(s, &from_vec(d, v));
                        let rt = r.permuted(&[1, 0]);
                        let skew = r.data.iter().zip(&rt.data).map(|(a, b)| (*a - *b).to_rational()).collect();
                        let sym = r.data.iter().zip(&rt.data).map(|(a, b)| (*a + *b).to_rational()).collect();
                        (skew, sym)
                    })
                    .unzip();
                classes.insert(plus, c.kernel_of(&sk));
                classes.insert(minus, c.kernel_of(&sy));
            }
        }
        if s.n == 2 {
            for (cls, psi) in [(GHClass::WPlus, &s.psi_minus), (GHClass::WMinus, &s.psi_plus)] {
                let span: Vec<Vec<Int>> = (0..d)
                    .map(|a| to_vec(&Tensor::from_fn(d, 3, |i| if i[0] == a { *psi.get(&i[1..]) } else { Int(0) })))
                    .collect();
                classes.insert(cls, Subspace::from_span(&span, w.clone()));
            }
        }
        classes.insert(GHClass::W1, w1);
        classes.insert(GHClass::W2, w2);
        classes.insert(GHClass::W3, w3);
        classes.insert(GHClass::W4, w4);
        TorsionModel { n: s.n, total, classes }
    }

    pub fn class(&self, c: GHClass) -> Result<&Subspace> {
        c.check(self.n)?;
        Ok(&self.classes[&c])
    }

    /// Integer basis of a class, each vector a flattened rank-3 tensor.
    pub fn class_basis(&self, c: GHClass) -> Result<&[Vec<Int>]> {
        Ok(&self.class(c)?.basis)
    }

    pub fn dim(&self, c: GHClass) -> usize {
        self.classes.get(&c).map(|s| s.dim()).unwrap_or(0)
    }
}

/// r(a)(x,y) = ½⟨x⌟ψ₊, y⌟a⟩ evaluated on a = ∇ω = −ξω, scaled by 2 to stay
/// integral: returns Σ_{ij} ψ₊(x,i,j)·a(y,i,j)/2 with a = 2⟨ξ_·,I·⟩.
fn r_form(s: &UnStructure, xi: &Tensor<Int>) -> Tensor<Int> {
    let d = s.d;
    let a = nabla_omega(s, xi);
    Tensor::from_fn(d, 2, |i| {
        let mut acc = Int(0);
        for p in 0..d {
            for q in 0..d {
                let v = *s.psi_plus.get(&[i[0], p, q]);
                if v.0 != 0 {
                    acc = acc + v * *a.get(&[i[1], p, q]);
                }
            }
        }
        acc
    })
}

/// ∇ω(X;Y,Z) = 2⟨ξ_X Y, IZ⟩.
pub fn nabla_omega<T: Ring>(s: &UnStructure, xi: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    Tensor::from_fn(d, 3, |i| {
        let mut acc = T::zero();
        for k in 0..d {
            let c = s.i_mat(k, i[2]);
            if c != 0 {
                acc.add_assign_ref(&xi.get(&[i[0], i[1], k]).mul_i64(2 * c));
            }
        }
        acc
    })
}

/// The bilinear form r(∇ω) of a torsion tensor (up to a positive factor),
/// exposed for the SU(3) split checks.
pub fn r_of(s: &UnStructure, xi: &Tensor<Rational>) -> Tensor<Rational> {
    let d = s.d;
    let a = nabla_omega(s, xi);
    Tensor::from_fn(d, 2, |i| {
        let mut acc = Rational::zero();
        for p in 0..d {
            for q in 0..d {
                let v = s.psi_plus.get(&[i[0], p, q]).0;
                if v != 0 {
                    acc += a.get(&[i[1], p, q]).mul_i64(v as i64);
                }
            }
        }
        acc
    })
}

fn check_xi<T: Ring>(s: &UnStructure, xi: &Tensor<T>) -> Result<()> {
    if xi.rank() != 3 || xi.dim() != s.d {
        return Err(Error::Shape(format!("torsion must be rank 3 over dimension {}", s.d)));
    }
    Ok(())
}

/// Orthogonal projection onto a class.
pub fn gh_project(n: usize, xi: &Tensor<Rational>, c: GHClass) -> Result<Tensor<Rational>> {
    let s = UnStructure::get(n)?;
    check_xi(s, xi)?;
    let m = TorsionModel::get(n)?;
    let p = m.class(c)?.project(&xi.data);
    Tensor::from_vec(s.d, 3, p)
}

/// ± part of a W1- or W2-pure tensor at n = 3.
pub fn su3_split(xi: &Tensor<Rational>, sign: Sign) -> Result<Tensor<Rational>> {
    let s = UnStructure::get(3)?;
    if xi.dim() != 6 {
        return Err(Error::Domain("su3_split requires n = 3".into()));
    }
    check_xi(s, xi)?;
    let m = TorsionModel::get(3)?;
    let in_w1 = m.class(GHClass::W2)?.project(&xi.data).iter().all(|x| x.is_zero());
    let in_w2 = m.class(GHClass::W1)?.project(&xi.data).iter().all(|x| x.is_zero());
    let rest = m.class(GHClass::W3)?.project(&xi.data).iter().chain(m.class(GHClass::W4)?.project(&xi.data).iter()).all(|x| x.is_zero());
    if !rest || !(in_w1 || in_w2) {
        return Err(Error::Domain("su3_split expects a W1- or W2-pure tensor".into()));
    }
    let c = match (in_w1, sign) {
        (true, Sign::Plus) => GHClass::W1Plus,
        (true, Sign::Minus) => GHClass::W1Minus,
        (false, Sign::Plus) => GHClass::W2Plus,
        (false, Sign::Minus) => GHClass::W2Minus,
    };
    gh_project(3, xi, c)
}

/// (ξ₊, ξ₋) with ⟨ξ_X Y, Z⟩ = ½ξ₊(X)ψ₋(Y,Z) − ½ξ₋(X)ψ₊(Y,Z), at n = 2.
pub fn su2_split(xi: &Tensor<Rational>) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let s = UnStructure::get(2)?;
    if xi.dim() != 4 {
        return Err(Error::Domain("su2_split requires n = 2".into()));
    }
    check_xi(s, xi)?;
    let d = s.d;
    let half = Rational::new(1.into(), 2.into());
    let mut plus = vec![Rational::zero(); d];
    let mut minus = vec![Rational::zero(); d];
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                let v = xi.get(&[x, y, z]);
                plus[x] += v * Rational::from_i64(s.psi_minus.get(&[y, z]).0 as i64) * &half;
                minus[x] -= v * Rational::from_i64(s.psi_plus.get(&[y, z]).0 as i64) * &half;
            }
        }
    }
    Ok((plus, minus))
}

/// Inverse of [`su2_split`].
pub fn su2_join(plus: &[Rational], minus: &[Rational]) -> Result<Tensor<Rational>> {
    let s = UnStructure::get(2)?;
    let half = Rational::new(1.into(), 2.into());
    Ok(Tensor::from_fn(4, 3, |i| {
        (&plus[i[0]] * Rational::from_i64(s.psi_minus.get(&[i[1], i[2]]).0 as i64)
            - &minus[i[0]] * Rational::from_i64(s.psi_plus.get(&[i[1], i[2]]).0 as i64))
            * &half
    }))
}

/// (ξ_X·t)(Y_1,…,Y_k) = −Σ_i t(Y_1,…,ξ_X Y_i,…,Y_k).
pub fn endo_action<T: Ring>(xi: &Tensor<T>, x: &[T], t: &Tensor<T>) -> Result<Tensor<T>> {
    let d = xi.dim();
    if xi.rank() != 3 || x.len() != d || (t.rank() > 0 && t.dim() != d) {
        return Err(Error::Shape("endo_action: incompatible shapes".into()));
    }
    // m[y][z] = ⟨ξ_X e_y, e_z⟩.
    let mut m = vec![T::zero(); d * d];
    for (a, xa) in x.iter().enumerate() {
        if xa.is_zero() {
            continue;
        }
        for yz in 0..d * d {
            m[yz].add_assign_ref(&(xa.clone() * xi.data[a * d * d + yz].clone()));
        }
    }
    endo_matrix_action(&m, d, t)
}

/// Action of the endomorphism A (with `m[y*d+z] = ⟨A e_y, e_z⟩`) on a
/// covariant tensor: (A·t)(…) = −Σ_i t(…, A Y_i, …).
pub fn endo_matrix_action<T: Ring>(m: &[T], d: usize, t: &Tensor<T>) -> Result<Tensor<T>> {
    let k = t.rank();
    let mut src = vec![0usize; k];
    Ok(Tensor::from_fn(d, k, |idx| {
        let mut acc = T::zero();
        for s in 0..k {
            src.copy_from_slice(idx);
            for z in 0..d {
                let c = &m[idx[s] * d + z];
                if c.is_zero() {
                    continue;
                }
                src[s] = z;
                acc.add_assign_ref(&(c.clone() * t.get(&src).clone()));
            }
        }
        -acc
    }))
}

/// (η·ξ)(x;y,z,w) = η̂(x)·(I·ξ)(y,z,w), the action of η_X = η̂(X) I on ξ.
pub fn eta_action<T: Ring>(s: &UnStructure, eta_hat: &[T], xi: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    let ixi = i_action_on_torsion(s, xi);
    Tensor::from_fn(d, 4, |i| {
        if eta_hat[i[0]].is_zero() {
            T::zero()
        } else {
            eta_hat[i[0]].clone() * ixi.get(&i[1..]).clone()
        }
    })
}

/// (I·ξ)(y,z,w) = −2⟨ξ_y z, I w⟩ − ξ(Iy, z, w).
pub fn i_action_on_torsion<T: Ring>(s: &UnStructure, xi: &Tensor<T>) -> Tensor<T> {
    let d = s.d;
    Tensor::from_fn(d, 3, |i| {
        let (y, z, w) = (i[0], i[1], i[2]);
        let mut acc = T::zero();
        for k in 0..d {
            let a = s.i_mat(k, w);
            if a != 0 {
                acc.add_assign_ref(&xi.get(&[y, z, k]).mul_i64(-2 * a));
            }
            let b = s.i_mat(k, y);
            if b != 0 {
                acc.add_assign_ref(&xi.get(&[k, z, w]).mul_i64(-b));
            }
        }
        acc
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// ∇̃ξ, derivative along the minimal U(n)-connection.
    Unitary,
    /// ∇̄ξ, derivative along the minimal SU(n)-connection.
    Special,
}

/// First-order torsion data at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionJet {
    pub n: usize,
    pub xi: Tensor<Rational>,
    /// ∇̄ξ.
    pub dxi: Tensor<Rational>,
    pub eta_hat: Vec<Rational>,
    pub d_eta_hat: Tensor<Rational>,
}

impl TorsionJet {
    pub fn zero(n: usize) -> Result<TorsionJet> {
        let s = UnStructure::get(n)?;
        let d = s.d;
        Ok(TorsionJet {
            n,
            xi: Tensor::zeros(d, 3),
            dxi: Tensor::zeros(d, 4),
            eta_hat: vec![Rational::zero(); d],
            d_eta_hat: Tensor::zeros(d, 2),
        })
    }

    /// Checks the intrinsic-torsion invariants and shapes.
    pub fn validate(&self) -> Result<()> {
        let s = UnStructure::get(self.n)?;
        let d = s.d;
        check_xi(s, &self.xi)?;
        if self.dxi.rank() != 4 || self.dxi.dim() != d {
            return Err(Error::Jet(format!("Dxi must be rank 4 over dimension {}", d)));
        }
        if self.eta_hat.len() != d {
            return Err(Error::Jet(format!("eta_hat must have {} components", d)));
        }
        if self.d_eta_hat.rank() != 2 || self.d_eta_hat.dim() != d || !self.d_eta_hat.is_alternating() {
            return Err(Error::Jet("d_eta_hat must be an alternating 2-tensor".into()));
        }
        if !is_torsion(s, &self.xi) {
            return Err(Error::Jet("xi is not in T*⊗u(n)^⊥".into()));
        }
        for a in 0..d {
            if !is_torsion(s, &slice4(&self.dxi, a)) {
                return Err(Error::Jet(format!("Dxi[{}] is not in T*⊗u(n)^⊥", a)));
            }
        }
        Ok(())
    }
}

/// The rank-3 tensor dxi[a,·,·,·].
pub fn slice4<T: Ring>(t: &Tensor<T>, a: usize) -> Tensor<T> {
    let d = t.dim();
    let m = d * d * d;
    Tensor::from_vec(d, 3, t.data[a * m..(a + 1) * m].to_vec()).expect("slice")
}

/// Skew in the last two slots and anti-commuting with I.
pub fn is_torsion<T: Ring>(s: &UnStructure, xi: &Tensor<T>) -> bool {
    let sw = xi.permuted(&[0, 2, 1]);
    if xi.data.iter().zip(&sw.data).any(|(a, b)| !(a.clone() + b.clone()).is_zero()) {
        return false;
    }
    let ii = s.precompose_i(&s.precompose_i(xi, 1), 2);
    xi.data.iter().zip(&ii.data).all(|(a, b)| (a.clone() + b.clone()).is_zero())
}

/// Converts between ∇̄ξ and ∇̃ξ: ∇̃ξ = ∇̄ξ − η·ξ.
pub fn connection_shift(jet: &TorsionJet, target: Derivative) -> Result<Tensor<Rational>> {
    let s = UnStructure::get(jet.n)?;
    let e = eta_action(s, &jet.eta_hat, &jet.xi);
    match target {
        Derivative::Unitary => jet.dxi.sub(&e),
        Derivative::Special => jet.dxi.add(&e),
    }
}

fn project_sum(m: &TorsionModel, classes: &[GHClass], v: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); v.len()];
    for &c in classes {
        for (o, p) in out.iter_mut().zip(m.classes[&c].project(v)) {
            *o += p;
        }
    }
    out
}

/// Deterministic random jet with torsion and derivative supported on the
/// requested classes. Components start as integers in [−9, 9] and are then
/// projected.
pub fn random_jet(n: usize, classes: &[GHClass], seed: u64) -> Result<TorsionJet> {
    let s = UnStructure::get(n)?;
    let m = TorsionModel::get(n)?;
    for &c in classes {
        c.check(n)?;
    }
    for &a in classes {
        for &b in classes {
            if a.parent() == Some(b) || (a != b && is_su2_overlap(a, b)) {
                return Err(Error::Domain(format!("overlapping classes {} and {}", a, b)));
            }
        }
    }
    let mut cl: Vec<GHClass> = classes.to_vec();
    cl.sort();
    cl.dedup();
    let d = s.d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |len: usize| -> Vec<Rational> { (0..len).map(|_| Rational::from_i64(rng.gen_range(-9..=9))).collect() };
    let xi = Tensor::from_vec(d, 3, project_sum(m, &cl, &draw(d * d * d)))?;
    let mut dxi_data = Vec::with_capacity(d.pow(4));
    for _ in 0..d {
        dxi_data.extend(project_sum(m, &cl, &draw(d * d * d)));
    }
    let dxi = Tensor::from_vec(d, 4, dxi_data)?;
    let eta_hat = draw(d);
    let raw = draw(d * d);
    let d_eta_hat = Tensor::from_fn(d, 2, |i| &raw[i[0] * d + i[1]] - &raw[i[1] * d + i[0]]);
    Ok(TorsionJet { n, xi, dxi, eta_hat, d_eta_hat })
}

/// Wplus/Wminus overlap every U(n) class at n = 2.
fn is_su2_overlap(a: GHClass, b: GHClass) -> bool {
    let su2 = |c: GHClass| matches!(c, GHClass::WPlus | GHClass::WMinus);
    su2(a) != su2(b)
}

pub const JET_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct JetDoc {
    version: u32,
    n: usize,
    convention: String,
    xi: Vec<String>,
    #[serde(rename = "Dxi")]
    dxi: Vec<String>,
    eta_hat: Vec<String>,
    d_eta_hat: Vec<String>,
}

impl TorsionJet {
    /// Versioned JSON document; arrays are flattened row-major and entries
    /// are exact rationals written as "p/q".
    pub fn to_json(&self) -> Result<String> {
        let f = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>();
        let doc = JetDoc {
            version: JET_FORMAT_VERSION,
            n: self.n,
            convention: crate::CONVENTION.to_string(),
            xi: f(&self.xi.data),
            dxi: f(&self.dxi.data),
            eta_hat: f(&self.eta_hat),
            d_eta_hat: f(&self.d_eta_hat.data),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<TorsionJet> {
        let doc: JetDoc = serde_json::from_str(text)
            .map_err(|e| Error::Jet(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
        if doc.version != JET_FORMAT_VERSION {
            return Err(Error::Jet(format!("unsupported version {}", doc.version)));
        }
        if doc.convention != crate::CONVENTION {
            return Err(Error::Jet("field `convention`: does not match this build's convention string".into()));
        }
        let s = UnStructure::get(doc.n).map_err(|_| Error::Jet(format!("field `n`: {} is out of range", doc.n)))?;
        let d = s.d;
        let parse = |field: &str, v: &[String], len: usize| -> Result<Vec<Rational>> {
            if v.len() != len {
                return Err(Error::Jet(format!("field `{}`: expected {} entries, found {}", field, len, v.len())));
            }
            v.iter()
                .enumerate()
                .map(|(i, x)| {
                    parse_rational(x).ok_or_else(|| Error::Jet(format!("field `{}`[{}]: cannot parse {:?} as p/q", field, i, x)))
                })
                .collect()
        };
        let jet = TorsionJet {
            n: doc.n,
            xi: Tensor::from_vec(d, 3, parse("xi", &doc.xi, d.pow(3))?)?,
            dxi: Tensor::from_vec(d, 4, parse("Dxi", &doc.dxi, d.pow(4))?)?,
            eta_hat: parse("eta_hat", &doc.eta_hat, d)?,
            d_eta_hat: Tensor::from_vec(d, 2, parse("d_eta_hat", &doc.d_eta_hat, d * d)?)?,
        };
        jet.validate()?;
        Ok(jet)
    }
}
