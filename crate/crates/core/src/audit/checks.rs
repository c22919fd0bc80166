//! Einstein checks: nearly Kähler Einstein constants, the Kähler
//! Einstein anchor, and the consequence checks (a)-(d) as zero-rank statements.

use serde::Serialize;

use crate::curvature::ModuleName;
use crate::error::Result;
use crate::formulas::{eval, FormulaId, Part};
use crate::par::Exec;
use crate::scalar::{format_rational, Rational, Ring};
use crate::structure::UnStructure;
use crate::tensor::Tensor;
use crate::torsion::{GHClass, TorsionJet};

use super::tables::{custom_column, row_images, witness, ColSpec, ColTarget, RowKind, RowSpec};

#[derive(Clone, Debug, Serialize)]
pub struct GrayPoint {
    pub w_plus: i64,
    pub w_minus: i64,
    pub alpha: i64,
    pub ric_is_5_alpha_g: bool,
    pub ricstar_is_alpha_g: bool,
    pub xixi_is_alpha_g: bool,
}

impl GrayPoint {
    pub fn holds(&self) -> bool {
        self.ric_is_5_alpha_g && self.ricstar_is_alpha_g && self.xixi_is_alpha_g
    }
}

/// Nearly Kähler jet at n = 3: ⟨Y, ξ_X Z⟩ = ½(w⁻ψ₊ − w⁺ψ₋)(X,Y,Z), ∇̄ξ = 0,
/// η̂ = 0.
pub fn nearly_kahler_jet(w_plus: i64, w_minus: i64) -> Result<TorsionJet> {
    let s = UnStructure::get(3)?;
    let half = Rational::new(1.into(), 2.into());
    // ⟨ξ_X Y, Z⟩ = −⟨Y, ξ_X Z⟩.
    let xi = Tensor::from_fn(s.d, 3, |i| {
        let v = s.psi_plus.get(i).0 as i64 * w_minus - s.psi_minus.get(i).0 as i64 * w_plus;
        -Rational::from_i64(v) * half.clone()
    });
    let mut jet = TorsionJet::zero(3)?;
    jet.xi = xi;
    jet.validate()?;
    Ok(jet)
}

fn is_multiple_of_g(b: &Tensor<Rational>, c: &Rational) -> bool {
    let d = b.dim();
    (0..d * d).all(|xy| {
        let want = if xy / d == xy % d { c.clone() } else { Rational::zero() };
        b.data[xy] == want
    })
}

pub const GRAY_GRID: [(i64, i64); 7] = [(0, 0), (1, 0), (0, 1), (2, 0), (0, 2), (1, 1), (3, 4)];

pub fn verify_gray() -> Result<Vec<GrayPoint>> {
    GRAY_GRID
        .iter()
        .map(|&(wp, wm)| {
            let jet = nearly_kahler_jet(wp, wm)?;
            let alpha = wp * wp + wm * wm;
            let a = Rational::from_i64(alpha);
            let ric = eval(FormulaId::RicSu, &jet)?;
            let ricstar = eval(FormulaId::RicstarSu, &jet)?;
            let d = jet.xi.dim();
            let xixi = Tensor::from_fn(d, 2, |xy| {
                let mut acc = Rational::zero();
                for ik in 0..d * d {
                    acc += jet.xi.data[xy[0] * d * d + ik].clone() * jet.xi.data[xy[1] * d * d + ik].clone();
                }
                acc
            });
            Ok(GrayPoint {
                w_plus: wp,
                w_minus: wm,
                alpha,
                ric_is_5_alpha_g: is_multiple_of_g(ric.bilinear()?, &Rational::from_i64(5 * alpha)),
                ricstar_is_alpha_g: is_multiple_of_g(ricstar.bilinear()?, &a),
                xixi_is_alpha_g: is_multiple_of_g(&xixi, &a),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct EinsteinPoint {
    pub n: usize,
    pub lambda: String,
    pub ric_is_n_lambda_g: bool,
    pub ricstar_is_n_lambda_g: bool,
}

/// ξ = 0, ∇̄ξ = 0, dη̂ = λω gives Ric = Ric* = nλ·g.
pub fn verify_einstein(n: usize) -> Result<Vec<EinsteinPoint>> {
    let s = UnStructure::get(n)?;
    let lambdas = [Rational::from_i64(1), Rational::from_i64(-2), Rational::new(1.into(), 3.into())];
    lambdas
        .iter()
        .map(|l| {
            let mut jet = TorsionJet::zero(n)?;
            jet.d_eta_hat = s.omega.map(|x| x.to_rational() * l.clone());
            let want = l.clone() * Rational::from_i64(n as i64);
            Ok(EinsteinPoint {
                n,
                lambda: format_rational(l),
                ric_is_n_lambda_g: is_multiple_of_g(eval(FormulaId::RicSu, &jet)?.bilinear()?, &want),
                ricstar_is_n_lambda_g: is_multiple_of_g(eval(FormulaId::RicstarSu, &jet)?.bilinear()?, &want),
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RemarkCheck {
    pub row: String,
    pub column: String,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RemarkItem {
    pub id: char,
    pub statement: &'static str,
    /// `None` when the item does not apply at this n.
    pub holds: Option<bool>,
    pub checks: Vec<RemarkCheck>,
}

impl RemarkItem {
    pub fn nonzero(&self) -> Vec<&RemarkCheck> {
        self.checks.iter().filter(|c| c.rank > 0).collect()
    }
}

fn k_minus1(n: usize) -> ColSpec {
    if n == 2 {
        custom_column("K-1", FormulaId::Beta4d, ColTarget::Part(Part::Scalar))
    } else {
        custom_column("K-1", FormulaId::HermDiff, ColTarget::Part(Part::Scalar))
    }
}

fn c5() -> ColSpec {
    custom_column("C5", FormulaId::Pi1Jet, ColTarget::Pi2(ModuleName::C5))
}

/// C6 through the curvature-table formula (no dη̂ term).
fn c6_ah() -> ColSpec {
    custom_column("C6:ricstar-AH-a", FormulaId::RicstarAhA, ColTarget::Part(Part::L20))
}

/// C6 through Ric*_AH of the SU(n) formula, which carries dη̂.
fn c6_su(n: usize) -> Vec<ColSpec> {
    if n == 2 {
        vec![
            custom_column("C6+:ricstar-SU", FormulaId::RicstarSu, ColTarget::Part(Part::PsiMinus)),
            custom_column("C6-:ricstar-SU", FormulaId::RicstarSu, ColTarget::Part(Part::PsiPlus)),
        ]
    } else {
        vec![custom_column("C6:ricstar-SU", FormulaId::RicstarSu, ColTarget::Part(Part::L20))]
    }
}

/// Rows for jets with torsion in `classes` (those valid at n), optionally
/// with Hermitian dη̂.
fn jet_rows(n: usize, classes: &[GHClass], hermitian_deta: bool) -> Vec<RowSpec> {
    let cl: Vec<GHClass> = classes.iter().copied().filter(|c| c.valid_at(n)).collect();
    let mut out = Vec::new();
    if hermitian_deta {
        out.push(RowSpec::new(RowKind::DetaHermitian));
    }
    out.extend(cl.iter().map(|&c| RowSpec::new(RowKind::Deriv(c))));
    out.extend(cl.iter().map(|&c| RowSpec::new(RowKind::Square(c))));
    for (i, &a) in cl.iter().enumerate() {
        out.extend(cl[i + 1..].iter().map(|&b| RowSpec::new(RowKind::Cross(a, b))));
    }
    out
}

fn ranks(n: usize, rows: &[RowSpec], cols: &[ColSpec], exec: Exec) -> Result<Vec<RemarkCheck>> {
    let mut out = Vec::new();
    for row in rows {
        let imgs = row_images::<crate::scalar::Int>(n, row, cols, exec)?;
        for (im, c) in imgs.iter().zip(cols) {
            out.push(RemarkCheck {
                row: row.label.clone(),
                column: c.label.clone(),
                rank: witness(im, c.target_dim(n)?).rank,
            });
        }
    }
    Ok(out)
}

/// The four consequence items at `n` as exact rank statements.
pub fn verify_remarks(n: usize, exec: Exec) -> Result<Vec<RemarkItem>> {
    use GHClass::*;
    let mut items = Vec::new();
    let item = |id, statement, applies: bool, rows: Vec<RowSpec>, cols: Vec<ColSpec>| -> Result<RemarkItem> {
        if !applies {
            return Ok(RemarkItem { id, statement, holds: None, checks: vec![] });
        }
        let checks = ranks(n, &rows, &cols, exec)?;
        Ok(RemarkItem { id, statement, holds: Some(checks.iter().all(|c| c.rank == 0)), checks })
    };
    items.push(item(
        'a',
        "W3-pure torsion gives zero K-1, C5 and C6 components",
        n >= 3,
        jet_rows(n, &[W3], false),
        vec![k_minus1(n), c5(), c6_ah()],
    )?);
    let mut b_cols = vec![c5()];
    b_cols.extend(c6_su(n));
    items.push(item(
        'b',
        "W3+W4 torsion with Hermitian deta gives zero C5 and C6 components",
        true,
        jet_rows(n, &[W3, W4], true),
        b_cols,
    )?);
    items.push(item(
        'c',
        "W1+W2 torsion with Hermitian deta gives zero C6 component",
        true,
        jet_rows(n, &[W1, W2], true),
        c6_su(n),
    )?);
    let mut d_rows = jet_rows(n, &[W2, W4], true);
    if n == 2 {
        d_rows.extend(jet_rows(n, &[WPlus, WMinus], false));
    }
    items.push(item('d', "n = 2 with Hermitian deta gives zero C6+ and C6- components", n == 2, d_rows, c6_su(n))?);
    Ok(items)
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaCheck {
    pub seed: u64,
    /// Symmetric part of herm-diff equals β·g.
    pub symmetric_part_is_beta_g: bool,
    /// The full display equals β·g (needs the Bianchi identity).
    pub full_is_beta_g: bool,
}

/// At n = 2 the Hermitian part of Ric* − Ric is β·g. On free jets only the
/// symmetric part is forced; the skew Hermitian part vanishes on curvature
/// tensors satisfying the Bianchi identity.
pub fn verify_beta(seeds: std::ops::Range<u64>) -> Result<Vec<BetaCheck>> {
    seeds
        .map(|seed| {
            let jet = crate::torsion::random_jet(2, &GHClass::un_classes(2), seed)?;
            let h = eval(FormulaId::HermDiff, &jet)?;
            let h = h.bilinear()?;
            let b = eval(FormulaId::Beta4d, &jet)?;
            let b = b.bilinear()?;
            let sym = h.add(&h.permuted(&[1, 0]))?;
            let b2 = b.add(b)?;
            Ok(BetaCheck { seed, symmetric_part_is_beta_g: sym == b2, full_is_beta_g: h == b })
        })
        .collect()
}

/// Endomorphism A (A[x][y] = ⟨e_x, A e_y⟩) acting as a derivation on a
/// p-form: (A·ψ)(v₁,…) = −Σ_k ψ(…, A v_k, …).
fn derive_form(a: &[Rational], d: usize, psi: &Tensor<Rational>) -> Tensor<Rational> {
    let p = psi.rank();
    let mut out = Tensor::<Rational>::zeros(d, p);
    for (off, v) in psi.data.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        // ψ(…, A v_k, …) picks up ψ_{…w…}·A[w][v_k]; scatter from the
        // nonzero entry with slot k = w to every v_k.
        let mut idx = vec![0usize; p];
        let mut r = off;
        for slot in (0..p).rev() {
            idx[slot] = r % d;
            r /= d;
        }
        for k in 0..p {
            let w = idx[k];
            for vk in 0..d {
                let c = &a[w * d + vk];
                if c.is_zero() {
                    continue;
                }
                let mut j = idx.clone();
                j[k] = vk;
                let o = out.offset(&j);
                out.data[o] -= v.clone() * c.clone();
            }
        }
    }
    out
}

/// Max over X, Y of |⟨R_{X,Y}ψ₊, ψ₋⟩ + 2^{n−1}Ric*(X,IY)|, zero when the
/// volume identity holds.
pub fn volume_identity_holds(r: &crate::curvature::CurvatureTensor) -> Result<bool> {
    let n = r.n;
    let s = UnStructure::get(n)?;
    let d = s.d;
    let rs = crate::curvature::ric_star(r)?;
    let pp = s.psi_plus.map(|x| x.to_rational());
    let pm = s.psi_minus.map(|x| x.to_rational());
    let scale = Rational::from_i64(1i64 << (n - 1));
    for x in 0..d {
        for y in 0..d {
            // ⟨e_z, R_{X,Y} e_w⟩ = R(X,Y,w,z).
            let a: Vec<Rational> = (0..d * d).map(|zw| r.r.get(&[x, y, zw % d, zw / d]).clone()).collect();
            let lhs = derive_form(&a, d, &pp).form_inner(&pm)?;
            let (iy, sg) = s.i_apply(y);
            let rhs = -scale.clone() * rs.get(&[x, iy]).clone() * Rational::from_i64(sg);
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct StructuralReport {
    pub n: usize,
    pub certified: bool,
    pub ranks_match_weyl: bool,
    pub rank_sum: usize,
    pub dim_r: usize,
    pub samples: usize,
    /// π₂(π₁R) = R − P_𝓚 R on every sample.
    pub pi2_pi1_is_perp_projection: bool,
    /// `None` above n = 3, where the check is not run.
    pub volume_identity: Option<bool>,
}

impl StructuralReport {
    pub fn holds(&self) -> bool {
        self.certified
            && self.ranks_match_weyl
            && self.rank_sum == self.dim_r
            && self.pi2_pi1_is_perp_projection
            && self.volume_identity != Some(false)
    }
}

/// Atlas ranks and completeness, plus the projector and volume identities on
/// `samples` random tensors drawn from `seed`.
pub fn verify_structure(n: usize, samples: usize, seed: u64) -> Result<StructuralReport> {
    let cs = crate::curvature::CurvSpace::get(n)?;
    let atlas = crate::curvature::ModuleAtlas::get(n)?;
    let mods = atlas.main_modules();
    let half = Rational::new(1.into(), 2.into());
    let mut pi_ok = true;
    let mut vol_ok = true;
    for k in 0..samples as u64 {
        let r = crate::curvature::random_curvature(n, seed.wrapping_mul(0x9e37_79b9).wrapping_add(0x57_0000 + 97 * n as u64 + k))?;
        let v = r.coords();
        let pi1: Vec<Rational> = cs.pi1_2(&v).into_iter().map(|x| x * half.clone()).collect();
        let lhs = atlas.pi2(&pi1);
        let pk = atlas.project_kahler(&v);
        pi_ok &= lhs.iter().zip(v.iter().zip(&pk)).all(|(l, (a, b))| *l == a.clone() - b.clone());
        if n <= 3 {
            vol_ok &= volume_identity_holds(&r)?;
        }
    }
    Ok(StructuralReport {
        n,
        certified: atlas.certified,
        ranks_match_weyl: mods.iter().all(|m| m.rank == m.name.predicted_dim(n)),
        rank_sum: mods.iter().map(|m| m.rank).sum(),
        dim_r: atlas.dim_r,
        samples,
        pi2_pi1_is_perp_projection: pi_ok,
        volume_identity: (n <= 3).then_some(vol_ok),
    })
}
