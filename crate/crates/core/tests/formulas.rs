use curvlab::audit::checks::{nearly_kahler_jet, verify_beta, verify_einstein};
use curvlab::curvature::{CurvSpace, ModuleName};
use curvlab::formulas::{component_of, eval, eval_terms, part_of, FormulaId, Part, Target, Terms, Value};
use curvlab::scalar::{Rational, Ring};
use curvlab::structure::UnStructure;
use curvlab::tensor::Tensor;
use curvlab::torsion::{random_jet, GHClass, TorsionJet};
use proptest::prelude::*;

fn q(a: i64) -> Rational {
    Rational::from_i64(a)
}

fn bil(id: FormulaId, jet: &TorsionJet) -> Tensor<Rational> {
    eval(id, jet).unwrap().bilinear().unwrap().clone()
}

fn metric(d: usize, c: Rational) -> Tensor<Rational> {
    Tensor::from_fn(d, 2, |i| if i[0] == i[1] { c.clone() } else { Rational::zero() })
}

fn transpose(b: &Tensor<Rational>) -> Tensor<Rational> {
    Tensor::from_fn(b.dim(), 2, |i| b.get(&[i[1], i[0]]).clone())
}

/// b(IX, IY).
fn ii(s: &UnStructure, b: &Tensor<Rational>) -> Tensor<Rational> {
    Tensor::from_fn(b.dim(), 2, |i| {
        let (x, sx) = s.i_apply(i[0]);
        let (y, sy) = s.i_apply(i[1]);
        b.get(&[x, y]).clone() * q(sx * sy)
    })
}

fn sub(a: &Tensor<Rational>, b: &Tensor<Rational>) -> Tensor<Rational> {
    Tensor::from_fn(a.dim(), a.rank(), |i| a.get(i).clone() - b.get(i).clone())
}

fn half(a: &Tensor<Rational>) -> Tensor<Rational> {
    Tensor::from_fn(a.dim(), a.rank(), |i| a.get(i).clone() / q(2))
}

fn all_zero(t: &Tensor<Rational>) -> bool {
    t.data.iter().all(|x| x.is_zero())
}

fn jets(n: usize, count: u64) -> Vec<TorsionJet> {
    (0..count).map(|seed| random_jet(n, &GHClass::un_classes(n), 500 + seed).unwrap()).collect()
}

#[test]
fn formula_labels_round_trip() {
    for id in FormulaId::ALL {
        assert_eq!(FormulaId::parse(id.label()).unwrap(), id);
    }
    assert!(FormulaId::parse("ricastsh").is_err());
    assert_eq!(Target::parse("l20").unwrap(), Target::Part(Part::L20));
    assert_eq!(Target::parse("C7").unwrap(), Target::Module(ModuleName::C7));
}

#[test]
fn kahler_einstein_anchor() {
    // ξ = 0, ∇̄ξ = 0, dη̂ = λω: Ric = Ric* = nλ·g.
    for n in 2..=5 {
        let s = UnStructure::get(n).unwrap();
        for l in [q(1), q(-2), Rational::new(1.into(), 3.into())] {
            let mut jet = TorsionJet::zero(n).unwrap();
            jet.d_eta_hat = s.omega.map(|x| x.to_rational() * l.clone());
            let want = metric(s.d, l.clone() * q(n as i64));
            assert_eq!(bil(FormulaId::RicSu, &jet).data, want.data, "n={}", n);
            assert_eq!(bil(FormulaId::RicstarSu, &jet).data, want.data, "n={}", n);
        }
        assert!(verify_einstein(n).unwrap().iter().all(|p| p.ric_is_n_lambda_g && p.ricstar_is_n_lambda_g));
    }
}

#[test]
fn nearly_kahler_is_einstein() {
    // Ric = 5α·g, Ric* = α·g with α = |w₁⁺|² + |w₁⁻|², at (1,0) and (3,4).
    for (wp, wm) in [(1, 0), (3, 4)] {
        let jet = nearly_kahler_jet(wp, wm).unwrap();
        let alpha = q(wp * wp + wm * wm);
        assert_eq!(bil(FormulaId::RicSu, &jet).data, metric(6, alpha.clone() * q(5)).data);
        assert_eq!(bil(FormulaId::RicstarSu, &jet).data, metric(6, alpha).data);
    }
}

#[test]
fn zero_jet_gives_zero() {
    for n in 2..=3 {
        let jet = TorsionJet::zero(n).unwrap();
        for id in FormulaId::ALL.into_iter().filter(|f| f.check_n(n).is_ok()) {
            assert!(all_zero(eval(id, &jet).unwrap().tensor()), "{} n={}", id, n);
        }
    }
}

#[test]
fn four_dimensional_formulas_reject_other_n() {
    let jet = TorsionJet::zero(3).unwrap();
    assert!(eval(FormulaId::Beta4d, &jet).is_err());
    assert!(eval(FormulaId::K1k2_4d, &jet).is_err());
    assert!(component_of(FormulaId::RicSu, &jet, Target::Part(Part::PsiPlus)).is_err());
    assert!(eval(FormulaId::Beta4d, &TorsionJet::zero(2).unwrap()).is_ok());
}

#[test]
fn target_kind_must_match_formula() {
    let jet = TorsionJet::zero(3).unwrap();
    assert!(component_of(FormulaId::Pi1Jet, &jet, Target::Part(Part::L20)).is_err());
    assert!(component_of(FormulaId::RicSu, &jet, Target::Module(ModuleName::C8)).is_err());
    assert!(eval(FormulaId::Pi1Jet, &jet).unwrap().bilinear().is_err());
}

#[test]
fn ricci_difference_displays_agree() {
    for n in 2..=4 {
        for jet in jets(n, if n == 4 { 4 } else { 20 }) {
            let diff = sub(&bil(FormulaId::RicstarSu, &jet), &bil(FormulaId::RicSu, &jet));
            assert_eq!(bil(FormulaId::RicDiffMin, &jet).data, diff.data, "n={}", n);
            assert_eq!(bil(FormulaId::RicDiffLc, &jet).data, diff.data, "n={}", n);
        }
    }
}

/// Single-class jets for each U(n) class, a few seeds each.
fn class_jets(n: usize) -> Vec<TorsionJet> {
    GHClass::un_classes(n)
        .into_iter()
        .flat_map(|c| (0..3).map(move |seed| random_jet(n, &[c], 900 + seed).unwrap()))
        .collect()
}

/// The anti-Hermitian displays are rewritten with the integrability
/// relations, which free jets do not satisfy. They agree with the full
/// formulas on the symmetric anti-Hermitian part always, and on every part
/// of the quadratic terms of a single class.
#[test]
fn anti_hermitian_displays_match_full_formulas() {
    let h = Rational::new(1.into(), 2.into());
    for n in 2..=3 {
        let s = UnStructure::get(n).unwrap();
        let cases = jets(n, 10).into_iter().map(|j| (j, Terms::ALL)).chain(class_jets(n).into_iter().map(|j| (j, Terms::QUAD)));
        for (jet, terms) in cases {
            let ev = |id| eval_terms(id, &jet, terms).unwrap().tensor().clone();
            let rs_ah = half(&sub(&ev(FormulaId::RicstarSu), &ii(s, &ev(FormulaId::RicstarSu))));
            let r_ah = half(&sub(&ev(FormulaId::RicSu), &ii(s, &ev(FormulaId::RicSu))));
            // ricstar-AH-a is 2 Ric*_AH, ricstar-AH-b is Ric*_AH, ric-AH is 2 Ric_AH.
            let pairs = [
                (ev(FormulaId::RicstarAhA).scale(&h), &rs_ah),
                (ev(FormulaId::RicstarAhB), &rs_ah),
                (ev(FormulaId::RicAh).scale(&h), &r_ah),
            ];
            let parts: &[Part] = if terms == Terms::QUAD { &[Part::L20, Part::S20] } else { &[Part::S20] };
            for (k, (lhs, rhs)) in pairs.iter().enumerate() {
                for &p in parts {
                    assert_eq!(part_of(s, lhs, p).unwrap(), part_of(s, rhs, p).unwrap(), "display {} {:?} n={}", k, p, n);
                }
            }
        }
    }
}

#[test]
fn symmetry_types() {
    for n in 2..=3 {
        let s = UnStructure::get(n).unwrap();
        for jet in jets(n, 5) {
            let h = bil(FormulaId::HermDiff, &jet);
            assert_eq!(ii(s, &h).data, h.data, "herm-diff is Hermitian, n={}", n);
            let a = bil(FormulaId::RicstarAhA, &jet);
            assert_eq!(ii(s, &a).data, a.scale(&q(-1)).data);
            assert_eq!(transpose(&a).data, a.scale(&q(-1)).data, "Ric*_AH is skew, n={}", n);
            let r = bil(FormulaId::RicAh, &jet);
            assert_eq!(ii(s, &r).data, r.scale(&q(-1)).data);
            assert_eq!(transpose(&r).data, r.data, "Ric_AH is symmetric, n={}", n);
        }
    }
}

#[test]
fn ricci_quadratic_terms_symmetric_per_class() {
    // Ric is symmetric only through the integrability relations; the
    // single-class quadratic terms already are.
    for n in 2..=3 {
        for jet in class_jets(n) {
            let ric = eval_terms(FormulaId::RicSu, &jet, Terms::QUAD).unwrap().tensor().clone();
            assert_eq!(transpose(&ric).data, ric.data, "n={}", n);
        }
    }
}

#[test]
fn pi1_jet_lands_in_lambda2_tensor_uperp() {
    for n in 2..=3 {
        let cs = CurvSpace::get(n).unwrap();
        for jet in jets(n, 5) {
            let Value::Pi1(x) = eval(FormulaId::Pi1Jet, &jet).unwrap() else { panic!("pi1-jet value") };
            let v = cs.from_tensor(&x);
            assert_eq!(cs.to_tensor(&v).data, x.data, "skew in both pairs, n={}", n);
            let doubled: Vec<Rational> = v.iter().map(|a| a.clone() * q(2)).collect();
            assert_eq!(cs.pi1_2(&v), doubled, "second pair in u(n)^⊥, n={}", n);
        }
    }
}

#[test]
fn hermitian_difference_symmetric_part_is_beta() {
    let checks = verify_beta(0..20).unwrap();
    assert!(checks.iter().all(|c| c.symmetric_part_is_beta_g));
}

#[test]
fn component_examples() {
    let n = 3;
    let s = UnStructure::get(n).unwrap();
    // dη̂ with a (2,0)+(0,2) part only feeds the skew anti-Hermitian part.
    let mut jet = TorsionJet::zero(n).unwrap();
    let b = s.uperp_basis()[0].map(|x| x.to_rational());
    jet.d_eta_hat = b;
    let l20 = component_of(FormulaId::RicstarSu, &jet, Target::Part(Part::L20)).unwrap();
    assert!(!all_zero(&l20));
    let s20 = component_of(FormulaId::RicSu, &jet, Target::Part(Part::S20)).unwrap();
    assert!(all_zero(&s20));
    let r = component_of(FormulaId::RicSu, &jet, Target::Part(Part::Scalar)).unwrap();
    assert!(all_zero(&r));
    // Kähler modules are never reached through π₂.
    let j = random_jet(n, &GHClass::un_classes(n), 1).unwrap();
    assert!(all_zero(&component_of(FormulaId::Pi1Jet, &j, Target::Module(ModuleName::K1)).unwrap()));
}

#[test]
fn parts_of_the_metric() {
    let s = UnStructure::get(3).unwrap();
    let g = metric(6, q(1));
    assert_eq!(part_of(s, &g, Part::Scalar).unwrap(), vec![q(6)]);
    assert!(part_of(s, &g, Part::L11).unwrap().iter().all(|x| x.is_zero()));
    assert!(part_of(s, &g, Part::L20).unwrap().iter().all(|x| x.is_zero()));
    assert!(part_of(s, &g, Part::S20).unwrap().iter().all(|x| x.is_zero()));
    assert!(part_of(s, &Tensor::<Rational>::zeros(6, 3), Part::Scalar).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn term_groups_add_up(seed in any::<u64>(), n in 2usize..=3) {
        let jet = random_jet(n, &GHClass::un_classes(n), seed).unwrap();
        for id in [FormulaId::RicSu, FormulaId::RicstarSu, FormulaId::HermDiff, FormulaId::Pi1Jet] {
            let all = eval_terms(id, &jet, Terms::ALL).unwrap();
            let d = eval_terms(id, &jet, Terms::DETA).unwrap();
            let l = eval_terms(id, &jet, Terms::LIN).unwrap();
            let qd = eval_terms(id, &jet, Terms::QUAD).unwrap();
            let sum = d.tensor().add(l.tensor()).unwrap().add(qd.tensor()).unwrap();
            prop_assert_eq!(&sum.data, &all.tensor().data);
        }
    }

    #[test]
    fn quadratic_terms_are_homogeneous(seed in any::<u64>()) {
        let mut jet = random_jet(3, &GHClass::un_classes(3), seed).unwrap();
        let q1 = eval_terms(FormulaId::RicstarSu, &jet, Terms::QUAD).unwrap();
        jet.xi = jet.xi.scale(&q(3));
        let q3 = eval_terms(FormulaId::RicstarSu, &jet, Terms::QUAD).unwrap();
        prop_assert_eq!(q3.tensor().data.clone(), q1.tensor().scale(&q(9)).data);
    }

    #[test]
    fn hermitian_difference_needs_torsion(seed in any::<u64>(), n in 2usize..=3) {
        // Without torsion Ric* − Ric vanishes for every dη̂.
        let mut jet = random_jet(n, &GHClass::un_classes(n), seed).unwrap();
        let d = jet.xi.dim();
        jet.xi = Tensor::zeros(d, 3);
        jet.dxi = Tensor::zeros(d, 4);
        prop_assert!(all_zero(&bil(FormulaId::RicDiffMin, &jet)));
        prop_assert!(all_zero(&bil(FormulaId::HermDiff, &jet)));
    }
}
