//! Norms of every class and formula component of a single jet.

use serde::Serialize;

use crate::curvature::ModuleName;
use crate::error::Result;
use crate::formulas::{component_of, FormulaId, Part, Target};
use crate::scalar::{format_rational, Rational, Ring};
use crate::tensor::Tensor;
use crate::torsion::{gh_project, GHClass, TorsionJet};

#[derive(Clone, Debug, Serialize)]
pub struct NormEntry {
    pub name: String,
    /// Full contraction ⟨t, t⟩, exact.
    pub norm2: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentNorm {
    pub formula: String,
    pub target: String,
    pub norm2: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub n: usize,
    pub classes: Vec<NormEntry>,
    pub eta_hat_norm2: String,
    pub d_eta_hat_norm2: String,
    pub dxi_norm2: String,
    pub components: Vec<ComponentNorm>,
}

fn norm2(t: &Tensor<Rational>) -> Rational {
    t.data.iter().fold(Rational::zero(), |acc, x| acc + x.clone() * x.clone())
}

pub fn decompose(jet: &TorsionJet) -> Result<Decomposition> {
    jet.validate()?;
    let n = jet.n;
    let classes = GHClass::ALL
        .iter()
        .filter(|c| c.valid_at(n))
        .map(|&c| {
            let p = gh_project(n, &jet.xi, c)?;
            Ok(NormEntry { name: c.label().to_string(), norm2: format_rational(&norm2(&p)) })
        })
        .collect::<Result<Vec<_>>>()?;
    let eta2 = jet.eta_hat.iter().fold(Rational::zero(), |acc, x| acc + x.clone() * x.clone());
    let mut components = Vec::new();
    for id in FormulaId::ALL.iter().copied().filter(|f| f.check_n(n).is_ok()) {
        let targets: Vec<Target> = if id == FormulaId::Pi1Jet {
            ModuleName::MAIN.iter().filter(|m| m.valid_at(n) && !m.in_kahler()).map(|&m| Target::Module(m)).collect()
        } else {
            Part::ALL.iter().filter(|p| p.dim(n) > 0 && (n == 2 || !matches!(p, Part::PsiPlus | Part::PsiMinus))).map(|&p| Target::Part(p)).collect()
        };
        for t in targets {
            let c = component_of(id, jet, t)?;
            let label = match t {
                Target::Part(p) => p.label().to_string(),
                Target::Module(m) => m.label().to_string(),
            };
            components.push(ComponentNorm { formula: id.label().to_string(), target: label, norm2: format_rational(&norm2(&c)) });
        }
    }
    Ok(Decomposition {
        n,
        classes,
        eta_hat_norm2: format_rational(&eta2),
        d_eta_hat_norm2: format_rational(&norm2(&jet.d_eta_hat)),
        dxi_norm2: format_rational(&norm2(&jet.dxi)),
        components,
    })
}
