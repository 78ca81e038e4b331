//! Ensemble choices as they appear in configs, resolved per dims tuple.

use serde::{Deserialize, Serialize};
use tensorfree::rmt::{self, EnsembleKind, EnsembleSpec};
use tensorfree::MultipartiteMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Gue,
    Goe,
    /// `legs` are 1-based.
    TensorGue {
        legs: Vec<usize>,
    },
    /// `W = G G* / N` with `N = round(D / c)`.
    Wishart {
        #[serde(default = "unit")]
        c: f64,
    },
    Ginibre,
    DiagonalGrid,
    RankOneProjector,
}

fn unit() -> f64 {
    1.0
}

impl Model {
    pub fn spec(&self, dims: &[usize], seed: u64) -> anyhow::Result<EnsembleSpec> {
        let d: usize = dims.iter().product();
        let kind = match self {
            Model::Gue => EnsembleKind::Gue,
            Model::Goe => EnsembleKind::Goe,
            Model::TensorGue { legs } => EnsembleKind::TensorGue { legs: legs.clone() },
            Model::Wishart { c } => {
                if !(*c > 0.0 && c.is_finite()) {
                    anyhow::bail!("Wishart ratio c = {c} must be positive");
                }
                EnsembleKind::Wishart { n: ((d as f64 / c).round() as usize).max(1) }
            }
            Model::Ginibre => EnsembleKind::GinibreComplex,
            Model::DiagonalGrid => EnsembleKind::DiagonalGrid,
            Model::RankOneProjector => EnsembleKind::RankOneProjector,
        };
        Ok(EnsembleSpec::new(kind, dims.to_vec(), seed)?)
    }

    pub fn is_hermitian(&self) -> bool {
        !matches!(self, Model::Ginibre)
    }

    /// Whether the distribution is invariant under local orthogonal
    /// conjugation only (so transposes are not interchangeable).
    pub fn is_orthogonal_invariant(&self) -> bool {
        matches!(self, Model::Goe)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conjugation {
    #[default]
    None,
    LocalUnitary,
    LocalOrthogonal,
}

/// One member of a random family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Member {
    #[serde(flatten)]
    pub model: Model,
    #[serde(default)]
    pub conjugate: Conjugation,
}

/// Seeds for member `i`: the draw and the conjugating unitary use
/// different streams of the generator family.
fn member_seed(seed: u64, i: usize) -> (u64, u64) {
    let base = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2 * i as u64 + 1);
    (base, base ^ 0xD1B5_4A32_D192_ED03)
}

/// Independent draws of every member for one trial.
pub struct FamilySampler {
    specs: Vec<(EnsembleSpec, Conjugation, u64)>,
}

impl FamilySampler {
    pub fn new(members: &[Member], dims: &[usize], seed: u64) -> anyhow::Result<Self> {
        let specs = members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (s, c) = member_seed(seed, i);
                Ok((m.model.spec(dims, s)?, m.conjugate, c))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(FamilySampler { specs })
    }

    pub fn sample(&self, trial: u64) -> tensorfree::Result<Vec<MultipartiteMatrix>> {
        self.specs
            .iter()
            .map(|(spec, conj, cseed)| {
                let x = rmt::sample(spec, trial)?;
                match conj {
                    Conjugation::None => Ok(x),
                    Conjugation::LocalUnitary => rmt::local_unitary_conjugate(&x, *cseed, trial),
                    Conjugation::LocalOrthogonal => rmt::local_orthogonal_conjugate(&x, *cseed, trial),
                }
            })
            .collect()
    }
}
