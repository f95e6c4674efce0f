use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CsError;
use crate::lie::{c64, coordinate_component, AlgField, GroupElement, GroupTag, Mat};

/// A factor group with its matrix size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub tag: GroupTag,
    pub size: usize,
}

impl FactorSpec {
    pub const SU2: FactorSpec = FactorSpec { tag: GroupTag::SU2, size: 2 };

    /// Number of chart coordinates the coefficient atoms may read.
    pub fn n_coordinates(&self) -> usize {
        match self.tag {
            GroupTag::SU2 => 4,
            GroupTag::VectorGroupRd => self.size - 1,
            GroupTag::UnitaryN => self.size,
        }
    }

    /// Number of coordinate 1-forms on the factor.
    pub fn n_differentials(&self) -> usize {
        match self.tag {
            GroupTag::SU2 => 3,
            GroupTag::VectorGroupRd => self.size - 1,
            GroupTag::UnitaryN => self.size,
        }
    }
}

/// One factor of a coefficient function of the chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Atom {
    Pow { coord: usize, exp: u32 },
    Sin { coord: usize, freq: f64, #[serde(default)] phase: f64 },
    Cos { coord: usize, freq: f64, #[serde(default)] phase: f64 },
}

impl Atom {
    fn coord(&self) -> usize {
        match self {
            Atom::Pow { coord, .. } | Atom::Sin { coord, .. } | Atom::Cos { coord, .. } => *coord,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Atom::Pow { coord, exp } => x[coord].powi(exp as i32),
            Atom::Sin { coord, freq, phase } => (freq * x[coord] + phase).sin(),
            Atom::Cos { coord, freq, phase } => (freq * x[coord] + phase).cos(),
        }
    }
}

fn one() -> f64 {
    1.0
}

/// scale × Π atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub atoms: Vec<Atom>,
}

impl Coefficient {
    pub fn constant(scale: f64) -> Self {
        Coefficient { scale, atoms: Vec::new() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * self.atoms.iter().map(|a| a.eval(x)).product::<f64>()
    }
}

/// coefficient(x) · T_generator · dx_differential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionTerm {
    pub coefficient: Coefficient,
    pub generator: usize,
    pub differential: usize,
}

/// A 𝔤-valued 1-form on the base M of the trivial bundle M × G.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSpec {
    pub base: FactorSpec,
    pub fiber: FactorSpec,
    pub terms: Vec<ConnectionTerm>,
}

impl ConnectionSpec {
    pub fn zero(base: FactorSpec, fiber: FactorSpec) -> Self {
        ConnectionSpec { base, fiber, terms: Vec::new() }
    }

    pub fn from_json(s: &str) -> Result<Self, CsError> {
        let spec: ConnectionSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<(), CsError> {
        let n_gen = self.fiber.tag.algebra_basis(self.fiber.size).len();
        for t in &self.terms {
            if t.generator >= n_gen {
                return Err(CsError::Spec(format!("generator {} of {n_gen}", t.generator)));
            }
            if t.differential >= self.base.n_differentials() {
                return Err(CsError::Spec(format!("differential {}", t.differential)));
            }
            if t.coefficient.atoms.iter().any(|a| a.coord() >= self.base.n_coordinates()) {
                return Err(CsError::Spec("atom coordinate out of range".into()));
            }
        }
        Ok(())
    }

    /// Random smooth connection: `n_terms` terms with a constant or a
    /// trigonometric coefficient of unit frequency.
    pub fn random<R: Rng + ?Sized>(base: FactorSpec, fiber: FactorSpec, n_terms: usize, scale: f64, rng: &mut R) -> Self {
        let n_gen = fiber.tag.algebra_basis(fiber.size).len();
        let terms = (0..n_terms)
            .map(|_| {
                let coord = rng.random_range(0..base.n_coordinates());
                let phase = rng.random_range(0.0..std::f64::consts::TAU);
                let atoms = match rng.random_range(0..3) {
                    0 => Vec::new(),
                    1 => vec![Atom::Sin { coord, freq: 1.0, phase }],
                    _ => vec![Atom::Cos { coord, freq: 1.0, phase }],
                };
                ConnectionTerm {
                    coefficient: Coefficient { scale: scale * rng.sample::<f64, _>(StandardNormal), atoms },
                    generator: rng.random_range(0..n_gen),
                    differential: rng.random_range(0..base.n_differentials()),
                }
            })
            .collect();
        ConnectionSpec { base, fiber, terms }
    }

    pub fn field(&self) -> Result<ConnectionField, CsError> {
        self.validate()?;
        Ok(ConnectionField { basis: self.fiber.tag.algebra_basis(self.fiber.size), spec: self.clone() })
    }
}

/// Evaluator of a connection specification.
#[derive(Clone, Debug)]
pub struct ConnectionField {
    spec: ConnectionSpec,
    basis: Vec<Mat>,
}

impl ConnectionField {
    pub fn spec(&self) -> &ConnectionSpec {
        &self.spec
    }
}

impl AlgField for ConnectionField {
    fn eval(&self, at: &GroupElement, v: &Mat) -> Mat {
        let n = self.spec.fiber.size;
        let mut out = Mat::zeros(n, n);
        if self.spec.terms.is_empty() {
            return out;
        }
        let x = at.coordinates();
        let local = at.inverse().matrix() * v;
        for t in &self.spec.terms {
            let dx = coordinate_component(self.spec.base.tag, &local, t.differential);
            if dx != 0.0 {
                out += &self.basis[t.generator] * c64(t.coefficient.eval(&x) * dx, 0.0);
            }
        }
        out
    }

    fn size(&self) -> usize {
        self.spec.fiber.size
    }
}
