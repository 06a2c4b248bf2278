use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, Uniform};
use serde::{Deserialize, Serialize};

/// Laws of the mixing weights `w^f` (factors) and `w^e` (errors) in the
/// scale-mixture-of-normals design.
///
/// | population      | `w^f`                | `w^e`                |
/// |-----------------|----------------------|----------------------|
/// | `normal`        | 1                    | 1                    |
/// | `uniform_chisq` | Uniform(0, 1)        | chi-squared(1)       |
/// | `t2`            | invGamma(1, 1)       | invGamma(1, 1)       |
/// | `cauchy`        | invGamma(1/2, 1/2)   | invGamma(1/2, 1/2)   |
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    Normal,
    UniformChisq,
    T2,
    Cauchy,
}

impl Population {
    pub const ALL: [Population; 4] =
        [Population::Normal, Population::UniformChisq, Population::T2, Population::Cauchy];

    pub fn as_str(self) -> &'static str {
        match self {
            Population::Normal => "normal",
            Population::UniformChisq => "uniform_chisq",
            Population::T2 => "t2",
            Population::Cauchy => "cauchy",
        }
    }

    /// Both weights are the constant 1.
    pub fn is_degenerate(self) -> bool {
        matches!(self, Population::Normal)
    }

    pub fn factor_law(self) -> WeightLaw {
        match self {
            Population::Normal => WeightLaw::One,
            Population::UniformChisq => WeightLaw::Uniform(Uniform::new(0.0, 1.0).expect("valid range")),
            Population::T2 => WeightLaw::InverseGamma(InverseGamma::new(1.0, 1.0)),
            Population::Cauchy => WeightLaw::InverseGamma(InverseGamma::new(0.5, 0.5)),
        }
    }

    pub fn error_law(self) -> WeightLaw {
        match self {
            Population::Normal => WeightLaw::One,
            Population::UniformChisq => WeightLaw::ChiSquared(ChiSquared::new(1.0).expect("valid dof")),
            Population::T2 => WeightLaw::InverseGamma(InverseGamma::new(1.0, 1.0)),
            Population::Cauchy => WeightLaw::InverseGamma(InverseGamma::new(0.5, 0.5)),
        }
    }
}

/// Law of a single positive mixing weight.
#[derive(Debug, Clone, Copy)]
pub enum WeightLaw {
    One,
    Uniform(Uniform<f64>),
    ChiSquared(ChiSquared<f64>),
    InverseGamma(InverseGamma),
}

impl WeightLaw {
    pub fn is_constant(&self) -> bool {
        matches!(self, WeightLaw::One)
    }
}

impl Distribution<f64> for WeightLaw {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            WeightLaw::One => 1.0,
            WeightLaw::Uniform(d) => d.sample(rng),
            WeightLaw::ChiSquared(d) => d.sample(rng),
            WeightLaw::InverseGamma(d) => d.sample(rng),
        }
    }
}

impl std::str::FromStr for Population {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Population::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown population '{s}' (expected normal, uniform_chisq, t2 or cauchy)"))
    }
}

/// Inverse gamma with density proportional to `w^{-(shape+1)} exp(-scale/w)`,
/// sampled as `1 / Gamma(shape, 1/scale)`.
#[derive(Debug, Clone, Copy)]
pub struct InverseGamma {
    gamma: Gamma<f64>,
}

impl InverseGamma {
    /// Panics unless `shape` and `scale` are positive and finite.
    pub fn new(shape: f64, scale: f64) -> Self {
        let gamma = Gamma::new(shape, 1.0 / scale).expect("inverse gamma needs positive shape and scale");
        Self { gamma }
    }
}

impl Distribution<f64> for InverseGamma {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let g = self.gamma.sample(rng);
            // a zero Gamma draw is representable for tiny shapes; resample
            if g > 0.0 {
                return 1.0 / g;
            }
        }
    }
}
