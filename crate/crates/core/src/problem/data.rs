//! Initial and Dirichlet boundary data.

use serde::{Deserialize, Serialize};

use super::coefficients::{domain_center, PullBack};
use super::ProblemError;
use crate::grid::SpatialGrid;
use crate::smoothstep::RadialStep;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant {
        value: f64,
    },
    /// `offset + slope . x`
    Affine {
        slope: Vec<f64>,
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude * sin(pi * frequency * x_1)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    /// `amplitude * tanh((x_1 - center) / width)`
    Tanh {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `amplitude * sign(x_1)`, zero at the origin.
    Sign {
        amplitude: f64,
    },
    /// `base + height * b(|x - center|)` with `b` equal to 1 on `B_{radius/2}`,
    /// falling smoothly to 0 at `radius`.
    Bump {
        base: f64,
        height: f64,
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    #[serde(skip)]
    Sampled(Vec<f64>),
}

impl InitialData {
    pub fn values(&self, space: &SpatialGrid) -> Result<Vec<f64>, ProblemError> {
        if let InitialData::Sampled(v) = self {
            if v.len() != space.len() {
                return Err(ProblemError::Config(format!(
                    "sampled initial data has {} values for {} cells",
                    v.len(),
                    space.len()
                )));
            }
            return Ok(v.clone());
        }
        if let InitialData::Affine { slope, .. } = self {
            if slope.len() != space.dim() {
                return Err(ProblemError::Config(format!(
                    "affine slope has {} components in dimension {}",
                    slope.len(),
                    space.dim()
                )));
            }
        }
        let center = match self {
            InitialData::Bump {
                center: Some(c), ..
            } => c.clone(),
            _ => domain_center(space),
        };
        let mut x = vec![0.0; space.dim()];
        Ok((0..space.len())
            .map(|flat| {
                space.center_into(flat, &mut x);
                self.eval(&x, &center)
            })
            .collect())
    }

    fn eval(&self, x: &[f64], center: &[f64]) -> f64 {
        match self {
            InitialData::Constant { value } => *value,
            InitialData::Affine { slope, offset } => {
                offset + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            }
            InitialData::Sine {
                amplitude,
                frequency,
            } => amplitude * (std::f64::consts::PI * frequency * x[0]).sin(),
            InitialData::Tanh {
                amplitude,
                width,
                center,
            } => amplitude * ((x[0] - center) / width).tanh(),
            InitialData::Sign { amplitude } => {
                if x[0] > 0.0 {
                    *amplitude
                } else if x[0] < 0.0 {
                    -amplitude
                } else {
                    0.0
                }
            }
            InitialData::Bump {
                base,
                height,
                radius,
                ..
            } => {
                let r = x
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                base + height * RadialStep::new(radius / 2.0, *radius).value(r)
            }
            InitialData::Sampled(_) => unreachable!("handled in values"),
        }
    }
}

/// Dirichlet data imposed on the outermost ring of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    /// Boundary cells keep their initial values.
    Frozen,
    Constant {
        value: f64,
    },
    /// `offset + slope . x + rate * t`
    Affine {
        slope: Vec<f64>,
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        rate: f64,
    },
    /// `base + rate * t`
    Shifted {
        base: Box<BoundaryData>,
        rate: f64,
    },
    /// `value_scale * base(map(t, x))`
    Transformed {
        base: Box<BoundaryData>,
        value_scale: f64,
        map: PullBack,
    },
}

impl BoundaryData {
    pub fn shifted(self, rate: f64) -> Self {
        BoundaryData::Shifted {
            base: Box::new(self),
            rate,
        }
    }

    pub fn transformed(self, value_scale: f64, map: PullBack) -> Self {
        BoundaryData::Transformed {
            base: Box::new(self),
            value_scale,
            map,
        }
    }

    /// Boundary value at `(t, x)` for a cell whose initial value was `initial`.
    pub fn value(&self, t: f64, x: &[f64], initial: f64) -> f64 {
        match self {
            BoundaryData::Frozen => initial,
            BoundaryData::Constant { value } => *value,
            BoundaryData::Affine {
                slope,
                offset,
                rate,
            } => offset + slope.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + rate * t,
            BoundaryData::Shifted { base, rate } => base.value(t, x, initial) + rate * t,
            BoundaryData::Transformed {
                base,
                value_scale,
                map,
            } => value_scale * base.value(map.time(t), &map.point(x), initial / value_scale),
        }
    }
}
