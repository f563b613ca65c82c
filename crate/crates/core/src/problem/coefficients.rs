//! Diffusion matrix fields and source terms.

use serde::{Deserialize, Serialize};

use super::quadrature::radial_power_box;
use super::ProblemError;
use crate::grid::{GridField, SpaceTimeGrid, SpatialGrid};

/// A matrix given either as a scalar multiple of the identity or in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixValue {
    Scalar(f64),
    Full(Vec<Vec<f64>>),
}

impl MatrixValue {
    /// Row-major `n x n` entries.
    pub fn to_dense(&self, n: usize) -> Result<Vec<f64>, ProblemError> {
        match self {
            MatrixValue::Scalar(c) => {
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = *c;
                }
                Ok(m)
            }
            MatrixValue::Full(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(ProblemError::BadMatrix(format!(
                        "expected a {n}x{n} matrix, got {rows:?}"
                    )));
                }
                Ok(rows.iter().flatten().copied().collect())
            }
        }
    }
}

/// The matrix pattern `M`; the realized diffusion is `A = epsilon * M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionSpec {
    /// `M = I`.
    Scalar,
    /// One constant matrix everywhere.
    Uniform { matrix: MatrixValue },
    /// `a` on cells with even `sum_d floor(i_d / block)`, `b` on the others.
    Checkerboard {
        block: usize,
        a: MatrixValue,
        b: MatrixValue,
    },
    Negated { base: Box<DiffusionSpec> },
}

impl DiffusionSpec {
    pub fn checkerboard(block: usize, a: f64, b: f64) -> Self {
        DiffusionSpec::Checkerboard {
            block,
            a: MatrixValue::Scalar(a),
            b: MatrixValue::Scalar(b),
        }
    }

    pub fn negated(self) -> Self {
        DiffusionSpec::Negated {
            base: Box::new(self),
        }
    }

    /// Per-cell row-major patterns, `space.len() * n * n` entries.
    pub fn patterns(&self, space: &SpatialGrid) -> Result<Vec<f64>, ProblemError> {
        let n = space.dim();
        match self {
            DiffusionSpec::Scalar => {
                let m = MatrixValue::Scalar(1.0).to_dense(n)?;
                Ok(m.repeat(space.len()))
            }
            DiffusionSpec::Uniform { matrix } => Ok(matrix.to_dense(n)?.repeat(space.len())),
            DiffusionSpec::Checkerboard { block, a, b } => {
                if *block == 0 {
                    return Err(ProblemError::BadMatrix("checkerboard block size is 0".into()));
                }
                let a = a.to_dense(n)?;
                let b = b.to_dense(n)?;
                let mut out = Vec::with_capacity(space.len() * n * n);
                for flat in 0..space.len() {
                    let parity: usize = (0..n).map(|d| space.index_along(flat, d) / block).sum();
                    out.extend_from_slice(if parity.is_multiple_of(2) { &a } else { &b });
                }
                Ok(out)
            }
            DiffusionSpec::Negated { base } => {
                Ok(base.patterns(space)?.into_iter().map(|v| -v).collect())
            }
        }
    }

    /// The distinct matrices the pattern can take.
    pub fn distinct_patterns(&self, n: usize) -> Result<Vec<Vec<f64>>, ProblemError> {
        match self {
            DiffusionSpec::Scalar => Ok(vec![MatrixValue::Scalar(1.0).to_dense(n)?]),
            DiffusionSpec::Uniform { matrix } => Ok(vec![matrix.to_dense(n)?]),
            DiffusionSpec::Checkerboard { a, b, .. } => Ok(vec![a.to_dense(n)?, b.to_dense(n)?]),
            DiffusionSpec::Negated { base } => Ok(base
                .distinct_patterns(n)?
                .into_iter()
                .map(|m| m.into_iter().map(|v| -v).collect())
                .collect()),
        }
    }
}

/// Affine change of variables `(t, x) -> (time_scale t + time_shift, space_scale x + space_shift)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullBack {
    pub time_scale: f64,
    pub time_shift: f64,
    pub space_scale: f64,
    pub space_shift: Vec<f64>,
}

impl PullBack {
    pub fn identity(n: usize) -> Self {
        Self {
            time_scale: 1.0,
            time_shift: 0.0,
            space_scale: 1.0,
            space_shift: vec![0.0; n],
        }
    }

    pub fn time(&self, t: f64) -> f64 {
        self.time_scale * t + self.time_shift
    }

    pub fn point(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.space_shift)
            .map(|(x, s)| self.space_scale * x + s)
            .collect()
    }

    /// The grid whose samples are the images of `grid`'s samples under the map.
    pub fn grid(&self, grid: &SpaceTimeGrid) -> SpaceTimeGrid {
        let neg_shift: Vec<f64> = self.space_shift.iter().map(|s| -s).collect();
        grid.image(1.0 / self.time_scale, 1.0 / self.space_scale)
            .translated(-self.time_shift, &neg_shift)
    }

    pub fn space(&self, space: &SpatialGrid) -> SpatialGrid {
        let origin = self.point(space.origin());
        SpatialGrid::new(space.cells().to_vec(), space.h() * self.space_scale, origin)
            .expect("a valid grid maps to a valid grid")
    }
}

/// The source term `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `coefficient * |x - center|^(-exponent)`; the center defaults to the domain center.
    RadialSingular {
        coefficient: f64,
        exponent: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    #[serde(skip)]
    Sampled(GridField),
    Offset {
        base: Box<SourceSpec>,
        offset: f64,
    },
    /// `value_scale * base(map(t, x))`.
    Transformed {
        base: Box<SourceSpec>,
        value_scale: f64,
        map: PullBack,
    },
}

impl SourceSpec {
    pub fn offset(self, c: f64) -> Self {
        if c == 0.0 {
            return self;
        }
        SourceSpec::Offset {
            base: Box::new(self),
            offset: c,
        }
    }

    pub fn transformed(self, value_scale: f64, map: PullBack) -> Self {
        SourceSpec::Transformed {
            base: Box::new(self),
            value_scale,
            map,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            SourceSpec::Sampled(_) => false,
            SourceSpec::Offset { base, .. } | SourceSpec::Transformed { base, .. } => {
                base.is_time_independent()
            }
            _ => true,
        }
    }

    /// Value of `f` used for each cell at time `t`: the center value, except that
    /// a cell whose closure holds a singular point gets its exact cell average.
    pub fn cell_values(&self, space: &SpatialGrid, t: f64) -> Result<Vec<f64>, ProblemError> {
        match self {
            SourceSpec::Zero => Ok(vec![0.0; space.len()]),
            SourceSpec::Constant { value } => Ok(vec![*value; space.len()]),
            SourceSpec::RadialSingular {
                coefficient,
                exponent,
                center,
            } => {
                let x0 = center.clone().unwrap_or_else(|| domain_center(space));
                let n = space.dim();
                if *exponent >= n as f64 {
                    return Err(ProblemError::Divergent {
                        exponent: *exponent,
                        m: 1.0,
                        n,
                    });
                }
                let mut out = Vec::with_capacity(space.len());
                let mut lo = vec![0.0; n];
                let mut hi = vec![0.0; n];
                for flat in 0..space.len() {
                    cell_box(space, flat, &mut lo, &mut hi);
                    let touches = (0..n).all(|d| lo[d] <= x0[d] && x0[d] <= hi[d]);
                    let v = if touches {
                        radial_power_box(&lo, &hi, &x0, *exponent) / space.cell_volume()
                    } else {
                        let r = dist(&space.center(flat), &x0);
                        r.powf(-exponent)
                    };
                    out.push(coefficient * v);
                }
                Ok(out)
            }
            SourceSpec::Sampled(field) => {
                let mut x = vec![0.0; space.dim()];
                (0..space.len())
                    .map(|flat| {
                        space.center_into(flat, &mut x);
                        Ok(field.interpolate(t, &x)?)
                    })
                    .collect()
            }
            SourceSpec::Offset { base, offset } => Ok(base
                .cell_values(space, t)?
                .into_iter()
                .map(|v| v + offset)
                .collect()),
            SourceSpec::Transformed {
                base,
                value_scale,
                map,
            } => Ok(base
                .cell_values(&map.space(space), map.time(t))?
                .into_iter()
                .map(|v| value_scale * v)
                .collect()),
        }
    }

    /// `(∬_{region} |f|^m)^(1/m)` over `[t_lo, t_hi] x B_r(center)`, with the
    /// spatial integral resolved on `space` and, for time-dependent sources, the
    /// time integral on the slices of `grid`.
    pub fn lm_norm(
        &self,
        m: f64,
        grid: &SpaceTimeGrid,
        region: &crate::grid::ParabolicCylinder,
    ) -> Result<f64, ProblemError> {
        let cells = grid.space().cells_in_ball(&region.ball());
        Ok(self
            .power_integral(m, grid, region.t_lo, region.t_hi, &cells)?
            .powf(1.0 / m))
    }

    /// `(∬ |f|^m)^(1/m)` over the whole grid domain and time interval.
    pub fn lm_norm_domain(&self, m: f64, grid: &SpaceTimeGrid) -> Result<f64, ProblemError> {
        let cells: Vec<usize> = (0..grid.space().len()).collect();
        Ok(self
            .power_integral(m, grid, grid.t_start(), grid.t_end(), &cells)?
            .powf(1.0 / m))
    }

    fn power_integral(
        &self,
        m: f64,
        grid: &SpaceTimeGrid,
        t_lo: f64,
        t_hi: f64,
        cells: &[usize],
    ) -> Result<f64, ProblemError> {
        if !(m >= 1.0) {
            return Err(ProblemError::BadExponent(m));
        }
        let space = grid.space();
        let n = space.dim();
        let vol = space.cell_volume();
        match self {
            SourceSpec::Zero => Ok(0.0),
            SourceSpec::Constant { value } => {
                Ok((t_hi - t_lo) * value.abs().powf(m) * vol * cells.len() as f64)
            }
            SourceSpec::RadialSingular {
                coefficient,
                exponent,
                center,
            } => {
                let s = exponent * m;
                if s >= n as f64 {
                    return Err(ProblemError::Divergent {
                        exponent: *exponent,
                        m,
                        n,
                    });
                }
                let x0 = center.clone().unwrap_or_else(|| domain_center(space));
                let near = 3.0 * space.h() * (n as f64).sqrt();
                let mut lo = vec![0.0; n];
                let mut hi = vec![0.0; n];
                let mut acc = 0.0;
                for &flat in cells {
                    let r = dist(&space.center(flat), &x0);
                    acc += if r < near {
                        cell_box(space, flat, &mut lo, &mut hi);
                        radial_power_box(&lo, &hi, &x0, s)
                    } else {
                        r.powf(-s) * vol
                    };
                }
                Ok((t_hi - t_lo) * coefficient.abs().powf(m) * acc)
            }
            SourceSpec::Transformed {
                base,
                value_scale,
                map,
            } => {
                let jac = map.time_scale * map.space_scale.powi(n as i32);
                let pre = map.grid(grid);
                let (a, b) = (map.time(t_lo), map.time(t_hi));
                Ok(value_scale.abs().powf(m) / jac * base.power_integral(m, &pre, a, b, cells)?)
            }
            _ => {
                // generic midpoint rule on cell values
                let slice_integral = |t: f64| -> Result<f64, ProblemError> {
                    let v = self.cell_values(space, t)?;
                    Ok(vol * cells.iter().map(|&c| v[c].abs().powf(m)).sum::<f64>())
                };
                if self.is_time_independent() {
                    Ok((t_hi - t_lo) * slice_integral(t_lo)?)
                } else {
                    let mut acc = 0.0;
                    for k in grid.slices_in(t_lo, t_hi) {
                        acc += grid.dt() * slice_integral(grid.time(k))?;
                    }
                    Ok(acc)
                }
            }
        }
    }
}

fn cell_box(space: &SpatialGrid, flat: usize, lo: &mut [f64], hi: &mut [f64]) {
    let h = space.h();
    for d in 0..space.dim() {
        let c = space.coord(flat, d);
        lo[d] = c - h / 2.0;
        hi[d] = c + h / 2.0;
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn domain_center(space: &SpatialGrid) -> Vec<f64> {
    (0..space.dim())
        .map(|d| {
            let (lo, hi) = space.bounds(d);
            0.5 * (lo + hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ParabolicCylinder;
    use approx::assert_relative_eq;

    fn unit_grid(cells: usize, h: f64) -> SpaceTimeGrid {
        let space = SpatialGrid::centered(vec![cells], h).unwrap();
        SpaceTimeGrid::new(space, 0.5, 0.0, 1.0).unwrap()
    }

    #[test]
    fn checkerboard_takes_exactly_two_values() {
        let space = SpatialGrid::centered(vec![12, 10], 0.1).unwrap();
        let spec = DiffusionSpec::Checkerboard {
            block: 3,
            a: MatrixValue::Full(vec![vec![1.0, 0.2], vec![0.2, 0.5]]),
            b: MatrixValue::Scalar(0.1),
        };
        let pats = spec.patterns(&space).unwrap();
        let distinct = spec.distinct_patterns(2).unwrap();
        for cell in pats.chunks(4) {
            assert!(distinct.iter().any(|d| d.as_slice() == cell));
        }
        let first = &pats[0..4];
        assert_eq!(first, distinct[0].as_slice());
        // cell (0, 3) is in block (0, 1)
        let flat = space.flat_index(&[0, 3]);
        assert_eq!(&pats[flat * 4..flat * 4 + 4], distinct[1].as_slice());
    }

    #[test]
    fn constant_source_unit_norm() {
        // [0,1] x [0,1] with an aligned grid
        let space = SpatialGrid::new(vec![64], 1.0 / 32.0, vec![-0.5]).unwrap();
        let grid = SpaceTimeGrid::new(space, 0.25, 0.0, 1.0).unwrap();
        let region = ParabolicCylinder::new(0.0, 1.0, 0.5, vec![0.5]).unwrap();
        let f = SourceSpec::Constant { value: -3.0 };
        assert_relative_eq!(f.lm_norm(2.0, &grid, &region).unwrap(), 3.0, max_relative = 1e-12);
        assert_eq!(SourceSpec::Zero.lm_norm(2.0, &grid, &region).unwrap(), 0.0);
    }

    #[test]
    fn singular_source_norm_and_divergence() {
        let grid = unit_grid(400, 1.0 / 128.0);
        let region = ParabolicCylinder::q1(1);
        let f = SourceSpec::RadialSingular {
            coefficient: 1.0,
            exponent: 0.25,
            center: None,
        };
        let v = f.lm_norm(2.0, &grid, &region).unwrap();
        assert!((v - 2.0).abs() < 1e-3, "{v}");
        let g = SourceSpec::RadialSingular {
            coefficient: 1.0,
            exponent: 0.5,
            center: None,
        };
        assert!(matches!(g.lm_norm(2.0, &grid, &region), Err(ProblemError::Divergent { .. })));
    }

    #[test]
    fn singular_cell_value_is_cell_average() {
        // odd cell count: the center cell straddles the singularity
        let space = SpatialGrid::centered(vec![5], 0.2).unwrap();
        let f = SourceSpec::RadialSingular {
            coefficient: 2.0,
            exponent: 0.5,
            center: None,
        };
        let v = f.cell_values(&space, 0.0).unwrap();
        // average of |x|^(-1/2) over [-0.1, 0.1] is 2 * 2 sqrt(0.1) / 0.2
        assert_relative_eq!(v[2], 2.0 * 4.0 * 0.1f64.sqrt() / 0.2, max_relative = 1e-12);
        assert_relative_eq!(v[0], 2.0 * 0.4f64.powf(-0.5), max_relative = 1e-12);
    }

    #[test]
    fn transformed_norm_scales_exactly() {
        let grid = unit_grid(256, 1.0 / 64.0);
        let f = SourceSpec::RadialSingular {
            coefficient: 0.7,
            exponent: 0.25,
            center: Some(vec![0.3]),
        };
        let map = PullBack {
            time_scale: 0.25,
            time_shift: 0.0,
            space_scale: 0.5,
            space_shift: vec![0.0],
        };
        let g = f.clone().transformed(1.5, map);
        let target = grid.image(0.25, 0.5);
        let lhs = g.lm_norm_domain(2.0, &target).unwrap();
        let rhs = f.lm_norm_domain(2.0, &grid).unwrap() * 1.5 * (0.25f64 * 0.5).powf(-0.5);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
    }

    #[test]
    fn norm_homogeneous_in_coefficient() {
        let grid = unit_grid(128, 1.0 / 32.0);
        let region = ParabolicCylinder::q1(1);
        let f = |c| SourceSpec::RadialSingular {
            coefficient: c,
            exponent: 0.2,
            center: Some(vec![0.1]),
        };
        let a = f(1.0).lm_norm(3.0, &grid, &region).unwrap();
        let b = f(-4.5).lm_norm(3.0, &grid, &region).unwrap();
        assert_relative_eq!(b, 4.5 * a, max_relative = 1e-12);
    }
}
