//! Uniform space-time grids, scalar fields sampled on them, and the discrete
//! differential and integral operators every other module is built on.
//!
//! Samples live at cell centers: along axis `d` the `i`-th center sits at
//! `origin[d] + (i + 1/2) h`. Time slices are nodal, `t_k = t_start + k dt`.
//! Balls and cylinders are realized as the set of sample points they contain
//! (strict Euclidean distance), and all integrals are midpoint sums over
//! those samples.

mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};

use std::ops::Range;

use thiserror::Error;

/// Relative tolerance used when deciding whether a time slice lies in an interval.
const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("axis {axis} has {cells} cells; stencils need at least 4")]
    TooFewCells { axis: usize, cells: usize },
    #[error("spatial dimension must be at least 1")]
    ZeroDimension,
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error("time interval [{t_start}, {t_end}] is not an integer multiple of dt = {dt}")]
    IncommensurateTime { t_start: f64, t_end: f64, dt: f64 },
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("field has {got} values but the grid holds {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("time index {index} out of range (grid has {slices} slices)")]
    TimeIndex { index: usize, slices: usize },
    #[error("invalid cylinder: {0}")]
    BadCylinder(String),
    #[error("region contains no grid samples")]
    EmptyIntersection,
    #[error("point (t = {t}, x = {x:?}) lies outside the sampled domain")]
    OutOfDomain { t: f64, x: Vec<f64> },
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A uniform Cartesian cell-centered grid in `n` spatial dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    cells: Vec<usize>,
    h: f64,
    origin: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

impl SpatialGrid {
    pub fn new(cells: Vec<usize>, h: f64, origin: Vec<f64>) -> Result<Self, GridError> {
        if cells.is_empty() {
            return Err(GridError::ZeroDimension);
        }
        if origin.len() != cells.len() {
            return Err(GridError::DimensionMismatch {
                expected: cells.len(),
                got: origin.len(),
            });
        }
        for (axis, &c) in cells.iter().enumerate() {
            if c < 4 {
                return Err(GridError::TooFewCells { axis, cells: c });
            }
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(GridError::BadSpacing(h));
        }
        let n = cells.len();
        let mut strides = vec![1usize; n];
        for d in (0..n.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * cells[d + 1];
        }
        let len = cells.iter().product();
        Ok(Self {
            cells,
            h,
            origin,
            strides,
            len,
        })
    }

    /// Grid whose domain box is centered on the origin.
    pub fn centered(cells: Vec<usize>, h: f64) -> Result<Self, GridError> {
        let origin = centered_origin(&cells, h);
        Self::new(cells, h, origin)
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    pub fn is_centered(&self) -> bool {
        self.origin == centered_origin(&self.cells, self.h)
    }

    #[inline]
    pub fn index_along(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.cells[axis]
    }

    #[inline]
    pub fn coord(&self, flat: usize, axis: usize) -> f64 {
        self.axis_center(axis, self.index_along(flat, axis))
    }

    #[inline]
    pub fn axis_center(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + (i as f64 + 0.5) * self.h
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        (0..self.dim()).map(|d| self.coord(flat, d)).collect()
    }

    pub fn center_into(&self, flat: usize, out: &mut [f64]) {
        for (d, x) in out.iter_mut().enumerate() {
            *x = self.coord(flat, d);
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Neighbor of `flat` shifted by `delta` cells along `axis`, if it exists.
    #[inline]
    pub fn shifted(&self, flat: usize, axis: usize, delta: isize) -> Option<usize> {
        let i = self.index_along(flat, axis) as isize + delta;
        if i < 0 || i >= self.cells[axis] as isize {
            None
        } else {
            Some((flat as isize + delta * self.strides[axis] as isize) as usize)
        }
    }

    /// True for cells in the outermost ring (index 0 or last along some axis).
    pub fn is_boundary(&self, flat: usize) -> bool {
        (0..self.dim()).any(|d| {
            let i = self.index_along(flat, d);
            i == 0 || i + 1 == self.cells[d]
        })
    }

    /// Low and high corners of the domain box.
    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        let lo = self.origin[axis];
        (lo, lo + self.cells[axis] as f64 * self.h)
    }

    /// Flat indices of all cells whose center lies strictly inside the ball.
    pub fn cells_in_ball(&self, ball: &Ball) -> Vec<usize> {
        let n = self.dim();
        let mut ranges = Vec::with_capacity(n);
        for d in 0..n {
            let lo = ((ball.center[d] - ball.radius - self.origin[d]) / self.h - 0.5).floor();
            let hi = ((ball.center[d] + ball.radius - self.origin[d]) / self.h - 0.5).ceil();
            let lo = lo.max(0.0) as usize;
            let hi = hi.min(self.cells[d] as f64 - 1.0);
            if hi < lo as f64 {
                return Vec::new();
            }
            ranges.push(lo..hi as usize + 1);
        }
        let r2 = ball.radius * ball.radius;
        let mut out = Vec::new();
        for_each_multi_index(&ranges, |idx| {
            let mut d2 = 0.0;
            for (d, &i) in idx.iter().enumerate() {
                let dx = self.axis_center(d, i) - ball.center[d];
                d2 += dx * dx;
            }
            if d2 < r2 {
                out.push(self.flat_index(idx));
            }
        });
        out
    }
}

fn centered_origin(cells: &[usize], h: f64) -> Vec<f64> {
    cells.iter().map(|&c| -(c as f64) * h / 2.0).collect()
}

/// Calls `f` on every multi-index of the Cartesian product of `ranges`, last axis fastest.
pub(crate) fn for_each_multi_index(ranges: &[Range<usize>], mut f: impl FnMut(&[usize])) {
    if ranges.iter().any(|r| r.is_empty()) {
        return;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.start).collect();
    loop {
        f(&idx);
        let mut d = ranges.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < ranges[d].end {
                break;
            }
            idx[d] = ranges[d].start;
        }
    }
}

/// Open Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn at_origin(dim: usize, radius: f64) -> Self {
        Self::new(vec![0.0; dim], radius)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let d2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d2 < self.radius * self.radius
    }

    /// Lebesgue measure of the ball.
    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.center.len()) * self.radius.powi(self.center.len() as i32)
    }
}

/// Volume of the unit ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Uniform grid over `[t_start, t_end] x` a spatial box.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeGrid {
    space: SpatialGrid,
    dt: f64,
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl SpaceTimeGrid {
    pub fn new(space: SpatialGrid, dt: f64, t_start: f64, t_end: f64) -> Result<Self, GridError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(GridError::BadTimeStep(dt));
        }
        let ratio = (t_end - t_start) / dt;
        let steps = ratio.round();
        if !(t_end > t_start) || !ratio.is_finite() || (ratio - steps).abs() > TIME_TOL * ratio.max(1.0)
        {
            return Err(GridError::IncommensurateTime { t_start, t_end, dt });
        }
        Ok(Self {
            space,
            dt,
            t_start,
            t_end,
            steps: steps as usize,
        })
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn h(&self) -> f64 {
        self.space.h()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of time steps; there are `steps() + 1` slices.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn slices(&self) -> usize {
        self.steps + 1
    }

    pub fn len(&self) -> usize {
        self.slices() * self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt
        }
    }

    /// Indices of the time slices lying in `[t_lo, t_hi]`.
    pub fn slices_in(&self, t_lo: f64, t_hi: f64) -> Range<usize> {
        let a = ((t_lo - self.t_start) / self.dt - TIME_TOL).ceil().max(0.0);
        let b = ((t_hi - self.t_start) / self.dt + TIME_TOL).floor();
        if b < a || b < 0.0 {
            return 0..0;
        }
        let a = a as usize;
        let b = (b as usize).min(self.steps);
        if a > b {
            0..0
        } else {
            a..b + 1
        }
    }

    /// Same grid with coordinates relabeled so that `(t0, x0)` becomes the origin.
    pub fn translated(&self, t0: f64, x0: &[f64]) -> Self {
        let origin = self
            .space
            .origin
            .iter()
            .zip(x0)
            .map(|(o, x)| o - x)
            .collect();
        Self {
            space: SpatialGrid {
                origin,
                ..self.space.clone()
            },
            t_start: self.t_start - t0,
            t_end: self.t_end - t0,
            ..self.clone()
        }
    }

    /// Grid obtained by dividing every time coordinate by `time_scale` and every
    /// spatial coordinate by `space_scale`; sample `i` of the result is the image of
    /// sample `i` of `self`.
    pub fn image(&self, time_scale: f64, space_scale: f64) -> Self {
        let origin = self.space.origin.iter().map(|o| o / space_scale).collect();
        Self {
            space: SpatialGrid {
                origin,
                h: self.space.h / space_scale,
                ..self.space.clone()
            },
            dt: self.dt / time_scale,
            t_start: self.t_start / time_scale,
            t_end: self.t_end / time_scale,
            steps: self.steps,
        }
    }
}

/// Values of a scalar function at every sample of a [`SpaceTimeGrid`], time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: SpaceTimeGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: SpaceTimeGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: SpaceTimeGrid, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    /// Samples `f(t, x)` at every grid point.
    pub fn from_fn(grid: SpaceTimeGrid, mut f: impl FnMut(f64, &[f64]) -> f64) -> Result<Self, GridError> {
        let space = grid.space();
        let mut x = vec![0.0; space.dim()];
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.slices() {
            let t = grid.time(k);
            for flat in 0..space.len() {
                space.center_into(flat, &mut x);
                values.push(f(t, &x));
            }
        }
        Self::new(grid, values)
    }

    /// Stacks per-slice spatial vectors into a field.
    pub fn from_slices(grid: SpaceTimeGrid, slices: Vec<Vec<f64>>) -> Result<Self, GridError> {
        let values: Vec<f64> = slices.into_iter().flatten().collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn space(&self) -> &SpatialGrid {
        self.grid.space()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let n = self.space().len();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn checked_slice(&self, k: usize) -> Result<&[f64], GridError> {
        if k >= self.grid.slices() {
            return Err(GridError::TimeIndex {
                index: k,
                slices: self.grid.slices(),
            });
        }
        Ok(self.slice(k))
    }

    pub fn value(&self, k: usize, flat: usize) -> f64 {
        self.values[k * self.space().len() + flat]
    }

    /// Pointwise map. The closure must keep values finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map with access to the sample coordinates.
    pub fn map_with_coords(&self, mut f: impl FnMut(f64, &[f64], f64) -> f64) -> Self {
        let space = self.space();
        let n = space.len();
        let mut x = vec![0.0; space.dim()];
        let mut values = Vec::with_capacity(self.values.len());
        for k in 0..self.grid.slices() {
            let t = self.grid.time(k);
            for flat in 0..n {
                space.center_into(flat, &mut x);
                values.push(f(t, &x, self.values[k * n + flat]));
            }
        }
        Self {
            grid: self.grid.clone(),
            values,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Same samples, with coordinates relabeled so that `(t0, x0)` becomes the origin.
    pub fn translated(&self, t0: f64, x0: &[f64]) -> Self {
        Self {
            grid: self.grid.translated(t0, x0),
            values: self.values.clone(),
        }
    }

    /// Same samples placed on `grid`, which must have the same shape.
    pub fn relabeled(&self, grid: SpaceTimeGrid) -> Result<Self, GridError> {
        if grid.len() != self.grid.len() || grid.space().cells() != self.space().cells() {
            return Err(GridError::LengthMismatch {
                expected: self.grid.len(),
                got: grid.len(),
            });
        }
        Ok(Self {
            grid,
            values: self.values.clone(),
        })
    }

    /// Multilinear interpolation in space-time.
    ///
    /// Between the outermost sample and the domain edge (half a cell) the value is
    /// held constant; points beyond the domain box are rejected.
    pub fn interpolate(&self, t: f64, x: &[f64]) -> Result<f64, GridError> {
        let grid = &self.grid;
        let space = grid.space();
        let n = space.dim();
        if x.len() != n {
            return Err(GridError::DimensionMismatch {
                expected: n,
                got: x.len(),
            });
        }
        let out = || GridError::OutOfDomain {
            t,
            x: x.to_vec(),
        };
        let tol_t = TIME_TOL * grid.dt();
        if t < grid.t_start() - tol_t || t > grid.t_end() + tol_t {
            return Err(out());
        }
        let s = ((t - grid.t_start()) / grid.dt()).clamp(0.0, grid.steps() as f64);
        let k0 = (s.floor() as usize).min(grid.steps().saturating_sub(1));
        let wt = s - k0 as f64;

        let mut base = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for d in 0..n {
            let (lo, hi) = space.bounds(d);
            let tol_x = 1e-9 * space.h();
            if x[d] < lo - tol_x || x[d] > hi + tol_x {
                return Err(out());
            }
            let c = space.cells()[d];
            let u = ((x[d] - space.origin()[d]) / space.h() - 0.5).clamp(0.0, (c - 1) as f64);
            let i0 = (u.floor() as usize).min(c - 2);
            base.push(i0);
            frac.push(u - i0 as f64);
        }

        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0;
            for d in 0..n {
                let bit = (corner >> d) & 1;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                flat += (base[d] + bit) * space.strides[d];
            }
            if w == 0.0 {
                continue;
            }
            let v0 = self.value(k0, flat);
            let v = if wt == 0.0 {
                v0
            } else {
                (1.0 - wt) * v0 + wt * self.value(k0 + 1, flat)
            };
            acc += w * v;
        }
        Ok(acc)
    }

    /// Builds a field on `target` whose value at `(t, x)` is
    /// `scale * self(map(t, x)) + offset`, interpolating multilinearly.
    pub fn resample(
        &self,
        target: SpaceTimeGrid,
        scale: f64,
        offset: f64,
        mut map: impl FnMut(f64, &[f64]) -> (f64, Vec<f64>),
    ) -> Result<Self, GridError> {
        let space = target.space().clone();
        let mut x = vec![0.0; space.dim()];
        let mut values = Vec::with_capacity(target.len());
        for k in 0..target.slices() {
            let t = target.time(k);
            for flat in 0..space.len() {
                space.center_into(flat, &mut x);
                let (ts, xs) = map(t, &x);
                values.push(scale * self.interpolate(ts, &xs)? + offset);
            }
        }
        Self::new(target, values)
    }
}

/// The space-time region `[t_lo, t_hi] x B_radius(center)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicCylinder {
    pub t_lo: f64,
    pub t_hi: f64,
    pub radius: f64,
    pub center: Vec<f64>,
}

impl ParabolicCylinder {
    pub fn new(t_lo: f64, t_hi: f64, radius: f64, center: Vec<f64>) -> Result<Self, GridError> {
        if !(t_lo < t_hi) {
            return Err(GridError::BadCylinder(format!(
                "time interval [{t_lo}, {t_hi}] is empty"
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GridError::BadCylinder(format!("radius {radius} is not positive")));
        }
        Ok(Self {
            t_lo,
            t_hi,
            radius,
            center,
        })
    }

    pub fn at_origin(dim: usize, t_lo: f64, t_hi: f64, radius: f64) -> Self {
        Self {
            t_lo,
            t_hi,
            radius,
            center: vec![0.0; dim],
        }
    }

    /// `[-2, 0] x B_2`
    pub fn q_bar2(dim: usize) -> Self {
        Self::at_origin(dim, -2.0, 0.0, 2.0)
    }

    /// `[-1, 0] x B_1`
    pub fn q1(dim: usize) -> Self {
        Self::at_origin(dim, -1.0, 0.0, 1.0)
    }

    /// `[-4, 0] x B_2`
    pub fn q2(dim: usize) -> Self {
        Self::at_origin(dim, -4.0, 0.0, 2.0)
    }

    /// `[-4, 0] x B_3`
    pub fn q3(dim: usize) -> Self {
        Self::at_origin(dim, -4.0, 0.0, 3.0)
    }

    pub fn ball(&self) -> Ball {
        Ball::new(self.center.clone(), self.radius)
    }

    /// Exact Lebesgue measure of the cylinder.
    pub fn measure(&self) -> f64 {
        (self.t_hi - self.t_lo) * self.ball().volume()
    }

    pub fn contains_time(&self, t: f64, dt: f64) -> bool {
        t >= self.t_lo - TIME_TOL * dt && t <= self.t_hi + TIME_TOL * dt
    }
}

/// The sample points of `grid` inside `cyl`: time-slice range and spatial cell list.
pub fn cylinder_samples(grid: &SpaceTimeGrid, cyl: &ParabolicCylinder) -> (Range<usize>, Vec<usize>) {
    (
        grid.slices_in(cyl.t_lo, cyl.t_hi),
        grid.space().cells_in_ball(&cyl.ball()),
    )
}

/// Measure of the sampled part of `cyl`: `dt h^n` times the sample count.
pub fn sample_measure(grid: &SpaceTimeGrid, cyl: &ParabolicCylinder) -> f64 {
    let (slices, cells) = cylinder_samples(grid, cyl);
    grid.dt() * grid.space().cell_volume() * (slices.len() * cells.len()) as f64
}

/// Centered-difference gradient of a spatial field; one-sided first order on
/// the boundary ring. Returned as one vector per axis.
pub fn gradient_of(space: &SpatialGrid, values: &[f64]) -> Vec<Vec<f64>> {
    let h = space.h();
    (0..space.dim())
        .map(|d| {
            (0..space.len())
                .map(|flat| {
                    match (space.shifted(flat, d, -1), space.shifted(flat, d, 1)) {
                        (Some(m), Some(p)) => (values[p] - values[m]) / (2.0 * h),
                        (None, Some(p)) => (values[p] - values[flat]) / h,
                        (Some(m), None) => (values[flat] - values[m]) / h,
                        (None, None) => 0.0,
                    }
                })
                .collect()
        })
        .collect()
}

/// Gradient of time slice `t_index` of `u`.
pub fn gradient_centered(u: &GridField, t_index: usize) -> Result<Vec<Vec<f64>>, GridError> {
    let slice = u.checked_slice(t_index)?;
    Ok(gradient_of(u.space(), slice))
}

/// Backward and forward differences of `values` at `flat` along `axis`; a
/// missing neighbor contributes a zero difference.
#[inline]
pub fn one_sided_differences(space: &SpatialGrid, values: &[f64], flat: usize, axis: usize) -> (f64, f64) {
    let h = space.h();
    let u = values[flat];
    let back = space
        .shifted(flat, axis, -1)
        .map_or(0.0, |m| (u - values[m]) / h);
    let fwd = space
        .shifted(flat, axis, 1)
        .map_or(0.0, |p| (values[p] - u) / h);
    (back, fwd)
}

/// Squared upwind gradient magnitude `sum_i max(D-_i, 0)^2 + min(D+_i, 0)^2`.
#[inline]
pub fn upwind_magnitude_sq(space: &SpatialGrid, values: &[f64], flat: usize) -> f64 {
    (0..space.dim())
        .map(|d| {
            let (b, f) = one_sided_differences(space, values, flat, d);
            let b = b.max(0.0);
            let f = f.min(0.0);
            b * b + f * f
        })
        .sum()
}

/// Midpoint sum `h^n * sum g` over cells whose center lies in `ball`.
pub fn integrate_space(space: &SpatialGrid, g: &[f64], ball: &Ball) -> f64 {
    let cells = space.cells_in_ball(ball);
    space.cell_volume() * cells.iter().map(|&c| g[c]).sum::<f64>()
}

/// `dt * sum` over the time slices in `[t_lo, t_hi]` of [`integrate_space`].
pub fn integrate_spacetime(g: &GridField, cyl: &ParabolicCylinder) -> f64 {
    let (slices, cells) = cylinder_samples(g.grid(), cyl);
    let vol = g.grid().dt() * g.space().cell_volume();
    let mut acc = 0.0;
    for k in slices {
        let s = g.slice(k);
        acc += cells.iter().map(|&c| s[c]).sum::<f64>();
    }
    vol * acc
}

/// Exact max and min of `u` over the samples inside `cyl`.
pub fn sup_inf_on(u: &GridField, cyl: &ParabolicCylinder) -> Result<(f64, f64), GridError> {
    let (slices, cells) = cylinder_samples(u.grid(), cyl);
    if slices.is_empty() || cells.is_empty() {
        return Err(GridError::EmptyIntersection);
    }
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for k in slices {
        let s = u.slice(k);
        for &c in &cells {
            sup = sup.max(s[c]);
            inf = inf.min(s[c]);
        }
    }
    Ok((sup, inf))
}
