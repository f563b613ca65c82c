//! The quintic smoothstep `S(s) = 10 s^3 - 15 s^4 + 6 s^5` and the radial
//! profiles built from it. `S` is C² on the real line once clamped to [0, 1].

/// `S(s)` clamped to `[0, 1]` outside the unit interval.
#[inline]
pub fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

#[inline]
pub fn smoothstep_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

#[inline]
pub fn smoothstep_d2(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
    }
}

/// `max |S'| = S'(1/2)`.
pub const SMOOTHSTEP_D1_MAX: f64 = 1.875;

/// `max |S''|`, attained at `s = 1/2 ± sqrt(3)/6`.
pub fn smoothstep_d2_max() -> f64 {
    10.0 / 3f64.sqrt()
}

/// Radial plateau profile: 1 for `r <= inner`, 0 for `r >= outer`, and
/// `1 - S((r - inner)/(outer - inner))` in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialStep {
    pub inner: f64,
    pub outer: f64,
}

impl RadialStep {
    pub fn new(inner: f64, outer: f64) -> Self {
        debug_assert!(inner < outer);
        Self { inner, outer }
    }

    fn width(&self) -> f64 {
        self.outer - self.inner
    }

    pub fn value(&self, r: f64) -> f64 {
        1.0 - smoothstep((r - self.inner) / self.width())
    }

    /// d/dr, never positive.
    pub fn d1(&self, r: f64) -> f64 {
        -smoothstep_d1((r - self.inner) / self.width()) / self.width()
    }

    pub fn d2(&self, r: f64) -> f64 {
        -smoothstep_d2((r - self.inner) / self.width()) / (self.width() * self.width())
    }

    /// `max |d/dr|`.
    pub fn d1_max(&self) -> f64 {
        SMOOTHSTEP_D1_MAX / self.width()
    }

    pub fn d2_max(&self) -> f64 {
        smoothstep_d2_max() / (self.width() * self.width())
    }
}
