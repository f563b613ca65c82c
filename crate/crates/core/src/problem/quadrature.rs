//! Cell integrals of the radial power `|x - x0|^(-s)`, `0 <= s < n`.
//!
//! Boxes away from `x0` use tensor Gauss-Legendre, bisected while the box is
//! close to the singularity relative to its size. A box with `x0` on its
//! closure is cut into boxes having `x0` as a corner; for such a corner box
//! `B`, homogeneity gives `I(B/2) = 2^(s-n) I(B)`, so
//! `I(B) = I(B \ B/2) / (1 - 2^(s-n))` and `B \ B/2` is `2^n - 1` regular boxes.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

const GL_ORDER: usize = 12;
const MAX_DEPTH: u32 = 12;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero order"))
            .as_node_weight_pairs()
            .to_vec()
    })
}

/// `∫_box |x - x0|^(-s) dx` over the axis-aligned box `[lo, hi]`.
pub fn radial_power_box(lo: &[f64], hi: &[f64], x0: &[f64], s: f64) -> f64 {
    let n = lo.len();
    debug_assert!(s < n as f64);
    let inside = (0..n).all(|d| lo[d] <= x0[d] && x0[d] <= hi[d]);
    if !inside {
        return regular_box(lo, hi, x0, s, MAX_DEPTH);
    }
    // split at x0 into up to 2^n corner boxes
    let mut total = 0.0;
    for corner in 0..(1usize << n) {
        let mut extents = Vec::with_capacity(n);
        for d in 0..n {
            extents.push(if (corner >> d) & 1 == 1 {
                hi[d] - x0[d]
            } else {
                x0[d] - lo[d]
            });
        }
        if extents.iter().any(|&e| e <= 0.0) {
            continue;
        }
        total += corner_box(&extents, s);
    }
    total
}

/// `∫_{[0,a_1] x ... x [0,a_n]} |x|^(-s) dx`.
fn corner_box(extents: &[f64], s: f64) -> f64 {
    let n = extents.len();
    let origin = vec![0.0; n];
    let mut ring = 0.0;
    for sub in 1..(1usize << n) {
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for d in 0..n {
            let half = extents[d] / 2.0;
            if (sub >> d) & 1 == 1 {
                lo.push(half);
                hi.push(extents[d]);
            } else {
                lo.push(0.0);
                hi.push(half);
            }
        }
        ring += regular_box(&lo, &hi, &origin, s, MAX_DEPTH);
    }
    ring / (1.0 - 2f64.powf(s - n as f64))
}

fn regular_box(lo: &[f64], hi: &[f64], x0: &[f64], s: f64, depth: u32) -> f64 {
    let n = lo.len();
    let mut dist2 = 0.0;
    let mut diam2 = 0.0;
    for d in 0..n {
        let gap = (lo[d] - x0[d]).max(x0[d] - hi[d]).max(0.0);
        dist2 += gap * gap;
        diam2 += (hi[d] - lo[d]) * (hi[d] - lo[d]);
    }
    if depth == 0 || dist2 >= diam2 {
        return tensor_gauss(lo, hi, |x| {
            let r2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
            r2.powf(-s / 2.0)
        });
    }
    let mut total = 0.0;
    for sub in 0..(1usize << n) {
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for d in 0..n {
            let mid = 0.5 * (lo[d] + hi[d]);
            if (sub >> d) & 1 == 1 {
                a.push(mid);
                b.push(hi[d]);
            } else {
                a.push(lo[d]);
                b.push(mid);
            }
        }
        total += regular_box(&a, &b, x0, s, depth - 1);
    }
    total
}

/// Tensor-product Gauss-Legendre rule over a box.
pub fn tensor_gauss(lo: &[f64], hi: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let n = lo.len();
    let rule = rule();
    let q = rule.len();
    let mut x = vec![0.0; n];
    let mut idx = vec![0usize; n];
    let jac: f64 = (0..n).map(|d| 0.5 * (hi[d] - lo[d])).product();
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for d in 0..n {
            let (node, weight) = rule[idx[d]];
            x[d] = 0.5 * ((hi[d] - lo[d]) * node + hi[d] + lo[d]);
            w *= weight;
        }
        total += w * f(&x);
        let mut d = n;
        loop {
            if d == 0 {
                return total * jac;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
        }
    }
}
