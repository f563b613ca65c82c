use hjdg_core::grid::{GridField, SpaceTimeGrid, SpatialGrid};
use hjdg_core::problem::{BoundaryData, DiffusionSpec, InitialData, MatrixValue, ProblemSpec, SourceSpec};
use hjdg_core::scaling::{
    compute_exponents, hamiltonian_integral, predicted_residual_61, predicted_residual_62, scale_61,
    scale_62, ScaleParams,
};
use hjdg_core::smoothstep::RadialStep;
use hjdg_core::solver::residual_dist;

fn problem(n: usize, diffusion: DiffusionSpec) -> ProblemSpec {
    let cells = if n == 1 { 48 } else { 20 };
    let space = SpatialGrid::centered(vec![cells; n], 2.0 / cells as f64).unwrap();
    ProblemSpec {
        p: 3.0,
        lambda: 1.3,
        lambda0: 0.05,
        m: 2.5,
        epsilon: 0.2,
        diffusion,
        source: SourceSpec::RadialSingular {
            coefficient: 0.7,
            exponent: 0.3,
            center: Some(vec![0.1; n]),
        },
        grid: SpaceTimeGrid::new(space, 0.05, -1.0, 0.0).unwrap(),
        initial: InitialData::Constant { value: 0.0 },
        boundary: BoundaryData::Frozen,
    }
}

fn field(grid: &SpaceTimeGrid) -> GridField {
    GridField::from_fn(grid.clone(), |t, x| {
        let s: f64 = x.iter().enumerate().map(|(i, v)| (1.0 + i as f64) * v).sum();
        (2.0 * s).sin() + 0.5 * t * s + x[0] * x[0]
    })
    .unwrap()
}

/// Product bump in time and space, zero on the edge slices and boundary ring.
fn test_function(grid: &SpaceTimeGrid) -> GridField {
    let space = grid.space();
    let (t0, t1) = (grid.t_start(), grid.t_end());
    let mid = 0.5 * (t0 + t1);
    let half = 0.5 * (t1 - t0);
    let bump_t = RadialStep::new(0.2 * half, 0.8 * half);
    let (lo, hi) = space.bounds(0);
    let width = hi - lo;
    let bump_x = RadialStep::new(0.1 * width, 0.35 * width);
    let center: Vec<f64> = (0..space.dim())
        .map(|a| {
            let (l, h) = space.bounds(a);
            0.5 * (l + h)
        })
        .collect();
    GridField::from_fn(grid.clone(), |t, x| {
        let r = x
            .iter()
            .zip(&center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt();
        bump_t.value((t - mid).abs()) * bump_x.value(r)
    })
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn check_61(n: usize, diffusion: DiffusionSpec, alpha: f64, beta: f64) {
    let spec = problem(n, diffusion);
    let u = field(&spec.grid);
    let phi = test_function(&spec.grid);
    let r = residual_dist(&u, &spec, &phi).unwrap();
    let params = ScaleParams::general(alpha, beta);
    let (v, spec2) = scale_61(&u, &spec, params).unwrap();
    let phi2 = phi.relabeled(v.grid().clone()).unwrap();
    let r2 = residual_dist(&v, &spec2, &phi2).unwrap();
    let want = predicted_residual_61(r, params, n);
    assert!(rel(r2, want) < 1e-9, "n={n} alpha={alpha} beta={beta}: {r2} vs {want}");
}

#[test]
fn general_identity_one_dimension() {
    check_61(1, DiffusionSpec::checkerboard(4, 1.0, 0.1), 0.5, 2.0);
    check_61(1, DiffusionSpec::Scalar, 1.3, 0.25);
}

#[test]
fn general_identity_full_matrix() {
    let diffusion = DiffusionSpec::Uniform {
        matrix: MatrixValue::Full(vec![vec![1.0, 0.3], vec![0.3, 0.5]]),
    };
    check_61(2, diffusion, 0.5, 2.0);
    check_61(2, DiffusionSpec::checkerboard(3, 1.0, 0.2), 1.1, 0.5);
}

#[test]
fn exponent_identity() {
    for n in [1, 2] {
        let spec = problem(n, DiffusionSpec::checkerboard(4, 1.0, 0.1));
        let exps = compute_exponents(spec.p, spec.m, n).unwrap();
        let u = field(&spec.grid);
        let phi = test_function(&spec.grid);
        let r = residual_dist(&u, &spec, &phi).unwrap();
        let h = hamiltonian_integral(&u, &spec, &phi);
        let beta: f64 = 0.5;
        let params = ScaleParams::exponent(beta.powf(exps.e2), beta);
        let (v, spec2) = scale_62(&u, &spec, params, &exps).unwrap();
        let phi2 = phi.relabeled(v.grid().clone()).unwrap();
        let r2 = residual_dist(&v, &spec2, &phi2).unwrap();
        let want = predicted_residual_62(r, h, params, &exps);
        assert!(rel(r2, want) < 1e-9, "n={n}: {r2} vs {want}");
    }
}

#[test]
fn source_norm_shrinks_under_general_scaling() {
    let spec = problem(1, DiffusionSpec::Scalar);
    let u = GridField::constant(spec.grid.clone(), 0.0);
    let f = spec.source_norm().unwrap();
    for (a, b) in [(0.5, 2.0), (1.2, 0.5), (2.0, 0.1)] {
        let (_, s2) = scale_61(&u, &spec, ScaleParams::general(a, b)).unwrap();
        assert!(s2.source_norm().unwrap() <= f * (1.0 + 1e-12));
        assert!(s2.lambda0 <= spec.lambda0 * (1.0 + 1e-12));
    }
}
