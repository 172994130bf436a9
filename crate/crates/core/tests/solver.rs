use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pspectra_core::conformal::{normalize_unit_volume, volume};
use pspectra_core::psolve::shooting::{interval_eigenvalue_exact, shooting_oracle_1d, BoundaryCondition};
use pspectra_core::psolve::{
    rayleigh_quotient, shifted_quotient, shifted_quotient_gradient, solve_closed, solve_dirichlet, solve_neumann,
};
use pspectra_core::{ConformalFactor, DiscreteManifold, ScalarField, SolveOptions};

fn random_factor(mesh: &DiscreteManifold, rng: &mut ChaCha8Rng) -> ConformalFactor {
    ConformalFactor::new((0..mesh.num_vertices()).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap()
}

#[test]
fn neumann_unit_interval() {
    let mesh = DiscreteManifold::interval(800, 0.0, 1.0).unwrap();
    let r = solve_neumann(&mesh, &ConformalFactor::identity(&mesh), &SolveOptions::with_p(2.0)).unwrap();
    assert!((r.lambda - PI * PI).abs() < 1e-3 * PI * PI, "{}", r.lambda);
    for p in [1.5, 3.0] {
        let r = solve_neumann(&mesh, &ConformalFactor::identity(&mesh), &SolveOptions::with_p(p)).unwrap();
        let oracle = shooting_oracle_1d(p, BoundaryCondition::Neumann, 0.5).unwrap();
        assert!((r.lambda - oracle).abs() < 5e-3 * oracle, "p={p}: {} vs {oracle}", r.lambda);
    }
}

#[test]
fn shooting_matches_closed_form() {
    for p in [1.2, 1.5, 2.0, 3.0, 5.0] {
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let exact = interval_eigenvalue_exact(p, 2.0);
            let got = shooting_oracle_1d(p, bc, 1.0).unwrap();
            assert!((got - exact).abs() < 1e-9 * exact, "p={p} {bc:?}: {got} vs {exact}");
        }
    }
}

#[test]
fn hemisphere_neumann_is_two() {
    let sphere = DiscreteManifold::icosphere(4).unwrap();
    let hemi = sphere.extract_hemisphere(sphere.pole().unwrap()).unwrap();
    let r = solve_neumann(&hemi.mesh, &ConformalFactor::identity(&hemi.mesh), &SolveOptions::with_p(2.0)).unwrap();
    assert!((r.lambda - 2.0).abs() < 0.02 * 2.0, "{}", r.lambda);
}

#[test]
fn dirichlet_eigenfunction_is_even_and_signed() {
    let mesh = DiscreteManifold::interval(401, -1.0, 1.0).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let r = solve_dirichlet(&mesh, &SolveOptions::with_p(p)).unwrap();
        let u = r.eigenfunction.values();
        let n = u.len();
        let peak = u.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..n {
            assert!((u[i] - u[n - 1 - i]).abs() < 1e-4 * peak, "p={p}, i={i}");
        }
        let sign = u[n / 2].signum();
        assert!(u.iter().all(|x| x * sign >= -1e-12), "p={p}: sign change");
    }
}

#[test]
fn solves_are_bitwise_deterministic() {
    let mesh = DiscreteManifold::icosphere(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = random_factor(&mesh, &mut rng);
    let opts = SolveOptions { p: 2.5, seed: 9, ..SolveOptions::default() };
    let a = solve_closed(&mesh, &f, &opts).unwrap();
    let b = solve_closed(&mesh, &f, &opts).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.eigenfunction, b.eigenfunction);
    assert_eq!(a.trace, b.trace);
}

#[test]
fn accepted_steps_never_increase_the_quotient() {
    let mesh = DiscreteManifold::icosphere(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in [1.3, 2.0, 4.0] {
        let f = random_factor(&mesh, &mut rng);
        let r = solve_closed(&mesh, &f, &SolveOptions::with_p(p)).unwrap();
        assert!(r.trace.len() > 1);
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "p={p}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..4 {
        let mut x: Vec<f64> = (0..50).map(|_| rng.gen_range(-2.0..2.0)).collect();
        x.sort_by(f64::total_cmp);
        let mesh = DiscreteManifold::interval_from_points(&x).unwrap();
        let f = random_factor(&mesh, &mut rng);
        let u: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for p in [1.5, 2.0, 3.5] {
            let (q, g) = shifted_quotient_gradient(&mesh, &f, p, &ScalarField::new(u.clone()).unwrap()).unwrap();
            assert_eq!(q, shifted_quotient(&mesh, &f, p, &ScalarField::new(u.clone()).unwrap()).unwrap());
            let h = 1e-6;
            let (mut err, mut norm) = (0.0, 0.0);
            for v in 0..50 {
                let mut up = u.clone();
                let mut dn = u.clone();
                up[v] += h;
                dn[v] -= h;
                let fd = (shifted_quotient(&mesh, &f, p, &ScalarField::new(up).unwrap()).unwrap()
                    - shifted_quotient(&mesh, &f, p, &ScalarField::new(dn).unwrap()).unwrap())
                    / (2.0 * h);
                err += (fd - g.values()[v]).powi(2);
                norm += g.values()[v].powi(2);
            }
            assert!((err / norm).sqrt() < 1e-5, "p={p}: {}", (err / norm).sqrt());
        }
    }
}

#[test]
fn eigenvalue_is_below_coordinate_quotients() {
    let mesh = DiscreteManifold::icosphere(3).unwrap();
    let f = ConformalFactor::new(mesh.vertices().iter().map(|v| (0.5 * v[0]).exp()).collect()).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let r = solve_closed(&mesh, &f, &SolveOptions::with_p(p)).unwrap();
        for k in 0..3 {
            let c = ScalarField::from_fn(&mesh, |v, _| v[k]);
            let q = shifted_quotient(&mesh, &f, p, &c).unwrap();
            assert!(r.lambda <= q * (1.0 + 1e-9), "p={p}, k={k}: {} > {q}", r.lambda);
        }
        assert!(rayleigh_quotient(&mesh, &f, p, &r.eigenfunction).unwrap() >= r.lambda * (1.0 - 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilatation_scales_eigenvalue(p in 1.2f64..4.0, log_c in -2.0f64..2.0) {
        let mesh = DiscreteManifold::circle(120, 2.0 * PI).unwrap();
        let c = log_c.exp();
        let opts = SolveOptions::with_p(p);
        let base = solve_closed(&mesh, &ConformalFactor::identity(&mesh), &opts).unwrap().lambda;
        let scaled = solve_closed(&mesh, &ConformalFactor::constant(&mesh, c).unwrap(), &opts).unwrap().lambda;
        let expect = c.powf(-0.5 * p) * base;
        prop_assert!((scaled - expect).abs() <= 1e-6 * expect, "{scaled} vs {expect}");
    }

    #[test]
    fn normalization_gives_unit_volume(seed in 0u64..1000, level in 1usize..4) {
        let mesh = DiscreteManifold::icosphere(level).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_factor(&mesh, &mut rng);
        let h = normalize_unit_volume(&mesh, &f).unwrap();
        prop_assert!((volume(&mesh, &h).unwrap() - 1.0).abs() < 1e-12);
    }
}
