mod common;

use common::{bump, pipeline};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zk_virial::grid::{norm_rdr, GridFunction};
use zk_virial::operators::{
    apply_v, benchmark, build_operators, exact_images, kernel_residual, project_fperp, solve_hstar,
};
use zk_virial::{inner_rdr, solve_ground_state, Measure, SolveConfig};

fn rel_dist(a: &GridFunction, b: &GridFunction) -> f64 {
    norm_rdr(&(a - b)) / norm_rdr(b)
}

#[test]
fn benchmarks_hold_for_three_two_and_one_point_five() {
    for p in [3.0, 2.0, 1.5] {
        let pipe = pipeline(p);
        let bm = benchmark(&pipe.gs, &pipe.ops).unwrap();
        let d = bm.deviations;
        for (name, dev) in [
            ("U h1", d.direct_h1),
            ("U h2", d.direct_h2),
            ("U^-1 w1", d.inverse_h1),
            ("U^-1 w2", d.inverse_h2),
        ] {
            assert!(dev < 1e-3, "p = {p}, {name}: {dev:e}");
        }
    }
}

#[test]
fn kernel_direction_is_annihilated() {
    for p in [3.0, 1.1] {
        let ops = &pipeline(p).ops;
        assert!(kernel_residual(&ops.u, &ops.kern).unwrap() < 1e-3);
        assert!(ops.kern.lowest_eigenvalue().abs() < 1e-4);
        assert_eq!(ops.kern.f()[0], 0.0);
    }
}

#[test]
fn kernel_residual_is_second_order() {
    let coarse = SolveConfig {
        r_max: 25.0,
        grid_n: 5001,
        extend_domain: false,
        ..SolveConfig::default()
    };
    let fine = SolveConfig {
        grid_n: 10001,
        ..coarse.clone()
    };
    let res = |cfg: &SolveConfig| {
        let gs = solve_ground_state(3.0, cfg).unwrap();
        let ops = build_operators(&gs).unwrap();
        kernel_residual(&ops.u, &ops.kern).unwrap()
    };
    let ratio = res(&coarse) / res(&fine);
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn potential_minimum_at_three() {
    let pipe = pipeline(3.0);
    let a = pipe.gs.amplitude();
    let min = pipe.ops.u.potential().values().iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(min, pipe.ops.u.potential()[0]);
    assert!((min - (1.0 - 3.0 * a * a)).abs() < 1e-12);
}

#[test]
fn conjugation_identity_on_bumps() {
    let ops = &pipeline(2.0).ops;
    let grid = ops.u.grid().clone();
    assert_eq!(ops.u.measure(), Measure::Rdr);
    assert_eq!(ops.hat_u.measure(), Measure::R3dr);
    for k in 0..10 {
        let v = bump(&grid, 1.0 + k as f64, 0.4 + 0.15 * k as f64);
        let uv = ops.u.apply(&v).unwrap();
        let v_over_r = GridFunction::new(
            grid.clone(),
            grid.radii()
                .enumerate()
                .map(|(i, r)| if i == 0 { 0.0 } else { v[i] / r })
                .collect(),
        )
        .unwrap();
        let mut hat = ops.u.to_hat(&v);
        hat.push(v_over_r[grid.n() - 1]);
        let conj = ops.hat_u.apply(&GridFunction::new(grid.clone(), hat).unwrap()).unwrap().times_r();
        assert!(rel_dist(&uv, &conj) < 1e-8, "bump {k}");
        let interior = (1..grid.n() - 1).all(|i| (ops.u.to_hat(&v)[i] - v_over_r[i]).abs() < 1e-15);
        assert!(interior);
    }
}

#[test]
fn u_is_self_adjoint_on_random_pairs() {
    let ops = &pipeline(3.0).ops;
    let grid = ops.u.grid().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let mut draw = || bump(&grid, rng.random_range(0.5..15.0), rng.random_range(0.3..3.0));
        let (v, w) = (draw(), draw());
        let a = ops.u.inner(&ops.u.apply(&v).unwrap(), &w).unwrap();
        let b = ops.u.inner(&v, &ops.u.apply(&w).unwrap()).unwrap();
        let scale = ops.u.inner(&v, &v).unwrap().sqrt() * ops.u.inner(&w, &w).unwrap().sqrt();
        assert!((a - b).abs() <= 1e-9 * scale, "{a} {b}");
    }
}

#[test]
fn v_signature_is_one_one() {
    let pair = &pipeline(3.0).ops.pair;
    let n1 = norm_rdr(pair.h1());
    let n2 = norm_rdr(pair.h2());
    let form = |v: &GridFunction| inner_rdr(&apply_v(v, pair).unwrap(), v).unwrap();
    let plus = &((1.0 / n1) * pair.h1()) + &((1.0 / n2) * pair.h2());
    let minus = &((1.0 / n1) * pair.h1()) - &((1.0 / n2) * pair.h2());
    let g12 = inner_rdr(pair.h1(), pair.h2()).unwrap();
    assert!(g12 != 0.0);
    let (fp, fm) = (form(&plus), form(&minus));
    assert!(fp * fm < 0.0, "{fp} {fm}");
}

#[test]
fn v_of_h1_uses_the_two_gram_entries() {
    let pair = &pipeline(3.0).ops.pair;
    let vh1 = apply_v(pair.h1(), pair).unwrap();
    let h = pair.h1().grid().h();
    let quad = |a: &GridFunction, b: &GridFunction| -> f64 {
        let vals: Vec<f64> = a.grid().radii().enumerate().map(|(i, r)| a[i] * b[i] * r).collect();
        zk_virial::grid::simpson(&vals, h).unwrap()
    };
    let mut expect = pair.h1().scaled(quad(pair.h1(), pair.h2()));
    expect.add_scaled(quad(pair.h1(), pair.h1()), pair.h2());
    assert!(rel_dist(&vh1, &expect) < 1e-12);
}

#[test]
fn v_kills_the_orthogonal_complement() {
    let ops = &pipeline(2.0).ops;
    let pair = &ops.pair;
    let grid = ops.u.grid().clone();
    // Gram–Schmidt a bump against h1, h2.
    let mut v = bump(&grid, 4.0, 1.0);
    let (h1, h2) = (pair.h1(), pair.h2());
    let e1 = h1.scaled(1.0 / norm_rdr(h1));
    let mut e2 = h2.clone();
    e2.add_scaled(-inner_rdr(h2, &e1).unwrap(), &e1);
    let e2 = e2.scaled(1.0 / norm_rdr(&e2));
    for e in [&e1, &e2] {
        let k = inner_rdr(&v, e).unwrap();
        v.add_scaled(-k, e);
    }
    let vv = apply_v(&v, pair).unwrap();
    assert!(vv.max_abs() < 1e-12 * norm_rdr(h1) * norm_rdr(h2) * norm_rdr(&v).max(1.0));
}

#[test]
fn projection_examples() {
    let ops = &pipeline(3.0).ops;
    let f = ops.kern.f();
    assert!(project_fperp(f, &ops.kern).unwrap().max_abs() < 1e-14 * f.max_abs());
    let h1t = project_fperp(ops.pair.h1(), &ops.kern).unwrap();
    let cos = inner_rdr(&h1t, f).unwrap() / (norm_rdr(&h1t) * norm_rdr(f));
    assert!(cos.abs() < 1e-12, "{cos:e}");
}

#[test]
fn hstar_examples() {
    let ops = &pipeline(3.0).ops;
    let zero = GridFunction::zeros(ops.u.grid().clone());
    assert_eq!(solve_hstar(&zero, &ops.u, &ops.kern).unwrap().max_abs(), 0.0);

    let h1t = project_fperp(ops.pair.h1(), &ops.kern).unwrap();
    let hs = solve_hstar(&h1t, &ops.u, &ops.kern).unwrap();
    assert!(rel_dist(&ops.u.apply(&hs).unwrap(), &h1t) < 1e-4);
    let cos = inner_rdr(&hs, ops.kern.f()).unwrap() / (norm_rdr(&hs) * norm_rdr(ops.kern.f()));
    assert!(cos.abs() < 1e-10);

    let err = solve_hstar(ops.pair.h1(), &ops.u, &ops.kern).unwrap_err();
    assert!(matches!(err, zk_virial::Error::InvalidArgument(_)), "{err}");
}

#[test]
fn hstar_round_trip_on_bumps() {
    for p in [3.0, 1.5] {
        let ops = &pipeline(p).ops;
        let grid = ops.u.grid().clone();
        for k in 0..8 {
            let v = bump(&grid, 0.8 + 1.3 * k as f64, 0.5 + 0.2 * k as f64);
            let rhs = project_fperp(&ops.u.apply(&v).unwrap(), &ops.kern).unwrap();
            let back = solve_hstar(&rhs, &ops.u, &ops.kern).unwrap();
            let want = project_fperp(&v, &ops.kern).unwrap();
            assert!(rel_dist(&back, &want) < 1e-4, "p = {p}, bump {k}: {:e}", rel_dist(&back, &want));
        }
    }
}

#[test]
fn exact_images_vanish_at_the_origin() {
    let (w1, w2) = exact_images(&pipeline(2.0).gs);
    assert_eq!(w1[0], 0.0);
    assert_eq!(w2[0], 0.0);
}

fn random_combination(coeffs: &[(f64, f64, f64)]) -> GridFunction {
    let grid = pipeline(3.0).gs.grid().clone();
    let mut v = GridFunction::zeros(grid.clone());
    for &(a, c, w) in coeffs {
        v.add_scaled(a, &bump(&grid, c, w));
    }
    v
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((-2.0..2.0_f64, 0.5..15.0_f64, 0.3..3.0_f64), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_form_of_v(c in coeffs()) {
        let pair = &pipeline(3.0).ops.pair;
        let v = random_combination(&c);
        let lhs = inner_rdr(&apply_v(&v, pair).unwrap(), &v).unwrap();
        let a = inner_rdr(&v, pair.h1()).unwrap();
        let b = inner_rdr(&v, pair.h2()).unwrap();
        let rhs = 2.0 * a * b;
        let scale = 2.0 * (a.abs() * b.abs()).max(1e-300) + (a * a + b * b);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn projection_is_idempotent(c in coeffs()) {
        let kern = &pipeline(3.0).ops.kern;
        let v = random_combination(&c);
        let once = project_fperp(&v, kern).unwrap();
        let twice = project_fperp(&once, kern).unwrap();
        prop_assert!((&twice - &once).max_abs() <= 1e-12 * v.max_abs().max(1e-300));
        let cos = inner_rdr(&once, kern.f()).unwrap() / (norm_rdr(&once) * norm_rdr(kern.f()));
        prop_assert!(cos.abs() < 1e-12);
    }

    #[test]
    fn u_is_symmetric_in_its_weights(c in coeffs(), d in coeffs()) {
        let u = &pipeline(3.0).ops.u;
        let (v, w) = (random_combination(&c), random_combination(&d));
        let a = u.inner(&u.apply(&v).unwrap(), &w).unwrap();
        let b = u.inner(&v, &u.apply(&w).unwrap()).unwrap();
        let uv = u.apply(&v).unwrap();
        let scale = u.inner(&uv, &uv).unwrap().sqrt() * u.inner(&w, &w).unwrap().sqrt();
        prop_assert!((a - b).abs() <= 1e-10 * scale);
    }
}
