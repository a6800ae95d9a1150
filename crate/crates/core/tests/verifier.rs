mod common;

use common::pipeline;
use zk_virial::grid::norm_rdr;
use zk_virial::verifier::{
    apply_t, build_index_matrix, build_matrix_m_with_pair, check_index_v, pairing_sign, solve_fstar_with_rhs,
    IndexMatrixB, SIGN_FLOOR,
};
use zk_virial::{inner_rdr, sweep, Error, VerifyConfig};

#[test]
fn index_matrix_at_three() {
    let b = &pipeline(3.0).report.b;
    let want = [[-16.8353, 4.2439], [4.2439, -0.7219]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((b.entries[i][j] - want[i][j]).abs() < 0.02, "B[{i}][{j}] = {}", b.entries[i][j]);
        }
    }
    assert!((b.eigenvalues.0 + 17.885).abs() < 0.02);
    assert!((b.eigenvalues.1 - 0.327).abs() < 0.02);
}

#[test]
fn index_eigenvalues_at_one_point_five() {
    let (l1, l2) = pipeline(1.5).report.b.eigenvalues;
    assert!((l1 + 8.94e-2).abs() < 1e-3, "{l1}");
    assert!((l2 - 6.34e-5).abs() < 5e-6, "{l2}");
}

#[test]
fn index_check_examples() {
    let b = |l1, l2| IndexMatrixB::from_eigenvalues(l1, l2);
    assert!(check_index_v(&b(-17.885, 0.327), SIGN_FLOOR).unwrap());
    assert!(check_index_v(&b(-1.12e-2, 5.65e-10), SIGN_FLOOR).unwrap());
    assert!(!check_index_v(&b(-1.0, -1.0), SIGN_FLOOR).unwrap());
    assert!(!check_index_v(&b(1.0, 2.0), SIGN_FLOOR).unwrap());
    let err = check_index_v(&b(-1.0, 1e-16), SIGN_FLOOR).unwrap_err();
    assert!(matches!(err, Error::IndeterminateSign(_)));
}

#[test]
fn index_is_invariant_under_rescaling() {
    for p in [3.0, 1.1] {
        let pair = &pipeline(p).ops.pair;
        let base = build_index_matrix(pair).unwrap();
        let scaled = build_index_matrix(&pair.rescaled(2.0, 2.0)).unwrap();
        assert!(scaled.eigenvalues.0 < 0.0 && scaled.eigenvalues.1 > 0.0);
        assert_eq!(
            check_index_v(&base, SIGN_FLOOR).unwrap(),
            check_index_v(&scaled, SIGN_FLOOR).unwrap()
        );
        // B scales by a² b² = 16 for a = b = 2
        assert!((scaled.eigenvalues.0 / base.eigenvalues.0 - 16.0).abs() < 1e-10);
    }
}

#[test]
fn matrix_m_at_three() {
    let m = &pipeline(3.0).report.m;
    let want = [[-4.831, -0.218, -0.006], [-1.644, 4.314, 0.504], [-0.076, 0.441, 0.079]];
    for i in 0..3 {
        for j in 0..3 {
            assert!((m.entries[i][j] - want[i][j]).abs() < 0.01, "M[{i}][{j}] = {}", m.entries[i][j]);
        }
    }
    assert!((m.det + 0.593).abs() < 0.01);
}

#[test]
fn det_m_at_two() {
    let r = &pipeline(2.0).report;
    assert!((r.m.det + 6.13e-4).abs() < 5e-5, "{}", r.m.det);
    assert!(r.fstar_residual.unwrap() < 1e-3);
}

/// Agreement to two significant figures: `|got − want| ≤ 0.05 × 10^{⌊log₁₀|want|⌋}`
/// (half a unit in the second digit).
fn two_sig_figs(got: f64, want: f64) -> bool {
    let unit = 10f64.powf(want.abs().log10().floor() - 1.0);
    (got - want).abs() <= 0.5 * unit
}

#[test]
fn matrix_m_at_one_point_one() {
    let m = &pipeline(1.1).report.m;
    let want = [
        [-1.234e-1, -1.528e-5, -9.741e-5],
        [-2.977e-6, 4.330e-6, 2.753e-5],
        [-1.888e-5, 2.753e-5, 1.759e-4],
    ];
    for i in 0..3 {
        for j in 0..3 {
            assert!(
                two_sig_figs(m.entries[i][j], want[i][j]),
                "M[{i}][{j}] = {:e}, want {:e}",
                m.entries[i][j],
                want[i][j]
            );
        }
    }
    assert!(m.det < 0.0);
    assert!(two_sig_figs(m.det, -4.55e-13), "{:e}", m.det);
    assert!(pipeline(1.1).report.revalidated);
}

#[test]
fn coefficients_and_angle_at_three() {
    let r = &pipeline(3.0).report;
    let c = r.coefficients.unwrap();
    for (got, want) in c.iter().zip([-0.374, -0.288, 1.245]) {
        assert!((got - want).abs() < 0.005, "{got} vs {want}");
    }
    assert!((r.cos_angle.unwrap() + 0.9893).abs() < 0.002);
    assert!(r.verdict && r.checks.all());
}

#[test]
fn angle_at_one_point_eight() {
    let cos = pipeline(1.8).report.cos_angle.unwrap();
    assert!((cos + 0.99936).abs() < 5e-4, "{cos}");
}

#[test]
fn row_at_two_point_five() {
    let r = &pipeline(2.5).report;
    assert!((r.m.det + 0.0310).abs() < 0.003);
    assert!((r.cos_angle.unwrap() + 0.9972).abs() < 0.001);
    assert!(r.verdict);
}

#[test]
fn verdicts_at_the_ends() {
    for p in [3.0, 1.1] {
        let r = &pipeline(p).report;
        assert!(r.verdict, "p = {p}");
        assert_eq!(r.verdict, r.checks.all());
        let c = r.cos_angle.unwrap();
        assert!((-1.0..=1.0).contains(&c));
    }
}

#[test]
fn zero_pair_makes_m_singular() {
    let ops = &pipeline(3.0).ops;
    let zero = ops.pair.rescaled(0.0, 0.0);
    let m = build_matrix_m_with_pair(ops, &zero).unwrap();
    assert!(m.min_singular_value < 1e-12, "{:e}", m.min_singular_value);
    assert!(m.entries.iter().all(|row| row[0] == 0.0));
    assert!(!m.is_nonsingular(SIGN_FLOOR));
}

#[test]
fn homogeneous_system_gives_zero() {
    let pipe = pipeline(3.0);
    let fs = solve_fstar_with_rhs(&pipe.report.m, [0.0; 3], &pipe.ops, &pipe.hstars).unwrap();
    assert_eq!(fs.coefficients, [0.0; 3]);
    assert_eq!(fs.fstar.max_abs(), 0.0);
}

#[test]
fn linear_system_residual_is_tiny() {
    for p in [3.0, 2.0, 1.1] {
        let pipe = pipeline(p);
        let rhs = [pipe.ops.kern.f_norm_sq(), 0.0, 0.0];
        let fs = solve_fstar_with_rhs(&pipe.report.m, rhs, &pipe.ops, &pipe.hstars).unwrap();
        assert!(fs.system_residual < 1e-10, "p = {p}: {:e}", fs.system_residual);
    }
}

#[test]
fn t_of_fstar_reproduces_f() {
    let pipe = pipeline(2.0);
    let fstar = pipe.report.fstar.as_ref().unwrap();
    let tf = apply_t(&pipe.ops, fstar).unwrap();
    let f = pipe.ops.kern.f();
    assert!(norm_rdr(&(&tf - f)) / norm_rdr(f) < 1e-3);
}

#[test]
fn antiparallel_pairing() {
    let kern = &pipeline(3.0).ops.kern;
    let minus_f = kern.f().scaled(-1.0);
    let (cos, neg) = pairing_sign(&minus_f, kern, SIGN_FLOOR).unwrap();
    assert_eq!(cos, -1.0);
    assert!(neg);
    let zero = kern.f().scaled(0.0);
    assert!(pairing_sign(&zero, kern, SIGN_FLOOR).is_err());
}

#[test]
fn det_consistency() {
    for p in [3.0, 2.0, 1.5, 1.1] {
        let m = &pipeline(p).report.m;
        m.check_consistency(1e-8).unwrap();
        assert!((m.det.abs() - m.det_svd).abs() <= 1e-8 * m.det.abs());
    }
}

#[test]
fn gram_structure_of_b() {
    let pair = &pipeline(2.0).ops.pair;
    let b = build_index_matrix(pair).unwrap();
    let g11 = inner_rdr(pair.h1(), pair.h1()).unwrap();
    let g22 = inner_rdr(pair.h2(), pair.h2()).unwrap();
    let g12 = inner_rdr(pair.h1(), pair.h2()).unwrap();
    assert!((b.entries[0][0] - 2.0 * g11 * g12).abs() <= 1e-8 * b.entries[0][0].abs());
    assert!((b.entries[1][1] - 2.0 * g22 * g12).abs() <= 1e-8 * b.entries[1][1].abs());
    assert!((b.entries[0][1] - (g11 * g22 + g12 * g12)).abs() <= 1e-8 * b.entries[0][1].abs());
}

#[test]
fn empty_sweep_is_empty() {
    assert!(sweep(&[], &VerifyConfig::default()).is_empty());
}

#[test]
fn sweep_keeps_order_and_records_failures() {
    let ps = [1.5, 3.0, 3.5, 2.0];
    let out = sweep(&ps, &VerifyConfig::default());
    let got: Vec<f64> = out.iter().map(|e| e.p).collect();
    assert_eq!(got, ps);
    assert!(out[2].outcome.is_err());
    for i in [0, 1, 3] {
        let r = out[i].outcome.as_ref().unwrap();
        assert_eq!(r.p, ps[i]);
        assert!(r.verdict);
    }
}
