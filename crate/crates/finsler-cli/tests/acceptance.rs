//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `-- --nocapture` to see them). Every tolerance
//! is pinned here, not configurable.

use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use finsler_core::curvature::{
    berwald_covariant_derivative, constant_curvature_identity_residual, curvature_vector_field,
    flag_curvature_residual, nabla_r_residual, second_covariant_both_routes,
};
use finsler_core::holonomy::{
    certify_spec, circle_directions, gram_rank, independence_quadruple_randers, loop_holonomy,
    nonlinearity_defect, parallel_transport, CertVerdict, CertifyParams, ConditionTag, Curve,
    PolarProfile, RankVerdict,
};
use finsler_core::holonomy::rank::{sample_on_grid, DEFAULT_RANK_TOL};
use finsler_core::jet::Profile;
use finsler_core::metrics::{MetricSign, MetricSpec};
use finsler_core::ode::OdeOptions;
use finsler_core::spray::geodesic_integrate;
use finsler_core::submanifold;

fn chart_point(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-rmax..rmax)).collect();
        if x.iter().map(|a| a * a).sum::<f64>().sqrt() < rmax {
            return x;
        }
    }
}

fn direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        if y.iter().map(|a| a * a).sum::<f64>().sqrt() > 0.2 {
            return y;
        }
    }
}

fn pass(line: &str) {
    println!("ACCEPTANCE {line}: PASS");
}

/// 1. Flag curvature of the Randers family is the constant −1/4.
#[test]
fn criterion_01_flag_curvature_constant() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for sign in [MetricSign::Plus, MetricSign::Minus] {
        for a in [vec![0.0, 0.0], vec![0.3, 0.1]] {
            let spec = MetricSpec::randers(2, a, sign).unwrap();
            for _ in 0..100 {
                let x = chart_point(&mut rng, 2, 0.6);
                let y = direction(&mut rng, 2);
                let fr = flag_curvature_residual(&spec, &x, &y, -0.25).unwrap();
                worst = worst.max(fr.residual);
                assert!(fr.residual <= 1e-6, "residual {}", fr.residual);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() <= 10.0, "took {elapsed:?}");
    pass(&format!(
        "1 flag-curvature lambda=-1/4 (worst residual {worst:.2e}, {elapsed:?})"
    ));
}

/// 2. Closed-form projective factor equals its derivative-based recomputation.
#[test]
fn criterion_02_projective_factor_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for sign in [MetricSign::Plus, MetricSign::Minus] {
        let spec = MetricSpec::randers(2, vec![0.3, 0.1], sign).unwrap();
        for _ in 0..100 {
            let x = chart_point(&mut rng, 2, 0.6);
            let y = direction(&mut rng, 2);
            let closed = spec.projective_factor(&x, &y).unwrap();
            let numeric = spec.projective_factor_from_f(&x, &y).unwrap();
            let rel = (closed - numeric).abs() / (1.0 + closed.abs());
            worst = worst.max(rel);
            assert!(rel <= 1e-8, "{closed} vs {numeric}");
        }
    }
    pass(&format!("2 projective-factor identity (worst rel {worst:.2e})"));
}

/// 3. Integrated Randers geodesics stay on their chord line.
#[test]
fn criterion_03_straight_geodesics() {
    let mut worst = 0.0f64;
    for sign in [MetricSign::Plus, MetricSign::Minus] {
        let spec = MetricSpec::randers(2, vec![0.3, 0.1], sign).unwrap();
        for dir_angle in [0.0f64, 0.9, 2.2, 4.0] {
            let y0 = [dir_angle.cos(), dir_angle.sin()];
            let probe =
                geodesic_integrate(&spec, &[0.0, 0.0], &y0, 100.0, &OdeOptions::default())
                    .unwrap();
            let t_exit = probe.exit_time.expect("ball chart must be exited");
            let tr = geodesic_integrate(
                &spec,
                &[0.0, 0.0],
                &y0,
                0.8 * t_exit,
                &OdeOptions::default(),
            )
            .unwrap();
            let dev = tr.chord_deviation();
            worst = worst.max(dev);
            assert!(dev <= 1e-6, "deviation {dev}");
        }
    }
    pass(&format!("3 straight geodesics (worst deviation {worst:.2e})"));
}

/// 4. Transport invariants: norm preservation, positive homogeneity, and the
///    linear/nonlinear holonomy split between the control and Randers families.
#[test]
fn criterion_04_transport_invariants() {
    let opts = OdeOptions::default();
    let loop_c = Curve::square_loop(&[0.0, 0.0], 0.3);
    let dirs = circle_directions(64);

    // Norm preservation and homogeneity on the Randers loop.
    let spec = MetricSpec::randers(2, vec![0.3, 0.1], MetricSign::Plus).unwrap();
    let one = parallel_transport(&spec, &loop_c, &[0.7, 0.2], &opts).unwrap();
    let two = parallel_transport(&spec, &loop_c, &[1.4, 0.4], &opts).unwrap();
    assert!(one.f_drift <= 1e-7, "drift {}", one.f_drift);
    let mut hom = 0.0f64;
    for i in 0..2 {
        hom = hom.max((two.y_end[i] - 2.0 * one.y_end[i]).abs() / (1.0 + one.y_end[i].abs()));
    }
    assert!(hom <= 1e-8, "homogeneity defect {hom}");

    // Linear controls.
    let mut linear_worst = 0.0f64;
    for spec in [MetricSpec::Euclidean { n: 2 }, MetricSpec::Klein { n: 2 }] {
        let map = loop_holonomy(&spec, &loop_c, &dirs, &opts).unwrap();
        assert!(map.max_f_drift <= 1e-7);
        let defect = nonlinearity_defect(&map).unwrap();
        linear_worst = linear_worst.max(defect);
        assert!(defect <= 1e-7, "{spec:?} defect {defect}");
    }

    // Non-Riemannian holonomy must be visibly nonlinear, both signs.
    let mut nonlinear_best = f64::INFINITY;
    for sign in [MetricSign::Plus, MetricSign::Minus] {
        let spec = MetricSpec::randers(2, vec![0.0, 0.0], sign).unwrap();
        let map = loop_holonomy(&spec, &loop_c, &dirs, &opts).unwrap();
        assert!(map.max_f_drift <= 1e-7, "drift {}", map.max_f_drift);
        let defect = nonlinearity_defect(&map).unwrap();
        nonlinear_best = nonlinear_best.min(defect);
        assert!(defect > 1e-4, "{sign:?} defect {defect}");
    }
    pass(&format!(
        "4 transport invariants (drift {:.2e}, homogeneity {hom:.2e}, linear defect {linear_worst:.2e}, nonlinear defect {nonlinear_best:.2e})",
        one.f_drift
    ));
}

/// 5. The Berwald derivative of the curvature tensor vanishes numerically.
#[test]
fn criterion_05_nabla_r_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    for spec in [
        MetricSpec::randers(2, vec![0.3, 0.1], MetricSign::Plus).unwrap(),
        MetricSpec::Klein { n: 2 },
    ] {
        for _ in 0..30 {
            let x = chart_point(&mut rng, 2, 0.5);
            let y = direction(&mut rng, 2);
            let w = direction(&mut rng, 2);
            let res = nabla_r_residual(&spec, &x, &y, &w).unwrap();
            worst = worst.max(res);
            assert!(res <= 1e-6, "{spec:?}: {res}");
        }
    }
    pass(&format!("5 nabla_W R = 0 (worst {worst:.2e})"));
}

/// 6. Closed-form first and second covariant derivatives match the generic
///    route, and the projective constant-curvature identity holds.
#[test]
fn criterion_06_covariant_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let spec = MetricSpec::randers(2, vec![0.3, 0.1], MetricSign::Plus).unwrap();
    let mut worst1 = 0.0f64;
    let mut worst2 = 0.0f64;
    let mut worst_id = 0.0f64;
    for _ in 0..30 {
        let x = chart_point(&mut rng, 2, 0.45);
        let y = direction(&mut rng, 2);
        let w = direction(&mut rng, 2);
        let z = direction(&mut rng, 2);

        // First derivative vs the trace closed form.
        let field = curvature_vector_field(&spec, &x, &[1.0, 0.0], &[0.0, 1.0]);
        let generic = berwald_covariant_derivative(&spec, &field, &w)
            .eval(&x, &y)
            .unwrap();
        let p = spec.p_jet(&x, &y, Profile::fiber(1)).unwrap();
        let coef: f64 = 3.0 * (0..2).map(|k| p.dy[k] * w[k]).sum::<f64>();
        let xi = field.at(&y).unwrap();
        let scale = xi.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1.0);
        for i in 0..2 {
            let rel = (generic[i] - coef * xi[i]).abs() / scale;
            worst1 = worst1.max(rel);
            assert!(rel <= 1e-6, "first derivative rel {rel}");
        }

        // Second derivative closed form vs nested generic.
        let (closed, nested) = second_covariant_both_routes(&spec, &x, &y, &w, &z).unwrap();
        let scale = closed.iter().map(|a| a.abs()).fold(0.0, f64::max).max(1.0);
        for i in 0..2 {
            let rel = (closed[i] - nested[i]).abs() / scale;
            worst2 = worst2.max(rel);
            assert!(rel <= 1e-6, "second derivative rel {rel}");
        }

        // Mixed base/fiber derivative identity linking P, g and lambda.
        let idres = constant_curvature_identity_residual(&spec, &x, &y, -0.25).unwrap();
        worst_id = worst_id.max(idres);
        assert!(idres <= 1e-6, "identity residual {idres}");
    }
    pass(&format!(
        "6 covariant closed forms (first {worst1:.2e}, second {worst2:.2e}, identity {worst_id:.2e})"
    ));
}

/// 7. Polar closed-form partials agree with jet differentiation at 1e-8 over
///    64 angles for five profiles, and the opposite sign for the product term
///    is off by O(1), pinned so a sign regression cannot sneak in.
#[test]
fn criterion_07_polar_partials_oracle() {
    let profiles: Vec<(&str, PolarProfile)> = vec![
        ("r=0", PolarProfile::constant(0.0)),
        ("r=0.4", PolarProfile::constant(0.4)),
        (
            "r=0.1 sin t",
            PolarProfile::from_fn(|t| (0.1 * t.sin(), 0.1 * t.cos(), -0.1 * t.sin())),
        ),
        (
            "r=0.1 sin 2t",
            PolarProfile::from_fn(|t| {
                (
                    0.1 * (2.0 * t).sin(),
                    0.2 * (2.0 * t).cos(),
                    -0.4 * (2.0 * t).sin(),
                )
            }),
        ),
        (
            "r=0.2 cos t + 0.05 sin 3t",
            PolarProfile::from_fn(|t| {
                (
                    0.2 * t.cos() + 0.05 * (3.0 * t).sin(),
                    -0.2 * t.sin() + 0.15 * (3.0 * t).cos(),
                    -0.2 * t.cos() - 0.45 * (3.0 * t).sin(),
                )
            }),
        ),
    ];
    let mut worst = 0.0f64;
    let mut sign_gap = 0.0f64;
    for (name, profile) in &profiles {
        let prog = profile.to_program();
        for k in 0..64 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let y = [t.cos(), t.sin()];
            let j = finsler_core::jet::lift_eval_fiber(&*prog, &y, Profile::fiber(2)).unwrap();
            let partials = profile.partials(t);
            let d1 = (partials.p_y1 - j.dy[0]).abs();
            let d2 = (partials.p_y2 - j.dy[1]).abs();
            let prod_jet = j.v * j.dyy_at(0, 1);
            let d3 = (partials.p_p12 - prod_jet).abs();
            worst = worst.max(d1).max(d2).max(d3);
            assert!(
                d1 <= 1e-8 && d2 <= 1e-8 && d3 <= 1e-8,
                "{name} at t={t}: {d1} {d2} {d3}"
            );

            // The flipped product sign must disagree with the oracle by O(1)
            // where the term is not tiny.
            let (r, dr, ddr) = profile.eval(t);
            let flipped = (dr * dr + 1.0 - ddr) * (-2.0 * r).exp() * t.sin() * t.cos();
            sign_gap = sign_gap.max((flipped - prod_jet).abs());
        }
    }
    assert!(
        sign_gap >= 0.5,
        "flipped sign should be O(1) wrong, gap {sign_gap}"
    );
    pass(&format!(
        "7 polar partials oracle (worst {worst:.2e}, flipped-sign gap {sign_gap:.2})"
    ));
}

/// 8. Rank certificates: exact Gram values, degenerate dependents, the two
///    certifying configurations with margin, the degenerate Randers control,
///    and verdict stability under grid doubling.
#[test]
fn criterion_08_rank_certificates() {
    // Exact Gram of the orthogonal trigonometric quadruple.
    let q = [
        sample_on_grid("1", 256, |_| 1.0),
        sample_on_grid("cos", 256, f64::cos),
        sample_on_grid("sin", 256, f64::sin),
        sample_on_grid("cos*sin", 256, |t| t.cos() * t.sin()),
    ];
    let cert = gram_rank(&q, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(cert.rank, 4);
    let expected = [1.0, 0.5, 0.5, 0.125];
    for (s, e) in cert.singular_values.iter().zip(expected) {
        assert!((s - e).abs() <= 1e-3, "{s} vs {e}");
    }

    // An exact linear dependence can never certify.
    let dep = [
        sample_on_grid("1", 256, |_| 1.0),
        sample_on_grid("cos", 256, f64::cos),
        sample_on_grid("sin", 256, f64::sin),
        sample_on_grid("2+3cos", 256, |t| 2.0 + 3.0 * t.cos()),
    ];
    let dep_cert = gram_rank(&dep, DEFAULT_RANK_TOL).unwrap();
    assert!(dep_cert.rank <= 3);
    assert_eq!(dep_cert.verdict, RankVerdict::Degenerate);

    // Certifying configurations with quantitative margin.
    let randers = MetricSpec::randers(2, vec![0.3, 0.1], MetricSign::Plus).unwrap();
    let rc = certify_spec(&randers, &CertifyParams::new(ConditionTag::C)).unwrap();
    assert_eq!(rc.verdict, CertVerdict::Certified);
    assert!(rc.rel_gap > 1e-3, "C margin {}", rc.rel_gap);
    assert!(rc.grid.doubled_n_consistent);

    let bryant = MetricSpec::bryant_shen(2, std::f64::consts::FRAC_PI_6).unwrap();
    let bc = certify_spec(&bryant, &CertifyParams::new(ConditionTag::B)).unwrap();
    assert_eq!(bc.verdict, CertVerdict::Certified);
    assert!(bc.rel_gap > 1e-3, "B margin {}", bc.rel_gap);
    assert!(bc.grid.doubled_n_consistent);

    // The displayed trigonometric control degenerates at a = 0, λ = 1.
    let control = independence_quadruple_randers(&[0.0, 0.0], 1.0, MetricSign::Plus, 256);
    let ctrl_cert = gram_rank(&control, DEFAULT_RANK_TOL).unwrap();
    assert_eq!(ctrl_cert.rank, 3);

    // Stability: doubling the grid must not flip any of these verdicts.
    let quad512 = independence_quadruple_randers(&[0.3, 0.1], -0.25, MetricSign::Plus, 512);
    let quad256 = independence_quadruple_randers(&[0.3, 0.1], -0.25, MetricSign::Plus, 256);
    assert_eq!(
        gram_rank(&quad256, DEFAULT_RANK_TOL).unwrap().verdict,
        gram_rank(&quad512, DEFAULT_RANK_TOL).unwrap().verdict,
    );
    pass(&format!(
        "8 rank certificates (C margin {:.2e}, B margin {:.2e})",
        rc.rel_gap, bc.rel_gap
    ));
}

/// 9. Plane restriction: transversal spray, curvature extension, and the
///    certification verdict transferring from the plane to the parent.
#[test]
fn criterion_09_submanifold_consistency() {
    let spec = MetricSpec::randers(3, vec![0.3, 0.1, 0.0], MetricSign::Plus).unwrap();
    let r = submanifold::restrict(&spec, (0, 1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst_g = 0.0f64;
    for _ in 0..50 {
        let x = chart_point(&mut rng, 2, 0.6);
        let y = direction(&mut rng, 2);
        let t = r.transversal_spray_norm(&x, &y).unwrap();
        worst_g = worst_g.max(t);
        assert!(t <= 1e-10, "transversal G {t}");
    }
    let mut worst_k = 0.0f64;
    for _ in 0..20 {
        let x = chart_point(&mut rng, 2, 0.55);
        let y = direction(&mut rng, 2);
        let xv = direction(&mut rng, 2);
        let yv = direction(&mut rng, 2);
        let (in_plane, transversal) = r.curvature_extension_residual(&x, &y, &xv, &yv).unwrap();
        worst_k = worst_k.max(in_plane).max(transversal);
        assert!(in_plane <= 1e-7, "in-plane {in_plane}");
        assert!(transversal <= 1e-8, "transversal {transversal}");
    }
    let through_plane =
        submanifold::certify_via_plane(&spec, (0, 1), &CertifyParams::new(ConditionTag::C))
            .unwrap();
    let native = MetricSpec::randers(2, vec![0.3, 0.1], MetricSign::Plus).unwrap();
    let direct = certify_spec(&native, &CertifyParams::new(ConditionTag::C)).unwrap();
    assert_eq!(through_plane.verdict, CertVerdict::Certified);
    assert_eq!(through_plane.verdict, direct.verdict);
    assert_eq!(through_plane.rank, direct.rank);
    pass(&format!(
        "9 submanifold consistency (transversal G {worst_g:.2e}, curvature {worst_k:.2e})"
    ));
}

/// 10. Byte-identical reports for a fixed config and seed, through the real
///     binary.
#[test]
fn criterion_10_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let metric = dir.path().join("randers.json");
    std::fs::write(
        &metric,
        r#"{"family":"randers_shen","n":2,"a":[0.3,0.1],"sign":1.0,"lambda":-0.25}"#,
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_finsler");

    let run_to = |out: &std::path::Path| {
        let status = Command::new(bin)
            .args([
                "certify",
                "--condition",
                "C",
                "--metric",
                metric.to_str().unwrap(),
                "--seed",
                "42",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    };
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    run_to(&a);
    run_to(&b);
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ba.is_empty());
    assert_eq!(ba, bb, "reports must be byte-identical");

    // The curvature sweep is seeded and must reproduce too.
    let run_csv = |out: &std::path::Path| {
        let status = Command::new(bin)
            .args([
                "curvature",
                "--metric",
                metric.to_str().unwrap(),
                "--samples",
                "25",
                "--seed",
                "7",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    };
    let (ca, cb) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_csv(&ca);
    run_csv(&cb);
    assert_eq!(std::fs::read(&ca).unwrap(), std::fs::read(&cb).unwrap());
    pass("10 deterministic reports (byte-identical JSON and CSV)");
}
