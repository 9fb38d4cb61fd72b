use approx::assert_relative_eq;
use proptest::prelude::*;
use warpflow_core::curve::{build_geometry, remesh, Preset};
use warpflow_core::diagnostics::{analyze, AnalysisOptions};
use warpflow_core::flow::{baseline_circle_ode, run, SolverParams};
use warpflow_core::warp::WarpingFunction;
use warpflow_core::Warp;

fn families() -> Vec<(Warp, f64)> {
    let recip = Warp::reciprocal(-1.0).unwrap();
    vec![
        (Warp::exponential(0.5, 0.0).unwrap(), -12.0),
        (Warp::exponential(1.7, 0.0).unwrap(), -6.0),
        (recip.clone(), -30.0),
        (Warp::shifted_reciprocal(0.2, -1.0).unwrap(), -30.0),
        (Warp::constant(1.3, 0.0).unwrap(), -10.0),
        (Warp::even_bowl(0.5, 0.25, 4.0).unwrap(), -6.0),
        (Warp::shifted_reciprocal(0.2, -1.0).unwrap().extend_convex_at_infinity(-6.0).unwrap(), -30.0),
    ]
}

proptest! {
    #[test]
    fn derivatives_match_finite_differences(which in 0usize..7, u in 0.0f64..1.0, order in 1usize..3) {
        let (warp, deep) = families().swap_remove(which);
        let top = warp.domain_upper() - 0.5;
        let z = deep + (top - deep) * u;
        let h = 1e-4;
        let fd = (warp.eval(z + h, order - 1).unwrap() - warp.eval(z - h, order - 1).unwrap()) / (2.0 * h);
        let exact = warp.eval(z, order).unwrap();
        let scale = exact.abs().max(warp.eval(z, order - 1).unwrap().abs());
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "z = {z}, order {order}: fd {fd} exact {exact}");
    }

    #[test]
    fn log_derivative_is_the_quotient(which in 0usize..7, u in 0.0f64..1.0) {
        let (warp, deep) = families().swap_remove(which);
        let z = deep + (warp.domain_upper() - 0.1 - deep) * u;
        let quotient = warp.eval(z, 1).unwrap() / warp.eval(z, 0).unwrap();
        prop_assert_eq!(warp.log_derivative(z).unwrap().to_bits(), quotient.to_bits());
    }

    #[test]
    fn extension_is_the_base_above_a0(u in 0.0f64..1.0, order in 0usize..4) {
        let base = Warp::shifted_reciprocal(0.2, -1.0).unwrap();
        let ext = base.extend_convex_at_infinity(-6.0).unwrap();
        let z = -6.0 + 5.0 * u;
        prop_assert_eq!(ext.eval(z, order).unwrap().to_bits(), base.eval(z, order).unwrap().to_bits());
    }

    #[test]
    fn remesh_keeps_winding(kind in 0usize..3, winding in 1i64..4, n in 16usize..200, target in 16usize..300) {
        let warp = Warp::reciprocal(-1.0).unwrap();
        let preset = match kind {
            0 => Preset::Circle { z0: -2.0, n, winding },
            1 => Preset::GraphSine { z0: -2.0, amp: 0.5, n },
            _ => Preset::Fold { z0: -3.0, depth: 1.0, width: 0.5, n: n.max(64) },
        };
        let curve = preset.build().unwrap();
        let before = curve.winding_number().unwrap();
        let after = remesh(&curve, &warp, target).unwrap();
        prop_assert_eq!(after.len(), target);
        prop_assert_eq!(after.winding_number().unwrap(), before);
    }

    #[test]
    fn frame_is_orthonormal(kind in 0usize..3, z0 in -4.0f64..-2.0, amp in 0.0f64..0.8, n in 32usize..256) {
        let warp = Warp::exponential(0.5, 0.0).unwrap();
        let preset = match kind {
            0 => Preset::Circle { z0, n, winding: 1 },
            1 => Preset::GraphSine { z0, amp, n },
            _ => Preset::Fold { z0, depth: amp + 0.2, width: 0.5, n: n.max(64) },
        };
        let geom = build_geometry(&preset.build().unwrap(), &warp).unwrap();
        for i in 0..n.min(geom.a.len()) {
            prop_assert!((geom.a[i] * geom.a[i] + geom.b[i] * geom.b[i] - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn psi_is_length_times_curvature_energy() {
    let warp = Warp::reciprocal(-1.0).unwrap();
    let initial = Preset::GraphSine { z0: -2.0, amp: 0.4, n: 96 }.build().unwrap();
    let params = SolverParams { t_end: 0.2, sample_dt: 0.05, ..SolverParams::default() };
    let traj = run(&warp, initial, &params).unwrap();
    let records = analyze(&traj, &warp, &AnalysisOptions::default()).unwrap();
    assert_eq!(records.len(), 5);
    for r in &records {
        let product = r.length * r.int_kappa_sq;
        assert!((r.psi - product).abs() <= 4.0 * f64::EPSILON * product.abs(), "{} vs {product}", r.psi);
    }
}

#[test]
fn circle_ode_closed_forms() {
    let exp = Warp::exponential(0.5, 0.0).unwrap();
    let recip = Warp::reciprocal(-1.0).unwrap();
    let flat = Warp::constant(2.0, 0.0).unwrap();
    for t in [0.0, 0.5, 1.0, 2.5, 4.0] {
        assert_relative_eq!(baseline_circle_ode(&exp, -3.0, t).unwrap(), -3.0 - 0.5 * t, max_relative = 1e-10);
        assert_relative_eq!(baseline_circle_ode(&recip, -2.0, t).unwrap(), -(4.0 + 2.0 * t).sqrt(), max_relative = 1e-10);
        assert_eq!(baseline_circle_ode(&flat, -1.0, t).unwrap(), -1.0);
    }
}

#[test]
fn single_precision_circle_tracks_the_ode() {
    let warp = WarpingFunction::<f32>::exponential(0.5, 0.0).unwrap();
    let initial = Preset::Circle { z0: -2.0f32, n: 32, winding: 1 }.build().unwrap();
    let params = SolverParams::<f32> { t_end: 0.5, sample_dt: 0.25, ..SolverParams::default() };
    let traj = run(&warp, initial, &params).unwrap();
    let last = traj.samples.last().unwrap();
    for z in last.curve.z() {
        assert!((z - (-2.0 - 0.5 * last.t)).abs() < 1e-4, "{z} at t = {}", last.t);
    }
}
