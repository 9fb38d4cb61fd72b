//! Monitored scalars and residuals of the evolution identities along a run.
//!
//! PDE residuals need material-point correspondence, so they are evaluated on
//! remesh-free three-snapshot windows `(t, t + δ, t + 2δ)` at the middle snapshot,
//! with `∂_t` a centered difference and `∂_s`, `Δ = ∂_s²` the unequal-spacing
//! three-point stencils.

use crate::curve::{build_geometry, CurveGeometry, DiscreteCurve};
use crate::error::{Error, Result};
use crate::flow::{baseline_circle_path, Trajectory};
use crate::scalar::{lit, Scalar};
use crate::stencil;
use crate::warp::WarpingFunction;

/// Below this `min Θ` the `v = 1/Θ` residual is not evaluated.
pub const V_RESIDUAL_MIN_THETA: f64 = 0.1;

/// One sampled row of monitored quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    pub length: T,
    pub min_theta: T,
    /// `max 1/Θ`; infinite when the curve is not a graph.
    pub max_v: T,
    pub max_abs_kappa: T,
    pub int_kappa_sq: T,
    /// `L · ∫κ² ds`.
    pub psi: T,
    pub z_min: T,
    pub z_max: T,
    pub res_length_decay: Option<T>,
    pub res_theta_pde: Option<T>,
    pub res_v_pde: Option<T>,
    pub res_kappa_sq_pde: Option<T>,
    /// Slack of the non-graph curvature inequality; `None` when its hypothesis fails.
    pub lemma32_slack: Option<T>,
    /// Slack of `d0² ≤ 2(∫|r'/r| ds)² + 2(∫|κ| ds)²`; `None` when the hypothesis fails.
    pub chain_slack: Option<T>,
    pub max_ds_kappa: T,
    pub max_dss_kappa: T,
    pub comparison_ok: Option<bool>,
}

/// Geometry of a remesh-free window of three equally spaced snapshots.
#[derive(Clone, Debug)]
pub struct WindowGeometry<T> {
    pub dt: T,
    pub geoms: [CurveGeometry<T>; 3],
    pub z: [Vec<T>; 3],
}

impl<T: Scalar> WindowGeometry<T> {
    pub fn new(curves: &[&DiscreteCurve<T>], dt: T, warp: &WarpingFunction<T>) -> Result<Self> {
        if curves.len() != 3 {
            return Err(Error::InsufficientSamples { needed: 3, got: curves.len() });
        }
        let n = curves[0].len();
        if curves.iter().any(|c| c.len() != n) {
            return Err(Error::RemeshInWindow);
        }
        if !(dt > T::zero()) {
            return Err(Error::InvalidParams("window spacing must be positive".into()));
        }
        Ok(Self {
            dt,
            geoms: [build_geometry(curves[0], warp)?, build_geometry(curves[1], warp)?, build_geometry(curves[2], warp)?],
            z: [curves[0].z().to_vec(), curves[1].z().to_vec(), curves[2].z().to_vec()],
        })
    }

    fn time_derivative(&self, f: impl Fn(&CurveGeometry<T>) -> Vec<T>) -> Vec<T> {
        let before = f(&self.geoms[0]);
        let after = f(&self.geoms[2]);
        let span = lit::<T>(2.0) * self.dt;
        before.iter().zip(&after).map(|(&b, &a)| (a - b) / span).collect()
    }

    fn mid(&self) -> &CurveGeometry<T> {
        &self.geoms[1]
    }
}

fn max_abs<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    values.fold(T::zero(), |m, v| m.max(v.abs()))
}

/// `|dL/dt + ∫κ² ds|` at the middle snapshot.
pub fn length_decay_residual<T: Scalar>(win: &WindowGeometry<T>) -> T {
    let dl = (win.geoms[2].length - win.geoms[0].length) / (lit::<T>(2.0) * win.dt);
    (dl + win.mid().int_kappa_sq()).abs()
}

/// L∞ residual of `(∂_t - Δ)Θ = q Θ (1 - Θ²) + ((r'/r)Θ - κ)² Θ` with
/// `q = (r r'' - 2 r'^2)/r^2`.
pub fn theta_pde_residual<T: Scalar>(win: &WindowGeometry<T>, warp: &WarpingFunction<T>) -> Result<T> {
    let g = win.mid();
    let theta_t = win.time_derivative(|g| g.a.clone());
    let lap = stencil::d2(&g.a, &g.ds);
    let mut worst = T::zero();
    for i in 0..g.a.len() {
        let th = g.a[i];
        let q = warp.c3_potential(win.z[1][i])?;
        let drift = g.log_derivative[i] * th - g.kappa[i];
        let rhs = q * th * (T::one() - th * th) + drift * drift * th;
        worst = worst.max((theta_t[i] - lap[i] - rhs).abs());
    }
    Ok(worst)
}

/// L∞ residual of the `v = 1/Θ` evolution
/// `(∂_t - Δ)v = -(2/v)|∂_s v|² - q (v - 1/v) - ((r'/r)Θ - κ)² v`.
pub fn v_pde_residual<T: Scalar>(win: &WindowGeometry<T>, warp: &WarpingFunction<T>) -> Result<T> {
    let min_theta = win.geoms.iter().map(|g| g.min_theta()).fold(T::infinity(), T::min);
    let required = lit::<T>(V_RESIDUAL_MIN_THETA);
    if !(min_theta >= required) {
        return Err(Error::ThetaTooSmall { min_theta: min_theta.as_f64(), required: V_RESIDUAL_MIN_THETA });
    }
    let inv = |g: &CurveGeometry<T>| g.a.iter().map(|a| a.recip()).collect::<Vec<T>>();
    let g = win.mid();
    let v = inv(g);
    let v_t = win.time_derivative(inv);
    let lap = stencil::d2(&v, &g.ds);
    let v_s = stencil::d1(&v, &g.ds);
    let two = lit::<T>(2.0);
    let mut worst = T::zero();
    for i in 0..v.len() {
        let q = warp.c3_potential(win.z[1][i])?;
        let drift = g.log_derivative[i] * g.a[i] - g.kappa[i];
        let rhs = -two / v[i] * v_s[i] * v_s[i] - q * (v[i] - v[i].recip()) - drift * drift * v[i];
        worst = worst.max((v_t[i] - lap[i] - rhs).abs());
    }
    Ok(worst)
}

/// L∞ residual of `(∂_t - Δ)κ² = -2|∂_s κ|² + 2κ²(κ² + K)` with `K = -r''/r`.
pub fn kappa_sq_pde_residual<T: Scalar>(win: &WindowGeometry<T>, warp: &WarpingFunction<T>) -> Result<T> {
    let sq = |g: &CurveGeometry<T>| g.kappa.iter().map(|k| *k * *k).collect::<Vec<T>>();
    let g = win.mid();
    let k2 = sq(g);
    let k2_t = win.time_derivative(sq);
    let lap = stencil::d2(&k2, &g.ds);
    let k_s = stencil::d1(&g.kappa, &g.ds);
    let two = lit::<T>(2.0);
    let mut worst = T::zero();
    for i in 0..k2.len() {
        let gauss = warp.gauss_curvature(win.z[1][i])?;
        let rhs = -two * k_s[i] * k_s[i] + two * k2[i] * (k2[i] + gauss);
        worst = worst.max((k2_t[i] - lap[i] - rhs).abs());
    }
    Ok(worst)
}

/// Outcome of the non-graph curvature inequality check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lemma32<T> {
    /// `min Θ ≤ c0`: slack of the inequality and of the integral chain.
    Checked { slack: T, chain_slack: T },
    /// `min Θ > c0`: nothing to check.
    HypothesisNotMet { min_theta: T },
}

/// With `d0 = 1 - c0`, checks
/// `1/(2L²) - max κ²/d0² ≤ max (r'/r)² / d0²` and the intermediate
/// `d0² ≤ 2(∫|r'/r| ds)² + 2(∫|κ| ds)²`, returning `RHS - LHS` for each.
pub fn lemma32_check<T: Scalar>(geom: &CurveGeometry<T>, c0: T) -> Result<Lemma32<T>> {
    if !(c0 >= T::zero() && c0 < T::one()) {
        return Err(Error::InvalidParams(format!("c0 must lie in [0, 1), got {c0}")));
    }
    let min_theta = geom.min_theta();
    if min_theta > c0 {
        return Ok(Lemma32::HypothesisNotMet { min_theta });
    }
    let d0 = T::one() - c0;
    let d0_sq = d0 * d0;
    let max_k2 = geom.kappa.iter().fold(T::zero(), |m, k| m.max(*k * *k));
    let max_ld2 = geom.log_derivative.iter().fold(T::zero(), |m, l| m.max(*l * *l));
    let l = geom.length;
    let lhs = (lit::<T>(2.0) * l * l).recip() - max_k2 / d0_sq;
    let rhs = max_ld2 / d0_sq;
    let int_ld: T = geom.log_derivative.iter().zip(&geom.dual).map(|(&v, &h)| v.abs() * h).sum();
    let int_k = geom.int_abs_kappa();
    let two = lit::<T>(2.0);
    let chain_slack = two * int_ld * int_ld + two * int_k * int_k - d0_sq;
    Ok(Lemma32::Checked { slack: rhs - lhs, chain_slack })
}

/// Verifies `z(t) < min z_t` and `max z_t < z̃(t)` where `z`, `z̃` solve the
/// horizontal-circle ODE from `z_lower0`, `z_upper0`.
pub fn comparison_check<T: Scalar>(
    times: &[T],
    z_min: &[T],
    z_max: &[T],
    warp: &WarpingFunction<T>,
    z_lower0: T,
    z_upper0: T,
) -> Result<Vec<bool>> {
    let (lower, upper) = comparison_bounds(times, z_min, z_max, warp, z_lower0, z_upper0)?;
    Ok((0..times.len()).map(|i| lower[i] < z_min[i] && z_max[i] < upper[i]).collect())
}

/// Heights of the two enclosing circles at each sample time.
pub fn comparison_bounds<T: Scalar>(
    times: &[T],
    z_min: &[T],
    z_max: &[T],
    warp: &WarpingFunction<T>,
    z_lower0: T,
    z_upper0: T,
) -> Result<(Vec<T>, Vec<T>)> {
    if times.is_empty() || z_min.len() != times.len() || z_max.len() != times.len() {
        return Err(Error::InsufficientSamples { needed: 1, got: times.len().min(z_min.len()).min(z_max.len()) });
    }
    if !(z_lower0 < z_min[0]) {
        return Err(Error::InitialOrderViolated(format!("lower circle {z_lower0} not below min z {}", z_min[0])));
    }
    if !(z_max[0] < z_upper0) {
        return Err(Error::InitialOrderViolated(format!("upper circle {z_upper0} not above max z {}", z_max[0])));
    }
    if !(z_upper0 < warp.domain_upper()) {
        return Err(Error::InitialOrderViolated(format!(
            "upper circle {z_upper0} outside domain bound {}",
            warp.domain_upper()
        )));
    }
    Ok((baseline_circle_path(warp, z_lower0, times)?, baseline_circle_path(warp, z_upper0, times)?))
}

/// `max |∂_s^m κ|` of one curve, `m ≤ 2`.
pub fn max_arclength_derivative<T: Scalar>(geom: &CurveGeometry<T>, m: usize) -> Result<T> {
    if m > 2 {
        return Err(Error::InvalidParams(format!("derivative order {m} above 2")));
    }
    let mut f = geom.kappa.clone();
    for _ in 0..m {
        f = stencil::d1(&f, &geom.ds);
    }
    Ok(max_abs(f.into_iter()))
}

/// Per-sample `max |∂_s^m κ|` along a trajectory.
pub fn derivative_trend<T: Scalar>(traj: &Trajectory<T>, warp: &WarpingFunction<T>, m: usize) -> Result<Vec<T>> {
    traj.samples.iter().map(|s| max_arclength_derivative(&build_geometry(&s.curve, warp)?, m)).collect()
}

/// What [`analyze`] evaluates besides the always-on quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOptions<T> {
    /// `c0` for the non-graph inequality.
    pub c0: T,
    /// Initial heights of the enclosing circles.
    pub sandwich: Option<(T, T)>,
}

impl<T: Scalar> Default for AnalysisOptions<T> {
    fn default() -> Self {
        Self { c0: T::zero(), sandwich: None }
    }
}

/// Computes one [`DiagnosticsRecord`] per sample.
pub fn analyze<T: Scalar>(
    traj: &Trajectory<T>,
    warp: &WarpingFunction<T>,
    opts: &AnalysisOptions<T>,
) -> Result<Vec<DiagnosticsRecord<T>>> {
    let mut records = Vec::with_capacity(traj.samples.len());
    for sample in &traj.samples {
        let g = build_geometry(&sample.curve, warp)?;
        let min_theta = g.min_theta();
        let max_v = if min_theta > T::zero() { min_theta.recip() } else { T::infinity() };
        let int_kappa_sq = g.int_kappa_sq();

        let (mut res_length_decay, mut res_theta_pde, mut res_v_pde, mut res_kappa_sq_pde) = (None, None, None, None);
        if let Some((curves, dt)) = sample.window_curves() {
            let win = WindowGeometry::new(&curves, dt, warp)?;
            res_length_decay = Some(length_decay_residual(&win));
            res_theta_pde = Some(theta_pde_residual(&win, warp)?);
            res_v_pde = v_pde_residual(&win, warp).ok();
            res_kappa_sq_pde = Some(kappa_sq_pde_residual(&win, warp)?);
        }
        let (lemma32_slack, chain_slack) = match lemma32_check(&g, opts.c0)? {
            Lemma32::Checked { slack, chain_slack } => (Some(slack), Some(chain_slack)),
            Lemma32::HypothesisNotMet { .. } => (None, None),
        };

        records.push(DiagnosticsRecord {
            t: sample.t,
            length: g.length,
            min_theta,
            max_v,
            max_abs_kappa: g.max_abs_kappa(),
            int_kappa_sq,
            psi: g.length * int_kappa_sq,
            z_min: sample.curve.z_min(),
            z_max: sample.curve.z_max(),
            res_length_decay,
            res_theta_pde,
            res_v_pde,
            res_kappa_sq_pde,
            lemma32_slack,
            chain_slack,
            max_ds_kappa: max_arclength_derivative(&g, 1)?,
            max_dss_kappa: max_arclength_derivative(&g, 2)?,
            comparison_ok: None,
        });
    }

    if let Some((lo, hi)) = opts.sandwich {
        let times: Vec<T> = records.iter().map(|r| r.t).collect();
        let zmin: Vec<T> = records.iter().map(|r| r.z_min).collect();
        let zmax: Vec<T> = records.iter().map(|r| r.z_max).collect();
        let ok = comparison_check(&times, &zmin, &zmax, warp, lo, hi)?;
        for (r, flag) in records.iter_mut().zip(ok) {
            r.comparison_ok = Some(flag);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Preset;
    use crate::flow::{run, SolverParams};

    fn recip() -> WarpingFunction<f64> {
        WarpingFunction::reciprocal(-1.0).unwrap()
    }

    fn window_of(curve: DiscreteCurve<f64>, warp: &WarpingFunction<f64>) -> WindowGeometry<f64> {
        let params = SolverParams { t_end: 1e-9, sample_dt: 1.0, ..Default::default() };
        let traj = run(warp, curve, &params).unwrap();
        let (curves, dt) = traj.samples[0].window_curves().unwrap();
        WindowGeometry::new(&curves, dt, warp).unwrap()
    }

    #[test]
    fn flat_circle_residuals_vanish() {
        let flat = WarpingFunction::constant(1.0, 0.0).unwrap();
        let win = window_of(Preset::Circle { z0: -1.0, n: 64, winding: 1 }.build().unwrap(), &flat);
        assert_eq!(length_decay_residual(&win), 0.0);
        assert!(theta_pde_residual(&win, &flat).unwrap() < 1e-12);
        assert!(kappa_sq_pde_residual(&win, &flat).unwrap() < 1e-12);
        assert!(v_pde_residual(&win, &flat).unwrap() < 1e-12);
    }

    #[test]
    fn warped_circle_theta_and_v_residuals_vanish() {
        let w = recip();
        let win = window_of(Preset::Circle { z0: -2.0, n: 128, winding: 1 }.build().unwrap(), &w);
        assert!(theta_pde_residual(&win, &w).unwrap() <= 1e-8);
        assert!(v_pde_residual(&win, &w).unwrap() <= 1e-8);
    }

    #[test]
    fn warped_circle_kappa_sq_and_length_residuals_small() {
        // Closed form: d/dt (r'/r)^2 along dz/dt = -r'/r equals 2κ²(κ² - r''/r).
        let w = recip();
        let win = window_of(Preset::Circle { z0: -2.0, n: 256, winding: 1 }.build().unwrap(), &w);
        assert!(kappa_sq_pde_residual(&win, &w).unwrap() < 1e-3);
        assert!(length_decay_residual(&win) < 1e-3);
    }

    #[test]
    fn v_residual_requires_graph() {
        let w = recip();
        let win = window_of(Preset::Fold { z0: -5.0, depth: 1.0, width: 0.5, n: 256 }.build().unwrap(), &w);
        assert!(matches!(v_pde_residual(&win, &w), Err(Error::ThetaTooSmall { .. })));
    }

    #[test]
    fn window_shape_errors() {
        let w = recip();
        let a = Preset::Circle { z0: -2.0, n: 16, winding: 1 }.build().unwrap();
        let b = Preset::Circle { z0: -2.0, n: 32, winding: 1 }.build().unwrap();
        assert!(matches!(WindowGeometry::new(&[&a, &a], 0.1, &w), Err(Error::InsufficientSamples { .. })));
        assert!(matches!(WindowGeometry::new(&[&a, &b, &a], 0.1, &w), Err(Error::RemeshInWindow)));
    }

    #[test]
    fn lemma32_on_fold_and_graph() {
        let w = WarpingFunction::shifted_reciprocal(0.2, -1.0).unwrap();
        let fold = Preset::Fold { z0: -5.0, depth: 1.0, width: 0.5, n: 256 }.build_equidistributed(&w, 8).unwrap();
        let g = build_geometry(&fold, &w).unwrap();
        match lemma32_check(&g, 0.0).unwrap() {
            Lemma32::Checked { slack, chain_slack } => {
                assert!(slack >= 0.0);
                assert!(chain_slack >= 0.0);
            }
            other => panic!("{other:?}"),
        }
        let circle = Preset::Circle { z0: -2.0, n: 32, winding: 1 }.build().unwrap();
        let g = build_geometry(&circle, &w).unwrap();
        assert!(matches!(lemma32_check(&g, 0.0).unwrap(), Lemma32::HypothesisNotMet { .. }));
        assert!(lemma32_check(&g, 1.0).is_err());
    }

    #[test]
    fn comparison_preconditions() {
        let w = recip();
        let t = [0.0, 1.0];
        let ok = comparison_check(&t, &[-2.0, -2.5], &[-2.0, -2.4], &w, -2.5, -1.5).unwrap();
        assert_eq!(ok, vec![true, true]);
        assert!(matches!(
            comparison_check(&t, &[-2.0, -2.5], &[-2.0, -2.4], &w, -2.5, -2.1),
            Err(Error::InitialOrderViolated(_))
        ));
        assert!(matches!(
            comparison_check(&t, &[-2.0, -2.5], &[-2.0, -2.4], &w, -1.9, -1.5),
            Err(Error::InitialOrderViolated(_))
        ));
    }

    #[test]
    fn circle_sandwich_preserved() {
        let w = recip();
        let c = Preset::Circle { z0: -2.0, n: 32, winding: 1 }.build().unwrap();
        let params = SolverParams { t_end: 0.5, sample_dt: 0.1, ..Default::default() };
        let traj = run(&w, c, &params).unwrap();
        let opts = AnalysisOptions { c0: 0.0, sandwich: Some((-2.0 - 1e-6, -2.0 + 1e-6)) };
        let recs = analyze(&traj, &w, &opts).unwrap();
        assert!(recs.iter().all(|r| r.comparison_ok == Some(true)));
    }

    #[test]
    fn trend_of_flat_circle_is_zero_and_m0_matches_record() {
        let flat = WarpingFunction::constant(1.0, 0.0).unwrap();
        let c = Preset::Circle { z0: -2.0, n: 32, winding: 1 }.build().unwrap();
        let traj = run(&flat, c, &SolverParams { t_end: 0.1, ..Default::default() }).unwrap();
        for m in 0..=2 {
            assert!(derivative_trend(&traj, &flat, m).unwrap().iter().all(|v| *v < 1e-12));
        }
        let w = recip();
        let c = Preset::GraphSine { z0: -2.0, amp: 0.3, n: 64 }.build().unwrap();
        let traj = run(&w, c, &SolverParams { t_end: 0.1, ..Default::default() }).unwrap();
        let recs = analyze(&traj, &w, &AnalysisOptions::default()).unwrap();
        let m0 = derivative_trend(&traj, &w, 0).unwrap();
        for (r, k) in recs.iter().zip(m0) {
            assert_eq!(r.max_abs_kappa, k);
            assert_eq!(r.psi, r.length * r.int_kappa_sq);
        }
        assert!(derivative_trend(&traj, &w, 3).is_err());
    }
}
