//! Pass/fail evaluation of the checks requested by a scenario.

use serde::Serialize;
use warpflow_core::curve::Preset;
use warpflow_core::diagnostics::comparison_bounds;
use warpflow_core::flow::baseline_circle_path;
use warpflow_core::{Record, Trajectory, Warp};

use crate::config::Check;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub passed: bool,
    /// Smallest margin by which the check held; negative when it failed.
    pub worst_slack: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    fn from_slack(slack: f64, detail: String) -> Self {
        Self { passed: slack >= 0.0, worst_slack: Some(slack), detail }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self { passed: false, worst_slack: None, detail: detail.into() }
    }
}

pub struct Context<'a> {
    pub warp: &'a Warp,
    pub preset: &'a Preset<f64>,
    pub traj: &'a Trajectory,
    pub records: &'a [Record],
    pub t0: Option<f64>,
    pub margin: f64,
}

impl Context<'_> {
    fn t0_index(&self) -> Option<usize> {
        let t0 = self.t0?;
        self.records.iter().position(|r| r.t == t0)
    }
}

fn worst_residual(records: &[Record], pick: impl Fn(&Record) -> Option<f64>) -> Option<f64> {
    records.iter().filter_map(pick).fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

fn residual_check(records: &[Record], tol: f64, label: &str, pick: impl Fn(&Record) -> Option<f64>) -> CheckOutcome {
    match worst_residual(records, pick) {
        Some(worst) => CheckOutcome::from_slack(tol - worst, format!("max {label} residual {worst:.3e} (tol {tol:.1e})")),
        None => CheckOutcome::fail(format!("no window produced a {label} residual")),
    }
}

/// Sup over samples and vertices of `|z - z_ode(t)|` for a horizontal circle start.
pub fn circle_sup_error(warp: &Warp, preset: &Preset<f64>, traj: &Trajectory) -> Option<f64> {
    let Preset::Circle { z0, .. } = *preset else { return None };
    let path = baseline_circle_path(warp, z0, &traj.times()).ok()?;
    let mut worst = 0.0f64;
    for (s, z_ode) in traj.samples.iter().zip(path) {
        for z in s.curve.z() {
            worst = worst.max((z - z_ode).abs());
        }
    }
    Some(worst)
}

pub fn evaluate(check: &Check, ctx: &Context) -> CheckOutcome {
    let recs = ctx.records;
    if recs.is_empty() {
        return CheckOutcome::fail("no samples");
    }
    match *check {
        Check::GraphTime => match ctx.t0_index() {
            Some(i) => {
                let worst = recs[i..].iter().map(|r| r.min_theta).fold(f64::INFINITY, f64::min);
                CheckOutcome::from_slack(
                    worst - ctx.margin,
                    format!("T0 = {}, min theta from T0 on {worst:.4e}", recs[i].t),
                )
            }
            None => CheckOutcome::fail("no graph time detected"),
        },
        Check::GraphPreserved => {
            let worst = recs.iter().map(|r| r.min_theta).fold(f64::INFINITY, f64::min);
            strictly_positive(worst, format!("min theta over samples {worst:.4e}"))
        }
        Check::VMonotone { tol } => {
            if recs.iter().any(|r| !r.max_v.is_finite()) {
                return CheckOutcome::fail("max v infinite at some sample");
            }
            let rise = recs.windows(2).map(|w| w[1].max_v - w[0].max_v).fold(f64::NEG_INFINITY, f64::max);
            let rise = rise.max(0.0);
            CheckOutcome::from_slack(tol - rise, format!("largest per-sample increase of max v {rise:.3e}"))
        }
        Check::Lemma32 { tol, .. } => {
            let slacks: Vec<f64> =
                recs.iter().flat_map(|r| r.lemma32_slack.into_iter().chain(r.chain_slack)).collect();
            if slacks.is_empty() {
                return CheckOutcome { passed: true, worst_slack: None, detail: "hypothesis never met".into() };
            }
            let worst = slacks.iter().copied().fold(f64::INFINITY, f64::min);
            let checked = recs.iter().filter(|r| r.lemma32_slack.is_some()).count();
            CheckOutcome::from_slack(worst + tol, format!("{checked} samples checked, worst slack {worst:.4e}"))
        }
        Check::Comparison { z_lower, z_upper } => {
            let times: Vec<f64> = recs.iter().map(|r| r.t).collect();
            let zmin: Vec<f64> = recs.iter().map(|r| r.z_min).collect();
            let zmax: Vec<f64> = recs.iter().map(|r| r.z_max).collect();
            match comparison_bounds(&times, &zmin, &zmax, ctx.warp, z_lower, z_upper) {
                Ok((lo, hi)) => {
                    let mut worst = f64::INFINITY;
                    let mut held = 0;
                    for i in 0..times.len() {
                        let gap = (zmin[i] - lo[i]).min(hi[i] - zmax[i]);
                        worst = worst.min(gap);
                        held += usize::from(gap > 0.0);
                    }
                    strictly_positive(worst, format!("strict ordering at {held}/{} samples", times.len()))
                }
                Err(e) => CheckOutcome::fail(e.to_string()),
            }
        }
        Check::LengthMonotone => {
            let mut worst = f64::INFINITY;
            let mut ok = true;
            for w in recs.windows(2) {
                let drop = w[0].length - w[1].length;
                worst = worst.min(drop);
                let moving = w[0].max_abs_kappa > 1e-12;
                ok &= if moving { drop > 0.0 } else { drop >= 0.0 };
            }
            let worst = if worst.is_finite() { worst } else { 0.0 };
            CheckOutcome { passed: ok, worst_slack: Some(worst), detail: format!("smallest length drop {worst:.3e}") }
        }
        Check::LengthDecay { tol } => residual_check(recs, tol, "length decay", |r| r.res_length_decay),
        Check::ThetaPde { tol } => residual_check(recs, tol, "theta pde", |r| r.res_theta_pde),
        Check::VPde { tol } => residual_check(recs, tol, "v pde", |r| r.res_v_pde),
        Check::KappaSqPde { tol } => residual_check(recs, tol, "kappa^2 pde", |r| r.res_kappa_sq_pde),
        Check::CircleOracle { tol } => match circle_sup_error(ctx.warp, ctx.preset, ctx.traj) {
            Some(err) => CheckOutcome::from_slack(tol - err, format!("sup |z - z_ode| = {err:.3e}")),
            None => CheckOutcome::fail("circle_oracle needs a circle preset"),
        },
        Check::ZMaxDrop { drop } => {
            let (first, last) = (&recs[0], &recs[recs.len() - 1]);
            let slack = first.z_max - drop - last.z_max;
            CheckOutcome::from_slack(slack, format!("z_max {:.4} -> {:.4} at t = {}", first.z_max, last.z_max, last.t))
        }
        Check::PsiDecay { factor } => match ctx.t0_index() {
            Some(i) => {
                let (start, end) = (recs[i].psi, recs[recs.len() - 1].psi);
                CheckOutcome::from_slack(factor * start - end, format!("psi {start:.4e} at T0 -> {end:.4e}"))
            }
            None => CheckOutcome::fail("no graph time detected"),
        },
        Check::DerivativeTrend { m_max } => match ctx.t0_index() {
            Some(i) => {
                let pick = |r: &Record, m: usize| match m {
                    0 => r.max_abs_kappa,
                    1 => r.max_ds_kappa,
                    _ => r.max_dss_kappa,
                };
                let last = &recs[recs.len() - 1];
                let mut ok = true;
                let mut worst = f64::INFINITY;
                let mut parts = Vec::new();
                for m in 0..=m_max {
                    let (start, end) = (pick(&recs[i], m), pick(last, m));
                    ok &= end < start || (start == 0.0 && end == 0.0);
                    worst = worst.min(start - end);
                    parts.push(format!("m={m}: {start:.3e} -> {end:.3e}"));
                }
                CheckOutcome { passed: ok, worst_slack: Some(worst), detail: parts.join(", ") }
            }
            None => CheckOutcome::fail("no graph time detected"),
        },
        Check::ResidualZero { tol } => {
            let worst = worst_residual(recs, |r| {
                [r.res_length_decay, r.res_theta_pde, r.res_v_pde, r.res_kappa_sq_pde]
                    .into_iter()
                    .flatten()
                    .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
            });
            match worst {
                Some(w) => CheckOutcome::from_slack(tol - w, format!("largest residual {w:.3e}")),
                None => CheckOutcome::fail("no residual windows"),
            }
        }
    }
}

fn strictly_positive(worst: f64, detail: String) -> CheckOutcome {
    CheckOutcome { passed: worst > 0.0, worst_slack: Some(worst), detail }
}
