//! Time integration of `∂F/∂t = -κ N` and of the horizontal-circle ODE
//! `dz/dt = -r'(z)/r(z)`.
//!
//! Vertices move purely normally, so a vertex is a material point between
//! remeshes and vertexwise time differences approximate `∂_t` at fixed parameter.

use serde::{Deserialize, Serialize};

use crate::curve::{build_geometry, remesh, CurveGeometry, DiscreteCurve};
use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::warp::WarpingFunction;

/// Collapse threshold as a fraction of the initial length.
pub const COLLAPSE_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams<T> {
    /// `dt = cfl · (min ds)^2`, in `(0, 0.5]`.
    pub cfl: T,
    /// Remesh every this many steps; 0 disables the schedule.
    pub remesh_every: usize,
    /// Remesh whenever `max ds / min ds` exceeds this.
    pub remesh_ratio_trigger: T,
    pub t_end: T,
    /// Abort once the curve dips below this height.
    pub z_floor: T,
    /// Hysteresis margin for graph-time detection.
    pub graph_margin: T,
    pub sample_dt: T,
    /// Record a remesh-free three-snapshot window at every sample.
    pub windows: bool,
    pub max_steps: usize,
}

impl<T: Scalar> Default for SolverParams<T> {
    fn default() -> Self {
        Self {
            cfl: lit(0.25),
            remesh_every: 20,
            remesh_ratio_trigger: lit(2.0),
            t_end: T::one(),
            z_floor: lit(-1e6),
            graph_margin: lit(1e-3),
            sample_dt: lit(0.05),
            windows: true,
            max_steps: 50_000_000,
        }
    }
}

impl<T: Scalar> SolverParams<T> {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.cfl > T::zero() && self.cfl <= lit(0.5)) {
            bad.push(format!("cfl must lie in (0, 0.5], got {}", self.cfl));
        }
        if !(self.remesh_ratio_trigger > T::one()) {
            bad.push(format!("remesh_ratio_trigger must exceed 1, got {}", self.remesh_ratio_trigger));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            bad.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.sample_dt > T::zero()) || !self.sample_dt.is_finite() {
            bad.push(format!("sample_dt must be positive, got {}", self.sample_dt));
        }
        if !(self.graph_margin > T::zero()) {
            bad.push(format!("graph_margin must be positive, got {}", self.graph_margin));
        }
        if !self.z_floor.is_finite() {
            bad.push("z_floor must be finite".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad.join("; ")))
        }
    }

    /// Sample times `k · sample_dt` up to `t_end`, with `t_end` appended when off-grid.
    pub fn sample_times(&self) -> Vec<T> {
        let count = (self.t_end / self.sample_dt + lit(1e-9)).floor().to_usize().unwrap_or(0);
        let mut times: Vec<T> = (0..=count).map(|k| self.sample_dt * T::from_usize_lossy(k)).collect();
        let last = *times.last().unwrap_or(&T::zero());
        if self.t_end - last > self.sample_dt * lit(1e-9) {
            times.push(self.t_end);
        }
        times
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    GraphAttained { t0: f64 },
    DomainExceeded { z: f64 },
    Collapse { length: f64 },
    Blowup { kappa_ds: f64 },
    Degenerate { message: String },
    FloorReached { z_min: f64 },
    StepLimit { steps: usize },
    HorizonReached,
}

impl EventKind {
    /// Kinds that end a run.
    pub fn is_terminal(&self) -> bool {
        !matches!(self, EventKind::GraphAttained { .. })
    }

    /// A terminal event other than reaching the horizon.
    pub fn is_failure(&self) -> bool {
        self.is_terminal() && !matches!(self, EventKind::HorizonReached)
    }

    fn from_error(err: &Error) -> Self {
        match err {
            Error::DomainExceeded { z, .. } => EventKind::DomainExceeded { z: *z },
            Error::Collapse { length, .. } => EventKind::Collapse { length: *length },
            Error::Blowup { value } => EventKind::Blowup { kappa_ds: *value },
            other => EventKind::Degenerate { message: other.to_string() },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Current curve plus bookkeeping.
#[derive(Clone, Debug)]
pub struct FlowState<T> {
    pub curve: DiscreteCurve<T>,
    pub t: T,
    pub dt_last: T,
    pub geometry: CurveGeometry<T>,
    pub events: Vec<Event>,
    pub steps: usize,
    pub remeshes: usize,
    pub initial_length: T,
    pub target_n: usize,
}

impl<T: Scalar> FlowState<T> {
    pub fn new(curve: DiscreteCurve<T>, warp: &WarpingFunction<T>) -> Result<Self> {
        let geometry = build_geometry(&curve, warp)?;
        let target_n = curve.len();
        Ok(Self {
            initial_length: geometry.length,
            curve,
            t: T::zero(),
            dt_last: T::zero(),
            geometry,
            events: Vec::new(),
            steps: 0,
            remeshes: 0,
            target_n,
        })
    }

    /// CFL step `cfl · (min ds)^2`.
    pub fn stable_dt(&self, params: &SolverParams<T>) -> T {
        let h = self.geometry.min_ds();
        params.cfl * h * h
    }
}

/// Coordinate velocity of `-κ N` with `N = -b E_θ + a ∂z`.
pub fn velocity_from_geometry<T: Scalar>(geom: &CurveGeometry<T>) -> (Vec<T>, Vec<T>) {
    let dtheta = geom.kappa.iter().zip(&geom.b).zip(&geom.r).map(|((&k, &b), &r)| k * b / r).collect();
    let dz = geom.kappa.iter().zip(&geom.a).map(|(&k, &a)| -k * a).collect();
    (dtheta, dz)
}

/// Per-vertex `(dθ/dt, dz/dt)`.
pub fn velocity<T: Scalar>(curve: &DiscreteCurve<T>, warp: &WarpingFunction<T>) -> Result<(Vec<T>, Vec<T>)> {
    Ok(velocity_from_geometry(&build_geometry(curve, warp)?))
}

/// One explicit midpoint (RK2) step from a curve whose geometry is known.
fn midpoint<T: Scalar>(
    curve: &DiscreteCurve<T>,
    geom: &CurveGeometry<T>,
    warp: &WarpingFunction<T>,
    dt: T,
) -> Result<DiscreteCurve<T>> {
    let (v1t, v1z) = velocity_from_geometry(geom);
    let mid = curve.displaced(&v1t, &v1z, dt * lit(0.5));
    let (v2t, v2z) = velocity(&mid, warp)?;
    Ok(curve.displaced(&v2t, &v2z, dt))
}

fn check_health<T: Scalar>(geom: &CurveGeometry<T>, initial_length: T) -> Result<()> {
    let threshold = initial_length * lit(COLLAPSE_FRACTION);
    if geom.length < threshold {
        return Err(Error::Collapse { length: geom.length.as_f64(), threshold: threshold.as_f64() });
    }
    let resolution = geom.max_abs_kappa() * geom.min_ds();
    if resolution > T::one() {
        return Err(Error::Blowup { value: resolution.as_f64() });
    }
    Ok(())
}

/// Advances by exactly `dt`; remeshes afterwards when allowed and due.
pub fn advance<T: Scalar>(
    state: &FlowState<T>,
    dt: T,
    params: &SolverParams<T>,
    warp: &WarpingFunction<T>,
    allow_remesh: bool,
) -> Result<FlowState<T>> {
    let mut curve = midpoint(&state.curve, &state.geometry, warp, dt)?;
    let mut geometry = build_geometry(&curve, warp)?;
    let steps = state.steps + 1;
    let mut remeshes = state.remeshes;
    if allow_remesh {
        let scheduled = params.remesh_every > 0 && steps.is_multiple_of(params.remesh_every);
        let ratio = geometry.max_ds() / geometry.min_ds();
        if scheduled || ratio > params.remesh_ratio_trigger {
            curve = remesh(&curve, warp, state.target_n)?;
            geometry = build_geometry(&curve, warp)?;
            remeshes += 1;
        }
    }
    check_health(&geometry, state.initial_length)?;
    Ok(FlowState {
        curve,
        t: state.t + dt,
        dt_last: dt,
        geometry,
        events: state.events.clone(),
        steps,
        remeshes,
        initial_length: state.initial_length,
        target_n: state.target_n,
    })
}

/// One CFL-limited step with remeshing per schedule and ratio trigger.
pub fn step<T: Scalar>(state: &FlowState<T>, params: &SolverParams<T>, warp: &WarpingFunction<T>) -> Result<FlowState<T>> {
    let dt = state.stable_dt(params);
    advance(state, dt, params, warp, true)
}

/// Two extra remesh-free curves `dt` and `2 dt` after a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Window<T> {
    pub dt: T,
    pub next: [DiscreteCurve<T>; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub curve: DiscreteCurve<T>,
    pub window: Option<Window<T>>,
}

impl<T: Scalar> Sample<T> {
    /// The three window curves `(t, t + dt, t + 2 dt)`.
    pub fn window_curves(&self) -> Option<([&DiscreteCurve<T>; 3], T)> {
        self.window.as_ref().map(|w| ([&self.curve, &w.next[0], &w.next[1]], w.dt))
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub events: Vec<Event>,
    pub terminal: EventKind,
    pub steps: usize,
    pub remeshes: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// `min Θ` at every sample.
    pub fn min_theta(&self, warp: &WarpingFunction<T>) -> Result<Vec<T>> {
        self.samples.iter().map(|s| Ok(build_geometry(&s.curve, warp)?.min_theta())).collect()
    }

    pub fn graph_time(&self, warp: &WarpingFunction<T>, margin: T) -> Result<Option<T>> {
        Ok(detect_graph_time(&self.times(), &self.min_theta(warp)?, margin))
    }
}

/// Integrates from `t = 0` to `params.t_end` or the first terminal event.
///
/// Failures become the trajectory's terminal event; samples up to that point
/// are kept. Deterministic for identical inputs.
pub fn run<T: Scalar>(warp: &WarpingFunction<T>, initial: DiscreteCurve<T>, params: &SolverParams<T>) -> Result<Trajectory<T>> {
    params.validate()?;
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let finish = |samples, mut events: Vec<Event>, terminal: EventKind, t: T, steps, remeshes| {
        events.push(Event { t: t.as_f64(), kind: terminal.clone() });
        Ok(Trajectory { samples, events, terminal, steps, remeshes })
    };

    let mut state = match FlowState::new(initial.clone(), warp) {
        Ok(s) => s,
        Err(e) => {
            samples.push(Sample { t: T::zero(), curve: initial, window: None });
            return finish(samples, events, EventKind::from_error(&e), T::zero(), 0, 0);
        }
    };
    if state.curve.z_min() < params.z_floor {
        let z_min = state.curve.z_min().as_f64();
        samples.push(Sample { t: T::zero(), curve: state.curve, window: None });
        return finish(samples, events, EventKind::FloorReached { z_min }, T::zero(), 0, 0);
    }

    let times = params.sample_times();
    for (k, &target) in times.iter().enumerate() {
        // Integrate up to the sample time, landing on it exactly.
        while state.t < target {
            if state.steps >= params.max_steps {
                let terminal = EventKind::StepLimit { steps: state.steps };
                return finish(samples, events, terminal, state.t, state.steps, state.remeshes);
            }
            let remaining = target - state.t;
            let mut dt = state.stable_dt(params);
            let snap = remaining * lit(1e-9);
            if dt >= remaining - snap {
                dt = remaining;
            }
            match advance(&state, dt, params, warp, true) {
                Ok(mut next) => {
                    if dt == remaining {
                        next.t = target;
                    }
                    state = next;
                }
                Err(e) => {
                    return finish(samples, events, EventKind::from_error(&e), state.t, state.steps, state.remeshes);
                }
            }
            if state.curve.z_min() < params.z_floor {
                let terminal = EventKind::FloorReached { z_min: state.curve.z_min().as_f64() };
                return finish(samples, events, terminal, state.t, state.steps, state.remeshes);
            }
        }

        let t_sample = state.t;
        if !params.windows {
            samples.push(Sample { t: t_sample, curve: state.curve.clone(), window: None });
            continue;
        }
        // Window steps are genuine flow steps, with remeshing suppressed.
        let dt = state.stable_dt(params);
        let window = advance(&state, dt, params, warp, false)
            .and_then(|s1| advance(&s1, dt, params, warp, false).map(|s2| (s1, s2)));
        match window {
            Ok((s1, s2)) => {
                samples.push(Sample {
                    t: t_sample,
                    curve: state.curve.clone(),
                    window: Some(Window { dt, next: [s1.curve, s2.curve.clone()] }),
                });
                // Continue from the window end unless this was the final sample.
                if k + 1 < times.len() {
                    state = s2;
                }
            }
            Err(e) => {
                samples.push(Sample { t: t_sample, curve: state.curve.clone(), window: None });
                return finish(samples, events, EventKind::from_error(&e), state.t, state.steps, state.remeshes);
            }
        }
    }

    events.append(&mut state.events);
    let t = state.t;
    finish(samples, events, EventKind::HorizonReached, t, state.steps, state.remeshes)
}

/// First sample time with `min Θ > margin` after which `min Θ` stays positive.
pub fn detect_graph_time<T: Scalar>(times: &[T], min_theta: &[T], margin: T) -> Option<T> {
    if times.len() < 2 || times.len() != min_theta.len() {
        return None;
    }
    // Walk backwards to find the start of the final all-positive run.
    let mut first_positive = times.len();
    for i in (0..times.len()).rev() {
        if min_theta[i] > T::zero() {
            first_positive = i;
        } else {
            break;
        }
    }
    (first_positive..times.len()).find(|&i| min_theta[i] > margin).map(|i| times[i])
}

/// `dz/dt = -r'(z)/r(z)` integrated by step-doubling adaptive RK4.
pub fn baseline_circle_ode<T: Scalar>(warp: &WarpingFunction<T>, z0: T, t: T) -> Result<T> {
    Ok(baseline_circle_path(warp, z0, &[t])?[0])
}

/// Heights of the horizontal-circle solution at each of the non-decreasing `times`.
pub fn baseline_circle_path<T: Scalar>(warp: &WarpingFunction<T>, z0: T, times: &[T]) -> Result<Vec<T>> {
    warp.log_derivative(z0)?;
    let rhs = |z: T| warp.log_derivative(z).map(|v| -v);
    let rk4 = |z: T, h: T| -> Result<T> {
        let half = lit::<T>(0.5);
        let k1 = rhs(z)?;
        let k2 = rhs(z + half * h * k1)?;
        let k3 = rhs(z + half * h * k2)?;
        let k4 = rhs(z + h * k3)?;
        Ok(z + h / lit(6.0) * (k1 + lit::<T>(2.0) * (k2 + k3) + k4))
    };
    let tol = (T::epsilon() * lit(1e3)).max(lit(1e-13));
    let mut z = z0;
    let mut t = T::zero();
    let mut h = lit::<T>(1e-3);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < t {
            return Err(Error::InvalidParams("times must be non-decreasing".into()));
        }
        while t < target {
            let step = h.min(target - t);
            let full = rk4(z, step);
            let halves = rk4(z, step * lit(0.5)).and_then(|m| rk4(m, step * lit(0.5)));
            let (full, fine) = match (full, halves) {
                (Ok(f), Ok(g)) => (f, g),
                // A trial stage left the domain; shrink and retry.
                _ if step > lit(1e-12) => {
                    h = step * lit(0.25);
                    continue;
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            let err = (fine - full).abs() / lit(15.0);
            let scale = tol * (T::one() + fine.abs());
            if err <= scale {
                t = if step == target - t { target } else { t + step };
                z = fine + (fine - full) / lit(15.0);
            }
            let factor = if err == T::zero() {
                lit(4.0)
            } else {
                (lit::<T>(0.9) * (scale / err).powf(lit(0.2))).max(lit(0.2)).min(lit(4.0))
            };
            h = step * factor;
        }
        out.push(z);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Preset;
    use approx::assert_relative_eq;

    fn recip() -> WarpingFunction<f64> {
        WarpingFunction::reciprocal(-1.0).unwrap()
    }

    #[test]
    fn circle_velocity() {
        let c = Preset::Circle { z0: -2.0, n: 64, winding: 1 }.build().unwrap();
        let (vt, vz) = velocity(&c, &recip()).unwrap();
        for i in 0..64 {
            assert!(vt[i].abs() < 1e-14);
            assert_relative_eq!(vz[i], -0.5, epsilon = 1e-12);
        }
        let flat = WarpingFunction::constant(1.0, 0.0).unwrap();
        let (vt, vz) = velocity(&c, &flat).unwrap();
        assert!(vt.iter().chain(&vz).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn vertical_tangent_moves_only_in_angle() {
        let fold = Preset::Fold { z0: -5.0, depth: 1.0, width: 0.5, n: 256 }.build().unwrap();
        let geom = build_geometry(&fold, &recip()).unwrap();
        let (vt, vz) = velocity_from_geometry(&geom);
        for i in 0..fold.len() {
            assert_eq!(vz[i], -geom.kappa[i] * geom.a[i]);
            if geom.a[i] == 0.0 {
                assert_eq!(vz[i], 0.0);
                assert!(vt[i] != 0.0 || geom.kappa[i] == 0.0);
            }
        }
    }

    #[test]
    fn flat_circle_step_is_identity() {
        let flat = WarpingFunction::constant(1.0, 0.0).unwrap();
        let c = Preset::Circle { z0: -2.0f64, n: 64, winding: 1 }.build().unwrap();
        let s = FlowState::new(c.clone(), &flat).unwrap();
        let next = step(&s, &SolverParams::default(), &flat).unwrap();
        assert!(next.t > 0.0);
        for i in 0..64 {
            assert!((next.curve.theta()[i] - c.theta()[i]).abs() < 1e-14);
            assert_eq!(next.curve.z()[i], c.z()[i]);
        }
    }

    #[test]
    fn baseline_ode_closed_forms() {
        let e = WarpingFunction::exponential(0.5, 0.0).unwrap();
        assert_relative_eq!(baseline_circle_ode(&e, -3.0, 2.0).unwrap(), -4.0, epsilon = 1e-8);
        let r = recip();
        assert_relative_eq!(baseline_circle_ode(&r, -2.0, 1.0).unwrap(), -(6.0f64).sqrt(), epsilon = 1e-8);
        assert_eq!(baseline_circle_ode(&r, -2.0, 0.0).unwrap(), -2.0);
        let path = baseline_circle_path(&r, -2.0, &[0.5, 1.0, 4.0]).unwrap();
        for (z, t) in path.iter().zip([0.5f64, 1.0, 4.0]) {
            assert_relative_eq!(*z, -(4.0 + 2.0 * t).sqrt(), epsilon = 1e-10);
        }
        assert!(matches!(baseline_circle_ode(&r, -0.5, 1.0), Err(Error::DomainExceeded { .. })));
    }

    #[test]
    fn circle_tracks_exponential_ode() {
        let e = WarpingFunction::exponential(0.5, 0.0).unwrap();
        let c = Preset::Circle { z0: -3.0, n: 128, winding: 1 }.build().unwrap();
        let params = SolverParams { t_end: 1.0, sample_dt: 0.25, ..Default::default() };
        let traj = run(&e, c, &params).unwrap();
        assert_eq!(traj.terminal, EventKind::HorizonReached);
        let last = traj.samples.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert!((last.curve.z()[0] - (-3.5_f64)).abs() < 1e-3);
    }

    #[test]
    fn graph_time_detection() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(detect_graph_time(&t, &[0.5, 0.6, 0.7, 0.8, 0.9], 1e-3), Some(0.0));
        assert_eq!(detect_graph_time(&t, &[-0.5, -0.1, 1e-4, 0.2, 0.3], 1e-3), Some(3.0));
        assert_eq!(detect_graph_time(&t, &[-0.5, 0.1, -0.1, 0.2, 0.3], 1e-3), Some(3.0));
        assert_eq!(detect_graph_time(&t, &[-0.5, -0.1, -0.1, -0.2, 0.3], 1e-3), Some(4.0));
        assert_eq!(detect_graph_time(&t, &[-0.5, -0.1, -0.1, -0.2, -0.3], 1e-3), None);
        assert_eq!(detect_graph_time(&t[..1], &[0.5], 1e-3), None);
    }

    #[test]
    fn floor_above_curve_terminates_immediately() {
        let c = Preset::Circle { z0: -2.0, n: 32, winding: 1 }.build().unwrap();
        let params = SolverParams { z_floor: -1.5, ..Default::default() };
        let traj = run(&recip(), c, &params).unwrap();
        assert!(matches!(traj.terminal, EventKind::FloorReached { .. }));
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn sample_times_cover_horizon() {
        let p = SolverParams::<f64> { t_end: 1.0, sample_dt: 0.3, ..Default::default() };
        assert_eq!(p.sample_times(), vec![0.0, 0.3, 0.6, 0.8999999999999999, 1.0]);
        let p = SolverParams::<f64> { t_end: 1.0, sample_dt: 0.25, ..Default::default() };
        assert_eq!(p.sample_times().len(), 5);
        assert!(SolverParams::<f64> { cfl: 0.6, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let c = Preset::GraphSine { z0: -2.0, amp: 0.3, n: 64 }.build().unwrap();
        let params = SolverParams { t_end: 0.2, sample_dt: 0.05, ..Default::default() };
        let a = run(&recip(), c.clone(), &params).unwrap();
        let b = run(&recip(), c, &params).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.steps, b.steps);
    }
}
