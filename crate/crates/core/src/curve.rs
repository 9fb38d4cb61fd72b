//! Closed polygonal curves in `S¹ × I` and their metric geometry.
//!
//! Angles are stored lifted (never reduced mod 2π). Vertex `n` is identified
//! with vertex `0` shifted by `closure_offset = 2π · winding` in θ.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
use crate::stencil;
use crate::warp::WarpingFunction;

/// Minimum number of vertices of a discrete curve.
pub const MIN_VERTICES: usize = 8;

/// Tolerance on `closure_offset / 2π` being an integer.
const WINDING_TOL: f64 = 1e-6;

/// Edges shorter than this fraction of the mean edge are degenerate.
const DEGENERATE_FRACTION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteCurve<T> {
    theta: Vec<T>,
    z: Vec<T>,
    closure_offset: T,
    winding: i64,
    reoriented: bool,
}

fn winding_of<T: Scalar>(offset: T) -> Result<i64> {
    let ratio = offset / T::TAU();
    let w = ratio.round();
    if !ratio.is_finite() || (ratio - w).abs().as_f64() >= WINDING_TOL {
        return Err(Error::NotClosed { ratio: ratio.as_f64() });
    }
    Ok(w.to_i64().unwrap_or(0))
}

impl<T: Scalar> DiscreteCurve<T> {
    /// Validates the vertex list and canonicalizes orientation so that the
    /// winding number is non-negative.
    pub fn new(theta: Vec<T>, z: Vec<T>, closure_offset: T) -> Result<Self> {
        let n = theta.len();
        if n < MIN_VERTICES {
            return Err(Error::InvalidParams(format!("need at least {MIN_VERTICES} vertices, got {n}")));
        }
        if z.len() != n {
            return Err(Error::InvalidParams("theta and z lengths differ".into()));
        }
        if theta.iter().chain(z.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite vertex coordinate".into()));
        }
        let winding = winding_of(closure_offset)?;
        for i in 0..n {
            let (tn, zn) = if i + 1 == n { (theta[0] + closure_offset, z[0]) } else { (theta[i + 1], z[i + 1]) };
            if tn == theta[i] && zn == z[i] {
                return Err(Error::DegenerateEdge { edge: i, length: 0.0 });
            }
        }
        let mut curve = Self { theta, z, closure_offset, winding, reoriented: false };
        if winding < 0 {
            curve = curve.reversed();
            curve.reoriented = true;
        }
        Ok(curve)
    }

    /// Same point set traversed backwards, starting from the same vertex.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let mut theta = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        theta.push(self.theta[0]);
        z.push(self.z[0]);
        for k in 1..n {
            theta.push(self.theta[n - k] - self.closure_offset);
            z.push(self.z[n - k]);
        }
        Self {
            theta,
            z,
            closure_offset: -self.closure_offset,
            winding: -self.winding,
            reoriented: !self.reoriented,
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn closure_offset(&self) -> T {
        self.closure_offset
    }

    /// True when the constructor flipped the traversal direction.
    pub fn reoriented(&self) -> bool {
        self.reoriented
    }

    /// Net number of turns around the S¹ factor.
    pub fn winding_number(&self) -> Result<i64> {
        winding_of(self.closure_offset)
    }

    pub fn z_min(&self) -> T {
        self.z.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn z_max(&self) -> T {
        self.z.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Vertex `i + 1` expressed in the lift continuing vertex `i`.
    #[inline]
    fn next_vertex(&self, i: usize) -> (T, T) {
        if i + 1 == self.len() {
            (self.theta[0] + self.closure_offset, self.z[0])
        } else {
            (self.theta[i + 1], self.z[i + 1])
        }
    }

    /// Moves every vertex by `scale * (dθ, dz)`, keeping the closure offset.
    pub(crate) fn displaced(&self, vel_theta: &[T], vel_z: &[T], scale: T) -> Self {
        let theta = self.theta.iter().zip(vel_theta).map(|(&t, &v)| t + scale * v).collect();
        let z = self.z.iter().zip(vel_z).map(|(&h, &v)| h + scale * v).collect();
        Self { theta, z, closure_offset: self.closure_offset, winding: self.winding, reoriented: self.reoriented }
    }

    /// Metric edge lengths with the midpoint rule `sqrt(r(z̄)^2 Δθ^2 + Δz^2)`.
    pub fn edge_lengths(&self, warp: &WarpingFunction<T>) -> Result<Vec<T>> {
        let half = lit::<T>(0.5);
        (0..self.len())
            .map(|i| {
                let (tn, zn) = self.next_vertex(i);
                let r = warp.eval(half * (self.z[i] + zn), 0)?;
                let (x, y) = (r * (tn - self.theta[i]), zn - self.z[i]);
                Ok((x * x + y * y).sqrt())
            })
            .collect()
    }

    /// Total metric length of the polygon.
    pub fn length(&self, warp: &WarpingFunction<T>) -> Result<T> {
        Ok(self.edge_lengths(warp)?.into_iter().sum())
    }
}

/// Per-curve metric quantities in the orthonormal frame `{E_θ, ∂z}`.
///
/// The unit tangent is `a E_θ + b ∂z` and the unit normal `N = -b E_θ + a ∂z`,
/// so the angle function `Θ = ⟨N, ∂z⟩` equals `a` and `∂_s z = b = -⟨N, E_θ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveGeometry<T> {
    /// Edge lengths, edge `i` joining vertex `i` to `i + 1`.
    pub ds: Vec<T>,
    /// Vertex dual lengths `(ds[i-1] + ds[i]) / 2`.
    pub dual: Vec<T>,
    pub a: Vec<T>,
    pub b: Vec<T>,
    /// Geodesic curvature with respect to `-N`.
    pub kappa: Vec<T>,
    /// `r(z_i)`.
    pub r: Vec<T>,
    /// `r'(z_i) / r(z_i)`.
    pub log_derivative: Vec<T>,
    pub length: T,
}

impl<T: Scalar> CurveGeometry<T> {
    /// Angle function `Θ`; the same storage as `a`.
    pub fn theta_fn(&self) -> &[T] {
        &self.a
    }

    pub fn min_theta(&self) -> T {
        self.a.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs_kappa(&self) -> T {
        self.kappa.iter().fold(T::zero(), |m, k| m.max(k.abs()))
    }

    pub fn min_ds(&self) -> T {
        self.ds.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_ds(&self) -> T {
        self.ds.iter().copied().fold(T::zero(), T::max)
    }

    /// `∫ κ² ds` with vertex dual lengths.
    pub fn int_kappa_sq(&self) -> T {
        self.kappa.iter().zip(&self.dual).map(|(&k, &h)| k * k * h).sum()
    }

    /// `∫ |κ| ds`.
    pub fn int_abs_kappa(&self) -> T {
        self.kappa.iter().zip(&self.dual).map(|(&k, &h)| k.abs() * h).sum()
    }

    /// `∫ κ ds`, the total geodesic curvature.
    pub fn int_kappa(&self) -> T {
        self.kappa.iter().zip(&self.dual).map(|(&k, &h)| k * h).sum()
    }
}

/// Builds edge lengths, the tangent frame, `Θ` and `κ`.
///
/// The frame comes from unequal-spacing centered differences of `(θ, z)` in
/// arclength. Curvature is `κ = (b ∂_s a - a ∂_s b) + (r'/r) a`, where `∂_s` of
/// the frame components is the difference of adjacent edge tangents over the
/// dual length; the connection term makes horizontal circles have `κ = r'/r`.
pub fn build_geometry<T: Scalar>(curve: &DiscreteCurve<T>, warp: &WarpingFunction<T>) -> Result<CurveGeometry<T>> {
    let n = curve.len();
    let half = lit::<T>(0.5);
    let zero = T::zero();
    let (mut ds, mut dtheta, mut dz) = (vec![zero; n], vec![zero; n], vec![zero; n]);
    let (mut ta, mut tb) = (vec![zero; n], vec![zero; n]);
    let (mut r, mut log_derivative) = (vec![zero; n], vec![zero; n]);

    for i in 0..n {
        let zi = curve.z[i];
        r[i] = warp.eval(zi, 0)?;
        log_derivative[i] = warp.log_derivative(zi)?;

        let (tn, zn) = curve.next_vertex(i);
        let dth = tn - curve.theta[i];
        let dzz = zn - zi;
        let rbar = warp.eval(half * (zi + zn), 0)?;
        let x = rbar * dth;
        let len = (x * x + dzz * dzz).sqrt();
        ds[i] = len;
        dtheta[i] = dth;
        dz[i] = dzz;
        ta[i] = x / len;
        tb[i] = dzz / len;
    }

    let length: T = ds.iter().copied().sum();
    let floor = lit::<T>(DEGENERATE_FRACTION) * length / T::from_usize_lossy(n);
    if let Some((edge, &len)) = ds.iter().enumerate().find(|(_, &l)| !(l >= floor) || !l.is_finite()) {
        return Err(Error::DegenerateEdge { edge, length: len.as_f64() });
    }

    let dual = stencil::dual_lengths(&ds);
    let (mut a, mut b, mut kappa) = (vec![zero; n], vec![zero; n], vec![zero; n]);
    for i in 0..n {
        let im = if i == 0 { n - 1 } else { i - 1 };
        let hm = ds[im];
        let hp = ds[i];
        let w = hm + hp;
        let theta_s = (hm * dtheta[i] / hp + hp * dtheta[im] / hm) / w;
        let z_s = (hm * dz[i] / hp + hp * dz[im] / hm) / w;
        let ai = r[i] * theta_s;
        let norm = (ai * ai + z_s * z_s).sqrt();
        let (ai, bi) = (ai / norm, z_s / norm);
        let turn = (bi * (ta[i] - ta[im]) - ai * (tb[i] - tb[im])) / dual[i];
        kappa[i] = turn + ai * log_derivative[i];
        a[i] = ai;
        b[i] = bi;
    }

    Ok(CurveGeometry { ds, dual, a, b, kappa, r, log_derivative, length })
}

/// Graph predicate `min Θ > 0`, returning the minimum.
pub fn is_graph<T: Scalar>(curve: &DiscreteCurve<T>, warp: &WarpingFunction<T>) -> Result<(bool, T)> {
    let geom = build_geometry(curve, warp)?;
    let m = geom.min_theta();
    Ok((m > T::zero(), m))
}

/// Resamples `target_n` vertices at equal metric-arclength spacing along the
/// polygon, keeping vertex 0 in place.
pub fn remesh<T: Scalar>(curve: &DiscreteCurve<T>, warp: &WarpingFunction<T>, target_n: usize) -> Result<DiscreteCurve<T>> {
    if target_n < MIN_VERTICES {
        return Err(Error::InvalidParams(format!("remesh target {target_n} below {MIN_VERTICES}")));
    }
    let ds = curve.edge_lengths(warp)?;
    let n = curve.len();
    let total: T = ds.iter().copied().sum();
    if let Some((edge, &len)) = ds.iter().enumerate().find(|(_, &l)| !(l > T::zero())) {
        return Err(Error::DegenerateEdge { edge, length: len.as_f64() });
    }
    let spacing = total / T::from_usize_lossy(target_n);

    let mut theta = Vec::with_capacity(target_n);
    let mut z = Vec::with_capacity(target_n);
    let mut edge = 0usize;
    let mut start = T::zero();
    for j in 0..target_n {
        let s = spacing * T::from_usize_lossy(j);
        while edge + 1 < n && start + ds[edge] <= s {
            start = start + ds[edge];
            edge += 1;
        }
        let lambda = ((s - start) / ds[edge]).max(T::zero()).min(T::one());
        let (tn, zn) = curve.next_vertex(edge);
        theta.push(curve.theta[edge] + lambda * (tn - curve.theta[edge]));
        z.push(curve.z[edge] + lambda * (zn - curve.z[edge]));
    }
    let out = DiscreteCurve::new(theta, z, curve.closure_offset)?;
    debug_assert_eq!(out.winding, curve.winding);
    Ok(out)
}

/// Named initial curves.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset<T> {
    /// Horizontal circle at height `z0` traversed `winding` times.
    Circle { z0: T, n: usize, winding: i64 },
    /// Graph `z = z0 + amp sin θ`.
    GraphSine { z0: T, amp: T, n: usize },
    /// Winding-one curve `θ = p + (1 + 2 width) sin p`, `z = z0 + depth sin p`:
    /// θ runs backwards near `p = π`, a tongue folding back over itself.
    /// Points sharing an angle have distinct heights, so it is embedded.
    Fold { z0: T, depth: T, width: T, n: usize },
    /// Null-homotopic loop `θ = ρ cos p`, `z = z0 + ρ sin p`.
    Contractible { z0: T, rho: T, n: usize },
}

impl<T: Scalar> Preset<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Circle { .. } => "circle",
            Preset::GraphSine { .. } => "graph_sine",
            Preset::Fold { .. } => "fold",
            Preset::Contractible { .. } => "contractible",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Preset::Circle { n, .. }
            | Preset::GraphSine { n, .. }
            | Preset::Fold { n, .. }
            | Preset::Contractible { n, .. } => n,
        }
    }

    /// Same preset with a different vertex count.
    pub fn with_n(&self, n: usize) -> Self {
        let mut p = self.clone();
        match &mut p {
            Preset::Circle { n: m, .. }
            | Preset::GraphSine { n: m, .. }
            | Preset::Fold { n: m, .. }
            | Preset::Contractible { n: m, .. } => *m = n,
        }
        p
    }

    /// Vertices at uniform parameter spacing.
    pub fn build(&self) -> Result<DiscreteCurve<T>> {
        let n = self.n();
        if n < MIN_VERTICES {
            return Err(Error::InvalidParams(format!("n = {n} below {MIN_VERTICES}")));
        }
        let params: Vec<T> = (0..n).map(|i| T::TAU() * T::from_usize_lossy(i) / T::from_usize_lossy(n)).collect();
        let (theta, z, offset): (Vec<T>, Vec<T>, T) = match *self {
            Preset::Circle { z0, winding, .. } => {
                if winding == 0 {
                    return Err(Error::InvalidParams("circle winding must be non-zero".into()));
                }
                let w = lit::<T>(winding as f64);
                (params.iter().map(|&p| p * w).collect(), vec![z0; n], T::TAU() * w)
            }
            Preset::GraphSine { z0, amp, .. } => {
                (params.clone(), params.iter().map(|&p| z0 + amp * p.sin()).collect(), T::TAU())
            }
            Preset::Fold { z0, depth, width, .. } => {
                if !(width > T::zero()) || depth == T::zero() {
                    return Err(Error::InvalidParams("fold needs width > 0 and depth != 0".into()));
                }
                let alpha = T::one() + lit::<T>(2.0) * width;
                (
                    params.iter().map(|&p| p + alpha * p.sin()).collect(),
                    params.iter().map(|&p| z0 + depth * p.sin()).collect(),
                    T::TAU(),
                )
            }
            Preset::Contractible { z0, rho, .. } => {
                if !(rho > T::zero()) {
                    return Err(Error::InvalidParams("contractible loop needs rho > 0".into()));
                }
                (
                    params.iter().map(|&p| rho * p.cos()).collect(),
                    params.iter().map(|&p| z0 + rho * p.sin()).collect(),
                    T::zero(),
                )
            }
        };
        DiscreteCurve::new(theta, z, offset)
    }

    /// Builds at `oversample`× resolution and resamples to `n` vertices of equal
    /// metric spacing.
    pub fn build_equidistributed(&self, warp: &WarpingFunction<T>, oversample: usize) -> Result<DiscreteCurve<T>> {
        let fine = self.with_n(self.n() * oversample.max(1)).build()?;
        remesh(&fine, warp, self.n())
    }
}
