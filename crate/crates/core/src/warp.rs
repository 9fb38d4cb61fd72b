//! Warping functions `r` of the metric `r(z)^2 dθ² + dz²` on `S¹ × (-∞, a)`.
//!
//! Every built-in family carries closed-form derivatives of all orders up to
//! [`WarpingFunction::max_order`], so residual checks never depend on numeric
//! differentiation of the warp itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Default highest derivative order exposed by a warp.
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Relative tolerance used when testing `r r'' - 2 r'^2 >= 0`, which holds with
/// equality for the reciprocal family.
const C3_REL_TOL: f64 = 1e-12;

/// Laurent polynomial `Σ c_j u^{e_j}`; multiplied by `exp(1/u)` it gives a
/// derivative of the glue term `u^2 exp(1/u)`.
#[derive(Clone, Debug, PartialEq)]
struct Laurent<T> {
    terms: BTreeMap<i32, T>,
}

impl<T: Scalar> Laurent<T> {
    fn monomial(exp: i32, coeff: T) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(exp, coeff);
        Self { terms }
    }

    /// `d/du [Q(u) e^{1/u}] = (Q'(u) - Q(u)/u^2) e^{1/u}`.
    fn next_derivative(&self) -> Self {
        let mut terms: BTreeMap<i32, T> = BTreeMap::new();
        let mut add = |e: i32, c: T| {
            let slot = terms.entry(e).or_insert_with(T::zero);
            *slot = *slot + c;
        };
        for (&e, &c) in &self.terms {
            if e != 0 {
                add(e - 1, c * lit::<T>(e as f64));
            }
            add(e - 2, -c);
        }
        terms.retain(|_, c| *c != T::zero());
        Self { terms }
    }

    fn eval(&self, u: T) -> T {
        self.terms.iter().map(|(&e, &c)| c * u.powi(e)).sum()
    }
}

/// The glue term `g(u) = u^2 e^{1/u}` for `u < 0` and its derivatives.
#[derive(Clone, Debug, PartialEq)]
struct Glue<T> {
    derivatives: Vec<Laurent<T>>,
}

impl<T: Scalar> Glue<T> {
    fn new(max_order: usize) -> Self {
        let mut derivatives = vec![Laurent::monomial(2, T::one())];
        for k in 0..max_order {
            let next = derivatives[k].next_derivative();
            derivatives.push(next);
        }
        Self { derivatives }
    }

    fn eval(&self, u: T, order: usize) -> T {
        let damp = u.recip().exp();
        if damp == T::zero() {
            // Every derivative vanishes at u -> 0-; avoids 0 * inf.
            return T::zero();
        }
        damp * self.derivatives[order].eval(u)
    }
}

/// Closed-form warp families.
#[derive(Clone, Debug, PartialEq)]
pub enum WarpFamily<T> {
    /// `r(z) = e^{c z}`.
    Exponential { c: T },
    /// `r(z) = -1/z`.
    Reciprocal,
    /// `r(z) = c0 - 1/z`.
    ShiftedReciprocal { c0: T },
    /// `r(z) = r0`, the flat cylinder.
    Constant { r0: T },
    /// `r(z) = r0 + k z^2`: `r'(0) = 0`, a closed geodesic at `z = 0`.
    EvenBowl { r0: T, k: T },
    /// `base(z)` on `[a0, a)`, `base(z) + (z - a0)^2 e^{1/(z - a0)}` below `a0`.
    Extended { base: Box<WarpingFunction<T>>, a0: T, glue: GlueTerm<T> },
}

/// Opaque holder for the precomputed glue derivatives of [`WarpFamily::Extended`].
#[derive(Clone, Debug, PartialEq)]
pub struct GlueTerm<T>(Glue<T>);

/// A positive warping function on `(-∞, a)` with analytic derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpingFunction<T> {
    family: WarpFamily<T>,
    domain_upper: T,
    max_order: usize,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}

impl<T: Scalar> WarpingFunction<T> {
    fn build(family: WarpFamily<T>, domain_upper: T) -> Result<Self> {
        if !domain_upper.is_finite() {
            return Err(invalid("domain upper bound must be finite"));
        }
        Ok(Self { family, domain_upper, max_order: DEFAULT_MAX_ORDER })
    }

    pub fn exponential(c: T, domain_upper: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite() {
            return Err(invalid(format!("exponential rate must be positive, got {c}")));
        }
        Self::build(WarpFamily::Exponential { c }, domain_upper)
    }

    pub fn reciprocal(domain_upper: T) -> Result<Self> {
        if !(domain_upper < T::zero()) {
            return Err(invalid("reciprocal warp needs a < 0"));
        }
        Self::build(WarpFamily::Reciprocal, domain_upper)
    }

    pub fn shifted_reciprocal(c0: T, domain_upper: T) -> Result<Self> {
        if !(c0 >= T::zero()) || !c0.is_finite() {
            return Err(invalid(format!("shift c0 must be >= 0, got {c0}")));
        }
        if !(domain_upper < T::zero()) {
            return Err(invalid("shifted reciprocal warp needs a < 0"));
        }
        Self::build(WarpFamily::ShiftedReciprocal { c0 }, domain_upper)
    }

    pub fn constant(r0: T, domain_upper: T) -> Result<Self> {
        if !(r0 > T::zero()) || !r0.is_finite() {
            return Err(invalid(format!("constant radius must be positive, got {r0}")));
        }
        Self::build(WarpFamily::Constant { r0 }, domain_upper)
    }

    pub fn even_bowl(r0: T, k: T, domain_upper: T) -> Result<Self> {
        if !(r0 > T::zero()) || !(k > T::zero()) || !r0.is_finite() || !k.is_finite() {
            return Err(invalid(format!("even bowl needs r0 > 0 and k > 0, got r0={r0}, k={k}")));
        }
        Self::build(WarpFamily::EvenBowl { r0, k }, domain_upper)
    }

    /// The same warp with a different derivative ceiling.
    pub fn with_max_order(mut self, max_order: usize) -> Result<Self> {
        if max_order < 2 {
            return Err(invalid("max analytic order must be >= 2"));
        }
        if let WarpFamily::Extended { base, glue, .. } = &mut self.family {
            let rebuilt = (**base).clone().with_max_order(max_order)?;
            **base = rebuilt;
            *glue = GlueTerm(Glue::new(max_order));
        }
        self.max_order = max_order;
        Ok(self)
    }

    pub fn family(&self) -> &WarpFamily<T> {
        &self.family
    }

    /// Exclusive upper bound `a` of the height interval.
    pub fn domain_upper(&self) -> T {
        self.domain_upper
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// String key used in scenario files.
    pub fn family_key(&self) -> &'static str {
        match self.family {
            WarpFamily::Exponential { .. } => "exponential",
            WarpFamily::Reciprocal => "reciprocal",
            WarpFamily::ShiftedReciprocal { .. } => "shifted_reciprocal",
            WarpFamily::Constant { .. } => "constant",
            WarpFamily::EvenBowl { .. } => "even_bowl",
            WarpFamily::Extended { .. } => "extended",
        }
    }

    /// Whether the family is strictly increasing on its whole domain by construction.
    pub fn is_increasing_family(&self) -> bool {
        matches!(
            self.family,
            WarpFamily::Exponential { .. } | WarpFamily::Reciprocal | WarpFamily::ShiftedReciprocal { .. }
        )
    }

    #[inline]
    fn check_domain(&self, z: T) -> Result<()> {
        // Written so that NaN fails too.
        if z < self.domain_upper {
            Ok(())
        } else {
            Err(Error::DomainExceeded { z: z.as_f64(), upper: self.domain_upper.as_f64() })
        }
    }

    /// `r^{(order)}(z)`.
    pub fn eval(&self, z: T, order: usize) -> Result<T> {
        self.check_domain(z)?;
        if order > self.max_order {
            return Err(Error::OrderUnavailable { order, max: self.max_order });
        }
        Ok(self.eval_unchecked(z, order))
    }

    fn eval_unchecked(&self, z: T, order: usize) -> T {
        match &self.family {
            WarpFamily::Exponential { c } => c.powi(order as i32) * (*c * z).exp(),
            WarpFamily::Reciprocal => reciprocal_derivative(z, order),
            WarpFamily::ShiftedReciprocal { c0 } => {
                let tail = reciprocal_derivative(z, order);
                if order == 0 {
                    *c0 + tail
                } else {
                    tail
                }
            }
            WarpFamily::Constant { r0 } => {
                if order == 0 {
                    *r0
                } else {
                    T::zero()
                }
            }
            WarpFamily::EvenBowl { r0, k } => match order {
                0 => *r0 + *k * z * z,
                1 => lit::<T>(2.0) * *k * z,
                2 => lit::<T>(2.0) * *k,
                _ => T::zero(),
            },
            WarpFamily::Extended { base, a0, glue } => {
                let core = base.eval_unchecked(z, order);
                if z >= *a0 {
                    core
                } else {
                    core + glue.0.eval(z - *a0, order)
                }
            }
        }
    }

    /// `r'(z) / r(z)`, the geodesic curvature of the horizontal circle at height `z`.
    pub fn log_derivative(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        Ok(self.ratio_unchecked(z, 1))
    }

    /// `r^(order)(z) / r(z)`, falling back to the closed form where `r` underflows.
    fn ratio_unchecked(&self, z: T, order: usize) -> T {
        let r = self.eval_unchecked(z, 0);
        match &self.family {
            WarpFamily::Exponential { c } if !r.is_normal() => c.powi(order as i32),
            _ => self.eval_unchecked(z, order) / r,
        }
    }

    /// Gauss curvature `-r''(z) / r(z)`.
    pub fn gauss_curvature(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        Ok(-self.ratio_unchecked(z, 2))
    }

    /// `(r r'' - 2 r'^2) / r^2`, the potential in the angle-function evolution.
    pub fn c3_potential(&self, z: T) -> Result<T> {
        self.check_domain(z)?;
        let l1 = self.ratio_unchecked(z, 1);
        Ok(self.ratio_unchecked(z, 2) - lit::<T>(2.0) * l1 * l1)
    }

    /// Glues `(z - a0)^2 e^{1/(z - a0)}` below `a0`, producing a warp that is
    /// eventually decreasing toward `-∞` while agreeing with `self` on `[a0, a)`.
    pub fn extend_convex_at_infinity(&self, a0: T) -> Result<Self> {
        if !(a0 < self.domain_upper) {
            return Err(Error::DomainExceeded { z: a0.as_f64(), upper: self.domain_upper.as_f64() });
        }
        let family = WarpFamily::Extended {
            base: Box::new(self.clone()),
            a0,
            glue: GlueTerm(Glue::new(self.max_order)),
        };
        Ok(Self { family, domain_upper: self.domain_upper, max_order: self.max_order })
    }

    /// Closed-form `(sup r'/r, sup |r''/r|)` over the whole domain, when the family admits one.
    pub fn closed_form_constants(&self) -> Option<(T, T)> {
        let a = self.domain_upper;
        let two = lit::<T>(2.0);
        match &self.family {
            WarpFamily::Exponential { c } => Some((*c, *c * *c)),
            WarpFamily::Reciprocal => Some((-a.recip(), two / (a * a))),
            WarpFamily::ShiftedReciprocal { c0 } => {
                // r'/r = 1/(c0 z^2 - z) and |r''/r| = 2/(z^2 (1 - c0 z)) both peak at z -> a.
                Some(((*c0 * a * a - a).recip(), two / (a * a * (T::one() - *c0 * a))))
            }
            WarpFamily::Constant { .. } => Some((T::zero(), T::zero())),
            WarpFamily::EvenBowl { r0, k } => {
                // 2kz/(r0 + kz^2) increases up to z* = sqrt(r0/k) and tends to 0 at -∞.
                let z_star = (*r0 / *k).sqrt();
                let zc = if a < z_star { a } else { z_star };
                let c_val = two * *k * zc / (*r0 + *k * zc * zc);
                let c_sup = if c_val > T::zero() { c_val } else { T::zero() };
                let d_sup = if a > T::zero() { two * *k / *r0 } else { two * *k / (*r0 + *k * a * a) };
                Some((c_sup, d_sup))
            }
            WarpFamily::Extended { .. } => None,
        }
    }

    /// Evaluates conditions (C-0)..(C-4) and the constants C, D on a grid.
    pub fn check_conditions(&self, grid: &SamplingGrid) -> ConditionReport {
        let zs: Vec<T> = grid.points(self.domain_upper);
        let mut witnesses = BTreeMap::new();

        let mut r_min = (T::infinity(), T::zero());
        let mut d1_min = (T::infinity(), T::zero());
        let mut log_der = Vec::with_capacity(zs.len());
        let mut c_sampled = T::neg_infinity();
        let mut d_sampled = T::zero();
        let mut c3_worst = (T::infinity(), T::zero());
        let mut c3_holds = true;
        for &z in &zs {
            let r = self.eval_unchecked(z, 0);
            let (l1, l2) = (self.ratio_unchecked(z, 1), self.ratio_unchecked(z, 2));
            let r = if let WarpFamily::Exponential { .. } = self.family { r.max(T::min_positive_value()) } else { r };
            if r < r_min.0 {
                r_min = (r, z);
            }
            if l1 < d1_min.0 {
                d1_min = (l1, z);
            }
            let ld = l1;
            log_der.push(ld);
            if ld > c_sampled {
                c_sampled = ld;
            }
            let dd = l2.abs();
            if dd > d_sampled {
                d_sampled = dd;
            }
            let rp = lit::<T>(2.0) * l1 * l1;
            let normalized = l2 - rp;
            let ok = normalized >= -lit::<T>(C3_REL_TOL) * (l2.abs() + rp);
            if !ok {
                c3_holds = false;
            }
            if normalized < c3_worst.0 {
                c3_worst = (normalized, z);
            }
        }

        let mut notes = Vec::new();
        if !(r_min.0 > T::zero()) {
            witnesses.insert("positive".to_string(), Witness::new(r_min.1, r_min.0));
            notes.push("warp is not positive on the sampled grid".to_string());
        }

        let c0 = d1_min.0 > T::zero();
        if !c0 {
            witnesses.insert("c0".to_string(), Witness::new(d1_min.1, d1_min.0));
        }

        // Limit proxy: tiny at the deepest point and non-increasing over the last decade.
        let deepest = *log_der.last().unwrap_or(&T::nan());
        let decade = grid.last_decade_len();
        let tail = &log_der[log_der.len().saturating_sub(decade)..];
        let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
        let c1 = deepest.abs() < lit::<T>(grid.c1_threshold) && monotone;
        if !c1 {
            witnesses.insert(
                "c1".to_string(),
                Witness::new(*zs.last().unwrap_or(&T::nan()), deepest),
            );
        }

        if !c3_holds {
            witnesses.insert("c3".to_string(), Witness::new(c3_worst.1, c3_worst.0));
        }

        // C-4: every |r^(i)/r| finite on the grid and not growing over the last decade.
        let mut c4 = true;
        for order in 1..=self.max_order {
            let ratios: Vec<T> =
                zs.iter().map(|&z| self.ratio_unchecked(z, order).abs()).collect();
            if let Some((i, v)) = ratios.iter().enumerate().find(|(_, v)| !v.is_finite()) {
                c4 = false;
                witnesses.insert(format!("c4_order{order}"), Witness::new(zs[i], *v));
                break;
            }
            let tail = &ratios[ratios.len().saturating_sub(decade)..];
            if let Some(w) = tail.windows(2).position(|w| w[1] > w[0] * lit::<T>(1.0 + 1e-12)) {
                c4 = false;
                let idx = ratios.len() - tail.len() + w + 1;
                witnesses.insert(format!("c4_order{order}"), Witness::new(zs[idx], ratios[idx]));
                break;
            }
        }

        let (c_const, d_const, exact) = match self.closed_form_constants() {
            Some((c, d)) => (c, d, true),
            None => (c_sampled.max(T::zero()), d_sampled, false),
        };
        if !exact {
            notes.push("C and D are sampled lower-bound estimates".to_string());
        }
        if let WarpFamily::EvenBowl { .. } = self.family {
            notes.push("r' vanishes at z = 0: the circle z = 0 is a closed geodesic".to_string());
        }
        if let WarpFamily::Extended { a0, .. } = &self.family {
            if let Some(z1) = self.first_decreasing_ray(*a0, grid) {
                notes.push(format!("r' < 0 on the sampled ray below z = {}", z1.as_f64()));
            }
        }

        let c2_bound = if c_const > T::zero() {
            Some((lit::<T>(2.0) * c_const * c_const).recip().as_f64())
        } else {
            None
        };

        ConditionReport {
            family: self.family_key().to_string(),
            domain_upper: self.domain_upper.as_f64(),
            c0,
            c1,
            c2_bound,
            c3: c3_holds,
            c4,
            c: c_const.as_f64(),
            d: d_const.as_f64(),
            constants_exact: exact,
            c1_deepest_log_derivative: deepest.as_f64(),
            c1_tail_monotone: monotone,
            witnesses,
            notes,
        }
    }

    /// Largest sampled `a1 < a0` such that `r' < 0` at every grid point below `a1`.
    pub fn first_decreasing_ray(&self, a0: T, grid: &SamplingGrid) -> Option<T> {
        let zs: Vec<T> = grid.points(a0);
        // zs runs from just below a0 to deep; find the shallowest point after which r' < 0 always.
        let mut candidate = None;
        for &z in zs.iter().rev() {
            if self.eval_unchecked(z, 1) < T::zero() {
                candidate = Some(z);
            } else {
                break;
            }
        }
        candidate
    }
}

/// `d^k/dz^k (-1/z) = -(-1)^k k! z^{-k-1}`.
fn reciprocal_derivative<T: Scalar>(z: T, order: usize) -> T {
    let mut fact = T::one();
    for i in 2..=order {
        fact = fact * T::from_usize_lossy(i);
    }
    let sign = if order.is_multiple_of(2) { -T::one() } else { T::one() };
    sign * fact / z.powi(order as i32 + 1)
}

/// Geometric grid `a - eps · (span/eps)^{j/(N-1)}` reaching deep toward `-∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub eps: f64,
    pub span: f64,
    pub points: usize,
    /// Threshold for the (C-1) proxy at the deepest point.
    pub c1_threshold: f64,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self { eps: 1e-6, span: 1e6, points: 241, c1_threshold: 1e-3 }
    }
}

impl SamplingGrid {
    pub fn points<T: Scalar>(&self, upper: T) -> Vec<T> {
        let n = self.points.max(2);
        let ratio = self.span / self.eps;
        (0..n)
            .map(|j| {
                let off = self.eps * ratio.powf(j as f64 / (n - 1) as f64);
                upper - lit::<T>(off)
            })
            .collect()
    }

    /// Number of grid points in the deepest decade of offsets.
    fn last_decade_len(&self) -> usize {
        let n = self.points.max(2);
        let decades = (self.span / self.eps).log10();
        ((n - 1) as f64 / decades).ceil() as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: f64,
    pub value: f64,
}

impl Witness {
    fn new<T: Scalar>(z: T, value: T) -> Self {
        Self { z: z.as_f64(), value: value.as_f64() }
    }
}

/// Outcome of [`WarpingFunction::check_conditions`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub family: String,
    pub domain_upper: f64,
    pub c0: bool,
    pub c1: bool,
    /// `1/(2C^2)`; absent when `C = 0`.
    pub c2_bound: Option<f64>,
    pub c3: bool,
    pub c4: bool,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// False when C and D are sampled lower bounds.
    pub constants_exact: bool,
    pub c1_deepest_log_derivative: f64,
    pub c1_tail_monotone: bool,
    pub witnesses: BTreeMap<String, Witness>,
    pub notes: Vec<String>,
}
