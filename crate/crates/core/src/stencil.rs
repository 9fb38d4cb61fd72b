//! Three-point finite differences on a periodic, nonuniform arclength grid.
//!
//! Values live on vertices; `ds[i]` is the length of the edge from vertex `i`
//! to vertex `i + 1 (mod n)`.

use crate::scalar::{lit, Scalar};

#[inline]
fn neighbours(n: usize, i: usize) -> (usize, usize) {
    ((i + n - 1) % n, (i + 1) % n)
}

/// First derivative, second order on smooth grids.
pub fn d1<T: Scalar>(f: &[T], ds: &[T]) -> Vec<T> {
    let n = f.len();
    debug_assert_eq!(ds.len(), n);
    (0..n)
        .map(|i| {
            let (im, ip) = neighbours(n, i);
            let hm = ds[im];
            let hp = ds[i];
            let sm = (f[i] - f[im]) / hm;
            let sp = (f[ip] - f[i]) / hp;
            (hm * sp + hp * sm) / (hm + hp)
        })
        .collect()
}

/// Second derivative `2 [h₋ f₊ - (h₋ + h₊) f₀ + h₊ f₋] / (h₋ h₊ (h₋ + h₊))`.
pub fn d2<T: Scalar>(f: &[T], ds: &[T]) -> Vec<T> {
    let n = f.len();
    debug_assert_eq!(ds.len(), n);
    let two = lit::<T>(2.0);
    (0..n)
        .map(|i| {
            let (im, ip) = neighbours(n, i);
            let hm = ds[im];
            let hp = ds[i];
            two * ((f[ip] - f[i]) / hp - (f[i] - f[im]) / hm) / (hm + hp)
        })
        .collect()
}

/// Dual (Voronoi) length `(ds[i-1] + ds[i]) / 2` of each vertex.
pub fn dual_lengths<T: Scalar>(ds: &[T]) -> Vec<T> {
    let n = ds.len();
    let half = lit::<T>(0.5);
    (0..n).map(|i| half * (ds[(i + n - 1) % n] + ds[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Periodic grid on [0, 2π) with a smooth spacing perturbation.
    fn grid(n: usize) -> (Vec<f64>, Vec<f64>) {
        let tau = std::f64::consts::TAU;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let u = tau * i as f64 / n as f64;
                u + 0.2 * u.sin()
            })
            .collect();
        let ds = (0..n).map(|i| if i + 1 < n { x[i + 1] - x[i] } else { tau - x[i] }).collect();
        (x, ds)
    }

    fn max_err(n: usize) -> (f64, f64) {
        let (x, ds) = grid(n);
        let f: Vec<f64> = x.iter().map(|v| (2.0 * v).sin()).collect();
        let e1 = d1(&f, &ds).iter().zip(&x).map(|(d, v)| (d - 2.0 * (2.0 * v).cos()).abs()).fold(0.0, f64::max);
        let e2 = d2(&f, &ds).iter().zip(&x).map(|(d, v)| (d + 4.0 * (2.0 * v).sin()).abs()).fold(0.0, f64::max);
        (e1, e2)
    }

    #[test]
    fn first_derivative_second_order_on_smooth_grid() {
        let (a, _) = max_err(128);
        let (b, _) = max_err(256);
        assert!(a / b > 3.5, "ratio {}", a / b);
    }

    #[test]
    fn second_derivative_converges() {
        let (_, a) = max_err(128);
        let (_, b) = max_err(256);
        // Smoothly varying spacing keeps the unequal-spacing stencil second order.
        assert!(a / b > 3.5, "ratio {}", a / b);
        assert!(b < 1e-2);
    }

    #[test]
    fn dual_lengths_sum_to_total() {
        let (_, ds) = grid(64);
        let total: f64 = ds.iter().sum();
        let dual: f64 = dual_lengths(&ds).iter().sum();
        assert!((total - dual).abs() < 1e-12);
    }
}
