//! Geometry of the Poincaré disk.
//!
//! Distances, the Klein-model bijection, Möbius addition, logarithmic and
//! exponential maps, the Lorentz-weighted barycenter, and Gaussian statistics
//! in the tangent plane at a barycenter.
//!
//! Points are validated once at construction, so the operations on them are
//! infallible. Results that would land on the unit circle through rounding
//! are pulled back just inside it.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("point ({0}, {1}) is not inside the open unit disk")]
    PointOnBoundary(f64, f64),
    #[error("empty input")]
    EmptyInput,
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("covariance matrix is singular (det = {0})")]
    SingularCovariance(f64),
}

/// Largest squared norm a rounded result is allowed to keep.
const MAX_NORM_SQ: f64 = 1.0 - 1e-15;
/// Below this norm, directions are undefined and the maps short-circuit.
const ZERO_NORM: f64 = 1e-15;

fn validate(x: f64, y: f64) -> Result<(), GeometryError> {
    let n2 = x * x + y * y;
    if !(x.is_finite() && y.is_finite()) || n2 >= 1.0 {
        return Err(GeometryError::PointOnBoundary(x, y));
    }
    Ok(())
}

fn clamp_inside(v: Vector2<f64>) -> Vector2<f64> {
    let n2 = v.norm_squared();
    if n2 >= MAX_NORM_SQ {
        v * (MAX_NORM_SQ / n2).sqrt()
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincarePoint {
    x: f64,
    y: f64,
}

impl PoincarePoint {
    pub const ORIGIN: Self = Self { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        validate(x, y)?;
        Ok(Self { x, y })
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self, GeometryError> {
        Self::new(r * theta.cos(), r * theta.sin())
    }

    fn from_vec_clamped(v: Vector2<f64>) -> Self {
        let v = clamp_inside(v);
        Self { x: v.x, y: v.y }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_vec(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotation about the origin by `angle` radians (an isometry of the disk).
    pub fn rotate(self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_vec_clamped(Vector2::new(
            c * self.x - s * self.y,
            s * self.x + c * self.y,
        ))
    }

    /// Reflection across the x-axis.
    pub fn reflect_x(self) -> Self {
        Self {
            x: self.x,
            y: -self.y,
        }
    }
}

impl std::ops::Neg for PoincarePoint {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinPoint {
    x: f64,
    y: f64,
}

impl KleinPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, GeometryError> {
        validate(x, y)?;
        Ok(Self { x, y })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_vec(self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

/// A tangent vector at `base`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: PoincarePoint,
    pub v: Vector2<f64>,
}

/// Hyperbolic distance `arcosh(1 + 2|a-b|^2 / ((1-|a|^2)(1-|b|^2)))`.
pub fn poincare_distance(a: PoincarePoint, b: PoincarePoint) -> f64 {
    let (a, b) = (a.to_vec(), b.to_vec());
    let diff = (a - b).norm_squared();
    let denom = (1.0 - a.norm_squared()) * (1.0 - b.norm_squared());
    (1.0 + 2.0 * diff / denom).acosh()
}

pub fn poincare_to_klein(p: PoincarePoint) -> KleinPoint {
    let v = p.to_vec();
    let k = 2.0 * v / (1.0 + v.norm_squared());
    let k = clamp_inside(k);
    KleinPoint { x: k.x, y: k.y }
}

pub fn klein_to_poincare(k: KleinPoint) -> PoincarePoint {
    let v = k.to_vec();
    PoincarePoint::from_vec_clamped(v / (1.0 + (1.0 - v.norm_squared()).sqrt()))
}

pub fn lorentz_factor(k: KleinPoint) -> f64 {
    1.0 / (1.0 - k.to_vec().norm_squared()).sqrt()
}

/// Conformal factor `2 / (1 - |z|^2)` of the disk metric at `z`.
pub fn conformal_factor(z: PoincarePoint) -> f64 {
    2.0 / (1.0 - z.to_vec().norm_squared())
}

/// Möbius addition `a ⊕ b`.
pub fn mobius_add(a: PoincarePoint, b: PoincarePoint) -> PoincarePoint {
    PoincarePoint::from_vec_clamped(mobius_add_vec(a.to_vec(), b.to_vec()))
}

fn mobius_add_vec(a: Vector2<f64>, b: Vector2<f64>) -> Vector2<f64> {
    let ab = a.dot(&b);
    let a2 = a.norm_squared();
    let b2 = b.norm_squared();
    let num = (1.0 + 2.0 * ab + b2) * a + (1.0 - a2) * b;
    num / (1.0 + 2.0 * ab + a2 * b2)
}

/// Lorentz-weighted mean in Klein coordinates, mapped back to the Poincaré disk.
pub fn hyperbolic_barycenter(points: &[PoincarePoint]) -> Result<PoincarePoint, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let mut weighted = Vector2::zeros();
    let mut total = 0.0;
    for &p in points {
        let k = poincare_to_klein(p);
        let gamma = lorentz_factor(k);
        weighted += gamma * k.to_vec();
        total += gamma;
    }
    let mean = clamp_inside(weighted / total);
    Ok(klein_to_poincare(KleinPoint {
        x: mean.x,
        y: mean.y,
    }))
}

/// Logarithmic map at `z`: the tangent vector pointing to `x`.
pub fn log_map(z: PoincarePoint, x: PoincarePoint) -> TangentVector {
    let u = mobius_add_vec(-z.to_vec(), x.to_vec());
    let norm = u.norm();
    let v = if norm < ZERO_NORM {
        Vector2::zeros()
    } else {
        let norm = norm.min(1.0 - f64::EPSILON);
        (2.0 / conformal_factor(z)) * norm.atanh() * u / norm
    };
    TangentVector { base: z, v }
}

/// Exponential map at `z`.
pub fn exp_map(z: PoincarePoint, v: Vector2<f64>) -> PoincarePoint {
    let norm = v.norm();
    if norm < ZERO_NORM {
        return z;
    }
    let step = (conformal_factor(z) * norm / 2.0).tanh() * v / norm;
    PoincarePoint::from_vec_clamped(mobius_add_vec(z.to_vec(), clamp_inside(step)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicGaussian {
    pub barycenter: PoincarePoint,
    /// Sample covariance (divisor `n - 1`) of the tangent projections at the barycenter.
    pub covariance: Matrix2<f64>,
}

impl HyperbolicGaussian {
    pub fn determinant(&self) -> f64 {
        self.covariance.determinant()
    }

    /// True when the covariance cannot be inverted reliably.
    pub fn is_singular(&self) -> bool {
        let det = self.determinant();
        let tr = self.covariance.trace();
        !(det > f64::EPSILON * tr * tr && det > 0.0)
    }
}

pub fn fit_gaussian(points: &[PoincarePoint]) -> Result<HyperbolicGaussian, GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let z = hyperbolic_barycenter(points)?;
    let tangent: Vec<Vector2<f64>> = points.iter().map(|&p| log_map(z, p).v).collect();
    let n = tangent.len() as f64;
    let mean = tangent.iter().sum::<Vector2<f64>>() / n;
    let mut cov = Matrix2::zeros();
    for t in &tangent {
        let d = t - mean;
        cov += d * d.transpose();
    }
    cov /= n - 1.0;
    // exact symmetry
    let off = 0.5 * (cov[(0, 1)] + cov[(1, 0)]);
    cov[(0, 1)] = off;
    cov[(1, 0)] = off;
    Ok(HyperbolicGaussian {
        barycenter: z,
        covariance: cov,
    })
}

/// Gaussian density of the tangent projection of `x` at the barycenter.
pub fn gaussian_pdf(g: &HyperbolicGaussian, x: PoincarePoint) -> Result<f64, GeometryError> {
    if g.is_singular() {
        return Err(GeometryError::SingularCovariance(g.determinant()));
    }
    let det = g.determinant();
    let inv = g
        .covariance
        .try_inverse()
        .ok_or(GeometryError::SingularCovariance(det))?;
    let w = log_map(g.barycenter, x).v;
    let q = w.dot(&(inv * w));
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).powi(2) * det).sqrt();
    Ok(norm * (-0.5 * q).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> PoincarePoint {
        PoincarePoint::new(x, y).unwrap()
    }

    fn close(a: PoincarePoint, b: PoincarePoint, tol: f64) -> bool {
        (a.to_vec() - b.to_vec()).norm() < tol
    }

    #[test]
    fn boundary_rejected() {
        assert!(PoincarePoint::new(1.0, 0.0).is_err());
        assert!(PoincarePoint::new(0.8, 0.8).is_err());
        assert!(KleinPoint::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn distance_values() {
        assert_eq!(
            poincare_distance(PoincarePoint::ORIGIN, PoincarePoint::ORIGIN),
            0.0
        );
        let d = poincare_distance(PoincarePoint::ORIGIN, p(0.5, 0.0));
        assert!((d - 3f64.ln()).abs() < 1e-12);
        assert!((d - 2.0 * 0.5f64.atanh()).abs() < 1e-12);
    }

    #[test]
    fn klein_values() {
        let k = poincare_to_klein(PoincarePoint::ORIGIN);
        assert_eq!((k.x(), k.y()), (0.0, 0.0));
        let back = klein_to_poincare(KleinPoint::new(0.6, 0.0).unwrap());
        assert!((back.x() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(back.y(), 0.0);
    }

    #[test]
    fn lorentz_and_conformal_values() {
        assert_eq!(lorentz_factor(KleinPoint::new(0.0, 0.0).unwrap()), 1.0);
        assert!((lorentz_factor(KleinPoint::new(0.6, 0.0).unwrap()) - 1.25).abs() < 1e-15);
        assert_eq!(conformal_factor(PoincarePoint::ORIGIN), 2.0);
        assert!((conformal_factor(p(0.6, 0.0)) - 3.125).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..99 {
            let r = i as f64 / 100.0;
            let g = lorentz_factor(KleinPoint::new(r, 0.0).unwrap());
            let l = conformal_factor(p(0.0, r));
            assert!(g > prev || i == 0);
            assert!(l >= 2.0);
            prev = g;
        }
    }

    #[test]
    fn barycenter_cases() {
        let x = p(0.3, -0.4);
        assert!(close(hyperbolic_barycenter(&[x]).unwrap(), x, 1e-15));
        assert!(close(
            hyperbolic_barycenter(&[x, -x]).unwrap(),
            PoincarePoint::ORIGIN,
            1e-15
        ));
        assert_eq!(hyperbolic_barycenter(&[]), Err(GeometryError::EmptyInput));
    }

    #[test]
    fn barycenter_matches_independent_evaluation() {
        let pts = [p(0.1, 0.7), p(-0.5, 0.2), p(0.3, -0.6)];
        // independent closed-form evaluation with scalar arithmetic
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sg = 0.0;
        for q in &pts {
            let n2 = q.x() * q.x() + q.y() * q.y();
            let kx = 2.0 * q.x() / (1.0 + n2);
            let ky = 2.0 * q.y() / (1.0 + n2);
            let g = 1.0 / (1.0 - kx * kx - ky * ky).sqrt();
            sx += g * kx;
            sy += g * ky;
            sg += g;
        }
        let (kx, ky) = (sx / sg, sy / sg);
        let s = 1.0 + (1.0 - kx * kx - ky * ky).sqrt();
        let expected = p(kx / s, ky / s);
        assert!(close(hyperbolic_barycenter(&pts).unwrap(), expected, 1e-9));
    }

    #[test]
    fn mobius_identities() {
        let a = p(0.2, 0.5);
        assert!(close(mobius_add(a, PoincarePoint::ORIGIN), a, 1e-15));
        assert!(close(mobius_add(PoincarePoint::ORIGIN, a), a, 1e-15));
        assert!(close(mobius_add(-a, a), PoincarePoint::ORIGIN, 1e-15));
    }

    #[test]
    fn log_exp_at_origin() {
        let x = p(0.3, 0.4);
        let v = log_map(PoincarePoint::ORIGIN, x).v;
        let expected = 0.5f64.atanh() * x.to_vec() / 0.5;
        assert!((v - expected).norm() < 1e-15);
        let d = poincare_distance(PoincarePoint::ORIGIN, x);
        assert!((v.norm() - 0.5 * d).abs() < 1e-12);
        assert_eq!(log_map(x, x).v, Vector2::zeros());

        let w = Vector2::new(0.7, -0.2);
        let e = exp_map(PoincarePoint::ORIGIN, w);
        let expected = w.norm().tanh() * w / w.norm();
        assert!((e.to_vec() - expected).norm() < 1e-15);
        assert_eq!(exp_map(x, Vector2::zeros()), x);
    }

    #[test]
    fn gaussian_of_identical_points_is_singular() {
        let x = p(0.1, 0.2);
        let g = fit_gaussian(&[x, x, x]).unwrap();
        assert!(close(g.barycenter, x, 1e-14));
        assert!(g.covariance.norm() < 1e-28);
        assert!(g.is_singular());
        assert!(matches!(
            gaussian_pdf(&g, x),
            Err(GeometryError::SingularCovariance(_))
        ));
        assert!(matches!(
            fit_gaussian(&[x]),
            Err(GeometryError::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn gaussian_of_symmetric_pair() {
        let g = fit_gaussian(&[p(0.3, 0.0), p(-0.3, 0.0)]).unwrap();
        assert!(close(g.barycenter, PoincarePoint::ORIGIN, 1e-15));
        let s = 0.3f64.atanh();
        assert!((g.covariance[(0, 0)] - 2.0 * s * s).abs() < 1e-14);
        assert_eq!(g.covariance[(1, 1)], 0.0);
        assert_eq!(g.covariance[(0, 1)], 0.0);
    }

    #[test]
    fn pdf_at_center_with_identity_covariance() {
        let g = HyperbolicGaussian {
            barycenter: p(0.2, 0.1),
            covariance: Matrix2::identity(),
        };
        let v = gaussian_pdf(&g, g.barycenter).unwrap();
        assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        // decreasing along a geodesic ray
        let mut prev = v;
        for i in 1..50 {
            let x = exp_map(g.barycenter, Vector2::new(0.05 * i as f64, 0.0));
            let now = gaussian_pdf(&g, x).unwrap();
            assert!(now < prev);
            prev = now;
        }
    }

    #[test]
    fn clustered_tangent_mean_is_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let center = p(0.4, -0.3);
        let pts: Vec<PoincarePoint> = (0..200)
            .map(|_| {
                // hyperbolic radius at most 0.1 around the center
                let ang: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let rad: f64 = rng.gen_range(0.0..0.1);
                let lam = conformal_factor(center);
                exp_map(center, Vector2::new(ang.cos(), ang.sin()) * rad / lam)
            })
            .collect();
        let g = fit_gaussian(&pts).unwrap();
        let mean = pts
            .iter()
            .map(|&q| log_map(g.barycenter, q).v)
            .sum::<Vector2<f64>>()
            / pts.len() as f64;
        // tangent spread is ~0.1/λ; the centroid offset is second order in it
        assert!(mean.norm() < 1e-3, "tangent mean {}", mean.norm());
    }

    fn disk_point(max: f64) -> impl Strategy<Value = PoincarePoint> {
        (0.0..max, 0.0..std::f64::consts::TAU)
            .prop_map(|(r, t)| PoincarePoint::from_polar(r, t).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn prop_klein_round_trip(a in disk_point(0.99)) {
            let back = klein_to_poincare(poincare_to_klein(a));
            prop_assert!(close(back, a, 1e-12));
        }

        #[test]
        fn prop_exp_log_inverse(z in disk_point(0.9), x in disk_point(0.9)) {
            let back = exp_map(z, log_map(z, x).v);
            prop_assert!(close(back, x, 1e-9));
        }

        #[test]
        fn prop_mobius_closure_and_isometry(a in disk_point(0.99), b in disk_point(0.99)) {
            prop_assert!(mobius_add(a, b).norm() < 1.0);
            let d = poincare_distance(a, b);
            let t = poincare_distance(PoincarePoint::ORIGIN, mobius_add(-a, b));
            prop_assert!((d - t).abs() <= 1e-9 * d.max(1.0));
        }

        #[test]
        fn prop_triangle_inequality(a in disk_point(0.95), b in disk_point(0.95), c in disk_point(0.95)) {
            let ab = poincare_distance(a, b);
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - poincare_distance(b, a)).abs() < 1e-12);
            prop_assert!(poincare_distance(a, c) <= ab + poincare_distance(b, c) + 1e-9);
        }

        #[test]
        fn prop_covariance_psd(pts in prop::collection::vec(disk_point(0.9), 2..12)) {
            let g = fit_gaussian(&pts).unwrap();
            let c = g.covariance;
            prop_assert_eq!(c[(0, 1)], c[(1, 0)]);
            let eig = c.symmetric_eigenvalues();
            prop_assert!(eig.iter().all(|&e| e >= -1e-12));
        }

        #[test]
        fn prop_barycenter_permutation_invariant(pts in prop::collection::vec(disk_point(0.9), 1..8)) {
            let mut rev = pts.clone();
            rev.reverse();
            let a = hyperbolic_barycenter(&pts).unwrap();
            let b = hyperbolic_barycenter(&rev).unwrap();
            prop_assert!(close(a, b, 1e-12));
            let same = vec![pts[0]; 5];
            prop_assert!(close(hyperbolic_barycenter(&same).unwrap(), pts[0], 1e-12));
        }
    }
}
