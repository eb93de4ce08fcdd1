//! Polar profiles of positively 1-homogeneous functions on the plane.
//!
//! A 1-homogeneous φ > 0 is determined by its level curve {φ = 1}, written
//! in polar form as t ↦ (e^{r(t)} cos t, e^{r(t)} sin t) for a 2π-periodic
//! r, equivalently φ(y) = e^{−r(t)} |y|. The profile carries r and its first
//! two t-derivatives; that is enough for the level-curve curvature, the
//! closed-form fiber partials of φ, and second-order fiber jets of the
//! reconstructed function.

use std::sync::Arc;

use crate::error::{FinslerError, Result};
use crate::jet::{FiberProgram, Jet, Profile};

/// Relative threshold under which |κ| counts as a flat point.
pub const FLAT_POINT_REL_TOL: f64 = 1e-8;

/// r(t), ṙ(t), r̈(t) for a polar profile.
pub type ProfileFn = dyn Fn(f64) -> (f64, f64, f64) + Send + Sync;

/// Polar description of a positively 1-homogeneous function on R²∖{0}.
#[derive(Clone)]
pub struct PolarProfile {
    eval: Arc<ProfileFn>,
    pi_periodic: bool,
}

impl std::fmt::Debug for PolarProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PolarProfile")
            .field("pi_periodic", &self.pi_periodic)
            .finish()
    }
}

/// Verdict of a strong-convexity scan over the profile's level curve.
#[derive(Clone, Debug, PartialEq)]
pub enum Convexity {
    StronglyConvex { min_abs_kappa: f64 },
    /// κ vanishes (to tolerance) near `t`, bracketed by neighbouring grid nodes.
    FlatPoint { t: f64, bracket: (f64, f64) },
    Inconclusive { reason: String },
}

impl PolarProfile {
    /// Wrap an analytic (r, ṙ, r̈) closure. π-periodicity (absolute
    /// homogeneity of the reconstructed function) is detected on a grid.
    pub fn from_fn(f: impl Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static) -> Self {
        let eval: Arc<ProfileFn> = Arc::new(f);
        let pi_periodic = detect_pi_periodic(&eval);
        PolarProfile { eval, pi_periodic }
    }

    /// r ≡ c: the level curve is the circle of radius e^c.
    pub fn constant(c: f64) -> Self {
        Self::from_fn(move |_| (c, 0.0, 0.0))
    }

    /// Profile of a 1-homogeneous program: r(t) = −log φ(cos t, sin t),
    /// derivatives from second-order fiber jets of φ. Fails if φ is not
    /// strictly positive on the sampled circle.
    pub fn from_program(phi: Arc<FiberProgram>) -> Result<Self> {
        // Positivity scan before wrapping; the closure itself cannot error.
        for k in 0..128 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 128.0;
            let j = crate::jet::lift_eval_fiber(&*phi, &[t.cos(), t.sin()], Profile::value())?;
            // NaN must fail this check too.
            if j.v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(FinslerError::InvalidSpec(format!(
                    "profile source is not positive on the circle: phi({t:.4}) = {}",
                    j.v
                )));
            }
        }
        let phi_for_eval = phi.clone();
        let eval: Arc<ProfileFn> = Arc::new(move |t: f64| {
            let (c, s) = (t.cos(), t.sin());
            let j = match crate::jet::lift_eval_fiber(&*phi_for_eval, &[c, s], Profile::fiber(2))
            {
                Ok(j) => j,
                Err(_) => return (f64::NAN, f64::NAN, f64::NAN),
            };
            let cdot = [-s, c];
            let cddot = [-c, -s];
            let phi_v = j.v;
            if phi_v.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return (f64::NAN, f64::NAN, f64::NAN);
            }
            let d1: f64 = (0..2).map(|i| j.dy[i] * cdot[i]).sum();
            let quad: f64 = (0..2)
                .flat_map(|i| (0..2).map(move |k| (i, k)))
                .map(|(i, k)| j.dyy_at(i, k) * cdot[i] * cdot[k])
                .sum();
            let rad: f64 = (0..2).map(|i| j.dy[i] * cddot[i]).sum();
            let r = -phi_v.ln();
            let dr = -d1 / phi_v;
            let ddr = -((quad + rad) * phi_v - d1 * d1) / (phi_v * phi_v);
            (r, dr, ddr)
        });
        let pi_periodic = detect_pi_periodic(&eval);
        Ok(PolarProfile { eval, pi_periodic })
    }

    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        (self.eval)(t)
    }

    pub fn r(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    /// Whether r(t + π) = r(t) held on the detection grid; equivalent to the
    /// reconstructed function being absolutely homogeneous.
    pub fn is_pi_periodic(&self) -> bool {
        self.pi_periodic
    }

    /// Curvature of the level curve t ↦ (e^r cos t, e^r sin t):
    /// κ = −e^r (r̈ − ṙ² − 1) / √(ṙ² + 1). Its zero set {r̈ − ṙ² − 1 = 0}
    /// marks the infinitesimally flat directions of the reconstructed norm.
    pub fn curvature(&self, t: f64) -> f64 {
        let (r, dr, ddr) = self.eval(t);
        -(r.exp() / (dr * dr + 1.0).sqrt()) * (ddr - dr * dr - 1.0)
    }

    /// Max |r(t + 2π) − r(t)| over a grid; a sanity check on closures.
    pub fn periodicity_residual(&self, grid: usize) -> f64 {
        (0..grid)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
                (self.r(t + 2.0 * std::f64::consts::PI) - self.r(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Scan |κ| over a uniform grid. Grid nodes where the profile is not
    /// finite are skipped; if fewer than a quarter survive the scan is
    /// inconclusive.
    pub fn strong_convexity(&self, grid_size: usize) -> Convexity {
        assert!(grid_size >= 256, "strong-convexity scan needs >= 256 nodes");
        let mut finite: Vec<(f64, f64)> = Vec::with_capacity(grid_size);
        for k in 0..grid_size {
            let t = 2.0 * std::f64::consts::PI * k as f64 / grid_size as f64;
            let kappa = self.curvature(t);
            if kappa.is_finite() {
                finite.push((t, kappa));
            }
        }
        if finite.len() < grid_size / 4 {
            return Convexity::Inconclusive {
                reason: format!(
                    "profile finite at only {} of {} grid nodes",
                    finite.len(),
                    grid_size
                ),
            };
        }
        let max_abs = finite.iter().map(|(_, k)| k.abs()).fold(0.0, f64::max);
        if max_abs == 0.0 {
            let (t, _) = finite[0];
            return Convexity::FlatPoint { t, bracket: (t, t) };
        }
        let (imin, &(tmin, kmin)) = finite
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.abs().total_cmp(&b.1 .1.abs()))
            .expect("non-empty grid");
        if kmin.abs() > FLAT_POINT_REL_TOL * max_abs {
            return Convexity::StronglyConvex {
                min_abs_kappa: kmin.abs(),
            };
        }
        let lo = finite[(imin + finite.len() - 1) % finite.len()].0;
        let hi = finite[(imin + 1) % finite.len()].0;
        Convexity::FlatPoint {
            t: tmin,
            bracket: (lo, hi),
        }
    }

    /// Closed-form fiber partials of the reconstructed 1-homogeneous
    /// function φ = e^{−r}|y| along the unit circle:
    /// ∂φ/∂y¹, ∂φ/∂y², and φ·∂²φ/∂y¹∂y². The product term carries the sign
    /// (r̈ − ṙ² − 1), which direct differentiation confirms (see the module
    /// tests pinning the opposite sign as wrong).
    pub fn partials(&self, t: f64) -> ProfilePartials {
        let (r, dr, ddr) = self.eval(t);
        let (c, s) = (t.cos(), t.sin());
        let e = (-r).exp();
        ProfilePartials {
            p_y1: (c + dr * s) * e,
            p_y2: (s - dr * c) * e,
            p_p12: (ddr - dr * dr - 1.0) * e * e * s * c,
        }
    }

    /// The reconstructed function as a fiber program (second-order jets;
    /// the profile carries no third t-derivative, so deeper fiber slots are
    /// out of reach).
    pub fn to_program(&self) -> Arc<FiberProgram> {
        let me = self.clone();
        Arc::new(move |y: &[Jet]| me.eval_program(y))
    }

    fn eval_program(&self, y: &[Jet]) -> Result<Jet> {
        if y.len() != 2 {
            return Err(FinslerError::DimensionMismatch {
                expected: 2,
                got: y.len(),
            });
        }
        let prof = y[0].profile();
        if prof.has_dyyy() || prof.has_dxdydy() {
            return Err(FinslerError::InvalidSpec(
                "polar profiles carry two derivatives; third-order fiber slots are unsupported"
                    .into(),
            ));
        }
        let (y1, y2) = (y[0].v, y[1].v);
        let rho2 = y1 * y1 + y2 * y2;
        let t = y2.atan2(y1);
        let (r, dr, ddr) = self.eval(t);
        if !(r.is_finite() && dr.is_finite() && ddr.is_finite()) {
            return Err(FinslerError::InvalidSpec(format!(
                "profile not finite at t = {t:.4}"
            )));
        }

        // Jet of the angle t(y): first and second fiber derivatives of atan2.
        let mut tj = Jet::raw(y[0].dim(), prof);
        tj.v = t;
        if prof.has_dy() {
            let g = [-y2 / rho2, y1 / rho2];
            for i in 0..2 {
                for (m, gm) in g.iter().enumerate() {
                    tj.dy[i] += y[m].dy[i] * gm;
                }
            }
            if prof.has_dyy() {
                let r4 = rho2 * rho2;
                let h = [
                    [2.0 * y1 * y2 / r4, (y2 * y2 - y1 * y1) / r4],
                    [(y2 * y2 - y1 * y1) / r4, -2.0 * y1 * y2 / r4],
                ];
                let n = y[0].dim();
                for i in 0..n {
                    for k in i..n {
                        let mut acc = 0.0;
                        for a in 0..2 {
                            for b in 0..2 {
                                acc += h[a][b] * y[a].dy[i] * y[b].dy[k];
                            }
                            acc += g_component(a, y1, y2, rho2) * y[a].dyy_at(i, k);
                        }
                        tj.dyy[i * n + k] = acc;
                        tj.dyy[k * n + i] = acc;
                    }
                }
            }
        }

        // m = r(t(y)), then φ = exp(−m)·|y|.
        let m = tj.univariate(r, dr, ddr, f64::NAN);
        let rho = y[0].squared().add(&y[1].squared()).sqrt();
        Ok(m.scale(-1.0).exp().mul(&rho))
    }
}

fn g_component(a: usize, y1: f64, y2: f64, rho2: f64) -> f64 {
    if a == 0 {
        -y2 / rho2
    } else {
        y1 / rho2
    }
}

fn detect_pi_periodic(eval: &Arc<ProfileFn>) -> bool {
    (0..64).all(|k| {
        let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
        let a = eval(t).0;
        let b = eval(t + std::f64::consts::PI).0;
        a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-10
    })
}

/// Fiber partials of a 1-homogeneous function in polar closed form.
#[derive(Clone, Copy, Debug)]
pub struct ProfilePartials {
    /// ∂φ/∂y¹ on the unit circle.
    pub p_y1: f64,
    /// ∂φ/∂y² on the unit circle.
    pub p_y2: f64,
    /// φ · ∂²φ/∂y¹∂y² on the unit circle.
    pub p_p12: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_profile_curvature_is_exp_r() {
        let p = PolarProfile::constant(0.7);
        for k in 0..16 {
            assert_relative_eq!(p.curvature(0.4 * k as f64), (0.7f64).exp(), epsilon = 1e-14);
        }
        let z = PolarProfile::constant(0.0);
        assert_relative_eq!(z.curvature(1.3), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sin_profile_curvature_value() {
        // r = 0.1 sin t at t = 0: ṙ = 0.1, r̈ = 0 → κ = 1.01/√1.01 = √1.01.
        let p = PolarProfile::from_fn(|t| (0.1 * t.sin(), 0.1 * t.cos(), -0.1 * t.sin()));
        assert_relative_eq!(p.curvature(0.0), (1.01f64).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn strong_convexity_scan() {
        let flat = PolarProfile::from_fn(|t| (t.sin(), t.cos(), -t.sin()));
        // r = sin t has r̈ − ṙ² − 1 = 0 exactly at t = 3π/2.
        match flat.strong_convexity(512) {
            Convexity::FlatPoint { t, .. } => {
                assert!((t - 3.0 * PI / 2.0).abs() < 0.1, "flat point at {t}")
            }
            other => panic!("expected a flat point, got {other:?}"),
        }
        let round = PolarProfile::from_fn(|t| {
            (0.1 * (2.0 * t).sin(), 0.2 * (2.0 * t).cos(), -0.4 * (2.0 * t).sin())
        });
        assert!(matches!(
            round.strong_convexity(512),
            Convexity::StronglyConvex { .. }
        ));
        assert!(matches!(
            PolarProfile::constant(0.0).strong_convexity(256),
            Convexity::StronglyConvex { .. }
        ));
    }

    #[test]
    fn branch_only_profile_flags_flatness() {
        // The level set of φ(y) = y¹ is a straight line; its branch profile
        // r = −log cos t has r̈ − ṙ² − 1 ≡ 0 wherever it is defined.
        let line = PolarProfile::from_fn(|t| {
            let c = t.cos();
            if c <= 0.0 {
                (f64::NAN, f64::NAN, f64::NAN)
            } else {
                (-c.ln(), t.tan(), 1.0 / (c * c))
            }
        });
        match line.strong_convexity(512) {
            Convexity::FlatPoint { .. } => {}
            other => panic!("expected flat point, got {other:?}"),
        }
    }

    #[test]
    fn partials_of_the_round_profile() {
        let p = PolarProfile::constant(0.0);
        let at = p.partials(PI / 4.0);
        let s = (2.0f64).sqrt() / 2.0;
        assert_relative_eq!(at.p_y1, s, epsilon = 1e-14);
        assert_relative_eq!(at.p_y2, s, epsilon = 1e-14);
        assert_relative_eq!(at.p_p12, -0.5, epsilon = 1e-14);
        let at0 = p.partials(0.0);
        assert_relative_eq!(at0.p_y1, 1.0, epsilon = 1e-14);
        assert_relative_eq!(at0.p_y2, 0.0, epsilon = 1e-14);
        assert_relative_eq!(at0.p_p12, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn profile_from_program_round_trip() {
        // φ(y) = |y| + a₁y¹ with a₁ = 0.4: r(t) = −log(1 + a₁ cos t).
        let phi: Arc<FiberProgram> = Arc::new(|y: &[Jet]| {
            let rho = y[0].squared().add(&y[1].squared()).sqrt();
            Ok(rho.add(&y[0].scale(0.4)))
        });
        let p = PolarProfile::from_program(phi).unwrap();
        for k in 0..64 {
            let t = 2.0 * PI * k as f64 / 64.0;
            let expect = -(1.0 + 0.4 * t.cos()).ln();
            assert_relative_eq!(p.r(t), expect, epsilon = 1e-10);
        }
        assert!(!p.is_pi_periodic());
        assert!(PolarProfile::constant(0.3).is_pi_periodic());
        assert!(p.periodicity_residual(32) <= 1e-12);
        assert!(PolarProfile::constant(0.3).periodicity_residual(32) <= 1e-15);

        // Reconstruct the program from the profile and round-trip the values.
        let back = p.to_program();
        for k in 0..32 {
            let t = 2.0 * PI * k as f64 / 32.0 + 0.01;
            let y = [1.7 * t.cos(), 1.7 * t.sin()];
            let j = crate::jet::lift_eval_fiber(&*back, &y, Profile::value()).unwrap();
            let direct = (y[0] * y[0] + y[1] * y[1]).sqrt() + 0.4 * y[0];
            assert_relative_eq!(j.v, direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn non_positive_source_is_rejected() {
        let phi: Arc<FiberProgram> = Arc::new(|y: &[Jet]| Ok(y[0].clone()));
        assert!(PolarProfile::from_program(phi).is_err());
    }
}
