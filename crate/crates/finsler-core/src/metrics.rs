//! Catalog of Finsler metric families.
//!
//! Global families (Euclidean, Klein, Randers) expose closed-form programs
//! for both the norm F and the projective factor P on their chart; pointwise
//! families carry data at the origin only, which is all the holonomy
//! certification consumes. Every family is projectively flat in its chart
//! coordinates, so the spray is always `G^i = P·y^i`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::holonomy::profile::PolarProfile;
use crate::jet::{self, FiberProgram, Jet, Profile};

/// Margin kept from the unit-ball boundary; evaluations closer than this
/// are rejected to avoid catastrophic cancellation in the 1/(1−|x|²) terms.
pub const CHART_MARGIN: f64 = 1e-6;

/// Sign of the one-form part of a Randers-type norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricSign {
    Plus,
    Minus,
}

impl MetricSign {
    pub fn as_f64(self) -> f64 {
        match self {
            MetricSign::Plus => 1.0,
            MetricSign::Minus => -1.0,
        }
    }
}

/// Origin data of a metric family: the norm and projective factor on the
/// punctured tangent plane at x = 0, plus the flag curvature when known.
#[derive(Clone)]
pub struct PointwiseData {
    pub n: usize,
    pub f0: Arc<FiberProgram>,
    pub p0: Arc<FiberProgram>,
    pub lambda: Option<f64>,
}

impl std::fmt::Debug for PointwiseData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PointwiseData")
            .field("n", &self.n)
            .field("lambda", &self.lambda)
            .finish()
    }
}

/// A Finsler metric family together with its chart and known constants.
#[derive(Clone)]
pub enum MetricSpec {
    /// F = |y| on all of R^n. Flat control family.
    Euclidean { n: usize },
    /// The Riemannian unit-ball metric with straight chords as geodesics;
    /// constant sectional curvature −1. Serves as the linear-holonomy control.
    Klein { n: usize },
    /// The projectively flat Randers family on the unit ball, |a| < 1,
    /// normalized to flag curvature −1/4.
    RandersShen {
        n: usize,
        a: Vec<f64>,
        sign: MetricSign,
    },
    /// Origin data F(0,y) = |y| cos α, P(0,y) = |y| sin α of the positively
    /// curved complete family; flag curvature 1.
    BryantShenPointwise { n: usize, alpha: f64 },
    /// Origin data on a surface given by polar profiles of F and P.
    PolarProfilePointwise {
        f: PolarProfile,
        p: PolarProfile,
        lambda: Option<f64>,
    },
    /// Arbitrary origin data.
    CustomPointwise(PointwiseData),
    /// Restriction of a global family to a coordinate 2-plane through the
    /// origin (see the submanifold module).
    Restricted {
        parent: Box<MetricSpec>,
        plane: (usize, usize),
    },
}

impl std::fmt::Debug for MetricSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricSpec::Euclidean { n } => write!(f, "Euclidean(n={n})"),
            MetricSpec::Klein { n } => write!(f, "Klein(n={n})"),
            MetricSpec::RandersShen { n, a, sign } => {
                write!(f, "RandersShen(n={n}, a={a:?}, sign={sign:?})")
            }
            MetricSpec::BryantShenPointwise { n, alpha } => {
                write!(f, "BryantShenPointwise(n={n}, alpha={alpha})")
            }
            MetricSpec::PolarProfilePointwise { lambda, .. } => {
                write!(f, "PolarProfilePointwise(lambda={lambda:?})")
            }
            MetricSpec::CustomPointwise(d) => write!(f, "CustomPointwise(n={})", d.n),
            MetricSpec::Restricted { parent, plane } => {
                write!(f, "Restricted({parent:?}, plane={plane:?})")
            }
        }
    }
}

impl MetricSpec {
    pub fn randers(n: usize, a: Vec<f64>, sign: MetricSign) -> Result<Self> {
        if a.len() != n {
            return Err(FinslerError::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        let na = norm(&a);
        if na >= 1.0 {
            return Err(FinslerError::InvalidSpec(format!(
                "Randers one-form must satisfy |a| < 1, got {na}"
            )));
        }
        Ok(MetricSpec::RandersShen { n, a, sign })
    }

    pub fn bryant_shen(n: usize, alpha: f64) -> Result<Self> {
        if alpha.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(FinslerError::InvalidSpec(format!(
                "Bryant-Shen angle must satisfy |alpha| < pi/2, got {alpha}"
            )));
        }
        Ok(MetricSpec::BryantShenPointwise { n, alpha })
    }

    pub fn dim(&self) -> usize {
        match self {
            MetricSpec::Euclidean { n } | MetricSpec::Klein { n } => *n,
            MetricSpec::RandersShen { n, .. } => *n,
            MetricSpec::BryantShenPointwise { n, .. } => *n,
            MetricSpec::PolarProfilePointwise { .. } => 2,
            MetricSpec::CustomPointwise(d) => d.n,
            MetricSpec::Restricted { .. } => 2,
        }
    }

    /// Known constant flag curvature of the family, if any.
    pub fn lambda(&self) -> Option<f64> {
        match self {
            MetricSpec::Euclidean { .. } => Some(0.0),
            MetricSpec::Klein { .. } => Some(-1.0),
            MetricSpec::RandersShen { .. } => Some(-0.25),
            MetricSpec::BryantShenPointwise { .. } => Some(1.0),
            MetricSpec::PolarProfilePointwise { lambda, .. } => *lambda,
            MetricSpec::CustomPointwise(d) => d.lambda,
            MetricSpec::Restricted { parent, .. } => parent.lambda(),
        }
    }

    /// Whether the family has closed-form x-dependence (and hence base-point
    /// derivatives) on a chart, as opposed to origin-only data.
    pub fn is_global(&self) -> bool {
        match self {
            MetricSpec::Euclidean { .. }
            | MetricSpec::Klein { .. }
            | MetricSpec::RandersShen { .. } => true,
            MetricSpec::BryantShenPointwise { .. }
            | MetricSpec::PolarProfilePointwise { .. }
            | MetricSpec::CustomPointwise(_) => false,
            MetricSpec::Restricted { parent, .. } => parent.is_global(),
        }
    }

    /// Chart membership test. Ball families keep [`CHART_MARGIN`] away from
    /// the boundary; pointwise families accept the origin only.
    pub fn check_chart(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(FinslerError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self {
            MetricSpec::Euclidean { .. } => Ok(()),
            MetricSpec::Klein { .. } | MetricSpec::RandersShen { .. } => {
                let nx = norm(x);
                if nx > 1.0 - CHART_MARGIN {
                    Err(FinslerError::ChartViolation {
                        reason: format!("|x| = {nx:.8} exceeds the unit-ball margin"),
                    })
                } else {
                    Ok(())
                }
            }
            MetricSpec::BryantShenPointwise { .. }
            | MetricSpec::PolarProfilePointwise { .. }
            | MetricSpec::CustomPointwise(_) => {
                if norm(x) > 1e-12 {
                    Err(FinslerError::PointwiseOutsideOrigin)
                } else {
                    Ok(())
                }
            }
            MetricSpec::Restricted { parent, plane } => {
                parent.check_chart(&embed_point(x, *plane, parent.dim()))
            }
        }
    }

    /// Jet of the norm F at (x, y) with the requested slots.
    pub fn f_jet(&self, x: &[f64], y: &[f64], prof: Profile) -> Result<Jet> {
        self.check_chart(x)?;
        match self {
            MetricSpec::Euclidean { .. } => jet::lift_eval(&euclid_f, x, y, prof),
            MetricSpec::Klein { .. } => jet::lift_eval(&klein_f, x, y, prof),
            MetricSpec::RandersShen { a, sign, .. } => {
                let (a, s) = (a.clone(), sign.as_f64());
                jet::lift_eval(&move |xj: &[Jet], yj: &[Jet]| randers_f(&a, s, xj, yj), x, y, prof)
            }
            MetricSpec::Restricted { parent, plane } => {
                restricted_jet(parent, *plane, x, y, prof, true)
            }
            _ => {
                // Pointwise data: x is already checked to be the origin.
                // Base-derivative slots would come back as misleading zeros,
                // so profiles requesting them are rejected outright.
                if prof.has_dx() {
                    return Err(FinslerError::NoBaseDerivatives);
                }
                let data = self.pointwise_at_origin()?;
                jet::lift_eval_fiber(&*data.f0, y, prof)
            }
        }
    }

    /// Jet of the projective factor P at (x, y).
    pub fn p_jet(&self, x: &[f64], y: &[f64], prof: Profile) -> Result<Jet> {
        self.check_chart(x)?;
        match self {
            MetricSpec::Euclidean { n } => {
                if norm(y) < jet::DEGENERATE_Y_NORM {
                    return Err(FinslerError::DegenerateDirection { norm: norm(y) });
                }
                Ok(Jet::constant(*n, prof, 0.0))
            }
            MetricSpec::Klein { .. } => jet::lift_eval(&klein_p, x, y, prof),
            MetricSpec::RandersShen { a, sign, .. } => {
                let (a, s) = (a.clone(), sign.as_f64());
                jet::lift_eval(&move |xj: &[Jet], yj: &[Jet]| randers_p(&a, s, xj, yj), x, y, prof)
            }
            MetricSpec::Restricted { parent, plane } => {
                restricted_jet(parent, *plane, x, y, prof, false)
            }
            _ => {
                if prof.has_dx() {
                    return Err(FinslerError::NoBaseDerivatives);
                }
                let data = self.pointwise_at_origin()?;
                jet::lift_eval_fiber(&*data.p0, y, prof)
            }
        }
    }

    /// F(x, y).
    pub fn finsler_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.f_jet(x, y, Profile::value())?.v)
    }

    /// Projective factor P(x, y): the closed form where the family has one,
    /// origin data otherwise.
    pub fn projective_factor(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.p_jet(x, y, Profile::value())?.v)
    }

    /// P recomputed from the norm alone via P = (∂F/∂x^i y^i) / (2F).
    /// Needs base-point derivatives, so pointwise families are rejected;
    /// agreement with [`Self::projective_factor`] is a standing invariant.
    pub fn projective_factor_from_f(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if !self.is_global() {
            return Err(FinslerError::NoBaseDerivatives);
        }
        let j = self.f_jet(x, y, Profile::new(0, 1, 0))?;
        let fx_dot_y: f64 = j.dx.iter().zip(y).map(|(d, yi)| d * yi).sum();
        Ok(fx_dot_y / (2.0 * j.v))
    }

    /// Metric tensor g_ij = ½ ∂²F²/∂y^i∂y^j, with a positive-definiteness
    /// check (failure is reported, never silently ignored).
    pub fn metric_tensor(&self, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
        let j = self.f_jet(x, y, Profile::fiber(2))?;
        let n = y.len();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                g[(i, k)] = j.dy[i] * j.dy[k] + j.v * j.dyy_at(i, k);
            }
        }
        if g.clone().cholesky().is_none() {
            return Err(FinslerError::DegenerateMetric);
        }
        Ok(g)
    }

    /// Max relative Euler residual |∂F/∂y·y − F| / (1 + |F|) over samples.
    pub fn check_homogeneity(&self, samples: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
        let mut worst = 0.0f64;
        for (x, y) in samples {
            let j = self.f_jet(x, y, Profile::fiber(1))?;
            worst = worst.max(j.euler_residual(y, 1.0));
        }
        Ok(worst)
    }

    /// Origin view of the family: F(0,·), P(0,·) and the curvature constant.
    pub fn pointwise_at_origin(&self) -> Result<PointwiseData> {
        match self {
            MetricSpec::Euclidean { n } | MetricSpec::Klein { n } => Ok(PointwiseData {
                n: *n,
                f0: Arc::new(|y: &[Jet]| euclid_fiber(y)),
                p0: zero_fiber_program(),
                lambda: self.lambda(),
            }),
            MetricSpec::RandersShen { n, a, sign } => {
                let (af, ap) = (a.clone(), a.clone());
                let s = sign.as_f64();
                Ok(PointwiseData {
                    n: *n,
                    f0: Arc::new(move |y: &[Jet]| {
                        // F(0,y) = |y| ± <a,y>
                        Ok(euclid_fiber(y)?.add(&dot_const(&af, y).scale(s)))
                    }),
                    p0: Arc::new(move |y: &[Jet]| {
                        // P(0,y) = (±|y| − <a,y>)/2
                        let e = euclid_fiber(y)?;
                        Ok(e.scale(s).sub(&dot_const(&ap, y)).scale(0.5))
                    }),
                    lambda: self.lambda(),
                })
            }
            MetricSpec::BryantShenPointwise { n, alpha } => {
                let (c, s) = (alpha.cos(), alpha.sin());
                Ok(PointwiseData {
                    n: *n,
                    f0: Arc::new(move |y: &[Jet]| Ok(euclid_fiber(y)?.scale(c))),
                    p0: Arc::new(move |y: &[Jet]| Ok(euclid_fiber(y)?.scale(s))),
                    lambda: Some(1.0),
                })
            }
            MetricSpec::PolarProfilePointwise { f, p, lambda } => Ok(PointwiseData {
                n: 2,
                f0: f.to_program(),
                p0: p.to_program(),
                lambda: *lambda,
            }),
            MetricSpec::CustomPointwise(d) => Ok(d.clone()),
            MetricSpec::Restricted { parent, plane } => {
                let inner = parent.pointwise_at_origin()?;
                let plane = *plane;
                let parent_n = inner.n;
                let (f0, p0) = (inner.f0.clone(), inner.p0.clone());
                Ok(PointwiseData {
                    n: 2,
                    f0: Arc::new(move |y: &[Jet]| f0(&embed_jets(y, plane, parent_n))),
                    p0: Arc::new(move |y: &[Jet]| p0(&embed_jets(y, plane, parent_n))),
                    lambda: inner.lambda,
                })
            }
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// P(x, y) with a relaxed chart bound (hard cap at 1 − 1e-7 instead of the
/// public margin). Integrator stages may legitimately poke past the event
/// surface |x| = 1 − 1e-6 before the crossing is located; rejecting them
/// there would stall the step controller.
pub(crate) fn p_value_relaxed(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    match spec {
        MetricSpec::Euclidean { .. } => Ok(0.0),
        MetricSpec::Klein { .. } | MetricSpec::RandersShen { .. } => {
            let nx = norm(x);
            if nx > 1.0 - 1e-7 {
                return Err(FinslerError::ChartViolation {
                    reason: format!("|x| = {nx:.9} beyond the hard evaluation cap"),
                });
            }
            let prof = Profile::value();
            match spec {
                MetricSpec::Klein { .. } => Ok(jet::lift_eval(&klein_p, x, y, prof)?.v),
                MetricSpec::RandersShen { a, sign, .. } => {
                    let s = sign.as_f64();
                    let a = a.clone();
                    Ok(
                        jet::lift_eval(
                            &move |xj: &[Jet], yj: &[Jet]| randers_p(&a, s, xj, yj),
                            x,
                            y,
                            prof,
                        )?
                        .v,
                    )
                }
                _ => unreachable!(),
            }
        }
        MetricSpec::Restricted { parent, plane } => {
            p_value_relaxed(parent, &embed_point(x, *plane, parent.dim()), &{
                let mut ye = vec![0.0; parent.dim()];
                ye[plane.0] = y[0];
                ye[plane.1] = y[1];
                ye
            })
        }
        _ => Err(FinslerError::NoBaseDerivatives),
    }
}

fn zero_fiber_program() -> Arc<FiberProgram> {
    Arc::new(|y: &[Jet]| Ok(Jet::constant(y[0].dim(), y[0].profile(), 0.0)))
}

fn dot_const(a: &[f64], y: &[Jet]) -> Jet {
    let mut acc = y[0].scale(a[0]);
    for i in 1..y.len() {
        acc = acc.add(&y[i].scale(a[i]));
    }
    acc
}

fn sum_squares(v: &[Jet]) -> Jet {
    let mut acc = v[0].squared();
    for j in &v[1..] {
        acc = acc.add(&j.squared());
    }
    acc
}

fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut acc = a[0].mul(&b[0]);
    for i in 1..a.len() {
        acc = acc.add(&a[i].mul(&b[i]));
    }
    acc
}

fn euclid_f(_x: &[Jet], y: &[Jet]) -> crate::Result<Jet> {
    Ok(sum_squares(y).sqrt())
}

fn euclid_fiber(y: &[Jet]) -> crate::Result<Jet> {
    Ok(sum_squares(y).sqrt())
}

/// Shared core of the ball families: A = |y|²(1−|x|²) + ⟨x,y⟩² and 1−|x|².
fn ball_core(x: &[Jet], y: &[Jet]) -> (Jet, Jet) {
    let yy = sum_squares(y);
    let xx = sum_squares(x);
    let xy = dot(x, y);
    let one_minus = xx.scale(-1.0).add_scalar(1.0);
    let a = yy.mul(&one_minus).add(&xy.squared());
    (a, one_minus)
}

fn klein_f(x: &[Jet], y: &[Jet]) -> crate::Result<Jet> {
    let (a, one_minus) = ball_core(x, y);
    Ok(a.sqrt().div(&one_minus))
}

fn klein_p(x: &[Jet], y: &[Jet]) -> crate::Result<Jet> {
    let xy = dot(x, y);
    let one_minus = sum_squares(x).scale(-1.0).add_scalar(1.0);
    Ok(xy.div(&one_minus))
}

fn randers_f(a: &[f64], sign: f64, x: &[Jet], y: &[Jet]) -> crate::Result<Jet> {
    let (big_a, one_minus) = ball_core(x, y);
    let xy = dot(x, y);
    let root_term = big_a.sqrt().add(&xy.scale(sign)).div(&one_minus);
    let one_form = dot_const(a, y).div(&dot_const(a, x).add_scalar(1.0));
    Ok(root_term.add(&one_form.scale(sign)))
}

fn randers_p(a: &[f64], sign: f64, x: &[Jet], y: &[Jet]) -> crate::Result<Jet> {
    let (big_a, one_minus) = ball_core(x, y);
    let xy = dot(x, y);
    let root_term = big_a.sqrt().scale(sign).add(&xy).div(&one_minus);
    let one_form = dot_const(a, y).div(&dot_const(a, x).add_scalar(1.0));
    Ok(root_term.sub(&one_form).scale(0.5))
}

/// Zero-pad a 2-plane point into the parent's coordinates.
pub(crate) fn embed_point(x: &[f64], plane: (usize, usize), parent_n: usize) -> Vec<f64> {
    let mut out = vec![0.0; parent_n];
    out[plane.0] = x[0];
    out[plane.1] = x[1];
    out
}

/// Same for seeded jets: off-plane coordinates become constants, so the
/// parent program differentiates only along the plane.
pub(crate) fn embed_jets(v: &[Jet], plane: (usize, usize), parent_n: usize) -> Vec<Jet> {
    let (n, prof) = (v[0].dim(), v[0].profile());
    let mut out = vec![Jet::constant(n, prof, 0.0); parent_n];
    out[plane.0] = v[0].clone();
    out[plane.1] = v[1].clone();
    out
}

fn restricted_jet(
    parent: &MetricSpec,
    plane: (usize, usize),
    x: &[f64],
    y: &[f64],
    prof: Profile,
    want_f: bool,
) -> Result<Jet> {
    if norm(y) < jet::DEGENERATE_Y_NORM {
        return Err(FinslerError::DegenerateDirection { norm: norm(y) });
    }
    let n = y.len();
    let xs: Vec<Jet> = (0..n).map(|j| Jet::x_var(n, prof, j, x[j])).collect();
    let ys: Vec<Jet> = (0..n).map(|i| Jet::y_var(n, prof, i, y[i])).collect();
    let parent_n = parent.dim();
    let xe = embed_jets(&xs, plane, parent_n);
    let ye = embed_jets(&ys, plane, parent_n);
    match parent {
        MetricSpec::Euclidean { .. } => {
            if want_f {
                euclid_f(&xe, &ye)
            } else {
                Ok(Jet::constant(n, prof, 0.0))
            }
        }
        MetricSpec::Klein { .. } => {
            if want_f {
                klein_f(&xe, &ye)
            } else {
                klein_p(&xe, &ye)
            }
        }
        MetricSpec::RandersShen { a, sign, .. } => {
            if want_f {
                randers_f(a, sign.as_f64(), &xe, &ye)
            } else {
                randers_p(a, sign.as_f64(), &xe, &ye)
            }
        }
        _ => {
            // Pointwise parent: only origin fiber data is available.
            if prof.has_dx() || norm(x) > 1e-12 {
                return Err(FinslerError::NoBaseDerivatives);
            }
            let data = parent.pointwise_at_origin()?;
            let prog = if want_f { &data.f0 } else { &data.p0 };
            prog(&ye)
        }
    }
}

// ---------------------------------------------------------------------------
// File-facing specification (the JSON schema consumed by the CLI).
// ---------------------------------------------------------------------------

/// On-disk metric description. Field names are part of the CLI contract.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricSpecFile {
    pub family: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfilePairSpec>,
}

/// Profiles for the polar pointwise family: one for F, one for P.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfilePairSpec {
    pub f: ProfileSpec,
    pub p: ProfileSpec,
}

/// Closed-form profile constructors expressible in a spec file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    /// r ≡ value (circle of radius e^value).
    Constant { value: f64 },
    /// r(t) = amplitude · sin(frequency · t + phase).
    Sinusoid {
        amplitude: f64,
        frequency: u32,
        #[serde(default)]
        phase: f64,
    },
    /// Profile of |y| + ⟨a, y⟩ (an off-center oval), |a| < 1.
    NormPlusLinear { a: [f64; 2] },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<PolarProfile> {
        match self {
            ProfileSpec::Constant { value } => Ok(PolarProfile::constant(*value)),
            ProfileSpec::Sinusoid {
                amplitude,
                frequency,
                phase,
            } => {
                let (aa, ff, ph) = (*amplitude, *frequency as f64, *phase);
                Ok(PolarProfile::from_fn(move |t| {
                    let u = ff * t + ph;
                    (aa * u.sin(), aa * ff * u.cos(), -aa * ff * ff * u.sin())
                }))
            }
            ProfileSpec::NormPlusLinear { a } => {
                let a = *a;
                if (a[0] * a[0] + a[1] * a[1]).sqrt() >= 1.0 {
                    return Err(FinslerError::InvalidSpec(
                        "norm_plus_linear profile needs |a| < 1".into(),
                    ));
                }
                let prog: Arc<FiberProgram> = Arc::new(move |y: &[Jet]| {
                    Ok(euclid_fiber(y)?.add(&dot_const(&a, y)))
                });
                PolarProfile::from_program(prog)
            }
        }
    }
}

impl TryFrom<&MetricSpecFile> for MetricSpec {
    type Error = FinslerError;

    fn try_from(file: &MetricSpecFile) -> Result<MetricSpec> {
        let sign = match file.sign {
            None => MetricSign::Plus,
            Some(s) if s > 0.0 => MetricSign::Plus,
            Some(s) if s < 0.0 => MetricSign::Minus,
            Some(_) => {
                return Err(FinslerError::InvalidSpec("sign must be nonzero".into()));
            }
        };
        match file.family.as_str() {
            "euclidean" => Ok(MetricSpec::Euclidean { n: file.n }),
            "klein" => Ok(MetricSpec::Klein { n: file.n }),
            "randers_shen" => {
                let a = file.a.clone().unwrap_or_else(|| vec![0.0; file.n]);
                MetricSpec::randers(file.n, a, sign)
            }
            "bryant_shen_pointwise" => {
                let alpha = file.alpha.ok_or_else(|| {
                    FinslerError::InvalidSpec("bryant_shen_pointwise requires alpha".into())
                })?;
                MetricSpec::bryant_shen(file.n, alpha)
            }
            "polar_profile_pointwise" => {
                if file.n != 2 {
                    return Err(FinslerError::InvalidSpec(
                        "polar_profile_pointwise is a surface family (n = 2)".into(),
                    ));
                }
                let pair = file.profile.as_ref().ok_or_else(|| {
                    FinslerError::InvalidSpec("polar_profile_pointwise requires profile".into())
                })?;
                Ok(MetricSpec::PolarProfilePointwise {
                    f: pair.f.build()?,
                    p: pair.p.build()?,
                    lambda: file.lambda,
                })
            }
            other => Err(FinslerError::InvalidSpec(format!(
                "unknown family '{other}'"
            ))),
        }
    }
}
