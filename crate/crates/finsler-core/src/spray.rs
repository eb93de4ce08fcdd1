//! Geodesic spray, nonlinear connection, horizontal lift, geodesic flow.
//!
//! On the projectively flat charts every family in the catalog uses, the
//! spray is `G^i = P·y^i` and the connection coefficients follow from fiber
//! derivatives of the projective factor alone:
//!
//! ```text
//! G^i_j  = P_j y^i + P δ^i_j,      G^i_jk = P_jk y^i + P_j δ^i_k + P_k δ^i_j.
//! ```
//!
//! The metric route `G^i = ¼ g^{il}(2 ∂g_jl/∂x^k − ∂g_jk/∂x^l) y^j y^k`
//! stays available as an independent cross-check; the two must agree on
//! every global family.

use nalgebra::{DMatrix, DVector};

use crate::error::{FinslerError, Result};
use crate::jet::Profile;
use crate::metrics::MetricSpec;
use crate::ode::{self, OdeOptions};

/// Spray and connection coefficients at a point of the slit tangent bundle.
#[derive(Clone, Debug)]
pub struct SprayData {
    pub n: usize,
    /// G^i.
    pub g: Vec<f64>,
    /// G^i_j, row-major (i, j).
    pub gj: Vec<f64>,
    /// G^i_jk, (i, j, k), symmetric in (j, k).
    pub gjk: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl SprayData {
    #[inline]
    pub fn g_at(&self, i: usize) -> f64 {
        self.g[i]
    }

    #[inline]
    pub fn gj_at(&self, i: usize, j: usize) -> f64 {
        self.gj[i * self.n + j]
    }

    #[inline]
    pub fn gjk_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gjk[(i * self.n + j) * self.n + k]
    }
}

/// Spray data from the projective factor.
pub fn geodesic_coefficients(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<SprayData> {
    let p = spec.p_jet(x, y, Profile::fiber(2))?;
    let n = y.len();
    let mut data = SprayData {
        n,
        g: vec![0.0; n],
        gj: vec![0.0; n * n],
        gjk: vec![0.0; n * n * n],
        x: x.to_vec(),
        y: y.to_vec(),
    };
    for i in 0..n {
        data.g[i] = p.v * y[i];
        for j in 0..n {
            data.gj[i * n + j] = p.dy[j] * y[i] + if i == j { p.v } else { 0.0 };
            for k in 0..n {
                let mut v = p.dyy_at(j, k) * y[i];
                if i == k {
                    v += p.dy[j];
                }
                if i == j {
                    v += p.dy[k];
                }
                data.gjk[(i * n + j) * n + k] = v;
            }
        }
    }
    Ok(data)
}

/// G^i recomputed from the metric tensor and its base-point derivatives,
/// with g^{il} applied by a Cholesky solve. Independent of the projective
/// factor; used to cross-check [`geodesic_coefficients`].
pub fn geodesic_coefficients_from_metric(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
) -> Result<Vec<f64>> {
    if !spec.is_global() {
        return Err(FinslerError::NoBaseDerivatives);
    }
    let f = spec.f_jet(x, y, Profile::mixed(2, 2))?;
    let n = y.len();
    // g_jl = F_j F_l + F F_jl, ∂g_jl/∂x^k = ½ (F²)_{x^k y^j y^l}.
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            g[(j, l)] = f.dy[j] * f.dy[l] + f.v * f.dyy_at(j, l);
        }
    }
    let dg = |k: usize, j: usize, l: usize| -> f64 {
        f.dxdy_at(k, j) * f.dy[l]
            + f.dy[j] * f.dxdy_at(k, l)
            + f.dx[k] * f.dyy_at(j, l)
            + f.v * f.dxdydy_at(k, j, l)
    };
    let mut b = DVector::zeros(n);
    for l in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                acc += (2.0 * dg(k, j, l) - dg(l, j, k)) * y[j] * y[k];
            }
        }
        b[l] = 0.25 * acc;
    }
    let chol = g.cholesky().ok_or(FinslerError::DegenerateMetric)?;
    Ok(chol.solve(&b).iter().copied().collect())
}

/// Horizontal lift of a tangent vector v at (x, y): the pair of components
/// (v, −G^i_k v^k) in the (∂x, ∂y) splitting of T(TM).
pub fn horizontal_lift(
    spec: &MetricSpec,
    x: &[f64],
    y: &[f64],
    v: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = geodesic_coefficients(spec, x, y)?;
    let n = y.len();
    let mut vert = vec![0.0; n];
    for i in 0..n {
        for k in 0..n {
            vert[i] -= s.gj_at(i, k) * v[k];
        }
    }
    Ok((v.to_vec(), vert))
}

/// Integrated geodesic: positions and velocities on the accepted mesh.
pub struct GeodesicTrace {
    pub n: usize,
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    /// Where the trajectory hit the chart-exit surface, if it did.
    pub exit_time: Option<f64>,
    pub steps: usize,
    pub rejected_steps: usize,
    sol: ode::OdeSolution,
}

impl GeodesicTrace {
    pub fn sample(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let z = self.sol.sample(t);
        (z[..self.n].to_vec(), z[self.n..].to_vec())
    }

    pub fn end_time(&self) -> f64 {
        self.sol.end_time()
    }

    /// Max distance of the position trace from the line x0 + span{y0}.
    pub fn chord_deviation(&self) -> f64 {
        let x0 = &self.positions[0];
        let y0 = &self.velocities[0];
        let ny = y0.iter().map(|a| a * a).sum::<f64>().sqrt();
        let u: Vec<f64> = y0.iter().map(|a| a / ny).collect();
        let mut worst = 0.0f64;
        for p in &self.positions {
            let d: Vec<f64> = p.iter().zip(x0).map(|(a, b)| a - b).collect();
            let along: f64 = d.iter().zip(&u).map(|(a, b)| a * b).sum();
            let perp: f64 = d
                .iter()
                .zip(&u)
                .map(|(a, b)| a - along * b)
                .map(|a| a * a)
                .sum::<f64>()
                .sqrt();
            worst = worst.max(perp);
        }
        worst
    }
}

/// Solve the geodesic equation ẍ + 2 G(x, ẋ) = 0 from (x0, y0) over [0, t_max].
///
/// Ball-chart families stop at the exit surface |x| = 1 − 1e-6 with the exit
/// time recorded; the flat family integrates the full span.
pub fn geodesic_integrate(
    spec: &MetricSpec,
    x0: &[f64],
    y0: &[f64],
    t_max: f64,
    opts: &OdeOptions,
) -> Result<GeodesicTrace> {
    spec.check_chart(x0)?;
    if !spec.is_global() {
        return Err(FinslerError::NoBaseDerivatives);
    }
    let n = x0.len();
    let z0: Vec<f64> = x0.iter().chain(y0.iter()).copied().collect();

    let rhs = |_t: f64, z: &[f64], dz: &mut [f64]| -> Result<()> {
        let (x, v) = z.split_at(n);
        let p = crate::metrics::p_value_relaxed(spec, x, v)?;
        for i in 0..n {
            dz[i] = v[i];
            dz[n + i] = -2.0 * p * v[i];
        }
        Ok(())
    };

    let needs_event = !matches!(spec, MetricSpec::Euclidean { .. });
    let event = |_t: f64, z: &[f64]| -> f64 {
        let r: f64 = z[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
        (1.0 - 1e-6) - r
    };
    let sol = ode::integrate(
        &rhs,
        0.0,
        t_max,
        &z0,
        opts,
        if needs_event { Some(&event) } else { None },
    )?;

    let positions = sol.states.iter().map(|z| z[..n].to_vec()).collect();
    let velocities = sol.states.iter().map(|z| z[n..].to_vec()).collect();
    Ok(GeodesicTrace {
        n,
        times: sol.ts.clone(),
        positions,
        velocities,
        exit_time: sol.event_time,
        steps: sol.steps,
        rejected_steps: sol.rejected,
        sol,
    })
}
