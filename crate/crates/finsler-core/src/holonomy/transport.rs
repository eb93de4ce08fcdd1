//! Nonlinear parallel transport along piecewise-linear curves and loop
//! holonomy as a sampled self-map of the indicatrix.
//!
//! Transport solves Ẋ^i + G^i_j(c(t), X) ċ^j = 0; since G^i_j is positively
//! 1-homogeneous in the fiber, the flow commutes with positive scaling and
//! preserves the Finsler norm. Both facts are monitored, not assumed: every
//! accepted node contributes to the reported norm drift.

use nalgebra::DMatrix;

use crate::error::{FinslerError, Result};
use crate::jet::Profile;
use crate::metrics::MetricSpec;
use crate::ode::{self, OdeOptions};

/// Piecewise-linear path in a chart. Each consecutive pair of points is one
/// segment parametrized on [0, 1].
#[derive(Clone, Debug)]
pub struct Curve {
    pub points: Vec<Vec<f64>>,
}

impl Curve {
    pub fn polyline(points: Vec<Vec<f64>>) -> Self {
        assert!(points.len() >= 2, "a curve needs at least two points");
        Curve { points }
    }

    /// Axis-aligned square loop with the given corner and side, traversed
    /// counterclockwise in the first two coordinates.
    pub fn square_loop(corner: &[f64], side: f64) -> Self {
        let p0 = corner.to_vec();
        let mut p1 = corner.to_vec();
        let mut p2 = corner.to_vec();
        let mut p3 = corner.to_vec();
        p1[0] += side;
        p2[0] += side;
        p2[1] += side;
        p3[1] += side;
        Curve {
            points: vec![p0.clone(), p1, p2, p3, p0],
        }
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().unwrap()
    }

    pub fn closure_gap(&self) -> f64 {
        self.start()
            .iter()
            .zip(self.end())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_closed(&self) -> bool {
        self.closure_gap() <= 1e-12
    }
}

/// Outcome of transporting one vector along a curve.
#[derive(Clone, Debug)]
pub struct TransportResult {
    pub y_end: Vec<f64>,
    /// Max relative change of F(c(t), X(t)) over the accepted mesh.
    pub f_drift: f64,
    pub steps: usize,
    pub rejected_steps: usize,
}

/// Parallel-transport y0 along the curve.
pub fn parallel_transport(
    spec: &MetricSpec,
    curve: &Curve,
    y0: &[f64],
    opts: &OdeOptions,
) -> Result<TransportResult> {
    // Chart membership of the vertices covers the whole polyline: the ball
    // charts are convex.
    for p in &curve.points {
        spec.check_chart(p)?;
    }
    let n = y0.len();
    let f0 = spec.finsler_value(curve.start(), y0)?;
    let y0_norm = y0.iter().map(|a| a * a).sum::<f64>().sqrt();

    let mut x_cur = y0.to_vec();
    let mut f_drift = 0.0f64;
    let mut steps = 0;
    let mut rejected = 0;

    for seg in curve.points.windows(2) {
        let (p, q) = (&seg[0], &seg[1]);
        let cdot: Vec<f64> = q.iter().zip(p).map(|(b, a)| b - a).collect();
        if cdot.iter().all(|v| v.abs() < 1e-15) {
            continue;
        }
        let rhs = |t: f64, xv: &[f64], dxv: &mut [f64]| -> Result<()> {
            let c: Vec<f64> = p.iter().zip(&cdot).map(|(a, d)| a + t * d).collect();
            let pj = spec.p_jet(&c, xv, Profile::fiber(1))?;
            // G^i_j ċ^j = (P_j ċ^j) X^i + P ċ^i.
            let radial: f64 = pj.dy.iter().zip(&cdot).map(|(d, c)| d * c).sum();
            for i in 0..n {
                dxv[i] = -(radial * xv[i] + pj.v * cdot[i]);
            }
            Ok(())
        };
        let sol = ode::integrate(&rhs, 0.0, 1.0, &x_cur, opts, None)?;
        steps += sol.steps;
        rejected += sol.rejected;
        for (k, state) in sol.states.iter().enumerate() {
            let nx = state.iter().map(|a| a * a).sum::<f64>().sqrt();
            if nx < 1e-12 * y0_norm.max(1.0) {
                return Err(FinslerError::VectorCollapse { t: sol.ts[k] });
            }
            let c: Vec<f64> = p.iter().zip(&cdot).map(|(a, d)| a + sol.ts[k] * d).collect();
            let f = spec.finsler_value(&c, state)?;
            f_drift = f_drift.max((f - f0).abs() / f0);
        }
        x_cur = sol.end_state().to_vec();
    }

    Ok(TransportResult {
        y_end: x_cur,
        f_drift,
        steps,
        rejected_steps: rejected,
    })
}

/// Sampled holonomy map of a closed loop: indicatrix points at the base,
/// their transported images re-projected onto the indicatrix, and the
/// magnitude of that radial correction per sample. Samples whose correction
/// exceeds 1e-6 are dropped and counted in `invalidated`.
#[derive(Clone, Debug)]
pub struct IndicatrixMap {
    pub x0: Vec<f64>,
    pub sources: Vec<Vec<f64>>,
    pub images: Vec<Vec<f64>>,
    pub corrections: Vec<f64>,
    pub max_f_drift: f64,
    pub invalidated: usize,
}

/// Evenly spread directions on the circle (surface charts).
pub fn circle_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Transport every sampled indicatrix point around the loop.
pub fn loop_holonomy(
    spec: &MetricSpec,
    loop_curve: &Curve,
    directions: &[Vec<f64>],
    opts: &OdeOptions,
) -> Result<IndicatrixMap> {
    let gap = loop_curve.closure_gap();
    if gap > 1e-12 {
        return Err(FinslerError::OpenLoop { gap });
    }
    let x0 = loop_curve.start().to_vec();
    let mut map = IndicatrixMap {
        x0: x0.clone(),
        sources: Vec::new(),
        images: Vec::new(),
        corrections: Vec::new(),
        max_f_drift: 0.0,
        invalidated: 0,
    };
    for d in directions {
        let f = spec.finsler_value(&x0, d)?;
        let src: Vec<f64> = d.iter().map(|v| v / f).collect();
        let tr = parallel_transport(spec, loop_curve, &src, opts)?;
        let f_end = spec.finsler_value(&x0, &tr.y_end)?;
        let correction = (f_end - 1.0).abs();
        if correction > 1e-6 {
            map.invalidated += 1;
            continue;
        }
        map.max_f_drift = map.max_f_drift.max(tr.f_drift);
        map.sources.push(src);
        map.images.push(tr.y_end.iter().map(|v| v / f_end).collect());
        map.corrections.push(correction);
    }
    Ok(map)
}

/// Distance of a sampled self-map from the nearest linear map: least-squares
/// fit of A over all pairs, then the max residual relative to the largest
/// image norm. Zero for the identity and for any exactly linear sample set;
/// strictly positive for nonlinear holonomy.
pub fn nonlinearity_defect(map: &IndicatrixMap) -> Result<f64> {
    let got = map.sources.len();
    if got < 32 {
        return Err(FinslerError::UnderSampled { need: 32, got });
    }
    let n = map.x0.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut b = DMatrix::<f64>::zeros(n, n);
    for (u, v) in map.sources.iter().zip(&map.images) {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += u[i] * u[j];
                b[(i, j)] += v[i] * u[j];
            }
        }
    }
    let lu = m.lu();
    let a_t = lu
        .solve(&b.transpose())
        .ok_or(FinslerError::DegenerateMetric)?;
    let a = a_t.transpose();

    let max_norm = map
        .images
        .iter()
        .map(|v| v.iter().map(|a| a * a).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut worst = 0.0f64;
    for (u, v) in map.sources.iter().zip(&map.images) {
        let mut res = 0.0;
        for i in 0..n {
            let pred: f64 = (0..n).map(|j| a[(i, j)] * u[j]).sum();
            res += (pred - v[i]) * (pred - v[i]);
        }
        worst = worst.max(res.sqrt());
    }
    Ok(worst / max_norm)
}
