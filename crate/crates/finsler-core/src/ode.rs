//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! Right-hand sides may fail (chart guards inside metric programs); a failed
//! stage evaluation is treated like an oversized error estimate and the step
//! is retried with half the step size. An optional scalar event function
//! stops the integration where it first crosses zero from above; the crossing
//! is located by bisection on the cubic Hermite interpolant.

use crate::error::{FinslerError, Result};

pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Initial step; estimated from the first derivative when `None`.
    pub h0: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            h0: None,
        }
    }
}

/// Accepted mesh with derivatives, enough for cubic Hermite resampling.
pub struct OdeSolution {
    pub ts: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
    pub steps: usize,
    pub rejected: usize,
    /// Where the event function crossed zero, if it did; the mesh is
    /// truncated there.
    pub event_time: Option<f64>,
}

impl OdeSolution {
    pub fn end_time(&self) -> f64 {
        *self.ts.last().expect("non-empty solution")
    }

    pub fn end_state(&self) -> &[f64] {
        self.states.last().expect("non-empty solution")
    }

    /// Cubic Hermite interpolation on the accepted mesh.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let ts = &self.ts;
        if t <= ts[0] {
            return self.states[0].clone();
        }
        if t >= *ts.last().unwrap() {
            return self.states.last().unwrap().clone();
        }
        let k = match ts.binary_search_by(|a| a.total_cmp(&t)) {
            Ok(i) => return self.states[i].clone(),
            Err(i) => i - 1,
        };
        hermite(
            ts[k],
            ts[k + 1],
            &self.states[k],
            &self.states[k + 1],
            &self.derivs[k],
            &self.derivs[k + 1],
            t,
        )
    }
}

fn hermite(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64) -> Vec<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let (s2, s3) = (s * s, s * s * s);
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    y0.iter()
        .zip(y1)
        .zip(f0.iter().zip(f1))
        .map(|((a, b), (da, db))| h00 * a + h10 * h * da + h01 * b + h11 * h * db)
        .collect()
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Right-hand side of a first-order system; writes dy/dt into the slice.
pub type Rhs<'a> = dyn Fn(f64, &[f64], &mut [f64]) -> Result<()> + 'a;
/// Scalar event function; integration stops where it crosses zero from above.
pub type EventFn<'a> = dyn Fn(f64, &[f64]) -> f64 + 'a;

/// Integrate y' = f(t, y) from t0 to t1 (t1 > t0).
///
/// `event`, when given, must be positive at t0; integration stops at the
/// first accepted step whose endpoint makes it non-positive, refined by
/// bisection.
pub fn integrate(
    f: &Rhs<'_>,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &OdeOptions,
    event: Option<&EventFn<'_>>,
) -> Result<OdeSolution> {
    let dim = y0.len();
    let span = t1 - t0;
    assert!(span > 0.0, "integration span must be positive");

    let mut k = vec![vec![0.0; dim]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;
    f(t, &y, &mut k[0])?;

    if let Some(ev) = event {
        let g = ev(t, &y);
        if g <= 0.0 {
            return Err(FinslerError::ChartExit { t_exit: t });
        }
    }

    let mut sol = OdeSolution {
        ts: vec![t],
        states: vec![y.clone()],
        derivs: vec![k[0].clone()],
        steps: 0,
        rejected: 0,
        event_time: None,
    };

    let f0norm = k[0].iter().map(|a| a.abs()).fold(0.0, f64::max);
    let mut h = opts
        .h0
        .unwrap_or_else(|| (1e-3 * span).min(0.1 / (f0norm + 1e-6)).max(1e-8));
    let h_min = span * 1e-14;

    let mut ynew = vec![0.0; dim];
    let mut ytmp = vec![0.0; dim];

    while t < t1 {
        if sol.steps + sol.rejected > opts.max_steps {
            return Err(FinslerError::StepFailure { t });
        }
        h = h.min(t1 - t);

        // Stage evaluations; a failure rejects the step.
        let mut stage_err = false;
        'stages: for s in 0..6 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s + 1) {
                    acc += h * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            if f(t + C[s] * h, &ytmp, &mut k[s + 1]).is_err() {
                stage_err = true;
                break 'stages;
            }
        }
        if stage_err {
            sol.rejected += 1;
            h *= 0.5;
            if h < h_min {
                return Err(FinslerError::StepFailure { t });
            }
            continue;
        }

        // Fifth-order solution is the last stage state (FSAL property).
        ynew.copy_from_slice(&ytmp);

        // Error estimate against the embedded fourth-order weights.
        let mut err_norm_sq = 0.0;
        for i in 0..dim {
            let mut y4 = y[i];
            for (j, kj) in k.iter().enumerate() {
                y4 += h * B4[j] * kj[i];
            }
            let scale = opts.atol + opts.rtol * ynew[i].abs().max(y[i].abs());
            let e = (ynew[i] - y4) / scale;
            err_norm_sq += e * e;
        }
        let err = (err_norm_sq / dim as f64).sqrt();

        if err <= 1.0 {
            let t_new = t + h;
            sol.steps += 1;
            sol.ts.push(t_new);
            sol.states.push(ynew.clone());
            sol.derivs.push(k[6].clone());

            if let Some(ev) = event {
                if ev(t_new, &ynew) <= 0.0 {
                    let (te, ye) = locate_event(ev, &sol);
                    let i = sol.ts.len() - 1;
                    sol.ts[i] = te;
                    sol.states[i] = ye;
                    // Derivative at the clipped endpoint is only used for
                    // interpolation beyond the mesh, which never happens.
                    sol.event_time = Some(te);
                    return Ok(sol);
                }
            }

            y.copy_from_slice(&ynew);
            t = t_new;
            k[0] = k[6].clone();
        } else {
            sol.rejected += 1;
        }

        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < h_min {
            return Err(FinslerError::StepFailure { t });
        }
    }
    Ok(sol)
}

/// Bisection for the event zero inside the last accepted step.
fn locate_event(ev: &dyn Fn(f64, &[f64]) -> f64, sol: &OdeSolution) -> (f64, Vec<f64>) {
    let i = sol.ts.len() - 1;
    let (mut lo, mut hi) = (sol.ts[i - 1], sol.ts[i]);
    let (t0, t1) = (sol.ts[i - 1], sol.ts[i]);
    let interp = |t: f64| {
        hermite(
            t0,
            t1,
            &sol.states[i - 1],
            &sol.states[i],
            &sol.derivs[i - 1],
            &sol.derivs[i],
            t,
        )
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ev(mid, &interp(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    (lo, interp(lo))
}
