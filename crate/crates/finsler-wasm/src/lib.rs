//! Browser bindings for the holonomy engine: geodesic fans in the unit
//! disk, square-loop holonomy of the indicatrix, and certification reports,
//! each returned as a JSON string for a plain-canvas front end.
//!
//! Build with `wasm-pack build --target web crates/finsler-wasm`; the static
//! page in `www/` loads the generated module directly, no bundler involved.

use wasm_bindgen::prelude::wasm_bindgen;

use finsler_core::holonomy::{
    circle_directions, loop_holonomy, nonlinearity_defect, CertifyParams, ConditionTag, Curve,
};
use finsler_core::metrics::{MetricSign, MetricSpec};
use finsler_core::ode::OdeOptions;
use finsler_core::spray::geodesic_integrate;

fn sign_of(sign: f64) -> MetricSign {
    if sign >= 0.0 {
        MetricSign::Plus
    } else {
        MetricSign::Minus
    }
}

fn randers(a1: f64, a2: f64, sign: f64) -> Result<MetricSpec, String> {
    MetricSpec::randers(2, vec![a1, a2], sign_of(sign)).map_err(|e| e.to_string())
}

fn err_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

/// Geodesics of the Randers family fanning out of (x0, y0), each traced to
/// 80% of its chart-exit parameter. JSON: { "rays": [[x,y,x,y,...], ...] }.
#[wasm_bindgen]
pub fn geodesic_fan(a1: f64, a2: f64, sign: f64, x0: f64, y0: f64, rays: usize) -> String {
    let spec = match randers(a1, a2, sign) {
        Ok(s) => s,
        Err(e) => return err_json(&e),
    };
    let opts = OdeOptions::default();
    let mut all = Vec::new();
    for k in 0..rays.max(1) {
        let t = 2.0 * std::f64::consts::PI * k as f64 / rays.max(1) as f64;
        let dir = [t.cos(), t.sin()];
        let probe = match geodesic_integrate(&spec, &[x0, y0], &dir, 200.0, &opts) {
            Ok(tr) => tr,
            Err(e) => return err_json(&e.to_string()),
        };
        let span = probe.exit_time.map(|te| 0.8 * te).unwrap_or(probe.end_time());
        let trace = match geodesic_integrate(&spec, &[x0, y0], &dir, span, &opts) {
            Ok(tr) => tr,
            Err(e) => return err_json(&e.to_string()),
        };
        let mut flat = Vec::with_capacity(2 * 65);
        for i in 0..=64 {
            let tt = span * i as f64 / 64.0;
            let (p, _) = trace.sample(tt);
            flat.push(p[0]);
            flat.push(p[1]);
        }
        all.push(flat);
    }
    serde_json::json!({ "rays": all }).to_string()
}

/// Square-loop holonomy of the origin indicatrix. JSON:
/// { "indicatrix": [[x,y],...], "image": [[x,y],...], "defect": d,
///   "f_drift": d, "invalidated": k }.
#[wasm_bindgen]
pub fn holonomy_map(a1: f64, a2: f64, sign: f64, side: f64, samples: usize) -> String {
    let spec = match randers(a1, a2, sign) {
        Ok(s) => s,
        Err(e) => return err_json(&e),
    };
    let curve = Curve::square_loop(&[0.0, 0.0], side);
    let dirs = circle_directions(samples.max(32));
    let map = match loop_holonomy(&spec, &curve, &dirs, &OdeOptions::default()) {
        Ok(m) => m,
        Err(e) => return err_json(&e.to_string()),
    };
    let defect = nonlinearity_defect(&map).unwrap_or(f64::NAN);
    serde_json::json!({
        "indicatrix": map.sources,
        "image": map.images,
        "defect": if defect.is_finite() { defect } else { -1.0 },
        "f_drift": map.max_f_drift,
        "invalidated": map.invalidated,
    })
    .to_string()
}

/// Certification report for the Randers family under condition C (or any
/// condition letter), serialized like the CLI report body.
#[wasm_bindgen]
pub fn certify_randers(a1: f64, a2: f64, sign: f64, condition: String, grid: usize) -> String {
    let spec = match randers(a1, a2, sign) {
        Ok(s) => s,
        Err(e) => return err_json(&e),
    };
    let tag: ConditionTag = match condition.parse() {
        Ok(t) => t,
        Err(e) => return err_json(&format!("{e}")),
    };
    let mut params = CertifyParams::new(tag);
    params.grid = grid.max(64);
    match finsler_core::holonomy::certify_spec(&spec, &params) {
        Ok(report) => serde_json::to_string_pretty(&report)
            .unwrap_or_else(|e| err_json(&e.to_string())),
        Err(e) => err_json(&e.to_string()),
    }
}
