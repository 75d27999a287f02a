//! Browser bindings for the Gauss-Bonnet laboratory.
//!
//! Three interactive operations, each returning a JSON string so the page
//! needs no generated types:
//!
//! - [`polygon_report`]: interior/edge/corner breakdown for a builtin region;
//! - [`exhaustion_table`]: thick-part exhaustion rows for a named model;
//! - [`thin_model_profile`]: curves of the thin-part model (curvature,
//!   fibre length, level-set form, gradient ratio) against the level u.
//!
//! Errors come back as `{"error": "..."}` rather than thrown exceptions.

use gblab_core::assembly;
use gblab_core::moduli;
use gblab_core::quad::QuadSpec;
use gblab_core::region;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn err_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// Names understood by the other entry points.
#[wasm_bindgen]
pub fn catalog() -> String {
    json!({
        "regions": region::region_catalog(),
        "models": assembly::model_catalog(),
    })
    .to_string()
}

/// Polyhedral Gauss-Bonnet breakdown for a builtin surface region.
#[wasm_bindgen]
pub fn polygon_report(region_name: &str) -> String {
    let region = match region::region_by_name(region_name) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let spec = QuadSpec::for_dim(2);
    match assembly::gauss_bonnet_2d_region(&region, &spec) {
        Ok(report) => serde_json::to_string(&report).unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

/// Exhaustion table rows for a named model over a comma-separated list of
/// decreasing thickness parameters.
#[wasm_bindgen]
pub fn exhaustion_table(model_name: &str, eps_csv: &str, index: u32) -> String {
    let eps: Result<Vec<f64>, _> = eps_csv
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let eps = match eps {
        Ok(e) if !e.is_empty() => e,
        _ => return err_json("thickness list must be comma-separated numbers"),
    };
    let model = match assembly::model_by_name(model_name, index as usize) {
        Ok(m) => m,
        Err(e) => return err_json(e),
    };
    match assembly::exhaustion_report(model.as_ref(), &eps) {
        Ok(report) => serde_json::to_string(&report).unwrap_or_else(err_json),
        Err(e) => err_json(e),
    }
}

/// Profile of the thin-part model over u in [0, u_max]: curvature, fibre
/// circumference, level-set second fundamental form and the gradient ratio
/// |grad l| / l, all sampled through the real geometry pipeline.
#[wasm_bindgen]
pub fn thin_model_profile(u_max: f64, samples: u32) -> String {
    if u_max.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || samples < 2 {
        return err_json("need u_max > 0 and at least two samples");
    }
    let samples = samples.min(512) as usize;
    let chart = gblab_core::chart::model_thin(u_max + 1.0);
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let u = u_max * i as f64 / (samples - 1) as f64;
        let point = match chart.point(&[u, 0.25]) {
            Ok(p) => p,
            Err(e) => return err_json(e),
        };
        let curvature = match gblab_core::curvature::gauss_curvature(&chart, &point) {
            Ok(k) => k,
            Err(e) => return err_json(e),
        };
        let level_form = match moduli::level_set_ii(u) {
            Ok(f) => f.numeric,
            Err(e) => return err_json(e),
        };
        let grad = match moduli::grad_length_norm(u) {
            Ok(g) => g,
            Err(e) => return err_json(e),
        };
        let length = (-2.0 * u).exp();
        rows.push(json!({
            "u": u,
            "geodesic_length": length,
            "curvature": curvature,
            "fibre_length": (-3.0 * u).exp(),
            "level_set_form": level_form,
            "grad_ratio": grad / length,
        }));
    }
    json!({ "u_max": u_max, "rows": rows }).to_string()
}
