//! WebAssembly bindings for the browser demo in `www/`.

use wasm_bindgen::prelude::*;

pub mod api;

fn js(r: api::ApiResult<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Synthetic demonstrations as JSON.
#[wasm_bindgen]
pub fn synthesize(shape: &str, demos: usize, noise: f64, offset: f64, seed: u32) -> Result<String, JsError> {
    js(api::synthesize(shape, demos, noise, offset, u64::from(seed)))
}

/// Fits a map; `request` is `{"method", "nodes", "start"?, "end"?, "freeze_tuning"?}`.
#[wasm_bindgen]
pub fn fit(demos: &str, request: &str) -> Result<String, JsError> {
    js(api::fit(demos, request))
}

/// Tangent or Laplacian image of a point list.
#[wasm_bindgen]
pub fn differential(points: &str, frame: &str) -> Result<String, JsError> {
    js(api::differential(points, frame))
}
