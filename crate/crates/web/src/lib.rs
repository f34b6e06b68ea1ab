//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes a JSON string and returns a JSON string; errors surface
//! as JavaScript exceptions. The logic lives in [`api`], which also runs
//! natively so the test suite can exercise it.

pub mod api;

use wasm_bindgen::prelude::*;

fn js<T>(result: Result<T, api::WebError>) -> Result<T, JsError> {
    result.map_err(|e| JsError::new(&e.to_string()))
}

/// Mean, standard deviation and variance of `C_k` for `k = 1..n`.
#[wasm_bindgen(js_name = momentCurves)]
pub fn moment_curves(input: &str) -> Result<String, JsError> {
    js(api::moment_curves(input))
}

/// Fixed-rate accumulated values of the classic payment patterns.
#[wasm_bindgen(js_name = fixedTable)]
pub fn fixed_table(input: &str) -> Result<String, JsError> {
    js(api::fixed_table(input))
}

/// Seeded Monte Carlo run: a histogram of `C_n` and the oracle comparison.
#[wasm_bindgen(js_name = simulate)]
pub fn simulate(input: &str) -> Result<String, JsError> {
    js(api::simulate(input))
}
