//! WebAssembly exports for the static demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: tdsusy::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Plot abscissae at time `t`.
#[wasm_bindgen(js_name = xAxis)]
pub fn x_axis(t: f64) -> Vec<f64> {
    demo::x_axis(t)
}

/// `V1` then `V2` sampled on `xAxis(t)`.
#[wasm_bindgen]
pub fn potentials(m: usize, l: usize, t: f64) -> Result<Vec<f64>, JsValue> {
    demo::potentials(m, l, t).map_err(js)
}

/// `|f|²` of state `n` on level `level` sampled on `xAxis(t)`.
#[wasm_bindgen]
pub fn density(m: usize, l: usize, level: usize, n: usize, t: f64) -> Result<Vec<f64>, JsValue> {
    demo::density(m, l, level, n, t).map_err(js)
}

/// Spectrum report of `S` as a JSON string.
#[wasm_bindgen]
pub fn spectrum(m: usize, l: usize, states: usize) -> Result<String, JsValue> {
    demo::spectrum_json(m, l, states).map_err(js)
}
