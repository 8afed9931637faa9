//! Three engine operations for the static page in `www/`. Each returns a JSON
//! string; the `js_*` wrappers only change the error type for the browser.

use pqset_core::coeff::parse_rat;
use pqset_core::deformation::star;
use pqset_core::functional::phi_k;
use pqset_core::microlocal::feynman_table;
use pqset_core::rewrite::{Background, Convention};
use pqset_core::stress_energy::{divergence_order2, solve_eta_for, SetSpec};
use pqset_core::KernelKind;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest k accepted by the table; the page has no use for more rows.
pub const MAX_K: u32 = 12;
/// Largest field power accepted by the star-product viewer.
pub const MAX_POWER: u32 = 4;

/// (k, sd, ρ, extension) for H_F^k, k in kmin..=kmax, in dimension d.
pub fn scaling_table(d: u32, kmin: u32, kmax: u32) -> Result<String, String> {
    if kmin == 0 || kmin > kmax || kmax > MAX_K {
        return Err(format!("k range must satisfy 1 <= kmin <= kmax <= {MAX_K}"));
    }
    let rows = feynman_table(d, kmin..=kmax).map_err(|e| e.to_string())?;
    let rows: Vec<_> = rows
        .iter()
        .map(|r| json!({ "k": r.k, "sd": r.sd.to_string(), "rho": r.rho.to_string(), "extension": r.extension.to_string() }))
        .collect();
    Ok(json!({ "d": d, "rows": rows }).to_string())
}

/// λ² divergence residual of the stress-energy expectation value at a given η
/// (rational string), together with the η that annihilates it.
pub fn eta_residual(n: u32, eta: &str, idelta: bool) -> Result<String, String> {
    let eta = parse_rat(eta).ok_or_else(|| format!("`{eta}` is not a rational"))?;
    let convention = if idelta { Convention::IDelta } else { Convention::Delta };
    let spec = SetSpec::new(Some(n))
        .map_err(|e| e.to_string())?
        .with_background(Background::minkowski().with_convention(convention));
    let solution = solve_eta_for(&spec).map_err(|e| e.to_string())?;
    let residual = divergence_order2(&spec.with_eta(eta)).map_err(|e| e.to_string())?.order2;
    Ok(json!({
        "solution": solution.to_string(),
        "vanishes": residual.is_zero(),
        "monomials": residual.len(),
        "latex": residual.to_latex(),
        "text": residual.to_string(),
    })
    .to_string())
}

/// Φ^a ⋆_K Φ^b for K one of H, HF, HAF, Delta, W.
pub fn star_product(a: u32, b: u32, kernel: &str) -> Result<String, String> {
    if a > MAX_POWER || b > MAX_POWER {
        return Err(format!("powers above {MAX_POWER} are not offered"));
    }
    let kind = match kernel {
        "H" => KernelKind::H,
        "HF" => KernelKind::HF,
        "HAF" => KernelKind::HAF,
        "Delta" => KernelKind::Delta,
        "W" => KernelKind::W,
        other => return Err(format!("unknown kernel `{other}`")),
    };
    let p = star(&phi_k(a, "f"), &phi_k(b, "g"), kind).body;
    Ok(json!({ "monomials": p.len(), "latex": p.to_latex(), "text": p.to_string() }).to_string())
}

#[wasm_bindgen(js_name = scalingTable)]
pub fn js_scaling_table(d: u32, kmin: u32, kmax: u32) -> Result<String, JsValue> {
    scaling_table(d, kmin, kmax).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = etaResidual)]
pub fn js_eta_residual(n: u32, eta: &str, idelta: bool) -> Result<String, JsValue> {
    eta_residual(n, eta, idelta).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = starProduct)]
pub fn js_star_product(a: u32, b: u32, kernel: &str) -> Result<String, JsValue> {
    star_product(a, b, kernel).map_err(|e| JsValue::from_str(&e))
}
