//! WebAssembly bindings for the browser demo. Each export returns a JSON
//! string; the `*_json` functions hold the logic and run natively in tests.

use faer::c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use bdlab::ahm;
use bdlab::harness::fit::ScalingSeries;
use bdlab::inequalities::{inequality_grid, required_index, FunctionalTable};
use bdlab::models::dicke::{self, CutoffPolicy, DickeSpec};
use bdlab::models::heisenberg::{self, HeisenbergSpec};
use bdlab::models::Representation;
use bdlab::random::{random_complex, random_hermitian};
use bdlab::thermal::ThermalSystem;
use bdlab::{decompose, HermitianOperator, LabError, Result};

/// Largest dimension offered for random instances.
pub const MAX_RANDOM_DIM: usize = 24;
/// Largest spin count offered for the Heisenberg scan.
pub const MAX_SCAN_SPINS: usize = 60;
/// Largest Dicke size offered.
pub const MAX_DICKE_SPINS: usize = 8;

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// All inequality families on one random `(H, J)` as `β` varies.
pub fn inequality_slacks_json(seed: u64, dim: usize, beta: f64, n_max: usize, k_max: usize) -> Result<Value> {
    if !(2..=MAX_RANDOM_DIM).contains(&dim) {
        return Err(LabError::Config(format!("dimension must lie in 2..={MAX_RANDOM_DIM}")));
    }
    if n_max > 3 || k_max == 0 || k_max > 3 {
        return Err(LabError::Config("need n_max <= 3 and 1 <= k_max <= 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = decompose(&HermitianOperator::new(random_hermitian(dim, &mut rng))?, beta)?;
    let j = random_complex(dim, &mut rng);
    let table = FunctionalTable::for_grid(&sys, &j, n_max, k_max)?;
    let rows: Vec<Value> = inequality_grid(&table, n_max, k_max)?
        .iter()
        .map(|r| {
            json!({
                "family": r.family.name(), "n": r.n, "k": r.k,
                "lhs": finite(r.lhs), "lower": finite(r.rhs_lower), "upper": finite(r.rhs_upper),
                "slack_lower": finite(r.slack_lower), "slack_upper": finite(r.slack_upper), "pass": r.pass,
            })
        })
        .collect();
    let f: Vec<Value> = table.values().iter().map(|v| finite(*v)).collect();
    Ok(json!({ "beta": beta, "dim": dim, "top_index": required_index(n_max, k_max), "functionals": f, "reports": rows }))
}

/// `F_0..F_5` and `Δ_0..Δ_2` of `J^x` for `N = n_min..=n_max` with exponent fits.
pub fn heisenberg_scan_json(n_min: usize, n_max: usize, g_x: f64, g_y: f64, h: [f64; 3]) -> Result<Value> {
    if n_min < 2 || n_max > MAX_SCAN_SPINS || n_min > n_max {
        return Err(LabError::Config(format!("need 2 <= n_min <= n_max <= {MAX_SCAN_SPINS}")));
    }
    let mut points = Vec::new();
    let mut labelled: Vec<(String, Vec<(usize, f64)>)> = (0..6).map(|k| (format!("F_{k}"), Vec::new())).chain((0..3).map(|n| (format!("delta_{n}"), Vec::new()))).collect();
    for n in n_min..=n_max {
        let spec = HeisenbergSpec::new(n, g_x, g_y, h, Representation::Blocked)?;
        let m = heisenberg::blocked_model(&spec)?;
        let t = FunctionalTable::from_system(&m.system, &m.spins.x, 5)?;
        let deltas: Vec<f64> = (0..3).map(|i| t.delta(i)).collect::<Result<_>>()?;
        for (k, v) in t.values().iter().enumerate() {
            labelled[k].1.push((n, v.abs()));
        }
        for (i, d) in deltas.iter().enumerate() {
            labelled[6 + i].1.push((n, d.abs()));
        }
        points.push(json!({ "n": n, "functionals": t.values(), "deltas": deltas }));
    }
    let fits: Vec<Value> = labelled
        .into_iter()
        .map(|(label, pts)| {
            let s = ScalingSeries::new(label, pts);
            json!({ "quantity": s.quantity, "exponent": s.exponent().map(finite), "points": s.points })
        })
        .collect();
    Ok(json!({ "sizes": points, "fits": fits }))
}

/// Dicke identity suite at the resolved cutoff, plus the gap chain.
pub fn dicke_identities_json(n: usize, lambda: f64, beta: f64) -> Result<Value> {
    if !(1..=MAX_DICKE_SPINS).contains(&n) {
        return Err(LabError::Config(format!("need 1 <= N <= {MAX_DICKE_SPINS}")));
    }
    let spec = DickeSpec::new(n, None, 1.0, 1.0, lambda, dicke::CUTOFF_START)?;
    let suite = ahm::dicke_identity_suite(&spec, beta, CutoffPolicy::Adaptive)?;
    let checks: Vec<Value> = suite
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "lhs": finite(c.lhs), "rhs": finite(c.rhs), "residual": finite(c.residual), "tolerance": c.tolerance, "pass": c.pass }))
        .collect();
    let m = dicke::blocked_model(&suite.spec, beta)?;
    let occupation = m.system.gibbs_average(&m.ops.number)?.re / suite.spec.volume;
    let gap = ahm::dicke_gap_bounds(&ahm::DickeVariational { spec: suite.spec.clone(), beta }, ahm::SeedGrid::default())?;
    let eta = gap.result.params_opt.first().copied().unwrap_or(c64::new(0.0, 0.0));
    Ok(json!({
        "cutoff": suite.cutoff, "cutoff_movement": suite.cutoff_movement, "converged": suite.cutoff_converged,
        "occupation_per_volume": occupation, "checks": checks,
        "gap": { "min": gap.result.gap, "at_mean": gap.gap_at_mean, "bogoliubov": gap.middle, "split": gap.upper, "eta": [eta.re, eta.im], "pass": gap.pass },
    }))
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn inequality_slacks(seed: u32, dim: u32, beta: f64, n_max: u32, k_max: u32) -> std::result::Result<String, JsError> {
    to_js(inequality_slacks_json(seed as u64, dim as usize, beta, n_max as usize, k_max as usize))
}

#[wasm_bindgen]
pub fn heisenberg_scan(n_min: u32, n_max: u32, g_x: f64, g_y: f64, h_x: f64, h_y: f64, h_z: f64) -> std::result::Result<String, JsError> {
    to_js(heisenberg_scan_json(n_min as usize, n_max as usize, g_x, g_y, [h_x, h_y, h_z]))
}

#[wasm_bindgen]
pub fn dicke_identities(n: u32, lambda: f64, beta: f64) -> std::result::Result<String, JsError> {
    to_js(dicke_identities_json(n as usize, lambda, beta))
}
