//! Model Hamiltonians: the infinitely coordinated anisotropic Heisenberg model
//! and the single-mode Dicke model in the rotating wave approximation.

pub mod dicke;
pub mod heisenberg;

use crate::error::{LabError, Result};

/// Full tensor-product space or total-spin sectors with multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Full,
    Blocked,
}

impl std::str::FromStr for Representation {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Representation::Full),
            "blocked" => Ok(Representation::Blocked),
            other => Err(LabError::Config(format!("unknown representation `{other}`"))),
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of spin-`S` multiplets in `N` spins ½, `S = twice_s / 2`.
pub fn spin_multiplicity(n_spins: usize, twice_s: usize) -> u128 {
    if twice_s > n_spins || (n_spins - twice_s) % 2 != 0 {
        return 0;
    }
    let k = (n_spins - twice_s) / 2;
    binomial(n_spins, k) - if k == 0 { 0 } else { binomial(n_spins, k - 1) }
}

/// `(2S, d(N,S))` for every sector, largest spin first.
pub fn spin_sectors(n_spins: usize) -> Vec<(usize, u128)> {
    (0..=n_spins / 2).map(|k| n_spins - 2 * k).map(|ts| (ts, spin_multiplicity(n_spins, ts))).collect()
}

/// Largest spin count handled in blocked form; multiplicities stay exact in f64 below it.
pub const MAX_BLOCKED_SPINS: usize = 100;

pub(crate) fn check_blocked_size(n_spins: usize) -> Result<()> {
    if n_spins == 0 || n_spins > MAX_BLOCKED_SPINS {
        return Err(LabError::Capacity { requested: n_spins, max: MAX_BLOCKED_SPINS });
    }
    Ok(())
}
