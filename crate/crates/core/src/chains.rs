//! Commutator chains `R_0 = J`, `R_{n+1} = [H, R_n]` and the identities that
//! express the even and odd functionals through thermal averages of the chain.

use faer::c64;

use crate::duhamel::{FunctionalValue, Route};
use crate::error::{LabError, Result};
use crate::thermal::{Observable, ThermalSystem};

/// Deepest chain accepted by [`build_chain`].
pub const MAX_CHAIN_DEPTH: usize = 8;

/// Relative tolerance of the identity routes against the spectral route.
pub const ROUTE_TOL: f64 = 1e-9;

/// `[J, [H,J], [H,[H,J]], …]` together with the Hamiltonian that generated it.
#[derive(Clone, Debug)]
pub struct CommutatorChain<O> {
    links: Vec<O>,
    hamiltonian: O,
}

impl<O: Observable> CommutatorChain<O> {
    pub fn links(&self) -> &[O] {
        &self.links
    }

    pub fn link(&self, n: usize) -> Result<&O> {
        self.links
            .get(n)
            .ok_or_else(|| LabError::Shape(format!("chain of depth {} has no link {n}", self.depth())))
    }

    pub fn base(&self) -> &O {
        &self.links[0]
    }

    pub fn hamiltonian(&self) -> &O {
        &self.hamiltonian
    }

    /// Largest `n` with `R_n` available.
    pub fn depth(&self) -> usize {
        self.links.len() - 1
    }
}

/// Builds `R_0 … R_n` for `j` under `h`.
pub fn build_chain<O: Observable>(h: &O, j: &O, n: usize) -> Result<CommutatorChain<O>> {
    if n > MAX_CHAIN_DEPTH {
        return Err(LabError::Numeric(format!("chain depth {n} exceeds the cap {MAX_CHAIN_DEPTH}")));
    }
    let mut links = Vec::with_capacity(n + 1);
    links.push(j.clone());
    for i in 0..n {
        let next = h.commutator(&links[i])?;
        links.push(next);
    }
    Ok(CommutatorChain { links, hamiltonian: h.clone() })
}

/// Builds the chain of `j` under the Hamiltonian of `sys`.
pub fn build_system_chain<S: ThermalSystem>(sys: &S, j: &S::Op, n: usize) -> Result<CommutatorChain<S::Op>> {
    build_chain(&sys.hamiltonian_op(), j, n)
}

fn real_part_checked(value: c64, scale: f64, what: &str) -> Result<f64> {
    if value.im.abs() > ROUTE_TOL * scale.max(value.re.abs()).max(1e-300) {
        return Err(LabError::Consistency(format!(
            "{what} has imaginary part {:.3e} against real part {:.3e}",
            value.im, value.re
        )));
    }
    Ok(value.re)
}

/// `F_{2n} = β^{2n−1} ⟨[R_n†, R_{n−1}]⟩` for `n ≥ 1`.
pub fn f_even_via_identity<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, n: usize) -> Result<FunctionalValue> {
    if n == 0 {
        return Err(LabError::Shape("the even identity starts at n = 1".into()));
    }
    let rn = chain.link(n)?;
    let rm = chain.link(n - 1)?;
    let avg = sys.gibbs_average(&rn.adjoint().commutator(rm)?)?;
    let factor = sys.beta().powi(2 * n as i32 - 1);
    let value = factor * real_part_checked(avg, rn.max_abs() * rm.max_abs(), "even identity average")?;
    Ok(FunctionalValue { k: 2 * n, value, route: Route::CommutatorIdentity })
}

/// `F_{2n+1} = β^{2n} ⟨R_n R_n† + R_n† R_n⟩`.
pub fn f_odd_via_identity<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, n: usize) -> Result<FunctionalValue> {
    let rn = chain.link(n)?;
    let avg = sys.gibbs_average(&rn.anticommutator(&rn.adjoint())?)?;
    let value = sys.beta().powi(2 * n as i32) * real_part_checked(avg, rn.max_abs().powi(2), "odd identity average")?;
    Ok(FunctionalValue { k: 2 * n + 1, value, route: Route::CommutatorIdentity })
}

/// Identity-route value of `F_k` for `k ≥ 1`.
pub fn f_via_identity<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, k: usize) -> Result<FunctionalValue> {
    if k % 2 == 0 {
        f_even_via_identity(sys, chain, k / 2)
    } else {
        f_odd_via_identity(sys, chain, k / 2)
    }
}

/// `½⟨R_n†R_n + R_nR_n†⟩ − (R_n;R_n)`, nonnegative.
pub fn delta_n<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, n: usize) -> Result<f64> {
    let rn = chain.link(n)?;
    let sym = 0.5 * sys.gibbs_average(&rn.adjoint().anticommutator(rn)?)?.re;
    let bd = sys.bd_inner(rn, rn)?.re;
    let delta = sym - bd;
    if delta < -1e-10 * sym.abs().max(1.0) {
        return Err(LabError::Consistency(format!("negative fluctuation gap {delta:.3e} at n = {n}")));
    }
    Ok(delta)
}

/// The quantities entering the mean-field conditions for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionsReport {
    pub n_max: usize,
    pub j_mean_abs: f64,
    /// `(n, F_{2n})` for `1 ≤ n ≤ n_max`.
    pub f_even: Vec<(usize, f64)>,
    /// `(n, F_{2n+1})` for `0 ≤ n ≤ n_max`.
    pub f_odd: Vec<(usize, f64)>,
}

/// `|⟨J⟩|`, the even functionals from `n = 1` and the odd ones from `n = 0`.
pub fn evaluate_conditions<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, n_max: usize) -> Result<ConditionsReport> {
    let f = sys.functional_series(chain.base(), 2 * n_max + 1)?;
    Ok(ConditionsReport {
        n_max,
        j_mean_abs: sys.gibbs_average(chain.base())?.norm(),
        f_even: (1..=n_max).map(|n| (n, f[2 * n].value)).collect(),
        f_odd: (0..=n_max).map(|n| (n, f[2 * n + 1].value)).collect(),
    })
}

/// One row of a route comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouteComparison {
    pub k: usize,
    pub spectral: f64,
    pub identity: f64,
    pub relative: f64,
}

/// Spectral against identity route for `1 ≤ k ≤ k_max`; needs chain depth `⌈k_max/2⌉`.
pub fn compare_routes<S: ThermalSystem>(sys: &S, chain: &CommutatorChain<S::Op>, k_max: usize) -> Result<Vec<RouteComparison>> {
    let spectral = sys.functional_series(chain.base(), k_max)?;
    let scale = spectral.iter().map(|v| v.value).fold(0.0, f64::max).max(1e-300);
    (1..=k_max)
        .map(|k| {
            let identity = f_via_identity(sys, chain, k)?.value;
            let s = spectral[k].value;
            // relative to the value, with the series maximum guarding against
            // comparisons of exact zeros
            let denom = s.abs().max(1e-12 * scale);
            Ok(RouteComparison { k, spectral: s, identity, relative: (identity - s).abs() / denom })
        })
        .collect()
}
