//! Approximating-Hamiltonian bounds: free-energy gaps, the variational
//! minimum over the linearization parameters, the susceptibility relation and
//! the Dicke identity and bound suites.
//!
//! Both approximating Hamiltonians are sums of single-site and single-mode
//! pieces, so their free energies are evaluated on those pieces directly. The
//! model free energies come from the blocked models.

use faer::c64;

use crate::error::{LabError, Result};
use crate::models::dicke::{self, DickeModel, DickeSpec};
use crate::models::heisenberg::{self, HeisenbergSpec, CHANNELS};
use crate::operator::{boson_ladder, ComplexMatrix, HermitianOperator};
use crate::spectral::decompose;
use crate::thermal::{BlockedSpectrum, Observable, ThermalSystem};

/// Lower tolerance of a gap at the optimum.
pub const GAP_TOL: f64 = 1e-9;

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

/// A Hamiltonian together with its approximating family.
pub trait VariationalModel {
    /// Number of complex linearization parameters (and of sources).
    fn channels(&self) -> usize;
    /// `f[H(ν)]`.
    fn f_model(&self, nu: &[c64]) -> Result<f64>;
    /// `f[H₀(params, ν)]`.
    fn f_approx(&self, params: &[c64], nu: &[c64]) -> Result<f64>;
}

/// `ln(2 cosh x)` without overflow.
fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Free energy density of `βH₀(a)` per spin: `Σ_s g_s|a_s|² − ln 2cosh|b|`,
/// `b = h + 2(g_x Re a_x, g_y Re a_y, 0)`. Accepts any couplings.
pub fn heisenberg_product_free_energy(g: [f64; 2], h: [f64; 3], params: &[c64]) -> Result<f64> {
    if params.len() != CHANNELS {
        return Err(LabError::Shape(format!("expected {CHANNELS} parameters, got {}", params.len())));
    }
    let b = [h[0] + 2.0 * g[0] * params[0].re, h[1] + 2.0 * g[1] * params[1].re, h[2]];
    let field = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
    Ok(g[0] * params[0].norm_sqr() + g[1] * params[1].norm_sqr() - ln_two_cosh(field))
}

impl VariationalModel for HeisenbergSpec {
    fn channels(&self) -> usize {
        CHANNELS
    }

    fn f_model(&self, nu: &[c64]) -> Result<f64> {
        let spec = self.with_sources(nu)?;
        Ok(heisenberg::blocked_model(&spec)?.system.free_energy_density(spec.size()))
    }

    fn f_approx(&self, params: &[c64], nu: &[c64]) -> Result<f64> {
        let spec = self.with_sources(nu)?;
        heisenberg_product_free_energy([spec.g_x, spec.g_y], spec.h, params)
    }
}

/// The Dicke model at a fixed cutoff and inverse temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeVariational {
    pub spec: DickeSpec,
    pub beta: f64,
}

impl DickeVariational {
    fn check(&self, p: &[c64]) -> Result<()> {
        if p.len() != 1 {
            return Err(LabError::Shape(format!("the Dicke model has one channel, got {}", p.len())));
        }
        Ok(())
    }

    /// `−(βV)⁻¹ ln Tr e^{−β[ω b̃†b̃ − V^{1/2}(ν* b + ν b†)]}` on the truncated mode.
    pub fn boson_free_energy(&self, eta: c64, nu: c64) -> Result<f64> {
        let s = &self.spec;
        let b = boson_ladder(s.fock_cutoff)?;
        let shift = eta * (s.volume.sqrt() * s.lambda / s.omega);
        let bt = &b + &ComplexMatrix::identity(s.fock_cutoff).scale(shift);
        let src = &b.scale(nu.conj()) + &b.adjoint().scale(nu);
        let h = &(&bt.adjoint() * &bt).scale_real(s.omega) - &src.scale_real(s.volume.sqrt());
        let sys = decompose(&HermitianOperator::new(h)?, self.beta)?;
        Ok(sys.free_energy_density(s.volume))
    }

    /// Matter part: `N` independent sites `(ε/2)σ^z − (λ²/ω)(ησ⁻ + η*σ⁺)` plus `(Vλ²/ω)|η|²`, per `V`.
    pub fn matter_free_energy(&self, eta: c64) -> f64 {
        let s = &self.spec;
        let g = s.lambda * s.lambda / s.omega;
        let r = (0.25 * s.epsilon * s.epsilon + g * g * eta.norm_sqr()).sqrt();
        g * eta.norm_sqr() - s.n_spins as f64 * ln_two_cosh(self.beta * r) / (self.beta * s.volume)
    }
}

impl VariationalModel for DickeVariational {
    fn channels(&self) -> usize {
        1
    }

    fn f_model(&self, nu: &[c64]) -> Result<f64> {
        self.check(nu)?;
        let m = dicke::blocked_model_with_sources(&self.spec, self.beta, nu[0])?;
        Ok(m.system.free_energy_density(self.spec.volume))
    }

    fn f_approx(&self, params: &[c64], nu: &[c64]) -> Result<f64> {
        self.check(params)?;
        self.check(nu)?;
        Ok(self.matter_free_energy(params[0]) + self.boson_free_energy(params[0], nu[0])?)
    }
}

/// `f[H₀(params, ν)] − f[H(ν)]`.
pub fn free_energy_gap<M: VariationalModel>(model: &M, params: &[c64], nu: &[c64]) -> Result<f64> {
    Ok(model.f_approx(params, nu)? - model.f_model(nu)?)
}

/// Coarse grid applied to the real and imaginary part of every parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeedGrid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Default for SeedGrid {
    fn default() -> Self {
        SeedGrid { lo: -2.0, hi: 2.0, step: 0.25 }
    }
}

impl SeedGrid {
    fn points(&self) -> Result<Vec<f64>> {
        if !(self.step > 0.0 && self.hi >= self.lo) {
            return Err(LabError::Config(format!("invalid seed grid {self:?}")));
        }
        let count = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| self.lo + i as f64 * self.step).collect())
    }
}

/// Refinement stops once the coordinate step falls below this.
pub const PARAM_TOL: f64 = 1e-6;
/// Refinement budget.
pub const MAX_REFINEMENT_STEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalResult {
    pub params_opt: Vec<c64>,
    pub f_approx_min: f64,
    pub f_model: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn unpack(x: &[f64]) -> Vec<c64> {
    x.chunks(2).map(|p| c64::new(p[0], p[1])).collect()
}

/// Grid scan then coordinate descent over the real coordinates of the parameters.
pub fn minimize_gap<M: VariationalModel>(model: &M, nu: &[c64], grid: SeedGrid) -> Result<VariationalResult> {
    let dims = 2 * model.channels();
    let axis = grid.points()?;
    let eval = |x: &[f64]| model.f_approx(&unpack(x), nu);

    let mut best_x = vec![0.0; dims];
    let mut best_f = eval(&best_x)?;
    let mut idx = vec![0usize; dims];
    let total = axis.len().pow(dims as u32);
    for _ in 0..total {
        let x: Vec<f64> = idx.iter().map(|i| axis[*i]).collect();
        let f = eval(&x)?;
        if f < best_f {
            best_f = f;
            best_x = x;
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < axis.len() {
                break;
            }
            *slot = 0;
        }
    }

    let mut step = 0.5 * grid.step;
    let mut iterations = 0;
    let mut last_gain = f64::INFINITY;
    while step >= PARAM_TOL && iterations < MAX_REFINEMENT_STEPS {
        iterations += 1;
        let mut improved = false;
        for d in 0..dims {
            for sign in [1.0, -1.0] {
                let mut x = best_x.clone();
                x[d] += sign * step;
                let f = eval(&x)?;
                if f < best_f {
                    last_gain = best_f - f;
                    best_f = f;
                    best_x = x;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let f_model = model.f_model(nu)?;
    Ok(VariationalResult {
        params_opt: unpack(&best_x),
        f_approx_min: best_f,
        f_model,
        gap: best_f - f_model,
        iterations,
        converged: step < PARAM_TOL && (last_gain < 1e-10 || last_gain == f64::INFINITY),
    })
}

/// Largest decrease of `f_approx` found at `params_opt ± δ` along each real
/// coordinate; nonpositive at a local minimum.
pub fn local_minimum_certificate<M: VariationalModel>(model: &M, result: &VariationalResult, nu: &[c64], delta: f64) -> Result<f64> {
    let base: Vec<f64> = result.params_opt.iter().flat_map(|p| [p.re, p.im]).collect();
    let mut worst = f64::NEG_INFINITY;
    for d in 0..base.len() {
        for sign in [1.0, -1.0] {
            let mut x = base.clone();
            x[d] += sign * delta;
            worst = worst.max(result.f_approx_min - model.f_approx(&unpack(&x), nu)?);
        }
    }
    Ok(worst)
}

/// `Σ_s g_s ⟨(A_s − ⟨A_s⟩)(A_s† − ⟨A_s†⟩)⟩` under `H(ν)` for the Heisenberg channels.
pub fn heisenberg_gap_upper_bound(spec: &HeisenbergSpec, nu: &[c64]) -> Result<f64> {
    let s = spec.with_sources(nu)?;
    let m = heisenberg::blocked_model(&s)?;
    let mut total = 0.0;
    for (g, a) in [(s.g_x, &m.spins.x), (s.g_y, &m.spins.y)] {
        let da = m.system.centered(a)?;
        total += g * m.system.gibbs_average(&da.matmul(&da.adjoint())?)?.re;
    }
    Ok(total)
}

/// Gap at the optimum against both sides of the sandwich.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    pub n_spins: usize,
    pub result: VariationalResult,
    pub upper: f64,
    pub pass: bool,
}

pub fn heisenberg_sandwich(spec: &HeisenbergSpec, nu: &[c64], grid: SeedGrid) -> Result<SandwichReport> {
    let result = minimize_gap(spec, nu, grid)?;
    let upper = heisenberg_gap_upper_bound(spec, nu)?;
    let pass = result.gap >= -GAP_TOL && result.gap <= upper + GAP_TOL;
    Ok(SandwichReport { n_spins: spec.n_spins, result, upper, pass })
}

/// Five-point central second difference.
pub fn second_difference(mut f: impl FnMut(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let (m2, m1, c, p1, p2) = (f(x - 2.0 * h)?, f(x - h)?, f(x)?, f(x + h)?, f(x + 2.0 * h)?);
    Ok((-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SusceptibilityCheck {
    pub channel: usize,
    /// `¼(∂²/∂ν_r² + ∂²/∂ν_i²) f`.
    pub second_derivative_fd: f64,
    /// `(δA;δA)` under `H(ν₀)`.
    pub duhamel_value: f64,
    /// `β·size` multiplying the product in the relation.
    pub prefactor: f64,
    /// `|second_derivative_fd + β·size·duhamel_value|`.
    pub residual: f64,
}

impl SusceptibilityCheck {
    pub fn relative(&self) -> f64 {
        self.residual / (self.prefactor * self.duhamel_value).abs().max(1e-300)
    }
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-3;

fn wirtinger_laplacian<M: VariationalModel>(model: &M, channel: usize, nu0: &[c64], step: f64) -> Result<f64> {
    let at = |dr: f64, di: f64| -> Result<f64> {
        let mut nu = nu0.to_vec();
        nu[channel] += c64::new(dr, di);
        model.f_model(&nu)
    };
    let rr = second_difference(|t| at(t, 0.0), 0.0, step)?;
    let ii = second_difference(|t| at(0.0, t), 0.0, step)?;
    Ok(0.25 * (rr + ii))
}

fn finish(channel: usize, fd: f64, duhamel_value: f64, prefactor: f64) -> Result<SusceptibilityCheck> {
    let check = SusceptibilityCheck { channel, second_derivative_fd: fd, duhamel_value, prefactor, residual: (fd + prefactor * duhamel_value).abs() };
    if !check.residual.is_finite() {
        return Err(LabError::Numeric("finite-difference second derivative is not finite; try a larger step".into()));
    }
    Ok(check)
}

/// Heisenberg channel `0` (`J^x`) or `1` (`J^y`) against `−βN(δA;δA)`.
pub fn heisenberg_susceptibility(spec: &HeisenbergSpec, channel: usize, nu0: &[c64], step: f64) -> Result<SusceptibilityCheck> {
    if channel >= CHANNELS {
        return Err(LabError::Shape(format!("channel {channel} out of range")));
    }
    let fd = wirtinger_laplacian(spec, channel, nu0, step)?;
    let m = heisenberg::blocked_model(&spec.with_sources(nu0)?)?;
    let a = if channel == 0 { &m.spins.x } else { &m.spins.y };
    let da = m.system.centered(a)?;
    let value = m.system.bd_inner(&da, &da)?.re;
    finish(channel, fd, value, heisenberg::HEISENBERG_BETA * spec.size())
}

/// Boson channel against `−β(δb;δb)`: the `V^{1/2}` in the sources cancels the
/// `V` of the density.
pub fn dicke_susceptibility(model: &DickeVariational, nu0: c64, step: f64) -> Result<SusceptibilityCheck> {
    let fd = wirtinger_laplacian(model, 0, &[nu0], step)?;
    let m = dicke::blocked_model_with_sources(&model.spec, model.beta, nu0)?;
    let db = m.system.centered(&m.ops.b)?;
    let value = m.system.bd_inner(&db, &db)?.re;
    finish(0, fd, value, model.beta)
}

/// One identity or bound with its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    fn equality(name: &'static str, lhs: c64, rhs: c64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).norm();
        IdentityCheck { name, lhs: lhs.re, rhs: rhs.re, residual, tolerance, pass: residual <= tolerance }
    }

    /// `lhs ≤ rhs`; the residual is the violation, zero when it holds.
    fn upper(name: &'static str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let residual = (lhs - rhs).max(0.0);
        IdentityCheck { name, lhs, rhs, residual, tolerance, pass: residual <= tolerance }
    }
}

/// Identity tolerance after cutoff convergence.
pub const DICKE_IDENTITY_TOL: f64 = 1e-6;

/// Checks evaluated on one Dicke model.
pub fn dicke_identities<S: ThermalSystem>(model: &DickeModel<S>) -> Result<Vec<IdentityCheck>> {
    let s = &model.spec;
    let sys = &model.system;
    let o = &model.ops;
    let beta = sys.beta();
    let (w, l, v) = (s.omega, s.lambda, s.volume);
    let r = |x: f64| c64::new(x, 0.0);
    let bb = sys.bd_inner(&o.b, &o.b)?;
    let ba = sys.bd_inner(&o.b, &o.a)?;
    let ab = sys.bd_inner(&o.a, &o.b)?;
    let aa = sys.bd_inner(&o.a, &o.a)?;
    let free = r(1.0 / (beta * w));
    let j = dicke::scaled_boson(s, o);
    let f2 = sys.functional_f(&j, 2)?.value;
    let bda = sys.gibbs_average(&o.b.adjoint().matmul(&o.a)?)?;
    let bad = sys.gibbs_average(&o.b.matmul(&o.a.adjoint())?)?;
    let mean_b = sys.gibbs_average(&o.b)?;
    let mean_a = sys.gibbs_average(&o.a)?;
    let occupation = sys.gibbs_average(&o.number)?.re;
    let tol = DICKE_IDENTITY_TOL;
    Ok(vec![
        IdentityCheck::equality("f2_boson", r(f2), r(beta * w / v), tol),
        IdentityCheck::equality("bb_from_ba", bb, free - ba * (v.sqrt() * l / w), tol),
        IdentityCheck::equality("ab_from_aa", -ab, aa * (v.sqrt() * l / w), tol),
        IdentityCheck::equality("ba_ab_symmetry", ba, ab, tol),
        IdentityCheck::equality("bb_from_aa", bb, free + aa * (v * l * l / (w * w)), tol),
        IdentityCheck::equality("bdag_a_real", bda, bad, 1e-10),
        IdentityCheck::equality("mean_b", mean_b, -mean_a * (v.sqrt() * l / w), 1e-8),
        IdentityCheck::upper("harris_lower", bb.re, occupation + 0.5, 1e-10),
        IdentityCheck::upper("harris_upper", occupation + 0.5, bb.re + beta * w / 12.0, 1e-10),
    ])
}

/// Identity suite at a resolved cutoff.
#[derive(Clone, Debug)]
pub struct DickeSuiteReport {
    pub spec: DickeSpec,
    pub beta: f64,
    pub cutoff: usize,
    pub cutoff_movement: f64,
    pub cutoff_converged: bool,
    pub checks: Vec<IdentityCheck>,
}

impl DickeSuiteReport {
    pub fn pass(&self) -> bool {
        self.cutoff_converged && self.checks.iter().all(|c| c.pass)
    }

    /// Verification failure naming the first failing check.
    pub fn require(&self) -> Result<()> {
        if !self.cutoff_converged {
            return Err(LabError::Verification(format!(
                "Fock cutoff did not converge: movement {:.3e} at cutoff {}",
                self.cutoff_movement, self.cutoff
            )));
        }
        match self.checks.iter().find(|c| !c.pass) {
            Some(c) => Err(LabError::Verification(format!("{} residual {:.3e} exceeds {:.1e}", c.name, c.residual, c.tolerance))),
            None => Ok(()),
        }
    }
}

fn suite_quantities(checks: &[IdentityCheck], extra: &[f64]) -> Vec<f64> {
    checks.iter().flat_map(|c| [c.lhs, c.rhs]).chain(extra.iter().copied()).collect()
}

pub fn dicke_identity_suite(spec: &DickeSpec, beta: f64, policy: dicke::CutoffPolicy) -> Result<DickeSuiteReport> {
    let resolved = dicke::resolve_cutoff(spec, policy, |sp| {
        let m = dicke::blocked_model(sp, beta)?;
        let checks = dicke_identities(&m)?;
        let extra = [m.system.free_energy_density(sp.volume)];
        let q = suite_quantities(&checks, &extra);
        Ok((checks, q))
    })?;
    Ok(DickeSuiteReport {
        spec: spec.with_cutoff(resolved.cutoff),
        beta,
        cutoff: resolved.cutoff,
        cutoff_movement: resolved.movement,
        cutoff_converged: resolved.converged,
        checks: resolved.value,
    })
}

/// `|⟨V^{-1/2} b†A⟩| ≤ ⟨V⁻¹ b†b⟩^{1/2} ⟨AA†⟩^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchwarzReport {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

pub fn schwarz_bound_check<S: ThermalSystem>(model: &DickeModel<S>) -> Result<SchwarzReport> {
    let o = &model.ops;
    let sys = &model.system;
    let v = model.spec.volume;
    let lhs = sys.gibbs_average(&o.b.adjoint().matmul(&o.a)?)?.norm() / v.sqrt();
    let nb = sys.gibbs_average(&o.number)?.re / v;
    let aad = sys.gibbs_average(&o.a.matmul(&o.a.adjoint())?)?.re;
    let rhs = nb.max(0.0).sqrt() * aad.max(0.0).sqrt();
    Ok(SchwarzReport { lhs, rhs, slack: rhs - lhs, pass: lhs <= rhs + 1e-12 })
}

/// The chain `gap_min ≤ gap(η = ⟨A⟩) ≤ −2λV^{-1/2} Re⟨δb†δA⟩ ≤ V^{-1/2}[V^{-γ}(λ²/ω)⟨δA†δA⟩ + V^{γ}ω⟨δb†δb⟩]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DickeGapReport {
    pub volume: f64,
    pub cutoff: usize,
    pub result: VariationalResult,
    pub gap_at_mean: f64,
    pub middle: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Exponent of the volume split in the final bound.
pub const DICKE_GAMMA: f64 = 1.0 / 3.0;

pub fn dicke_gap_bounds(model: &DickeVariational, grid: SeedGrid) -> Result<DickeGapReport> {
    let s = &model.spec;
    let m: DickeModel<BlockedSpectrum> = dicke::blocked_model(s, model.beta)?;
    let sys = &m.system;
    let o = &m.ops;
    let mean_a = sys.gibbs_average(&o.a)?;
    let da = sys.centered(&o.a)?;
    let db = sys.centered(&o.b)?;
    let v = s.volume;
    let middle = -2.0 * s.lambda / v.sqrt() * sys.gibbs_average(&db.adjoint().matmul(&da)?)?.re;
    let ada = sys.gibbs_average(&da.adjoint().matmul(&da)?)?.re;
    let bdb = sys.gibbs_average(&db.adjoint().matmul(&db)?)?.re;
    let upper = v.powf(-0.5) * (v.powf(-DICKE_GAMMA) * s.lambda * s.lambda / s.omega * ada + v.powf(DICKE_GAMMA) * s.omega * bdb);
    let f_model = sys.free_energy_density(v);
    let gap_at_mean = model.f_approx(&[mean_a], &[zero()])? - f_model;
    let result = minimize_gap(model, &[zero()], grid)?;
    let tol = GAP_TOL;
    let pass = result.gap >= -tol && result.gap <= gap_at_mean + tol && gap_at_mean <= middle + tol && middle <= upper + tol;
    Ok(DickeGapReport { volume: v, cutoff: s.fock_cutoff, result, gap_at_mean, middle, upper, pass })
}

/// Free-mode free energy density `(βV)⁻¹ ln(1 − e^{−βω})`.
pub fn free_boson_density(beta: f64, omega: f64, volume: f64) -> f64 {
    (-(-beta * omega).exp()).ln_1p() / (beta * volume)
}

/// Direct `(δA;δA)` of a generic system, used by the decoupled-channel check.
pub fn centered_duhamel<S: ThermalSystem>(sys: &S, a: &S::Op) -> Result<f64> {
    let da = sys.centered(a)?;
    Ok(sys.bd_inner(&da, &da)?.re)
}
