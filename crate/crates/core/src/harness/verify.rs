//! One-shot invariant suite.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SweepConfig;
use super::report::{Check, Report};
use crate::ahm::{self, DickeVariational, SeedGrid, FD_STEP, GAP_TOL};
use crate::chains::{build_system_chain, compare_routes, delta_n, ROUTE_TOL};
use crate::duhamel::{bd_inner_cross_checked, AMPLITUDE_FLOOR};
use crate::error::Result;
use crate::inequalities::{bound_catalogue, inequality_grid, FunctionalTable, SLACK_TOL};
use crate::models::dicke::{self, scaled_boson};
use crate::models::heisenberg;
use crate::operator::{pauli, Axis, ComplexMatrix, HermitianOperator};
use crate::random::{random_complex, random_hermitian};
use crate::spectral::{decompose, SpectralSystem};
use crate::thermal::{Observable, ThermalSystem};

/// Oracle comparison tolerance.
pub const ORACLE_TOL: f64 = 1e-8;
/// Commutator identity tolerance, relative to `max(1, |⟨[A†, B]⟩|)`.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Saturation tolerance for commuting pairs.
pub const SATURATION_TOL: f64 = 1e-12;
/// Susceptibility tolerance, relative.
pub const SUSCEPTIBILITY_TOL: f64 = 1e-4;

pub const ORACLE_TRIPLES: usize = 50;
pub const RANDOM_INSTANCES: usize = 20;

fn random_system(dim: usize, beta: f64, rng: &mut ChaCha8Rng) -> Result<SpectralSystem> {
    decompose(&HermitianOperator::new(random_hermitian(dim, rng))?, beta)
}

/// Largest `|spectral − quadrature|` over random triples.
pub fn oracle_residual(seed: u64, triples: usize, beta: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x0D));
    let mut worst = 0.0f64;
    for _ in 0..triples {
        let sys = random_system(8, beta, &mut rng)?;
        let a = random_complex(8, &mut rng);
        let b = random_complex(8, &mut rng);
        let (s, q, _) = bd_inner_cross_checked(&sys, &a, &b, ORACLE_TOL)?;
        worst = worst.max((s - q).norm());
    }
    Ok(worst)
}

/// `|β(A;[H,B]) − ⟨[A†,B]⟩| / max(1, |⟨[A†,B]⟩|)`.
pub fn commutator_identity_residual<S: ThermalSystem>(sys: &S, a: &S::Op, b: &S::Op) -> Result<f64> {
    let h = sys.hamiltonian_op();
    let lhs = sys.bd_inner(a, &h.commutator(b)?)? * sys.beta();
    let rhs = sys.gibbs_average(&a.adjoint().commutator(b)?)?;
    Ok((lhs - rhs).norm() / rhs.norm().max(1.0))
}

fn max_route_error<S: ThermalSystem>(sys: &S, j: &S::Op, depth: usize) -> Result<f64> {
    let chain = build_system_chain(sys, j, depth)?;
    Ok(compare_routes(sys, &chain, 2 * depth + 1)?.iter().map(|r| r.relative).fold(0.0, f64::max))
}

/// Smallest slack of every family and every `Δ_n` bound.
fn min_slack<S: ThermalSystem>(sys: &S, j: &S::Op, n_max: usize, k_max: usize) -> Result<f64> {
    let t = FunctionalTable::for_grid(sys, j, n_max, k_max)?;
    let mut reports = inequality_grid(&t, n_max, k_max)?;
    reports.extend(bound_catalogue(&t, n_max, k_max)?);
    Ok(reports.iter().map(|r| r.slack_lower.min(r.slack_upper)).fold(f64::INFINITY, f64::min))
}

/// `|Δ_n(chain) − β^{−2n}(½F_{2n+1} − F_{2n})|` relative, over `n ≤ n_max`.
fn delta_route_error<S: ThermalSystem>(sys: &S, j: &S::Op, n_max: usize) -> Result<f64> {
    let chain = build_system_chain(sys, j, n_max + 1)?;
    let t = FunctionalTable::from_system(sys, j, 2 * n_max + 1)?;
    let mut worst = 0.0f64;
    for n in 0..=n_max {
        let direct = delta_n(sys, &chain, n)?;
        let table = t.delta(n)?;
        worst = worst.max((direct - table).abs() / table.abs().max(t.get(2 * n)?.abs()).max(1e-300));
    }
    Ok(worst)
}

/// Two-level values for `H = σᶻ`, `J = σˣ`, `β = 1`.
pub fn two_level_checks() -> Result<Vec<Check>> {
    let sys = decompose(&HermitianOperator::new(pauli(Axis::Z))?, 1.0)?;
    let f = sys.functional_series(&pauli(Axis::X), 4)?;
    let t = 1f64.tanh();
    let expected = [("two_level/F_0", t), ("two_level/F_2", 4.0 * t), ("two_level/F_3", 8.0), ("two_level/F_4", 16.0 * t)];
    let index = [0, 2, 3, 4];
    Ok(expected
        .iter()
        .zip(index)
        .map(|((name, v), k)| Check::residual(*name, (f[k].value - v).abs(), SATURATION_TOL))
        .collect())
}

pub fn run_verify(cfg: &SweepConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(format!("verify seed={}", cfg.seed));
    let size = cfg.smallest_size();
    let (n_max, k_max) = (cfg.n_max, cfg.k_max);

    for beta in [0.1, 1.0, 10.0] {
        report.push(Check::residual(format!("oracle/beta={beta}"), oracle_residual(cfg.seed, ORACLE_TRIPLES, beta)?, ORACLE_TOL));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x17));
    let mut identity = 0.0f64;
    let mut routes = 0.0f64;
    let mut slack = f64::INFINITY;
    let mut saturation = 0.0f64;
    let mut deltas = 0.0f64;
    for _ in 0..RANDOM_INSTANCES {
        let beta = rng.random_range(0.2..3.0);
        let sys = random_system(6, beta, &mut rng)?;
        let a = random_complex(6, &mut rng);
        let b = random_complex(6, &mut rng);
        identity = identity.max(commutator_identity_residual(&sys, &a, &b)?);
        routes = routes.max(max_route_error(&sys, &a, 3)?);
        slack = slack.min(min_slack(&sys, &a, n_max, k_max)?);
        deltas = deltas.max(delta_route_error(&sys, &a, n_max)?);
        for j in [ComplexMatrix::identity(6), sys.hamiltonian().matrix().clone()] {
            let t = FunctionalTable::for_grid(&sys, &j, n_max, k_max)?;
            for r in inequality_grid(&t, n_max, k_max)? {
                let scale = r.lhs.abs().max(1.0);
                saturation = saturation.max(r.slack_lower.abs().max(r.slack_upper.abs()) / scale);
            }
        }
    }
    report.push(Check::residual("identity/random", identity, IDENTITY_TOL));
    report.push(Check::residual("routes/random", routes, ROUTE_TOL));
    report.push(Check::slack("inequalities/random", slack, SLACK_TOL));
    report.push(Check::residual("inequalities/commuting_saturation", saturation, SATURATION_TOL));
    report.push(Check::residual("delta/random", deltas, ROUTE_TOL));
    report.checks.extend(two_level_checks()?);

    // Heisenberg at the smallest size
    let hspec = cfg.heisenberg(size)?;
    let hm = heisenberg::blocked_model(&hspec)?;
    let hs = &hm.system;
    let tag = format!("heisenberg/N={size}");
    report.push(Check::residual(format!("{tag}/identity"), commutator_identity_residual(hs, &hm.spins.x, &hm.spins.y)?, IDENTITY_TOL));
    report.push(Check::residual(format!("{tag}/routes"), max_route_error(hs, &hm.spins.x, 3)?, ROUTE_TOL));
    report.push(Check::slack(format!("{tag}/inequalities"), min_slack(hs, &hm.spins.x, n_max, k_max)?, SLACK_TOL));
    report.push(Check::residual(format!("{tag}/delta"), delta_route_error(hs, &hm.spins.x, n_max)?, ROUTE_TOL));
    let f2 = hs.functional_f(&hm.spins.x, 2)?.value;
    report.push(Check::residual(format!("{tag}/F_2_closed_form"), (f2 - heisenberg::f2_closed_form(&hm)?).abs(), ROUTE_TOL));
    let f3 = hs.functional_f(&hm.spins.x, 3)?.value;
    report.push(Check::residual(format!("{tag}/F_3_closed_form"), (f3 - heisenberg::f3_closed_form(&hm)?).abs(), ROUTE_TOL));
    let zero = [c64::new(0.0, 0.0); 2];
    let sandwich = ahm::heisenberg_sandwich(&hspec, &zero, SeedGrid::default())?;
    report.push(Check::slack(format!("{tag}/ahm_gap_lower"), sandwich.result.gap, GAP_TOL));
    report.push(Check::slack(format!("{tag}/ahm_gap_upper"), sandwich.upper - sandwich.result.gap, GAP_TOL));
    for ch in 0..2 {
        let s = ahm::heisenberg_susceptibility(&hspec, ch, &zero, FD_STEP)?;
        report.push(Check::residual(format!("{tag}/susceptibility_{ch}"), s.relative(), SUSCEPTIBILITY_TOL));
    }

    // Dicke at the smallest size
    let dspec = cfg.dicke(size)?;
    let suite = ahm::dicke_identity_suite(&dspec, cfg.beta, cfg.cutoff_policy())?;
    let tag = format!("dicke/V={}", dspec.volume);
    report.push(Check::residual(format!("{tag}/cutoff_convergence d={}", suite.cutoff), suite.cutoff_movement, dicke::CUTOFF_TOL));
    for c in &suite.checks {
        report.push(Check::residual(format!("{tag}/{}", c.name), c.residual, c.tolerance));
    }
    let spec = &suite.spec;
    let dm = dicke::blocked_model(spec, cfg.beta)?;
    let ds = &dm.system;
    let j = scaled_boson(spec, &dm.ops);
    report.push(Check::residual(format!("{tag}/identity"), commutator_identity_residual(ds, &dm.ops.b, &dm.ops.a)?, IDENTITY_TOL));
    report.push(Check::residual(format!("{tag}/routes"), max_route_error(ds, &j, 3)?, ROUTE_TOL));
    report.push(Check::slack(format!("{tag}/inequalities"), min_slack(ds, &j, n_max, k_max)?, SLACK_TOL));
    let closed = dicke::boson_functionals_closed_form(&dm)?;
    let f4 = ds.functional_f(&j, 4)?.value;
    report.push(Check::residual(format!("{tag}/F_4_closed_form"), (f4 - closed.f4).abs() / f4.abs().max(1e-300), ROUTE_TOL));
    let schwarz = ahm::schwarz_bound_check(&dm)?;
    report.push(Check::slack(format!("{tag}/schwarz"), schwarz.slack, 1e-12));
    let dv = DickeVariational { spec: spec.clone(), beta: cfg.beta };
    let chain = ahm::dicke_gap_bounds(&dv, SeedGrid::default())?;
    report.push(Check::slack(format!("{tag}/ahm_gap_lower"), chain.result.gap, GAP_TOL));
    report.push(Check::slack(format!("{tag}/ahm_gap_vs_mean"), chain.gap_at_mean - chain.result.gap, GAP_TOL));
    report.push(Check::slack(format!("{tag}/ahm_bogoliubov"), chain.middle - chain.gap_at_mean, GAP_TOL));
    report.push(Check::slack(format!("{tag}/ahm_split"), chain.upper - chain.middle, GAP_TOL));
    let sus = ahm::dicke_susceptibility(&dv, c64::new(0.0, 0.0), FD_STEP)?;
    report.push(Check::residual(format!("{tag}/susceptibility"), sus.relative(), SUSCEPTIBILITY_TOL));
    let occupation = ds.gibbs_average(&dm.ops.number)?.re / spec.volume;
    report.note(format!("{tag}: <b+b>/V = {occupation:.6e}, boson free part {:.6e}", ahm::free_boson_density(cfg.beta, spec.omega, spec.volume)));
    report.note(format!("amplitude floor {AMPLITUDE_FLOOR:.0e}; models use the blocked representation"));
    Ok(report)
}
