//! Size sweeps: functionals, chain differences, inequality slacks and fits.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ModelKind, SweepConfig};
use super::csv::Measurement;
use super::fit::ScalingSeries;
use crate::error::{LabError, Result};
use crate::inequalities::{inequality_grid, FunctionalTable};
use crate::models::dicke::{self, scaled_boson};
use crate::models::heisenberg::{self, HEISENBERG_BETA};
use crate::models::Representation;
use crate::operator::HermitianOperator;
use crate::random::{random_complex, random_hermitian};
use crate::spectral::decompose;
use crate::thermal::ThermalSystem;

/// Applies `f` to every item on up to `threads` workers; results keep input order.
pub fn parallel_map<T: Send>(items: &[usize], threads: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(|i| f(*i)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let value = f(items[i]);
                slots.lock().expect("worker panicked")[i] = Some(value);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|v| v.expect("every slot filled")).collect()
}

/// Functional table and `|⟨J⟩|` for one system.
pub struct SizeData {
    pub table: FunctionalTable,
    pub mean_abs: f64,
    /// Set for the Dicke model.
    pub cutoff: Option<usize>,
}

fn measure<S: ThermalSystem>(sys: &S, j: &S::Op, cfg: &SweepConfig) -> Result<SizeData> {
    let table = FunctionalTable::for_grid(sys, j, cfg.n_max, cfg.k_max)?;
    let mean_abs = sys.gibbs_average(j)?.norm();
    Ok(SizeData { table, mean_abs, cutoff: None })
}

/// Deterministic per-size generator for the random model.
pub fn random_rng(seed: u64, size: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((size as u64) << 32))
}

/// The observable `J`: `J^x`, `V^{-1/2} b`, or a random matrix.
pub fn size_data(cfg: &SweepConfig, size: usize) -> Result<SizeData> {
    match cfg.model {
        ModelKind::Heisenberg => {
            let spec = cfg.heisenberg(size)?;
            match spec.representation {
                Representation::Full => {
                    let m = heisenberg::full_model(&spec)?;
                    measure(&m.system, &m.spins.x, cfg)
                }
                Representation::Blocked => {
                    let m = heisenberg::blocked_model(&spec)?;
                    measure(&m.system, &m.spins.x, cfg)
                }
            }
        }
        ModelKind::Dicke => {
            let spec = cfg.dicke(size)?;
            let r = dicke::resolve_cutoff(&spec, cfg.cutoff_policy(), |sp| {
                let m = dicke::blocked_model(sp, cfg.beta)?;
                let data = measure(&m.system, &scaled_boson(sp, &m.ops), cfg)?;
                let mut q = data.table.values().to_vec();
                q.push(data.mean_abs);
                Ok((data, q))
            })?;
            if !r.converged {
                return Err(LabError::Verification(format!(
                    "Fock cutoff {} not converged: movement {:.3e}",
                    r.cutoff, r.movement
                )));
            }
            Ok(SizeData { cutoff: Some(r.cutoff), ..r.value })
        }
        ModelKind::Random => {
            let mut rng = random_rng(cfg.seed, size);
            let h = HermitianOperator::new(random_hermitian(size, &mut rng))?;
            let j = random_complex(size, &mut rng);
            let sys = decompose(&h, cfg.beta)?;
            measure(&sys, &j, cfg)
        }
    }
}

/// β as reported in rows.
pub fn effective_beta(cfg: &SweepConfig) -> f64 {
    if cfg.model == ModelKind::Heisenberg {
        HEISENBERG_BETA
    } else {
        cfg.beta
    }
}

pub fn rows_for(cfg: &SweepConfig, size: usize, data: &SizeData) -> Result<Vec<Measurement>> {
    let beta = effective_beta(cfg);
    let row = |quantity: &str, n: Option<usize>, k: Option<usize>, value: f64| Measurement {
        model: cfg.model.name().to_string(),
        size,
        beta,
        quantity: quantity.to_string(),
        n,
        k,
        value,
    };
    let mut rows = vec![row("mean_abs", None, None, data.mean_abs)];
    if let Some(d) = data.cutoff {
        rows.push(row("fock_cutoff", None, None, d as f64));
    }
    for k in 0..=2 * cfg.n_max + 2 {
        rows.push(row("F", None, Some(k), data.table.get(k)?));
    }
    for n in 0..=cfg.n_max {
        rows.push(row("delta", Some(n), None, data.table.delta(n)?));
    }
    for r in inequality_grid(&data.table, cfg.n_max, cfg.k_max)? {
        let k = (r.family != crate::inequalities::Family::HarrisGen).then_some(r.k);
        rows.push(row(&format!("{}_lower", r.family.name()), Some(r.n), k, r.slack_lower));
        rows.push(row(&format!("{}_upper", r.family.name()), Some(r.n), k, r.slack_upper));
    }
    Ok(rows)
}

#[derive(Debug)]
pub struct SizeFailure {
    pub size: usize,
    pub error: LabError,
}

#[derive(Debug, Default)]
pub struct SweepOutcome {
    pub rows: Vec<Measurement>,
    pub series: Vec<ScalingSeries>,
    pub failures: Vec<SizeFailure>,
}

/// Series label for a row that takes part in scaling fits.
fn series_label(m: &Measurement) -> Option<String> {
    match (m.quantity.as_str(), m.n, m.k) {
        ("mean_abs", _, _) => Some("mean_abs".into()),
        ("F", _, Some(k)) => Some(format!("F_{k}")),
        ("delta", Some(n), _) => Some(format!("delta_{n}")),
        _ => None,
    }
}

/// Groups rows into series of `|value|` against size, in label order.
pub fn collect_series(rows: &[Measurement]) -> Vec<ScalingSeries> {
    let mut groups: BTreeMap<(usize, String), Vec<(usize, f64)>> = BTreeMap::new();
    for m in rows {
        if let Some(label) = series_label(m) {
            // F_k and delta_n sort numerically within their family
            let order = label.rsplit('_').next().and_then(|s| s.parse().ok()).unwrap_or(0);
            groups.entry((order, label)).or_default().push((m.size, m.value.abs()));
        }
    }
    let mut out: Vec<ScalingSeries> = groups.into_iter().map(|((_, label), pts)| ScalingSeries::new(label, pts)).collect();
    out.sort_by(|a, b| family_rank(&a.quantity).cmp(&family_rank(&b.quantity)));
    out
}

fn family_rank(label: &str) -> u8 {
    match label.split('_').next() {
        Some("mean") => 0,
        Some("F") => 1,
        _ => 2,
    }
}

/// Fails only when more than half of the sizes fail; the first failure is returned.
pub fn gather<T>(sizes: &[usize], results: Vec<Result<T>>) -> Result<(Vec<(usize, T)>, Vec<SizeFailure>)> {
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (size, r) in sizes.iter().zip(results) {
        match r {
            Ok(v) => ok.push((*size, v)),
            Err(error) => failures.push(SizeFailure { size: *size, error }),
        }
    }
    if 2 * failures.len() > sizes.len() {
        let first = failures.remove(0);
        return Err(first.error);
    }
    Ok((ok, failures))
}

pub fn run_sweep(cfg: &SweepConfig, threads: usize) -> Result<SweepOutcome> {
    cfg.validate()?;
    let results = parallel_map(&cfg.size_grid, threads, |size| size_data(cfg, size).and_then(|d| rows_for(cfg, size, &d)));
    let (ok, failures) = gather(&cfg.size_grid, results)?;
    let rows: Vec<Measurement> = ok.into_iter().flat_map(|(_, r)| r).collect();
    let series = collect_series(&rows);
    Ok(SweepOutcome { rows, series, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::csv::render_csv;

    fn cfg(text: &str) -> SweepConfig {
        SweepConfig::parse(text).unwrap()
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..20).collect();
        assert_eq!(parallel_map(&items, 4, |i| i * i), items.iter().map(|i| i * i).collect::<Vec<_>>());
        assert!(parallel_map(&[], 3, |i| i).is_empty());
    }

    #[test]
    fn sweep_is_deterministic_across_thread_counts() {
        let c = cfg("model = random\nn_spins_min = 3\nn_spins_max = 6\nn_max = 1\nk_max = 2\nseed = 9");
        let a = render_csv(&run_sweep(&c, 1).unwrap().rows);
        let b = render_csv(&run_sweep(&c, 3).unwrap().rows);
        assert_eq!(a, b);
    }

    #[test]
    fn heisenberg_rows_structure() {
        let c = cfg("n_spins_min = 4\nn_spins_max = 4\nn_max = 1\nk_max = 1");
        let out = run_sweep(&c, 1).unwrap();
        // mean, F_0..F_4, delta_0..1, and 2 slacks per inequality (Harris + 4 families, n = 0, 1)
        assert_eq!(out.rows.len(), 1 + 5 + 2 + 2 * 5 * 2);
        assert!(out.rows.iter().filter(|r| r.quantity.ends_with("_lower") || r.quantity.ends_with("_upper")).all(|r| r.value >= -1e-10));
    }

    #[test]
    fn dicke_f2_follows_inverse_volume() {
        let c = cfg("model = dicke\nn_spins_min = 2\nn_spins_max = 5\nn_max = 1\nk_max = 1\nlambda = 0.2");
        let out = run_sweep(&c, 2).unwrap();
        let f2 = out.series.iter().find(|s| s.quantity == "F_2").unwrap();
        assert!((f2.exponent().unwrap() + 1.0).abs() < 1e-6, "{}", f2.describe());
    }

    #[test]
    fn unconverged_cutoff_fails_the_sweep() {
        let c = cfg("model = dicke\nn_spins_min = 2\nn_spins_max = 3\nfock_cutoff = 2\nlambda = 1.0\nn_max = 1\nk_max = 1");
        assert!(matches!(run_sweep(&c, 1), Err(LabError::Verification(_))));
    }

    #[test]
    fn tolerates_a_minority_of_failures() {
        let sizes = [1, 2, 3];
        let res: Vec<Result<usize>> = vec![Ok(1), Err(LabError::Numeric("x".into())), Ok(3)];
        let (ok, failed) = gather(&sizes, res).unwrap();
        assert_eq!((ok.len(), failed.len()), (2, 1));
        let res: Vec<Result<usize>> = vec![Ok(1), Err(LabError::Numeric("x".into())), Err(LabError::Numeric("y".into()))];
        assert!(gather(&sizes, res).is_err());
    }
}
