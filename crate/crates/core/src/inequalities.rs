//! The five generalized inequality families with explicit slacks, and the
//! resulting bounds on `Δ_n`.
//!
//! Every family has the shape `F_{2n} ≤ ½F_{2n+1} ≤ F_{2n} + ρ`, where `ρ`
//! depends on the family. Reports carry raw slacks; `pass` applies the
//! tolerance `1e-10·max(1, |lhs|)`.

use std::fmt;

use crate::duhamel::MAX_FUNCTIONAL_K;
use crate::error::{LabError, Result};
use crate::thermal::ThermalSystem;

/// Base tolerance of a slack, scaled by `max(1, |lhs|)`.
pub const SLACK_TOL: f64 = 1e-10;

/// Inequality family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    HarrisGen,
    GinibreGen,
    BprGen,
    AltEven,
    AltOdd,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::HarrisGen, Family::GinibreGen, Family::BprGen, Family::AltEven, Family::AltOdd];

    pub fn name(self) -> &'static str {
        match self {
            Family::HarrisGen => "harris_gen",
            Family::GinibreGen => "ginibre_gen",
            Family::BprGen => "bpr_gen",
            Family::AltEven => "alt_even",
            Family::AltOdd => "alt_odd",
        }
    }

    /// Highest functional index the family reads at `(n, k)`.
    pub fn max_index(self, n: usize, k: usize) -> usize {
        match self {
            Family::HarrisGen => 2 * n + 2,
            Family::GinibreGen => 2 * k * (2 * n + 1),
            Family::BprGen => 2 * (2 * n * k + n + k) + 1,
            Family::AltEven => 2 * (n + k),
            Family::AltOdd => 2 * (n + k) + 1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Both sides of one inequality instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityReport {
    pub family: Family,
    pub n: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs_lower: f64,
    pub rhs_upper: f64,
    pub slack_lower: f64,
    pub slack_upper: f64,
    pub pass: bool,
}

impl InequalityReport {
    fn new(family: Family, n: usize, k: usize, lhs: f64, rhs_lower: f64, rhs_upper: f64) -> Self {
        let slack_lower = lhs - rhs_lower;
        let slack_upper = rhs_upper - lhs;
        let tol = SLACK_TOL * lhs.abs().max(1.0);
        InequalityReport {
            family,
            n,
            k,
            lhs,
            rhs_lower,
            rhs_upper,
            slack_lower,
            slack_upper,
            pass: slack_lower >= -tol && slack_upper >= -tol,
        }
    }
}

/// `F_0 … F_K` of one observable at one inverse temperature.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalTable {
    beta: f64,
    values: Vec<f64>,
}

impl FunctionalTable {
    pub fn new(beta: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::Shape("empty functional table".into()));
        }
        Ok(FunctionalTable { beta, values })
    }

    /// Table large enough for every family up to `(n_max, k_max)`.
    pub fn for_grid<S: ThermalSystem>(sys: &S, j: &S::Op, n_max: usize, k_max: usize) -> Result<Self> {
        let top = required_index(n_max, k_max);
        Self::from_system(sys, j, top)
    }

    pub fn from_system<S: ThermalSystem>(sys: &S, j: &S::Op, top: usize) -> Result<Self> {
        let values = sys.functional_series(j, top)?.into_iter().map(|v| v.value).collect();
        Self::new(sys.beta(), values)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: usize) -> Result<f64> {
        self.values
            .get(k)
            .copied()
            .ok_or_else(|| LabError::Shape(format!("F_{k} requested from a table up to F_{}", self.values.len() - 1)))
    }

    /// `β^{−2n}(½F_{2n+1} − F_{2n})`.
    pub fn delta(&self, n: usize) -> Result<f64> {
        Ok(self.beta.powi(-2 * n as i32) * (0.5 * self.get(2 * n + 1)? - self.get(2 * n)?))
    }
}

/// Largest functional index any family needs on the grid `n ≤ n_max`, `1 ≤ k ≤ k_max`.
pub fn required_index(n_max: usize, k_max: usize) -> usize {
    Family::ALL
        .iter()
        .map(|f| f.max_index(n_max, if *f == Family::HarrisGen { 1 } else { k_max.max(1) }))
        .max()
        .unwrap_or(0)
}

/// Real principal root of a provably nonnegative quantity.
fn root(base: f64, exponent: f64) -> Result<f64> {
    if base < -1e-12 {
        return Err(LabError::Consistency(format!("negative base {base:.3e} under a fractional power")));
    }
    Ok(base.max(0.0).powf(exponent))
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(LabError::Shape("family index k starts at 1".into()));
    }
    Ok(())
}

fn check_cap(family: Family, n: usize, k: usize) -> Result<()> {
    let idx = family.max_index(n, k);
    if idx > MAX_FUNCTIONAL_K {
        return Err(LabError::Numeric(format!("{family} at n = {n}, k = {k} needs F_{idx}")));
    }
    Ok(())
}

/// `F_{2n} ≤ ½F_{2n+1} ≤ F_{2n} + F_{2n+2}/12`.
pub fn harris_gen(t: &FunctionalTable, n: usize) -> Result<InequalityReport> {
    check_cap(Family::HarrisGen, n, 1)?;
    let even = t.get(2 * n)?;
    let upper = even + t.get(2 * n + 2)? / 12.0;
    Ok(InequalityReport::new(Family::HarrisGen, n, 1, 0.5 * t.get(2 * n + 1)?, even, upper))
}

/// Upper side `F_{2n} + ½(J;J)^{(2k−1)/2k} F_{2k(2n+1)}^{1/2k}`.
pub fn ginibre_gen(t: &FunctionalTable, n: usize, k: usize) -> Result<InequalityReport> {
    check_k(k)?;
    check_cap(Family::GinibreGen, n, k)?;
    let q = 2.0 * k as f64;
    let even = t.get(2 * n)?;
    let rho = 0.5 * root(t.get(0)?, (q - 1.0) / q)? * root(t.get(2 * k * (2 * n + 1))?, 1.0 / q)?;
    Ok(InequalityReport::new(Family::GinibreGen, n, k, 0.5 * t.get(2 * n + 1)?, even, even + rho))
}

/// Upper side `F_{2n} + ½(J;J)^{2k/(2k+1)} F_{2(2nk+n+k)+1}^{1/(2k+1)}`.
pub fn bpr_gen(t: &FunctionalTable, n: usize, k: usize) -> Result<InequalityReport> {
    check_k(k)?;
    check_cap(Family::BprGen, n, k)?;
    let q = 2.0 * k as f64 + 1.0;
    let even = t.get(2 * n)?;
    let rho = 0.5 * root(t.get(0)?, (q - 1.0) / q)? * root(t.get(2 * (2 * n * k + n + k) + 1)?, 1.0 / q)?;
    Ok(InequalityReport::new(Family::BprGen, n, k, 0.5 * t.get(2 * n + 1)?, even, even + rho))
}

/// Upper side `F_{2n} + ½F_{2n}^{(2k−1)/2k} F_{2(n+k)}^{1/2k}`.
pub fn alt_even(t: &FunctionalTable, n: usize, k: usize) -> Result<InequalityReport> {
    check_k(k)?;
    check_cap(Family::AltEven, n, k)?;
    let q = 2.0 * k as f64;
    let even = t.get(2 * n)?;
    let rho = 0.5 * root(even, (q - 1.0) / q)? * root(t.get(2 * (n + k))?, 1.0 / q)?;
    Ok(InequalityReport::new(Family::AltEven, n, k, 0.5 * t.get(2 * n + 1)?, even, even + rho))
}

/// Upper side `F_{2n} + ½F_{2n}^{2k/(2k+1)} F_{2(n+k)+1}^{1/(2k+1)}`.
pub fn alt_odd(t: &FunctionalTable, n: usize, k: usize) -> Result<InequalityReport> {
    check_k(k)?;
    check_cap(Family::AltOdd, n, k)?;
    let q = 2.0 * k as f64 + 1.0;
    let even = t.get(2 * n)?;
    let rho = 0.5 * root(even, (q - 1.0) / q)? * root(t.get(2 * (n + k) + 1)?, 1.0 / q)?;
    Ok(InequalityReport::new(Family::AltOdd, n, k, 0.5 * t.get(2 * n + 1)?, even, even + rho))
}

/// One family at one `(n, k)`; `k` is ignored for [`Family::HarrisGen`].
pub fn evaluate(family: Family, t: &FunctionalTable, n: usize, k: usize) -> Result<InequalityReport> {
    match family {
        Family::HarrisGen => harris_gen(t, n),
        Family::GinibreGen => ginibre_gen(t, n, k),
        Family::BprGen => bpr_gen(t, n, k),
        Family::AltEven => alt_even(t, n, k),
        Family::AltOdd => alt_odd(t, n, k),
    }
}

/// All families on `n ≤ n_max`, `1 ≤ k ≤ k_max`, Harris once per `n`.
pub fn inequality_grid(t: &FunctionalTable, n_max: usize, k_max: usize) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    for n in 0..=n_max {
        out.push(harris_gen(t, n)?);
        for family in &Family::ALL[1..] {
            for k in 1..=k_max {
                out.push(evaluate(*family, t, n, k)?);
            }
        }
    }
    Ok(out)
}

/// `Δ_n` against `β^{−2n}(rhs_upper − F_{2n})` of every family, as reports
/// with `lhs = Δ_n`, `rhs_lower = 0`.
pub fn bound_catalogue(t: &FunctionalTable, n_max: usize, k_max: usize) -> Result<Vec<InequalityReport>> {
    inequality_grid(t, n_max, k_max)?
        .into_iter()
        .map(|r| {
            let scale = t.beta().powi(-2 * r.n as i32);
            let delta = t.delta(r.n)?;
            Ok(InequalityReport::new(r.family, r.n, r.k, delta, 0.0, scale * (r.rhs_upper - r.rhs_lower)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duhamel::x_coth_x;
    use crate::operator::{pauli, Axis, ComplexMatrix, HermitianOperator};
    use crate::random::{random_complex, random_hermitian};
    use crate::spectral::decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_level_table() -> FunctionalTable {
        let sys = decompose(&HermitianOperator::new(pauli(Axis::Z)).unwrap(), 1.0).unwrap();
        FunctionalTable::for_grid(&sys, &pauli(Axis::X), 2, 3).unwrap()
    }

    #[test]
    fn two_level_values() {
        let t = two_level_table();
        let th = 1f64.tanh();
        let h0 = harris_gen(&t, 0).unwrap();
        assert!(h0.pass);
        assert!((h0.lhs - 1.0).abs() < 1e-12);
        assert!((h0.rhs_upper - 4.0 / 3.0 * th).abs() < 1e-12);
        assert!((h0.rhs_upper - 1.0154589).abs() < 1e-7);
        let h1 = harris_gen(&t, 1).unwrap();
        assert!((h1.lhs - 4.0).abs() < 1e-12);
        assert!((h1.rhs_upper - 16.0 / 3.0 * th).abs() < 1e-11);
        assert!((h1.rhs_upper - 4.061835).abs() < 1e-6);
        let g = ginibre_gen(&t, 0, 1).unwrap();
        assert!((g.rhs_upper - 2.0 * th).abs() < 1e-12 && g.pass);
        assert!((g.rhs_upper - 1.523188).abs() < 1e-6);
        let b = bpr_gen(&t, 0, 1).unwrap();
        assert!((b.rhs_upper - (th + th.powf(2.0 / 3.0))).abs() < 1e-12 && b.pass);
        assert!((b.rhs_upper - 1.595).abs() < 1e-3);
    }

    #[test]
    fn families_coincide_at_n_zero() {
        let t = two_level_table();
        for k in 1..=3 {
            assert_eq!(alt_even(&t, 0, k).unwrap().rhs_upper, ginibre_gen(&t, 0, k).unwrap().rhs_upper);
            assert_eq!(alt_odd(&t, 0, k).unwrap().rhs_upper, bpr_gen(&t, 0, k).unwrap().rhs_upper);
        }
    }

    #[test]
    fn commuting_pairs_saturate() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let sys = decompose(&HermitianOperator::new(random_hermitian(5, &mut rng)).unwrap(), 1.4).unwrap();
        for j in [ComplexMatrix::identity(5), sys.hamiltonian().matrix().clone()] {
            let t = FunctionalTable::for_grid(&sys, &j, 2, 3).unwrap();
            for r in inequality_grid(&t, 2, 3).unwrap() {
                assert!(r.pass);
                assert!(r.slack_lower.abs() <= 1e-12 * r.lhs.max(1.0), "{r:?}");
                assert!(r.slack_upper.abs() <= 1e-12 * r.lhs.max(1.0), "{r:?}");
            }
        }
    }

    #[test]
    fn random_sweep_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        for i in 0..40 {
            let beta = [0.3, 1.0, 2.5][i % 3];
            let sys = decompose(&HermitianOperator::new(random_hermitian(6, &mut rng)).unwrap(), beta).unwrap();
            let j = random_complex(6, &mut rng);
            let t = FunctionalTable::for_grid(&sys, &j, 2, 3).unwrap();
            for r in inequality_grid(&t, 2, 3).unwrap() {
                assert!(r.pass, "{r:?}");
            }
            for r in bound_catalogue(&t, 2, 3).unwrap() {
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn harris_is_tighter_than_ginibre_when_stated() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        let mut seen = 0;
        for _ in 0..40 {
            let sys = decompose(&HermitianOperator::new(random_hermitian(5, &mut rng)).unwrap(), 0.6).unwrap();
            let t = FunctionalTable::for_grid(&sys, &random_complex(5, &mut rng), 1, 1).unwrap();
            for n in 0..=1 {
                if t.get(2 * n + 2).unwrap() <= 36.0 * t.get(2 * n).unwrap() && n == 0 {
                    seen += 1;
                    let h = harris_gen(&t, n).unwrap();
                    let g = ginibre_gen(&t, n, 1).unwrap();
                    assert!(h.rhs_upper <= g.rhs_upper + 1e-12 * g.rhs_upper);
                }
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn elementary_kernel_bounds() {
        let mut x = 1e-8f64;
        while x <= 1e3 {
            let v = x_coth_x(x);
            assert!(v >= 1.0);
            assert!(v <= 1.0 + x * x / 3.0 + 1e-15);
            assert!(v <= 1.0 + x + 1e-15);
            x *= 1.1;
        }
    }

    #[test]
    fn argument_checks() {
        let t = two_level_table();
        assert!(ginibre_gen(&t, 0, 0).is_err());
        assert!(t.get(1000).is_err());
        assert!(root(-1e-6, 0.5).is_err());
        assert_eq!(root(-1e-14, 0.5).unwrap(), 0.0);
        assert!(check_cap(Family::BprGen, 8, 8).is_err());
        assert_eq!(required_index(2, 3), 35);
    }
}
