//! Eigendecomposition of a Hamiltonian and the thermal primitives built on it.
//!
//! Gibbs weights are always formed with the ground-state energy subtracted
//! first, so `β` up to ~50 on spectra spanning tens of energy units stays in
//! range. All thermal quantities downstream are linear in the weights, which is
//! what lets a block-diagonal system reuse these routines block by block.

use faer::{c64, Side};

use crate::error::{LabError, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};

/// Sum-of-weights tolerance of a decomposed system.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Largest dimension for which the full residual `‖HU − UΛ‖` is checked;
/// above it a deterministic sample of columns is checked.
const FULL_RESIDUAL_DIM: usize = 2048;

/// Eigenvalues (ascending) and a unitary eigenbasis, columns are eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub energies: Vec<f64>,
    pub eigenbasis: ComplexMatrix,
}

/// Dense self-adjoint eigendecomposition with a residual certificate.
pub fn eigendecompose(h: &HermitianOperator) -> Result<Eigenpairs> {
    let m = h.matrix();
    let evd = m
        .as_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::Numeric(format!("eigensolver did not converge: {e:?}")))?;
    let energies: Vec<f64> = (0..m.dim()).map(|i| evd.S()[i].re).collect();
    let eigenbasis = ComplexMatrix::from_faer(evd.U().to_owned())?;
    let residual = eigen_residual(m, &energies, &eigenbasis);
    let scale = energies.iter().fold(1.0f64, |s, e| s.max(e.abs()));
    if !(residual <= 1e-9 * scale) {
        return Err(LabError::Numeric(format!(
            "eigendecomposition residual {residual:.3e} exceeds {:.3e}",
            1e-9 * scale
        )));
    }
    Ok(Eigenpairs { energies, eigenbasis })
}

/// Largest column residual `max_n ‖H u_n − E_n u_n‖∞`.
pub fn eigen_residual(h: &ComplexMatrix, energies: &[f64], u: &ComplexMatrix) -> f64 {
    let d = h.dim();
    let hm = h.as_faer();
    let um = u.as_faer();
    let mut worst = 0.0f64;
    if d <= FULL_RESIDUAL_DIM {
        let hu = hm * um;
        for n in 0..d {
            for i in 0..d {
                worst = worst.max((hu[(i, n)] - um[(i, n)] * energies[n]).norm());
            }
        }
        return worst;
    }
    let columns = (0..32).map(|k| (k * d) / 32).chain(std::iter::once(d - 1));
    for n in columns {
        for i in 0..d {
            let mut acc = c64::new(0.0, 0.0);
            for k in 0..d {
                acc += hm[(i, k)] * um[(k, n)];
            }
            worst = worst.max((acc - um[(i, n)] * energies[n]).norm());
        }
    }
    worst
}

/// A Hamiltonian in its eigenbasis at inverse temperature `β`.
///
/// `weights[n]` is `mass · e^{−β(E_n − E_ref)} / Z'`. For an ordinary system the
/// mass is one and the weights sum to one; a block of a block-diagonal system
/// carries its multiplicity and the global partition function, so that the
/// weights of all blocks together sum to one.
#[derive(Clone, Debug)]
pub struct SpectralSystem {
    hamiltonian: HermitianOperator,
    energies: Vec<f64>,
    eigenbasis: ComplexMatrix,
    beta: f64,
    weights: Vec<f64>,
    log_partition: f64,
    energy_shift: f64,
}

/// Decompose `h` and attach the Gibbs ensemble at inverse temperature `beta`.
pub fn decompose(h: &HermitianOperator, beta: f64) -> Result<SpectralSystem> {
    check_beta(beta)?;
    let pairs = eigendecompose(h)?;
    let shift = pairs.energies.first().copied().unwrap_or(0.0);
    let boltzmann: Vec<f64> = pairs.energies.iter().map(|e| (-beta * (e - shift)).exp()).collect();
    let zp: f64 = boltzmann.iter().sum();
    let weights = boltzmann.iter().map(|b| b / zp).collect();
    Ok(SpectralSystem {
        hamiltonian: h.clone(),
        energies: pairs.energies,
        eigenbasis: pairs.eigenbasis,
        beta,
        weights,
        log_partition: -beta * shift + zp.ln(),
        energy_shift: shift,
    })
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(LabError::Numeric(format!("inverse temperature must be finite and positive, got {beta}")));
    }
    Ok(())
}

impl SpectralSystem {
    /// Assemble a block of a larger system: weights use the global reference
    /// energy `shift`, the global `Z'` and the block multiplicity.
    pub(crate) fn from_block(
        hamiltonian: HermitianOperator,
        pairs: Eigenpairs,
        beta: f64,
        multiplicity: f64,
        shift: f64,
        global_zp: f64,
    ) -> Self {
        let weights = pairs
            .energies
            .iter()
            .map(|e| multiplicity * (-beta * (e - shift)).exp() / global_zp)
            .collect();
        SpectralSystem {
            hamiltonian,
            energies: pairs.energies,
            eigenbasis: pairs.eigenbasis,
            beta,
            weights,
            log_partition: -beta * shift + global_zp.ln(),
            energy_shift: shift,
        }
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ln Z` (of the whole system, for a block).
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Reference energy subtracted before exponentiating.
    pub fn energy_shift(&self) -> f64 {
        self.energy_shift
    }

    fn check_dim(&self, a: &ComplexMatrix) -> Result<()> {
        if a.dim() != self.dim() {
            return Err(LabError::Shape(format!(
                "observable is {}x{}, system dimension is {}",
                a.dim(),
                a.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `Σ_n w_n ⟨n|A|n⟩`.
    pub fn gibbs_average(&self, a: &ComplexMatrix) -> Result<c64> {
        self.check_dim(a)?;
        let au = a.matmul(&self.eigenbasis)?;
        let u = self.eigenbasis.as_faer();
        let au = au.as_faer();
        let d = self.dim();
        let mut acc = c64::new(0.0, 0.0);
        for n in 0..d {
            if self.weights[n] == 0.0 {
                continue;
            }
            let mut diag = c64::new(0.0, 0.0);
            for i in 0..d {
                diag += u[(i, n)].conj() * au[(i, n)];
            }
            acc += diag * self.weights[n];
        }
        Ok(acc)
    }

    /// `Σ_n w_n E_n`.
    pub fn mean_energy(&self) -> f64 {
        self.energies.iter().zip(&self.weights).map(|(e, w)| e * w).sum()
    }

    /// `−(β·size)⁻¹ ln Z`.
    pub fn free_energy_density(&self, size: f64) -> f64 {
        -self.log_partition / (self.beta * size)
    }

    /// Matrix elements `⟨m|A|n⟩ = (U† A U)_{mn}`.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> Result<EigenbasisObservable> {
        self.check_dim(a)?;
        let au = a.matmul(&self.eigenbasis)?;
        let elements = ComplexMatrix::from_faer(self.eigenbasis.as_faer().adjoint() * au.as_faer())?;
        Ok(EigenbasisObservable { elements })
    }

    /// Map eigenbasis elements back: `U X U†`.
    pub fn from_eigenbasis(&self, x: &EigenbasisObservable) -> ComplexMatrix {
        let u = self.eigenbasis.as_faer();
        ComplexMatrix::from_faer(u * x.elements.as_faer() * u.adjoint()).expect("square")
    }

    /// `U diag(e^{−t(E_n − E_ref)}) U†`.
    pub fn shifted_exponential(&self, t: f64) -> ComplexMatrix {
        let d = self.dim();
        let u = self.eigenbasis.as_faer();
        let scaled = faer::Mat::from_fn(d, d, |i, n| u[(i, n)] * (-t * (self.energies[n] - self.energy_shift)).exp());
        ComplexMatrix::from_faer(&scaled * u.adjoint()).expect("square")
    }
}

/// Observable expressed in the eigenbasis of a [`SpectralSystem`].
#[derive(Clone, Debug)]
pub struct EigenbasisObservable {
    elements: ComplexMatrix,
}

impl EigenbasisObservable {
    pub fn elements(&self) -> &ComplexMatrix {
        &self.elements
    }

    pub fn get(&self, m: usize, n: usize) -> c64 {
        self.elements.get(m, n)
    }

    pub fn dim(&self) -> usize {
        self.elements.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self { elements: self.elements.adjoint() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, pauli, Axis};
    use crate::random::{random_complex, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sigma_z_system(beta: f64) -> SpectralSystem {
        decompose(&HermitianOperator::new(pauli(Axis::Z)).unwrap(), beta).unwrap()
    }

    #[test]
    fn two_level_weights() {
        let sys = sigma_z_system(1.0);
        assert_eq!(sys.energies(), &[-1.0, 1.0]);
        let e = 1f64.exp();
        let z = e + 1.0 / e;
        assert!((sys.weights()[0] - e / z).abs() < 1e-15);
        assert!((sys.weights()[1] - 1.0 / (e * z)).abs() < 1e-15);
    }

    #[test]
    fn random_decomposition_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = HermitianOperator::new(random_hermitian(8, &mut rng)).unwrap();
        let sys = decompose(&h, 1.3).unwrap();
        let total: f64 = sys.weights().iter().sum();
        assert!((total - 1.0).abs() < WEIGHT_SUM_TOL);
        assert!(eigen_residual(h.matrix(), sys.energies(), sys.eigenbasis()) <= 1e-10);
        assert!(sys.energies().windows(2).all(|w| w[0] <= w[1]));
        let u = sys.eigenbasis();
        let unitarity = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(8));
        assert!(unitarity <= 1e-10);
        let diag = ComplexMatrix::from_diagonal(sys.energies());
        let rebuilt = &(u * &diag) * &u.adjoint();
        assert!(rebuilt.max_abs_diff(h.matrix()) <= 1e-9 * h.matrix().max_abs());
    }

    #[test]
    fn zero_hamiltonian_is_flat() {
        let sys = decompose(&HermitianOperator::new(ComplexMatrix::zeros(5)).unwrap(), 2.0).unwrap();
        assert!(sys.energies().iter().all(|e| *e == 0.0));
        assert!(sys.weights().iter().all(|w| (w - 0.2).abs() < 1e-15));
        assert!((sys.free_energy_density(1.0) + 5f64.ln() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_beta() {
        let h = HermitianOperator::new(pauli(Axis::Z)).unwrap();
        assert!(decompose(&h, 0.0).is_err());
        assert!(decompose(&h, f64::NAN).is_err());
    }

    #[test]
    fn gibbs_averages_on_two_level_system() {
        let sys = sigma_z_system(1.0);
        let id = ComplexMatrix::identity(2);
        assert!((sys.gibbs_average(&id).unwrap() - c64::new(1.0, 0.0)).norm() < 1e-15);
        let sz = sys.gibbs_average(&pauli(Axis::Z)).unwrap();
        assert!((sz.re + 1f64.tanh()).abs() < 1e-15);
        assert!(sz.im.abs() < 1e-15);
        let h = sys.hamiltonian().matrix().clone();
        assert!((sys.gibbs_average(&h).unwrap().re - sys.mean_energy()).abs() < 1e-15);
        assert!(sys.gibbs_average(&ComplexMatrix::zeros(3)).is_err());
    }

    #[test]
    fn two_level_free_energy() {
        let sys = sigma_z_system(1.0);
        let expected = -(2.0 * 1f64.cosh()).ln();
        assert!((sys.free_energy_density(1.0) - expected).abs() < 1e-14);
        assert!((expected + 1.127).abs() < 1e-3);
    }

    #[test]
    fn free_boson_free_energy_approaches_closed_form() {
        // ω b†b with a large cutoff, β = 1, V = 3
        let d = 80;
        let h = ComplexMatrix::from_diagonal(&(0..d).map(|n| n as f64).collect::<Vec<_>>());
        let sys = decompose(&HermitianOperator::new(h).unwrap(), 1.0).unwrap();
        let v = 3.0;
        let expected = (1.0 - (-1f64).exp()).ln() / v;
        assert!((sys.free_energy_density(v) - expected).abs() < 1e-14);
    }

    #[test]
    fn eigenbasis_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = HermitianOperator::new(random_hermitian(6, &mut rng)).unwrap();
        let sys = decompose(&h, 0.7).unwrap();
        let id = sys.to_eigenbasis(&ComplexMatrix::identity(6)).unwrap();
        assert!(id.elements().max_abs_diff(&ComplexMatrix::identity(6)) < 1e-12);
        let hh = sys.to_eigenbasis(h.matrix()).unwrap();
        assert!(hh.elements().max_abs_diff(&ComplexMatrix::from_diagonal(sys.energies())) < 1e-10);
        let a = random_complex(6, &mut rng);
        let back = sys.from_eigenbasis(&sys.to_eigenbasis(&a).unwrap());
        assert!(back.max_abs_diff(&a) < 1e-10);
        let herm = random_hermitian(6, &mut rng);
        let e = sys.to_eigenbasis(&herm).unwrap();
        assert!(e.elements().hermiticity_defect() < 1e-10);
    }

    #[test]
    fn commutator_with_h_averages_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = HermitianOperator::new(random_hermitian(7, &mut rng)).unwrap();
        let sys = decompose(&h, 2.0).unwrap();
        for _ in 0..5 {
            let x = random_complex(7, &mut rng);
            let c = commutator(h.matrix(), &x).unwrap();
            assert!(sys.gibbs_average(&c).unwrap().norm() < 1e-10 * c.max_abs().max(1.0));
        }
    }

    #[test]
    fn energy_shift_moves_free_energy_by_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let hm = random_hermitian(6, &mut rng);
        let c = 3.25;
        let shifted = &hm + &ComplexMatrix::identity(6).scale_real(c);
        let size = 2.0;
        let f0 = decompose(&HermitianOperator::new(hm).unwrap(), 1.5).unwrap().free_energy_density(size);
        let f1 = decompose(&HermitianOperator::new(shifted).unwrap(), 1.5).unwrap().free_energy_density(size);
        assert!((f1 - f0 - c / size).abs() < 1e-12);
    }

    #[test]
    fn high_temperature_limit_is_flat_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let h = HermitianOperator::new(random_hermitian(6, &mut rng)).unwrap();
        let sys = decompose(&h, 1e-6).unwrap();
        let a = random_hermitian(6, &mut rng);
        let flat = a.trace().re / 6.0;
        let got = sys.gibbs_average(&a).unwrap().re;
        assert!((got - flat).abs() <= 1e-4 * flat.abs().max(1e-3));
    }

    #[test]
    fn low_temperature_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = HermitianOperator::new(random_hermitian(6, &mut rng).scale_real(20.0)).unwrap();
        let sys = decompose(&h, 50.0).unwrap();
        assert!(sys.weights().iter().all(|w| w.is_finite()));
        assert!(sys.log_partition().is_finite());
        assert!((sys.weights().iter().sum::<f64>() - 1.0).abs() < WEIGHT_SUM_TOL);
    }
}
