//! Thermal systems in full and block-diagonal form.
//!
//! A [`BlockedSpectrum`] stores one [`SpectralSystem`] per symmetry sector,
//! each carrying its multiplicity and the global partition function. Every
//! thermal quantity is linear in the Gibbs weights, so sector sums reproduce the
//! full-space values exactly for operators that act identically on all copies
//! of a sector.

use faer::c64;

use crate::duhamel::{self, FunctionalValue, Route};
use crate::error::{LabError, Result};
use crate::operator::{commutator, ComplexMatrix, HermitianOperator};
use crate::spectral::{check_beta, eigendecompose, EigenbasisObservable, SpectralSystem};

/// Operator algebra needed by commutator chains.
pub trait Observable: Clone + Sized {
    fn adjoint(&self) -> Self;
    fn matmul(&self, other: &Self) -> Result<Self>;
    fn add(&self, other: &Self) -> Result<Self>;
    fn sub(&self, other: &Self) -> Result<Self>;
    fn scale(&self, factor: c64) -> Self;
    fn max_abs(&self) -> f64;

    fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }
}

impl Observable for ComplexMatrix {
    fn adjoint(&self) -> Self {
        ComplexMatrix::adjoint(self)
    }
    fn matmul(&self, other: &Self) -> Result<Self> {
        ComplexMatrix::matmul(self, other)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        self.checked_add(other)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        self.checked_sub(other)
    }
    fn scale(&self, factor: c64) -> Self {
        ComplexMatrix::scale(self, factor)
    }
    fn max_abs(&self) -> f64 {
        ComplexMatrix::max_abs(self)
    }
    fn commutator(&self, other: &Self) -> Result<Self> {
        commutator(self, other)
    }
}

/// A Gibbs ensemble on which thermal averages and Duhamel functionals are
/// defined.
pub trait ThermalSystem {
    type Op: Observable;

    fn beta(&self) -> f64;
    /// `ln Z`.
    fn log_partition(&self) -> f64;
    fn dim(&self) -> usize;
    fn hamiltonian_op(&self) -> Self::Op;
    fn identity_op(&self) -> Self::Op;
    fn gibbs_average(&self, a: &Self::Op) -> Result<c64>;
    fn bd_inner(&self, a: &Self::Op, b: &Self::Op) -> Result<c64>;
    /// `F_0 … F_{k_max}` of `j`.
    fn functional_series(&self, j: &Self::Op, k_max: usize) -> Result<Vec<FunctionalValue>>;

    fn functional_f(&self, j: &Self::Op, k: usize) -> Result<FunctionalValue> {
        Ok(self.functional_series(j, k)?[k])
    }

    /// `−(β·size)⁻¹ ln Z`.
    fn free_energy_density(&self, size: f64) -> f64 {
        -self.log_partition() / (self.beta() * size)
    }

    /// `A − ⟨A⟩·I`.
    fn centered(&self, a: &Self::Op) -> Result<Self::Op> {
        let mean = self.gibbs_average(a)?;
        a.sub(&self.identity_op().scale(mean))
    }

    /// `½⟨A†A + AA†⟩ − |⟨A⟩|²`.
    fn sym_fluctuation(&self, a: &Self::Op) -> Result<f64> {
        let sym = a.adjoint().anticommutator(a)?;
        Ok(0.5 * self.gibbs_average(&sym)?.re - self.gibbs_average(a)?.norm_sqr())
    }
}

impl ThermalSystem for SpectralSystem {
    type Op = ComplexMatrix;

    fn beta(&self) -> f64 {
        SpectralSystem::beta(self)
    }
    fn log_partition(&self) -> f64 {
        SpectralSystem::log_partition(self)
    }
    fn dim(&self) -> usize {
        SpectralSystem::dim(self)
    }
    fn hamiltonian_op(&self) -> ComplexMatrix {
        self.hamiltonian().matrix().clone()
    }
    fn identity_op(&self) -> ComplexMatrix {
        ComplexMatrix::identity(SpectralSystem::dim(self))
    }
    fn gibbs_average(&self, a: &ComplexMatrix) -> Result<c64> {
        SpectralSystem::gibbs_average(self, a)
    }
    fn bd_inner(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<c64> {
        duhamel::bd_inner(self, a, b)
    }
    fn functional_series(&self, j: &ComplexMatrix, k_max: usize) -> Result<Vec<FunctionalValue>> {
        duhamel::functional_series_eigen(self, &self.to_eigenbasis(j)?, k_max)
    }
}

/// Block-diagonal operator, one matrix per sector of a [`BlockedSpectrum`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator(pub Vec<ComplexMatrix>);

impl BlockOperator {
    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.0
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&ComplexMatrix, &ComplexMatrix) -> Result<ComplexMatrix>) -> Result<Self> {
        if self.0.len() != other.0.len() {
            return Err(LabError::Shape(format!("{} blocks vs {}", self.0.len(), other.0.len())));
        }
        self.0.iter().zip(&other.0).map(|(a, b)| f(a, b)).collect::<Result<_>>().map(BlockOperator)
    }
}

impl Observable for BlockOperator {
    fn adjoint(&self) -> Self {
        BlockOperator(self.0.iter().map(ComplexMatrix::adjoint).collect())
    }
    fn matmul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, ComplexMatrix::matmul)
    }
    fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, ComplexMatrix::checked_add)
    }
    fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, ComplexMatrix::checked_sub)
    }
    fn scale(&self, factor: c64) -> Self {
        BlockOperator(self.0.iter().map(|b| b.scale(factor)).collect())
    }
    fn max_abs(&self) -> f64 {
        self.0.iter().map(ComplexMatrix::max_abs).fold(0.0, f64::max)
    }
}

/// One symmetry sector: its label, multiplicity and spectral data.
#[derive(Clone, Debug)]
pub struct SpectralBlock {
    pub label: usize,
    pub multiplicity: f64,
    pub system: SpectralSystem,
}

/// Input to [`BlockedSpectrum::new`].
#[derive(Clone, Debug)]
pub struct BlockSpec {
    pub label: usize,
    pub multiplicity: f64,
    pub hamiltonian: HermitianOperator,
}

/// A Gibbs ensemble whose Hamiltonian is block diagonal with repeated blocks.
#[derive(Clone, Debug)]
pub struct BlockedSpectrum {
    blocks: Vec<SpectralBlock>,
    beta: f64,
    log_partition: f64,
}

impl BlockedSpectrum {
    pub fn new(specs: Vec<BlockSpec>, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        if specs.is_empty() {
            return Err(LabError::Shape("a blocked spectrum needs at least one block".into()));
        }
        let pairs: Vec<_> = specs.iter().map(|s| eigendecompose(&s.hamiltonian)).collect::<Result<_>>()?;
        let shift = pairs
            .iter()
            .filter_map(|p| p.energies.first().copied())
            .fold(f64::INFINITY, f64::min);
        let zp: f64 = specs
            .iter()
            .zip(&pairs)
            .map(|(s, p)| s.multiplicity * p.energies.iter().map(|e| (-beta * (e - shift)).exp()).sum::<f64>())
            .sum();
        let blocks = specs
            .into_iter()
            .zip(pairs)
            .map(|(s, p)| SpectralBlock {
                label: s.label,
                multiplicity: s.multiplicity,
                system: SpectralSystem::from_block(s.hamiltonian, p, beta, s.multiplicity, shift, zp),
            })
            .collect();
        Ok(BlockedSpectrum { blocks, beta, log_partition: -beta * shift + zp.ln() })
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// Total Hilbert dimension including multiplicities.
    pub fn total_dim(&self) -> f64 {
        self.blocks.iter().map(|b| b.multiplicity * b.system.dim() as f64).sum()
    }

    /// Lowest energy over all sectors.
    pub fn ground_energy(&self) -> f64 {
        self.blocks.iter().map(|b| b.system.energies()[0]).fold(f64::INFINITY, f64::min)
    }

    fn check(&self, a: &BlockOperator) -> Result<()> {
        if a.0.len() != self.blocks.len() {
            return Err(LabError::Shape(format!("operator has {} blocks, system {}", a.0.len(), self.blocks.len())));
        }
        Ok(())
    }

    /// Each block of `a` in its own eigenbasis.
    pub fn to_eigenbasis(&self, a: &BlockOperator) -> Result<Vec<EigenbasisObservable>> {
        self.check(a)?;
        self.blocks.iter().zip(&a.0).map(|(b, m)| b.system.to_eigenbasis(m)).collect()
    }
}

impl ThermalSystem for BlockedSpectrum {
    type Op = BlockOperator;

    fn beta(&self) -> f64 {
        self.beta
    }
    fn log_partition(&self) -> f64 {
        self.log_partition
    }
    fn dim(&self) -> usize {
        self.total_dim().round() as usize
    }
    fn hamiltonian_op(&self) -> BlockOperator {
        BlockOperator(self.blocks.iter().map(|b| b.system.hamiltonian().matrix().clone()).collect())
    }
    fn identity_op(&self) -> BlockOperator {
        BlockOperator(self.blocks.iter().map(|b| ComplexMatrix::identity(b.system.dim())).collect())
    }
    fn gibbs_average(&self, a: &BlockOperator) -> Result<c64> {
        self.check(a)?;
        self.blocks.iter().zip(&a.0).try_fold(c64::new(0.0, 0.0), |acc, (b, m)| Ok(acc + b.system.gibbs_average(m)?))
    }
    fn bd_inner(&self, a: &BlockOperator, b: &BlockOperator) -> Result<c64> {
        self.check(a)?;
        self.check(b)?;
        self.blocks
            .iter()
            .zip(a.0.iter().zip(&b.0))
            .try_fold(c64::new(0.0, 0.0), |acc, (blk, (x, y))| Ok(acc + duhamel::bd_inner(&blk.system, x, y)?))
    }
    fn functional_series(&self, j: &BlockOperator, k_max: usize) -> Result<Vec<FunctionalValue>> {
        let ej = self.to_eigenbasis(j)?;
        let floor_ref = ej.iter().map(|e| e.elements().max_abs()).fold(0.0, f64::max);
        let mut total = vec![0.0; k_max + 1];
        for (blk, e) in self.blocks.iter().zip(&ej) {
            let part = duhamel::functional_series_with_floor(&blk.system, e, k_max, floor_ref)?;
            for (t, p) in total.iter_mut().zip(part) {
                *t += p.value;
            }
        }
        Ok(total.into_iter().enumerate().map(|(k, value)| FunctionalValue { k, value, route: Route::Spectral }).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{pauli, Axis};
    use crate::random::random_hermitian;
    use crate::spectral::decompose;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct_sum(blocks: &[(ComplexMatrix, usize)]) -> ComplexMatrix {
        let dim: usize = blocks.iter().map(|(m, r)| m.dim() * r).sum();
        let mut out = ComplexMatrix::zeros(dim);
        let mut off = 0;
        for (m, r) in blocks {
            for _ in 0..*r {
                for i in 0..m.dim() {
                    for j in 0..m.dim() {
                        out.set(off + i, off + j, m.get(i, j));
                    }
                }
                off += m.dim();
            }
        }
        out
    }

    #[test]
    fn blocked_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let parts = [(random_hermitian(3, &mut rng), 2usize), (random_hermitian(2, &mut rng), 3), (random_hermitian(4, &mut rng), 1)];
        let ops = [(random_hermitian(3, &mut rng), 2usize), (random_hermitian(2, &mut rng), 3), (random_hermitian(4, &mut rng), 1)];
        let beta = 1.3;
        let specs = parts
            .iter()
            .enumerate()
            .map(|(i, (m, r))| BlockSpec { label: i, multiplicity: *r as f64, hamiltonian: HermitianOperator::new(m.clone()).unwrap() })
            .collect();
        let blocked = BlockedSpectrum::new(specs, beta).unwrap();
        let full = decompose(&HermitianOperator::new(direct_sum(&parts)).unwrap(), beta).unwrap();
        assert_eq!(blocked.total_dim(), 16.0);
        assert!((blocked.log_partition() - full.log_partition()).abs() < 1e-12);

        let bop = BlockOperator(ops.iter().map(|(m, _)| m.clone()).collect());
        let fop = direct_sum(&ops);
        let ga = ThermalSystem::gibbs_average(&blocked, &bop).unwrap();
        assert!((ga - full.gibbs_average(&fop).unwrap()).norm() < 1e-12);
        let bd = ThermalSystem::bd_inner(&blocked, &bop, &bop).unwrap();
        assert!((bd - duhamel::bd_inner(&full, &fop, &fop).unwrap()).norm() < 1e-12);
        let fb = blocked.functional_series(&bop, 5).unwrap();
        let ff = full.functional_series(&fop, 5).unwrap();
        for (a, b) in fb.iter().zip(&ff) {
            assert!((a.value - b.value).abs() <= 1e-10 * b.value.max(1.0), "k={}", a.k);
        }
        let sb = blocked.sym_fluctuation(&bop).unwrap();
        assert!((sb - ThermalSystem::sym_fluctuation(&full, &fop).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn block_operator_shape_errors() {
        let a = BlockOperator(vec![pauli(Axis::X)]);
        let b = BlockOperator(vec![pauli(Axis::X), pauli(Axis::Z)]);
        assert!(a.matmul(&b).is_err());
        let sys = BlockedSpectrum::new(
            vec![BlockSpec { label: 0, multiplicity: 1.0, hamiltonian: HermitianOperator::new(pauli(Axis::Z)).unwrap() }],
            1.0,
        )
        .unwrap();
        assert!(sys.gibbs_average(&b).is_err());
        assert!(BlockedSpectrum::new(vec![], 1.0).is_err());
    }

    #[test]
    fn trait_commutator_matches_free_function() {
        let x = pauli(Axis::X);
        let y = pauli(Axis::Y);
        let c = Observable::commutator(&x, &y).unwrap();
        assert_eq!(c, commutator(&x, &y).unwrap());
    }
}
