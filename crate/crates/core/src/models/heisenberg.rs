//! `βH = −N g_x (J^x)² − N g_y (J^y)² − N h·J` with `J^α = N⁻¹ Σ_i σ_i^α`.
//!
//! The Hamiltonian is already multiplied by `β`, so every thermal call on this
//! model uses `β = 1` and temperature lives in the couplings. It commutes with
//! the total spin, which gives the blocked form: within a spin-`S` sector
//! `J^α = (2/N) S^α`, repeated `d(N,S)` times.

use faer::c64;

use super::{check_blocked_size, spin_sectors, Representation};
use crate::error::{LabError, Result};
use crate::operator::{collective_spin, spin_multiplet, Axis, ComplexMatrix, HermitianOperator, I};
use crate::spectral::{decompose, SpectralSystem};
use crate::thermal::{BlockOperator, BlockSpec, BlockedSpectrum, Observable, ThermalSystem};

/// Inverse temperature of every thermal call on this model.
pub const HEISENBERG_BETA: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergSpec {
    pub n_spins: usize,
    pub g_x: f64,
    pub g_y: f64,
    pub h: [f64; 3],
    pub representation: Representation,
}

impl HeisenbergSpec {
    pub fn new(n_spins: usize, g_x: f64, g_y: f64, h: [f64; 3], representation: Representation) -> Result<Self> {
        let spec = HeisenbergSpec { n_spins, g_x, g_y, h, representation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(LabError::Config("n_spins must be at least 1".into()));
        }
        if !(self.g_x > 0.0 && self.g_y > 0.0) {
            return Err(LabError::Config(format!("couplings must be positive, got g_x = {}, g_y = {}", self.g_x, self.g_y)));
        }
        if self.h.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Config("field components must be finite".into()));
        }
        Ok(())
    }

    pub fn size(&self) -> f64 {
        self.n_spins as f64
    }

    pub fn with_size(&self, n_spins: usize) -> Self {
        HeisenbergSpec { n_spins, ..self.clone() }
    }

    /// Sources `ν` on the two channels `J^x`, `J^y`. Both channels are
    /// self-adjoint, so `−N(ν A† + ν* A) = −2N Re(ν) A` and the sources are a
    /// field shift.
    pub fn with_sources(&self, nu: &[c64]) -> Result<Self> {
        check_channels(nu)?;
        let mut out = self.clone();
        out.h[0] += 2.0 * nu[0].re;
        out.h[1] += 2.0 * nu[1].re;
        Ok(out)
    }
}

/// Channel count of the separable interaction: `(J^x, g_x)` and `(J^y, g_y)`.
pub const CHANNELS: usize = 2;

fn check_channels(p: &[c64]) -> Result<()> {
    if p.len() != CHANNELS {
        return Err(LabError::Shape(format!("expected {CHANNELS} channel parameters, got {}", p.len())));
    }
    Ok(())
}

/// `J^x, J^y, J^z` in one representation.
#[derive(Clone, Debug)]
pub struct SpinOps<O> {
    pub x: O,
    pub y: O,
    pub z: O,
}

impl<O> SpinOps<O> {
    pub fn get(&self, axis: Axis) -> &O {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

/// Collective spins on the `2^N` product space.
pub fn full_spin_ops(n_spins: usize) -> Result<SpinOps<ComplexMatrix>> {
    Ok(SpinOps {
        x: collective_spin(n_spins, Axis::X)?.into_matrix(),
        y: collective_spin(n_spins, Axis::Y)?.into_matrix(),
        z: collective_spin(n_spins, Axis::Z)?.into_matrix(),
    })
}

/// Collective spins per total-spin sector, with the sector list `(2S, d(N,S))`.
pub fn blocked_spin_ops(n_spins: usize) -> Result<(Vec<(usize, u128)>, SpinOps<BlockOperator>)> {
    check_blocked_size(n_spins)?;
    let sectors = spin_sectors(n_spins);
    let scale = 2.0 / n_spins as f64;
    let axis = |a| BlockOperator(sectors.iter().map(|(ts, _)| spin_multiplet(*ts, a).scale_real(scale)).collect());
    let ops = SpinOps { x: axis(Axis::X), y: axis(Axis::Y), z: axis(Axis::Z) };
    Ok((sectors, ops))
}

/// `−N g_x (J^x)² − N g_y (J^y)² − N h·J` in any representation.
pub fn hamiltonian_from_spins<O: Observable>(n: f64, g_x: f64, g_y: f64, h: [f64; 3], j: &SpinOps<O>) -> Result<O> {
    let c = |v: f64| c64::new(v, 0.0);
    let xx = j.x.matmul(&j.x)?.scale(c(-n * g_x));
    let yy = j.y.matmul(&j.y)?.scale(c(-n * g_y));
    xx.add(&yy)?
        .sub(&j.x.scale(c(n * h[0])))?
        .sub(&j.y.scale(c(n * h[1])))?
        .sub(&j.z.scale(c(n * h[2])))
}

/// `βH₀(a) = −N h·J − N Σ_s g_s (a_s A_s + a_s* A_s − |a_s|²)` with `A_1 = J^x`, `A_2 = J^y`.
pub fn approximating_from_spins<O: Observable>(spec: &HeisenbergSpec, params: &[c64], j: &SpinOps<O>, identity: &O) -> Result<O> {
    check_channels(params)?;
    let n = spec.size();
    let c = |v: f64| c64::new(v, 0.0);
    let mut out = j.x.scale(c(-n * spec.h[0])).sub(&j.y.scale(c(n * spec.h[1])))?.sub(&j.z.scale(c(n * spec.h[2])))?;
    for (g, a, op) in [(spec.g_x, params[0], &j.x), (spec.g_y, params[1], &j.y)] {
        let linear = op.scale(c(-n * g * 2.0 * a.re));
        out = out.add(&linear)?.add(&identity.scale(c(n * g * a.norm_sqr())))?;
    }
    Ok(out)
}

/// `H − N Σ_s (ν_s A_s† + ν_s* A_s)` for the two self-adjoint channels.
pub fn add_sources<O: Observable>(h: &O, n_spins: usize, nu: &[c64], j: &SpinOps<O>) -> Result<O> {
    check_channels(nu)?;
    let n = n_spins as f64;
    let mut out = h.clone();
    for (v, op) in [(nu[0], &j.x), (nu[1], &j.y)] {
        // A† = A
        out = out.sub(&op.scale(c64::new(n * 2.0 * v.re, 0.0)))?;
    }
    Ok(out)
}

/// The Hamiltonian in the requested representation.
#[derive(Clone, Debug)]
pub enum HeisenbergHamiltonian {
    Full(HermitianOperator),
    Blocked(Vec<BlockSpec>),
}

fn into_blocks(sectors: &[(usize, u128)], op: BlockOperator) -> Result<Vec<BlockSpec>> {
    sectors
        .iter()
        .zip(op.0)
        .map(|((ts, d), m)| Ok(BlockSpec { label: *ts, multiplicity: *d as f64, hamiltonian: HermitianOperator::new(m)? }))
        .collect()
}

pub fn build_heisenberg(spec: &HeisenbergSpec) -> Result<HeisenbergHamiltonian> {
    spec.validate()?;
    let n = spec.size();
    match spec.representation {
        Representation::Full => {
            let j = full_spin_ops(spec.n_spins)?;
            let h = hamiltonian_from_spins(n, spec.g_x, spec.g_y, spec.h, &j)?;
            Ok(HeisenbergHamiltonian::Full(HermitianOperator::new(h)?))
        }
        Representation::Blocked => {
            let (sectors, j) = blocked_spin_ops(spec.n_spins)?;
            let h = hamiltonian_from_spins(n, spec.g_x, spec.g_y, spec.h, &j)?;
            Ok(HeisenbergHamiltonian::Blocked(into_blocks(&sectors, h)?))
        }
    }
}

/// `βH₀(a)` in the requested representation.
pub fn build_approximating(spec: &HeisenbergSpec, params: &[c64]) -> Result<HeisenbergHamiltonian> {
    match spec.representation {
        Representation::Full => {
            let j = full_spin_ops(spec.n_spins)?;
            let id = ComplexMatrix::identity(j.x.dim());
            Ok(HeisenbergHamiltonian::Full(HermitianOperator::new(approximating_from_spins(spec, params, &j, &id)?)?))
        }
        Representation::Blocked => {
            let (sectors, j) = blocked_spin_ops(spec.n_spins)?;
            let id = BlockOperator(j.x.0.iter().map(|m| ComplexMatrix::identity(m.dim())).collect());
            Ok(HeisenbergHamiltonian::Blocked(into_blocks(&sectors, approximating_from_spins(spec, params, &j, &id)?)?))
        }
    }
}

/// A decomposed Heisenberg system with its collective spins.
#[derive(Clone, Debug)]
pub struct HeisenbergModel<S: ThermalSystem> {
    pub spec: HeisenbergSpec,
    pub system: S,
    pub spins: SpinOps<S::Op>,
}

pub fn full_model(spec: &HeisenbergSpec) -> Result<HeisenbergModel<SpectralSystem>> {
    spec.validate()?;
    let spins = full_spin_ops(spec.n_spins)?;
    let h = hamiltonian_from_spins(spec.size(), spec.g_x, spec.g_y, spec.h, &spins)?;
    let system = decompose(&HermitianOperator::new(h)?, HEISENBERG_BETA)?;
    Ok(HeisenbergModel { spec: HeisenbergSpec { representation: Representation::Full, ..spec.clone() }, system, spins })
}

pub fn blocked_model(spec: &HeisenbergSpec) -> Result<HeisenbergModel<BlockedSpectrum>> {
    spec.validate()?;
    let (sectors, spins) = blocked_spin_ops(spec.n_spins)?;
    let h = hamiltonian_from_spins(spec.size(), spec.g_x, spec.g_y, spec.h, &spins)?;
    let system = BlockedSpectrum::new(into_blocks(&sectors, h)?, HEISENBERG_BETA)?;
    Ok(HeisenbergModel { spec: HeisenbergSpec { representation: Representation::Blocked, ..spec.clone() }, system, spins })
}

/// `2i[g_y{J^y, J^z} + h_y J^z − h_z J^y]`.
pub fn r1_closed_form<O: Observable>(spec: &HeisenbergSpec, j: &SpinOps<O>) -> Result<O> {
    let c = |v: f64| c64::new(v, 0.0);
    let inner = j.y.anticommutator(&j.z)?.scale(c(spec.g_y)).add(&j.z.scale(c(spec.h[1])))?.sub(&j.y.scale(c(spec.h[2])))?;
    Ok(inner.scale(I * 2.0))
}

/// `[βH, R_1(J^x)]` written out in anticommutators:
/// `4[g_y(g_y−g_x){J^y,{J^x,J^y}} + g_xg_y{{J^x,J^z},J^z} + h_y(2g_y−g_x){J^x,J^y}
///   − h_z(g_x+g_y){J^x,J^z} + 2g_yh_x((J^z)² − (J^y)²) + (h_y²+h_z²)J^x − h_xh_yJ^y − h_xh_zJ^z]`.
pub fn r2_closed_form<O: Observable>(spec: &HeisenbergSpec, j: &SpinOps<O>) -> Result<O> {
    let (gx, gy) = (spec.g_x, spec.g_y);
    let [hx, hy, hz] = spec.h;
    let c = |v: f64| c64::new(v, 0.0);
    let xy = j.x.anticommutator(&j.y)?;
    let xz = j.x.anticommutator(&j.z)?;
    let terms = [
        (gy * (gy - gx), j.y.anticommutator(&xy)?),
        (gx * gy, xz.anticommutator(&j.z)?),
        (hy * (2.0 * gy - gx), xy),
        (-hz * (gx + gy), xz),
        (2.0 * gy * hx, j.z.matmul(&j.z)?.sub(&j.y.matmul(&j.y)?)?),
        (hy * hy + hz * hz, j.x.clone()),
        (-hx * hy, j.y.clone()),
        (-hx * hz, j.z.clone()),
    ];
    let mut iter = terms.into_iter();
    let (c0, t0) = iter.next().expect("nonempty");
    let mut out = t0.scale(c(4.0 * c0));
    for (coef, t) in iter {
        out = out.add(&t.scale(c(4.0 * coef)))?;
    }
    Ok(out)
}

/// `(4/N){2g_y[⟨(J^y)²⟩ − ⟨(J^z)²⟩] + h_y⟨J^y⟩ + h_z⟨J^z⟩}`.
pub fn f2_closed_form<S: ThermalSystem>(model: &HeisenbergModel<S>) -> Result<f64> {
    let sys = &model.system;
    let j = &model.spins;
    let avg = |o: &S::Op| -> Result<f64> { Ok(sys.gibbs_average(o)?.re) };
    let yy = avg(&j.y.matmul(&j.y)?)?;
    let zz = avg(&j.z.matmul(&j.z)?)?;
    let s = &model.spec;
    Ok(4.0 / s.size() * (2.0 * s.g_y * (yy - zz) + s.h[1] * avg(&j.y)? + s.h[2] * avg(&j.z)?))
}

/// `8⟨[g_y{J^y,J^z} + h_y J^z − h_z J^y]²⟩`.
pub fn f3_closed_form<S: ThermalSystem>(model: &HeisenbergModel<S>) -> Result<f64> {
    let j = &model.spins;
    let s = &model.spec;
    let c = |v: f64| c64::new(v, 0.0);
    let inner = j.y.anticommutator(&j.z)?.scale(c(s.g_y)).add(&j.z.scale(c(s.h[1])))?.sub(&j.y.scale(c(s.h[2])))?;
    Ok(8.0 * model.system.gibbs_average(&inner.matmul(&inner)?)?.re)
}
