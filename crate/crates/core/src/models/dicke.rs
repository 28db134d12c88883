//! Single-mode Dicke model in the rotating wave approximation,
//! `H = T + ω b†b + V^{1/2} λ (A† b + A b†)`, `T = (ε/2) Σ σ^z`, `A = V⁻¹ Σ σ⁺`.
//!
//! The matter part is a collective spin, so the model splits into total-spin
//! sectors `(2S+1)·d` with multiplicities `d(N,S)`, `d` the Fock cutoff. The
//! full `2^N·d` form is kept for cross-checks at small `N`.

use faer::c64;

use super::{check_blocked_size, spin_sectors};
use crate::error::{LabError, Result};
use crate::operator::{boson_ladder, check_capacity, kron, sigma_plus, site_sum, spin_multiplet, spin_raising, Axis, ComplexMatrix, HermitianOperator, DEFAULT_MAX_DIM};
use crate::spectral::{decompose, SpectralSystem};
use crate::thermal::{BlockOperator, BlockSpec, BlockedSpectrum, Observable, ThermalSystem};

/// First cutoff of the adaptive policy.
pub const CUTOFF_START: usize = 16;
/// Largest base cutoff of the adaptive policy; the comparison runs at `+4`.
pub const CUTOFF_CAP: usize = 128;
/// Cutoff increment of the convergence comparison.
pub const CUTOFF_PROBE: usize = 4;
/// Largest change between the two cutoffs that counts as converged.
pub const CUTOFF_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DickeSpec {
    pub n_spins: usize,
    pub volume: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub lambda: f64,
    pub fock_cutoff: usize,
}

impl DickeSpec {
    /// `V = N` unless `volume` is given.
    pub fn new(n_spins: usize, volume: Option<f64>, epsilon: f64, omega: f64, lambda: f64, fock_cutoff: usize) -> Result<Self> {
        let spec = DickeSpec { n_spins, volume: volume.unwrap_or(n_spins as f64), epsilon, omega, lambda, fock_cutoff };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(LabError::Config("n_spins must be at least 1".into()));
        }
        if !(self.volume > 0.0 && self.volume.is_finite()) {
            return Err(LabError::Config(format!("volume must be positive, got {}", self.volume)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(LabError::Config(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.epsilon.is_finite() && self.lambda.is_finite()) {
            return Err(LabError::Config("epsilon and lambda must be finite".into()));
        }
        if self.fock_cutoff < 2 {
            return Err(LabError::Config(format!("fock_cutoff must be at least 2, got {}", self.fock_cutoff)));
        }
        Ok(())
    }

    pub fn with_cutoff(&self, fock_cutoff: usize) -> Self {
        DickeSpec { fock_cutoff, ..self.clone() }
    }

    pub fn with_size(&self, n_spins: usize, volume: Option<f64>) -> Self {
        DickeSpec { n_spins, volume: volume.unwrap_or(n_spins as f64), ..self.clone() }
    }

    fn sqrt_v(&self) -> f64 {
        self.volume.sqrt()
    }
}

/// `b`, `A`, `T` and `b†b` in one representation.
#[derive(Clone, Debug)]
pub struct DickeOps<O> {
    pub b: O,
    pub a: O,
    pub t: O,
    pub number: O,
    pub identity: O,
}

/// Operators on the `2^N ⊗ d` space, matter factor first.
pub fn full_dicke_ops(spec: &DickeSpec) -> Result<DickeOps<ComplexMatrix>> {
    spec.validate()?;
    let matter = 1usize.checked_shl(spec.n_spins as u32).unwrap_or(usize::MAX);
    check_capacity(matter.saturating_mul(spec.fock_cutoff), DEFAULT_MAX_DIM)?;
    let d = spec.fock_cutoff;
    let sz = site_sum(spec.n_spins, &crate::operator::pauli(Axis::Z), DEFAULT_MAX_DIM)?;
    let sp = site_sum(spec.n_spins, &sigma_plus(), DEFAULT_MAX_DIM)?;
    let ladder = boson_ladder(d)?;
    let id_m = ComplexMatrix::identity(matter);
    let id_b = ComplexMatrix::identity(d);
    let b = kron(&id_m, &ladder)?;
    Ok(DickeOps {
        number: kron(&id_m, &(&ladder.adjoint() * &ladder))?,
        b,
        a: kron(&sp.scale_real(1.0 / spec.volume), &id_b)?,
        t: kron(&sz.scale_real(0.5 * spec.epsilon), &id_b)?,
        identity: ComplexMatrix::identity(matter * d),
    })
}

/// Operators per total-spin sector, with the sector list `(2S, d(N,S))`.
pub fn blocked_dicke_ops(spec: &DickeSpec) -> Result<(Vec<(usize, u128)>, DickeOps<BlockOperator>)> {
    spec.validate()?;
    check_blocked_size(spec.n_spins)?;
    let sectors = spin_sectors(spec.n_spins);
    let d = spec.fock_cutoff;
    check_capacity((spec.n_spins + 1) * d, DEFAULT_MAX_DIM)?;
    let ladder = boson_ladder(d)?;
    let number = &ladder.adjoint() * &ladder;
    let id_b = ComplexMatrix::identity(d);
    let per = |f: &dyn Fn(usize) -> Result<ComplexMatrix>| -> Result<BlockOperator> {
        sectors.iter().map(|(ts, _)| f(*ts)).collect::<Result<_>>().map(BlockOperator)
    };
    Ok((
        sectors.clone(),
        DickeOps {
            b: per(&|ts| kron(&ComplexMatrix::identity(ts + 1), &ladder))?,
            a: per(&|ts| kron(&spin_raising(ts).scale_real(1.0 / spec.volume), &id_b))?,
            // (ε/2)Σσ^z = ε S^z
            t: per(&|ts| kron(&spin_multiplet(ts, Axis::Z).scale_real(spec.epsilon), &id_b))?,
            number: per(&|ts| kron(&ComplexMatrix::identity(ts + 1), &number))?,
            identity: per(&|ts| Ok(ComplexMatrix::identity((ts + 1) * d)))?,
        },
    ))
}

fn re(v: f64) -> c64 {
    c64::new(v, 0.0)
}

/// `T + ω b†b + V^{1/2} λ (A† b + A b†)`.
pub fn hamiltonian_from_ops<O: Observable>(spec: &DickeSpec, ops: &DickeOps<O>) -> Result<O> {
    let coupling = ops.a.adjoint().matmul(&ops.b)?.add(&ops.a.matmul(&ops.b.adjoint())?)?;
    ops.t.add(&ops.number.scale(re(spec.omega)))?.add(&coupling.scale(re(spec.sqrt_v() * spec.lambda)))
}

/// `ω b̃†b̃ + T − V(λ²/ω)(η A† + η* A − |η|²)` with `b̃ = b + V^{1/2}(λ/ω)η`.
pub fn approximating_from_ops<O: Observable>(spec: &DickeSpec, eta: c64, ops: &DickeOps<O>) -> Result<O> {
    let shift = eta * (spec.sqrt_v() * spec.lambda / spec.omega);
    let bt = ops.b.add(&ops.identity.scale(shift))?;
    let g = spec.volume * spec.lambda * spec.lambda / spec.omega;
    let linear = ops.a.adjoint().scale(eta).add(&ops.a.scale(eta.conj()))?.sub(&ops.identity.scale(re(eta.norm_sqr())))?;
    bt.adjoint().matmul(&bt)?.scale(re(spec.omega)).add(&ops.t)?.sub(&linear.scale(re(g)))
}

/// `H − V^{1/2}(ν* b + ν b†)`.
pub fn add_sources<O: Observable>(h: &O, spec: &DickeSpec, nu: c64, ops: &DickeOps<O>) -> Result<O> {
    let src = ops.b.scale(nu.conj()).add(&ops.b.adjoint().scale(nu))?;
    h.sub(&src.scale(re(spec.sqrt_v())))
}

/// The full-space Hamiltonian.
pub fn build_dicke(spec: &DickeSpec) -> Result<HermitianOperator> {
    HermitianOperator::new(hamiltonian_from_ops(spec, &full_dicke_ops(spec)?)?)
}

/// A decomposed Dicke system with its operators.
#[derive(Clone, Debug)]
pub struct DickeModel<S: ThermalSystem> {
    pub spec: DickeSpec,
    pub system: S,
    pub ops: DickeOps<S::Op>,
}

pub fn full_model(spec: &DickeSpec, beta: f64) -> Result<DickeModel<SpectralSystem>> {
    full_model_with_sources(spec, beta, c64::new(0.0, 0.0))
}

pub fn full_model_with_sources(spec: &DickeSpec, beta: f64, nu: c64) -> Result<DickeModel<SpectralSystem>> {
    let ops = full_dicke_ops(spec)?;
    let h = add_sources(&hamiltonian_from_ops(spec, &ops)?, spec, nu, &ops)?;
    let system = decompose(&HermitianOperator::new(h)?, beta)?;
    Ok(DickeModel { spec: spec.clone(), system, ops })
}

fn to_blocks(sectors: &[(usize, u128)], op: BlockOperator) -> Result<Vec<BlockSpec>> {
    sectors
        .iter()
        .zip(op.0)
        .map(|((ts, d), m)| Ok(BlockSpec { label: *ts, multiplicity: *d as f64, hamiltonian: HermitianOperator::new(m)? }))
        .collect()
}

pub fn blocked_model(spec: &DickeSpec, beta: f64) -> Result<DickeModel<BlockedSpectrum>> {
    blocked_model_with_sources(spec, beta, c64::new(0.0, 0.0))
}

pub fn blocked_model_with_sources(spec: &DickeSpec, beta: f64, nu: c64) -> Result<DickeModel<BlockedSpectrum>> {
    let (sectors, ops) = blocked_dicke_ops(spec)?;
    let h = add_sources(&hamiltonian_from_ops(spec, &ops)?, spec, nu, &ops)?;
    let system = BlockedSpectrum::new(to_blocks(&sectors, h)?, beta)?;
    Ok(DickeModel { spec: spec.clone(), system, ops })
}

/// Closed forms of the functionals of `V^{-1/2} b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BosonFunctionals {
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
}

/// `F_2 = βω/V`;
/// `F_3 = (βω)²[V⁻¹⟨b†b + bb†⟩ + 2V^{-1/2}(λ/ω)⟨b†A + bA†⟩ + (λ/ω)²⟨A†A + AA†⟩]`;
/// `F_4 = (βω)³/V[1 + 2λ²(2ω − ε)/(εω³V)⟨T⟩ − 2λ³/(ω³V^{1/2})⟨b†A⟩]`.
///
/// The `F_4` form follows from `[A†, A] = −2T/(εV²)`, which is what the
/// operators above satisfy. It requires `ε ≠ 0`.
pub fn boson_functionals_closed_form<S: ThermalSystem>(model: &DickeModel<S>) -> Result<BosonFunctionals> {
    let s = &model.spec;
    let o = &model.ops;
    let sys = &model.system;
    let beta = sys.beta();
    let (w, l, v, e) = (s.omega, s.lambda, s.volume, s.epsilon);
    let avg = |x: &S::Op| -> Result<c64> { sys.gibbs_average(x) };
    let bb = avg(&o.b.adjoint().anticommutator(&o.b)?)?.re;
    let cross = avg(&o.b.adjoint().matmul(&o.a)?.add(&o.b.matmul(&o.a.adjoint())?)?)?.re;
    let aa = avg(&o.a.adjoint().anticommutator(&o.a)?)?.re;
    let t = avg(&o.t)?.re;
    let bda = avg(&o.b.adjoint().matmul(&o.a)?)?.re;
    let bw = beta * w;
    Ok(BosonFunctionals {
        f2: bw / v,
        f3: bw * bw * (bb / v + 2.0 * (l / w) * cross / v.sqrt() + (l / w).powi(2) * aa),
        f4: bw.powi(3) / v
            * (1.0 + 2.0 * l * l * (2.0 * w - e) / (e * w.powi(3) * v) * t - 2.0 * l.powi(3) / (w.powi(3) * v.sqrt()) * bda),
    })
}

/// `V^{-1/2} b`.
pub fn scaled_boson<O: Observable>(spec: &DickeSpec, ops: &DickeOps<O>) -> O {
    ops.b.scale(re(1.0 / spec.sqrt_v()))
}

/// How the Fock cutoff is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutoffPolicy {
    /// `d = 16, 32, 64, 128` until `d` and `d + 4` agree.
    Adaptive,
    /// One fixed `d`, still compared with `d + 4`.
    Fixed(usize),
}

/// A result computed at a resolved cutoff.
#[derive(Clone, Debug)]
pub struct Resolved<T> {
    pub value: T,
    /// Cutoff at which `value` was computed.
    pub cutoff: usize,
    /// Largest change of a reported quantity between `cutoff − 4` and `cutoff`.
    pub movement: f64,
    pub converged: bool,
}

/// Runs `eval` at `d` and `d + 4`; `eval` returns its payload and the list of
/// quantities used for the comparison. Movement is measured relative to
/// `max(1, |q|)`.
pub fn resolve_cutoff<T>(
    spec: &DickeSpec,
    policy: CutoffPolicy,
    mut eval: impl FnMut(&DickeSpec) -> Result<(T, Vec<f64>)>,
) -> Result<Resolved<T>> {
    let bases: Vec<usize> = match policy {
        CutoffPolicy::Adaptive => std::iter::successors(Some(CUTOFF_START), |d| Some(d * 2)).take_while(|d| *d <= CUTOFF_CAP).collect(),
        CutoffPolicy::Fixed(d) => vec![d],
    };
    let mut last = None;
    for d in bases {
        let (_, lo) = eval(&spec.with_cutoff(d))?;
        let (value, hi) = eval(&spec.with_cutoff(d + CUTOFF_PROBE))?;
        if lo.len() != hi.len() {
            return Err(LabError::Shape("cutoff probes returned different quantity counts".into()));
        }
        let movement = lo.iter().zip(&hi).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max);
        let converged = movement < CUTOFF_TOL;
        let res = Resolved { value, cutoff: d + CUTOFF_PROBE, movement, converged };
        if converged {
            return Ok(res);
        }
        last = Some(res);
    }
    last.ok_or_else(|| LabError::Config("empty cutoff schedule".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::build_system_chain;
    use crate::operator::commutator;

    fn spec(n: usize, lambda: f64, d: usize) -> DickeSpec {
        DickeSpec::new(n, None, 1.0, 1.0, lambda, d).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DickeSpec::new(2, None, 1.0, 0.0, 0.3, 8).is_err());
        assert!(DickeSpec::new(2, None, 1.0, 1.0, 0.3, 1).is_err());
        assert!(DickeSpec::new(2, Some(-1.0), 1.0, 1.0, 0.3, 8).is_err());
        assert_eq!(DickeSpec::new(3, None, 1.0, 1.0, 0.3, 8).unwrap().volume, 3.0);
    }

    #[test]
    fn matter_commutators() {
        let s = spec(2, 0.3, 2);
        let o = full_dicke_ops(&s).unwrap();
        let ta = commutator(&o.t, &o.a).unwrap();
        assert!(ta.max_abs_diff(&o.a.scale_real(s.epsilon)) < 1e-15);
        // measured sign: [A†, A] = −2T/(εV²)
        let ada = commutator(&o.a.adjoint(), &o.a).unwrap();
        let expected = o.t.scale_real(-2.0 / (s.epsilon * s.volume * s.volume));
        assert!(ada.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn boson_commutator_with_h() {
        let s = spec(2, 0.3, 6);
        let o = full_dicke_ops(&s).unwrap();
        let h = hamiltonian_from_ops(&s, &o).unwrap();
        let lhs = commutator(&h, &o.b).unwrap();
        let rhs = (&o.b.scale_real(s.omega) + &o.a.scale_real(s.sqrt_v() * s.lambda)).scale_real(-1.0);
        // compare on boson levels below the cutoff boundary
        let d = s.fock_cutoff;
        for i in 0..lhs.dim() {
            for j in 0..lhs.dim() {
                if i % d < d - 1 && j % d < d - 1 {
                    assert!((lhs.get(i, j) - rhs.get(i, j)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn decoupled_spectrum_is_a_direct_sum() {
        let s = spec(2, 0.0, 4);
        let sys = decompose(&build_dicke(&s).unwrap(), 1.0).unwrap();
        let mut expected: Vec<f64> = [-1.0, 0.0, 0.0, 1.0].iter().flat_map(|m| (0..4).map(move |n| m + n as f64)).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in sys.energies().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn blocked_matches_full() {
        for n in [1, 2, 3] {
            let s = spec(n, 0.7, 10);
            let full = full_model(&s, 1.2).unwrap();
            let blk = blocked_model(&s, 1.2).unwrap();
            assert!((full.system.log_partition() - blk.system.log_partition()).abs() < 1e-10);
            let jf = scaled_boson(&s, &full.ops);
            let jb = scaled_boson(&s, &blk.ops);
            let ff = full.system.functional_series(&jf, 5).unwrap();
            let fb = blk.system.functional_series(&jb, 5).unwrap();
            for (a, b) in ff.iter().zip(&fb) {
                assert!((a.value - b.value).abs() < 1e-10 * a.value.max(1.0), "N={n} k={}", a.k);
            }
            let af = full.system.bd_inner(&full.ops.a, &full.ops.a).unwrap();
            let ab = blk.system.bd_inner(&blk.ops.a, &blk.ops.a).unwrap();
            assert!((af - ab).norm() < 1e-12);
        }
    }

    #[test]
    fn chain_closed_forms() {
        let s = spec(2, 0.4, 24);
        let o = full_dicke_ops(&s).unwrap();
        let h = hamiltonian_from_ops(&s, &o).unwrap();
        let j = o.b.scale_real(1.0 / s.sqrt_v());
        let chain = crate::chains::build_chain(&h, &j, 2).unwrap();
        let r2 = &(&o.b.scale_real(s.omega.powi(2) / s.sqrt_v()) + &o.a.scale_real(s.lambda * (s.omega - s.epsilon)))
            + &o.b.matmul(&o.t).unwrap().scale_real(2.0 * s.lambda.powi(2) / (s.epsilon * s.volume.powf(1.5)));
        let d = s.fock_cutoff;
        let got = chain.link(2).unwrap();
        for i in 0..got.dim() {
            for k in 0..got.dim() {
                if i % d < d - 2 && k % d < d - 2 {
                    assert!((got.get(i, k) - r2.get(i, k)).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn functional_closed_forms_after_convergence() {
        for lambda in [0.2, 1.0] {
            let s = spec(2, lambda, 40);
            let m = blocked_model(&s, 1.0).unwrap();
            let j = scaled_boson(&s, &m.ops);
            let f = m.system.functional_series(&j, 4).unwrap();
            let c = boson_functionals_closed_form(&m).unwrap();
            assert!((f[2].value - c.f2).abs() < 1e-9, "lambda={lambda}");
            assert!((f[3].value - c.f3).abs() < 1e-9 * c.f3, "lambda={lambda}");
            assert!((f[4].value - c.f4).abs() < 1e-8 * c.f4, "lambda={lambda}: {} vs {}", f[4].value, c.f4);
            let chain = build_system_chain(&m.system, &j, 2).unwrap();
            let odd = crate::chains::f_odd_via_identity(&m.system, &chain, 1).unwrap().value;
            assert!((odd - c.f3).abs() < 1e-9 * c.f3);
        }
    }

    #[test]
    fn approximating_at_zero_coupling_is_the_model() {
        let s = spec(2, 0.0, 8);
        let o = full_dicke_ops(&s).unwrap();
        let h = hamiltonian_from_ops(&s, &o).unwrap();
        let h0 = approximating_from_ops(&s, c64::new(0.4, -0.2), &o).unwrap();
        assert!(h.max_abs_diff(&h0) < 1e-14);
    }

    #[test]
    fn sources_vanish_at_zero() {
        let s = spec(1, 0.5, 5);
        let o = full_dicke_ops(&s).unwrap();
        let h = hamiltonian_from_ops(&s, &o).unwrap();
        assert_eq!(add_sources(&h, &s, c64::new(0.0, 0.0), &o).unwrap(), h);
        assert!(HermitianOperator::new(add_sources(&h, &s, c64::new(0.2, 0.3), &o).unwrap()).is_ok());
    }

    #[test]
    fn cutoff_policy() {
        let s = spec(2, 0.3, CUTOFF_START);
        let r = resolve_cutoff(&s, CutoffPolicy::Adaptive, |sp| {
            let m = blocked_model(sp, 1.0)?;
            let n = ThermalSystem::gibbs_average(&m.system, &m.ops.number)?.re;
            Ok((n, vec![n]))
        })
        .unwrap();
        // e^{−16} occupation at the top level is too coarse for 1e-8; one doubling suffices
        assert!(r.converged && r.cutoff == 2 * CUTOFF_START + CUTOFF_PROBE, "{r:?}");
        let r = resolve_cutoff(&s, CutoffPolicy::Fixed(2), |sp| {
            let m = blocked_model(sp, 1.0)?;
            let n = ThermalSystem::gibbs_average(&m.system, &m.ops.number)?.re;
            Ok((n, vec![n]))
        })
        .unwrap();
        assert!(!r.converged);
    }
}
