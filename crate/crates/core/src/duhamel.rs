//! The Bogoliubov–Duhamel inner product and the functional family `F_k`.
//!
//! Two independent routes are provided for the inner product: the spectral
//! double sum over eigenpairs and Gauss–Legendre quadrature of the
//! imaginary-time integral with matrix exponentials. The spectral route also
//! yields `F_k(J;J)` for every `k`.
//!
//! Near-degenerate pairs are handled through the analytic limit of the Gibbs
//! weight kernel, since collective-spin spectra are massively degenerate.

use faer::c64;

use crate::error::{LabError, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::spectral::{check_beta, decompose, EigenbasisObservable, SpectralSystem};

/// Relative energy separation below which two levels are treated as degenerate.
pub const DEGENERACY_REL: f64 = 1e-8;

/// Largest `k` accepted by [`functional_f`].
pub const MAX_FUNCTIONAL_K: usize = 64;

/// Relative amplitude below which an eigenbasis element on a non-degenerate
/// pair is a numerical zero.
pub const AMPLITUDE_FLOOR: f64 = 1e-13;

/// Default Gauss–Legendre node count of the quadrature route.
pub const DEFAULT_NODES: usize = 32;
/// Node ceiling for the automatic doubling in [`bd_inner_cross_checked`].
pub const MAX_NODES: usize = 256;

/// `(e^{−βE_m} − e^{−βE_n}) / (β(E_n − E_m))`, with limit `e^{−βE}` at coincidence.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct DuhamelKernelValue(pub f64);

impl DuhamelKernelValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `(1 − e^{−x}) / x` for `x ≥ 0`, continuous at zero.
pub(crate) fn one_minus_exp_over_x(x: f64) -> f64 {
    if x < 1e-4 {
        // 1 − x/2 + x²/6 − x³/24
        1.0 - x * (0.5 - x * (1.0 / 6.0 - x / 24.0))
    } else {
        -(-x).exp_m1() / x
    }
}

pub(crate) fn is_degenerate(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEGENERACY_REL * 1f64.max(a.abs()).max(b.abs())
}

/// Gibbs weight kernel of the spectral representation.
pub fn duhamel_kernel(e_m: f64, e_n: f64, beta: f64) -> DuhamelKernelValue {
    let (lo, hi) = if e_m <= e_n { (e_m, e_n) } else { (e_n, e_m) };
    let base = (-beta * lo).exp();
    if is_degenerate(lo, hi) {
        // series of (1 − e^{−x})/x about the coincidence
        let x = beta * (hi - lo);
        return DuhamelKernelValue(base * (1.0 - x * (0.5 - x / 6.0)));
    }
    DuhamelKernelValue(base * one_minus_exp_over_x(beta * (hi - lo)))
}

/// Kernel between two levels in terms of their normalized weights:
/// `(w_m − w_n)/(β(E_n − E_m))`, which is `Z⁻¹·duhamel_kernel`.
#[inline]
fn weight_kernel(sys: &SpectralSystem, m: usize, n: usize) -> f64 {
    let (e, w, beta) = (sys.energies(), sys.weights(), sys.beta());
    let (lo, hi) = if e[m] <= e[n] { (m, n) } else { (n, m) };
    if m == n || is_degenerate(e[lo], e[hi]) {
        return 0.5 * (w[m] + w[n]);
    }
    w[lo] * one_minus_exp_over_x(beta * (e[hi] - e[lo]))
}

/// Spectral Bogoliubov–Duhamel inner product `(A;B)`.
///
/// Antilinear in `a`, linear in `b`; the diagonal and degenerate terms reduce
/// to `w_n conj(A_nn) B_nn`.
pub fn bd_inner(sys: &SpectralSystem, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<c64> {
    let ea = sys.to_eigenbasis(a)?;
    let eb = sys.to_eigenbasis(b)?;
    Ok(bd_inner_eigen(sys, &ea, &eb))
}

/// [`bd_inner`] on observables already in the eigenbasis.
pub fn bd_inner_eigen(sys: &SpectralSystem, a: &EigenbasisObservable, b: &EigenbasisObservable) -> c64 {
    let d = sys.dim();
    let mut acc = c64::new(0.0, 0.0);
    for n in 0..d {
        for m in 0..d {
            let amn = a.get(m, n);
            let bmn = b.get(m, n);
            if amn == c64::new(0.0, 0.0) || bmn == c64::new(0.0, 0.0) {
                continue;
            }
            acc += amn.conj() * bmn * weight_kernel(sys, m, n);
        }
    }
    acc
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let n = nodes;
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = 0.5 * (1.0 - x);
        xs[n - 1 - i] = 0.5 * (1.0 + x);
        ws[i] = 0.5 * w;
        ws[n - 1 - i] = 0.5 * w;
    }
    (xs, ws)
}

/// Quadrature of `Z⁻¹ ∫₀¹ dτ Tr[e^{−β(1−τ)H} A† e^{−βτH} B]`.
///
/// Independent of the spectral sum: exponentials are assembled as matrices in
/// the original basis and contracted by trace.
pub fn bd_inner_quadrature(
    h: &HermitianOperator,
    beta: f64,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    nodes: usize,
) -> Result<c64> {
    let sys = decompose(h, beta)?;
    bd_inner_quadrature_with(&sys, a, b, nodes)
}

/// [`bd_inner_quadrature`] reusing an existing decomposition for the
/// exponentials.
pub fn bd_inner_quadrature_with(sys: &SpectralSystem, a: &ComplexMatrix, b: &ComplexMatrix, nodes: usize) -> Result<c64> {
    check_beta(sys.beta())?;
    if nodes < 8 {
        return Err(LabError::Numeric(format!("quadrature needs at least 8 nodes, got {nodes}")));
    }
    if a.dim() != sys.dim() || b.dim() != sys.dim() {
        return Err(LabError::Shape("quadrature operands do not match the Hamiltonian".into()));
    }
    let beta = sys.beta();
    let a_dag = a.adjoint();
    // Z' = Σ e^{−β(E−E_ref)}
    let zp: f64 = sys.energies().iter().map(|e| (-beta * (e - sys.energy_shift())).exp()).sum();
    let (xs, ws) = gauss_legendre_unit(nodes);
    let mut acc = c64::new(0.0, 0.0);
    for (tau, w) in xs.iter().zip(&ws) {
        let left = sys.shifted_exponential(beta * (1.0 - tau));
        let right = sys.shifted_exponential(beta * tau);
        let prod = &(&(&left * &a_dag) * &right) * b;
        acc += prod.trace() * *w;
    }
    Ok(acc / zp)
}

/// Spectral value certified against quadrature, doubling the node count from
/// [`DEFAULT_NODES`] up to [`MAX_NODES`] until the routes agree to `tol`.
/// Returns `(spectral, quadrature, nodes_used)`.
pub fn bd_inner_cross_checked(
    sys: &SpectralSystem,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: f64,
) -> Result<(c64, c64, usize)> {
    let spectral = bd_inner(sys, a, b)?;
    let mut nodes = DEFAULT_NODES;
    loop {
        let quad = bd_inner_quadrature_with(sys, a, b, nodes)?;
        if (quad - spectral).norm() <= tol || nodes >= MAX_NODES {
            return Ok((spectral, quad, nodes));
        }
        nodes *= 2;
    }
}

/// Which computation produced a functional value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Spectral,
    CommutatorIdentity,
}

/// `F_k(J;J)` with provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalValue {
    pub k: usize,
    pub value: f64,
    pub route: Route,
}

/// `F_k(J;J) = Z⁻¹ Σ_{ml} |J_ml|² |e^{−βE_l} − (−1)^k e^{−βE_m}| (β|E_m − E_l|)^{k−1}`.
pub fn functional_f(sys: &SpectralSystem, j: &ComplexMatrix, k: usize) -> Result<FunctionalValue> {
    let ej = sys.to_eigenbasis(j)?;
    functional_f_eigen(sys, &ej, k)
}

/// [`functional_f`] on an observable already in the eigenbasis.
pub fn functional_f_eigen(sys: &SpectralSystem, j: &EigenbasisObservable, k: usize) -> Result<FunctionalValue> {
    Ok(functional_series_eigen(sys, j, k)?[k])
}

/// `F_0 … F_{k_max}` in one pass over the eigenbasis elements.
pub fn functional_series_eigen(sys: &SpectralSystem, j: &EigenbasisObservable, k_max: usize) -> Result<Vec<FunctionalValue>> {
    functional_series_with_floor(sys, j, k_max, j.elements().max_abs())
}

/// [`functional_series_eigen`] with the amplitude floor taken relative to
/// `floor_ref`, so that the blocks of a larger system share one floor.
pub(crate) fn functional_series_with_floor(
    sys: &SpectralSystem,
    j: &EigenbasisObservable,
    k_max: usize,
    floor_ref: f64,
) -> Result<Vec<FunctionalValue>> {
    if k_max > MAX_FUNCTIONAL_K {
        return Err(LabError::Numeric(format!("functional index {k_max} exceeds the cap {MAX_FUNCTIONAL_K}")));
    }
    let (e, w, beta) = (sys.energies(), sys.weights(), sys.beta());
    let d = sys.dim();
    if j.dim() != d {
        return Err(LabError::Shape(format!("observable dimension {} vs system {d}", j.dim())));
    }
    let spread = if d == 0 { 0.0 } else { beta * (e[d - 1] - e[0]) };
    if k_max >= 2 {
        let power = spread.powi(k_max as i32 - 1);
        if !power.is_finite() || power > 1e290 {
            return Err(LabError::Numeric(format!(
                "power factor overflows for k = {k_max} at beta*spread = {spread:.6e}"
            )));
        }
    }
    let floor_sq = (AMPLITUDE_FLOOR * floor_ref).powi(2);
    let mut sums = vec![0.0f64; k_max + 1];
    for l in 0..d {
        for m in 0..d {
            let amp = j.get(m, l).norm_sqr();
            if amp == 0.0 {
                continue;
            }
            let (lo, hi) = if e[m] <= e[l] { (m, l) } else { (l, m) };
            if m == l || is_degenerate(e[lo], e[hi]) {
                // k = 0 takes the kernel limit, k = 1 the 0⁰ = 1 convention,
                // higher k vanish.
                sums[0] += amp * 0.5 * (w[m] + w[l]);
                if k_max >= 1 {
                    sums[1] += amp * (w[m] + w[l]);
                }
                continue;
            }
            if amp <= floor_sq {
                continue;
            }
            let x = beta * (e[hi] - e[lo]);
            let minus = w[lo] * -(-x).exp_m1(); // |w_l − w_m|
            let plus = w[m] + w[l];
            sums[0] += amp * w[lo] * one_minus_exp_over_x(x);
            if k_max >= 1 {
                sums[1] += amp * plus;
            }
            let mut xp = 1.0;
            for (k, s) in sums.iter_mut().enumerate().skip(2) {
                xp *= x;
                *s += amp * if k % 2 == 0 { minus } else { plus } * xp;
            }
        }
    }
    Ok(sums
        .into_iter()
        .enumerate()
        .map(|(k, value)| FunctionalValue { k, value, route: Route::Spectral })
        .collect())
}

/// `½⟨A†A + AA†⟩ − |⟨A⟩|²`, with `⟨A⟩` taken from `A`.
pub fn sym_fluctuation(sys: &SpectralSystem, a: &ComplexMatrix) -> Result<f64> {
    let a_dag = a.adjoint();
    let sym = &a_dag.matmul(a)? + &a.matmul(&a_dag)?;
    let second = 0.5 * sys.gibbs_average(&sym)?.re;
    let mean = sys.gibbs_average(a)?;
    Ok(second - mean.norm_sqr())
}

/// `x coth x`, continuous at zero.
pub fn x_coth_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        1.0 + ax * ax / 3.0
    } else {
        ax / ax.tanh()
    }
}

/// `½⟨A†A + AA†⟩ − (A;A)` as `Σ' |A_mn|² K_mn (X coth X − 1)`, `X = β(E_m−E_n)/2`.
pub fn convexity_gap_coth(sys: &SpectralSystem, a: &EigenbasisObservable) -> f64 {
    let (e, beta) = (sys.energies(), sys.beta());
    let d = sys.dim();
    let mut acc = 0.0;
    for n in 0..d {
        for m in 0..d {
            if m == n || is_degenerate(e[m], e[n]) {
                continue;
            }
            let x = 0.5 * beta * (e[m] - e[n]);
            acc += a.get(m, n).norm_sqr() * weight_kernel(sys, m, n) * (x_coth_x(x) - 1.0);
        }
    }
    acc
}

/// The same gap as `Σ |A_mn|² ½(w_n + w_m)(1 − 1/(X coth X))`.
pub fn convexity_gap_tanh(sys: &SpectralSystem, a: &EigenbasisObservable) -> f64 {
    let (e, w, beta) = (sys.energies(), sys.weights(), sys.beta());
    let d = sys.dim();
    let mut acc = 0.0;
    for n in 0..d {
        for m in 0..d {
            if m == n || is_degenerate(e[m], e[n]) {
                continue;
            }
            let x = 0.5 * beta * (e[m] - e[n]);
            acc += a.get(m, n).norm_sqr() * 0.5 * (w[n] + w[m]) * (1.0 - 1.0 / x_coth_x(x));
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutator, pauli, Axis};
    use crate::random::{random_complex, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_level() -> SpectralSystem {
        decompose(&HermitianOperator::new(pauli(Axis::Z)).unwrap(), 1.0).unwrap()
    }

    fn random_system(dim: usize, beta: f64, rng: &mut ChaCha8Rng) -> SpectralSystem {
        decompose(&HermitianOperator::new(random_hermitian(dim, rng)).unwrap(), beta).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert!((duhamel_kernel(0.7, 0.7, 2.0).0 - (-1.4f64).exp()).abs() < 1e-15);
        assert!((duhamel_kernel(1.0, -1.0, 1.0).0 - 1f64.sinh()).abs() < 1e-14);
        assert!((duhamel_kernel(1.0, -1.0, 1.0).0 - 1.175201).abs() < 1e-6);
        assert_eq!(duhamel_kernel(0.3, 1.9, 0.8), duhamel_kernel(1.9, 0.3, 0.8));
    }

    #[test]
    fn kernel_is_continuous_across_the_switch() {
        for beta in [0.1f64, 1.0, 10.0] {
            for base in [-3.0f64, 0.0, 0.5, 2.0] {
                let scale = 1f64.max(base.abs());
                for frac in [0.999, 1.001] {
                    let gap = frac * DEGENERACY_REL * scale;
                    let x = beta * gap;
                    let reference = (-beta * base).exp() * (1.0 - x / 2.0 + x * x / 6.0);
                    let got = duhamel_kernel(base, base + gap, beta).0;
                    assert!(((got - reference) / reference).abs() < 1e-12, "beta={beta} base={base}");
                }
            }
        }
    }

    #[test]
    fn kernel_closed_form_away_from_degeneracy() {
        for (a, b, beta) in [(0.0f64, 1.0f64, 1.0f64), (-2.0, 0.5, 3.0), (4.0, 4.1, 0.2)] {
            let direct = ((-beta * a).exp() - (-beta * b).exp()) / (beta * (b - a));
            assert!((duhamel_kernel(a, b, beta).0 - direct).abs() < 1e-13 * direct);
        }
    }

    #[test]
    fn identity_inner_product_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random_system(6, 1.7, &mut rng);
        let id = ComplexMatrix::identity(6);
        assert!((bd_inner(&sys, &id, &id).unwrap() - c64::new(1.0, 0.0)).norm() < 1e-12);
        let q = bd_inner_quadrature_with(&sys, &id, &id, 8).unwrap();
        assert!((q - c64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn two_level_inner_product() {
        let sys = two_level();
        let sx = pauli(Axis::X);
        let v = bd_inner(&sys, &sx, &sx).unwrap();
        assert!((v.re - 1f64.tanh()).abs() < 1e-12 && v.im.abs() < 1e-15);
        let q = bd_inner_quadrature_with(&sys, &sx, &sx, 32).unwrap();
        assert!((q.re - 1f64.tanh()).abs() < 1e-12);
    }

    #[test]
    fn commuting_argument_reduces_to_plain_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sys = random_system(5, 0.9, &mut rng);
        let h = sys.hamiltonian().matrix().clone();
        let v = bd_inner(&sys, &h, &h).unwrap();
        let avg = sys.gibbs_average(&(&h * &h)).unwrap();
        assert!((v - avg).norm() < 1e-12);
        let q = bd_inner_quadrature_with(&sys, &h, &h, 16).unwrap();
        assert!((q - avg).norm() < 1e-12);
    }

    #[test]
    fn spectral_and_quadrature_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for beta in [0.1, 1.0, 10.0] {
            for _ in 0..5 {
                let sys = random_system(8, beta, &mut rng);
                let a = random_complex(8, &mut rng);
                let b = random_complex(8, &mut rng);
                let (s, q, _) = bd_inner_cross_checked(&sys, &a, &b, 1e-8).unwrap();
                assert!((s - q).norm() <= 1e-8, "beta={beta}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn product_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sys = random_system(6, 1.2, &mut rng);
        let a = random_complex(6, &mut rng);
        let b = random_complex(6, &mut rng);
        let ab = bd_inner(&sys, &a, &b).unwrap();
        let ba = bd_inner(&sys, &b, &a).unwrap();
        let swapped = bd_inner(&sys, &b.adjoint(), &a.adjoint()).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-10);
        assert!((ab - swapped).norm() < 1e-10);
        let aa = bd_inner(&sys, &a, &a).unwrap();
        assert!(aa.re >= 0.0 && aa.im.abs() < 1e-12);
    }

    #[test]
    fn commutator_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for beta in [0.3, 1.0, 4.0] {
            let sys = random_system(6, beta, &mut rng);
            let h = sys.hamiltonian().matrix().clone();
            let a = random_complex(6, &mut rng);
            let b = random_complex(6, &mut rng);
            let lhs = bd_inner(&sys, &a, &commutator(&h, &b).unwrap()).unwrap() * beta;
            let rhs = sys.gibbs_average(&commutator(&a.adjoint(), &b).unwrap()).unwrap();
            let scale = 1f64.max(rhs.norm());
            assert!((lhs - rhs).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn convexity_and_gap_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let sys = random_system(6, 2.0, &mut rng);
            let a = random_complex(6, &mut rng);
            let ea = sys.to_eigenbasis(&a).unwrap();
            let a_dag = a.adjoint();
            let sym = 0.5 * sys.gibbs_average(&(&(&a_dag * &a) + &(&a * &a_dag))).unwrap().re;
            let aa = bd_inner(&sys, &a, &a).unwrap().re;
            let gap = sym - aa;
            assert!(gap >= 0.0);
            assert!((convexity_gap_coth(&sys, &ea) - gap).abs() < 1e-10 * sym);
            assert!((convexity_gap_tanh(&sys, &ea) - gap).abs() < 1e-10 * sym);
        }
    }

    #[test]
    fn two_level_functionals() {
        let sys = two_level();
        let ej = sys.to_eigenbasis(&pauli(Axis::X)).unwrap();
        let f = functional_series_eigen(&sys, &ej, 4).unwrap();
        let t = 1f64.tanh();
        assert!((f[0].value - t).abs() < 1e-12);
        assert!((f[1].value - 2.0).abs() < 1e-12);
        assert!((f[2].value - 4.0 * t).abs() < 1e-12);
        assert!((f[3].value - 8.0).abs() < 1e-12);
        assert!((f[4].value - 16.0 * t).abs() < 1e-12);
        assert!((f[4].value - 12.18550).abs() < 1e-5);
        assert!(f.iter().all(|v| v.route == Route::Spectral));
    }

    #[test]
    fn low_functionals_match_averages() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let sys = random_system(6, 1.1, &mut rng);
        let j = random_complex(6, &mut rng);
        let f0 = functional_f(&sys, &j, 0).unwrap().value;
        let f1 = functional_f(&sys, &j, 1).unwrap().value;
        assert!((f0 - bd_inner(&sys, &j, &j).unwrap().re).abs() < 1e-12);
        let jd = j.adjoint();
        let sym = sys.gibbs_average(&(&(&j * &jd) + &(&jd * &j))).unwrap().re;
        assert!((f1 - sym).abs() < 1e-11);
    }

    #[test]
    fn functional_parity_under_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let sys = random_system(6, 0.8, &mut rng);
        let j = random_complex(6, &mut rng);
        let ej = sys.to_eigenbasis(&j).unwrap();
        let a = functional_series_eigen(&sys, &ej, 9).unwrap();
        let b = functional_series_eigen(&sys, &ej.adjoint(), 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.value - y.value).abs() <= 1e-12 * x.value.max(1.0));
        }
    }

    #[test]
    fn functional_overflow_is_reported() {
        let h = HermitianOperator::new(ComplexMatrix::from_diagonal(&[0.0, 1e7])).unwrap();
        let sys = decompose(&h, 100.0).unwrap();
        let ej = sys.to_eigenbasis(&pauli(Axis::X)).unwrap();
        let err = functional_series_eigen(&sys, &ej, 40).unwrap_err();
        assert!(matches!(err, LabError::Numeric(msg) if msg.contains("k = 40")));
        assert!(functional_series_eigen(&sys, &ej, MAX_FUNCTIONAL_K + 1).is_err());
    }

    #[test]
    fn symmetrized_fluctuation_values() {
        let sys = two_level();
        assert!(sym_fluctuation(&sys, &ComplexMatrix::identity(2)).unwrap().abs() < 1e-15);
        let h = pauli(Axis::Z);
        let v = sym_fluctuation(&sys, &h).unwrap();
        assert!((v - (1.0 - 1f64.tanh().powi(2))).abs() < 1e-14);
        assert!((v - 0.419974).abs() < 1e-6);
    }

    #[test]
    fn fluctuation_dominates_duhamel_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        for _ in 0..10 {
            let sys = random_system(6, 1.5, &mut rng);
            let a = random_complex(6, &mut rng);
            let mean = sys.gibbs_average(&a).unwrap();
            let delta = &a - &ComplexMatrix::identity(6).scale(mean);
            let fluct = sym_fluctuation(&sys, &a).unwrap();
            let dd = bd_inner(&sys, &delta, &delta).unwrap().re;
            assert!(fluct >= dd - 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre_unit(8);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // ∫₀¹ τ^15 = 1/16, exact for 8 nodes
        let v: f64 = x.iter().zip(&w).map(|(t, w)| w * t.powi(15)).sum();
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(bd_inner_quadrature_with(&two_level(), &pauli(Axis::X), &pauli(Axis::X), 4).is_err());
    }
}
