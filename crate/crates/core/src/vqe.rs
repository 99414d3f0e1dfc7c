//! Variational ground- and excited-state training of the layered ansatz.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ansatz, expectation, run_circuit, run_shifted, AnsatzLayout, Circuit, ParameterSet, StateVector, DEGENERATE_METRIC};
use crate::error::{Error, Result};
use crate::io::to_csv;
use crate::linalg::{gershgorin_bounds, hermitian_deviation};
use crate::scalar::{cabs, wrap_two_pi, CMatrix, CVector, Real};

/// Largest tolerated imaginary part of a trained energy.
pub const IMAG_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig<T> {
    pub learning_rate: T,
    pub max_iterations: usize,
    pub energy_tolerance: T,
    pub seed: u64,
    /// Per-iteration multipliers on the learning rate; the last entry is
    /// reused once the sequence runs out.
    pub schedule: Option<Vec<T>>,
    /// Return the best state at the iteration cap without flagging it as a
    /// failure.
    pub relaxed: bool,
}

impl<T: Real> Default for TrainingConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::lit(0.1),
            max_iterations: 200,
            energy_tolerance: T::lit(1e-8),
            seed: 0,
            schedule: None,
            relaxed: false,
        }
    }
}

impl<T: Real> TrainingConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > T::zero()) {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.energy_tolerance > T::zero()) {
            return Err(Error::InvalidConfig("energy tolerance must be positive".into()));
        }
        Ok(())
    }

    fn eta(&self, t: usize) -> T {
        let m = match &self.schedule {
            Some(s) if !s.is_empty() => s[t.min(s.len() - 1)],
            _ => T::one(),
        };
        self.learning_rate * m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace<T> {
    pub records: Vec<TraceRecord>,
    #[serde(skip)]
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> TrainingTrace<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn push(&mut self, iteration: usize, energy: T, grad_norm: T, eta: T) {
        self.records.push(TraceRecord {
            iteration,
            energy: energy.to_f64_lossy(),
            grad_norm: grad_norm.to_f64_lossy(),
            eta: eta.to_f64_lossy(),
        });
    }

    /// CSV with columns `iteration, energy, grad_norm, eta`.
    pub fn to_csv(&self) -> Result<String> {
        to_csv(&self.records)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingStatus {
    Converged,
    Unconverged,
    Relaxed,
}

#[derive(Debug, Clone)]
pub struct TrainingResult<T: Real> {
    /// Lowest energy seen over all iterations.
    pub energy: T,
    pub params: ParameterSet<T>,
    pub state: StateVector<T>,
    pub trace: TrainingTrace<T>,
    pub status: TrainingStatus,
}

fn check_hermitian<T: Real>(h: &CMatrix<T>) -> Result<()> {
    let dev = hermitian_deviation(h);
    let scale = h.iter().fold(T::one(), |a, z| a.max(cabs(*z)));
    if dev > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian(dev.to_f64_lossy()));
    }
    Ok(())
}

fn quotient_parts<T: Real>(s: &StateVector<T>, h: &CMatrix<T>, n: &CMatrix<T>) -> Result<(Complex<T>, Complex<T>)> {
    Ok((expectation(s, h)?, expectation(s, n)?))
}

fn energy_of<T: Real>(s: &StateVector<T>, h: &CMatrix<T>, n: &CMatrix<T>) -> Result<T> {
    let (num, den) = quotient_parts(s, h, n)?;
    if cabs(den) < T::lit(DEGENERATE_METRIC) {
        return Err(Error::DegenerateMetric(cabs(den).to_f64_lossy()));
    }
    let e = num / den;
    if e.im.abs() > T::lit(IMAG_TOLERANCE) * T::one().max(e.re.abs()) {
        return Err(Error::NotHermitian(e.im.to_f64_lossy()));
    }
    Ok(e.re)
}

/// Real Rayleigh quotient of the ansatz state.
pub fn loss<T: Real>(p: &ParameterSet<T>, h: &CMatrix<T>, n: &CMatrix<T>, ansatz: &Circuit<T>) -> Result<T> {
    check_hermitian(h)?;
    check_hermitian(n)?;
    energy_of(&run_circuit(ansatz, p)?, h, n)
}

/// Parameter-shift gradient of [`loss`]; numerator and denominator are
/// shift-differentiated separately and combined with the quotient rule.
pub fn parameter_shift_grad<T: Real>(p: &ParameterSet<T>, h: &CMatrix<T>, n: &CMatrix<T>, ansatz: &Circuit<T>) -> Result<Vec<T>> {
    check_hermitian(h)?;
    check_hermitian(n)?;
    grad_unchecked(p, h, n, ansatz)
}

fn grad_unchecked<T: Real>(p: &ParameterSet<T>, h: &CMatrix<T>, n: &CMatrix<T>, ansatz: &Circuit<T>) -> Result<Vec<T>> {
    let (num, den) = quotient_parts(&run_circuit(ansatz, p)?, h, n)?;
    if cabs(den) < T::lit(DEGENERATE_METRIC) {
        return Err(Error::DegenerateMetric(cabs(den).to_f64_lossy()));
    }
    let half_pi = T::frac_pi_2();
    let half = T::lit(0.5);
    let per_gate: Vec<(usize, Complex<T>, Complex<T>)> = ansatz
        .gates()
        .par_iter()
        .enumerate()
        .filter_map(|(k, g)| g.param_slot.map(|slot| (k, slot)))
        .map(|(k, slot)| {
            let plus = quotient_parts(&run_shifted(ansatz, p, Some((k, half_pi)))?, h, n)?;
            let minus = quotient_parts(&run_shifted(ansatz, p, Some((k, -half_pi)))?, h, n)?;
            Ok((slot, (plus.0 - minus.0) * half, (plus.1 - minus.1) * half))
        })
        .collect::<Result<_>>()?;
    let mut dnum = vec![Complex::new(T::zero(), T::zero()); ansatz.n_params()];
    let mut dden = dnum.clone();
    for (slot, a, b) in per_gate {
        dnum[slot] += a;
        dden[slot] += b;
    }
    Ok(dnum
        .iter()
        .zip(&dden)
        .map(|(a, b)| ((*a * den - num * *b) / (den * den)).re)
        .collect())
}

/// `p - eta * g`, wrapped into `[0, 2π)`.
pub fn sgd_step<T: Real>(p: &ParameterSet<T>, g: &[T], eta: T) -> ParameterSet<T> {
    ParameterSet::new(p.values.iter().zip(g).map(|(&v, &d)| wrap_two_pi(v - eta * d)).collect())
}

/// Uniform random initial angles in `[0, 2π)`.
pub fn initial_parameters<T: Real>(n: usize, seed: u64) -> ParameterSet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_pi = std::f64::consts::TAU;
    ParameterSet::new((0..n).map(|_| T::lit(rng.random::<f64>() * two_pi)).collect())
}

/// SGD training from seeded random angles.
pub fn train<T: Real>(h: &CMatrix<T>, n: &CMatrix<T>, layout: &AnsatzLayout, cfg: &TrainingConfig<T>) -> Result<TrainingResult<T>> {
    let start = initial_parameters(layout.n_params(), cfg.seed);
    train_from(h, n, layout, cfg, start)
}

/// SGD training from explicit initial angles.
pub fn train_from<T: Real>(
    h: &CMatrix<T>,
    n: &CMatrix<T>,
    layout: &AnsatzLayout,
    cfg: &TrainingConfig<T>,
    start: ParameterSet<T>,
) -> Result<TrainingResult<T>> {
    cfg.validate()?;
    check_hermitian(h)?;
    check_hermitian(n)?;
    let dim = 1usize << layout.n_qubits;
    if h.nrows() != dim || n.nrows() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.nrows() });
    }
    let ansatz = build_ansatz(layout)?;
    let mut p = start;
    let mut state = run_circuit(&ansatz, &p)?;
    let mut prev = energy_of(&state, h, n)?;
    let mut best = (prev, p.clone(), state.clone());
    let mut trace = TrainingTrace::default();
    let mut converged = false;
    for t in 0..cfg.max_iterations {
        let g = grad_unchecked(&p, h, n, &ansatz)?;
        let eta = cfg.eta(t);
        p = sgd_step(&p, &g, eta);
        state = run_circuit(&ansatz, &p)?;
        let e = energy_of(&state, h, n)?;
        let gn = g.iter().fold(T::zero(), |a, &x| a + x * x).sqrt();
        trace.push(t + 1, e, gn, eta);
        if e < best.0 {
            best = (e, p.clone(), state.clone());
        }
        if (e - prev).abs() < cfg.energy_tolerance {
            converged = true;
            break;
        }
        prev = e;
    }
    let status = match (converged, cfg.relaxed) {
        (true, _) => TrainingStatus::Converged,
        (false, true) => TrainingStatus::Relaxed,
        (false, false) => TrainingStatus::Unconverged,
    };
    Ok(TrainingResult { energy: best.0, params: best.1, state: best.2, trace, status })
}

/// Default pseudo-potential strength: ten times the Gershgorin spectral range.
pub fn default_projection_constant<T: Real>(h: &CMatrix<T>) -> T {
    let (lo, hi) = gershgorin_bounds(h);
    T::lit(10.0) * (hi - lo).max(T::one())
}

/// `H + c Σ N|φ><φ|N` over the given lower states.
pub fn project_hamiltonian<T: Real>(h: &CMatrix<T>, n: &CMatrix<T>, lower: &[CVector<T>], c: T) -> Result<CMatrix<T>> {
    let mut out = h.clone();
    let cc = Complex::new(c, T::zero());
    for phi in lower {
        if phi.len() != h.nrows() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), found: phi.len() });
        }
        let nphi = n * phi;
        out += (&nphi * nphi.adjoint()) * cc;
    }
    Ok(out)
}

/// Embeds `(H, N)` of any size into the next power of two; padded
/// directions get diagonal energy `pad_energy` and unit metric.
pub fn pad_problem<T: Real>(h: &CMatrix<T>, n: &CMatrix<T>, pad_energy: T) -> (CMatrix<T>, CMatrix<T>) {
    let d = h.nrows();
    let dim = d.next_power_of_two().max(2);
    let mut hp = CMatrix::zeros(dim, dim);
    let mut np = CMatrix::zeros(dim, dim);
    hp.view_mut((0, 0), (d, d)).copy_from(h);
    np.view_mut((0, 0), (d, d)).copy_from(n);
    for k in d..dim {
        hp[(k, k)] = Complex::new(pad_energy, T::zero());
        np[(k, k)] = Complex::new(T::one(), T::zero());
    }
    (hp, np)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::linalg::hermitian_eig;
    use crate::scalar::cx;
    use proptest::prelude::*;

    fn diag(v: &[f64]) -> CMatrix<f64> {
        CMatrix::from_diagonal(&CVector::from_iterator(v.len(), v.iter().map(|&x| cx(x, 0.0))))
    }

    fn z1() -> CMatrix<f64> {
        diag(&[1.0, -1.0])
    }

    #[test]
    fn single_qubit_loss_and_gradient() {
        let c = Circuit::new(1, vec![Gate::ry(0, 0)]).unwrap();
        let id = CMatrix::identity(2, 2);
        for &t in &[0.0f64, 0.3, 1.7, 4.0] {
            let p = ParameterSet::new(vec![t]);
            assert!((loss(&p, &z1(), &id, &c).unwrap() - f64::cos(t)).abs() < 1e-14);
            let g = parameter_shift_grad(&p, &z1(), &id, &c).unwrap();
            assert!((g[0] + f64::sin(t)).abs() < 1e-14);
            assert!((loss(&p, &id, &id, &c).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sgd_arithmetic() {
        let p = ParameterSet::new(vec![0.1f64]);
        assert_eq!(sgd_step(&p, &[0.0], 0.3).values, vec![0.1]);
        assert!((sgd_step(&p, &[1.0], 0.05).values[0] - 0.05).abs() < 1e-15);
        let w = sgd_step(&p, &[-1.0], std::f64::consts::TAU).values[0];
        assert!((0.0..std::f64::consts::TAU).contains(&w));
    }

    #[test]
    fn non_hermitian_rejected() {
        let c = Circuit::new(1, vec![Gate::ry(0, 0)]).unwrap();
        let h = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)]);
        let id = CMatrix::identity(2, 2);
        assert!(matches!(loss(&ParameterSet::new(vec![0.0]), &h, &id, &c), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn two_level_training() {
        let layout = AnsatzLayout::standard(1, 1);
        let cfg = TrainingConfig { learning_rate: 0.4, max_iterations: 500, energy_tolerance: 1e-12, seed: 3, ..Default::default() };
        let r = train(&diag(&[-1.0, 1.0]), &CMatrix::identity(2, 2), &layout, &cfg).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-6, "{}", r.energy);
        assert_eq!(r.status, TrainingStatus::Converged);
    }

    #[test]
    fn trace_respects_cap_and_seed() {
        let layout = AnsatzLayout::standard(2, 2);
        let h = diag(&[0.3, -1.0, 2.0, 0.5]);
        let id = CMatrix::identity(4, 4);
        let cfg = TrainingConfig { max_iterations: 25, energy_tolerance: 1e-30, seed: 11, ..Default::default() };
        let a = train(&h, &id, &layout, &cfg).unwrap();
        let b = train(&h, &id, &layout, &cfg).unwrap();
        assert_eq!(a.trace.len(), 25);
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.status, TrainingStatus::Unconverged);
        let relaxed = train(&h, &id, &layout, &TrainingConfig { relaxed: true, ..cfg }).unwrap();
        assert_eq!(relaxed.status, TrainingStatus::Relaxed);
        let csv = a.trace.to_csv().unwrap();
        assert!(csv.starts_with("iteration,energy,grad_norm,eta\n"));
        assert_eq!(csv.lines().count(), 26);
    }

    #[test]
    fn reported_energy_is_minimum_of_trace() {
        let layout = AnsatzLayout::standard(2, 1);
        let h = diag(&[0.3, -1.0, 2.0, 0.5]);
        let cfg = TrainingConfig { learning_rate: 0.9, max_iterations: 40, energy_tolerance: 1e-30, seed: 5, ..Default::default() };
        let r = train(&h, &CMatrix::identity(4, 4), &layout, &cfg).unwrap();
        let min = r.trace.records.iter().map(|t| t.energy).fold(f64::INFINITY, f64::min);
        assert!(r.energy <= min + 1e-15);
        let ansatz = build_ansatz(&layout).unwrap();
        assert!((loss(&r.params, &h, &CMatrix::identity(4, 4), &ansatz).unwrap() - r.energy).abs() < 1e-12);
    }

    #[test]
    fn schedule_scales_eta() {
        let cfg = TrainingConfig { learning_rate: 0.2, schedule: Some(vec![1.0, 0.5]), ..TrainingConfig::<f64>::default() };
        assert_eq!(cfg.eta(0), 0.2);
        assert_eq!(cfg.eta(1), 0.1);
        assert_eq!(cfg.eta(7), 0.1);
    }

    #[test]
    fn two_level_deflation() {
        let h = diag(&[-2.0, -1.0]);
        let id = CMatrix::identity(2, 2);
        let e0 = CVector::from_vec(vec![cx(1.0, 0.0), cx(0.0, 0.0)]);
        let hp = project_hamiltonian(&h, &id, &[e0], 100.0).unwrap();
        let (vals, _) = hermitian_eig(&hp).unwrap();
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert_eq!(project_hamiltonian(&h, &id, &[], 100.0).unwrap(), h);
    }

    #[test]
    fn padding_keeps_low_spectrum() {
        let h = diag(&[-3.0, 1.0, 2.0]);
        let n = CMatrix::identity(3, 3);
        let (hp, np) = pad_problem(&h, &n, 50.0);
        assert_eq!(hp.nrows(), 4);
        assert_eq!(np[(3, 3)], cx(1.0, 0.0));
        assert_eq!(hp[(3, 3)], cx(50.0, 0.0));
    }

    proptest! {
        #[test]
        fn variational_bound(vals in prop::collection::vec(-1.0f64..1.0, 32), angles in prop::collection::vec(0.0f64..6.3, 12)) {
            let a = CMatrix::from_fn(4, 4, |i, j| cx(vals[2 * (4 * i + j)], vals[2 * (4 * i + j) + 1]));
            let h = &a + a.adjoint();
            let n = CMatrix::<f64>::identity(4, 4) * cx(2.0, 0.0) + (&a * a.adjoint()) * cx(0.1, 0.0);
            let (lam, _) = crate::linalg::generalized_hermitian_eig(&h, &n).unwrap();
            let c = build_ansatz(&AnsatzLayout::standard(2, 2)).unwrap();
            let e = loss(&ParameterSet::new(angles), &h, &n, &c).unwrap();
            prop_assert!(e >= lam[0] - 1e-9);
        }
    }
}
