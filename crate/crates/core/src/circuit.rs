//! Dense statevector simulation of RY/RZ/CNOT circuits and the layered
//! cyclic-entangler ansatz.
//!
//! Conventions: `RY(t) = exp(-i t Y / 2)`, `RZ(t) = exp(-i t Z / 2)`, and
//! qubit 0 is the least-significant bit of the amplitude index.

use nalgebra::{Complex, ComplexField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{qubits_for_dim, PauliSum};
use crate::scalar::{cabs, wrap_two_pi, CMatrix, CVector, Real};

/// Denominator magnitude below which a Rayleigh quotient is rejected.
pub const DEGENERATE_METRIC: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateKind {
    RY,
    RZ,
    CNOT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate<T> {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub param_slot: Option<usize>,
    pub fixed_angle: Option<T>,
}

impl<T: Real> Gate<T> {
    pub fn ry(target: usize, slot: usize) -> Self {
        Self { kind: GateKind::RY, target, control: None, param_slot: Some(slot), fixed_angle: None }
    }

    pub fn rz(target: usize, slot: usize) -> Self {
        Self { kind: GateKind::RZ, target, control: None, param_slot: Some(slot), fixed_angle: None }
    }

    pub fn ry_fixed(target: usize, angle: T) -> Self {
        Self { kind: GateKind::RY, target, control: None, param_slot: None, fixed_angle: Some(angle) }
    }

    pub fn rz_fixed(target: usize, angle: T) -> Self {
        Self { kind: GateKind::RZ, target, control: None, param_slot: None, fixed_angle: Some(angle) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self { kind: GateKind::CNOT, target, control: Some(control), param_slot: None, fixed_angle: None }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.target >= n_qubits {
            return Err(Error::QubitOutOfRange { index: self.target, n_qubits });
        }
        match self.kind {
            GateKind::CNOT => {
                let c = self
                    .control
                    .ok_or_else(|| Error::InvalidConfig("CNOT without control".into()))?;
                if c >= n_qubits {
                    return Err(Error::QubitOutOfRange { index: c, n_qubits });
                }
                if c == self.target {
                    return Err(Error::InvalidConfig("CNOT control equals target".into()));
                }
                if self.param_slot.is_some() || self.fixed_angle.is_some() {
                    return Err(Error::InvalidConfig("CNOT carries no angle".into()));
                }
            }
            _ => {
                if self.param_slot.is_some() == self.fixed_angle.is_some() {
                    return Err(Error::InvalidConfig(
                        "rotation needs exactly one of param_slot / fixed_angle".into(),
                    ));
                }
                if self.control.is_some() {
                    return Err(Error::InvalidConfig("rotation gates are uncontrolled".into()));
                }
            }
        }
        Ok(())
    }

    fn angle(&self, params: &[T]) -> T {
        match (self.param_slot, self.fixed_angle) {
            (Some(k), _) => params[k],
            (None, Some(a)) => a,
            _ => T::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit<T> {
    n_qubits: usize,
    gates: Vec<Gate<T>>,
    n_params: usize,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize, gates: Vec<Gate<T>>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidConfig("circuit needs at least one qubit".into()));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        let n_params = gates.iter().filter_map(|g| g.param_slot).map(|k| k + 1).max().unwrap_or(0);
        Ok(Self { n_qubits, gates, n_params })
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new(), n_params: 0 }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::CNOT).count()
    }
}

/// Shape of the layered ansatz.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzLayout {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Cyclic CNOT shift per layer.
    pub offsets: Vec<usize>,
}

impl AnsatzLayout {
    /// Offsets `1, 2, ...` cycling through `[1, n_qubits)`.
    pub fn standard(n_qubits: usize, n_layers: usize) -> Self {
        let offsets = if n_qubits > 1 {
            (0..n_layers).map(|l| l % (n_qubits - 1) + 1).collect()
        } else {
            vec![0; n_layers]
        };
        Self { n_qubits, n_layers, offsets }
    }

    pub fn n_params(&self) -> usize {
        3 * self.n_qubits * self.n_layers
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_layers == 0 {
            return Err(Error::InvalidConfig("ansatz needs n_qubits >= 1 and n_layers >= 1".into()));
        }
        if self.offsets.len() != self.n_layers {
            return Err(Error::InvalidConfig("one CNOT offset per layer required".into()));
        }
        if self.n_qubits > 1 && self.offsets.iter().any(|&o| o == 0 || o >= self.n_qubits) {
            return Err(Error::InvalidConfig("CNOT offsets must lie in [1, n_qubits)".into()));
        }
        Ok(())
    }

    /// Slot of angle `theta` (0..3) on `qubit` in `layer`.
    pub fn slot(&self, layer: usize, qubit: usize, theta: usize) -> usize {
        (layer * self.n_qubits + qubit) * 3 + theta
    }
}

/// Per layer: `RZ RY RZ` on every qubit, then `CNOT(q, q + offset mod n)`.
pub fn build_ansatz<T: Real>(layout: &AnsatzLayout) -> Result<Circuit<T>> {
    layout.validate()?;
    let n = layout.n_qubits;
    let mut gates = Vec::new();
    for layer in 0..layout.n_layers {
        for q in 0..n {
            gates.push(Gate::rz(q, layout.slot(layer, q, 0)));
            gates.push(Gate::ry(q, layout.slot(layer, q, 1)));
            gates.push(Gate::rz(q, layout.slot(layer, q, 2)));
        }
        if n > 1 {
            for q in 0..n {
                gates.push(Gate::cnot(q, (q + layout.offsets[layer]) % n));
            }
        }
    }
    Circuit::new(n, gates)
}

/// Real circuit parameters in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet<T> {
    pub values: Vec<T>,
}

impl<T: Real> ParameterSet<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![T::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with every value wrapped into `[0, 2π)`.
    pub fn normalized(&self) -> Self {
        Self { values: self.values.iter().map(|&v| wrap_two_pi(v)).collect() }
    }

    /// Flattens a `[layer][qubit][theta]` tensor into slot order.
    pub fn from_layers(layers: &[Vec<[T; 3]>]) -> Self {
        let values = layers.iter().flat_map(|l| l.iter().flat_map(|r| r.iter().copied())).collect();
        Self { values }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: CVector<T>,
}

impl<T: Real> StateVector<T> {
    /// `|0...0>` on `n_qubits`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = CVector::zeros(1 << n_qubits);
        amps[0] = Complex::new(T::one(), T::zero());
        Self { amps }
    }

    pub fn from_amplitudes(amps: CVector<T>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &CVector<T> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> CVector<T> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> T {
        self.amps.norm()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self { amps: self.amps.map(|z| z / n) }
    }

    /// Global phase fixed so that the first non-negligible amplitude is
    /// real and positive.
    pub fn canonical_phase(&self) -> Self {
        let scale = self.amps.iter().fold(T::zero(), |a, z| a.max(cabs(*z)));
        let cut = scale * T::lit(1e-12);
        match self.amps.iter().find(|z| cabs(**z) > cut) {
            Some(&z) => {
                let ph = z / Complex::new(cabs(z), T::zero());
                Self { amps: self.amps.map(|a| a * ph.conj()) }
            }
            None => self.clone(),
        }
    }

    /// `|<self|other>|^2` for normalized states.
    pub fn fidelity(&self, other: &Self) -> T {
        let o = self.amps.dotc(&other.amps);
        o.norm_sqr() / (self.amps.norm_squared() * other.amps.norm_squared())
    }

    pub fn apply_single(&mut self, q: usize, u: [Complex<T>; 4]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let j = i | bit;
                let (a, b) = (self.amps[i], self.amps[j]);
                self.amps[i] = u[0] * a + u[1] * b;
                self.amps[j] = u[2] * a + u[3] * b;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let cb = 1usize << control;
        let tb = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap_rows(i, i | tb);
            }
        }
    }

    pub fn apply_hadamard(&mut self, q: usize) {
        let r = Complex::new(T::lit(0.5).sqrt(), T::zero());
        self.apply_single(q, [r, r, r, -r]);
    }

    /// Multiplies amplitudes with both bits `a` and `b` set by `exp(i phi)`.
    pub fn apply_cphase(&mut self, a: usize, b: usize, phi: T) {
        let mask = (1usize << a) | (1usize << b);
        let ph = Complex::new(ComplexField::cos(phi), ComplexField::sin(phi));
        for i in 0..self.amps.len() {
            if i & mask == mask {
                self.amps[i] *= ph;
            }
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amps.swap_rows(i, (i ^ ba) | bb);
            }
        }
    }

    /// Quantum Fourier transform on the contiguous qubits
    /// `first .. first + len`, `|k> -> N^{-1/2} Σ_j exp(2πi jk/N) |j>`.
    pub fn apply_qft(&mut self, first: usize, len: usize, inverse: bool) {
        let sign = if inverse { -T::one() } else { T::one() };
        let swaps = |s: &mut Self| {
            for i in 0..len / 2 {
                s.apply_swap(first + i, first + len - 1 - i);
            }
        };
        if inverse {
            swaps(self);
            for j in 0..len {
                for m in 0..j {
                    let phi = sign * T::pi() / T::lit((1u64 << (j - m)) as f64);
                    self.apply_cphase(first + m, first + j, phi);
                }
                self.apply_hadamard(first + j);
            }
        } else {
            for j in (0..len).rev() {
                self.apply_hadamard(first + j);
                for m in (0..j).rev() {
                    let phi = sign * T::pi() / T::lit((1u64 << (j - m)) as f64);
                    self.apply_cphase(first + m, first + j, phi);
                }
            }
            swaps(self);
        }
    }

    pub fn apply_gate(&mut self, g: &Gate<T>, params: &[T]) {
        match g.kind {
            GateKind::RY => self.apply_single(g.target, ry_matrix(g.angle(params))),
            GateKind::RZ => self.apply_single(g.target, rz_matrix(g.angle(params))),
            GateKind::CNOT => self.apply_cnot(g.control.unwrap(), g.target),
        }
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.amps.iter().map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()]).collect()
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Result<Self> {
        let amps = CVector::from_iterator(pairs.len(), pairs.iter().map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))));
        Self::from_amplitudes(amps)
    }
}

pub fn ry_matrix<T: Real>(theta: T) -> [Complex<T>; 4] {
    let h = theta * T::lit(0.5);
    let (s, c) = (ComplexField::sin(h), ComplexField::cos(h));
    let z = T::zero();
    [Complex::new(c, z), Complex::new(-s, z), Complex::new(s, z), Complex::new(c, z)]
}

pub fn rz_matrix<T: Real>(theta: T) -> [Complex<T>; 4] {
    let h = theta * T::lit(0.5);
    let (s, c) = (ComplexField::sin(h), ComplexField::cos(h));
    let z = Complex::new(T::zero(), T::zero());
    [Complex::new(c, -s), z, z, Complex::new(c, s)]
}

/// Exact output state of `c` from `|0...0>`.
pub fn run_circuit<T: Real>(c: &Circuit<T>, p: &ParameterSet<T>) -> Result<StateVector<T>> {
    run_shifted(c, p, None)
}

/// Runs `c` with gate `shift.0` rotated by an extra `shift.1` radians.
pub fn run_shifted<T: Real>(c: &Circuit<T>, p: &ParameterSet<T>, shift: Option<(usize, T)>) -> Result<StateVector<T>> {
    if p.len() != c.n_params {
        return Err(Error::ParameterCount { expected: c.n_params, found: p.len() });
    }
    let mut s = StateVector::zero(c.n_qubits);
    for (k, g) in c.gates.iter().enumerate() {
        match shift {
            Some((gk, d)) if gk == k => {
                let mut shifted = g.clone();
                shifted.param_slot = None;
                shifted.fixed_angle = Some(g.angle(&p.values) + d);
                s.apply_gate(&shifted, &p.values);
            }
            _ => s.apply_gate(g, &p.values),
        }
    }
    Ok(s)
}

/// Operators whose expectation value can be taken on a state.
pub trait Observable<T: Real> {
    fn dim(&self) -> usize;
    fn apply(&self, v: &CVector<T>) -> Result<CVector<T>>;
}

impl<T: Real> Observable<T> for CMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &CVector<T>) -> Result<CVector<T>> {
        if self.ncols() != v.len() || self.nrows() != self.ncols() {
            return Err(Error::DimensionMismatch { expected: v.len(), found: self.ncols() });
        }
        Ok(self * v)
    }
}

impl<T: Real> Observable<T> for PauliSum<T> {
    fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    fn apply(&self, v: &CVector<T>) -> Result<CVector<T>> {
        PauliSum::apply(self, v)
    }
}

/// `<s|O|s>`.
pub fn expectation<T: Real, O: Observable<T> + ?Sized>(s: &StateVector<T>, o: &O) -> Result<Complex<T>> {
    if o.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: o.dim() });
    }
    Ok(s.amps.dotc(&o.apply(&s.amps)?))
}

/// `<s|H|s> / <s|N|s>`.
pub fn rayleigh_quotient<T: Real>(s: &StateVector<T>, h: &CMatrix<T>, n: &CMatrix<T>) -> Result<Complex<T>> {
    let num = expectation(s, h)?;
    let den = expectation(s, n)?;
    let mag = cabs(den);
    if mag < T::lit(DEGENERATE_METRIC) {
        return Err(Error::DegenerateMetric(mag.to_f64_lossy()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::generalized_hermitian_eig;
    use crate::scalar::cx;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn mat(rows: usize, v: &[(f64, f64)]) -> CMatrix<f64> {
        CMatrix::from_row_slice(rows, rows, &v.iter().map(|&(a, b)| cx(a, b)).collect::<Vec<_>>())
    }

    #[test]
    fn ansatz_shape_six_by_three() {
        let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(6, 3)).unwrap();
        assert_eq!(c.n_params(), 54);
        assert_eq!(c.cnot_count(), 18);
    }

    #[test]
    fn smallest_ansatz_gate_list() {
        let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(2, 1)).unwrap();
        let kinds: Vec<(GateKind, usize, Option<usize>)> = c.gates().iter().map(|g| (g.kind, g.target, g.control)).collect();
        use GateKind::*;
        assert_eq!(
            kinds,
            vec![
                (RZ, 0, None),
                (RY, 0, None),
                (RZ, 0, None),
                (RZ, 1, None),
                (RY, 1, None),
                (RZ, 1, None),
                (CNOT, 1, Some(0)),
                (CNOT, 0, Some(1)),
            ]
        );
    }

    #[test]
    fn second_layer_shifts_targets_by_two() {
        let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(6, 2)).unwrap();
        let cn: Vec<_> = c.gates().iter().filter(|g| g.kind == GateKind::CNOT).collect();
        for q in 0..6 {
            assert_eq!(cn[q].target, (q + 1) % 6);
            assert_eq!(cn[6 + q].target, (q + 2) % 6);
        }
    }

    #[test]
    fn empty_circuit_is_ground_state() {
        let s = run_circuit(&Circuit::<f64>::empty(3), &ParameterSet::zeros(0)).unwrap();
        assert_eq!(s.amplitudes()[0], cx(1.0, 0.0));
        assert!(s.amplitudes().iter().skip(1).all(|z| *z == cx(0.0, 0.0)));
    }

    #[test]
    fn ry_pi_flips() {
        let c = Circuit::new(1, vec![Gate::ry(0, 0)]).unwrap();
        let s = run_circuit(&c, &ParameterSet::new(vec![PI])).unwrap().canonical_phase();
        assert!((s.amplitudes()[1] - cx(1.0, 0.0)).norm() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15);
    }

    #[test]
    fn parameter_count_is_checked() {
        let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(2, 1)).unwrap();
        assert!(matches!(run_circuit(&c, &ParameterSet::zeros(3)), Err(Error::ParameterCount { .. })));
    }

    #[test]
    fn invalid_gates_rejected() {
        assert!(Circuit::<f64>::new(2, vec![Gate::cnot(1, 1)]).is_err());
        assert!(Circuit::<f64>::new(2, vec![Gate::ry(2, 0)]).is_err());
        let mut g = Gate::<f64>::ry(0, 0);
        g.fixed_angle = Some(1.0);
        assert!(Circuit::new(1, vec![g]).is_err());
    }

    #[test]
    fn simple_expectations() {
        let z = mat(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]);
        let x = mat(2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let s0 = StateVector::<f64>::zero(1);
        assert!((expectation(&s0, &z).unwrap() - cx(1.0, 0.0)).norm() < 1e-15);
        let r = 0.5f64.sqrt();
        let plus = StateVector::from_amplitudes(CVector::from_vec(vec![cx(r, 0.0), cx(r, 0.0)])).unwrap();
        assert!((expectation(&plus, &x).unwrap() - cx(1.0, 0.0)).norm() < 1e-15);
        let xs: PauliSum<f64> = crate::pauli::pauli_decompose(&x).unwrap();
        assert!((expectation(&plus, &xs).unwrap() - cx(1.0, 0.0)).norm() < 1e-15);
        assert!(expectation(&s0, &CMatrix::<f64>::identity(4, 4)).is_err());
    }

    #[test]
    fn rayleigh_on_generalized_eigenvector() {
        let h = mat(2, &[(1.0, 0.0), (0.4, 0.3), (0.4, -0.3), (-2.0, 0.0)]);
        let n = mat(2, &[(1.5, 0.0), (0.2, 0.0), (0.2, 0.0), (0.8, 0.0)]);
        let (vals, vecs) = generalized_hermitian_eig(&h, &n).unwrap();
        let s = StateVector::from_amplitudes(vecs.column(0).into_owned()).unwrap();
        let e = rayleigh_quotient(&s, &h, &n).unwrap();
        assert!((e - cx(vals[0], 0.0)).norm() < 1e-10);
        let e2 = rayleigh_quotient(&s, &(h.map(|z| z * 2.0)), &n).unwrap();
        assert!((e2 - e * 2.0).norm() < 1e-12);
        let id = CMatrix::identity(2, 2);
        assert!((rayleigh_quotient(&s.normalized(), &h, &id).unwrap() - expectation(&s.normalized(), &h).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn qft_matches_dft_matrix() {
        let n = 3;
        let dim = 8;
        for k in 0..dim {
            let mut amps = CVector::zeros(dim);
            amps[k] = cx(1.0, 0.0);
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            s.apply_qft(0, n, false);
            for j in 0..dim {
                let ang = 2.0 * PI * (j * k) as f64 / dim as f64;
                let expect = cx(ang.cos(), ang.sin()) / (dim as f64).sqrt();
                assert!((s.amplitudes()[j] - expect).norm() < 1e-14, "k={k} j={j}");
            }
            s.apply_qft(0, n, true);
            assert!((s.amplitudes()[k] - cx(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn qft_on_upper_register_leaves_lower_alone() {
        let mut amps = CVector::zeros(16);
        amps[0b0110] = cx(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_qft(2, 2, false);
        s.apply_qft(2, 2, true);
        assert!((s.amplitudes()[0b0110] - cx(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_metric_is_degenerate() {
        let s = StateVector::<f64>::zero(1);
        let n = mat(2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(rayleigh_quotient(&s, &n, &n), Err(Error::DegenerateMetric(_))));
    }

    #[test]
    fn f32_ansatz_stays_normalized() {
        let c: Circuit<f32> = build_ansatz(&AnsatzLayout::standard(3, 2)).unwrap();
        let p = ParameterSet::new((0..c.n_params()).map(|k| k as f32 * 0.37).collect());
        let s = run_circuit(&c, &p).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn gates_preserve_norm(angles in prop::collection::vec(0.0f64..6.3, 36)) {
            let layout = AnsatzLayout::standard(4, 3);
            let c: Circuit<f64> = build_ansatz(&layout).unwrap();
            let mut s = StateVector::zero(4);
            for g in c.gates() {
                s.apply_gate(g, &angles);
                prop_assert!((s.norm() - 1.0).abs() < 1e-12);
            }
            // gate-by-gate composition equals the full run
            let full = run_circuit(&c, &ParameterSet::new(angles.clone())).unwrap();
            prop_assert_eq!(full, s);
        }

        #[test]
        fn four_pi_periodicity(angles in prop::collection::vec(0.0f64..6.3, 18), k in 0usize..18) {
            let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(3, 2)).unwrap();
            let a = run_circuit(&c, &ParameterSet::new(angles.clone())).unwrap();
            let mut shifted = angles.clone();
            shifted[k] += 4.0 * PI;
            let b = run_circuit(&c, &ParameterSet::new(shifted)).unwrap();
            prop_assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-12);
        }

        #[test]
        fn determinism(angles in prop::collection::vec(0.0f64..6.3, 18)) {
            let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(3, 2)).unwrap();
            let p = ParameterSet::new(angles);
            prop_assert_eq!(run_circuit(&c, &p).unwrap(), run_circuit(&c, &p).unwrap());
        }

        #[test]
        fn hermitian_expectation_is_real(vals in prop::collection::vec(-1.0f64..1.0, 32), angles in prop::collection::vec(0.0f64..6.3, 6)) {
            let a = CMatrix::from_fn(4, 4, |i, j| cx(vals[2 * (4 * i + j)], vals[2 * (4 * i + j) + 1]));
            let h = &a + a.adjoint();
            let c: Circuit<f64> = build_ansatz(&AnsatzLayout::standard(2, 1)).unwrap();
            let s = run_circuit(&c, &ParameterSet::new(angles)).unwrap();
            let e = expectation(&s, &h).unwrap();
            prop_assert!(e.im.abs() < 1e-10);
            let direct = (s.amplitudes().adjoint() * &h * s.amplitudes())[(0, 0)];
            prop_assert!((e - direct).norm() < 1e-12);
        }
    }
}
