//! Pauli strings, Pauli sums and the exact matrix <-> Pauli-sum maps.
//!
//! Qubit 0 is the least-significant bit of a basis-state index. Letters are
//! stored qubit-0-first; the textual form writes qubit 0 last, so `"XZ"`
//! is X on qubit 1 and Z on qubit 0.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, CMatrix, CVector, Real};

/// Absolute magnitude below which decomposition coefficients are dropped.
pub const DROP_THRESHOLD: f64 = 1e-14;

/// Largest register size accepted by [`pauli_decompose`].
pub const MAX_DECOMPOSE_QUBITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn phases(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// 2x2 matrix of the single-qubit operator.
    pub fn matrix<T: Real>(self) -> CMatrix<T> {
        let o = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        let d = match self {
            Pauli::I => [one, o, o, one],
            Pauli::X => [o, one, one, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [one, o, o, -one],
        };
        CMatrix::from_row_slice(2, 2, &d)
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;
    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::InvalidPauliString(c.to_string())),
        }
    }
}

/// Tensor product of single-qubit Pauli operators.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    /// Builds a string from letters indexed by qubit (index 0 = qubit 0).
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidPauliString(String::new()));
        }
        Ok(Self { letters })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self { letters: vec![Pauli::I; n_qubits] }
    }

    /// Single non-identity letter on `qubit`.
    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
        }
        let mut s = Self::identity(n_qubits);
        s.letters[qubit] = p;
        Ok(s)
    }

    /// Decodes the `index`-th of the `4^n` strings (base-4 digits, qubit 0
    /// least significant, digit order I, X, Y, Z).
    pub fn from_index(n_qubits: usize, mut index: usize) -> Self {
        let mut letters = Vec::with_capacity(n_qubits);
        for _ in 0..n_qubits {
            letters.push(Pauli::ALL[index & 3]);
            index >>= 2;
        }
        Self { letters }
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        self.letters[qubit]
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        self.letters[qubit] = p;
    }

    /// Bit-flip mask (X or Y positions).
    pub fn x_mask(&self) -> usize {
        self.mask(Pauli::flips)
    }

    /// Phase mask (Y or Z positions).
    pub fn z_mask(&self) -> usize {
        self.mask(Pauli::phases)
    }

    fn mask(&self, f: fn(Pauli) -> bool) -> usize {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| f(**p))
            .fold(0usize, |m, (q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|p| **p == Pauli::Y).count()
    }

    /// `P|k> = phase(k) |k ^ x_mask>`; returns `(k ^ x_mask, phase(k))`.
    pub fn apply_basis<T: Real>(&self, k: usize) -> (usize, Complex<T>) {
        let base = i_power::<T>(self.y_count());
        let sign = (k & self.z_mask()).count_ones() % 2 == 1;
        (k ^ self.x_mask(), if sign { -base } else { base })
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn to_matrix<T: Real>(&self) -> CMatrix<T> {
        let dim = 1usize << self.n_qubits();
        let mut m = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let (row, ph) = self.apply_basis::<T>(k);
            m[(row, k)] = ph;
        }
        m
    }
}

fn i_power<T: Real>(n: usize) -> Complex<T> {
    match n % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.letters.iter().rev() {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .rev()
            .map(Pauli::try_from)
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::InvalidPauliString(s.to_string()))?;
        Self::new(letters)
    }
}

/// Weighted sum of Pauli strings on a common register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum<T: Real> {
    n_qubits: usize,
    terms: Vec<(Complex<T>, PauliString)>,
}

impl<T: Real> PauliSum<T> {
    pub fn zero(n_qubits: usize) -> Self {
        Self { n_qubits, terms: Vec::new() }
    }

    /// Merges repeated strings and drops terms below `threshold`.
    pub fn from_terms(n_qubits: usize, terms: Vec<(Complex<T>, PauliString)>, threshold: T) -> Result<Self> {
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut merged: Vec<(Complex<T>, PauliString)> = Vec::new();
        for (c, s) in terms {
            if s.n_qubits() != n_qubits {
                return Err(Error::InconsistentQubits);
            }
            match index.get(&s) {
                Some(&k) => merged[k].0 += c,
                None => {
                    index.insert(s.clone(), merged.len());
                    merged.push((c, s));
                }
            }
        }
        merged.retain(|(c, _)| cabs(*c) >= threshold);
        Ok(Self { n_qubits, terms: merged })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(Complex<T>, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of `s`, zero when absent.
    pub fn coefficient(&self, s: &PauliString) -> Complex<T> {
        self.terms
            .iter()
            .find(|(_, t)| t == s)
            .map(|(c, _)| *c)
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    pub fn scale(&self, alpha: Complex<T>) -> Self {
        let terms = self.terms.iter().map(|(c, s)| (*c * alpha, s.clone())).collect();
        Self::from_terms(self.n_qubits, terms, T::zero()).expect("same register")
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::InconsistentQubits);
        }
        let terms = self.terms.iter().chain(other.terms.iter()).cloned().collect();
        Self::from_terms(self.n_qubits, terms, T::lit(DROP_THRESHOLD))
    }

    /// Conjugate transpose (Pauli strings are Hermitian).
    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|(c, s)| (c.conj(), s.clone())).collect();
        Self { n_qubits: self.n_qubits, terms }
    }

    /// Applies the operator to a state vector without forming the matrix.
    pub fn apply(&self, v: &CVector<T>) -> Result<CVector<T>> {
        let dim = 1usize << self.n_qubits;
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: v.len() });
        }
        let mut out = CVector::zeros(dim);
        for (c, s) in &self.terms {
            for k in 0..dim {
                let (row, ph) = s.apply_basis::<T>(k);
                out[row] += *c * ph * v[k];
            }
        }
        Ok(out)
    }

    /// Dense matrix `sum_k c_k P_k`.
    pub fn to_matrix(&self) -> CMatrix<T> {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for (c, s) in &self.terms {
            for k in 0..dim {
                let (row, ph) = s.apply_basis::<T>(k);
                m[(row, k)] += *c * ph;
            }
        }
        m
    }

    pub fn to_records(&self) -> Vec<PauliRecord> {
        self.terms
            .iter()
            .map(|(c, s)| PauliRecord { coeff: [c.re.to_f64_lossy(), c.im.to_f64_lossy()], string: s.to_string() })
            .collect()
    }

    pub fn from_records(records: &[PauliRecord]) -> Result<Self> {
        let first = records.first().ok_or(Error::EmptyPauliSum)?;
        let n = first.string.chars().count();
        let terms = records
            .iter()
            .map(|r| Ok((Complex::new(T::lit(r.coeff[0]), T::lit(r.coeff[1])), r.string.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(n, terms, T::zero())
    }
}

/// JSON wire record of one Pauli term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliRecord {
    pub coeff: [f64; 2],
    pub string: String,
}

/// Jordan-Wigner creation operator `a_j^dagger = (X_j - iY_j)/2 Z_{j-1} .. Z_0`.
pub fn jw_creation<T: Real>(j: usize, n: usize) -> Result<PauliSum<T>> {
    if j >= n {
        return Err(Error::QubitOutOfRange { index: j, n_qubits: n });
    }
    let mut xs = PauliString::identity(n);
    for q in 0..j {
        xs.set(q, Pauli::Z);
    }
    let mut ys = xs.clone();
    xs.set(j, Pauli::X);
    ys.set(j, Pauli::Y);
    let half = T::lit(0.5);
    PauliSum::from_terms(
        n,
        vec![(Complex::new(half, T::zero()), xs), (Complex::new(T::zero(), -half), ys)],
        T::zero(),
    )
}

/// Jordan-Wigner annihilation operator, the adjoint of [`jw_creation`].
pub fn jw_annihilation<T: Real>(j: usize, n: usize) -> Result<PauliSum<T>> {
    Ok(jw_creation::<T>(j, n)?.adjoint())
}

/// Number of qubits `m` with `2^m == dim`.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Pauli coefficients `Tr(P M) / 2^m` over all `4^m` strings.
pub fn pauli_decompose<T: Real>(m: &CMatrix<T>) -> Result<PauliSum<T>> {
    pauli_decompose_with(m, T::lit(DROP_THRESHOLD))
}

pub fn pauli_decompose_with<T: Real>(m: &CMatrix<T>, threshold: T) -> Result<PauliSum<T>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    let nq = qubits_for_dim(m.nrows())?;
    if nq > MAX_DECOMPOSE_QUBITS {
        return Err(Error::InvalidConfig(format!(
            "decomposition limited to {MAX_DECOMPOSE_QUBITS} qubits, got {nq}"
        )));
    }
    let dim = m.nrows();
    let norm = T::one() / T::lit(dim as f64);
    let mut terms = Vec::new();
    for idx in 0..(1usize << (2 * nq)) {
        let s = PauliString::from_index(nq, idx);
        let x = s.x_mask();
        let z = s.z_mask();
        let base = i_power::<T>(s.y_count());
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..dim {
            let v = m[(j, j ^ x)];
            if (j & z).count_ones() % 2 == 1 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        let c = acc * base * norm;
        if cabs(c) >= threshold {
            terms.push((c, s));
        }
    }
    PauliSum::from_terms(nq, terms, threshold)
}

/// Dense reconstruction from an explicit term list.
pub fn pauli_reconstruct<T: Real>(terms: &[(Complex<T>, PauliString)]) -> Result<CMatrix<T>> {
    let first = terms.first().ok_or(Error::EmptyPauliSum)?;
    let n = first.1.n_qubits();
    if terms.iter().any(|(_, s)| s.n_qubits() != n) {
        return Err(Error::InconsistentQubits);
    }
    let sum = PauliSum::from_terms(n, terms.to_vec(), T::zero())?;
    Ok(sum.to_matrix())
}

/// Zero-pads a square matrix up to the next power-of-two dimension.
pub fn pad_to_power_of_two<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    let n = m.nrows();
    let dim = n.next_power_of_two().max(1);
    let mut out = DMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (n, m.ncols().min(dim))).copy_from(m);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cx, max_abs};
    use proptest::prelude::*;

    fn kron(a: &CMatrix<f64>, b: &CMatrix<f64>) -> CMatrix<f64> {
        a.kronecker(b)
    }

    // Oracle: explicit Kronecker product, highest qubit leftmost.
    fn kron_oracle(s: &PauliString) -> CMatrix<f64> {
        let mut m = CMatrix::<f64>::identity(1, 1);
        for q in (0..s.n_qubits()).rev() {
            m = kron(&m, &s.letter(q).matrix());
        }
        m
    }

    fn random_matrix(dim: usize, vals: &[f64]) -> CMatrix<f64> {
        CMatrix::from_fn(dim, dim, |i, j| {
            let k = (i * dim + j) * 2;
            cx(vals[k % vals.len()], vals[(k + 1) % vals.len()])
        })
    }

    #[test]
    fn string_matrices_match_kronecker_oracle() {
        for n in 1..=3 {
            for idx in 0..(1 << (2 * n)) {
                let s = PauliString::from_index(n, idx);
                let d = max_abs(&(s.to_matrix::<f64>() - kron_oracle(&s)));
                assert!(d < 1e-15, "{s}");
            }
        }
    }

    #[test]
    fn text_form_is_qubit_zero_last() {
        let s: PauliString = "XZIY".parse().unwrap();
        assert_eq!(s.letter(0), Pauli::Y);
        assert_eq!(s.letter(3), Pauli::X);
        assert_eq!(s.to_string(), "XZIY");
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn creation_on_one_qubit() {
        let a = jw_creation::<f64>(0, 1).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.coefficient(&"X".parse().unwrap()), cx(0.5, 0.0));
        assert_eq!(a.coefficient(&"Y".parse().unwrap()), cx(0.0, -0.5));
        let m = a.to_matrix();
        let expect = CMatrix::from_row_slice(2, 2, &[cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)]);
        assert!(max_abs(&(m - expect)) < 1e-15);
    }

    #[test]
    fn creation_carries_z_chain() {
        let a = jw_creation::<f64>(1, 2).unwrap();
        for (_, s) in a.terms() {
            assert_eq!(s.letter(0), Pauli::Z);
        }
        assert!(jw_creation::<f64>(2, 2).is_err());
    }

    #[test]
    fn jw_anticommutation() {
        let n = 4;
        let id = CMatrix::<f64>::identity(16, 16);
        for i in 0..n {
            for j in 0..n {
                let ai = jw_annihilation::<f64>(i, n).unwrap().to_matrix();
                let aj = jw_creation::<f64>(j, n).unwrap().to_matrix();
                let ac = &ai * &aj + &aj * &ai;
                let expect = if i == j { id.clone() } else { CMatrix::zeros(16, 16) };
                assert!(max_abs(&(ac - expect)) < 1e-14, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn decompose_simple_cases() {
        let id = pauli_decompose(&CMatrix::<f64>::identity(2, 2)).unwrap();
        assert_eq!(id.len(), 1);
        assert_eq!(id.coefficient(&"I".parse().unwrap()), cx(1.0, 0.0));
        let z = CMatrix::from_diagonal(&CVector::from_vec(vec![cx(1.0, 0.0), cx(-1.0, 0.0)]));
        let d = pauli_decompose(&z).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.coefficient(&"Z".parse().unwrap()), cx(1.0, 0.0));
        assert!(matches!(pauli_decompose(&CMatrix::<f64>::identity(3, 3)), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn reconstruct_identity_and_errors() {
        let m = pauli_reconstruct(&[(cx(1.0, 0.0), PauliString::identity(2))]).unwrap();
        assert!(max_abs(&(m - CMatrix::<f64>::identity(4, 4))) < 1e-15);
        let bad = vec![(cx(1.0, 0.0), PauliString::identity(2)), (cx(1.0, 0.0), PauliString::identity(1))];
        assert!(matches!(pauli_reconstruct(&bad), Err(Error::InconsistentQubits)));
        assert!(matches!(pauli_reconstruct::<f64>(&[]), Err(Error::EmptyPauliSum)));
    }

    #[test]
    fn merging_and_records_round_trip() {
        let s: PauliString = "XY".parse().unwrap();
        let sum = PauliSum::<f64>::from_terms(2, vec![(cx(1.0, 0.0), s.clone()), (cx(0.5, 1.0), s.clone())], 0.0).unwrap();
        assert_eq!(sum.len(), 1);
        let recs = sum.to_records();
        assert_eq!(recs[0].string, "XY");
        let back = PauliSum::<f64>::from_records(&recs).unwrap();
        assert_eq!(back, sum);
    }

    #[test]
    fn apply_matches_matrix() {
        let vals: Vec<f64> = (0..64).map(|k| ((k * 37 % 23) as f64) / 7.0 - 1.5).collect();
        let m = random_matrix(8, &vals);
        let p = pauli_decompose(&m).unwrap();
        let v = CVector::from_fn(8, |i, _| cx(i as f64 * 0.1, 1.0 - i as f64 * 0.2));
        let d = (p.apply(&v).unwrap() - &m * &v).norm();
        assert!(d < 1e-12);
    }

    #[test]
    fn f32_decomposition_round_trips() {
        let m = CMatrix::<f32>::from_fn(4, 4, |i, j| Complex::new((i + 2 * j) as f32 * 0.25, i as f32 - j as f32));
        let back = pauli_decompose(&m).unwrap().to_matrix();
        assert!(max_abs(&(back - m)) < 1e-5);
    }

    proptest! {
        #[test]
        fn round_trip(m in 1usize..=4, vals in prop::collection::vec(-2.0f64..2.0, 512)) {
            let dim = 1 << m;
            let mat = random_matrix(dim, &vals);
            let back = pauli_decompose(&mat).unwrap().to_matrix();
            prop_assert!(max_abs(&(back - mat)) < 1e-12);
        }

        #[test]
        fn hermitian_gives_real_coefficients(vals in prop::collection::vec(-2.0f64..2.0, 128)) {
            let a = random_matrix(4, &vals);
            let h = &a + a.adjoint();
            for (c, _) in pauli_decompose(&h).unwrap().terms() {
                prop_assert!(c.im.abs() < 1e-12);
            }
        }

        #[test]
        fn non_hermitian_has_complex_coefficient(vals in prop::collection::vec(-2.0f64..2.0, 128)) {
            let a = random_matrix(4, &vals);
            let anti = &a - a.adjoint();
            prop_assume!(max_abs(&anti) > 1e-6);
            let any_complex = pauli_decompose(&anti).unwrap().terms().iter().any(|(c, _)| c.im.abs() > 1e-12);
            prop_assert!(any_complex);
        }

        #[test]
        fn linearity(vals in prop::collection::vec(-2.0f64..2.0, 256), ar in -2.0f64..2.0, ai in -2.0f64..2.0) {
            let m1 = random_matrix(4, &vals[..128]);
            let m2 = random_matrix(4, &vals[128..]);
            let alpha = cx(ar, ai);
            let lhs = pauli_decompose_with(&(m1.map(|z| z * alpha) + &m2), 0.0).unwrap();
            let rhs = pauli_decompose_with(&m1, 0.0).unwrap().scale(alpha).add(&pauli_decompose_with(&m2, 0.0).unwrap()).unwrap();
            for idx in 0..16 {
                let s = PauliString::from_index(2, idx);
                prop_assert!(cabs(lhs.coefficient(&s) - rhs.coefficient(&s)) < 1e-12);
            }
        }
    }
}
