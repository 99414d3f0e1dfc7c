//! HHL linear solver with an ideal spectral backend and a gate-level
//! phase-estimation emulation, plus the Hermitian embedding used for
//! non-Hermitian systems.
//!
//! QPE register layout, low bits first: system | clock | ancilla.

use nalgebra::{Complex, ComplexField, DVector};
use serde::{Deserialize, Serialize};

use crate::circuit::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_deviation, hermitian_eig, solve};
use crate::scalar::{cabs, CMatrix, CVector, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Ideal,
    Qpe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HhlBackendConfig<T> {
    pub backend: Backend,
    pub clock_qubits: usize,
    /// Evolution time `t` of `exp(iAt)`; estimated from the spectrum when absent.
    pub evolution_time: Option<T>,
    /// Rotation constant `C`; estimated from the spectrum when absent.
    pub rotation_constant: Option<T>,
    pub signed_spectrum: bool,
    /// Smallest admissible `|λ|` before `A` is declared singular.
    pub eigen_floor: T,
}

impl<T: Real> Default for HhlBackendConfig<T> {
    fn default() -> Self {
        Self {
            backend: Backend::Ideal,
            clock_qubits: 10,
            evolution_time: None,
            rotation_constant: None,
            signed_spectrum: true,
            eigen_floor: T::lit(1e-12),
        }
    }
}

impl<T: Real> HhlBackendConfig<T> {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn qpe(clock_qubits: usize) -> Self {
        Self { backend: Backend::Qpe, clock_qubits, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HhlSolution<T: Real> {
    pub x: CVector<T>,
    pub post_selection_probability: Option<T>,
    /// `|<x|x_exact>|^2` against a classical solve (qpe only).
    pub fidelity_estimate: Option<T>,
    /// Clock-register distribution after phase estimation (qpe only).
    pub clock_histogram: Option<Vec<T>>,
    pub evolution_time: Option<T>,
    pub rotation_constant: Option<T>,
}

/// JSON diagnostics of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HhlDiagnostics {
    pub post_selection_probability: Option<f64>,
    pub fidelity: Option<f64>,
    pub clock_histogram: Option<Vec<f64>>,
    pub evolution_time: Option<f64>,
    pub rotation_constant: Option<f64>,
}

impl<T: Real> HhlSolution<T> {
    pub fn diagnostics(&self) -> HhlDiagnostics {
        HhlDiagnostics {
            post_selection_probability: self.post_selection_probability.map(Real::to_f64_lossy),
            fidelity: self.fidelity_estimate.map(Real::to_f64_lossy),
            clock_histogram: self.clock_histogram.as_ref().map(|h| h.iter().map(|v| v.to_f64_lossy()).collect()),
            evolution_time: self.evolution_time.map(Real::to_f64_lossy),
            rotation_constant: self.rotation_constant.map(Real::to_f64_lossy),
        }
    }
}

/// `[[0, C], [C^H, 0]]`.
pub fn hermitian_embed<T: Real>(c: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (n, m) = c.shape();
    if n != m {
        return Err(Error::DimensionMismatch { expected: n, found: m });
    }
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, n), (n, n)).copy_from(c);
    out.view_mut((n, 0), (n, n)).copy_from(&c.adjoint());
    Ok(out)
}

/// Largest `|λ|` of a Hermitian matrix by power iteration.
pub fn power_estimate_max<T: Real>(a: &CMatrix<T>, iterations: usize) -> T {
    let n = a.nrows();
    let mut v = start_vector::<T>(n);
    let mut est = T::zero();
    for _ in 0..iterations {
        let w = a * &v;
        let nw = w.norm();
        if nw == T::zero() {
            return T::zero();
        }
        est = nw;
        v = w / Complex::new(nw, T::zero());
    }
    est
}

/// Smallest `|λ|` of a Hermitian matrix by inverse power iteration.
pub fn power_estimate_min<T: Real>(a: &CMatrix<T>, iterations: usize) -> Result<T> {
    let lu = a.clone().lu();
    let mut v = start_vector::<T>(a.nrows());
    let mut est = T::zero();
    for _ in 0..iterations {
        let w = lu.solve(&v).ok_or_else(|| Error::Singular("inverse power iteration".into()))?;
        let nw = w.norm();
        if !nw.is_finite() {
            return Err(Error::Singular("inverse power iteration".into()));
        }
        est = T::one() / nw;
        v = w / Complex::new(nw, T::zero());
    }
    Ok(est)
}

fn start_vector<T: Real>(n: usize) -> CVector<T> {
    let v = CVector::from_fn(n, |i, _| Complex::new(T::one() + T::lit(0.1 * i as f64), T::lit(0.03 * (i % 3) as f64)));
    let nv = v.norm();
    v / Complex::new(nv, T::zero())
}

fn pad_system<T: Real>(a: &CMatrix<T>, b: &DVector<T>) -> (CMatrix<T>, CVector<T>) {
    let n = a.nrows();
    let dim = n.next_power_of_two().max(2);
    let mut ap = CMatrix::identity(dim, dim);
    ap.view_mut((0, 0), (n, n)).copy_from(a);
    let bp = CVector::from_fn(dim, |i, _| if i < n { Complex::new(b[i], T::zero()) } else { Complex::new(T::zero(), T::zero()) });
    (ap, bp)
}

/// Solves `A x = b` for Hermitian `A` and real `b`.
pub fn hhl_solve<T: Real>(a: &CMatrix<T>, b: &DVector<T>, cfg: &HhlBackendConfig<T>) -> Result<HhlSolution<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let scale = a.iter().fold(T::one(), |m, z| m.max(cabs(*z)));
    let dev = hermitian_deviation(a);
    if dev > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian(dev.to_f64_lossy()));
    }
    let bnorm = b.norm();
    if bnorm == T::zero() {
        return Err(Error::InvalidConfig("right-hand side must be nonzero".into()));
    }
    let (ap, bp) = pad_system(a, b);
    let sol = match cfg.backend {
        Backend::Ideal => ideal(&ap, &bp, cfg)?,
        Backend::Qpe => qpe(&ap, &bp, bnorm, cfg)?,
    };
    Ok(HhlSolution { x: sol.x.rows(0, n).into_owned(), ..sol })
}

fn ideal<T: Real>(a: &CMatrix<T>, b: &CVector<T>, cfg: &HhlBackendConfig<T>) -> Result<HhlSolution<T>> {
    let (vals, vecs) = hermitian_eig(a)?;
    let min = vals.iter().fold(T::max_value().unwrap(), |m, v| m.min(v.abs()));
    if min <= cfg.eigen_floor {
        return Err(Error::Singular(format!("smallest |eigenvalue| {min} below floor")));
    }
    let coeffs = vecs.adjoint() * b;
    let inv = CVector::from_fn(vals.len(), |k, _| coeffs[k] / Complex::new(vals[k], T::zero()));
    let x = &vecs * inv;
    let c = cfg.rotation_constant.unwrap_or(min * T::lit(0.5));
    let prob = x.norm_squared() * c * c / b.norm_squared();
    Ok(HhlSolution {
        x,
        post_selection_probability: Some(prob.min(T::one())),
        fidelity_estimate: None,
        clock_histogram: None,
        evolution_time: None,
        rotation_constant: Some(c),
    })
}

fn qpe<T: Real>(a: &CMatrix<T>, b: &CVector<T>, bnorm: T, cfg: &HhlBackendConfig<T>) -> Result<HhlSolution<T>> {
    let nc = cfg.clock_qubits;
    if nc == 0 || nc > 16 {
        return Err(Error::InvalidConfig("clock register must have 1..=16 qubits".into()));
    }
    let dim = a.nrows();
    let ns = dim.trailing_zeros() as usize;
    let (vals, vecs) = hermitian_eig(a)?;
    let true_min = vals.iter().fold(T::max_value().unwrap(), |m, v| m.min(v.abs()));
    if true_min <= cfg.eigen_floor {
        return Err(Error::Singular(format!("smallest |eigenvalue| {true_min} below floor")));
    }
    let lmax = power_estimate_max(a, 500);
    let lmin = power_estimate_min(a, 500)?;
    let t = cfg.evolution_time.unwrap_or(T::pi() / (T::lit(2.0) * lmax));
    let c = cfg.rotation_constant.unwrap_or(T::lit(0.5) * lmin);
    let true_max = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let range = if cfg.signed_spectrum { T::pi() } else { T::two_pi() };
    if t * true_max >= range {
        return Err(Error::PhaseAliasing((t * true_max).to_f64_lossy()));
    }
    if !cfg.signed_spectrum && vals.iter().any(|&v| v < T::zero()) {
        return Err(Error::InvalidConfig("negative eigenvalues need signed_spectrum".into()));
    }

    // controlled powers U^(2^j), U = exp(iAt)
    let powers: Vec<CMatrix<T>> = (0..nc)
        .map(|j| {
            let s = t * T::lit((1u64 << j) as f64);
            let d = CVector::from_iterator(dim, vals.iter().map(|&l| Complex::new(ComplexField::cos(l * s), ComplexField::sin(l * s))));
            &vecs * CMatrix::from_diagonal(&d) * vecs.adjoint()
        })
        .collect();

    let total = ns + nc + 1;
    let mut amps = CVector::zeros(1 << total);
    let bn = b / Complex::new(bnorm, T::zero());
    for i in 0..dim {
        amps[i] = bn[i];
    }
    let mut st = StateVector::from_amplitudes(amps)?;
    for j in 0..nc {
        st.apply_hadamard(ns + j);
    }
    controlled_powers(&mut st, &powers, ns, nc, false);
    st.apply_qft(ns, nc, true);

    let clock_size = 1usize << nc;
    let mut hist = vec![T::zero(); clock_size];
    for (i, z) in st.amplitudes().iter().enumerate() {
        hist[(i >> ns) & (clock_size - 1)] += z.norm_sqr();
    }

    // ancilla rotation conditioned on the clock value
    let anc = 1usize << (ns + nc);
    let mut amps = st.into_amplitudes();
    for k in 0..clock_size {
        let signed = if cfg.signed_spectrum && k >= clock_size / 2 { k as f64 - clock_size as f64 } else { k as f64 };
        if signed == 0.0 {
            continue;
        }
        let lam = T::two_pi() * T::lit(signed / clock_size as f64) / t;
        let s = (c / lam).max(-T::one()).min(T::one());
        let co = (T::one() - s * s).sqrt();
        for sys in 0..dim {
            let i0 = sys | (k << ns);
            let a0 = amps[i0];
            amps[i0] = a0 * co;
            amps[i0 | anc] = a0 * s;
        }
    }
    let mut st = StateVector::from_amplitudes(amps)?;
    st.apply_qft(ns, nc, false);
    controlled_powers(&mut st, &powers, ns, nc, true);
    for j in 0..nc {
        st.apply_hadamard(ns + j);
    }

    // post-select ancilla = 1, clock = 0
    let branch = CVector::from_fn(dim, |i, _| st.amplitudes()[i | anc]);
    let prob = branch.norm_squared();
    if prob <= T::zero() {
        return Err(Error::Singular("post-selection probability vanished".into()));
    }
    let x = branch * Complex::new(bnorm / c, T::zero());
    let exact = solve(a, b)?;
    let ov = exact.dotc(&x);
    let fid = ov.norm_sqr() / (exact.norm_squared() * x.norm_squared());
    Ok(HhlSolution {
        x,
        post_selection_probability: Some(prob),
        fidelity_estimate: Some(fid),
        clock_histogram: Some(hist),
        evolution_time: Some(t),
        rotation_constant: Some(c),
    })
}

fn controlled_powers<T: Real>(st: &mut StateVector<T>, powers: &[CMatrix<T>], ns: usize, nc: usize, inverse: bool) {
    let dim = 1usize << ns;
    let mut amps = st.clone().into_amplitudes();
    let blocks = amps.len() / dim;
    for (j, u) in powers.iter().enumerate().take(nc) {
        let u = if inverse { u.adjoint() } else { u.clone() };
        let bit = 1usize << j;
        for blk in 0..blocks {
            if (blk & bit) == 0 {
                continue;
            }
            let base = blk * dim;
            let v = amps.rows(base, dim).into_owned();
            amps.rows_mut(base, dim).copy_from(&(&u * v));
        }
    }
    *st = StateVector::from_amplitudes(amps).expect("power-of-two register");
}

/// Solves a complex system `C x = b` through the Hermitian embedding with
/// right-hand side `(b, 0)`, as two real-vector solves.
pub fn solve_complex_linear<T: Real>(c: &CMatrix<T>, b: &CVector<T>, cfg: &HhlBackendConfig<T>) -> Result<CVector<T>> {
    Ok(solve_complex_linear_detailed(c, b, cfg)?.0)
}

/// As [`solve_complex_linear`], also returning the diagnostics of the
/// real and imaginary sub-solves.
pub fn solve_complex_linear_detailed<T: Real>(
    c: &CMatrix<T>,
    b: &CVector<T>,
    cfg: &HhlBackendConfig<T>,
) -> Result<(CVector<T>, Vec<HhlSolution<T>>)> {
    let n = c.nrows();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let big = hermitian_embed(c)?;
    let part = |f: fn(&Complex<T>) -> T| DVector::from_fn(2 * n, |i, _| if i < n { f(&b[i]) } else { T::zero() });
    let re = part(|z| z.re);
    let im = part(|z| z.im);
    let zero = T::zero();
    let run = |rhs: &DVector<T>| -> Result<Option<HhlSolution<T>>> {
        if rhs.iter().all(|&v| v == zero) {
            Ok(None)
        } else {
            hhl_solve(&big, rhs, cfg).map(Some)
        }
    };
    let (sr, si) = rayon::join(|| run(&re), || run(&im));
    let (sr, si) = (sr?, si?);
    if sr.is_none() && si.is_none() {
        return Err(Error::InvalidConfig("right-hand side must be nonzero".into()));
    }
    let mut x = CVector::zeros(n);
    let mut diag = Vec::new();
    if let Some(s) = sr {
        x += s.x.rows(n, n);
        diag.push(s);
    }
    if let Some(s) = si {
        x += s.x.rows(n, n) * Complex::new(T::zero(), T::one());
        diag.push(s);
    }
    Ok((x, diag))
}
