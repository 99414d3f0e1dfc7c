//! Iterative HHL eigensolver for complex-symmetric generalized problems.
//!
//! Each step solves `C(E, β) φ' = φ` with `C = (M - (E - β)) / β`, where
//! `M = N^{-1} H`, then c-normalizes `φ'` and updates `E`.

use nalgebra::{Complex, ComplexField};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hhl::{solve_complex_linear_detailed, Backend, HhlBackendConfig};
use crate::io::{matrix_from_pairs, matrix_to_pairs, to_csv, Pair};
use crate::linalg::{condition_number, solve_matrix};
use crate::scalar::{cabs, CMatrix, CVector, Real};

/// Factor applied to β after a singular `C`.
pub const BETA_RETRY_FACTOR: f64 = 1.37;
pub const MAX_BETA_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedEigenProblem<T: Real> {
    pub h: CMatrix<T>,
    pub n: CMatrix<T>,
    pub label: String,
}

impl<T: Real> GeneralizedEigenProblem<T> {
    pub fn new(h: CMatrix<T>, n: CMatrix<T>, label: impl Into<String>) -> Result<Self> {
        if h.nrows() != h.ncols() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), found: h.ncols() });
        }
        if n.shape() != h.shape() {
            return Err(Error::DimensionMismatch { expected: h.nrows(), found: n.nrows() });
        }
        Ok(Self { h, n, label: label.into() })
    }

    /// Standard problem with identity metric.
    pub fn standard(h: CMatrix<T>, label: impl Into<String>) -> Result<Self> {
        let d = h.nrows();
        Self::new(h, CMatrix::identity(d, d), label)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn metric_condition(&self) -> T {
        condition_number(&self.n)
    }

    pub fn to_file(&self) -> ProblemFile {
        ProblemFile { label: self.label.clone(), h: matrix_to_pairs(&self.h), n: matrix_to_pairs(&self.n) }
    }

    pub fn from_file(f: &ProblemFile) -> Result<Self> {
        Self::new(matrix_from_pairs(&f.h)?, matrix_from_pairs(&f.n)?, f.label.clone())
    }
}

/// JSON form: `H` and `N` as nested `[re, im]` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default)]
    pub label: String,
    #[serde(rename = "H")]
    pub h: Vec<Vec<Pair>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    /// c-Rayleigh quotient of the new iterate.
    Rayleigh,
    /// `(E_k - β) + β c(φ_k, φ_k) / c(φ_k, φ_{k+1})`.
    ShiftedInverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct IhhlConfig<T> {
    pub beta: [T; 2],
    /// `|ΔE|` tolerance; defaults by backend when absent.
    pub tolerance: Option<T>,
    pub max_iterations: usize,
    pub hhl: HhlBackendConfig<T>,
    pub deflation_constant: T,
    pub energy_mode: EnergyMode,
    pub residual_tolerance: T,
    pub condition_cap: T,
}

impl<T: Real> Default for IhhlConfig<T> {
    fn default() -> Self {
        Self {
            beta: [T::one(), T::zero()],
            tolerance: None,
            max_iterations: 200,
            hhl: HhlBackendConfig::default(),
            deflation_constant: T::lit(100.0),
            energy_mode: EnergyMode::Rayleigh,
            residual_tolerance: T::lit(1e-6),
            condition_cap: T::lit(1e12),
        }
    }
}

impl<T: Real> IhhlConfig<T> {
    pub fn with_beta(beta: Complex<T>) -> Self {
        Self { beta: [beta.re, beta.im], ..Self::default() }
    }

    pub fn beta(&self) -> Complex<T> {
        Complex::new(self.beta[0], self.beta[1])
    }

    pub fn effective_tolerance(&self) -> T {
        self.tolerance.unwrap_or_else(|| match self.hhl.backend {
            Backend::Ideal => T::lit(1e-8),
            Backend::Qpe => T::lit(1e-4),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta() == Complex::new(T::zero(), T::zero()) {
            return Err(Error::ZeroBeta);
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.effective_tolerance() > T::zero()) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IhhlStep {
    pub iter: usize,
    #[serde(rename = "re_E")]
    pub re_e: f64,
    #[serde(rename = "im_E")]
    pub im_e: f64,
    pub residual: f64,
    /// `|c(φ', φ')|` of the raw iterate before normalization.
    pub c_norm: f64,
    pub post_selection_probability: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IhhlTrace<T> {
    pub steps: Vec<IhhlStep>,
    #[serde(skip)]
    _marker: std::marker::PhantomData<T>,
}

impl<T: Real> IhhlTrace<T> {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Energies `E_0, E_1, ...`.
    pub fn energies(&self) -> Vec<Complex<T>> {
        self.steps.iter().map(|s| Complex::new(T::lit(s.re_e), T::lit(s.im_e))).collect()
    }

    /// CSV with columns `iter, re_E, im_E, residual` (plus diagnostics).
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row {
            iter: usize,
            #[serde(rename = "re_E")]
            re_e: f64,
            #[serde(rename = "im_E")]
            im_e: f64,
            residual: f64,
            post_selection_probability: Option<f64>,
        }
        let rows: Vec<Row> = self
            .steps
            .iter()
            .map(|s| Row { iter: s.iter, re_e: s.re_e, im_e: s.im_e, residual: s.residual, post_selection_probability: s.post_selection_probability })
            .collect();
        to_csv(&rows)
    }
}

#[derive(Debug, Clone)]
pub struct IhhlOutcome<T: Real> {
    pub energy: Complex<T>,
    pub vector: CVector<T>,
    pub trace: IhhlTrace<T>,
    pub converged: bool,
    pub iterations: usize,
    /// β actually used at the end (after any singular-C retries).
    pub beta: Complex<T>,
    pub beta_retries: usize,
    pub residual: T,
}

/// Bilinear pairing `Σ u_i v_i` without conjugation.
pub fn c_product<T: Real>(u: &CVector<T>, v: &CVector<T>) -> Result<Complex<T>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), found: v.len() });
    }
    Ok(u.dot(v))
}

/// `M = N^{-1} H`, rejecting metrics with condition estimate above `cap`.
pub fn reduce_generalized<T: Real>(p: &GeneralizedEigenProblem<T>, cap: T) -> Result<CMatrix<T>> {
    let cond = p.metric_condition();
    if !(cond <= cap) {
        return Err(Error::IllConditioned { condition: cond.to_f64_lossy(), cap: cap.to_f64_lossy() });
    }
    solve_matrix(&p.n, &p.h)
}

/// `C = (M - (E - β) I) / β`.
pub fn build_c_matrix<T: Real>(m: &CMatrix<T>, e: Complex<T>, beta: Complex<T>) -> Result<CMatrix<T>> {
    if beta == Complex::new(T::zero(), T::zero()) {
        return Err(Error::ZeroBeta);
    }
    let mut c = m.clone();
    for k in 0..c.nrows() {
        c[(k, k)] -= e - beta;
    }
    Ok(c / beta)
}

/// `c(φ, Mφ) / c(φ, φ)`.
pub fn c_rayleigh<T: Real>(m: &CMatrix<T>, phi: &CVector<T>) -> Result<Complex<T>> {
    let den = c_product(phi, phi)?;
    if cabs(den) < T::lit(1e-300).max(T::min_value().unwrap()) {
        return Err(Error::DegenerateCNorm(cabs(den).to_f64_lossy()));
    }
    Ok(c_product(phi, &(m * phi))? / den)
}

fn degenerate_cnorm<T: Real>(phi: &CVector<T>) -> Option<T> {
    let cn = cabs(phi.dot(phi));
    if cn < T::lit(1e-12) * phi.norm_squared() {
        Some(cn)
    } else {
        None
    }
}

/// Divides by a square root of the c-norm; the branch makes the
/// largest-magnitude component have positive real part.
pub fn c_normalize<T: Real>(phi: &CVector<T>) -> Result<CVector<T>> {
    if let Some(cn) = degenerate_cnorm(phi) {
        return Err(Error::DegenerateCNorm(cn.to_f64_lossy()));
    }
    let s = ComplexField::sqrt(phi.dot(phi));
    let mut out = phi / s;
    let big = out.iter().fold((T::zero(), Complex::new(T::zero(), T::zero())), |acc, z| if cabs(*z) > acc.0 { (cabs(*z), *z) } else { acc }).1;
    if big.re < T::zero() {
        out = -out;
    }
    Ok(out)
}

fn perturb<T: Real>(phi: &CVector<T>, k: usize) -> CVector<T> {
    let scale = phi.norm() * T::lit(1e-3);
    CVector::from_fn(phi.len(), |i, _| {
        let a = T::lit(((i + 1) * (k + 3)) as f64 * 0.618_033_988_75);
        phi[i] + Complex::new(ComplexField::cos(a), ComplexField::sin(a)) * scale
    })
}

/// Runs the fixed-point iteration from `φ₀`; `e0` defaults to the
/// c-Rayleigh quotient of `φ₀`.
pub fn ihhl_iterate<T: Real>(
    p: &GeneralizedEigenProblem<T>,
    phi0: &CVector<T>,
    e0: Option<Complex<T>>,
    cfg: &IhhlConfig<T>,
) -> Result<IhhlOutcome<T>> {
    cfg.validate()?;
    let m = reduce_generalized(p, cfg.condition_cap)?;
    iterate_reduced(&m, phi0, e0, cfg)
}

/// [`ihhl_iterate`] on an already reduced matrix `M`.
pub fn iterate_reduced<T: Real>(m: &CMatrix<T>, phi0: &CVector<T>, e0: Option<Complex<T>>, cfg: &IhhlConfig<T>) -> Result<IhhlOutcome<T>> {
    cfg.validate()?;
    if phi0.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: phi0.len() });
    }
    if phi0.norm() == T::zero() {
        return Err(Error::InvalidConfig("initial vector must be nonzero".into()));
    }
    let mut phi = c_normalize(phi0)?;
    let mut e = match e0 {
        Some(e) => e,
        None => c_rayleigh(m, &phi)?,
    };
    let eps = cfg.effective_tolerance();
    let mut beta = cfg.beta();
    let mut retries = 0;
    let mut trace = IhhlTrace::default();
    let residual_of = |phi: &CVector<T>, e: Complex<T>| (m * phi - phi * e).norm() / phi.norm();
    let mut residual = residual_of(&phi, e);
    trace.steps.push(IhhlStep {
        iter: 0,
        re_e: e.re.to_f64_lossy(),
        im_e: e.im.to_f64_lossy(),
        residual: residual.to_f64_lossy(),
        c_norm: 1.0,
        post_selection_probability: None,
    });
    let mut converged = false;
    let mut k = 0;
    let mut restarts = 0;
    while k < cfg.max_iterations {
        let c = build_c_matrix(m, e, beta)?;
        let (raw, diag) = match solve_complex_linear_detailed(&c, &phi, &cfg.hhl) {
            Ok(r) => r,
            Err(Error::Singular(msg)) => {
                if retries >= MAX_BETA_RETRIES {
                    return Err(Error::Singular(format!("{msg}; beta retries exhausted")));
                }
                retries += 1;
                beta *= T::lit(BETA_RETRY_FACTOR);
                continue;
            }
            Err(err) => return Err(err),
        };
        let raw = match degenerate_cnorm(&raw) {
            Some(cn) if restarts >= MAX_BETA_RETRIES => return Err(Error::DegenerateCNorm(cn.to_f64_lossy())),
            Some(_) => {
                restarts += 1;
                phi = c_normalize(&perturb(&phi, restarts))?;
                continue;
            }
            None => raw,
        };
        k += 1;
        let c_norm = cabs(raw.dot(&raw));
        let next = c_normalize(&raw)?;
        let e_new = match cfg.energy_mode {
            EnergyMode::Rayleigh => c_rayleigh(m, &next)?,
            EnergyMode::ShiftedInverse => (e - beta) + beta * phi.dot(&phi) / phi.dot(&raw),
        };
        residual = residual_of(&next, e_new);
        let prob = diag.iter().filter_map(|d| d.post_selection_probability).fold(None, |a: Option<T>, p| Some(a.map_or(p, |q| q.min(p))));
        trace.steps.push(IhhlStep {
            iter: k,
            re_e: e_new.re.to_f64_lossy(),
            im_e: e_new.im.to_f64_lossy(),
            residual: residual.to_f64_lossy(),
            c_norm: c_norm.to_f64_lossy(),
            post_selection_probability: prob.map(Real::to_f64_lossy),
        });
        let delta = cabs(e_new - e);
        e = e_new;
        phi = next;
        let residual_ok = cfg.hhl.backend == Backend::Qpe || residual <= cfg.residual_tolerance;
        if delta <= eps && residual_ok {
            converged = true;
            break;
        }
    }
    Ok(IhhlOutcome { energy: e, vector: phi, trace, converged, iterations: k, beta, beta_retries: retries, residual })
}

/// Result of [`deflate`]: the shifted matrix and indices of skipped states.
#[derive(Debug, Clone)]
pub struct Deflated<T: Real> {
    pub matrix: CMatrix<T>,
    pub skipped: Vec<usize>,
}

/// `M + c Σ φ_i φ_i^T / c(φ_i, φ_i)`; found eigenvalues move by `c`, the
/// rest of the spectrum is unchanged.
pub fn deflate<T: Real>(m: &CMatrix<T>, found: &[(Complex<T>, CVector<T>)], c: T) -> Result<Deflated<T>> {
    let mut out = m.clone();
    let mut skipped = Vec::new();
    for (i, (_, phi)) in found.iter().enumerate() {
        if phi.len() != m.nrows() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: phi.len() });
        }
        if degenerate_cnorm(phi).is_some() {
            skipped.push(i);
            continue;
        }
        let cn = phi.dot(phi);
        out += (phi * phi.transpose()) * (Complex::new(c, T::zero()) / cn);
    }
    Ok(Deflated { matrix: out, skipped })
}
