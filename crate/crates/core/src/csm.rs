//! Complex-scaling laboratory for a two-body system in a Gaussian basis.
//!
//! Radial basis `u_i(r) = r^{l+1} exp(-p_i r^2)` with `p_i = 1/(2 b_i^2)`.
//! Scaling angle convention: `γ < 0` rotates the continuum to `arg E = 2γ`
//! (lower half plane); internally `r -> r e^{iθ}` with `θ = -γ`.

use nalgebra::{Complex, ComplexField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ihhl::{c_normalize, iterate_reduced, reduce_generalized, GeneralizedEigenProblem, IhhlConfig};
use crate::io::to_csv;
use crate::linalg::{generalized_eig, nearest_index};
use crate::scalar::{cabs, rad_to_deg, CMatrix, CVector, Real};

/// Tie tolerance for trajectory matching.
pub const TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianBasis<T> {
    pub l: u32,
    /// Widths `b_i` in fm, strictly increasing.
    pub widths: Vec<T>,
}

impl<T: Real> GaussianBasis<T> {
    pub fn new(l: u32, widths: Vec<T>) -> Result<Self> {
        let b = Self { l, widths };
        b.validate()?;
        Ok(b)
    }

    /// `b_k = b1 * ratio^k`, `k = 0..n`.
    pub fn geometric(l: u32, b1: T, ratio: T, n: usize) -> Result<Self> {
        let widths = (0..n).map(|k| b1 * ratio.powi(k as i32)).collect();
        Self::new(l, widths)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l > 2 {
            return Err(Error::InvalidConfig("orbital momentum limited to l <= 2".into()));
        }
        if self.widths.is_empty() {
            return Err(Error::InvalidConfig("basis needs at least one width".into()));
        }
        if self.widths.iter().any(|&b| !(b > T::zero())) {
            return Err(Error::InvalidConfig("widths must be positive".into()));
        }
        if self.widths.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("widths must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.widths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.widths.is_empty()
    }

    fn exponents(&self) -> Vec<T> {
        self.widths.iter().map(|&b| T::one() / (T::lit(2.0) * b * b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent<T> {
    pub depth_mev: T,
    pub range_fm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoBodySystem<T> {
    /// `ħ²/2μ` in MeV fm².
    pub kinetic_scale: T,
    pub potential: Vec<GaussianComponent<T>>,
    /// `Z1 Z2 e²` in MeV fm.
    #[serde(default)]
    pub coulomb_strength: T,
    /// Multiplier on the nuclear part.
    pub coupling: T,
}

impl<T: Real> TwoBodySystem<T> {
    pub fn validate(&self) -> Result<()> {
        if self.potential.is_empty() {
            return Err(Error::InvalidConfig("at least one potential component required".into()));
        }
        if self.potential.iter().any(|c| !(c.range_fm > T::zero())) {
            return Err(Error::InvalidConfig("potential ranges must be positive".into()));
        }
        if !(self.kinetic_scale > T::zero()) || self.coulomb_strength < T::zero() {
            return Err(Error::InvalidConfig("kinetic scale must be positive and Coulomb strength non-negative".into()));
        }
        Ok(())
    }

    /// Attractive core plus repulsive barrier used as the benchmark.
    pub fn barrier(core_depth: T, core_range: T, barrier_height: T, barrier_range: T) -> Self {
        Self {
            kinetic_scale: T::one(),
            potential: vec![
                GaussianComponent { depth_mev: core_depth, range_fm: core_range },
                GaussianComponent { depth_mev: barrier_height, range_fm: barrier_range },
            ],
            coulomb_strength: T::zero(),
            coupling: T::one(),
        }
    }
}

/// `Γ(k/2)` for positive integers `k`.
pub fn gamma_half<T: Real>(k: u32) -> T {
    let (mut g, mut x) = if k % 2 == 0 { (T::one(), T::one()) } else { (T::pi().sqrt(), T::lit(0.5)) };
    let target = T::lit(k as f64 * 0.5);
    while x < target {
        g *= x;
        x += T::one();
    }
    g
}

/// `∫_0^∞ r^n exp(-s r²) dr = Γ((n+1)/2) / (2 s^{(n+1)/2})` for `Re s > 0`.
pub fn gauss_moment<T: Real>(n: u32, s: Complex<T>) -> Complex<T> {
    let e = T::lit((n + 1) as f64 * 0.5);
    Complex::new(gamma_half::<T>(n + 1) * T::lit(0.5), T::zero()) / ComplexField::powf(s, e)
}

fn norms<T: Real>(basis: &GaussianBasis<T>) -> Vec<T> {
    let n = 2 * basis.l + 2;
    basis
        .exponents()
        .iter()
        .map(|&p| gauss_moment::<T>(n, Complex::new(p + p, T::zero())).re.sqrt())
        .collect()
}

fn assemble<T: Real>(basis: &GaussianBasis<T>, f: impl Fn(T, T) -> Complex<T>) -> CMatrix<T> {
    let p = basis.exponents();
    let nrm = norms(basis);
    let n = basis.len();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = f(p[i], p[j]) / Complex::new(nrm[i] * nrm[j], T::zero());
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Normalized overlap, `N_ii = 1`.
pub fn overlap_matrix<T: Real>(basis: &GaussianBasis<T>) -> CMatrix<T> {
    let n = 2 * basis.l + 2;
    assemble(basis, |a, b| gauss_moment(n, Complex::new(a + b, T::zero())))
}

/// Unscaled kinetic block `ħ²/2μ ∫ (u_i' u_j' + l(l+1)/r² u_i u_j) dr`.
pub fn kinetic_matrix<T: Real>(basis: &GaussianBasis<T>, kinetic_scale: T) -> CMatrix<T> {
    let n = 2 * basis.l + 2;
    let f = T::lit((2 * basis.l + 3) as f64) * T::lit(2.0) * kinetic_scale;
    assemble(basis, |a, b| gauss_moment(n, Complex::new(a + b, T::zero())) * (f * a * b / (a + b)))
}

/// Gaussian `V0 exp(-(r e^{iθ})²/a²)` block.
pub fn gaussian_potential_matrix<T: Real>(basis: &GaussianBasis<T>, depth: T, range: T, theta: T) -> CMatrix<T> {
    let n = 2 * basis.l + 2;
    let two_theta = theta + theta;
    let mu = Complex::new(ComplexField::cos(two_theta), ComplexField::sin(two_theta)) / (range * range);
    assemble(basis, |a, b| gauss_moment(n, Complex::new(a + b, T::zero()) + mu) * depth)
}

/// Unscaled Coulomb block `Z1Z2e² ∫ u_i u_j / r dr`.
pub fn coulomb_matrix<T: Real>(basis: &GaussianBasis<T>, strength: T) -> CMatrix<T> {
    let n = 2 * basis.l + 1;
    assemble(basis, |a, b| gauss_moment(n, Complex::new(a + b, T::zero())) * strength)
}

/// Complex-scaled problem at angle `γ` (radians, `|γ| < π/4`).
pub fn build_hamiltonian<T: Real>(sys: &TwoBodySystem<T>, basis: &GaussianBasis<T>, gamma: T) -> Result<GeneralizedEigenProblem<T>> {
    if !(gamma.abs() < T::frac_pi_4()) {
        return Err(Error::AngleOutOfBounds(gamma.to_f64_lossy()));
    }
    sys.validate()?;
    basis.validate()?;
    let theta = -gamma;
    let kin_phase = Complex::new(ComplexField::cos(theta + theta), -ComplexField::sin(theta + theta));
    let coul_phase = Complex::new(ComplexField::cos(theta), -ComplexField::sin(theta));
    let mut h = kinetic_matrix(basis, sys.kinetic_scale) * kin_phase;
    for c in &sys.potential {
        h += gaussian_potential_matrix(basis, c.depth_mev * sys.coupling, c.range_fm, theta);
    }
    if sys.coulomb_strength > T::zero() {
        h += coulomb_matrix(basis, sys.coulomb_strength) * coul_phase;
    }
    let label = format!("csm gamma={:.4} deg", rad_to_deg(gamma).to_f64_lossy());
    GeneralizedEigenProblem::new(h, overlap_matrix(basis), label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSolver {
    Dense,
    Ihhl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub id: usize,
    /// Energy per angle index.
    pub energies: Vec<Complex<T>>,
    /// Angle indices where two candidates were within the tie tolerance.
    pub ambiguous_at: Vec<usize>,
}

impl<T: Real> Trajectory<T> {
    pub fn is_ambiguous(&self) -> bool {
        !self.ambiguous_at.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsmSweep<T> {
    /// Scaling angles in radians, strictly monotone.
    pub angles: Vec<T>,
    pub trajectories: Vec<Trajectory<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonanceMethod {
    Stabilization,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceResult<T> {
    pub energy: Complex<T>,
    /// Optimal angle in radians.
    pub gamma_opt: T,
    /// `|dE/dγ|` at the optimum, MeV per radian.
    pub rate: T,
    pub method: ResonanceMethod,
}

impl<T: Real> ResonanceResult<T> {
    pub fn method_name(&self) -> &'static str {
        match self.method {
            ResonanceMethod::Stabilization => "stabilization",
            ResonanceMethod::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_deg: f64,
    pub trajectory_id: usize,
    #[serde(rename = "re_E")]
    pub re_e: f64,
    #[serde(rename = "im_E")]
    pub im_e: f64,
    pub rate: Option<f64>,
}

impl<T: Real> CsmSweep<T> {
    pub fn trajectory(&self, id: usize) -> Result<&Trajectory<T>> {
        self.trajectories.iter().find(|t| t.id == id).ok_or(Error::UnknownTrajectory(id))
    }

    /// Trajectory whose energy at `angle_index` is closest to `target`.
    pub fn trajectory_near(&self, angle_index: usize, target: Complex<T>) -> Option<usize> {
        let vals: Vec<Complex<T>> = self.trajectories.iter().map(|t| t.energies[angle_index]).collect();
        if vals.is_empty() {
            return None;
        }
        Some(self.trajectories[nearest_index(&vals, target)].id)
    }

    /// Central-difference `|dE/dγ|` along a trajectory; endpoints are `None`.
    pub fn rates(&self, id: usize) -> Result<Vec<Option<T>>> {
        let t = self.trajectory(id)?;
        let n = self.angles.len();
        Ok((0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    None
                } else {
                    Some(cabs(t.energies[i + 1] - t.energies[i - 1]) / (self.angles[i + 1] - self.angles[i - 1]).abs())
                }
            })
            .collect())
    }

    pub fn rows(&self) -> Result<Vec<SweepRow>> {
        let mut rows = Vec::new();
        for t in &self.trajectories {
            let rates = self.rates(t.id)?;
            for (i, e) in t.energies.iter().enumerate() {
                rows.push(SweepRow {
                    gamma_deg: rad_to_deg(self.angles[i]).to_f64_lossy(),
                    trajectory_id: t.id,
                    re_e: e.re.to_f64_lossy(),
                    im_e: e.im.to_f64_lossy(),
                    rate: rates[i].map(Real::to_f64_lossy),
                });
            }
        }
        Ok(rows)
    }

    /// CSV columns `gamma_deg, trajectory_id, re_E, im_E, rate`.
    pub fn to_csv(&self) -> Result<String> {
        to_csv(&self.rows()?)
    }
}

fn check_angles<T: Real>(angles: &[T]) -> Result<()> {
    if angles.len() < 3 {
        return Err(Error::TooFewAngles { needed: 3, found: angles.len() });
    }
    let inc = angles[1] > angles[0];
    if angles.windows(2).any(|w| (w[1] > w[0]) != inc || w[1] == w[0]) {
        return Err(Error::InvalidConfig("angles must be strictly monotone".into()));
    }
    Ok(())
}

/// Full spectra at each angle, matched into trajectories by nearest
/// eigenvalue (eigenvector c-overlap breaks ties).
pub fn sweep_dense<T: Real>(sys: &TwoBodySystem<T>, basis: &GaussianBasis<T>, angles: &[T]) -> Result<CsmSweep<T>> {
    check_angles(angles)?;
    let spectra: Vec<(Vec<Complex<T>>, CMatrix<T>)> = angles
        .par_iter()
        .map(|&g| {
            let p = build_hamiltonian(sys, basis, g)?;
            let d = generalized_eig(&p.h, &p.n)?;
            Ok((d.values, d.vectors))
        })
        .collect::<Result<_>>()?;
    let n = spectra[0].0.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| spectra[0].0[a].re.partial_cmp(&spectra[0].0[b].re).unwrap());
    let mut trajectories: Vec<Trajectory<T>> = order
        .iter()
        .enumerate()
        .map(|(id, &k)| Trajectory { id, energies: vec![spectra[0].0[k]], ambiguous_at: vec![] })
        .collect();
    let mut prev_vecs: Vec<CVector<T>> = order.iter().map(|&k| spectra[0].1.column(k).into_owned()).collect();
    let tie = T::lit(TIE_TOLERANCE);
    for (ai, (vals, vecs)) in spectra.iter().enumerate().skip(1) {
        // greedy global assignment by increasing distance
        let mut pairs: Vec<(T, usize, usize)> = Vec::with_capacity(n * n);
        for (ti, t) in trajectories.iter().enumerate() {
            let last = *t.energies.last().unwrap();
            for (k, v) in vals.iter().enumerate() {
                pairs.push((cabs(*v - last), ti, k));
            }
        }
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut taken_t = vec![false; n];
        let mut taken_e = vec![false; n];
        let mut assignment = vec![usize::MAX; n];
        for &(d, ti, k) in &pairs {
            if taken_t[ti] || taken_e[k] {
                continue;
            }
            // another free candidate within the tie tolerance?
            let rival = pairs
                .iter()
                .find(|&&(d2, t2, k2)| t2 == ti && k2 != k && !taken_e[k2] && (d2 - d).abs() <= tie)
                .map(|&(_, _, k2)| k2);
            let mut pick = k;
            if let Some(k2) = rival {
                trajectories[ti].ambiguous_at.push(ai);
                let ov = |kk: usize| cabs(prev_vecs[ti].dot(&vecs.column(kk).into_owned()));
                if ov(k2) > ov(k) {
                    pick = k2;
                }
            }
            taken_t[ti] = true;
            taken_e[pick] = true;
            assignment[ti] = pick;
        }
        for (ti, &k) in assignment.iter().enumerate() {
            trajectories[ti].energies.push(vals[k]);
            prev_vecs[ti] = vecs.column(k).into_owned();
        }
    }
    Ok(CsmSweep { angles: angles.to_vec(), trajectories })
}

/// Follows one eigenvalue across the angles with IHHL, seeding each angle
/// with the previous eigenpair. The start is the dense eigenpair nearest
/// `target` at the first angle.
pub fn sweep_ihhl<T: Real>(
    sys: &TwoBodySystem<T>,
    basis: &GaussianBasis<T>,
    angles: &[T],
    target: Complex<T>,
    cfg: &IhhlConfig<T>,
) -> Result<CsmSweep<T>> {
    check_angles(angles)?;
    let p0 = build_hamiltonian(sys, basis, angles[0])?;
    let d0 = generalized_eig(&p0.h, &p0.n)?;
    let k0 = d0.nearest(target);
    let mut e = d0.values[k0];
    let mut phi = c_normalize(&d0.vector(k0))?;
    let mut energies = Vec::with_capacity(angles.len());
    for &g in angles {
        let p = build_hamiltonian(sys, basis, g)?;
        let m = reduce_generalized(&p, cfg.condition_cap)?;
        let out = iterate_reduced(&m, &phi, Some(e), cfg)?;
        if !out.converged {
            return Err(Error::NonConvergence(format!("IHHL at gamma = {} rad", g.to_f64_lossy())));
        }
        e = out.energy;
        phi = out.vector;
        energies.push(e);
    }
    Ok(CsmSweep { angles: angles.to_vec(), trajectories: vec![Trajectory { id: 0, energies, ambiguous_at: vec![] }] })
}

/// Dispatches to [`sweep_dense`] or [`sweep_ihhl`].
pub fn sweep_angles<T: Real>(
    sys: &TwoBodySystem<T>,
    basis: &GaussianBasis<T>,
    angles: &[T],
    solver: SweepSolver,
    target: Option<Complex<T>>,
    cfg: &IhhlConfig<T>,
) -> Result<CsmSweep<T>> {
    match solver {
        SweepSolver::Dense => sweep_dense(sys, basis, angles),
        SweepSolver::Ihhl => {
            let t = target.ok_or_else(|| Error::InvalidConfig("ihhl sweep needs a target energy".into()))?;
            sweep_ihhl(sys, basis, angles, t, cfg)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StabilizationOptions {
    /// Refine the optimum with a three-point parabola through the rates.
    pub interpolate: bool,
    /// Report the integer-degree grid angle closest to the refined optimum.
    pub snap_to_degree: bool,
}

/// Angle of minimal `|dE/dγ|` along a trajectory.
pub fn find_stabilization<T: Real>(sweep: &CsmSweep<T>, trajectory_id: usize, opts: StabilizationOptions) -> Result<ResonanceResult<T>> {
    let n = sweep.angles.len();
    if n < 3 {
        return Err(Error::TooFewAngles { needed: 3, found: n });
    }
    let traj = sweep.trajectory(trajectory_id)?;
    let rates = sweep.rates(trajectory_id)?;
    let interior: Vec<(usize, T)> = rates.iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r))).collect();
    let &(imin, rmin) = interior
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("at least one interior angle");
    // the minimum must be strictly inside the rate profile
    if interior.len() < 3 || imin == interior[0].0 || imin == interior[interior.len() - 1].0 {
        return Err(Error::NoResonance);
    }
    let (r0, r2) = (rates[imin - 1].unwrap(), rates[imin + 1].unwrap());
    if !(r0 > rmin && r2 > rmin) && !(rmin == T::zero()) {
        return Err(Error::NoResonance);
    }
    let mut gamma = sweep.angles[imin];
    let mut rate = rmin;
    let mut energy = traj.energies[imin];
    if opts.interpolate || opts.snap_to_degree {
        let h = sweep.angles[imin + 1] - sweep.angles[imin];
        let denom = r0 - rmin - rmin + r2;
        if denom > T::zero() {
            let off = T::lit(0.5) * (r0 - r2) / denom;
            gamma = sweep.angles[imin] + off * h;
            rate = (rmin - T::lit(0.25) * (r0 - r2) * off).max(T::zero());
            // quadratic interpolation of E at the refined angle
            let (e0, e1, e2) = (traj.energies[imin - 1], traj.energies[imin], traj.energies[imin + 1]);
            let o = Complex::new(off, T::zero());
            let half = Complex::new(T::lit(0.5), T::zero());
            energy = e1 + (e2 - e0) * half * o + (e2 - e1 - e1 + e0) * half * o * o;
        }
    }
    if opts.snap_to_degree {
        let target = rad_to_deg(gamma).round();
        let k = (0..n)
            .min_by(|&a, &b| {
                let da = (rad_to_deg(sweep.angles[a]) - target).abs();
                let db = (rad_to_deg(sweep.angles[b]) - target).abs();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        gamma = sweep.angles[k];
        energy = traj.energies[k];
        rate = rates[k].unwrap_or(rate);
    }
    Ok(ResonanceResult { energy, gamma_opt: gamma, rate, method: ResonanceMethod::Stabilization })
}

/// Integer-degree grid `0, -1, ..., -max_deg` in radians.
pub fn degree_grid<T: Real>(max_deg: u32) -> Vec<T> {
    (0..=max_deg).map(|d| crate::scalar::deg_to_rad(T::lit(-(d as f64)))).collect()
}

/// Real symmetric overlap matrix as a real dense matrix.
pub fn overlap_real<T: Real>(basis: &GaussianBasis<T>) -> nalgebra::DMatrix<T> {
    overlap_matrix(basis).map(|z| z.re)
}
