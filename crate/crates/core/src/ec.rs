//! Eigenvector continuation: real bound-state training vectors, c-product
//! projection of complex-scaled targets, and the small-space IHHL solve.

use std::collections::BTreeMap;

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::AnsatzLayout;
use crate::csm::{find_stabilization, CsmSweep, GaussianBasis, GaussianComponent, ResonanceMethod, ResonanceResult, StabilizationOptions, Trajectory, TwoBodySystem};
use crate::error::{Error, Result};
use crate::ihhl::{c_normalize, iterate_reduced, reduce_generalized, GeneralizedEigenProblem, IhhlConfig, IhhlOutcome};
use crate::io::{matrix_from_pairs, matrix_to_pairs, vector_from_pairs, vector_to_pairs, MatrixPairs, Pair};
use crate::linalg::{condition_number, gershgorin_bounds, generalized_hermitian_eig, singular_values};
use crate::scalar::{cabs, CMatrix, CVector, Real};
use crate::vqe::{pad_problem, train, TrainingConfig, TrainingStatus};

/// Condition cap on `N^EC` before trimming kicks in.
pub const EC_CONDITION_CAP: f64 = 1e10;

/// Named real couplings, e.g. `{"lambda": 2.0, "barrier": 1.0}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EcParameterPoint {
    pub couplings: BTreeMap<String, f64>,
}

impl EcParameterPoint {
    pub fn new<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let couplings: BTreeMap<String, f64> = pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        if couplings.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("couplings must be finite".into()));
        }
        Ok(Self { couplings })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.couplings.get(name).copied()
    }
}

impl std::fmt::Display for EcParameterPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.couplings.iter().map(|(k, v)| format!("{k}={v}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingSource {
    Dense,
    Qnn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EcTrainingSet<T: Real> {
    pub points: Vec<EcParameterPoint>,
    pub vectors: Vec<CVector<T>>,
    pub source: TrainingSource,
    pub metric: CMatrix<T>,
    /// Ground energy reported by the trainer for each point.
    pub energies: Vec<T>,
}

impl<T: Real> EcTrainingSet<T> {
    pub fn new(points: Vec<EcParameterPoint>, vectors: Vec<CVector<T>>, source: TrainingSource, metric: CMatrix<T>, energies: Vec<T>) -> Result<Self> {
        let s = Self { points, vectors, source, metric, energies };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() != self.vectors.len() || self.energies.len() != self.vectors.len() {
            return Err(Error::InvalidConfig("points, vectors and energies must have equal length".into()));
        }
        let tol = T::lit(match self.source {
            TrainingSource::Dense => 1e-8,
            TrainingSource::Qnn => 1e-2,
        });
        for v in &self.vectors {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
            }
            let nrm = v.dotc(&(&self.metric * v)).re;
            if (nrm - T::one()).abs() > tol {
                return Err(Error::InvalidConfig(format!("training vector metric norm {} not 1", nrm.to_f64_lossy())));
            }
        }
        Ok(())
    }

    pub fn to_file(&self) -> TrainingSetFile {
        TrainingSetFile {
            points: self.points.clone(),
            vectors: self.vectors.iter().map(vector_to_pairs).collect(),
            energies: self.energies.iter().map(|e| e.to_f64_lossy()).collect(),
            source: self.source,
            metric: MatrixPairs(matrix_to_pairs(&self.metric)),
        }
    }

    pub fn from_file(f: &TrainingSetFile) -> Result<Self> {
        let vectors = f.vectors.iter().map(|v| vector_from_pairs(v)).collect();
        Self::new(f.points.clone(), vectors, f.source, matrix_from_pairs(&f.metric.0)?, f.energies.iter().map(|&e| T::lit(e)).collect())
    }
}

/// JSON layout of a persisted training set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainingSetFile {
    pub points: Vec<EcParameterPoint>,
    pub vectors: Vec<Vec<Pair>>,
    pub energies: Vec<f64>,
    pub source: TrainingSource,
    pub metric: MatrixPairs,
}

/// Settings for the QNN training source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct QnnSourceConfig<T> {
    pub layers: usize,
    pub training: TrainingConfig<T>,
}

impl<T: Real> Default for QnnSourceConfig<T> {
    fn default() -> Self {
        Self { layers: 4, training: TrainingConfig { relaxed: true, ..TrainingConfig::default() } }
    }
}

/// Options for [`train_vectors`].
#[derive(Debug, Clone, PartialEq)]
pub enum SourceOptions<T> {
    Dense,
    Qnn(QnnSourceConfig<T>),
}

fn check_hermitian_target<T: Real>(p: &GeneralizedEigenProblem<T>) -> Result<()> {
    let dev = crate::linalg::hermitian_deviation(&p.h);
    let scale = p.h.iter().fold(T::one(), |a, z| a.max(cabs(*z)));
    if dev > T::lit(1e-10) * scale {
        return Err(Error::NotHermitian(dev.to_f64_lossy()));
    }
    Ok(())
}

fn cholesky_factor<T: Real>(n: &CMatrix<T>) -> Result<CMatrix<T>> {
    let nsym = (n + n.adjoint()).map(|z| z * T::lit(0.5));
    Ok(nalgebra::Cholesky::new(nsym)
        .ok_or_else(|| Error::Singular("overlap matrix is not positive definite".into()))?
        .l())
}

/// Ground state of `(H, N)` with a seeded QNN. Training runs in the
/// Cholesky-orthonormalized frame `L⁻¹ H L⁻ᴴ`, padded to a power of two.
fn qnn_ground<T: Real>(p: &GeneralizedEigenProblem<T>, cfg: &QnnSourceConfig<T>, seed: u64) -> Result<(T, CVector<T>)> {
    let d = p.dim();
    let l = cholesky_factor(&p.n)?;
    let singular = || Error::Singular("triangular solve failed".into());
    let a = l.solve_lower_triangular(&p.h).ok_or_else(singular)?;
    let a = l.solve_lower_triangular(&a.adjoint()).ok_or_else(singular)?.adjoint();
    let a = (&a + a.adjoint()).map(|z| z * T::lit(0.5));
    let (_, hi) = gershgorin_bounds(&a);
    let id = CMatrix::identity(d, d);
    let (hp, np) = pad_problem(&a, &id, hi + T::one());
    let qubits = hp.nrows().trailing_zeros() as usize;
    let layout = AnsatzLayout::standard(qubits, cfg.layers);
    let tc = TrainingConfig { seed, ..cfg.training.clone() };
    let res = train(&hp, &np, &layout, &tc)?;
    if res.status == TrainingStatus::Unconverged {
        return Err(Error::NonConvergence("QNN training did not converge".into()));
    }
    let psi = res.state.canonical_phase().into_amplitudes().rows(0, d).into_owned();
    let phi = l.adjoint().solve_upper_triangular(&psi).ok_or_else(singular)?;
    // fix the global phase on the largest component, then renormalize in N
    let big = phi.iter().fold(Complex::new(T::zero(), T::zero()), |a, z| if cabs(*z) > cabs(a) { *z } else { a });
    let phi = phi.map(|z| z * (big.conj() / Complex::new(cabs(big), T::zero())));
    let nrm = phi.dotc(&(&p.n * &phi)).re.sqrt();
    let phi = phi.map(|z| z / nrm);
    let e = (phi.dotc(&(&p.h * &phi))).re;
    Ok((e, phi))
}

/// Ground-state vectors of `family(point)` for each training point. Points
/// whose ground energy is not below `threshold` are rejected.
pub fn train_vectors<T: Real, F>(family: F, points: &[EcParameterPoint], source: &SourceOptions<T>, threshold: T) -> Result<EcTrainingSet<T>>
where
    F: Fn(&EcParameterPoint) -> Result<GeneralizedEigenProblem<T>> + Sync,
{
    if points.is_empty() {
        return Err(Error::InvalidConfig("at least one training point required".into()));
    }
    let solved: Vec<(CMatrix<T>, T, CVector<T>)> = points
        .par_iter()
        .enumerate()
        .map(|(k, pt)| {
            let p = family(pt)?;
            check_hermitian_target(&p)?;
            let (vals, vecs) = generalized_hermitian_eig(&p.h, &p.n)?;
            if !(vals[0] < threshold) {
                return Err(Error::UnboundTrainingPoint { point: pt.to_string(), energy: vals[0].to_f64_lossy() });
            }
            let (e, v) = match source {
                SourceOptions::Dense => {
                    let v = vecs.column(0).into_owned();
                    let big = v.iter().fold(Complex::new(T::zero(), T::zero()), |a, z| if cabs(*z) > cabs(a) { *z } else { a });
                    let v = v.map(|z| z * (big.conj() / Complex::new(cabs(big), T::zero())));
                    let nrm = v.dotc(&(&p.n * &v)).re.sqrt();
                    (vals[0], v.map(|z| z / nrm))
                }
                SourceOptions::Qnn(cfg) => qnn_ground(&p, cfg, cfg.training.seed.wrapping_add(k as u64))?,
            };
            Ok((p.n, e, v))
        })
        .collect::<Result<_>>()?;
    let metric = solved[0].0.clone();
    if solved.iter().any(|s| s.0.nrows() != metric.nrows()) {
        return Err(Error::InvalidConfig("training problems differ in dimension".into()));
    }
    let source_kind = match source {
        SourceOptions::Dense => TrainingSource::Dense,
        SourceOptions::Qnn(_) => TrainingSource::Qnn,
    };
    let (energies, vectors) = solved.into_iter().map(|(_, e, v)| (e, v)).unzip();
    EcTrainingSet::new(points.to_vec(), vectors, source_kind, metric, energies)
}

/// Small problem with the training indices that survived trimming.
#[derive(Debug, Clone)]
pub struct EcProjection<T: Real> {
    pub problem: GeneralizedEigenProblem<T>,
    pub kept: Vec<usize>,
    pub trimmed: Vec<usize>,
    pub condition: T,
}

fn project_onto<T: Real>(vs: &[&CVector<T>], m: &CMatrix<T>) -> CMatrix<T> {
    let k = vs.len();
    let mv: Vec<CVector<T>> = vs.iter().map(|v| m * *v).collect();
    let mut out = CMatrix::from_fn(k, k, |i, j| vs[i].dot(&mv[j]));
    // keep the projection exactly symmetric when the operator is
    if m.iter().zip(m.transpose().iter()).all(|(a, b)| a == b) {
        for i in 0..k {
            for j in 0..i {
                out[(i, j)] = out[(j, i)];
            }
        }
    }
    out
}

/// `H^EC_ij = φᵢᵀ H φⱼ`, `N^EC_ij = φᵢᵀ N φⱼ` (no conjugation). While
/// `cond(N^EC)` exceeds `cap`, the vector with the largest weight in the
/// weakest singular direction is dropped.
pub fn project_ec<T: Real>(train: &EcTrainingSet<T>, target: &GeneralizedEigenProblem<T>, cap: T) -> Result<EcProjection<T>> {
    if target.dim() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), found: target.dim() });
    }
    let mut kept: Vec<usize> = (0..train.len()).collect();
    let mut trimmed = Vec::new();
    loop {
        let vs: Vec<&CVector<T>> = kept.iter().map(|&i| &train.vectors[i]).collect();
        let n_ec = project_onto(&vs, &target.n);
        let cond = condition_number(&n_ec);
        if cond <= cap || kept.len() == 1 {
            let h_ec = project_onto(&vs, &target.h);
            let problem = GeneralizedEigenProblem::new(h_ec, n_ec, format!("ec[{}] {}", kept.len(), target.label))?;
            return Ok(EcProjection { problem, kept, trimmed, condition: cond });
        }
        let svd = n_ec.clone().svd(false, true);
        let vt = svd.v_t.ok_or_else(|| Error::Singular("svd failed".into()))?;
        let smin = (0..svd.singular_values.len())
            .min_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap())
            .unwrap();
        let worst = (0..kept.len()).max_by(|&a, &b| cabs(vt[(smin, a)]).partial_cmp(&cabs(vt[(smin, b)])).unwrap()).unwrap();
        trimmed.push(kept.remove(worst));
    }
}

/// Runs IHHL on each small problem (paired with its angle), seeding each
/// angle with the previous eigenpair. One angle gives a direct result;
/// three or more go through [`find_stabilization`] with snapping.
pub fn ec_resonance<T: Real>(
    problems: &[(T, GeneralizedEigenProblem<T>)],
    phi0: &CVector<T>,
    e0: Option<Complex<T>>,
    cfg: &IhhlConfig<T>,
) -> Result<(ResonanceResult<T>, Vec<IhhlOutcome<T>>)> {
    match problems.len() {
        0 => return Err(Error::TooFewAngles { needed: 1, found: 0 }),
        2 => return Err(Error::TooFewAngles { needed: 3, found: 2 }),
        _ => {}
    }
    let mut phi = phi0.clone();
    let mut e = e0;
    let mut outcomes = Vec::with_capacity(problems.len());
    for (g, p) in problems {
        let m = reduce_generalized(p, cfg.condition_cap)?;
        let out = iterate_reduced(&m, &phi, e, cfg)?;
        if !out.converged {
            return Err(Error::NonConvergence(format!("IHHL at gamma = {} rad", g.to_f64_lossy())));
        }
        phi = c_normalize(&out.vector)?;
        e = Some(out.energy);
        outcomes.push(out);
    }
    if problems.len() == 1 {
        let res = ResonanceResult { energy: outcomes[0].energy, gamma_opt: problems[0].0, rate: T::zero(), method: ResonanceMethod::Direct };
        return Ok((res, outcomes));
    }
    let sweep = CsmSweep {
        angles: problems.iter().map(|(g, _)| *g).collect(),
        trajectories: vec![Trajectory { id: 0, energies: outcomes.iter().map(|o| o.energy).collect(), ambiguous_at: vec![] }],
    };
    let res = find_stabilization(&sweep, 0, StabilizationOptions { interpolate: true, snap_to_degree: true })?;
    Ok((res, outcomes))
}

/// Smallest singular value of `N^EC` over its largest; a cheap rank check.
pub fn ec_rank_ratio<T: Real>(n_ec: &CMatrix<T>) -> T {
    let s = singular_values(n_ec);
    s.min() / s.max()
}

/// Barrier benchmark used for continuation: an attractive core of depth
/// `-core_depth·λ` and a barrier of height `barrier_height·λ·barrier`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcBenchmark<T> {
    pub core_depth: T,
    pub core_range: T,
    pub barrier_height: T,
    pub barrier_range: T,
    pub basis: GaussianBasis<T>,
}

impl<T: Real> EcBenchmark<T> {
    pub fn standard() -> Result<Self> {
        Ok(Self {
            core_depth: T::lit(8.0),
            core_range: T::lit(3.0),
            barrier_height: T::lit(4.0),
            barrier_range: T::lit(6.0),
            basis: GaussianBasis::geometric(2, T::lit(0.4), T::lit(1.22), 12)?,
        })
    }

    pub fn system(&self, point: &EcParameterPoint) -> TwoBodySystem<T> {
        let lambda = T::lit(point.get("lambda").unwrap_or(1.0));
        let barrier = T::lit(point.get("barrier").unwrap_or(1.0));
        TwoBodySystem {
            kinetic_scale: T::one(),
            potential: vec![
                GaussianComponent { depth_mev: -self.core_depth, range_fm: self.core_range },
                GaussianComponent { depth_mev: self.barrier_height * barrier, range_fm: self.barrier_range },
            ],
            coulomb_strength: T::zero(),
            coupling: lambda,
        }
    }

    pub fn problem(&self, point: &EcParameterPoint, gamma: T) -> Result<GeneralizedEigenProblem<T>> {
        crate::csm::build_hamiltonian(&self.system(point), &self.basis, gamma)
    }
}

/// Eigenvalues of a small problem by dense reduction, for cross-checks.
pub fn dense_small_spectrum<T: Real>(p: &GeneralizedEigenProblem<T>) -> Result<Vec<Complex<T>>> {
    let m = crate::linalg::solve_matrix(&p.n, &p.h)?;
    crate::linalg::eigenvalues(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{generalized_eig, transpose_deviation};
    use crate::scalar::{cx, deg_to_rad, max_abs_diff};
    use proptest::prelude::*;

    fn small_bench() -> EcBenchmark<f64> {
        EcBenchmark { basis: GaussianBasis::geometric(2, 0.4, 1.5, 6).unwrap(), ..EcBenchmark::standard().unwrap() }
    }

    fn points(ls: &[f64]) -> Vec<EcParameterPoint> {
        ls.iter().map(|&l| EcParameterPoint::new([("lambda", l)]).unwrap()).collect()
    }

    fn dense_set(bm: &EcBenchmark<f64>, ls: &[f64]) -> EcTrainingSet<f64> {
        train_vectors(|p| bm.problem(p, 0.0), &points(ls), &SourceOptions::Dense, 0.0).unwrap()
    }

    fn ground(p: &GeneralizedEigenProblem<f64>) -> f64 {
        generalized_hermitian_eig(&p.h, &p.n).unwrap().0[0]
    }

    #[test]
    fn single_point_gives_exact_ground_vector() {
        let bm = small_bench();
        let set = dense_set(&bm, &[2.4]);
        let p = bm.problem(&set.points[0], 0.0).unwrap();
        let v = &set.vectors[0];
        let r = &p.h * v - &p.n * v * cx(set.energies[0], 0.0);
        assert!(r.norm() < 1e-9);
        assert!((v.dotc(&(&p.n * v)).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unbound_point_is_rejected() {
        let bm = small_bench();
        let err = train_vectors(|p| bm.problem(p, 0.0), &points(&[0.1]), &SourceOptions::Dense, 0.0).unwrap_err();
        assert!(matches!(err, Error::UnboundTrainingPoint { .. }));
    }

    #[test]
    fn exact_eigenvectors_reproduce_target_spectrum() {
        let bm = small_bench();
        let target = bm.problem(&points(&[1.0])[0], 0.0).unwrap();
        let (vals, vecs) = generalized_hermitian_eig(&target.h, &target.n).unwrap();
        let vs: Vec<CVector<f64>> = (0..3).map(|k| vecs.column(k).into_owned()).collect();
        let set = EcTrainingSet::new(points(&[1.0, 1.0, 1.0]), vs, TrainingSource::Dense, target.n.clone(), vals[..3].to_vec()).unwrap();
        let pr = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
        let mut ev: Vec<f64> = dense_small_spectrum(&pr.problem).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 0..3 {
            assert!((ev[k] - vals[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn single_vector_is_c_rayleigh_quotient() {
        let bm = small_bench();
        let set = dense_set(&bm, &[2.4]);
        let target = bm.problem(&points(&[1.0])[0], deg_to_rad(-4.0)).unwrap();
        let pr = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
        assert_eq!(pr.problem.dim(), 1);
        let v = &set.vectors[0];
        let e = v.dot(&(&target.h * v)) / v.dot(&(&target.n * v));
        let ev = dense_small_spectrum(&pr.problem).unwrap()[0];
        assert!((ev - e).norm() < 1e-12);
    }

    #[test]
    fn projected_matrices_are_transpose_symmetric() {
        let bm = small_bench();
        let set = dense_set(&bm, &[2.0, 2.4, 2.8]);
        let target = bm.problem(&points(&[1.0])[0], deg_to_rad(-6.0)).unwrap();
        assert!(transpose_deviation(&target.h) < 1e-12);
        let pr = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
        assert_eq!(transpose_deviation(&pr.problem.h), 0.0);
        assert_eq!(transpose_deviation(&pr.problem.n), 0.0);
    }

    #[test]
    fn variational_and_monotone_at_zero_angle() {
        let bm = small_bench();
        let target = bm.problem(&points(&[1.6])[0], 0.0).unwrap();
        let full = ground(&target);
        let mut prev = f64::INFINITY;
        for k in 1..=4 {
            let ls: Vec<f64> = [2.0, 2.3, 2.6, 2.9][..k].to_vec();
            let pr = project_ec(&dense_set(&bm, &ls), &target, EC_CONDITION_CAP).unwrap();
            let e = ground(&pr.problem);
            assert!(e >= full - 1e-9);
            assert!(e <= prev + 1e-9);
            prev = e;
        }
    }

    #[test]
    fn dependent_vector_is_trimmed() {
        let bm = small_bench();
        let mut set = dense_set(&bm, &[2.0, 2.4]);
        let dup = set.vectors[1].clone();
        set.vectors.push(dup);
        set.points.push(set.points[1].clone());
        set.energies.push(set.energies[1]);
        let target = bm.problem(&points(&[1.0])[0], 0.0).unwrap();
        let pr = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
        assert_eq!(pr.trimmed.len(), 1);
        assert_eq!(pr.kept.len(), 2);
        assert!(pr.condition <= EC_CONDITION_CAP);
    }

    #[test]
    fn hermitian_small_problem_gives_real_energy() {
        let h = CMatrix::from_fn(3, 3, |i, j| cx(((i + 1) * (j + 1)) as f64 + if i == j { 3.0 * i as f64 } else { 0.0 }, 0.0));
        let p = GeneralizedEigenProblem::standard(h, "herm").unwrap();
        let phi0 = CVector::from_fn(3, |i, _| cx(1.0 + i as f64, 0.0));
        let cfg = IhhlConfig::default();
        let (res, _) = ec_resonance(&[(0.0, p)], &phi0, None, &cfg).unwrap();
        assert!(res.energy.im.abs() <= 1e-10);
        assert_eq!(res.method, ResonanceMethod::Direct);
    }

    #[test]
    fn end_to_end_matches_small_dense_spectrum() {
        let bm = small_bench();
        let set = dense_set(&bm, &[2.0, 2.3, 2.6, 2.9]);
        let target = bm.problem(&points(&[1.0])[0], deg_to_rad(-4.0)).unwrap();
        let pr = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
        let dec = generalized_eig(&pr.problem.h, &pr.problem.n).unwrap();
        let k = (0..dec.values.len()).min_by(|&a, &b| dec.values[a].re.partial_cmp(&dec.values[b].re).unwrap()).unwrap();
        let phi0 = dec.vector(k).map(|z| z + cx(0.01, 0.0));
        let cfg = IhhlConfig::with_beta(cx(0.05, 0.0));
        let (res, _) = ec_resonance(&[(deg_to_rad(-4.0), pr.problem.clone())], &phi0, Some(dec.values[k]), &cfg).unwrap();
        assert!((res.energy - dec.values[k]).norm() < 1e-8);
    }

    #[test]
    fn training_set_json_round_trip() {
        let bm = small_bench();
        let set = dense_set(&bm, &[2.0, 2.4]);
        let json = serde_json::to_string(&set.to_file()).unwrap();
        let back: EcTrainingSet<f64> = EcTrainingSet::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back.points, set.points);
        for (a, b) in back.vectors.iter().zip(&set.vectors) {
            assert_eq!(a, b);
        }
        assert_eq!(max_abs_diff(&back.metric, &set.metric), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn order_invariance(perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(), deg in 0.0f64..8.0) {
            let bm = small_bench();
            let set = dense_set(&bm, &[2.0, 4.0, 8.0, 16.0]);
            let mut shuffled = set.clone();
            shuffled.vectors = perm.iter().map(|&i| set.vectors[i].clone()).collect();
            shuffled.points = perm.iter().map(|&i| set.points[i].clone()).collect();
            shuffled.energies = perm.iter().map(|&i| set.energies[i]).collect();
            let target = bm.problem(&points(&[1.0])[0], deg_to_rad(-deg)).unwrap();
            let a = project_ec(&set, &target, EC_CONDITION_CAP).unwrap();
            let b = project_ec(&shuffled, &target, EC_CONDITION_CAP).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let (x, y) = (b.problem.h[(i, j)], a.problem.h[(perm[i], perm[j])]);
                    prop_assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
                }
            }
            let mut ea = generalized_eig(&a.problem.h, &a.problem.n).unwrap().values;
            let mut eb = generalized_eig(&b.problem.h, &b.problem.n).unwrap().values;
            let key = |z: &Complex<f64>| (z.re * 1e6).round() as i64;
            ea.sort_by_key(key);
            eb.sort_by_key(key);
            for (x, y) in ea.iter().zip(&eb) {
                prop_assert!((x - y).norm() < 1e-12 * x.norm().max(1.0), "{} vs {}", x, y);
            }
        }
    }
}
