//! Shipped reference data: appendix matrices and gate angles, interaction
//! tables and reported reference numbers.
//!
//! Values are stored as the published decimal strings and parsed at load.
//! Entries such as `3.3965152(-5)` mean `3.3965152e-5`.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::circuit::{AnsatzLayout, ParameterSet};
use crate::ec::EcParameterPoint;
use crate::error::{Error, Result};
use crate::ihhl::GeneralizedEigenProblem;
use crate::linalg::transpose_deviation;
use crate::scalar::{CMatrix, CVector};

pub const APPENDIX_JSON: &str = include_str!("../data/appendix.json");
pub const TABLES_JSON: &str = include_str!("../data/tables.json");
pub const APPENDIX_SHA256: &str = "e665c2a85cf804dd5f1cfde046f86e0366d0d359f0194f4c0c70d0c969640efa";
pub const TABLES_SHA256: &str = "8a9358a826b0a96c2b0841d6e40ab715ee397f509baa14bdc426429bafeef993";

/// Qubits and layers of the appendix circuits.
pub const APPENDIX_QUBITS: usize = 6;
pub const APPENDIX_LAYERS: usize = 3;

pub fn sha256_hex(bytes: &[u8]) -> String {
    let d = Sha256::digest(bytes);
    d.iter().map(|b| format!("{b:02x}")).collect()
}

fn verify(name: &str, text: &str, expected: &str) -> Result<()> {
    let actual = sha256_hex(text.as_bytes());
    if actual != expected {
        return Err(Error::ChecksumMismatch { name: name.into(), expected: expected.into(), actual });
    }
    Ok(())
}

/// Parses a published decimal. Accepts `m(-k)` exponent notation and a
/// trailing `j` imaginary marker.
pub fn parse_decimal(raw: &str) -> Result<f64> {
    let s = raw.trim();
    let s = s.strip_suffix('j').unwrap_or(s);
    let text = match s.find('(') {
        Some(open) => {
            let close = s.strip_suffix(')').ok_or_else(|| Error::Parse(format!("bad exponent in {raw:?}")))?;
            let (m, e) = (&s[..open], &close[open + 1..]);
            format!("{m}e{e}")
        }
        None => s.to_string(),
    };
    text.parse::<f64>().map_err(|_| Error::Parse(format!("not a decimal: {raw:?}")))
}

#[derive(Debug, Clone, Deserialize)]
struct RawPoint {
    #[serde(rename = "lambda_LN")]
    lambda_ln: String,
    #[serde(rename = "M")]
    m: String,
    layers: Vec<Vec<[String; 3]>>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawAppendix {
    training_points: Vec<RawPoint>,
    #[serde(rename = "H_res_MeV")]
    h_res: Vec<Vec<[String; 2]>>,
    #[serde(rename = "N_res")]
    n_res: Vec<Vec<[String; 2]>>,
    phi0: Vec<String>,
    gamma_snap_deg: String,
    #[serde(rename = "beta_MeV")]
    beta: String,
    #[serde(default)]
    transcription_notes: Vec<String>,
}

/// Gate angles of one training point, `angles[layer][qubit] = [RZ, RY, RZ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixturePoint {
    pub point: EcParameterPoint,
    pub angles: Vec<Vec<[f64; 3]>>,
}

impl FixturePoint {
    pub fn parameters(&self) -> ParameterSet<f64> {
        ParameterSet::from_layers(&self.angles)
    }
}

#[derive(Debug, Clone)]
pub struct AppendixFixture {
    pub points: Vec<FixturePoint>,
    pub h_res: CMatrix<f64>,
    pub n_res: CMatrix<f64>,
    pub phi0: CVector<f64>,
    pub gamma_snap_deg: f64,
    pub beta: f64,
    /// Largest `|A - Aᵀ|` entry of the published matrices, reported as is.
    pub h_transpose_deviation: f64,
    pub n_transpose_deviation: f64,
    pub notes: Vec<String>,
}

impl AppendixFixture {
    pub fn layout() -> AnsatzLayout {
        AnsatzLayout::standard(APPENDIX_QUBITS, APPENDIX_LAYERS)
    }

    pub fn problem(&self) -> Result<GeneralizedEigenProblem<f64>> {
        GeneralizedEigenProblem::new(self.h_res.clone(), self.n_res.clone(), "appendix H_res/N_res")
    }

    pub fn point(&self, lambda_ln: f64, m: f64) -> Option<&FixturePoint> {
        self.points.iter().find(|p| p.point.get("lambda_LN") == Some(lambda_ln) && p.point.get("M") == Some(m))
    }
}

fn parse_matrix(rows: &[Vec<[String; 2]>]) -> Result<CMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("fixture matrix is not square".into()));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, r) in rows.iter().enumerate() {
        for (j, [re, im]) in r.iter().enumerate() {
            m[(i, j)] = Complex::new(parse_decimal(re)?, parse_decimal(im)?);
        }
    }
    Ok(m)
}

fn appendix_from(text: &str, expected_sha: &str) -> Result<AppendixFixture> {
    verify("appendix.json", text, expected_sha)?;
    let raw: RawAppendix = serde_json::from_str(text)?;
    let mut points = Vec::with_capacity(raw.training_points.len());
    for p in &raw.training_points {
        if p.layers.len() != APPENDIX_LAYERS || p.layers.iter().any(|l| l.len() != APPENDIX_QUBITS) {
            return Err(Error::Parse("gate tensor must be 3 layers x 6 qubits".into()));
        }
        let angles = p
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|a| Ok([parse_decimal(&a[0])?, parse_decimal(&a[1])?, parse_decimal(&a[2])?]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if angles.iter().flatten().flatten().any(|&a| !(0.0..std::f64::consts::TAU).contains(&a)) {
            return Err(Error::Parse("gate angle outside [0, 2pi)".into()));
        }
        let point = EcParameterPoint::new([("lambda_LN", parse_decimal(&p.lambda_ln)?), ("M", parse_decimal(&p.m)?)])?;
        points.push(FixturePoint { point, angles });
    }
    let h_res = parse_matrix(&raw.h_res)?;
    let n_res = parse_matrix(&raw.n_res)?;
    let phi0 = raw.phi0.iter().map(|s| parse_decimal(s).map(|x| Complex::new(x, 0.0))).collect::<Result<Vec<_>>>()?;
    Ok(AppendixFixture {
        points,
        h_transpose_deviation: transpose_deviation(&h_res),
        n_transpose_deviation: transpose_deviation(&n_res),
        h_res,
        n_res,
        phi0: CVector::from_vec(phi0),
        gamma_snap_deg: parse_decimal(&raw.gamma_snap_deg)?,
        beta: parse_decimal(&raw.beta)?,
        notes: raw.transcription_notes,
    })
}

/// Loads the appendix fixture, verifying its checksum.
pub fn load_appendix() -> Result<AppendixFixture> {
    appendix_from(APPENDIX_JSON, APPENDIX_SHA256)
}

/// `(V_D, V_EX) = ((vE + vO)/2, (vE - vO)/2)`.
pub fn yng_depths(v_even: f64, v_odd: f64) -> (f64, f64) {
    (0.5 * (v_even + v_odd), 0.5 * (v_even - v_odd))
}

/// One YNG row, numbers together with the published strings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YngRow {
    pub beta_fm: f64,
    pub v_even: f64,
    pub v_odd: f64,
    pub v_direct: f64,
    pub v_exchange: f64,
    pub published: [String; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaLambdaRow {
    pub beta_fm: f64,
    pub v0: f64,
    pub v_sigma_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionTables {
    pub k_f_fm_inv: f64,
    pub yng: Vec<YngRow>,
    pub lambda_lambda: Vec<LambdaLambdaRow>,
    pub volkov_label: String,
}

/// Reported numbers that cannot be recomputed here; metadata only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferenceValues {
    pub binding_5lhe_mev: f64,
    pub binding_6llhe_mev: f64,
    pub binding_9lbe_mev: f64,
    pub qnn_converged_mev: f64,
    pub qnn_exact_mev: f64,
    pub resonance_mev: [f64; 2],
    pub b_n_fm: f64,
}

impl ReferenceValues {
    pub fn resonance(&self) -> Complex<f64> {
        Complex::new(self.resonance_mev[0], self.resonance_mev[1])
    }
}

#[derive(Debug, Clone, Deserialize)]
struct RawTable {
    #[serde(default, rename = "k_F_fm_inv")]
    k_f: Option<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawReference {
    #[serde(rename = "binding_5LHe_MeV")]
    b5: String,
    #[serde(rename = "binding_6LLHe_MeV")]
    b6: String,
    #[serde(rename = "binding_9LBe_MeV")]
    b9: String,
    #[serde(rename = "qnn_converged_MeV")]
    qc: String,
    #[serde(rename = "qnn_exact_MeV")]
    qe: String,
    #[serde(rename = "resonance_4plus_MeV")]
    res: [String; 2],
    #[serde(rename = "b_N_fm")]
    bn: String,
}

#[derive(Debug, Clone, Deserialize)]
struct RawTables {
    yng: RawTable,
    lambda_lambda: RawTable,
    volkov_label: String,
    reference_values: RawReference,
}

fn raw_tables() -> Result<RawTables> {
    verify("tables.json", TABLES_JSON, TABLES_SHA256)?;
    Ok(serde_json::from_str(TABLES_JSON)?)
}

fn row_values(row: &[String], n: usize) -> Result<Vec<f64>> {
    if row.len() != n {
        return Err(Error::Parse(format!("table row has {} columns, expected {n}", row.len())));
    }
    row.iter().map(|s| parse_decimal(s)).collect()
}

pub fn load_tables() -> Result<InteractionTables> {
    let raw = raw_tables()?;
    if raw.yng.rows.len() != 3 {
        return Err(Error::Parse("YNG table must have 3 rows".into()));
    }
    let yng = raw
        .yng
        .rows
        .iter()
        .map(|r| {
            let v = row_values(r, 5)?;
            Ok(YngRow {
                beta_fm: v[0],
                v_even: v[1],
                v_odd: v[2],
                v_direct: v[3],
                v_exchange: v[4],
                published: [r[0].clone(), r[1].clone(), r[2].clone(), r[3].clone(), r[4].clone()],
            })
        })
        .collect::<Result<_>>()?;
    let lambda_lambda = raw
        .lambda_lambda
        .rows
        .iter()
        .map(|r| {
            let v = row_values(r, 3)?;
            Ok(LambdaLambdaRow { beta_fm: v[0], v0: v[1], v_sigma_sigma: v[2] })
        })
        .collect::<Result<_>>()?;
    let k_f = raw.yng.k_f.as_deref().ok_or_else(|| Error::Parse("missing k_F".into()))?;
    Ok(InteractionTables { k_f_fm_inv: parse_decimal(k_f)?, yng, lambda_lambda, volkov_label: raw.volkov_label })
}

pub fn reference_values() -> Result<ReferenceValues> {
    let r = raw_tables()?.reference_values;
    Ok(ReferenceValues {
        binding_5lhe_mev: parse_decimal(&r.b5)?,
        binding_6llhe_mev: parse_decimal(&r.b6)?,
        binding_9lbe_mev: parse_decimal(&r.b9)?,
        qnn_converged_mev: parse_decimal(&r.qc)?,
        qnn_exact_mev: parse_decimal(&r.qe)?,
        resonance_mev: [parse_decimal(&r.res[0])?, parse_decimal(&r.res[1])?],
        b_n_fm: parse_decimal(&r.bn)?,
    })
}

fn decimals(s: &str) -> usize {
    s.split_once('.').map_or(0, |(_, f)| f.len())
}

/// Recomputes `(V_D, V_EX)` of every YNG row and compares at the published
/// number of decimals. Returns one flag per row.
pub fn check_yng_table(t: &InteractionTables) -> Vec<bool> {
    t.yng
        .iter()
        .map(|r| {
            let (d, ex) = yng_depths(r.v_even, r.v_odd);
            let same = |x: f64, s: &str| format!("{:.*}", decimals(s), x) == s.trim();
            same(d, &r.published[3]) && same(ex, &r.published[4])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, run_circuit};
    use crate::scalar::cx;

    #[test]
    fn decimal_forms() {
        assert_eq!(parse_decimal("3.3965152(-5)").unwrap(), 3.3965152e-5);
        assert_eq!(parse_decimal("1.1949457(-13)").unwrap(), 1.1949457e-13);
        assert_eq!(parse_decimal("1.0973103j").unwrap(), 1.0973103);
        assert_eq!(parse_decimal("-0.6028637").unwrap(), -0.6028637);
        assert!(parse_decimal("1.2(-3").is_err());
        assert!(parse_decimal("abc").is_err());
    }

    #[test]
    fn published_entries() {
        let f = load_appendix().unwrap();
        assert_eq!(f.h_res[(0, 0)], cx(89.55105672, 29.96865528));
        assert_eq!(f.n_res[(3, 3)], cx(-1.09854298, 1.42115795));
        let p = f.point(1.2, 0.50).unwrap();
        assert_eq!(p.angles[0][0], [6.2777443, 2.9623668, 4.1739912]);
        assert_eq!(f.points.len(), 4);
        for (l, m) in [(1.2, 0.50), (1.2, 0.45), (1.4, 0.50), (1.4, 0.45)] {
            assert!(f.point(l, m).is_some());
        }
        assert_eq!(f.phi0, CVector::from_vec(vec![cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0), cx(4.0, 0.0)]));
        assert_eq!(f.gamma_snap_deg, -2.0);
        assert_eq!(f.beta, 1.0);
    }

    #[test]
    fn matrices_are_nearly_transpose_symmetric() {
        let f = load_appendix().unwrap();
        assert!(f.h_transpose_deviation <= 1e-6, "{}", f.h_transpose_deviation);
        assert!(f.n_transpose_deviation <= 1e-6, "{}", f.n_transpose_deviation);
    }

    #[test]
    fn corrupted_fixture_is_rejected() {
        let bad = APPENDIX_JSON.replacen("89.55105672", "89.55105673", 1);
        assert!(matches!(appendix_from(&bad, APPENDIX_SHA256), Err(Error::ChecksumMismatch { .. })));
    }

    #[test]
    fn fixture_states_are_normalized_and_deterministic() {
        let f = load_appendix().unwrap();
        let ansatz = build_ansatz(&AppendixFixture::layout()).unwrap();
        for p in &f.points {
            let a = run_circuit(&ansatz, &p.parameters()).unwrap();
            let b = run_circuit(&ansatz, &p.parameters()).unwrap();
            assert_eq!(a.dim(), 64);
            assert!((a.norm() - 1.0).abs() < 1e-10);
            assert_eq!(a.amplitudes(), b.amplitudes());
        }
    }

    #[test]
    fn yng_rows_match() {
        let t = load_tables().unwrap();
        assert_eq!(check_yng_table(&t), vec![true, true, true]);
        assert_eq!(yng_depths(-9.93, -7.66).0, -8.795);
        assert!((yng_depths(-9.93, -7.66).1 + 1.135).abs() < 1e-12);
        let (d, ex) = yng_depths(-227.73, -82.55);
        assert_eq!((d, ex), (-155.14, -72.59));
        assert_eq!(yng_depths(3.5, 3.5), (3.5, 0.0));
        assert_eq!(t.k_f_fm_inv, 0.9);
        assert_eq!(t.lambda_lambda.len(), 3);
        assert_eq!(t.volkov_label, "Volkov No. 1 (NN)");
    }

    #[test]
    fn reference_numbers() {
        let r = reference_values().unwrap();
        assert_eq!(r.resonance(), cx(4.08, -0.051));
        assert_eq!(r.qnn_converged_mev, -55.89);
        assert_eq!(r.b_n_fm, 1.36);
    }
}
