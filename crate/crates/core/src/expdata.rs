//! Device shot-count tables and estimation of `Re k` at the gate time.
//!
//! Input documents are JSON:
//!
//! ```json
//! {"gate": "swap", "device": "IonQ", "shots": 1000,
//!  "runs": [{"input": "m1", "counts": {"00": 955, "01": 17, "10": 18, "11": 10}}, ...]}
//! ```
//!
//! A run may carry `probs` instead of `counts`; each such run must sum to
//! one within [`PROBS_SUM_TOL`] and is renormalised on load.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::channel::{predict_table, Gate, Mat4, COMPUTATIONAL_LABELS};
use crate::error::{Error, Result};
use crate::kernel::re_k_approx;

/// Allowed deviation of a probability run's total from one. Published
/// tables are rounded to three decimals and can be off by a few counts.
pub const PROBS_SUM_TOL: f64 = 0.02;

/// Two published and estimated bounds are considered the same if they
/// agree to within half a count out of 1000 shots.
pub const RANGE_MATCH_TOL: f64 = 5e-4;

const SWAP_INPUT_ALIASES: [&str; 4] = ["m1", "m2", "m3", "m4"];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    gate: String,
    device: String,
    #[serde(default)]
    shots: Option<u64>,
    runs: Vec<RawRun>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    input: String,
    #[serde(default)]
    counts: Option<BTreeMap<String, u64>>,
    #[serde(default)]
    probs: Option<BTreeMap<String, f64>>,
}

/// Validated shot counts. `counts[input][output]`, both in table order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountTable {
    pub gate: Gate,
    pub device: String,
    pub shots: u64,
    pub counts: [[u64; 4]; 4],
}

/// Outcome probabilities, `p[output][input]` (columns are inputs).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbTable {
    pub gate: Gate,
    pub device: String,
    pub p: Mat4,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn input_index(gate: Gate, label: &str) -> Result<usize> {
    let labels: &[&str] = match gate {
        Gate::Swap => &SWAP_INPUT_ALIASES,
        Gate::Identity => &COMPUTATIONAL_LABELS,
    };
    labels
        .iter()
        .position(|l| l.eq_ignore_ascii_case(label))
        .ok_or_else(|| {
            Error::Schema(format!(
                "input {label:?} is not valid for gate {gate} (expected one of {labels:?})"
            ))
        })
}

fn output_index(label: &str) -> Result<usize> {
    COMPUTATIONAL_LABELS
        .iter()
        .position(|l| *l == label)
        .ok_or_else(|| Error::Schema(format!("unknown outcome {label:?}")))
}

enum Payload {
    Counts(u64, [[u64; 4]; 4]),
    Probs(Mat4),
}

struct Parsed {
    gate: Gate,
    device: String,
    payload: Payload,
}

fn parse_doc<R: Read>(mut reader: R) -> Result<Parsed> {
    // Buffer first: error positions from a streaming reader point past the
    // offending token.
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    let raw: RawDoc = serde_json::from_slice(&bytes).map_err(parse_error)?;
    let gate: Gate = raw
        .gate
        .parse()
        .map_err(|_| Error::Schema(format!("unknown gate {:?}", raw.gate)))?;
    if raw.runs.len() != 4 {
        return Err(Error::Schema(format!(
            "expected exactly 4 runs, found {}",
            raw.runs.len()
        )));
    }
    let mut seen = [false; 4];
    let all_counts = raw.runs.iter().all(|r| r.counts.is_some() && r.probs.is_none());
    let all_probs = raw.runs.iter().all(|r| r.probs.is_some() && r.counts.is_none());
    if !all_counts && !all_probs {
        return Err(Error::Schema(
            "every run must carry either counts or probs, not both or a mixture".into(),
        ));
    }
    let mut counts = [[0u64; 4]; 4];
    let mut probs = [[0.0; 4]; 4];
    for run in &raw.runs {
        let j = input_index(gate, &run.input)?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::Schema(format!("duplicate input {:?}", run.input)));
        }
        if let Some(c) = &run.counts {
            for (k, v) in c {
                counts[j][output_index(k)?] = *v;
            }
        }
        if let Some(p) = &run.probs {
            for (k, v) in p {
                if !(v.is_finite() && *v >= 0.0) {
                    return Err(Error::Schema(format!(
                        "probability {v} for input {:?} outcome {k:?} is not a nonnegative number",
                        run.input
                    )));
                }
                probs[output_index(k)?][j] = *v;
            }
        }
    }
    let payload = if all_counts {
        let shots = raw
            .shots
            .ok_or_else(|| Error::Schema("count documents need a shots field".into()))?;
        if shots == 0 {
            return Err(Error::Schema("shots must be positive".into()));
        }
        for (j, row) in counts.iter().enumerate() {
            let total: u64 = row.iter().sum();
            if total > shots {
                return Err(Error::Schema(format!(
                    "run {} has {total} counts but only {shots} shots",
                    gate.input_labels()[j]
                )));
            }
        }
        Payload::Counts(shots, counts)
    } else {
        Payload::Probs(probs)
    };
    Ok(Parsed {
        gate,
        device: raw.device,
        payload,
    })
}

/// Reads a counts document. Probability documents are rejected here; use
/// [`load_table`] to accept both.
pub fn load_counts<R: Read>(reader: R) -> Result<CountTable> {
    let parsed = parse_doc(reader)?;
    match parsed.payload {
        Payload::Counts(shots, counts) => Ok(CountTable {
            gate: parsed.gate,
            device: parsed.device,
            shots,
            counts,
        }),
        Payload::Probs(_) => Err(Error::Schema(
            "document carries probs, expected counts".into(),
        )),
    }
}

/// Reads either a counts or a probs document into a probability table.
pub fn load_table<R: Read>(reader: R) -> Result<ProbTable> {
    let parsed = parse_doc(reader)?;
    match parsed.payload {
        Payload::Counts(shots, counts) => normalize(&CountTable {
            gate: parsed.gate,
            device: parsed.device,
            shots,
            counts,
        }),
        Payload::Probs(mut p) => {
            for j in 0..4 {
                let total: f64 = (0..4).map(|i| p[i][j]).sum();
                if (total - 1.0).abs() > PROBS_SUM_TOL {
                    return Err(Error::Schema(format!(
                        "probabilities for input {} sum to {total}",
                        parsed.gate.input_labels()[j]
                    )));
                }
                for row in p.iter_mut() {
                    row[j] /= total;
                }
            }
            Ok(ProbTable {
                gate: parsed.gate,
                device: parsed.device,
                p,
            })
        }
    }
}

pub fn normalize(ct: &CountTable) -> Result<ProbTable> {
    let mut p = [[0.0; 4]; 4];
    for (j, run) in ct.counts.iter().enumerate() {
        let total: u64 = run.iter().sum();
        if total == 0 {
            return Err(Error::EmptyRun(ct.gate.input_labels()[j].to_string()));
        }
        for (i, c) in run.iter().enumerate() {
            p[i][j] = *c as f64 / total as f64;
        }
    }
    Ok(ProbTable {
        gate: ct.gate,
        device: ct.device.clone(),
        p,
    })
}

/// Symbolic content of a predicted table cell, as a function of `a = Re k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    /// `1 - 2a`
    OneMinus2A,
    /// `(1 - 2a)/2`
    HalfOneMinus2A,
    /// `a`
    Alpha,
    /// `0`
    Zero,
}

impl Role {
    /// `(intercept, slope)` of the affine model.
    pub fn model(self) -> (f64, f64) {
        match self {
            Role::OneMinus2A => (1.0, -2.0),
            Role::HalfOneMinus2A => (0.5, -1.0),
            Role::Alpha => (0.0, 1.0),
            Role::Zero => (0.0, 0.0),
        }
    }

    /// Solves `p = intercept + slope * a` for `a`.
    pub fn estimate(self, p: f64) -> Option<f64> {
        match self {
            Role::OneMinus2A => Some((1.0 - p) / 2.0),
            Role::HalfOneMinus2A => Some((1.0 - 2.0 * p) / 2.0),
            Role::Alpha => Some(p),
            Role::Zero => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::OneMinus2A => "ONE_MINUS_2A",
            Role::HalfOneMinus2A => "HALF_ONE_MINUS_2A",
            Role::Alpha => "ALPHA",
            Role::Zero => "ZERO",
        })
    }
}

/// Roles `[output][input]`, read off the channel model's predicted table.
pub fn classify_cells(gate: Gate) -> [[Role; 4]; 4] {
    const PROBE: f64 = 0.125;
    let at0 = predict_table(gate, 0.0).expect("0 is in range");
    let at1 = predict_table(gate, PROBE).expect("probe is in range");
    let mut roles = [[Role::Zero; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let intercept = at0[i][j];
            let slope = (at1[i][j] - intercept) / PROBE;
            let close = |x: f64, y: f64| (x - y).abs() < 1e-9;
            roles[i][j] = if close(slope, 0.0) {
                debug_assert!(close(intercept, 0.0));
                Role::Zero
            } else if close(intercept, 1.0) && close(slope, -2.0) {
                Role::OneMinus2A
            } else if close(intercept, 0.5) && close(slope, -1.0) {
                Role::HalfOneMinus2A
            } else if close(intercept, 0.0) && close(slope, 1.0) {
                Role::Alpha
            } else {
                unreachable!("cell ({i},{j}) is not one of the known affine forms")
            };
        }
    }
    roles
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellEstimate {
    pub input: &'static str,
    pub output: &'static str,
    pub role: Role,
    pub p: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RekEstimate {
    pub per_cell: Vec<CellEstimate>,
    /// Minimum over `ALPHA` cells.
    pub min: f64,
    /// Maximum over `ALPHA` cells.
    pub max: f64,
    /// Least-squares fit of the whole table to the affine model.
    pub lsq: f64,
    /// Sum of squared residuals at `lsq`, over all 16 cells.
    pub residual: f64,
}

/// Sum of squared differences between `pt` and the model table at `alpha`.
pub fn objective(pt: &ProbTable, alpha: f64) -> f64 {
    let roles = classify_cells(pt.gate);
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let (a, b) = roles[i][j].model();
            acc += (pt.p[i][j] - a - b * alpha).powi(2);
        }
    }
    acc
}

pub fn estimate_re_k(pt: &ProbTable) -> RekEstimate {
    let roles = classify_cells(pt.gate);
    let inputs = pt.gate.input_labels();
    let mut per_cell = Vec::with_capacity(16);
    let (mut num, mut den) = (0.0, 0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..4 {
        for i in 0..4 {
            let role = roles[i][j];
            let p = pt.p[i][j];
            let (a, b) = role.model();
            num += b * (p - a);
            den += b * b;
            if let Some(estimate) = role.estimate(p) {
                if role == Role::Alpha {
                    min = min.min(estimate);
                    max = max.max(estimate);
                }
                per_cell.push(CellEstimate {
                    input: inputs[j],
                    output: COMPUTATIONAL_LABELS[i],
                    role,
                    p,
                    estimate,
                });
            }
        }
    }
    let lsq = num / den;
    RekEstimate {
        per_cell,
        min,
        max,
        lsq,
        residual: objective(pt, lsq),
    }
}

/// Inverts the short-time approximation `Re k = (2/pi) c ((pi/2) u + u^2/2)`
/// for the coupling `c = Gamma0 * wc * ts`.
pub fn fit_coupling(re_k: f64, u: f64) -> Result<f64> {
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::InvalidParameter(format!("u must be positive, got {u}")));
    }
    if !(re_k.is_finite() && re_k >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Re k must be nonnegative, got {re_k}"
        )));
    }
    Ok(re_k / re_k_approx(1.0, u))
}

/// Published `Re k` range for a gate on a known device.
pub fn published_range(gate: Gate, device: &str) -> Option<(f64, f64)> {
    let d = device.to_ascii_lowercase();
    let ionq = d.contains("ionq");
    let ibm = d.contains("guadalupe");
    match (gate, ionq, ibm) {
        (Gate::Swap, true, false) => Some((6.0e-3, 1.8e-2)),
        (Gate::Swap, false, true) => Some((1.5e-2, 5.6e-2)),
        (Gate::Identity, true, false) => Some((2.0e-3, 2.4e-2)),
        (Gate::Identity, false, true) => Some((6.0e-3, 2.8e-2)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeComparison {
    pub published_min: f64,
    pub published_max: f64,
    pub estimated_min: f64,
    pub estimated_max: f64,
    pub min_matches: bool,
    pub max_matches: bool,
}

impl RangeComparison {
    pub fn new(published: (f64, f64), est: &RekEstimate) -> Self {
        Self {
            published_min: published.0,
            published_max: published.1,
            estimated_min: est.min,
            estimated_max: est.max,
            min_matches: (published.0 - est.min).abs() <= RANGE_MATCH_TOL,
            max_matches: (published.1 - est.max).abs() <= RANGE_MATCH_TOL,
        }
    }

    pub fn diverges(&self) -> bool {
        !(self.min_matches && self.max_matches)
    }
}

pub fn compare_published(pt: &ProbTable, est: &RekEstimate) -> Option<RangeComparison> {
    published_range(pt.gate, &pt.device).map(|r| RangeComparison::new(r, est))
}
