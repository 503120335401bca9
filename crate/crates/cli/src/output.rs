//! Report writers. CSV and metrics JSON use 12 significant digits so runs
//! are byte-for-byte reproducible; solution files keep full precision so a
//! reloaded solution is the one that was validated.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use isac_ee::hermitian::{ComplexVector, HermitianMatrix, C64};
use isac_ee::model::{beampattern_profile, watts_to_dbm, Covariances, Metrics, ScenarioConfig};
use isac_ee::pipeline::SweepRow;
use isac_ee::sca::{Initialization, IterateLog};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

/// Fixed 12-significant-digit scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds to 12 significant digits for JSON reports.
pub fn round12(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_num(x).parse::<f64>().expect("formatted float parses"))
    } else {
        Value::Null
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

fn finish_csv(path: &Path, mut w: csv::Writer<BufWriter<File>>) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `iter, t, u, lambda, gap, seconds`; row 0 is the starting point.
/// `seconds` is left empty unless `timing` is set.
pub fn write_convergence(path: &Path, init: &Initialization, log: &IterateLog, timing: bool) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["iter", "t", "u", "lambda", "gap", "seconds"]).map_err(|e| csv_err(path, e))?;
    let start = &init.solution;
    w.write_record(["0".into(), fmt_num(start.t), fmt_num(start.u), fmt_num(init.lambda), String::new(), String::new()])
        .map_err(|e| csv_err(path, e))?;
    for r in &log.records {
        let seconds = if timing { fmt_num(r.seconds) } else { String::new() };
        w.write_record([r.iter.to_string(), fmt_num(r.t), fmt_num(r.u), fmt_num(r.lambda), fmt_num(r.gap), seconds])
            .map_err(|e| csv_err(path, e))?;
    }
    finish_csv(path, w)
}

/// Writes `angle_deg, gain_watts, gain_dbm` over `[−90°, 90°]`.
pub fn write_beampattern(path: &Path, total: &HermitianMatrix, scenario: &ScenarioConfig, step: f64) -> Result<(), CliError> {
    let profile = beampattern_profile(total, scenario, -90.0, 90.0, step)?;
    let mut w = csv_writer(path)?;
    w.write_record(["angle_deg", "gain_watts", "gain_dbm"]).map_err(|e| csv_err(path, e))?;
    for (theta, gain) in profile {
        let dbm = if gain > 0.0 { fmt_num(watts_to_dbm(gain)) } else { String::new() };
        w.write_record([format!("{theta:.2}"), fmt_num(gain), dbm]).map_err(|e| csv_err(path, e))?;
    }
    finish_csv(path, w)
}

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "param_value",
        "ee",
        "ee_prime",
        "rate",
        "power",
        "min_target_gain",
        "detection_prob",
        "status",
        "iters",
    ])
    .map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            fmt_num(r.param_value),
            opt_num(r.ee),
            opt_num(r.ee_prime),
            opt_num(r.rate),
            opt_num(r.power),
            opt_num(r.min_target_gain),
            opt_num(r.detection_prob),
            r.status.clone(),
            r.iters.map(|i| i.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    finish_csv(path, w)
}

/// Metrics block shared by `metrics.json` and `solution.json`.
pub fn metrics_json(metrics: &Metrics, target_gains: &[f64], detection_prob: Option<f64>) -> Value {
    let p = &metrics.power;
    let min_gain = target_gains.iter().copied().reduce(f64::min);
    json!({
        "rate": round12(metrics.rate),
        "ee": round12(metrics.ee),
        "ee_prime": round12(metrics.ee_prime),
        "sinr": metrics.sinr.iter().map(|&g| round12(g)).collect::<Vec<_>>(),
        "power": {
            "transmit": round12(p.transmit),
            "amplifier": round12(p.amplifier),
            "circuit": round12(p.circuit),
            "dynamic": round12(p.dynamic),
            "without_dynamic": round12(p.without_dynamic),
            "total": round12(p.total),
        },
        "target_gains": target_gains.iter().map(|&g| round12(g)).collect::<Vec<_>>(),
        "min_target_gain": min_gain.map_or(Value::Null, round12),
        "detection_prob": detection_prob.map_or(Value::Null, round12),
    })
}

/// `solution.json`: beamformers as `[re, im]` pairs, the radar covariance as
/// a nested `N×N` array of `[re, im]` pairs, and the metrics block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub schema_version: u32,
    pub beams: Vec<Vec<[f64; 2]>>,
    pub radar: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub metrics: Value,
}

impl SolutionFile {
    pub fn new(beams: &[ComplexVector], radar: &HermitianMatrix, metrics: Value) -> Self {
        let pair = |z: &C64| [z.re, z.im];
        let n = radar.dim();
        Self {
            schema_version: 1,
            beams: beams.iter().map(|v| v.as_vector().iter().map(pair).collect()).collect(),
            radar: (0..n).map(|i| (0..n).map(|j| pair(&radar[(i, j)])).collect()).collect(),
            metrics,
        }
    }

    pub fn covariances(&self) -> Result<Covariances, CliError> {
        let bad = |m: String| CliError::Config(format!("solution file: {m}"));
        if self.schema_version != 1 {
            return Err(bad(format!("unsupported schema_version {}", self.schema_version)));
        }
        let n = self.radar.len();
        let mut beams = Vec::new();
        for (k, b) in self.beams.iter().enumerate() {
            if b.len() != n {
                return Err(bad(format!("beam {k} has {} entries, expected {n}", b.len())));
            }
            let entries: Vec<C64> = b.iter().map(|p| C64::new(p[0], p[1])).collect();
            beams.push(ComplexVector::from_slice(&entries).map_err(|e| bad(e.to_string()))?);
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.radar.iter().enumerate() {
            if row.len() != n {
                return Err(bad(format!("radar row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, p) in row.iter().enumerate() {
                m[(i, j)] = C64::new(p[0], p[1]);
            }
        }
        let radar = HermitianMatrix::new(m).map_err(|e| bad(format!("radar covariance: {e}")))?;
        Ok(Covariances::from_beamformers(&beams, radar))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).expect("solution serializes");
        text.push('\n');
        let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
        })
    }
}
