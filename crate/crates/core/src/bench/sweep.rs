use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::ao_pipeline::{compare_schemes, AoConfig, Scheme};
use crate::channel_model::{linear_to_db, sample_realization, ScenarioConfig};
use crate::{Error, Result};

/// Scenario knob varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Transmit power budget, dBm.
    Power,
    /// Uniform user SINR threshold, dB.
    Gamma,
    /// Transmit antenna count.
    NTx,
    /// Receive antenna count.
    NRx,
    /// Region side in wavelengths.
    Area,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Power => "power",
            SweepParam::Gamma => "gamma",
            SweepParam::NTx => "n_tx",
            SweepParam::NRx => "n_rx",
            SweepParam::Area => "area",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParam::Power => cfg.max_power_dbm = value,
            SweepParam::Gamma => cfg.set_uniform_gamma_db(value),
            SweepParam::NTx => cfg.n_tx = count()?,
            SweepParam::NRx => cfg.n_rx = count()?,
            SweepParam::Area => cfg.region_side_wavelengths = value,
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" | "p" => Ok(SweepParam::Power),
            "gamma" | "threshold" => Ok(SweepParam::Gamma),
            "n_tx" | "n" | "ntx" => Ok(SweepParam::NTx),
            "n_rx" | "m" | "nrx" => Ok(SweepParam::NRx),
            "area" | "a" => Ok(SweepParam::Area),
            other => Err(Error::InvalidConfig(format!("unknown sweep parameter '{other}' (power, gamma, n_tx, n_rx, area)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub schemes: Vec<Scheme>,
    /// Results file; the summary goes next to it with a `.summary.csv` suffix.
    pub out: Option<PathBuf>,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds.is_empty() || self.schemes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value, seed and scheme".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("sweep values must be finite".into()));
        }
        Ok(())
    }
}

/// One (value, scheme, seed) run. Failed runs carry the error text in `status`
/// and NaN metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub scheme: Scheme,
    pub seed: u64,
    pub status: String,
    pub sensing_sinr: f64,
    pub comm_sinrs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn sensing_db(&self) -> f64 {
        linear_to_db(self.sensing_sinr)
    }
}

/// Per (value, scheme) statistics over successful seeds, in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub value: f64,
    pub scheme: Scheme,
    pub runs: usize,
    pub failures: usize,
    pub mean_db: f64,
    pub stderr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub param: SweepParam,
    pub users: usize,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn point(spec: &SweepSpec, base: &ScenarioConfig, ao: &AoConfig, value: f64, seed: u64) -> Vec<SweepRow> {
    let users = base.num_users();
    let attempt = || -> Result<Vec<SweepRow>> {
        let cfg = spec.param.apply(base, value)?;
        let real = sample_realization(&cfg, seed)?;
        let sols = compare_schemes(&real, &cfg, ao, &spec.schemes)?;
        Ok(sols
            .into_iter()
            .map(|s| SweepRow {
                value,
                scheme: s.scheme,
                seed,
                status: "ok".into(),
                sensing_sinr: s.sensing_sinr,
                comm_sinrs: s.comm_sinrs,
                iterations: s.iterations,
                converged: s.converged,
            })
            .collect())
    };
    attempt().unwrap_or_else(|e| {
        spec.schemes
            .iter()
            .map(|&scheme| SweepRow {
                value,
                scheme,
                seed,
                status: e.to_string(),
                sensing_sinr: f64::NAN,
                comm_sinrs: vec![f64::NAN; users],
                iterations: 0,
                converged: false,
            })
            .collect()
    })
}

/// Runs every (value, seed) point, each comparing all requested schemes on
/// the same realization. Rows are ordered by value, scheme, then seed, and
/// written when `spec.out` is set.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig, ao: &AoConfig) -> Result<SweepTable> {
    spec.validate()?;
    base.validate()?;
    ao.validate()?;
    let jobs: Vec<(usize, u64)> =
        (0..spec.values.len()).flat_map(|i| spec.seeds.iter().map(move |&s| (i, s))).collect();
    let run = || -> Vec<(usize, SweepRow)> {
        jobs.par_iter()
            .flat_map_iter(|&(i, seed)| point(spec, base, ao, spec.values[i], seed).into_iter().map(move |r| (i, r)))
            .collect()
    };
    let mut rows = match spec.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    let rank = |s: Scheme| spec.schemes.iter().position(|&x| x == s).unwrap_or(usize::MAX);
    rows.sort_by_key(|(i, r)| (*i, rank(r.scheme), r.seed));
    let rows: Vec<SweepRow> = rows.into_iter().map(|(_, r)| r).collect();

    let mut summary = Vec::new();
    for &value in &spec.values {
        for &scheme in &spec.schemes {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.value == value && r.scheme == scheme).collect();
            let db: Vec<f64> = group.iter().filter(|r| r.ok()).map(|r| r.sensing_db()).collect();
            let (mean_db, stderr_db) = mean_stderr(&db);
            summary.push(SweepSummary { value, scheme, runs: db.len(), failures: group.len() - db.len(), mean_db, stderr_db });
        }
    }
    let table = SweepTable { param: spec.param, users: base.num_users(), rows, summary };
    if let Some(path) = &spec.out {
        std::fs::write(path, table.rows_csv(true)?)?;
        std::fs::write(summary_path(path), table.summary_csv(true)?)?;
    }
    Ok(table)
}

fn summary_path(path: &std::path::Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    path.with_file_name(format!("{stem}.summary.csv"))
}

fn csv_text(header: Vec<String>, records: Vec<Vec<String>>, meta: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(&header).map_err(io)?;
    for r in records {
        w.write_record(&r).map_err(io)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
        .expect("csv output is utf-8");
    let mut out: String = meta.iter().map(|m| format!("# {m}\n")).collect();
    out.push_str(&body);
    Ok(out)
}

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

impl SweepTable {
    fn meta(&self, timestamp: bool) -> Vec<String> {
        let mut m = vec![format!("maisac sweep over {}", self.param)];
        if timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            m.push(format!("generated unix {secs}"));
        }
        m
    }

    /// One line per run. With `timestamp`, a generation-time comment line is
    /// included; everything else is deterministic.
    pub fn rows_csv(&self, timestamp: bool) -> Result<String> {
        let mut header: Vec<String> =
            ["value", "scheme", "seed", "status", "sensing_sinr", "sensing_sinr_db", "iterations", "converged"]
                .map(String::from)
                .into();
        header.extend((0..self.users).map(|k| format!("comm_sinr_db_user{k}")));
        let records = self
            .rows
            .iter()
            .map(|r| {
                let mut rec = vec![
                    r.value.to_string(),
                    r.scheme.to_string(),
                    r.seed.to_string(),
                    r.status.clone(),
                    num(r.sensing_sinr),
                    num(r.sensing_db()),
                    r.iterations.to_string(),
                    r.converged.to_string(),
                ];
                rec.extend(r.comm_sinrs.iter().map(|c| num(linear_to_db(*c))));
                rec
            })
            .collect();
        csv_text(header, records, &self.meta(timestamp))
    }

    pub fn summary_csv(&self, timestamp: bool) -> Result<String> {
        let header = ["value", "scheme", "runs", "failures", "mean_sensing_sinr_db", "stderr_db"].map(String::from).into();
        let records = self
            .summary
            .iter()
            .map(|s| {
                vec![s.value.to_string(), s.scheme.to_string(), s.runs.to_string(), s.failures.to_string(), num(s.mean_db), num(s.stderr_db)]
            })
            .collect();
        csv_text(header, records, &self.meta(timestamp))
    }
}
