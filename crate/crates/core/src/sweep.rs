//! Batch drivers behind the command-line tool and their file formats.
//!
//! Tables are CSV: one `#` comment line with run metadata, then a header
//! row whose columns are fixed per table kind (see [`schema`]), then data.
//! Floats are written with 17 significant digits. Output depends only on the
//! configuration, never on the worker count.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cglmp::{chi_max, CglmpSetting, Party};
use crate::error::{Error, Result};
use crate::incompat::incompatibility_rank1;
use crate::linalg::{ComplexMatrix, SchattenP};
use crate::measurement::Povm;
use crate::optimize::{
    constrained_chi_extremum, interferometric_scan, mvs_gamma, schmidt_and_entropy,
    ConstrainedProblem, Sense, Side,
};
use crate::qrac::{equal_robustness_scan, qrac_success, threshold_eta_c, threshold_eta_r};
use crate::random::{haar_pvm, stream};

/// Version of every table layout below.
pub const SCHEMA_VERSION: u32 = 1;

/// Column names of each table kind.
pub mod schema {
    pub const SWEEP: &[&str] = &[
        "sample_index", "seed", "i_alice", "i_bob", "chi", "qrac", "schmidt_0", "schmidt_1",
        "schmidt_2", "entropy", "status",
    ];
    pub const QRAC_SWEEP: &[&str] = &["sample_index", "seed", "i_bob", "qrac"];
    pub const THRESHOLDS: &[&str] = &["d", "eta_c", "eta_r", "chi", "qrac"];
    pub const FIG1_SCATTER: &[&str] = &["sample_index", "i_alice", "i_bob", "chi"];
    pub const FIG2_ENTROPY: &[&str] = &["i_target", "i_bob", "chi", "gamma", "entropy"];
    pub const FIG3_SCAN: &[&str] = &["xi", "i_alice", "i_bob", "chi"];
    pub const FIG4_QRAC: &[&str] = &["sample_index", "i_bob", "qrac"];
    pub const FIG5_EQUALROBUST: &[&str] = &["sample_index", "i_bob", "eta_r", "eta_c", "qrac", "chi"];
}

/// Parameters shared by all batch commands. Commands ignore fields they do
/// not use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub p: SchattenP,
    /// Noise levels for commands that scan η; validated to lie in [0, 1].
    pub eta_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub d_min: usize,
    pub d_max: usize,
    pub grid: usize,
    pub budget: usize,
    pub tol: f64,
    /// Incompatibility targets for the entropy report.
    pub i_targets: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: "sweep".into(),
            d: 3,
            samples: 1000,
            seed: 1,
            p: SchattenP::INF,
            eta_grid: (0..=10).map(|k| k as f64 / 10.0).collect(),
            out: None,
            workers: None,
            d_min: 2,
            d_max: 8,
            grid: 629,
            budget: 20_000,
            tol: 1e-3,
            i_targets: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
        }
    }
}

impl RunConfig {
    /// Parses a JSON config; syntax and type errors carry the line number.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            field: "config".into(),
            line: Some(e.line()),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::config("samples", "must be at least 1"));
        }
        if !(2..=9).contains(&self.d) {
            return Err(Error::config("d", format!("{} outside [2, 9]", self.d)));
        }
        if !(2..=8).contains(&self.d_min) || !(2..=8).contains(&self.d_max) || self.d_min > self.d_max {
            return Err(Error::config(
                "d_min/d_max",
                format!("[{}, {}] must be a range inside [2, 8]", self.d_min, self.d_max),
            ));
        }
        if let Some(eta) = self.eta_grid.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::config("eta_grid", format!("{eta} outside [0, 1]")));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        if self.grid < 2 {
            return Err(Error::config("grid", "needs at least 2 points"));
        }
        if self.budget == 0 {
            return Err(Error::config("budget", "must be at least 1"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::config("tol", "must be positive"));
        }
        Ok(())
    }

    /// Runs `f` on a pool with the configured number of workers.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        match self.workers {
            None => Ok(f()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::config("workers", e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// One sampled strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub sample_index: u64,
    pub seed: u64,
    pub i_alice: f64,
    pub i_bob: f64,
    pub chi: f64,
    pub qrac: f64,
    /// Three largest Schmidt coefficients of the optimal state, zero-padded.
    pub schmidt: [f64; 3],
    pub entropy: f64,
    /// `ok`, or `failed` for samples that hit a numerical error.
    pub status: String,
}

impl SweepRecord {
    fn failed(sample_index: u64, seed: u64) -> Self {
        Self {
            sample_index,
            seed,
            i_alice: f64::NAN,
            i_bob: f64::NAN,
            chi: f64::NAN,
            qrac: f64::NAN,
            schmidt: [f64::NAN; 3],
            entropy: f64::NAN,
            status: "failed".into(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Four Haar-random PVMs from stream `index`: Alice's pair, then Bob's.
pub fn haar_setting(d: usize, seed: u64, index: u64) -> Result<CglmpSetting> {
    let mut rng = stream(seed, index);
    let mut next = || -> Result<Povm> { Ok(haar_pvm(d, &mut rng)?.into()) };
    let a = (next()?, next()?);
    let b = (next()?, next()?);
    CglmpSetting::new(a, b)
}

pub fn sweep_sample(d: usize, seed: u64, index: u64, p: SchattenP) -> Result<SweepRecord> {
    let s = haar_setting(d, seed, index)?;
    let (a1, a2) = s.alice();
    let (b1, b2) = s.bob();
    let best = chi_max(&s)?;
    let sch = schmidt_and_entropy(&best.optimal_state, (d, d))?;
    let mut schmidt = [0.0; 3];
    for (slot, c) in schmidt.iter_mut().zip(&sch.coefficients) {
        *slot = *c;
    }
    Ok(SweepRecord {
        sample_index: index,
        seed,
        i_alice: incompatibility_rank1(a1, a2, p)?,
        i_bob: incompatibility_rank1(b1, b2, p)?,
        chi: best.chi,
        qrac: qrac_success(b1, b2)?.success,
        schmidt,
        entropy: sch.entropy,
        status: "ok".into(),
    })
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub failures: usize,
}

impl SweepOutput {
    pub fn failure_fraction(&self) -> f64 {
        self.failures as f64 / self.records.len().max(1) as f64
    }
}

/// Haar sweep over `cfg.samples` independent strategies.
pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let records: Vec<SweepRecord> = cfg.install(|| {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| sweep_sample(cfg.d, cfg.seed, i, cfg.p).unwrap_or_else(|_| SweepRecord::failed(i, cfg.seed)))
            .collect()
    })?;
    let failures = records.iter().filter(|r| !r.is_ok()).count();
    Ok(SweepOutput { records, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QracRecord {
    pub sample_index: u64,
    pub seed: u64,
    pub i_bob: f64,
    pub qrac: f64,
}

/// Haar-random decoding pairs with their incompatibility and QRAC value.
pub fn run_qrac_sweep(cfg: &RunConfig) -> Result<Vec<QracRecord>> {
    cfg.validate()?;
    cfg.install(|| {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(cfg.seed, i);
                let b1 = haar_pvm(cfg.d, &mut rng)?;
                let b2 = haar_pvm(cfg.d, &mut rng)?;
                Ok(QracRecord {
                    sample_index: i,
                    seed: cfg.seed,
                    i_bob: incompatibility_rank1(&b1, &b2, cfg.p)?,
                    qrac: qrac_success(&b1, &b2)?.success,
                })
            })
            .collect()
    })?
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub d: usize,
    pub eta_c: f64,
    pub eta_r: f64,
    pub chi: f64,
    pub qrac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub rows: Vec<ThresholdRow>,
    pub eta_r_increasing: bool,
    pub eta_c_decreasing: bool,
}

/// Critical noise levels at the optimal interferometric settings. The
/// CGLMP threshold keeps the noiseless optimal state and puts the noise on
/// Bob; the QRAC threshold uses Bob's settings as decodings.
pub fn threshold_row(d: usize) -> Result<ThresholdRow> {
    let s = CglmpSetting::optimal_interferometric(d)?;
    let (b1, b2) = s.bob();
    let best = chi_max(&s)?;
    let rho = ComplexMatrix::outer(&best.optimal_state);
    Ok(ThresholdRow {
        d,
        eta_c: threshold_eta_c(&s, &rho, Party::Bob)?,
        eta_r: threshold_eta_r(b1, b2)?,
        chi: best.chi,
        qrac: qrac_success(b1, b2)?.success,
    })
}

pub fn run_thresholds(cfg: &RunConfig) -> Result<ThresholdTable> {
    cfg.validate()?;
    let rows = cfg.install(|| {
        (cfg.d_min..=cfg.d_max)
            .into_par_iter()
            .map(threshold_row)
            .collect::<Result<Vec<_>>>()
    })??;
    Ok(ThresholdTable {
        eta_r_increasing: rows.windows(2).all(|w| w[1].eta_r > w[0].eta_r),
        eta_c_decreasing: rows.windows(2).all(|w| w[1].eta_c < w[0].eta_c),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    Fig1Scatter,
    Fig2Entropy,
    Fig3Scan,
    Fig4Qrac,
    Fig5Equalrobust,
}

impl ReportKind {
    pub const ALL: [ReportKind; 5] = [
        ReportKind::Fig1Scatter,
        ReportKind::Fig2Entropy,
        ReportKind::Fig3Scan,
        ReportKind::Fig4Qrac,
        ReportKind::Fig5Equalrobust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReportKind::Fig1Scatter => "fig1-scatter",
            ReportKind::Fig2Entropy => "fig2-entropy",
            ReportKind::Fig3Scan => "fig3-scan",
            ReportKind::Fig4Qrac => "fig4-qrac",
            ReportKind::Fig5Equalrobust => "fig5-equalrobust",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            ReportKind::Fig1Scatter => schema::FIG1_SCATTER,
            ReportKind::Fig2Entropy => schema::FIG2_ENTROPY,
            ReportKind::Fig3Scan => schema::FIG3_SCAN,
            ReportKind::Fig4Qrac => schema::FIG4_QRAC,
            ReportKind::Fig5Equalrobust => schema::FIG5_EQUALROBUST,
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// A columnar data set ready to be written as CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
    /// `key=value` pairs for the comment line.
    pub meta: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_finite() => write!(f, "{v:.16e}"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl Table {
    fn new(name: &str, columns: &'static [&'static str], cfg: &RunConfig, keys: &[&str]) -> Self {
        let mut meta = vec![("schema".to_string(), SCHEMA_VERSION.to_string())];
        for key in keys {
            let value = match *key {
                "d" => cfg.d.to_string(),
                "samples" => cfg.samples.to_string(),
                "seed" => cfg.seed.to_string(),
                "p" => cfg.p.to_string(),
                "d_min" => cfg.d_min.to_string(),
                "d_max" => cfg.d_max.to_string(),
                "grid" => cfg.grid.to_string(),
                "budget" => cfg.budget.to_string(),
                "tol" => cfg.tol.to_string(),
                other => unreachable!("unknown metadata key {other}"),
            };
            meta.push((key.to_string(), value));
        }
        meta.push(("units".into(), "dimensionless".into()));
        Self {
            name: name.to_string(),
            columns,
            rows: Vec::new(),
            meta,
        }
    }

    /// Writes the comment line, header and rows with `\n` line endings.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut out = io::BufWriter::new(out);
        write!(out, "# table={}", self.name)?;
        for (k, v) in &self.meta {
            write!(out, " {k}={v}")?;
        }
        writeln!(out)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
    }

    /// Writes to `path`, or to stdout when `path` is `None`.
    pub fn save(&self, path: Option<&std::path::Path>) -> Result<()> {
        match path {
            Some(p) => self.write_csv(std::fs::File::create(p)?),
            None => self.write_csv(io::stdout().lock()),
        }
    }
}

/// Reads a table written by [`Table::write_csv`], checking the header.
pub fn read_table(text: &str, columns: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers()?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(Error::config(
            "header",
            format!("expected {columns:?}, found {:?}", header.iter().collect::<Vec<_>>()),
        ));
    }
    Ok(r.records().collect::<std::result::Result<_, _>>()?)
}

pub fn sweep_table(cfg: &RunConfig, out: &SweepOutput) -> Table {
    let mut t = Table::new("sweep", schema::SWEEP, cfg, &["d", "samples", "seed", "p"]);
    t.rows = out
        .records
        .iter()
        .map(|r| {
            vec![
                r.sample_index.into(),
                r.seed.into(),
                r.i_alice.into(),
                r.i_bob.into(),
                r.chi.into(),
                r.qrac.into(),
                r.schmidt[0].into(),
                r.schmidt[1].into(),
                r.schmidt[2].into(),
                r.entropy.into(),
                Cell::Text(r.status.clone()),
            ]
        })
        .collect();
    t
}

pub fn qrac_table(cfg: &RunConfig, records: &[QracRecord]) -> Table {
    let mut t = Table::new("qrac-sweep", schema::QRAC_SWEEP, cfg, &["d", "samples", "seed", "p"]);
    t.rows = records
        .iter()
        .map(|r| vec![r.sample_index.into(), r.seed.into(), r.i_bob.into(), r.qrac.into()])
        .collect();
    t
}

pub fn threshold_csv_table(cfg: &RunConfig, table: &ThresholdTable) -> Table {
    let mut t = Table::new("thresholds", schema::THRESHOLDS, cfg, &["d_min", "d_max"]);
    t.meta.push(("eta_r_increasing".into(), table.eta_r_increasing.to_string()));
    t.meta.push(("eta_c_decreasing".into(), table.eta_c_decreasing.to_string()));
    t.rows = table
        .rows
        .iter()
        .map(|r| vec![r.d.into(), r.eta_c.into(), r.eta_r.into(), r.chi.into(), r.qrac.into()])
        .collect();
    t
}

/// Data behind one of the figures.
pub fn run_report(kind: ReportKind, cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let name = kind.name();
    let columns = kind.columns();
    let table = match kind {
        ReportKind::Fig1Scatter => {
            let out = run_sweep(cfg)?;
            let mut t = Table::new(name, columns, cfg, &["d", "samples", "seed", "p"]);
            t.rows = out
                .records
                .iter()
                .map(|r| vec![r.sample_index.into(), r.i_alice.into(), r.i_bob.into(), r.chi.into()])
                .collect();
            t
        }
        ReportKind::Fig2Entropy => {
            let mut t = Table::new(name, columns, cfg, &["d", "seed", "budget", "tol", "p"]);
            for &target in &cfg.i_targets {
                let problem = ConstrainedProblem {
                    dim: cfg.d,
                    sense: Sense::Max,
                    i_target: Some(target),
                    side: Side::Bob,
                    tol: cfg.tol,
                    budget: cfg.budget,
                    seed: cfg.seed,
                    p: cfg.p,
                    ..Default::default()
                };
                let r = cfg.install(|| constrained_chi_extremum(&problem))??;
                let gamma = mvs_gamma(&r.schmidt).unwrap_or(f64::NAN);
                t.rows.push(vec![target.into(), r.i_bob.into(), r.value.into(), gamma.into(), r.entropy.into()]);
            }
            t
        }
        ReportKind::Fig3Scan => {
            let points = cfg.install(|| interferometric_scan(cfg.grid))??;
            let mut t = Table::new(name, columns, cfg, &["grid"]);
            t.rows = points
                .iter()
                .map(|p| vec![p.xi.into(), p.i_alice.into(), p.i_bob.into(), p.chi.into()])
                .collect();
            t
        }
        ReportKind::Fig4Qrac => {
            let records = run_qrac_sweep(cfg)?;
            let mut t = Table::new(name, columns, cfg, &["d", "samples", "seed", "p"]);
            t.rows = records
                .iter()
                .map(|r| vec![r.sample_index.into(), r.i_bob.into(), r.qrac.into()])
                .collect();
            t
        }
        ReportKind::Fig5Equalrobust => {
            let scan = cfg.install(|| equal_robustness_scan(cfg.samples, cfg.d, cfg.tol, cfg.seed))??;
            let mut t = Table::new(name, columns, cfg, &["d", "samples", "seed", "tol"]);
            t.meta.push(("hits".into(), scan.hits.len().to_string()));
            t.rows = scan
                .hits
                .iter()
                .map(|h| {
                    vec![
                        h.sample_index.into(),
                        h.i_bob.into(),
                        h.eta_r.into(),
                        h.eta_c.into(),
                        h.qrac.into(),
                        h.chi.into(),
                    ]
                })
                .collect();
            t
        }
    };
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            samples: 20,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn config_validation() {
        let bad = RunConfig {
            samples: 0,
            ..Default::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Config { ref field, .. }) if field == "samples"));
        let bad = RunConfig {
            d: 12,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            eta_grid: vec![0.5, 1.5],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn json_config_reports_line() {
        let text = "{\n  \"d\": 3,\n  \"samples\": \"many\"\n}";
        match RunConfig::from_json(text) {
            Err(Error::Config { line: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        let ok = RunConfig::from_json("{\"d\": 2, \"samples\": 5, \"p\": \"2\"}").unwrap();
        assert_eq!(ok.p, SchattenP::TWO);
        assert!(RunConfig::from_json("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn sweep_round_trips_and_is_worker_independent() {
        let cfg = small();
        let one = RunConfig {
            workers: Some(1),
            ..cfg.clone()
        };
        let three = RunConfig {
            workers: Some(3),
            ..cfg.clone()
        };
        let a = sweep_table(&one, &run_sweep(&one).unwrap()).to_csv_string().unwrap();
        let b = sweep_table(&three, &run_sweep(&three).unwrap()).to_csv_string().unwrap();
        assert_eq!(a, b);
        assert!(!a.contains('\r'));
        let rows = read_table(&a, schema::SWEEP).unwrap();
        assert_eq!(rows.len(), 20);
        for r in &rows {
            let chi: f64 = r[4].parse().unwrap();
            assert!(chi > 2.0 && chi <= 4.0);
            assert_eq!(&r[10], "ok");
        }
    }

    #[test]
    fn report_kinds_parse() {
        for k in ReportKind::ALL {
            assert_eq!(k.name().parse::<ReportKind>().unwrap(), k);
        }
        assert!(matches!("fig9".parse::<ReportKind>(), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn small_scan_report() {
        let cfg = RunConfig {
            grid: 7,
            ..Default::default()
        };
        let t = run_report(ReportKind::Fig3Scan, &cfg).unwrap();
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("# table=fig3-scan schema=1"));
        assert_eq!(read_table(&text, schema::FIG3_SCAN).unwrap().len(), 7);
    }

    #[test]
    fn header_mismatch_is_rejected() {
        let cfg = small();
        let t = qrac_table(&cfg, &run_qrac_sweep(&cfg).unwrap());
        let text = t.to_csv_string().unwrap();
        assert!(read_table(&text, schema::SWEEP).is_err());
        assert_eq!(read_table(&text, schema::QRAC_SWEEP).unwrap().len(), 20);
    }
}
