//! Parameter sweeps that turn the model into CSV tables.
//!
//! Four experiments are available: condition number against spacing, the
//! eigenvalue profile of one array, directivity against the number of
//! retained modes, and directivity of a fixed-size panel against spacing.

mod config;
mod sweeps;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::ComplexVector;
use crate::error::{Error, Result};
use crate::geometry::ElementKind;
use crate::metrics::to_dbi;
use crate::precoding::Scheme;

pub use config::{ExperimentConfig, Spacing};
pub use sweeps::{
    run_conditioning_sweep, run_singular_profile, run_spacing_sweep, run_truncation_sweep,
    CONDITIONING_GRID, PROFILE_GRID, SPACING_GRID, TRUNCATION_GRID,
};

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "LIS_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Conditioning,
    Profile,
    Truncation,
    Spacing,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [
        Experiment::Conditioning,
        Experiment::Profile,
        Experiment::Truncation,
        Experiment::Spacing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Conditioning => "conditioning",
            Experiment::Profile => "profile",
            Experiment::Truncation => "truncation",
            Experiment::Spacing => "spacing",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}")))
    }
}

/// Knobs that belong to a run rather than to the experiment itself.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Write `Z`, `h` and the currents of every point here.
    pub dump_dir: Option<PathBuf>,
    /// Thread cap; falls back to [`WORKERS_ENV`], then to rayon's default.
    pub workers: Option<usize>,
    /// Print one progress line per sweep point on stderr.
    pub progress: bool,
}

/// One CSV row. Columns that do not apply to an experiment stay empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub kind: ElementKind,
    pub spacing_m: f64,
    pub spacing_lambda: f64,
    pub n: usize,
    pub scheme: Option<Scheme>,
    /// Eigenvalue index (profile) or retained-mode count (truncation), from 1.
    pub mode: Option<usize>,
    pub eigenvalue: Option<f64>,
    pub directivity: Option<f64>,
    pub condition_number: Option<f64>,
    pub retained_modes: Option<usize>,
    /// `iᴴi` of the power-normalised current.
    pub excitation_power: Option<f64>,
    pub d_nc: Option<f64>,
    /// `ok`, or the tag of the error that stopped this row.
    pub status: String,
    pub wall_time_ms: f64,
}

impl SweepRow {
    pub(crate) fn new(kind: ElementKind, spacing_m: f64, lambda: f64, n: usize) -> Self {
        SweepRow {
            kind,
            spacing_m,
            spacing_lambda: spacing_m / lambda,
            n,
            scheme: None,
            mode: None,
            eigenvalue: None,
            directivity: None,
            condition_number: None,
            retained_modes: None,
            excitation_power: None,
            d_nc: None,
            status: "ok".into(),
            wall_time_ms: 0.0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn directivity_dbi(&self) -> Option<f64> {
        self.directivity.map(to_dbi)
    }
}

/// Rows of one experiment, in config-grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub experiment: Experiment,
    pub wavelength: f64,
    pub rows: Vec<SweepRow>,
    pub include_wall_time: bool,
}

pub const CSV_HEADER: [&str; 17] = [
    "experiment",
    "kind",
    "spacing_m",
    "spacing_lambda",
    "n",
    "scheme",
    "mode",
    "eigenvalue",
    "directivity",
    "directivity_dbi",
    "condition_number",
    "retained_modes",
    "excitation_power",
    "d_nc",
    "d_nc_dbi",
    "status",
    "wall_time_ms",
];

/// Real number with 17 significant digits.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt_real(v: Option<f64>) -> String {
    v.map(format_real).unwrap_or_default()
}

fn opt_count(v: Option<usize>) -> String {
    v.map(|c| c.to_string()).unwrap_or_default()
}

impl SweepResult {
    /// Rows matching an element kind and scheme.
    pub fn select(&self, kind: ElementKind, scheme: Option<Scheme>) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.kind == kind && r.scheme == scheme)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let cols = if self.include_wall_time {
            CSV_HEADER.len()
        } else {
            CSV_HEADER.len() - 1
        };
        w.write_record(&CSV_HEADER[..cols])?;
        for r in &self.rows {
            let mut rec = vec![
                self.experiment.name().to_string(),
                r.kind.name().to_string(),
                format_real(r.spacing_m),
                format_real(r.spacing_lambda),
                r.n.to_string(),
                r.scheme.map(|s| s.name().to_string()).unwrap_or_default(),
                opt_count(r.mode),
                opt_real(r.eigenvalue),
                opt_real(r.directivity),
                opt_real(r.directivity_dbi()),
                opt_real(r.condition_number),
                opt_count(r.retained_modes),
                opt_real(r.excitation_power),
                opt_real(r.d_nc),
                opt_real(r.d_nc.map(to_dbi)),
                r.status.clone(),
            ];
            if self.include_wall_time {
                rec.push(format!("{:.3}", r.wall_time_ms));
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|source| Error::Io {
            path: PathBuf::from("<csv>"),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Runs one experiment by name.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepResult> {
    match experiment {
        Experiment::Conditioning => run_conditioning_sweep(cfg, opts),
        Experiment::Profile => run_singular_profile(cfg, opts),
        Experiment::Truncation => run_truncation_sweep(cfg, opts),
        Experiment::Spacing => run_spacing_sweep(cfg, opts),
    }
}

/// Worker count from the options or the environment; `None` leaves the
/// choice to rayon.
pub fn worker_cap(opts: &RunOptions) -> Result<Option<usize>> {
    if let Some(n) = opts.workers {
        return Ok(Some(n.max(1)));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(|n| Some(n.max(1)))
            .map_err(|_| Error::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Maps `f` over `items` on a bounded pool; output keeps input order.
pub(crate) fn par_map<T, U, F>(items: &[T], opts: &RunOptions, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_cap(opts)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

/// Writes a complex vector as `re im` lines with 17 significant digits.
pub fn dump_vector(path: &Path, v: &ComplexVector) -> Result<()> {
    let mut s = String::new();
    for c in v.iter() {
        s.push_str(&format!("{} {}\n", format_real(c.re), format_real(c.im)));
    }
    fs::write(path, s).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn dump_stem(dir: &Path, experiment: Experiment, kind: ElementKind, point: usize) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    Ok(dir.join(format!("{}_{}_{:03}", experiment.name(), kind.name(), point)))
}

pub(crate) fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_have_seventeen_digits() {
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(0.1), "1.0000000000000001e-1");
        let back: f64 = format_real(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let mut row = SweepRow::new(ElementKind::Planar, 0.05, 0.1, 9);
        row.scheme = Some(Scheme::CaPmf);
        row.directivity = Some(100.0);
        let mut res = SweepResult {
            experiment: Experiment::Spacing,
            wavelength: 0.1,
            rows: vec![row],
            include_wall_time: false,
        };
        let text = res.to_csv_string().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER[..16].join(","));
        let cells: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(cells.len(), 16);
        assert_eq!(cells[1], "planar");
        assert_eq!(cells[3], "5.0000000000000000e-1");
        assert_eq!(cells[5], "CA-pMF");
        assert_eq!(cells[9], "2.0000000000000000e1");
        assert_eq!(cells[6], "");
        assert_eq!(cells[15], "ok");
        res.include_wall_time = true;
        assert!(res.to_csv_string().unwrap().starts_with(&CSV_HEADER.join(",")));
    }

    #[test]
    fn experiment_names() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("sweep".parse::<Experiment>().is_err());
    }

    #[test]
    fn explicit_worker_cap_wins() {
        let opts = RunOptions {
            workers: Some(0),
            ..RunOptions::default()
        };
        assert_eq!(worker_cap(&opts).unwrap(), Some(1));
        let out = par_map(&[3, 1, 2], &opts, |x| x * 10).unwrap();
        assert_eq!(out, vec![30, 10, 20]);
    }
}
