//! Run configuration, orchestration of the cat and branch evolutions, sweeps
//! and file output.

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{inter_peak_floors, PeakParams, PeakTable};
use crate::dynamics::{
    build_generator, evolve_with, initial_branch_state, initial_cat_state, Branch, Evolution, Scheme,
    SystemParams, DEFAULT_DT, NORM_ABORT, STEP_GUARD, TAIL_WARN,
};
use crate::interaction::{fq_matrix, CouplingMatrix};
use crate::observables::{q_function, sample_trajectories, ObservableSample, QAxes, QGrid};
use crate::qalgebra::DeformationParam;
use crate::{to_phys_time, C64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Timeseries,
    Qfunc,
    Peaks,
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub t_end_plot: f64,
    pub sample_spacing_plot: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub outputs: Vec<Output>,
    pub qfunc_times: Vec<f64>,
    pub qfunc_window: QAxes,
    pub peaks: PeakParams,
    /// Tail occupancy above which a run fails instead of warning.
    pub tail_error_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::default(),
            t_end_plot: 500.0,
            sample_spacing_plot: 0.2,
            dt: DEFAULT_DT,
            scheme: Scheme::default(),
            outputs: vec![Output::Timeseries, Output::Qfunc, Output::Peaks],
            qfunc_times: Vec::new(),
            qfunc_window: QAxes::default(),
            peaks: PeakParams::default(),
            tail_error_threshold: 1e-2,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t_end_plot > 0.0) || !self.t_end_plot.is_finite() {
            return Err(Error::InvalidParameter("t_end_plot must be positive".into()));
        }
        if !(self.sample_spacing_plot > 0.0) || !self.sample_spacing_plot.is_finite() {
            return Err(Error::InvalidParameter("sample_spacing_plot must be positive".into()));
        }
        if !(self.dt > 0.0) || self.params.omega_bar * self.dt > STEP_GUARD * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} violates omega_bar * dt <= {STEP_GUARD}",
                self.dt
            )));
        }
        if self.qfunc_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end_plot)) {
            return Err(Error::InvalidParameter("qfunc_times must lie in [0, t_end_plot]".into()));
        }
        if !(self.tail_error_threshold > 0.0) {
            return Err(Error::InvalidParameter("tail_error_threshold must be positive".into()));
        }
        self.qfunc_window.validate()?;
        self.peaks.validate()
    }

    /// Uniform plotted-time samples `0, h, 2h, ...` up to `t_end_plot`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end_plot / self.sample_spacing_plot + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.sample_spacing_plot).collect()
    }

    fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

/// Integrator diagnostics of one evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionDiagnostics {
    pub steps: u64,
    pub max_norm_drift: f64,
    pub max_energy_drift: f64,
    pub max_tail_occupancy: f64,
    pub tail_warning: bool,
}

impl From<&Evolution> for EvolutionDiagnostics {
    fn from(e: &Evolution) -> Self {
        EvolutionDiagnostics {
            steps: e.steps,
            max_norm_drift: e.max_norm_drift,
            max_energy_drift: e.max_energy_drift,
            max_tail_occupancy: e.max_tail_occupancy,
            tail_warning: e.tail_warning(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub cat: EvolutionDiagnostics,
    pub branch1: EvolutionDiagnostics,
    pub branch2: EvolutionDiagnostics,
}

impl RunDiagnostics {
    pub fn max_norm_drift(&self) -> f64 {
        self.all().map(|d| d.max_norm_drift).fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.all().map(|d| d.max_energy_drift).fold(0.0, f64::max)
    }

    pub fn max_tail_occupancy(&self) -> f64 {
        self.all().map(|d| d.max_tail_occupancy).fold(0.0, f64::max)
    }

    fn all(&self) -> impl Iterator<Item = &EvolutionDiagnostics> {
        [&self.cat, &self.branch1, &self.branch2].into_iter()
    }
}

/// In-memory result of [`simulate`].
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub samples: Vec<ObservableSample>,
    pub qgrids: Vec<(f64, QGrid)>,
    pub peaks: PeakTable,
    pub diagnostics: RunDiagnostics,
}

impl RunResult {
    pub fn t_plot(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t_plot).collect()
    }

    pub fn s_p(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.s_p).collect()
    }

    pub fn inversion(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.inversion()).collect()
    }

    /// `(t_left, t_right, floor)` of the S(P) envelope between consecutive peaks.
    pub fn inter_peak_floors(&self) -> Result<Vec<(f64, f64, f64)>> {
        inter_peak_floors(&self.t_plot(), &self.s_p(), &self.peaks.records, self.config.peaks.smooth_window)
    }
}

/// Evolves the cat and both branch states on one generator and time grid
/// and derives every observable. No files are touched.
pub fn simulate(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let p = &cfg.params;
    simulate_with(cfg, &fq_matrix(p.n_max, p.epsilon, p.deformation)?)
}

/// [`simulate`] with an explicitly supplied coupling matrix, e.g. the
/// harmonic closed form.
pub fn simulate_with(cfg: &RunConfig, f: &CouplingMatrix) -> Result<RunResult> {
    cfg.validate()?;
    let p = &cfg.params;
    let gen = build_generator(p, f)?;

    // sample grid plus any Q-function times, in plotted units
    let samples = cfg.sample_times();
    let mut grid: Vec<f64> = samples.iter().chain(&cfg.qfunc_times).cloned().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    let phys: Vec<f64> = grid.iter().map(|t| to_phys_time(*t)).collect();

    let run = |s0| evolve_with(&s0, &gen, &phys, cfg.dt, cfg.scheme);
    let (cat, (b1, b2)) = rayon::join(
        || run(initial_cat_state(p)),
        || {
            rayon::join(
                || run(initial_branch_state(Branch::Ground, p)),
                || run(initial_branch_state(Branch::Excited, p)),
            )
        },
    );
    let (cat, b1, b2) = (cat?, b1?, b2?);
    let diagnostics = RunDiagnostics {
        cat: (&cat).into(),
        branch1: (&b1).into(),
        branch2: (&b2).into(),
    };
    let tail = diagnostics.max_tail_occupancy();
    if tail > cfg.tail_error_threshold {
        return Err(Error::TruncationLeak { tail, limit: cfg.tail_error_threshold });
    }

    let locate = |t: f64| grid.iter().position(|g| (g - t).abs() <= 1e-9).expect("time on grid");
    let qgrids = if cfg.wants(Output::Qfunc) {
        cfg.qfunc_times
            .iter()
            .map(|&t| Ok((t, q_function(&cat.states[locate(t)], &cfg.qfunc_window, p.deformation)?)))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let all = sample_trajectories(&cat, &b1, &b2)?;
    let samples: Vec<ObservableSample> = samples
        .iter()
        .map(|&t| {
            let mut s = all[locate(t)].clone();
            s.t_plot = t;
            s
        })
        .collect();
    let t: Vec<f64> = samples.iter().map(|s| s.t_plot).collect();
    let s_p: Vec<f64> = samples.iter().map(|s| s.s_p).collect();
    let inv: Vec<f64> = samples.iter().map(|s| s.inversion()).collect();
    let peaks = PeakTable::from_series(&t, &s_p, &inv, &cfg.peaks)?;

    Ok(RunResult { config: cfg.clone(), samples, qgrids, peaks, diagnostics })
}

pub const TIMESERIES_HEADER: &str = "t_plot,P_g,P_e,I,re_C,im_C,P_g1,P_e1,P_g2,P_e2,S_P";

pub fn write_timeseries<W: Write>(samples: &[ObservableSample], mut w: W) -> Result<()> {
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.t_plot,
            s.full.p_g,
            s.full.p_e,
            s.inversion(),
            s.full.c_ge.re,
            s.full.c_ge.im,
            s.branch1.p_g,
            s.branch1.p_e,
            s.branch2.p_g,
            s.branch2.p_e,
            s.s_p
        )?;
    }
    Ok(())
}

/// Reads `t_plot`, `I` and `S_P` back from a timeseries file.
pub fn read_timeseries(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let header = lines.next().ok_or(Error::EmptySeries)??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    let col = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column {name}", path.display())))
    };
    let (ct, ci, cs) = (col("t_plot")?, col("I")?, col("S_P")?);
    let (mut t, mut inv, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let get = |c: usize| -> Result<f64> {
            fields
                .get(c)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad value on data line {}", path.display(), k + 1)))
        };
        t.push(get(ct)?);
        inv.push(get(ci)?);
        s.push(get(cs)?);
    }
    if t.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok((t, inv, s))
}

/// File name for a Q-function grid, e.g. `qfunc_t67.8.csv`.
pub fn qfunc_file_name(t: f64) -> String {
    format!("qfunc_t{t}.csv")
}

#[derive(Debug, Serialize)]
struct Tolerances {
    step_guard: f64,
    norm_abort: f64,
    tail_warn: f64,
    tail_error_threshold: f64,
}

#[derive(Debug, Serialize)]
struct QMeta {
    t_plot: f64,
    file: String,
    grid_sum: f64,
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    program: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    tolerances: Tolerances,
    diagnostics: &'a RunDiagnostics,
    qfunc: Vec<QMeta>,
    peak_count: usize,
    revival_maxima: Vec<f64>,
    revivals_decreasing: Option<bool>,
    contrast: Option<f64>,
}

/// Writes every requested output of `r` plus `run_meta.json` into `dir`.
pub fn write_run(r: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let cfg = &r.config;
    if cfg.wants(Output::Timeseries) {
        let mut w = BufWriter::new(File::create(dir.join("timeseries.csv"))?);
        write_timeseries(&r.samples, &mut w)?;
        w.flush()?;
    }
    let mut qmeta = Vec::new();
    for (t, q) in &r.qgrids {
        let file = qfunc_file_name(*t);
        let mut w = BufWriter::new(File::create(dir.join(&file))?);
        q.write_csv(&mut w)?;
        w.flush()?;
        qmeta.push(QMeta { t_plot: *t, file, grid_sum: q.grid_sum() });
    }
    if cfg.wants(Output::Peaks) {
        fs::write(dir.join("peaks.csv"), r.peaks.to_csv())?;
    }
    let meta = RunMeta {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        tolerances: Tolerances {
            step_guard: STEP_GUARD,
            norm_abort: NORM_ABORT,
            tail_warn: TAIL_WARN,
            tail_error_threshold: cfg.tail_error_threshold,
        },
        diagnostics: &r.diagnostics,
        qfunc: qmeta,
        peak_count: r.peaks.records.len(),
        revival_maxima: r.peaks.revival_maxima(),
        revivals_decreasing: r.peaks.revivals_decreasing(),
        contrast: r.peaks.contrast(),
    };
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(dir.join("run_meta.json"), text)?;
    Ok(())
}

/// Outcome of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub tau: f64,
    pub beta: C64,
    pub dir: PathBuf,
    pub outcome: std::result::Result<CellSummary, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub peaks: usize,
    pub revivals: usize,
    pub contrast: Option<f64>,
    pub revivals_decreasing: Option<bool>,
    pub max_envelope: f64,
}

pub fn cell_dir_name(tau: f64, beta: C64) -> String {
    if beta.im == 0.0 {
        format!("tau_{tau}_beta_{}", beta.re)
    } else {
        format!("tau_{tau}_beta_{}_{}", beta.re, beta.im)
    }
}

/// Runs the cross product of `taus` and `betas`, one directory per cell.
/// A failing cell is recorded in the summary and does not stop the others.
pub fn sweep(base: &RunConfig, taus: &[f64], betas: &[C64], out: &Path) -> Result<Vec<SweepCell>> {
    fs::create_dir_all(out)?;
    let cells: Vec<(f64, C64)> = taus.iter().flat_map(|&t| betas.iter().map(move |&b| (t, b))).collect();
    let results: Vec<SweepCell> = cells
        .par_iter()
        .map(|&(tau, beta)| {
            let dir = out.join(cell_dir_name(tau, beta));
            let outcome = (|| -> Result<CellSummary> {
                let mut cfg = base.clone();
                cfg.params = cfg.params.with_tau(tau)?.with_beta(beta);
                let r = simulate(&cfg)?;
                write_run(&r, &dir)?;
                let revivals = r.peaks.revival_maxima().len();
                let max_envelope =
                    r.peaks.records.iter().skip(1).map(|p| p.envelope_amplitude).fold(0.0, f64::max);
                Ok(CellSummary {
                    peaks: r.peaks.records.len(),
                    revivals,
                    contrast: r.peaks.contrast(),
                    revivals_decreasing: r.peaks.revivals_decreasing(),
                    max_envelope,
                })
            })()
            .map_err(|e| e.to_string());
            SweepCell { tau, beta, dir, outcome }
        })
        .collect();

    let mut w = BufWriter::new(File::create(out.join("summary.csv"))?);
    writeln!(w, "tau,beta_re,beta_im,status,peaks,revivals,contrast,revivals_decreasing,max_envelope,error")?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for c in &results {
        match &c.outcome {
            Ok(s) => writeln!(
                w,
                "{},{},{},ok,{},{},{},{},{},",
                c.tau,
                c.beta.re,
                c.beta.im,
                s.peaks,
                s.revivals,
                opt(s.contrast),
                s.revivals_decreasing.map(|b| b.to_string()).unwrap_or_default(),
                s.max_envelope
            )?,
            Err(e) => writeln!(w, "{},{},{},error,,,,,,\"{}\"", c.tau, c.beta.re, c.beta.im, e.replace('"', "'"))?,
        }
    }
    w.flush()?;
    Ok(results)
}

/// Parses `4`, `-3.5`, `4+1i`, `4-0.5i` or `2i`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("not a complex number: {s:?}"));
    let s = s.trim();
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(k, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
            .map(|(k, _)| k)
            .last();
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
        Ok(C64::new(re, im))
    } else {
        Ok(C64::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| f(x.trim())).collect()
}

fn parse_real(s: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

#[derive(Debug, Parser)]
#[command(name = "qcat", version, about = "Cat-state dynamics of a trapped ion in a q-deformed trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Overrides {
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Coherent amplitude, e.g. `4` or `3+1i`
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// End of the run in plotted time
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integration step in physical time
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub prominence: Option<f64>,
    /// Revival threshold on the inversion envelope
    #[arg(long)]
    pub threshold: Option<f64>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(t) = self.tau {
            cfg.params.deformation = DeformationParam::new(t)?;
        }
        if let Some(b) = &self.beta {
            cfg.params.beta = parse_complex(b)?;
        }
        if let Some(t) = self.t_end {
            cfg.t_end_plot = t;
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(p) = self.prominence {
            cfg.peaks.prominence = p;
        }
        if let Some(th) = self.threshold {
            cfg.peaks.threshold = th;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the cat and both branches and write all outputs
    Run(Overrides),
    /// Run a grid of tau and beta values, one directory per cell
    Sweep {
        #[command(flatten)]
        common: Overrides,
        /// Comma-separated tau values
        #[arg(long, default_value = "0,0.004,0.0047,0.008")]
        taus: String,
        /// Comma-separated beta values
        #[arg(long, default_value = "3,4")]
        betas: String,
    },
    /// Write Husimi grids of the cat state at the given plotted times
    Qfunc {
        #[command(flatten)]
        common: Overrides,
        /// Comma-separated plotted times
        #[arg(long)]
        times: String,
    },
    /// Re-extract peaks from an existing timeseries.csv
    Peaks {
        #[command(flatten)]
        common: Overrides,
        /// Input timeseries; defaults to <out-dir>/timeseries.csv
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

/// Executes a parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(o) => {
            let cfg = o.resolve()?;
            let r = simulate(&cfg)?;
            write_run(&r, &o.out_dir)?;
            print!("{}", r.peaks.to_text());
            if r.diagnostics.all().any(|d| d.tail_warning) {
                eprintln!(
                    "warning: tail occupancy reached {:e}; results may feel the n_max cutoff",
                    r.diagnostics.max_tail_occupancy()
                );
            }
        }
        Command::Sweep { common, taus, betas } => {
            let cfg = common.resolve()?;
            let taus = parse_list(&taus, parse_real)?;
            let betas = parse_list(&betas, parse_complex)?;
            let cells = sweep(&cfg, &taus, &betas, &common.out_dir)?;
            for c in &cells {
                match &c.outcome {
                    Ok(s) => println!(
                        "{}: {} peaks, contrast {}",
                        c.dir.display(),
                        s.peaks,
                        s.contrast.map_or("n/a".into(), |v| format!("{v:.3}"))
                    ),
                    Err(e) => eprintln!("{}: failed: {e}", c.dir.display()),
                }
            }
        }
        Command::Qfunc { common, times } => {
            let mut cfg = common.resolve()?;
            cfg.qfunc_times = parse_list(&times, parse_real)?;
            let last = cfg.qfunc_times.iter().cloned().fold(0.0, f64::max);
            cfg.t_end_plot = last.max(cfg.sample_spacing_plot);
            cfg.outputs = vec![Output::Qfunc];
            let r = simulate(&cfg)?;
            write_run(&r, &common.out_dir)?;
            for (t, q) in &r.qgrids {
                println!("{} grid_sum {:.6}", qfunc_file_name(*t), q.grid_sum());
            }
        }
        Command::Peaks { common, input } => {
            let cfg = common.resolve()?;
            let input = input.unwrap_or_else(|| common.out_dir.join("timeseries.csv"));
            let (t, inv, s) = read_timeseries(&input)?;
            let table = PeakTable::from_series(&t, &s, &inv, &cfg.peaks)?;
            fs::create_dir_all(&common.out_dir)?;
            fs::write(common.out_dir.join("peaks.csv"), table.to_csv())?;
            print!("{}", table.to_text());
        }
    }
    Ok(())
}

/// Process entry point: returns the exit code. Failures print a JSON
/// object `{"error": kind, "message": text}` on stderr.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            if code == 0 {
                let _ = e.print();
                return 0;
            }
            let report = ErrorReport { error: "usage", message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&report).expect("serializable"));
            return 2;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            let report = ErrorReport { error: e.kind(), message: e.to_string() };
            eprintln!("{}", serde_json::to_string(&report).expect("serializable"));
            1
        }
    }
}
