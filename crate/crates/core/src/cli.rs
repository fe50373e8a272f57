//! Command-line front end. Every subcommand delegates to a library
//! operation and renders the result as text, CSV or JSON.
//!
//! Exit codes: 0 success, 1 other failure, 2 validation error, 3 engine
//! disagreement, 4 numeric capacity exceeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amplitude::{Amp, AmpError};
use crate::circuit::{
    build_double_mzi, build_hom, build_mzi, Circuit, CircuitError, CircuitFile, FileError, HardyParams, SourceSpec,
};
use crate::design::{self, DesignError, ScanParam, ScanRow};
use crate::expr::Real;
use crate::fock::{self, CoherentReport, FockError};
use crate::outcome::{Outcome, OutcomeTable};
use crate::path_engine::{self, PathError, PathListing};
use crate::sources::{make_diagonal, InputSpec, InputState, InternalState, SourceError};
use crate::statistics::{StatsError, StudyReport, DEFAULT_SEED};

/// Largest entrywise difference tolerated between the two engines.
pub const AGREEMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("engines disagree: max entrywise difference {max:.3e} exceeds {AGREEMENT_TOLERANCE:e}")]
    Disagreement { max: f64 },
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Disagreement { .. } => 3,
            CliError::Capacity(_) => 4,
        }
    }
}

impl From<AmpError> for CliError {
    fn from(e: AmpError) -> CliError {
        match e {
            AmpError::Capacity => CliError::Capacity(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> CliError {
        match e {
            CircuitError::Amp(a) => a.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> CliError {
        match e {
            SourceError::Amp(a) => a.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> CliError {
        match e {
            FileError::Io(_) => CliError::Other(e.to_string()),
            FileError::Source(s) => s.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<PathError> for CliError {
    fn from(e: PathError) -> CliError {
        match e {
            PathError::Amp(a) => a.into(),
            PathError::Circuit(c) => c.into(),
            PathError::Source(s) => s.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> CliError {
        match e {
            FockError::Amp(a) => a.into(),
            FockError::Circuit(c) => c.into(),
            FockError::Source(s) => s.into(),
            FockError::TooManyPhotons { .. } => CliError::Capacity(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> CliError {
        match e {
            StatsError::Amp(a) => a.into(),
            StatsError::EmptyTable => CliError::Other(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> CliError {
        match e {
            DesignError::Amp(a) => a.into(),
            DesignError::Circuit(c) => c.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "photon-interference", version, about = "Few-photon linear-optical interference simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    Path,
    Fock,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Balanced Mach-Zehnder interferometer, one photon at `in`.
    Mzi,
    /// One 50:50 beam splitter, photons at `in_L` and `in_R`.
    Hom,
    /// Double interferometer with every beam splitter 50:50.
    Hardy5050,
    /// Double interferometer with reflectivities from `--R0 --Rc --Rm --Rf`.
    Hardy,
}

#[derive(Args, Debug, Clone, PartialEq, Default)]
pub struct CircuitArgs {
    /// Built-in circuit.
    #[arg(long, value_enum, conflicts_with = "circuit")]
    pub preset: Option<Preset>,
    /// Circuit description file (JSON).
    #[arg(long, value_name = "FILE")]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Reflectivities accept exact forms such as `1/3`, `sqrt2-1` or `2-sqrt2`.
#[derive(Args, Debug, Clone, PartialEq, Default)]
pub struct ParamArgs {
    #[arg(long = "R0", value_name = "R")]
    pub r0: Option<String>,
    #[arg(long = "Rc", value_name = "R")]
    pub rc: Option<String>,
    #[arg(long = "Rm", value_name = "R")]
    pub rm: Option<String>,
    #[arg(long = "Rf", value_name = "R")]
    pub rf: Option<String>,
}

#[derive(Args, Debug, Clone, PartialEq, Default)]
pub struct PairArgs {
    /// Overlap of the two photons' internal states, `C` or `RE,IM`.
    #[arg(long, value_name = "C", conflicts_with = "identical", allow_hyphen_values = true)]
    pub overlap: Option<String>,
    /// Indistinguishable photons (overlap 1).
    #[arg(long)]
    pub identical: bool,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Full outcome distribution.
    Simulate {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = EngineChoice::Path)]
        engine: EngineChoice,
    },
    /// Monte Carlo sampling with Clopper-Pearson intervals.
    Sample {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_enum, default_value_t = EngineChoice::Path)]
        engine: EngineChoice,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
    },
    /// Every single-photon path from one source, with its amplitude.
    Paths {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Source port; defaults to the first input.
        #[arg(long)]
        source: Option<String>,
        /// Internal label carried by the photon.
        #[arg(long, default_value = "H")]
        label: String,
    },
    /// Vary one reflectivity of the double interferometer.
    Scan {
        #[command(flatten)]
        params: ParamArgs,
        /// Reflectivity to vary.
        #[arg(long, default_value = "Rf")]
        param: ScanParam,
        #[arg(long, value_name = "START:STOP:STEP", default_value = "0:1:0.05")]
        grid: String,
    },
    /// Largest `D2 D3` coincidence keeping both interference effects complete.
    Optimize,
    /// Distribution as a function of the photons' overlap.
    Curve {
        #[command(flatten)]
        circuit: CircuitArgs,
        #[arg(long, value_name = "START:STOP:STEP", default_value = "0:1:0.05")]
        grid: String,
    },
    /// Two weak coherent inputs: source channels and the two-photon conditional distribution.
    Coherent {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Amplitude of the first source.
        #[arg(long, value_name = "RE,IM", default_value = "0.1,0", allow_hyphen_values = true)]
        alpha: String,
        /// Amplitude of the second source; defaults to `--alpha`.
        #[arg(long, value_name = "RE,IM", allow_hyphen_values = true)]
        beta: Option<String>,
        /// Fock truncation per source.
        #[arg(long, default_value_t = 2)]
        n_max: u8,
    },
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn parse_real(name: &str, s: &str) -> Result<Real, CliError> {
    Real::parse(s).map_err(|e| validation(format!("--{name}: {e}")))
}

/// `x` or `re,im`, exact when both parts are.
pub fn parse_complex(s: &str) -> Result<Amp, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let (re, im) = match parts.as_slice() {
        [re] => (parse_real("overlap", re)?, Real::ratio(0, 1)),
        [re, im] => (parse_real("overlap", re)?, parse_real("overlap", im)?),
        _ => return Err(validation(format!("expected `RE` or `RE,IM`, got `{s}`"))),
    };
    match (re.to_exact_amp(), im.to_exact_amp()) {
        (Some(a), Some(b)) => Ok(Amp::Exact(a).add(&Amp::I.mul(&Amp::Exact(b))?)?),
        _ => Ok(Amp::float(re.value(), im.value())),
    }
}

/// `START:STOP:STEP`, inclusive of `STOP` up to rounding.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || validation(format!("--grid: expected START:STOP:STEP, got `{s}`"));
    let v: Vec<f64> = s.split(':').map(|x| x.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = v.as_slice() else { return Err(bad()) };
    if !(step.is_finite() && *step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(bad());
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| if k == n && ((start + k as f64 * step) - stop).abs() < 1e-9 { *stop } else { start + k as f64 * step }).collect())
}

impl ParamArgs {
    /// Missing reflectivities default to 1/2.
    pub fn hardy_params(&self) -> Result<HardyParams, CliError> {
        let get = |name: &str, v: &Option<String>| match v {
            Some(s) => parse_real(name, s),
            None => Ok(Real::ratio(1, 2)),
        };
        Ok(HardyParams::new(get("R0", &self.r0)?, get("Rc", &self.rc)?, get("Rm", &self.rm)?, get("Rf", &self.rf)?)?)
    }

    fn is_empty(&self) -> bool {
        self.r0.is_none() && self.rc.is_none() && self.rm.is_none() && self.rf.is_none()
    }
}

/// A loaded circuit with its default sources.
#[derive(Clone, Debug)]
pub struct Setup {
    pub circuit: Circuit,
    pub inputs: InputSpec,
}

impl CircuitArgs {
    pub fn load(&self) -> Result<Setup, CliError> {
        if self.preset != Some(Preset::Hardy) && !self.params.is_empty() {
            return Err(validation("--R0/--Rc/--Rm/--Rf require --preset hardy"));
        }
        let photon = |p: &str| (p.to_string(), InputState::SinglePhoton(InternalState::h()));
        let pair = |a: &str, b: &str| InputSpec::photons([(a, InternalState::h()), (b, InternalState::h())]);
        let (circuit, inputs) = match (&self.preset, &self.circuit) {
            (Some(Preset::Mzi), _) => (build_mzi(), InputSpec::new().with(photon("in").0, photon("in").1)?),
            (Some(Preset::Hom), _) => (build_hom(), pair("in_L", "in_R")?),
            (Some(Preset::Hardy5050), _) => (build_double_mzi(&HardyParams::balanced()), pair("L", "R")?),
            (Some(Preset::Hardy), _) => (build_double_mzi(&self.params.hardy_params()?), pair("L", "R")?),
            (None, Some(path)) => {
                let file = CircuitFile::read(path).map_err(|e| match e {
                    FileError::Io(io) => CliError::Other(format!("{}: {io}", path.display())),
                    other => {
                        let mapped: CliError = other.into();
                        match mapped {
                            CliError::Validation(m) => validation(format!("{}: {m}", path.display())),
                            x => x,
                        }
                    }
                })?;
                let circuit = file.to_circuit()?;
                let inputs = file.input_spec()?;
                inputs.check_ports(&circuit)?;
                (circuit, inputs)
            }
            (None, None) => return Err(validation("one of --preset or --circuit is required")),
        };
        Ok(Setup { circuit, inputs })
    }
}

impl Setup {
    /// Applies `--overlap` or `--identical` to the first two single photons.
    pub fn with_pair(mut self, pair: &PairArgs) -> Result<Setup, CliError> {
        let overlap = match (&pair.overlap, pair.identical) {
            (Some(s), _) => parse_complex(s)?,
            (None, true) => Amp::ONE,
            (None, false) => return Ok(self),
        };
        let ports: Vec<String> = self.inputs.single_photons().iter().map(|(p, _)| p.to_string()).collect();
        let [first, second, ..] = ports.as_slice() else {
            return Err(validation("--overlap and --identical need two single-photon sources"));
        };
        let mut inputs = InputSpec::new();
        for (port, state) in self.inputs.ports() {
            let state = if port == first {
                InputState::SinglePhoton(InternalState::h())
            } else if port == second {
                InputState::SinglePhoton(make_diagonal(overlap)?)
            } else {
                state.clone()
            };
            inputs.insert(port.clone(), state)?;
        }
        self.inputs = inputs;
        Ok(self)
    }

    fn first_two_ports(&self) -> Result<(String, String), CliError> {
        let ports: Vec<String> = self.inputs.single_photons().iter().map(|(p, _)| p.to_string()).collect();
        match ports.as_slice() {
            [a, b, ..] => Ok((a.clone(), b.clone())),
            _ => Err(validation("this command needs two single-photon sources")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub circuit: String,
    pub engine: EngineChoice,
    pub inputs: Vec<SourceSpec>,
    /// Largest entrywise difference between the engines when both ran.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    pub total: Amp,
    pub table: OutcomeTable,
}

/// Distribution from the chosen engine; `Both` checks agreement first.
pub fn distribution(setup: &Setup, engine: EngineChoice) -> Result<(OutcomeTable, Option<f64>), CliError> {
    match engine {
        EngineChoice::Path => Ok((path_engine::full_distribution(&setup.circuit, &setup.inputs)?, None)),
        EngineChoice::Fock => Ok((fock::fock_distribution(&setup.circuit, &setup.inputs)?, None)),
        EngineChoice::Both => {
            let a = path_engine::full_distribution(&setup.circuit, &setup.inputs)?;
            let b = fock::fock_distribution(&setup.circuit, &setup.inputs)?;
            let max = a.max_discrepancy(&b);
            if max.is_nan() || max > AGREEMENT_TOLERANCE {
                return Err(CliError::Disagreement { max });
            }
            Ok((a, Some(max)))
        }
    }
}

pub fn simulate(setup: &Setup, engine: EngineChoice) -> Result<SimulateReport, CliError> {
    let (table, discrepancy) = distribution(setup, engine)?;
    Ok(SimulateReport {
        circuit: setup.circuit.name.clone(),
        engine,
        inputs: setup.inputs.to_specs(),
        discrepancy,
        total: table.total()?,
        table,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct OptimizeReport {
    pub R0: f64,
    pub Rc: f64,
    pub Rm: f64,
    pub Rf: f64,
    pub p23: f64,
    /// `17 - 12 sqrt2`.
    pub closed_form: f64,
    /// Ratio to the all-50:50 value `1/64`.
    pub gain_over_balanced: f64,
    pub grid_best_R0: f64,
    pub grid_best_Rm: f64,
}

pub fn optimize() -> OptimizeReport {
    let best = design::maximize_p23();
    let [r0, rc, rm, rf] = best.params.values();
    OptimizeReport {
        R0: r0,
        Rc: rc,
        Rm: rm,
        Rf: rf,
        p23: best.value,
        closed_form: 17.0 - 12.0 * 2f64.sqrt(),
        gain_over_balanced: best.value * 64.0,
        grid_best_R0: best.grid_best.0,
        grid_best_Rm: best.grid_best.1,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub overlap: [f64; 2],
    /// Label-free outcome probabilities.
    pub probabilities: BTreeMap<Outcome, f64>,
}

pub fn curve(setup: &Setup, grid: &[f64]) -> Result<Vec<CurveRow>, CliError> {
    let (first, second) = setup.first_two_ports()?;
    let overlaps: Vec<Amp> = grid.iter().map(|&c| Amp::real(c)).collect();
    let points = path_engine::partial_distinguishability_curve(&setup.circuit, &first, &second, &overlaps)?;
    points
        .into_iter()
        .map(|pt| {
            let coarse = pt.table.coarse()?;
            let c = pt.overlap.to_complex();
            Ok(CurveRow { overlap: [c.re, c.im], probabilities: coarse.iter().map(|(o, p)| (o.clone(), p.value())).collect() })
        })
        .collect()
}

fn parse_alpha(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| validation(format!("--alpha: expected RE,IM, got `{s}`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(validation(format!("--alpha: expected RE,IM, got `{s}`"))),
    }
}

pub fn coherent(setup: &Setup, alpha: Complex64, beta: Complex64, n_max: u8) -> Result<CoherentReport, CliError> {
    let ports: Vec<&String> = setup.inputs.ports().iter().map(|(p, _)| p).collect();
    let [a, b, ..] = ports.as_slice() else {
        return Err(validation("the coherent report needs two source ports"));
    };
    Ok(fock::coherent_pair(&setup.circuit, a, alpha, b, beta, n_max)?)
}

/// Exact rational or `p + q*sqrt2` form for real exact values, decimal otherwise.
pub fn prob_text(p: &Amp) -> String {
    match p {
        Amp::Exact(e) if e.is_real() => e.re_field().to_string(),
        other => {
            let c = other.to_complex();
            if c.im == 0.0 {
                format!("{}", c.re)
            } else {
                format!("{}{:+}i", c.re, c.im)
            }
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

#[derive(Serialize)]
struct TableRow<'a> {
    outcome: String,
    probability: f64,
    exact: &'a str,
}

fn render_simulate(r: &SimulateReport, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Csv => {
            let texts: Vec<(String, f64, String)> =
                r.table.iter().map(|(o, p)| (o.to_string(), p.value(), if p.is_exact() { prob_text(p) } else { String::new() })).collect();
            let rows: Vec<TableRow> = texts.iter().map(|(o, p, e)| TableRow { outcome: o.clone(), probability: *p, exact: e }).collect();
            to_csv(&rows)
        }
        Format::Text => {
            let mut s = format!("circuit {} ({} engine)\n", r.circuit, engine_name(r.engine));
            let width = r.table.iter().map(|(o, _)| o.to_string().len()).max().unwrap_or(0).max(7);
            for (o, p) in r.table.iter() {
                let _ = writeln!(s, "{:width$}  {:<22} {:.12}", o.to_string(), prob_text(p), p.value());
            }
            let _ = writeln!(s, "{:width$}  {:<22} {:.12}", "total", prob_text(&r.total), r.total.value());
            if let Some(d) = r.discrepancy {
                let _ = writeln!(s, "max engine discrepancy {d:.3e}");
            }
            s
        }
    }
}

fn engine_name(e: EngineChoice) -> &'static str {
    match e {
        EngineChoice::Path => "path",
        EngineChoice::Fock => "fock",
        EngineChoice::Both => "path+fock",
    }
}

fn render_study(r: &StudyReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = r.to_json();
            s.push('\n');
            s
        }
        Format::Csv => r.to_csv(),
        Format::Text => {
            let mut s = format!("N = {}, seed = {}, confidence = {}\n", r.trials, r.seed, r.confidence);
            let _ = writeln!(s, "{:10} {:>10} {:>7} {:>9} {:>19}  in", "outcome", "true", "count", "p_hat", "interval");
            for row in &r.rows {
                let _ = writeln!(
                    s,
                    "{:10} {:>10.6} {:>7} {:>9.4} [{:.4}, {:.4}]  {}",
                    row.outcome,
                    row.p_true,
                    row.count,
                    row.p_hat,
                    row.cp_lo,
                    row.cp_hi,
                    if row.contains { "yes" } else { "NO" }
                );
            }
            let _ = writeln!(s, "coverage {:.3}", r.coverage());
            s
        }
    }
}

fn render_paths(l: &PathListing, format: Format) -> String {
    match format {
        Format::Json => to_json(l),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                terminal: String,
                reflections: usize,
                route: String,
                amplitude: String,
            }
            let rows: Vec<Row> = l
                .paths
                .iter()
                .map(|p| Row {
                    terminal: p.terminal.clone(),
                    reflections: p.reflections,
                    route: p.steps.iter().map(|s| format!("{}:{:?}", s.element, s.action)).collect::<Vec<_>>().join(" "),
                    amplitude: p.amp_text.clone(),
                })
                .collect();
            to_csv(&rows)
        }
        Format::Text => {
            let mut s = format!("{} paths from {} ({})\n", l.paths.len(), l.source, l.label);
            for p in &l.paths {
                let route: Vec<String> = p.steps.iter().map(|s| format!("{}:{:?}", s.element, s.action)).collect();
                let _ = writeln!(s, "-> {:8} i^{}  {:40}  {}", p.terminal, p.reflections, p.amp_text, route.join(" "));
            }
            for (t, a) in &l.totals {
                let _ = writeln!(s, "total {t}: {a}");
            }
            s
        }
    }
}

fn render_scan(rows: &[ScanRow], format: Format) -> String {
    match format {
        Format::Json => to_json(&rows),
        Format::Csv | Format::Text => design::scan_csv(rows),
    }
}

fn render_optimize(r: &OptimizeReport, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Csv => to_csv(std::slice::from_ref(r)),
        Format::Text => format!(
            "max P23 = {:.12} (17-12*sqrt2 = {:.12}), {:.3}x the all-50:50 value\nR0 = {:.8}  Rc = {}  Rm = {}  Rf = {:.8}\n",
            r.p23, r.closed_form, r.gain_over_balanced, r.R0, r.Rc, r.Rm, r.Rf
        ),
    }
}

fn render_curve(rows: &[CurveRow], format: Format) -> String {
    match format {
        Format::Json => to_json(&rows),
        Format::Csv | Format::Text => {
            let outcomes: Vec<&Outcome> = rows.first().map(|r| r.probabilities.keys().collect()).unwrap_or_default();
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["overlap_re".to_string(), "overlap_im".to_string()];
            header.extend(outcomes.iter().map(|o| o.to_string()));
            w.write_record(&header).expect("in-memory csv");
            for r in rows {
                let mut rec = vec![r.overlap[0].to_string(), r.overlap[1].to_string()];
                rec.extend(outcomes.iter().map(|o| r.probabilities.get(*o).copied().unwrap_or(0.0).to_string()));
                w.write_record(&rec).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
        }
    }
}

fn render_coherent(r: &CoherentReport, format: Format) -> String {
    match format {
        Format::Json => to_json(r),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row<'a> {
                quantity: &'a str,
                truncated: f64,
                poisson: f64,
            }
            let (c, p) = (&r.channels, &r.poisson);
            let mut rows = vec![
                Row { quantity: "P00", truncated: c.p00, poisson: p.p00 },
                Row { quantity: "P11", truncated: c.p11, poisson: p.p11 },
                Row { quantity: "P20", truncated: c.p20, poisson: p.p20 },
                Row { quantity: "P02", truncated: c.p02, poisson: p.p02 },
            ];
            rows.push(Row { quantity: "two_photon", truncated: r.two_photon_probability, poisson: f64::NAN });
            to_csv(&rows)
        }
        Format::Text => {
            let (c, p) = (&r.channels, &r.poisson);
            let mut s = String::from("channel  truncated        poisson\n");
            for (n, a, b) in [("P00", c.p00, p.p00), ("P11", c.p11, p.p11), ("P20", c.p20, p.p20), ("P02", c.p02, p.p02)] {
                let _ = writeln!(s, "{n:8} {:.6e}  {:.6e}", a, b);
            }
            let _ = writeln!(s, "two photons detected: {:.6e}", r.two_photon_probability);
            let _ = writeln!(s, "conditional on two photons:");
            if let Ok(t) = r.conditional.coarse() {
                for (o, q) in t.iter() {
                    let _ = writeln!(s, "  {:10} {:.10}", o.to_string(), q.value());
                }
            }
            s
        }
    }
}

/// Runs one parsed command and returns its rendered output.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let f = cli.format;
    Ok(match &cli.command {
        Command::Simulate { circuit, pair, engine } => {
            let setup = circuit.load()?.with_pair(pair)?;
            render_simulate(&simulate(&setup, *engine)?, f)
        }
        Command::Sample { circuit, pair, engine, trials, seed, confidence } => {
            let setup = circuit.load()?.with_pair(pair)?;
            let (table, _) = distribution(&setup, *engine)?;
            render_study(&StudyReport::run(&table, *trials, *seed, *confidence)?, f)
        }
        Command::Paths { circuit, source, label } => {
            let setup = circuit.load()?;
            let source = match source {
                Some(s) => s.clone(),
                None => setup.circuit.inputs.first().cloned().ok_or_else(|| validation("circuit has no inputs"))?,
            };
            render_paths(&PathListing::new(&setup.circuit, &source, label)?, f)
        }
        Command::Scan { params, param, grid } => {
            let rows = design::scan(&params.hardy_params()?, *param, &parse_grid(grid)?)?;
            render_scan(&rows, f)
        }
        Command::Optimize => render_optimize(&optimize(), f),
        Command::Curve { circuit, grid } => {
            let grid = parse_grid(grid)?;
            if grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(validation("--grid: overlaps must lie in [0, 1]"));
            }
            render_curve(&curve(&circuit.load()?, &grid)?, f)
        }
        Command::Coherent { circuit, alpha, beta, n_max } => {
            let a = parse_alpha(alpha)?;
            let b = beta.as_deref().map(parse_alpha).transpose()?.unwrap_or(a);
            render_coherent(&coherent(&circuit.load()?, a, b, *n_max)?, f)
        }
    })
}

/// Parses `args`, runs, writes the output, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Other(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
