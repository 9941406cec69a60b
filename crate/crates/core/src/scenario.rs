//! Scenario files, per-coupling runs and the artifacts they emit.
//!
//! ```toml
//! [scenario]
//! name = "case_a"
//! omega = 1.0
//! chi1 = 2.0                 # or "bessel_zero(0,1)"
//! chi2 = 0.0
//! epsilons = [0.01, 0.10, 0.40]
//! t_end = "1.0 TOmega"       # "450 Tomega", or plain time
//! samples = 2001
//!
//! [oracle]
//! enabled = true
//! window_cap = 1e4           # drive periods
//!
//! [output]
//! files = ["P", "N", "U", "omega_summary"]
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{find_bessel_zero, DEFAULT_M_MAX};
use crate::interaction::{classify, InteractionSpec};
use crate::mat2::Mat2;
use crate::oracle::{integrate_schrodinger, IntegratorConfig};
use crate::pipeline::Prepared;
use crate::propagator::{bloch_vector, transition_probability_of, unitarity_deviation_of};

pub const DEFAULT_SAMPLES: usize = 2001;
/// Oracle runs are refused beyond this many drive periods.
pub const DEFAULT_WINDOW_CAP: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeSpan {
    Absolute(f64),
    /// multiples of `T_omega = 2 pi / omega`
    DrivePeriods(f64),
    /// multiples of `T_Omega = 2 pi / Omega`, resolved per coupling
    SecularPeriods(f64),
}

impl TimeSpan {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (num, unit) = match text.split_once(char::is_whitespace) {
            Some((n, u)) => (n, u.trim()),
            None => (text, ""),
        };
        let value: f64 = num
            .parse()
            .map_err(|_| Error::Config(format!("t_end: cannot read a number from {text:?}")))?;
        let span = match unit {
            "" => TimeSpan::Absolute(value),
            "Tomega" | "T_omega" => TimeSpan::DrivePeriods(value),
            "TOmega" | "T_Omega" => TimeSpan::SecularPeriods(value),
            other => return Err(Error::Config(format!("t_end: unknown unit {other:?}"))),
        };
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Config(format!("t_end must be positive, got {text:?}")));
        }
        Ok(span)
    }

    pub fn resolve(&self, drive_period: f64, secular_period: f64) -> Result<f64> {
        let t = match *self {
            TimeSpan::Absolute(t) => t,
            TimeSpan::DrivePeriods(k) => k * drive_period,
            TimeSpan::SecularPeriods(k) => k * secular_period,
        };
        if !t.is_finite() {
            return Err(Error::Config("t_end in secular periods needs a nonzero Omega".into()));
        }
        Ok(t)
    }
}

/// `"bessel_zero(n,k)"`: the k-th positive zero of `J_n`.
pub fn parse_chi1(text: &str) -> Result<f64> {
    let bad = || Error::Config(format!("chi1: expected a number or bessel_zero(n,k), got {text:?}"));
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let inner = t
        .strip_prefix("bessel_zero(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(bad)?;
    let (n, k) = inner.split_once(',').ok_or_else(bad)?;
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let k: usize = k.trim().parse().map_err(|_| bad())?;
    if k == 0 {
        return Err(bad());
    }
    find_bessel_zero(n, k).map_err(|e| Error::Config(format!("chi1: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub p: bool,
    pub n: bool,
    pub u: bool,
    pub bloch: bool,
    pub omega_summary: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            p: true,
            n: true,
            u: true,
            bloch: false,
            omega_summary: true,
        }
    }
}

impl Outputs {
    fn parse(names: &[String]) -> Result<Self> {
        let mut out = Self {
            p: false,
            n: false,
            u: false,
            bloch: false,
            omega_summary: false,
        };
        for name in names {
            match name.as_str() {
                "P" => out.p = true,
                "N" => out.n = true,
                "U" => out.u = true,
                "bloch" => out.bloch = true,
                "omega_summary" => out.omega_summary = true,
                other => return Err(Error::Config(format!("unknown output {other:?}"))),
            }
        }
        Ok(out)
    }

    fn time_series(&self) -> bool {
        self.p || self.n || self.u || self.bloch
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub omega: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub epsilons: Vec<f64>,
    pub order: Option<usize>,
    pub mode_cutoff: usize,
    pub allow_deep: bool,
    pub t_end: TimeSpan,
    pub samples: usize,
    pub oracle: bool,
    pub window_cap: f64,
    pub outputs: Outputs,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    scenario: RawScenario,
    #[serde(default)]
    oracle: RawOracle,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    omega: f64,
    chi1: NumOrText,
    #[serde(default)]
    chi2: f64,
    epsilons: Vec<f64>,
    order: Option<usize>,
    mode_cutoff: Option<usize>,
    #[serde(default)]
    allow_deep: bool,
    t_end: NumOrText,
    samples: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    enabled: Option<bool>,
    window_cap: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    files: Vec<String>,
}

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub order: Option<usize>,
    pub modes: Option<usize>,
    pub oracle: Option<bool>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let s = raw.scenario;
        let chi1 = match s.chi1 {
            NumOrText::Num(v) => v,
            NumOrText::Text(t) => parse_chi1(&t)?,
        };
        let t_end = match s.t_end {
            NumOrText::Num(v) => TimeSpan::parse(&v.to_string())?,
            NumOrText::Text(t) => TimeSpan::parse(&t)?,
        };
        let outputs = match raw.output {
            Some(o) => Outputs::parse(&o.files)?,
            None => Outputs::default(),
        };
        let cfg = Self {
            name: s.name.unwrap_or_else(|| "scenario".into()),
            omega: s.omega,
            chi1,
            chi2: s.chi2,
            epsilons: s.epsilons,
            order: s.order,
            mode_cutoff: s.mode_cutoff.unwrap_or(DEFAULT_M_MAX),
            allow_deep: s.allow_deep,
            t_end,
            samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
            oracle: raw.oracle.enabled.unwrap_or(true),
            window_cap: raw.oracle.window_cap.unwrap_or(DEFAULT_WINDOW_CAP),
            outputs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn with_overrides(mut self, o: &Overrides) -> Result<Self> {
        if o.order.is_some() {
            self.order = o.order;
        }
        if let Some(m) = o.modes {
            self.mode_cutoff = m;
        }
        if let Some(on) = o.oracle {
            self.oracle = on;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if self.epsilons.is_empty() {
            return fail("epsilons must not be empty");
        }
        if self.epsilons.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return fail("epsilons must be finite and non-negative");
        }
        if self.samples < 2 {
            return fail("samples must be at least 2");
        }
        if !(self.chi1.is_finite() && self.chi1 >= 0.0) {
            return fail("chi1 must be non-negative");
        }
        if !self.chi2.is_finite() {
            return fail("chi2 must be finite");
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return fail("omega must be positive");
        }
        if self.mode_cutoff == 0 {
            return fail("mode_cutoff must be positive");
        }
        if self.order == Some(0) {
            return fail("order must be positive");
        }
        if !(self.window_cap > 0.0) {
            return fail("window_cap must be positive");
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return fail("name must be a plain file stem");
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<InteractionSpec> {
        InteractionSpec::monochromatic(self.omega, self.chi1, self.chi2)
    }

    pub fn prepare(&self) -> Result<Prepared> {
        Prepared::new(&self.spec()?, self.mode_cutoff, self.order, self.allow_deep)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyReport {
    pub condition: String,
    pub f0_is_zero: bool,
    pub chi1: f64,
    pub chi2: f64,
    pub mean_q0: [f64; 2],
    pub mean_q1: [f64; 2],
    pub mean_q3: [f64; 2],
}

pub fn classify_report(cfg: &ScenarioConfig) -> Result<ClassifyReport> {
    let c = classify(&cfg.spec()?, cfg.mode_cutoff)?;
    Ok(ClassifyReport {
        condition: c.tag.to_string(),
        f0_is_zero: c.f0_is_zero,
        chi1: cfg.chi1,
        chi2: cfg.chi2,
        mean_q0: [c.mean_q0.re, c.mean_q0.im],
        mean_q1: [c.mean_q1.re, c.mean_q1.im],
        mean_q3: [c.mean_q3.re, c.mean_q3.im],
    })
}

/// One summary line. Failed couplings carry only `status` and `error`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SummaryRow {
    pub epsilon: f64,
    pub condition: String,
    pub omega_rabi: Option<f64>,
    pub t_omega_over_t_drive: Option<f64>,
    pub max_abs_n: Option<f64>,
    pub oracle: String,
    pub oracle_max_u_dev: Option<f64>,
    pub oracle_max_p_dev: Option<f64>,
    pub series_file: Option<String>,
    pub status: String,
    pub error: Option<String>,
}

impl SummaryRow {
    fn failed(epsilon: f64, condition: &str, e: &Error) -> Self {
        Self {
            epsilon,
            condition: condition.into(),
            omega_rabi: None,
            t_omega_over_t_drive: None,
            max_abs_n: None,
            oracle: "none".into(),
            oracle_max_u_dev: None,
            oracle_max_p_dev: None,
            series_file: None,
            status: e.kind().into(),
            error: Some(e.to_string()),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn series_file_name(name: &str, index: usize, epsilon: f64) -> String {
    format!("{name}_{index:02}_eps{epsilon}.csv")
}

/// Evaluates one coupling and writes its time series into `out_dir`.
pub fn run_epsilon(cfg: &ScenarioConfig, prep: &Prepared, index: usize, epsilon: f64, out_dir: &Path) -> Result<SummaryRow> {
    let (g, model) = prep.model_at(epsilon)?;
    let drive_period = prep.spec.period();
    let secular = g.secular_period();
    let t_end = cfg.t_end.resolve(drive_period, secular)?;
    let n = cfg.samples;
    let ts: Vec<f64> = (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect();
    let us = model.evaluate_many(&ts);

    let (oracle_state, oracle_u) = if !cfg.oracle {
        ("off", None)
    } else if t_end > cfg.window_cap * drive_period {
        ("skipped-window", None)
    } else {
        let traj = integrate_schrodinger(&prep.spec, epsilon, &ts, &IntegratorConfig::default())?;
        ("on", Some(traj.u))
    };

    let max_abs_n = us.iter().map(|u| unitarity_deviation_of(u).abs()).fold(0.0, f64::max);
    let (mut max_u_dev, mut max_p_dev) = (0.0f64, 0.0f64);
    if let Some(ou) = &oracle_u {
        for (a, b) in us.iter().zip(ou) {
            max_u_dev = max_u_dev.max(a.max_abs_diff(b));
            max_p_dev = max_p_dev.max((transition_probability_of(a) - transition_probability_of(b)).abs());
        }
    }

    let mut series_file = None;
    if cfg.outputs.time_series() {
        let file = series_file_name(&cfg.name, index, epsilon);
        let body = time_series_csv(&cfg.outputs, &ts, secular, &us, oracle_u.as_deref())?;
        fs::write(out_dir.join(&file), body)?;
        series_file = Some(file);
    }

    Ok(SummaryRow {
        epsilon,
        condition: prep.class.tag.to_string(),
        omega_rabi: Some(g.omega_rabi),
        t_omega_over_t_drive: Some(secular / drive_period),
        max_abs_n: Some(max_abs_n),
        oracle: oracle_state.into(),
        oracle_max_u_dev: oracle_u.as_ref().map(|_| max_u_dev),
        oracle_max_p_dev: oracle_u.as_ref().map(|_| max_p_dev),
        series_file,
        status: "ok".into(),
        error: None,
    })
}

fn time_series_csv(out: &Outputs, ts: &[f64], secular: f64, us: &[Mat2], oracle: Option<&[Mat2]>) -> Result<String> {
    let mut cols = vec!["t", "t_over_Tomega"];
    if out.p {
        cols.push("P");
    }
    if out.n {
        cols.push("N");
    }
    if out.u {
        cols.extend(["reU11", "imU11", "reU12", "imU12"]);
    }
    if out.bloch {
        cols.extend(["bloch_x", "bloch_y", "bloch_z"]);
    }
    if oracle.is_some() {
        cols.extend(["oracle_P", "oracle_dev"]);
    }
    let mut s = cols.join(",");
    s.push('\n');
    for (k, (&t, u)) in ts.iter().zip(us).enumerate() {
        let mut row = vec![num(t), num(t / secular)];
        if out.p {
            row.push(num(transition_probability_of(u)));
        }
        if out.n {
            row.push(num(unitarity_deviation_of(u)));
        }
        if out.u {
            let (a, b) = (u.get(0, 0), u.get(0, 1));
            row.extend([num(a.re), num(a.im), num(b.re), num(b.im)]);
        }
        if out.bloch {
            // state reached from |Phi_+>, renormalized so truncation drift stays in N
            let (a, c) = (u.get(0, 0), u.get(1, 0));
            let norm = (a.norm_sqr() + c.norm_sqr()).sqrt();
            let b = bloch_vector([a / norm, c / norm])?;
            row.extend(b.map(num));
        }
        if let Some(o) = oracle {
            row.push(num(transition_probability_of(&o[k])));
            row.push(num(u.max_abs_diff(&o[k])));
        }
        let _ = writeln!(s, "{}", row.join(","));
    }
    Ok(s)
}

pub fn summary_csv(name: &str, rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "name,epsilon,condition,Omega,T_Omega_over_T_omega,max_abs_N,oracle,oracle_max_U_dev,oracle_max_P_dev,series_file,status,error\n",
    );
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace('"', "'");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},\"{}\"",
            name,
            num(r.epsilon),
            r.condition,
            opt(r.omega_rabi),
            opt(r.t_omega_over_t_drive),
            opt(r.max_abs_n),
            r.oracle,
            opt(r.oracle_max_u_dev),
            opt(r.oracle_max_p_dev),
            r.series_file.as_deref().unwrap_or(""),
            r.status,
            err
        );
    }
    s
}

pub fn summary_path(cfg: &ScenarioConfig, out_dir: &Path) -> PathBuf {
    out_dir.join(format!("{}_summary.csv", cfg.name))
}

fn write_summary(cfg: &ScenarioConfig, out_dir: &Path, rows: &[SummaryRow]) -> Result<()> {
    if cfg.outputs.omega_summary {
        let mut f = fs::File::create(summary_path(cfg, out_dir))?;
        f.write_all(summary_csv(&cfg.name, rows).as_bytes())?;
    }
    Ok(())
}

/// Couplings in order; stops at the first failure, after writing the summary
/// of what ran.
pub fn run(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(out_dir)?;
    let prep = cfg.prepare()?;
    let mut rows = Vec::new();
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        match run_epsilon(cfg, &prep, i, eps, out_dir) {
            Ok(row) => rows.push(row),
            Err(e) => {
                rows.push(SummaryRow::failed(eps, &prep.class.tag.to_string(), &e));
                write_summary(cfg, out_dir, &rows)?;
                return Err(e);
            }
        }
    }
    write_summary(cfg, out_dir, &rows)?;
    Ok(rows)
}

/// All couplings concurrently; per-coupling failures are recorded in their
/// rows and do not stop the others.
pub fn sweep(cfg: &ScenarioConfig, out_dir: &Path) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(out_dir)?;
    let prep = cfg.prepare()?;
    let tag = prep.class.tag.to_string();
    let indexed: Vec<(usize, f64)> = cfg.epsilons.iter().copied().enumerate().collect();
    let rows = crate::parallel::map(&indexed, |&(i, eps)| {
        run_epsilon(cfg, &prep, i, eps, out_dir).unwrap_or_else(|e| SummaryRow::failed(eps, &tag, &e))
    });
    write_summary(cfg, out_dir, &rows)?;
    Ok(rows)
}
