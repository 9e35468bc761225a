//! Parameter-sweep front end: turn a parsed [`SweepSpec`] into one result row
//! per (grid point, method), deterministically, and write CSV plus
//! plot-ready per-curve files.
//!
//! Rows are totally ordered by (f, w, n, receiver, s, s2, plan, method) and
//! the Monte Carlo seed of each point derives from (master seed, point
//! index), so a sweep's output bytes are a pure function of (config text,
//! master seed) no matter how many threads evaluate it. Per-point failures
//! (method guards, invalid configs) become rows with an `error` column; they
//! never abort the sweep.

mod config;

pub use config::{parse_config, ParseError};

use crate::analytic::{
    ber_ccr_multi_interferer, ber_ccr_no_wdm, ber_pic_closed_form, BerFlags, CcrConfig, EvalMode,
    InterferenceProfile, PicConfig,
};
use crate::mcsim::{
    enumerate_ccr_exact, enumerate_pic_exact, simulate_ccr, simulate_pic, ChannelModel, LinkModel,
    SimMode,
};
use crate::numeric::{ratio_ln, ratio_to_f64, Alpha};
use crate::ooc::{generate_family, CodeFamily, OocError};
use rayon::prelude::*;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("could not read code family `{path}`: {source}")]
    CodeFileIo {
        path: String,
        source: std::io::Error,
    },
    #[error("bad code family `{path}`: {source}")]
    CodeFileParse { path: String, source: OocError },
    #[error("could not build a code family: {0}")]
    CodeGeneration(OocError),
    #[error("unknown plot grouping key `{0}`")]
    UnknownGroupKey(String),
    #[error("no plottable rows")]
    NoRows,
    #[error("strict analytic curve `{0}` is not monotone in N; refusing to emit")]
    MonotoneGuard(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Analytic,
    Mc,
    Exact,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Mc => "mc",
            Method::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReceiverKind {
    Ccr,
    Pic,
}

impl ReceiverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReceiverKind::Ccr => "ccr",
            ReceiverKind::Pic => "pic",
        }
    }
}

/// Where the code family comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    Params { length: u32, weight: u32 },
    File { path: String },
}

/// One interference plan: the resolved channel coefficients plus a note on
/// how spectral entries were derived (so the declared overlap model is
/// always visible in outputs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plan {
    alphas: Vec<Alpha>,
    label: String,
    alpha_model: String,
}

impl Plan {
    pub fn no_wdm() -> Self {
        Plan {
            alphas: Vec::new(),
            label: "none".to_string(),
            alpha_model: String::new(),
        }
    }

    pub fn new(alphas: Vec<Alpha>, alpha_model: String) -> Self {
        let label = if alphas.is_empty() {
            "none".to_string()
        } else {
            alphas
                .iter()
                .map(|a| a.to_string())
                .collect::<Vec<_>>()
                .join("+")
        };
        Plan {
            alphas,
            label,
            alpha_model,
        }
    }

    pub fn alphas(&self) -> &[Alpha] {
        &self.alphas
    }

    /// Canonical label: `none` or reduced fractions joined by `+`.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alpha_model(&self) -> &str {
        &self.alpha_model
    }
}

/// A fully validated sweep description (see [`parse_config`] for the file
/// format).
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub code: CodeSpec,
    pub receiver: ReceiverKind,
    /// S for CCR, S1 for PIC.
    pub thresholds: Vec<u32>,
    /// S2 list; empty for CCR.
    pub thresholds2: Vec<u32>,
    pub users: Vec<u32>,
    pub methods: Vec<Method>,
    pub mode: EvalMode,
    pub sim: SimMode,
    pub trials: Option<u64>,
    pub seed: u64,
    pub plans: Vec<Plan>,
    pub output_prefix: String,
}

impl SweepSpec {
    /// Deterministic canonical rendering; its FNV-1a digest is the config
    /// hash every row carries.
    pub fn canonical_string(&self) -> String {
        let mut out = String::new();
        match &self.code {
            CodeSpec::Params { length, weight } => {
                out.push_str(&format!("code length={length} weight={weight}\n"));
            }
            CodeSpec::File { path } => out.push_str(&format!("code file={path}\n")),
        }
        out.push_str(&format!(
            "receiver kind={} s={} s2={}\n",
            self.receiver.as_str(),
            join(&self.thresholds),
            join(&self.thresholds2),
        ));
        out.push_str(&format!(
            "sweep users={} methods={} mode={} sim={} trials={} seed={}\n",
            join(&self.users),
            self.methods
                .iter()
                .map(|m| m.as_str().to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.mode.as_str(),
            match self.sim {
                SimMode::Model => "model",
                SimMode::Code => "code",
            },
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.seed,
        ));
        for plan in &self.plans {
            out.push_str(&format!("plan {} {}\n", plan.label(), plan.alpha_model()));
        }
        out.push_str(&format!("output prefix={}\n", self.output_prefix));
        out
    }

    pub fn config_hash(&self) -> String {
        format!("{:016x}", fnv1a64(self.canonical_string().as_bytes()))
    }
}

fn join(values: &[u32]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Derives the per-point simulation seed from the master seed and the
/// point's position in the canonical grid order (splitmix-style mixer).
pub fn point_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// CSV column order; fixed, documented, and relied on by the round-trip
/// contract.
pub const COLUMNS: [&str; 20] = [
    "f",
    "w",
    "n",
    "receiver",
    "s",
    "s2",
    "plan",
    "alpha_model",
    "network_users",
    "method",
    "pe",
    "log10_pe",
    "ci95_low",
    "ci95_high",
    "trials",
    "seed",
    "mode",
    "flags",
    "config_hash",
    "error",
];

/// One (grid point, method) result.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub f: u32,
    pub w: u32,
    pub n: u32,
    pub receiver: ReceiverKind,
    pub s: u32,
    pub s2: Option<u32>,
    pub plan: String,
    pub alpha_model: String,
    /// Total active users across all wavelengths: (channels + 1) * N.
    pub network_users: u32,
    pub method: Method,
    pub pe: Option<f64>,
    pub log10_pe: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub mode: EvalMode,
    pub flags: String,
    pub config_hash: String,
    pub error: Option<String>,
}

fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_sig17(x: Option<f64>) -> String {
    x.map(sig17).unwrap_or_default()
}

impl ResultRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            self.f.to_string(),
            self.w.to_string(),
            self.n.to_string(),
            self.receiver.as_str().to_string(),
            self.s.to_string(),
            self.s2.map(|v| v.to_string()).unwrap_or_default(),
            self.plan.clone(),
            self.alpha_model.clone(),
            self.network_users.to_string(),
            self.method.as_str().to_string(),
            opt_sig17(self.pe),
            opt_sig17(self.log10_pe),
            opt_sig17(self.ci95_low),
            opt_sig17(self.ci95_high),
            self.trials.map(|v| v.to_string()).unwrap_or_default(),
            self.seed.map(|v| v.to_string()).unwrap_or_default(),
            self.mode.as_str().to_string(),
            self.flags.clone(),
            self.config_hash.clone(),
            self.error.clone().unwrap_or_default(),
        ]
    }

    pub fn from_record(record: &[String]) -> Result<Self, String> {
        if record.len() != COLUMNS.len() {
            return Err(format!(
                "expected {} fields, got {}",
                COLUMNS.len(),
                record.len()
            ));
        }
        let int = |i: usize| -> Result<u32, String> {
            record[i]
                .parse()
                .map_err(|e| format!("{}: {e}", COLUMNS[i]))
        };
        let opt_f64 = |i: usize| -> Result<Option<f64>, String> {
            if record[i].is_empty() {
                Ok(None)
            } else {
                record[i]
                    .parse()
                    .map(Some)
                    .map_err(|e| format!("{}: {e}", COLUMNS[i]))
            }
        };
        Ok(ResultRow {
            f: int(0)?,
            w: int(1)?,
            n: int(2)?,
            receiver: match record[3].as_str() {
                "ccr" => ReceiverKind::Ccr,
                "pic" => ReceiverKind::Pic,
                other => return Err(format!("receiver: `{other}`")),
            },
            s: int(4)?,
            s2: if record[5].is_empty() {
                None
            } else {
                Some(int(5)?)
            },
            plan: record[6].clone(),
            alpha_model: record[7].clone(),
            network_users: int(8)?,
            method: match record[9].as_str() {
                "analytic" => Method::Analytic,
                "mc" => Method::Mc,
                "exact" => Method::Exact,
                other => return Err(format!("method: `{other}`")),
            },
            pe: opt_f64(10)?,
            log10_pe: opt_f64(11)?,
            ci95_low: opt_f64(12)?,
            ci95_high: opt_f64(13)?,
            trials: if record[14].is_empty() {
                None
            } else {
                Some(record[14].parse().map_err(|e| format!("trials: {e}"))?)
            },
            seed: if record[15].is_empty() {
                None
            } else {
                Some(record[15].parse().map_err(|e| format!("seed: {e}"))?)
            },
            mode: match record[16].as_str() {
                "strict" => EvalMode::Strict,
                "permissive" => EvalMode::Permissive,
                other => return Err(format!("mode: `{other}`")),
            },
            flags: record[17].clone(),
            config_hash: record[18].clone(),
            error: if record[19].is_empty() {
                None
            } else {
                Some(record[19].clone())
            },
        })
    }

    fn coordinate(&self, key: &str) -> Option<String> {
        match key {
            "f" => Some(self.f.to_string()),
            "w" => Some(self.w.to_string()),
            "n" => Some(self.n.to_string()),
            "receiver" => Some(self.receiver.as_str().to_string()),
            "s" => Some(self.s.to_string()),
            "s2" => Some(self.s2.map(|v| v.to_string()).unwrap_or_default()),
            "plan" => Some(self.plan.clone()),
            "alpha_model" => Some(self.alpha_model.clone()),
            "network_users" => Some(self.network_users.to_string()),
            "method" => Some(self.method.as_str().to_string()),
            "mode" => Some(self.mode.as_str().to_string()),
            _ => None,
        }
    }
}

fn flags_string(flags: BerFlags) -> String {
    let mut parts = Vec::new();
    if flags.permissive {
        parts.push("permissive");
    }
    if flags.formula_only {
        parts.push("formula_only");
    }
    if flags.out_of_range {
        parts.push("out_of_range");
    }
    parts.join("+")
}

struct GridPoint<'a> {
    n: u32,
    s: u32,
    s2: Option<u32>,
    plan: &'a Plan,
    method: Method,
}

/// Everything a finished sweep knows about itself.
#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub master_seed: u64,
    pub config_hash: String,
    pub canonical_spec: String,
    pub output_prefix: String,
}

/// Evaluates every grid point with every requested method. Deterministic for
/// a fixed (spec, master seed); grid points run in parallel and are reported
/// in the documented total order regardless of completion order.
pub fn run_sweep(spec: &SweepSpec, seed_override: Option<u64>) -> Result<SweepOutput, SweepError> {
    let master_seed = seed_override.unwrap_or(spec.seed);
    let (length, weight, family) = resolve_code(spec)?;
    let hash = spec.config_hash();

    let mut points = Vec::new();
    let s2_list: Vec<Option<u32>> = match spec.receiver {
        ReceiverKind::Ccr => vec![None],
        ReceiverKind::Pic => spec.thresholds2.iter().map(|&v| Some(v)).collect(),
    };
    for &n in &spec.users {
        for &s in &spec.thresholds {
            for s2 in &s2_list {
                for plan in &spec.plans {
                    for &method in &spec.methods {
                        points.push(GridPoint {
                            n,
                            s,
                            s2: *s2,
                            plan,
                            method,
                        });
                    }
                }
            }
        }
    }
    points.sort_by(|a, b| {
        (a.n, a.s, a.s2, a.plan.label(), a.method).cmp(&(b.n, b.s, b.s2, b.plan.label(), b.method))
    });

    let rows: Vec<ResultRow> = points
        .par_iter()
        .enumerate()
        .map(|(index, point)| {
            evaluate_point(
                spec,
                point,
                length,
                weight,
                family.as_ref(),
                &hash,
                point_seed(master_seed, index as u64),
            )
        })
        .collect();

    Ok(SweepOutput {
        rows,
        master_seed,
        config_hash: hash,
        canonical_spec: spec.canonical_string(),
        output_prefix: spec.output_prefix.clone(),
    })
}

fn resolve_code(spec: &SweepSpec) -> Result<(u32, u32, Option<CodeFamily>), SweepError> {
    match &spec.code {
        CodeSpec::Params { length, weight } => {
            let family = if spec.sim == SimMode::Code && spec.methods.contains(&Method::Mc) {
                Some(generate_family(*length, *weight).map_err(SweepError::CodeGeneration)?)
            } else {
                None
            };
            Ok((*length, *weight, family))
        }
        CodeSpec::File { path } => {
            let text = fs::read_to_string(path).map_err(|source| SweepError::CodeFileIo {
                path: path.clone(),
                source,
            })?;
            let family =
                CodeFamily::parse_text(&text).map_err(|source| SweepError::CodeFileParse {
                    path: path.clone(),
                    source,
                })?;
            Ok((family.length(), family.weight(), Some(family)))
        }
    }
}

fn error_row(
    spec: &SweepSpec,
    point: &GridPoint,
    length: u32,
    weight: u32,
    hash: &str,
    message: String,
) -> ResultRow {
    ResultRow {
        f: length,
        w: weight,
        n: point.n,
        receiver: spec.receiver,
        s: point.s,
        s2: point.s2,
        plan: point.plan.label().to_string(),
        alpha_model: point.plan.alpha_model().to_string(),
        network_users: (point.plan.alphas().len() as u32 + 1) * point.n,
        method: point.method,
        pe: None,
        log10_pe: None,
        ci95_low: None,
        ci95_high: None,
        trials: None,
        seed: None,
        mode: spec.mode,
        flags: String::new(),
        config_hash: hash.to_string(),
        error: Some(message),
    }
}

fn evaluate_point(
    spec: &SweepSpec,
    point: &GridPoint,
    length: u32,
    weight: u32,
    family: Option<&CodeFamily>,
    hash: &str,
    seed: u64,
) -> ResultRow {
    let mut row = error_row(spec, point, length, weight, hash, String::new());
    row.error = None;

    let fill_value = |row: &mut ResultRow, value: f64, log_value: f64, flags: BerFlags| {
        row.pe = Some(value);
        row.log10_pe = Some(log_value / std::f64::consts::LN_10);
        row.flags = flags_string(flags);
    };
    let fill_estimate = |row: &mut ResultRow,
                         est: &crate::mcsim::BerEstimate,
                         trials: u64,
                         seed: u64,
                         permissive: bool| {
        row.pe = Some(est.ber());
        row.log10_pe = Some(est.ber().log10());
        let (lo, hi) = est.ci95();
        row.ci95_low = Some(lo);
        row.ci95_high = Some(hi);
        row.trials = Some(trials);
        row.seed = Some(seed);
        row.flags = flags_string(BerFlags {
            permissive,
            ..BerFlags::default()
        });
    };

    match (spec.receiver, point.method) {
        (ReceiverKind::Ccr, Method::Analytic) => {
            let cfg = match CcrConfig::new(length, weight, point.n, point.s, spec.mode) {
                Ok(cfg) => cfg,
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            };
            let profile = InterferenceProfile::new(point.plan.alphas().to_vec());
            let value = if profile.is_empty() {
                ber_ccr_no_wdm(&cfg)
            } else {
                match ber_ccr_multi_interferer(&cfg, &profile) {
                    Ok(v) => v,
                    Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
                }
            };
            fill_value(&mut row, value.value(), value.log_value(), value.flags());
        }
        (ReceiverKind::Ccr, Method::Exact) => {
            let cfg = match CcrConfig::new(length, weight, point.n, point.s, spec.mode) {
                Ok(cfg) => cfg,
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            };
            let profile = InterferenceProfile::new(point.plan.alphas().to_vec());
            match enumerate_ccr_exact(&cfg, &profile) {
                Ok(exact) => {
                    let flags = BerFlags {
                        permissive: cfg.outside_strict(),
                        ..BerFlags::default()
                    };
                    fill_value(&mut row, ratio_to_f64(&exact), ratio_ln(&exact), flags);
                }
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            }
        }
        (ReceiverKind::Ccr, Method::Mc) => {
            let cfg = match CcrConfig::new(length, weight, point.n, point.s, spec.mode) {
                Ok(cfg) => cfg,
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            };
            let link = match build_link(spec, point, length, weight, family) {
                Ok(link) => link,
                Err(message) => return error_row(spec, point, length, weight, hash, message),
            };
            let trials = spec.trials.expect("parser enforces trials for mc");
            match simulate_ccr(&link, point.s, trials, seed) {
                Ok(est) => fill_estimate(&mut row, &est, trials, seed, cfg.outside_strict()),
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            }
        }
        (ReceiverKind::Pic, method) => {
            let s2 = point.s2.expect("pic grid always has s2");
            let cfg = match PicConfig::new(length, weight, point.n, point.s, s2, spec.mode) {
                Ok(cfg) => cfg,
                Err(e) => return error_row(spec, point, length, weight, hash, e.to_string()),
            };
            let alphas = point.plan.alphas();
            match method {
                Method::Analytic => {
                    if alphas.len() != 1 {
                        return error_row(
                            spec,
                            point,
                            length,
                            weight,
                            hash,
                            "the pic closed form needs exactly one interfering channel".to_string(),
                        );
                    }
                    let value = ber_pic_closed_form(&cfg, alphas[0]);
                    fill_value(&mut row, value.value(), value.log_value(), value.flags());
                }
                Method::Exact => {
                    if alphas.len() > 1 {
                        return error_row(
                            spec,
                            point,
                            length,
                            weight,
                            hash,
                            "pic enumeration caps interfering channels at 1".to_string(),
                        );
                    }
                    match enumerate_pic_exact(&cfg, alphas.first().copied()) {
                        Ok(exact) => {
                            let flags = BerFlags {
                                permissive: cfg.outside_strict(),
                                ..BerFlags::default()
                            };
                            fill_value(&mut row, ratio_to_f64(&exact), ratio_ln(&exact), flags);
                        }
                        Err(e) => {
                            return error_row(spec, point, length, weight, hash, e.to_string())
                        }
                    }
                }
                Method::Mc => {
                    let link = match build_link(spec, point, length, weight, family) {
                        Ok(link) => link,
                        Err(message) => {
                            return error_row(spec, point, length, weight, hash, message)
                        }
                    };
                    let trials = spec.trials.expect("parser enforces trials for mc");
                    match simulate_pic(&link, point.s, s2, trials, seed) {
                        Ok(est) => {
                            fill_estimate(&mut row, &est, trials, seed, cfg.outside_strict())
                        }
                        Err(e) => {
                            return error_row(spec, point, length, weight, hash, e.to_string())
                        }
                    }
                }
            }
        }
    }
    row
}

fn build_link(
    spec: &SweepSpec,
    point: &GridPoint,
    length: u32,
    weight: u32,
    family: Option<&CodeFamily>,
) -> Result<LinkModel, String> {
    let channel = |users: u32| -> Result<ChannelModel, String> {
        match spec.sim {
            SimMode::Model => ChannelModel::model(length, weight, users).map_err(|e| e.to_string()),
            SimMode::Code => {
                let family = family.ok_or("code-mode simulation needs a code family")?;
                ChannelModel::coded(family.clone(), users).map_err(|e| e.to_string())
            }
        }
    };
    let target = channel(point.n)?;
    let interferers = point
        .plan
        .alphas()
        .iter()
        .map(|&alpha| channel(point.n).map(|ch| (ch, alpha)))
        .collect::<Result<Vec<_>, _>>()?;
    LinkModel::new(target, interferers, spec.sim).map_err(|e| e.to_string())
}

/// One plotted curve: its output filename, the grid coordinates naming it,
/// and (N, log10 Pe) points sorted by N.
#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub filename: String,
    pub label: String,
    pub points: Vec<(u32, f64)>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PlotData {
    pub curves: Vec<Curve>,
}

impl PlotData {
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for curve in &self.curves {
            out.push_str(&format!("{} {}\n", curve.filename, curve.label));
        }
        out
    }
}

/// Groups rows into per-curve (N, log10 Pe) series by the given coordinate
/// columns. Error rows are skipped. Strict-mode analytic curves are checked
/// for the structural monotonicity in N as an emission guard.
pub fn emit_plotdata(rows: &[ResultRow], group_by: &[String]) -> Result<PlotData, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::NoRows);
    }
    for key in group_by {
        if rows[0].coordinate(key).is_none() {
            return Err(SweepError::UnknownGroupKey(key.clone()));
        }
    }
    let mut grouped: std::collections::BTreeMap<String, Vec<&ResultRow>> =
        std::collections::BTreeMap::new();
    for row in rows {
        if row.error.is_some() || row.pe.is_none() {
            continue;
        }
        let label = group_by
            .iter()
            .map(|key| format!("{key}={}", row.coordinate(key).expect("checked key")))
            .collect::<Vec<_>>()
            .join(" ");
        grouped.entry(label).or_default().push(row);
    }
    if grouped.is_empty() {
        return Err(SweepError::NoRows);
    }
    let mut curves = Vec::new();
    for (index, (label, mut members)) in grouped.into_iter().enumerate() {
        members.sort_by_key(|r| r.n);
        let guard = members
            .iter()
            .all(|r| r.method == Method::Analytic && r.mode == EvalMode::Strict);
        if guard {
            for pair in members.windows(2) {
                if pair[1].n > pair[0].n {
                    let (a, b) = (pair[0].pe.unwrap(), pair[1].pe.unwrap());
                    if b < a * (1.0 - 1e-9) {
                        return Err(SweepError::MonotoneGuard(label));
                    }
                }
            }
        }
        let points = members.iter().map(|r| (r.n, r.log10_pe.unwrap())).collect();
        curves.push(Curve {
            filename: format!("curve_{index:03}.dat"),
            label,
            points,
        });
    }
    Ok(PlotData { curves })
}

/// Writes `<prefix>.csv`, `<prefix>_provenance.txt` and, when `group_by` is
/// given, `<prefix>_curves/` with one two-column file per curve plus a
/// manifest. Returns the paths written, in a fixed order.
pub fn write_outputs(
    output: &SweepOutput,
    dir: &Path,
    group_by: Option<&[String]>,
) -> Result<Vec<PathBuf>, SweepError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let csv_path = dir.join(format!("{}.csv", output.output_prefix));
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&csv_path)
        .map_err(io_from_csv)?;
    writer.write_record(COLUMNS).map_err(io_from_csv)?;
    for row in &output.rows {
        writer.write_record(row.to_record()).map_err(io_from_csv)?;
    }
    writer.flush()?;
    drop(writer);
    written.push(csv_path);

    let prov_path = dir.join(format!("{}_provenance.txt", output.output_prefix));
    let mut prov = fs::File::create(&prov_path)?;
    write!(
        prov,
        "config_hash {}\nmaster_seed {}\n--- canonical spec ---\n{}",
        output.config_hash, output.master_seed, output.canonical_spec
    )?;
    written.push(prov_path);

    if let Some(group_by) = group_by {
        let plot = emit_plotdata(&output.rows, group_by)?;
        let curve_dir = dir.join(format!("{}_curves", output.output_prefix));
        fs::create_dir_all(&curve_dir)?;
        let manifest_path = curve_dir.join("manifest.txt");
        fs::write(&manifest_path, plot.manifest())?;
        written.push(manifest_path);
        for curve in &plot.curves {
            let path = curve_dir.join(&curve.filename);
            let mut file = fs::File::create(&path)?;
            for (n, log10_pe) in &curve.points {
                writeln!(file, "{n} {}", sig17(*log10_pe))?;
            }
            written.push(path);
        }
    }
    Ok(written)
}

fn io_from_csv(e: csv::Error) -> SweepError {
    SweepError::Io(std::io::Error::other(e))
}

/// Reads a results CSV back into rows (the round-trip counterpart of
/// [`write_outputs`]).
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>, SweepError> {
    let mut reader = csv::Reader::from_path(path).map_err(io_from_csv)?;
    let headers = reader.headers().map_err(io_from_csv)?;
    if headers.iter().ne(COLUMNS.iter().copied()) {
        return Err(SweepError::Io(std::io::Error::other("unexpected header")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(io_from_csv)?;
        let fields: Vec<String> = record.iter().map(|s| s.to_string()).collect();
        rows.push(ResultRow::from_record(&fields).map_err(std::io::Error::other)?);
    }
    Ok(rows)
}

/// Default grouping: every coordinate except the x axis (N), so one curve
/// per (receiver, thresholds, plan, method).
pub fn default_group_by() -> Vec<String> {
    ["receiver", "s", "s2", "plan", "method"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_from(text: &str) -> SweepSpec {
        parse_config(text).expect("valid config")
    }

    const BASE: &str = "\
[code]
length = 64
weight = 2

[receiver]
kind = ccr
s = 1, 2

[sweep]
users = 2, 4, 8
methods = analytic, exact

[channels]
plan = none
plan = 1/2
";

    #[test]
    fn rows_are_sorted_and_complete() {
        let out = run_sweep(&spec_from(BASE), None).unwrap();
        // 3 users x 2 thresholds x 2 plans x 2 methods.
        assert_eq!(out.rows.len(), 24);
        let keys: Vec<_> = out
            .rows
            .iter()
            .map(|r| (r.n, r.s, r.s2, r.plan.clone(), r.method))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(out.rows.iter().all(|r| r.error.is_none()));
        assert!(out.rows.iter().all(|r| r.config_hash == out.config_hash));
    }

    #[test]
    fn analytic_and_exact_rows_agree() {
        let out = run_sweep(&spec_from(BASE), None).unwrap();
        for pair in out.rows.chunks(2) {
            let (a, e) = (&pair[0], &pair[1]);
            assert_eq!(a.method, Method::Analytic);
            assert_eq!(e.method, Method::Exact);
            let (pa, pe) = (a.pe.unwrap(), e.pe.unwrap());
            if pe == 0.0 {
                assert_eq!(pa, 0.0);
            } else {
                assert!(((pa - pe) / pe).abs() <= 1e-12, "{pa} vs {pe}");
            }
        }
    }

    #[test]
    fn reruns_are_byte_identical() {
        let text = BASE.replace(
            "methods = analytic, exact",
            "methods = analytic, mc\ntrials = 20000\nseed = 3",
        );
        let spec = spec_from(&text);
        let dir = tempfile::tempdir().unwrap();
        let out1 = run_sweep(&spec, None).unwrap();
        let out2 = run_sweep(&spec, None).unwrap();
        let group = default_group_by();
        let paths1 = write_outputs(&out1, &dir.path().join("a"), Some(&group)).unwrap();
        let paths2 = write_outputs(&out2, &dir.path().join("b"), Some(&group)).unwrap();
        assert_eq!(paths1.len(), paths2.len());
        for (p1, p2) in paths1.iter().zip(&paths2) {
            assert_eq!(fs::read(p1).unwrap(), fs::read(p2).unwrap(), "{p1:?}");
        }
        // A different master seed must change the mc rows.
        let out3 = run_sweep(&spec, Some(99)).unwrap();
        assert_ne!(
            out1.rows
                .iter()
                .filter(|r| r.method == Method::Mc)
                .map(|r| r.pe)
                .collect::<Vec<_>>(),
            out3.rows
                .iter()
                .filter(|r| r.method == Method::Mc)
                .map(|r| r.pe)
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let out = run_sweep(&spec_from(BASE), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_outputs(&out, dir.path(), None).unwrap();
        let rows = read_csv(&paths[0]).unwrap();
        assert_eq!(rows.len(), out.rows.len());
        for (a, b) in out.rows.iter().zip(&rows) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn guard_failures_become_error_rows() {
        let text = BASE
            .replace("users = 2, 4, 8", "users = 2, 13")
            .replace("methods = analytic, exact", "methods = exact");
        let out = run_sweep(&spec_from(&text), None).unwrap();
        let errs: Vec<_> = out.rows.iter().filter(|r| r.error.is_some()).collect();
        // The enumeration guard caps users at 12, so every n = 13 point
        // (2 thresholds x 2 plans) is recorded as an error row.
        assert_eq!(errs.len(), 4);
        assert!(errs[0].error.as_ref().unwrap().contains("enumeration"));
        assert!(out.rows.iter().any(|r| r.error.is_none()));
    }

    #[test]
    fn permissive_thresholds_run_flagged() {
        let text = BASE
            .replace("s = 1, 2", "s = 22, 23")
            .replace("methods = analytic, exact", "methods = analytic")
            .replace("[sweep]", "[sweep]\nmode = permissive");
        let out = run_sweep(&spec_from(&text), None).unwrap();
        assert!(out.rows.iter().all(|r| r.error.is_none()));
        assert!(out.rows.iter().all(|r| r.flags.contains("permissive")));
        // Raising the threshold can only shrink the error event.
        for n in [2u32, 4, 8] {
            for plan in ["none", "1/2"] {
                let pe_at = |s: u32| {
                    out.rows
                        .iter()
                        .find(|r| r.n == n && r.s == s && r.plan == plan)
                        .unwrap()
                        .pe
                        .unwrap()
                };
                assert!(pe_at(23) <= pe_at(22));
            }
        }
    }

    #[test]
    fn plotdata_grouping_and_guard() {
        let out = run_sweep(&spec_from(BASE), None).unwrap();
        let plot = emit_plotdata(&out.rows, &default_group_by()).unwrap();
        // 2 thresholds x 2 plans x 2 methods.
        assert_eq!(plot.curves.len(), 8);
        for curve in &plot.curves {
            assert!(curve.points.windows(2).all(|p| p[0].0 <= p[1].0));
        }
        assert!(matches!(
            emit_plotdata(&out.rows, &["bogus".to_string()]),
            Err(SweepError::UnknownGroupKey(_))
        ));
        assert!(matches!(
            emit_plotdata(&[], &default_group_by()),
            Err(SweepError::NoRows)
        ));
        let manifest = plot.manifest();
        assert_eq!(manifest.lines().count(), 8);
        assert!(manifest.starts_with("curve_000.dat"));
    }

    #[test]
    fn grouping_by_plan_alone_gives_one_curve_per_plan() {
        let text = BASE.replace(
            "plan = 1/2",
            "plan = 1/2\nplan = 1/2, 1/2\nplan = 1/2, 1/2, 1/2",
        );
        let out = run_sweep(&spec_from(&text), None).unwrap();
        let plot = emit_plotdata(&out.rows, &["plan".to_string()]).unwrap();
        assert_eq!(plot.curves.len(), 4);
    }

    #[test]
    fn monotone_guard_rejects_corrupted_curves() {
        let out = run_sweep(&spec_from(BASE), None).unwrap();
        let mut rows = out.rows.clone();
        // Corrupt one strict analytic value so Pe falls as N grows.
        let idx = rows
            .iter()
            .position(|r| r.method == Method::Analytic && r.n == 8 && r.s == 1 && r.plan == "none")
            .unwrap();
        rows[idx].pe = Some(1e-30);
        rows[idx].log10_pe = Some(-30.0);
        assert!(matches!(
            emit_plotdata(&rows, &default_group_by()),
            Err(SweepError::MonotoneGuard(_))
        ));
    }

    #[test]
    fn seventeen_digit_contract() {
        let x = 1.0 / 1024.0 * (1.0 + 1e-13);
        let s = sig17(x);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        assert_eq!(sig17(f64::NEG_INFINITY), "-inf");
        assert_eq!("-inf".parse::<f64>().unwrap(), f64::NEG_INFINITY);
    }
}
