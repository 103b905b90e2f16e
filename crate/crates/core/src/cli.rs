//! Experiment commands behind the `eranklab` binary.
//!
//! Every command takes a flat [`Settings`] record, fills in defaults, writes its
//! CSV/JSON outputs atomically into an output directory and finishes with a
//! `manifest.json` that is enough to reproduce the run byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{basis_matrix, kernel_ga, Activation, ModelConfig, OperatorSpec, RandomFeatureModel};
use crate::grid::{linspace, Points};
use crate::linalg::{effective_rank, sym_eigenvalues};
use crate::partition::PouKind;
use crate::problems::{error_metrics, Problem, ProblemKind};
use crate::training::{
    diag_toy_run, gd_train, rfm_solve, toy_rhs, SpectrumKind, TrainConfig, TrainMode,
};

pub const TOOL: &str = "eranklab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ErankScan,
    ToyDiag,
    Train,
    TheoremCheck,
    RfmSolve,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ErankScan => "erank-scan",
            Command::ToyDiag => "toy-diag",
            Command::Train => "train",
            Command::TheoremCheck => "theorem-check",
            Command::RfmSolve => "rfm-solve",
        }
    }
}

/// Flat key/value configuration shared by the config file and the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<String>,
    /// Cells per dimension, comma separated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jn: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pou_kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_epochs: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_equals_m: Option<bool>,
}

macro_rules! merge_fields {
    ($base:expr, $over:expr, $($f:ident),*) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f.clone(); } )*
    };
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `over` replace those in `self`.
    pub fn merged(mut self, over: &Settings) -> Settings {
        merge_fields!(
            self, over, problem, axis, values, mp, rm, jn, m, n, activation, pou_kind, mode, lr,
            epochs, gamma, seed, snapshot_epochs, metrics_every, spectrum, seeds, n_equals_m
        );
        self
    }
}

/// Fills defaults into a [`Settings`] record while remembering which keys were defaulted.
struct Resolver {
    s: Settings,
    defaulted: Vec<String>,
}

macro_rules! default_key {
    ($r:expr, $f:ident, $v:expr) => {
        if $r.s.$f.is_none() {
            $r.s.$f = Some($v);
            $r.defaulted.push(stringify!($f).replace('_', "-"));
        }
    };
}

fn require<T: Clone>(v: &Option<T>, key: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Config(format!("missing required setting '{key}'")))
}

fn parse_list<T: std::str::FromStr>(s: &str, key: &str) -> Result<Vec<T>> {
    let items: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Config(format!("bad value '{t}' in '{key}'")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("'{key}' is empty")));
    }
    Ok(items)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Fully resolved configuration.
    pub settings: Settings,
    /// Keys that were filled from defaults.
    pub defaulted: Vec<String>,
    /// SHA-256 of every output file.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
        text.push('\n');
        write_atomic(&dir.join(MANIFEST), text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Collects output files for one run.
struct Outputs {
    dir: PathBuf,
    sums: BTreeMap<String, String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            sums: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.sums
            .insert(name.to_string(), hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn csv(&mut self, name: &str, table: Csv) -> Result<()> {
        self.write(name, table.0.as_bytes())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Config(format!("cannot serialize {name}: {e}")))?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    fn finish(self, command: Command, r: Resolver) -> Result<RunManifest> {
        let manifest = RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command,
            settings: r.s,
            defaulted: r.defaulted,
            outputs: self.sums,
        };
        manifest.write(&self.dir)?;
        Ok(manifest)
    }
}

/// Writes to a sibling temporary file, then renames over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// CSV text with `Debug` formatting of floats, which round-trips exactly.
struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv(header.join(",") + "\n")
    }

    fn row(&mut self, cells: &[String]) {
        self.0.push_str(&cells.join(","));
        self.0.push('\n');
    }
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

/// Runs one command and returns its manifest.
pub fn run(command: Command, settings: &Settings, out: &Path) -> Result<RunManifest> {
    match command {
        Command::ErankScan => cmd_erank_scan(settings, out),
        Command::ToyDiag => cmd_toy_diag(settings, out),
        Command::Train => cmd_train(settings, out),
        Command::TheoremCheck => cmd_theorem_check(settings, out),
        Command::RfmSolve => cmd_rfm_solve(settings, out),
    }
}

/// Re-runs the command recorded in a manifest, writing into `out`.
///
/// Fails if any output's checksum differs from the recorded one.
pub fn rerun(manifest_path: &Path, out: &Path) -> Result<RunManifest> {
    let m = RunManifest::load(manifest_path)?;
    if m.tool != TOOL {
        return Err(Error::Config(format!("manifest written by '{}'", m.tool)));
    }
    let mut again = run(m.command, &m.settings, out)?;
    again.defaulted = m.defaulted.clone();
    again.write(out)?;
    for (name, sum) in &m.outputs {
        if again.outputs.get(name) != Some(sum) {
            return Err(Error::Config(format!("re-run output {name} does not match the manifest")));
        }
    }
    Ok(again)
}

/// Spectrum of `Φ Φᵀ` for the identity operator on `n` equispaced points of `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub n: usize,
    pub m: usize,
    pub mp: usize,
    pub rm: f64,
    pub activation: Activation,
    pub pou_kind: PouKind,
    pub seed: u64,
}

impl ScanPoint {
    pub fn spectrum(&self) -> Result<(Vec<f64>, f64)> {
        if self.mp == 0 || self.m % self.mp != 0 {
            return Err(Error::Config(format!(
                "M = {} is not divisible by M_p = {}",
                self.m, self.mp
            )));
        }
        let model = RandomFeatureModel::init(&ModelConfig {
            seed: self.seed,
            domain: vec![(-1.0, 1.0)],
            cells: vec![self.mp],
            neurons_per_cell: self.m / self.mp,
            init_range: self.rm,
            activation: self.activation,
            pou_kind: self.pou_kind,
            trainable_inner: false,
        })?;
        let mut pts = Points::from_1d(&linspace(-1.0, 1.0, self.n));
        for i in 0..pts.len() {
            model.partition().nudge_off_breakpoints(pts.get_mut(i));
        }
        let phi = basis_matrix(&model, &pts, &OperatorSpec::identity(1))?;
        let eig = sym_eigenvalues(&kernel_ga(&phi))?;
        let er = effective_rank(&eig)?;
        Ok((eig, er))
    }
}

pub fn cmd_erank_scan(settings: &Settings, out: &Path) -> Result<RunManifest> {
    let mut r = Resolver {
        s: Settings {
            axis: settings.axis.clone(),
            values: settings.values.clone(),
            n: settings.n,
            m: settings.m,
            mp: settings.mp.clone(),
            rm: settings.rm,
            activation: settings.activation.clone(),
            pou_kind: settings.pou_kind.clone(),
            seed: settings.seed,
            n_equals_m: settings.n_equals_m,
            ..Settings::default()
        },
        defaulted: Vec::new(),
    };
    let axis = require(&r.s.axis, "axis")?;
    let values = require(&r.s.values, "values")?;
    default_key!(r, n, 256);
    default_key!(r, m, 1024);
    default_key!(r, mp, "1".to_string());
    default_key!(r, rm, 1.0);
    default_key!(r, activation, "tanh".to_string());
    default_key!(r, pou_kind, "a".to_string());
    default_key!(r, seed, 0);
    default_key!(r, n_equals_m, false);
    let s = &r.s;
    let mp_base: Vec<usize> = parse_list(s.mp.as_deref().unwrap(), "mp")?;
    if mp_base.len() != 1 {
        return Err(Error::Config("erank-scan is one-dimensional; give a single mp".into()));
    }
    let base = ScanPoint {
        n: s.n.unwrap(),
        m: s.m.unwrap(),
        mp: mp_base[0],
        rm: s.rm.unwrap(),
        activation: Activation::parse(s.activation.as_deref().unwrap())?,
        pou_kind: PouKind::parse(s.pou_kind.as_deref().unwrap())?,
        seed: s.seed.unwrap(),
    };
    let n_equals_m = s.n_equals_m.unwrap();
    let tokens: Vec<String> = parse_list(&values, "values")?;
    let points: Vec<ScanPoint> = tokens
        .iter()
        .map(|t| {
            let mut p = base;
            let bad = || Error::Config(format!("value '{t}' is invalid for axis '{axis}'"));
            match axis.as_str() {
                "mp" => p.mp = t.parse().map_err(|_| bad())?,
                "rm" => p.rm = t.parse().map_err(|_| bad())?,
                "m" => {
                    p.m = t.parse().map_err(|_| bad())?;
                    if n_equals_m {
                        p.n = p.m;
                    }
                }
                other => return Err(Error::Config(format!("unknown axis '{other}'"))),
            }
            if p.mp == 0 || p.m == 0 || p.n == 0 || !(p.rm > 0.0) {
                return Err(bad());
            }
            Ok(p)
        })
        .collect::<Result<_>>()?;

    let results: Vec<(Vec<f64>, f64)> = points
        .par_iter()
        .map(ScanPoint::spectrum)
        .collect::<Result<_>>()?;

    let mut outputs = Outputs::new(out)?;
    let mut scan = Csv::new(&["axis_value", "erank", "lambda_max", "lambda_min", "n", "m", "seed"]);
    for ((tok, p), (eig, er)) in tokens.iter().zip(&points).zip(&results) {
        scan.row(&[
            tok.clone(),
            f(*er),
            f(eig[0]),
            f(*eig.last().unwrap()),
            p.n.to_string(),
            p.m.to_string(),
            p.seed.to_string(),
        ]);
        let mut e = Csv::new(&["index", "eigenvalue"]);
        for (i, l) in eig.iter().enumerate() {
            e.row(&[i.to_string(), f(*l)]);
        }
        outputs.csv(&format!("eigen_{tok}.csv"), e)?;
    }
    outputs.csv("scan.csv", scan)?;
    outputs.finish(Command::ErankScan, r)
}

#[derive(Debug, Serialize)]
struct ToySummary {
    spectrum: String,
    n: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
    erank: f64,
    initial_loss: f64,
    final_loss: f64,
}

pub fn cmd_toy_diag(settings: &Settings, out: &Path) -> Result<RunManifest> {
    let mut r = Resolver {
        s: Settings {
            spectrum: settings.spectrum.clone(),
            n: settings.n,
            lr: settings.lr,
            epochs: settings.epochs,
            seed: settings.seed,
            ..Settings::default()
        },
        defaulted: Vec::new(),
    };
    default_key!(r, spectrum, "geometric".to_string());
    default_key!(r, n, 64);
    default_key!(r, lr, 5e-2);
    default_key!(r, epochs, 100);
    default_key!(r, seed, 0);
    let s = &r.s;
    let kind = SpectrumKind::parse(s.spectrum.as_deref().unwrap())?;
    let (n, lr, epochs, seed) = (s.n.unwrap(), s.lr.unwrap(), s.epochs.unwrap(), s.seed.unwrap());
    if n < 2 {
        return Err(Error::Config("toy-diag needs n >= 2".into()));
    }
    let lambdas = kind.values(n, 256.0, 1.0);
    let b = toy_rhs(n, seed);
    let rec = diag_toy_run(&lambdas, &b, lr, epochs)?;

    let mut outputs = Outputs::new(out)?;
    let mut loss = Csv::new(&["epoch", "loss"]);
    let mut modes = Csv::new(&["epoch", "mode", "squared_error"]);
    for (t, (l, m)) in rec.losses.iter().zip(&rec.modes).enumerate() {
        loss.row(&[t.to_string(), f(*l)]);
        for (i, v) in m.iter().enumerate() {
            modes.row(&[t.to_string(), i.to_string(), f(*v)]);
        }
    }
    outputs.csv("loss.csv", loss)?;
    outputs.csv("modes.csv", modes)?;
    outputs.json(
        "summary.json",
        &ToySummary {
            spectrum: kind.name().into(),
            n,
            lr,
            epochs,
            seed,
            erank: rec.erank,
            initial_loss: rec.losses[0],
            final_loss: *rec.losses.last().unwrap(),
        },
    )?;
    outputs.finish(Command::ToyDiag, r)
}

/// Model settings shared by `train` and `rfm-solve`.
fn resolve_model(r: &mut Resolver, settings: &Settings, kind: ProblemKind) -> Result<ModelConfig> {
    r.s.mp = settings.mp.clone();
    r.s.rm = settings.rm;
    r.s.jn = settings.jn;
    r.s.m = settings.m;
    r.s.activation = settings.activation.clone();
    r.s.pou_kind = settings.pou_kind.clone();
    r.s.seed = settings.seed;
    r.s.n = settings.n;
    default_key!(r, mp, "1".to_string());
    let mut counts: Vec<usize> = parse_list(r.s.mp.as_deref().unwrap(), "mp")?;
    if counts.len() == 1 {
        counts = vec![counts[0]; kind.dim()];
    }
    if counts.len() != kind.dim() {
        return Err(Error::Config(format!(
            "{} needs {} cell counts, got {}",
            kind.name(),
            kind.dim(),
            counts.len()
        )));
    }
    let total: usize = counts.iter().product();
    if total == 0 {
        return Err(Error::Config("cell counts must be >= 1".into()));
    }
    match (r.s.jn, r.s.m) {
        (Some(jn), Some(m)) if jn * total != m => {
            return Err(Error::Config(format!("jn = {jn} and m = {m} disagree for {total} cells")))
        }
        (Some(jn), None) => {
            r.s.m = Some(jn * total);
            r.defaulted.push("m".into());
        }
        (None, m) => {
            if m.is_none() {
                r.s.m = Some(512);
                r.defaulted.push("m".into());
            }
            let m = r.s.m.unwrap();
            if m % total != 0 {
                return Err(Error::Config(format!("m = {m} is not divisible by {total} cells")));
            }
            r.s.jn = Some(m / total);
            r.defaulted.push("jn".into());
        }
        _ => {}
    }
    default_key!(r, rm, 1.0);
    default_key!(r, activation, "tanh".to_string());
    default_key!(r, pou_kind, "b".to_string());
    default_key!(r, seed, 0);
    default_key!(
        r,
        n,
        match kind {
            ProblemKind::Helmholtz2d => crate::problems::DEFAULT_POINTS_2D,
            _ => crate::problems::DEFAULT_POINTS_1D,
        }
    );
    let s = &r.s;
    Ok(ModelConfig {
        seed: s.seed.unwrap(),
        domain: Problem::new(kind, Some(2)).domain,
        cells: counts,
        neurons_per_cell: s.jn.unwrap(),
        init_range: s.rm.unwrap(),
        activation: Activation::parse(s.activation.as_deref().unwrap())?,
        pou_kind: PouKind::parse(s.pou_kind.as_deref().unwrap())?,
        trainable_inner: false,
    })
}

pub fn cmd_train(settings: &Settings, out: &Path) -> Result<RunManifest> {
    let mut r = Resolver {
        s: Settings {
            problem: settings.problem.clone(),
            mode: settings.mode.clone(),
            lr: settings.lr,
            epochs: settings.epochs,
            gamma: settings.gamma,
            snapshot_epochs: settings.snapshot_epochs.clone(),
            metrics_every: settings.metrics_every,
            ..Settings::default()
        },
        defaulted: Vec::new(),
    };
    let kind = ProblemKind::parse(&require(&r.s.problem, "problem")?)?;
    let mut model_cfg = resolve_model(&mut r, settings, kind)?;
    default_key!(r, mode, "rfm".to_string());
    default_key!(
        r,
        epochs,
        if kind == ProblemKind::Regression { 20_000 } else { 50_000 }
    );
    let epochs = r.s.epochs.unwrap();
    default_key!(r, snapshot_epochs, format!("0,{epochs}"));
    default_key!(r, metrics_every, (epochs / 100).max(1));
    let problem = Problem::new(kind, r.s.n);
    if r.s.gamma.is_none() && kind != ProblemKind::Regression && kind != ProblemKind::EllipticRitz1d {
        r.s.gamma = Some(problem.gamma);
        r.defaulted.push("gamma".into());
    }
    let mode = TrainMode::parse(r.s.mode.as_deref().unwrap())?;
    model_cfg.trainable_inner = mode == TrainMode::Full;
    let cfg = TrainConfig {
        lr: r.s.lr,
        epochs,
        gamma: r.s.gamma,
        seed: model_cfg.seed,
        snapshot_epochs: parse_list(r.s.snapshot_epochs.as_deref().unwrap(), "snapshot-epochs")?,
        mode,
        metrics_every: r.s.metrics_every.unwrap(),
    };
    let mut model = RandomFeatureModel::init(&model_cfg)?;
    let rec = gd_train(&mut model, &problem, &cfg)?;
    if r.s.lr.is_none() {
        r.s.lr = Some(rec.lr);
        r.defaulted.push("lr".into());
    }

    let mut outputs = Outputs::new(out)?;
    let metric_at: BTreeMap<usize, f64> = rec.metrics.iter().map(|(e, m)| (*e, m.rel_l2)).collect();
    let mut loss = Csv::new(&["epoch", "loss", "rel_l2"]);
    for (t, l) in rec.losses.iter().enumerate() {
        let rel = metric_at.get(&t).map(|v| f(*v)).unwrap_or_default();
        loss.row(&[t.to_string(), f(*l), rel]);
    }
    let mut snaps = Csv::new(&["epoch", "index", "eigenvalue", "erank"]);
    let mut modes = Csv::new(&["epoch", "index", "eigenvalue", "projected_residual"]);
    for s in &rec.snapshots {
        for (i, (l, e)) in s.eigenvalues.iter().zip(&s.projected_residual).enumerate() {
            snaps.row(&[s.epoch.to_string(), i.to_string(), f(*l), f(s.erank)]);
            modes.row(&[s.epoch.to_string(), i.to_string(), f(*l), f(*e)]);
        }
    }
    outputs.csv("loss.csv", loss)?;
    outputs.csv("snapshots.csv", snaps)?;
    outputs.csv("residual_modes.csv", modes)?;
    outputs.json("errors.json", &rec.final_metrics().expect("final metrics recorded"))?;
    outputs.finish(Command::Train, r)
}

pub fn cmd_rfm_solve(settings: &Settings, out: &Path) -> Result<RunManifest> {
    let mut r = Resolver {
        s: Settings {
            problem: settings.problem.clone(),
            gamma: settings.gamma,
            ..Settings::default()
        },
        defaulted: Vec::new(),
    };
    let kind = ProblemKind::parse(&require(&r.s.problem, "problem")?)?;
    let model_cfg = resolve_model(&mut r, settings, kind)?;
    let mut problem = Problem::new(kind, r.s.n);
    if kind != ProblemKind::Regression && kind != ProblemKind::EllipticRitz1d {
        match r.s.gamma {
            Some(g) => problem.gamma = g,
            None => {
                r.s.gamma = Some(problem.gamma);
                r.defaulted.push("gamma".into());
            }
        }
    }
    let mut model = RandomFeatureModel::init(&model_cfg)?;
    rfm_solve(&mut model, &problem)?;
    let metrics = error_metrics(&model, &problem)?;

    let mut outputs = Outputs::new(out)?;
    let coords = ["x", "y", "z"];
    let mut header: Vec<&str> = coords[..problem.dim()].to_vec();
    header.extend(["u", "u_exact"]);
    let mut sol = Csv::new(&header);
    for x in problem.eval_points.iter() {
        let mut row: Vec<String> = x.iter().map(|v| f(*v)).collect();
        row.push(f(model.eval(x)));
        row.push(f(problem.exact(x)));
        sol.row(&row);
    }
    outputs.csv("solution.csv", sol)?;
    outputs.json("errors.json", &metrics)?;
    outputs.finish(Command::RfmSolve, r)
}

/// Kernel spectra on two mirrored half-cells with independent weight draws.
///
/// Both halves see the same `n/2` local coordinates in `[-1, 1]`; each carries
/// `m/2` features and the kernel uses the global `1/M` scale.
pub fn half_cell_spectra(
    n: usize,
    m: usize,
    activation: Activation,
    rm: f64,
    seed_left: u64,
    seed_right: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n % 2 != 0 || m % 2 != 0 || n == 0 || m == 0 {
        return Err(Error::Config(format!("N = {n} and M = {m} must be even and positive")));
    }
    let xs = linspace(-1.0, 1.0, n / 2);
    let spectrum = |seed: u64| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<(f64, f64)> = (0..m / 2)
            .map(|_| (rng.gen_range(-rm..rm), rng.gen_range(-rm..rm)))
            .collect();
        let scale = 1.0 / (m as f64).sqrt();
        let phi = DMatrix::from_fn(n / 2, m / 2, |i, k| {
            scale * activation.value(w[k].0 * xs[i] + w[k].1)
        });
        sym_eigenvalues(&kernel_ga(&phi))
    };
    Ok((spectrum(seed_left)?, spectrum(seed_right)?))
}

/// `(Σ_j |λ_j^L - λ_j^R|²)^{1/2}` for one trial.
pub fn spectral_gap(n: usize, m: usize, activation: Activation, rm: f64, seed_left: u64, seed_right: u64) -> Result<f64> {
    let (l, r) = half_cell_spectra(n, m, activation, rm, seed_left, seed_right)?;
    Ok(l.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// `√2 N / √M`.
pub fn gap_bound(n: usize, m: usize) -> f64 {
    2f64.sqrt() * n as f64 / (m as f64).sqrt()
}

fn trial_seeds(base: u64, trial: usize) -> (u64, u64) {
    let s = base.wrapping_add(trial as u64).wrapping_mul(2);
    (s, s + 1)
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// Gaps for `seeds` independent trials.
pub fn theorem_gaps(n: usize, m: usize, seeds: usize, base_seed: u64, activation: Activation, rm: f64) -> Result<Vec<f64>> {
    (0..seeds)
        .into_par_iter()
        .map(|t| {
            let (a, b) = trial_seeds(base_seed, t);
            spectral_gap(n, m, activation, rm, a, b)
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct TheoremSummary {
    n: usize,
    m: usize,
    seeds: usize,
    bound: f64,
    max_gap: f64,
    median_gap: f64,
    all_within_bound: bool,
    median_gap_4m: f64,
    median_ratio_4m: f64,
}

pub fn cmd_theorem_check(settings: &Settings, out: &Path) -> Result<RunManifest> {
    let mut r = Resolver {
        s: Settings {
            n: settings.n,
            m: settings.m,
            seeds: settings.seeds,
            seed: settings.seed,
            activation: settings.activation.clone(),
            rm: settings.rm,
            ..Settings::default()
        },
        defaulted: Vec::new(),
    };
    default_key!(r, n, 64);
    default_key!(r, m, 2048);
    default_key!(r, seeds, 20);
    default_key!(r, seed, 0);
    default_key!(r, activation, "tanh".to_string());
    default_key!(r, rm, 1.0);
    let s = &r.s;
    let (n, m, seeds, seed, rm) = (s.n.unwrap(), s.m.unwrap(), s.seeds.unwrap(), s.seed.unwrap(), s.rm.unwrap());
    let act = Activation::parse(s.activation.as_deref().unwrap())?;
    if seeds == 0 {
        return Err(Error::Config("seeds must be >= 1".into()));
    }
    let gaps = theorem_gaps(n, m, seeds, seed, act, rm)?;
    let gaps_4m = theorem_gaps(n, 4 * m, seeds, seed, act, rm)?;
    let bound = gap_bound(n, m);

    let mut outputs = Outputs::new(out)?;
    let mut table = Csv::new(&["trial", "seed_left", "seed_right", "m", "gap", "bound", "within_bound"]);
    for (mm, gs) in [(m, &gaps), (4 * m, &gaps_4m)] {
        let b = gap_bound(n, mm);
        for (t, g) in gs.iter().enumerate() {
            let (sl, sr) = trial_seeds(seed, t);
            table.row(&[
                t.to_string(),
                sl.to_string(),
                sr.to_string(),
                mm.to_string(),
                f(*g),
                f(b),
                (*g <= b).to_string(),
            ]);
        }
    }
    outputs.csv("theorem.csv", table)?;
    let med = median(&gaps);
    let med4 = median(&gaps_4m);
    outputs.json(
        "summary.json",
        &TheoremSummary {
            n,
            m,
            seeds,
            bound,
            max_gap: gaps.iter().cloned().fold(0.0, f64::max),
            median_gap: med,
            all_within_bound: gaps.iter().all(|g| *g <= bound),
            median_gap_4m: med4,
            median_ratio_4m: med4 / med,
        },
    )?;
    outputs.finish(Command::TheoremCheck, r)
}
