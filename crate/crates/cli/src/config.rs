//! Experiment configuration: `key = value` lines grouped under `[section]`
//! headers. `#` and `;` start comment lines. Parsing never stops at the first
//! problem; every error is collected with its line number.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use attractor_core::domain::PolynomialNonlinearity;
use attractor_core::semiflow::{LinearSolver, SemiflowConfig};
use attractor_core::spectral::EigenMethod;
use attractor_core::tangent::DimensionConfig;
use attractor_core::verify::VerifyOptions;
use attractor_core::{ConstantsTable, Grid, NonlinearitySpec, Profile, SpectralConfig};
use sha2::{Digest, Sha256};

/// Environment variable naming a file whose `[constants]` section is layered
/// between the built-in defaults and the experiment's own constants.
pub const CONSTANTS_ENV: &str = "ATTRACTOR_DIM_CONSTANTS";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn global(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in one file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors {
    pub source: String,
    pub errors: Vec<ConfigError>,
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {} error(s)", self.source, self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

type Raw = BTreeMap<String, Section>;

/// Keys accepted in each section; `constants` takes any valid constant name.
const SCHEMA: &[(&str, &[&str])] = &[
    (
        "problem",
        &[
            "beta",
            "f.source",
            "f.linear",
            "f.quadratic",
            "f.cubic",
            "growth_c",
            "gamma",
            "q",
            "sigma",
            "dissipation",
            "initial",
        ],
    ),
    ("grid", &["points", "extents"]),
    (
        "time",
        &[
            "dt",
            "t_end",
            "solver",
            "newton_tol",
            "newton_max_iter",
            "alpha",
            "snapshot_stride",
            "blowup_threshold",
        ],
    ),
    ("spectral", &["k_eigs", "method", "tol", "max_iter", "seed", "clr_q"]),
    (
        "dimension",
        &["d_max", "margin", "burn_in", "reortho_stride", "seed", "ensemble", "spread"],
    ),
    ("verify", &["samples", "pairs", "pair_horizon", "tol"]),
    ("constants", &[]),
    ("output", &["directory", "formats", "label", "snapshots"]),
];

const REQUIRED: &[&str] = &["problem", "grid"];

fn parse_raw(text: &str, errors: &mut Vec<ConfigError>) -> Raw {
    let mut raw = Raw::new();
    // None before the first header, Some(None) under a rejected one
    let mut current: Option<Option<String>> = None;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with(';') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                errors.push(ConfigError::at(n, format!("malformed section header `{t}`")));
                current = Some(None);
                continue;
            };
            let name = name.trim().to_string();
            if !SCHEMA.iter().any(|(s, _)| *s == name) {
                errors.push(ConfigError::at(n, format!("unknown section [{name}]")));
                current = Some(None);
                continue;
            }
            if let Some(prev) = raw.get(&name) {
                errors.push(ConfigError::at(
                    n,
                    format!("section [{name}] repeated (first opened on line {})", prev.line),
                ));
            } else {
                raw.insert(
                    name.clone(),
                    Section {
                        line: n,
                        ..Default::default()
                    },
                );
            }
            current = Some(Some(name));
            continue;
        }
        let Some((k, v)) = t.split_once('=') else {
            errors.push(ConfigError::at(n, format!("expected `key = value`, found `{t}`")));
            continue;
        };
        let key = k.trim().to_string();
        let value = v.split_whitespace().collect::<Vec<_>>().join(" ");
        if key.is_empty() {
            errors.push(ConfigError::at(n, "empty key"));
            continue;
        }
        let sec = match &current {
            None => {
                errors.push(ConfigError::at(n, format!("key `{key}` outside of any section")));
                continue;
            }
            Some(None) => continue,
            Some(Some(sec)) => sec,
        };
        let allowed = SCHEMA.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
        if sec != "constants" && !allowed.contains(&key.as_str()) {
            errors.push(ConfigError::at(n, format!("unknown key `{key}` in [{sec}]")));
            continue;
        }
        let section = raw.get_mut(sec).expect("section registered on its header");
        if let Some(prev) = section.entries.get(&key) {
            errors.push(ConfigError::at(
                n,
                format!("duplicate key `{key}` in [{sec}] on lines {} and {n}", prev.line),
            ));
            continue;
        }
        section.entries.insert(key, Entry { value, line: n });
    }
    raw
}

/// Typed access to a parsed section that records every failure.
struct Reader<'a> {
    raw: &'a Raw,
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn entry(&self, sec: &str, key: &str) -> Option<&Entry> {
        self.raw.get(sec).and_then(|s| s.entries.get(key))
    }

    fn line(&self, sec: &str, key: &str) -> Option<usize> {
        self.entry(sec, key).map(|e| e.line)
    }

    fn fail(&mut self, sec: &str, key: &str, msg: impl Into<String>) {
        let msg = msg.into();
        match self.line(sec, key) {
            Some(l) => self.errors.push(ConfigError::at(l, msg)),
            None => self.errors.push(ConfigError::global(msg)),
        }
    }

    fn parsed<T>(&mut self, sec: &str, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Option<T> {
        let e = self.entry(sec, key)?;
        match f(&e.value) {
            Some(v) => Some(v),
            None => {
                let (l, v) = (e.line, e.value.clone());
                self.errors
                    .push(ConfigError::at(l, format!("[{sec}] {key}: expected {what}, found `{v}`")));
                None
            }
        }
    }

    fn f64(&mut self, sec: &str, key: &str, default: f64) -> f64 {
        self.f64_opt(sec, key).unwrap_or(default)
    }

    fn f64_opt(&mut self, sec: &str, key: &str) -> Option<f64> {
        self.parsed(sec, key, "a number", parse_number)
    }

    fn usize(&mut self, sec: &str, key: &str, default: usize) -> usize {
        self.parsed(sec, key, "a nonnegative integer", |s| s.parse().ok())
            .unwrap_or(default)
    }

    fn u64(&mut self, sec: &str, key: &str, default: u64) -> u64 {
        self.parsed(sec, key, "a nonnegative integer", |s| s.parse().ok())
            .unwrap_or(default)
    }

    fn profile(&mut self, sec: &str, key: &str, default: &str) -> Profile {
        self.profile_opt(sec, key)
            .unwrap_or_else(|| default.parse().expect("built-in default profile"))
    }

    fn profile_opt(&mut self, sec: &str, key: &str) -> Option<Profile> {
        let e = self.entry(sec, key)?;
        match e.value.parse::<Profile>() {
            Ok(p) => Some(p),
            Err(err) => {
                let l = e.line;
                self.errors.push(ConfigError::at(l, format!("[{sec}] {key}: {err}")));
                None
            }
        }
    }

    fn string(&self, sec: &str, key: &str) -> Option<String> {
        self.entry(sec, key).map(|e| e.value.clone())
    }

    /// Runs a validation and attaches the key's line to a failure.
    fn check(&mut self, sec: &str, key: &str, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.fail(sec, key, msg);
        }
    }
}

/// Accepts `inf`, `infinity` and `∞` (optionally signed) besides ordinary numbers.
fn parse_number(s: &str) -> Option<f64> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(b) => (-1.0, b),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    if body == "∞" || body.eq_ignore_ascii_case("inf") || body.eq_ignore_ascii_case("infinity") {
        return Some(sign * f64::INFINITY);
    }
    t.parse::<f64>().ok().filter(|v| !v.is_nan())
}

#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub beta: Profile,
    pub source: Profile,
    pub linear: Profile,
    pub quadratic: f64,
    pub cubic: f64,
    pub growth_c: Option<f64>,
    pub gamma: f64,
    pub q: f64,
    pub sigma: f64,
    /// Dissipation profile `D`; enables the absorbing-ball computations.
    pub dissipation: Option<Profile>,
    pub initial: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
    pub fields: bool,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Formats,
    pub label: String,
    /// Number of evenly spaced field snapshots written by `simulate`.
    pub snapshots: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub grid: Grid,
    pub time: SemiflowConfig,
    pub spectral: SpectralConfig,
    pub clr_q: Option<f64>,
    pub dimension: DimensionConfig,
    pub ensemble: usize,
    /// Amplitude of the random perturbation added to members after the first.
    pub spread: f64,
    pub verify: VerifyOptions,
    pub constants: ConstantsTable,
    pub output: OutputConfig,
    /// Effective `section.key -> value` pairs, sorted; the hash is taken over these.
    pub canonical: BTreeMap<String, String>,
}

impl ExperimentConfig {
    /// SHA-256 over the sorted canonical pairs, so key order does not matter.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.canonical {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn nonlinearity(&self) -> attractor_core::Result<NonlinearitySpec> {
        build_spec(&self.problem, &self.grid)
    }
}

fn build_spec(p: &ProblemConfig, grid: &Grid) -> attractor_core::Result<NonlinearitySpec> {
    let poly = PolynomialNonlinearity::new(grid.extents(), p.source.clone(), p.linear.clone(), p.quadratic, p.cubic);
    let c = p.growth_c.unwrap_or_else(|| poly.derived_growth_constant());
    NonlinearitySpec::polynomial(poly)
        .with_growth(c, p.gamma)?
        .with_structure(p.q, p.sigma)
}

/// Reads `[constants]` entries of the form `value | provenance`.
fn read_constants(raw: &Raw, table: &mut ConstantsTable, errors: &mut Vec<ConfigError>) {
    let Some(sec) = raw.get("constants") else { return };
    for (name, e) in &sec.entries {
        let (v, prov) = match e.value.split_once('|') {
            Some((v, p)) => (v.trim(), p.trim()),
            None => (e.value.trim(), ""),
        };
        let Some(value) = parse_number(v) else {
            errors.push(ConfigError::at(
                e.line,
                format!("[constants] {name}: expected a number, found `{v}`"),
            ));
            continue;
        };
        if name == "delta" && !(value > 0.0 && value < 1.0) {
            errors.push(ConfigError::at(e.line, "delta must lie in (0,1)"));
            continue;
        }
        if let Err(err) = table.insert(name, value, prov) {
            errors.push(ConfigError::at(e.line, format!("[constants] {err}")));
        }
    }
}

/// Parses a standalone constants file (only `[constants]` is allowed).
pub fn parse_constants_file(path: &Path) -> Result<ConstantsTable, ConfigErrors> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigErrors {
        source: source.clone(),
        errors: vec![ConfigError::global(format!("cannot read file: {e}"))],
    })?;
    let mut errors = Vec::new();
    let raw = parse_raw(&text, &mut errors);
    for (name, sec) in &raw {
        if name != "constants" {
            errors.push(ConfigError::at(sec.line, format!("constants file may only contain [constants], found [{name}]")));
        }
    }
    let mut table = ConstantsTable::empty();
    read_constants(&raw, &mut table, &mut errors);
    if errors.is_empty() {
        Ok(table)
    } else {
        Err(ConfigErrors { source, errors })
    }
}

/// Reads and validates a config file. `env_constants` is layered under the
/// file's own `[constants]`.
pub fn parse_config(path: &Path, env_constants: Option<&ConstantsTable>) -> Result<ExperimentConfig, ConfigErrors> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigErrors {
        source: source.clone(),
        errors: vec![ConfigError::global(format!("cannot read file: {e}"))],
    })?;
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_config_str(&text, &label, env_constants).map_err(|errors| ConfigErrors { source, errors })
}

pub fn parse_config_str(
    text: &str,
    default_label: &str,
    env_constants: Option<&ConstantsTable>,
) -> Result<ExperimentConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let raw = parse_raw(text, &mut errors);
    for s in REQUIRED {
        if !raw.contains_key(*s) {
            errors.push(ConfigError::global(format!("missing section [{s}]")));
        }
    }
    let mut r = Reader { raw: &raw, errors: &mut errors };

    let grid = read_grid(&mut r);

    let problem = ProblemConfig {
        beta: r.profile("problem", "beta", "0"),
        source: r.profile("problem", "f.source", "0"),
        linear: r.profile("problem", "f.linear", "0"),
        quadratic: r.f64("problem", "f.quadratic", 0.0),
        cubic: r.f64("problem", "f.cubic", 0.0),
        growth_c: r.f64_opt("problem", "growth_c"),
        gamma: r.f64("problem", "gamma", 2.0),
        q: r.f64("problem", "q", 2.0),
        sigma: r.f64("problem", "sigma", 2.0),
        dissipation: r.profile_opt("problem", "dissipation"),
        initial: r.profile("problem", "initial", "sine 1 1 1 1"),
    };
    if let Some(c) = problem.growth_c {
        r.check("problem", "growth_c", c >= 0.0 && c.is_finite(), "growth_c must be finite and >= 0");
    }
    r.check(
        "problem",
        "gamma",
        (2.0..3.0).contains(&problem.gamma),
        "gamma must lie in [2,3)",
    );
    r.check("problem", "q", problem.q > 1.2 && problem.q <= 2.0, "q must lie in (6/5, 2]");
    r.check(
        "problem",
        "sigma",
        problem.sigma > 1.5 && problem.sigma.is_finite(),
        "sigma must exceed 3/2",
    );

    let dt_def = SemiflowConfig::default();
    let solver = match r.string("time", "solver").as_deref() {
        None | Some("cg") => LinearSolver::Cg,
        Some("direct") => LinearSolver::Direct,
        Some(other) => {
            r.fail("time", "solver", format!("[time] solver: expected `cg` or `direct`, found `{other}`"));
            LinearSolver::Cg
        }
    };
    let time = SemiflowConfig {
        dt: r.f64("time", "dt", dt_def.dt),
        t_end: r.f64("time", "t_end", dt_def.t_end),
        newton_tol: r.f64("time", "newton_tol", dt_def.newton_tol),
        newton_max_iter: r.usize("time", "newton_max_iter", dt_def.newton_max_iter),
        alpha: r.f64("time", "alpha", dt_def.alpha),
        snapshot_stride: r.usize("time", "snapshot_stride", dt_def.snapshot_stride),
        blowup_threshold: r.f64("time", "blowup_threshold", dt_def.blowup_threshold),
        solver,
        ..dt_def
    };
    r.check("time", "dt", time.dt > 0.0 && time.dt.is_finite(), "dt must be positive and finite");
    r.check(
        "time",
        "t_end",
        time.t_end > time.dt && time.t_end.is_finite(),
        format!("t_end must be finite and exceed dt ({})", time.dt),
    );
    r.check("time", "newton_tol", time.newton_tol > 0.0, "newton_tol must be positive");
    r.check("time", "newton_max_iter", time.newton_max_iter > 0, "newton_max_iter must be positive");
    r.check("time", "alpha", time.alpha > 0.0 && time.alpha <= 0.5, "alpha must lie in (0, 1/2]");
    r.check("time", "snapshot_stride", time.snapshot_stride > 0, "snapshot_stride must be positive");
    r.check("time", "blowup_threshold", time.blowup_threshold > 0.0, "blowup_threshold must be positive");

    let sp_def = SpectralConfig::default();
    let method = match r.string("spectral", "method").as_deref() {
        None | Some("iterative") => EigenMethod::Iterative,
        Some("dense-oracle") => EigenMethod::DenseOracle,
        Some(other) => {
            r.fail(
                "spectral",
                "method",
                format!("[spectral] method: expected `iterative` or `dense-oracle`, found `{other}`"),
            );
            EigenMethod::Iterative
        }
    };
    let spectral = SpectralConfig {
        k_eigs: r.usize("spectral", "k_eigs", sp_def.k_eigs),
        method,
        tol: r.f64("spectral", "tol", sp_def.tol),
        max_iter: r.usize("spectral", "max_iter", sp_def.max_iter),
        seed: r.u64("spectral", "seed", sp_def.seed),
    };
    r.check("spectral", "k_eigs", spectral.k_eigs > 0, "k_eigs must be positive");
    r.check("spectral", "tol", spectral.tol > 0.0 && spectral.tol.is_finite(), "tol must be positive");
    r.check("spectral", "max_iter", spectral.max_iter > 0, "max_iter must be positive");
    let clr_q = r.f64_opt("spectral", "clr_q");
    if let Some(q) = clr_q {
        r.check("spectral", "clr_q", q > 1.5 && q.is_finite(), "clr_q must exceed 3/2");
    }
    if let Some(g) = &grid {
        r.check(
            "spectral",
            "k_eigs",
            spectral.k_eigs <= g.dof(),
            format!("k_eigs exceeds the {} grid unknowns", g.dof()),
        );
    }

    let dm_def = DimensionConfig::default();
    let dimension = DimensionConfig {
        d_max: r.usize("dimension", "d_max", dm_def.d_max),
        margin: r.f64("dimension", "margin", dm_def.margin),
        burn_in: r.f64("dimension", "burn_in", dm_def.burn_in),
        reortho_stride: r.usize("dimension", "reortho_stride", dm_def.reortho_stride),
        seed: r.u64("dimension", "seed", dm_def.seed),
    };
    let ensemble = r.usize("dimension", "ensemble", 1);
    let spread = r.f64("dimension", "spread", 0.5);
    r.check("dimension", "d_max", dimension.d_max > 0, "d_max must be positive");
    if let Some(g) = &grid {
        r.check(
            "dimension",
            "d_max",
            dimension.d_max <= g.dof(),
            format!("d_max exceeds the {} grid unknowns", g.dof()),
        );
    }
    r.check("dimension", "margin", dimension.margin >= 0.0, "margin must be nonnegative");
    r.check(
        "dimension",
        "burn_in",
        dimension.burn_in >= 0.0 && dimension.burn_in < time.t_end,
        format!("burn_in must lie in [0, t_end = {})", time.t_end),
    );
    r.check("dimension", "reortho_stride", dimension.reortho_stride > 0, "reortho_stride must be positive");
    r.check("dimension", "ensemble", ensemble > 0, "ensemble must have at least one member");
    r.check("dimension", "spread", spread >= 0.0 && spread.is_finite(), "spread must be finite and >= 0");

    let vo_def = VerifyOptions::default();
    let verify = VerifyOptions {
        samples: r.usize("verify", "samples", vo_def.samples),
        pairs: r.usize("verify", "pairs", vo_def.pairs),
        pair_horizon: r.f64("verify", "pair_horizon", vo_def.pair_horizon),
        seed: vo_def.seed,
        tol: r.f64("verify", "tol", vo_def.tol),
    };
    r.check("verify", "samples", verify.samples > 0, "samples must be positive");
    r.check(
        "verify",
        "pair_horizon",
        verify.pair_horizon > time.dt && verify.pair_horizon.is_finite(),
        format!("pair_horizon must be finite and exceed dt ({})", time.dt),
    );
    r.check("verify", "tol", verify.tol >= 0.0, "tol must be nonnegative");

    let mut formats = Formats {
        csv: true,
        svg: true,
        fields: true,
    };
    if let Some(list) = r.string("output", "formats") {
        formats = Formats {
            csv: false,
            svg: false,
            fields: false,
        };
        for tok in list.split([' ', ',']).filter(|t| !t.is_empty()) {
            match tok {
                "json" => {}
                "csv" => formats.csv = true,
                "svg" => formats.svg = true,
                "fields" => formats.fields = true,
                other => r.fail(
                    "output",
                    "formats",
                    format!("[output] formats: unknown format `{other}` (expected json, csv, svg, fields)"),
                ),
            }
        }
    }
    let output = OutputConfig {
        directory: r.string("output", "directory").unwrap_or_else(|| "out".into()).into(),
        formats,
        label: r.string("output", "label").unwrap_or_else(|| default_label.to_string()),
        snapshots: r.usize("output", "snapshots", 2),
    };

    let mut constants = ConstantsTable::defaults();
    if let Some(env) = env_constants {
        constants.merge(env);
    }
    read_constants(&raw, &mut constants, &mut errors);

    if let Some(g) = &grid {
        if errors.is_empty() {
            if let Err(e) = build_spec(&problem, g) {
                errors.push(ConfigError::global(format!("[problem] {e}")));
            }
        }
    }

    if !errors.is_empty() {
        errors.sort_by_key(|e| e.line.unwrap_or(0));
        return Err(errors);
    }

    let mut canonical = BTreeMap::new();
    for (c, v) in constants.entries() {
        canonical.insert(format!("constants.{c}"), format!("{:?} | {}", v.value, v.provenance));
    }
    for (sname, sec) in &raw {
        if sname == "constants" {
            continue;
        }
        for (k, e) in &sec.entries {
            canonical.insert(format!("{sname}.{k}"), e.value.clone());
        }
    }

    Ok(ExperimentConfig {
        problem,
        grid: grid.expect("grid errors are reported above"),
        time,
        spectral,
        clr_q,
        dimension,
        ensemble,
        spread,
        verify,
        constants,
        output,
        canonical,
    })
}

fn read_grid(r: &mut Reader<'_>) -> Option<Grid> {
    r.raw.get("grid")?;
    let points = match r.string("grid", "points") {
        None => {
            r.errors.push(ConfigError::global("[grid] points is required"));
            return None;
        }
        Some(s) => {
            let v: Option<Vec<usize>> = s.split_whitespace().map(|t| t.parse().ok()).collect();
            match v.as_deref() {
                Some(&[n]) => [n; 3],
                Some(&[a, b, c]) => [a, b, c],
                _ => {
                    r.fail("grid", "points", format!("[grid] points: expected 1 or 3 integers, found `{s}`"));
                    return None;
                }
            }
        }
    };
    let extents = match r.string("grid", "extents") {
        None => [(0.0, 1.0); 3],
        Some(s) => {
            let v: Option<Vec<f64>> = s.split_whitespace().map(|t| t.parse().ok()).collect();
            match v.as_deref() {
                Some(&[x0, x1, y0, y1, z0, z1]) => [(x0, x1), (y0, y1), (z0, z1)],
                _ => {
                    r.fail("grid", "extents", format!("[grid] extents: expected 6 numbers, found `{s}`"));
                    return None;
                }
            }
        }
    };
    match Grid::new(extents, points) {
        Ok(g) => Some(g),
        Err(e) => {
            let key = if r.line("grid", "extents").is_some() { "extents" } else { "points" };
            r.fail("grid", key, format!("[grid] {e}"));
            None
        }
    }
}
