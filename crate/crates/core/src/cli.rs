//! The `geoball` command line.
//!
//! Settings resolve as: explicit flag, then `SPECTRAL_GREEN_GRID` (grid size
//! only), then the `--config` file, then the built-in default. Output is JSON
//! (sorted keys, floats at 12 significant digits) or CSV with a header row.
//! Exit codes: 0 success, 2 bad flags / input / domain, 3 numerics that did not
//! converge.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::bounds::{self, BoundsInput};
use crate::eigensolve::{
    assemble_spectrum, l_spectrum_euclid, radial_spectrum, EigenPair, SolveConfig,
};
use crate::error::{Error, Result};
use crate::green::{EuclidKernelL, GreenKernel, RadialGreenKernel};
use crate::model::{self, BallGeometry, Table, WarpingFunction};
use crate::momentum;
use crate::quadrature::{RadialGrid, DEFAULT_GRID};
use crate::series::{self, Multiplicity};

/// Environment variable overriding the default grid size.
pub const GRID_ENV: &str = "SPECTRAL_GREEN_GRID";

#[derive(Debug, Parser)]
#[command(
    name = "geoball",
    version,
    about = "Spectra of rotationally invariant geodesic balls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues by iterated-Green power iteration.
    Spectrum(SpectrumArgs),
    /// Spectral series against their closed forms.
    Series(SeriesArgs),
    /// Exit-moment spectrum and the eigenvalue limits it yields.
    Momentum(MomentumArgs),
    /// Bounds on Σ 1/λ² for minimal submanifolds.
    Bounds(BoundsArgs),
    /// Stochastic-completeness diagnostic of the model.
    Complete(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Euclidean,
    Hyperbolic,
    Spherical,
    Cubicexp,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Harmonic,
    Hs,
    Whole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MultiplicityArg {
    Paper,
    Sphere,
    None,
}

impl From<MultiplicityArg> for Multiplicity {
    fn from(m: MultiplicityArg) -> Self {
        match m {
            MultiplicityArg::Paper => Multiplicity::Paper,
            MultiplicityArg::Sphere => Multiplicity::Sphere,
            MultiplicityArg::None => Multiplicity::None,
        }
    }
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Curvature κ of the hyperbolic / spherical families.
    #[arg(long)]
    curvature: Option<f64>,
    /// CSV table `t,h` for `--family custom`.
    #[arg(long)]
    h_table: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    radius: Option<f64>,
    /// Grid intervals (even, >= 64).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum)]
    output: Option<OutputArg>,
    /// key=value file supplying defaults for any long flag.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    count: Option<usize>,
    /// Assemble all ν_l-spectra with l <= lmax (Euclidean only).
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long, value_enum)]
    multiplicity: Option<MultiplicityArg>,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    multiplicity: Option<MultiplicityArg>,
    #[arg(long)]
    lmax: Option<usize>,
    #[arg(long)]
    imax: Option<usize>,
}

#[derive(Debug, Args)]
struct MomentumArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    k_max: Option<usize>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    volume: Option<f64>,
    #[arg(long)]
    ends: Option<f64>,
}

const CONFIG_KEYS: &[&str] = &[
    "family",
    "curvature",
    "h-table",
    "dim",
    "radius",
    "grid",
    "tol",
    "max-iter",
    "output",
    "l",
    "count",
    "lmax",
    "imax",
    "mode",
    "multiplicity",
    "k-max",
    "volume",
    "ends",
];

/// Parsed `key=value` config file.
#[derive(Debug, Default)]
struct ConfigFile(BTreeMap<String, String>);

impl ConfigFile {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Input(format!("{}:{}: expected key=value", path.display(), n + 1))
            })?;
            let k = k.trim().replace('_', "-");
            if !CONFIG_KEYS.contains(&k.as_str()) {
                return Err(Error::Input(format!(
                    "{}:{}: unknown key `{k}`",
                    path.display(),
                    n + 1
                )));
            }
            map.insert(k, v.trim().to_string());
        }
        Ok(Self(map))
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Input(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn choice<T: ValueEnum>(&self, key: &str) -> Result<Option<T>> {
        self.0
            .get(key)
            .map(|v| {
                T::from_str(v, true)
                    .map_err(|_| Error::Input(format!("config key `{key}`: invalid value `{v}`")))
            })
            .transpose()
    }
}

/// Fully resolved settings shared by every subcommand.
#[derive(Debug, Clone)]
struct Shared {
    family: FamilyArg,
    curvature: f64,
    h_table: Option<PathBuf>,
    dim: Option<usize>,
    radius: Option<f64>,
    solve: SolveConfig,
    output: OutputArg,
}

fn resolve_shared(c: &CommonArgs, file: &ConfigFile, env_grid: Option<String>) -> Result<Shared> {
    let env_grid = match env_grid {
        Some(s) => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Input(format!("{GRID_ENV}: cannot parse `{s}`")))?,
        ),
        None => None,
    };
    let grid = c
        .grid
        .or(env_grid)
        .or(file.parse("grid")?)
        .unwrap_or(DEFAULT_GRID);
    let defaults = SolveConfig::default();
    let solve = SolveConfig {
        tol: c.tol.or(file.parse("tol")?).unwrap_or(defaults.tol),
        max_iter: c
            .max_iter
            .or(file.parse("max-iter")?)
            .unwrap_or(defaults.max_iter),
        grid,
        reproject_every: defaults.reproject_every,
    };
    solve.validate()?;
    if !grid.is_multiple_of(2) || grid < crate::quadrature::MIN_GRID {
        return Err(Error::Domain(format!(
            "grid must be even and at least {}, got {grid}",
            crate::quadrature::MIN_GRID
        )));
    }
    Ok(Shared {
        family: c
            .family
            .or(file.choice("family")?)
            .unwrap_or(FamilyArg::Euclidean),
        curvature: c.curvature.or(file.parse("curvature")?).unwrap_or(1.0),
        h_table: c.h_table.clone().or(file.parse("h-table")?),
        dim: c.dim.or(file.parse("dim")?),
        radius: c.radius.or(file.parse("radius")?),
        solve,
        output: c
            .output
            .or(file.choice("output")?)
            .unwrap_or(OutputArg::Json),
    })
}

impl Shared {
    fn warping(&self) -> Result<WarpingFunction> {
        match self.family {
            FamilyArg::Euclidean => Ok(WarpingFunction::euclidean()),
            FamilyArg::Hyperbolic => WarpingFunction::hyperbolic(self.curvature),
            FamilyArg::Spherical => WarpingFunction::spherical(self.curvature),
            FamilyArg::Cubicexp => Ok(WarpingFunction::cubic_exp()),
            FamilyArg::Custom => {
                let path = self
                    .h_table
                    .as_ref()
                    .ok_or_else(|| Error::Input("--family custom requires --h-table".into()))?;
                Ok(WarpingFunction::tabulated(Table::from_csv_path(path)?))
            }
        }
    }

    fn dim(&self) -> Result<usize> {
        self.dim.ok_or_else(|| Error::Input("missing --dim".into()))
    }

    fn radius(&self) -> Result<f64> {
        self.radius
            .ok_or_else(|| Error::Input("missing --radius".into()))
    }

    fn geometry(&self) -> Result<BallGeometry> {
        BallGeometry::new(self.dim()?, self.radius()?, self.warping()?)
    }

    fn config_json(&self) -> Value {
        let family = self
            .family
            .to_possible_value()
            .map(|v| v.get_name().to_string());
        json!({
            "family": family,
            "curvature": self.curvature,
            "h_table": self.h_table.as_ref().map(|p| p.display().to_string()),
            "dim": self.dim,
            "radius": self.radius,
            "grid": self.solve.grid,
            "tol": self.solve.tol,
            "max_iter": self.solve.max_iter,
            "reproject_every": self.solve.reproject_every,
        })
    }
}

/// Everything a subcommand produces before formatting.
struct Report {
    command: &'static str,
    config: Value,
    results: Value,
    warnings: Vec<String>,
    header: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    unconverged: bool,
}

impl Report {
    fn new(command: &'static str, shared: &Shared) -> Self {
        Self {
            command,
            config: shared.config_json(),
            results: Value::Null,
            warnings: Vec::new(),
            header: Vec::new(),
            rows: Vec::new(),
            unconverged: false,
        }
    }

    fn set_config(&mut self, key: &str, value: Value) {
        if let Value::Object(map) = &mut self.config {
            map.insert(key.to_string(), value);
        }
    }
}

/// `%.12g`: twelve significant digits, reparsed so JSON prints it canonically.
fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap());
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap());
            if x != 0.0 && !(1e-4..1e12).contains(&x.abs()) {
                format!("{x:e}")
            } else {
                format!("{x}")
            }
        }
        other => other.to_string(),
    }
}

/// Finite floats pass through; infinities become `null` in JSON.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn pair_json(p: &EigenPair, i: usize) -> Value {
    json!({
        "i": i,
        "lambda": p.lambda,
        "residual": num(p.residual),
        "iterations": p.iterations,
        "converged": p.converged,
    })
}

fn cmd_spectrum(a: &SpectrumArgs, file: &ConfigFile, shared: Shared) -> Result<Report> {
    let l = a.l.or(file.parse("l")?).unwrap_or(0);
    let count = a.count.or(file.parse("count")?).unwrap_or(5);
    let lmax = a.lmax.or(file.parse("lmax")?);
    let mult: Multiplicity = a
        .multiplicity
        .or(file.choice("multiplicity")?)
        .unwrap_or(MultiplicityArg::Paper)
        .into();
    if count == 0 {
        return Err(Error::Domain("--count must be at least 1".into()));
    }
    let geom = shared.geometry()?;
    let mut rep = Report::new("spectrum", &shared);
    rep.set_config("count", json!(count));

    if let Some(lmax) = lmax {
        if !geom.warping().is_euclidean() {
            return Err(Error::Domain("--lmax needs --family euclidean".into()));
        }
        rep.set_config("lmax", json!(lmax));
        rep.set_config("multiplicity", json!(mult));
        let s = assemble_spectrum(geom.dim(), geom.radius(), lmax, count, mult, &shared.solve)?;
        rep.unconverged = s.entries.iter().any(|e| !e.converged);
        rep.header = vec!["l", "i", "lambda", "multiplicity", "converged"];
        rep.rows = s
            .entries
            .iter()
            .map(|e| {
                vec![
                    json!(e.l),
                    json!(e.i),
                    json!(e.lambda),
                    json!(e.multiplicity),
                    json!(e.converged),
                ]
            })
            .collect();
        if s.tail_l.is_infinite() {
            rep.warnings
                .push("Σ δ/λ² diverges for this dimension and multiplicity".into());
        }
        rep.results = json!({
            "entries": s.entries,
            "tail_i": num(s.tail_i),
            "tail_l": num(s.tail_l),
        });
        return Ok(rep);
    }

    rep.set_config("l", json!(l));
    let pairs = if l == 0 {
        radial_spectrum(&geom, count, &shared.solve)?
    } else if geom.warping().is_euclidean() {
        l_spectrum_euclid(geom.dim(), geom.radius(), l, count, &shared.solve)?
    } else {
        return Err(Error::Domain(
            "ν_l-spectra with l >= 1 are only available on Euclidean balls".into(),
        ));
    };
    rep.unconverged = pairs.iter().any(|p| !p.converged);
    let mut items = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        let mut item = pair_json(p, k + 1);
        let mut bound = Value::Null;
        if geom.warping().is_euclidean() {
            let b = series::lower_bound_cor22(geom.dim(), geom.radius(), l, k + 1)?;
            if p.lambda < b {
                rep.warnings.push(format!(
                    "λ_{{{l},{}}} = {} is below the lower bound {b}",
                    k + 1,
                    p.lambda
                ));
            }
            bound = json!(b);
            item["lower_bound"] = bound.clone();
        }
        rep.rows.push(vec![
            json!(l),
            json!(k + 1),
            json!(p.lambda),
            num(p.residual),
            json!(p.iterations),
            json!(p.converged),
            bound,
        ]);
        items.push(item);
    }
    rep.header = vec![
        "l",
        "i",
        "lambda",
        "residual",
        "iterations",
        "converged",
        "lower_bound",
    ];
    rep.results = json!({
        "l": l,
        "eigenvalues": pairs.iter().map(|p| p.lambda).collect::<Vec<_>>(),
        "pairs": items,
    });
    Ok(rep)
}

fn cmd_series(a: &SeriesArgs, file: &ConfigFile, shared: Shared) -> Result<Report> {
    let mode = a.mode.or(file.choice("mode")?).unwrap_or(ModeArg::Harmonic);
    let mut rep = Report::new("series", &shared);
    rep.set_config("mode", json!(mode.to_possible_value().unwrap().get_name()));
    match mode {
        ModeArg::Harmonic => {
            let count = a.imax.or(file.parse("imax")?).unwrap_or(10);
            rep.set_config("imax", json!(count));
            let geom = shared.geometry()?;
            let s = series::radial_harmonic_identity(&geom, count, &shared.solve)?;
            rep.header = vec!["closed_form", "partial_sum", "terms_used", "gap"];
            rep.rows = vec![vec![
                json!(s.closed_form),
                json!(s.partial_sum),
                json!(s.terms_used),
                json!(s.gap()),
            ]];
            rep.results = json!({
                "closed_form": s.closed_form,
                "partial_sum": s.partial_sum,
                "terms_used": s.terms_used,
                "gap": s.gap(),
            });
        }
        ModeArg::Hs => {
            let geom = shared.geometry()?;
            let grid = RadialGrid::new(geom.clone(), shared.solve.grid)?;
            let (m, r) = (geom.dim(), geom.radius());
            let mut items = Vec::new();
            if geom.warping().is_euclidean() {
                let lmax = a.lmax.or(file.parse("lmax")?).unwrap_or(3);
                rep.set_config("lmax", json!(lmax));
                for l in 0..=lmax {
                    let k = EuclidKernelL::new(l, m, r)?;
                    items.push(json!({
                        "l": l,
                        "trace": k.trace(&grid)?,
                        "trace_closed_form": series::euclid_sum_l(m, r, l, 1)?,
                        "hs_norm_sq": k.hs_norm_sq(&grid)?,
                        "hs_closed_form": series::euclid_sum_l(m, r, l, 2)?,
                    }));
                }
            } else {
                let k = RadialGreenKernel::new(geom.clone());
                items.push(json!({
                    "l": 0,
                    "trace": k.trace(&grid)?,
                    "trace_closed_form": geom.vs_integral(),
                    "hs_norm_sq": k.hs_norm_sq(&grid)?,
                    "hs_closed_form": Value::Null,
                }));
            }
            rep.header = vec![
                "l",
                "trace",
                "trace_closed_form",
                "hs_norm_sq",
                "hs_closed_form",
            ];
            rep.rows = items
                .iter()
                .map(|it| rep.header.iter().map(|h| it[*h].clone()).collect())
                .collect();
            rep.results = json!({ "kernels": items });
        }
        ModeArg::Whole => {
            let lmax = a.lmax.or(file.parse("lmax")?).unwrap_or(200);
            let mult: Multiplicity = a
                .multiplicity
                .or(file.choice("multiplicity")?)
                .unwrap_or(MultiplicityArg::Paper)
                .into();
            rep.set_config("lmax", json!(lmax));
            rep.set_config("multiplicity", json!(mult));
            let s = series::whole_spectrum_sum_sq(shared.dim()?, shared.radius()?, mult, lmax)?;
            if s.diverges {
                rep.warnings.push(
                    "no closed form: with multiplicity the series diverges for m >= 4".into(),
                );
            }
            rep.header = vec![
                "closed_form",
                "partial_sum",
                "terms_used",
                "tail_bound",
                "diverges",
            ];
            rep.rows = vec![vec![
                json!(s.closed_form),
                json!(s.partial_sum),
                json!(s.terms_used),
                num(s.tail_bound),
                json!(s.diverges),
            ]];
            rep.results = json!({
                "closed_form": s.closed_form,
                "partial_sum": s.partial_sum,
                "terms_used": s.terms_used,
                "tail_bound": num(s.tail_bound),
                "diverges": s.diverges,
                "brackets_closed_form": s.brackets_closed_form(),
            });
        }
    }
    Ok(rep)
}

fn cmd_momentum(a: &MomentumArgs, file: &ConfigFile, shared: Shared) -> Result<Report> {
    let k_max = a.k_max.or(file.parse("k-max")?).unwrap_or(40);
    let geom = shared.geometry()?;
    let mut rep = Report::new("momentum", &shared);
    rep.set_config("k_max", json!(k_max));
    let seq = momentum::solve_hierarchy(&geom, k_max, &shared.solve)?;
    let l1 = momentum::lambda1_from_moments(&seq)?;
    let pairs = radial_spectrum(&geom, 2, &shared.solve)?;
    rep.unconverged = pairs.iter().any(|p| !p.converged);
    let l2 = momentum::lambda2_bound_from_moments(&seq, pairs[0].lambda)?;
    if !l2.reliable {
        rep.warnings
            .push("λ₂ estimate unreliable: moment denominator lost to cancellation".into());
    }
    if pairs[1].lambda > l2.lambda2 + 1e-6 {
        rep.warnings.push(format!(
            "computed λ₂ = {} exceeds the moment bound {}",
            pairs[1].lambda, l2.lambda2
        ));
    }
    let ln_b: Vec<f64> = (0..=k_max).map(|k| seq.ln_b(k)).collect();
    rep.header = vec!["k", "ln_b", "ratio"];
    rep.rows = (0..=k_max)
        .map(|k| {
            let ratio = if k == 0 {
                Value::Null
            } else {
                json!(seq.ratio(k))
            };
            vec![json!(k), json!(ln_b[k]), ratio]
        })
        .collect();
    rep.results = json!({
        "torsional_rigidity": seq.torsional_rigidity(),
        "lambda1_moments": l1.lambda1,
        "lambda1_history": l1.history,
        "lambda1_monotone": l1.monotone,
        "lambda1_eigensolve": pairs[0].lambda,
        "lambda2_bound": l2.lambda2,
        "lambda2_k_used": l2.k_used,
        "lambda2_reliable": l2.reliable,
        "lambda2_eigensolve": pairs[1].lambda,
        "ln_b": ln_b,
    });
    Ok(rep)
}

fn cmd_bounds(a: &BoundsArgs, file: &ConfigFile, shared: Shared) -> Result<Report> {
    let input = BoundsInput {
        m: shared.dim()?,
        r: shared.radius()?,
        vol: a.volume.or(file.parse("volume")?),
        ends: a.ends.or(file.parse("ends")?),
    };
    let mut rep = Report::new("bounds", &shared);
    rep.set_config("volume", json!(input.vol));
    rep.set_config("ends", json!(input.ends));
    let b = bounds::bounds(&input)?;
    rep.warnings.extend(b.warnings.iter().cloned());
    let cly = match input.vol {
        Some(v) => Some(bounds::cly_lower_bound(input.m, v, 1)?),
        None => None,
    };
    rep.header = vec![
        "lower",
        "upper",
        "a_m",
        "b_m",
        "zeta",
        "unit_ball_volume",
        "cly_lambda1",
    ];
    rep.rows = vec![vec![
        json!(b.lower),
        json!(b.upper),
        json!(b.a_m),
        json!(b.b_m),
        json!(b.zeta),
        json!(b.unit_ball_volume),
        json!(cly),
    ]];
    rep.results = json!({
        "lower": b.lower,
        "upper": b.upper,
        "a_m": b.a_m,
        "b_m": b.b_m,
        "zeta": b.zeta,
        "unit_ball_volume": b.unit_ball_volume,
        "cly_lambda1": cly,
    });
    Ok(rep)
}

fn cmd_complete(shared: Shared) -> Result<Report> {
    let warp = shared.warping()?;
    let m = shared.dim()?;
    let mut rep = Report::new("complete", &shared);
    let d = model::stochastic_diagnostic(&warp, m)?;
    rep.warnings
        .push("verdict is a heuristic drawn from finitely many doublings".into());
    let verdict = json!(d.verdict);
    rep.header = vec!["radius", "partial_integral", "increment", "verdict"];
    rep.rows = d
        .radii
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let inc = if j == 0 {
                Value::Null
            } else {
                json!(d.increments[j - 1])
            };
            vec![
                json!(r),
                json!(d.partial_integrals[j]),
                inc,
                verdict.clone(),
            ]
        })
        .collect();
    rep.results = serde_json::to_value(&d).map_err(|e| Error::Consistency(e.to_string()))?;
    Ok(rep)
}

fn render(rep: Report, output: OutputArg, out: &mut dyn Write) -> std::io::Result<()> {
    match output {
        OutputArg::Json => {
            let doc = canonical(json!({
                "command": rep.command,
                "config": rep.config,
                "results": rep.results,
                "warnings": rep.warnings,
            }));
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
        OutputArg::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&rep.header)?;
            for row in &rep.rows {
                w.write_record(row.iter().map(csv_cell))?;
            }
            w.flush()
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Consistency(_) | Error::DegenerateStart(_) => 3,
        _ => 2,
    }
}

fn execute(cli: Cli, env_grid: Option<String>) -> Result<(Report, OutputArg)> {
    let common = match &cli.command {
        Command::Spectrum(a) => &a.common,
        Command::Series(a) => &a.common,
        Command::Momentum(a) => &a.common,
        Command::Bounds(a) => &a.common,
        Command::Complete(c) => c,
    };
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let shared = resolve_shared(common, &file, env_grid)?;
    let output = shared.output;
    let rep = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(a, &file, shared)?,
        Command::Series(a) => cmd_series(a, &file, shared)?,
        Command::Momentum(a) => cmd_momentum(a, &file, shared)?,
        Command::Bounds(a) => cmd_bounds(a, &file, shared)?,
        Command::Complete(_) => cmd_complete(shared)?,
    };
    Ok((rep, output))
}

/// Runs one invocation with an explicit value for `SPECTRAL_GREEN_GRID`.
pub fn run_with_env<I, T>(
    args: I,
    env_grid: Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{first}");
                    2
                }
            };
        }
    };
    match execute(cli, env_grid) {
        Ok((rep, output)) => {
            let unconverged = rep.unconverged;
            if let Err(e) = render(rep, output, out) {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
            if unconverged {
                let _ = writeln!(
                    err,
                    "error: power iteration did not converge within --max-iter"
                );
                3
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs one invocation; `args[0]` is the program name.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with_env(args, std::env::var(GRID_ENV).ok(), out, err)
}
