//! `calkin`: batch analyses of composition operators with linear-fractional
//! and rational symbols.
//!
//! Every command prints one JSON report on standard output. Exit codes:
//! 0 success, 1 parse error, 2 verdict-level error, 3 indeterminate.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use calkin_core::boundary::{angular_derivative, find_contact_points};
use calkin_core::calkin::{
    build_relation_space, compact_difference_check, connectedness_check, contact_sets, cor58_lower_bounds,
    difference_bounds, first_order_lower_bound_with, osculating_decomposition, rational_strings, relation_basis,
    sum_decomposition_check, Combination, RelationEngine,
};
use calkin_core::clark::{clark_radial_probe, essential_norm_composition, fibers, singular_clark, weighted_essential_bounds};
use calkin_core::numerics::{
    compactness_probe, curve_points, finite_section, kernel_lowerbound_estimate, operator_norm_estimate,
    path_lipschitz_probe, singular_tail, CurveDepth, DEFAULT_PROBE_RADII,
};
use calkin_core::selfmap::{map_from_value, map_to_value, number_from_value, parse_json, validate_self_map, Verdict};
use calkin_core::{Error, Mode, Number, SelfMap, SpaceSpec};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SCHEMA: &str = "calkin-report/1";

#[derive(Parser, Debug)]
#[command(name = "calkin", version, about = "Compactness and essential norms of combinations of composition operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Arithmetic for map data: exact keeps Gaussian rationals, float converts to doubles.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Seed for randomized probe points.
    #[arg(long, global = true, default_value_t = 20_240_601)]
    seed: u64,
    /// Directory for CSV sidecars.
    #[arg(long, global = true)]
    emit_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a map sends the disk into itself.
    Validate {
        #[arg(long)]
        map: PathBuf,
    },
    /// Contact points, boundary data, Clark atoms and essential norm of one map.
    Analyze {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Number of random interior points for the Clark residual probe.
        #[arg(long, default_value_t = 4)]
        probes: usize,
    },
    /// Exact compactness verdict for a combination.
    Compact {
        #[arg(long)]
        comb: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Dimension of the span of the cosets of the given operators.
    Dim {
        #[arg(long)]
        maps: PathBuf,
    },
    /// Rational basis of the coefficient vectors giving compact combinations.
    Relations {
        #[arg(long)]
        maps: PathBuf,
    },
    /// Essential norm of a single composition operator, optionally weighted.
    Enorm {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// JSON list of [zeta, w(zeta)] pairs.
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Bounds for the essential norm of a difference on the Hardy space.
    Diffbounds {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Osculating linear-fractional maps at every contact point.
    Osculate {
        #[arg(long)]
        map: PathBuf,
    },
    /// Whether two operators lie in the same component.
    Connect {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
    },
    /// Heuristic numerical corroboration of a compactness verdict.
    Probe {
        #[arg(long)]
        comb: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        /// Finite-section size.
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Aperture parameter of the approach curves.
        #[arg(long, default_value_t = 1e4)]
        curve_m: f64,
    },
    /// Lipschitz ratios of finite sections along the straight path between two maps.
    Path {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        psi: PathBuf,
        /// Finite-section sizes.
        #[arg(long, value_delimiter = ',', default_value = "256,512,1024")]
        n: Vec<usize>,
        /// Number of partition intervals of [0, 1].
        #[arg(long, default_value_t = 4)]
        steps: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Analyze { .. } => "analyze",
            Command::Compact { .. } => "compact",
            Command::Dim { .. } => "dim",
            Command::Relations { .. } => "relations",
            Command::Enorm { .. } => "enorm",
            Command::Diffbounds { .. } => "diffbounds",
            Command::Osculate { .. } => "osculate",
            Command::Connect { .. } => "connect",
            Command::Probe { .. } => "probe",
            Command::Path { .. } => "path",
        }
    }
}

/// A failed run: the error plus any partial report worth printing.
struct Failure {
    error: Error,
    extra: Value,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Failure {
        Failure { error, extra: Value::Null }
    }
}

type Outcome = Result<Value, Failure>;

fn exit_code(e: &Error) -> u8 {
    if e.is_parse() {
        1
    } else if e.is_indeterminate() {
        3
    } else {
        2
    }
}

fn error_value(e: &Error) -> Value {
    let mut v = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::NotSelfMap { witness, modulus } => {
            v["witness"] = json!(witness);
            v["modulus"] = json!(modulus);
        }
        Error::ParseAt { line, column, .. } => {
            v["line"] = json!(line);
            v["column"] = json!(column);
        }
        _ => {}
    }
    v
}

struct Ctx {
    mode: Mode,
    seed: u64,
    csv_dir: Option<PathBuf>,
}

impl Ctx {
    fn adapt(&self, m: SelfMap) -> SelfMap {
        match self.mode {
            Mode::Exact => m,
            Mode::Float => m.to_float(),
        }
    }

    fn adapt_number(&self, x: Number) -> Number {
        match self.mode {
            Mode::Exact => x,
            Mode::Float => x.to_float(),
        }
    }

    fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Option<String>, Error> {
        let Some(dir) = &self.csv_dir else {
            return Ok(None);
        };
        let io = |e: &dyn std::fmt::Display| Error::InvalidArgument(format!("cannot write {name}: {e}"));
        fs::create_dir_all(dir).map_err(|e| io(&e))?;
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&e))?;
        w.write_record(header).map_err(|e| io(&e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io(&e))?;
        }
        w.flush().map_err(|e| io(&e))?;
        Ok(Some(path.display().to_string()))
    }
}

fn read_json(path: &Path) -> Result<Value, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text)
}

fn load_map(ctx: &Ctx, path: &Path) -> Result<SelfMap, Error> {
    Ok(ctx.adapt(map_from_value(&read_json(path)?)?))
}

/// A JSON list of maps, or an object with a `maps` list.
fn load_maps(ctx: &Ctx, path: &Path) -> Result<Vec<SelfMap>, Error> {
    let v = read_json(path)?;
    let list = match &v {
        Value::Array(a) => a,
        Value::Object(o) => o
            .get("maps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::MalformedMap("expected a list of maps or {\"maps\": [...]}".into()))?,
        _ => return Err(Error::MalformedMap("expected a list of maps".into())),
    };
    list.iter().map(|m| Ok(ctx.adapt(map_from_value(m)?))).collect()
}

/// `{"maps": [...], "coeffs": [...], "beta": 1}`.
fn load_comb(ctx: &Ctx, path: &Path, beta: Option<f64>) -> Result<Combination, Error> {
    let v = read_json(path)?;
    let maps = load_maps(ctx, path)?;
    let coeffs = v
        .get("coeffs")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MalformedMap("missing \"coeffs\" list".into()))?
        .iter()
        .map(|c| Ok(ctx.adapt_number(number_from_value(c)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let file_beta = match v.get("beta") {
        None => 1.0,
        Some(b) => b.as_f64().ok_or_else(|| Error::MalformedMap("\"beta\" must be a number".into()))?,
    };
    Combination::new(maps, coeffs, SpaceSpec::new(beta.unwrap_or(file_beta))?)
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn validate(ctx: &Ctx, map: &Path) -> Outcome {
    let m = load_map(ctx, map)?;
    let rep = validate_self_map(&m)?;
    let v = json!({ "map": map_to_value(&m), "validation": to_value(&rep) });
    if rep.verdict == Verdict::Indeterminate {
        return Err(Failure {
            error: Error::Indeterminate(rep.note.clone().unwrap_or_else(|| "borderline boundary modulus".into())),
            extra: v,
        });
    }
    Ok(v)
}

fn analyze(ctx: &Ctx, map: &Path, beta: f64, probes: usize) -> Outcome {
    let m = load_map(ctx, map)?;
    let space = SpaceSpec::new(beta)?;
    let cs = find_contact_points(&m)?;
    let mut points = Vec::new();
    for p in &cs.points {
        let ad = angular_derivative(&m, &p.zeta)?;
        points.push(json!({
            "zeta": to_value(&p.zeta),
            "order": p.order,
            "data": to_value(&p.data),
            "halfplane_derivatives": to_value(&p.halfplane.u_derivs),
            "angular_derivative_modulus": to_value(p.derivative_modulus()),
            "radial_quotient": ad.radial_quotient,
            "radial_agrees": ad.agrees,
        }));
    }
    let enorm = essential_norm_composition(&m, space)?;
    let mut clark = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::new();
    for (alpha, _) in fibers(&cs)? {
        let measure = singular_clark(&m, &alpha)?;
        let mut residuals = Vec::new();
        for _ in 0..probes {
            let r = 0.9 * rng.gen::<f64>().sqrt();
            let z = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
            let probe = clark_radial_probe(&m, &alpha, z)?;
            rows.push(vec![
                format!("{}", z.re),
                format!("{}", z.im),
                alpha.to_string(),
                format!("{:e}", probe.residual),
            ]);
            residuals.push(to_value(&probe));
        }
        clark.push(json!({ "alpha": to_value(&alpha), "atoms": to_value(&measure.atoms), "probes": residuals }));
    }
    let csv = ctx.write_csv("clark_residuals.csv", &["z_re", "z_im", "alpha", "residual"], &rows)?;
    Ok(json!({
        "map": map_to_value(&m),
        "beta": beta,
        "class": to_value(&cs.map_class),
        "contact_points": points,
        "essential_norm": to_value(&enorm),
        "clark": clark,
        "seed": ctx.seed,
        "csv": csv,
    }))
}

fn compact(ctx: &Ctx, comb: &Path, beta: Option<f64>) -> Outcome {
    let c = load_comb(ctx, comb, beta)?;
    let engine = RelationEngine::new(&c.maps)?;
    let verdict = engine.decide(&c.coeffs)?;
    let space = engine.relation_space();
    Ok(json!({
        "beta": c.space.beta,
        "compact": verdict.compact,
        "mode": verdict.mode,
        "groups": to_value(&engine.group_sums(&c.coeffs)),
        "violated_groups": to_value(&verdict.violated_groups),
        "first_order_violations": to_value(&verdict.first_order_violations),
        "kernel_basis": to_value(&space.basis_of_kernel),
    }))
}

fn dim(ctx: &Ctx, maps: &Path) -> Outcome {
    let maps = load_maps(ctx, maps)?;
    let rs = build_relation_space(&maps)?;
    Ok(json!({
        "n": rs.n,
        "dimension": rs.dim_m(),
        "kernel_dimension": rs.dim_kernel(),
        "mode": rs.mode,
        "generators": rs.generators,
    }))
}

fn relations(ctx: &Ctx, maps: &Path) -> Outcome {
    let maps = load_maps(ctx, maps)?;
    let basis = relation_basis(&maps)?;
    Ok(json!({
        "n": maps.len(),
        "basis": basis.iter().map(|v| rational_strings(v)).collect::<Vec<_>>(),
        "mode": "exact",
    }))
}

fn enorm(ctx: &Ctx, map: &Path, beta: f64, weights: Option<&Path>) -> Outcome {
    let m = load_map(ctx, map)?;
    let e = essential_norm_composition(&m, SpaceSpec::new(beta)?)?;
    let mut v = json!({ "map": map_to_value(&m), "essential_norm": to_value(&e) });
    if let Some(path) = weights {
        let list = read_json(path)?;
        let pairs = list
            .as_array()
            .ok_or_else(|| Error::MalformedMap("weights must be a list of [zeta, w] pairs".into()))?
            .iter()
            .map(|p| match p.as_array().map(Vec::as_slice) {
                Some([z, w]) => Ok((number_from_value(z)?, number_from_value(w)?)),
                _ => Err(Error::MalformedMap("each weight must be a [zeta, w] pair".into())),
            })
            .collect::<Result<Vec<_>, Error>>()?;
        v["weighted"] = to_value(&weighted_essential_bounds(&m, &pairs)?);
    }
    Ok(v)
}

fn diffbounds(ctx: &Ctx, phi: &Path, psi: &Path) -> Outcome {
    let (f, g) = (load_map(ctx, phi)?, load_map(ctx, psi)?);
    match difference_bounds(&f, &g, SpaceSpec::hardy()) {
        Ok(b) => Ok(json!({
            "bounds": to_value(&b),
            "note": "essential norm squared lies in [lower, B * upper_quantity] for an unspecified absolute constant B",
        })),
        Err(e @ Error::HypothesesNotMet(_)) => {
            // point the caller at the mismatch bounds instead
            let mut zetas: Vec<Number> = Vec::new();
            for m in [&f, &g] {
                for p in find_contact_points(m)?.points {
                    if !zetas.contains(&p.zeta) {
                        zetas.push(p.zeta);
                    }
                }
            }
            let mut alt = Vec::new();
            for z in &zetas {
                let lb = cor58_lower_bounds(&f, &g, z, SpaceSpec::hardy())?;
                alt.push(json!({ "zeta": to_value(z), "lower_bound": to_value(&lb) }));
            }
            Err(Failure { error: e, extra: json!({ "mismatch_lower_bounds": alt }) })
        }
        Err(e) => Err(e.into()),
    }
}

fn osculate(ctx: &Ctx, map: &Path) -> Outcome {
    let m = load_map(ctx, map)?;
    let parts = osculating_decomposition(&m)?;
    let maps: Vec<SelfMap> = parts.iter().map(|p| SelfMap::Lft(p.lft.clone())).collect();
    let check = sum_decomposition_check(&m, &maps)?;
    Ok(json!({
        "map": map_to_value(&m),
        "parts": parts.iter().zip(&maps).map(|(p, l)| json!({ "zeta": to_value(&p.zeta), "lft": map_to_value(l) })).collect::<Vec<_>>(),
        "sum_is_compact_perturbation": check.holds,
        "violations": check.violations,
    }))
}

fn connect(ctx: &Ctx, phi: &Path, psi: &Path) -> Outcome {
    let (f, g) = (load_map(ctx, phi)?, load_map(ctx, psi)?);
    Ok(json!({
        "connected": connectedness_check(&f, &g)?,
        "compact_difference": compact_difference_check(&f, &g)?,
    }))
}

fn probe(ctx: &Ctx, comb: &Path, beta: Option<f64>, n: usize, curve_m: f64) -> Outcome {
    let c = load_comb(ctx, comb, beta)?;
    let exact = RelationEngine::new(&c.maps)?.decide(&c.coeffs)?;
    let grid = compactness_probe(&c, &DEFAULT_PROBE_RADII, 4096)?;
    let sets = contact_sets(&c.maps)?;
    let mut zetas: Vec<Number> = Vec::new();
    for cs in &sets {
        for p in &cs.points {
            if !zetas.iter().any(|z| (z.to_c64() - p.zeta.to_c64()).norm() < 1e-9) {
                zetas.push(p.zeta.clone());
            }
        }
    }
    let mut curves = Vec::new();
    let mut rows = Vec::new();
    for z in &zetas {
        let curve = curve_points(z, 1, curve_m, 61, (1e-2, 1e-8), CurveDepth::Chord)?;
        let est = kernel_lowerbound_estimate(&c, &curve)?;
        let lower = first_order_lower_bound_with(&sets, &c.coeffs, c.space, z)?;
        for (d, v) in &est.samples {
            rows.push(vec![z.to_string(), format!("{d:e}"), format!("{v:.15e}")]);
        }
        curves.push(json!({
            "zeta": to_value(z),
            "first_order_lower_bound": to_value(&lower),
            "kernel_estimate": est.estimate,
            "spread": est.spread,
            "stabilized": est.stabilized,
        }));
    }
    let fs = finite_section(&c, n)?;
    let skip = (n as f64).sqrt().ceil() as usize;
    let tail = singular_tail(&fs, skip)?;
    let norm = operator_norm_estimate(&fs);
    let csv_kernel = ctx.write_csv("kernel_estimates.csv", &["zeta", "depth", "estimate"], &rows)?;
    let csv_tail = ctx.write_csv("singular_tail.csv", &["n", "skip", "sigma"], &[vec![n.to_string(), skip.to_string(), format!("{tail:.15e}")]])?;
    Ok(json!({
        "beta": c.space.beta,
        "exact_verdict": { "compact": exact.compact, "mode": exact.mode },
        "heuristic": {
            "label": "HEURISTIC: numerical corroboration only",
            "grid": to_value(&grid),
            "curves": curves,
            "curve_m": curve_m,
            "finite_section": { "n": n, "skip": skip, "singular_tail": tail, "norm": norm },
        },
        "csv": [csv_kernel, csv_tail],
    }))
}

fn path(ctx: &Ctx, phi: &Path, psi: &Path, ladder: &[usize], steps: usize) -> Outcome {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()).into());
    }
    let (f, g) = (load_map(ctx, phi)?, load_map(ctx, psi)?);
    let partition: Vec<BigRational> =
        (0..=steps).map(|i| BigRational::new((i as i64).into(), (steps as i64).into())).collect();
    let probe = path_lipschitz_probe(&f, &g, &partition, ladder)?;
    let rows: Vec<Vec<String>> = probe
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), r.s.to_string(), r.r.to_string(), format!("{:.15e}", r.ratio)])
        .collect();
    let csv = ctx.write_csv("lipschitz.csv", &["n", "s", "r", "ratio"], &rows)?;
    Ok(json!({
        "label": "HEURISTIC: finite-section ratios",
        "partition": partition.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "probe": to_value(&probe),
        "csv": csv,
    }))
}

fn run(cli: &Cli) -> Outcome {
    let ctx = Ctx {
        mode: match cli.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        },
        seed: cli.seed,
        csv_dir: cli.emit_csv.clone(),
    };
    match &cli.command {
        Command::Validate { map } => validate(&ctx, map),
        Command::Analyze { map, beta, probes } => analyze(&ctx, map, *beta, *probes),
        Command::Compact { comb, beta } => compact(&ctx, comb, *beta),
        Command::Dim { maps } => dim(&ctx, maps),
        Command::Relations { maps } => relations(&ctx, maps),
        Command::Enorm { map, beta, weights } => enorm(&ctx, map, *beta, weights.as_deref()),
        Command::Diffbounds { phi, psi } => diffbounds(&ctx, phi, psi),
        Command::Osculate { map } => osculate(&ctx, map),
        Command::Connect { phi, psi } => connect(&ctx, phi, psi),
        Command::Probe { comb, beta, n, curve_m } => probe(&ctx, comb, *beta, *n, *curve_m),
        Command::Path { phi, psi, n, steps } => path(&ctx, phi, psi, n, *steps),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CALKIN_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // a second initialization only happens in tests; ignoring it is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let mut report = json!({ "schema": SCHEMA, "command": cli.command.name() });
    let code = match run(&cli) {
        Ok(Value::Object(body)) => {
            report.as_object_mut().expect("object").extend(body);
            0
        }
        Ok(other) => {
            report["result"] = other;
            0
        }
        Err(Failure { error, extra }) => {
            eprintln!("calkin: {error}");
            report["error"] = error_value(&error);
            if let Value::Object(body) = extra {
                report.as_object_mut().expect("object").extend(body);
            }
            exit_code(&error)
        }
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    // a closed pipe downstream is not our failure
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code)
}
