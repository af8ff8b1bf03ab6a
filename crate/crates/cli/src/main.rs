use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use hyperpbc::geometry::{default_seed, site_positions, write_sites_csv, GammaBasis};
use hyperpbc::junction::{
    assemble_junction, interface_metrics, junction_rays, partition_field, write_partition_csv, JunctionConfig, ModelSpec,
};
use hyperpbc::operators::{adjacency, cyclic_projection, model_hamiltonian, represent_periodic, AlgebraElement};
use hyperpbc::quotient::{QuotientGroup, DEFAULT_ELEMENT_CAP};
use hyperpbc::ring::minimal_polynomial;
use hyperpbc::spectral::{
    detect_gaps, energy_grid, exact_spectrum, idos_curve, idos_mse, ldos, locate_crossing, simplex_loop, spectral_flow,
    DOSCurve, KpmConfig, KpmExpansion, SpectrumResult,
};
use hyperpbc::triangle_group::{ball_enumerate, ring_index, TessellationParams, TriangleGroup};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] hyperpbc::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hyperpbc::Error as E;
        match self {
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Contract(_) => 4,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::InvalidTessellation { .. } | E::InvalidArgument(_) | E::Json(_) => 2,
                E::ResourceCap { .. } | E::DenseCap { .. } => 3,
                E::BoundEstimate(_)
                | E::Eigensolver(_)
                | E::OffSheet { .. }
                | E::OutsideDisk { .. }
                | E::InexactDivision { .. }
                | E::GridMismatch => 4,
                _ => 1,
            },
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hyperpbc", version, about = "Hyperbolic lattices with periodic boundary conditions from finite quotients")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Directory for cached quotient groups.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (0 keeps the default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for stochastic estimators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimal polynomial of 2cos(2 pi / n).
    Minpoly(MinpolyArgs),
    /// Build a finite quotient and report its order and torsion.
    Group(GroupArgs),
    /// Spectrum, density of states and gaps of a model on one or more quotients.
    Spectrum(SpectrumArgs),
    /// Spectral flow along the loop through three models.
    Flow(FlowArgs),
    /// Y-junction on an open ball.
    Junction(JunctionArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct MinpolyArgs {
    /// Index n of 2cos(2 pi / n).
    #[arg(short = 'n')]
    n: Option<u64>,
    /// Use the ring index of the {p,q} tessellation.
    #[arg(long, num_args = 2, value_names = ["P", "Q"])]
    pq: Option<Vec<u32>>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct QuotientArgs {
    /// Polygon size p.
    p: u32,
    /// Vertex degree q.
    q: u32,
    /// Reduction modulus s (the quotient works mod s^k).
    #[arg(long, default_value_t = 2)]
    s: u64,
    /// Element cap for the enumeration.
    #[arg(long, default_value_t = DEFAULT_ELEMENT_CAP)]
    cap: usize,
}

#[derive(Args, Debug)]
struct GroupArgs {
    #[command(flatten)]
    quotient: QuotientArgs,
    /// Quotient level k.
    #[arg(long, default_value_t = 1)]
    k: u32,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Exact,
    Kpm,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    quotient: QuotientArgs,
    /// Quotient levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k: Vec<u32>,
    /// `adjacency`, `h ALPHA KIDX` or `p ALPHA KIDX`.
    #[arg(long, num_args = 1..=3, default_value = "adjacency")]
    model: Vec<String>,
    /// Model parameter epsilon in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    eps: f64,
    /// Dense diagonalization or kernel polynomial method.
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Chebyshev moments for KPM.
    #[arg(long, default_value_t = 500)]
    moments: usize,
    /// Random vectors for the KPM trace estimate.
    #[arg(long, default_value_t = 10)]
    vectors: usize,
    /// Energy grid points.
    #[arg(long, default_value_t = 1024)]
    grid: usize,
    /// Smallest level spacing reported as a gap.
    #[arg(long, default_value_t = 0.05)]
    min_gap: f64,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[command(flatten)]
    quotient: QuotientArgs,
    /// Quotient level k.
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Three `ALPHA:KIDX` pairs, comma separated.
    #[arg(long, default_value = "1:1,2:1,3:1")]
    models: String,
    /// Model parameter epsilon in [0, 1].
    #[arg(long, default_value_t = 0.8)]
    eps: f64,
    /// Samples per edge of the loop.
    #[arg(long, default_value_t = 40)]
    samples: usize,
}

#[derive(Args, Debug)]
struct JunctionArgs {
    /// JSON run description; defaults apply to missing fields.
    config: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct JunctionRun {
    p: u32,
    q: u32,
    radius: usize,
    junction: JunctionConfig,
    /// `(E, dE)` pairs for LDOS maps.
    ldos: Vec<(f64, f64)>,
}

impl Default for JunctionRun {
    fn default() -> Self {
        Self { p: 5, q: 4, radius: 12, junction: JunctionConfig::default(), ldos: vec![(0.0, 0.05)] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum ModelChoice {
    Adjacency,
    H { alpha: usize, kidx: usize },
    P { alpha: usize, kidx: usize },
}

impl ModelChoice {
    fn parse(tokens: &[String]) -> Result<Self> {
        let num = |s: &String| s.parse::<usize>().map_err(|_| CliError::Config(format!("expected an integer, got {s:?}")));
        match tokens {
            [k] if k == "adjacency" => Ok(Self::Adjacency),
            [k, a, b] if k == "h" => Ok(Self::H { alpha: num(a)?, kidx: num(b)? }),
            [k, a, b] if k == "p" => Ok(Self::P { alpha: num(a)?, kidx: num(b)? }),
            _ => Err(CliError::Config(format!("unrecognized model {tokens:?}"))),
        }
    }

    fn alpha(&self) -> Option<usize> {
        match *self {
            Self::Adjacency => None,
            Self::H { alpha, .. } | Self::P { alpha, .. } => Some(alpha),
        }
    }

    fn build(&self, eps: f64, params: TessellationParams) -> Result<AlgebraElement> {
        Ok(match *self {
            Self::Adjacency => adjacency(params),
            Self::H { alpha, kidx } => model_hamiltonian(alpha, kidx, eps, params)?,
            Self::P { alpha, kidx } => cyclic_projection(alpha, kidx, params)?,
        })
    }
}

struct Ctx {
    out: PathBuf,
    cache_dir: Option<PathBuf>,
    seed: u64,
}

impl Ctx {
    fn prepare(&self, config: &impl Serialize) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        fs::write(self.out.join("config.json"), serde_json::to_string_pretty(config)? + "\n")?;
        Ok(())
    }

    fn file(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out.join(name))?))
    }

    fn write_json(&self, name: &str, value: &impl Serialize) -> Result<()> {
        fs::write(self.out.join(name), serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    fn quotient(&self, args: &QuotientArgs, k: u32) -> Result<QuotientGroup> {
        let params = TessellationParams::new(args.p, args.q)?;
        Ok(QuotientGroup::load_or_build(self.cache_dir.as_deref(), params, args.s, k, args.cap)?)
    }
}

fn cmd_minpoly(ctx: &Ctx, args: &MinpolyArgs) -> Result<()> {
    let n = match (&args.n, &args.pq) {
        (Some(n), _) => *n,
        (None, Some(pq)) => ring_index(pq[0], pq[1])?,
        _ => return Err(CliError::Config("give -n or --pq".into())),
    };
    if n == 0 {
        return Err(CliError::Config("n must be positive".into()));
    }
    let psi = minimal_polynomial(n)?;
    let report = serde_json::json!({ "n": n, "degree": psi.degree(), "polynomial": psi.to_string(), "coefficients": psi.to_json() });
    ctx.prepare(&serde_json::json!({ "command": "minpoly", "n": n }))?;
    ctx.write_json("minpoly.json", &report)?;
    println!("{psi}");
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn cmd_group(ctx: &Ctx, args: &GroupArgs) -> Result<()> {
    ctx.prepare(&serde_json::json!({ "command": "group", "quotient": args.quotient, "k": args.k }))?;
    let g = ctx.quotient(&args.quotient, args.k)?;
    let t = g.torsion();
    let report = serde_json::json!({
        "p": args.quotient.p,
        "q": args.quotient.q,
        "s": args.quotient.s,
        "k": args.k,
        "order": g.order(),
        "torsion": { "A": t.a, "B": t.b, "AB": t.ab, "expected": t.expected, "collapsed": t.collapsed() },
    });
    ctx.write_json("group.json", &report)?;
    println!("order {}", g.order());
    println!("torsion orders A = {}, B = {}, AB = {} (expected {:?})", t.a, t.b, t.ab, t.expected);
    if t.collapsed() {
        println!("warning: torsion collapsed in this quotient");
    }
    Ok(())
}

fn cmd_spectrum(ctx: &Ctx, args: &SpectrumArgs) -> Result<()> {
    let model = ModelChoice::parse(&args.model)?;
    if args.k.is_empty() {
        return Err(CliError::Config("at least one k is required".into()));
    }
    let kpm_cfg = KpmConfig { moments: args.moments, random_vectors: args.vectors, seed: ctx.seed, grid_points: args.grid, ..KpmConfig::default() };
    if args.grid == 0 || args.moments < 2 || args.vectors == 0 {
        return Err(CliError::Config("grid, moments and vectors must be positive (moments >= 2)".into()));
    }
    ctx.prepare(&serde_json::json!({
        "command": "spectrum",
        "quotient": args.quotient,
        "k": args.k,
        "model": model,
        "eps": args.eps,
        "method": args.method,
        "kpm": kpm_cfg,
        "min_gap": args.min_gap,
        "seed": ctx.seed,
    }))?;
    let mut idos_curves: Vec<(u32, DOSCurve)> = Vec::new();
    let mut ops = Vec::new();
    for &k in &args.k {
        let g = ctx.quotient(&args.quotient, k)?;
        if let Some(alpha) = model.alpha() {
            if !g.torsion().preserved(alpha) {
                return Err(CliError::Contract(format!("torsion of x_{alpha} collapsed at k = {k}")));
            }
        }
        let h = model.build(args.eps, g.params())?;
        ops.push((k, represent_periodic(&h, &g)));
    }
    // shared grid across levels, from the widest Gershgorin enclosure
    let (lo, hi) = ops.iter().map(|(_, h)| h.gershgorin_bounds()).fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let pad = 0.005 * (hi - lo).max(1e-9);
    let grid = energy_grid(lo - pad, hi + pad, args.grid);
    let mut summary = Vec::new();
    for (k, h) in &ops {
        let params = serde_json::json!({ "p": args.quotient.p, "q": args.quotient.q, "s": args.quotient.s, "k": k, "model": model, "eps": args.eps });
        match args.method {
            Method::Exact => {
                let spec = exact_spectrum(h, false)?;
                write_spectrum(ctx, &format!("spectrum_k{k}.csv"), &spec)?;
                let mut curve = idos_curve(&spec, &grid);
                curve.meta.params = params;
                curve.export(&ctx.out, &format!("idos_k{k}"))?;
                let gaps = detect_gaps(&spec, args.min_gap);
                ctx.write_json(&format!("gaps_k{k}.json"), &gaps)?;
                println!("k = {k}: dim {}, spectrum [{:.6}, {:.6}], {} gap(s) of width >= {}", spec.dim(), spec.min(), spec.max(), gaps.gaps.len(), args.min_gap);
                for gap in &gaps.gaps {
                    println!("  gap ({:.6}, {:.6}) width {:.6} with {} states below", gap.lower, gap.upper, gap.width, gap.states_below);
                }
                summary.push(serde_json::json!({ "k": k, "dim": spec.dim(), "gaps": gaps }));
                idos_curves.push((*k, curve));
            }
            Method::Kpm => {
                let kpm = KpmExpansion::compute(h, &kpm_cfg)?;
                let mut dos = kpm.dos_curve();
                dos.meta.params = params.clone();
                dos.export(&ctx.out, &format!("dos_k{k}"))?;
                let mut curve = kpm.idos_curve(&grid);
                curve.meta.params = params;
                curve.export(&ctx.out, &format!("idos_k{k}"))?;
                println!("k = {k}: dim {}, KPM window [{:.6}, {:.6}]", h.dim(), kpm.window.to_energy(-1.0), kpm.window.to_energy(1.0));
                summary.push(serde_json::json!({ "k": k, "dim": h.dim(), "window": [kpm.window.to_energy(-1.0), kpm.window.to_energy(1.0)] }));
                idos_curves.push((*k, curve));
            }
        }
    }
    if idos_curves.len() > 1 {
        let (kref, reference) = idos_curves.iter().max_by_key(|(k, _)| *k).unwrap();
        let mut rows = String::from("k,reference_k,mse\n");
        for (k, c) in &idos_curves {
            if k != kref {
                let mse = idos_mse(c, reference)?;
                rows += &format!("{k},{kref},{mse:.17e}\n");
                println!("MSE(k = {k} vs k = {kref}) = {mse:.6e}");
            }
        }
        fs::write(ctx.out.join("mse.csv"), rows)?;
    }
    ctx.write_json("summary.json", &summary)?;
    Ok(())
}

fn write_spectrum(ctx: &Ctx, name: &str, spec: &SpectrumResult) -> Result<()> {
    use std::io::Write;
    let mut f = ctx.file(name)?;
    writeln!(f, "index,energy")?;
    for (i, e) in spec.eigenvalues().iter().enumerate() {
        writeln!(f, "{i},{e:.17e}")?;
    }
    Ok(())
}

fn parse_models(text: &str) -> Result<Vec<ModelSpec>> {
    let specs = text
        .split(',')
        .map(|pair| {
            let (a, k) = pair.split_once(':').ok_or_else(|| CliError::Config(format!("expected ALPHA:KIDX, got {pair:?}")))?;
            let num = |s: &str| s.trim().parse::<usize>().map_err(|_| CliError::Config(format!("expected an integer, got {s:?}")));
            Ok(ModelSpec { alpha: num(a)?, kidx: num(k)? })
        })
        .collect::<Result<Vec<_>>>()?;
    if specs.len() != 3 {
        return Err(CliError::Config(format!("flow needs three models, got {}", specs.len())));
    }
    Ok(specs)
}

fn cmd_flow(ctx: &Ctx, args: &FlowArgs) -> Result<()> {
    let specs = parse_models(&args.models)?;
    if args.samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    ctx.prepare(&serde_json::json!({
        "command": "flow",
        "quotient": args.quotient,
        "k": args.k,
        "models": specs,
        "eps": args.eps,
        "samples": args.samples,
    }))?;
    let g = ctx.quotient(&args.quotient, args.k)?;
    for m in &specs {
        if !g.torsion().preserved(m.alpha) {
            return Err(CliError::Contract(format!("torsion of x_{} collapsed", m.alpha)));
        }
    }
    let models = specs
        .iter()
        .map(|m| model_hamiltonian(m.alpha, m.kidx, args.eps, g.params()))
        .collect::<hyperpbc::Result<Vec<_>>>()?;
    let path = simplex_loop(3, args.samples);
    let flow = spectral_flow(&models, &path, &g)?;
    flow.write_csv(ctx.file("flow.csv")?)?;
    let mut crossings = Vec::new();
    for (i, pair) in flow.levels.windows(2).enumerate() {
        let below = |lv: &Vec<f64>| lv.partition_point(|&e| e <= 0.0);
        if below(&pair[0]) != below(&pair[1]) {
            if let Some(c) = locate_crossing(&models, &path[i], &path[i + 1], &g, 0.0, 1e-3)? {
                println!("level crosses E = 0 near lambda = {:?} (|E| = {:.2e})", c.point.weights(), c.distance);
                crossings.push(serde_json::json!({ "segment": i, "lambda": c.point.weights(), "distance": c.distance }));
            }
        }
    }
    println!("{} path points, {} zero crossing(s)", path.len(), crossings.len());
    ctx.write_json("crossings.json", &crossings)?;
    Ok(())
}

fn cmd_junction(ctx: &Ctx, args: &JunctionArgs) -> Result<()> {
    let run: JunctionRun = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
        None => JunctionRun::default(),
    };
    run.junction.validate()?;
    if run.ldos.iter().any(|&(_, de)| !(de > 0.0)) {
        return Err(CliError::Config("LDOS broadenings must be positive".into()));
    }
    let params = TessellationParams::new(run.p, run.q)?;
    let mut resolved = run.clone();
    resolved.junction.phi_y = Some(run.junction.phi(params));
    ctx.prepare(&serde_json::json!({ "command": "junction", "run": resolved }))?;

    let group = TriangleGroup::new(params)?;
    let ball = ball_enumerate(&group, run.radius);
    let basis = GammaBasis::new(params);
    let positions = site_positions(ball.elements(), default_seed(&basis), &basis)?;
    write_sites_csv(&positions, ctx.file("sites.csv")?)?;
    let rays = junction_rays(run.junction.phi(params));
    write_partition_csv(&partition_field(&positions, &rays, run.junction.ell), ctx.file("chi.csv")?)?;
    let h = assemble_junction(&ball, &group, &positions, &run.junction)?;
    h.write_matrix_market(ctx.file("hamiltonian.mtx")?)?;
    let spec = exact_spectrum(&h, true)?;
    write_spectrum(ctx, "spectrum.csv", &spec)?;
    let mut metrics = Vec::new();
    for (j, &(e, de)) in run.ldos.iter().enumerate() {
        use std::io::Write;
        let values = ldos(&spec, e, de)?;
        let mut f = ctx.file(&format!("ldos_{j}.csv"))?;
        writeln!(f, "index,ldos")?;
        for (i, v) in values.iter().enumerate() {
            writeln!(f, "{i},{v:.17e}")?;
        }
        let m = interface_metrics(&spec, &positions, &rays, run.junction.interface_radius, e, de, de)?;
        println!(
            "E = {e}, dE = {de}: {} states within dE, interface/complement LDOS ratio {:.4} (mean per site {:.4} vs {:.4})",
            m.midgap_states,
            m.ratio(),
            m.interface_mean,
            m.bulk_mean
        );
        metrics.push(m);
    }
    println!("{} sites, hermiticity defect {:.1e}", ball.len(), h.hermiticity_error());
    ctx.write_json("metrics.json", &metrics)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    hyperpbc::configure_threads(cli.threads);
    let ctx = Ctx { out: cli.out.clone(), cache_dir: cli.cache_dir.clone(), seed: cli.seed };
    if let Some(dir) = &ctx.cache_dir {
        fs::create_dir_all(dir)?;
    }
    match &cli.command {
        Command::Minpoly(a) => cmd_minpoly(&ctx, a),
        Command::Group(a) => cmd_group(&ctx, a),
        Command::Spectrum(a) => cmd_spectrum(&ctx, a),
        Command::Flow(a) => cmd_flow(&ctx, a),
        Command::Junction(a) => cmd_junction(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn model_choice() {
        assert_eq!(ModelChoice::parse(&strings(&["adjacency"])).unwrap(), ModelChoice::Adjacency);
        assert_eq!(ModelChoice::parse(&strings(&["h", "1", "2"])).unwrap(), ModelChoice::H { alpha: 1, kidx: 2 });
        assert!(ModelChoice::parse(&strings(&["h", "1"])).is_err());
        assert!(ModelChoice::parse(&strings(&["q", "1", "1"])).is_err());
    }

    #[test]
    fn flow_models() {
        assert_eq!(parse_models("1:1,2:3,3:2").unwrap()[1], ModelSpec { alpha: 2, kidx: 3 });
        assert!(parse_models("1:1,2:1").is_err());
        assert!(parse_models("1-1,2:1,3:1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(hyperpbc::Error::DenseCap { dim: 2, cap: 1 }).exit_code(), 3);
        assert_eq!(CliError::Core(hyperpbc::Error::InvalidTessellation { p: 4, q: 4 }).exit_code(), 2);
        assert_eq!(CliError::Contract("x".into()).exit_code(), 4);
    }
}
