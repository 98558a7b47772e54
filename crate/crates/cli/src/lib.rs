//! The `capoint` command line.
//!
//! Exit codes: 0 on success, 1 when input fails validation, 2 when a
//! numerical method does not converge on valid input. Diagnostics are a
//! single line on the error stream.

pub mod config;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use capoint::cap1d::{capacity_point, flux, flux_curve};
use capoint::coeffs::{
    random_monotone_spline, stock, CoefficientProfile, ResistanceMap, Source, DEFAULT_TOL,
};
use capoint::expr::Expr;
use capoint::field2d::{
    flux_probe, harmonic_center, open_problem_experiment, principal_eigen2d, Bc,
    RobinSolver,
};
use capoint::geom2d::{build_grid, DomainSpec};
use capoint::sturm::{heat_evolve, kth_eigen, HeatOptions};

pub use config::{load_config, RunConfig};
use output::num;

pub const DEFAULT_SEED: u64 = 42;
const DEFAULT_CURVE_POINTS: usize = 101;
const DEFAULT_LEVELS: usize = 3;
const DEFAULT_COARSE_H: f64 = 1.0 / 32.0;
/// Profile strings naming the unit disk instead of an expression.
const DISK: &str = "disk";

#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Core(capoint::Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<capoint::Error> for Failure {
    fn from(e: capoint::Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "capoint", version, about = "Minimal capacity points and warmest points")]
struct Cli {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity point and flux curve of `(a u')'`.
    Cap1d(Cap1dArgs),
    /// k-th Dirichlet eigenpair and the warmest point.
    Eigen1d(Eigen1dArgs),
    /// `c < m` over a family of increasing coefficients.
    TheoremCheck(TheoremArgs),
    /// Heat flow with cold ends; argmax trajectory.
    Heat1d(HeatArgs),
    /// Robin function values and the harmonic center.
    Robin2d(Robin2dArgs),
    /// Principal eigenpair of a planar domain.
    Eigen2d(Eigen2dArgs),
    /// Flux out of a small pinned disk.
    FluxProbe(FluxArgs),
    /// Grid-refinement comparison of `c_x` and `m_x`.
    Openproblem(OpenArgs),
}

#[derive(Args, Debug)]
struct Cap1dArgs {
    /// Expression in `x`, or a `.csv` table with header `x,a`.
    #[arg(long)]
    coeff: Option<String>,
    /// Points on the flux curve.
    #[arg(long)]
    grid: Option<usize>,
    /// Quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    emit_curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Eigen1dArgs {
    #[arg(long)]
    coeff: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TheoremArgs {
    /// linear (1+kx), exponential (exp(kx)), power ((1+x)^k), constant, or
    /// random (monotone splines; `--params N` gives the count).
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated parameter list.
    #[arg(long, allow_negative_numbers = true)]
    params: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct HeatArgs {
    #[arg(long)]
    coeff: Option<String>,
    #[arg(long)]
    u0: Option<String>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Interior grid nodes.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Robin2dArgs {
    /// Half-width profile `f(x)`, or `disk` for the unit disk.
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    /// Evaluate `v_p(p)` at `p = (X, PY)` instead of sweeping.
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    py: Option<f64>,
    /// Locate the harmonic center (the default when no `--p` is given).
    #[arg(long)]
    sweep: bool,
    /// Candidate values as CSV `x,y,value`.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Eigen2dArgs {
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    bc: Option<Bc>,
    /// Eigenfunction as CSV `x,y,value`.
    #[arg(long)]
    emit: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FluxArgs {
    #[arg(long)]
    f: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    py: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    bc: Option<Bc>,
}

#[derive(Args, Debug)]
struct OpenArgs {
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    bc: Option<Bc>,
    /// Number of levels, halving `h` from `--h`.
    #[arg(long)]
    levels: Option<usize>,
    /// Coarsest spacing.
    #[arg(long)]
    h: Option<f64>,
    /// JSON report.
    #[arg(long)]
    emit: Option<PathBuf>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cap1d(_) => "cap1d",
            Command::Eigen1d(_) => "eigen1d",
            Command::TheoremCheck(_) => "theorem-check",
            Command::Heat1d(_) => "heat1d",
            Command::Robin2d(_) => "robin2d",
            Command::Eigen2d(_) => "eigen2d",
            Command::FluxProbe(_) => "flux-probe",
            Command::Openproblem(_) => "openproblem",
        }
    }

    /// The flags that were given, as a partial config.
    fn flags(&self) -> Outcome<RunConfig> {
        let mut c = RunConfig::default();
        match self {
            Command::Cap1d(a) => {
                c.coeff = a.coeff.clone();
                c.grid = a.grid;
                c.tol = a.tol;
                c.emit_curve = a.emit_curve.clone();
            }
            Command::Eigen1d(a) => {
                c.coeff = a.coeff.clone();
                c.k = a.k;
                c.tol = a.tol;
                c.emit = a.emit.clone();
            }
            Command::TheoremCheck(a) => {
                c.family = a.family.clone();
                c.params = a
                    .params
                    .as_deref()
                    .map(config::parse_list)
                    .transpose()
                    .map_err(Failure::Invalid)?;
                c.tol = a.tol;
                c.emit = a.emit.clone();
            }
            Command::Heat1d(a) => {
                c.coeff = a.coeff.clone();
                c.u0 = a.u0.clone();
                c.tend = a.tend;
                c.dt = a.dt;
                c.n = a.n;
                c.emit = a.emit.clone();
            }
            Command::Robin2d(a) => {
                c.f = a.f.clone();
                c.h = a.h;
                c.p = a.p;
                c.py = a.py;
                c.sweep = a.sweep.then_some(true);
                c.emit = a.emit.clone();
            }
            Command::Eigen2d(a) => {
                c.f = a.f.clone();
                c.h = a.h;
                c.bc = a.bc;
                c.emit = a.emit.clone();
            }
            Command::FluxProbe(a) => {
                c.f = a.f.clone();
                c.p = a.p;
                c.py = a.py;
                c.eps = a.eps;
                c.h = a.h;
                c.bc = a.bc;
            }
            Command::Openproblem(a) => {
                c.f = a.f.clone();
                c.bc = a.bc;
                c.levels = a.levels;
                c.h = a.h;
                c.emit = a.emit.clone();
            }
        }
        Ok(c)
    }
}

/// Runs the CLI on `argv` (program name first), writing results to `out`
/// and diagnostics to `err`. Returns the exit code.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
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
                    let _ = writeln!(err, "capoint: {}", first.trim_start_matches("error: "));
                    1
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "capoint: {f}");
            f.exit_code()
        }
    }
}

pub fn run(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

fn configure_threads() -> Outcome<()> {
    if let Ok(v) = std::env::var("CAPOINT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Failure::Invalid(format!("CAPOINT_THREADS = '{v}' is not a positive integer")))?;
        // a pool built earlier in this process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Outcome<()> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => load_config(path).map_err(Failure::Invalid)?,
        None => RunConfig::default(),
    };
    let mut cfg = cli.command.flags()?.or(file);
    cfg.seed = cli.seed.or(cfg.seed);
    let text = match cli.command.name() {
        "cap1d" => cap1d(&cfg)?,
        "eigen1d" => eigen1d(&cfg)?,
        "theorem-check" => theorem_check(&cfg)?,
        "heat1d" => heat1d(&cfg)?,
        "robin2d" => robin2d(&cfg)?,
        "eigen2d" => eigen2d(&cfg)?,
        "flux-probe" => flux_probe_cmd(&cfg)?,
        _ => openproblem(&cfg)?,
    };
    out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Outcome<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Failure::Invalid(format!("missing required --{flag}")))
}

fn check_range(what: &'static str, value: f64, lo: f64, hi: f64) -> Outcome<f64> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(value)
    } else {
        Err(capoint::Error::OutOfRange { what, value, lo, hi }.into())
    }
}

fn emit(path: &Path, text: &str) -> Outcome<()> {
    output::write_atomic(path, text.as_bytes())
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn profile_of(cfg: &RunConfig) -> Outcome<CoefficientProfile> {
    let src = required(&cfg.coeff, "coeff")?;
    Ok(CoefficientProfile::new(Source::from_arg(src)?)?)
}

fn tol_of(cfg: &RunConfig) -> Outcome<f64> {
    check_range("tol", cfg.tol.unwrap_or(DEFAULT_TOL), 1e-15, 1e-3)
}

fn cap1d(cfg: &RunConfig) -> Outcome<String> {
    let grid = cfg.grid.unwrap_or(DEFAULT_CURVE_POINTS);
    check_range("grid", grid as f64, 16.0, 1e7)?;
    let tol = tol_of(cfg)?;
    let profile = profile_of(cfg)?;
    let rm = ResistanceMap::with_tol(&profile, tol)?;
    let c = capacity_point(&rm)?;
    let curve = flux_curve(&rm, grid)?;
    if let Some(path) = &cfg.emit_curve {
        let rows = curve.s.iter().zip(&curve.flux).map(|(&s, &f)| vec![s, f]);
        emit(path, &output::csv("s,F", rows))?;
    }
    Ok(format!(
        "c = {}\nflux(c) = {}\nflux argmin = {}\ntotal resistance = {}\n",
        num(c),
        num(flux(&rm, c)?),
        num(curve.minimizer),
        num(rm.total())
    ))
}

fn eigen1d(cfg: &RunConfig) -> Outcome<String> {
    let k = cfg.k.unwrap_or(0);
    check_range("k", k as f64, 0.0, 1000.0)?;
    let tol = tol_of(cfg)?;
    let profile = profile_of(cfg)?;
    let rm = ResistanceMap::with_tol(&profile, tol)?;
    let pair = kth_eigen(&rm, k)?;
    if let Some(path) = &cfg.emit {
        let rows = pair.x.iter().zip(&pair.u).map(|(&x, &u)| vec![x, u]);
        emit(path, &output::csv("x,u", rows))?;
    }
    let list = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
    Ok(format!(
        "k = {k}\nlambda = {}\nm = {}\nextrema = {}\nnodes = {}\n",
        num(pair.lambda),
        num(pair.m),
        list(&pair.extrema),
        list(&pair.nodes)
    ))
}

fn theorem_check(cfg: &RunConfig) -> Outcome<String> {
    let family = required(&cfg.family, "family")?.as_str();
    let params = cfg.params.clone().unwrap_or_default();
    let tol = tol_of(cfg)?;
    let profiles: Vec<(String, CoefficientProfile)> = match family {
        "constant" => vec![("1".to_string(), stock::constant())],
        "linear" | "exponential" | "power" => {
            if params.is_empty() {
                return Err(Failure::Invalid(format!("family {family} needs --params")));
            }
            params
                .iter()
                .map(|&k| {
                    let (label, p) = match family {
                        "linear" => (format!("1+{k}*x"), stock::linear(k)),
                        "exponential" => (format!("exp({k}*x)"), stock::exponential(k)),
                        _ => (format!("(1+x)^{k}"), stock::power(k)),
                    };
                    Ok((label, p?))
                })
                .collect::<Outcome<Vec<_>>>()?
        }
        "random" => {
            let count = match params.as_slice() {
                [n] if n.fract() == 0.0 && *n >= 1.0 && *n <= 1e5 => *n as usize,
                _ => {
                    return Err(Failure::Invalid(
                        "family random takes one count, e.g. --params 50".into(),
                    ))
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(DEFAULT_SEED));
            (0..count)
                .map(|i| (format!("spline{i}"), random_monotone_spline(&mut rng)))
                .collect()
        }
        other => {
            return Err(Failure::Invalid(format!(
                "unknown family '{other}' (linear, exponential, power, constant, random)"
            )))
        }
    };
    let rows = profiles
        .par_iter()
        .map(|(label, p)| {
            let rm = ResistanceMap::with_tol(p, tol)?;
            let c = capacity_point(&rm)?;
            let m = kth_eigen(&rm, 0)?.m;
            Ok(format!("{label},{},{},{},{}\n", num(c), num(m), num(m - c), c < m))
        })
        .collect::<Outcome<Vec<String>>>()?;
    let text = format!("profile,c,m,margin,pass\n{}", rows.concat());
    match &cfg.emit {
        Some(path) => {
            emit(path, &text)?;
            Ok(format!("{} profiles written to {}\n", rows.len(), path.display()))
        }
        None => Ok(text),
    }
}

fn heat1d(cfg: &RunConfig) -> Outcome<String> {
    let tend = check_range("tend", *required(&cfg.tend, "tend")?, 0.0, 1e6)?;
    let dt = check_range("dt", *required(&cfg.dt, "dt")?, 1e-12, 1e6)?;
    if tend / dt > 1e7 {
        return Err(Failure::Invalid(format!("tend/dt = {} exceeds 1e7 steps", tend / dt)));
    }
    let n = cfg.n.unwrap_or(HeatOptions::default().n);
    check_range("n", n as f64, 16.0, 1e7)?;
    let profile = profile_of(cfg)?;
    let u0 = Expr::parse(required(&cfg.u0, "u0")?)?;
    let tr = heat_evolve(&profile, &u0, tend, dt, HeatOptions { n })?;
    if let Some(path) = &cfg.emit {
        let rows = (0..tr.len()).map(|i| vec![tr.times[i], tr.argmax[i], tr.max[i]]);
        emit(path, &output::csv("t,argmax,max", rows))?;
    }
    let mut text = format!("steps = {}\nfinal argmax = {}\n", tr.len() - 1, num(tr.final_argmax()));
    if tr.len() >= 4 {
        text.push_str(&format!("decay rate = {}\n", num(tr.decay_rate())));
    }
    Ok(text)
}

fn domain_of(cfg: &RunConfig) -> Outcome<DomainSpec> {
    let f = required(&cfg.f, "f")?;
    if f.trim() == DISK {
        Ok(DomainSpec::unit_disk())
    } else {
        Ok(DomainSpec::profile_str(f)?)
    }
}

fn h_of(cfg: &RunConfig) -> Outcome<f64> {
    check_range("h", *required(&cfg.h, "h")?, 1e-4, 0.5)
}

fn robin2d(cfg: &RunConfig) -> Outcome<String> {
    let spec = domain_of(cfg)?;
    let h = h_of(cfg)?;
    let grid = build_grid(&spec, h)?;
    let sweep = cfg.sweep.unwrap_or(false) || cfg.p.is_none();
    let mut text = String::new();
    if let Some(x) = cfg.p {
        let y = cfg.py.unwrap_or(0.0);
        let v = RobinSolver::new(&grid)?.value(x, y)?;
        text.push_str(&format!("v_p(p) = {}\n", num(v)));
    }
    if sweep {
        let ((cx, cy), profile) = harmonic_center(&grid)?;
        if let Some(path) = &cfg.emit {
            let rows = profile
                .candidates
                .iter()
                .zip(&profile.values)
                .map(|(&(x, y), &v)| vec![x, y, v]);
            emit(path, &output::csv("x,y,value", rows))?;
        }
        text.push_str(&format!(
            "c = ({}, {})\ncandidates = {}\nbest value = {}\n",
            num(cx),
            num(cy),
            profile.candidates.len(),
            num(profile.values[profile.argmax])
        ));
    }
    Ok(text)
}

fn eigen2d(cfg: &RunConfig) -> Outcome<String> {
    let spec = domain_of(cfg)?;
    let h = h_of(cfg)?;
    let bc = cfg.bc.unwrap_or(Bc::Dirichlet);
    let grid = build_grid(&spec, h)?;
    let pair = principal_eigen2d(&grid, bc)?;
    if let Some(path) = &cfg.emit {
        let rows = grid.unknowns.iter().map(|&id| {
            let (x, y) = grid.xy(id);
            vec![x, y, pair.values[id]]
        });
        emit(path, &output::csv("x,y,value", rows))?;
    }
    Ok(format!(
        "lambda = {}\nm = ({}, {})\nresidual = {}\niterations = {}\n",
        num(pair.lambda),
        num(pair.m.0),
        num(pair.m.1),
        num(pair.residual),
        pair.iterations
    ))
}

fn flux_probe_cmd(cfg: &RunConfig) -> Outcome<String> {
    let spec = domain_of(cfg)?;
    let h = h_of(cfg)?;
    let eps = check_range("eps", *required(&cfg.eps, "eps")?, 1e-6, 1.0)?;
    let x = *required(&cfg.p, "p")?;
    let y = cfg.py.unwrap_or(0.0);
    let bc = cfg.bc.unwrap_or(Bc::Dirichlet);
    let grid = build_grid(&spec, h)?;
    let f = flux_probe(&grid, (x, y), eps, bc)?;
    Ok(format!(
        "flux = {}\neffective radius = {}\npinned nodes = {}\ncontours = {},{}\ncontour flux = {},{}\n",
        num(f.flux),
        num(f.effective_radius),
        f.pinned,
        num(f.radii[0]),
        num(f.radii[1]),
        num(f.contour_flux[0]),
        num(f.contour_flux[1])
    ))
}

fn openproblem(cfg: &RunConfig) -> Outcome<String> {
    let spec = domain_of(cfg)?;
    let bc = cfg.bc.unwrap_or(Bc::Dirichlet);
    let levels = cfg.levels.unwrap_or(DEFAULT_LEVELS);
    check_range("levels", levels as f64, 3.0, 8.0)?;
    let h0 = check_range("h", cfg.h.unwrap_or(DEFAULT_COARSE_H), 1e-4, 0.5)?;
    let hs: Vec<f64> = (0..levels).map(|i| h0 / (1u64 << i) as f64).collect();
    let report = open_problem_experiment(&spec, bc, &hs)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
    if let Some(path) = &cfg.emit {
        emit(path, &(json + "\n"))?;
    }
    let mut text = String::new();
    for l in &report.levels {
        text.push_str(&format!(
            "h = {}: c_x = {}, m_x = {}, gap = {}\n",
            num(l.h),
            num(l.c_x),
            num(l.m_x),
            num(l.gap)
        ));
    }
    text.push_str(&format!(
        "extrapolated: c_x = {}, m_x = {}\ndrift = {}\nstatus = {}\n",
        num(report.extrapolated.c_x),
        num(report.extrapolated.m_x),
        num(report.drift),
        report.status.name()
    ));
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        assert_eq!(Failure::Core(capoint::Error::NoCrossing).exit_code(), 2);
        let e = capoint::Error::IterationCap { solver: "cg", iterations: 1, residual: 1.0 };
        assert_eq!(Failure::Core(e).exit_code(), 2);
        assert_eq!(Failure::Core(capoint::Error::Nonpositive { x: 0.0 }).exit_code(), 1);
        assert_eq!(Failure::Invalid("x".into()).exit_code(), 1);
    }

    #[test]
    fn ranges_are_checked_before_work() {
        let cfg = RunConfig {
            coeff: Some("1".into()),
            grid: Some(3),
            ..Default::default()
        };
        assert!(matches!(cap1d(&cfg), Err(Failure::Core(capoint::Error::OutOfRange { .. }))));
        let cfg = RunConfig {
            f: Some("0.5".into()),
            levels: Some(2),
            ..Default::default()
        };
        assert!(openproblem(&cfg).is_err());
    }
}
