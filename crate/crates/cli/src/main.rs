use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracperi::frac1d::frac_perimeter_1d;
use fracperi::frac_perimeter::{frac_perimeter_bp, frac_perimeter_ray, mc_frac_perimeter, pixel_energy};
use fracperi::isoperimetric::{anneal_minimizer, gamma_bracket, minimizer_convergence_experiment};
use fracperi::limits::{
    bv_seminorm_moment, frac_sobolev_seminorm_with_error, limit_s_to_0, limit_s_to_1, lp_norm, moment_perimeter,
    sobolev_limit, DEFAULT_GRID_NEAR_ONE, DEFAULT_GRID_NEAR_ZERO,
};
use fracperi::{AngularRule, AnnealConfig, Error, QuadratureSpec, Region, StepFunction, SymmetricBody, Vec2};

mod output;

use output::{read_json, write_text, Report};

#[derive(Parser, Debug)]
#[command(name = "fracperi", version, about = "Anisotropic fractional perimeters in the plane")]
struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convex body operations.
    #[command(subcommand)]
    Body(BodyCmd),
    /// Fractional and anisotropic perimeters of a region.
    #[command(subcommand)]
    Perim(PerimCmd),
    /// Sweeps in s toward the endpoint limits, written as CSV.
    Sweep(SweepArgs),
    /// Fractional Sobolev seminorm of a step function.
    Sobolev(SobolevArgs),
    /// Isoperimetric constant: bracket, annealing, convergence experiment.
    #[command(subcommand)]
    Gamma(GammaCmd),
}

#[derive(Subcommand, Debug)]
enum BodyCmd {
    /// Moment body, sampled at --m directions.
    Moment(DerivedBodyArgs),
    /// Centroid body, sampled at --m directions.
    Centroid(DerivedBodyArgs),
    /// Polar body.
    Polar {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Area of the body.
    Volume {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Gauge ‖x‖_K.
    Gauge {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        x: Vec2,
    },
    /// Support function h_K(v).
    Support {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        v: Vec2,
    },
}

#[derive(Args, Debug)]
struct DerivedBodyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 720)]
    m: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Bp,
    Ray,
    Mc,
    Pixel,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    #[arg(long, default_value_t = 512)]
    ntheta: usize,
    #[arg(long, default_value_t = 16)]
    offsets: usize,
    #[arg(long, default_value_t = 2.0)]
    grading: f64,
    #[arg(long = "area-refinement", default_value_t = 6)]
    area_refinement: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Angular nodes aligned with edge and kink directions.
    #[arg(long = "kink-aligned")]
    kink_aligned: bool,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec, Error> {
        let q = QuadratureSpec {
            n_theta: self.ntheta,
            offsets_per_segment: self.offsets,
            grading_exponent: self.grading,
            area_refinement: self.area_refinement,
            rel_tol: self.tol,
            seed: self.seed,
            angular: if self.kink_aligned {
                AngularRule::KinkAligned
            } else {
                AngularRule::Trapezoid
            },
        };
        q.validate()?;
        Ok(q)
    }
}

#[derive(Subcommand, Debug)]
enum PerimCmd {
    /// P_s(E, K). Interval regions use the exact 1D formula and ignore --body.
    Frac {
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Bp)]
        method: MethodArg,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Anisotropic perimeter P(E, L); with --moment, P(E, MK) exactly.
    Aniso {
        #[arg(long)]
        region: PathBuf,
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        moment: bool,
    },
    /// Both sides of the projection identity in direction u.
    Variation {
        #[arg(long)]
        region: PathBuf,
        #[arg(long, value_parser = parse_vec2, allow_hyphen_values = true)]
        u: Vec2,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SweepKind {
    S1,
    S0,
    Sobolev,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(value_enum)]
    kind: SweepKind,
    #[arg(long)]
    region: Option<PathBuf>,
    #[arg(long)]
    function: Option<PathBuf>,
    #[arg(long)]
    body: PathBuf,
    /// Comma-separated s values; defaults depend on the sweep.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug)]
struct SobolevArgs {
    #[arg(long)]
    function: PathBuf,
    #[arg(long)]
    body: PathBuf,
    #[arg(long)]
    s: f64,
    /// Exponent of the Lebesgue norm; defaults to 2/(2−s).
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args, Debug, Clone)]
struct AnnealArgs {
    #[arg(long, default_value_t = 48)]
    grid: usize,
    #[arg(long = "half-width")]
    half_width: Option<f64>,
    #[arg(long = "t0", default_value_t = AnnealConfig::default().initial_temperature)]
    t0: f64,
    #[arg(long, default_value_t = AnnealConfig::default().cooling)]
    cooling: f64,
    #[arg(long, default_value_t = AnnealConfig::default().flips_per_epoch)]
    flips: usize,
    #[arg(long, default_value_t = AnnealConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl AnnealArgs {
    fn config(&self, s: f64) -> AnnealConfig {
        AnnealConfig {
            grid: self.grid,
            half_width: self.half_width,
            s,
            initial_temperature: self.t0,
            cooling: self.cooling,
            flips_per_epoch: self.flips,
            epochs: self.epochs,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand, Debug)]
enum GammaCmd {
    /// Lower and upper bounds on γ_s(K).
    Bracket {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        s: f64,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Simulated annealing over pixel sets.
    Anneal {
        #[arg(long)]
        body: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        anneal: AnnealArgs,
    },
    /// Distance of annealed minimizers to the moment body across s.
    Converge {
        #[arg(long)]
        body: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        anneal: AnnealArgs,
    },
}

fn parse_vec2(v: &str) -> Result<Vec2, String> {
    let xs = parse_list(v)?;
    match xs.as_slice() {
        [x, y] => Ok(Vec2::new(*x, *y)),
        _ => Err(format!("expected two comma-separated numbers, got '{v}'")),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
        .collect()
}

fn polygon_of(region: &Region) -> Result<fracperi::PolygonRegion, Error> {
    region.to_polygon()
}

fn run(cli: Cli) -> Result<Report, Error> {
    let mut rep = Report::new(cli.json);
    match cli.command {
        Command::Body(cmd) => match cmd {
            BodyCmd::Moment(a) => {
                let k: SymmetricBody = read_json(&a.input)?;
                emit_body(&mut rep, &k.moment_body(a.m)?, a.out.as_ref())?;
            }
            BodyCmd::Centroid(a) => {
                let k: SymmetricBody = read_json(&a.input)?;
                emit_body(&mut rep, &k.centroid_body(a.m)?, a.out.as_ref())?;
            }
            BodyCmd::Polar { input, out } => {
                let k: SymmetricBody = read_json(&input)?;
                emit_body(&mut rep, &k.polar()?, out.as_ref())?;
            }
            BodyCmd::Volume { input } => {
                let k: SymmetricBody = read_json(&input)?;
                rep.num("volume", k.volume());
            }
            BodyCmd::Gauge { input, x } => {
                let k: SymmetricBody = read_json(&input)?;
                rep.num("gauge", k.gauge(x));
            }
            BodyCmd::Support { input, v } => {
                let k: SymmetricBody = read_json(&input)?;
                rep.num("support", k.support(v));
            }
        },
        Command::Perim(cmd) => perim(&mut rep, cmd)?,
        Command::Sweep(a) => sweep(&mut rep, a)?,
        Command::Sobolev(a) => {
            let f: StepFunction = read_json(&a.function)?;
            let k: SymmetricBody = read_json(&a.body)?;
            let q = a.quad.spec()?;
            let p = a.p.unwrap_or(2.0 / (2.0 - a.s));
            let (value, err) = frac_sobolev_seminorm_with_error(&f, &k, a.s, &q)?;
            rep.num("seminorm", value);
            rep.num("error_estimate", err);
            rep.num("p", p);
            rep.num("lp_norm", lp_norm(&f, p)?);
            rep.num("bv_moment", bv_seminorm_moment(&f, &k));
        }
        Command::Gamma(cmd) => gamma(&mut rep, cmd)?,
    }
    Ok(rep)
}

fn emit_body(rep: &mut Report, k: &SymmetricBody, out: Option<&PathBuf>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(k)? + "\n";
    match out {
        Some(path) => {
            write_text(path, &text)?;
            rep.text("written", &path.display().to_string());
        }
        None => rep.raw(text),
    }
    Ok(())
}

fn perim(rep: &mut Report, cmd: PerimCmd) -> Result<(), Error> {
    match cmd {
        PerimCmd::Frac {
            region,
            body,
            s,
            method,
            samples,
            quad,
        } => {
            let region: Region = read_json(&region)?;
            if let Region::Intervals(iv) = &region {
                rep.num("value", frac_perimeter_1d(iv, s)?);
                rep.num("error_estimate", 0.0);
                rep.text("method", "exact");
                rep.int("nodes", iv.len() as u64);
                return Ok(());
            }
            let body = body.ok_or_else(|| Error::InvalidParameter("--body is required for planar regions".into()))?;
            let k: SymmetricBody = read_json(&body)?;
            let q = quad.spec()?;
            let b = match (method, &region) {
                (MethodArg::Pixel, Region::Pixels(p)) => pixel_energy(p, &k, s)?,
                (MethodArg::Pixel, _) => {
                    return Err(Error::InvalidParameter("--method pixel needs a pixel region".into()));
                }
                (MethodArg::Bp, r) => frac_perimeter_bp(&polygon_of(r)?, &k, s, &q)?,
                (MethodArg::Ray, r) => frac_perimeter_ray(&polygon_of(r)?, &k, s, &q)?,
                (MethodArg::Mc, r) => mc_frac_perimeter(&polygon_of(r)?, &k, s, samples, q.seed)?,
            };
            rep.num("value", b.value);
            rep.num("error_estimate", b.error_estimate);
            rep.text("method", serde_json::to_value(b.method)?.as_str().unwrap_or_default());
            rep.int("nodes", b.nodes as u64);
        }
        PerimCmd::Aniso { region, body, moment } => {
            let e = polygon_of(&read_json(&region)?)?;
            let k: SymmetricBody = read_json(&body)?;
            let v = if moment {
                moment_perimeter(&e, &k)
            } else {
                e.anisotropic_perimeter(&k)
            };
            rep.num("perimeter", v);
        }
        PerimCmd::Variation { region, u } => {
            let e = polygon_of(&read_json(&region)?)?;
            if u.norm() == 0.0 || !u.is_finite() {
                return Err(Error::InvalidParameter("direction must be nonzero".into()));
            }
            let (lhs, rhs) = e.directional_variation(u.normalized());
            rep.num("boundary_side", lhs);
            rep.num("projection_side", rhs);
        }
    }
    Ok(())
}

fn sweep(rep: &mut Report, a: SweepArgs) -> Result<(), Error> {
    let k: SymmetricBody = read_json(&a.body)?;
    let q = a.quad.spec()?;
    let need_region = || -> Result<fracperi::PolygonRegion, Error> {
        let path = a
            .region
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("--region is required".into()))?;
        polygon_of(&read_json(path)?)
    };
    let (res, limit_s) = match a.kind {
        SweepKind::S1 => {
            let grid = a.grid.clone().unwrap_or(DEFAULT_GRID_NEAR_ONE.to_vec());
            (limit_s_to_1(&need_region()?, &k, &grid, &q)?, 1.0)
        }
        SweepKind::S0 => {
            let grid = a.grid.clone().unwrap_or(DEFAULT_GRID_NEAR_ZERO.to_vec());
            (limit_s_to_0(&need_region()?, &k, &grid, &q)?, 0.0)
        }
        SweepKind::Sobolev => {
            let path = a
                .function
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("--function is required".into()))?;
            let f: StepFunction = read_json(path)?;
            let grid = a.grid.clone().unwrap_or(DEFAULT_GRID_NEAR_ONE.to_vec());
            (sobolev_limit(&f, &k, &grid, &q)?, 1.0)
        }
    };
    let csv = output::sweep_csv(&res, limit_s);
    match &a.out {
        Some(path) => {
            write_text(path, &csv)?;
            rep.text("written", &path.display().to_string());
        }
        None if !rep.is_json() => rep.raw(csv),
        None => {}
    }
    rep.num("limit", res.limit);
    rep.num("target", res.target);
    rep.num("rel_gap", res.rel_gap);
    Ok(())
}

fn gamma(rep: &mut Report, cmd: GammaCmd) -> Result<(), Error> {
    match cmd {
        GammaCmd::Bracket { body, s, quad } => {
            let k: SymmetricBody = read_json(&body)?;
            let b = gamma_bracket(&k, s, &quad.spec()?)?;
            rep.num("lower", b.lower);
            rep.num("upper", b.upper);
            rep.num("c1", b.c1);
            rep.num("c2", b.c2);
            rep.num("disc_ratio", b.disc_ratio);
            for w in &b.witnesses {
                rep.num(&format!("witness.{}", w.name), w.ratio);
            }
        }
        GammaCmd::Anneal {
            body,
            s,
            out,
            trace,
            anneal,
        } => {
            let k: SymmetricBody = read_json(&body)?;
            let res = anneal_minimizer(&k, &anneal.config(s))?;
            if let Some(path) = &out {
                let text = serde_json::to_string_pretty(&Region::Pixels(res.best.clone()))? + "\n";
                write_text(path, &text)?;
            }
            if let Some(path) = &trace {
                write_text(path, &res.trace_csv())?;
            }
            rep.num("ratio", res.ratio);
            rep.num("initial_ratio", res.initial_ratio);
            rep.int("cells", res.best.count() as u64);
            rep.text("trace_hash", &format!("{:016x}", res.trace_hash()));
        }
        GammaCmd::Converge { body, s, out, anneal } => {
            let k: SymmetricBody = read_json(&body)?;
            let table = minimizer_convergence_experiment(&k, &s, &anneal.config(s.first().copied().unwrap_or(0.9)))?;
            let csv = output::convergence_csv(&table);
            match &out {
                Some(path) => {
                    write_text(path, &csv)?;
                    rep.text("written", &path.display().to_string());
                }
                None if !rep.is_json() => rep.raw(csv),
                None => {}
            }
            for r in &table.rows {
                rep.num(&format!("distance@{}", r.s), r.distance);
            }
            rep.text("passes", if table.passes { "true" } else { "false" });
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("FRACPERI_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("FRACPERI_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::InvalidParameter("FRACPERI_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistent(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|_| run(cli));
    match result {
        Ok(rep) => {
            print!("{}", rep.render());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Inconsistent("bracket".into())), 3);
        assert_eq!(exit_code(&Error::InvalidParameter("s".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 2);
    }

    #[test]
    fn vector_arguments() {
        assert_eq!(parse_vec2("1,-2").unwrap(), Vec2::new(1.0, -2.0));
        assert!(parse_vec2("1").is_err());
        assert!(parse_vec2("a,b").is_err());
    }

    #[test]
    fn argument_definitions_are_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
