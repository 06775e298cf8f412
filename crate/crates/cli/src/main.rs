//! `psimetric`: generate fixtures, compute distances, test neighbourhood membership,
//! run convergence studies and scan submanifolds.
//!
//! Exit codes: 0 on success (and for members), 1 for non-members, 2 for usage or
//! data errors.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psimetric::geometry::GrassPlane;
use psimetric::manifolds::{
    generate, ingest_mesh, load, load_labeled, parallel_copies, perturb_normal, save, save_labeled, BumpMode,
    CompactRegion, DiscretizedSubmanifold, GeneratorSpec, LabeledSubmanifold,
};
use psimetric::metrics::{gr_w_distance, DistanceReport, GridConfig, DEFAULT_GRID_POINTS};
use psimetric::neighborhoods::{
    in_gs_neighborhood, in_ls_neighborhood, in_ms_neighborhood, in_ss_neighborhood, NeighborhoodSpec,
};
use psimetric::scanning::{scan_metric, scan_section, GridSpec, DEFAULT_RHO};

#[derive(Parser)]
#[command(
    name = "psimetric",
    version,
    about = "Metrics and neighbourhoods on spaces of submanifolds"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Radii in each volume-function grid.
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Truncation radius of the volume functions (default: 1.5 × largest sample norm).
    #[arg(long, global = true)]
    rmax: Option<f64>,
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a fixture manifold to an MFD file.
    Gen(GenArgs),
    /// Print d_H, d_nu and d_psi (or the scan metric) of two manifolds as CSV.
    Dist(DistArgs),
    /// Test whether the second manifold lies in a basic neighbourhood of the first.
    Member(MemberArgs),
    /// Distances and membership along a one-parameter family of perturbations.
    Converge(ConvergeArgs),
    /// Write the scanning section of a manifold on a grid as CSV.
    Scan(ScanArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
}

#[derive(Args)]
struct Output {
    /// Output MFD file.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum GenKind {
    /// Equispaced circle in R^2.
    Circle {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        /// Center as `x,y`.
        #[arg(long, default_value = "0,0", allow_hyphen_values = true)]
        center: String,
        #[command(flatten)]
        out: Output,
    },
    /// Round sphere about the origin.
    Sphere {
        #[arg(long, default_value_t = 3)]
        ambient: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Bounded piece of an affine plane.
    AffinePlane {
        #[arg(long, default_value_t = 2)]
        ambient: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Spanning vectors separated by `;`, e.g. `1,0;0,1` (default: first coordinate axes).
        #[arg(long, allow_hyphen_values = true)]
        frame: Option<String>,
        /// Basepoint as comma-separated coordinates (default: the origin).
        #[arg(long, allow_hyphen_values = true)]
        basepoint: Option<String>,
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Graph of a polynomial map over a disc.
    Graph {
        #[arg(long, default_value_t = 2)]
        ambient: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Coefficient lists separated by `;` (see the library documentation).
        #[arg(long, allow_hyphen_values = true)]
        coefficients: String,
        #[arg(long, default_value_t = 2.0)]
        extent: f64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Torus of revolution in R^3.
    Torus {
        #[arg(long, default_value_t = 2.0)]
        major: f64,
        #[arg(long, default_value_t = 0.5)]
        minor: f64,
        /// Angle grid as `u,v`.
        #[arg(long, default_value = "64,32")]
        counts: String,
        #[command(flatten)]
        out: Output,
    },
    /// The empty manifold.
    Empty {
        #[arg(long)]
        ambient: usize,
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Union of the two constant normal shifts by ±delta.
    ParallelCopies {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        delta: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Normal perturbation, constant or a Gaussian bump.
    Perturb {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        delta: f64,
        /// Bump center; with `--bump-width` the shift is delta·exp(−|x − c|²/w²).
        #[arg(long, requires = "bump_width", allow_hyphen_values = true)]
        bump_center: Option<String>,
        #[arg(long, requires = "bump_center")]
        bump_width: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Polyline or triangle mesh in the PTS/EDG/TRI text format.
    Mesh {
        #[arg(long)]
        input: PathBuf,
        /// 1 reads the EDG section, 2 the TRI section.
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Attach a constant label to every sample.
    Label {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        value: f64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Psi,
    Scan,
}

#[derive(Args)]
struct ScanOptions {
    /// Grid axis `a:b:s`; repeat per axis, or give once for all axes
    /// (default: -1.5:1.5:0.1).
    #[arg(long = "grid", allow_hyphen_values = true)]
    grid: Vec<String>,
    /// Scan radius.
    #[arg(long, default_value_t = DEFAULT_RHO)]
    rho: f64,
}

#[derive(Args)]
struct DistArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Psi)]
    metric: Metric,
    #[command(flatten)]
    scan: ScanOptions,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Gs,
    Ls,
    Ms,
    Ss,
}

#[derive(Args)]
struct RegionOptions {
    /// Center of the ball K as comma-separated coordinates (default: the origin).
    #[arg(long, conflicts_with = "box_axes", allow_hyphen_values = true)]
    center: Option<String>,
    /// Radius of the ball K.
    #[arg(long, conflicts_with = "box_axes", allow_negative_numbers = true)]
    kradius: Option<f64>,
    /// Box K, one `lo:hi` per axis or one for all axes.
    #[arg(long = "box", allow_hyphen_values = true)]
    box_axes: Vec<String>,
}

#[derive(Args)]
struct MemberArgs {
    w: PathBuf,
    w_prime: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    eps: f64,
    /// Label tolerance for `ms` and `ss`.
    #[arg(long)]
    label_eps: Option<f64>,
    #[command(flatten)]
    region: RegionOptions,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Normal,
    ParallelCopies,
    Tilt,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    base: PathBuf,
    /// Comma-separated family parameters.
    #[arg(long)]
    deltas: String,
    /// Neighbourhood size for the membership columns.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[command(flatten)]
    region: RegionOptions,
    #[command(flatten)]
    scan: ScanOptions,
    /// CSV output file (default: standard output).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Log-log plot of the distance columns.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    input: PathBuf,
    #[command(flatten)]
    scan: ScanOptions,
    /// CSV output file.
    #[arg(short, long)]
    output: PathBuf,
}

type CliResult<T> = std::result::Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    match &cli.command {
        Command::Gen(args) => cmd_gen(cli, &args.kind),
        Command::Dist(args) => cmd_dist(cli, args),
        Command::Member(args) => cmd_member(args),
        Command::Converge(args) => cmd_converge(cli, args),
        Command::Scan(args) => cmd_scan(args),
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn read(path: &Path) -> CliResult<DiscretizedSubmanifold> {
    load(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: `{t}`")))
        .collect()
}

fn parse_range(s: &str, parts: usize) -> CliResult<Vec<f64>> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: `{t}` in `{s}`"))
        })
        .collect::<CliResult<_>>()?;
    if v.len() != parts {
        return Err(format!("expected {parts} `:`-separated numbers, got `{s}`"));
    }
    Ok(v)
}

/// One entry per axis, or a single entry repeated on every axis.
fn per_axis<'a>(entries: &'a [String], dim: usize, what: &str) -> CliResult<Vec<&'a str>> {
    match entries.len() {
        1 => Ok(vec![entries[0].as_str(); dim]),
        n if n == dim => Ok(entries.iter().map(String::as_str).collect()),
        n => Err(format!("{n} {what} axes given for R^{dim}")),
    }
}

fn grid_spec(opts: &ScanOptions, dim: usize) -> CliResult<GridSpec> {
    if opts.grid.is_empty() {
        return Ok(GridSpec::default_for(dim));
    }
    let mut g = GridSpec {
        lo: Vec::new(),
        hi: Vec::new(),
        spacing: Vec::new(),
    };
    for axis in per_axis(&opts.grid, dim, "grid")? {
        let v = parse_range(axis, 3)?;
        g.lo.push(v[0]);
        g.hi.push(v[1]);
        g.spacing.push(v[2]);
    }
    Ok(g)
}

fn region(
    opts: &RegionOptions,
    dim: usize,
    default: impl FnOnce() -> CliResult<CompactRegion>,
) -> CliResult<CompactRegion> {
    if !opts.box_axes.is_empty() {
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for axis in per_axis(&opts.box_axes, dim, "box")? {
            let v = parse_range(axis, 2)?;
            lo.push(v[0]);
            hi.push(v[1]);
        }
        return CompactRegion::boxed(lo, hi).map_err(err);
    }
    match (&opts.center, opts.kradius) {
        (None, None) => default(),
        (_, None) => Err("--center requires --kradius".into()),
        (center, Some(r)) => {
            let c = match center {
                Some(c) => parse_list(c)?,
                None => vec![0.0; dim],
            };
            if c.len() != dim {
                return Err(format!("center has {} coordinates, expected {dim}", c.len()));
            }
            CompactRegion::ball(c, r).map_err(err)
        }
    }
}

fn grid_config(cli: &Cli) -> GridConfig {
    GridConfig {
        points: cli.grid_points,
        r_max: cli.rmax,
    }
}

fn cmd_gen(cli: &Cli, kind: &GenKind) -> CliResult<u8> {
    let (w, labels, out) = match kind {
        GenKind::Circle {
            radius,
            samples,
            center,
            out,
        } => {
            let c = parse_list(center)?;
            let center: [f64; 2] = c.try_into().map_err(|_| "--center needs 2 coordinates".to_string())?;
            let spec = GeneratorSpec::Circle {
                radius: *radius,
                center,
                count: *samples,
            };
            (generate(&spec).map_err(err)?, None, out)
        }
        GenKind::Sphere {
            ambient,
            radius,
            samples,
            out,
        } => {
            let spec = GeneratorSpec::Sphere {
                ambient: *ambient,
                radius: *radius,
                count: *samples,
                seed: cli.seed,
            };
            (generate(&spec).map_err(err)?, None, out)
        }
        GenKind::AffinePlane {
            ambient,
            dim,
            frame,
            basepoint,
            extent,
            samples,
            out,
        } => {
            let plane = match frame {
                None => GrassPlane::coordinate(*ambient, *dim).map_err(err)?,
                Some(f) => {
                    let vectors: Vec<Vec<f64>> = f.split(';').map(parse_list).collect::<CliResult<_>>()?;
                    if vectors.len() != *dim || vectors.iter().any(|v| v.len() != *ambient) {
                        return Err(format!("--frame needs {dim} vectors in R^{ambient}"));
                    }
                    let refs: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
                    GrassPlane::span(&refs).map_err(err)?
                }
            };
            let basepoint = match basepoint {
                Some(b) => parse_list(b)?,
                None => vec![0.0; *ambient],
            };
            let spec = GeneratorSpec::AffinePlane {
                ambient: *ambient,
                basepoint,
                plane,
                extent: *extent,
                count: *samples,
                seed: cli.seed,
            };
            (generate(&spec).map_err(err)?, None, out)
        }
        GenKind::Graph {
            ambient,
            dim,
            coefficients,
            extent,
            samples,
            out,
        } => {
            let spec = GeneratorSpec::GraphOfFunction {
                ambient: *ambient,
                dim: *dim,
                coefficients: coefficients.split(';').map(parse_list).collect::<CliResult<_>>()?,
                extent: *extent,
                count: *samples,
            };
            (generate(&spec).map_err(err)?, None, out)
        }
        GenKind::Torus {
            major,
            minor,
            counts,
            out,
        } => {
            let c = parse_list(counts)?;
            if c.len() != 2 || c.iter().any(|x| x.fract() != 0.0 || *x < 1.0) {
                return Err("--counts needs two positive integers `u,v`".into());
            }
            let spec = GeneratorSpec::Torus {
                major: *major,
                minor: *minor,
                counts: (c[0] as usize, c[1] as usize),
            };
            (generate(&spec).map_err(err)?, None, out)
        }
        GenKind::Empty { ambient, dim, out } => (
            generate(&GeneratorSpec::Empty {
                ambient: *ambient,
                dim: *dim,
            })
            .map_err(err)?,
            None,
            out,
        ),
        GenKind::ParallelCopies { base, delta, out } => {
            (parallel_copies(&read(base)?, *delta).map_err(err)?, None, out)
        }
        GenKind::Perturb {
            base,
            delta,
            bump_center,
            bump_width,
            out,
        } => {
            let mode = match (bump_center, bump_width) {
                (Some(c), Some(w)) => BumpMode::SmoothBump {
                    center: parse_list(c)?,
                    width: *w,
                },
                _ => BumpMode::ConstantShift,
            };
            (perturb_normal(&read(base)?, *delta, &mode).map_err(err)?, None, out)
        }
        GenKind::Mesh { input, dim, out } => (ingest_mesh(input, *dim).map_err(err)?, None, out),
        GenKind::Label { base, value, out } => {
            let w = read(base)?;
            let labels = vec![*value; w.len()];
            (w, Some(labels), out)
        }
    };
    match labels {
        None => save(&w, &out.output).map_err(err)?,
        Some(l) => {
            let lw = LabeledSubmanifold::new(w.clone(), l).map_err(err)?;
            save_labeled(&lw, &out.output).map_err(err)?
        }
    }
    println!("samples {} total_weight {}", w.len(), w.total_weight());
    Ok(0)
}

fn cmd_dist(cli: &Cli, args: &DistArgs) -> CliResult<u8> {
    let (a, b) = (read(&args.a)?, read(&args.b)?);
    match args.metric {
        Metric::Psi => {
            let rep = gr_w_distance(&a, &b, &grid_config(cli)).map_err(err)?;
            println!("{}", DistanceReport::CSV_HEADER);
            println!("{}", rep.csv_row());
        }
        Metric::Scan => {
            let grid = grid_spec(&args.scan, a.ambient_dim())?;
            let d = scan_metric(&a, &b, &grid, args.scan.rho).map_err(err)?;
            println!("scan");
            println!("{d}");
        }
    }
    Ok(0)
}

/// Ball about the origin holding both manifolds with room to spare.
fn enclosing_ball(ws: &[&DiscretizedSubmanifold]) -> CliResult<CompactRegion> {
    let r = ws.iter().map(|w| w.max_norm()).fold(0.0, f64::max);
    CompactRegion::ball(vec![0.0; ws[0].ambient_dim()], (1.5 * r).max(1.0)).map_err(err)
}

fn cmd_member(args: &MemberArgs) -> CliResult<u8> {
    let labeled = matches!(args.kind, Kind::Ms | Kind::Ss);
    let (lw, lwp) = if labeled {
        let a = load_labeled(&args.w).map_err(|e| format!("{}: {e}", args.w.display()))?;
        let b = load_labeled(&args.w_prime).map_err(|e| format!("{}: {e}", args.w_prime.display()))?;
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    let (w, wp) = match (&lw, &lwp) {
        (Some(a), Some(b)) => (a.base().clone(), b.base().clone()),
        _ => (read(&args.w)?, read(&args.w_prime)?),
    };
    let k = region(&args.region, w.ambient_dim(), || enclosing_ball(&[&w, &wp]))?;
    let mut spec = NeighborhoodSpec::new(k, args.eps).map_err(err)?;
    if let Some(t) = args.label_eps {
        spec = spec.with_label_eps(t).map_err(err)?;
    }
    let report = match (args.kind, &lw, &lwp) {
        (Kind::Gs, _, _) => in_gs_neighborhood(&w, &wp, &spec),
        (Kind::Ls, _, _) => in_ls_neighborhood(&w, &wp, &spec),
        (Kind::Ms, Some(a), Some(b)) => in_ms_neighborhood(a, b, &spec),
        (Kind::Ss, Some(a), Some(b)) => in_ss_neighborhood(a, b, &spec),
        _ => unreachable!("labelled kinds load labels"),
    }
    .map_err(err)?;
    print!("{report}");
    println!("member: {}", report.is_member());
    Ok(if report.is_member() { 0 } else { 1 })
}

fn cmd_converge(cli: &Cli, args: &ConvergeArgs) -> CliResult<u8> {
    let base = read(&args.base)?;
    let n = base.ambient_dim();
    let deltas = parse_list(&args.deltas)?;
    let k = region(&args.region, n, || CompactRegion::cube(n, 1.0).map_err(err))?;
    let spec = NeighborhoodSpec::new(k, args.eps).map_err(err)?;
    let grid = grid_spec(&args.scan, n)?;
    let config = grid_config(cli);

    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in &deltas {
        let w = match args.family {
            Family::Normal => perturb_normal(&base, delta, &BumpMode::ConstantShift),
            Family::ParallelCopies => parallel_copies(&base, delta),
            Family::Tilt => {
                if n < 2 {
                    return Err("tilt needs an ambient dimension of at least 2".into());
                }
                let mut shear = nalgebra::DMatrix::identity(n, n);
                shear[(1, 0)] = delta;
                base.linear_image(&shear)
            }
        }
        .map_err(|e| format!("delta {delta}: {e}"))?;
        let rep = gr_w_distance(&base, &w, &config).map_err(err)?;
        let scan = scan_metric(&base, &w, &grid, args.scan.rho).map_err(err)?;
        let gs = in_gs_neighborhood(&base, &w, &spec).map_err(err)?.is_member();
        let ls = in_ls_neighborhood(&base, &w, &spec).map_err(err)?.is_member();
        rows.push((delta, rep, scan, gs, ls));
    }

    let mut csv = String::from("delta,d_H,d_nu,d_psi,scan,gs_member,ls_member\n");
    for (delta, rep, scan, gs, ls) in &rows {
        csv.push_str(&format!(
            "{delta},{},{},{},{scan},{gs},{ls}\n",
            rep.d_h, rep.d_nu, rep.d_psi
        ));
    }
    match &args.output {
        Some(p) => std::fs::write(p, &csv).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{csv}"),
    }
    if let Some(p) = &args.svg {
        let column = |name, f: fn(&DistanceReport, f64) -> f64| svg::Series {
            name,
            points: rows.iter().map(|(d, rep, scan, _, _)| (*d, f(rep, *scan))).collect(),
        };
        let plot = svg::loglog(
            "distance along the family",
            "delta",
            &[
                column("d_H", |r, _| r.d_h),
                column("d_nu", |r, _| r.d_nu),
                column("d_psi", |r, _| r.d_psi),
                column("scan", |_, s| s),
            ],
        );
        std::fs::write(p, plot).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(0)
}

fn cmd_scan(args: &ScanArgs) -> CliResult<u8> {
    let w = read(&args.input)?;
    let grid = grid_spec(&args.scan, w.ambient_dim())?;
    let section = scan_section(&w, &grid, args.scan.rho).map_err(err)?;
    std::fs::write(&args.output, section.to_csv(w.intrinsic_dim()))
        .map_err(|e| format!("{}: {e}", args.output.display()))?;
    let infinite = section.values.iter().filter(|v| v.is_infinite()).count();
    println!("points {} infinite {infinite}", section.grid.len());
    Ok(0)
}
