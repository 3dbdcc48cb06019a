use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ifsnet::constructor::{
    build_phi_k, build_psi_delta, build_union_indicator, default_delta, default_domain, lift_ifs,
    sharpen, BudgetReport, Convention, IndicatorNet, Layout, RecurrentNet, Target,
};
use ifsnet::geometry::{compute_inverse_bound, load_ifs, verify_nice, BoxDomain, IfsSystem, Mode};
use ifsnet::network::{compose, gadget_ramp, load_net, net_to_string, parse_net, ReluNet};
use ifsnet::oracle::{
    compare_rasters, rasterize_net, rasterize_predicate, self_check, uniform_samples, Band,
    BruteOracle, Raster, SelfCheckReport, ThresholdMode,
};
use ifsnet::Error;

/// Compile iterated function systems into exact ReLU indicator networks.
#[derive(Parser, Debug)]
#[command(name = "ifsnet", version)]
struct Cli {
    /// Worker threads for sampling and rasters (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify that the seed is a nice set for the system.
    Validate {
        file: PathBuf,
        /// Lift to one dimension higher first.
        #[arg(long)]
        lift: bool,
    },
    /// Build the indicator network for the k-th iterate and self-check it.
    Build(BuildArgs),
    /// Evaluate a weight file at points.
    Eval(EvalArgs),
    /// Render iterates from a net or the oracle.
    Raster(RasterArgs),
}

#[derive(Args, Debug, Clone)]
struct NetOptions {
    /// Every block padded to the closed-form size.
    #[arg(long, conflicts_with = "merged")]
    literal: bool,
    /// Shared lanes, no padding.
    #[arg(long)]
    merged: bool,
    /// Ramp width for open systems.
    #[arg(long)]
    delta: Option<f64>,
    /// Sharpen the output with slope parameter t.
    #[arg(long, value_name = "T")]
    sharpen: Option<f64>,
    #[arg(long)]
    lift: bool,
}

impl NetOptions {
    fn layout(&self, default: Layout) -> Layout {
        if self.literal {
            Layout::Literal
        } else if self.merged {
            Layout::Merged
        } else {
            default
        }
    }
}

#[derive(Args, Debug)]
struct BuildArgs {
    file: PathBuf,
    #[arg(short = 'k', long = "k")]
    k: usize,
    #[command(flatten)]
    net: NetOptions,
    #[arg(long, conflicts_with = "recurrent")]
    unrolled: bool,
    /// Write the shared cell plus entry and exit stages instead of the unrolled net.
    #[arg(long)]
    recurrent: bool,
    /// Weight file (default: <input stem>.k<k>.json in the current directory).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Sampling seed for the self-check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct EvalArgs {
    weights: PathBuf,
    /// Comma-separated point; repeat for several.
    #[arg(
        long = "x",
        value_name = "POINT",
        required = true,
        allow_hyphen_values = true
    )]
    points: Vec<String>,
    /// Treat the weight file as a cell with sibling .entry.json and .exit.json files.
    #[arg(long, requires = "k")]
    recurrent: bool,
    #[arg(short = 'k', long = "k")]
    k: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Source {
    Net,
    Oracle,
}

#[derive(Args, Debug)]
struct RasterArgs {
    file: PathBuf,
    /// A level, an inclusive range `a..b`, or a comma list.
    #[arg(short = 'k', long = "k", default_value = "1")]
    k: String,
    #[command(flatten)]
    net: NetOptions,
    #[arg(long, default_value = "256x256")]
    res: String,
    /// `lo..hi[,lo..hi]` (default: the seed's bounding box).
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long, value_enum, default_value_t = Source::Net)]
    source: Source,
    /// Render both sources and report their disagreement.
    #[arg(long)]
    compare: bool,
    /// Output prefix (default: the input stem in the current directory).
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
}

/// Failure carrying its process exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotContractive { .. }
            | Error::SingularMap { .. }
            | Error::ContainmentViolation { .. }
            | Error::SeparationViolation { .. }
            | Error::NonPositiveSeparation { .. } => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(usage(format!("thread pool: {e}"))),
        },
        None => run(cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Validate { file, lift } => run_validate(&file, lift),
        Command::Build(a) => run_build(a),
        Command::Eval(a) => run_eval(a),
        Command::Raster(a) => run_raster(a),
    }
}

fn load_system(path: &Path, lift: bool) -> CliResult<IfsSystem> {
    let sys = load_ifs(path)?;
    Ok(if lift { lift_ifs(&sys)? } else { sys })
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v
        .iter()
        .map(|&x| {
            // adding zero folds -0 into 0
            let x = x + 0.0;
            if x != 0.0 && x.abs() < 1e-4 {
                format!("{x:e}")
            } else {
                format!("{x}")
            }
        })
        .collect();
    format!("[{}]", items.join(", "))
}

fn run_validate(path: &Path, lift: bool) -> CliResult<()> {
    let sys = load_system(path, lift)?;
    let cert = verify_nice(&sys)?;
    let margins: Vec<f64> = cert
        .separation
        .iter()
        .map(|row| row.iter().flatten().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let bounds = (0..sys.num_maps())
        .map(|i| compute_inverse_bound(&sys, i))
        .collect::<Result<Vec<_>, _>>()?;
    println!(
        "mode: {}, J={}, d={}, margins: {}",
        sys.mode().as_str(),
        sys.num_maps(),
        sys.dim(),
        fmt_list(&margins)
    );
    println!("inverse bounds: {}", fmt_list(&bounds));
    let hosts: Vec<String> = cert
        .containment
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let parts: Vec<String> = row.iter().map(|q| (q + 1).to_string()).collect();
            format!("f_{}: [{}]", j + 1, parts.join(", "))
        })
        .collect();
    println!("containment: {}", hosts.join("; "));
    Ok(())
}

/// A built network together with how to check it.
struct Artifact {
    indicator: IndicatorNet,
    recurrent: Option<RecurrentNet>,
    report: Option<BudgetReport>,
    band: Band,
}

fn construct(sys: &IfsSystem, k: usize, opts: &NetOptions, layout: Layout) -> CliResult<Artifact> {
    match sys.mode() {
        Mode::TotallyDisconnected => {
            if opts.delta.is_some() {
                return Err(usage("--delta applies only to open systems"));
            }
            let phi = build_phi_k(sys, k, layout)?;
            let mut rec = phi.recurrent.clone();
            let (indicator, band) = match opts.sharpen {
                Some(t) => {
                    let exit = IndicatorNet {
                        net: rec.exit.clone(),
                        target: Target::Iterate { k },
                        convention: Convention::SignInside,
                    };
                    rec.exit = sharpen(&exit, t)?.net;
                    (
                        sharpen(&phi.indicator, t)?,
                        Band::Outside((4.0 / t).max(1e-6)),
                    )
                }
                None => (phi.indicator.clone(), Band::Final(1e-6)),
            };
            Ok(Artifact {
                indicator,
                recurrent: Some(rec),
                report: Some(phi.report),
                band,
            })
        }
        Mode::JustTouching => {
            if opts.sharpen.is_some() {
                return Err(usage("--sharpen needs a compact system (try --lift)"));
            }
            let delta = opts.delta.unwrap_or_else(|| default_delta(sys));
            let psi = build_psi_delta(sys, k, delta, layout)?;
            let mut rec = psi.phi.recurrent.clone();
            let ramp = gadget_ramp(0.0, delta, &BoxDomain::cube(1, 0.0, 0.0))?;
            rec.exit = compose(&ramp, &rec.exit)?;
            Ok(Artifact {
                indicator: psi.indicator,
                recurrent: Some(rec),
                report: Some(psi.phi.report),
                band: Band::AllLevels(delta),
            })
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ifs".into())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let s = path.to_string_lossy();
    let base = s.strip_suffix(".json").unwrap_or(&s);
    PathBuf::from(format!("{base}{suffix}"))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Serializes, reparses and returns the reparsed net so checks run on what was written.
fn write_net(net: &ReluNet, path: &Path) -> CliResult<ReluNet> {
    let text = net_to_string(net);
    write(path, &text)?;
    Ok(parse_net(&text)?)
}

fn run_build(a: BuildArgs) -> CliResult<()> {
    let sys = load_system(&a.file, a.net.lift)?;
    verify_nice(&sys)?;
    let art = construct(&sys, a.k, &a.net, a.net.layout(Layout::Literal))?;
    let out = a
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.k{}.json", stem(&a.file), a.k)));
    let unit = art.indicator.convention == Convention::UnitInside;
    let inside = move |v: f64| if unit { v >= 0.5 } else { v >= 0.0 };

    let oracle = BruteOracle::new(&sys, a.k)?;
    let points = uniform_samples(art.indicator.net.domain(), a.samples, a.seed);
    let check: SelfCheckReport = if a.recurrent {
        let rec = art
            .recurrent
            .as_ref()
            .expect("every artifact has a recurrent form");
        let cell = write_net(&rec.cell, &out)?;
        let entry = write_net(&rec.entry, &with_suffix(&out, ".entry.json"))?;
        let exit = write_net(&rec.exit, &with_suffix(&out, ".exit.json"))?;
        let written = RecurrentNet {
            entry,
            cell,
            exit,
            k: a.k,
        };
        println!(
            "wrote {} (recurrent cell: width {}, {} params; k = {})",
            out.display(),
            written.cell.width(),
            written.cell.param_count(),
            a.k
        );
        self_check(
            || |x: &[f64]| inside(written.evaluate(x)),
            &oracle,
            &points,
            art.band,
        )
    } else {
        let net = write_net(&art.indicator.net, &out)?;
        println!(
            "wrote {} (width {}, depth {}, params {})",
            out.display(),
            net.width(),
            net.depth(),
            net.param_count()
        );
        self_check(
            || {
                let mut ev = net.evaluator();
                move |x: &[f64]| inside(ev.run(x)[0])
            },
            &oracle,
            &points,
            art.band,
        )
    };

    if let Some(mut report) = art.report {
        let acc = art.indicator.net.accounting();
        report.realized.width = acc.width;
        report.realized.depth = acc.depth;
        report.realized.params = acc.params;
        let path = with_suffix(&out, ".report.json");
        write(&path, &report.to_json())?;
        println!(
            "budget: W0={} L0={} literal width {} depth {}; realized width {} depth {}; recurrent cell params {}",
            report.budget.w0,
            report.budget.l0,
            report.literal.width,
            report.literal.depth,
            report.realized.width,
            report.realized.depth,
            report.recurrent_cell_params
        );
    }
    println!(
        "self-check: {} samples, {} near boundary, {} inside, {} mismatches",
        check.samples, check.skipped_near_boundary, check.inside, check.mismatches
    );
    if check.mismatches > 0 {
        return Err(Failure {
            code: 3,
            message: format!(
                "self-check failed: {} mismatches, first at {:?}",
                check.mismatches,
                check.first_mismatch.unwrap_or_default()
            ),
        });
    }
    Ok(())
}

fn parse_point(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad coordinate {t:?}: {e}")))
        })
        .collect()
}

fn run_eval(a: EvalArgs) -> CliResult<()> {
    let points = a
        .points
        .iter()
        .map(|p| parse_point(p))
        .collect::<CliResult<Vec<_>>>()?;
    let load = |p: &Path| load_net(p).map_err(Failure::from);
    let eval: Box<dyn Fn(&[f64]) -> Vec<f64>> = if a.recurrent {
        let rec = RecurrentNet {
            entry: load(&with_suffix(&a.weights, ".entry.json"))?,
            cell: load(&a.weights)?,
            exit: load(&with_suffix(&a.weights, ".exit.json"))?,
            k: a.k.unwrap_or(1),
        };
        check_dim(rec.entry.input_dim(), &points)?;
        Box::new(move |x| vec![rec.evaluate(x)])
    } else {
        let net = load(&a.weights)?;
        check_dim(net.input_dim(), &points)?;
        Box::new(move |x| net.evaluate(x).expect("dimension checked"))
    };
    for p in &points {
        let v: Vec<String> = eval(p).iter().map(|y| format!("{y}")).collect();
        println!("{}", v.join(" "));
    }
    Ok(())
}

fn check_dim(d: usize, points: &[Vec<f64>]) -> CliResult<()> {
    match points.iter().find(|p| p.len() != d) {
        Some(p) => Err(usage(format!(
            "point {p:?} has dimension {}, net expects {d}",
            p.len()
        ))),
        None => Ok(()),
    }
}

fn parse_levels(s: &str) -> CliResult<Vec<usize>> {
    let bad = |e: std::num::ParseIntError| usage(format!("bad level list {s:?}: {e}"));
    let mut out = Vec::new();
    for item in s.split(',') {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b) = (
                    a.trim().parse::<usize>().map_err(bad)?,
                    b.trim().parse::<usize>().map_err(bad)?,
                );
                if a > b {
                    return Err(usage(format!("empty level range {item:?}")));
                }
                out.extend(a..=b);
            }
            None => out.push(item.trim().parse().map_err(bad)?),
        }
    }
    Ok(out)
}

fn parse_res(s: &str) -> CliResult<(usize, usize)> {
    let parsed = s
        .split_once('x')
        .and_then(|(w, h)| Some((w.parse::<usize>().ok()?, h.parse::<usize>().ok()?)));
    match parsed {
        Some((w, h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(usage(format!(
            "resolution must look like 512x256, got {s:?}"
        ))),
    }
}

/// Parses `lo..hi[,lo..hi]`; axes not given are pinned to the centre of `fallback`.
fn parse_bbox(s: &str, fallback: &BoxDomain) -> CliResult<BoxDomain> {
    let d = fallback.dim();
    let center = fallback.center();
    let (mut lo, mut hi) = (center.clone(), center);
    let axes: Vec<&str> = s.split(',').collect();
    if axes.len() > d {
        return Err(usage(format!(
            "bbox has {} axes, system has {d}",
            axes.len()
        )));
    }
    for (i, ax) in axes.iter().enumerate() {
        let (a, b) = ax
            .split_once("..")
            .ok_or_else(|| usage(format!("bbox axis must look like lo..hi, got {ax:?}")))?;
        lo[i] = a.trim().parse().map_err(|e| usage(format!("bbox: {e}")))?;
        hi[i] = b.trim().parse().map_err(|e| usage(format!("bbox: {e}")))?;
    }
    Ok(BoxDomain::new(lo, hi)?)
}

fn default_bbox(sys: &IfsSystem) -> BoxDomain {
    let b = sys.seed().bounding_box();
    let c = b.center();
    let (mut lo, mut hi) = (b.lo.clone(), b.hi.clone());
    for i in 2..b.dim() {
        lo[i] = c[i];
        hi[i] = c[i];
    }
    BoxDomain { lo, hi }
}

fn save_raster(r: &Raster, prefix: &str) -> CliResult<PathBuf> {
    let (ext, text) = match r.mode {
        ThresholdMode::Sign => ("pbm", r.to_pbm()),
        _ => ("pgm", r.to_pgm()),
    };
    let path = PathBuf::from(format!("{prefix}.{ext}"));
    write(&path, &text)?;
    Ok(path)
}

fn net_raster(
    sys: &IfsSystem,
    k: usize,
    opts: &NetOptions,
    bbox: &BoxDomain,
    w: usize,
    h: usize,
) -> CliResult<Raster> {
    let indicator = if k == 0 {
        build_union_indicator(sys.seed(), &default_domain(sys))?
    } else {
        construct(sys, k, opts, opts.layout(Layout::Merged))?.indicator
    };
    let mode = match indicator.convention {
        Convention::SignInside => ThresholdMode::Sign,
        Convention::UnitInside => ThresholdMode::Unit,
    };
    Ok(rasterize_net(&indicator.net, bbox, w, h, mode)?)
}

fn oracle_raster(
    sys: &IfsSystem,
    k: usize,
    bbox: &BoxDomain,
    w: usize,
    h: usize,
) -> CliResult<Raster> {
    let oracle = BruteOracle::new(sys, k)?;
    Ok(rasterize_predicate(|x| oracle.contains(x), bbox, w, h)?)
}

fn run_raster(a: RasterArgs) -> CliResult<()> {
    let sys = load_system(&a.file, a.net.lift)?;
    let levels = parse_levels(&a.k)?;
    let (w, h) = parse_res(&a.res)?;
    let bbox = match &a.bbox {
        Some(s) => parse_bbox(s, &default_bbox(&sys))?,
        None => default_bbox(&sys),
    };
    let prefix = a
        .output
        .as_ref()
        .map(|p| p.to_string_lossy().into_owned())
        .unwrap_or_else(|| stem(&a.file));
    for k in levels {
        let base = format!("{prefix}.k{k}");
        if a.compare {
            let net = net_raster(&sys, k, &a.net, &bbox, w, h)?;
            let oracle = oracle_raster(&sys, k, &bbox, w, h)?;
            let pn = save_raster(&net, &format!("{base}.net"))?;
            let po = save_raster(&oracle, &format!("{base}.oracle"))?;
            let cmp = compare_rasters(&net, &oracle)?;
            let report = PathBuf::from(format!("{base}.compare.json"));
            write(&report, &ifsnet::json::to_string(&cmp))?;
            println!(
                "k={k}: wrote {} and {}; {} mismatches, agreement {:.6}",
                pn.display(),
                po.display(),
                cmp.mismatches,
                cmp.agreement
            );
        } else {
            let r = match a.source {
                Source::Net => net_raster(&sys, k, &a.net, &bbox, w, h)?,
                Source::Oracle => oracle_raster(&sys, k, &bbox, w, h)?,
            };
            let src = match a.source {
                Source::Net => "net",
                Source::Oracle => "oracle",
            };
            let p = save_raster(&r, &format!("{base}.{src}"))?;
            println!("k={k}: wrote {}", p.display());
        }
    }
    Ok(())
}
