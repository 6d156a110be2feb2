use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use levine_core::continuous::{self, ImaginaryStrategy};
use levine_core::game::{self, BiasedMeasure, HStrategy};
use levine_core::io;
use levine_core::presets::Preset;
use levine_core::pvariant;
use levine_core::rat::{self, Rat};
use levine_core::recursive::{self, RecursivePair};
use levine_core::render::{self, GridSelect, Raster, RenderStrategy};
use levine_core::rng::DEFAULT_SEED;
use levine_core::search::{self, SearchConfig};
use levine_core::verify;

/// Exact computation, search and rendering for the two-player hat game.
#[derive(Parser)]
#[command(name = "levine", version)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct PairArgs {
    /// Strategy JSON file `{"h", "k1", "k2"?}`.
    #[arg(long, conflicts_with = "preset")]
    file: Option<PathBuf>,
    /// fbh, k3, k5 or k5ns.
    #[arg(long)]
    preset: Option<Preset>,
}

impl PairArgs {
    fn load(&self) -> Result<(HStrategy, HStrategy), Failure> {
        match (&self.file, self.preset) {
            (Some(path), _) => Ok(io::load_strategy(path)?),
            (None, Some(p)) => Ok(p.pair()),
            (None, None) => Err(Failure::input("give --file or --preset")),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundsPreset {
    /// Brute force for h <= 3 plus the hill-climbing values at 4 and 5.
    Known,
    /// Also the hill-climbing values for 6..=10.
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum PAction {
    Value,
    Curves,
    Crossover,
}

#[derive(Clone, Copy, ValueEnum)]
enum CAction {
    Pm,
    Mc,
    Response,
}

#[derive(Clone, Copy, ValueEnum)]
enum Imaginary {
    Fbh,
    Product,
    Pow2,
}

#[derive(Clone, Copy, ValueEnum)]
enum RenderKind {
    Finite,
    Recursive,
    Biased,
    Continuous,
}

#[derive(Clone, Copy, ValueEnum)]
enum Image {
    Ppm,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Exact win probability of a pair, optionally under bias --p.
    Winprob {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_parser = io::parse_probability)]
        p: Option<Rat>,
    },
    /// Optimal pair for h <= 3.
    Bruteforce {
        #[arg(long)]
        h: u32,
    },
    /// Seeded random-restart hill climbing.
    Hillclimb {
        #[arg(long)]
        h: u32,
        #[arg(long, default_value_t = 200)]
        restarts: u32,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Stop at the first restart reaching this value.
        #[arg(long, value_parser = rat::parse)]
        target: Option<Rat>,
        /// Sideways moves allowed per restart.
        #[arg(long, default_value_t = 0)]
        plateau: u32,
    },
    /// Best response of B to A's strategy k1.
    Bestresponse {
        #[command(flatten)]
        pair: PairArgs,
    },
    /// Value of a recursive strategy (K3, K5, K5NS or FBH).
    Recursive {
        #[arg(long, default_value = "k5")]
        preset: Preset,
        #[arg(long, value_parser = io::parse_probability)]
        p: Option<Rat>,
    },
    /// Propagated lower bounds on the optimal value.
    Bounds {
        #[arg(long, default_value_t = 13)]
        hmax: u32,
        #[arg(long, value_enum, default_value = "known")]
        preset: BoundsPreset,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Bounds for the biased game.
    Pvariant {
        #[arg(value_enum)]
        action: PAction,
        #[arg(long, value_parser = io::parse_probability)]
        p: Option<Rat>,
        /// Grid size for curves.
        #[arg(long, default_value_t = 100)]
        steps: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// The continuous game.
    Continuous {
        #[arg(value_enum)]
        action: CAction,
        /// Scale factors for pm and the product strategy.
        #[arg(long, value_delimiter = ',', default_value = "4,20,1000")]
        m: Vec<u64>,
        /// Number of players.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value = "fbh")]
        strategy: Imaginary,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Dyadic level of the response profile.
        #[arg(long, default_value_t = 8)]
        level: u32,
        /// Use only the powers of two up to 2^20 as candidate responses.
        #[arg(long)]
        pow2_grid: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Write an image; prints its path and black fraction.
    Render {
        #[arg(value_enum)]
        kind: RenderKind,
        #[command(flatten)]
        pair: PairArgs,
        /// deltaA, deltaB or delta.
        #[arg(long, default_value = "delta")]
        which: GridSelect,
        /// Pixels per tile of a finite grid.
        #[arg(long, default_value_t = 8)]
        tile: usize,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, value_parser = io::parse_probability)]
        p: Option<Rat>,
        #[arg(long, value_enum, default_value = "fbh")]
        strategy: Imaginary,
        #[arg(long, default_value_t = 4)]
        m: u64,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "ppm")]
        format: Image,
    },
    /// Run the acceptance suite.
    Verify {
        /// Run a single criterion.
        #[arg(long)]
        criterion: Option<u32>,
    },
}

/// Exit code 1 for bad input, 2 for internal or verification failures.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<levine_core::Error> for Failure {
    fn from(e: levine_core::Error) -> Self {
        Failure::input(e.to_string())
    }
}

enum Output {
    Json(Value),
    Text(String),
}

fn emit(format: Format, json: Value, csv: impl FnOnce() -> String) -> Output {
    match format {
        Format::Json => Output::Json(json),
        Format::Csv => Output::Text(csv()),
    }
}

fn rat_str(r: &Rat) -> String {
    rat::to_fraction_string(r)
}

fn winprob(pair: &PairArgs, p: Option<Rat>) -> Result<Output, Failure> {
    let (k1, k2) = pair.load()?;
    let value = match &p {
        Some(p) => game::win_prob_biased(&k1, &k2, &BiasedMeasure::new(p.clone())?)?,
        None => game::win_prob(&k1, &k2)?,
    };
    let mut out = io::rat_json(&value);
    out["h"] = json!(k1.h());
    out["p"] = json!(p.as_ref().map(rat_str).unwrap_or_else(|| "1/2".into()));
    Ok(Output::Json(out))
}

fn recursive_cmd(preset: Preset, p: Option<Rat>) -> Result<Output, Failure> {
    let rp = preset.recursive();
    let c = recursive::recursive_coefficients(&rp);
    let value = recursive::recursive_value(&rp);
    let mut out = io::rat_json(&value);
    out["strategy"] = json!(preset.name());
    out["t"] = json!(rp.t());
    out["a"] = json!(rat_str(&c.a));
    out["b"] = json!(rat_str(&c.b));
    out["w_accepted"] = json!(rat_str(&c.w_accepted));
    if let Some(p) = p {
        let v = rp
            .value_fn()
            .eval(&p)
            .ok_or_else(|| Failure::internal("value function has a pole at p"))?;
        out["p"] = json!(rat_str(&p));
        out["value_p"] = json!(rat_str(&v));
        out["value_p_f64"] = json!(rat::to_f64(&v));
    }
    Ok(Output::Json(out))
}

fn bounds(hmax: u32, preset: BoundsPreset, format: Format) -> Result<Output, Failure> {
    let base = match preset {
        BoundsPreset::Known => recursive::known_base(),
        BoundsPreset::Extended => recursive::known_base_extended(),
    };
    let table = recursive::propagate_lower_bounds(&base, &recursive::standard_recurrences(), hmax)?;
    let rows: Vec<Value> = table
        .iter()
        .map(|(h, e)| {
            json!({
                "h": h,
                "value": rat_str(&e.value),
                "value_f64": rat::to_f64(&e.value),
                "provenance": e.provenance.to_string(),
            })
        })
        .collect();
    Ok(emit(format, json!({ "bounds": rows }), || io::bounds_csv(&table)))
}

fn pvariant_cmd(action: PAction, p: Option<Rat>, steps: u32, format: Format) -> Result<Output, Failure> {
    match action {
        PAction::Value => {
            let p = p.ok_or_else(|| Failure::input("value needs --p"))?;
            let eval = |f: levine_core::RationalFn| -> Value {
                f.eval(&p).map(|v| json!(rat_str(&v))).unwrap_or(Value::Null)
            };
            Ok(Output::Json(json!({
                "p": rat_str(&p),
                "u1": eval(pvariant::u1()),
                "u2": eval(pvariant::u2()),
                "u3": eval(pvariant::u3()),
                "k5": rat_str(&pvariant::k5_p_value(&p)?),
                "fbh_infinite": rat_str(&pvariant::fbh_p_infinite(&p)?),
            })))
        }
        PAction::Curves => {
            let rows = pvariant::bound_curves(steps)?;
            let json_rows: Vec<Value> = rows
                .iter()
                .map(|r| json!({ "p": rat::to_f64(&r.p), "u1": r.u1, "u2": r.u2, "u3": r.u3, "k5": r.k5 }))
                .collect();
            Ok(emit(format, json!({ "curves": json_rows }), || io::curves_csv(&rows)))
        }
        PAction::Crossover => {
            let (lo, hi) = pvariant::crossover(&rat::rat(1, 1_000_000))?;
            Ok(Output::Json(json!({
                "lo": rat_str(&lo),
                "hi": rat_str(&hi),
                "lo_f64": rat::to_f64(&lo),
                "hi_f64": rat::to_f64(&hi),
            })))
        }
    }
}

fn imaginary(kind: Imaginary, m: u64, pair: &PairArgs, player: usize) -> Result<ImaginaryStrategy, Failure> {
    Ok(match kind {
        Imaginary::Fbh => ImaginaryStrategy::FirstBlackHat,
        Imaginary::Product => ImaginaryStrategy::ProductScaled { m: m as f64 },
        Imaginary::Pow2 => {
            let (k1, k2) = pair.load()?;
            ImaginaryStrategy::PowerOfTwo(if player == 0 { k1 } else { k2 })
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn continuous_cmd(
    action: CAction,
    ms: &[u64],
    n: usize,
    strategy: Imaginary,
    pair: &PairArgs,
    samples: u64,
    seed: u64,
    level: u32,
    pow2_grid: bool,
    format: Format,
) -> Result<Output, Failure> {
    match action {
        CAction::Pm => {
            let rows = ms
                .iter()
                .map(|&m| Ok((m, continuous::p_m(m)?)))
                .collect::<Result<Vec<_>, Failure>>()?;
            let json_rows: Vec<Value> = rows.iter().map(|(m, v)| json!({ "m": m, "p_m": v })).collect();
            Ok(emit(format, json!({ "p_m": json_rows }), || io::p_m_csv(&rows)))
        }
        CAction::Mc => {
            let m = ms.first().copied().unwrap_or(4);
            let strategies = (0..n)
                .map(|i| imaginary(strategy, m, pair, i))
                .collect::<Result<Vec<_>, _>>()?;
            let r = continuous::mc_win_estimate(&strategies, n, samples, seed)?;
            Ok(Output::Json(json!({
                "n": n,
                "strategy": format!("{strategies:?}"),
                "seed": r.seed,
                "samples": r.samples,
                "estimate": r.estimate,
                "stderr": r.stderr,
            })))
        }
        CAction::Response => {
            let grid = if pow2_grid {
                continuous::power_of_two_grid(20)
            } else {
                continuous::default_u_grid()
            };
            let profile = continuous::fbh_best_response_profile(level, &grid)?;
            let cells: Vec<Value> = profile
                .cells
                .iter()
                .map(|c| json!({ "x_lo": c.x_lo, "x_hi": c.x_hi, "argmax_u": c.best_u, "value": c.value }))
                .collect();
            Ok(emit(
                format,
                json!({ "level": level, "aggregate": profile.aggregate, "cells": cells }),
                || io::response_csv(&profile),
            ))
        }
    }
}

struct RenderArgs<'a> {
    kind: RenderKind,
    pair: &'a PairArgs,
    which: GridSelect,
    tile: usize,
    depth: u32,
    resolution: usize,
    p: Option<Rat>,
    strategy: Imaginary,
    m: u64,
    out: &'a Path,
    format: Image,
}

fn strategy_label(pair: &PairArgs, default: &str) -> String {
    match (&pair.file, pair.preset) {
        (_, Some(p)) => p.name().to_string(),
        (Some(path), None) => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| default.into()),
        (None, None) => default.into(),
    }
}

fn recursive_of(pair: &PairArgs) -> Result<RecursivePair, Failure> {
    match (&pair.file, pair.preset) {
        (None, Some(p)) => Ok(p.recursive()),
        (None, None) => Ok(RecursivePair::first_black_hat()),
        (Some(path), _) => {
            let (k1, k2) = io::load_strategy(path)?;
            Ok(RecursivePair::new(k1, k2, levine_core::SkipRule::Monochromatic)?)
        }
    }
}

fn render_cmd(a: RenderArgs) -> Result<Output, Failure> {
    std::fs::create_dir_all(a.out).map_err(|e| Failure::internal(format!("{}: {e}", a.out.display())))?;
    if !matches!(a.kind, RenderKind::Finite) && matches!(a.format, Image::Svg) {
        return Err(Failure::input("svg output is only available for finite grids"));
    }
    let (raster, label, variant, side): (Raster, String, String, usize) = match a.kind {
        RenderKind::Finite => {
            let (k1, k2) = a.pair.load()?;
            let side = (1usize << k1.h()) * a.tile;
            let label = strategy_label(a.pair, "pair");
            if let Image::Svg = a.format {
                let svg = render::finite_svg(&k1, &k2, a.which, a.tile)?;
                let path = a.out.join(render::output_name(&label, a.which.name(), side, "svg"));
                std::fs::write(&path, svg).map_err(|e| Failure::internal(e.to_string()))?;
                return Ok(Output::Json(json!({
                    "path": path.display().to_string(),
                    "black_fraction": rat::to_f64(&game::win_prob(&k1, &k2)?),
                })));
            }
            let r = render::render_finite(&k1, &k2, a.which, a.tile)?;
            (r, label, a.which.name().to_string(), side)
        }
        RenderKind::Recursive => {
            let rp = recursive_of(a.pair)?;
            let r = render::render_recursive(&rp, a.depth, a.resolution)?;
            let variant = format!("recursive-d{}", a.depth);
            (r, strategy_label(a.pair, "fbh"), variant, a.resolution)
        }
        RenderKind::Biased => {
            let p = a.p.ok_or_else(|| Failure::input("biased render needs --p"))?;
            let strategy = match (&a.pair.file, a.pair.preset) {
                (Some(_), _) => {
                    let (k1, k2) = a.pair.load()?;
                    RenderStrategy::Finite(k1, k2)
                }
                (None, _) => RenderStrategy::Recursive(recursive_of(a.pair)?),
            };
            let r = render::render_biased(&strategy, &p, a.resolution, a.depth)?;
            let variant = format!("biased-{}-{}", p.numer(), p.denom());
            (r, strategy_label(a.pair, "fbh"), variant, a.resolution)
        }
        RenderKind::Continuous => {
            let f1 = imaginary(a.strategy, a.m, a.pair, 0)?;
            let f2 = imaginary(a.strategy, a.m, a.pair, 1)?;
            let r = render::render_continuous(&f1, &f2, a.resolution)?;
            let label = match a.strategy {
                Imaginary::Fbh => "fbh".to_string(),
                Imaginary::Product => format!("m{}", a.m),
                Imaginary::Pow2 => strategy_label(a.pair, "pair"),
            };
            (r, label, "continuous".into(), a.resolution)
        }
    };
    let path = a.out.join(render::output_name(&label, &variant, side, "ppm"));
    raster
        .write_ppm(&path)
        .map_err(|e| Failure::internal(format!("{}: {e}", path.display())))?;
    Ok(Output::Json(json!({
        "path": path.display().to_string(),
        "width": raster.width(),
        "height": raster.height(),
        "black_fraction": raster.black_fraction(),
        "gray_pixels": raster.count(render::Pixel::Gray),
    })))
}

fn verify_cmd(criterion: Option<u32>) -> Result<Output, Failure> {
    let reports = match criterion {
        Some(id) => vec![verify::run(id).ok_or_else(|| Failure::input(format!("no criterion {id}")))?],
        None => verify::run_all(),
    };
    for r in &reports {
        eprintln!("{}", r.line());
    }
    let passed = reports.iter().all(|r| r.passed);
    let rows: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail }))
        .collect();
    let out = json!({ "passed": passed, "criteria": rows });
    if passed {
        Ok(Output::Json(out))
    } else {
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        Err(Failure::internal("acceptance criteria failed"))
    }
}

fn run(cli: Cli) -> Result<Output, Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::internal(e.to_string()))?;
    }
    match cli.command {
        Command::Winprob { pair, p } => winprob(&pair, p),
        Command::Bruteforce { h } => {
            let r = search::brute_force_optimal(h)?;
            Ok(Output::Json(io::search_result_json(&r, None)))
        }
        Command::Hillclimb { h, restarts, seed, target, plateau } => {
            let mut config = SearchConfig::new(h, restarts, seed);
            config.target = target;
            config.max_plateau_moves = plateau;
            let r = search::hill_climb(&config)?;
            Ok(Output::Json(io::search_result_json(&r, Some(seed))))
        }
        Command::Bestresponse { pair } => {
            let (k1, _) = pair.load()?;
            let (k2, value) = search::best_response(&k1);
            let mut out = io::rat_json(&value);
            out["h"] = json!(k1.h());
            out["k1"] = json!(k1.table());
            out["k2"] = json!(k2.table());
            Ok(Output::Json(out))
        }
        Command::Recursive { preset, p } => recursive_cmd(preset, p),
        Command::Bounds { hmax, preset, format } => bounds(hmax, preset, format),
        Command::Pvariant { action, p, steps, format } => pvariant_cmd(action, p, steps, format),
        Command::Continuous {
            action,
            m,
            n,
            strategy,
            pair,
            samples,
            seed,
            level,
            pow2_grid,
            format,
        } => continuous_cmd(action, &m, n, strategy, &pair, samples, seed, level, pow2_grid, format),
        Command::Render {
            kind,
            pair,
            which,
            tile,
            depth,
            resolution,
            p,
            strategy,
            m,
            out,
            format,
        } => render_cmd(RenderArgs {
            kind,
            pair: &pair,
            which,
            tile,
            depth,
            resolution,
            p,
            strategy,
            m,
            out: &out,
            format,
        }),
        Command::Verify { criterion } => verify_cmd(criterion),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Output::Json(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(s)) => {
            print!("{s}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
