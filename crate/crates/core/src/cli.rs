//! Command-line front end. Every command builds its text output in memory and
//! optionally one table, which `--csv PATH` writes as RFC 4180 CSV.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use crate::bounds::{
    self, binary_entropy, binom_bounds_check, check_conditions, extend_schedule, format_decimal,
    parse_rational, parse_schedule, ExtendOptions, Family, Schedule,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::gibbs::{self, DemoOptions, Geometry, Transfer};
use crate::recoding::pressure_scaling_check;
use crate::subshift::{self, Base};
use crate::symbolic::{self, parse_pattern_file, ForbiddenSet, PatternFile, DEFAULT_GROUP};
use crate::tm::{self, machines};
use crate::wang::{self, Region, TileSet, Wrap};

#[derive(Debug, Parser)]
#[command(name = "ztlab", version, about = "Frequency-constrained subshifts, Wang tiles and transfer-matrix equilibria")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Write the command's table to this file as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Worker threads (1 forces the sequential path).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Cap on enumerated configurations.
    #[arg(long, global = true, default_value_t = symbolic::DEFAULT_ENUM_CAP, value_parser = positive_u128)]
    pub cap_enum: u128,
    /// Cap on transfer-matrix states and table sizes.
    #[arg(long, global = true, default_value_t = gibbs::DEFAULT_MATRIX_CAP, value_parser = positive_u128)]
    pub cap_matrix: u128,
    /// Largest working precision (bits) for certified comparisons.
    #[arg(long, global = true, default_value_t = bounds::DEFAULT_MAX_PRECISION,
          value_parser = clap::value_parser!(u32).range(16..))]
    pub precision: u32,
    #[command(subcommand)]
    pub command: Command,
}

fn positive_u128(s: &str) -> std::result::Result<u128, String> {
    match s.parse::<u128>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binomial sums and their exponential sandwich.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Length/rate schedules.
    #[command(subcommand)]
    Schedule(ScheduleCmd),
    /// Frequency-constrained families.
    #[command(subcommand)]
    Patterns(PatternsCmd),
    /// Wang tile sets.
    #[command(subcommand)]
    Tiles(TilesCmd),
    /// Turing machines as tiles.
    #[command(subcommand)]
    Tm(TmCmd),
    /// Transfer-matrix pressure and equilibrium states.
    #[command(subcommand)]
    Gibbs(GibbsCmd),
    /// Block recoding.
    #[command(subcommand)]
    Recode(RecodeCmd),
}

#[derive(Debug, Subcommand)]
pub enum BoundsCmd {
    /// One sandwich check.
    Binom {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        alpha: String,
    },
    /// Every n up to --max-n and alpha = j/denom, j <= denom/2.
    Sandwich {
        #[arg(long, default_value_t = 64)]
        max_n: u64,
        #[arg(long, default_value_t = 16)]
        denom: u64,
    },
    /// Binary entropy H(t) in nats.
    Entropy {
        #[arg(long)]
        t: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScheduleCmd {
    /// Conditions at every level (or one).
    Check {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Appends levels to a strict schedule and prints the result.
    Extend {
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        levels: usize,
    },
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Defaults to the top level.
    #[arg(long)]
    level: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum PatternsCmd {
    /// Admissible counts of one or both families.
    Count {
        #[command(flatten)]
        at: LevelArgs,
        #[arg(long, value_parser = parse_family)]
        parity: Option<Family>,
        #[arg(long, default_value = "2", value_parser = parse_base)]
        base: Base,
        #[arg(long, default_value = "1")]
        c: BigUint,
    },
    /// The counting chain |P|^power <= |C|.
    #[command(name = "verify-51")]
    Verify51 {
        #[command(flatten)]
        at: LevelArgs,
        #[arg(long, default_value_t = 10)]
        power: u32,
    },
    /// The weighted comparison of the two families.
    #[command(name = "verify-52")]
    Verify52 {
        #[command(flatten)]
        at: LevelArgs,
        #[arg(long, default_value_t = 10)]
        power: u32,
        #[arg(long, default_value = "2", value_parser = parse_base)]
        base: Base,
        #[arg(long, default_value = "1")]
        c: BigUint,
    },
    /// Words avoiding the patterns of a file, by DP and by brute force.
    Admissible {
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long)]
        length: usize,
    },
}

#[derive(Debug, Args)]
pub struct TileSource {
    /// Tile set file.
    #[arg(long, conflicts_with = "coordinate")]
    tiles: Option<PathBuf>,
    /// Built-in coordinate tile set of this period.
    #[arg(long)]
    coordinate: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Region size as WxH.
    #[arg(long, value_parser = parse_size)]
    region: (usize, usize),
    #[arg(long, default_value = "free", value_parser = parse_wrap)]
    wrap: Wrap,
}

#[derive(Debug, Subcommand)]
pub enum TilesCmd {
    /// Lists tilings of a region.
    Solve {
        #[command(flatten)]
        source: TileSource,
        #[command(flatten)]
        region: RegionArgs,
        #[arg(long, default_value_t = wang::DEFAULT_SOLVE_LIMIT)]
        limit: usize,
    },
    /// Counts tilings by backtracking and by column transfer.
    Count {
        #[command(flatten)]
        source: TileSource,
        #[command(flatten)]
        region: RegionArgs,
    },
    /// Prints a tile set (after parsing or generation).
    Show {
        #[command(flatten)]
        source: TileSource,
    },
    /// Tile set of an SFT given by forbidden patterns.
    FromSft {
        #[arg(long)]
        patterns: PathBuf,
    },
    /// Checks a macro-tile map for the simulation clauses.
    #[command(name = "verify-sim")]
    VerifySim {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        tau: PathBuf,
        #[arg(long)]
        zoom: usize,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_k: usize,
        #[arg(long, default_value_t = wang::DEFAULT_SOLVE_LIMIT)]
        limit: usize,
    },
}

#[derive(Debug, Args)]
pub struct MachineArg {
    /// Machine file, or `builtin:NAME`.
    #[arg(long)]
    machine: String,
}

#[derive(Debug, Subcommand)]
pub enum TmCmd {
    /// Prints the compiled tile set.
    Compile {
        #[command(flatten)]
        machine: MachineArg,
    },
    /// Space-time diagram from the simulator.
    Diagram {
        #[command(flatten)]
        machine: MachineArg,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        steps: usize,
    },
    /// Tilings above a fixed input row, compared with the simulator.
    Check {
        #[command(flatten)]
        machine: MachineArg,
        #[arg(long, default_value = "")]
        input: String,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        steps: usize,
    },
    /// Filling counts over all binary inputs of each length.
    Independence {
        #[command(flatten)]
        machine: MachineArg,
        #[arg(long, default_value = "2..6", value_parser = parse_range)]
        lengths: (usize, usize),
        #[arg(long, default_value_t = 2)]
        min_width: usize,
        #[arg(long, default_value_t = 5)]
        height: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum GibbsCmd {
    /// Pressure, entropy and energy of the equilibrium state at one beta.
    Pressure {
        /// Pattern file; the default group is forbidden, named groups are
        /// reported as cylinder masses.
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        beta: f64,
        /// Strip height for two-dimensional potentials.
        #[arg(long)]
        strip: Option<usize>,
        #[arg(long, default_value = "direct", value_parser = ["direct", "interaction"])]
        reading: String,
    },
    /// Beta sweep of the two-family mechanism on a toy schedule.
    Sweep {
        #[arg(long, default_value = "0:16:0.5", value_parser = parse_betas)]
        betas: Betas,
        /// Toy schedule file.
        #[arg(long)]
        families: PathBuf,
        /// Levels used (defaults to min(3, levels in the file)).
        #[arg(long)]
        levels: Option<usize>,
        /// Reference weight of the symbol 0.
        #[arg(long, default_value_t = 2)]
        multiplicity: u32,
    },
}

#[derive(Debug, Subcommand)]
pub enum RecodeCmd {
    /// Pressure of the block chain against the base chain.
    Check {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        m: Vec<usize>,
        #[arg(long)]
        potential: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("`{s}` is not + or -"))
}

fn parse_base(s: &str) -> std::result::Result<Base, String> {
    Base::parse(s).ok_or_else(|| format!("`{s}` is not a positive integer or e"))
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    Region::parse_size(s).ok_or_else(|| format!("`{s}` is not WxH"))
}

fn parse_wrap(s: &str) -> std::result::Result<Wrap, String> {
    Wrap::parse(s).ok_or_else(|| format!("`{s}` is not free or torus"))
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let bad = || format!("`{s}` is not a..b");
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let (a, b) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Betas(pub Vec<f64>);

/// `a:b:step`, inclusive of `b` up to rounding; points are `a + i·step`.
pub fn parse_betas(s: &str) -> std::result::Result<Betas, String> {
    let bad = || format!("`{s}` is not a:b:step");
    let parts: Vec<f64> = s
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<std::result::Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a || a < 0.0 {
        return Err(format!("`{s}` needs 0 <= a <= b and step > 0"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(format!("`{s}` has too many points"));
    }
    Ok(Betas((0..=n).map(|i| a + i as f64 * step).collect()))
}

/// Rows for `--csv`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Default)]
pub struct Output {
    pub text: String,
    pub table: Option<Table>,
}

struct Ctx {
    cap_enum: u128,
    cap_matrix: u128,
    precision: u32,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Cli(format!("cannot read {}: {e}", path.display())))
}

fn load_schedule(path: &Path) -> Result<Schedule> {
    Ok(parse_schedule(&read(path)?)?)
}

fn level_of(s: &Schedule, level: Option<usize>) -> Result<usize> {
    let k = level.unwrap_or(s.levels());
    if k == 0 || k > s.levels() {
        return Err(Error::Cli(format!("level {k} is outside 1..={}", s.levels())));
    }
    Ok(k)
}

fn load_tiles(src: &TileSource) -> Result<TileSet> {
    match (&src.tiles, src.coordinate) {
        (Some(p), None) => Ok(wang::parse_tileset(&read(p)?)?),
        (None, Some(n)) => Ok(wang::coordinate_tileset(n)?),
        _ => Err(Error::Cli("give exactly one of --tiles FILE or --coordinate N".into())),
    }
}

fn load_machine(m: &MachineArg) -> Result<tm::TmSpec> {
    let text = match m.machine.strip_prefix("builtin:") {
        Some(name) => match name {
            "right-mover" => machines::RIGHT_MOVER.to_string(),
            "immediate-halt" => machines::IMMEDIATE_HALT.to_string(),
            "halt-after-one" => machines::HALT_AFTER_ONE.to_string(),
            "binary-counter" => machines::BINARY_COUNTER.to_string(),
            "bouncer" => machines::BOUNCER.to_string(),
            "reject-11" => machines::REJECT_11.to_string(),
            "always-accept" => machines::ALWAYS_ACCEPT.to_string(),
            "reject-first-one" => machines::REJECT_FIRST_ONE.to_string(),
            _ => return Err(Error::Cli(format!("unknown builtin machine `{name}`"))),
        },
        None => read(Path::new(&m.machine))?,
    };
    Ok(tm::parse_tm(&text)?)
}

/// Forbidden set from the default group, named groups as families.
fn load_potential_file(path: &Path) -> Result<(PatternFile, ForbiddenSet)> {
    let file = parse_pattern_file(&read(path)?)?;
    let forbidden = ForbiddenSet::new(
        file.alphabet.clone(),
        file.group(DEFAULT_GROUP).unwrap_or(&[]).iter().cloned(),
    )?;
    Ok((file, forbidden))
}

fn build_potential(f: &ForbiddenSet, reading: &str, cap: u128) -> Result<gibbs::Potential> {
    if f.is_empty() {
        return Ok(gibbs::Potential::zero(f.alphabet().clone(), 1));
    }
    Ok(match reading {
        "interaction" => gibbs::potential_from_interaction(&gibbs::interaction_from_forbidden(f)?, cap)?,
        _ => gibbs::potential_direct(f)?,
    })
}

fn hdr(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

fn f12(x: f64) -> String {
    let s = format!("{x:.12}");
    // Tiny negatives print as -0.000000000000.
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn bool_s(b: bool) -> String {
    b.to_string()
}

fn run_bounds(cmd: &BoundsCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        BoundsCmd::Binom { n, alpha } => {
            let a = parse_rational(alpha).ok_or_else(|| Error::Cli(format!("`{alpha}` is not a rational")))?;
            let b = binom_bounds_check(*n, &a, ctx.precision)?;
            writeln!(out.text, "{b}").ok();
            out.table = Some(Table {
                header: hdr(&["n", "alpha", "lower", "sum", "upper", "holds"]),
                rows: vec![vec![
                    n.to_string(),
                    a.to_string(),
                    b.lower.to_string(),
                    b.sum.to_string(),
                    format_decimal(&b.upper),
                    bool_s(b.holds),
                ]],
            });
        }
        BoundsCmd::Sandwich { max_n, denom } => {
            if *max_n == 0 || *denom < 2 {
                return Err(Error::Cli("need max-n >= 1 and denom >= 2".into()));
            }
            let pairs: Vec<(u64, u64)> = (1..=*max_n)
                .flat_map(|n| (1..=denom / 2).map(move |j| (n, j)))
                .collect();
            let d = *denom as i64;
            let rows = exec::map(&pairs, |&(n, j)| binom_bounds_check(n, &bounds::rational(j as i64, d), ctx.precision))
                .into_iter()
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let failures = rows.iter().filter(|b| !b.holds).count();
            writeln!(out.text, "checked={} failures={}", rows.len(), failures).ok();
            out.table = Some(Table {
                header: hdr(&["n", "alpha", "lower", "sum", "upper", "holds"]),
                rows: rows
                    .iter()
                    .map(|b| {
                        vec![
                            b.n.to_string(),
                            b.alpha.to_string(),
                            b.lower.to_string(),
                            b.sum.to_string(),
                            format_decimal(&b.upper),
                            bool_s(b.holds),
                        ]
                    })
                    .collect(),
            });
        }
        BoundsCmd::Entropy { t } => {
            let q = parse_rational(t).ok_or_else(|| Error::Cli(format!("`{t}` is not a rational")))?;
            let h = binary_entropy(&q, bounds::DEFAULT_PRECISION)?;
            writeln!(out.text, "H({q})={}", format_decimal(&h)).ok();
        }
    }
    Ok(out)
}

fn run_schedule(cmd: &ScheduleCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        ScheduleCmd::Check { schedule, level } => {
            let s = load_schedule(schedule)?;
            let levels: Vec<usize> = match level {
                Some(_) => vec![level_of(&s, *level)?],
                None => (1..=s.levels()).collect(),
            };
            let mut table = Table {
                header: hdr(&["level", "condition", "holds", "margin"]),
                rows: vec![],
            };
            let mut all = true;
            for k in levels {
                let rep = check_conditions(&s, k, ctx.precision)?;
                all &= rep.all_hold();
                for c in rep.checks() {
                    writeln!(out.text, "level {k}: {c}").ok();
                    table.rows.push(vec![k.to_string(), c.name.into(), bool_s(c.holds), c.margin.to_string()]);
                }
            }
            writeln!(out.text, "all_hold={all}").ok();
            out.table = Some(table);
        }
        ScheduleCmd::Extend { schedule, levels } => {
            let mut s = match schedule {
                Some(p) => load_schedule(p)?,
                None => Schedule::seed(),
            };
            let opts = ExtendOptions {
                max_prec: ctx.precision,
                ..ExtendOptions::default()
            };
            for _ in 0..*levels {
                s = extend_schedule(&s, opts)?;
            }
            out.text.push_str(&s.to_text());
            for k in 1..s.levels() {
                let rep = check_conditions(&s, k, ctx.precision)?;
                for c in rep.checks() {
                    writeln!(out.text, "# level {k}: {c}").ok();
                }
            }
        }
    }
    Ok(out)
}

/// Bits between the count and the entropy ceiling `e^{L·H(r)}`.
fn margin_bits(count: &BigUint, s: &Schedule, k: usize) -> Result<f64> {
    let l = s.window_usize(k)? as f64;
    let h = binary_entropy(s.rate(k)?, bounds::DEFAULT_PRECISION)?;
    let log2_count = if count.bits() == 0 {
        f64::NEG_INFINITY
    } else {
        let shift = count.bits().saturating_sub(60);
        let top: u64 = (count >> shift).try_into().unwrap_or(u64::MAX);
        (top as f64).log2() + shift as f64
    };
    Ok(l * h.lo_f64() / std::f64::consts::LN_2 - log2_count)
}

fn run_patterns(cmd: &PatternsCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        PatternsCmd::Count { at, parity, base, c } => {
            let s = load_schedule(&at.schedule)?;
            let k = level_of(&s, at.level)?;
            let fams = match parity {
                Some(f) => vec![*f],
                None => vec![Family::Plus, Family::Minus],
            };
            let mut table = Table {
                header: hdr(&["level", "parity", "count", "logWeighted", "marginBits"]),
                rows: vec![],
            };
            for f in fams {
                let count = subshift::count_p(k, f, &s, ctx.cap_enum)?;
                let w = subshift::weighted_g_count(k, f, &s, *base, c, ctx.cap_enum, bounds::DEFAULT_PRECISION)?;
                let mb = margin_bits(&count, &s, k)?;
                writeln!(
                    out.text,
                    "level={k} parity={} count={count} logWeighted={} marginBits={mb:.6}",
                    f.sign(),
                    format_decimal(&w.log_value)
                )
                .ok();
                table.rows.push(vec![
                    k.to_string(),
                    f.sign().to_string(),
                    count.to_string(),
                    format!("{:.12}", w.log_value.mid_f64()),
                    format!("{mb:.6}"),
                ]);
            }
            out.table = Some(table);
        }
        PatternsCmd::Verify51 { at, power } => {
            let s = load_schedule(&at.schedule)?;
            let k = level_of(&s, at.level)?;
            let r = subshift::verify_lemma51_chain(k, &s, *power, ctx.cap_enum, ctx.precision)?;
            writeln!(
                out.text,
                "level={} power={} minority={} mode={:?} m={} ({}) |P|={} |B|={}",
                r.k,
                r.power,
                r.minority.sign(),
                r.mode,
                r.m,
                r.convention(),
                r.p_value,
                r.b_count
            )
            .ok();
            for st in [&r.bound_i, &r.bound_ii, &r.bound_iii] {
                writeln!(out.text, "{st}").ok();
            }
            if let Some(d) = r.direct {
                writeln!(out.text, "direct |P|^power <= |C|: {d}").ok();
            }
            writeln!(out.text, "chain_holds={}", r.chain_holds()).ok();
            out.table = Some(Table {
                header: hdr(&["step", "holds", "margin"]),
                rows: [&r.bound_i, &r.bound_ii, &r.bound_iii]
                    .iter()
                    .map(|st| vec![st.name.to_string(), bool_s(st.holds), format_decimal(&st.margin)])
                    .collect(),
            });
        }
        PatternsCmd::Verify52 { at, power, base, c } => {
            let s = load_schedule(&at.schedule)?;
            let k = level_of(&s, at.level)?;
            let r = subshift::verify_prop52(
                k,
                &s,
                *power,
                *base,
                c,
                ctx.cap_enum,
                bounds::DEFAULT_PRECISION,
                ctx.precision,
            )?;
            writeln!(
                out.text,
                "level={} power={} base={} c={} minority={}",
                r.k,
                r.power,
                r.base,
                r.c,
                r.minority.sign()
            )
            .ok();
            writeln!(
                out.text,
                "lhs={} mid={} rhs={}",
                format_decimal(&r.lhs),
                format_decimal(&r.mid),
                format_decimal(&r.rhs)
            )
            .ok();
            writeln!(
                out.text,
                "step1={:?} step2={:?} overall={:?} margin={} holds={}",
                r.step1,
                r.step2,
                r.overall,
                format_decimal(&r.margin()),
                r.holds()
            )
            .ok();
        }
        PatternsCmd::Admissible { patterns, length } => {
            let f = symbolic::parse_forbidden(&read(patterns)?)?;
            let dp = symbolic::count_admissible_dp(&f, *length, ctx.cap_enum)?;
            let brute = symbolic::count_admissible_brute(&f, &symbolic::Window::segment(*length)?, ctx.cap_enum)?;
            writeln!(out.text, "length={length} dp={dp} brute={brute} agree={}", dp == brute).ok();
        }
    }
    Ok(out)
}

fn region_of(r: &RegionArgs) -> Result<Region> {
    Ok(Region::new(r.region.0, r.region.1, r.wrap)?)
}

fn run_tiles(cmd: &TilesCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        TilesCmd::Solve { source, region, limit } => {
            let ts = load_tiles(source)?;
            let reg = region_of(region)?;
            let sols = wang::solve(&ts, &reg, *limit)?;
            writeln!(out.text, "tilings={}{}", sols.len(), if sols.len() == *limit { " (limit reached)" } else { "" }).ok();
            for (i, t) in sols.iter().enumerate() {
                writeln!(out.text, "# tiling {}", i + 1).ok();
                out.text.push_str(&t.render(&ts));
            }
        }
        TilesCmd::Count { source, region } => {
            let ts = load_tiles(source)?;
            let reg = region_of(region)?;
            let bt = wang::count_tilings(&ts, &reg, ctx.cap_enum)?;
            let tr = if reg.wrap() == Wrap::Free {
                Some(wang::count_by_transfer(&ts, &reg, ctx.cap_matrix.min(usize::MAX as u128) as usize)?)
            } else {
                None
            };
            match &tr {
                Some(t) => writeln!(out.text, "solver={bt} transfer={t} agree={}", BigUint::from(bt) == *t),
                None => writeln!(out.text, "solver={bt}"),
            }
            .ok();
        }
        TilesCmd::Show { source } => out.text = load_tiles(source)?.to_text(),
        TilesCmd::FromSft { patterns } => {
            let f = symbolic::parse_forbidden(&read(patterns)?)?;
            out.text = wang::sft_to_wang(&f)?.tiles.to_text();
        }
        TilesCmd::VerifySim { rho, tau, zoom, map, max_k, limit } => {
            let rho = wang::parse_tileset(&read(rho)?)?;
            let tau = wang::parse_tileset(&read(tau)?)?;
            let r = wang::parse_map(&read(map)?, &rho, &tau, *zoom)?;
            let rep = wang::verify_simulation(&rho, &tau, *zoom, &r, *max_k, *limit)?;
            writeln!(out.text, "{rep}").ok();
            writeln!(out.text, "passes={}", rep.passes()).ok();
        }
    }
    Ok(out)
}

fn run_tm(cmd: &TmCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        TmCmd::Compile { machine } => {
            let m = load_machine(machine)?;
            let c = tm::compile_tm(&m)?;
            writeln!(out.text, "# {} tiles, {} colours", c.tiles.len(), c.tiles.colors().len()).ok();
            out.text.push_str(&c.tiles.to_text());
        }
        TmCmd::Diagram { machine, input, width, steps } => {
            let m = load_machine(machine)?;
            let inp = m.parse_input(input)?;
            let d = tm::simulate(&m, &inp, *width, *steps)?;
            out.text.push_str(&d.render(&m));
            if d.halted {
                writeln!(out.text, "# halted after {} steps", d.height() - 1).ok();
            }
        }
        TmCmd::Check { machine, input, width, steps } => {
            let m = load_machine(machine)?;
            let inp = m.parse_input(input)?;
            let c = tm::compile_tm(&m)?;
            let (count, matches) = tm::check_against_simulator(&c, &inp, *width, *steps)?;
            writeln!(out.text, "tilings={count} matches_simulator={matches}").ok();
        }
        TmCmd::Independence { machine, lengths, min_width, height } => {
            let m = load_machine(machine)?;
            let c = tm::compile_tm(&m)?;
            let rows = tm::independence(&c, lengths.0..=lengths.1, *min_width, *height, ctx.cap_enum)?;
            let mut table = Table {
                header: hdr(&["length", "width", "height", "inputs", "min", "max", "constant"]),
                rows: vec![],
            };
            for r in &rows {
                writeln!(
                    out.text,
                    "L={} region={}x{} inputs={} min={} max={} constant={}",
                    r.length,
                    r.width,
                    r.height,
                    r.inputs,
                    r.min,
                    r.max,
                    r.constant()
                )
                .ok();
                table.rows.push(vec![
                    r.length.to_string(),
                    r.width.to_string(),
                    r.height.to_string(),
                    r.inputs.to_string(),
                    r.min.to_string(),
                    r.max.to_string(),
                    bool_s(r.constant()),
                ]);
            }
            out.table = Some(table);
        }
    }
    Ok(out)
}

fn run_gibbs(cmd: &GibbsCmd, ctx: &Ctx) -> Result<Output> {
    let mut out = Output::default();
    match cmd {
        GibbsCmd::Pressure { potential, beta, strip, reading } => {
            let (file, f) = load_potential_file(potential)?;
            let dim = f.dim().unwrap_or(1);
            let p = build_potential(&f, reading, ctx.cap_matrix)?;
            let geom = match (dim, strip) {
                (1, None) => Geometry::Chain,
                (1, Some(_)) => return Err(Error::Cli("--strip needs a two-dimensional potential".into())),
                (_, Some(h)) => Geometry::Strip(*h),
                (_, None) => return Err(Error::Cli("two-dimensional potentials need --strip H".into())),
            };
            let t = Transfer::new(&p, geom, ctx.cap_matrix)?;
            let eq = t.solve(*beta)?;
            let fams: Vec<(String, Vec<symbolic::Pattern>)> =
                file.groups.iter().filter(|(n, _)| n != DEFAULT_GROUP).cloned().collect();
            let rep = eq.report_with(&fams)?;
            writeln!(out.text, "{rep}").ok();
            if let Geometry::Strip(_) = geom {
                writeln!(out.text, "# strip values approximate the planar ones").ok();
            }
            match gibbs::energy_bound_check(&t, &rep) {
                Ok(b) => writeln!(out.text, "energy_bound={} holds={}", f12(b.bound), b.holds),
                Err(e) => writeln!(out.text, "energy_bound=n/a ({e})"),
            }
            .ok();
            let mut header = hdr(&["beta", "pressure", "entropy", "energy", "variational_gap"]);
            let mut row = vec![f12(rep.beta), f12(rep.pressure), f12(rep.entropy), f12(rep.energy), format!("{:.3e}", rep.variational_gap)];
            for (name, m) in &rep.marginals {
                header.push(format!("mass_{name}"));
                row.push(f12(*m));
            }
            out.table = Some(Table { header, rows: vec![row] });
        }
        GibbsCmd::Sweep { betas, families, levels, multiplicity } => {
            let s = load_schedule(families)?;
            let opts = DemoOptions {
                levels: levels.unwrap_or(s.levels().min(3)),
                schedule: s,
                multiplicity: *multiplicity,
                betas: betas.0.clone(),
                cap: ctx.cap_matrix,
                max_iter: gibbs::DEFAULT_MAX_ITER,
                max_prec: ctx.precision,
            };
            let rep = gibbs::oscillation_demo(&opts)?;
            writeln!(out.text, "window={} states={}", rep.window, rep.states).ok();
            let mut table = Table {
                header: hdr(&["beta", "pressure", "entropy", "energy", "mass_plus", "mass_minus"]),
                rows: vec![],
            };
            for r in &rep.rows {
                let dom = r.dominant().map_or("none".to_string(), |f| f.sign().to_string());
                writeln!(
                    out.text,
                    "beta={} pressure={} entropy={} energy={} mass_plus={} mass_minus={} dominant={dom}",
                    r.beta,
                    f12(r.pressure),
                    f12(r.entropy),
                    f12(r.energy),
                    f12(r.mass_plus),
                    f12(r.mass_minus)
                )
                .ok();
                table.rows.push(vec![
                    r.beta.to_string(),
                    f12(r.pressure),
                    f12(r.entropy),
                    f12(r.energy),
                    f12(r.mass_plus),
                    f12(r.mass_minus),
                ]);
            }
            for (b1, b2, from, to) in &rep.flips {
                writeln!(out.text, "flip {} -> {} between beta={b1} and beta={b2}", from.sign(), to.sign()).ok();
            }
            let pred = rep.predicted().map_or("none".to_string(), |f| f.sign().to_string());
            writeln!(out.text, "predicted={pred} matches={}", rep.flip_matches_prediction()).ok();
            out.table = Some(table);
        }
    }
    Ok(out)
}

fn run_recode(cmd: &RecodeCmd, ctx: &Ctx) -> Result<Output> {
    let RecodeCmd::Check { m, potential, beta } = cmd;
    let (_, f) = load_potential_file(potential)?;
    if f.dim().unwrap_or(1) != 1 {
        return Err(Error::Cli("recode check runs on one-dimensional potentials".into()));
    }
    let p = build_potential(&f, "direct", ctx.cap_matrix)?;
    let mut out = Output::default();
    let mut table = Table {
        header: hdr(&["m", "beta", "base_pressure", "block_pressure", "ratio", "holds"]),
        rows: vec![],
    };
    for &mm in m {
        let r = pressure_scaling_check(&p, *beta, mm, ctx.cap_matrix)?;
        let holds = r.holds(gibbs::VARIATIONAL_TOL);
        writeln!(
            out.text,
            "m={} beta={} base={} block={} ratio={} holds={holds}",
            r.m,
            r.beta,
            f12(r.base_pressure),
            f12(r.block_pressure),
            f12(r.ratio)
        )
        .ok();
        table.rows.push(vec![
            r.m.to_string(),
            r.beta.to_string(),
            f12(r.base_pressure),
            f12(r.block_pressure),
            f12(r.ratio),
            bool_s(holds),
        ]);
    }
    out.table = Some(table);
    Ok(out)
}

/// Runs a parsed command line and returns its output.
pub fn execute(cli: &Cli) -> Result<Output> {
    let ctx = Ctx {
        cap_enum: cli.cap_enum,
        cap_matrix: cli.cap_matrix,
        precision: cli.precision,
    };
    let go = || match &cli.command {
        Command::Bounds(c) => run_bounds(c, &ctx),
        Command::Schedule(c) => run_schedule(c, &ctx),
        Command::Patterns(c) => run_patterns(c, &ctx),
        Command::Tiles(c) => run_tiles(c, &ctx),
        Command::Tm(c) => run_tm(c, &ctx),
        Command::Gibbs(c) => run_gibbs(c, &ctx),
        Command::Recode(c) => run_recode(c, &ctx),
    };
    match cli.threads {
        Some(n) => exec::with_threads(n as usize, go),
        None => go(),
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Cli(format!("cannot write {}: {e}", path.display())))?;
    let io = |e: csv::Error| Error::Cli(format!("cannot write {}: {e}", path.display()));
    w.write_record(&table.header).map_err(io)?;
    for r in &table.rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
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
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    let result = execute(&cli).and_then(|o| {
        match (&cli.csv, &o.table) {
            (Some(p), Some(t)) => write_csv(t, p)?,
            (Some(_), None) => return Err(Error::Cli("this command has no tabular output for --csv".into())),
            _ => {}
        }
        Ok(o)
    });
    match result {
        Ok(o) => match stdout.write_all(o.text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: io: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.class().exit_code()
        }
    }
}
