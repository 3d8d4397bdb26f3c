//! Command-line front end for the `univoque` library.
//!
//! [`parse_and_run`] takes the argument vector and returns the exit code
//! with the text destined for stdout and stderr, so the binary and the tests
//! share one code path.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use univoque::collapse::{decompose_lr, factorize_w, verify_context, CollapseContext};
use univoque::dimension::{
    default_n_max, plateau_from_word, sandwich_with, sweep, sweep_check, sweep_grid, SandwichConfig, SweepRow,
    SWEEP_CSV_HEADER,
};
use univoque::expansions::{
    base_from_alpha, classify_univoque, kl_alpha_digits, minus_periodic_exceeds_kl, quasi_greedy_alpha,
};
use univoque::interval::{decimal_string, parse_rational, rational_string};
use univoque::{AlphaTarget, Alphabet, Base, Error, EventuallyPeriodicSeq, Rational, UnivoqueStatus, Word};

/// Exit code for a result that was emitted but not certified to the
/// requested tolerance or depth.
pub const EXIT_UNCERTIFIED: i32 = 4;

/// Exit code for a verification report with at least one failed check.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "univoque", version, about = "Unique expansions in non-integer bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and verification.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certified prefix of the quasi-greedy expansion α(q).
    Alpha {
        #[command(flatten)]
        q: BaseArgs,
        #[arg(long, default_value_t = 16)]
        len: usize,
    },
    /// Bracket the base whose quasi-greedy expansion is a given sequence.
    Base {
        /// Eventually periodic literal such as `11(01)`, or `kl`.
        #[arg(long)]
        alpha: String,
        #[arg(long = "M", default_value_t = 1)]
        m: u8,
        #[arg(long, default_value = "1e-12")]
        width: String,
        /// Shifts inspected when classifying the base.
        #[arg(long, default_value_t = 64)]
        depth: usize,
    },
    /// The Komornik–Loreti constant and its digits.
    Kl {
        #[arg(long = "M", default_value_t = 1)]
        m: u8,
        #[arg(long, default_value = "1e-12")]
        width: String,
        #[arg(long, default_value_t = 16)]
        len: usize,
    },
    /// Two-sided bounds on the entropy of the univoque shift.
    Entropy(EntropyArgs),
    /// Two-sided bounds on the Hausdorff dimension of the univoque set.
    Dim(EntropyArgs),
    /// Endpoints of the entropy plateau generated by a primitive word.
    Plateau {
        #[arg(long, visible_alias = "alpha")]
        word: String,
        #[arg(long = "M", default_value_t = 1)]
        m: u8,
        #[arg(long, default_value = "1e-12")]
        width: String,
    },
    /// Exhaustive checks of the combinatorial lemmas.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long = "M", default_value_t = 1)]
        m: u8,
        /// Largest word length checked.
        #[arg(long = "k-max", visible_alias = "kmax", default_value_t = 14)]
        k_max: usize,
        /// Seed for the sampled contexts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled contexts on top of the fixed family.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Entropy and dimension bounds on an evenly spaced grid of bases.
    Sweep {
        #[arg(long, default_value = "1.6")]
        from: String,
        #[arg(long, default_value = "2")]
        to: String,
        /// Number of grid intervals; the grid has `steps + 1` points.
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long = "M", default_value_t = 1)]
        m: u8,
        #[arg(long, default_value = "1e-3")]
        tol: String,
        /// Window lengths used at every grid point.
        #[arg(long, value_delimiter = ',', default_value = "4,8,12,16")]
        lengths: Vec<usize>,
        #[arg(long = "k-max", visible_alias = "kmax", default_value_t = 64)]
        k_max: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Collapse,
}

#[derive(Debug, Args)]
struct BaseArgs {
    /// Decimal, `p/r`, `kl`, or `alpha:<periodic literal>`.
    #[arg(long)]
    q: String,
    #[arg(long = "M", default_value_t = 1)]
    m: u8,
    /// Bracket width for bases given by an expansion.
    #[arg(long, default_value = "1e-12")]
    width: String,
}

#[derive(Debug, Args)]
struct EntropyArgs {
    #[command(flatten)]
    q: BaseArgs,
    #[arg(long, default_value = "1e-3")]
    tol: String,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long = "k-max", visible_alias = "kmax", default_value_t = 64)]
    k_max: usize,
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (program name first) and runs the command.
pub fn parse_and_run<I, T>(argv: I) -> RunOutput
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                RunOutput {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                RunOutput {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Error::Resource(format!("thread pool: {e}"))),
        },
        None => run(&cli),
    };
    let (code, text) = match result {
        Ok(Emitted { text, code }) => (code, text),
        Err(e) => {
            return RunOutput {
                code: e.exit_code(),
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            };
        }
    };
    match &cli.out {
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => RunOutput {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => RunOutput {
                code: 2,
                stdout: String::new(),
                stderr: format!("error: {}: {e}\n", path.display()),
            },
        },
        None => RunOutput {
            code,
            stdout: text,
            stderr: String::new(),
        },
    }
}

struct Emitted {
    text: String,
    code: i32,
}

fn code_for(certified: bool) -> i32 {
    if certified {
        0
    } else {
        EXIT_UNCERTIFIED
    }
}

fn emit_json(value: Value, certified: bool) -> univoque::Result<Emitted> {
    let mut text = serde_json::to_string_pretty(&value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    Ok(Emitted {
        text,
        code: code_for(certified),
    })
}

fn alphabet(m: u8) -> univoque::Result<Alphabet> {
    if m == 0 {
        return Err(Error::Input("M must be at least 1".into()));
    }
    Alphabet::new(m)
}

fn positive(text: &str, what: &str) -> univoque::Result<Rational> {
    let x = parse_rational(text)?;
    if x <= Rational::from_integer(0.into()) {
        return Err(Error::Input(format!("{what} must be positive")));
    }
    Ok(x)
}

impl BaseArgs {
    fn base(&self) -> univoque::Result<Base> {
        Base::parse(&self.q, alphabet(self.m)?, &positive(&self.width, "width")?)
    }
}

/// Exact rational ends with outward-rounded decimals.
fn bracket_json(lo: &Rational, hi: &Rational) -> Value {
    json!({
        "lo": rational_string(lo),
        "hi": rational_string(hi),
        "lo_decimal": decimal_string(lo, 15, false),
        "hi_decimal": decimal_string(hi, 15, true),
    })
}

fn status_name(s: UnivoqueStatus) -> String {
    match s {
        UnivoqueStatus::InU => "in_U".into(),
        UnivoqueStatus::InClosureOnly => "in_closure_only".into(),
        UnivoqueStatus::Outside => "outside".into(),
        UnivoqueStatus::UnknownAtDepth(d) => format!("unknown_at_depth_{d}"),
    }
}

fn run(cli: &Cli) -> univoque::Result<Emitted> {
    let csv_only_for = |what: &[&str]| -> univoque::Result<()> {
        if cli.format == Format::Csv {
            return Err(Error::Input(format!(
                "csv output is available for {} only",
                what.join(", ")
            )));
        }
        Ok(())
    };
    match &cli.command {
        Command::Alpha { q, len } => {
            csv_only_for(&["entropy", "dim", "sweep"])?;
            let base = q.base()?;
            let a = quasi_greedy_alpha(&base, *len)?;
            emit_json(
                json!({
                    "q": bracket_json(base.lo(), base.hi()),
                    "M": base.alphabet().max_digit(),
                    "digits": a.word().to_string(),
                    "certified_len": a.certified_len(),
                    "exact": a.exact_sequence().map(|s| s.to_string()),
                }),
                true,
            )
        }
        Command::Base { alpha, m, width, depth } => {
            csv_only_for(&["entropy", "dim", "sweep"])?;
            let alphabet = alphabet(*m)?;
            let target = if alpha.eq_ignore_ascii_case("kl") {
                AlphaTarget::KomornikLoreti(alphabet)
            } else {
                AlphaTarget::Periodic(EventuallyPeriodicSeq::parse(alpha, alphabet)?)
            };
            let base = base_from_alpha(&target, &positive(width, "width")?)?;
            let status = classify_univoque(&base, *depth)?;
            emit_json(
                json!({
                    "alpha": alpha,
                    "M": m,
                    "q": bracket_json(base.lo(), base.hi()),
                    "univoque": status_name(status),
                }),
                !matches!(status, UnivoqueStatus::UnknownAtDepth(_)),
            )
        }
        Command::Kl { m, width, len } => {
            csv_only_for(&["entropy", "dim", "sweep"])?;
            let alphabet = alphabet(*m)?;
            let base = base_from_alpha(&AlphaTarget::KomornikLoreti(alphabet), &positive(width, "width")?)?;
            emit_json(
                json!({
                    "M": m,
                    "q": bracket_json(base.lo(), base.hi()),
                    "digits": kl_alpha_digits(alphabet, *len).to_string(),
                }),
                true,
            )
        }
        Command::Entropy(args) | Command::Dim(args) => {
            let base = args.q.base()?;
            let n_max = args.n_max.unwrap_or_else(|| default_n_max(base.alphabet()));
            let mut cfg = SandwichConfig::new(positive(&args.tol, "tol")?, n_max);
            cfg.k_max = args.k_max;
            let est = sandwich_with(&base, &cfg)?;
            let certified = est.converged;
            if cli.format == Format::Csv {
                let row = SweepRow {
                    index: 0,
                    q: base,
                    outcome: Ok(est),
                };
                return Ok(Emitted {
                    text: format!("{SWEEP_CSV_HEADER}\n{}\n", row.csv_line()),
                    code: code_for(certified),
                });
            }
            emit_json(est.to_json(), certified)
        }
        Command::Plateau { word, m, width } => {
            csv_only_for(&["entropy", "dim", "sweep"])?;
            let w = Word::parse(word, alphabet(*m)?)?;
            let p = plateau_from_word(&w, &positive(width, "width")?)?;
            let mut v = p.to_json();
            v["q_l"] = bracket_json(p.q_l.lo(), p.q_l.hi());
            v["q_r"] = bracket_json(p.q_r.lo(), p.q_r.hi());
            emit_json(v, true)
        }
        Command::Verify {
            suite: Suite::Collapse,
            m,
            k_max,
            seed,
            samples,
        } => {
            csv_only_for(&["entropy", "dim", "sweep"])?;
            let report = verify_collapse(alphabet(*m)?, *k_max, *seed, *samples)?;
            let failed = report["failures"].as_u64() != Some(0);
            let mut out = emit_json(report, true)?;
            if failed {
                out.code = EXIT_CHECK_FAILED;
            }
            Ok(out)
        }
        Command::Sweep {
            from,
            to,
            steps,
            m,
            tol,
            lengths,
            k_max,
        } => {
            let grid = sweep_grid(&parse_rational(from)?, &parse_rational(to)?, *steps, alphabet(*m)?)?;
            if lengths.is_empty() || lengths.contains(&0) {
                return Err(Error::Input("window lengths must be positive".into()));
            }
            let mut cfg = SandwichConfig::new(positive(tol, "tol")?, lengths.iter().copied().max().unwrap_or(4));
            cfg.k_max = *k_max;
            cfg.lengths = Some(lengths.clone());
            cfg.stop_early = false;
            let mut rows = sweep(&grid, &cfg);
            rows.sort_by_key(|r| r.index);
            let certified = rows.iter().all(|r| r.status() == "ok");
            if cli.format == Format::Csv {
                let mut text = format!("{SWEEP_CSV_HEADER}\n");
                for r in &rows {
                    text.push_str(&r.csv_line());
                    text.push('\n');
                }
                return Ok(Emitted {
                    text,
                    code: code_for(certified),
                });
            }
            let check = sweep_check(&rows);
            emit_json(
                json!({
                    "rows": rows.iter().map(SweepRow::to_json).collect::<Vec<_>>(),
                    "check": check,
                }),
                certified,
            )
        }
    }
}

/// Contexts `(u, v)` of the first case: `v = a_1…a_m` primitive with
/// `(v^-)^∞ ≻ α(q_KL)`, `u = v (refl(v)^+)^l refl(a_1…a_{r−1}) a_n` primitive
/// with `l > 0`.
fn first_case_contexts(alphabet: Alphabet, m_max: usize, n_max: usize) -> univoque::Result<Vec<CollapseContext>> {
    let size = alphabet.size();
    let max = alphabet.max_digit();
    let mut out = Vec::new();
    for m in 1..=m_max {
        if m as f64 * (size as f64).log2() > 16.0 {
            break;
        }
        for code in 0..size.pow(m as u32) {
            let mut v = vec![0u8; m];
            let mut c = code;
            for d in v.iter_mut().rev() {
                *d = (c % size) as u8;
                c /= size;
            }
            let vw = Word::new(v.clone(), alphabet)?;
            if v[m - 1] == 0 || !vw.is_primitive()? || !minus_periodic_exceeds_kl(&vw)? {
                continue;
            }
            let block = vw.reflect().plus_last()?.into_digits();
            let refl: Vec<u8> = v.iter().map(|d| max - d).collect();
            for l in 1.. {
                if m * (l + 1) + 1 > n_max {
                    break;
                }
                for r in 1..=m {
                    let n = m * (l + 1) + r;
                    if n > n_max {
                        break;
                    }
                    let mut u = v.clone();
                    for _ in 0..l {
                        u.extend_from_slice(&block);
                    }
                    u.extend_from_slice(&refl[..r - 1]);
                    let floor = if r < m { refl[r - 1] } else { block[m - 1] };
                    for last in floor + 1..=max {
                        let mut u = u.clone();
                        u.push(last);
                        let uw = Word::new(u, alphabet)?;
                        if uw.is_primitive()? {
                            out.push(CollapseContext::new(uw, vw.clone())?);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

fn binary_family() -> univoque::Result<Vec<(String, CollapseContext)>> {
    let bin = Alphabet::binary();
    let width = Rational::new(1.into(), 1_000_000_000_000u64.into());
    let mut out = Vec::new();
    for (lit, len) in [("1110011(0001101)", 32), ("1110010011(0001101101)", 40)] {
        let q = base_from_alpha(&AlphaTarget::Periodic(EventuallyPeriodicSeq::parse(lit, bin)?), &width)?;
        let alpha = quasi_greedy_alpha(&q, len)?;
        let d = decompose_lr(&alpha, 3)?;
        out.push((
            format!("decomposition of {lit}, m = 3"),
            CollapseContext::from_decomposition(&alpha, &d)?,
        ));
    }
    let q = base_from_alpha(
        &AlphaTarget::Periodic(EventuallyPeriodicSeq::parse("11101(00011)", bin)?),
        &width,
    )?;
    let f = factorize_w(&quasi_greedy_alpha(&q, 40)?, Some(2))?;
    out.push((
        "factorization of 11101(00011), m_1 = 2".into(),
        CollapseContext::case_a(&f, 1)?,
    ));
    Ok(out)
}

fn verify_collapse(alphabet: Alphabet, k_max: usize, seed: u64, samples: usize) -> univoque::Result<Value> {
    let mut contexts = if alphabet.max_digit() == 1 {
        binary_family()?
    } else {
        Vec::new()
    };
    let mut pool = first_case_contexts(alphabet, 4, k_max.min(12))?;
    pool.retain(|c| !contexts.iter().any(|(_, d)| d == c));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<CollapseContext> = pool.choose_multiple(&mut rng, samples).cloned().collect();
    picked.sort_by(|a, b| (a.u().digits(), a.v().digits()).cmp(&(b.u().digits(), b.v().digits())));
    contexts.extend(picked.into_iter().map(|c| ("sampled".to_string(), c)));

    let mut reports = Vec::new();
    let mut failures = 0;
    let mut checked = 0;
    for (origin, ctx) in &contexts {
        let n = ctx.n();
        let ks: Vec<usize> = (n..=(n + 6).min(k_max)).collect();
        let per_k = {
            use rayon::prelude::*;
            ks.par_iter()
                .map(|&k| verify_context(ctx, k))
                .collect::<univoque::Result<Vec<_>>>()?
        };
        for r in per_k {
            failures += r.failures();
            checked += r.fiber.domain;
            reports.push(json!({ "origin": origin, "report": r }));
        }
    }
    Ok(json!({
        "suite": "collapse",
        "M": alphabet.max_digit(),
        "k_max": k_max,
        "seed": seed,
        "contexts": contexts.len(),
        "words_checked": checked,
        "failures": failures,
        "reports": reports,
    }))
}
