//! Command-line entry point.
//!
//! Settings are layered: command-line flag, then `PQEXT_<KEY>` environment
//! variable, then the `--config` file (flat `key = value` lines, `#`
//! comments), then the built-in default. Keys are the long flag names; in
//! files `_` and `-` are interchangeable.
//!
//! Exit codes: 0 success, 1 rejection or failed run, 2 usage error.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bits::Bits;
use crate::circuit::{compile_target_predicate, Circuit};
use crate::ecnp::EcnpParams;
use crate::error::{Error, Result};
use crate::harness::suite::{unruh_from_weak, unruh_suite, views_with_inconsistent_pairs, w_suite};
use crate::harness::{
    serfling_experiment, simless_prepare, soundness_experiment, unruh_bound_experiment, write_csv, write_json, zk_experiment, zk_support_check, ExperimentConfig,
};
use crate::prg::{PrgBackend, PrgSpec};
use crate::transport::session::{connect_retry, normalize_addr, run_in_process, run_session, serve, ProtocolId, Role, SessionOutcome, SessionParams};

#[derive(Parser, Debug)]
#[command(name = "pqext", version, about = "Extractable commitments and commit-and-prove over a two-party channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Commit stage of the strong (or, with --weak, the weak) commitment.
    Commit(Common),
    /// Commit stage followed by the decommit stage.
    Decommit(Common),
    /// Commit-and-prove: commit, then prove a predicate of the message.
    Prove(Common),
    /// Coin flipping.
    Coinflip(Common),
    /// Zero-knowledge argument of knowledge of a witness for a relation.
    Zkaok(Common),
    /// Selective-opening commitment: commit to several messages, open some.
    Socom(Common),
    /// Quantitative experiments; CSV on stdout or --out.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Subcommand, Debug)]
enum Experiment {
    /// Rewinding bound β ≥ α³ over a suite of programmed strategies.
    Unruh(ExpArgs),
    /// Sampling-without-replacement tails against their bound.
    Serfling(ExpArgs),
    /// Cut-and-choose acceptance of a committer with inconsistent views.
    Soundness(ExpArgs),
    /// Zero-knowledge simulator runs and exact support comparison.
    Zk(ExpArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// sender | receiver (aliases: committer, prover, verifier).
    #[arg(long)]
    role: Option<String>,
    /// Address to accept sessions on, e.g. `:9000`.
    #[arg(long, conflicts_with = "connect")]
    listen: Option<String>,
    /// Address of the listening peer.
    #[arg(long)]
    connect: Option<String>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Message length in bits when no message is given.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    coin_len: Option<usize>,
    #[arg(long)]
    p: Option<u32>,
    /// toy | production.
    #[arg(long)]
    prg: Option<String>,
    #[arg(long)]
    msg_hex: Option<String>,
    #[arg(long)]
    circuit_file: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    transcript_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the weak commitment (commit, decommit).
    #[arg(long)]
    weak: bool,
    /// Messages per selective-opening commitment.
    #[arg(long)]
    t_msgs: Option<usize>,
    /// Comma-separated indices the selective-opening receiver opens.
    #[arg(long)]
    reveal: Option<String>,
    /// Sessions to accept before exiting when listening.
    #[arg(long)]
    sessions: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
struct ExpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Serfling: number of ones in the population.
    #[arg(long)]
    ones: Option<usize>,
    /// Serfling: comma-separated deviations.
    #[arg(long)]
    deltas: Option<String>,
    /// Soundness: size of the inconsistency matching.
    #[arg(long)]
    pairs: Option<usize>,
    /// CSV destination instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Resolved settings: flag > env > file > default.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(flags: Vec<(&str, Option<String>)>, config_flag: Option<&Path>, env: &dyn Fn(&str) -> Option<String>) -> Result<Self> {
        let mut values = BTreeMap::new();
        let config = config_flag.map(Path::to_path_buf).or_else(|| env("PQEXT_CONFIG").map(PathBuf::from));
        if let Some(path) = config {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Param(format!("{}: {e}", path.display())))?;
            values.extend(parse_config(&text)?);
        }
        for (key, flag) in flags {
            if let Some(v) = env(&env_name(key)) {
                values.insert(key.to_string(), v);
            }
            if let Some(v) = flag {
                values.insert(key.to_string(), v);
            }
        }
        Ok(Settings { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(|v| v.trim().parse().map_err(|_| Error::Param(format!("bad value {v:?} for {key}")))).transpose()
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }
}

fn env_name(key: &str) -> String {
    format!("PQEXT_{}", key.to_uppercase().replace('-', "_"))
}

/// Flat `key = value` text; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Param(format!("config line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

fn common_flags(c: &Common) -> Vec<(&'static str, Option<String>)> {
    let s = |v: &Option<usize>| v.map(|x| x.to_string());
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    vec![
        ("role", c.role.clone()),
        ("listen", c.listen.clone()),
        ("connect", c.connect.clone()),
        ("lambda", s(&c.lambda)),
        ("n", s(&c.n)),
        ("t", s(&c.t)),
        ("k", s(&c.k)),
        ("len", s(&c.len)),
        ("coin-len", s(&c.coin_len)),
        ("p", c.p.map(|x| x.to_string())),
        ("prg", c.prg.clone()),
        ("msg-hex", c.msg_hex.clone()),
        ("circuit-file", path(&c.circuit_file)),
        ("seed", c.seed.map(|x| x.to_string())),
        ("transcript-out", path(&c.transcript_out)),
        ("weak", c.weak.then(|| "true".to_string())),
        ("t-msgs", s(&c.t_msgs)),
        ("reveal", c.reveal.clone()),
        ("sessions", s(&c.sessions)),
    ]
}

fn exp_flags(e: &ExpArgs) -> Vec<(&'static str, Option<String>)> {
    let mut f = common_flags(&e.common);
    f.extend([
        ("trials", e.trials.map(|x| x.to_string())),
        ("epsilon", e.epsilon.map(|x| x.to_string())),
        ("delta", e.delta.map(|x| x.to_string())),
        ("ones", e.ones.map(|x| x.to_string())),
        ("deltas", e.deltas.clone()),
        ("pairs", e.pairs.map(|x| x.to_string())),
        ("out", e.out.as_ref().map(|p| p.display().to_string())),
        ("report", e.report.as_ref().map(|p| p.display().to_string())),
    ]);
    f
}

/// Message from hex; `len` (when set) trims trailing pad bits of the last
/// byte, so odd lengths can be given.
fn parse_message(hex_text: &str, len: Option<usize>) -> Result<Bits> {
    let bytes = hex::decode(hex_text.trim()).map_err(|e| Error::Param(format!("--msg-hex: {e}")))?;
    let all = bytes.len() * 8;
    match len {
        Some(l) if l <= all && l + 8 > all => Ok(Bits::from_bytes_len(&bytes, l)),
        Some(l) => Err(Error::Param(format!("--msg-hex has {all} bits, --len is {l}"))),
        None => Ok(Bits::from_bytes(&bytes)),
    }
}

fn session_params(s: &Settings, experiment: bool) -> Result<SessionParams> {
    let d = SessionParams::default();
    let prg = match s.raw("prg") {
        Some(v) => PrgBackend::parse(v).ok_or_else(|| Error::Param(format!("unknown prg backend {v:?}")))?,
        None => d.prg,
    };
    let len_flag = s.get::<usize>("len")?;
    let message = s.raw("msg-hex").map(|h| parse_message(h, len_flag)).transpose()?;
    let circuit = match s.raw("circuit-file") {
        Some(path) => Some(Circuit::parse(&std::fs::read_to_string(path).map_err(|e| Error::Param(format!("{path}: {e}")))?)?),
        None => None,
    };
    let reveal = match s.raw("reveal") {
        Some(v) => v.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse().map_err(|_| Error::Param(format!("bad reveal index {x:?}")))).collect::<Result<BTreeSet<usize>>>()?,
        None => d.reveal.clone(),
    };
    // Experiments audit with a long coin so the audit subset is close to
    // uniform even at toy λ.
    let coin_default = if experiment { Some(128) } else { None };
    Ok(SessionParams {
        lambda: s.or("lambda", d.lambda)?,
        prg,
        n: s.or("n", d.n)?,
        t: s.or("t", d.t)?,
        k: s.get("k")?,
        len: len_flag.unwrap_or(d.len),
        coin_len: s.get("coin-len")?.or(coin_default),
        p: s.or("p", d.p)?,
        message,
        circuit,
        t_msgs: s.or("t-msgs", d.t_msgs)?,
        reveal,
    })
}

/// Runs the CLI with the process environment, printing to stdout.
pub fn cli_main<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    cli_run(argv, &|k| std::env::var(k).ok(), &mut std::io::stdout())
}

/// Runs the CLI with an explicit environment and output.
pub fn cli_run<I: IntoIterator<Item = String>>(argv: I, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, env, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Param(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<bool> {
    let (protocol, common) = match command {
        Command::Commit(c) => (if c.weak { ProtocolId::WCommit } else { ProtocolId::Commit }, c),
        Command::Decommit(c) => (if c.weak { ProtocolId::WDecommit } else { ProtocolId::Decommit }, c),
        Command::Prove(c) => (ProtocolId::Prove, c),
        Command::Coinflip(c) => (ProtocolId::CoinFlip, c),
        Command::Zkaok(c) => (ProtocolId::Zkaok, c),
        Command::Socom(c) => (ProtocolId::SoCom, c),
        Command::Experiment(e) => return experiment(e, env, out),
    };
    let s = Settings::resolve(common_flags(&common), common.config.as_deref(), env)?;
    let params = session_params(&s, false)?;
    let seed = s.or("seed", 0u64)?;
    let transcript_out = s.raw("transcript-out").map(PathBuf::from);
    let outcomes: Vec<SessionOutcome> = match (s.raw("listen"), s.raw("connect")) {
        (Some(_), Some(_)) => return Err(Error::Param("give --listen or --connect, not both".into())),
        (None, None) => vec![run_in_process(protocol, &params, seed)?],
        (listen, connect) => {
            let role: Role = s.raw("role").ok_or_else(|| Error::Param("--role is required with --listen or --connect".into()))?.parse()?;
            if let Some(addr) = listen {
                let listener = TcpListener::bind(normalize_addr(addr)).map_err(|e| Error::Session(format!("bind {addr}: {e}")))?;
                let sessions = s.or("sessions", 1usize)?;
                let p = params.clone();
                serve(listener, sessions, move |mut ch| run_session(protocol, role, &mut ch, &p, seed))?.into_iter().collect::<Result<_>>()?
            } else {
                let addr = connect.expect("one of the two");
                let mut ch = connect_retry(addr, Duration::from_secs(10))?;
                vec![run_session(protocol, role, &mut ch, &params, seed)?]
            }
        }
    };
    for (i, o) in outcomes.iter().enumerate() {
        writeln!(out, "{}", serde_json::to_string(o).expect("outcome serializes")).map_err(io)?;
        if let Some(path) = &transcript_out {
            let path = if outcomes.len() == 1 { path.clone() } else { path.with_extension(format!("{i}.json")) };
            o.transcript.save(&path)?;
        }
    }
    Ok(outcomes.iter().all(|o| o.accepted))
}

fn io(e: std::io::Error) -> Error {
    Error::Session(e.to_string())
}

fn emit<T: Serialize>(rows: &[T], s: &Settings, out: &mut dyn Write) -> Result<()> {
    match s.raw("out") {
        Some(path) => write_csv(rows, std::fs::File::create(path).map_err(io)?),
        None => write_csv(rows, out),
    }
}

fn report<T: Serialize>(value: &T, s: &Settings) -> Result<()> {
    match s.raw("report") {
        Some(path) => write_json(value, Path::new(path)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct SoundnessRow {
    n: usize,
    t: usize,
    pairs: usize,
    trials: usize,
    accepts: usize,
    empirical: f64,
    exact: f64,
    exact_fraction: String,
    sigma: f64,
    within_3_sigma: bool,
    cover_lo: usize,
    cover_hi: usize,
    matching: usize,
}

#[derive(Serialize)]
struct ZkRow {
    n: usize,
    t: usize,
    runs: usize,
    accepted: usize,
    attempts: usize,
    chi_square: f64,
    p_value: f64,
    micro_executions: usize,
    micro_identical_support: bool,
    micro_identical_distribution: bool,
}

fn experiment(e: Experiment, env: &dyn Fn(&str) -> Option<String>, out: &mut dyn Write) -> Result<bool> {
    let args = match &e {
        Experiment::Unruh(a) | Experiment::Serfling(a) | Experiment::Soundness(a) | Experiment::Zk(a) => a.clone(),
    };
    let s = Settings::resolve(exp_flags(&args), args.common.config.as_deref(), env)?;
    let base = ExperimentConfig::default();
    let seed = s.or("seed", base.seed)?;
    let cfg = |trials: usize| ExperimentConfig::new(s.or("epsilon", base.epsilon)?, s.or("delta", base.delta)?, s.or("trials", trials)?, seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match e {
        Experiment::Unruh(_) => {
            let mut strategies = unruh_suite(&mut rng);
            let wp = crate::wextcom::WParams::new(s.or("k", 4)?, 8, PrgSpec::toy(s.or("lambda", 4)?)?)?;
            for adv in w_suite(&wp, &mut rng)? {
                let point = simless_prepare(adv.clone(), &wp, &mut rng);
                strategies.push(unruh_from_weak(&format!("weak-{}", adv.id), &point));
            }
            let rows = strategies.iter().map(unruh_bound_experiment).collect::<Result<Vec<_>>>()?;
            emit(&rows, &s, out)?;
            report(&rows, &s)?;
            Ok(rows.iter().all(|r| r.bound_holds))
        }
        Experiment::Serfling(_) => {
            let n = s.or("n", 16usize)?;
            let k = s.or("k", 6usize)?;
            let ones = s.or("ones", n / 2)?;
            if ones > n {
                return Err(Error::Param(format!("--ones {ones} exceeds --n {n}")));
            }
            let deltas = s
                .raw("deltas")
                .unwrap_or("0.1,0.2,0.3")
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Param(format!("bad delta {x:?}"))))
                .collect::<Result<Vec<_>>>()?;
            let b = Bits::from_bools(&(0..n).map(|i| i < ones).collect::<Vec<_>>());
            let rows = serfling_experiment(&b, k, &deltas, &cfg(100_000)?)?;
            emit(&rows, &s, out)?;
            report(&rows, &s)?;
            Ok(rows.iter().all(|r| r.holds))
        }
        Experiment::Soundness(_) => {
            let mut p = session_params(&s, true)?;
            p.n = s.or("n", 30)?;
            p.t = s.or("t", 10)?;
            p.lambda = s.or("lambda", 4)?;
            p.prg = match s.raw("prg") {
                Some(v) => PrgBackend::parse(v).ok_or_else(|| Error::Param(format!("unknown prg backend {v:?}")))?,
                None => PrgBackend::ToyEnumerable,
            };
            p.k = Some(s.or("k", 2)?);
            p.len = s.or("len", 8)?;
            let pairs = s.or("pairs", 5usize)?;
            if 2 * pairs > p.n {
                return Err(Error::Param(format!("a matching of {pairs} edges needs n ≥ {}", 2 * pairs)));
            }
            let sp = p.strong()?;
            let edges: Vec<(usize, usize)> = (0..pairs).map(|i| (2 * i, 2 * i + 1)).collect();
            let views = views_with_inconsistent_pairs(&Bits::zeros(sp.len), &sp, &edges, &mut rng)?;
            let rep = soundness_experiment(views, &sp, &cfg(10_000)?)?;
            let row = SoundnessRow {
                n: rep.n,
                t: rep.t,
                pairs,
                trials: rep.trials,
                accepts: rep.accepts,
                empirical: rep.empirical,
                exact: rep.exact,
                exact_fraction: rep.exact_fraction.clone(),
                sigma: rep.sigma,
                within_3_sigma: rep.within_3_sigma,
                cover_lo: rep.graph.cover.0,
                cover_hi: rep.graph.cover.1,
                matching: rep.graph.matching,
            };
            emit(&[row], &s, out)?;
            report(&rep, &s)?;
            Ok(rep.within_3_sigma)
        }
        Experiment::Zk(_) => {
            let mut p = session_params(&s, true)?;
            p.n = s.or("n", 6)?;
            p.t = s.or("t", 2)?;
            p.lambda = s.or("lambda", 4)?;
            p.prg = match s.raw("prg") {
                Some(v) => PrgBackend::parse(v).ok_or_else(|| Error::Param(format!("unknown prg backend {v:?}")))?,
                None => PrgBackend::ToyEnumerable,
            };
            p.k = Some(s.or("k", 2)?);
            p.len = s.or("len", 8)?;
            let params: EcnpParams = p.ecnp()?;
            let o = params.outer;
            let circuit = match p.circuit.clone() {
                Some(c) => c,
                None => {
                    let target = p.message.clone().unwrap_or_else(|| Bits::from_bools(&vec![true; o.len]));
                    compile_target_predicate(&target, o.len, o.vss().chunk_bits(), &o.vss().field)?
                }
            };
            let rep = zk_experiment(&params, &circuit, &cfg(1000)?)?;
            let square = Circuit::parse("0 input 0\n1 mul 0 0\n2 output 1\n")?;
            let micro = zk_support_check(&square, 4, 5, 1)?;
            let row = ZkRow {
                n: rep.n,
                t: rep.t,
                runs: rep.runs,
                accepted: rep.accepted,
                attempts: rep.attempts,
                chi_square: rep.chi_square,
                p_value: rep.p_value,
                micro_executions: micro.executions,
                micro_identical_support: micro.identical_support,
                micro_identical_distribution: micro.identical_distribution,
            };
            emit(&[&row], &s, out)?;
            report(&row, &s)?;
            Ok(rep.accepted == rep.runs && rep.p_value > 0.01 && micro.identical_distribution)
        }
    }
}
