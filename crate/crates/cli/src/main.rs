//! `latpoly` command-line front end.
//!
//! Exit status: 0 for yes/accept, 1 for no/reject, 2 for usage or input errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use latpoly::avgcase::{ClassSampler, SamplerOptions};
use latpoly::exactalg::Rat;
use latpoly::polytope::text::{parse_polytope, write_polytope};
use latpoly::polytope::LatticePolytope;
use latpoly::reduction::{reduce_gip_to_uip, Reduction, SimpleGraph};
use latpoly::uip::{self, Caps, TransformSet};
use latpoly::zkp::{
    self, parse_challenge, parse_response, parse_transcripts, write_challenge, write_response, Commitment, Prover,
    Statement, Transcript, Verdict, Witness,
};
use latpoly::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Unimodular isomorphism of lattice polytopes: decision, enumeration,
/// sampling, the graph-isomorphism reduction and a zero-knowledge proof.
#[derive(Parser)]
#[command(name = "latpoly", version)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct Config {
    /// Seed for all randomness of this invocation.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Working precision in bits for the Gaussian sampler.
    #[arg(long, global = true, default_value_t = latpoly::gaussian::DEFAULT_PRECISION)]
    precision: usize,
    /// Tail cut τ of the one-dimensional samplers.
    #[arg(long, global = true, default_value_t = latpoly::gaussian::DEFAULT_TAIL_CUT)]
    tau: u32,
    /// Maximum number of minimum spanning trees to enumerate.
    #[arg(long, global = true, default_value_t = uip::DEFAULT_CAP)]
    cap_trees: usize,
    /// Maximum number of tree isomorphisms to enumerate per tree pair.
    #[arg(long, global = true, default_value_t = uip::DEFAULT_CAP)]
    cap_maps: usize,
    /// Protocol rounds.
    #[arg(long, global = true, default_value_t = 20)]
    rounds: usize,
    /// Gaussian parameter as `p/q` or an integer (default: the smallest admissible value).
    #[arg(long, global = true, value_parser = parse_rational)]
    s: Option<Rat>,
    /// Skip the λ_n check that is unavailable for n > 4.
    #[arg(long, global = true)]
    assume_s_valid: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two polytopes are unimodularly isomorphic; print one transform.
    Decide { a: PathBuf, b: PathBuf },
    /// List every transform mapping the first polytope onto the second.
    Transforms { a: PathBuf, b: PathBuf },
    /// Brute-force transform listing (small instances only).
    Oracle { a: PathBuf, b: PathBuf },
    /// Vertex labels, one `index label` line per vertex (1-based, file order).
    Labels { polytope: PathBuf },
    /// Edges of the vertex/edge graph as 1-based vertex index pairs.
    Edges { polytope: PathBuf },
    /// Sample class representatives from the discrete Gaussian over the class.
    Sample {
        polytope: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Second representative of the same class: report the total variation
        /// distance between the two empirical laws of the lexicographically first
        /// output vertex modulo 3 instead.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Reduce a graph isomorphism instance to a pair of polytopes.
    Reduce {
        graph_a: PathBuf,
        graph_b: PathBuf,
        out_a: PathBuf,
        out_b: PathBuf,
    },
    /// Prover side of the interactive proof.
    Prove {
        p0: PathBuf,
        p1: PathBuf,
        witness: PathBuf,
        /// Where verifier messages are read from (`-` for standard input).
        #[arg(long, default_value = "-")]
        input: PathBuf,
        /// Where prover messages are written to (`-` for standard output).
        #[arg(long, default_value = "-")]
        output: PathBuf,
    },
    /// Verifier side of the interactive proof, or replay of stored transcripts.
    Verify {
        p0: PathBuf,
        p1: PathBuf,
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        output: PathBuf,
        /// Append each completed transcript to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Check the transcripts stored in this file instead of interacting.
        #[arg(long, conflicts_with_all = ["input", "output", "log"])]
        transcripts: Option<PathBuf>,
    },
    /// Recover a witness from two accepting transcripts with one commitment.
    Extract {
        p0: PathBuf,
        p1: PathBuf,
        transcript_a: PathBuf,
        transcript_b: PathBuf,
        #[arg(long, default_value = "-")]
        output: PathBuf,
    },
}

fn parse_rational(s: &str) -> std::result::Result<Rat, String> {
    let r = Rat::from_str(s).map_err(|e| format!("`{s}` is not a rational p/q: {e}"))?;
    if !r.is_positive() {
        return Err(format!("`{s}` must be positive"));
    }
    Ok(r)
}

/// Independent generator for one role; streams never overlap.
fn stream(seed: u64, tag: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

const STREAM_SAMPLE: u64 = 1;
const STREAM_COMPARE: u64 = 2;
const STREAM_PROVER: u64 = 3;
const STREAM_VERIFIER: u64 = 4;

/// Failure of a command; `Input` maps to exit status 2.
enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_polytope(path: &Path) -> std::result::Result<LatticePolytope, Failure> {
    in_file(path, parse_polytope(&read_text(path)?))
}

fn read_graph(path: &Path) -> std::result::Result<SimpleGraph, Failure> {
    in_file(path, SimpleGraph::parse(&read_text(path)?))
}

fn read_statement(p0: &Path, p1: &Path) -> std::result::Result<Statement, Failure> {
    Ok(Statement::new(read_polytope(p0)?, read_polytope(p1)?)?)
}

fn open_input(path: &Path) -> io::Result<Box<dyn BufRead>> {
    if path == Path::new("-") {
        Ok(Box::new(BufReader::new(io::stdin())))
    } else {
        Ok(Box::new(BufReader::new(fs::File::open(path)?)))
    }
}

fn open_output(path: &Path) -> io::Result<Box<dyn Write>> {
    if path == Path::new("-") {
        Ok(Box::new(BufWriter::new(io::stdout())))
    } else {
        Ok(Box::new(BufWriter::new(fs::File::create(path)?)))
    }
}

fn caps(cfg: &Config) -> Caps {
    Caps {
        trees: cfg.cap_trees,
        maps: cfg.cap_maps,
    }
}

fn sampler_options(cfg: &Config) -> SamplerOptions {
    SamplerOptions {
        precision: cfg.precision,
        tail_cut: cfg.tau,
        assume_s_valid: cfg.assume_s_valid,
    }
}

fn print_transforms(set: &TransformSet) -> Outcome {
    let mut out = String::new();
    out.push_str(&format!("TRANSFORMS {}\n", set.len()));
    for map in set {
        out.push_str(&format!("{map}\n"));
    }
    print!("{out}");
    Ok(!set.is_empty())
}

fn cmd_decide(cfg: &Config, a: &Path, b: &Path) -> Outcome {
    let (p, q) = (read_polytope(a)?, read_polytope(b)?);
    match uip::find_transform(&p, &q, caps(cfg))? {
        Some(map) => {
            println!("ISOMORPHIC\n{map}");
            Ok(true)
        }
        None => {
            println!("NOT-ISOMORPHIC");
            Ok(false)
        }
    }
}

fn cmd_labels(path: &Path) -> Outcome {
    let p = read_polytope(path)?;
    let gw = uip::labeled_graph(&p);
    let mut out = String::new();
    for (i, l) in gw.labels().iter().enumerate() {
        out.push_str(&format!("{} {l}\n", i + 1));
    }
    print!("{out}");
    Ok(true)
}

fn cmd_edges(path: &Path) -> Outcome {
    let g = read_polytope(path)?.edge_graph();
    let mut out = format!("EDGES {}\n", g.edge_count());
    for (a, b) in g.edges() {
        out.push_str(&format!("{} {}\n", a + 1, b + 1));
    }
    print!("{out}");
    Ok(true)
}

/// `--s`, or else the smallest admissible grid value for `p`.
fn class_sigma(cfg: &Config, p: &LatticePolytope) -> std::result::Result<Rat, Failure> {
    match &cfg.s {
        Some(s) => Ok(s.clone()),
        None => {
            let st = Statement::new(p.clone(), p.clone())?;
            Ok(zkp::protocol_sigma_param(&st, cfg.precision, cfg.assume_s_valid)?)
        }
    }
}

/// Coarse statistic of a sampled representative: its lexicographically first
/// vertex modulo 3. Raw outputs are too spread out to compare empirically.
fn feature(r: &LatticePolytope) -> Vec<BigInt> {
    let first = r.vertices().iter().min().expect("nonempty polytope");
    first.iter().map(|x| x.mod_floor(&BigInt::from(3))).collect()
}

fn cmd_sample(cfg: &Config, path: &Path, count: usize, compare: Option<&Path>) -> Outcome {
    let p = read_polytope(path)?;
    let s = class_sigma(cfg, &p)?;
    let opts = sampler_options(cfg);
    let mut sampler = ClassSampler::new(&p, s.clone(), &opts)?;
    let mut rng = stream(cfg.seed, STREAM_SAMPLE);
    if let Some(other) = compare {
        let q = read_polytope(other)?;
        let mut second = ClassSampler::new(&q, s, &opts)?;
        let mut rng2 = stream(cfg.seed, STREAM_COMPARE);
        let mut law: BTreeMap<Vec<BigInt>, (usize, usize)> = BTreeMap::new();
        for _ in 0..count {
            law.entry(feature(&sampler.sample(&mut rng).result.r)).or_default().0 += 1;
            law.entry(feature(&second.sample(&mut rng2).result.r)).or_default().1 += 1;
        }
        let diff: usize = law.values().map(|&(x, y)| x.abs_diff(y)).sum();
        let tv = diff as f64 / (2.0 * count.max(1) as f64);
        println!("CLASSES {}\nTV {tv:.4}", law.len());
        return Ok(true);
    }
    let mut out = String::new();
    for k in 0..count {
        let res = sampler.sample(&mut rng).result;
        out.push_str(&format!("# sample {}\n", k + 1));
        for line in res.map().to_string().lines() {
            out.push_str(&format!("# {line}\n"));
        }
        out.push_str(&write_polytope(&res.r));
    }
    print!("{out}");
    Ok(true)
}

fn cmd_reduce(graph_a: &Path, graph_b: &Path, out_a: &Path, out_b: &Path) -> Outcome {
    let (g, h) = (read_graph(graph_a)?, read_graph(graph_b)?);
    match reduce_gip_to_uip(&g, &h)? {
        Reduction::Trivial(answer) => {
            println!("TRIVIAL {}", if answer { "ISOMORPHIC" } else { "NOT-ISOMORPHIC" });
            Ok(answer)
        }
        Reduction::Pair(p, q) => {
            fs::write(out_a, write_polytope(&p))?;
            fs::write(out_b, write_polytope(&q))?;
            println!("REDUCED {} {} {}", p.dim(), p.vertex_count(), q.vertex_count());
            Ok(true)
        }
    }
}

/// Reads one protocol message: a header line plus the lines it announces.
fn read_message(reader: &mut dyn BufRead, keyword: &str) -> std::result::Result<String, Failure> {
    let mut text = String::new();
    if reader.read_line(&mut text)? == 0 {
        return Err(Failure::Input(format!("channel closed while waiting for {keyword}")));
    }
    let header: Vec<&str> = text.trim_end_matches('\n').split(' ').collect();
    let body = match (header.first().copied(), keyword) {
        (Some("COMMIT"), "COMMIT") => header.get(2).and_then(|d| d.parse::<usize>().ok()),
        (Some("RESPONSE"), "RESPONSE") => header.get(1).and_then(|n| n.parse::<usize>().ok()),
        (Some("CHALLENGE"), "CHALLENGE") => Some(0),
        _ => None,
    };
    // Malformed headers are left to the strict parser for a diagnostic.
    for _ in 0..body.unwrap_or(0) {
        if reader.read_line(&mut text)? == 0 {
            break;
        }
    }
    Ok(text)
}

fn send(out: &mut dyn Write, text: &str) -> io::Result<()> {
    out.write_all(text.as_bytes())?;
    out.flush()
}

fn cmd_prove(cfg: &Config, p0: &Path, p1: &Path, witness: &Path, input: &Path, output: &Path) -> Outcome {
    let st = read_statement(p0, p1)?;
    let w = in_file(witness, Witness::parse(&read_text(witness)?))?;
    let s = match &cfg.s {
        Some(s) => s.clone(),
        None => zkp::protocol_sigma_param(&st, cfg.precision, cfg.assume_s_valid)?,
    };
    let mut prover = Prover::new(&st, &w, s, &sampler_options(cfg))?;
    let mut rng = stream(cfg.seed, STREAM_PROVER);
    let mut reader = open_input(input)?;
    let mut writer = open_output(output)?;
    for _ in 0..cfg.rounds {
        let (commitment, state) = prover.commit(&mut rng);
        send(&mut writer, &commitment.to_text())?;
        let c = parse_challenge(&read_message(&mut reader, "CHALLENGE")?)?;
        send(&mut writer, &write_response(&prover.respond(&state, c)?))?;
    }
    Ok(true)
}

fn report_verdict(report: &mut dyn Write, round: usize, verdict: &Verdict) -> io::Result<()> {
    match verdict {
        Verdict::Accept => writeln!(report, "round {round}: accept"),
        Verdict::Reject(reason) => writeln!(report, "round {round}: reject ({reason})"),
    }
}

fn cmd_verify(cfg: &Config, p0: &Path, p1: &Path, input: &Path, output: &Path, log: Option<&Path>) -> Outcome {
    let st = read_statement(p0, p1)?;
    let mut rng = stream(cfg.seed, STREAM_VERIFIER);
    let mut reader = open_input(input)?;
    let mut writer = open_output(output)?;
    // The report shares no channel with the prover.
    let mut report: Box<dyn Write> = if output == Path::new("-") {
        Box::new(io::stderr())
    } else {
        Box::new(io::stdout())
    };
    let mut log_file = match log {
        Some(path) => Some(fs::OpenOptions::new().create(true).append(true).open(path)?),
        None => None,
    };
    for round in 1..=cfg.rounds {
        let commitment = Commitment::parse(&read_message(&mut reader, "COMMIT")?)?;
        let c = zkp::verifier_challenge(&mut rng);
        send(&mut writer, &write_challenge(c))?;
        let response = parse_response(&read_message(&mut reader, "RESPONSE")?)?;
        let t = Transcript {
            commitment,
            challenge: c,
            response,
        };
        if let Some(f) = log_file.as_mut() {
            f.write_all(t.to_text().as_bytes())?;
        }
        let verdict = zkp::verify(&st, &t);
        report_verdict(&mut report, round, &verdict)?;
        if !verdict.is_accept() {
            writeln!(report, "REJECT")?;
            return Ok(false);
        }
    }
    writeln!(report, "ACCEPT")?;
    Ok(true)
}

fn cmd_replay(p0: &Path, p1: &Path, path: &Path) -> Outcome {
    let st = read_statement(p0, p1)?;
    let transcripts = in_file(path, parse_transcripts(&read_text(path)?))?;
    let mut out = Vec::new();
    let mut all = true;
    for (k, t) in transcripts.iter().enumerate() {
        let verdict = zkp::verify(&st, t);
        all &= verdict.is_accept();
        report_verdict(&mut out, k + 1, &verdict)?;
    }
    writeln!(out, "{}", if all { "ACCEPT" } else { "REJECT" })?;
    io::stdout().write_all(&out)?;
    Ok(all)
}

fn cmd_extract(p0: &Path, p1: &Path, a: &Path, b: &Path, output: &Path) -> Outcome {
    let st = read_statement(p0, p1)?;
    let ta = in_file(a, Transcript::parse(&read_text(a)?))?;
    let tb = in_file(b, Transcript::parse(&read_text(b)?))?;
    let (t0, t1) = if ta.challenge == 0 { (ta, tb) } else { (tb, ta) };
    match zkp::extract_witness(&st, &t0, &t1) {
        Ok(u) => {
            let mut w = open_output(output)?;
            send(&mut w, &Witness(u).to_text())?;
            Ok(true)
        }
        Err(e @ Error::Extraction(_)) => {
            eprintln!("{e}");
            Ok(false)
        }
        Err(e) => Err(e.into()),
    }
}

fn run(cli: Cli) -> Outcome {
    let cfg = &cli.config;
    match &cli.command {
        Command::Decide { a, b } => cmd_decide(cfg, a, b),
        Command::Transforms { a, b } => {
            let (p, q) = (read_polytope(a)?, read_polytope(b)?);
            print_transforms(&uip::all_transforms(&p, &q, caps(cfg))?)
        }
        Command::Oracle { a, b } => {
            let (p, q) = (read_polytope(a)?, read_polytope(b)?);
            print_transforms(&uip::oracle_all_transforms(&p, &q)?)
        }
        Command::Labels { polytope } => cmd_labels(polytope),
        Command::Edges { polytope } => cmd_edges(polytope),
        Command::Sample {
            polytope,
            count,
            compare,
        } => cmd_sample(cfg, polytope, *count, compare.as_deref()),
        Command::Reduce {
            graph_a,
            graph_b,
            out_a,
            out_b,
        } => cmd_reduce(graph_a, graph_b, out_a, out_b),
        Command::Prove {
            p0,
            p1,
            witness,
            input,
            output,
        } => cmd_prove(cfg, p0, p1, witness, input, output),
        Command::Verify {
            p0,
            p1,
            transcripts: Some(path),
            ..
        } => cmd_replay(p0, p1, path),
        Command::Verify {
            p0,
            p1,
            input,
            output,
            log,
            transcripts: None,
        } => cmd_verify(cfg, p0, p1, input, output, log.as_deref()),
        Command::Extract {
            p0,
            p1,
            transcript_a,
            transcript_b,
            output,
        } => cmd_extract(p0, p1, transcript_a, transcript_b, output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
