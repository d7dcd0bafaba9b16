//! Sigma protocol proving knowledge of a unimodular isomorphism.
//!
//! Public statement: polytopes `P0`, `P1`. Witness: unimodular `U` with
//! `U(P0 − b0) = P1 − b1`. The prover commits to `P′ ← D_s([P0])` (knowing
//! `V` with `P′ = V·P0 + Z′`), receives a bit `c` and answers `W = V·U^{−c}`;
//! the verifier checks `W ∈ GL_n(Z)` and `P′ − b_{P′} = W(P_c − b_{P_c})`.
//!
//! Wire format (LF-terminated lines):
//!
//! ```text
//! COMMIT n d
//! <d vertex lines, lexicographic>
//! CHALLENGE c
//! RESPONSE n
//! <n matrix rows>
//! ```

use std::fmt;

use num_traits::{One, Signed};
use rand::Rng;

use crate::avgcase::{check_lambda_n, ClassSampler, SamplerOptions};
use crate::error::{Error, Result};
use crate::exactalg::{det, Int, IntMatrix, Rat, UnimodularMatrix};
use crate::gaussian::{self, hp, sigma_is_sufficient};
use crate::polytope::text::{join, parse_int_row, parse_usize, parse_vertex_block, split_lines};
use crate::polytope::{LatticePolytope, Point};

/// Bits of the dyadic grid onto which [`protocol_sigma_param`] rounds up.
pub const SIGMA_GRID_BITS: usize = 32;

/// Two public polytopes of the same dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub p0: LatticePolytope,
    pub p1: LatticePolytope,
}

impl Statement {
    pub fn new(p0: LatticePolytope, p1: LatticePolytope) -> Result<Self> {
        if p0.dim() != p1.dim() {
            return Err(Error::Dimension(format!(
                "statement polytopes have dimensions {} and {}",
                p0.dim(),
                p1.dim()
            )));
        }
        Ok(Statement { p0, p1 })
    }

    pub fn dim(&self) -> usize {
        self.p0.dim()
    }

    fn side(&self, c: u8) -> &LatticePolytope {
        if c == 0 {
            &self.p0
        } else {
            &self.p1
        }
    }
}

/// Secret `U` with `U(P0 − b0) = P1 − b1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness(pub UnimodularMatrix);

impl Witness {
    pub fn check(&self, st: &Statement) -> Result<()> {
        if self.0.dim() != st.dim() {
            return Err(Error::Witness(format!("{0}x{0} matrix for dimension {1}", self.0.dim(), st.dim())));
        }
        if st.p0.vertex_count() != st.p1.vertex_count()
            || st.p0.centered_image(self.0.as_matrix())? != st.p1.sorted_centered()
        {
            return Err(Error::Witness("U(P0 − b0) differs from P1 − b1".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        format!("WITNESS {}\n{}", self.0.dim(), matrix_lines(self.0.as_matrix()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = split_lines(text)?;
        let n = parse_keyword_header(lines[0], 1, "WITNESS", 1)?[0];
        let m = parse_matrix_block(&lines[1..], 2, n)?;
        if lines.len() > n + 1 {
            return Err(Error::parse(n + 2, 1, "unexpected trailing content"));
        }
        let u = UnimodularMatrix::new(m).map_err(|e| Error::parse(2, 1, e.to_string()))?;
        Ok(Witness(u))
    }
}

/// First message: `P′`, lexicographically ordered.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub p_prime: LatticePolytope,
}

/// Prover's secret after committing: `P′ = V·P0 + Z′`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverState {
    pub v: UnimodularMatrix,
    pub z_prime: Point,
    pub p_prime: LatticePolytope,
}

/// One conversation `(P′, c, W)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transcript {
    pub commitment: Commitment,
    pub challenge: u8,
    pub response: IntMatrix,
}

/// Why [`verify`] rejected a transcript.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectReason {
    InvalidChallenge(u8),
    DimensionMismatch(String),
    VertexCountMismatch { commitment: usize, statement: usize },
    NotUnimodular(Int),
    VertexSetMismatch,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::InvalidChallenge(c) => write!(f, "challenge {c} is not a bit"),
            RejectReason::DimensionMismatch(m) => write!(f, "dimension mismatch: {m}"),
            RejectReason::VertexCountMismatch { commitment, statement } => {
                write!(f, "commitment has {commitment} vertices, statement polytope has {statement}")
            }
            RejectReason::NotUnimodular(d) => write!(f, "response has determinant {d}"),
            RejectReason::VertexSetMismatch => f.write_str("centered vertex sets differ"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(RejectReason),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Smallest multiple of `2^-32` that is at least
/// `max{λ_n(Q0), max{‖B*_{Q0}‖, ‖B*_{Q1}‖}·sqrt(ln(2n+4)/π)}`.
///
/// For `n > 4` the `λ_n` branch is skipped when `assume_s_valid` is set and is
/// an unsupported-dimension error otherwise.
pub fn protocol_sigma_param(st: &Statement, p: usize, assume_s_valid: bool) -> Result<Rat> {
    let n = st.dim();
    let q0 = st.p0.quadratic_form();
    let q1 = st.p1.quadratic_form();
    let mut best = hp::to_rat(&gaussian::min_sigma(&q0, p)).max(hp::to_rat(&gaussian::min_sigma(&q1, p)));
    let lambda_sq = if n <= 4 {
        Some(gaussian::successive_minimum(&q0, n)?.0)
    } else if assume_s_valid {
        None
    } else {
        return Err(Error::UnsupportedDimension(n));
    };
    if let Some(l2) = &lambda_sq {
        let wp = p + 64;
        let root = hp::to_rat(
            &hp::from_rat(l2, wp, astro_float::RoundingMode::Up).sqrt(wp, astro_float::RoundingMode::Up),
        );
        best = best.max(root);
    }
    let mut s = hp::ceil_dyadic(&best, SIGMA_GRID_BITS);
    if let Some(l2) = &lambda_sq {
        let step = Rat::new(Int::one(), Int::one() << SIGMA_GRID_BITS);
        while &(&s * &s) < l2 {
            s += &step;
        }
    }
    Ok(s)
}

/// Honest prover holding a class sampler for `P0`.
pub struct Prover {
    statement: Statement,
    witness: Witness,
    sampler: ClassSampler,
}

impl Prover {
    /// Rejects false witnesses before anything is sent.
    pub fn new(st: &Statement, w: &Witness, s: Rat, options: &SamplerOptions) -> Result<Self> {
        w.check(st)?;
        check_lambda_n(&st.p1, &s, options.assume_s_valid)?;
        if !sigma_is_sufficient(&st.p1.quadratic_form(), &s, options.precision) {
            return Err(Error::Parameter(format!("s = {s} is below the sampler bound for P1")));
        }
        Ok(Prover {
            statement: st.clone(),
            witness: w.clone(),
            sampler: ClassSampler::new(&st.p0, s, options)?,
        })
    }

    pub fn statement(&self) -> &Statement {
        &self.statement
    }

    pub fn commit<R: Rng + ?Sized>(&mut self, rng: &mut R) -> (Commitment, ProverState) {
        let res = self.sampler.sample(rng).result;
        let state = ProverState {
            v: res.u,
            z_prime: res.z,
            p_prime: res.r.clone(),
        };
        (Commitment { p_prime: res.r }, state)
    }

    pub fn respond(&self, state: &ProverState, c: u8) -> Result<IntMatrix> {
        prover_respond(state, &self.witness, c)
    }
}

/// Samples `P′ ← D_s([P0])` with the class sampler.
pub fn prover_commit<R: Rng + ?Sized>(
    st: &Statement,
    w: &Witness,
    s: &Rat,
    rng: &mut R,
) -> Result<(Commitment, ProverState)> {
    Ok(Prover::new(st, w, s.clone(), &SamplerOptions::default())?.commit(rng))
}

/// Uniform challenge bit.
pub fn verifier_challenge<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    u8::from(rng.gen::<bool>())
}

/// `W = V·U^{−c}`.
pub fn prover_respond(state: &ProverState, w: &Witness, c: u8) -> Result<IntMatrix> {
    match c {
        0 => Ok(state.v.as_matrix().clone()),
        1 => Ok(state.v.compose(&w.0.inverse()).into_inner()),
        _ => Err(Error::Parameter(format!("challenge {c} is not a bit"))),
    }
}

/// Accepts iff `W` is unimodular and `P′ − b_{P′} = W(P_c − b_{P_c})` as sets.
pub fn verify(st: &Statement, t: &Transcript) -> Verdict {
    let n = st.dim();
    if t.challenge > 1 {
        return Verdict::Reject(RejectReason::InvalidChallenge(t.challenge));
    }
    let pc = st.side(t.challenge);
    let pp = &t.commitment.p_prime;
    if pp.dim() != n {
        return Verdict::Reject(RejectReason::DimensionMismatch(format!(
            "commitment has dimension {}, statement {n}",
            pp.dim()
        )));
    }
    if t.response.rows() != n || t.response.cols() != n {
        return Verdict::Reject(RejectReason::DimensionMismatch(format!(
            "response is {}x{}, expected {n}x{n}",
            t.response.rows(),
            t.response.cols()
        )));
    }
    if pp.vertex_count() != pc.vertex_count() {
        return Verdict::Reject(RejectReason::VertexCountMismatch {
            commitment: pp.vertex_count(),
            statement: pc.vertex_count(),
        });
    }
    let d = det(&t.response).expect("square response");
    if !d.abs().is_one() {
        return Verdict::Reject(RejectReason::NotUnimodular(d));
    }
    let image = pc.centered_image(&t.response).expect("dimensions checked");
    if image != pp.sorted_centered() {
        return Verdict::Reject(RejectReason::VertexSetMismatch);
    }
    Verdict::Accept
}

/// Honest-verifier simulator holding class samplers for both statement sides.
pub struct Simulator {
    samplers: [ClassSampler; 2],
}

impl Simulator {
    pub fn new(st: &Statement, s: Rat, options: &SamplerOptions) -> Result<Self> {
        Ok(Simulator {
            samplers: [
                ClassSampler::new(&st.p0, s.clone(), options)?,
                ClassSampler::new(&st.p1, s, options)?,
            ],
        })
    }

    /// Samples `(R, W)` with the class sampler on `P_c`, so `R = W·P_c + Z`.
    pub fn simulate<R: Rng + ?Sized>(&mut self, c: u8, rng: &mut R) -> Result<Transcript> {
        let sampler = self
            .samplers
            .get_mut(usize::from(c))
            .ok_or_else(|| Error::Parameter(format!("challenge {c} is not a bit")))?;
        let res = sampler.sample(rng).result;
        Ok(Transcript {
            commitment: Commitment { p_prime: res.r },
            challenge: c,
            response: res.u.into_inner(),
        })
    }
}

pub fn simulate<R: Rng + ?Sized>(st: &Statement, c: u8, s: &Rat, rng: &mut R) -> Result<Transcript> {
    Simulator::new(st, s.clone(), &SamplerOptions::default())?.simulate(c, rng)
}

/// Special soundness: `U′ = W₁⁻¹·W₀` from accepting transcripts with challenges 0 and 1.
pub fn extract_witness(st: &Statement, t0: &Transcript, t1: &Transcript) -> Result<UnimodularMatrix> {
    if t0.challenge != 0 || t1.challenge != 1 {
        return Err(Error::Extraction(format!(
            "need challenges 0 and 1, got {} and {}",
            t0.challenge, t1.challenge
        )));
    }
    if t0.commitment.to_text() != t1.commitment.to_text() {
        return Err(Error::Extraction("transcripts have different commitments".into()));
    }
    for t in [t0, t1] {
        if let Verdict::Reject(reason) = verify(st, t) {
            return Err(Error::Extraction(format!("transcript with challenge {} rejected: {reason}", t.challenge)));
        }
    }
    let w0 = UnimodularMatrix::new(t0.response.clone()).map_err(|e| Error::Extraction(e.to_string()))?;
    let w1 = UnimodularMatrix::new(t1.response.clone()).map_err(|e| Error::Extraction(e.to_string()))?;
    let u = w1.inverse().compose(&w0);
    Witness(u.clone()).check(st).map_err(|e| Error::Extraction(e.to_string()))?;
    Ok(u)
}

/// Outcome of [`run_protocol`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionReport {
    pub transcripts: Vec<Transcript>,
    pub verdicts: Vec<Verdict>,
    /// Index of the first rejected round; the session stops there.
    pub aborted_at: Option<usize>,
}

impl SessionReport {
    pub fn accepted(&self) -> bool {
        self.aborted_at.is_none()
    }
}

/// `k` sequential honest rounds; prover and verifier use separate generators.
pub fn run_protocol<R1: Rng + ?Sized, R2: Rng + ?Sized>(
    st: &Statement,
    w: &Witness,
    s: &Rat,
    rounds: usize,
    options: &SamplerOptions,
    prover_rng: &mut R1,
    verifier_rng: &mut R2,
) -> Result<SessionReport> {
    let mut report = SessionReport {
        transcripts: Vec::with_capacity(rounds),
        verdicts: Vec::with_capacity(rounds),
        aborted_at: None,
    };
    if rounds == 0 {
        return Ok(report);
    }
    let mut prover = Prover::new(st, w, s.clone(), options)?;
    for k in 0..rounds {
        let (commitment, state) = prover.commit(prover_rng);
        let c = verifier_challenge(verifier_rng);
        let response = prover.respond(&state, c)?;
        let t = Transcript {
            commitment,
            challenge: c,
            response,
        };
        let verdict = verify(st, &t);
        let rejected = !verdict.is_accept();
        report.transcripts.push(t);
        report.verdicts.push(verdict);
        if rejected {
            report.aborted_at = Some(k);
            break;
        }
    }
    Ok(report)
}

fn matrix_lines(m: &IntMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        out.push_str(&join(m.row(i)));
        out.push('\n');
    }
    out
}

// `KEYWORD a b ...` with `count` nonnegative integers.
fn parse_keyword_header(line: &str, line_no: usize, keyword: &str, count: usize) -> Result<Vec<usize>> {
    let Some(rest) = line.strip_prefix(keyword).and_then(|r| r.strip_prefix(' ')) else {
        return Err(Error::parse(line_no, 1, format!("expected `{keyword}`")));
    };
    let offset = keyword.len() + 1;
    let values = parse_int_row(rest, line_no, count).map_err(|e| shift_column(e, offset))?;
    let mut col = offset + 1;
    values
        .iter()
        .map(|v| {
            let out = parse_usize(v, line_no, col, "header value");
            col += v.to_string().len() + 1;
            out
        })
        .collect()
}

fn shift_column(e: Error, offset: usize) -> Error {
    match e {
        Error::Parse { line, column, message } => Error::Parse {
            line,
            column: column + offset,
            message,
        },
        other => other,
    }
}

fn parse_matrix_block(lines: &[&str], first_line_no: usize, n: usize) -> Result<IntMatrix> {
    let rows = parse_vertex_block(lines, first_line_no, n, n)?;
    IntMatrix::from_rows(rows)
}

impl Commitment {
    pub fn to_text(&self) -> String {
        let p = &self.p_prime;
        let mut out = format!("COMMIT {} {}\n", p.dim(), p.vertex_count());
        crate::polytope::text::write_vertex_lines(p, &mut out);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines = split_lines(text)?;
        let (c, used) = parse_commitment_lines(&lines, 1)?;
        expect_end(&lines, used)?;
        Ok(c)
    }
}

fn expect_end(lines: &[&str], used: usize) -> Result<()> {
    if lines.len() > used {
        return Err(Error::parse(used + 1, 1, "unexpected trailing content"));
    }
    Ok(())
}

// Returns the commitment and the number of lines consumed.
fn parse_commitment_lines(lines: &[&str], first_line_no: usize) -> Result<(Commitment, usize)> {
    let Some(head) = lines.first() else {
        return Err(Error::parse(first_line_no, 1, "expected `COMMIT`"));
    };
    let h = parse_keyword_header(head, first_line_no, "COMMIT", 2)?;
    let (n, d) = (h[0], h[1]);
    if n == 0 || d == 0 {
        return Err(Error::parse(first_line_no, 8, "dimension and vertex count must be positive"));
    }
    let vertices = parse_vertex_block(&lines[1..], first_line_no + 1, n, d)?;
    if vertices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::parse(first_line_no + 1, 1, "commitment vertices must be in strict lexicographic order"));
    }
    let p_prime = LatticePolytope::with_order(vertices)
        .map_err(|e| Error::parse(first_line_no + 1, 1, format!("commitment is not a lattice polytope: {e}")))?;
    Ok((Commitment { p_prime }, d + 1))
}

pub fn write_challenge(c: u8) -> String {
    format!("CHALLENGE {c}\n")
}

pub fn parse_challenge(text: &str) -> Result<u8> {
    let lines = split_lines(text)?;
    let c = parse_challenge_line(lines[0], 1)?;
    expect_end(&lines, 1)?;
    Ok(c)
}

fn parse_challenge_line(line: &str, line_no: usize) -> Result<u8> {
    match line.strip_prefix("CHALLENGE ") {
        Some("0") => Ok(0),
        Some("1") => Ok(1),
        Some(_) => Err(Error::parse(line_no, 11, "challenge must be 0 or 1")),
        None => Err(Error::parse(line_no, 1, "expected `CHALLENGE`")),
    }
}

pub fn write_response(w: &IntMatrix) -> String {
    format!("RESPONSE {}\n{}", w.rows(), matrix_lines(w))
}

pub fn parse_response(text: &str) -> Result<IntMatrix> {
    let lines = split_lines(text)?;
    let (w, used) = parse_response_lines(&lines, 1)?;
    expect_end(&lines, used)?;
    Ok(w)
}

fn parse_response_lines(lines: &[&str], first_line_no: usize) -> Result<(IntMatrix, usize)> {
    let Some(head) = lines.first() else {
        return Err(Error::parse(first_line_no, 1, "expected `RESPONSE`"));
    };
    let n = parse_keyword_header(head, first_line_no, "RESPONSE", 1)?[0];
    if n == 0 {
        return Err(Error::parse(first_line_no, 10, "matrix size must be positive"));
    }
    Ok((parse_matrix_block(&lines[1..], first_line_no + 1, n)?, n + 1))
}

impl Transcript {
    pub fn to_text(&self) -> String {
        format!(
            "{}{}{}",
            self.commitment.to_text(),
            write_challenge(self.challenge),
            write_response(&self.response)
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let all = parse_transcripts(text)?;
        match <[Transcript; 1]>::try_from(all) {
            Ok([t]) => Ok(t),
            Err(v) => Err(Error::parse(1, 1, format!("expected one transcript, found {}", v.len()))),
        }
    }
}

/// Parses a concatenation of transcripts (for example one per round).
pub fn parse_transcripts(text: &str) -> Result<Vec<Transcript>> {
    let lines = split_lines(text)?;
    let mut out = Vec::new();
    let mut at = 0;
    while at < lines.len() {
        let (commitment, used) = parse_commitment_lines(&lines[at..], at + 1)?;
        at += used;
        let Some(line) = lines.get(at) else {
            return Err(Error::parse(at + 1, 1, "expected `CHALLENGE`"));
        };
        let challenge = parse_challenge_line(line, at + 1)?;
        at += 1;
        let (response, used) = parse_response_lines(&lines[at..], at + 1)?;
        at += used;
        out.push(Transcript {
            commitment,
            challenge,
            response,
        });
    }
    Ok(out)
}
