//! Seeded sampling from a Boltzmann model and convergence of relative frequencies.
//!
//! Streams come from ChaCha8 seeded with a 64-bit seed. Independent runs
//! derived from one seed use separate ChaCha streams, so results do not depend
//! on how runs are scheduled across threads.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, PartialAssignment, SpinConfiguration};
use crate::model::{BoltzmannModel, Hamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerKind {
    /// Independent draws by inversion of the cumulative weights.
    ExactCategorical,
    /// Single-spin-flip Metropolis with uniform site proposals.
    /// `burn_in` and `thin` count proposed flips.
    Metropolis { burn_in: usize, thin: usize },
}

impl SamplerKind {
    /// Metropolis with `10 * N * 1024` burn-in flips and `N` flips between samples.
    pub fn metropolis_default(nodes: usize) -> Self {
        SamplerKind::Metropolis { burn_in: 10 * nodes * 1024, thin: nodes.max(1) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRun {
    pub seed: u64,
    pub n: usize,
    pub kind: SamplerKind,
}

impl SampleRun {
    pub fn exact(seed: u64, n: usize) -> Self {
        SampleRun { seed, n, kind: SamplerKind::ExactCategorical }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("sample count must be at least 1".into()));
        }
        if let SamplerKind::Metropolis { thin: 0, .. } = self.kind {
            return Err(Error::InvalidArgument("thinning stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Generator for `seed`, on ChaCha stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `run.n` configuration words from the model.
pub fn sample_words(model: &BoltzmannModel, run: &SampleRun) -> Result<Vec<u32>> {
    run.validate()?;
    let mut rng = stream_rng(run.seed, 0);
    match run.kind {
        SamplerKind::ExactCategorical => {
            let weights = model.configuration_weights();
            let dist = WeightedIndex::new(&weights)
                .map_err(|e| Error::NumericRange(format!("cannot build sampling table: {e}")))?;
            Ok((0..run.n).map(|_| dist.sample(&mut rng) as u32).collect())
        }
        SamplerKind::Metropolis { burn_in, thin } => {
            Ok(metropolis(model.hamiltonian(), model.beta(), &mut rng, burn_in, thin, run.n))
        }
    }
}

pub fn sample(model: &BoltzmannModel, run: &SampleRun) -> Result<Vec<SpinConfiguration>> {
    let n = model.len();
    Ok(sample_words(model, run)?.into_iter().map(|b| SpinConfiguration::from_bits(b, n)).collect())
}

/// Metropolis sampling straight from a spec, without enumerating it.
pub fn sample_spec_metropolis(
    spec: &LatticeSpec,
    seed: u64,
    n: usize,
    burn_in: usize,
    thin: usize,
) -> Result<Vec<u32>> {
    SampleRun { seed, n, kind: SamplerKind::Metropolis { burn_in, thin } }.validate()?;
    spec.validate()?;
    let mut rng = stream_rng(seed, 0);
    Ok(metropolis(&Hamiltonian::compile(spec), spec.beta, &mut rng, burn_in, thin, n))
}

fn metropolis(h: &Hamiltonian, beta: f64, rng: &mut ChaCha8Rng, burn_in: usize, thin: usize, n: usize) -> Vec<u32> {
    let len = h.len();
    let mask = if len >= 32 { u32::MAX } else { (1u32 << len) - 1 };
    let mut bits: u32 = rng.gen::<u32>() & mask;
    let mut step = |bits: &mut u32| {
        if len == 0 {
            return;
        }
        let site = rng.gen_range(0..len);
        let delta = h.flip_delta(*bits, site);
        if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
            *bits ^= 1 << site;
        }
    };
    for _ in 0..burn_in {
        step(&mut bits);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for _ in 0..thin {
            step(&mut bits);
        }
        out.push(bits);
    }
    out
}

/// Running relative frequency at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    /// Samples drawn so far.
    pub n: usize,
    /// Samples matching the conditioning event.
    pub matched: usize,
    pub freq: f64,
    pub exact: f64,
    /// Binomial standard error `sqrt(p(1-p)/matched)`.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub event: String,
    pub given: String,
    pub exact: f64,
    pub trace: Vec<TracePoint>,
    pub final_deviation: f64,
    pub final_se: f64,
    /// Set when too few samples satisfied the conditioning event.
    pub warning: Option<String>,
}

impl ConvergenceReport {
    /// Whether the final deviation is within `sigmas` standard errors.
    pub fn within(&self, sigmas: f64) -> bool {
        self.final_deviation <= sigmas * self.final_se
    }
}

/// Decade checkpoints `10², 10³, …` below `n`, then `n` itself.
pub fn default_checkpoints(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> =
        std::iter::successors(Some(100usize), |c| c.checked_mul(10)).take_while(|&c| c < n).collect();
    out.push(n);
    out
}

/// Tracks the frequency of `event` among samples satisfying `given` against
/// the exact conditional probability.
pub fn frequency_report(
    model: &BoltzmannModel,
    run: &SampleRun,
    event: &PartialAssignment,
    given: &PartialAssignment,
) -> Result<ConvergenceReport> {
    let exact = if given.is_empty() { model.marginal(event)? } else { model.conditional(event, given)? };
    let words = sample_words(model, run)?;
    Ok(frequency_from_words(model, &words, event, given, exact, &default_checkpoints(run.n)))
}

/// Same as [`frequency_report`] on words already drawn.
pub fn frequency_from_words(
    model: &BoltzmannModel,
    words: &[u32],
    event: &PartialAssignment,
    given: &PartialAssignment,
    exact: f64,
    checkpoints: &[usize],
) -> ConvergenceReport {
    let (gm, gb) = (given.mask(), given.bits());
    let (em, eb) = (event.mask(), event.bits());
    let mut matched = 0usize;
    let mut hits = 0usize;
    let mut trace = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().copied().peekable();
    let point = |n, matched: usize, hits: usize| {
        let freq = if matched == 0 { f64::NAN } else { hits as f64 / matched as f64 };
        let se = if matched == 0 { f64::NAN } else { (exact * (1.0 - exact) / matched as f64).sqrt() };
        TracePoint { n, matched, freq, exact, se }
    };
    for (i, &w) in words.iter().enumerate() {
        if w & gm == gb {
            matched += 1;
            if w & em == eb {
                hits += 1;
            }
        }
        while next.peek() == Some(&(i + 1)) {
            trace.push(point(i + 1, matched, hits));
            next.next();
        }
    }
    let last = trace.last().copied().unwrap_or_else(|| point(words.len(), matched, hits));
    let warning = (matched == 0)
        .then(|| format!("insufficient postselection: 0 of {} samples matched the condition", words.len()));
    ConvergenceReport {
        event: event.describe(model.spec()),
        given: given.describe(model.spec()),
        exact,
        trace,
        final_deviation: (last.freq - exact).abs(),
        final_se: last.se,
        warning,
    }
}
