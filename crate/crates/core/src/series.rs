//! High-temperature closed forms for the homogeneous ladder and open chains.
//!
//! With `K = tanh(βJ)` every Boltzmann factor is `cosh(βJ)(1 + K σi σj)`, so
//! sums over spins keep only products in which every spin appears an even
//! number of times. The formulas below are those sums written out; they
//! serve as an oracle for the enumeration engine and apply only to uniform
//! couplings with zero fields.

use serde::Serialize;

use crate::builtin;
use crate::chsh::{conditional_table, Setting};
use crate::error::{Error, Result};
use crate::independence::{HiddenSubset, LambdaTable};
use crate::lattice::{LatticeSpec, NodeRole, PartialAssignment, Spin};
use crate::model::{build_model, BoltzmannModel};

/// Number of bonds of the canonical ladder.
pub const LADDER_BONDS: usize = 13;

/// Smallest chain for which the chain formulas are provided.
pub const CHAIN_MIN_N: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesContext {
    /// `tanh(βJ)`.
    pub k: f64,
    /// `cosh(βJ)^bonds`.
    pub alpha: f64,
    pub bonds: usize,
}

impl SeriesContext {
    pub fn from_coupling(beta_j: f64, bonds: usize) -> Self {
        SeriesContext { k: beta_j.tanh(), alpha: beta_j.cosh().powi(bonds as i32), bonds }
    }

    pub fn from_k(k: f64, bonds: usize) -> Result<Self> {
        if !(k.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("K must lie in (-1, 1), got {k}")));
        }
        Ok(Self::from_coupling(k.atanh(), bonds))
    }

    /// Context of a homogeneous zero-field spec; anything else is refused.
    pub fn from_spec(spec: &LatticeSpec) -> Result<Self> {
        spec.validate()?;
        if !spec.cubic.is_empty() {
            return Err(Error::Precondition("closed forms do not cover cubic terms".into()));
        }
        if let Some(n) = spec.nodes.iter().find(|n| n.h != 0.0) {
            return Err(Error::Precondition(format!("node {} has a nonzero field", n.id)));
        }
        let Some(first) = spec.edges.first() else {
            return Err(Error::Precondition("lattice has no bonds".into()));
        };
        if let Some(e) = spec.edges.iter().find(|e| e.j != first.j) {
            return Err(Error::Precondition(format!("coupling {}-{} = {} differs from {}", e.a, e.b, e.j, first.j)));
        }
        Ok(Self::from_coupling(spec.beta * first.j, spec.edges.len()))
    }

    /// Coupling `βJ` that reproduces `k` at `β = 1`.
    pub fn beta_j(&self) -> f64 {
        self.k.atanh()
    }
}

fn s(x: Spin) -> f64 {
    x.sign()
}

/// Bracket of the setting marginal, `1 + σaσb(K⁴+10K⁶+5K⁸) + 4K⁴ + 3K⁶ + 5K⁸ + 3K¹⁰`.
fn ladder_setting_bracket(k: f64, sa: Spin, sb: Spin) -> f64 {
    let k2 = k * k;
    let (k4, k6, k8, k10) = (k2 * k2, k2 * k2 * k2, k2.powi(4), k2.powi(5));
    1.0 + s(sa) * s(sb) * (k4 + 10.0 * k6 + 5.0 * k8) + 4.0 * k4 + 3.0 * k6 + 5.0 * k8 + 3.0 * k10
}

/// `Σ_λ e^{-βH}` at fixed `(σ1, σ2, σa, σb)` on the homogeneous ladder.
pub fn ladder_joint_numerator(ctx: &SeriesContext, s1: Spin, s2: Spin, sa: Spin, sb: Spin) -> f64 {
    let k = ctx.k;
    let (x1, x2, xa, xb) = (s(s1), s(s2), s(sa), s(sb));
    let k3 = k.powi(3);
    let k4 = k.powi(4);
    let k5 = k.powi(5);
    let k6 = k.powi(6);
    let k7 = k.powi(7);
    let k8 = k.powi(8);
    let bracket = 1.0
        + (k3 + k5 + 2.0 * k7) * (x1 * xa + x2 * xb)
        + (k4 + 3.0 * k6) * (x1 * x2 + xa * xb)
        + (k6 + 3.0 * k8) * x1 * x2 * xa * xb
        + (3.0 * k5 + k7) * (x1 * xb + x2 * xa)
        + 2.0 * k4
        + k6;
    ctx.alpha * (1.0 + k * x1 * xa) * (1.0 + k * x2 * xb) * 64.0 * bracket
}

/// `Σ e^{-βH}` at fixed `(σa, σb)` on the homogeneous ladder.
pub fn ladder_setting_marginal(ctx: &SeriesContext, sa: Spin, sb: Spin) -> f64 {
    ctx.alpha * 256.0 * ladder_setting_bracket(ctx.k, sa, sb)
}

/// `P(σ1, σ2 | σa, σb)` as the ratio of the two sums above.
pub fn ladder_conditional(ctx: &SeriesContext, s1: Spin, s2: Spin, sa: Spin, sb: Spin) -> f64 {
    ladder_joint_numerator(ctx, s1, s2, sa, sb) / ladder_setting_marginal(ctx, sa, sb)
}

/// `P(+,+ | +,+)` reduced to a single rational function of `K`.
pub fn ladder_pp_given_pp(ctx: &SeriesContext) -> f64 {
    let k = ctx.k;
    let num =
        1.0 + 2.0 * k.powi(3) + 4.0 * k.powi(4) + 8.0 * k.powi(5) + 8.0 * k.powi(6) + 6.0 * k.powi(7) + 3.0 * k.powi(8);
    let den = 1.0 + 5.0 * k.powi(4) + 13.0 * k.powi(6) + 10.0 * k.powi(8) + 3.0 * k.powi(10);
    (1.0 + k).powi(2) * num / (4.0 * den)
}

/// Bonds among the hidden ladder spins `3..8`, as offsets into `[σ3, σ4, σ5, σ6, σ7, σ8]`.
const LADDER_HIDDEN_BONDS: [(usize, usize); 7] = [(0, 3), (0, 1), (3, 4), (1, 4), (1, 2), (4, 5), (2, 5)];

/// `P(σ3…σ8 | σa, σb)`; `lambda` is `[σ3, σ4, σ5, σ6, σ7, σ8]`.
pub fn ladder_lambda_conditional(ctx: &SeriesContext, lambda: [Spin; 6], sa: Spin, sb: Spin) -> f64 {
    let k = ctx.k;
    let l = lambda.map(s);
    let (xa, xb) = (s(sa), s(sb));
    let inner: f64 = LADDER_HIDDEN_BONDS.iter().map(|&(i, j)| 1.0 + k * l[i] * l[j]).product();
    let num =
        (1.0 + k * k * xa * l[0]) * (1.0 + k * k * xb * l[2]) * (1.0 + k * xa * l[3]) * (1.0 + k * xb * l[5]) * inner;
    num / (64.0 * ladder_setting_bracket(k, sa, sb))
}

/// `P(λ = all + | σa, σb)` in product form.
pub fn ladder_all_up_lambda(ctx: &SeriesContext, sa: Spin, sb: Spin) -> f64 {
    let k = ctx.k;
    let (xa, xb) = (s(sa), s(sb));
    (1.0 + k * k * xa) * (1.0 + k * k * xb) * (1.0 + k * xa) * (1.0 + k * xb) * (1.0 + k).powi(7)
        / (64.0 * ladder_setting_bracket(k, sa, sb))
}

/// Outcome conditionals on the ladder given the hidden spins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderFactors {
    /// `P(σ1, σ2 | λ, σa, σb)`.
    pub joint: f64,
    /// `P(σ1 | λ, σa)`.
    pub outcome1: f64,
    /// `P(σ2 | λ, σb)`.
    pub outcome2: f64,
}

/// Only `σ3` and `σ5` of λ enter, as the neighbours of the outcome spins.
pub fn ladder_factor_forms(
    ctx: &SeriesContext,
    s1: Spin,
    s2: Spin,
    sa: Spin,
    sb: Spin,
    s3: Spin,
    s5: Spin,
) -> LadderFactors {
    let k = ctx.k;
    let (x1, x2, xa, xb, x3, x5) = (s(s1), s(s2), s(sa), s(sb), s(s3), s(s5));
    let outcome1 = (1.0 + k * x1 * xa) * (1.0 + k * x1 * x3) / (2.0 * (1.0 + k * k * xa * x3));
    let outcome2 = (1.0 + k * x2 * xb) * (1.0 + k * x2 * x5) / (2.0 * (1.0 + k * k * xb * x5));
    let joint = (1.0 + k * x1 * xa) * (1.0 + k * x1 * x3) * (1.0 + k * x5 * x2) * (1.0 + k * x2 * xb)
        / (4.0 * (1.0 + k * k * (xa * x3 + xb * x5) + k.powi(4) * xa * xb * x3 * x5));
    LadderFactors { joint, outcome1, outcome2 }
}

/// CHSH value of the homogeneous ladder from the closed forms.
pub fn ladder_chsh(ctx: &SeriesContext) -> f64 {
    let m = |sa: Spin, sb: Spin| {
        let mut acc = 0.0;
        for s1 in Spin::BOTH {
            for s2 in Spin::BOTH {
                acc += s(s1) * s(s2) * ladder_conditional(ctx, s1, s2, sa, sb);
            }
        }
        acc
    };
    m(Spin::Up, Spin::Up) + m(Spin::Down, Spin::Up) + m(Spin::Up, Spin::Down) - m(Spin::Down, Spin::Down)
}

/// Leading weak-coupling behaviour of the ladder CHSH value, `-2K²`.
pub fn weak_coupling_chsh(ctx: &SeriesContext) -> f64 {
    -2.0 * ctx.k * ctx.k
}

fn check_chain(n: usize) -> Result<()> {
    if n < CHAIN_MIN_N {
        return Err(Error::InvalidArgument(format!("chain needs n >= {CHAIN_MIN_N}, got {n}")));
    }
    Ok(())
}

/// `P(σ3…σn | σa, σb)` on the chain `1 - a - 3 - … - n - b - 2`; `lambda` is `[σ3, …, σn]`.
pub fn chain_lambda_conditional(n: usize, ctx: &SeriesContext, lambda: &[Spin], sa: Spin, sb: Spin) -> Result<f64> {
    check_chain(n)?;
    if lambda.len() != n - 2 {
        return Err(Error::InvalidArgument(format!("expected {} hidden spins, got {}", n - 2, lambda.len())));
    }
    let k = ctx.k;
    let mut path = Vec::with_capacity(n);
    path.push(s(sa));
    path.extend(lambda.iter().map(|&x| s(x)));
    path.push(s(sb));
    let num: f64 = path.windows(2).map(|w| 1.0 + k * w[0] * w[1]).product();
    Ok(num / (2f64.powi(n as i32 - 2) * (1.0 + k.powi(n as i32 - 1) * s(sa) * s(sb))))
}

/// `P(λ = all + | σa, σb)` on the chain.
pub fn chain_all_up_lambda(n: usize, ctx: &SeriesContext, sa: Spin, sb: Spin) -> Result<f64> {
    check_chain(n)?;
    let k = ctx.k;
    let ends = (1.0 + k * s(sa)) * (1.0 + k * s(sb));
    Ok((1.0 + k).powi(n as i32 - 3) * ends / (2f64.powi(n as i32 - 2) * (1.0 + k.powi(n as i32 - 1) * s(sa) * s(sb))))
}

/// `P(σ1, σ2 | λ, σa, σb)` on the chain.
pub fn chain_joint_outcome(ctx: &SeriesContext, s1: Spin, s2: Spin, sa: Spin, sb: Spin) -> f64 {
    (1.0 + ctx.k * s(s1) * s(sa)) * (1.0 + ctx.k * s(s2) * s(sb)) / 4.0
}

/// `P(σ1 | λ, σa)` (or `P(σ2 | λ, σb)`) on the chain.
pub fn chain_outcome_factor(ctx: &SeriesContext, outcome: Spin, analyzer: Spin) -> f64 {
    (1.0 + ctx.k * s(outcome) * s(analyzer)) / 2.0
}

/// Measurement dependence of the chain under two readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainMd {
    pub n: usize,
    pub k: f64,
    /// `sup_{s,t} Σ_λ |ρ(λ|s) − ρ(λ|t)|`.
    pub md_summed: f64,
    /// `sup_{s,t} max_λ |ρ(λ|s) − ρ(λ|t)|`.
    pub md_cell: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Closed-form chain MD in `O(n)`.
///
/// `ρ(λ|a,b)` depends on λ only through `u = σ3` and the number `q` of
/// antiparallel bonds among the `n - 3` inner bonds, since `σn = u(−1)^q`.
pub fn chain_md(n: usize, k: f64) -> Result<ChainMd> {
    check_chain(n)?;
    if !(k.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("K must lie in (-1, 1), got {k}")));
    }
    let inner = n - 3;
    let scale = 2f64.powi(n as i32 - 2);
    let edge = k.powi(n as i32 - 1);
    let rho = |xa: f64, xb: f64, u: f64, q: usize| {
        let end = if q % 2 == 0 { u } else { -u };
        (1.0 + k * xa * u) * (1.0 + k * xb * end) * (1.0 + k).powi((inner - q) as i32) * (1.0 - k).powi(q as i32)
            / (scale * (1.0 + edge * xa * xb))
    };
    let mut md_summed: f64 = 0.0;
    let mut md_cell: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let (p, t) = (Setting::from_index(i), Setting::from_index(j));
            let mut total = 0.0;
            for u in [1.0, -1.0] {
                for q in 0..=inner {
                    let d = (rho(s(p.a), s(p.b), u, q) - rho(s(t.a), s(t.b), u, q)).abs();
                    total += binomial(inner, q) * d;
                    md_cell = md_cell.max(d);
                }
            }
            md_summed = md_summed.max(total);
        }
    }
    Ok(ChainMd { n, k, md_summed, md_cell })
}

/// Both MD readings by exact enumeration of the chain.
pub fn chain_md_enumerated(n: usize, k: f64) -> Result<ChainMd> {
    check_chain(n)?;
    let ctx = SeriesContext::from_k(k, n + 1)?;
    let model = build_model(builtin::chain(n, ctx.beta_j(), 1.0)?)?;
    let subset = HiddenSubset::all(&model)?;
    let table = LambdaTable::from_model(&model, &subset)?;
    let mut md_summed: f64 = 0.0;
    let mut md_cell: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let (p, t) = (Setting::from_index(i), Setting::from_index(j));
            md_summed = md_summed.max(table.md_pair(p, t)?);
            md_cell = md_cell.max(table.md_pair_cell(p, t)?);
        }
    }
    Ok(ChainMd { n, k, md_summed, md_cell })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainProfileRow {
    pub n: usize,
    pub md_summed: f64,
    pub md_cell: f64,
    /// Enumerated values, when `n` is within the enumeration limit.
    pub enumerated_summed: Option<f64>,
    pub enumerated_cell: Option<f64>,
}

/// Closed-form MD for each `n`, cross-checked by enumeration for `n <= enumerate_up_to`.
pub fn chain_md_profile(ns: &[usize], k: f64, enumerate_up_to: usize) -> Result<Vec<ChainProfileRow>> {
    ns.iter()
        .map(|&n| {
            let closed = chain_md(n, k)?;
            let exact = if n <= enumerate_up_to { Some(chain_md_enumerated(n, k)?) } else { None };
            Ok(ChainProfileRow {
                n,
                md_summed: closed.md_summed,
                md_cell: closed.md_cell,
                enumerated_summed: exact.map(|e| e.md_summed),
                enumerated_cell: exact.map(|e| e.md_cell),
            })
        })
        .collect()
}

/// Largest closed-form vs enumeration deviation for one formula at one `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCheckRow {
    pub formula: &'static str,
    pub k: f64,
    /// Chain length for chain formulas.
    pub n: Option<usize>,
    pub cases: usize,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCheck {
    pub rows: Vec<SeriesCheckRow>,
    pub max_rel_dev: f64,
}

#[derive(Default)]
struct Deviation {
    cases: usize,
    max: f64,
}

impl Deviation {
    fn push(&mut self, closed: f64, exact: f64) {
        let rel = if exact == 0.0 { closed.abs() } else { ((closed - exact) / exact).abs() };
        self.cases += 1;
        // NaN must surface as a failure rather than vanish in max().
        self.max = nan_max(self.max, rel);
    }
}

fn spins_of(bits: u32, len: usize) -> Vec<Spin> {
    (0..len).map(|t| Spin::from_bit(bits >> t & 1 == 1)).collect()
}

fn quad(bits: usize) -> (Spin, Spin, Spin, Spin) {
    let b = |t: usize| Spin::from_bit(bits >> t & 1 == 1);
    (b(0), b(1), b(2), b(3))
}

fn observed_assignment(model: &BoltzmannModel, spins: &[(NodeRole, Spin)]) -> Result<PartialAssignment> {
    let entries = spins.iter().map(|&(role, x)| model.role_index(role).map(|i| (i, x))).collect::<Result<Vec<_>>>()?;
    PartialAssignment::new(entries)
}

/// Ladder formulas against enumeration of the homogeneous ladder at one `K`.
pub fn ladder_check(k: f64) -> Result<Vec<SeriesCheckRow>> {
    let ctx = SeriesContext::from_k(k, LADDER_BONDS)?;
    let model = build_model(builtin::canonical_ladder(ctx.beta_j(), 1.0))?;
    let z = model.partition_function();
    let subset = HiddenSubset::all(&model)?;
    let table = LambdaTable::from_model(&model, &subset)?;
    let cond = conditional_table(&model)?;

    let mut joint = Deviation::default();
    let mut setting = Deviation::default();
    let mut conditional = Deviation::default();
    let mut pp = Deviation::default();
    let mut lambda = Deviation::default();
    let mut all_up = Deviation::default();
    let mut factors = Deviation::default();
    let mut chsh_dev = Deviation::default();

    for bits in 0..16 {
        let (s1, s2, sa, sb) = quad(bits);
        let eta = observed_assignment(
            &model,
            &[(NodeRole::Outcome1, s1), (NodeRole::Outcome2, s2), (NodeRole::AnalyzerA, sa), (NodeRole::AnalyzerB, sb)],
        )?;
        joint.push(ladder_joint_numerator(&ctx, s1, s2, sa, sb), model.marginal(&eta)? * z);
        conditional.push(ladder_conditional(&ctx, s1, s2, sa, sb), cond.get(s1, s2, sa, sb));
    }
    for st in Setting::ALL {
        let eta = observed_assignment(&model, &[(NodeRole::AnalyzerA, st.a), (NodeRole::AnalyzerB, st.b)])?;
        setting.push(ladder_setting_marginal(&ctx, st.a, st.b), model.marginal(&eta)? * z);
        let rho = table.lambda_distribution(st)?;
        for l in 0..64u32 {
            let spins = spins_of(l, 6);
            let arr = [spins[0], spins[1], spins[2], spins[3], spins[4], spins[5]];
            lambda.push(ladder_lambda_conditional(&ctx, arr, st.a, st.b), rho[l as usize]);
            for o in 0..4usize {
                let s1 = Spin::from_bit(o & 1 == 1);
                let s2 = Spin::from_bit(o >> 1 == 1);
                let f = ladder_factor_forms(&ctx, s1, s2, st.a, st.b, arr[0], arr[2]);
                let p = table.outcome_distribution(st, l).expect("ladder cells are never null");
                factors.push(f.joint, p[o]);
                factors.push(f.outcome1, table.local_marginal(NodeRole::Outcome1, s1, st.a, l).unwrap());
                factors.push(f.outcome2, table.local_marginal(NodeRole::Outcome2, s2, st.b, l).unwrap());
                factors.push(f.outcome1 * f.outcome2, f.joint);
            }
        }
        all_up.push(ladder_all_up_lambda(&ctx, st.a, st.b), rho[63]);
    }
    pp.push(ladder_pp_given_pp(&ctx), cond.get(Spin::Up, Spin::Up, Spin::Up, Spin::Up));
    chsh_dev.push(ladder_chsh(&ctx), crate::chsh::chsh(&cond).x_bi);

    let row = |formula, d: Deviation| SeriesCheckRow { formula, k, n: None, cases: d.cases, max_rel_dev: d.max };
    Ok(vec![
        row("ladder-joint", joint),
        row("ladder-setting", setting),
        row("ladder-conditional", conditional),
        row("ladder-pp-given-pp", pp),
        row("ladder-lambda", lambda),
        row("ladder-lambda-all-up", all_up),
        row("ladder-factors", factors),
        row("ladder-chsh", chsh_dev),
    ])
}

/// Chain formulas against enumeration of an `n`-chain at one `K`.
pub fn chain_check(n: usize, k: f64) -> Result<Vec<SeriesCheckRow>> {
    check_chain(n)?;
    let ctx = SeriesContext::from_k(k, n + 1)?;
    let model = build_model(builtin::chain(n, ctx.beta_j(), 1.0)?)?;
    let subset = HiddenSubset::all(&model)?;
    let table = LambdaTable::from_model(&model, &subset)?;
    let hidden = n - 2;
    let all_up_bits = (1u32 << hidden) - 1;

    let mut lambda = Deviation::default();
    let mut all_up = Deviation::default();
    let mut joint = Deviation::default();
    let mut factors = Deviation::default();
    let mut md = Deviation::default();
    for st in Setting::ALL {
        let rho = table.lambda_distribution(st)?;
        for l in 0..1u32 << hidden {
            lambda.push(chain_lambda_conditional(n, &ctx, &spins_of(l, hidden), st.a, st.b)?, rho[l as usize]);
            let p = table.outcome_distribution(st, l).expect("chain cells are never null");
            for o in 0..4usize {
                let s1 = Spin::from_bit(o & 1 == 1);
                let s2 = Spin::from_bit(o >> 1 == 1);
                let j = chain_joint_outcome(&ctx, s1, s2, st.a, st.b);
                let f1 = chain_outcome_factor(&ctx, s1, st.a);
                let f2 = chain_outcome_factor(&ctx, s2, st.b);
                joint.push(j, p[o]);
                factors.push(f1, table.local_marginal(NodeRole::Outcome1, s1, st.a, l).unwrap());
                factors.push(f2, table.local_marginal(NodeRole::Outcome2, s2, st.b, l).unwrap());
                factors.push(f1 * f2, j);
            }
        }
        all_up.push(chain_all_up_lambda(n, &ctx, st.a, st.b)?, rho[all_up_bits as usize]);
    }
    let closed = chain_md(n, k)?;
    let exact = chain_md_enumerated(n, k)?;
    md.push(closed.md_summed, exact.md_summed);
    md.push(closed.md_cell, exact.md_cell);

    let row = |formula, d: Deviation| SeriesCheckRow { formula, k, n: Some(n), cases: d.cases, max_rel_dev: d.max };
    Ok(vec![
        row("chain-lambda", lambda),
        row("chain-lambda-all-up", all_up),
        row("chain-joint", joint),
        row("chain-factors", factors),
        row("chain-md", md),
    ])
}

/// Default `K` grid of the oracle: `0, 0.1, …, 0.9`.
pub fn default_k_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

/// Runs [`ladder_check`] and [`chain_check`] over a `K` grid and chain lengths.
pub fn series_check(ks: &[f64], chain_ns: &[usize]) -> Result<SeriesCheck> {
    let mut rows = Vec::new();
    for &k in ks {
        rows.extend(ladder_check(k)?);
        for &n in chain_ns {
            rows.extend(chain_check(n, k)?);
        }
    }
    let max_rel_dev = rows.iter().map(|r| r.max_rel_dev).fold(0.0, nan_max);
    Ok(SeriesCheck { rows, max_rel_dev })
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
