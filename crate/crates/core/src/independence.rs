//! Measurement, outcome and parameter dependence of a lattice model.
//!
//! Everything here works from a [`LambdaTable`]: the stabilized weights of
//! `(σ1, σ2, σa, σb, λ)` for a chosen subset λ of the hidden spins. The table
//! can come from the postselected model or be assembled from clamped
//! ensembles, and every measure below is a function of the table alone.

use serde::Serialize;

use crate::chsh::{observed_indices, ConditionalTable, Setting};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, NodeRole, Spin};
use crate::model::{build_model, BoltzmannModel, BuildOptions, ZERO_MEASURE};

/// Absolute tolerance on defects for deciding that a condition holds.
pub const TOLERANCE: f64 = 1e-9;

/// A nonempty set of hidden nodes, in the order given.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HiddenSubset {
    ids: Vec<String>,
    #[serde(skip)]
    indices: Vec<usize>,
}

impl HiddenSubset {
    /// Every hidden node of the model in declaration order.
    pub fn all(model: &BoltzmannModel) -> Result<Self> {
        let ids: Vec<&str> = model.spec().hidden_ids();
        Self::from_ids(model, &ids)
    }

    pub fn from_ids(model: &BoltzmannModel, ids: &[&str]) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidArgument("hidden subset is empty".into()));
        }
        let mut indices = Vec::with_capacity(ids.len());
        for id in ids {
            let i = model.node_index(id)?;
            if model.spec().nodes[i].role != NodeRole::Hidden {
                return Err(Error::InvalidArgument(format!("node {id} is not hidden")));
            }
            if indices.contains(&i) {
                return Err(Error::InvalidArgument(format!("node {id} listed twice")));
            }
            indices.push(i);
        }
        Ok(HiddenSubset { ids: ids.iter().map(|s| s.to_string()).collect(), indices })
    }

    /// Parses a comma-separated id list such as `3,4,5`; `all` selects every hidden node.
    pub fn parse(model: &BoltzmannModel, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.eq_ignore_ascii_case("all") {
            return Self::all(model);
        }
        let ids: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        Self::from_ids(model, &ids)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Spins of a λ word: bit `t` is `ids()[t]`.
    pub fn describe(&self, lambda: u32) -> String {
        self.ids
            .iter()
            .enumerate()
            .map(|(t, id)| format!("{id}={}", Spin::from_bit(lambda >> t & 1 == 1)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Stabilized weights of `(σ1, σ2, σa, σb, λ)`.
///
/// Index: bits 0-3 are `σ1, σ2, σa, σb`; bits `4..` hold λ in subset order.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTable {
    lambda_len: usize,
    weights: Vec<f64>,
}

impl LambdaTable {
    /// Postselected table from one enumeration of the full model.
    pub fn from_model(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<Self> {
        let mut nodes = observed_indices(model)?.to_vec();
        nodes.extend_from_slice(lambda.indices());
        Ok(LambdaTable { lambda_len: lambda.len(), weights: model.weight_table(&nodes)? })
    }

    /// Table from raw weights; `weights.len()` must be `2^(4 + lambda_len)`.
    pub fn from_weights(lambda_len: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != 1 << (4 + lambda_len) {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                1usize << (4 + lambda_len),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        Ok(LambdaTable { lambda_len, weights })
    }

    pub fn lambda_len(&self) -> usize {
        self.lambda_len
    }

    pub fn lambda_states(&self) -> usize {
        1 << self.lambda_len
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight of `(setting, λ)` summed over outcomes.
    fn w_cell(&self, setting: usize, lambda: usize) -> f64 {
        (0..4).map(|o| self.weights[o | setting << 2 | lambda << 4]).sum()
    }

    /// Weight of a setting summed over outcomes and λ.
    pub fn setting_weight(&self, setting: Setting) -> f64 {
        let s = setting.index();
        (0..self.lambda_states()).map(|l| self.w_cell(s, l)).sum()
    }

    /// `P(σ1, σ2 | σa, σb)`, summed over λ.
    pub fn conditional_table(&self) -> Result<ConditionalTable> {
        let mut w = [0.0; 16];
        for (k, x) in self.weights.iter().enumerate() {
            w[k & 15] += x;
        }
        ConditionalTable::from_weights(&w)
    }

    /// `ρ(λ | setting)` for every λ.
    pub fn lambda_distribution(&self, setting: Setting) -> Result<Vec<f64>> {
        let s = setting.index();
        let cells: Vec<f64> = (0..self.lambda_states()).map(|l| self.w_cell(s, l)).collect();
        let total: f64 = cells.iter().sum();
        if total < ZERO_MEASURE {
            return Err(Error::ZeroMeasure(format!("P(σa={}, σb={}) = 0", setting.a, setting.b)));
        }
        Ok(cells.into_iter().map(|w| w / total).collect())
    }

    /// `Σ_λ |ρ(λ|s) − ρ(λ|t)|`.
    pub fn md_pair(&self, s: Setting, t: Setting) -> Result<f64> {
        let p = self.lambda_distribution(s)?;
        let q = self.lambda_distribution(t)?;
        Ok(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum())
    }

    /// `max_λ |ρ(λ|s) − ρ(λ|t)|`, the single-configuration reading.
    pub fn md_pair_cell(&self, s: Setting, t: Setting) -> Result<f64> {
        let p = self.lambda_distribution(s)?;
        let q = self.lambda_distribution(t)?;
        Ok(p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    }

    /// `P(σ1, σ2 | setting, λ)` as `[(-,-), (+,-), (-,+), (+,+)]`, or `None` on a null cell.
    pub fn outcome_distribution(&self, setting: Setting, lambda: u32) -> Option<[f64; 4]> {
        let s = setting.index();
        let l = lambda as usize;
        let total = self.w_cell(s, l);
        if total < ZERO_MEASURE {
            return None;
        }
        Some([0, 1, 2, 3].map(|o| self.weights[o | s << 2 | l << 4] / total))
    }

    /// Outcome-factorization defects at one `(setting, λ)`: `(Σ_cells, max_cell, argmax)`.
    pub fn od_at(&self, setting: Setting, lambda: u32) -> Option<(f64, f64, (Spin, Spin))> {
        let p = self.outcome_distribution(setting, lambda)?;
        let p1 = [p[0] + p[2], p[1] + p[3]];
        let p2 = [p[0] + p[1], p[2] + p[3]];
        let mut sum = 0.0;
        let mut best = (-1.0, (Spin::Down, Spin::Down));
        for o in 0..4 {
            let d = (p[o] - p1[o & 1] * p2[o >> 1]).abs();
            sum += d;
            if d > best.0 {
                best = (d, (Spin::from_bit(o & 1 == 1), Spin::from_bit(o >> 1 == 1)));
            }
        }
        Some((sum, best.0, best.1))
    }

    /// `P(σ_side = outcome | setting, λ)` for side `Outcome1` or `Outcome2`.
    pub fn outcome_marginal(&self, side: NodeRole, outcome: Spin, setting: Setting, lambda: u32) -> Option<f64> {
        let p = self.outcome_distribution(setting, lambda)?;
        let o = outcome.bit() as usize;
        Some(match side {
            NodeRole::Outcome1 => p[o] + p[o | 2],
            _ => p[o << 1] + p[o << 1 | 1],
        })
    }

    /// `P(σ1 | λ, σa)` with `σb` and `σ2` summed out, or `None` on a null cell.
    pub fn local_marginal(&self, side: NodeRole, outcome: Spin, analyzer: Spin, lambda: u32) -> Option<f64> {
        let l = lambda as usize;
        let o = outcome.bit() as usize;
        let v = analyzer.bit() as usize;
        let mut num = 0.0;
        let mut den = 0.0;
        for s in 0..4 {
            let local = if side == NodeRole::Outcome1 { s & 1 } else { s >> 1 };
            if local != v {
                continue;
            }
            for k in 0..4 {
                let w = self.weights[k | s << 2 | l << 4];
                den += w;
                let mine = if side == NodeRole::Outcome1 { k & 1 } else { k >> 1 };
                if mine == o {
                    num += w;
                }
            }
        }
        (den >= ZERO_MEASURE).then(|| num / den)
    }

    /// Number of `(setting, λ)` cells with zero measure.
    pub fn null_cells(&self) -> usize {
        (0..4)
            .flat_map(|s| (0..self.lambda_states()).map(move |l| (s, l)))
            .filter(|&(s, l)| self.w_cell(s, l) < ZERO_MEASURE)
            .count()
    }

    fn require_cells(&self) -> Result<usize> {
        let skipped = self.null_cells();
        if skipped == 4 * self.lambda_states() {
            return Err(Error::Degenerate("every (setting, λ) cell has zero measure".into()));
        }
        Ok(skipped)
    }
}

/// Where a sup is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Measurement {
        first: Setting,
        second: Setting,
        value: f64,
    },
    Outcome {
        setting: Setting,
        lambda: String,
        lambda_bits: u32,
        /// Worst single `(σ1, σ2)` cell at this `(setting, λ)`.
        outcomes: (Spin, Spin),
        value: f64,
    },
    Parameter {
        side: NodeRole,
        first: Setting,
        second: Setting,
        lambda: String,
        lambda_bits: u32,
        outcome: Spin,
        value: f64,
    },
    Factorization {
        setting: Setting,
        lambda: String,
        lambda_bits: u32,
        outcomes: (Spin, Spin),
        value: f64,
    },
}

impl Witness {
    pub fn value(&self) -> f64 {
        match self {
            Witness::Measurement { value, .. }
            | Witness::Outcome { value, .. }
            | Witness::Parameter { value, .. }
            | Witness::Factorization { value, .. } => *value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure {
    pub value: f64,
    pub witness: Witness,
}

/// `sup_{s,t} Σ_λ |ρ(λ|s) − ρ(λ|t)|` over the 4×4 setting grid.
pub fn measurement_dependence_table(table: &LambdaTable) -> Result<Measure> {
    let dists = Setting::ALL.map(|s| table.lambda_distribution(s));
    let mut dist = Vec::with_capacity(4);
    for d in dists {
        dist.push(d?);
    }
    let mut best = Measure {
        value: 0.0,
        witness: Witness::Measurement { first: Setting::ALL[0], second: Setting::ALL[0], value: 0.0 },
    };
    for s in 0..4 {
        for t in s + 1..4 {
            let v: f64 = dist[s].iter().zip(&dist[t]).map(|(x, y)| (x - y).abs()).sum();
            if v > best.value {
                best.value = v;
                best.witness =
                    Witness::Measurement { first: Setting::from_index(s), second: Setting::from_index(t), value: v };
            }
        }
    }
    Ok(best)
}

pub fn measurement_dependence(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<Measure> {
    measurement_dependence_table(&LambdaTable::from_model(model, lambda)?)
}

/// Outcome dependence: the summed defect and the single-cell defect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeMeasure {
    /// `sup_{setting, λ} Σ_{σ1,σ2} |P(σ1σ2|·) − P(σ1|·)P(σ2|·)|`.
    pub od: Measure,
    /// Same sup over single `(σ1, σ2)` cells.
    pub od_cell: Measure,
    pub skipped_cells: usize,
}

pub fn outcome_dependence_table(table: &LambdaTable, lambda: &HiddenSubset) -> Result<OutcomeMeasure> {
    let skipped_cells = table.require_cells()?;
    let start = Witness::Outcome {
        setting: Setting::ALL[0],
        lambda: String::new(),
        lambda_bits: 0,
        outcomes: (Spin::Down, Spin::Down),
        value: 0.0,
    };
    let mut od = Measure { value: 0.0, witness: start.clone() };
    let mut od_cell = Measure { value: 0.0, witness: start };
    for l in 0..table.lambda_states() as u32 {
        for setting in Setting::ALL {
            let Some((sum, cell, outcomes)) = table.od_at(setting, l) else { continue };
            let witness =
                |value| Witness::Outcome { setting, lambda: lambda.describe(l), lambda_bits: l, outcomes, value };
            if sum > od.value {
                od = Measure { value: sum, witness: witness(sum) };
            }
            if cell > od_cell.value {
                od_cell = Measure { value: cell, witness: witness(cell) };
            }
        }
    }
    Ok(OutcomeMeasure { od, od_cell, skipped_cells })
}

pub fn outcome_dependence(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<OutcomeMeasure> {
    outcome_dependence_table(&LambdaTable::from_model(model, lambda)?, lambda)
}

/// Parameter dependence of each outcome on the distant setting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterMeasure {
    /// `max(pd_outcome1, pd_outcome2)`.
    pub pd: Measure,
    /// `sup |P(σ1 | a,b,λ) − P(σ1 | a,b',λ)|`.
    pub pd_outcome1: f64,
    /// `sup |P(σ2 | a,b,λ) − P(σ2 | a',b,λ)|`.
    pub pd_outcome2: f64,
    pub skipped_cells: usize,
}

pub fn parameter_dependence_table(table: &LambdaTable, lambda: &HiddenSubset) -> Result<ParameterMeasure> {
    let skipped_cells = table.require_cells()?;
    let mut sides = Vec::with_capacity(2);
    for side in [NodeRole::Outcome2, NodeRole::Outcome1] {
        let mut best = Measure {
            value: 0.0,
            witness: Witness::Parameter {
                side,
                first: Setting::ALL[0],
                second: Setting::ALL[0],
                lambda: String::new(),
                lambda_bits: 0,
                outcome: Spin::Down,
                value: 0.0,
            },
        };
        for l in 0..table.lambda_states() as u32 {
            for local in Spin::BOTH {
                // The local setting is held fixed and the distant one varies.
                let (first, second) = if side == NodeRole::Outcome2 {
                    (Setting::new(Spin::Up, local), Setting::new(Spin::Down, local))
                } else {
                    (Setting::new(local, Spin::Up), Setting::new(local, Spin::Down))
                };
                for outcome in Spin::BOTH {
                    let (Some(p), Some(q)) = (
                        table.outcome_marginal(side, outcome, first, l),
                        table.outcome_marginal(side, outcome, second, l),
                    ) else {
                        continue;
                    };
                    let d = (p - q).abs();
                    if d > best.value {
                        best = Measure {
                            value: d,
                            witness: Witness::Parameter {
                                side,
                                first,
                                second,
                                lambda: lambda.describe(l),
                                lambda_bits: l,
                                outcome,
                                value: d,
                            },
                        };
                    }
                }
            }
        }
        sides.push(best);
    }
    let pd_outcome1 = sides[1].value;
    let pd_outcome2 = sides[0].value;
    let pd = if pd_outcome1 > pd_outcome2 { sides.swap_remove(1) } else { sides.swap_remove(0) };
    Ok(ParameterMeasure { pd, pd_outcome1, pd_outcome2, skipped_cells })
}

pub fn parameter_dependence(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<ParameterMeasure> {
    parameter_dependence_table(&LambdaTable::from_model(model, lambda)?, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Factorizability {
    pub factorizable: bool,
    pub max_defect: f64,
    pub witness: Witness,
    pub skipped_cells: usize,
}

/// `max |P(σ1,σ2|λ,a,b) − P(σ1|λ,a) P(σ2|λ,b)|`, each factor dropping the distant setting.
pub fn factorizability_table(table: &LambdaTable, lambda: &HiddenSubset) -> Result<Factorizability> {
    let skipped_cells = table.require_cells()?;
    let mut best = Measure {
        value: 0.0,
        witness: Witness::Factorization {
            setting: Setting::ALL[0],
            lambda: String::new(),
            lambda_bits: 0,
            outcomes: (Spin::Down, Spin::Down),
            value: 0.0,
        },
    };
    for l in 0..table.lambda_states() as u32 {
        for setting in Setting::ALL {
            let Some(p) = table.outcome_distribution(setting, l) else { continue };
            for o in 0..4 {
                let s1 = Spin::from_bit(o & 1 == 1);
                let s2 = Spin::from_bit(o >> 1 == 1);
                let (Some(f1), Some(f2)) = (
                    table.local_marginal(NodeRole::Outcome1, s1, setting.a, l),
                    table.local_marginal(NodeRole::Outcome2, s2, setting.b, l),
                ) else {
                    continue;
                };
                let d = (p[o] - f1 * f2).abs();
                if d > best.value {
                    best = Measure {
                        value: d,
                        witness: Witness::Factorization {
                            setting,
                            lambda: lambda.describe(l),
                            lambda_bits: l,
                            outcomes: (s1, s2),
                            value: d,
                        },
                    };
                }
            }
        }
    }
    Ok(Factorizability {
        factorizable: best.value <= TOLERANCE,
        max_defect: best.value,
        witness: best.witness,
        skipped_cells,
    })
}

pub fn factorizability_check(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<Factorizability> {
    factorizability_table(&LambdaTable::from_model(model, lambda)?, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub lambda: Vec<String>,
    pub md: f64,
    pub od: f64,
    pub od_cell: f64,
    pub pd: f64,
    pub pd_outcome1: f64,
    pub pd_outcome2: f64,
    pub mi_holds: bool,
    pub oi_holds: bool,
    pub pi_holds: bool,
    pub factorizable: bool,
    pub tolerance: f64,
    pub skipped_cells: usize,
    /// One entry per violated condition.
    pub witnesses: Vec<Witness>,
}

pub fn independence_report_table(table: &LambdaTable, lambda: &HiddenSubset) -> Result<IndependenceReport> {
    let md = measurement_dependence_table(table)?;
    let od = outcome_dependence_table(table, lambda)?;
    let pd = parameter_dependence_table(table, lambda)?;
    let mi_holds = md.value <= TOLERANCE;
    let oi_holds = od.od.value <= TOLERANCE;
    let pi_holds = pd.pd.value <= TOLERANCE;
    let mut witnesses = Vec::new();
    if !mi_holds {
        witnesses.push(md.witness.clone());
    }
    if !oi_holds {
        witnesses.push(od.od.witness.clone());
    }
    if !pi_holds {
        witnesses.push(pd.pd.witness.clone());
    }
    Ok(IndependenceReport {
        lambda: lambda.ids().to_vec(),
        md: md.value,
        od: od.od.value,
        od_cell: od.od_cell.value,
        pd: pd.pd.value,
        pd_outcome1: pd.pd_outcome1,
        pd_outcome2: pd.pd_outcome2,
        mi_holds,
        oi_holds,
        pi_holds,
        factorizable: oi_holds && pi_holds,
        tolerance: TOLERANCE,
        skipped_cells: od.skipped_cells,
        witnesses,
    })
}

pub fn independence_report(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<IndependenceReport> {
    independence_report_table(&LambdaTable::from_model(model, lambda)?, lambda)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub ids: Vec<String>,
    /// `max_{ε,δ} |P(σi=ε, σj=δ) − P(σi=ε) P(σj=δ)|`; zero on the diagonal.
    pub defect: Vec<Vec<f64>>,
    pub dependent: Vec<Vec<bool>>,
}

impl PairwiseReport {
    pub fn all_dependent(&self) -> bool {
        let n = self.ids.len();
        (0..n).all(|i| (0..n).all(|j| i == j || self.dependent[i][j]))
    }
}

/// Whether each pair of node marginals factorizes.
pub fn pairwise_correlation_check(model: &BoltzmannModel) -> Result<PairwiseReport> {
    let n = model.len();
    let mut defect = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let p = model.probability_table(&[i, j])?;
            let pi = [p[0] + p[2], p[1] + p[3]];
            let pj = [p[0] + p[1], p[2] + p[3]];
            let d = (0..4).map(|k| (p[k] - pi[k & 1] * pj[k >> 1]).abs()).fold(0.0, f64::max);
            defect[i][j] = d;
            defect[j][i] = d;
        }
    }
    let dependent = (0..n).map(|i| (0..n).map(|j| i != j && defect[i][j] > TOLERANCE).collect()).collect();
    Ok(PairwiseReport { ids: model.spec().nodes.iter().map(|x| x.id.clone()).collect(), defect, dependent })
}

/// Copy of `spec` with every coupling incident to an analyzer node multiplied by `scale`.
pub fn scale_analyzer_couplings(spec: &LatticeSpec, scale: f64) -> LatticeSpec {
    let analyzers: Vec<String> = spec.nodes.iter().filter(|n| n.role.is_analyzer()).map(|n| n.id.clone()).collect();
    let mut out = spec.clone();
    for e in &mut out.edges {
        if analyzers.iter().any(|a| e.touches(a)) {
            e.j *= scale;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecouplingPoint {
    pub scale: f64,
    pub md: f64,
}

/// MD as the analyzer couplings are scaled towards zero.
///
/// `lambda` lists hidden node ids; empty means all hidden nodes.
pub fn decoupling_sweep(
    template: &LatticeSpec,
    scales: &[f64],
    lambda: &[&str],
    options: &BuildOptions,
) -> Result<Vec<DecouplingPoint>> {
    scales
        .iter()
        .map(|&scale| {
            let model = BoltzmannModel::build(scale_analyzer_couplings(template, scale), options)?;
            let subset =
                if lambda.is_empty() { HiddenSubset::all(&model)? } else { HiddenSubset::from_ids(&model, lambda)? };
            let md = measurement_dependence(&model, &subset)?.value;
            Ok(DecouplingPoint { scale, md })
        })
        .collect()
}

/// Independence report over all hidden nodes, built with the default cap.
pub fn full_report(spec: LatticeSpec) -> Result<IndependenceReport> {
    let model = build_model(spec)?;
    independence_report(&model, &HiddenSubset::all(&model)?)
}
