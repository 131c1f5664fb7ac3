//! Postselected versus clamped analyzers.
//!
//! In the first experiment the analyzer spins fluctuate and the four setting
//! sub-ensembles are postselected afterwards. In the second the analyzers are
//! fixed by the experimenter and each sub-experiment samples only the
//! remaining spins, with its own partition function `Z*`. Both are evaluated
//! with the same energy shift, so their tables can be compared exactly.

use serde::Serialize;

use crate::chsh::{cell_index, conditional_table, observed_indices, ConditionalTable, Setting};
use crate::error::{Error, Result};
use crate::independence::{independence_report_table, HiddenSubset, IndependenceReport, LambdaTable};
use crate::lattice::Spin;
use crate::model::{for_each_subset, full_mask, BoltzmannModel, ZERO_MEASURE};
use crate::numeric::CompensatedSum;

/// A model with both analyzer spins held fixed.
#[derive(Debug, Clone)]
pub struct ClampedModel<'a> {
    base: &'a BoltzmannModel,
    setting: Setting,
    mask: u32,
    bits: u32,
    z_star: f64,
}

impl<'a> ClampedModel<'a> {
    pub fn new(base: &'a BoltzmannModel, setting: Setting) -> Result<Self> {
        let [_, _, ia, ib] = observed_indices(base)?;
        let mask = 1 << ia | 1 << ib;
        let bits = (setting.a.bit() as u32) << ia | (setting.b.bit() as u32) << ib;
        let mut clamped = ClampedModel { base, setting, mask, bits, z_star: 0.0 };
        clamped.z_star = clamped.weight_table(&[])?[0];
        Ok(clamped)
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    /// Partition function of the clamped ensemble, in the base model's shifted units.
    pub fn z_star(&self) -> f64 {
        self.z_star
    }

    /// Clamped weights bucketed by the joint state of `nodes` (none of them clamped).
    ///
    /// A serial sweep over the unclamped spins, independent of the base
    /// model's blocked summation.
    pub fn weight_table(&self, nodes: &[usize]) -> Result<Vec<f64>> {
        if nodes.iter().any(|&i| self.mask >> i & 1 == 1) {
            return Err(Error::InvalidArgument("cannot bucket by a clamped node".into()));
        }
        let free = full_mask(self.base.len()) & !self.mask;
        let mut acc = vec![CompensatedSum::new(); 1 << nodes.len()];
        for_each_subset(free, |sub| {
            let word = self.bits | sub;
            let bucket = nodes.iter().enumerate().fold(0, |k, (t, &i)| k | ((word >> i & 1) as usize) << t);
            acc[bucket].add(self.base.weight_bits(word));
        });
        Ok(acc.iter().map(CompensatedSum::value).collect())
    }
}

/// Table from postselection on the analyzer spins.
pub fn ex1_table(model: &BoltzmannModel) -> Result<ConditionalTable> {
    conditional_table(model)
}

/// Table from four clamped sub-experiments: `P*(σ1, σ2) = W*(σ1, σ2) / Z*`.
pub fn ex2_table(model: &BoltzmannModel) -> Result<ConditionalTable> {
    let [i1, i2, _, _] = observed_indices(model)?;
    let mut entries = [0.0; 16];
    for setting in Setting::ALL {
        let clamped = ClampedModel::new(model, setting)?;
        if clamped.z_star() < ZERO_MEASURE {
            return Err(Error::ZeroMeasure(format!("Z* = 0 with σa={}, σb={} clamped", setting.a, setting.b)));
        }
        let w = clamped.weight_table(&[i1, i2])?;
        for (k, x) in w.iter().enumerate() {
            let s1 = Spin::from_bit(k & 1 == 1);
            let s2 = Spin::from_bit(k >> 1 == 1);
            entries[cell_index(s1, s2, setting.a, setting.b)] = x / clamped.z_star();
        }
    }
    ConditionalTable::from_entries(entries)
}

/// Largest cell-wise difference between the two tables.
pub fn assert_equivalence(model: &BoltzmannModel) -> Result<f64> {
    Ok(ex1_table(model)?.max_abs_diff(&ex2_table(model)?))
}

/// `(σ1, σ2, σa, σb, λ)` weights assembled from the four clamped ensembles.
pub fn clamped_lambda_table(model: &BoltzmannModel, lambda: &HiddenSubset) -> Result<LambdaTable> {
    let [i1, i2, _, _] = observed_indices(model)?;
    let mut nodes = vec![i1, i2];
    nodes.extend_from_slice(lambda.indices());
    let mut weights = vec![0.0; 1 << (4 + lambda.len())];
    for setting in Setting::ALL {
        let w = ClampedModel::new(model, setting)?.weight_table(&nodes)?;
        for (k, x) in w.into_iter().enumerate() {
            let outcomes = k & 3;
            let l = k >> 2;
            weights[outcomes | setting.index() << 2 | l << 4] = x;
        }
    }
    LambdaTable::from_weights(lambda.len(), weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreewillCell {
    pub s1: Spin,
    pub s2: Spin,
    pub sa: Spin,
    pub sb: Spin,
    pub ex1: f64,
    pub ex2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreewillReport {
    pub cells: Vec<FreewillCell>,
    pub max_discrepancy: f64,
    /// `|Σ Z* − Z| / Z` over the four clamps.
    pub partition_defect: f64,
    pub postselected: Option<IndependenceReport>,
    pub clamped: Option<IndependenceReport>,
    /// Largest difference among md, od, od_cell, pd, pd_outcome1, pd_outcome2.
    pub derived_discrepancy: Option<f64>,
}

/// Full comparison; derived measures are included when the model has hidden nodes.
pub fn freewill_report(model: &BoltzmannModel) -> Result<FreewillReport> {
    let ex1 = ex1_table(model)?;
    let ex2 = ex2_table(model)?;
    let cells = ex1
        .cells()
        .zip(ex2.cells())
        .map(|((s1, s2, sa, sb, p), (.., q))| FreewillCell { s1, s2, sa, sb, ex1: p, ex2: q })
        .collect();
    let z_sum: CompensatedSum = Setting::ALL
        .iter()
        .map(|&s| ClampedModel::new(model, s).map(|c| c.z_star()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
    let partition_defect = ((z_sum.value() - model.z_shifted()) / model.z_shifted()).abs();

    let (postselected, clamped, derived_discrepancy) = if model.hidden_indices().is_empty() {
        (None, None, None)
    } else {
        let lambda = HiddenSubset::all(model)?;
        let a = independence_report_table(&LambdaTable::from_model(model, &lambda)?, &lambda)?;
        let b = independence_report_table(&clamped_lambda_table(model, &lambda)?, &lambda)?;
        let d = derived_gap(&a, &b);
        (Some(a), Some(b), Some(d))
    };
    Ok(FreewillReport {
        cells,
        max_discrepancy: ex1.max_abs_diff(&ex2),
        partition_defect,
        postselected,
        clamped,
        derived_discrepancy,
    })
}

fn derived_gap(a: &IndependenceReport, b: &IndependenceReport) -> f64 {
    [
        (a.md, b.md),
        (a.od, b.od),
        (a.od_cell, b.od_cell),
        (a.pd, b.pd),
        (a.pd_outcome1, b.pd_outcome1),
        (a.pd_outcome2, b.pd_outcome2),
    ]
    .iter()
    .map(|(x, y)| (x - y).abs())
    .fold(0.0, f64::max)
}
