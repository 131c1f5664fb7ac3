//! Exact Boltzmann distribution by full enumeration of the 2^N configurations.
//!
//! All weights are stabilized: `w(θ) = exp(-β (H(θ) - H_min))`, so the most
//! probable configuration has weight 1 and `Z_shifted = Σ w ∈ [1, 2^N]`.
//! Probabilities are ratios of stabilized sums and never see the shift.
//!
//! Sums over configuration ranges are split into a fixed set of blocks that
//! depends only on which nodes are free, never on the thread count, and each
//! block uses compensated summation. Results are therefore bit-identical
//! across machines with different core counts.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, NodeRole, PartialAssignment, Spin, SpinConfiguration};
use crate::numeric::CompensatedSum;

pub const DEFAULT_MAX_NODES: usize = 24;

/// Stabilized weight sums below this are treated as null events.
pub const ZERO_MEASURE: f64 = 1e-300;

/// Free-spin count above which a single sum is split into parallel blocks.
const SPLIT_THRESHOLD: u32 = 12;
const MAX_SPLIT_BITS: u32 = 6;

/// Energy function compiled to bit operations.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    c0: f64,
    fields: Vec<(u32, f64)>,
    pairs: Vec<(u32, u32, f64)>,
    triples: Vec<(u32, u32, u32, f64)>,
}

impl Hamiltonian {
    /// Assumes `spec` has been validated.
    pub fn compile(spec: &LatticeSpec) -> Self {
        let index: HashMap<&str, u32> = spec.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i as u32)).collect();
        let fields = spec.nodes.iter().enumerate().filter(|(_, n)| n.h != 0.0).map(|(i, n)| (i as u32, n.h)).collect();
        let pairs =
            spec.edges.iter().filter(|e| e.j != 0.0).map(|e| (index[e.a.as_str()], index[e.b.as_str()], e.j)).collect();
        let triples = spec
            .cubic
            .iter()
            .filter(|t| t.c != 0.0)
            .map(|t| {
                let [x, y, z] = t.nodes.each_ref().map(|id| index[id.as_str()]);
                (x, y, z, t.c)
            })
            .collect();
        Hamiltonian { n: spec.nodes.len(), c0: spec.c0, fields, pairs, triples }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn energy(&self, bits: u32) -> f64 {
        let mut e = self.c0;
        for &(i, j, coupling) in &self.pairs {
            // s_i s_j = +1 iff the bits agree
            if (bits >> i ^ bits >> j) & 1 == 0 {
                e -= coupling;
            } else {
                e += coupling;
            }
        }
        for &(i, h) in &self.fields {
            if bits >> i & 1 == 1 {
                e -= h;
            } else {
                e += h;
            }
        }
        for &(i, j, k, c) in &self.triples {
            // product of three spins is +1 iff an even number are down
            let downs = (!bits >> i & 1) + (!bits >> j & 1) + (!bits >> k & 1);
            if downs % 2 == 0 {
                e += c;
            } else {
                e -= c;
            }
        }
        e
    }

    /// Energy change when spin `site` is reversed.
    #[inline]
    pub fn flip_delta(&self, bits: u32, site: usize) -> f64 {
        self.energy(bits ^ 1 << site) - self.energy(bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_nodes: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { max_nodes: DEFAULT_MAX_NODES }
    }
}

/// A lattice together with its exact partition function.
#[derive(Debug, Clone)]
pub struct BoltzmannModel {
    spec: LatticeSpec,
    hamiltonian: Hamiltonian,
    index: HashMap<String, usize>,
    min_energy: f64,
    z_shifted: f64,
}

/// Builds a model with the default enumeration cap.
pub fn build_model(spec: LatticeSpec) -> Result<BoltzmannModel> {
    BoltzmannModel::build(spec, &BuildOptions::default())
}

impl BoltzmannModel {
    pub fn build(spec: LatticeSpec, options: &BuildOptions) -> Result<BoltzmannModel> {
        spec.validate()?;
        let n = spec.nodes.len();
        if n > options.max_nodes {
            return Err(Error::EnumerationLimit { nodes: n, cap: options.max_nodes });
        }
        let hamiltonian = Hamiltonian::compile(&spec);
        let full = full_mask(n);
        let min_energy = reduce_blocks(full, 0, |base, free| {
            let mut lo = f64::INFINITY;
            for_each_subset(free, |sub| lo = lo.min(hamiltonian.energy(base | sub)));
            lo
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min);
        if !min_energy.is_finite() {
            return Err(Error::NumericRange(format!("minimum energy is {min_energy}")));
        }
        let index = spec.nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();
        let mut model = BoltzmannModel { spec, hamiltonian, index, min_energy, z_shifted: 0.0 };
        let z = model.weight_sum_raw(0, 0);
        if !(z.is_finite() && z >= 1.0) {
            return Err(Error::NumericRange(format!("stabilized partition function is {z}")));
        }
        model.z_shifted = z;
        Ok(model)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn len(&self) -> usize {
        self.spec.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.nodes.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.spec.beta
    }

    /// Shift subtracted from every energy before exponentiation.
    pub fn min_energy(&self) -> f64 {
        self.min_energy
    }

    /// `Σ exp(-β (H - H_min))`.
    pub fn z_shifted(&self) -> f64 {
        self.z_shifted
    }

    pub fn log_partition_function(&self) -> f64 {
        self.z_shifted.ln() - self.spec.beta * self.min_energy
    }

    /// Unshifted `Z`; overflows to infinity for extreme parameters, use
    /// [`Self::log_partition_function`] there.
    pub fn partition_function(&self) -> f64 {
        self.log_partition_function().exp()
    }

    pub fn node_index(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::InvalidArgument(format!("unknown node id {id:?}")))
    }

    pub fn role_index(&self, role: NodeRole) -> Result<usize> {
        self.spec.nodes.iter().position(|n| n.role == role).ok_or(Error::MissingRole(role))
    }

    pub fn hidden_indices(&self) -> Vec<usize> {
        self.spec.nodes.iter().enumerate().filter(|(_, n)| n.role == NodeRole::Hidden).map(|(i, _)| i).collect()
    }

    /// Stabilized Boltzmann weight of a configuration word.
    #[inline]
    pub fn weight_bits(&self, bits: u32) -> f64 {
        (-self.spec.beta * (self.hamiltonian.energy(bits) - self.min_energy)).exp()
    }

    pub fn energy(&self, config: &SpinConfiguration) -> Result<f64> {
        self.check_config(config)?;
        Ok(self.hamiltonian.energy(config.bits()))
    }

    pub fn probability(&self, config: &SpinConfiguration) -> Result<f64> {
        self.check_config(config)?;
        Ok(self.weight_bits(config.bits()) / self.z_shifted)
    }

    /// Stabilized weight summed over all completions of `eta` (empty `eta` gives `Z_shifted`).
    pub fn weight_sum(&self, eta: &PartialAssignment) -> Result<f64> {
        self.check_partial(eta)?;
        if eta.is_empty() {
            return Ok(self.z_shifted);
        }
        Ok(self.weight_sum_raw(eta.mask(), eta.bits()))
    }

    /// `P(η)`, summing over the `2^(N-m)` configurations containing `eta`.
    pub fn marginal(&self, eta: &PartialAssignment) -> Result<f64> {
        if eta.is_empty() {
            return Err(Error::InvalidArgument("marginal of an empty assignment".into()));
        }
        Ok(self.weight_sum(eta)? / self.z_shifted)
    }

    /// `P(target | given) = P(target ∪ given) / P(given)`.
    pub fn conditional(&self, target: &PartialAssignment, given: &PartialAssignment) -> Result<f64> {
        if !target.is_disjoint(given) {
            return Err(Error::InvalidArgument("target and condition share nodes".into()));
        }
        let denominator = self.weight_sum(given)?;
        if denominator < ZERO_MEASURE {
            return Err(Error::ZeroMeasure(format!("P({}) = 0", given.describe(&self.spec))));
        }
        let joint = self.weight_sum(&target.union(given)?)?;
        Ok(joint / denominator)
    }

    /// Stabilized weights aggregated over the joint states of `nodes`.
    ///
    /// Entry `k` corresponds to node `nodes[t]` having spin +1 iff bit `t` of
    /// `k` is set.
    pub fn weight_table(&self, nodes: &[usize]) -> Result<Vec<f64>> {
        let mut seen = 0u32;
        for &i in nodes {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!("node index {i} out of range")));
            }
            if seen & 1 << i != 0 {
                return Err(Error::InvalidArgument(format!("node index {i} repeated")));
            }
            seen |= 1 << i;
        }
        let mask = seen;
        let scatter = |k: usize| -> u32 {
            nodes.iter().enumerate().fold(0u32, |acc, (t, &i)| acc | (((k >> t) & 1) as u32) << i)
        };
        let buckets = 1usize << nodes.len();
        let free_bits = (self.len() - nodes.len()) as u32;
        let table = if buckets >= 64 || free_bits <= SPLIT_THRESHOLD {
            (0..buckets)
                .into_par_iter()
                .map(|k| {
                    let base = scatter(k);
                    let mut acc = CompensatedSum::new();
                    for_each_subset(full_mask(self.len()) & !mask, |sub| acc.add(self.weight_bits(base | sub)));
                    acc.value()
                })
                .collect()
        } else {
            (0..buckets).map(|k| self.weight_sum_raw(mask, scatter(k))).collect()
        };
        Ok(table)
    }

    /// [`Self::weight_table`] normalized by `Z`.
    pub fn probability_table(&self, nodes: &[usize]) -> Result<Vec<f64>> {
        let mut table = self.weight_table(nodes)?;
        for x in &mut table {
            *x /= self.z_shifted;
        }
        Ok(table)
    }

    /// Stabilized weights of all `2^N` configurations, indexed by bit word.
    pub fn configuration_weights(&self) -> Vec<f64> {
        (0..1u64 << self.len()).into_par_iter().map(|b| self.weight_bits(b as u32)).collect()
    }

    /// Compensated sum over completions of `(mask, bits)`, using a fixed block split.
    pub(crate) fn weight_sum_raw(&self, mask: u32, bits: u32) -> f64 {
        let free = full_mask(self.len()) & !mask;
        let partials = reduce_blocks(free, bits, |base, inner| {
            let mut acc = CompensatedSum::new();
            for_each_subset(inner, |sub| acc.add(self.weight_bits(base | sub)));
            acc.value()
        });
        partials.into_iter().collect::<CompensatedSum>().value()
    }

    /// Same sum as [`Self::weight_sum_raw`] without block splitting.
    #[doc(hidden)]
    pub fn weight_sum_serial(&self, eta: &PartialAssignment) -> f64 {
        let free = full_mask(self.len()) & !eta.mask();
        let mut acc = CompensatedSum::new();
        for_each_subset(free, |sub| acc.add(self.weight_bits(eta.bits() | sub)));
        acc.value()
    }

    fn check_config(&self, config: &SpinConfiguration) -> Result<()> {
        if config.len() != self.len() {
            return Err(Error::InvalidConfiguration(format!(
                "configuration covers {} nodes, lattice has {}",
                config.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn check_partial(&self, eta: &PartialAssignment) -> Result<()> {
        match eta.max_index() {
            Some(i) if i >= self.len() => Err(Error::InvalidArgument(format!("node index {i} out of range"))),
            _ => Ok(()),
        }
    }

    /// Spin of `role` in a configuration word.
    pub fn role_spin(&self, role: NodeRole, bits: u32) -> Result<Spin> {
        Ok(Spin::from_bit(bits >> self.role_index(role)? & 1 == 1))
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Calls `f` on every subset of `mask`, in increasing numeric order.
#[inline]
pub(crate) fn for_each_subset(mask: u32, mut f: impl FnMut(u32)) {
    let mut sub = 0u32;
    loop {
        f(sub);
        if sub == mask {
            break;
        }
        sub = sub.wrapping_sub(mask) & mask;
    }
}

/// Splits the free bits into outer blocks (the highest free bits) and runs
/// `block(base, inner_free)` on each, in parallel, returning results in block order.
fn reduce_blocks<T: Send>(free: u32, fixed_bits: u32, block: impl Fn(u32, u32) -> T + Sync) -> Vec<T> {
    let count = free.count_ones();
    let split = if count > SPLIT_THRESHOLD { (count - SPLIT_THRESHOLD).min(MAX_SPLIT_BITS) } else { 0 };
    let mut outer = 0u32;
    let mut rest = free;
    for _ in 0..split {
        let top = 31 - rest.leading_zeros();
        outer |= 1 << top;
        rest &= !(1 << top);
    }
    let mut outers = Vec::with_capacity(1 << split);
    for_each_subset(outer, |o| outers.push(o));
    outers.into_par_iter().map(|o| block(fixed_bits | o, rest)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use approx::assert_relative_eq;

    fn single(h: f64) -> LatticeSpec {
        LatticeSpec::new(1.0).node("x", NodeRole::Hidden, h)
    }

    #[test]
    fn single_node_partition_functions() {
        let m = build_model(single(0.0)).unwrap();
        assert_relative_eq!(m.partition_function(), 2.0, max_relative = 1e-15);
        let m = build_model(single(1.0)).unwrap();
        let e = std::f64::consts::E;
        assert_relative_eq!(m.partition_function(), e + 1.0 / e, max_relative = 1e-15);
        let up = SpinConfiguration::from_spins(&[Spin::Up]);
        assert_relative_eq!(m.probability(&up).unwrap(), e / (e + 1.0 / e), max_relative = 1e-15);
    }

    #[test]
    fn zero_couplings_are_uniform() {
        let spec = builtin::canonical_ladder(0.0, 1.0);
        let m = build_model(spec).unwrap();
        let p = m.probability(&SpinConfiguration::from_bits(0b1011001110, 10)).unwrap();
        assert_relative_eq!(p, 1.0 / 1024.0, max_relative = 1e-14);
        let eta = PartialAssignment::new(vec![(4, Spin::Down)]).unwrap();
        assert_relative_eq!(m.marginal(&eta).unwrap(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn ladder_energies() {
        let spec = builtin::canonical_ladder(1.0, 1.0);
        let all_up = SpinConfiguration::uniform(Spin::Up, 10);
        assert_eq!(spec.energy(&all_up).unwrap(), -13.0);
        // node "1" sits at a corner with two neighbours
        let i = spec.index_of("1").unwrap();
        let flipped = SpinConfiguration::from_bits(all_up.bits() ^ 1 << i, 10);
        assert_eq!(spec.energy(&flipped).unwrap(), -9.0);
        let zero = builtin::canonical_ladder(0.0, 1.0);
        assert_eq!(zero.energy(&flipped).unwrap(), 0.0);
    }

    #[test]
    fn cubic_and_constant_terms() {
        let spec = LatticeSpec::new(1.0)
            .node("x", NodeRole::Hidden, 0.0)
            .node("y", NodeRole::Hidden, 0.0)
            .node("z", NodeRole::Hidden, 0.0)
            .cubic_term(["x", "y", "z"], 0.5);
        let mut spec = spec;
        spec.c0 = 2.0;
        let c = SpinConfiguration::from_spins(&[Spin::Up, Spin::Down, Spin::Down]);
        assert_eq!(spec.energy(&c).unwrap(), 2.5);
        let c = SpinConfiguration::from_spins(&[Spin::Up, Spin::Down, Spin::Up]);
        assert_eq!(spec.energy(&c).unwrap(), 1.5);
    }

    #[test]
    fn global_flip_symmetry_is_exact() {
        let m = build_model(builtin::canonical_ladder(1.0, 1.0)).unwrap();
        for bits in [0u32, 0b1010101010, 0b1110001101, 0b0000011111] {
            let c = SpinConfiguration::from_bits(bits, 10);
            assert_eq!(m.probability(&c).unwrap(), m.probability(&c.flipped()).unwrap());
        }
    }

    #[test]
    fn marginal_errors() {
        let m = build_model(single(0.0)).unwrap();
        assert!(matches!(m.marginal(&PartialAssignment::default()), Err(Error::InvalidArgument(_))));
        let far = PartialAssignment::new(vec![(3, Spin::Up)]).unwrap();
        assert!(m.marginal(&far).is_err());
        let x = PartialAssignment::new(vec![(0, Spin::Up)]).unwrap();
        assert!(matches!(m.conditional(&x, &x), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let spec = builtin::chain(12, 1.0, 1.0).unwrap();
        let err = BoltzmannModel::build(spec, &BuildOptions { max_nodes: 10 }).unwrap_err();
        assert!(matches!(err, Error::EnumerationLimit { nodes: 14, cap: 10 }));
    }

    #[test]
    fn extreme_couplings_stay_in_range() {
        let m = build_model(builtin::canonical_ladder(400.0, 1.0)).unwrap();
        assert!(m.partition_function().is_infinite());
        assert!(m.log_partition_function().is_finite());
        let up = SpinConfiguration::uniform(Spin::Up, 10);
        assert_relative_eq!(m.probability(&up).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn split_and_serial_sums_agree() {
        let m = build_model(builtin::chain(14, 0.7, 1.0).unwrap()).unwrap();
        assert!(m.len() > SPLIT_THRESHOLD as usize);
        let empty = PartialAssignment::default();
        let split = m.weight_sum(&empty).unwrap();
        let serial = m.weight_sum_serial(&empty);
        assert!((split - serial).abs() <= 1e-12 * serial);
    }

    #[test]
    fn weight_table_matches_direct_sums() {
        let m = build_model(builtin::footnote23()).unwrap();
        let nodes = [m.node_index("1").unwrap(), m.node_index("b").unwrap()];
        let table = m.weight_table(&nodes).unwrap();
        for (k, w) in table.iter().enumerate() {
            let eta = PartialAssignment::new(vec![
                (nodes[0], Spin::from_bit(k & 1 == 1)),
                (nodes[1], Spin::from_bit(k & 2 == 2)),
            ])
            .unwrap();
            assert_relative_eq!(*w, m.weight_sum(&eta).unwrap(), max_relative = 1e-14);
        }
        let total: f64 = table.iter().sum();
        assert_relative_eq!(total, m.z_shifted(), max_relative = 1e-14);
    }
}
