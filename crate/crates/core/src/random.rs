//! Seeded random nearest-neighbour lattices for property checks.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, NodeRole};
use crate::sampling::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomFamily {
    /// Random pair couplings among all nodes.
    General,
    /// Each analyzer couples only to its own outcome; hidden nodes only among themselves.
    Local,
    /// Isolated analyzers; outcomes couple to hidden nodes only.
    Shielded,
}

impl RandomFamily {
    pub const ALL: [RandomFamily; 3] = [RandomFamily::General, RandomFamily::Local, RandomFamily::Shielded];
}

/// Lattice with `nodes` spins: `1, 2, a, b` and hidden `3, 4, ...`.
///
/// Each allowed pair gets a coupling in `[-1.5, 1.5)` with probability 0.4
/// (always, for the analyzer-outcome pairs of the local family). Fields lie in
/// `[-1, 1)` and `β` in `[0.5, 1.5)`.
pub fn random_lattice(seed: u64, nodes: usize, family: RandomFamily) -> Result<LatticeSpec> {
    if !(5..=crate::lattice::MAX_ENCODABLE_NODES).contains(&nodes) {
        return Err(Error::InvalidArgument(format!("random lattices need 5 to 30 nodes, got {nodes}")));
    }
    let mut rng = stream_rng(seed, 0);
    let ids: Vec<String> =
        ["1", "2", "a", "b"].iter().map(|s| s.to_string()).chain((3..nodes - 1).map(|k| k.to_string())).collect();
    let mut spec = LatticeSpec::new(rng.gen_range(0.5..1.5));
    for (i, id) in ids.iter().enumerate() {
        let role = match i {
            0 => NodeRole::Outcome1,
            1 => NodeRole::Outcome2,
            2 => NodeRole::AnalyzerA,
            3 => NodeRole::AnalyzerB,
            _ => NodeRole::Hidden,
        };
        spec = spec.node(id, role, rng.gen_range(-1.0..1.0));
    }
    let hidden = |i: usize| i >= 4;
    for i in 0..nodes {
        for j in i + 1..nodes {
            let (allowed, p) = match family {
                RandomFamily::General => (true, 0.4),
                RandomFamily::Local if (i, j) == (0, 2) || (i, j) == (1, 3) => (true, 1.0),
                RandomFamily::Local => (hidden(i), 0.4),
                RandomFamily::Shielded => (hidden(j) && (i < 2 || hidden(i)), 0.4),
            };
            // Draw regardless so the stream layout does not depend on the family.
            let coin = rng.gen::<f64>();
            let j_value = rng.gen_range(-1.5..1.5);
            if allowed && coin < p {
                spec = spec.edge(&ids[i], &ids[j], j_value);
            }
        }
    }
    Ok(spec)
}
