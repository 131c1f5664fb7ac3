//! Conditional outcome tables, correlators and the CHSH combination.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{NodeRole, Spin};
use crate::model::{BoltzmannModel, ZERO_MEASURE};

/// A pair of analyzer settings `(σa, σb)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Setting {
    pub a: Spin,
    pub b: Spin,
}

impl Setting {
    /// All four settings in index order.
    pub const ALL: [Setting; 4] = [
        Setting { a: Spin::Down, b: Spin::Down },
        Setting { a: Spin::Up, b: Spin::Down },
        Setting { a: Spin::Down, b: Spin::Up },
        Setting { a: Spin::Up, b: Spin::Up },
    ];

    pub fn new(a: Spin, b: Spin) -> Self {
        Setting { a, b }
    }

    /// Bit 0 is `σa`, bit 1 is `σb`; a set bit means +1.
    pub fn index(self) -> usize {
        self.a.bit() as usize | (self.b.bit() as usize) << 1
    }

    pub fn from_index(i: usize) -> Self {
        Setting::ALL[i & 3]
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// The 16 values `P(σ1, σ2 | σa, σb)`.
///
/// Entry index: bit 0 `σ1`, bit 1 `σ2`, bit 2 `σa`, bit 3 `σb`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalTable {
    entries: [f64; 16],
}

/// Index of `(σ1, σ2, σa, σb)` in a [`ConditionalTable`].
pub fn cell_index(s1: Spin, s2: Spin, sa: Spin, sb: Spin) -> usize {
    s1.bit() as usize | (s2.bit() as usize) << 1 | (sa.bit() as usize) << 2 | (sb.bit() as usize) << 3
}

impl ConditionalTable {
    /// Validates that entries lie in `[0, 1]` and every column sums to 1 within `1e-10`.
    pub fn from_entries(entries: [f64; 16]) -> Result<Self> {
        for (i, &p) in entries.iter().enumerate() {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(Error::InvalidArgument(format!("entry {i} = {p} is not a probability")));
            }
        }
        for s in 0..4 {
            let total: f64 = entries[s * 4..s * 4 + 4].iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!("column {} sums to {total}", Setting::from_index(s))));
            }
        }
        Ok(ConditionalTable { entries })
    }

    pub fn uniform() -> Self {
        ConditionalTable { entries: [0.25; 16] }
    }

    /// Normalizes each setting column of a 16-entry weight table.
    pub(crate) fn from_weights(weights: &[f64]) -> Result<Self> {
        let mut entries = [0.0; 16];
        for setting in Setting::ALL {
            let s = setting.index();
            let column = &weights[s * 4..s * 4 + 4];
            let total: f64 = column.iter().sum();
            if total < ZERO_MEASURE {
                return Err(Error::ZeroMeasure(format!("P(σa={}, σb={}) = 0", setting.a, setting.b)));
            }
            for (k, w) in column.iter().enumerate() {
                entries[s * 4 + k] = w / total;
            }
        }
        Ok(ConditionalTable { entries })
    }

    pub fn get(&self, s1: Spin, s2: Spin, sa: Spin, sb: Spin) -> f64 {
        self.entries[cell_index(s1, s2, sa, sb)]
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.entries
    }

    /// `(σ1, σ2, σa, σb, p)` for every cell in index order.
    pub fn cells(&self) -> impl Iterator<Item = (Spin, Spin, Spin, Spin, f64)> + '_ {
        self.entries.iter().enumerate().map(|(i, &p)| {
            let bit = |k: usize| Spin::from_bit(i >> k & 1 == 1);
            (bit(0), bit(1), bit(2), bit(3), p)
        })
    }

    pub fn max_abs_diff(&self, other: &ConditionalTable) -> f64 {
        self.entries.iter().zip(other.entries.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Conditional outcome table of a model, by postselection on the analyzer spins.
pub fn conditional_table(model: &BoltzmannModel) -> Result<ConditionalTable> {
    let nodes = observed_indices(model)?;
    ConditionalTable::from_weights(&model.weight_table(&nodes)?)
}

/// Indices of nodes `1, 2, a, b`.
pub fn observed_indices(model: &BoltzmannModel) -> Result<[usize; 4]> {
    let mut out = [0; 4];
    for (slot, role) in out.iter_mut().zip(NodeRole::OBSERVED) {
        *slot = model.role_index(role)?;
    }
    Ok(out)
}

/// `E[σ1 σ2 | σa, σb]`.
pub fn correlator(table: &ConditionalTable, sa: Spin, sb: Spin) -> f64 {
    table.get(Spin::Up, Spin::Up, sa, sb) + table.get(Spin::Down, Spin::Down, sa, sb)
        - table.get(Spin::Up, Spin::Down, sa, sb)
        - table.get(Spin::Down, Spin::Up, sa, sb)
}

pub const SETTING_CONVENTION: &str = "a=b=+1, a'=b'=-1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub m_ab: f64,
    pub m_apb: f64,
    pub m_abp: f64,
    pub m_apbp: f64,
    pub x_bi: f64,
    pub convention: &'static str,
    /// Largest `|X|` over the four ways of assigning the primed settings.
    pub max_abs_x: f64,
}

/// CHSH combination with `a = b = +1` and `a' = b' = -1`.
pub fn chsh(table: &ConditionalTable) -> ChshReport {
    let m_ab = correlator(table, Spin::Up, Spin::Up);
    let m_apb = correlator(table, Spin::Down, Spin::Up);
    let m_abp = correlator(table, Spin::Up, Spin::Down);
    let m_apbp = correlator(table, Spin::Down, Spin::Down);
    let all = [m_ab, m_apb, m_abp, m_apbp];
    let total: f64 = all.iter().sum();
    let max_abs_x = all.iter().map(|m| (total - 2.0 * m).abs()).fold(0.0, f64::max);
    ChshReport {
        m_ab,
        m_apb,
        m_abp,
        m_apbp,
        x_bi: m_ab + m_apb + m_abp - m_apbp,
        convention: SETTING_CONVENTION,
        max_abs_x,
    }
}

/// Shorthand for `chsh(&conditional_table(model)?)`.
pub fn model_chsh(model: &BoltzmannModel) -> Result<ChshReport> {
    Ok(chsh(&conditional_table(model)?))
}

/// Singlet-style correlation `cos(a - b)`; the sign convention `-cos` is not used.
pub fn quantum_reference(a: f64, b: f64) -> f64 {
    (a - b).cos()
}

/// `M(a,b) + M(a',b) + M(a,b') - M(a',b')` with the cosine law.
pub fn quantum_chsh(a: f64, ap: f64, b: f64, bp: f64) -> f64 {
    quantum_reference(a, b) + quantum_reference(ap, b) + quantum_reference(a, bp) - quantum_reference(ap, bp)
}

/// Angles `(a, a', b, b')` reaching `2√2`.
pub const STANDARD_ANGLES: [f64; 4] = [0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::model::build_model;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_couplings_give_uniform_table() {
        let spec = builtin::canonical_ladder(0.0, 1.0);
        let table = conditional_table(&build_model(spec).unwrap()).unwrap();
        for (.., p) in table.cells() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(chsh(&table).x_bi, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn perfect_correlation() {
        let mut e = [0.0; 16];
        for setting in Setting::ALL {
            e[cell_index(Spin::Up, Spin::Up, setting.a, setting.b)] = 0.5;
            e[cell_index(Spin::Down, Spin::Down, setting.a, setting.b)] = 0.5;
        }
        let table = ConditionalTable::from_entries(e).unwrap();
        assert_eq!(correlator(&table, Spin::Up, Spin::Down), 1.0);
        let r = chsh(&table);
        assert_eq!(r.x_bi, 2.0);
        assert_eq!(r.x_bi, r.m_ab + r.m_apb + r.m_abp - r.m_apbp);
        assert_eq!(correlator(&ConditionalTable::uniform(), Spin::Up, Spin::Up), 0.0);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(ConditionalTable::from_entries([0.3; 16]).is_err());
        let mut e = [0.25; 16];
        e[0] = -0.1;
        e[1] = 0.6;
        assert!(ConditionalTable::from_entries(e).is_err());
    }

    #[test]
    fn homogeneous_ladder_chsh() {
        let model = build_model(builtin::canonical_ladder(1.0, 1.0)).unwrap();
        let table = conditional_table(&model).unwrap();
        assert_abs_diff_eq!(chsh(&table).x_bi, -0.667, epsilon = 5e-4);
        for setting in Setting::ALL {
            let column: f64 = Spin::BOTH
                .iter()
                .flat_map(|&x| Spin::BOTH.map(move |y| (x, y)))
                .map(|(x, y)| table.get(x, y, setting.a, setting.b))
                .sum();
            assert_abs_diff_eq!(column, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_measure_setting_is_named() {
        // An infinitely strong field pins a to +1 in double precision.
        let mut spec = builtin::canonical_ladder(1.0, 1.0);
        spec.node_mut("a").unwrap().h = 400.0;
        let err = conditional_table(&build_model(spec).unwrap()).unwrap_err();
        assert!(matches!(err, Error::ZeroMeasure(ref m) if m.contains("σa=-")), "{err}");
    }

    #[test]
    fn quantum_bound() {
        let [a, ap, b, bp] = STANDARD_ANGLES;
        assert_abs_diff_eq!(quantum_chsh(a, ap, b, bp), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(quantum_reference(0.3, 0.3), 1.0);
        assert_abs_diff_eq!(quantum_reference(FRAC_PI_2, 0.0), 0.0, epsilon = 1e-16);
    }

    #[test]
    fn setting_index_round_trip() {
        for i in 0..4 {
            assert_eq!(Setting::from_index(i).index(), i);
        }
    }
}
