//! Built-in lattices used by the reproduction cases, tests and the CLI.
//!
//! Node declaration order (and therefore bit order) is always
//! `1, 2, a, b` followed by the hidden nodes in ascending label order.

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, NodeRole};

/// The 13 nearest-neighbour pairs of the 2x5 canonical ladder.
///
/// Top row `1 3 4 5 2`, bottom row `a 6 7 8 b`.
pub const LADDER_EDGES: [(&str, &str); 13] = [
    ("1", "a"),
    ("1", "3"),
    ("a", "6"),
    ("3", "6"),
    ("3", "4"),
    ("6", "7"),
    ("4", "7"),
    ("4", "5"),
    ("7", "8"),
    ("5", "8"),
    ("5", "2"),
    ("8", "b"),
    ("2", "b"),
];

/// Left-right mirror of the ladder labels (4 and 7 are fixed).
pub const LADDER_MIRROR: [(&str, &str); 10] = [
    ("1", "2"),
    ("2", "1"),
    ("a", "b"),
    ("b", "a"),
    ("3", "5"),
    ("5", "3"),
    ("6", "8"),
    ("8", "6"),
    ("4", "4"),
    ("7", "7"),
];

pub const LADDER_HIDDEN: [&str; 6] = ["3", "4", "5", "6", "7", "8"];

pub fn mirror_label(id: &str) -> Option<&'static str> {
    LADDER_MIRROR.iter().find(|(x, _)| *x == id).map(|(_, y)| *y)
}

fn ten_nodes(beta: f64, field: impl Fn(&str) -> f64) -> LatticeSpec {
    let mut spec = LatticeSpec::new(beta)
        .node("1", NodeRole::Outcome1, field("1"))
        .node("2", NodeRole::Outcome2, field("2"))
        .node("a", NodeRole::AnalyzerA, field("a"))
        .node("b", NodeRole::AnalyzerB, field("b"));
    for id in LADDER_HIDDEN {
        spec = spec.node(id, NodeRole::Hidden, field(id));
    }
    spec
}

/// Homogeneous canonical ladder: every coupling `j`, no fields.
pub fn canonical_ladder(j: f64, beta: f64) -> LatticeSpec {
    ladder_with(beta, |_, _| j, |_| 0.0)
}

/// Canonical ladder with per-edge couplings and per-node fields.
pub fn ladder_with(beta: f64, coupling: impl Fn(&str, &str) -> f64, field: impl Fn(&str) -> f64) -> LatticeSpec {
    let mut spec = ten_nodes(beta, field);
    for (a, b) in LADDER_EDGES {
        spec = spec.edge(a, b, coupling(a, b));
    }
    spec
}

/// The left-right symmetric parameter set reaching X_BI ≈ 2.87 on the ladder.
///
/// The published set leaves `h7` unspecified; it is taken as -1 like the
/// other bottom-row interior nodes.
pub fn footnote23() -> LatticeSpec {
    let left_j = |a: &str, b: &str| -> f64 {
        let key = |x: &str, y: &str| (a == x && b == y) || (a == y && b == x);
        if key("1", "a") || key("1", "3") {
            2.0
        } else if key("3", "6") || key("3", "4") {
            1.0
        } else if key("4", "7") || key("6", "7") {
            4.0
        } else if key("a", "6") {
            3.0
        } else {
            f64::NAN
        }
    };
    let coupling = |a: &str, b: &str| {
        let direct = left_j(a, b);
        if direct.is_nan() {
            left_j(mirror_label(a).unwrap(), mirror_label(b).unwrap())
        } else {
            direct
        }
    };
    let field = |id: &str| match id {
        "1" | "2" => 3.0,
        "3" | "4" | "5" => 1.0,
        "6" | "7" | "8" | "a" | "b" => -1.0,
        _ => unreachable!(),
    };
    ladder_with(1.0, coupling, field)
}

/// A grid position `(row, column)`.
pub type Site = (usize, usize);

/// Where the four observed roles sit on a rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct GridPlacement {
    pub rows: usize,
    pub cols: usize,
    pub outcome1: Site,
    pub outcome2: Site,
    pub analyzer_a: Site,
    pub analyzer_b: Site,
}

impl GridPlacement {
    pub fn sites(&self) -> [Site; 4] {
        [self.outcome1, self.outcome2, self.analyzer_a, self.analyzer_b]
    }

    pub fn mirror(&self, site: Site) -> Site {
        (site.0, self.cols - 1 - site.1)
    }

    /// Placement of the canonical ladder.
    pub fn canonical() -> Self {
        GridPlacement { rows: 2, cols: 5, outcome1: (0, 0), outcome2: (0, 4), analyzer_a: (1, 0), analyzer_b: (1, 4) }
    }

    /// The 2x5 square lattice with each analyzer diagonally inward of its outcome spin.
    pub fn ch2_square() -> Self {
        GridPlacement { rows: 2, cols: 5, outcome1: (0, 0), outcome2: (0, 4), analyzer_a: (1, 1), analyzer_b: (1, 3) }
    }

    /// All four observed spins on one unit square, so 1-2 and 1-b interact directly.
    pub fn fig2() -> Self {
        GridPlacement { rows: 2, cols: 5, outcome1: (0, 0), outcome2: (0, 1), analyzer_a: (1, 0), analyzer_b: (1, 1) }
    }

    /// Node id at each site; hidden sites are labelled 3, 4, ... in row-major order.
    pub fn labels(&self) -> Vec<Vec<String>> {
        let mut next = 3;
        let mut out = vec![vec![String::new(); self.cols]; self.rows];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, label) in row.iter_mut().enumerate() {
                *label = if (r, c) == self.outcome1 {
                    "1".into()
                } else if (r, c) == self.outcome2 {
                    "2".into()
                } else if (r, c) == self.analyzer_a {
                    "a".into()
                } else if (r, c) == self.analyzer_b {
                    "b".into()
                } else {
                    next += 1;
                    (next - 1).to_string()
                };
            }
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let sites = self.sites();
        for (i, s) in sites.iter().enumerate() {
            if s.0 >= self.rows || s.1 >= self.cols {
                return Err(Error::InvalidArgument(format!("site {s:?} outside the grid")));
            }
            if sites[..i].contains(s) {
                return Err(Error::InvalidArgument(format!("site {s:?} used twice")));
            }
        }
        Ok(())
    }
}

/// Rectangular grid with first-neighbour coupling `j1` and diagonal
/// (second-neighbour) coupling `j2`; `field` is looked up by node id.
pub fn grid_lattice(
    placement: &GridPlacement,
    j1: f64,
    j2: f64,
    beta: f64,
    field: impl Fn(&str) -> f64,
) -> Result<LatticeSpec> {
    placement.validate()?;
    let labels = placement.labels();
    let hidden_count = placement.rows * placement.cols - 4;
    let mut spec = LatticeSpec::new(beta)
        .node("1", NodeRole::Outcome1, field("1"))
        .node("2", NodeRole::Outcome2, field("2"))
        .node("a", NodeRole::AnalyzerA, field("a"))
        .node("b", NodeRole::AnalyzerB, field("b"));
    for k in 0..hidden_count {
        let id = (k + 3).to_string();
        let h = field(&id);
        spec = spec.node(&id, NodeRole::Hidden, h);
    }
    for r in 0..placement.rows {
        for c in 0..placement.cols {
            let here = &labels[r][c];
            if c + 1 < placement.cols {
                spec = spec.edge(here, &labels[r][c + 1], j1);
            }
            if r + 1 < placement.rows {
                spec = spec.edge(here, &labels[r + 1][c], j1);
                if j2 != 0.0 {
                    if c + 1 < placement.cols {
                        spec = spec.edge(here, &labels[r + 1][c + 1], j2);
                    }
                    if c > 0 {
                        spec = spec.edge(here, &labels[r + 1][c - 1], j2);
                    }
                }
            }
        }
    }
    Ok(spec)
}

/// Uniform coupling and field on the 2x5 square lattice with inward analyzers.
pub fn ch2_square(j: f64, h: f64) -> LatticeSpec {
    grid_lattice(&GridPlacement::ch2_square(), j, 0.0, 1.0, |_| h).expect("fixed placement is valid")
}

/// Field set 1.9 on nodes 1, 2, 6, 8 and 0.4 elsewhere, every coupling `j`.
pub fn ch2_field_pattern(id: &str) -> f64 {
    match id {
        "1" | "2" | "6" | "8" => 1.9,
        _ => 0.4,
    }
}

pub fn ch2_square_fields(j: f64) -> LatticeSpec {
    grid_lattice(&GridPlacement::ch2_square(), j, 0.0, 1.0, ch2_field_pattern).expect("fixed placement is valid")
}

/// Square lattice with first- and second-neighbour couplings and left-right interactions.
pub fn fig2() -> LatticeSpec {
    grid_lattice(&GridPlacement::fig2(), 1.0, 0.5, 1.0, |_| 1.0).expect("fixed placement is valid")
}

/// Canonical ladder plus the eight diagonals of its unit squares.
pub fn fig2_ladder_diagonals() -> LatticeSpec {
    grid_lattice(&GridPlacement::canonical(), 1.0, 0.5, 1.0, |_| 1.0).expect("fixed placement is valid")
}

/// Open chain `1 - a - 3 - 4 - ... - n - b - 2` with `n + 2` spins and `n + 1` bonds.
pub fn chain(n: usize, j: f64, beta: f64) -> Result<LatticeSpec> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("chain needs n >= 3, got {n}")));
    }
    let mut spec = LatticeSpec::new(beta)
        .node("1", NodeRole::Outcome1, 0.0)
        .node("2", NodeRole::Outcome2, 0.0)
        .node("a", NodeRole::AnalyzerA, 0.0)
        .node("b", NodeRole::AnalyzerB, 0.0);
    for k in 3..=n {
        spec = spec.node(&k.to_string(), NodeRole::Hidden, 0.0);
    }
    let mut path: Vec<String> = vec!["1".into(), "a".into()];
    path.extend((3..=n).map(|k| k.to_string()));
    path.push("b".into());
    path.push("2".into());
    for w in path.windows(2) {
        spec = spec.edge(&w[0], &w[1], j);
    }
    Ok(spec)
}

pub const BUILTIN_NAMES: [&str; 7] =
    ["canonical-ladder", "footnote23", "ch2-square", "ch2-square-fields", "fig2", "fig2-ladder-diagonals", "chain-<n>"];

/// Looks up a built-in lattice by name (see [`BUILTIN_NAMES`]).
pub fn by_name(name: &str) -> Result<LatticeSpec> {
    let spec = match name {
        "canonical-ladder" => canonical_ladder(1.0, 1.0),
        "footnote23" => footnote23(),
        "ch2-square" => ch2_square(1.4, 1.0),
        "ch2-square-fields" => ch2_square_fields(2.0),
        "fig2" => fig2(),
        "fig2-ladder-diagonals" => fig2_ladder_diagonals(),
        other => match other.strip_prefix("chain-").map(str::parse::<usize>) {
            Some(Ok(n)) => chain(n, 1.0, 1.0)?,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown built-in lattice {other:?}; known: {}",
                    BUILTIN_NAMES.join(", ")
                )))
            }
        },
    };
    Ok(spec)
}

/// Resolves `builtin:<name>` or a lattice file path; relative paths are taken from `base_dir`.
pub fn resolve(reference: &str, base_dir: &std::path::Path) -> Result<LatticeSpec> {
    match reference.strip_prefix("builtin:") {
        Some(name) => by_name(name),
        None => LatticeSpec::from_path(base_dir.join(reference)),
    }
}
