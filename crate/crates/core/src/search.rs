//! Derivative-free maximization of the CHSH value over couplings and fields.
//!
//! A search point assigns one value to each [`Parameter`]; a parameter may
//! drive several couplings or fields at once, which is how symmetry ties are
//! expressed. Each restart runs a compass (pattern) search: try `±step` along
//! every free axis, move on the first improvement, halve the step after a
//! pass without one, and stop once the step is below `1e-3`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::builtin::{self, GridPlacement};
use crate::chsh::{model_chsh, ChshReport};
use crate::error::{Error, Result};
use crate::independence::{HiddenSubset, LambdaTable};
use crate::lattice::LatticeSpec;
use crate::model::{build_model, BoltzmannModel};
use crate::sampling::stream_rng;

/// Stencil steps below this length end a local search.
pub const MIN_STEP: f64 = 1e-3;
pub const DEFAULT_FIELD_BOUNDS: (f64, f64) = (-3.0, 3.0);
pub const DEFAULT_COUPLING_BOUNDS: (f64, f64) = (0.0, 4.0);

/// A field or coupling driven by a search parameter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    H(String),
    J(String, String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameter {
    pub name: String,
    pub targets: Vec<Target>,
    pub lower: f64,
    pub upper: f64,
    /// Starting value of the first restart; defaults to the base lattice value.
    #[serde(default)]
    pub start: Option<f64>,
}

impl Parameter {
    pub fn is_free(&self) -> bool {
        self.upper > self.lower
    }

    fn range(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// CHSH value under the fixed setting convention.
    #[default]
    XBi,
    /// Largest `|X|` over setting conventions.
    MaxAbsX,
}

impl Objective {
    pub fn score(self, report: &ChshReport) -> f64 {
        match self {
            Objective::XBi => report.x_bi,
            Objective::MaxAbsX => report.max_abs_x,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    base: LatticeSpec,
    params: Vec<Parameter>,
    objective: Objective,
}

fn target_value(spec: &LatticeSpec, t: &Target) -> Result<f64> {
    match t {
        Target::H(id) => spec
            .nodes
            .iter()
            .find(|n| &n.id == id)
            .map(|n| n.h)
            .ok_or_else(|| Error::InvalidArgument(format!("no node {id}"))),
        Target::J(a, b) => spec
            .edges
            .iter()
            .find(|e| e.joins(a, b))
            .map(|e| e.j)
            .ok_or_else(|| Error::InvalidArgument(format!("no edge {a}-{b}"))),
    }
}

fn same_target(x: &Target, y: &Target) -> bool {
    match (x, y) {
        (Target::H(a), Target::H(b)) => a == b,
        (Target::J(a, b), Target::J(c, d)) => (a == c && b == d) || (a == d && b == c),
        _ => false,
    }
}

impl SearchSpace {
    pub fn new(base: LatticeSpec, params: Vec<Parameter>, objective: Objective) -> Result<Self> {
        base.validate_bell()?;
        for (i, p) in params.iter().enumerate() {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower <= p.upper) {
                return Err(Error::InvalidArgument(format!("parameter {} has bad bounds", p.name)));
            }
            if p.targets.is_empty() {
                return Err(Error::InvalidArgument(format!("parameter {} has no targets", p.name)));
            }
            if let Some(s) = p.start {
                if !(p.lower..=p.upper).contains(&s) {
                    return Err(Error::InvalidArgument(format!("start of {} is outside its bounds", p.name)));
                }
            }
            for t in &p.targets {
                target_value(&base, t)?;
                let clash = params[..i].iter().chain(std::iter::once(p)).flat_map(|q| &q.targets);
                if clash.filter(|u| same_target(u, t)).count() > 1 {
                    return Err(Error::InvalidArgument(format!("{t:?} belongs to more than one parameter")));
                }
            }
        }
        Ok(SearchSpace { base, params, objective })
    }

    /// Ties mirror-image fields and couplings of a left-right symmetric grid lattice.
    ///
    /// `mirror` maps each node id to its image. Fields get
    /// [`DEFAULT_FIELD_BOUNDS`] and couplings [`DEFAULT_COUPLING_BOUNDS`].
    pub fn symmetric(base: LatticeSpec, mirror: impl Fn(&str) -> Option<String>, objective: Objective) -> Result<Self> {
        let mut params: Vec<Parameter> = Vec::new();
        let clamp = |v: f64, (lo, hi): (f64, f64)| Some(v.clamp(lo, hi));
        for n in &base.nodes {
            let image = mirror(&n.id).ok_or_else(|| Error::InvalidArgument(format!("node {} has no mirror", n.id)))?;
            let t = Target::H(n.id.clone());
            if params.iter().any(|p| p.targets.iter().any(|u| same_target(u, &t))) {
                continue;
            }
            let mut targets = vec![t];
            if image != n.id {
                targets.push(Target::H(image.clone()));
            }
            let name = if image == n.id { format!("h{}", n.id) } else { format!("h{}={}", n.id, image) };
            params.push(Parameter {
                name,
                targets,
                lower: DEFAULT_FIELD_BOUNDS.0,
                upper: DEFAULT_FIELD_BOUNDS.1,
                start: clamp(n.h, DEFAULT_FIELD_BOUNDS),
            });
        }
        for e in &base.edges {
            let t = Target::J(e.a.clone(), e.b.clone());
            if params.iter().any(|p| p.targets.iter().any(|u| same_target(u, &t))) {
                continue;
            }
            let (ma, mb) = (mirror(&e.a).unwrap(), mirror(&e.b).unwrap());
            let image = Target::J(ma.clone(), mb.clone());
            let mut targets = vec![t];
            if !same_target(&targets[0], &image) {
                if !base.edges.iter().any(|f| f.joins(&ma, &mb)) {
                    return Err(Error::InvalidArgument(format!("edge {}-{} has no mirror image", e.a, e.b)));
                }
                targets.push(image);
            }
            params.push(Parameter {
                name: format!("J{}{}", e.a, e.b),
                targets,
                lower: DEFAULT_COUPLING_BOUNDS.0,
                upper: DEFAULT_COUPLING_BOUNDS.1,
                start: clamp(e.j, DEFAULT_COUPLING_BOUNDS),
            });
        }
        Self::new(base, params, objective)
    }

    /// One parameter driving every coupling at once.
    pub fn uniform_coupling(base: LatticeSpec, lower: f64, upper: f64, objective: Objective) -> Result<Self> {
        let targets = base.edges.iter().map(|e| Target::J(e.a.clone(), e.b.clone())).collect();
        let start = base.edges.first().map(|e| e.j.clamp(lower, upper));
        Self::new(base, vec![Parameter { name: "J".into(), targets, lower, upper, start }], objective)
    }

    pub fn base(&self) -> &LatticeSpec {
        &self.base
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn objective(&self) -> Objective {
        self.objective
    }

    pub fn free_dims(&self) -> usize {
        self.params.iter().filter(|p| p.is_free()).count()
    }

    /// First restart's starting point.
    pub fn start_point(&self) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| {
                p.start.unwrap_or_else(|| {
                    target_value(&self.base, &p.targets[0]).unwrap_or(p.lower).clamp(p.lower, p.upper)
                })
            })
            .collect()
    }

    /// Lattice at `point`; every target of a parameter receives the same value.
    pub fn apply(&self, point: &[f64]) -> Result<LatticeSpec> {
        if point.len() != self.params.len() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, space has {}",
                point.len(),
                self.params.len()
            )));
        }
        let mut spec = self.base.clone();
        for (p, &v) in self.params.iter().zip(point) {
            for t in &p.targets {
                match t {
                    Target::H(id) => spec.node_mut(id).expect("validated target").h = v,
                    Target::J(a, b) => spec.edge_mut(a, b).expect("validated target").j = v,
                }
            }
        }
        for (p, &v) in self.params.iter().zip(point) {
            for t in &p.targets {
                assert_eq!(target_value(&spec, t).ok(), Some(v), "tie group {} violated", p.name);
            }
        }
        Ok(spec)
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<ChshReport> {
        model_chsh(&build_model(self.apply(point)?)?)
    }

    /// Objective at `point`; failed evaluations score `-inf`.
    pub fn score(&self, point: &[f64]) -> f64 {
        self.evaluate(point).map(|r| self.objective.score(&r)).unwrap_or(f64::NEG_INFINITY)
    }

    fn random_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        let start = self.start_point();
        self.params
            .iter()
            .zip(start)
            .map(|(p, s)| if p.is_free() { rng.gen_range(p.lower..=p.upper) } else { s })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Incumbent {
    /// Evaluation index within its restart.
    pub evaluation: usize,
    pub value: f64,
    pub point: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    /// ChaCha stream of the restart; stream 0 starts from the base values.
    pub stream: u64,
    pub start: Vec<f64>,
    pub best_value: f64,
    pub evaluations: usize,
    /// True when the step fell below the minimum with no stencil improvement.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub names: Vec<String>,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub best_report: Option<ChshReport>,
    pub evaluations: usize,
    pub seed: u64,
    /// Incumbents of the winning restart.
    pub trajectory: Vec<Incumbent>,
    pub restarts: Vec<RestartSummary>,
}

struct LocalRun {
    summary: RestartSummary,
    best: Vec<f64>,
    trajectory: Vec<Incumbent>,
}

fn local_search(space: &SearchSpace, start: Vec<f64>, budget: usize, stream: u64) -> LocalRun {
    let mut evaluations = 1;
    let mut x = start.clone();
    let mut fx = space.score(&x);
    let mut trajectory = vec![Incumbent { evaluation: 0, value: fx, point: x.clone() }];
    let free: Vec<usize> = (0..space.params.len()).filter(|&d| space.params[d].is_free()).collect();
    let mut step = 0.25;
    let mut converged = free.is_empty();
    'outer: while !free.is_empty() {
        let longest = free.iter().map(|&d| step * space.params[d].range()).fold(0.0, f64::max);
        if longest < MIN_STEP {
            converged = true;
            break;
        }
        let mut improved = false;
        for &d in &free {
            let p = &space.params[d];
            for dir in [1.0, -1.0] {
                let v = (x[d] + dir * step * p.range()).clamp(p.lower, p.upper);
                if v == x[d] {
                    continue;
                }
                if evaluations >= budget {
                    break 'outer;
                }
                let mut y = x.clone();
                y[d] = v;
                let fy = space.score(&y);
                evaluations += 1;
                if fy > fx {
                    x = y;
                    fx = fy;
                    trajectory.push(Incumbent { evaluation: evaluations - 1, value: fx, point: x.clone() });
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    LocalRun { summary: RestartSummary { stream, start, best_value: fx, evaluations, converged }, best: x, trajectory }
}

/// Pattern search with `restarts` starts run in parallel; the total budget is split evenly.
///
/// Restart 0 starts at [`SearchSpace::start_point`]; restart `r` starts at a
/// uniform point drawn from ChaCha stream `r` of `seed`. Ties between restarts
/// go to the lower index, so the result depends only on the arguments.
pub fn maximize_chsh(space: &SearchSpace, budget: usize, seed: u64, restarts: usize) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    let restarts = if space.free_dims() == 0 { 1 } else { restarts.clamp(1, budget) };
    let starts: Vec<Vec<f64>> = (0..restarts as u64)
        .map(|r| if r == 0 { space.start_point() } else { space.random_point(&mut stream_rng(seed, r)) })
        .collect();
    let share = budget / restarts;
    let extra = budget % restarts;
    let runs: Vec<LocalRun> = starts
        .into_par_iter()
        .enumerate()
        .map(|(r, start)| local_search(space, start, share + usize::from(r < extra), r as u64))
        .collect();
    let mut winner = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.summary.best_value > runs[winner].summary.best_value {
            winner = r;
        }
    }
    let evaluations = runs.iter().map(|r| r.summary.evaluations).sum();
    let best_point = runs[winner].best.clone();
    let best_report = space.evaluate(&best_point).ok();
    Ok(SearchResult {
        names: space.params.iter().map(|p| p.name.clone()).collect(),
        best_value: runs[winner].summary.best_value,
        best_point,
        best_report,
        evaluations,
        seed,
        trajectory: runs[winner].trajectory.clone(),
        restarts: runs.into_iter().map(|r| r.summary).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub point: Vec<f64>,
    pub x_bi: f64,
    pub md: f64,
    pub od: f64,
    pub pd: f64,
    pub error: Option<String>,
}

/// Upper limit on grid points.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Evaluates every point of a grid with `resolution` values per free parameter.
///
/// Dependence measures use all hidden nodes.
pub fn grid_scan(space: &SearchSpace, resolution: usize) -> Result<Vec<GridRow>> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be at least 1".into()));
    }
    let start = space.start_point();
    let axes: Vec<Vec<f64>> = space
        .params
        .iter()
        .zip(&start)
        .map(|(p, &s)| {
            if !p.is_free() || resolution == 1 {
                vec![if p.is_free() { s } else { p.lower }]
            } else {
                (0..resolution).map(|i| p.lower + p.range() * i as f64 / (resolution - 1) as f64).collect()
            }
        })
        .collect();
    let total = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len())).unwrap_or(usize::MAX);
    if total > MAX_GRID_POINTS {
        return Err(Error::InvalidArgument(format!("grid has {total} points, limit is {MAX_GRID_POINTS}")));
    }
    let rows = (0..total)
        .into_par_iter()
        .map(|mut k| {
            // Last parameter varies fastest.
            let mut point = vec![0.0; axes.len()];
            for d in (0..axes.len()).rev() {
                point[d] = axes[d][k % axes[d].len()];
                k /= axes[d].len();
            }
            grid_row(space, point)
        })
        .collect();
    Ok(rows)
}

fn grid_row(space: &SearchSpace, point: Vec<f64>) -> GridRow {
    let eval = || -> Result<(f64, f64, f64, f64)> {
        let model = build_model(space.apply(&point)?)?;
        let x = model_chsh(&model)?.x_bi;
        let (md, od, pd) = dependence(&model)?;
        Ok((x, md, od, pd))
    };
    match eval() {
        Ok((x_bi, md, od, pd)) => GridRow { point, x_bi, md, od, pd, error: None },
        Err(e) => {
            GridRow { point, x_bi: f64::NAN, md: f64::NAN, od: f64::NAN, pd: f64::NAN, error: Some(e.to_string()) }
        }
    }
}

fn dependence(model: &BoltzmannModel) -> Result<(f64, f64, f64)> {
    let lambda = HiddenSubset::all(model)?;
    let table = LambdaTable::from_model(model, &lambda)?;
    let r = crate::independence::independence_report_table(&table, &lambda)?;
    Ok((r.md, r.od, r.pd))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementResult {
    pub placement: GridPlacement,
    /// Grid rows of node ids, top row first.
    pub layout: Vec<Vec<String>>,
    pub x_bi: f64,
}

/// Every left-right symmetric placement of `1, 2, a, b` on a grid.
///
/// Outcome 1 and analyzer a sit in the left half; 2 and b are their mirror images.
pub fn symmetric_placements(rows: usize, cols: usize) -> Vec<GridPlacement> {
    let left: Vec<(usize, usize)> = (0..rows).flat_map(|r| (0..cols / 2).map(move |c| (r, c))).collect();
    let mut out = Vec::new();
    for &o in &left {
        for &a in &left {
            if a == o {
                continue;
            }
            let mirror = |s: (usize, usize)| (s.0, cols - 1 - s.1);
            out.push(GridPlacement {
                rows,
                cols,
                outcome1: o,
                outcome2: mirror(o),
                analyzer_a: a,
                analyzer_b: mirror(a),
            });
        }
    }
    out
}

/// CHSH value of each symmetric placement, best first (ties keep enumeration order).
pub fn role_placement_search(
    rows: usize,
    cols: usize,
    build: impl Fn(&GridPlacement) -> Result<LatticeSpec> + Sync,
) -> Result<Vec<PlacementResult>> {
    let mut results = symmetric_placements(rows, cols)
        .into_par_iter()
        .map(|placement| {
            let x_bi = model_chsh(&build_model(build(&placement)?)?)?.x_bi;
            Ok(PlacementResult { placement, layout: placement.labels(), x_bi })
        })
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|x, y| y.x_bi.total_cmp(&x.x_bi));
    Ok(results)
}

/// On-disk search definition (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    /// `builtin:<name>` or a path to a lattice file, relative to the config file.
    pub lattice: String,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub objective: Objective,
    /// Tie mirror-image parameters of the built-in ladder-shaped lattices
    /// instead of listing `parameter` entries.
    #[serde(default)]
    pub ladder_symmetric: bool,
    #[serde(default, rename = "parameter")]
    pub parameters: Vec<Parameter>,
}

fn default_budget() -> usize {
    2000
}

fn default_restarts() -> usize {
    4
}

impl SearchConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn space(&self, base_dir: &std::path::Path) -> Result<SearchSpace> {
        let base = builtin::resolve(&self.lattice, base_dir)?;
        if self.ladder_symmetric {
            if !self.parameters.is_empty() {
                return Err(Error::InvalidArgument("use either ladder_symmetric or parameter entries".into()));
            }
            SearchSpace::symmetric(base, |id| builtin::mirror_label(id).map(str::to_string), self.objective)
        } else {
            SearchSpace::new(base, self.parameters.clone(), self.objective)
        }
    }
}
