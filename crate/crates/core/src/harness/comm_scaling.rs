use std::sync::Arc;

use super::{run_cells, timed, Experiment, ResultRow, RunOptions};
use crate::band::CyclicBandMatrix;
use crate::discretize::{Frame, InteractionOracle, PotentialSpec};
use crate::error::{Error, Result};
use crate::linalg::{commutator, normal_spectral_norm, ComplexMatrix};
use crate::magnus::{eval_commutator_tree, CommutatorTree};

/// Which nested commutators enter the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Bracketing {
    /// `[B_{s_q}, […[B_{s_1}, B]…]]` over all label `q`-tuples.
    #[default]
    LeftNormed,
    /// Every bracketing of `q + 1` leaves drawn from the label set.
    AllTrees,
}

impl Bracketing {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "left-normed" | "leftnormed" => Ok(Bracketing::LeftNormed),
            "all-trees" | "alltrees" => Ok(Bracketing::AllTrees),
            other => Err(Error::InvalidInput(format!(
                "unknown bracketing '{other}' (expected left-normed or all-trees)"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Bracketing::LeftNormed => "left-normed",
            Bracketing::AllTrees => "all-trees",
        }
    }
}

pub const SUPPORTED_LAYERS: std::ops::RangeInclusive<usize> = 2..=4;

/// Default cap on the number of commutator trees evaluated per `(h, N)` cell
/// in [`Bracketing::AllTrees`] mode.
pub const DEFAULT_TREE_BUDGET: u64 = 50_000;

/// Commutator-scaling sweep over step sizes `h` and grid sizes `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommScalingConfig {
    /// Commutator layers `q`; the measured objects have grade `q + 1`.
    pub layers: usize,
    pub grid_sizes: Vec<usize>,
    pub h_values: Vec<f64>,
    /// Labels per `h` are `h, h/2, …, h/2^(labels_per_h − 1)`.
    pub labels_per_h: usize,
    pub potential: PotentialSpec,
    pub bracketing: Bracketing,
    pub frame: Frame,
    pub tree_budget: u64,
}

impl Default for CommScalingConfig {
    fn default() -> Self {
        Self {
            layers: 3,
            grid_sizes: vec![64, 128],
            h_values: (0..6).map(|k| 0.5f64.powi(k)).collect(),
            labels_per_h: 7,
            potential: PotentialSpec::Cos,
            bracketing: Bracketing::LeftNormed,
            frame: Frame::Eigen,
            tree_budget: DEFAULT_TREE_BUDGET,
        }
    }
}

impl CommScalingConfig {
    /// Grid sizes of the large-N sweep behind `--full`.
    pub fn full_grid_sizes() -> Vec<usize> {
        vec![256, 512, 1024, 2048]
    }

    pub fn labels(&self, h: f64) -> Vec<f64> {
        (0..self.labels_per_h)
            .map(|j| h / 2f64.powi(j as i32))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !SUPPORTED_LAYERS.contains(&self.layers) {
            return Err(Error::InvalidInput(format!(
                "layers {} out of supported range {}..={}",
                self.layers,
                SUPPORTED_LAYERS.start(),
                SUPPORTED_LAYERS.end()
            )));
        }
        if self.grid_sizes.is_empty() || self.h_values.is_empty() {
            return Err(Error::InvalidInput("need at least one grid size and one h".into()));
        }
        if let Some(&n) = self.grid_sizes.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidGrid(format!("N = {n} is below the minimum of 3")));
        }
        if let Some(h) = self.h_values.iter().find(|&&h| !(h > 0.0 && h <= 1.0)) {
            return Err(Error::InvalidInput(format!("h = {h} is outside (0, 1]")));
        }
        if self.labels_per_h < 1 {
            return Err(Error::InvalidInput("labels_per_h must be >= 1".into()));
        }
        if self.bracketing == Bracketing::AllTrees {
            let trees = self.trees_per_cell();
            if trees > self.tree_budget as f64 {
                return Err(Error::WorkBudget {
                    estimated: trees,
                    budget: self.tree_budget as f64,
                });
            }
        }
        Ok(())
    }

    /// Trees evaluated per cell in all-trees mode: `labels^(q+1) · Catalan(q)`.
    pub fn trees_per_cell(&self) -> f64 {
        let q = self.layers as i32;
        (self.labels_per_h as f64).powi(q + 1) * catalan(self.layers) as f64
    }

    /// Rough floating-point operation count of the whole sweep.
    pub fn estimated_flops(&self) -> f64 {
        let l = self.labels_per_h as f64;
        let (commutators, norms) = match self.bracketing {
            Bracketing::LeftNormed => ((1..=self.layers).map(|k| l.powi(k as i32)).sum(), l.powi(self.layers as i32)),
            Bracketing::AllTrees => (self.trees_per_cell() * self.layers as f64, self.trees_per_cell()),
        };
        self.grid_sizes
            .iter()
            .map(|&n| {
                let n3 = (n as f64).powi(3);
                // Two complex products per commutator, an eigenvalue solve per norm.
                (commutators * 16.0 * n3 + norms * 20.0 * n3) * self.h_values.len() as f64
            })
            .sum()
    }
}

fn catalan(n: usize) -> u64 {
    let mut c = 1u64;
    for k in 0..n as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Maximum spectral norm of the configured commutators for every `(h, N)`,
/// grouped by `N` and then by `h` in config order.
pub fn run_comm_scaling(cfg: &CommScalingConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let oracles: Vec<Arc<InteractionOracle>> = cfg
        .grid_sizes
        .iter()
        .map(|&n| InteractionOracle::schrodinger(n, &cfg.potential, cfg.frame).map(Arc::new))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> = (0..oracles.len())
        .flat_map(|i| cfg.h_values.iter().map(move |&h| (i, h)))
        .collect();
    run_cells(opts, cells, |(i, h)| {
        let oracle = &oracles[i];
        let labels = cfg.labels(h);
        let banded = match (cfg.bracketing, cfg.frame) {
            (Bracketing::LeftNormed, Frame::Eigen) => band_leaves(oracle, &labels),
            _ => None,
        };
        if banded.is_none() {
            oracle.prefetch(&labels);
        }
        let (value, seconds) = timed(opts, || {
            Ok(match (&banded, cfg.bracketing) {
                (Some((inner, leaves)), _) => max_left_normed_band(inner, leaves, cfg.layers),
                (None, Bracketing::LeftNormed) => max_left_normed(oracle, &labels, cfg.layers),
                (None, Bracketing::AllTrees) => max_all_trees(oracle, &labels, cfg.layers),
            })
        })?;
        let row = ResultRow {
            experiment: Experiment::CommScaling,
            order: cfg.layers,
            n: cfg.grid_sizes[i],
            x: h,
            value,
            seconds,
            unitarity_defect: None,
        };
        row.validate()?;
        Ok(row)
    })
}

/// Max over all label tuples of `‖[B_{s_q}, […[B_{s_1}, B]…]]‖`. Levels below
/// the last are stored and reused; the last level is only normed.
pub(crate) fn max_left_normed(oracle: &InteractionOracle, labels: &[f64], layers: usize) -> f64 {
    let leaves: Vec<Arc<ComplexMatrix>> = labels.iter().map(|&s| oracle.conjugate_at(s)).collect();
    let mut level = vec![Arc::new(oracle.potential())];
    for _ in 1..layers {
        level = level
            .iter()
            .flat_map(|inner| leaves.iter().map(move |leaf| Arc::new(commutator(leaf, inner))))
            .collect();
    }
    let mut best = 0.0f64;
    for inner in &level {
        for leaf in &leaves {
            best = best.max(normal_spectral_norm(&commutator(leaf, inner)));
        }
    }
    best
}

/// `B` and the label leaves as band matrices, when the coupling is sparse.
fn band_leaves(oracle: &InteractionOracle, labels: &[f64]) -> Option<(CyclicBandMatrix, Vec<CyclicBandMatrix>)> {
    let inner = oracle.eigen_band_at(0.0)?;
    let leaves = labels.iter().map(|&s| oracle.eigen_band_at(s)).collect::<Option<_>>()?;
    Some((inner, leaves))
}

/// [`max_left_normed`] on band matrices.
pub(crate) fn max_left_normed_band(inner: &CyclicBandMatrix, leaves: &[CyclicBandMatrix], layers: usize) -> f64 {
    let mut level = vec![inner.clone()];
    for _ in 1..layers {
        level = level
            .iter()
            .flat_map(|inner| leaves.iter().map(move |leaf| leaf.commutator(inner)))
            .collect();
    }
    // Exact norms are only taken while a candidate's cheap upper bound can
    // still beat the running maximum.
    let mut bounds: Vec<(f64, usize, usize)> = Vec::with_capacity(level.len() * leaves.len());
    for (i, inner) in level.iter().enumerate() {
        for (j, leaf) in leaves.iter().enumerate() {
            bounds.push((leaf.commutator(inner).norm_upper_bound(), i, j));
        }
    }
    bounds.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut best = 0.0f64;
    for (bound, i, j) in bounds {
        if bound * (1.0 + 1e-12) <= best {
            break;
        }
        best = best.max(leaves[j].commutator(&level[i]).normal_spectral_norm());
    }
    best
}

/// Max over every bracketing of every `(layers + 1)`-tuple of labels.
pub(crate) fn max_all_trees(oracle: &InteractionOracle, labels: &[f64], layers: usize) -> f64 {
    let grade = layers + 1;
    let total = labels.len().pow(grade as u32);
    let mut best = 0.0f64;
    let mut tuple = vec![0.0; grade];
    for index in 0..total {
        let mut rest = index;
        for slot in tuple.iter_mut().rev() {
            *slot = labels[rest % labels.len()];
            rest /= labels.len();
        }
        for tree in CommutatorTree::bracketings(&tuple) {
            best = best.max(normal_spectral_norm(&eval_commutator_tree(oracle, &tree)));
        }
    }
    best
}
