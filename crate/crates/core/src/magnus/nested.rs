//! Time-labelled nested commutators of `H_I(t)`.

use std::sync::Arc;

use crate::discretize::InteractionOracle;
use crate::linalg::{commutator, ComplexMatrix};

/// Left-normed commutator `[H(s_q), […[H(s_1), H(t)]…]]`.
///
/// With `t = 0` this is `Comm_{q+1}(s_1, …, s_q) = ad_{B_{s_q}}⋯ad_{B_{s_1}}(B)`.
pub fn left_normed_comm(oracle: &InteractionOracle, s_list: &[f64], innermost_t: f64) -> ComplexMatrix {
    let mut acc = (*oracle.conjugate_at(innermost_t)).clone();
    for &s in s_list {
        acc = commutator(&oracle.conjugate_at(s), &acc);
    }
    acc
}

/// Arbitrary bracketing of time-labelled occurrences of `H_I`.
#[derive(Clone, Debug, PartialEq)]
pub enum CommutatorTree {
    Leaf(f64),
    Node(Box<CommutatorTree>, Box<CommutatorTree>),
}

impl CommutatorTree {
    pub fn node(left: CommutatorTree, right: CommutatorTree) -> Self {
        CommutatorTree::Node(Box::new(left), Box::new(right))
    }

    /// Number of leaves.
    pub fn grade(&self) -> usize {
        match self {
            CommutatorTree::Leaf(_) => 1,
            CommutatorTree::Node(l, r) => l.grade() + r.grade(),
        }
    }

    /// Number of brackets, `grade − 1`.
    pub fn layers(&self) -> usize {
        self.grade() - 1
    }

    pub fn labels(&self) -> Vec<f64> {
        match self {
            CommutatorTree::Leaf(t) => vec![*t],
            CommutatorTree::Node(l, r) => {
                let mut v = l.labels();
                v.extend(r.labels());
                v
            }
        }
    }

    /// `[H(s_q), […[H(s_1), H(t)]…]]` as a tree.
    pub fn left_normed(s_list: &[f64], innermost_t: f64) -> Self {
        s_list.iter().fold(CommutatorTree::Leaf(innermost_t), |acc, &s| {
            CommutatorTree::node(CommutatorTree::Leaf(s), acc)
        })
    }

    /// Every full binary bracketing of the given leaves, in order.
    pub fn bracketings(labels: &[f64]) -> Vec<CommutatorTree> {
        assert!(!labels.is_empty(), "a commutator tree needs at least one leaf");
        if labels.len() == 1 {
            return vec![CommutatorTree::Leaf(labels[0])];
        }
        let mut out = Vec::new();
        for split in 1..labels.len() {
            let lefts = Self::bracketings(&labels[..split]);
            let rights = Self::bracketings(&labels[split..]);
            for l in &lefts {
                for r in &rights {
                    out.push(CommutatorTree::node(l.clone(), r.clone()));
                }
            }
        }
        out
    }
}

/// Leaf `τ` evaluates to `H_I(τ)`; a node to the commutator of its children.
pub fn eval_commutator_tree(oracle: &InteractionOracle, tree: &CommutatorTree) -> Arc<ComplexMatrix> {
    match tree {
        CommutatorTree::Leaf(t) => oracle.conjugate_at(*t),
        CommutatorTree::Node(l, r) => {
            let left = eval_commutator_tree(oracle, l);
            let right = eval_commutator_tree(oracle, r);
            Arc::new(commutator(&left, &right))
        }
    }
}
