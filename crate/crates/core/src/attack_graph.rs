//! Multi-stage attack chains over AV2G communication paths.
//!
//! An [`AttackGraph`] is a validated DAG of compromise stages. Root nodes
//! carry a prior breach probability, edges carry conditional compromise
//! probabilities, and the probability of reaching a target stage is the
//! chain-rule product along each root-to-target path, aggregated across
//! parallel paths with a noisy-OR.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A compromise stage (e.g. charger breach, aggregator takeover).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackNode {
    /// Unique identifier used by edges and scenario files.
    pub id: String,
    /// Human-readable stage name.
    pub label: String,
    /// Probability the stage is compromised with no parent; only
    /// meaningful for root nodes, must still lie in [0, 1] everywhere.
    pub prior: f64,
}

impl AttackNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>, prior: f64) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            prior,
        }
    }
}

/// Directed edge `parent -> child` with P(child compromised | parent compromised).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackEdge {
    pub parent: String,
    pub child: String,
    pub cond_prob: f64,
}

impl AttackEdge {
    pub fn new(parent: impl Into<String>, child: impl Into<String>, cond_prob: f64) -> Self {
        Self {
            parent: parent.into(),
            child: child.into(),
            cond_prob,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AttackGraphError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge `{parent}` -> `{child}` references unknown node `{missing}`")]
    DanglingEdge {
        parent: String,
        child: String,
        missing: String,
    },
    #[error("duplicate edge `{parent}` -> `{child}`")]
    DuplicateEdge { parent: String, child: String },
    #[error("cycle detected through nodes {cycle:?}")]
    CycleDetected { cycle: Vec<String> },
    #[error("prior {value} of node `{node}` is outside [0, 1]")]
    InvalidPrior { node: String, value: f64 },
    #[error("conditional probability {value} of edge `{parent}` -> `{child}` is outside [0, 1]")]
    InvalidCondProb {
        parent: String,
        child: String,
        value: f64,
    },
    #[error("path is empty")]
    EmptyPath,
    #[error("path must start at a root node, `{0}` is not one")]
    NotARoot(String),
    #[error("path step `{parent}` -> `{child}` is not an edge of the graph")]
    MissingEdge { parent: String, child: String },
    #[error("unknown target node `{0}`")]
    UnknownTarget(String),
}

/// Result of [`AttackGraph::disruption_probability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disruption {
    /// Noisy-OR aggregate over all root-to-target path probabilities.
    pub probability: f64,
    /// Number of distinct root-to-target paths found.
    pub path_count: usize,
    /// Set when no root reaches the target; `probability` is then 0.
    pub unreachable: bool,
}

/// Validated acyclic attack graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct AttackGraph {
    nodes: Vec<AttackNode>,
    edges: Vec<AttackEdge>,
    index: HashMap<String, usize>,
    /// children[i] = (child index, cond_prob) pairs, in edge order.
    children: Vec<Vec<(usize, f64)>>,
    in_degree: Vec<usize>,
}

impl AttackGraph {
    /// Builds a graph, rejecting duplicate ids, dangling or duplicate edges,
    /// out-of-range probabilities and cycles.
    pub fn build(
        nodes: Vec<AttackNode>,
        edges: Vec<AttackEdge>,
    ) -> Result<Self, AttackGraphError> {
        if nodes.is_empty() {
            return Err(AttackGraphError::EmptyGraph);
        }
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if !(0.0..=1.0).contains(&node.prior) {
                return Err(AttackGraphError::InvalidPrior {
                    node: node.id.clone(),
                    value: node.prior,
                });
            }
            if node.id.is_empty() || index.insert(node.id.clone(), i).is_some() {
                return Err(AttackGraphError::DuplicateNode(node.id.clone()));
            }
        }

        let mut children = vec![Vec::new(); nodes.len()];
        let mut in_degree = vec![0usize; nodes.len()];
        let mut seen_pairs = HashMap::new();
        for edge in &edges {
            let parent = *index.get(&edge.parent).ok_or_else(|| {
                AttackGraphError::DanglingEdge {
                    parent: edge.parent.clone(),
                    child: edge.child.clone(),
                    missing: edge.parent.clone(),
                }
            })?;
            let child = *index.get(&edge.child).ok_or_else(|| {
                AttackGraphError::DanglingEdge {
                    parent: edge.parent.clone(),
                    child: edge.child.clone(),
                    missing: edge.child.clone(),
                }
            })?;
            if !(0.0..=1.0).contains(&edge.cond_prob) {
                return Err(AttackGraphError::InvalidCondProb {
                    parent: edge.parent.clone(),
                    child: edge.child.clone(),
                    value: edge.cond_prob,
                });
            }
            if parent == child {
                return Err(AttackGraphError::CycleDetected {
                    cycle: vec![edge.parent.clone(), edge.child.clone()],
                });
            }
            if seen_pairs.insert((parent, child), ()).is_some() {
                return Err(AttackGraphError::DuplicateEdge {
                    parent: edge.parent.clone(),
                    child: edge.child.clone(),
                });
            }
            children[parent].push((child, edge.cond_prob));
            in_degree[child] += 1;
        }

        let graph = Self {
            nodes,
            edges,
            index,
            children,
            in_degree,
        };
        if let Some(cycle) = graph.find_cycle() {
            return Err(AttackGraphError::CycleDetected { cycle });
        }
        Ok(graph)
    }

    pub fn nodes(&self) -> &[AttackNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[AttackEdge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&AttackNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Nodes with no incoming edge. Nonempty for every valid graph.
    pub fn roots(&self) -> Vec<&AttackNode> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.in_degree[*i] == 0)
            .map(|(_, n)| n)
            .collect()
    }

    fn is_root(&self, idx: usize) -> bool {
        self.in_degree[idx] == 0
    }

    fn cond_prob(&self, parent: usize, child: usize) -> Option<f64> {
        self.children[parent]
            .iter()
            .find(|(c, _)| *c == child)
            .map(|(_, p)| *p)
    }

    /// Chain-rule product along an explicit path: prior of the first node
    /// times the conditional probability of every consecutive edge.
    pub fn path_probability(&self, path: &[&str]) -> Result<f64, AttackGraphError> {
        let first = *path.first().ok_or(AttackGraphError::EmptyPath)?;
        let Some(&start) = self.index.get(first) else {
            return Err(AttackGraphError::NotARoot(first.to_string()));
        };
        if !self.is_root(start) {
            return Err(AttackGraphError::NotARoot(first.to_string()));
        }
        let mut prob = self.nodes[start].prior;
        let mut prev = start;
        for step in &path[1..] {
            let next = self.index.get(*step).copied();
            let cond = next.and_then(|n| self.cond_prob(prev, n));
            match (next, cond) {
                (Some(n), Some(p)) => {
                    prob *= p;
                    prev = n;
                }
                _ => {
                    return Err(AttackGraphError::MissingEdge {
                        parent: self.nodes[prev].id.clone(),
                        child: step.to_string(),
                    })
                }
            }
        }
        Ok(prob)
    }

    /// Probability that the target stage is compromised through any
    /// root-to-target path, combining path products with a noisy-OR
    /// `1 - prod(1 - p_path)`. A single path is returned exactly as its
    /// chain-rule product. An unreachable target yields probability 0 with
    /// the `unreachable` flag set rather than an error.
    pub fn disruption_probability(&self, target: &str) -> Result<Disruption, AttackGraphError> {
        let &target_idx = self
            .index
            .get(target)
            .ok_or_else(|| AttackGraphError::UnknownTarget(target.to_string()))?;

        let mut path_probs = Vec::new();
        for root in 0..self.nodes.len() {
            if self.is_root(root) {
                self.collect_paths(root, target_idx, self.nodes[root].prior, &mut path_probs);
            }
        }

        if path_probs.is_empty() {
            return Ok(Disruption {
                probability: 0.0,
                path_count: 0,
                unreachable: true,
            });
        }
        if path_probs.len() == 1 {
            return Ok(Disruption {
                probability: path_probs[0],
                path_count: 1,
                unreachable: false,
            });
        }
        // Sorting first makes the aggregate independent of enumeration order.
        path_probs.sort_by(f64::total_cmp);
        let survive: f64 = path_probs.iter().map(|p| 1.0 - p).product();
        Ok(Disruption {
            probability: 1.0 - survive,
            path_count: path_probs.len(),
            unreachable: false,
        })
    }

    fn collect_paths(&self, at: usize, target: usize, prob: f64, out: &mut Vec<f64>) {
        if at == target {
            out.push(prob);
            return;
        }
        for &(child, cond) in &self.children[at] {
            self.collect_paths(child, target, prob * cond, out);
        }
    }

    /// DFS three-color cycle search; returns the node ids along one cycle.
    fn find_cycle(&self) -> Option<Vec<String>> {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;
        let n = self.nodes.len();
        let mut color = vec![WHITE; n];
        let mut stack: Vec<usize> = Vec::new();

        // Iterative DFS keeping the gray path on an explicit stack.
        for start in 0..n {
            if color[start] != WHITE {
                continue;
            }
            let mut work: Vec<(usize, usize)> = vec![(start, 0)];
            while let Some(&mut (node, ref mut next)) = work.last_mut() {
                if *next == 0 {
                    color[node] = GRAY;
                    stack.push(node);
                }
                if let Some(&(child, _)) = self.children[node].get(*next) {
                    *next += 1;
                    match color[child] {
                        WHITE => work.push((child, 0)),
                        GRAY => {
                            let from = stack.iter().position(|&x| x == child).unwrap();
                            let mut cycle: Vec<String> = stack[from..]
                                .iter()
                                .map(|&i| self.nodes[i].id.clone())
                                .collect();
                            cycle.push(self.nodes[child].id.clone());
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    color[node] = BLACK;
                    stack.pop();
                    work.pop();
                }
            }
        }
        None
    }
}

/// The default four-stage AV2G compromise chain:
/// EV Charger (prior 0.07) -> Aggregator (0.04) -> SCADA (0.06)
/// -> Grid Disruption (0.08).
pub fn default_av2g_chain() -> AttackGraph {
    let nodes = vec![
        AttackNode::new("ev_charger", "EV Charger", 0.07),
        AttackNode::new("aggregator", "Aggregator", 0.0),
        AttackNode::new("scada", "SCADA", 0.0),
        AttackNode::new("grid_disruption", "Grid Disruption", 0.0),
    ];
    let edges = vec![
        AttackEdge::new("ev_charger", "aggregator", 0.04),
        AttackEdge::new("aggregator", "scada", 0.06),
        AttackEdge::new("scada", "grid_disruption", 0.08),
    ];
    AttackGraph::build(nodes, edges).expect("default chain is a valid DAG")
}
