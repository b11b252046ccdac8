//! Domain types shared by every module: capacitated directed graphs,
//! commodities, instances with feasibility witnesses, path assignments and
//! the two evaluation metrics (overflow sum and congestion).

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type ArcId = usize;
pub type CommodityId = usize;

/// A directed arc. The position of an arc in [`Graph::arcs`] is its
/// canonical index, used by file formats, LP columns and reports alike.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
}

/// Directed capacitated graph. Undirected inputs are represented as two
/// opposite arcs, each with its own capacity. Parallel arcs are allowed.
#[derive(Debug, Clone)]
pub struct Graph {
    node_count: usize,
    arcs: Vec<Arc>,
    capacities: Vec<f64>,
    outgoing: Vec<Vec<ArcId>>,
    incoming: Vec<Vec<ArcId>>,
}

impl Graph {
    /// Builds a graph, checking arc endpoints and capacity positivity.
    pub fn new(node_count: usize, arcs: Vec<(NodeId, NodeId)>, capacities: Vec<f64>) -> Result<Self> {
        if arcs.len() != capacities.len() {
            return Err(Error::InvalidInstance(format!(
                "{} arcs but {} capacities",
                arcs.len(),
                capacities.len()
            )));
        }
        for (i, &(tail, head)) in arcs.iter().enumerate() {
            if tail >= node_count || head >= node_count {
                return Err(Error::InvalidInstance(format!(
                    "arc {i} endpoints ({tail}, {head}) out of range for {node_count} nodes"
                )));
            }
        }
        for (i, &c) in capacities.iter().enumerate() {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidInstance(format!("arc {i} capacity {c} is not positive")));
            }
        }
        let mut outgoing = vec![Vec::new(); node_count];
        let mut incoming = vec![Vec::new(); node_count];
        for (i, &(tail, head)) in arcs.iter().enumerate() {
            outgoing[tail].push(i);
            incoming[head].push(i);
        }
        Ok(Self {
            node_count,
            arcs: arcs.into_iter().map(|(tail, head)| Arc { tail, head }).collect(),
            capacities,
            outgoing,
            incoming,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc(&self, id: ArcId) -> Arc {
        self.arcs[id]
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn capacity(&self, id: ArcId) -> f64 {
        self.capacities[id]
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn min_capacity(&self) -> f64 {
        self.capacities.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Arc ids leaving `node`, in increasing arc order.
    pub fn outgoing(&self, node: NodeId) -> &[ArcId] {
        &self.outgoing[node]
    }

    /// Arc ids entering `node`, in increasing arc order.
    pub fn incoming(&self, node: NodeId) -> &[ArcId] {
        &self.incoming[node]
    }

    /// Nodes reachable from `start` following arcs for which `usable`
    /// returns true. The result is a flag per node.
    pub fn reachable_from(&self, start: NodeId, usable: impl Fn(ArcId) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &a in &self.outgoing[v] {
                if usable(a) && !seen[self.arcs[a].head] {
                    seen[self.arcs[a].head] = true;
                    stack.push(self.arcs[a].head);
                }
            }
        }
        seen
    }

    /// Nodes from which `target` is reachable following usable arcs.
    pub fn reaching(&self, target: NodeId, usable: impl Fn(ArcId) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![target];
        seen[target] = true;
        while let Some(v) = stack.pop() {
            for &a in &self.incoming[v] {
                if usable(a) && !seen[self.arcs[a].tail] {
                    seen[self.arcs[a].tail] = true;
                    stack.push(self.arcs[a].tail);
                }
            }
        }
        seen
    }
}

/// A demand to route from `origin` to `destination` on a single path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Commodity {
    pub origin: NodeId,
    pub destination: NodeId,
    pub demand: f64,
}

/// A problem instance. Generated instances carry a `witness`: the paths
/// used while carving the demands out of the capacities. Routing every
/// commodity on its witness path never overflows any arc, so the optimal
/// overflow sum is zero and the optimal congestion is at most one.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub commodities: Vec<Commodity>,
    pub witness: Option<Vec<Vec<ArcId>>>,
}

impl Instance {
    pub fn commodity_count(&self) -> usize {
        self.commodities.len()
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    pub fn max_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).fold(0.0, f64::max)
    }

    /// The witness routing as an assignment, when present.
    pub fn witness_assignment(&self) -> Option<PathAssignment> {
        self.witness.as_ref().map(|paths| PathAssignment { paths: paths.clone() })
    }
}

/// One path per commodity: the unsplittable solution representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathAssignment {
    /// `paths[k]` is the arc-index sequence routing commodity `k`.
    pub paths: Vec<Vec<ArcId>>,
}

/// Evaluation of an assignment against an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Sum over arcs of the load exceeding the capacity.
    pub overflow_sum: f64,
    /// Largest load-to-capacity ratio over the arcs.
    pub congestion: f64,
    /// Total flow per arc.
    pub per_arc_load: Vec<f64>,
}

impl Metrics {
    /// Derives both metrics from raw arc loads.
    pub fn from_loads(per_arc_load: Vec<f64>, capacities: &[f64]) -> Self {
        let mut overflow_sum = 0.0;
        let mut congestion: f64 = 0.0;
        for (load, &cap) in per_arc_load.iter().zip(capacities) {
            overflow_sum += (load - cap).max(0.0);
            congestion = congestion.max(load / cap);
        }
        Metrics {
            overflow_sum,
            congestion,
            per_arc_load,
        }
    }
}

/// Checks that `path` is a simple `origin -> destination` walk in `graph`.
pub fn check_path(graph: &Graph, commodity: CommodityId, path: &[ArcId], origin: NodeId, destination: NodeId) -> Result<()> {
    let fail = |reason: String| Error::InvalidPath {
        commodity,
        reason,
    };
    if path.is_empty() {
        return Err(fail("empty path".into()));
    }
    let mut visited = vec![origin];
    let mut at = origin;
    for (pos, &a) in path.iter().enumerate() {
        if a >= graph.arc_count() {
            return Err(fail(format!("arc index {a} out of range")));
        }
        let arc = graph.arc(a);
        if arc.tail != at {
            return Err(fail(format!(
                "arc {a} at position {pos} starts at node {} but the path is at node {at}",
                arc.tail
            )));
        }
        at = arc.head;
        if visited.contains(&at) {
            return Err(fail(format!("node {at} visited twice")));
        }
        visited.push(at);
    }
    if at != destination {
        return Err(fail(format!("path ends at node {at}, expected {destination}")));
    }
    Ok(())
}

/// Evaluates an assignment: per-arc loads, overflow sum and congestion.
///
/// Pure function of its inputs; rejects assignments that do not cover every
/// commodity with a valid simple path.
pub fn evaluate(instance: &Instance, assignment: &PathAssignment) -> Result<Metrics> {
    if assignment.paths.len() != instance.commodities.len() {
        return Err(Error::InvalidInstance(format!(
            "assignment routes {} commodities, instance has {}",
            assignment.paths.len(),
            instance.commodities.len()
        )));
    }
    let graph = &instance.graph;
    let mut loads = vec![0.0; graph.arc_count()];
    for (k, (path, commodity)) in assignment.paths.iter().zip(&instance.commodities).enumerate() {
        check_path(graph, k, path, commodity.origin, commodity.destination)?;
        for &a in path {
            loads[a] += commodity.demand;
        }
    }
    Ok(Metrics::from_loads(loads, graph.capacities()))
}

/// A single problem found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    ArcOutOfRange { arc: ArcId },
    NonPositiveCapacity { arc: ArcId, capacity: f64 },
    NonPositiveDemand { commodity: CommodityId, demand: f64 },
    LoopCommodity { commodity: CommodityId },
    BadWitnessCount { expected: usize, found: usize },
    BadWitnessPath { commodity: CommodityId, reason: String },
    WitnessOverflow { arc: ArcId, excess: f64 },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::ArcOutOfRange { arc } => write!(f, "arc {arc} has an endpoint out of range"),
            Diagnostic::NonPositiveCapacity { arc, capacity } => {
                write!(f, "arc {arc} has non-positive capacity {capacity}")
            }
            Diagnostic::NonPositiveDemand { commodity, demand } => {
                write!(f, "commodity {commodity} has non-positive demand {demand}")
            }
            Diagnostic::LoopCommodity { commodity } => {
                write!(f, "commodity {commodity} has identical origin and destination")
            }
            Diagnostic::BadWitnessCount { expected, found } => {
                write!(f, "witness has {found} paths, expected {expected}")
            }
            Diagnostic::BadWitnessPath { commodity, reason } => {
                write!(f, "witness path for commodity {commodity} is invalid: {reason}")
            }
            Diagnostic::WitnessOverflow { arc, excess } => {
                write!(f, "witness routing exceeds capacity of arc {arc} by {excess}")
            }
        }
    }
}

/// Reports every violated invariant of an instance. An empty report means
/// the instance is well formed and its witness (if any) is feasible.
pub fn validate_instance(instance: &Instance) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let graph = &instance.graph;
    for (i, arc) in graph.arcs().iter().enumerate() {
        if arc.tail >= graph.node_count() || arc.head >= graph.node_count() {
            out.push(Diagnostic::ArcOutOfRange { arc: i });
        }
    }
    for (i, &c) in graph.capacities().iter().enumerate() {
        if !(c > 0.0) {
            out.push(Diagnostic::NonPositiveCapacity { arc: i, capacity: c });
        }
    }
    for (k, c) in instance.commodities.iter().enumerate() {
        if !(c.demand > 0.0) {
            out.push(Diagnostic::NonPositiveDemand {
                commodity: k,
                demand: c.demand,
            });
        }
        if c.origin == c.destination {
            out.push(Diagnostic::LoopCommodity { commodity: k });
        }
    }
    if let Some(witness) = &instance.witness {
        if witness.len() != instance.commodities.len() {
            out.push(Diagnostic::BadWitnessCount {
                expected: instance.commodities.len(),
                found: witness.len(),
            });
        } else {
            let mut loads = vec![0.0; graph.arc_count()];
            for (k, (path, commodity)) in witness.iter().zip(&instance.commodities).enumerate() {
                match check_path(graph, k, path, commodity.origin, commodity.destination) {
                    Ok(()) => {
                        for &a in path {
                            loads[a] += commodity.demand;
                        }
                    }
                    Err(Error::InvalidPath { reason, .. }) => {
                        out.push(Diagnostic::BadWitnessPath {
                            commodity: k,
                            reason,
                        });
                    }
                    Err(_) => unreachable!(),
                }
            }
            for (a, (&load, &cap)) in loads.iter().zip(graph.capacities()).enumerate() {
                if load > cap {
                    out.push(Diagnostic::WitnessOverflow {
                        arc: a,
                        excess: load - cap,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_instance(capacity: f64, demands: &[f64]) -> Instance {
        let graph = Graph::new(2, vec![(0, 1)], vec![capacity]).unwrap();
        let commodities = demands
            .iter()
            .map(|&d| Commodity {
                origin: 0,
                destination: 1,
                demand: d,
            })
            .collect();
        Instance {
            graph,
            commodities,
            witness: None,
        }
    }

    #[test]
    fn single_commodity_under_capacity() {
        let instance = two_node_instance(5.0, &[3.0]);
        let metrics = evaluate(&instance, &PathAssignment { paths: vec![vec![0]] }).unwrap();
        assert_eq!(metrics.overflow_sum, 0.0);
        assert!((metrics.congestion - 0.6).abs() < 1e-12);
    }

    #[test]
    fn two_commodities_overflowing() {
        let instance = two_node_instance(5.0, &[3.0, 4.0]);
        let metrics = evaluate(&instance, &PathAssignment { paths: vec![vec![0], vec![0]] }).unwrap();
        assert_eq!(metrics.overflow_sum, 2.0);
        assert!((metrics.congestion - 1.4).abs() < 1e-12);
    }

    #[test]
    fn broken_adjacency_names_commodity() {
        let graph = Graph::new(3, vec![(0, 1), (1, 2), (0, 2)], vec![1.0, 1.0, 1.0]).unwrap();
        let instance = Instance {
            graph,
            commodities: vec![
                Commodity {
                    origin: 0,
                    destination: 2,
                    demand: 1.0,
                },
                Commodity {
                    origin: 0,
                    destination: 2,
                    demand: 1.0,
                },
            ],
            witness: None,
        };
        let bad = PathAssignment {
            paths: vec![vec![0, 1], vec![1]],
        };
        match evaluate(&instance, &bad) {
            Err(Error::InvalidPath { commodity, .. }) => assert_eq!(commodity, 1),
            other => panic!("expected invalid path, got {other:?}"),
        }
    }

    #[test]
    fn wrong_endpoint_rejected() {
        let graph = Graph::new(3, vec![(0, 1), (1, 2)], vec![1.0, 1.0]).unwrap();
        let instance = Instance {
            graph,
            commodities: vec![Commodity {
                origin: 0,
                destination: 2,
                demand: 1.0,
            }],
            witness: None,
        };
        assert!(evaluate(&instance, &PathAssignment { paths: vec![vec![0]] }).is_err());
    }

    #[test]
    fn zero_demand_flagged() {
        let mut instance = two_node_instance(5.0, &[0.0]);
        instance.witness = None;
        let report = validate_instance(&instance);
        assert!(matches!(report[0], Diagnostic::NonPositiveDemand { commodity: 0, .. }));
    }

    #[test]
    fn overloaded_witness_flagged() {
        let mut instance = two_node_instance(5.0, &[3.0, 4.0]);
        instance.witness = Some(vec![vec![0], vec![0]]);
        let report = validate_instance(&instance);
        assert!(report
            .iter()
            .any(|d| matches!(d, Diagnostic::WitnessOverflow { arc: 0, excess } if (excess - 2.0).abs() < 1e-12)));
    }

    #[test]
    fn valid_instance_has_empty_report() {
        let mut instance = two_node_instance(5.0, &[3.0]);
        instance.witness = Some(vec![vec![0]]);
        assert!(validate_instance(&instance).is_empty());
    }

    #[test]
    fn graph_rejects_bad_endpoints_and_capacities() {
        assert!(Graph::new(2, vec![(0, 2)], vec![1.0]).is_err());
        assert!(Graph::new(2, vec![(0, 1)], vec![0.0]).is_err());
        assert!(Graph::new(2, vec![(0, 1)], vec![]).is_err());
    }
}
