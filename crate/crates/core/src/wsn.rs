//! Geometric sensor-network model: nodes in a rectangular area, activation
//! vectors, radius assignment, bidirectional links, and the topology metrics
//! (total power, threshold violations, largest-component connectivity).
//!
//! Radius rule: an active node transmits just far enough to reach its nearest
//! active neighbour, capped at `r_max`. A link exists only when both
//! endpoints reach each other; a distance exactly equal to a radius counts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WsnError {
    #[error("scenario has {0} nodes; an even count of at least 2 is required")]
    NodeCount(usize),
    #[error("threshold radius {r_t} exceeds maximum radius {r_max}")]
    ThresholdAboveMax { r_t: f64, r_max: f64 },
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("path-loss exponent must be at least 1, got {0}")]
    PathLossExponent(f64),
    #[error("node {index} at ({x}, {y}) lies outside the deployment area")]
    OutOfArea { index: usize, x: f64, y: f64 },
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("activation vector has {got} entries for {expected} nodes")]
    ActivationLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A node with its current transmission radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node<T> {
    pub x: T,
    pub y: T,
    pub radius: T,
}

impl<T: Scalar> Node<T> {
    pub fn position(&self) -> Point<T> {
        Point::new(self.x, self.y)
    }
}

/// Euclidean distance between two nodes.
pub fn distance<T: Scalar>(a: &Node<T>, b: &Node<T>) -> T {
    a.position().distance(&b.position())
}

/// Axis-aligned deployment region `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Area<T> {
    pub width: T,
    pub height: T,
}

impl<T: Scalar> Area<T> {
    pub fn contains(&self, p: &Point<T>) -> bool {
        p.x >= T::zero() && p.x <= self.width && p.y >= T::zero() && p.y <= self.height
    }

    pub fn clamp(&self, p: Point<T>) -> Point<T> {
        Point::new(
            p.x.max(T::zero()).min(self.width),
            p.y.max(T::zero()).min(self.height),
        )
    }

    pub fn diagonal(&self) -> T {
        self.width.hypot(self.height)
    }
}

/// Static description of a deployment. Positions are mutable so the linked
/// register search can move nodes; everything else is fixed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    positions: Vec<Point<T>>,
    area: Area<T>,
    r_max: T,
    r_t: T,
    dist_conn: T,
    path_loss_exponent: T,
}

fn positive<T: Scalar>(name: &'static str, value: T) -> Result<(), WsnError> {
    if value.is_finite() && value > T::zero() {
        Ok(())
    } else {
        Err(WsnError::NonPositive {
            name,
            value: value.to_f64_lossy(),
        })
    }
}

impl<T: Scalar> Scenario<T> {
    pub fn new(
        positions: Vec<Point<T>>,
        area: Area<T>,
        r_max: T,
        r_t: T,
        dist_conn: T,
        path_loss_exponent: T,
    ) -> Result<Self, WsnError> {
        let n = positions.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(WsnError::NodeCount(n));
        }
        positive("area width", area.width)?;
        positive("area height", area.height)?;
        positive("r_max", r_max)?;
        positive("r_t", r_t)?;
        positive("dist_conn", dist_conn)?;
        if r_t > r_max {
            return Err(WsnError::ThresholdAboveMax {
                r_t: r_t.to_f64_lossy(),
                r_max: r_max.to_f64_lossy(),
            });
        }
        if !path_loss_exponent.is_finite() || path_loss_exponent < T::one() {
            return Err(WsnError::PathLossExponent(
                path_loss_exponent.to_f64_lossy(),
            ));
        }
        if let Some((index, p)) = positions
            .iter()
            .enumerate()
            .find(|(_, p)| !area.contains(p))
        {
            return Err(WsnError::OutOfArea {
                index,
                x: p.x.to_f64_lossy(),
                y: p.y.to_f64_lossy(),
            });
        }
        Ok(Self {
            positions,
            area,
            r_max,
            r_t,
            dist_conn,
            path_loss_exponent,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point<T>] {
        &self.positions
    }

    /// Mutable positions. Callers keep nodes inside [`Scenario::area`].
    pub fn positions_mut(&mut self) -> &mut [Point<T>] {
        &mut self.positions
    }

    pub fn area(&self) -> Area<T> {
        self.area
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn r_t(&self) -> T {
        self.r_t
    }

    pub fn dist_conn(&self) -> T {
        self.dist_conn
    }

    pub fn path_loss_exponent(&self) -> T {
        self.path_loss_exponent
    }

    pub fn node_distance(&self, i: usize, j: usize) -> T {
        self.positions[i].distance(&self.positions[j])
    }

    /// Same scenario with all lengths multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self, WsnError> {
        Self::new(
            self.positions
                .iter()
                .map(|p| Point::new(p.x * factor, p.y * factor))
                .collect(),
            Area {
                width: self.area.width * factor,
                height: self.area.height * factor,
            },
            self.r_max * factor,
            self.r_t * factor,
            self.dist_conn * factor,
            self.path_loss_exponent,
        )
    }
}

/// One bit per node: `true` means the node is awake.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationVector {
    bits: Vec<bool>,
}

impl ActivationVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn all(n: usize, value: bool) -> Self {
        Self {
            bits: vec![value; n],
        }
    }

    /// Bit `i` of `mask` activates node `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self {
            bits: (0..n).map(|i| (mask >> i) & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn is_active(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn active_count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn active_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
    }
}

impl std::fmt::Display for ActivationVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Symmetric binary link matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    entries: Vec<bool>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            entries: vec![false; n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i * self.n + j]
    }

    fn link(&mut self, i: usize, j: usize) {
        self.entries[i * self.n + j] = true;
        self.entries[j * self.n + i] = true;
    }

    /// Links `(i, j)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n)
                .filter(move |&j| self.get(i, j))
                .map(move |j| (i, j))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n).all(|i| !self.get(i, i))
    }
}

/// Metrics of one decoded topology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologyMetrics<T> {
    pub total_power: T,
    pub violations: usize,
    pub connectivity_ratio: T,
    pub active_count: usize,
}

fn check_len<T>(scenario: &Scenario<T>, act: &ActivationVector) -> Result<(), WsnError> {
    if scenario.positions.len() == act.len() {
        Ok(())
    } else {
        Err(WsnError::ActivationLength {
            expected: scenario.positions.len(),
            got: act.len(),
        })
    }
}

/// Transmit power needed for `radius` under the path-loss model `radius^gamma`.
pub fn power_of_radius<T: Scalar>(radius: T, gamma: T) -> Result<T, WsnError> {
    if radius < T::zero() {
        return Err(WsnError::NegativeRadius(radius.to_f64_lossy()));
    }
    Ok(path_loss(radius, gamma))
}

fn path_loss<T: Scalar>(radius: T, gamma: T) -> T {
    if gamma.fract() == T::zero() && gamma <= T::lit(64.0) {
        radius.powi(gamma.to_i32().unwrap_or(2))
    } else {
        radius.powf(gamma)
    }
}

/// Radius of each node for activation `act`: distance to the nearest other
/// active node capped at `r_max`; zero for inactive or isolated-and-alone nodes.
pub fn assign_radii<T: Scalar>(scenario: &Scenario<T>, act: &ActivationVector) -> Vec<T> {
    assert_eq!(scenario.len(), act.len(), "activation length mismatch");
    let active: Vec<usize> = act.active_indices().collect();
    (0..scenario.len())
        .map(|i| {
            if !act.is_active(i) {
                return T::zero();
            }
            active
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| scenario.node_distance(i, j))
                .fold(None, |best: Option<T>, d| {
                    Some(best.map_or(d, |b| b.min(d)))
                })
                .map_or(T::zero(), |d| d.min(scenario.r_max))
        })
        .collect()
}

/// Nodes with their assigned radii.
pub fn nodes_with_radii<T: Scalar>(scenario: &Scenario<T>, radii: &[T]) -> Vec<Node<T>> {
    scenario
        .positions
        .iter()
        .zip(radii)
        .map(|(p, r)| Node {
            x: p.x,
            y: p.y,
            radius: *r,
        })
        .collect()
}

/// Bidirectional links between active nodes that cover each other.
pub fn build_adjacency<T: Scalar>(
    scenario: &Scenario<T>,
    act: &ActivationVector,
    radii: &[T],
) -> AdjacencyMatrix {
    let n = scenario.len();
    let mut adj = AdjacencyMatrix::empty(n);
    let active: Vec<usize> = act.active_indices().collect();
    for (k, &i) in active.iter().enumerate() {
        for &j in &active[k + 1..] {
            let d = scenario.node_distance(i, j);
            if d <= radii[i] && d <= radii[j] {
                adj.link(i, j);
            }
        }
    }
    adj
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }
}

/// Size of the largest connected component among active nodes.
pub fn largest_component(adj: &AdjacencyMatrix, act: &ActivationVector) -> usize {
    let mut uf = UnionFind::new(adj.len());
    for (i, j) in adj.edges() {
        uf.union(i, j);
    }
    let mut sizes = vec![0usize; adj.len()];
    for i in act.active_indices() {
        let root = uf.find(i);
        sizes[root] += 1;
    }
    sizes.into_iter().max().unwrap_or(0)
}

/// Largest active component over active count; 1 when at most one node is active.
pub fn connectivity_ratio<T: Scalar>(adj: &AdjacencyMatrix, act: &ActivationVector) -> T {
    let active = act.active_count();
    if active <= 1 {
        return T::one();
    }
    T::from_count(largest_component(adj, act)) / T::from_count(active)
}

/// Active nodes whose radius strictly exceeds `r_t`.
pub fn threshold_violations<T: Scalar>(
    scenario: &Scenario<T>,
    act: &ActivationVector,
    radii: &[T],
) -> usize {
    act.active_indices()
        .filter(|&i| radii[i] > scenario.r_t)
        .count()
}

/// Sum of `radius^gamma` over active nodes.
pub fn total_power<T: Scalar>(scenario: &Scenario<T>, act: &ActivationVector, radii: &[T]) -> T {
    act.active_indices()
        .map(|i| path_loss(radii[i], scenario.path_loss_exponent))
        .fold(T::zero(), |acc, p| acc + p)
}

/// Decoded topology for one activation vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology<T> {
    pub radii: Vec<T>,
    pub adjacency: AdjacencyMatrix,
    pub metrics: TopologyMetrics<T>,
}

impl<T: Scalar> Topology<T> {
    pub fn evaluate(scenario: &Scenario<T>, act: &ActivationVector) -> Result<Self, WsnError> {
        check_len(scenario, act)?;
        let radii = assign_radii(scenario, act);
        let adjacency = build_adjacency(scenario, act, &radii);
        let metrics = TopologyMetrics {
            total_power: total_power(scenario, act, &radii),
            violations: threshold_violations(scenario, act, &radii),
            connectivity_ratio: connectivity_ratio(&adjacency, act),
            active_count: act.active_count(),
        };
        Ok(Self {
            radii,
            adjacency,
            metrics,
        })
    }
}
