//! Linked quantum registers: node pairing, per-pair distance memory, and the
//! step-wise distance adjustment that pulls each pair toward the target
//! connection distance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::QuantumRegister;
use crate::rng::CounterRng;
use crate::scalar::Scalar;
use crate::wsn::{Area, Point};

/// Consecutive no-progress steps after which convergence is declared stuck.
pub const STALL_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LqrError {
    #[error("cannot pair {0} nodes; an even count of at least 2 is required")]
    NodeCount(usize),
    #[error("step size must be positive and finite, got {0}")]
    InvalidDelta(f64),
    #[error(
        "register {register_id}: no progress toward the connection distance for {steps} steps (gap {gap})"
    )]
    Stall {
        register_id: usize,
        steps: usize,
        gap: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustmentMode {
    /// One randomly chosen node of the pair moves.
    Unidirectional,
    /// Both nodes move by half a step in opposite senses.
    Bidirectional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mover {
    NodeA,
    NodeB,
    Both,
}

/// A 2-qubit register bound to two nodes, remembering their last distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkedRegister<T> {
    pub register_id: usize,
    pub node_a: usize,
    pub node_b: usize,
    pub register: QuantumRegister<T>,
    pub last_distance: T,
}

impl<T: Scalar> LinkedRegister<T> {
    pub fn distance(&self, positions: &[Point<T>]) -> T {
        positions[self.node_a].distance(&positions[self.node_b])
    }
}

/// Partition of all nodes into linked registers, fixed for a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingPlan<T> {
    pub pairs: Vec<LinkedRegister<T>>,
}

impl<T: Scalar> PairingPlan<T> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.pairs.len() * 2
    }

    /// `true` iff every index in `0..n` appears in exactly one pair.
    pub fn is_partition_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        for p in &self.pairs {
            for i in [p.node_a, p.node_b] {
                if i >= n || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Greedy nearest-neighbour matching: the lowest-index unpaired node takes its
/// nearest unpaired neighbour, ties going to the lower index.
pub fn pair_nodes<T: Scalar>(positions: &[Point<T>]) -> Result<PairingPlan<T>, LqrError> {
    let n = positions.len();
    if n < 2 || !n.is_multiple_of(2) {
        return Err(LqrError::NodeCount(n));
    }
    let mut paired = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    for i in 0..n {
        if paired[i] {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for j in (i + 1)..n {
            if paired[j] {
                continue;
            }
            let d = positions[i].distance(&positions[j]);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("even count leaves a partner");
        paired[i] = true;
        paired[j] = true;
        pairs.push(LinkedRegister {
            register_id: pairs.len(),
            node_a: i,
            node_b: j,
            register: QuantumRegister::uniform(2).expect("order 2 is supported"),
            last_distance: d,
        });
    }
    Ok(PairingPlan { pairs })
}

/// Which node(s) of a pair move. Unidirectional mode consumes one draw.
pub fn select_mover(mode: AdjustmentMode, rng: &mut CounterRng) -> Mover {
    match mode {
        AdjustmentMode::Bidirectional => Mover::Both,
        AdjustmentMode::Unidirectional => {
            if rng.next_bool() {
                Mover::NodeB
            } else {
                Mover::NodeA
            }
        }
    }
}

/// Distances before and after one adjustment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome<T> {
    pub before: T,
    pub after: T,
}

impl<T: Scalar> StepOutcome<T> {
    pub fn gap_before(&self, dist_conn: T) -> T {
        (self.before - dist_conn).abs()
    }

    pub fn gap_after(&self, dist_conn: T) -> T {
        (self.after - dist_conn).abs()
    }
}

/// Moves the pair so its distance changes by `min(delta, |d - dist_conn|)`
/// toward `dist_conn`. Moved nodes are clamped to `area`, which may shorten
/// the step. A coincident pair is split by displacing `node_b` along +x
/// (or -x when +x is blocked by the boundary).
#[allow(clippy::too_many_arguments)]
pub fn adjust_step<T: Scalar>(
    pair: &LinkedRegister<T>,
    positions: &mut [Point<T>],
    area: Area<T>,
    dist_conn: T,
    delta: T,
    mode: AdjustmentMode,
    rng: &mut CounterRng,
) -> Result<StepOutcome<T>, LqrError> {
    if !delta.is_finite() || delta <= T::zero() {
        return Err(LqrError::InvalidDelta(delta.to_f64_lossy()));
    }
    let mover = select_mover(mode, rng);
    let a = positions[pair.node_a];
    let b = positions[pair.node_b];
    let before = a.distance(&b);
    let gap = (before - dist_conn).abs();
    if gap <= T::tolerance() {
        return Ok(StepOutcome {
            before,
            after: before,
        });
    }
    let step = delta.min(gap);

    if before <= T::zero() {
        let pushed = Point::new(b.x + step, b.y);
        let target = if area.contains(&pushed) {
            pushed
        } else {
            area.clamp(Point::new(b.x - step, b.y))
        };
        positions[pair.node_b] = target;
        return Ok(StepOutcome {
            before,
            after: a.distance(&target),
        });
    }

    let new_distance = if before > dist_conn {
        before - step
    } else {
        before + step
    };
    let ux = (b.x - a.x) / before;
    let uy = (b.y - a.y) / before;
    let along = |origin: Point<T>, t: T| Point::new(origin.x + ux * t, origin.y + uy * t);
    match mover {
        Mover::NodeB => positions[pair.node_b] = area.clamp(along(a, new_distance)),
        Mover::NodeA => positions[pair.node_a] = area.clamp(along(b, -new_distance)),
        Mover::Both => {
            let two = T::lit(2.0);
            let mid = Point::new((a.x + b.x) / two, (a.y + b.y) / two);
            let half = new_distance / two;
            positions[pair.node_a] = area.clamp(along(mid, -half));
            positions[pair.node_b] = area.clamp(along(mid, half));
        }
    }
    Ok(StepOutcome {
        before,
        after: positions[pair.node_a].distance(&positions[pair.node_b]),
    })
}

/// Repeats [`adjust_step`] until the pair sits at `dist_conn` (within the
/// scalar tolerance). Returns the number of steps taken.
#[allow(clippy::too_many_arguments)]
pub fn converge_pair<T: Scalar>(
    pair: &LinkedRegister<T>,
    positions: &mut [Point<T>],
    area: Area<T>,
    dist_conn: T,
    delta: T,
    mode: AdjustmentMode,
    rng: &mut CounterRng,
) -> Result<usize, LqrError> {
    let mut steps = 0;
    let mut stalled = 0;
    loop {
        let d = pair.distance(positions);
        let gap = (d - dist_conn).abs();
        if gap <= T::tolerance() {
            return Ok(steps);
        }
        let outcome = adjust_step(pair, positions, area, dist_conn, delta, mode, rng)?;
        steps += 1;
        if outcome.gap_before(dist_conn) - outcome.gap_after(dist_conn) <= T::tolerance() {
            stalled += 1;
            if stalled >= STALL_LIMIT {
                return Err(LqrError::Stall {
                    register_id: pair.register_id,
                    steps,
                    gap: outcome.gap_after(dist_conn).to_f64_lossy(),
                });
            }
        } else {
            stalled = 0;
        }
    }
}

/// Stores the current pair distance as the register's memory.
pub fn update_memory<T: Scalar>(pair: &mut LinkedRegister<T>, positions: &[Point<T>]) {
    pair.last_distance = pair.distance(positions);
}
