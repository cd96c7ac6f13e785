//! Generational loop shared by the order-2 linked-register search (`qiga2`)
//! and the order-1 baseline (`qga`).
//!
//! One generation:
//! 1. observe the quantum population `K` times and evaluate every observation,
//! 2. pick an exemplar by roulette over the observed fitnesses,
//! 3. (`qiga2` only) take one distance-adjustment step for every register
//!    whose two nodes are both awake in the exemplar, then refresh the pair
//!    memories,
//! 4. re-evaluate the exemplar on the moved geometry and offer it to the
//!    best store,
//! 5. rotate every register toward the best-so-far bits.
//!
//! Randomness comes from counter-based streams keyed by
//! `(seed, purpose, register, generation)`, so a run is a pure function of
//! `(scenario, config)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lqr::{self, AdjustmentMode, LqrError, PairingPlan, STALL_LIMIT};
use crate::qcore::{basis_index, QcoreError, QuantumRegister};
use crate::rng::{CounterRng, Domain, StreamKey};
use crate::scalar::Scalar;
use crate::wsn::{ActivationVector, Point, Scenario, Topology, TopologyMetrics, WsnError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("expected algorithm {expected}, configuration selects {got}")]
    AlgorithmMismatch { expected: Algorithm, got: Algorithm },
    #[error("generation limit {0} already reached")]
    GenerationLimit(usize),
    #[error("roulette selection needs at least one candidate")]
    EmptySelection,
    #[error("generation {generation}: {source}")]
    Lqr { generation: usize, source: LqrError },
    #[error(transparent)]
    Wsn(#[from] WsnError),
    #[error(transparent)]
    Qcore(#[from] QcoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Order-1 quantum genetic algorithm, one qubit per node, static positions.
    Qga,
    /// Order-2 linked quantum registers with pair distance adjustment.
    Qiga2,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Qga => "qga",
            Algorithm::Qiga2 => "qiga2",
        }
    }

    pub fn register_order(&self) -> usize {
        match self {
            Algorithm::Qga => 1,
            Algorithm::Qiga2 => 2,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qga" => Ok(Algorithm::Qga),
            "qiga2" => Ok(Algorithm::Qiga2),
            other => Err(format!(
                "unknown algorithm `{other}` (expected qga or qiga2)"
            )),
        }
    }
}

/// Weights of the connectivity, power, and violation terms; they sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessWeights<T> {
    pub connectivity: T,
    pub power: T,
    pub violations: T,
}

impl<T: Scalar> Default for FitnessWeights<T> {
    fn default() -> Self {
        Self {
            connectivity: T::lit(0.5),
            power: T::lit(0.3),
            violations: T::lit(0.2),
        }
    }
}

impl<T: Scalar> FitnessWeights<T> {
    pub fn new(connectivity: T, power: T, violations: T) -> Result<Self, EngineError> {
        let w = Self {
            connectivity,
            power,
            violations,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let parts = [self.connectivity, self.power, self.violations];
        if parts.iter().any(|w| !w.is_finite() || *w < T::zero()) {
            return Err(EngineError::InvalidConfig(
                "fitness weights must be finite and nonnegative".into(),
            ));
        }
        let sum: T = parts.iter().copied().sum();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(4.0));
        if (sum - T::one()).abs() > tol {
            return Err(EngineError::InvalidConfig(format!(
                "fitness weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Thresholds that make a topology count as a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Feasibility<T> {
    pub min_connectivity_ratio: T,
    pub max_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig<T> {
    pub algorithm: Algorithm,
    pub generations_max: usize,
    pub observations_per_generation: usize,
    pub theta: T,
    pub delta: T,
    pub mode: AdjustmentMode,
    pub weights: FitnessWeights<T>,
    pub seed: u64,
    pub feasibility: Feasibility<T>,
}

impl<T: Scalar> EngineConfig<T> {
    /// Defaults: 200 generations, 10 observations per generation,
    /// rotation angle 0.01*pi, unit step, bidirectional adjustment.
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self {
            algorithm,
            generations_max: 200,
            observations_per_generation: 10,
            theta: T::PI() * T::lit(0.01),
            delta: T::one(),
            mode: AdjustmentMode::Bidirectional,
            weights: FitnessWeights::default(),
            seed,
            feasibility: Feasibility {
                min_connectivity_ratio: T::one(),
                max_violations: 0,
            },
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.weights.validate()?;
        if self.observations_per_generation == 0 {
            return Err(EngineError::InvalidConfig(
                "observations_per_generation must be at least 1".into(),
            ));
        }
        if !self.theta.is_finite() || self.theta < T::zero() {
            return Err(EngineError::InvalidConfig(
                "theta must be finite and >= 0".into(),
            ));
        }
        if !self.delta.is_finite() || self.delta <= T::zero() {
            return Err(EngineError::InvalidConfig(
                "delta must be finite and > 0".into(),
            ));
        }
        let m = self.feasibility.min_connectivity_ratio;
        if !(m >= T::zero() && m <= T::one()) {
            return Err(EngineError::InvalidConfig(
                "min_connectivity_ratio must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Quantum population `Q(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population<T> {
    /// One order-1 register per node; register `k` is node `k`.
    Qga(Vec<QuantumRegister<T>>),
    /// One order-2 register per linked pair; gene 0 is `node_a`, gene 1 is `node_b`.
    Qiga2(PairingPlan<T>),
}

impl<T: Scalar> Population<T> {
    pub fn register_count(&self) -> usize {
        match self {
            Population::Qga(regs) => regs.len(),
            Population::Qiga2(plan) => plan.len(),
        }
    }

    pub fn register(&self, k: usize) -> &QuantumRegister<T> {
        match self {
            Population::Qga(regs) => &regs[k],
            Population::Qiga2(plan) => &plan.pairs[k].register,
        }
    }

    fn register_mut(&mut self, k: usize) -> &mut QuantumRegister<T> {
        match self {
            Population::Qga(regs) => &mut regs[k],
            Population::Qiga2(plan) => &mut plan.pairs[k].register,
        }
    }

    /// Node indices carried by register `k`, most significant gene first.
    pub fn genes(&self, k: usize) -> Genes {
        match self {
            Population::Qga(_) => Genes::one(k),
            Population::Qiga2(plan) => Genes::two(plan.pairs[k].node_a, plan.pairs[k].node_b),
        }
    }

    /// Total binary genes across all registers.
    pub fn gene_count(&self) -> usize {
        (0..self.register_count())
            .map(|k| self.genes(k).len())
            .sum()
    }

    pub fn pairing_plan(&self) -> Option<&PairingPlan<T>> {
        match self {
            Population::Qga(_) => None,
            Population::Qiga2(plan) => Some(plan),
        }
    }
}

/// Node indices of one register's genes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Genes {
    nodes: [usize; 2],
    len: usize,
}

impl Genes {
    fn one(a: usize) -> Self {
        Self {
            nodes: [a, 0],
            len: 1,
        }
    }

    fn two(a: usize, b: usize) -> Self {
        Self {
            nodes: [a, b],
            len: 2,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.nodes[..self.len]
    }
}

/// An observed activation vector with its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub bits: ActivationVector,
    pub fitness: T,
    pub metrics: TopologyMetrics<T>,
}

/// Best-so-far solution `B(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestStore<T> {
    pub best_bits: ActivationVector,
    pub best_fitness: T,
    pub found_at_generation: usize,
}

/// Highest-fitness candidate that met the feasibility thresholds, with the
/// node positions it was evaluated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSolution<T> {
    pub bits: ActivationVector,
    pub fitness: T,
    pub metrics: TopologyMetrics<T>,
    pub generation: usize,
    pub positions: Vec<Point<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord<T> {
    pub generation: usize,
    pub best_fitness: T,
    pub exemplar_fitness: T,
    /// Metrics of the exemplar after this generation's moves.
    pub total_power: T,
    pub violations: usize,
    pub connectivity_ratio: T,
    /// Some candidate of this generation was feasible.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult<T> {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub history: Vec<GenerationRecord<T>>,
    pub first_feasible_generation: Option<usize>,
    pub best: Option<BestStore<T>>,
    pub best_feasible: Option<FeasibleSolution<T>>,
    pub final_positions: Vec<Point<T>>,
}

impl<T: Scalar> RunResult<T> {
    /// Generation at which the retained feasible solution was found.
    pub fn best_found_generation(&self) -> Option<usize> {
        self.best_feasible.as_ref().map(|s| s.generation)
    }

    pub fn final_total_power(&self) -> Option<T> {
        self.best_feasible.as_ref().map(|s| s.metrics.total_power)
    }

    pub fn final_violations(&self) -> Option<usize> {
        self.best_feasible.as_ref().map(|s| s.metrics.violations)
    }

    /// Activation and positions to draw: the retained feasible solution when
    /// there is one, otherwise the best-store bits on the final geometry.
    pub fn snapshot(&self) -> Option<(&ActivationVector, &[Point<T>])> {
        match (&self.best_feasible, &self.best) {
            (Some(f), _) => Some((&f.bits, &f.positions)),
            (None, Some(b)) => Some((&b.best_bits, &self.final_positions)),
            (None, None) => None,
        }
    }
}

/// Uniform registers for the configured algorithm.
pub fn init_population<T: Scalar>(
    scenario: &Scenario<T>,
    algorithm: Algorithm,
) -> Result<Population<T>, EngineError> {
    match algorithm {
        Algorithm::Qga => {
            let reg = QuantumRegister::uniform(1)?;
            Ok(Population::Qga(vec![reg; scenario.len()]))
        }
        Algorithm::Qiga2 => lqr::pair_nodes(scenario.positions())
            .map(Population::Qiga2)
            .map_err(|source| EngineError::Lqr {
                generation: 0,
                source,
            }),
    }
}

/// Observes every register once, in register order, and scatters the genes
/// onto their nodes.
pub fn observe_population<T: Scalar>(
    pop: &Population<T>,
    node_count: usize,
    rng: &mut CounterRng,
) -> ActivationVector {
    let mut act = ActivationVector::all(node_count, false);
    for k in 0..pop.register_count() {
        let outcome = pop.register(k).observe(rng);
        for (gene, &node) in pop.genes(k).as_slice().iter().enumerate() {
            act.set(node, outcome.bit(gene));
        }
    }
    act
}

fn unit_clamp<T: Scalar>(v: T) -> T {
    v.max(T::zero()).min(T::one())
}

/// Weighted score in `[0, 1]` from precomputed metrics. The power term is
/// normalized by the worst case `n * r_max^gamma`.
pub fn fitness_from_metrics<T: Scalar>(
    scenario: &Scenario<T>,
    metrics: &TopologyMetrics<T>,
    weights: &FitnessWeights<T>,
) -> T {
    let p_ref =
        T::from_count(scenario.len()) * scenario.r_max().powf(scenario.path_loss_exponent());
    let connectivity = unit_clamp(metrics.connectivity_ratio);
    let power = unit_clamp(T::one() - metrics.total_power / p_ref);
    let violations = if metrics.active_count == 0 {
        T::one()
    } else {
        unit_clamp(
            T::one() - T::from_count(metrics.violations) / T::from_count(metrics.active_count),
        )
    };
    unit_clamp(
        weights.connectivity * connectivity
            + weights.power * power
            + weights.violations * violations,
    )
}

pub fn fitness<T: Scalar>(
    scenario: &Scenario<T>,
    act: &ActivationVector,
    weights: &FitnessWeights<T>,
) -> Result<T, WsnError> {
    let topo = Topology::evaluate(scenario, act)?;
    Ok(fitness_from_metrics(scenario, &topo.metrics, weights))
}

pub fn evaluate<T: Scalar>(
    scenario: &Scenario<T>,
    act: ActivationVector,
    weights: &FitnessWeights<T>,
) -> Result<Observation<T>, WsnError> {
    let metrics = Topology::evaluate(scenario, &act)?.metrics;
    Ok(Observation {
        fitness: fitness_from_metrics(scenario, &metrics, weights),
        bits: act,
        metrics,
    })
}

pub fn is_feasible<T: Scalar>(metrics: &TopologyMetrics<T>, feasibility: &Feasibility<T>) -> bool {
    metrics.active_count >= 2
        && metrics.connectivity_ratio >= feasibility.min_connectivity_ratio
        && metrics.violations <= feasibility.max_violations
}

/// Fitness-proportionate sampling with replacement, one draw per pick.
/// Falls back to uniform picks when every fitness is zero.
pub fn roulette_select<T: Scalar>(
    fitnesses: &[T],
    count: usize,
    rng: &mut CounterRng,
) -> Result<Vec<usize>, EngineError> {
    if fitnesses.is_empty() {
        return Err(EngineError::EmptySelection);
    }
    let weights: Vec<T> = fitnesses
        .iter()
        .map(|f| {
            if f.is_finite() && *f > T::zero() {
                *f
            } else {
                T::zero()
            }
        })
        .collect();
    let total: T = weights.iter().copied().sum();
    let picks = (0..count)
        .map(|_| {
            let u: T = rng.next_unit();
            if total <= T::zero() {
                let i = (u * T::from_count(weights.len()))
                    .floor()
                    .to_usize()
                    .unwrap_or(0);
                return i.min(weights.len() - 1);
            }
            let spin = u * total;
            let mut cumulative = T::zero();
            let mut last = 0;
            for (i, w) in weights.iter().enumerate() {
                if *w <= T::zero() {
                    continue;
                }
                last = i;
                cumulative = cumulative + *w;
                if spin < cumulative {
                    return i;
                }
            }
            last
        })
        .collect();
    Ok(picks)
}

/// Rotates every register toward the genes of `best` it carries.
pub fn update_quantum<T: Scalar>(
    pop: &Population<T>,
    best: &ActivationVector,
    theta: T,
) -> Population<T> {
    let mut next = pop.clone();
    for k in 0..pop.register_count() {
        let target = basis_index(pop.genes(k).as_slice().iter().map(|&n| best.is_active(n)));
        let rotated = pop.register(k).rotate_toward_basis(target, theta);
        *next.register_mut(k) = rotated;
    }
    next
}

/// Mutable state of one run, advanced one generation at a time.
#[derive(Debug, Clone)]
pub struct RunState<T> {
    scenario: Scenario<T>,
    config: EngineConfig<T>,
    population: Population<T>,
    generation: usize,
    best: Option<BestStore<T>>,
    best_feasible: Option<FeasibleSolution<T>>,
    first_feasible_generation: Option<usize>,
    history: Vec<GenerationRecord<T>>,
    stalls: Vec<usize>,
}

impl<T: Scalar> RunState<T> {
    pub fn new(scenario: &Scenario<T>, config: &EngineConfig<T>) -> Result<Self, EngineError> {
        config.validate()?;
        let population = init_population(scenario, config.algorithm)?;
        Ok(Self {
            stalls: vec![0; population.register_count()],
            scenario: scenario.clone(),
            config: config.clone(),
            population,
            generation: 0,
            best: None,
            best_feasible: None,
            first_feasible_generation: None,
            history: Vec::with_capacity(config.generations_max),
        })
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn is_finished(&self) -> bool {
        self.generation >= self.config.generations_max
    }

    pub fn population(&self) -> &Population<T> {
        &self.population
    }

    pub fn scenario(&self) -> &Scenario<T> {
        &self.scenario
    }

    pub fn best(&self) -> Option<&BestStore<T>> {
        self.best.as_ref()
    }

    pub fn history(&self) -> &[GenerationRecord<T>] {
        &self.history
    }

    /// Replaces the population, e.g. to start from a prepared state.
    pub fn set_population(&mut self, population: Population<T>) {
        assert_eq!(
            population.register_count(),
            self.population.register_count()
        );
        self.population = population;
    }

    fn offer_feasible(&mut self, obs: &Observation<T>, generation: usize, positions: &[Point<T>]) {
        if !is_feasible(&obs.metrics, &self.config.feasibility) {
            return;
        }
        if self.first_feasible_generation.is_none() {
            self.first_feasible_generation = Some(generation);
        }
        if self
            .best_feasible
            .as_ref()
            .is_none_or(|b| obs.fitness > b.fitness)
        {
            self.best_feasible = Some(FeasibleSolution {
                bits: obs.bits.clone(),
                fitness: obs.fitness,
                metrics: obs.metrics,
                generation,
                positions: positions.to_vec(),
            });
        }
    }

    /// Advances one generation and appends its history record.
    pub fn step(&mut self) -> Result<(), EngineError> {
        if self.is_finished() {
            return Err(EngineError::GenerationLimit(self.config.generations_max));
        }
        let g = self.generation + 1;
        let seed = self.config.seed;
        let n = self.scenario.len();
        let gen_key = g as u64;

        let mut observe_rng = CounterRng::new(StreamKey::new(seed, Domain::Observe, 0, gen_key));
        let mut observations = Vec::with_capacity(self.config.observations_per_generation);
        for _ in 0..self.config.observations_per_generation {
            let act = observe_population(&self.population, n, &mut observe_rng);
            observations.push(evaluate(&self.scenario, act, &self.config.weights)?);
        }
        let mut feasible_now = observations
            .iter()
            .any(|o| is_feasible(&o.metrics, &self.config.feasibility));
        if feasible_now {
            let positions = self.scenario.positions().to_vec();
            for obs in &observations {
                self.offer_feasible(obs, g, &positions);
            }
        }

        let fitnesses: Vec<T> = observations.iter().map(|o| o.fitness).collect();
        let mut select_rng = CounterRng::new(StreamKey::new(seed, Domain::Select, 0, gen_key));
        let pick = roulette_select(&fitnesses, 1, &mut select_rng)?[0];
        let exemplar_bits = observations.swap_remove(pick).bits;

        if let Population::Qiga2(plan) = &mut self.population {
            let area = self.scenario.area();
            let dist_conn = self.scenario.dist_conn();
            for (k, pair) in plan.pairs.iter_mut().enumerate() {
                if exemplar_bits.is_active(pair.node_a) && exemplar_bits.is_active(pair.node_b) {
                    let mut move_rng = CounterRng::new(StreamKey::new(
                        seed,
                        Domain::Move,
                        pair.register_id as u64,
                        gen_key,
                    ));
                    let outcome = lqr::adjust_step(
                        pair,
                        self.scenario.positions_mut(),
                        area,
                        dist_conn,
                        self.config.delta,
                        self.config.mode,
                        &mut move_rng,
                    )
                    .map_err(|source| EngineError::Lqr {
                        generation: g,
                        source,
                    })?;
                    let gap = outcome.gap_before(dist_conn);
                    if gap > T::tolerance() && gap - outcome.gap_after(dist_conn) <= T::tolerance()
                    {
                        self.stalls[k] += 1;
                        if self.stalls[k] >= STALL_LIMIT {
                            return Err(EngineError::Lqr {
                                generation: g,
                                source: LqrError::Stall {
                                    register_id: pair.register_id,
                                    steps: self.stalls[k],
                                    gap: outcome.gap_after(dist_conn).to_f64_lossy(),
                                },
                            });
                        }
                    } else {
                        self.stalls[k] = 0;
                    }
                }
                lqr::update_memory(pair, self.scenario.positions());
            }
        }

        let exemplar = evaluate(&self.scenario, exemplar_bits, &self.config.weights)?;
        if is_feasible(&exemplar.metrics, &self.config.feasibility) {
            feasible_now = true;
            let positions = self.scenario.positions().to_vec();
            self.offer_feasible(&exemplar, g, &positions);
        }
        if self
            .best
            .as_ref()
            .is_none_or(|b| exemplar.fitness > b.best_fitness)
        {
            self.best = Some(BestStore {
                best_bits: exemplar.bits.clone(),
                best_fitness: exemplar.fitness,
                found_at_generation: g,
            });
        }
        let best = self.best.as_ref().expect("best store filled above");
        self.population = update_quantum(&self.population, &best.best_bits, self.config.theta);

        self.history.push(GenerationRecord {
            generation: g,
            best_fitness: best.best_fitness,
            exemplar_fitness: exemplar.fitness,
            total_power: exemplar.metrics.total_power,
            violations: exemplar.metrics.violations,
            connectivity_ratio: exemplar.metrics.connectivity_ratio,
            feasible: feasible_now,
        });
        self.generation = g;
        Ok(())
    }

    pub fn into_result(self) -> RunResult<T> {
        RunResult {
            algorithm: self.config.algorithm,
            seed: self.config.seed,
            history: self.history,
            first_feasible_generation: self.first_feasible_generation,
            best: self.best,
            best_feasible: self.best_feasible,
            final_positions: self.scenario.positions().to_vec(),
        }
    }
}

/// Runs all `generations_max` generations. Runs keep going after the first
/// feasible generation so the best-found generation can also be reported.
pub fn run<T: Scalar>(
    scenario: &Scenario<T>,
    config: &EngineConfig<T>,
) -> Result<RunResult<T>, EngineError> {
    let mut state = RunState::new(scenario, config)?;
    while !state.is_finished() {
        state.step()?;
    }
    Ok(state.into_result())
}

/// [`run`] restricted to the order-1 baseline.
pub fn run_qga_baseline<T: Scalar>(
    scenario: &Scenario<T>,
    config: &EngineConfig<T>,
) -> Result<RunResult<T>, EngineError> {
    if config.algorithm != Algorithm::Qga {
        return Err(EngineError::AlgorithmMismatch {
            expected: Algorithm::Qga,
            got: config.algorithm,
        });
    }
    run(scenario, config)
}
