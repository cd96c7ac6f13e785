//! Brute-force reference evaluator shared by the integration tests. It is
//! written from the model definition only and shares no code with the crate.

#![allow(dead_code)]

use lqr_topology::wsn::Point;
use lqr_topology::Scenario;

pub struct OracleMetrics {
    pub radii: Vec<f64>,
    pub links: Vec<(usize, usize)>,
    pub total_power: f64,
    pub violations: usize,
    pub connectivity_ratio: f64,
    pub active: usize,
}

fn dist(a: &Point<f64>, b: &Point<f64>) -> f64 {
    ((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)).sqrt()
}

pub fn oracle_metrics(scenario: &Scenario, bits: &[bool]) -> OracleMetrics {
    let p = scenario.positions();
    let n = p.len();
    let active: Vec<usize> = (0..n).filter(|&i| bits[i]).collect();

    let mut radii = vec![0.0; n];
    for &i in &active {
        let nearest = active
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| dist(&p[i], &p[j]))
            .fold(f64::INFINITY, f64::min);
        radii[i] = if nearest.is_finite() {
            nearest.min(scenario.r_max())
        } else {
            0.0
        };
    }

    let mut links = Vec::new();
    for (a, &i) in active.iter().enumerate() {
        for &j in &active[a + 1..] {
            let d = dist(&p[i], &p[j]);
            if d <= radii[i] && d <= radii[j] {
                links.push((i, j));
            }
        }
    }

    // flood fill from every unvisited active node
    let mut seen = vec![false; n];
    let mut largest = 0;
    for &start in &active {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut size = 0;
        while let Some(u) = stack.pop() {
            size += 1;
            for &(a, b) in &links {
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        largest = largest.max(size);
    }

    let gamma = scenario.path_loss_exponent();
    OracleMetrics {
        total_power: active.iter().map(|&i| radii[i].powf(gamma)).sum(),
        violations: active
            .iter()
            .filter(|&&i| radii[i] > scenario.r_t())
            .count(),
        connectivity_ratio: if active.len() <= 1 {
            1.0
        } else {
            largest as f64 / active.len() as f64
        },
        active: active.len(),
        radii,
        links,
    }
}

/// Weighted fitness with the default weights 0.5 / 0.3 / 0.2.
pub fn oracle_fitness(scenario: &Scenario, bits: &[bool]) -> f64 {
    let m = oracle_metrics(scenario, bits);
    let n = scenario.len() as f64;
    let p_ref = n * scenario.r_max().powf(scenario.path_loss_exponent());
    let c = m.connectivity_ratio.clamp(0.0, 1.0);
    let pw = (1.0 - m.total_power / p_ref).clamp(0.0, 1.0);
    let v = if m.active == 0 {
        1.0
    } else {
        (1.0 - m.violations as f64 / m.active as f64).clamp(0.0, 1.0)
    };
    0.5 * c + 0.3 * pw + 0.2 * v
}

pub fn bits_of(mask: u64, n: usize) -> Vec<bool> {
    // most significant bit is node 0
    (0..n).map(|i| mask >> (n - 1 - i) & 1 == 1).collect()
}

pub fn benchmark_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/benchmark16.json")
}
