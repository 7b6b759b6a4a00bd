//! Seeded instance generators. All streams come from `ChaCha8Rng` seeded
//! with `seed_from_u64`, so a seed fixes the stream across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::applications::{
    AgentSpec, EffortLevel, NetworkEdge, NetworkProcurementSpec, PrincipalAgentSpec, ProjectWelfare,
};
use crate::general::{Factor, GeneralInstance, OutcomeWelfare, Report, WelfareTerm};
use crate::single_slot::SingleSlotBid;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSampler {
    pub seed: u64,
    pub min_bidders: usize,
    pub max_bidders: usize,
    pub value_range: (f64, f64),
}

impl InstanceSampler {
    /// 2 to 6 bidders, values uniform on `[0, 10)`, qualities uniform on `[0, 1)`.
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            min_bidders: 2,
            max_bidders: 6,
            value_range: (0.0, 10.0),
        }
    }

    pub fn sample(&self, n: usize) -> Vec<Vec<SingleSlotBid>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<SingleSlotBid> {
        let count = rng.gen_range(self.min_bidders..=self.max_bidders);
        let (lo, hi) = self.value_range;
        (0..count)
            .map(|_| SingleSlotBid {
                value: lo + (hi - lo) * rng.gen::<f64>(),
                quality: rng.gen::<f64>(),
            })
            .collect()
    }
}

pub fn sample_instances(sampler: &InstanceSampler, n: usize) -> Vec<Vec<SingleSlotBid>> {
    sampler.sample(n)
}

/// SHA-256 over the bit patterns of every sampled bid, as lowercase hex.
pub fn fingerprint(instances: &[Vec<SingleSlotBid>]) -> String {
    let mut hasher = Sha256::new();
    for bids in instances {
        hasher.update((bids.len() as u64).to_le_bytes());
        for b in bids {
            hasher.update(b.value.to_bits().to_le_bytes());
            hasher.update(b.quality.to_bits().to_le_bytes());
        }
    }
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Uniform draw from the probability simplex.
fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let sum: f64 = raw.iter().sum();
    let mut p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
    // Push the rounding error into the last coordinate.
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = (1.0 - head).max(0.0);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WelfareMode {
    Zero,
    /// Constants, products over distinct bidders and convex quadratics.
    Multilinear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralSampler {
    pub seed: u64,
    pub max_outcomes: usize,
    pub max_bidders: usize,
    pub max_states: usize,
    pub value_range: (f64, f64),
    pub welfare: WelfareMode,
}

impl GeneralSampler {
    pub fn new(seed: u64, welfare: WelfareMode) -> Self {
        Self {
            seed,
            max_outcomes: 4,
            max_bidders: 3,
            max_states: 3,
            value_range: (-5.0, 10.0),
            welfare,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<GeneralInstance> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> GeneralInstance {
        let n_out = rng.gen_range(1..=self.max_outcomes);
        let m = rng.gen_range(1..=self.max_bidders);
        let (lo, hi) = self.value_range;
        let outcomes: Vec<String> = (0..n_out).map(|o| format!("o{o}")).collect();
        let states: Vec<Vec<Vec<String>>> = (0..m)
            .map(|_| {
                (0..n_out)
                    .map(|_| {
                        let k = rng.gen_range(1..=self.max_states);
                        (0..k).map(|s| format!("s{s}")).collect()
                    })
                    .collect()
            })
            .collect();
        let reports = states
            .iter()
            .map(|per| {
                Report::new(
                    (0..n_out).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect(),
                    per.iter().map(|s| dirichlet(rng, s.len())).collect(),
                )
            })
            .collect();
        let welfare = (0..n_out)
            .map(|o| match self.welfare {
                WelfareMode::Zero => OutcomeWelfare::zero(),
                WelfareMode::Multilinear => {
                    let mut terms = vec![WelfareTerm::Constant {
                        value: rng.gen_range(-2.0..2.0),
                    }];
                    for _ in 0..rng.gen_range(1..=2) {
                        let mut factors = Vec::new();
                        for (b, per) in states.iter().enumerate() {
                            if rng.gen_bool(0.6) {
                                let state = rng.gen_range(0..per[o].len());
                                factors.push(Factor::shifted(b, state, rng.gen::<f64>()));
                            }
                        }
                        terms.push(WelfareTerm::Product {
                            coeff: rng.gen_range(-4.0..4.0),
                            factors,
                        });
                    }
                    if rng.gen_bool(0.5) {
                        let b = rng.gen_range(0..m);
                        terms.push(WelfareTerm::Quadratic {
                            bidder: b,
                            state: rng.gen_range(0..states[b][o].len()),
                            weight: rng.gen_range(0.0..3.0),
                            center: rng.gen::<f64>(),
                        });
                    }
                    OutcomeWelfare::Terms(terms)
                }
            })
            .collect();
        GeneralInstance::new(outcomes, states, reports, welfare).expect("sampler builds valid instances")
    }
}

/// Connected random graphs: a random spanning tree plus extra edges.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSampler {
    pub seed: u64,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub extra_edge_prob: f64,
}

impl NetworkSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            min_nodes: 2,
            max_nodes: 8,
            extra_edge_prob: 0.3,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<NetworkProcurementSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> NetworkProcurementSpec {
        let k = rng.gen_range(self.min_nodes..=self.max_nodes);
        let nodes: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
        let mut pairs = Vec::new();
        for v in 1..k {
            pairs.push((rng.gen_range(0..v), v));
        }
        for a in 0..k {
            for b in a + 1..k {
                if !pairs.contains(&(a, b)) && rng.gen_bool(self.extra_edge_prob) {
                    pairs.push((a, b));
                }
            }
        }
        let edges = pairs
            .into_iter()
            .enumerate()
            .map(|(e, (a, b))| NetworkEdge {
                endpoints: (nodes[a].clone(), nodes[b].clone()),
                owner: e,
                cost: 5.0 * rng.gen::<f64>(),
                failure_prob: 0.5 * rng.gen::<f64>(),
            })
            .collect();
        NetworkProcurementSpec {
            source: nodes[0].clone(),
            sink: nodes[k - 1].clone(),
            nodes,
            edges,
            failure_penalty: rng.gen_range(1.0..20.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAgentSampler {
    pub seed: u64,
    pub max_agents: usize,
    pub max_efforts: usize,
}

impl PrincipalAgentSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            max_agents: 3,
            max_efforts: 3,
        }
    }

    pub fn sample(&self, n: usize) -> Vec<PrincipalAgentSpec> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..n).map(|_| self.draw(&mut rng)).collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> PrincipalAgentSpec {
        let agents = (0..rng.gen_range(1..=self.max_agents))
            .map(|_| AgentSpec {
                efforts: (0..rng.gen_range(1..=self.max_efforts))
                    .map(|k| EffortLevel {
                        name: format!("e{k}"),
                        cost: 3.0 * rng.gen::<f64>(),
                        success_prob: rng.gen::<f64>(),
                    })
                    .collect(),
            })
            .collect();
        let value = 20.0 * rng.gen::<f64>();
        let project_welfare = if rng.gen_bool(0.5) {
            ProjectWelfare::AllSucceed { value }
        } else {
            ProjectWelfare::PerSuccess { value }
        };
        PrincipalAgentSpec {
            agents,
            project_welfare,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let s = InstanceSampler::new(7);
        assert_eq!(s.sample(20), s.sample(20));
        assert_ne!(s.sample(5), InstanceSampler::new(8).sample(5));
        assert!(s.sample(0).is_empty());
    }

    #[test]
    fn sampled_bids_respect_ranges() {
        for bids in InstanceSampler::new(1).sample(200) {
            assert!((2..=6).contains(&bids.len()));
            for b in bids {
                assert!((0.0..10.0).contains(&b.value));
                assert!((0.0..1.0).contains(&b.quality));
            }
        }
    }

    #[test]
    fn dirichlet_is_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..5 {
            let p = dirichlet(&mut rng, n);
            crate::simplex::validate("p", &p, n).unwrap();
        }
    }

    #[test]
    fn networks_are_connected() {
        for spec in NetworkSampler::new(5).sample(30) {
            crate::applications::build_network_instance(&spec).unwrap();
        }
    }
}
