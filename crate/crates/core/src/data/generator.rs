use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{rational_text, DataError};
use crate::model::{Agent, Category, CategoryId, Instance};
use crate::scalar::{parse_rational, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub label: String,
    /// Relative share of the population.
    pub weight: f64,
    #[serde(with = "rational_text")]
    pub alpha: Rational,
}

/// Inclusive integer ranges, sampled uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyModel {
    /// Per hospital and day.
    pub daily_quota: (u32, u32),
    /// Per day; `None` makes supply equal to the day's total quota.
    #[serde(default)]
    pub daily_supply: Option<(u32, u32)>,
    /// Per hospital; `None` leaves categories without an overall quota.
    #[serde(default)]
    pub overall_quota: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub num_agents: usize,
    pub num_days: usize,
    pub num_hospitals: usize,
    /// Hospitals within this many links of an agent's home are eligible.
    pub cluster_radius_links: u32,
    /// Hospitals closer than this (unit square) are linked.
    pub link_distance: f64,
    pub availability_density: f64,
    pub groups: Vec<GroupSpec>,
    #[serde(with = "rational_text")]
    pub discount: Rational,
    pub supply: SupplyModel,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let group = |label: &str, weight: f64, alpha: &str| GroupSpec {
            label: label.to_string(),
            weight,
            alpha: parse_rational(alpha).expect("literal"),
        };
        GeneratorConfig {
            num_agents: 10_000,
            num_days: 30,
            num_hospitals: 24,
            cluster_radius_links: 1,
            link_distance: 0.25,
            availability_density: 0.5,
            groups: vec![
                group("18-45", 0.6, "0.96"),
                group("45-60", 0.25, "0.97"),
                group("60+", 0.15, "0.99"),
            ],
            discount: parse_rational("0.95").expect("literal"),
            supply: SupplyModel {
                daily_quota: (5, 15),
                daily_supply: None,
                overall_quota: None,
            },
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    /// Every problem found, empty when usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if self.num_days == 0 {
            out.push("num_days must be positive".to_string());
        }
        if self.num_hospitals == 0 {
            out.push("num_hospitals must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.availability_density) {
            out.push(format!("availability_density {} outside [0, 1]", self.availability_density));
        }
        if self.link_distance.is_nan() || self.link_distance < 0.0 {
            out.push("link_distance must be non-negative".to_string());
        }
        if self.groups.is_empty() {
            out.push("at least one group is required".to_string());
        }
        for g in &self.groups {
            if !(g.weight > 0.0 && g.weight.is_finite()) {
                out.push(format!("group `{}` weight must be positive", g.label));
            }
            if g.alpha <= zero || g.alpha >= one {
                out.push(format!("group `{}` alpha must lie in (0, 1)", g.label));
            }
        }
        if self.discount <= zero || self.discount >= one {
            out.push("discount must lie in (0, 1)".to_string());
        }
        let ranges = [
            ("supply.daily_quota", Some(self.supply.daily_quota)),
            ("supply.daily_supply", self.supply.daily_supply),
            ("supply.overall_quota", self.supply.overall_quota),
        ];
        for (name, range) in ranges {
            if let Some((lo, hi)) = range {
                if lo > hi {
                    out.push(format!("{name} range is empty ({lo} > {hi})"));
                }
            }
        }
        out
    }
}

/// Reads a JSON generator config.
pub fn read_generator_config(path: &Path) -> Result<GeneratorConfig, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Hospitals within `radius` links of each hospital, sorted.
fn clusters(points: &[(f64, f64)], link_distance: f64, radius: u32) -> Vec<Vec<usize>> {
    let n = points.len();
    let adjacent = |i: usize, j: usize| {
        let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
        i != j && (dx * dx + dy * dy).sqrt() <= link_distance
    };
    (0..n)
        .map(|h| {
            let mut hops = vec![u32::MAX; n];
            hops[h] = 0;
            let mut queue = VecDeque::from([h]);
            while let Some(u) = queue.pop_front() {
                if hops[u] == radius {
                    continue;
                }
                for v in 0..n {
                    if hops[v] == u32::MAX && adjacent(u, v) {
                        hops[v] = hops[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            (0..n).filter(|&v| hops[v] != u32::MAX).collect()
        })
        .collect()
}

/// Deterministic in `config` (including its seed).
pub fn generate<S: Scalar>(config: &GeneratorConfig) -> Result<Instance<S>, DataError> {
    let problems = config.problems();
    if !problems.is_empty() {
        return Err(DataError::Config(problems));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let days = config.num_days;

    let points: Vec<(f64, f64)> = (0..config.num_hospitals).map(|_| (rng.gen(), rng.gen())).collect();
    let clusters = clusters(&points, config.link_distance, config.cluster_radius_links);

    let mut categories = Vec::with_capacity(config.num_hospitals);
    for h in 0..config.num_hospitals {
        let (lo, hi) = config.supply.daily_quota;
        let daily_quota: Vec<u32> = (0..days).map(|_| rng.gen_range(lo..=hi)).collect();
        let overall_quota = config.supply.overall_quota.map(|(lo, hi)| rng.gen_range(lo..=hi));
        categories.push(Category {
            name: format!("h{}", h + 1),
            daily_quota,
            overall_quota,
        });
    }
    let daily_supply: Vec<u32> = (0..days)
        .map(|j| match config.supply.daily_supply {
            Some((lo, hi)) => rng.gen_range(lo..=hi),
            None => categories.iter().map(|c| c.daily_quota[j]).sum(),
        })
        .collect();

    let weights = WeightedIndex::new(config.groups.iter().map(|g| g.weight)).map_err(|e| DataError::Config(vec![e.to_string()]))?;
    let alphas: Vec<S> = config.groups.iter().map(|g| S::from_exact(&g.alpha)).collect();
    let mut agents = Vec::with_capacity(config.num_agents);
    for k in 0..config.num_agents {
        let home = rng.gen_range(0..config.num_hospitals);
        let group = weights.sample(&mut rng);
        let availability = (0..days).map(|_| rng.gen_bool(config.availability_density)).collect();
        agents.push(Agent {
            name: format!("a{}", k + 1),
            priority: alphas[group].clone(),
            availability,
            eligible: clusters[home].iter().map(|&h| CategoryId(h)).collect(),
            group: Some(config.groups[group].label.clone()),
        });
    }
    Ok(Instance {
        agents,
        categories,
        daily_supply,
        discount: S::from_exact(&config.discount),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::files::{instance_from_str, instance_to_string, InstanceDocument};
    use crate::model::validate_instance;

    fn small() -> GeneratorConfig {
        GeneratorConfig {
            num_agents: 300,
            num_days: 10,
            seed: 7,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn default_config_is_valid() {
        let inst: Instance<Rational> = generate(&GeneratorConfig::default()).unwrap();
        assert_eq!(inst.agents.len(), 10_000);
        assert_eq!(inst.num_days(), 30);
        assert_eq!(inst.categories.len(), 24);
        assert!(validate_instance(&inst).is_ok());
    }

    #[test]
    fn deterministic_per_seed() {
        let a: Instance<Rational> = generate(&small()).unwrap();
        let b: Instance<Rational> = generate(&small()).unwrap();
        let text = |i: &Instance<Rational>| {
            instance_to_string(&InstanceDocument {
                instance: i.clone(),
                generator: Some(small()),
            })
            .unwrap()
        };
        assert_eq!(text(&a), text(&b));
        let c: Instance<Rational> = generate(&GeneratorConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_density_means_nobody_available() {
        let inst: Instance<f64> = generate(&GeneratorConfig {
            availability_density: 0.0,
            ..small()
        })
        .unwrap();
        assert!(inst.agents.iter().all(|a| a.availability.iter().all(|&b| !b)));
    }

    #[test]
    fn density_within_three_standard_errors() {
        let p = 0.37;
        let inst: Instance<f64> = generate(&GeneratorConfig {
            num_agents: 4000,
            availability_density: p,
            ..small()
        })
        .unwrap();
        let trials = (4000 * 10) as f64;
        let hits = inst.agents.iter().flat_map(|a| &a.availability).filter(|&&b| b).count() as f64;
        let se = (p * (1.0 - p) / trials).sqrt();
        assert!((hits / trials - p).abs() <= 3.0 * se);
    }

    #[test]
    fn eligibility_contains_home_cluster() {
        let inst: Instance<f64> = generate(&small()).unwrap();
        assert!(inst.agents.iter().all(|a| !a.eligible.is_empty()));
        assert!(inst.agents.iter().all(|a| a.eligible.windows(2).all(|w| w[0] < w[1])));
    }

    #[test]
    fn radius_zero_gives_single_hospital() {
        let inst: Instance<f64> = generate(&GeneratorConfig {
            cluster_radius_links: 0,
            ..small()
        })
        .unwrap();
        assert!(inst.agents.iter().all(|a| a.eligible.len() == 1));
    }

    #[test]
    fn bad_config_lists_problems() {
        let cfg = GeneratorConfig {
            availability_density: 1.5,
            groups: vec![],
            ..small()
        };
        match generate::<f64>(&cfg) {
            Err(DataError::Config(p)) => assert_eq!(p.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shipped_config_parses() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/small_config.json");
        let cfg = read_generator_config(&path).unwrap();
        assert_eq!(cfg.num_agents, 200);
        assert_eq!(cfg.supply.overall_quota, Some((10, 30)));
        assert!(read_generator_config(Path::new("/no/such/config.json")).is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = GeneratorConfig {
            supply: SupplyModel {
                daily_quota: (1, 3),
                daily_supply: Some((2, 9)),
                overall_quota: Some((10, 20)),
            },
            ..small()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<GeneratorConfig>(&text).unwrap(), cfg);
        let inst: Instance<Rational> = generate(&cfg).unwrap();
        let doc = InstanceDocument {
            instance: inst,
            generator: Some(cfg),
        };
        let back: InstanceDocument<Rational> = instance_from_str(&instance_to_string(&doc).unwrap()).unwrap();
        assert_eq!(back, doc);
    }
}
