//! Small hand-built instances used throughout tests, docs and the CLI.

use crate::model::{Agent, Category, CategoryId, Instance};
use crate::scalar::Scalar;

fn agent<S: Scalar>(name: &str, priority: S, availability: &[u8], eligible: &[usize]) -> Agent<S> {
    Agent {
        name: name.to_string(),
        priority,
        availability: availability.iter().map(|&b| b != 0).collect(),
        eligible: eligible.iter().map(|&c| CategoryId(c)).collect(),
        group: None,
    }
}

fn category(name: &str, daily_quota: &[u32], overall_quota: Option<u32>) -> Category {
    Category {
        name: name.to_string(),
        daily_quota: daily_quota.to_vec(),
        overall_quota,
    }
}

/// Two agents with equal priority, two categories, two days, every quota 1.
///
/// `a1` is eligible for `{c1, c2}` and available on both days; `a2` is
/// eligible for `{c2}` only and available on day 1 only. Matching `a1` on day
/// 1 is a maximum-weight day-1 choice that ends with ratio `1 + discount`.
pub fn tight_model1<S: Scalar>(priority: S, discount: S) -> Instance<S> {
    Instance {
        agents: vec![
            agent("a1", priority.clone(), &[1, 1], &[0, 1]),
            agent("a2", priority, &[1, 0], &[1]),
        ],
        categories: vec![category("c1", &[1, 1], None), category("c2", &[1, 1], None)],
        daily_supply: vec![1, 1],
        discount,
    }
}

/// Three agents, two categories with overall quotas `(1, 2)`, supply `(1, 2)`.
///
/// `a1` is eligible for `{c1, c2}` on both days, `a2` for `{c1}` on day 2
/// only, `a3` for `{c2}` on day 1 only. With `alpha1 == alpha3 < alpha2` the
/// greedy run that gives `a1` category `c1` on day 1 reaches the Model 2
/// ratio `1 + discount + (alpha2 / alpha1) * discount`.
pub fn tight_general<S: Scalar>(alpha1: S, alpha2: S, alpha3: S, discount: S) -> Instance<S> {
    Instance {
        agents: vec![
            agent("a1", alpha1, &[1, 1], &[0, 1]),
            agent("a2", alpha2, &[0, 1], &[0]),
            agent("a3", alpha3, &[1, 0], &[1]),
        ],
        categories: vec![
            category("c1", &[1, 1], Some(1)),
            category("c2", &[1, 1], Some(2)),
        ],
        daily_supply: vec![1, 2],
        discount,
    }
}

/// `a1` (priority 1/2) available on days 1 and 2, `a2` (9/10) on day 1 only;
/// one category, unit quota and supply each day, discount 1/2.
pub fn two_agent_half_discount<S: Scalar>() -> Instance<S> {
    let half = S::one() / S::from_u32(2).unwrap();
    let nine_tenths = S::from_u32(9).unwrap() / S::from_u32(10).unwrap();
    Instance {
        agents: vec![
            agent("a1", half.clone(), &[1, 1], &[0]),
            agent("a2", nine_tenths, &[1, 0], &[0]),
        ],
        categories: vec![category("c1", &[1, 1], None)],
        daily_supply: vec![1, 1],
        discount: half,
    }
}
