use std::fmt;
use std::time::Duration;

use sha2::{Digest, Sha256};

use rationd::data::{instance_to_string, InstanceDocument};
use rationd::scalar::{format_fixed, render_rational};
use rationd::{total_utility, Allocation, ExactInstance, Rational};

/// Hex SHA-256 of the canonical instance document.
pub fn instance_digest(instance: &ExactInstance) -> String {
    let text = instance_to_string(&InstanceDocument {
        instance: instance.clone(),
        generator: None,
    })
    .expect("exact instances always serialize");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn show(value: &Rational, exact: bool) -> String {
    if exact {
        format!("{} ({})", format_fixed(value, 6), render_rational(value))
    } else {
        format_fixed(value, 6)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub digest: String,
    pub solver: String,
    pub utility: Rational,
    pub matched: usize,
    pub agents: usize,
    pub per_day: Vec<usize>,
    pub elapsed: Duration,
    pub exact: bool,
}

impl RunSummary {
    pub fn new(instance: &ExactInstance, solver: String, alloc: &Allocation, elapsed: Duration, exact: bool) -> Self {
        RunSummary {
            digest: instance_digest(instance),
            solver,
            utility: total_utility(instance, alloc),
            matched: alloc.matched_count(),
            agents: instance.agents.len(),
            per_day: alloc.per_day_counts(instance.num_days()),
            elapsed,
            exact,
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let days: Vec<String> = self.per_day.iter().map(usize::to_string).collect();
        writeln!(f, "instance  sha256:{}", self.digest)?;
        writeln!(f, "solver    {}", self.solver)?;
        writeln!(f, "utility   {}", show(&self.utility, self.exact))?;
        writeln!(f, "matched   {} of {}", self.matched, self.agents)?;
        writeln!(f, "per day   {}", days.join(" "))?;
        write!(f, "time      {:.3} s", self.elapsed.as_secs_f64())
    }
}
