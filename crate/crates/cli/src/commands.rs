use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rationd::analysis::{
    build_charging_report, check_non_wasteful, compute_metrics, ratio_of, test_strategyproofness, theorem_bound,
    AnalysisError, Ratio,
};
use rationd::data::{
    export_metrics, generate, read_allocation, read_generator_config, read_instance, write_allocation,
    write_instance_document, DataError, InstanceDocument,
};
use rationd::offline::{solve_exact_oracle, solve_offline_model1, solve_offline_tiebroken, OfflineError, TieBreakOrder};
use rationd::online::{run_online, run_online_traced, OnlineError, TieBreak};
use rationd::{check_allocation, total_utility, validate_instance, Allocation, ExactInstance};

use crate::args::{Algorithm, Common};
use crate::summary::{show, RunSummary};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag values that clap cannot catch.
    Usage(String),
    /// Unreadable or invalid input, or a solver refusing it.
    Input(String),
    /// A check ran and failed.
    Certificate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Certificate(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Certificate(m) => f.write_str(m),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OnlineError> for CliError {
    fn from(e: OnlineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<OfflineError> for CliError {
    fn from(e: OfflineError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn load(path: &Path) -> Result<ExactInstance, CliError> {
    let instance: ExactInstance = read_instance(path)?;
    let report = validate_instance(&instance);
    if !report.is_ok() {
        return Err(CliError::Input(format!("{}: invalid instance\n{report}", path.display())));
    }
    Ok(instance)
}

fn parse_tie_break(text: &str, instance: &ExactInstance) -> Result<TieBreak, CliError> {
    match text {
        "input" => Ok(TieBreak::InputOrder),
        "adversarial" => Ok(TieBreak::Adversarial),
        list => {
            let ids = list
                .split(',')
                .map(|name| {
                    instance
                        .agent_by_name(name.trim())
                        .ok_or_else(|| CliError::Usage(format!("--tie-break: unknown agent `{}`", name.trim())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let order = TieBreakOrder::from_sequence(ids, instance.agents.len())
                .map_err(|e| CliError::Usage(format!("--tie-break: {e}")))?;
            Ok(TieBreak::Order(order))
        }
    }
}

fn tie_break_label(text: &str) -> &str {
    match text {
        "input" | "adversarial" => text,
        _ => "explicit order",
    }
}

pub fn generate_cmd(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let mut config = read_generator_config(config)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let instance: ExactInstance = generate(&config)?;
    let agents = instance.agents.len();
    let days = instance.num_days();
    write_instance_document(
        &InstanceDocument {
            instance,
            generator: Some(config),
        },
        out,
    )?;
    println!("wrote {} ({agents} agents, {days} days)", out.display());
    Ok(())
}

fn run_algorithm(
    instance: &ExactInstance,
    algorithm: Algorithm,
    tie_break: &TieBreak,
    budget: u64,
) -> Result<Allocation, CliError> {
    if algorithm.model2() && !instance.has_overall_quotas() {
        return Err(CliError::Input(format!(
            "{} needs an overall quota on every category",
            algorithm.name()
        )));
    }
    Ok(match algorithm {
        Algorithm::Offline1 => match tie_break {
            TieBreak::Order(order) => solve_offline_tiebroken(instance, order)?,
            _ => solve_offline_model1(instance)?,
        },
        Algorithm::Online1 => run_online(instance, false, tie_break)?,
        Algorithm::Online2 => run_online(instance, true, tie_break)?,
        Algorithm::Oracle => solve_exact_oracle(instance, false, budget)?,
        Algorithm::Oracle2 => solve_exact_oracle(instance, true, budget)?,
    })
}

pub fn solve_cmd(
    path: &Path,
    algorithm: Algorithm,
    out: Option<&Path>,
    metrics: Option<&Path>,
    common: &Common,
) -> Result<(), CliError> {
    let instance = load(path)?;
    let tie_break = parse_tie_break(&common.tie_break, &instance)?;
    let start = Instant::now();
    let alloc = run_algorithm(&instance, algorithm, &tie_break, common.budget)?;
    let elapsed = start.elapsed();
    let solver = format!("{} (tie-break: {})", algorithm.name(), tie_break_label(&common.tie_break));
    println!("{}", RunSummary::new(&instance, solver, &alloc, elapsed, common.exact));
    if let Some(out) = out {
        write_allocation(&instance, &alloc, out)?;
    }
    if let Some(metrics) = metrics {
        export_metrics(&compute_metrics(&instance, &alloc, algorithm.model2())?, metrics)?;
    }
    Ok(())
}

pub fn compare_cmd(path: &Path, model2: bool, metrics_dir: &Path, common: &Common) -> Result<(), CliError> {
    let instance = load(path)?;
    let tie_break = parse_tie_break(&common.tie_break, &instance)?;
    let (online_alg, offline_alg) = if model2 {
        (Algorithm::Online2, Algorithm::Oracle2)
    } else {
        (Algorithm::Online1, Algorithm::Offline1)
    };

    let start = Instant::now();
    let online = run_algorithm(&instance, online_alg, &tie_break, common.budget)?;
    let online_time = start.elapsed();
    let start = Instant::now();
    let offline = run_algorithm(&instance, offline_alg, &TieBreak::InputOrder, common.budget)?;
    let offline_time = start.elapsed();

    let label = tie_break_label(&common.tie_break);
    println!(
        "{}\n",
        RunSummary::new(&instance, format!("{} (tie-break: {label})", online_alg.name()), &online, online_time, common.exact)
    );
    println!(
        "{}\n",
        RunSummary::new(&instance, offline_alg.name().to_string(), &offline, offline_time, common.exact)
    );

    let alg = total_utility(&instance, &online);
    let opt = total_utility(&instance, &offline);
    let ratio = ratio_of(&opt, &alg);
    let bound = theorem_bound(&instance, model2)?;
    let status = match ratio.finite() {
        Some(r) if *r == bound => "tight",
        Some(r) if *r < bound => "within bound",
        _ => "BOUND VIOLATED",
    };
    let ratio_text = match &ratio {
        Ratio::Finite(r) => show(r, common.exact),
        Ratio::Infinite => "inf".to_string(),
    };
    println!("ratio     OPT/ALG = {ratio_text}");
    println!("bound     {}", show(&bound, common.exact));
    println!("status    {status}");

    std::fs::create_dir_all(metrics_dir).map_err(|e| CliError::Input(format!("{}: {e}", metrics_dir.display())))?;
    for (name, alloc) in [("online_metrics.csv", &online), ("offline_metrics.csv", &offline)] {
        export_metrics(&compute_metrics(&instance, alloc, model2)?, &metrics_dir.join(name))?;
    }
    if ratio.within(&bound) {
        Ok(())
    } else {
        Err(CliError::Certificate(format!("OPT/ALG {ratio_text} exceeds the bound")))
    }
}

#[derive(Default)]
struct Report {
    failed: usize,
}

impl Report {
    fn pass(&mut self, what: &str) {
        println!("PASS  {what}");
    }

    fn fail(&mut self, what: &str) {
        self.failed += 1;
        println!("FAIL  {what}");
    }

    fn skip(&mut self, what: &str) {
        println!("SKIP  {what}");
    }

    fn check(&mut self, ok: bool, what: &str) {
        if ok {
            self.pass(what)
        } else {
            self.fail(what)
        }
    }
}

/// Deviation testing reruns the whole online algorithm per report; beyond
/// this many agent-days it is skipped.
const DEVIATION_BUDGET: usize = 20_000;

pub fn verify_cmd(
    path: &Path,
    model2: bool,
    allocation: Option<&Path>,
    sample_agents: usize,
    seed: u64,
    common: &Common,
) -> Result<(), CliError> {
    let instance = load(path)?;
    let tie_break = parse_tie_break(&common.tie_break, &instance)?;
    let mut rep = Report::default();
    rep.pass("instance valid");

    if let Some(file) = allocation {
        let supplied = read_allocation(&instance, file)?;
        let violations = check_allocation(&instance, &supplied, model2);
        if violations.is_ok() {
            rep.pass(&format!("supplied allocation feasible, utility {}", show(&total_utility(&instance, &supplied), common.exact)));
        } else {
            rep.fail(&format!("supplied allocation infeasible:\n{violations}"));
        }
    }

    let trace = run_online_traced(&instance, model2, &tie_break)?;
    let online = &trace.allocation;
    rep.check(check_allocation(&instance, online, model2).is_ok(), "online allocation feasible");
    match check_non_wasteful(&trace) {
        Ok(()) => rep.pass("non-wasteful: every day's matching has maximum size"),
        Err(day) => rep.fail(&format!("non-wasteful: day {day} matching is not maximum size")),
    }

    let offline = if model2 {
        match solve_exact_oracle(&instance, true, common.budget) {
            Ok(a) => Some(a),
            Err(OfflineError::BudgetExceeded { budget }) => {
                rep.skip(&format!("competitive bound and charging certificate: exact search exceeded {budget} nodes"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        Some(solve_offline_model1(&instance)?)
    };
    if let Some(offline) = offline {
        let ratio = ratio_of(&total_utility(&instance, &offline), &total_utility(&instance, online));
        let bound = theorem_bound(&instance, model2)?;
        rep.check(
            ratio.within(&bound),
            &format!("competitive bound: OPT/ALG {ratio} <= {}", show(&bound, common.exact)),
        );
        let cert = build_charging_report(&instance, online, &offline, model2)?;
        if cert.bound_certified {
            rep.pass(&format!("charging certificate: {} charges onto {} agents", cert.charges.len(), cert.per_target_load.len()));
        } else {
            rep.fail(&format!("charging certificate: {}", cert.witness().expect("failure recorded")));
        }
    }

    let size = instance.agents.len() * instance.num_days();
    if size > DEVIATION_BUDGET {
        rep.skip(&format!("deviations: {size} agent-days exceeds the budget of {DEVIATION_BUDGET}"));
    } else if instance.agents.is_empty() {
        rep.skip("deviations: no agents");
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let count = sample_agents.min(instance.agents.len());
        let mut agents: Vec<usize> = sample(&mut rng, instance.agents.len(), count).into_vec();
        agents.sort();
        let mut checked = 0;
        let mut improving = Vec::new();
        for k in agents {
            let dev = test_strategyproofness(&instance, rationd::AgentId(k), model2, &tie_break)?;
            checked += dev.deviations_checked;
            if !dev.is_truthful_best() {
                improving.push(instance.agents[k].name.clone());
            }
        }
        if improving.is_empty() {
            rep.pass(&format!("deviations: {count} agents, {checked} reports, none improving"));
        } else {
            rep.fail(&format!("deviations: improving reports for {}", improving.join(", ")));
        }
    }

    if rep.failed == 0 {
        Ok(())
    } else {
        Err(CliError::Certificate(format!("{} check(s) failed", rep.failed)))
    }
}
