//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Criterion 15 reruns 1 to 14 from scratch and
//! compares the emitted files byte for byte.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;

use selfmod::ecosystem::{
    aggressive_share, induced_game, run_cartel, run_sim, voldemort_contest, AdaptationMode, EcosystemConfig,
    RunSummary, SimRun, VoldemortConfig,
};
use selfmod::game::{brute_force_spe, replicator_run, solve_2x2, solve_spe, EquilibriumKind, NormalForm2x2};
use selfmod::output::{records_csv, scenario_csv, to_json, trajectory_csv, write_file};
use selfmod::scenarios::*;

const ORACLE_TREES: u64 = 1000;
const ORACLE_MAX_DECISIONS: usize = 12;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(10);
/// The commitment threshold is found by bisection on a tie-tolerant argmax.
const THRESHOLD_TOL: f64 = 1e-7;
const SEEDS: u64 = 20;
const CARTEL_SEEDS: u64 = 10;
const HIGH_P: f64 = 0.95;
const LOW_P_MAX: f64 = 0.5;
const RUN_TIME_LIMIT: Duration = Duration::from_secs(60);
const SCARCITY_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
const MIXED_TOL: f64 = 1e-9;
const REPLICATOR_TOL: f64 = 1e-3;
const REPLICATOR_MAX_STEPS: usize = 100_000;
const SHARE_TOL: f64 = 0.05;
const TWO_STRATEGY_SEEDS: u64 = 3;
const TWO_STRATEGY_BURN_IN: usize = 2000;
const CONTEST_FRACTION: f64 = 0.9;
const CONTEST_TIME_LIMIT: Duration = Duration::from_secs(1);

struct Outcome {
    pass: bool,
    detail: String,
    files: Vec<(String, String)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            detail: String::new(),
            files: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.pass = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what.into());
        }
    }

    fn note(&mut self, text: impl Into<String>) {
        if self.pass {
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&text.into());
        }
    }

    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn json(&mut self, name: &str, value: &impl Serialize) {
        self.file(name, to_json(value).expect("report serializes"));
    }

    fn scenario(&mut self, report: &ScenarioReport) {
        self.json(&format!("{}.json", report.scenario), report);
        self.file(
            &format!("{}.csv", report.scenario),
            scenario_csv(std::slice::from_ref(report)).expect("report serializes"),
        );
    }
}

/// Ecosystem runs shared between criteria, computed once per pass.
#[derive(Default)]
struct Runs {
    done: BTreeMap<&'static str, Vec<(SimRun, Duration)>>,
}

impl Runs {
    fn get(&mut self, label: &'static str, cfg: &EcosystemConfig, seeds: u64) -> &[(SimRun, Duration)] {
        self.done.entry(label).or_insert_with(|| {
            (0..seeds)
                .map(|seed| {
                    let t = Instant::now();
                    let cfg = EcosystemConfig { seed, ..cfg.clone() };
                    let run = match cfg.mode {
                        AdaptationMode::Cartel => run_cartel(&cfg),
                        _ => run_sim(&cfg),
                    }
                    .expect("ecosystem configuration is valid");
                    (run, t.elapsed())
                })
                .collect()
        })
    }
}

fn emit_runs(out: &mut Outcome, label: &str, runs: &[(SimRun, Duration)]) {
    let summaries: Vec<&RunSummary> = runs.iter().map(|(r, _)| &r.summary).collect();
    out.json(&format!("{label}.summaries.json"), &summaries);
    out.file(
        &format!("{label}.seed0.csv"),
        trajectory_csv(&runs[0].0.trajectory).expect("metrics serialize"),
    );
}

fn final_means(runs: &[(SimRun, Duration)]) -> Vec<f64> {
    runs.iter().map(|(r, _)| r.summary.final_mean_p.unwrap_or(f64::NAN)).collect()
}

fn fmt_range(xs: &[f64]) -> String {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("[{lo:.4}, {hi:.4}]")
}

fn c1_oracle(_: &mut Runs) -> Outcome {
    #[derive(Serialize)]
    struct Row {
        seed: u64,
        decisions: usize,
        profile: String,
        values: String,
    }
    let mut out = Outcome::new();
    let t = Instant::now();
    let mut mismatches = Vec::new();
    let mut rows = Vec::new();
    let mut largest = 0;
    for seed in 0..ORACLE_TREES {
        let (tree, us) = common::random_game(seed, ORACLE_MAX_DECISIONS);
        largest = largest.max(tree.decision_nodes().len());
        let fast = solve_spe(&tree, &us).expect("generated games solve");
        let slow = brute_force_spe(&tree, &us).expect("generated games are small");
        if fast.profile != slow.profile || fast.values != slow.values {
            mismatches.push(seed);
        }
        rows.push(Row {
            seed,
            decisions: tree.decision_nodes().len(),
            profile: serde_json::to_string(&fast.profile).expect("profiles serialize"),
            values: serde_json::to_string(&fast.values).expect("values serialize"),
        });
    }
    let elapsed = t.elapsed();
    out.check(mismatches.is_empty(), format!("mismatched seeds {mismatches:?}"));
    out.check(largest <= ORACLE_MAX_DECISIONS, format!("tree with {largest} decisions"));
    out.check(elapsed < ORACLE_TIME_LIMIT, format!("took {elapsed:?}"));
    out.note(format!("{ORACLE_TREES} trees, up to {largest} decisions, 0 mismatches, {elapsed:.2?}"));
    out.file("oracle.csv", records_csv(&rows).expect("rows serialize"));
    out
}

fn c2_promise_threat(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let p = run_promise(&PromiseConfig::default()).expect("defaults are valid");
    let threshold = p.metric("minimal_penalty");
    out.check(p.baseline.outcome("alice") == Some("Mean"), "promise baseline Alice is not Mean");
    out.check(PromiseConfig::default().penalty > threshold, "default penalty is not above the threshold");
    out.check((threshold - 3.0).abs() < THRESHOLD_TOL, format!("promise threshold {threshold}"));
    out.check(p.modified.outcome("alice") == Some("Nice"), "promise modified Alice is not Nice");
    let (before, after) = (p.baseline.value("agi_original"), p.modified.value("agi_original"));
    out.check(before == 4.0 && after == 7.0, format!("original-utility value {before} -> {after}"));
    let t = run_threat(&ThreatConfig::default()).expect("defaults are valid");
    out.check(t.baseline.outcome("alice") == Some("Mean"), "threat baseline Alice is not Mean");
    out.check(t.modified.outcome("alice") == Some("Nice"), "threat modified Alice is not Nice");
    out.check(
        t.modified.value("agi_original") > t.baseline.value("agi_original"),
        "threat commitment does not raise the original-utility value",
    );
    out.note(format!("promise Mean -> Nice, value {before} -> {after}, threshold {threshold:.9}"));
    out.scenario(&p);
    out.scenario(&t);
    out
}

fn c3_castle(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let r = run_castle(&CastleConfig::default()).expect("defaults are valid");
    let b = &r.baseline;
    out.check(
        b.outcome("Strong.message") == Some("ClaimStrong") && b.outcome("Strong.action") == Some("Leave"),
        "strong castle does not announce and get left alone",
    );
    out.check(
        b.outcome("Weak.message") == Some("Silent") && b.outcome("Weak.action") == Some("Destroy"),
        "weak castle is not silent and destroyed",
    );
    out.check(r.metric("honest_belief_weak_given_silent") == 1.0, "belief after silence is not Weak");
    out.check(
        r.modified.outcome("Strong.action") == Some("Raid") && r.modified.outcome("Weak.action") == Some("Raid"),
        "liar is not always raided",
    );
    let (h, l) = (r.metric("honest_value"), r.metric("liar_value"));
    out.check(h == -5.0 && l == -2.0, format!("values {h} vs {l}"));
    out.check(r.flag("lying_better"), "lying_better is false under defaults");
    let harsh = run_castle(&CastleConfig {
        defender_raid: -10.0,
        ..Default::default()
    })
    .expect("harsh raid is valid");
    out.check(!harsh.flag("lying_better"), "harsh raid does not flip lying_better");
    out.note(format!("honest {h}, liar {l}, flag flips at raid -10"));
    out.scenario(&r);
    out.json("castle_harsh.json", &harsh);
    out
}

fn c4_negotiation(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let cfg = NegotiationConfig::default();
    let committed = Negotiator::Committed { threshold: 80.0 };
    let one = solve_demand_game(&cfg, committed, Negotiator::Flexible).expect("valid negotiators");
    let two = solve_demand_game(&cfg, committed, committed).expect("valid negotiators");
    out.check(one.allocation == (80.0, 20.0), format!("committed vs flexible {:?}", one.allocation));
    out.check(two.allocation == (0.0, 0.0), format!("committed vs committed {:?}", two.allocation));
    out.note(format!("{:?} and {:?}", one.allocation, two.allocation));
    out.scenario(&run_negotiation(&cfg).expect("defaults are valid"));
    out
}

fn c5_blackmail(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let r = run_blackmail(&BlackmailConfig::default()).expect("defaults are valid");
    let path = |name: &str| r.regime(name).and_then(|g| g.outcome("path")).unwrap_or("missing").to_string();
    let victim = |name: &str| r.regime(name).map(|g| g.value("victim_original")).unwrap_or(f64::NAN);
    out.check(path("neither") == "Abstain", format!("neither: {}", path("neither")));
    out.check(
        path("blackmailer_committed").contains("Pay"),
        format!("blackmailer committed: {}", path("blackmailer_committed")),
    );
    out.check(
        path("victim_committed") == "Abstain" && r.flag("blackmail_deterred"),
        format!("victim committed: {} deterred={}", path("victim_committed"), r.flag("blackmail_deterred")),
    );
    out.check(path("both") != "missing", "both-committed regime not reported");
    out.check(
        victim("victim_committed") >= victim("neither") && victim("both") >= victim("blackmailer_committed"),
        "victim commitment lowers the victim's value",
    );
    out.note(format!(
        "neither {}, blackmailer {}, victim {}, both {}",
        path("neither"),
        path("blackmailer_committed"),
        path("victim_committed"),
        path("both")
    ));
    out.scenario(&r);
    out
}

fn c6_mugging(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let cfg = MuggingConfig {
        q: 1e-12,
        harm: 1e15,
        demand: 1.0,
        p_min: 1e-6,
        u_max: 1e6,
        ..Default::default()
    };
    let r = run_mugging(&cfg).expect("valid config");
    let decision = |name: &str| r.regime(name).and_then(|g| g.outcome("decision")).unwrap_or("missing").to_string();
    out.check(decision("unmodified") == "Pay", format!("unmodified {}", decision("unmodified")));
    out.check(decision("probability-floor") == "Refuse", format!("floor {}", decision("probability-floor")));
    out.check(decision("harm-cap") == "Refuse", format!("cap {}", decision("harm-cap")));
    out.note("Pay, Refuse, Refuse");
    out.scenario(&r);
    out
}

fn c7_hostile(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let r = run_hostile_benefit(&HostileConfig::default()).expect("defaults are valid");
    let (a, b) = (r.baseline.outcome("hostile_action"), r.modified.outcome("hostile_action"));
    out.check(a == Some("destroy_plain"), format!("undeclared adversary plays {a:?}"));
    out.check(b == Some("make_green"), format!("declared adversary plays {b:?}"));
    let (da, db) = (r.baseline.value("original_delta"), r.modified.value("original_delta"));
    out.check(da == -100.0 && db == 100.0, format!("original utility {da} -> {db}"));
    out.check(r.flag("hostile_helped"), "hostile_helped is false");
    out.note(format!("destroy_plain -> make_green, {da} -> {db}"));
    out.scenario(&r);
    out
}

fn c8_alliance(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let r = run_alliance_chain(&AllianceConfig::default()).expect("defaults are valid");
    let (loose, strict) = (&r.baseline, &r.modified);
    out.check(
        loose.outcome("second_modification") == Some("accepted"),
        "current-only guard rejects the second modification",
    );
    out.check(loose.value("final_paperclip_weight") < 0.0, "current-only paperclip weight is not negative");
    out.check(loose.value("expected_paperclips_u1") == 0.0, "current-only paperclips are not zero");
    out.check(
        strict.outcome("second_modification") == Some("rejected"),
        "full-chain guard accepts the second modification",
    );
    out.check(strict.value("expected_paperclips_u1") > 0.0, "full-chain paperclips are not positive");
    out.note(format!(
        "current-only weight {:.3}, paperclips 0; full-chain paperclips {}",
        loose.value("final_paperclip_weight"),
        strict.value("expected_paperclips_u1")
    ));
    out.scenario(&r);
    out
}

fn selection() -> EcosystemConfig {
    EcosystemConfig::default()
}

fn abundant(mode: AdaptationMode) -> EcosystemConfig {
    EcosystemConfig {
        maintenance: 0.0,
        mode,
        ..Default::default()
    }
}

fn c9_convergence(runs: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let cfg = selection();
    out.check(cfg.population == 100 && cfg.rounds == 10_000, "defaults are not N=100, T=10^4");
    let scarce = runs.get("selection", &cfg, SEEDS).to_vec();
    let means = final_means(&scarce);
    out.check(means.iter().all(|&m| m >= HIGH_P), format!("scarce means {}", fmt_range(&means)));
    let slowest = scarce.iter().map(|(_, d)| *d).max().unwrap_or_default();
    let mut detail = format!("scarce {}", fmt_range(&means));
    emit_runs(&mut out, "selection", &scarce);
    for (label, mode) in [
        ("abundant_selection", AdaptationMode::Selection),
        ("abundant_guarded", AdaptationMode::Guarded),
    ] {
        let set = runs.get(label, &abundant(mode), SEEDS).to_vec();
        let means = final_means(&set);
        out.check(means.iter().all(|&m| m <= LOW_P_MAX), format!("{label} means {}", fmt_range(&means)));
        let slow = set.iter().map(|(_, d)| *d).max().unwrap_or_default();
        out.check(slow < RUN_TIME_LIMIT, format!("{label} run took {slow:?}"));
        detail.push_str(&format!(", {label} {}", fmt_range(&means)));
        emit_runs(&mut out, label, &set);
    }
    out.check(slowest < RUN_TIME_LIMIT, format!("scarce run took {slowest:?}"));
    out.note(format!("{detail}, slowest scarce run {slowest:.2?}"));
    out
}

/// Spearman rank correlation with average ranks for ties.
fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&rx), mean(&ry));
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

fn c10_monotone(runs: &mut Runs) -> Outcome {
    const LABELS: [&str; 5] = ["scarcity_0", "scarcity_25", "scarcity_50", "scarcity_75", "scarcity_100"];
    let mut out = Outcome::new();
    let base = selection();
    let scale = base.income_scale();
    let mut averages = Vec::new();
    for (f, label) in SCARCITY_GRID.iter().zip(LABELS) {
        let cfg = EcosystemConfig {
            maintenance: f * scale,
            ..base.clone()
        };
        let set = runs.get(label, &cfg, SEEDS).to_vec();
        let means = final_means(&set);
        averages.push(means.iter().sum::<f64>() / means.len() as f64);
        out.json(
            &format!("{label}.summaries.json"),
            &set.iter().map(|(r, _)| &r.summary).collect::<Vec<_>>(),
        );
    }
    let rho = spearman(&SCARCITY_GRID, &averages);
    out.check(rho == 1.0, format!("rank correlation {rho}, averages {averages:?}"));
    let shown: Vec<String> = averages.iter().map(|a| format!("{a:.4}")).collect();
    out.note(format!("averages [{}], rank correlation {rho}", shown.join(", ")));
    out
}

fn c11_cartel(runs: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let gossip = EcosystemConfig {
        mode: AdaptationMode::Cartel,
        ..Default::default()
    };
    let mut silent = gossip.clone();
    silent.cartel.gossip = 0.0;
    let limit = gossip.cartel.cap + gossip.step;
    let held = runs.get("cartel_gossip", &gossip, CARTEL_SEEDS).to_vec();
    let broken = runs.get("cartel_silent", &silent, CARTEL_SEEDS).to_vec();
    let (mh, mb) = (final_means(&held), final_means(&broken));
    out.check(mh.iter().all(|&m| m <= limit), format!("gossip means {} above {limit}", fmt_range(&mh)));
    out.check(mb.iter().all(|&m| m >= HIGH_P), format!("silent means {}", fmt_range(&mb)));
    out.note(format!("gossip {} <= {limit}, silent {}", fmt_range(&mh), fmt_range(&mb)));
    emit_runs(&mut out, "cartel_gossip", &held);
    emit_runs(&mut out, "cartel_silent", &broken);
    out
}

fn two_strategy() -> EcosystemConfig {
    EcosystemConfig {
        population: 1000,
        rounds: 4000,
        pool: 2.0,
        cooperation_surplus: 0.0,
        conflict_cost: 2.0,
        maintenance: 1.5,
        strategy_values: vec![1.0, 0.0],
        step: 0.0,
        endowment: 50.0,
        reserve: 1e9,
        ..Default::default()
    }
}

fn c12_hawk_dove(runs: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let g = NormalForm2x2::symmetric(["hawk", "dove"], [[-1.0, 2.0], [0.0, 1.0]]);
    let mixed = solve_2x2(&g).into_iter().find(|e| e.kind == EquilibriumKind::Mixed);
    let share = mixed.as_ref().map(|e| e.row_p).unwrap_or(f64::NAN);
    out.check((share - 0.5).abs() <= MIXED_TOL, format!("mixed hawk share {share}"));
    let mut worst = (0.0f64, 0usize);
    for k in 1..100 {
        let x0 = k as f64 / 100.0;
        let (x, steps) = replicator_run([x0, 1.0 - x0], &g, 0.1, REPLICATOR_MAX_STEPS, 1e-12).expect("valid start");
        let gap = (x[0] - share).abs();
        out.check(gap <= REPLICATOR_TOL, format!("replicator from {x0} ends at {}", x[0]));
        worst = (worst.0.max(gap), worst.1.max(steps));
    }
    out.check(worst.1 <= REPLICATOR_MAX_STEPS, "replicator exceeded the step budget");
    let cfg = two_strategy();
    let induced = solve_2x2(&induced_game(&cfg, 1.0, 0.0))
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::Mixed)
        .map(|e| e.row_p)
        .unwrap_or(f64::NAN);
    let set = runs.get("two_strategy", &cfg, TWO_STRATEGY_SEEDS).to_vec();
    let mut shares = Vec::new();
    for (run, _) in &set {
        let tail = &run.trajectory[TWO_STRATEGY_BURN_IN.min(run.trajectory.len())..];
        let s = tail.iter().map(|m| aggressive_share(m.mean_p, 1.0, 0.0)).sum::<f64>() / tail.len().max(1) as f64;
        out.check(run.summary.extinct_at.is_none(), "two-strategy population died out");
        out.check((s - induced).abs() <= SHARE_TOL, format!("ecosystem share {s:.4} vs {induced:.4}"));
        shares.push(s);
    }
    out.note(format!(
        "mixed {share}, replicator gap <= {:.1e} in <= {} steps, ecosystem shares {} vs {induced:.4}",
        worst.0,
        worst.1,
        fmt_range(&shares)
    ));
    emit_runs(&mut out, "two_strategy", &set);
    out
}

fn c13_voldemort(_: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let t = Instant::now();
    let cfg = VoldemortConfig::default();
    let scarce = voldemort_contest(&cfg).expect("defaults are valid");
    let all = voldemort_contest(&VoldemortConfig {
        survivor_fraction: 1.0,
        ..cfg.clone()
    })
    .expect("valid config");
    let elapsed = t.elapsed();
    out.check(cfg.survivor_fraction == 0.7, "default survivor fraction is not 0.7");
    out.check(cfg.survival_value >= 10.0 * cfg.max_level, "survival value is not far above the top level");
    out.check(scarce.converged && all.converged, "contest did not converge");
    out.check(
        scarce.mean_level >= CONTEST_FRACTION * cfg.max_level,
        format!("mean level {}", scarce.mean_level),
    );
    out.check(all.levels.iter().all(|&s| s == 0.0), format!("full survival levels {:?}", all.levels));
    out.check(elapsed < CONTEST_TIME_LIMIT, format!("took {elapsed:?}"));
    out.note(format!("mean level {} of {}, all-survive zeros, {elapsed:.2?}", scarce.mean_level, cfg.max_level));
    out.json("voldemort.json", &scarce);
    out.json("voldemort_all.json", &all);
    out
}

fn c14_dispersion(runs: &mut Runs) -> Outcome {
    let mut out = Outcome::new();
    let scarce = runs.get("selection", &selection(), SEEDS).to_vec();
    for (run, _) in &scarce {
        let (first, last) = (&run.trajectory[0], run.trajectory.last().expect("round 0 is recorded"));
        out.check(
            last.round == run.summary.rounds_requested && last.dispersion < first.dispersion,
            format!("seed {}: dispersion {} -> {}", run.summary.seed, first.dispersion, last.dispersion),
        );
    }
    let drops: Vec<f64> = scarce
        .iter()
        .map(|(r, _)| r.trajectory.last().unwrap().dispersion - r.trajectory[0].dispersion)
        .collect();
    let guarded_scarce = EcosystemConfig {
        mode: AdaptationMode::Guarded,
        ..Default::default()
    };
    let mut floors = Vec::new();
    for (label, cfg) in [
        ("abundant_guarded", abundant(AdaptationMode::Guarded)),
        ("scarce_guarded", guarded_scarce),
    ] {
        let set = runs.get(label, &cfg, SEEDS).to_vec();
        for (run, _) in &set {
            out.check(
                run.summary.min_goal_weight > 0.0,
                format!("{label} seed {}: goal weight {}", run.summary.seed, run.summary.min_goal_weight),
            );
            floors.push(run.summary.min_goal_weight);
        }
        if label == "scarce_guarded" {
            emit_runs(&mut out, label, &set);
        }
    }
    out.note(format!("dispersion change {}, guarded goal weight {}", fmt_range(&drops), fmt_range(&floors)));
    out
}

type Criterion = fn(&mut Runs) -> Outcome;

const CRITERIA: [(&str, Criterion); 14] = [
    ("backward induction matches brute force", c1_oracle),
    ("promise and threat credibility", c2_promise_threat),
    ("castle regimes", c3_castle),
    ("negotiation commitments", c4_negotiation),
    ("blackmail matrix", c5_blackmail),
    ("mugging policies", c6_mugging),
    ("hostile benefit", c7_hostile),
    ("alliance chain guards", c8_alliance),
    ("ecosystem convergence", c9_convergence),
    ("monotone scarcity", c10_monotone),
    ("cartel cap", c11_cartel),
    ("hawk-dove consistency", c12_hawk_dove),
    ("mutilation contest", c13_voldemort),
    ("convergence metric and goal floor", c14_dispersion),
];

fn write_all(dir: &Path, outcomes: &[Outcome]) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    for (i, o) in outcomes.iter().enumerate() {
        for (name, contents) in &o.files {
            let path = dir.join(format!("c{:02}", i + 1)).join(name);
            write_file(&path, contents).expect("scratch directory is writable");
            files.push((format!("c{:02}/{name}", i + 1), std::fs::read(&path).expect("file was written")));
        }
    }
    files
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored.
    let list = std::env::args().any(|a| a == "--list");
    if list {
        for (i, (name, _)) in CRITERIA.iter().enumerate() {
            println!("criterion {:02} {name}: test", i + 1);
        }
        println!("criterion 15 determinism: test");
        return;
    }
    let mut runs = Runs::default();
    let mut outcomes = Vec::new();
    let mut failed = 0;
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let o = f(&mut runs);
        println!(
            "criterion {:02} {:<40} {} ({:.1?}) {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed(),
            o.detail
        );
        failed += usize::from(!o.pass);
        outcomes.push(o);
    }

    let t = Instant::now();
    let mut again = Runs::default();
    let second: Vec<Outcome> = CRITERIA.iter().map(|(_, f)| f(&mut again)).collect();
    let root = std::env::temp_dir().join(format!("selfmod-acceptance-{}", std::process::id()));
    let a = write_all(&root.join("first"), &outcomes);
    let b = write_all(&root.join("second"), &second);
    let _ = std::fs::remove_dir_all(&root);
    let differing: Vec<&str> = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let pass = a.len() == b.len() && !a.is_empty() && differing.is_empty();
    let bytes: usize = a.iter().map(|(_, c)| c.len()).sum();
    println!(
        "criterion 15 {:<40} {} ({:.1?}) {}",
        "determinism",
        if pass { "PASS" } else { "FAIL" },
        t.elapsed(),
        if pass {
            format!("{} files, {bytes} bytes identical across two full reruns", a.len())
        } else {
            format!("differing files {differing:?}")
        }
    );
    failed += usize::from(!pass);

    println!("acceptance: {} of 15 criteria passed", 15 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
