//! Experiment CLI: every subcommand is deterministic given its seed and
//! writes machine-readable stats (plus optional JSONL transcripts).

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use vbqc::adversary::AdversaryStrategy;
use vbqc::fkproto::{
    assign_roles_constrained, build_dotted_complete, run_fk, GraphSpec, Pattern,
    PreparedQubit, Role,
};
use vbqc::gadget::{run_gadget, StateClass};
use vbqc::harness::instances::n6_fixed;
use vbqc::harness::transcript::{fk_views, gadget_views, write_line};
use vbqc::harness::{
    blindness_audit, estimate_acceptance, estimate_p_incorrect, loss_overhead,
    standard_attack_family, teleport_equivalence, teleport_sampled_check, AdversarySpec,
    CodeChoice, Estimate, ExperimentKind, RunConfig,
};
use vbqc::qsim::{Basis, MixedState, PureState};
use vbqc::RandomStream;

#[derive(Parser)]
#[command(name = "vbqc", about = "Verifiable blind quantum computing simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "pprime")]
    p_prime: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "nd")]
    n_d: Option<usize>,
    #[arg(long = "nt")]
    n_t: Option<usize>,
    /// Adversary name (`honest`, `single_x`, `z@0,3`, `xz_noise:0.02`, …) or
    /// a path to a JSON strategy file.
    #[arg(long)]
    adversary: Option<String>,
    /// `steane` or a path to a plain-text code file.
    #[arg(long)]
    code: Option<String>,
    /// Output directory for stats.json and transcripts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV export for sweep tables.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run preparation-gadget rounds and report class frequencies.
    Gadget(Common),
    /// Verify the code layer: exhaustive decoding plus a flip-rate sweep.
    Css(Common),
    /// Run the trap-verified graph computation with honest preparation.
    Fk(Common),
    /// Run the full composition (gadget collection + verified run).
    Compose {
        #[command(flatten)]
        common: Common,
        /// Per-transmission X/Z flip rate.
        #[arg(long)]
        noise: Option<f64>,
        /// Route the noise through the code's decode path.
        #[arg(long, default_value_t = false)]
        encoded: bool,
    },
    /// Measure Pr[accept ∧ incorrect] for a Pauli attack family.
    Verify(Common),
    /// Blindness audit: averaged-state distance and transcript tests.
    Blindness(Common),
    /// Preparation-vs-teleportation equivalence under a pair deviation.
    Teleport(Common),
    /// Loss overhead of the retried preparation.
    Loss {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.5)]
        ploss: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gadget(common) => gadget_cmd(&common),
        Command::Css(common) => css_cmd(&common),
        Command::Fk(common) => fk_cmd(&common),
        Command::Compose {
            common,
            noise,
            encoded,
        } => compose_cmd(&common, noise, encoded),
        Command::Verify(common) => verify_cmd(&common),
        Command::Blindness(common) => blindness_cmd(&common),
        Command::Teleport(common) => teleport_cmd(&common),
        Command::Loss { common, ploss } => loss_cmd(&common, ploss),
    }
}

/// Merge the config file (if any) with explicit flags; flags win.
fn build_config(common: &Common, kind: ExperimentKind, default_trials: u64) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<RunConfig>(&text)?
        }
        None => RunConfig {
            experiment: kind,
            n: 6,
            n_d: 3,
            n_t: 2,
            p: 0.45,
            p_prime: None,
            code: CodeChoice::Steane,
            adversary: AdversarySpec::Named("honest".into()),
            trials: default_trials,
            seed: 0,
            noise_p: None,
            p_loss: None,
        },
    };
    config.experiment = kind;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.trials = trials;
    }
    if let Some(p) = common.p {
        config.p = p;
        config.p_prime = None; // re-solve unless explicitly pinned
    }
    if let Some(pp) = common.p_prime {
        config.p_prime = Some(pp);
    }
    if let Some(n) = common.n {
        config.n = n;
    }
    if let Some(n_d) = common.n_d {
        config.n_d = n_d;
    }
    if let Some(n_t) = common.n_t {
        config.n_t = n_t;
    }
    if let Some(adversary) = &common.adversary {
        config.adversary = if Path::new(adversary).exists() {
            let text = fs::read_to_string(adversary)?;
            AdversarySpec::Inline(serde_json::from_str::<AdversaryStrategy>(&text)?)
        } else {
            AdversarySpec::Named(adversary.clone())
        };
    }
    if let Some(code) = &common.code {
        config.code = if code.eq_ignore_ascii_case("steane") {
            CodeChoice::Steane
        } else {
            CodeChoice::File(code.clone())
        };
    }
    Ok(config.validated()?)
}

fn estimate_json(est: &Estimate) -> Value {
    json!({
        "estimate": est.estimate,
        "stderr": est.stderr,
        "ci95": [est.ci95.0, est.ci95.1],
        "trials": est.trials,
        "count": est.count,
    })
}

fn write_stats(common: &Common, config: &RunConfig, metrics: Map<String, Value>) -> Result<()> {
    let doc = json!({
        "config_echo": config,
        "metrics": Value::Object(metrics),
    });
    let text = serde_json::to_string_pretty(&doc)?;
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("stats.json"), &text)?;
            eprintln!("wrote {}", dir.join("stats.json").display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn gadget_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Gadget, 100_000)?;
    let p_prime = config.p_prime();
    let mut writers = transcript_writers(common)?;
    let mut accepted = 0u64;
    let mut z_accepted = 0u64;
    let mut class_counts = std::collections::BTreeMap::<String, u64>::new();
    for trial in 0..config.trials {
        let mut rng = RandomStream::for_trial(config.seed, trial);
        let adversary = config.adversary.resolve(5, &mut rng)?;
        let run = run_gadget(config.p, p_prime, &adversary, &mut rng)?;
        if run.outcome.accepted {
            accepted += 1;
            z_accepted += u64::from(run.outcome.label.is_z_class());
            *class_counts
                .entry(run.outcome.label.class_name())
                .or_insert(0) += 1;
        }
        if let Some((alice, bob)) = writers.as_mut() {
            let (va, vb) = gadget_views(trial, &run);
            write_line(alice, &va)?;
            write_line(bob, &vb)?;
        }
    }
    let acceptance = Estimate::binomial(accepted, config.trials);
    let z_given_accept = Estimate::binomial(z_accepted, accepted.max(1));
    let mut metrics = Map::new();
    metrics.insert("acceptance".into(), estimate_json(&acceptance));
    metrics.insert("pr_z_given_accept".into(), estimate_json(&z_given_accept));
    metrics.insert(
        "expected_pr_z_given_accept".into(),
        json!(1.0 - 4.0 * config.p * config.p * (1.0 - p_prime)),
    );
    for (class, count) in class_counts {
        metrics.insert(
            format!("class_{class}"),
            estimate_json(&Estimate::binomial(count, config.trials)),
        );
    }
    write_stats(common, &config, metrics)
}

type Writers = Option<(BufWriter<fs::File>, BufWriter<fs::File>)>;

fn transcript_writers(common: &Common) -> Result<Writers> {
    match &common.out {
        None => Ok(None),
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let alice = BufWriter::new(fs::File::create(dir.join("alice.jsonl"))?);
            let bob = BufWriter::new(fs::File::create(dir.join("bob.jsonl"))?);
            Ok(Some((alice, bob)))
        }
    }
}

fn css_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Css, 20_000)?;
    let code = config.code.load()?;
    // exhaustive weight-≤1 decode check over the full codebook, both bases
    let mut decode_ok = true;
    for basis in [Basis::Z, Basis::X] {
        let checks = match basis {
            Basis::Z => &code.hz,
            Basis::X => &code.hx,
        };
        let logical = match basis {
            Basis::Z => code.logical_z,
            Basis::X => code.logical_x,
        };
        for word in 0u32..(1 << code.n) {
            if checks.iter().any(|&row| (row & word).count_ones() % 2 != 0) {
                continue;
            }
            let truth = ((word & logical).count_ones() % 2) as u8;
            for flip in std::iter::once(None).chain((0..code.n).map(Some)) {
                let corrupted = flip.map_or(word, |j| word ^ (1 << j));
                let bits: Vec<u8> =
                    (0..code.n).map(|j| ((corrupted >> j) & 1) as u8).collect();
                let (o, exact) = code.decode_classical(&bits, basis)?;
                decode_ok &= exact && o == truth;
            }
        }
    }
    // logical flip-rate sweep through the full preparation pipeline
    let sweep = [0.01f64, 0.02, 0.05];
    let mut metrics = Map::new();
    metrics.insert("decoder_exhaustive_ok".into(), json!(decode_ok));
    let mut rows = Vec::new();
    let mut rates = Vec::new();
    for (i, &p) in sweep.iter().enumerate() {
        let mut flips = 0u64;
        for trial in 0..config.trials {
            let mut rng = RandomStream::for_trial(config.seed + i as u64, trial);
            let c = (trial % 2) as u8;
            let noise = AdversaryStrategy::IidXZNoise { p };
            let prep = vbqc::css::remote_prepare(&code, c, 0, 0, &noise, &mut rng)?;
            let basis = if c == 0 { Basis::Z } else { Basis::X };
            let e = code.logical_expectation(&prep.bob_state, basis)?;
            flips += u64::from(e < 0.0);
        }
        let est = Estimate::binomial(flips, config.trials);
        rows.push(format!("{p},{},{}", est.estimate, est.stderr));
        rates.push(est.estimate.max(1e-12));
        metrics.insert(format!("logical_flip_rate_p{p}"), estimate_json(&est));
    }
    let slope = {
        let xs: Vec<f64> = sweep.iter().map(|p| p.ln()).collect();
        let ys: Vec<f64> = rates.iter().map(|r| r.ln()).collect();
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| (x - xm) * (y - ym))
            .sum::<f64>()
            / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>()
    };
    metrics.insert("loglog_slope".into(), json!(slope));
    if let Some(csv) = &common.csv {
        write_csv(csv, "p,logical_flip_rate,stderr", &rows)?;
    }
    write_stats(common, &config, metrics)
}

/// Instance selection for the run-level subcommands.
fn instance_for(config: &RunConfig) -> Result<(GraphSpec, Pattern)> {
    if config.n == 6 && config.n_t == 2 && config.n_d == 3 {
        return Ok(n6_fixed()?);
    }
    // generic: a dotted-complete base when one matches, else a path graph
    let base = match (2..=5).find(|k| k + k * (k - 1) / 2 == config.n) {
        Some(k) => build_dotted_complete(k)?,
        None => GraphSpec::new(config.n, (0..config.n - 1).map(|i| (i, i + 1)).collect())?,
    };
    let mut rng = RandomStream::for_trial(config.seed ^ 0x9e37_79b9, 0);
    let assigned = assign_roles_constrained(&base, config.n_t, config.n_d, &mut rng)?;
    let pattern = Pattern::for_roles(&assigned)?;
    Ok((assigned, pattern))
}

fn fk_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Fk, 10_000)?;
    let (graph, pattern) = instance_for(&config)?;
    let mut writers = transcript_writers(common)?;
    let mut accepted = 0u64;
    for trial in 0..config.trials {
        let mut rng = RandomStream::for_trial(config.seed, trial);
        let adversary = config.adversary.resolve(graph.n, &mut rng)?;
        let prepared: Vec<PreparedQubit> = (0..graph.n)
            .map(|v| {
                PreparedQubit::honest(match graph.roles[v] {
                    Role::Dummy => vbqc::fkproto::random_z_label(&mut rng),
                    _ => vbqc::fkproto::random_plus_label(&mut rng),
                })
            })
            .collect();
        let run = run_fk(&graph, &pattern, &prepared, &adversary, &mut rng)?;
        accepted += u64::from(run.result.accepted);
        if let Some((alice, bob)) = writers.as_mut() {
            let (va, vb) = fk_views(trial, &run);
            write_line(alice, &va)?;
            write_line(bob, &vb)?;
        }
    }
    let mut metrics = Map::new();
    metrics.insert(
        "acceptance".into(),
        estimate_json(&Estimate::binomial(accepted, config.trials)),
    );
    metrics.insert("graph".into(), serde_json::to_value(&graph)?);
    metrics.insert("pattern".into(), serde_json::to_value(&pattern)?);
    write_stats(common, &config, metrics)
}

fn compose_cmd(common: &Common, noise: Option<f64>, encoded: bool) -> Result<()> {
    let mut config = build_config(common, ExperimentKind::Compose, 10_000)?;
    if let Some(p) = noise {
        config.noise_p = Some(p);
        if !encoded {
            config.adversary = AdversarySpec::Named(format!("xz_noise:{p}"));
        }
    }
    let (graph, pattern) = instance_for(&config)?;
    let stats = estimate_acceptance(&config, &graph, &pattern, encoded)?;
    let mut metrics = Map::new();
    for (name, est) in &stats.metrics {
        metrics.insert(name.clone(), estimate_json(est));
    }
    metrics.insert("encoded".into(), json!(encoded));
    metrics.insert("p_prime_solved".into(), json!(config.p_prime()));
    write_stats(common, &config, metrics)
}

fn verify_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Verify, 30_000)?;
    let base = match (2..=5).find(|k| k + k * (k - 1) / 2 == config.n) {
        Some(k) => build_dotted_complete(k)?,
        None => bail!("verify expects a dotted-complete vertex count (3, 6, 10, 15)"),
    };
    // attack family: either the standard one or the single named adversary
    let family = match &config.adversary {
        AdversarySpec::Named(name) if name == "honest" => standard_attack_family(config.n),
        AdversarySpec::Named(name) if name.starts_with("single_") => {
            // one-letter family across every vertex
            let letter = vbqc::qsim::PauliLetter::parse(
                &name.trim_start_matches("single_").to_ascii_uppercase(),
            )?;
            (0..config.n)
                .map(|v| {
                    (
                        format!("{letter:?}@{v}"),
                        vbqc::harness::PauliAttack {
                            positions: vec![v],
                            letters: vec![letter],
                        },
                    )
                })
                .collect()
        }
        other => bail!("verify wants a named family, got {other:?}"),
    };
    let mut metrics = Map::new();
    let mut rows = Vec::new();
    let mut all_within = true;
    for (name, attack) in &family {
        let report = estimate_p_incorrect(&config, &base, attack, 1)?;
        all_within &= report.within_bound && report.matches_oracle;
        rows.push(format!(
            "{name},{},{},{},{},{}",
            report.estimate.estimate,
            report.estimate.stderr,
            report.oracle.unwrap_or(f64::NAN),
            report.bound,
            report.within_bound && report.matches_oracle
        ));
        metrics.insert(
            format!("p_incorrect[{name}]"),
            json!({
                "estimate": estimate_json(&report.estimate),
                "oracle": report.oracle,
                "bound": report.bound,
                "within_bound": report.within_bound,
                "matches_oracle": report.matches_oracle,
            }),
        );
    }
    metrics.insert("all_attacks_within_bound_and_oracle".into(), json!(all_within));
    if let Some(csv) = &common.csv {
        write_csv(
            csv,
            "attack,p_incorrect,stderr,oracle,bound,ok",
            &rows,
        )?;
    }
    write_stats(common, &config, metrics)
}

fn blindness_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Blindness, 10_000)?;
    let classes = [StateClass::Z(0), StateClass::Plus(3)];
    let report = blindness_audit(
        config.p,
        config.p_prime(),
        &classes,
        config.trials,
        config.seed,
    )?;
    let mut metrics = Map::new();
    metrics.insert(
        "sampled_distance_to_maximally_mixed".into(),
        json!(report.sampled_distance),
    );
    metrics.insert(
        "exact_distance_to_maximally_mixed".into(),
        json!(report.exact_distance),
    );
    let pairs: Vec<Value> = report
        .pairwise_transcripts
        .iter()
        .map(|((a, b), chi2s)| {
            json!({
                "classes": format!("{a:?} vs {b:?}"),
                "x_corrections": {"chi2": chi2s[0].0, "bound": chi2s[0].1},
                "z_corrections": {"chi2": chi2s[1].0, "bound": chi2s[1].1},
            })
        })
        .collect();
    metrics.insert(
        "pairwise_transcripts".into(),
        json!({
            "pairs": pairs,
            "indistinguishable": report.transcript_indistinguishable,
        }),
    );
    metrics.insert("samples".into(), json!(report.samples));
    write_stats(common, &config, metrics)
}

fn teleport_cmd(common: &Common) -> Result<()> {
    let config = build_config(common, ExperimentKind::Teleport, 20_000)?;
    let strategy = match &config.adversary {
        AdversarySpec::Named(name) if name == "honest" => AdversaryStrategy::Honest,
        AdversarySpec::Named(name) if name == "plus0_replace" => {
            let replacement = PureState::plus_k(0)
                .tensor(&PureState::basis(1, 0).expect("1 qubit"))
                .expect("2 qubits");
            AdversaryStrategy::PreBellReplace {
                rho: MixedState::from_pure(&replacement),
            }
        }
        AdversarySpec::Inline(strategy) => strategy.clone(),
        other => bail!("teleport wants honest, plus0_replace, or an inline strategy; got {other:?}"),
    };
    let report = teleport_equivalence(&strategy)?;
    let sampled_ok = teleport_sampled_check(&strategy, config.trials, config.seed)?;
    let mut metrics = Map::new();
    metrics.insert(
        "branch_equivalence".into(),
        json!({
            "max_probability_gap": report.max_probability_gap,
            "max_state_distance": report.max_state_distance,
            "max_channel_gap_to_twirl": report.max_channel_gap,
            "blinding_bit_bias": report.max_marginal_bias,
        }),
    );
    metrics.insert(
        "twirl".into(),
        json!({
            "raw_tp_defect": report.twirl.raw_tp_defect,
            "twirled_tp_defect": report.twirl.twirled_tp_defect,
            "twirled_pauli_offdiag": report.twirl.twirled_pauli_defect,
        }),
    );
    metrics.insert("sampled_4sigma_ok".into(), json!(sampled_ok));
    write_stats(common, &config, metrics)
}

fn loss_cmd(common: &Common, ploss: f64) -> Result<()> {
    let mut config = build_config(common, ExperimentKind::Loss, 10_000)?;
    config.p_loss = Some(ploss);
    let n = config.code.load()?.n;
    let report = loss_overhead(n, ploss, config.trials, config.seed)?;
    let mut metrics = Map::new();
    metrics.insert("mean_attempts".into(), estimate_json(&report.mean_attempts));
    metrics.insert("linear_prediction".into(), json!(report.linear_prediction));
    metrics.insert(
        "exponential_baseline".into(),
        json!(report.exponential_baseline),
    );
    metrics.insert("note".into(), json!(report.note));
    write_stats(common, &config, metrics)
}
