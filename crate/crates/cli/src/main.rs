mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use grades_core::experiments::{
    preset_suite, run_experiment, run_trial_detailed, spec_derivation, write_summary_csv,
    write_trials_csv, Parallelism, SummaryRow, PRESET_NAMES,
};
use grades_core::network::{generate_random_network, load_network, parse_network, write_network};
use grades_core::{rng, NetworkCondition, TrainingMode, UpdateRule, WeightReset};

use config::Overrides;

/// Rule-fact expert system training experiments.
#[derive(Parser)]
#[command(name = "grades", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random rule-fact network file.
    Generate {
        #[arg(long, default_value_t = 100)]
        facts: usize,
        #[arg(long, default_value_t = 100)]
        rules: usize,
        /// Falls back to GRADES_SEED, then 1.
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run one trial and print every training epoch.
    RunTrial {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Trial index within the experiment.
        #[arg(long, default_value_t = 0)]
        trial: usize,
    },
    /// Run one experiment and write trials.csv and summary.csv.
    Experiment {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Directory for the two CSV files.
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
    },
    /// Run a named experiment grid and write one summary CSV.
    Reproduce {
        /// One of the preset names, or `list`.
        preset: String,
        #[command(flatten)]
        run: RunArgs,
        /// Summary CSV path; defaults to `<preset>.csv`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a network file and rewrite it in canonical form.
    Convert {
        input: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Network and training shape.
#[derive(Args)]
struct SpecArgs {
    /// Default 100.
    #[arg(long)]
    facts: Option<usize>,
    /// Default 100.
    #[arg(long)]
    rules: Option<usize>,
    /// Default 100.
    #[arg(long)]
    epochs: Option<usize>,
    /// Default 0.1.
    #[arg(long)]
    velocity: Option<f64>,
    /// path-same-facts (default), path-random-facts, multi-path-same-facts, multi-path-random-facts.
    #[arg(long)]
    mode: Option<TrainingMode>,
    /// base (default), fc, random, augmented:<pct>, error:<pct>.
    #[arg(long)]
    condition: Option<NetworkCondition>,
}

/// Settings shared by every run, preset or not.
#[derive(Args)]
struct RunArgs {
    /// Default 1000.
    #[arg(long)]
    trials: Option<usize>,
    /// Falls back to the config file, then GRADES_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    /// value-scaled (default) or zero-sum.
    #[arg(long)]
    update_rule: Option<UpdateRule>,
    /// symmetric (default) or uniform.
    #[arg(long)]
    weight_reset: Option<WeightReset>,
    /// Reuse truth networks, queries and fact values across conditions.
    #[arg(long)]
    paired: bool,
    /// Worker threads, or `auto`.
    #[arg(long)]
    parallelism: Option<Parallelism>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self, spec: Option<&SpecArgs>) -> Overrides {
        let mut o = Overrides {
            trials: self.trials,
            seed: self.seed,
            update_rule: self.update_rule,
            weight_reset: self.weight_reset,
            paired: self.paired.then_some(true),
            parallelism: self.parallelism,
            ..Default::default()
        };
        if let Some(s) = spec {
            o.facts = s.facts;
            o.rules = s.rules;
            o.epochs = s.epochs;
            o.velocity = s.velocity;
            o.mode = s.mode;
            o.condition = s.condition;
        }
        o
    }

    /// Flags over config file over environment.
    fn resolve(&self, spec: Option<&SpecArgs>) -> anyhow::Result<Overrides> {
        let file = match &self.config {
            Some(path) => Overrides::load(path)?,
            None => Overrides::default(),
        };
        Ok(self.overrides(spec).over(file).over(Overrides::from_env()?))
    }
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn sink(output: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(create(path)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn generate(
    facts: usize,
    rules: usize,
    seed: Option<u64>,
    output: Option<&Path>,
) -> anyhow::Result<()> {
    let seed = match seed {
        Some(s) => s,
        None => Overrides::from_env()?.seed.unwrap_or(1),
    };
    let net = generate_random_network(facts, rules, &mut rng::stream(seed))?;
    let mut out = sink(output)?;
    write_network(&net, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run_one_trial(spec_args: &SpecArgs, run: &RunArgs, trial: usize) -> anyhow::Result<()> {
    let spec = run.resolve(Some(spec_args))?.to_spec();
    spec.validate()?;
    let d = run_trial_detailed(&spec, trial, spec_derivation(&spec))?;
    let q = d.query;
    println!(
        "trial {trial}: {} facts, truth {} rules, trainee {} rules, condition {}, query {} -> {}",
        spec.num_facts,
        d.truth.num_rules(),
        d.trainee_before.num_rules(),
        spec.condition,
        q.start_fact,
        q.target_fact
    );
    println!("epoch,start,target,truth_status,trainee_status,truth_value,trainee_value,error,updated_rules");
    for e in &d.epochs {
        println!(
            "{},{},{},{:?},{:?},{:.6},{:.6},{:+.6},{}",
            e.epoch_index,
            e.query.start_fact,
            e.query.target_fact,
            e.truth_status,
            e.trainee_status,
            e.truth_value,
            e.trainee_value,
            e.error,
            e.updated_rules
        );
    }
    let r = &d.record;
    println!(
        "evaluation: {} truth {:.6} trained {:.6} abs_error {:.6}",
        r.status.as_str(),
        r.truth_value,
        r.trained_value,
        r.abs_error
    );
    Ok(())
}

fn experiment(spec_args: &SpecArgs, run: &RunArgs, dir: &Path) -> anyhow::Result<()> {
    let o = run.resolve(Some(spec_args))?;
    let spec = o.to_spec();
    let result = run_experiment(&spec, o.parallelism())?;

    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let trials_path = dir.join("trials.csv");
    let summary_path = dir.join("summary.csv");
    let mut out = create(&trials_path)?;
    write_trials_csv(&result.records, &mut out)?;
    out.flush()?;
    let row = SummaryRow {
        preset: "experiment",
        spec: &spec,
        summary: &result.summary,
    };
    let mut out = create(&summary_path)?;
    write_summary_csv(&[row], &mut out)?;
    out.flush()?;

    let s = &result.summary;
    let agg = s.aggregates.as_ref();
    println!(
        "evaluated {} excluded {} avg_abs_err {} median {} frac_below_0.1 {}",
        s.evaluated_count,
        s.excluded_count,
        fmt_opt(agg.map(|a| a.avg_abs_error)),
        fmt_opt(agg.map(|a| a.median_abs_error)),
        fmt_opt(agg.map(|a| a.fraction_below_0p1)),
    );
    println!(
        "wrote {} and {}",
        trials_path.display(),
        summary_path.display()
    );
    Ok(())
}

fn reproduce(preset: &str, run: &RunArgs, output: Option<&Path>) -> anyhow::Result<()> {
    if preset == "list" {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return Ok(());
    }
    let o = run.resolve(None)?;
    let specs = preset_suite(preset)
        .map_err(|e| anyhow::anyhow!("{e}; known presets: {}", PRESET_NAMES.join(", ")))?;
    let mut results = Vec::with_capacity(specs.len());
    for mut spec in specs {
        o.apply_run(&mut spec);
        let result = run_experiment(&spec, o.parallelism())?;
        let agg = result.summary.aggregates.as_ref();
        eprintln!(
            "{:<16} facts {:<3} epochs {:<4} velocity {:<4} {:<23} avg {} median {} frac {}",
            spec.condition.to_string(),
            spec.num_facts,
            spec.config.epochs,
            spec.config.velocity,
            spec.config.mode.as_str(),
            fmt_opt(agg.map(|a| a.avg_abs_error)),
            fmt_opt(agg.map(|a| a.median_abs_error)),
            fmt_opt(agg.map(|a| a.fraction_below_0p1)),
        );
        results.push((spec, result.summary));
    }
    let rows: Vec<SummaryRow> = results
        .iter()
        .map(|(spec, summary)| SummaryRow {
            preset,
            spec,
            summary,
        })
        .collect();
    let path = output.map_or_else(|| PathBuf::from(format!("{preset}.csv")), Path::to_path_buf);
    let mut out = create(&path)?;
    write_summary_csv(&rows, &mut out)?;
    out.flush()?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn convert(input: &Path, output: Option<&Path>) -> anyhow::Result<()> {
    let net = if input == Path::new("-") {
        parse_network(io::stdin().lock())?
    } else {
        load_network(input).with_context(|| format!("reading {}", input.display()))?
    };
    let mut out = sink(output)?;
    write_network(&net, &mut out)?;
    out.flush()?;
    if output.is_some() {
        eprintln!(
            "{} facts, {} rules: valid",
            net.num_facts(),
            net.num_rules()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate {
            facts,
            rules,
            seed,
            output,
        } => generate(*facts, *rules, *seed, output.as_deref()),
        Command::RunTrial { spec, run, trial } => run_one_trial(spec, run, *trial),
        Command::Experiment { spec, run, output } => experiment(spec, run, output),
        Command::Reproduce {
            preset,
            run,
            output,
        } => reproduce(preset, run, output.as_deref()),
        Command::Convert { input, output } => convert(input, output.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
