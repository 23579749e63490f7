use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use fundamental_core::experiments::{default_activations, run_trials, SynthConfig};
use fundamental_core::spectral::format_float;
use fundamental_core::ActivationSpec;

use crate::failure::{CliResult, Failure};
use crate::manifest::{write_json, RunManifest};

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated activations: abs, relu, heps<ε> [default: abs,relu,heps0.2,heps0.1,heps0.05].
    #[arg(long, value_delimiter = ',')]
    pub activations: Option<Vec<String>>,
    #[arg(long, default_value = "bench")]
    pub out: PathBuf,
}

pub fn run(args: &BenchArgs) -> CliResult<()> {
    let activations = match &args.activations {
        Some(list) => list
            .iter()
            .map(|s| s.parse::<ActivationSpec>())
            .collect::<Result<Vec<_>, _>>()?,
        None => default_activations(),
    };
    let mut labels: Vec<String> = activations.iter().map(ActivationSpec::label).collect();
    labels.sort();
    labels.dedup();
    if labels.len() != activations.len() {
        return Err(Failure::usage("activations must be distinct"));
    }
    let config = SynthConfig {
        trials: args.trials as usize,
        master_seed: args.seed,
        activations,
        ..SynthConfig::default()
    };
    let result = run_trials(&config)?;

    fs::create_dir_all(&args.out)?;
    write_json(&args.out.join("summary.json"), &result)?;
    for stats in &result.stats {
        let mut csv = String::from("lower_edge,upper_edge,count\n");
        let edges = &stats.histogram.edges;
        for (i, count) in stats.histogram.counts.iter().enumerate() {
            let _ = writeln!(csv, "{},{},{count}", format_float(edges[i]), format_float(edges[i + 1]));
        }
        fs::write(args.out.join(format!("histogram_{}.csv", stats.activation.label())), csv)?;
    }

    let mut manifest = RunManifest::new("synth-bench");
    manifest
        .set("synth_config", &config)
        .set("rng", &result.rng);
    let config_bytes = serde_json::to_vec(&config)?;
    manifest.input_digest = Some(crate::io::sha256_hex(&config_bytes));
    manifest.write(&args.out)?;

    println!("{:<10} {:>14} {:>14}", "activation", "median", "mad");
    for s in &result.stats {
        println!("{:<10} {:>13.4}% {:>13.4}%", s.activation.label(), 100.0 * s.median, 100.0 * s.mad);
    }
    Ok(())
}
