use std::collections::BTreeSet;
use std::fmt::Write as _;

use clap::Args;
use fundamental_core::theory::{sumset_gcd_limit, sumset_support, FrequencySet};

use crate::failure::{CliResult, Failure};

#[derive(Debug, Args)]
pub struct SumsetArgs {
    /// Comma-separated positive integer frequencies.
    #[arg(long, value_delimiter = ',', required = true)]
    pub freqs: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    pub kmax: usize,
    /// Largest difference examined [default: 10 · max frequency].
    #[arg(long)]
    pub range: Option<u64>,
}

pub fn run(args: &SumsetArgs) -> CliResult<()> {
    if args.kmax == 0 {
        return Err(Failure::usage("--kmax must be at least 1"));
    }
    let set = FrequencySet::new(args.freqs.iter().copied())?;
    let range = args.range.unwrap_or(10 * set.max());
    let limit = sumset_gcd_limit(&set, args.kmax, range);
    let lattice: BTreeSet<u64> = (0..=range).step_by(limit.gcd as usize).collect();
    let last_k = limit.stabilization_k.map_or(args.kmax, |k| k.min(args.kmax));

    let mut out = String::new();
    let freqs: Vec<String> = set.elements().iter().map(u64::to_string).collect();
    let _ = writeln!(out, "frequencies: {}", freqs.join(","));
    let _ = writeln!(out, "gcd: {}", limit.gcd);
    let _ = writeln!(out, "range: [0, {range}]");
    let _ = writeln!(out, "{:>4} {:>8} {:>10} {:>10}", "k", "size", "in_lattice", "full");
    let mut last = BTreeSet::new();
    for k in 1..=last_k {
        let support = sumset_support(&set, k, range)?;
        let _ = writeln!(
            out,
            "{k:>4} {:>8} {:>10} {:>10}",
            support.len(),
            yes(support.iter().all(|d| d % limit.gcd == 0)),
            yes(support == lattice)
        );
        last = support;
    }
    match limit.stabilization_k {
        Some(k) => {
            let _ = writeln!(out, "stabilization_k: {k}");
        }
        None => {
            let _ = writeln!(out, "stabilization_k: none up to k = {}", args.kmax);
        }
    }
    let _ = writeln!(out, "support at k = {last_k}: {}", describe(&last, limit.gcd, range));
    print!("{out}");
    Ok(())
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// `{0, g, ..., n·g}` when the set is an arithmetic run from 0, else the
/// elements themselves.
fn describe(set: &BTreeSet<u64>, gcd: u64, range: u64) -> String {
    let top = *set.last().unwrap_or(&0);
    let run: BTreeSet<u64> = (0..=top).step_by(gcd as usize).collect();
    if set.len() > 3 && *set == run {
        let lattice = if gcd == 1 { "Z".to_string() } else { format!("{gcd}Z") };
        let full = if top + gcd > range { format!(" = {lattice} ∩ [0, {range}]") } else { String::new() };
        format!("{{0, {gcd}, ..., {top}}}{full}")
    } else {
        let items: Vec<String> = set.iter().map(u64::to_string).collect();
        format!("{{{}}}", items.join(", "))
    }
}
