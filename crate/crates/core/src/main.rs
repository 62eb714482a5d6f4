use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use bibliomap::pipeline::{self, RunConfig};

/// Corpus construction, topic maps and country indicators from local
/// bibliographic record files.
#[derive(Parser, Debug)]
#[command(name = "bibliomap", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "bibliomap.toml")]
    config: PathBuf,
    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppresses the summary printed on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the thesaurus query over source A.
    Query {
        /// Print the per-clause evaluation trace for one record id instead.
        #[arg(long, value_name = "ID")]
        explain: Option<String>,
    },
    /// Link sources, add category records, filter, report coverage.
    Build,
    /// Build the keyword co-occurrence map.
    Map {
        /// Use an existing build corpus instead of rebuilding.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Compute count, specialization and impact indicators.
    Indicators {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Extract the Covid-19 sub-corpus.
    Covid {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Run every stage and write a summary.
    Report,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = RunConfig::load(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    let say = |s: String| {
        if !cli.quiet {
            print!("{s}");
        }
    };
    match cli.command {
        Command::Query { explain: Some(id) } => {
            print!("{}", pipeline::format_trace(&pipeline::explain(&cfg, &id)?));
        }
        Command::Query { explain: None } => {
            let q = pipeline::cmd_query(&cfg)?;
            say(format!("{} records selected\n", q.hits));
        }
        Command::Build => {
            let b = pipeline::cmd_build(&cfg)?;
            say(b.report.to_tsv());
        }
        Command::Map { corpus } => {
            let m = pipeline::cmd_map(&cfg, corpus.as_deref())?;
            say(format!("{} nodes, {} edges\n", m.network.len(), m.network.edges.len()));
        }
        Command::Indicators { corpus } => {
            let t = pipeline::cmd_indicators(&cfg, corpus.as_deref())?;
            say(t.to_tsv());
        }
        Command::Covid { corpus } => {
            let c = pipeline::cmd_covid(&cfg, corpus.as_deref())?;
            say(format!("{} records selected\n", c.len()));
        }
        Command::Report => say(pipeline::cmd_report(&cfg)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
