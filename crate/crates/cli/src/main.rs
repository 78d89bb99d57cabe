use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qlink::astro::link_report;
use qlink::harness::{
    run, write_log_to, write_summary_csv, ConfigError, EventLayout, OutputFormat, ProtocolName, RunConfig, RunError,
};
use qlink::spacetime::{
    boost_event, certify_causal_independence, cislunar_layout, ground_layout, measurement_ordering, swap_layout,
    write_events, Frame,
};

#[derive(Parser)]
#[command(name = "qlink", version, about = "Teleportation, swapping and relativistic-link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CHSH test on one Bell pair.
    Bell(Common),
    /// Active or passive teleportation.
    Teleport(Common),
    /// Entanglement swapping with Diana's Bell measurement.
    Swap(Common),
    /// The local hidden-variable teleportation model with detection delays.
    Lhv(Common),
    /// Table of relativistic link quantities for a body catalog.
    Link {
        #[command(flatten)]
        common: Common,
        /// Print JSON instead of a text table.
        #[arg(long)]
        json: bool,
    },
    /// Causal certification and ordering of an event layout.
    Events {
        #[command(flatten)]
        common: Common,
        /// ground, cislunar or swap.
        #[arg(long)]
        layout: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// jsonl writes the full log, csv only the summary table.
    #[arg(long)]
    format: Option<String>,
    /// Coincidence window, seconds (`inf` for none).
    #[arg(long)]
    window: Option<f64>,
    /// Detection delay scale T0, seconds.
    #[arg(long)]
    delay_scale: Option<f64>,
    /// Condition swapping statistics on this Diana outcome, e.g. B11.
    #[arg(long)]
    post_select: Option<String>,
    /// Measurement order, e.g. MD-MA-MB.
    #[arg(long)]
    ordering: Option<String>,
    /// Observer speed along the Alice–Bob line, m/s.
    #[arg(long, allow_hyphen_values = true)]
    boost: Option<f64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    EmptyBin(String),
    Other(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => c.into(),
            e if e.is_empty_bin() => Failure::EmptyBin(e.to_string()),
            e => Failure::Other(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

fn invalid(e: impl ToString) -> Failure {
    Failure::Config(e.to_string())
}

fn other(e: impl ToString) -> Failure {
    Failure::Other(e.to_string())
}

impl Common {
    fn into_config(self, protocol: ProtocolName) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::new(protocol),
        };
        if c.protocol != protocol {
            return Err(invalid(format!(
                "config is for {:?} but the subcommand is {:?}",
                c.protocol, protocol
            )));
        }
        if let Some(f) = &self.format {
            c.format = Some(f.parse::<OutputFormat>()?);
        }
        if let Some(l) = &self.post_select {
            c.post_select = Some(l.parse().map_err(invalid)?);
        }
        c.seed = self.seed.or(c.seed);
        c.trials = self.trials.or(c.trials);
        c.out = self.out.or(c.out);
        c.window = self.window.or(c.window);
        c.delay_scale_t0 = self.delay_scale.or(c.delay_scale_t0);
        c.ordering = self.ordering.or(c.ordering);
        c.boost = self.boost.or(c.boost);
        c.workers = self.workers.or(c.workers);
        c.validate()?;
        Ok(c)
    }
}

fn output(c: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &c.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(c: RunConfig) -> Result<(), Failure> {
    let log = run(&c)?;
    let mut out = output(&c)?;
    match c.format() {
        OutputFormat::Jsonl => write_log_to(&mut out, &log).map_err(other)?,
        OutputFormat::Csv => write_summary_csv(&mut out, log.summary.as_ref().expect("runs summarize")).map_err(other)?,
    }
    out.flush()?;
    if c.out.is_some() {
        if let Some(s) = &log.summary {
            for (k, e) in &s.estimates {
                println!("{k} = {:.6} ± {:.6} (n = {})", e.value, e.stderr, e.n);
            }
            for (k, v) in &s.values {
                println!("{k} = {v:.6}");
            }
            println!("accepted {} of {}", s.accepted, s.trials);
        }
    }
    Ok(())
}

fn link(c: RunConfig, json: bool) -> Result<(), Failure> {
    let report = link_report(&c.body_catalog()?).map_err(other)?;
    let mut out = output(&c)?;
    if json {
        serde_json::to_writer_pretty(&mut out, &report).map_err(other)?;
        writeln!(out)?;
    } else {
        write!(out, "{report}")?;
    }
    out.flush()?;
    Ok(())
}

fn events(mut c: RunConfig, layout: Option<String>) -> Result<(), Failure> {
    if let Some(l) = layout {
        c.layout = Some(serde_json::from_value(serde_json::Value::String(l.clone())).map_err(|_| {
            invalid(format!("unknown layout {l}; expected ground, cislunar or swap"))
        })?);
    }
    let trials = c.trials.unwrap_or(100);
    let layout = match c.layout.unwrap_or_default() {
        EventLayout::Ground => ground_layout(trials),
        EventLayout::Cislunar => cislunar_layout(trials),
        EventLayout::Swap => swap_layout(),
    };
    let frame = Frame::along_x(c.boost.unwrap_or(0.0)).map_err(invalid)?;
    let map = layout.event_map();
    let report = certify_causal_independence(&layout.records, &map).map_err(other)?;
    let first: Vec<_> = layout.records[0].event_refs.iter().map(|id| map[id].clone()).collect();
    let order = measurement_ordering(&first, &frame).map_err(other)?;
    let boosted: Vec<_> = first.iter().map(|e| boost_event(e, &frame)).collect();
    if let Some(p) = &c.out {
        write_events(BufWriter::new(File::create(p)?), &layout.events).map_err(other)?;
    }
    let summary = serde_json::json!({
        "layout": c.layout.unwrap_or_default(),
        "events": layout.events.len(),
        "boost": frame.speed(),
        "first_trial_ordering": order.name(),
        "first_trial_spacelike": order.spacelike(),
        "first_trial_boosted": boosted,
        "causal": report,
    });
    writeln!(io::stdout(), "{}", serde_json::to_string_pretty(&summary).map_err(other)?)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bell(common) => simulate(common.into_config(ProtocolName::Bell)?),
        Command::Teleport(common) => simulate(common.into_config(ProtocolName::Teleport)?),
        Command::Swap(common) => simulate(common.into_config(ProtocolName::Swap)?),
        Command::Lhv(common) => simulate(common.into_config(ProtocolName::Lhv)?),
        Command::Link { common, json } => link(common.into_config(ProtocolName::Link)?, json),
        Command::Events { common, layout } => events(common.into_config(ProtocolName::Events)?, layout),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::EmptyBin(m)) => {
            eprintln!("statistics error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
