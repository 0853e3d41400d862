// SPDX-License-Identifier: Apache-2.0

//! `edgesim` command line.
//!
//! ```text
//! edgesim check <NETLIST>
//! edgesim sim   <NETLIST> --delays <JSON> --stimulus <JSON> --until <PS> [--vcd <PATH>] [--report <PATH>]
//! edgesim sta   <NETLIST> --delays <JSON> --mode <0|1> [--report <PATH>]
//! edgesim bench [<NETLIST> | --width <W>] --delays <JSON> --mode <0|1|both> --period <PS>
//!               --vectors <exhaustive|PATH> [--rate <per-period|per-edge>] [--report <PATH>]
//! ```
//!
//! Exit status: 0 success, 1 usage error, 2 netlist or model error, 3 timing
//! violation during a bench.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{
    build_pipelined_adder, compare_modes, fmt_ratio, run_bench, BenchError, BenchOptions,
    InputRate, VectorSource,
};
use crate::netlist::{
    elaborate, infer_clock_roots, parse_netlist, ElabWarning, ElaboratedCircuit, Netlist,
};
use crate::sim::{Simulation, Stimulus, TimingViolation, VcdHeader};
use crate::timing::{load_delay_model, min_clock_period, DelayModel};
use crate::Time;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "edgesim",
    version,
    about = "Gate-level simulation and timing for switchable single/dual-edge register pipelines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RateArg {
    PerPeriod,
    PerEdge,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a netlist, then elaborate it.
    Check { netlist: PathBuf },
    /// Simulate a netlist under a stimulus file.
    Sim {
        netlist: PathBuf,
        #[arg(long)]
        delays: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        /// End time in ps.
        #[arg(long)]
        until: Time,
        #[arg(long)]
        vcd: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Minimum clock period and hold slacks.
    Sta {
        netlist: PathBuf,
        #[arg(long)]
        delays: PathBuf,
        #[arg(long, value_parser = ["0", "1"])]
        mode: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Latency/throughput/activity bench on an adder.
    Bench {
        /// Adder netlist; built from --width when omitted.
        netlist: Option<PathBuf>,
        #[arg(long, conflicts_with = "netlist")]
        width: Option<u32>,
        #[arg(long)]
        delays: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        period: Time,
        #[arg(long)]
        vectors: String,
        #[arg(long, value_enum, default_value = "per-period")]
        rate: RateArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

/// Failure carrying its exit status; the message is already formatted.
struct Fail(i32, String);

type Out<'a> = &'a mut dyn Write;

/// Runs the command line `args` (program name first) and returns the exit
/// status. Human output goes to `out`, diagnostics to `err`.
pub fn run<I, S>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "{msg}");
            code
        }
    }
}

fn dispatch(cmd: Command, out: Out, err: Out) -> Result<i32, Fail> {
    match cmd {
        Command::Check { netlist } => check(&netlist, out, err),
        Command::Sim {
            netlist,
            delays,
            stimulus,
            until,
            vcd,
            report,
        } => sim(
            &netlist,
            &delays,
            &stimulus,
            until,
            vcd.as_deref(),
            report.as_deref(),
            out,
            err,
        ),
        Command::Sta {
            netlist,
            delays,
            mode,
            report,
        } => sta(
            &netlist,
            &delays,
            mode.parse().unwrap(),
            report.as_deref(),
            out,
            err,
        ),
        Command::Bench {
            netlist,
            width,
            delays,
            mode,
            period,
            vectors,
            rate,
            report,
        } => bench(
            netlist.as_deref(),
            width,
            &delays,
            mode,
            period,
            &vectors,
            rate,
            report.as_deref(),
            out,
        ),
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    fs::write(path, bytes).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn load_netlist(path: &Path) -> Result<Netlist, Fail> {
    let text = read(path)?;
    parse_netlist(&text)
        .map_err(|e| Fail(EXIT_INPUT, e.report(&path.display().to_string()).join("\n")))
}

fn load_model(path: &Path) -> Result<DelayModel, Fail> {
    let text = read(path)?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        Fail(
            EXIT_INPUT,
            format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()),
        )
    })?;
    load_delay_model(&doc).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn elaborate_inferred(netlist: &Netlist, path: &Path) -> Result<ElaboratedCircuit, Fail> {
    let mut roots = infer_clock_roots(netlist);
    if roots.is_empty() {
        // purely combinational: any input will do as the root
        roots = netlist.input_nets().into_iter().take(1).collect();
    }
    elaborate(netlist, &roots).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn warn(w: &ElabWarning) -> String {
    match w {
        ElabWarning::ModeDrivenInDomain { register, mode } => format!(
            "warning: mode net `{mode}` of register `{register}` is driven from its own clock domain and may switch while the clock is high"
        ),
    }
}

fn check(path: &Path, _out: Out, err: Out) -> Result<i32, Fail> {
    let n = load_netlist(path)?;
    let c = elaborate_inferred(&n, path)?;
    for w in &c.warnings {
        let _ = writeln!(err, "{}: {}", path.display(), warn(w));
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimReport<'a> {
    module: &'a str,
    until: Time,
    events_processed: u64,
    toggles: BTreeMap<String, u64>,
    final_values: BTreeMap<String, u8>,
    violations: &'a [TimingViolation],
}

#[allow(clippy::too_many_arguments)]
fn sim(
    netlist: &Path,
    delays: &Path,
    stimulus: &Path,
    until: Time,
    vcd: Option<&Path>,
    report: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, Fail> {
    let n = load_netlist(netlist)?;
    let model = load_model(delays)?;
    let stim_text = read(stimulus)?;
    let stim = Stimulus::from_json(&stim_text).map_err(|e| {
        Fail(
            EXIT_INPUT,
            format!("{}:{}:{}: {e}", stimulus.display(), e.line(), e.column()),
        )
    })?;
    let c = elaborate_inferred(&n, netlist)?;
    for w in &c.warnings {
        let _ = writeln!(err, "{}: {}", netlist.display(), warn(w));
    }
    let mut s = Simulation::new(&c, &model, &stim)
        .map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", stimulus.display())))?;
    s.run_until(until)
        .map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", netlist.display())))?;

    for v in s.violations() {
        let _ = writeln!(
            err,
            "{} violation at `{}`: edge {} ps, data {} ps, margin {} ps",
            match v.kind {
                crate::sim::ViolationKind::Setup => "setup",
                crate::sim::ViolationKind::Hold => "hold",
            },
            v.register_name,
            v.edge_time,
            v.data_time,
            v.margin
        );
    }
    let _ = writeln!(
        out,
        "simulated {} to {} ps: {} events, {} violation(s)",
        c.name,
        until,
        s.state().events_processed,
        s.violations().len()
    );
    if let Some(p) = vcd {
        write_file(p, &s.vcd_bytes(&VcdHeader::default()))?;
    }
    if let Some(p) = report {
        let r = SimReport {
            module: &c.name,
            until,
            events_processed: s.state().events_processed,
            toggles: s.toggle_report(None),
            final_values: c
                .nets
                .iter()
                .zip(&s.state().values)
                .map(|(n, v)| (n.name.clone(), *v as u8))
                .collect(),
            violations: s.violations(),
        };
        let mut text = serde_json::to_string_pretty(&r).expect("report serializes");
        text.push('\n');
        write_file(p, text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

fn sta(
    netlist: &Path,
    delays: &Path,
    mode: u8,
    report: Option<&Path>,
    out: Out,
    err: Out,
) -> Result<i32, Fail> {
    let n = load_netlist(netlist)?;
    let model = load_model(delays)?;
    let c = elaborate_inferred(&n, netlist)?;
    let r = min_clock_period(&c, &model, mode)
        .map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", netlist.display())))?;
    for d in &r.diagnostics {
        let _ = writeln!(err, "{}: {d}", netlist.display());
    }
    let _ = writeln!(out, "module {} mode {}", c.name, mode);
    let _ = writeln!(out, "t_min = {} ps", r.t_min);
    if let Some(b) = r.binding_path() {
        let _ = writeln!(
            out,
            "binding pair {} -> {}: max {} ps, skew {} ps, {}",
            b.launch,
            b.capture,
            b.max_delay,
            b.capture_clock_skew,
            match b.edge_relation {
                crate::timing::EdgeRelation::SameEdge => "same edge",
                crate::timing::EdgeRelation::AdjacentEdge => "adjacent edge",
            }
        );
        if !b.critical_path.is_empty() {
            let _ = writeln!(out, "critical path: {}", b.critical_path.join(" -> "));
        }
    }
    for h in &r.hold {
        let _ = writeln!(
            out,
            "hold {} -> {}: slack {} ps {}",
            h.launch,
            h.capture,
            h.slack,
            if h.pass { "ok" } else { "VIOLATED" }
        );
    }
    if let Some(p) = report {
        let mut text = serde_json::to_string_pretty(&r).expect("report serializes");
        text.push('\n');
        write_file(p, text.as_bytes())?;
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    netlist: Option<&Path>,
    width: Option<u32>,
    delays: &Path,
    mode: ModeArg,
    period: Time,
    vectors: &str,
    rate: RateArg,
    report: Option<&Path>,
    out: Out,
) -> Result<i32, Fail> {
    if period == 0 || !period.is_multiple_of(2) {
        return Err(Fail(
            EXIT_USAGE,
            format!("--period must be even and positive, got {period}"),
        ));
    }
    let n = match (netlist, width) {
        (Some(p), _) => load_netlist(p)?,
        (None, Some(w)) => {
            build_pipelined_adder(w, true).map_err(|e| Fail(EXIT_USAGE, e.to_string()))?
        }
        (None, None) => {
            return Err(Fail(EXIT_USAGE, "bench needs a netlist or --width".into()));
        }
    };
    let model = load_model(delays)?;
    let source = if vectors == "exhaustive" {
        VectorSource::Exhaustive
    } else {
        let p = Path::new(vectors);
        VectorSource::from_json(&read(p)?)
            .map_err(|e| Fail(EXIT_INPUT, format!("{vectors}: {e}")))?
    };
    let opts = BenchOptions {
        rate: match rate {
            RateArg::PerPeriod => InputRate::PerPeriod,
            RateArg::PerEdge => InputRate::PerEdge,
        },
    };
    let fail = |e: BenchError| {
        let code = match e {
            BenchError::Violation { .. } => EXIT_VIOLATION,
            BenchError::PeriodTooShort { .. } | BenchError::BadMode(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Fail(code, format!("bench: {e}"))
    };
    let json = match mode {
        ModeArg::Both => {
            let cmp = compare_modes(&n, &model, period, &source, &opts).map_err(fail)?;
            let _ = write!(out, "{}", cmp.table());
            cmp.to_json()
        }
        ModeArg::Zero | ModeArg::One => {
            let m = (mode == ModeArg::One) as u8;
            let r = run_bench(&n, &model, m, period, &source, &opts).map_err(fail)?;
            let _ = writeln!(
                out,
                "{} M='{}' period {} ps: latency {} periods ({} ps), {} results/period, {}",
                r.circuit,
                m,
                period,
                fmt_ratio(&r.latency_periods),
                r.latency_ps,
                fmt_ratio(&r.results_per_period),
                if r.correct { "pass" } else { "fail" }
            );
            r.to_json()
        }
    };
    if let Some(p) = report {
        write_file(p, format!("{json}\n").as_bytes())?;
    }
    Ok(EXIT_OK)
}
