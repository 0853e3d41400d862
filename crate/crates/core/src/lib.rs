// SPDX-License-Identifier: Apache-2.0

//! Event-driven gate-level simulation and static timing analysis for
//! pipelines built from switchable single/dual-edge register pairs.
//!
//! A switchable register is an ordinary rising-edge flip-flop whose clock
//! passes through an XOR with a mode net `M`. With `M = 0` a rising/switchable
//! pair behaves as a two-stage single-edge shift register; with `M = 1` the
//! second flip-flop captures on the falling edge, so data crosses the pair in
//! half a clock period.
//!
//! The crate is organised as:
//! - [`netlist`]: text format, validation, elaboration into a flat gate graph.
//! - [`sim`]: discrete-event simulator with setup/hold checking, toggle
//!   counting and VCD export.
//! - [`timing`]: static timing (minimum clock period, hold slack).
//! - [`bench`]: the pipelined adder builder, latency/throughput/activity
//!   benches and power-delay-product arithmetic.
//! - [`cli`]: the `edgesim` command line front end.

pub mod bench;
pub mod cli;
pub mod netlist;
pub mod sim;
pub mod timing;

/// Simulation and analysis time, in picoseconds.
pub type Time = u64;

/// Exact rational used for measured ratios (latency in periods, throughput,
/// toggles per result, PDP proxies).
pub type Rational = num_rational::Ratio<i64>;

/// Floating-point counterpart of [`Rational`] for quick reporting.
pub type Real = f64;

pub use bench::{
    build_pipelined_adder, compare_modes, pdp, pdp_reduction, run_bench, BenchError, BenchOptions,
    BenchReport, InputRate, ModeComparison, VectorSource,
};
pub use netlist::{
    elaborate, parse_netlist, render, validate, Diagnostic, ElabError, ElaboratedCircuit, GateKind,
    Netlist, ParseError, RegisterKind,
};
pub use sim::{SimError, SimState, Simulation, Stimulus, TimingViolation, ViolationKind};
pub use timing::{
    hold_check, load_delay_model, min_clock_period, path_extremes, DelayModel, EdgeRelation,
    PathReport, TimingError, TimingReport,
};
