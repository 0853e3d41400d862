// SPDX-License-Identifier: Apache-2.0

//! Adder construction, latency/throughput/activity benches and PDP
//! arithmetic.
//!
//! A bench drives `(A, B)` vectors into a circuit with ports `clk`, `A[w]`,
//! `B[w]`, `SUM[w]`, `COUT` (and `M` for switchable builds), records what
//! the input and output registers capture, and lines the two streams up
//! against the oracle `A + B`.
//!
//! Latency is the interval between the edge at which a vector enters the
//! input registers and the edge at which its sum enters the output
//! registers. Throughput counts distinct vectors per period between the
//! first and last result.

mod adder;
mod metrics;
mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adder::build_pipelined_adder;
pub use metrics::{pdp, pdp_reduction};
pub use report::{fmt_ratio, BenchReport, Mismatch, ModeComparison};

use crate::netlist::{bit_name, elaborate, ElabError, ElaboratedCircuit, NetId, Netlist, RegId};
use crate::sim::{ClockSpec, SimError, Simulation, Stimulus, TimingViolation};
use crate::timing::{min_clock_period, DelayModel, TimingError};
use crate::{Rational, Time};

/// Exhaustive sources enumerate `4^width` vectors; wider adders need a list.
pub const MAX_EXHAUSTIVE_WIDTH: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("adder width must be even and at least 2, got {0}")]
    BadWidth(u32),
    #[error("mode must be 0 or 1, got {0}")]
    BadMode(u8),
    #[error("circuit has no usable `{0}` port")]
    MissingPort(String),
    #[error(transparent)]
    Elab(#[from] ElabError),
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("period {period} ps is below the mode-{mode} minimum of {t_min} ps")]
    PeriodTooShort { mode: u8, period: Time, t_min: Time },
    #[error("{count} timing violation(s) in mode {mode}; first: {first:?}")]
    Violation {
        mode: u8,
        count: usize,
        first: Box<TimingViolation>,
    },
    #[error("vector ({a}, {b}) does not fit in {width} bits")]
    VectorOutOfRange { a: u64, b: u64, width: u32 },
    #[error("no vectors to apply")]
    NoVectors,
    #[error("exhaustive vectors need width <= {MAX_EXHAUSTIVE_WIDTH}, got {0}")]
    TooWideForExhaustive(u32),
    #[error("bad vector source: {0}")]
    BadVectors(String),
    #[error("power and delay must be positive")]
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vector {
    pub a: u64,
    pub b: u64,
}

impl Vector {
    pub fn sum(&self) -> u64 {
        self.a + self.b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VectorSource {
    /// Every `(a, b)` pair, `a` major.
    Exhaustive,
    List(Vec<Vector>),
}

impl VectorSource {
    /// Parses `"exhaustive"` or a JSON list of `{"a": .., "b": ..}`.
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| BenchError::BadVectors(e.to_string()))?;
        if v.as_str() == Some("exhaustive") {
            return Ok(VectorSource::Exhaustive);
        }
        serde_json::from_value(v)
            .map(VectorSource::List)
            .map_err(|e| BenchError::BadVectors(e.to_string()))
    }

    pub fn vectors(&self, width: u32) -> Result<Vec<Vector>, BenchError> {
        let v = match self {
            VectorSource::Exhaustive => {
                if width > MAX_EXHAUSTIVE_WIDTH {
                    return Err(BenchError::TooWideForExhaustive(width));
                }
                let n = 1u64 << width;
                (0..n)
                    .flat_map(|a| (0..n).map(move |b| Vector { a, b }))
                    .collect()
            }
            VectorSource::List(l) => l.clone(),
        };
        if v.is_empty() {
            return Err(BenchError::NoVectors);
        }
        if let Some(bad) = v.iter().find(|x| x.a >> width != 0 || x.b >> width != 0) {
            return Err(BenchError::VectorOutOfRange {
                a: bad.a,
                b: bad.b,
                width,
            });
        }
        Ok(v)
    }
}

/// How often a fresh vector is presented at the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputRate {
    /// After every rising clock edge.
    #[default]
    PerPeriod,
    /// After every clock edge, rising and falling.
    PerEdge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BenchOptions {
    /// Rate for mode-1 runs; mode 0 always uses one vector per period in
    /// [`compare_modes`].
    pub rate: InputRate,
}

/// Port nets of an adder-shaped circuit.
struct AdderPorts {
    width: u32,
    a: Vec<NetId>,
    b: Vec<NetId>,
    sum: Vec<NetId>,
    cout: NetId,
}

impl AdderPorts {
    fn find(netlist: &Netlist, circuit: &ElaboratedCircuit) -> Result<Self, BenchError> {
        let missing = |p: &str| BenchError::MissingPort(p.to_string());
        let width = netlist
            .port("A")
            .and_then(|p| p.width)
            .ok_or_else(|| missing("A"))?;
        let bus = |name: &str| -> Result<Vec<NetId>, BenchError> {
            if netlist.port(name).and_then(|p| p.width) != Some(width) {
                return Err(missing(name));
            }
            (0..width)
                .map(|i| circuit.net(&bit_name(name, i)).ok_or_else(|| missing(name)))
                .collect()
        };
        netlist.port("clk").ok_or_else(|| missing("clk"))?;
        Ok(AdderPorts {
            width,
            a: bus("A")?,
            b: bus("B")?,
            sum: bus("SUM")?,
            cout: circuit.net("COUT").ok_or_else(|| missing("COUT"))?,
        })
    }
}

struct Plan {
    stimulus: Stimulus,
    apply: Vec<Time>,
    t_end: Time,
}

fn plan(
    netlist: &Netlist,
    ports: &AdderPorts,
    model: &DelayModel,
    mode: u8,
    period: Time,
    vectors: &[Vector],
    rate: InputRate,
) -> Plan {
    let clock = ClockSpec::new("clk", period);
    let mut stim = Stimulus::default().clock(clock.clone());
    if netlist.port("M").is_some() {
        stim = stim.drive("M", 0, mode == 1);
    }
    // inputs move just after the hold window of the edge that took the
    // previous vector
    let offset = model.t_hold.max(1);
    let horizon = period * (vectors.len() as Time + 2);
    let mut apply = vec![0];
    apply.extend(
        clock
            .edges(horizon)
            .filter(|(_, rising)| *rising || rate == InputRate::PerEdge)
            .take(vectors.len() - 1)
            .map(|(t, _)| t + offset),
    );
    let mut prev: Option<Vector> = None;
    for (v, t) in vectors.iter().zip(&apply) {
        for i in 0..ports.width {
            for (bus, now, before) in [("A", v.a, prev.map(|p| p.a)), ("B", v.b, prev.map(|p| p.b))]
            {
                let bit = now >> i & 1 == 1;
                if before.map(|p| p >> i & 1 == 1) != Some(bit) {
                    stim = stim.drive(bit_name(bus, i), *t, bit);
                }
            }
        }
        prev = Some(*v);
    }
    let t_end = apply.last().unwrap() + 4 * period;
    Plan {
        stimulus: stim,
        apply,
        t_end,
    }
}

fn prepare(
    netlist: &Netlist,
    mode: u8,
    source: &VectorSource,
) -> Result<(ElaboratedCircuit, Vec<Vector>), BenchError> {
    if mode > 1 {
        return Err(BenchError::BadMode(mode));
    }
    if mode == 1 && netlist.port("M").is_none() {
        return Err(BenchError::MissingPort("M".into()));
    }
    let circuit = elaborate(netlist, &["clk"])?;
    let ports = AdderPorts::find(netlist, &circuit)?;
    let vectors = source.vectors(ports.width)?;
    Ok((circuit, vectors))
}

/// Runs `vectors` through an adder-shaped circuit at `period` and checks the
/// sums. Fails if the period is below the static minimum or if the
/// simulation records any setup or hold violation.
pub fn run_bench(
    netlist: &Netlist,
    model: &DelayModel,
    mode: u8,
    period: Time,
    source: &VectorSource,
    opts: &BenchOptions,
) -> Result<BenchReport, BenchError> {
    execute(netlist, model, mode, period, source, opts.rate, true)
}

/// Like [`run_bench`] with one vector per period, but accepts periods below
/// the static minimum, stops at the first violation (returning `None`) and
/// records no activity, so toggle counts in the report are zero.
pub fn probe_period(
    netlist: &Netlist,
    model: &DelayModel,
    mode: u8,
    period: Time,
    source: &VectorSource,
) -> Result<Option<BenchReport>, BenchError> {
    match execute(
        netlist,
        model,
        mode,
        period,
        source,
        InputRate::PerPeriod,
        false,
    ) {
        Ok(r) => Ok(Some(r)),
        Err(BenchError::Violation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn execute(
    netlist: &Netlist,
    model: &DelayModel,
    mode: u8,
    period: Time,
    source: &VectorSource,
    rate: InputRate,
    full: bool,
) -> Result<BenchReport, BenchError> {
    let (circuit, vectors) = prepare(netlist, mode, source)?;
    let ports = AdderPorts::find(netlist, &circuit)?;
    let t_min = min_clock_period(&circuit, model, mode)?.t_min;
    if full && period < t_min {
        return Err(BenchError::PeriodTooShort {
            mode,
            period,
            t_min,
        });
    }
    let Plan {
        mut stimulus,
        apply,
        t_end,
    } = plan(netlist, &ports, model, mode, period, &vectors, rate);
    if full {
        stimulus.watch = circuit.nets.iter().map(|n| n.name.clone()).collect();
    }

    let mut bit_of: BTreeMap<RegId, (u8, u32)> = BTreeMap::new();
    for r in circuit.reg_ids() {
        let reg = circuit.reg(r);
        for i in 0..ports.width as usize {
            if reg.d == ports.a[i] {
                bit_of.insert(r, (0, i as u32));
            }
            if reg.d == ports.b[i] {
                bit_of.insert(r, (1, i as u32));
            }
            if reg.q == ports.sum[i] {
                bit_of.insert(r, (2, i as u32));
            }
        }
        if reg.q == ports.cout {
            bit_of.insert(r, (2, ports.width));
        }
    }

    let mut sim = Simulation::new(&circuit, model, &stimulus)?;
    sim.probe_registers(bit_of.keys().copied());
    sim.set_halt_on_violation(!full);
    sim.run_until(t_end)?;
    if let Some(first) = sim.violations().first() {
        return Err(BenchError::Violation {
            mode,
            count: sim.violations().len(),
            first: Box::new(first.clone()),
        });
    }

    let mut inputs: BTreeMap<Time, Vector> = BTreeMap::new();
    let mut outputs: BTreeMap<Time, u64> = BTreeMap::new();
    for cap in sim.captures() {
        let (which, bit) = bit_of[&cap.reg];
        let v = (cap.value as u64) << bit;
        match which {
            0 => inputs.entry(cap.time).or_insert(Vector { a: 0, b: 0 }).a |= v,
            1 => inputs.entry(cap.time).or_insert(Vector { a: 0, b: 0 }).b |= v,
            _ => *outputs.entry(cap.time).or_insert(0) |= v,
        }
    }

    // (capture time, vector index, captured value), one per distinct vector
    let mut results: Vec<(Time, usize, Vector)> = Vec::new();
    let last_apply = *apply.last().unwrap();
    for (t, v) in &inputs {
        let idx = apply.partition_point(|a| a <= t) - 1;
        if results.last().is_some_and(|r| r.1 == idx) {
            continue;
        }
        results.push((*t, idx, *v));
        if *t > last_apply {
            break;
        }
    }
    let captured_ok = results.iter().all(|(_, i, v)| vectors[*i] == *v);

    let (latency, matches) = align(&results, &outputs, period);
    let mismatches = results.len() - matches;
    let first_mismatch = results
        .iter()
        .find(|(t, _, v)| outputs.get(&(t + latency)) != Some(&v.sum()))
        .map(|(t, _, v)| Mismatch {
            a: v.a,
            b: v.b,
            expected: v.sum(),
            got: outputs.get(&(t + latency)).copied(),
        });

    let n = results.len();
    let (w0, w1, per) = if n >= 2 {
        (results[0].0 + latency, results[n - 1].0 + latency, n - 1)
    } else {
        (0, t_end + 1, n)
    };
    let results_per_period = if n >= 2 && w1 > w0 {
        Rational::new((per as i64) * period as i64, (w1 - w0) as i64)
    } else {
        Rational::from_integer(0)
    };

    let roots: BTreeSet<NetId> = circuit.clock_roots.iter().copied().collect();
    let path = circuit.clock_path_nets();
    let mut counts = [0i64; 3];
    for e in &sim.state().trace {
        if e.time < w0 || e.time >= w1 {
            continue;
        }
        let class = if roots.contains(&e.net) {
            0
        } else if path.contains(&e.net) {
            1
        } else {
            2
        };
        counts[class] += 1;
    }
    let per_result = |c: i64| {
        metrics::ratio_or_zero(
            Rational::from_integer(c),
            Rational::from_integer(per as i64),
        )
    };
    let toggles_per_result: BTreeMap<String, Rational> = ["clock-root", "clock-path", "data"]
        .iter()
        .zip(counts)
        .map(|(k, c)| (k.to_string(), per_result(c)))
        .collect();
    let total: Rational = toggles_per_result.values().sum();

    Ok(BenchReport {
        circuit: circuit.name.clone(),
        mode,
        clock_period: period,
        t_min,
        input_rate: rate,
        vectors_applied: vectors.len(),
        results: n,
        dropped: vectors.len() - n,
        mismatches,
        latency_periods: Rational::new(latency as i64, period as i64),
        latency_ps: latency,
        results_per_period,
        throughput_per_ns: results_per_period * Rational::new(1000, period as i64),
        toggles_per_result,
        correct: n > 0 && mismatches == 0 && captured_ok,
        first_mismatch,
        pdp_proxy: total * Rational::new(latency as i64, 1000),
    })
}

/// Offset from input capture to output capture that explains the most
/// results; ties go to the shortest.
fn align(
    results: &[(Time, usize, Vector)],
    outputs: &BTreeMap<Time, u64>,
    period: Time,
) -> (Time, usize) {
    let Some(&(t0, _, _)) = results.first() else {
        return (0, 0);
    };
    let mut best = (0, 0);
    for &to in outputs.range(t0 + 1..=t0 + 8 * period).map(|(t, _)| t) {
        let d = to - t0;
        let m = results
            .iter()
            .filter(|(t, _, v)| outputs.get(&(t + d)) == Some(&v.sum()))
            .count();
        if m > best.1 {
            best = (d, m);
        }
    }
    best
}

/// Runs both modes (concurrently) and relates them. Mode 0 gets one vector
/// per period; mode 1 uses `opts.rate`.
pub fn compare_modes(
    netlist: &Netlist,
    model: &DelayModel,
    period: Time,
    source: &VectorSource,
    opts: &BenchOptions,
) -> Result<ModeComparison, BenchError> {
    let base = BenchOptions {
        rate: InputRate::PerPeriod,
    };
    let (r0, r1) = std::thread::scope(|s| {
        let h0 = s.spawn(|| run_bench(netlist, model, 0, period, source, &base));
        let h1 = s.spawn(|| run_bench(netlist, model, 1, period, source, opts));
        (
            h0.join().expect("mode 0 bench panicked"),
            h1.join().expect("mode 1 bench panicked"),
        )
    });
    let (m0, m1) = (r0?, r1?);
    let ratio = |a: Rational, b: Rational| metrics::ratio_or_zero(a, b);
    let pdp_proxy_reduction = if m0.pdp_proxy > Rational::from_integer(0) {
        Rational::from_integer(1) - m1.pdp_proxy / m0.pdp_proxy
    } else {
        Rational::from_integer(0)
    };
    Ok(ModeComparison {
        latency_ratio: ratio(m1.latency_periods, m0.latency_periods),
        throughput_ratio: ratio(m1.results_per_period, m0.results_per_period),
        clock_root_toggle_ratio: ratio(m1.toggles("clock-root"), m0.toggles("clock-root")),
        pdp_proxy_reduction,
        mode0: m0,
        mode1: m1,
    })
}

/// Smallest period in `[lo, hi]` for which `clean` holds, assuming it is
/// monotone. Returns `None` if `hi` itself is not clean.
pub fn bisect_period<E>(
    mut lo: Time,
    mut hi: Time,
    mut clean: impl FnMut(Time) -> Result<bool, E>,
) -> Result<Option<Time>, E> {
    if !clean(hi)? {
        return Ok(None);
    }
    if clean(lo)? {
        return Ok(Some(lo));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if clean(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Vertex sequence of a closed walk on the `bits`-dimensional hypercube that
/// takes every directed edge exactly once: starting from 0, every single-bit
/// flip is applied from every state. Length `bits * 2^bits + 1`.
pub fn single_bit_walk(bits: u32) -> Vec<u64> {
    let n = 1usize << bits;
    let mut next = vec![0u32; n];
    let mut stack = vec![0usize];
    let mut out = Vec::with_capacity(n * bits as usize + 1);
    while let Some(&v) = stack.last() {
        if next[v] < bits {
            let b = next[v];
            next[v] += 1;
            stack.push(v ^ (1 << b));
        } else {
            out.push(v as u64);
            stack.pop();
        }
    }
    out.reverse();
    out
}

/// Splits `2w`-bit words into `(a, b)` vectors, `a` in the low half.
pub fn split_words(words: &[u64], width: u32) -> Vec<Vector> {
    let mask = (1u64 << width) - 1;
    words
        .iter()
        .map(|w| Vector {
            a: w & mask,
            b: w >> width & mask,
        })
        .collect()
}
