// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::InputRate;
use crate::{Rational, Time};

pub(crate) fn ratio_str<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ratio_map<S: Serializer>(m: &BTreeMap<String, Rational>, s: S) -> Result<S::Ok, S::Error> {
    let m: BTreeMap<&str, String> = m.iter().map(|(k, v)| (k.as_str(), v.to_string())).collect();
    m.serialize(s)
}

fn pass_fail<S: Serializer>(ok: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(if *ok { "pass" } else { "fail" })
}

/// First output that disagreed with `a + b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub a: u64,
    pub b: u64,
    pub expected: u64,
    pub got: Option<u64>,
}

/// Result of one bench run. Ratios are exact and serialize as `"n/d"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchReport {
    pub circuit: String,
    pub mode: u8,
    pub clock_period: Time,
    pub t_min: Time,
    pub input_rate: InputRate,
    pub vectors_applied: usize,
    /// Distinct vectors captured by the input registers.
    pub results: usize,
    /// Applied vectors overwritten before any input register captured them.
    pub dropped: usize,
    pub mismatches: usize,
    #[serde(serialize_with = "ratio_str")]
    pub latency_periods: Rational,
    pub latency_ps: Time,
    #[serde(serialize_with = "ratio_str")]
    pub results_per_period: Rational,
    #[serde(serialize_with = "ratio_str")]
    pub throughput_per_ns: Rational,
    /// Steady-state toggles per result, by net class.
    #[serde(serialize_with = "ratio_map")]
    pub toggles_per_result: BTreeMap<String, Rational>,
    #[serde(rename = "correctness", serialize_with = "pass_fail")]
    pub correct: bool,
    pub first_mismatch: Option<Mismatch>,
    /// Total toggles per result times latency in ns.
    #[serde(serialize_with = "ratio_str")]
    pub pdp_proxy: Rational,
}

impl BenchReport {
    pub fn toggles(&self, class: &str) -> Rational {
        self.toggles_per_result
            .get(class)
            .copied()
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Both modes of one circuit at one period; ratios are mode 1 over mode 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModeComparison {
    pub mode0: BenchReport,
    pub mode1: BenchReport,
    #[serde(serialize_with = "ratio_str")]
    pub latency_ratio: Rational,
    #[serde(serialize_with = "ratio_str")]
    pub throughput_ratio: Rational,
    #[serde(serialize_with = "ratio_str")]
    pub clock_root_toggle_ratio: Rational,
    /// `1 - pdp_proxy(mode 1) / pdp_proxy(mode 0)`.
    #[serde(serialize_with = "ratio_str")]
    pub pdp_proxy_reduction: Rational,
}

/// Integers print as-is, everything else with four decimals.
pub fn fmt_ratio(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{:.4}", r.to_f64().unwrap_or(f64::NAN))
    }
}

impl ModeComparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table, one row per mode.
    pub fn table(&self) -> String {
        let head = [
            "Design",
            "Period(ps)",
            "Latency(T)",
            "Latency(ps)",
            "Results/T",
            "Clk tog/res",
            "Path tog/res",
            "Data tog/res",
            "PDP proxy",
            "Correct",
        ];
        let row = |r: &BenchReport| {
            vec![
                format!("M='{}'", r.mode),
                r.clock_period.to_string(),
                fmt_ratio(&r.latency_periods),
                r.latency_ps.to_string(),
                fmt_ratio(&r.results_per_period),
                fmt_ratio(&r.toggles("clock-root")),
                fmt_ratio(&r.toggles("clock-path")),
                fmt_ratio(&r.toggles("data")),
                fmt_ratio(&r.pdp_proxy),
                if r.correct { "pass" } else { "fail" }.to_string(),
            ]
        };
        let rows = [
            head.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
            row(&self.mode0),
            row(&self.mode1),
        ];
        let widths: Vec<usize> = (0..head.len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        writeln!(out, "{}", self.mode0.circuit).unwrap();
        for r in &rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        writeln!(
            out,
            "latency ratio (M=1/M=0):        {}",
            fmt_ratio(&self.latency_ratio)
        )
        .unwrap();
        writeln!(
            out,
            "throughput ratio (M=1/M=0):     {}",
            fmt_ratio(&self.throughput_ratio)
        )
        .unwrap();
        writeln!(
            out,
            "clock toggles/result ratio:     {}",
            fmt_ratio(&self.clock_root_toggle_ratio)
        )
        .unwrap();
        writeln!(
            out,
            "PDP proxy reduction:            {}",
            fmt_ratio(&self.pdp_proxy_reduction)
        )
        .unwrap();
        out
    }
}
