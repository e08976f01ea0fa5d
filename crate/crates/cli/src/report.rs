//! The report envelope shared by every subcommand.
//!
//! One struct, two renderings.  The JSON rendering is canonical: maps
//! are ordered, rationals are strings, and identical invocations give
//! byte-identical output.  Wall-clock timing would break that, so it
//! appears only in the text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputEcho>,
    pub flags: BTreeMap<String, String>,
    pub result: ResultBody,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResultBody {
    Check {
        valid: bool,
        generators: usize,
        degrees: BTreeMap<i64, usize>,
        parameters: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nondegenerate: Option<bool>,
        violations: Vec<ViolationEcho>,
    },
    Quantize {
        cohomology: Vec<DegreeRow>,
        total: usize,
        det_line: Option<LineEcho>,
        stabilization: StabilizationEcho,
    },
    Dequantize {
        basis: usize,
        differential: Vec<TableRow>,
        bracket: Vec<TableRow>,
    },
    Cohomology {
        table: Vec<DegreeRow>,
        total: usize,
        euler: i64,
    },
    Cotangent {
        degree_count: i64,
        observed_degree: Option<i64>,
        matches_count: Option<bool>,
        matches_negated_count: Option<bool>,
        det_line: Option<LineEcho>,
    },
    FamilyScan {
        profiles: Vec<FamilyRow>,
        generic: BTreeMap<i64, usize>,
        jumps: Vec<String>,
    },
    Moments {
        expectation: String,
        oracle: String,
        agrees: bool,
    },
    Barcheck {
        weights: Vec<WeightRow>,
        counit_is_chain_map: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub degree: i64,
    pub dim: usize,
    pub kernel: usize,
    pub boundary: usize,
    pub cohomology: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineEcho {
    pub degree: i64,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationEcho {
    pub cutoffs: [u32; 3],
    pub profiles: [BTreeMap<i64, usize>; 3],
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub value: String,
    pub profile: BTreeMap<i64, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationEcho {
    pub check: String,
    pub witness: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightRow {
    pub weight: u32,
    pub table: BTreeMap<i64, usize>,
    pub total: usize,
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
    s.push('\n');
    s
}

fn profile_line(profile: &BTreeMap<i64, usize>) -> String {
    if profile.is_empty() {
        return "0".into();
    }
    profile
        .iter()
        .map(|(d, n)| format!("{n} in degree {d}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn render_text(report: &Report, elapsed: Duration) -> String {
    let mut out = String::new();
    let line = |out: &mut String, key: &str, value: &str| {
        let _ = writeln!(out, "{key}: {value}");
    };
    line(&mut out, "command", &report.command);
    if let Some(input) = &report.input {
        line(&mut out, "input", &input.path);
        line(&mut out, "sha256", &input.sha256);
    }
    for (flag, value) in &report.flags {
        line(&mut out, flag, value);
    }
    match &report.result {
        ResultBody::Check {
            valid,
            generators,
            degrees,
            parameters,
            nondegenerate,
            violations,
        } => {
            line(&mut out, "generators", &generators.to_string());
            line(&mut out, "degrees", &profile_line(degrees));
            if !parameters.is_empty() {
                line(&mut out, "parameters", &parameters.join(", "));
            }
            if let Some(n) = nondegenerate {
                line(&mut out, "nondegenerate", if *n { "yes" } else { "no" });
            }
            for v in violations {
                let _ = writeln!(out, "violation: {} at {} ({})", v.check, v.witness, v.detail);
            }
            line(&mut out, "verdict", if *valid { "valid" } else { "invalid" });
        }
        ResultBody::Quantize {
            cohomology,
            total,
            det_line,
            stabilization,
        } => {
            out.push_str("cohomology:\n");
            for row in cohomology {
                let _ = writeln!(
                    out,
                    "  degree {}: dim {} (space {}, kernel {}, boundaries {})",
                    row.degree, row.cohomology, row.dim, row.kernel, row.boundary
                );
            }
            line(&mut out, "total", &total.to_string());
            match det_line {
                Some(l) => line(
                    &mut out,
                    "det line",
                    &format!("invertible, degree {}, dimension {}", l.degree, l.dimension),
                ),
                None => line(
                    &mut out,
                    "det line",
                    &format!("not invertible (total dimension {total})"),
                ),
            }
            let c = stabilization.cutoffs;
            line(
                &mut out,
                "stabilization",
                &format!(
                    "{} at cutoffs {}, {}, {}",
                    if stabilization.stable { "stable" } else { "unstable" },
                    c[0],
                    c[1],
                    c[2]
                ),
            );
        }
        ResultBody::Dequantize {
            basis,
            differential,
            bracket,
        } => {
            line(&mut out, "basis", &basis.to_string());
            out.push_str("differential:\n");
            if differential.is_empty() {
                out.push_str("  (zero)\n");
            }
            for row in differential {
                let _ = writeln!(out, "  {} -> {}", row.key, row.value);
            }
            out.push_str("bracket:\n");
            if bracket.is_empty() {
                out.push_str("  (zero)\n");
            }
            for row in bracket {
                let _ = writeln!(out, "  {} -> {}", row.key, row.value);
            }
        }
        ResultBody::Cohomology { table, total, euler } => {
            out.push_str("cohomology:\n");
            for row in table {
                let _ = writeln!(
                    out,
                    "  degree {}: dim {} (space {}, kernel {}, boundaries {})",
                    row.degree, row.cohomology, row.dim, row.kernel, row.boundary
                );
            }
            line(&mut out, "total", &total.to_string());
            line(&mut out, "euler characteristic", &euler.to_string());
        }
        ResultBody::Cotangent {
            degree_count,
            observed_degree,
            matches_count,
            matches_negated_count,
            det_line,
        } => {
            line(&mut out, "degree count", &degree_count.to_string());
            match observed_degree {
                Some(d) => line(&mut out, "observed degree", &d.to_string()),
                None => line(&mut out, "observed degree", "none"),
            }
            if let Some(m) = matches_count {
                line(&mut out, "matches count", if *m { "yes" } else { "no" });
            }
            if let Some(m) = matches_negated_count {
                line(&mut out, "matches negated count", if *m { "yes" } else { "no" });
            }
            match det_line {
                Some(l) => line(
                    &mut out,
                    "det line",
                    &format!("invertible, degree {}, dimension {}", l.degree, l.dimension),
                ),
                None => line(&mut out, "det line", "not invertible"),
            }
        }
        ResultBody::FamilyScan {
            profiles,
            generic,
            jumps,
        } => {
            out.push_str("profiles:\n");
            for row in profiles {
                let _ = writeln!(out, "  at {}: {}", row.value, profile_line(&row.profile));
            }
            line(&mut out, "generic", &profile_line(generic));
            line(
                &mut out,
                "jumps",
                &if jumps.is_empty() {
                    "none".to_string()
                } else {
                    jumps.join(", ")
                },
            );
        }
        ResultBody::Moments {
            expectation,
            oracle,
            agrees,
        } => {
            line(&mut out, "expectation", expectation);
            line(&mut out, "matching oracle", oracle);
            line(&mut out, "agreement", if *agrees { "yes" } else { "no" });
        }
        ResultBody::Barcheck {
            weights,
            counit_is_chain_map,
        } => {
            out.push_str("weight cohomology:\n");
            for row in weights {
                let _ = writeln!(
                    out,
                    "  weight {}: total {} ({})",
                    row.weight,
                    row.total,
                    profile_line(&row.table)
                );
            }
            line(
                &mut out,
                "counit",
                if *counit_is_chain_map {
                    "exact chain map"
                } else {
                    "not a chain map"
                },
            );
        }
    }
    let _ = writeln!(out, "elapsed: {:.3}ms", elapsed.as_secs_f64() * 1e3);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        Report {
            command: "quantize".into(),
            input: Some(InputEcho {
                path: "fixtures/v0.json".into(),
                sha256: "00".into(),
            }),
            flags: BTreeMap::from([
                ("cutoff".to_string(), "8".to_string()),
                ("hbar".to_string(), "1".to_string()),
            ]),
            result: ResultBody::Quantize {
                cohomology: vec![DegreeRow {
                    degree: -1,
                    dim: 4,
                    kernel: 4,
                    boundary: 3,
                    cohomology: 1,
                }],
                total: 1,
                det_line: Some(LineEcho {
                    degree: -1,
                    dimension: 1,
                }),
                stabilization: StabilizationEcho {
                    cutoffs: [8, 9, 10],
                    profiles: [
                        BTreeMap::from([(-1, 1)]),
                        BTreeMap::from([(-1, 1)]),
                        BTreeMap::from([(-1, 1)]),
                    ],
                    stable: true,
                },
            },
        }
    }

    #[test]
    fn json_round_trips_losslessly() {
        let r = sample();
        let s = render_json(&r);
        let back: Report = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
        assert_eq!(render_json(&back), s);
    }

    #[test]
    fn json_omits_timing_and_text_carries_it() {
        let r = sample();
        let s = render_json(&r);
        assert!(!s.contains("elapsed"));
        let t = render_text(&r, Duration::from_millis(12));
        assert!(t.contains("elapsed"));
        assert!(t.contains("det line: invertible, degree -1, dimension 1"));
        assert!(t.contains("stable at cutoffs 8, 9, 10"));
    }

    #[test]
    fn negative_degree_keys_survive_the_json_map_encoding() {
        let r = sample();
        let s = render_json(&r);
        assert!(s.contains("\"-1\": 1"));
        let back: Report = serde_json::from_str(&s).unwrap();
        match back.result {
            ResultBody::Quantize { stabilization, .. } => {
                assert_eq!(stabilization.profiles[0].get(&-1), Some(&1));
            }
            _ => unreachable!(),
        }
    }
}
