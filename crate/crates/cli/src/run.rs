//! Command dispatch.  Every subcommand assembles one [`Report`] and the
//! caller renders it.  Exit codes: 0 for a completed report, 1 for
//! failed verdicts and domain errors, 2 for unreadable or malformed
//! input.  Diagnostics go to stderr, reports to stdout.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use bvq_core::{
    bar, cobar, cohomology, cotangent_quantize, counit_map, dequantize, expectation,
    family_module, family_scan, heisenberg, is_nondegenerate, polyvectors, quadratic_action,
    quantize, quantize_with, validate_quadratic, weight_cohomology, wick_oracle, CentralBinding,
    CohomologyReport, EnvelopedAlgebra, GradedComplex, QuadraticModule, Rational,
    ShiftedLieAlgebra, HBAR,
};

use crate::modfile::{self, BuildError, ModuleFile};
use crate::poly;
use crate::report::{
    DegreeRow, FamilyRow, InputEcho, LineEcho, Report, ResultBody, StabilizationEcho, TableRow,
    ViolationEcho, WeightRow,
};

#[derive(Parser)]
#[command(
    name = "bvq",
    version,
    about = "exact chain-level quantization of quadratic modules"
)]
pub struct Cli {
    /// Report rendering: text includes timing, json is byte stable
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
pub enum Command {
    /// Validate a module file: grading, square-zero, pairing axioms
    Check {
        file: PathBuf,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Quantize: stable cohomology, determinant line, certificate
    Quantize {
        file: PathBuf,
        /// Truncation weight
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        /// Value bound to the deformation parameter (default 1)
        #[arg(long, allow_hyphen_values = true)]
        hbar: Option<String>,
        /// Value bound to the adjoined central generator (default 1)
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Classical limit: the interpolated envelope bound at zero
    Dequantize {
        file: PathBuf,
        /// Truncation weight
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Exact cohomology of the complex described by the file
    Cohomology {
        file: PathBuf,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Quantize the shifted cotangent module of a complex
    Cotangent {
        file: PathBuf,
        /// Truncation weight
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Scan a one-parameter family and report cohomology jumps
    FamilyScan {
        file: PathBuf,
        /// Parameter values to scan, comma separated rationals
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Truncation weight
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
    /// Gaussian moment of a polynomial observable, with matching oracle
    Moments {
        /// Number of base variables x1..xn
        #[arg(long)]
        dim: usize,
        /// Action matrix: n*n comma separated rationals, or a file of them
        #[arg(long, allow_hyphen_values = true)]
        action: String,
        /// Polynomial in x1..xn
        #[arg(long, allow_hyphen_values = true)]
        observable: String,
        /// Truncation weight (default: observable weight bound + 1)
        #[arg(long)]
        cutoff: Option<u32>,
    },
    /// Bar/cobar weight cohomology and the evaluation counit
    Barcheck {
        file: PathBuf,
        /// Truncation weight
        #[arg(long, default_value_t = 8)]
        cutoff: u32,
        /// Substitute a declared parameter (repeatable)
        #[arg(long = "param", value_name = "NAME=VALUE")]
        param: Vec<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    /// Unusable invocation or input file; exit code 2.
    Usage(String),
    /// Sound input whose mathematics fails or exceeds resources; exit 1.
    Domain(String),
}

pub type CliResult<T> = Result<T, CliError>;

pub struct RunOutcome {
    pub report: Report,
    /// A completed report whose verdict is a failure still exits 1.
    pub failed: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn domain(e: bvq_core::Error) -> CliError {
    CliError::Domain(e.to_string())
}

fn build_err(e: BuildError) -> CliError {
    match e {
        BuildError::Schema(msg) => CliError::Usage(msg),
        BuildError::Math(err) => CliError::Domain(err.to_string()),
    }
}

pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match run(&cli) {
        Ok(outcome) => {
            let rendered = match cli.format {
                Format::Json => crate::report::render_json(&outcome.report),
                Format::Text => crate::report::render_text(&outcome.report, started.elapsed()),
            };
            print!("{rendered}");
            if outcome.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<RunOutcome> {
    match &cli.command {
        Command::Check { file, param } => cmd_check(file, param),
        Command::Quantize {
            file,
            cutoff,
            hbar,
            c,
            param,
        } => cmd_quantize(file, *cutoff, hbar.as_deref(), c.as_deref(), param),
        Command::Dequantize {
            file,
            cutoff,
            param,
        } => cmd_dequantize(file, *cutoff, param),
        Command::Cohomology { file, param } => cmd_cohomology(file, param),
        Command::Cotangent {
            file,
            cutoff,
            param,
        } => cmd_cotangent(file, *cutoff, param),
        Command::FamilyScan {
            file,
            values,
            cutoff,
            param,
        } => cmd_family_scan(file, values, *cutoff, param),
        Command::Moments {
            dim,
            action,
            observable,
            cutoff,
        } => cmd_moments(*dim, action, observable, *cutoff),
        Command::Barcheck {
            file,
            cutoff,
            param,
        } => cmd_barcheck(file, *cutoff, param),
    }
}

struct Loaded {
    mf: ModuleFile,
    input: InputEcho,
    params: Vec<(String, Rational)>,
    raw_params: Vec<String>,
}

fn load(file: &Path, param_flags: &[String]) -> CliResult<Loaded> {
    let (mf, bytes) = modfile::read_file(file).map_err(CliError::Usage)?;
    let input = InputEcho {
        path: file.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    };
    let mut params = Vec::new();
    for raw in param_flags {
        let (name, value) = raw
            .split_once('=')
            .ok_or_else(|| usage(format!("--param wants NAME=VALUE, got '{raw}'")))?;
        if !mf.parameters.iter().any(|p| p == name) {
            return Err(usage(format!(
                "parameter '{name}' is not declared by the input file"
            )));
        }
        let v = poly::parse_rational(value).map_err(|e| usage(format!("--param {name}: {e}")))?;
        params.push((name.to_string(), v));
    }
    Ok(Loaded {
        mf,
        input,
        params,
        raw_params: param_flags.to_vec(),
    })
}

fn module_from(loaded: &Loaded) -> CliResult<QuadraticModule> {
    let mut q = modfile::build_module(&loaded.mf).map_err(build_err)?;
    for (name, v) in &loaded.params {
        q = q.substitute(name, v).map_err(domain)?;
    }
    Ok(q)
}

fn complex_from(loaded: &Loaded) -> CliResult<GradedComplex> {
    let mut c = modfile::build_complex(&loaded.mf).map_err(build_err)?;
    for (name, v) in &loaded.params {
        c = c.substitute(name, v).map_err(domain)?;
    }
    Ok(c)
}

fn flag_map(loaded: Option<&Loaded>, pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut flags: BTreeMap<String, String> = pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    if let Some(l) = loaded {
        if !l.raw_params.is_empty() {
            flags.insert("param".into(), l.raw_params.join(","));
        }
    }
    flags
}

fn generator_degrees(mf: &ModuleFile) -> Vec<i64> {
    mf.generators.iter().map(|g| g.degree).collect()
}

fn saturating_binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Count of weight-graded basis monomials through the cutoff: even
/// generators repeat freely, odd generators appear at most once.
pub fn basis_estimate(degrees: &[i64], cutoff: u32) -> u128 {
    let evens = degrees.iter().filter(|d| d.rem_euclid(2) == 0).count() as u128;
    let odds = degrees.len() as u128 - evens;
    let mut total: u128 = 0;
    for t in 0..=cutoff as u128 {
        for j in 0..=t.min(odds) {
            let free = t - j;
            let even_ways = if evens == 0 {
                u128::from(free == 0)
            } else {
                saturating_binom(free + evens - 1, evens - 1)
            };
            total = total.saturating_add(saturating_binom(odds, j).saturating_mul(even_ways));
        }
    }
    total
}

/// Optional resource ceiling.  When BVQ_MAX_BASIS is set, commands that
/// build truncated algebras refuse estimates above it before doing any
/// heavy work.  For bar/cobar commands the estimate undercounts (words
/// outnumber monomials) and serves as a coarse guard only.
fn enforce_basis_ceiling(degrees: &[i64], cutoff: u32) -> CliResult<()> {
    let Ok(raw) = std::env::var("BVQ_MAX_BASIS") else {
        return Ok(());
    };
    let limit: u128 = raw.trim().parse().map_err(|_| {
        usage(format!(
            "BVQ_MAX_BASIS must be a nonnegative integer, got '{raw}'"
        ))
    })?;
    let estimate = basis_estimate(degrees, cutoff);
    if estimate > limit {
        return Err(CliError::Domain(format!(
            "estimated basis size {estimate} exceeds BVQ_MAX_BASIS={limit}; raise the ceiling or lower the cutoff"
        )));
    }
    Ok(())
}

fn degree_rows(rep: &CohomologyReport) -> Vec<DegreeRow> {
    rep.degrees
        .iter()
        .map(|s| DegreeRow {
            degree: s.degree,
            dim: s.space_dim,
            kernel: s.kernel_dim,
            boundary: s.boundary_dim,
            cohomology: s.cohomology_dim,
        })
        .collect()
}

fn cmd_check(file: &Path, param_flags: &[String]) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let mut degrees: BTreeMap<i64, usize> = BTreeMap::new();
    for g in &loaded.mf.generators {
        *degrees.entry(g.degree).or_insert(0) += 1;
    }

    let mut violations = Vec::new();
    let mut nondegenerate = None;
    match modfile::build_module(&loaded.mf).map_err(build_err) {
        Ok(mut q) => {
            for (name, v) in &loaded.params {
                q = q.substitute(name, v).map_err(domain)?;
            }
            let vr = validate_quadratic(&q);
            violations = vr
                .violations
                .into_iter()
                .map(|v| ViolationEcho {
                    check: v.check.to_string(),
                    witness: v.witness,
                    detail: v.detail,
                })
                .collect();
            nondegenerate = is_nondegenerate(&q).ok();
        }
        Err(CliError::Usage(msg)) => return Err(CliError::Usage(msg)),
        Err(CliError::Domain(msg)) => violations.push(ViolationEcho {
            check: "structure".into(),
            witness: String::new(),
            detail: msg,
        }),
    }

    let valid = violations.is_empty();
    Ok(RunOutcome {
        report: Report {
            command: "check".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(Some(&loaded), &[]),
            result: ResultBody::Check {
                valid,
                generators: loaded.mf.generators.len(),
                degrees,
                parameters: loaded.mf.parameters.clone(),
                nondegenerate,
                violations,
            },
        },
        failed: !valid,
    })
}

fn cmd_quantize(
    file: &Path,
    cutoff: u32,
    hbar: Option<&str>,
    c: Option<&str>,
    param_flags: &[String],
) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let q = module_from(&loaded)?;
    let mut degrees = generator_degrees(&loaded.mf);
    degrees.push(0);
    enforce_basis_ceiling(&degrees, cutoff + 4)?;

    let h = match hbar {
        Some(s) => poly::parse_rational(s).map_err(|e| usage(format!("--hbar: {e}")))?,
        None => bvq_core::rational_int(1),
    };
    let cval = match c {
        Some(s) => poly::parse_rational(s).map_err(|e| usage(format!("--c: {e}")))?,
        None => bvq_core::rational_int(1),
    };
    let result = if hbar.is_none() && c.is_none() {
        quantize(&q, cutoff).map_err(domain)?
    } else {
        let g = heisenberg(&q).map_err(domain)?;
        let central = g.central.expect("pairing input always adjoins a central generator");
        let name = g.space().name(central).to_string();
        let binding = CentralBinding::parameter(HBAR, h.clone()).and_generator(&name, cval.clone());
        quantize_with(&q, cutoff, &binding).map_err(domain)?
    };

    let total = result.cohomology.total_dimension();
    Ok(RunOutcome {
        report: Report {
            command: "quantize".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(
                Some(&loaded),
                &[
                    ("cutoff", cutoff.to_string()),
                    ("hbar", h.to_string()),
                    ("c", cval.to_string()),
                ],
            ),
            result: ResultBody::Quantize {
                cohomology: degree_rows(&result.cohomology),
                total,
                det_line: result.det_line.map(|(degree, dimension)| LineEcho {
                    degree,
                    dimension,
                }),
                stabilization: StabilizationEcho {
                    cutoffs: result.stabilization.cutoffs,
                    profiles: result.stabilization.profiles.clone(),
                    stable: result.stabilization.stable,
                },
            },
        },
        failed: false,
    })
}

fn operator_rows(env: &EnvelopedAlgebra, op: &bvq_core::Operator) -> Vec<TableRow> {
    let space = env.space();
    op.corestrictions()
        .map(|(m, e)| TableRow {
            key: m.name(space),
            value: e.format(space),
        })
        .collect()
}

fn cmd_dequantize(file: &Path, cutoff: u32, param_flags: &[String]) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let q = module_from(&loaded)?;
    let mut degrees = generator_degrees(&loaded.mf);
    degrees.push(0);
    enforce_basis_ceiling(&degrees, cutoff)?;

    let env = dequantize(&q, cutoff).map_err(domain)?;
    let differential = operator_rows(&env, &env.differential);
    let bracket = env
        .bracket
        .as_ref()
        .map(|b| operator_rows(&env, b))
        .unwrap_or_default();
    Ok(RunOutcome {
        report: Report {
            command: "dequantize".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(Some(&loaded), &[("cutoff", cutoff.to_string())]),
            result: ResultBody::Dequantize {
                basis: env.algebra.basis_len(),
                differential,
                bracket,
            },
        },
        failed: false,
    })
}

fn cmd_cohomology(file: &Path, param_flags: &[String]) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let complex = complex_from(&loaded)?;
    let rep = cohomology(&complex, None).map_err(domain)?;
    Ok(RunOutcome {
        report: Report {
            command: "cohomology".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(Some(&loaded), &[]),
            result: ResultBody::Cohomology {
                table: degree_rows(&rep),
                total: rep.total_dimension(),
                euler: rep.euler_characteristic(),
            },
        },
        failed: false,
    })
}

fn cmd_cotangent(file: &Path, cutoff: u32, param_flags: &[String]) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    if !loaded.mf.pairing.is_empty() {
        return Err(usage(
            "cotangent input describes a bare complex; its pairing is generated, remove the pairing section",
        ));
    }
    let complex = complex_from(&loaded)?;
    let mut degrees = generator_degrees(&loaded.mf);
    let duals: Vec<i64> = degrees.iter().map(|d| -1 - d).collect();
    degrees.extend(duals);
    degrees.push(0);
    enforce_basis_ceiling(&degrees, cutoff + 4)?;

    let ct = cotangent_quantize(&complex, cutoff).map_err(domain)?;
    Ok(RunOutcome {
        report: Report {
            command: "cotangent".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(Some(&loaded), &[("cutoff", cutoff.to_string())]),
            result: ResultBody::Cotangent {
                degree_count: ct.degree_count,
                observed_degree: ct.observed_degree,
                matches_count: ct.matches_count(),
                matches_negated_count: ct.matches_negated_count(),
                det_line: ct.result.det_line.map(|(degree, dimension)| LineEcho {
                    degree,
                    dimension,
                }),
            },
        },
        failed: false,
    })
}

fn cmd_family_scan(
    file: &Path,
    values: &str,
    cutoff: u32,
    param_flags: &[String],
) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let q = module_from(&loaded)?;
    let substituted: BTreeSet<&str> = loaded.params.iter().map(|(n, _)| n.as_str()).collect();
    let free: Vec<&String> = loaded
        .mf
        .parameters
        .iter()
        .filter(|p| !substituted.contains(p.as_str()))
        .collect();
    let name = match free.as_slice() {
        [one] => (*one).clone(),
        [] => return Err(usage("family-scan needs one free parameter, none remain")),
        many => {
            return Err(usage(format!(
                "family-scan needs exactly one free parameter, found {}",
                many.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            )))
        }
    };
    let parsed: Vec<Rational> = values
        .split(',')
        .map(|v| poly::parse_rational(v.trim()).map_err(|e| usage(format!("--values: {e}"))))
        .collect::<CliResult<_>>()?;
    let mut degrees = generator_degrees(&loaded.mf);
    degrees.push(0);
    enforce_basis_ceiling(&degrees, cutoff + 4)?;

    let fam = family_module(q, &name).map_err(domain)?;
    let scan = family_scan(&fam, &parsed, cutoff).map_err(domain)?;
    Ok(RunOutcome {
        report: Report {
            command: "family-scan".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(
                Some(&loaded),
                &[
                    ("cutoff", cutoff.to_string()),
                    ("values", values.to_string()),
                ],
            ),
            result: ResultBody::FamilyScan {
                profiles: scan
                    .profiles
                    .iter()
                    .map(|(v, profile)| FamilyRow {
                        value: v.to_string(),
                        profile: profile.clone(),
                    })
                    .collect(),
                generic: scan.generic.clone(),
                jumps: scan.jumps.iter().map(|v| v.to_string()).collect(),
            },
        },
        failed: false,
    })
}

fn action_entries(action: &str) -> CliResult<Vec<Rational>> {
    let text = if Path::new(action).exists() {
        std::fs::read_to_string(action)
            .map_err(|e| usage(format!("cannot read action file {action}: {e}")))?
    } else {
        action.to_string()
    };
    text.replace(',', " ")
        .split_whitespace()
        .map(|v| poly::parse_rational(v).map_err(|e| usage(format!("--action: {e}"))))
        .collect()
}

fn cmd_moments(
    dim: usize,
    action: &str,
    observable: &str,
    cutoff: Option<u32>,
) -> CliResult<RunOutcome> {
    if dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    let entries = action_entries(action)?;
    if entries.len() != dim * dim {
        return Err(usage(format!(
            "--action needs {} entries for --dim {dim}, got {}",
            dim * dim,
            entries.len()
        )));
    }
    let matrix: Vec<Vec<Rational>> = entries.chunks(dim).map(|row| row.to_vec()).collect();
    let act = quadratic_action(matrix).map_err(domain)?;

    let ast = poly::parse(observable).map_err(|e| usage(format!("--observable: {e}")))?;
    let bound = poly::weight_bound(&ast);
    let effective = cutoff.unwrap_or(bound + 1);
    if effective < bound {
        return Err(usage(format!(
            "--cutoff {effective} would truncate an observable of weight up to {bound}"
        )));
    }
    let mut degrees = vec![0; dim];
    degrees.extend(vec![-1; dim]);
    enforce_basis_ceiling(&degrees, effective)?;

    let pv = polyvectors(dim, effective).map_err(domain)?;
    let obs = poly::eval_element(&ast, &pv).map_err(|e| usage(format!("--observable: {e}")))?;
    let e = expectation(&pv, &act, &obs).map_err(domain)?;
    let w = wick_oracle(&pv, &act, &obs).map_err(domain)?;
    let agrees = e == w;
    Ok(RunOutcome {
        report: Report {
            command: "moments".into(),
            input: None,
            flags: flag_map(
                None,
                &[
                    ("dim", dim.to_string()),
                    ("action", action.to_string()),
                    ("observable", observable.to_string()),
                    ("cutoff", effective.to_string()),
                ],
            ),
            result: ResultBody::Moments {
                expectation: e.to_string(),
                oracle: w.to_string(),
                agrees,
            },
        },
        failed: !agrees,
    })
}

fn cmd_barcheck(file: &Path, cutoff: u32, param_flags: &[String]) -> CliResult<RunOutcome> {
    let loaded = load(file, param_flags)?;
    let g = if loaded.mf.pairing.is_empty() {
        ShiftedLieAlgebra::abelian(complex_from(&loaded)?)
    } else {
        heisenberg(&module_from(&loaded)?).map_err(domain)?
    };
    let mut degrees = generator_degrees(&loaded.mf);
    if !loaded.mf.pairing.is_empty() {
        degrees.push(0);
    }
    enforce_basis_ceiling(&degrees, cutoff)?;

    let b = bar(&g, cutoff).map_err(domain)?;
    let cb = cobar(&b, cutoff).map_err(domain)?;
    let mut weights = Vec::new();
    for w in 1..=cutoff {
        let rep = weight_cohomology(&cb, w).map_err(domain)?;
        weights.push(WeightRow {
            weight: w,
            table: rep.nonzero(),
            total: rep.total_dimension(),
        });
    }
    let counit_is_chain_map = match counit_map(&g, cutoff) {
        Ok(_) => true,
        Err(bvq_core::Error::InvalidMorphism { .. }) => false,
        Err(e) => return Err(domain(e)),
    };
    Ok(RunOutcome {
        report: Report {
            command: "barcheck".into(),
            input: Some(loaded.input.clone()),
            flags: flag_map(Some(&loaded), &[("cutoff", cutoff.to_string())]),
            result: ResultBody::Barcheck {
                weights,
                counit_is_chain_map,
            },
        },
        failed: !counit_is_chain_map,
    })
}
