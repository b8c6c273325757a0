//! Report builders behind the `facmech` command line.
//!
//! Every function returns the full report text so the binary only parses
//! arguments and maps errors to exit codes. Numbers are printed with
//! [`format::num`]; no arithmetic happens here beyond formatting.

pub mod bench;
pub mod format;
pub mod instance;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::axioms::{
    check_anonymity, check_pareto, check_strategy_proofness, verify_certificate, Certificate,
    SearchBudget,
};
use crate::error::{Error, Result};
use crate::mechanisms::{run_mechanism, MechanismDescriptor, MechanismKind};
use crate::scenarios::{list_scenarios, run_all, run_scenario, ScenarioReport};
use crate::welfare::{evaluate, optimal_welfare, RatioReport, WelfareObjective};

use bench::BenchSummary;
use format::{num, points};
use instance::Instance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceCap { .. } => EXIT_RESOURCE,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// `key: value` lines grouped in sections.
    #[default]
    Text,
    /// Tab-separated rows with a header line.
    Table,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "table" => Ok(OutputFormat::Table),
            other => Err(Error::invalid(format!(
                "unknown format `{other}` (expected `text` or `table`)"
            ))),
        }
    }
}

/// Ordered `(key, value)` rows rendered in either format.
struct Rows {
    format: OutputFormat,
    out: String,
}

impl Rows {
    fn new(format: OutputFormat) -> Self {
        let out = match format {
            OutputFormat::Text => String::new(),
            OutputFormat::Table => "key\tvalue\n".to_string(),
        };
        Rows { format, out }
    }

    fn section(&mut self, name: &str) {
        if self.format == OutputFormat::Text {
            let _ = writeln!(self.out, "[{name}]");
        }
    }

    fn row(&mut self, key: &str, value: impl AsRef<str>) {
        let sep = match self.format {
            OutputFormat::Text => ": ",
            OutputFormat::Table => "\t",
        };
        let _ = writeln!(self.out, "{key}{sep}{}", value.as_ref());
    }
}

fn need_mechanism(inst: &Instance) -> Result<&MechanismDescriptor> {
    inst.mechanism.as_ref().ok_or_else(|| {
        Error::invalid("no mechanism given (set it in the file or pass --mechanism)")
    })
}

fn describe(desc: &MechanismDescriptor) -> String {
    serde_json::to_string(desc).expect("descriptor serializes")
}

/// Facility locations, assignment, and total and maximum distance.
pub fn run_report(inst: &Instance, format: OutputFormat) -> Result<String> {
    let desc = need_mechanism(inst)?;
    let s = run_mechanism(desc, &inst.profile, &inst.spec)?;
    let total = evaluate(&inst.profile, &s, WelfareObjective::Total)?;
    let max = evaluate(&inst.profile, &s, WelfareObjective::Max)?;
    let mut r = Rows::new(format);
    r.row("mechanism", desc.kind.as_str());
    r.row("metric", inst.profile.metric().as_str());
    r.row("agents", inst.profile.len().to_string());
    r.row("facilities", points(&s.locations));
    r.row(
        "assignment",
        s.assignment
            .iter()
            .map(|j| j.to_string())
            .collect::<Vec<_>>()
            .join(" "),
    );
    r.row("total_distance", num(total));
    r.row("max_distance", num(max));
    Ok(r.out)
}

/// Runs all three checkers. The flag is true when any certificate was found.
pub fn check_report(
    inst: &Instance,
    budget: &SearchBudget,
    format: OutputFormat,
) -> Result<(String, bool)> {
    let desc = need_mechanism(inst)?;
    budget.validate()?;
    let solution = run_mechanism(desc, &inst.profile, &inst.spec)?;
    let found = [
        (
            "anonymity",
            check_anonymity(desc, &inst.profile, &inst.spec)?,
        ),
        ("pareto", check_pareto(&inst.profile, &solution, budget)?),
        (
            "strategy_proofness",
            check_strategy_proofness(desc, &inst.profile, &inst.spec, budget)?,
        ),
    ];
    let mut r = Rows::new(format);
    r.section("instance");
    r.row("mechanism", describe(desc));
    r.row("facilities", points(&solution.locations));
    r.row("grid_resolution", num(budget.grid_resolution));
    r.row("bounding_box_pad", num(budget.bounding_box_pad));
    r.row("random_restarts", budget.random_restarts.to_string());
    r.row("seed", budget.seed.to_string());
    let mut any = false;
    for (axiom, cert) in &found {
        r.section(axiom);
        match cert {
            None => r.row(&format!("{axiom}.result"), "none"),
            Some(c) => {
                any = true;
                r.row(&format!("{axiom}.result"), "violation");
                r.row(&format!("{axiom}.improvement"), num(c.improvement));
                r.row(
                    &format!("{axiom}.certificate"),
                    serde_json::to_string(c).expect("certificate serializes"),
                );
            }
        }
    }
    Ok((r.out, any))
}

/// Optimal welfare and, when the instance names a mechanism, its ratio.
pub fn oracle_report(
    inst: &Instance,
    objective: WelfareObjective,
    format: OutputFormat,
) -> Result<String> {
    let (opt, s) = optimal_welfare(&inst.profile, &inst.spec, objective)?;
    let mut r = Rows::new(format);
    r.row("objective", objective.as_str());
    r.row("metric", inst.profile.metric().as_str());
    r.row("optimal_welfare", num(opt));
    r.row("optimal_facilities", points(&s.locations));
    if let Some(desc) = &inst.mechanism {
        let m = run_mechanism(desc, &inst.profile, &inst.spec)?;
        let w = evaluate(&inst.profile, &m, objective)?;
        let report = RatioReport::new(w, opt);
        r.row("mechanism", desc.kind.as_str());
        r.row("mechanism_welfare", num(w));
        r.row("ratio", num(report.ratio.value()));
    }
    Ok(r.out)
}

/// One scenario or `all`. The flag is true when every expectation passed.
pub fn scenario_report(name: &str, format: OutputFormat) -> Result<(String, bool)> {
    let reports = if name == "all" {
        run_all()?
    } else {
        vec![run_scenario(name)?]
    };
    let mut out = String::new();
    if format == OutputFormat::Table {
        out.push_str("scenario\tquantity\tstatus\texpected\tmeasured\n");
    }
    for rep in &reports {
        write_scenario(&mut out, rep, format);
    }
    let passed = reports.iter().all(ScenarioReport::passed);
    if format == OutputFormat::Text {
        let n_pass = reports.iter().filter(|r| r.passed()).count();
        let _ = writeln!(out, "summary: {n_pass}/{} scenarios passed", reports.len());
    }
    Ok((out, passed))
}

fn write_scenario(out: &mut String, rep: &ScenarioReport, format: OutputFormat) {
    let status = |ok: bool| if ok { "pass" } else { "FAIL" };
    if format == OutputFormat::Text {
        let _ = writeln!(out, "scenario {}: {}", rep.name, status(rep.passed()));
        let _ = writeln!(out, "  anchor: {}", rep.anchor);
    }
    for o in &rep.outcomes {
        let measured = match (&o.measured, &o.error) {
            (Some(m), _) => m.to_string(),
            (None, Some(e)) => format!("error: {e}"),
            (None, None) => "-".into(),
        };
        match format {
            OutputFormat::Text => {
                let _ = writeln!(
                    out,
                    "  {} {}: expected {}, measured {}",
                    status(o.passed),
                    o.quantity,
                    o.expected,
                    measured
                );
            }
            OutputFormat::Table => {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}",
                    rep.name,
                    o.quantity,
                    status(o.passed),
                    o.expected,
                    measured
                );
            }
        }
    }
}

pub fn list_report(format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Table {
        out.push_str("name\tanchor\n");
    }
    for (name, anchor) in list_scenarios() {
        let sep = if format == OutputFormat::Table {
            "\t"
        } else {
            "  "
        };
        let _ = writeln!(out, "{name}{sep}{anchor}");
    }
    out
}

pub fn bench_report(s: &BenchSummary, format: OutputFormat) -> String {
    let c = &s.config;
    let mut out = String::new();
    let parity = c.parity.map_or("any", |p| match p {
        bench::Parity::Odd => "odd",
        bench::Parity::Even => "even",
    });
    let _ = writeln!(out, "# mechanism: {}", describe(&s.mechanism));
    let _ = writeln!(
        out,
        "# sampling: uniform on [0, {}]^{}, n in [{}, {}] ({parity}), seed {}",
        num(c.box_side),
        c.dim,
        c.n_min,
        c.n_max,
        c.seed
    );
    let _ = writeln!(
        out,
        "# objective: {}, metric: {}, facilities: {}",
        c.objective.as_str(),
        c.metric.as_str(),
        c.facilities
    );
    let skipped: usize = s.skipped.values().sum();
    let worst = s.worst_trial.map_or("-".to_string(), |t| t.to_string());
    match format {
        OutputFormat::Text => {
            let _ = writeln!(out, "trials: {}", c.trials);
            let _ = writeln!(out, "evaluated: {}", s.evaluated);
            let _ = writeln!(out, "skipped: {skipped}");
            for (why, k) in &s.skipped {
                let _ = writeln!(out, "skipped.{}: {k}", why.replace(' ', "_"));
            }
            let _ = writeln!(out, "infinite: {}", s.infinite);
            let _ = writeln!(out, "max_ratio: {}", num(s.max_ratio));
            let _ = writeln!(out, "mean_ratio: {}", num(s.mean_ratio));
            let _ = writeln!(out, "worst_trial: {worst}");
            for (n, e) in &s.per_n {
                let _ = writeln!(
                    out,
                    "n={n}: trials {} max {} mean {}",
                    e.trials,
                    num(e.max_ratio),
                    num(e.mean_ratio)
                );
            }
            for b in &s.histogram {
                let _ = writeln!(out, "bin [{}, {}]: {}", num(b.low), num(b.high), b.count);
            }
        }
        OutputFormat::Table => {
            let _ = writeln!(out, "n\ttrials\tmax_ratio\tmean_ratio");
            for (n, e) in &s.per_n {
                let _ = writeln!(
                    out,
                    "{n}\t{}\t{}\t{}",
                    e.trials,
                    num(e.max_ratio),
                    num(e.mean_ratio)
                );
            }
            let _ = writeln!(
                out,
                "all\t{}\t{}\t{}",
                s.evaluated - s.infinite,
                num(s.max_ratio),
                num(s.mean_ratio)
            );
            let _ = writeln!(
                out,
                "# skipped {skipped}, infinite {}, worst trial {worst}",
                s.infinite
            );
            let _ = writeln!(out, "bin_low\tbin_high\tcount");
            for b in &s.histogram {
                let _ = writeln!(out, "{}\t{}\t{}", num(b.low), num(b.high), b.count);
            }
        }
    }
    out
}

/// Replays a certificate serialized by `check`.
pub fn verify_report(json: &str) -> Result<(String, bool)> {
    let cert: Certificate = serde_json::from_str(json.trim())
        .map_err(|e| Error::invalid(format!("certificate: {e}")))?;
    let ok = verify_certificate(&cert)?;
    let kind = serde_json::to_value(cert.kind).expect("kind serializes");
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", kind.as_str().unwrap_or("?"));
    let _ = writeln!(out, "improvement: {}", num(cert.improvement));
    let _ = writeln!(out, "verified: {ok}");
    Ok((out, ok))
}

/// Mechanism section for a `--mechanism` override; rejects unknown kinds.
pub fn mechanism_section(kind: &str) -> Result<instance::MechanismSection> {
    kind.parse::<MechanismKind>()?;
    Ok(instance::MechanismSection::new(kind))
}
