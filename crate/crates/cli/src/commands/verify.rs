use macrodim::analysis::reversibility::StateChain;
use macrodim::analysis::{reversibility_check, reversibility_check_chain, RateChain, ReversibilityReport, Verdict};
use macrodim::grammar::{validate_local, validate_locally_bounded, Boundedness, BoundednessReport, Grammar, LocalityReport};
use macrodim::graph::ball;
use serde::Serialize;

use super::{window, Outcome};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    /// `grammar` or the chain file name.
    pub source: String,
    pub states: Vec<StateSummary>,
    pub report: ReversibilityReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub locality: LocalityReport,
    pub boundedness: BoundednessReport,
    pub grammar_chain: Option<ChainReport>,
    pub chain: Option<ChainReport>,
    pub hard_failures: Vec<String>,
}

#[derive(Serialize)]
struct CsvRow {
    check: String,
    subject: String,
    verdict: String,
    detail: String,
}

fn grammar_chain(cfg: &ExperimentConfig, grammar: &Grammar) -> Result<ChainReport, CliError> {
    let win = window(cfg, grammar, Some(cfg.seed_radius.max(1) + 1))?;
    let seed = ball(&win.graph, win.origin, cfg.seed_radius)?;
    let (StateChain { states, .. }, report) = reversibility_check(grammar, &[seed], cfg.state_cap, cfg.n0)?;
    Ok(ChainReport {
        source: "grammar".into(),
        states: states
            .iter()
            .map(|g| StateSummary {
                vertices: g.vertex_count(),
                edges: g.edge_count(),
            })
            .collect(),
        report,
    })
}

fn file_chain(cfg: &ExperimentConfig) -> Result<Option<ChainReport>, CliError> {
    let Some(path) = &cfg.chain else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read chain {}: {e}", path.display())))?;
    let chain = RateChain::parse(&text)?;
    Ok(Some(ChainReport {
        source: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        states: Vec::new(),
        report: reversibility_check_chain(&chain, cfg.n0),
    }))
}

fn describe(r: &ReversibilityReport) -> String {
    match r.verdict {
        Verdict::Reversible => format!("{} cycles of length <= {} balanced", r.cycles_checked, r.n0),
        Verdict::Violated => {
            let w = &r.violations[0];
            format!("cycle {:?} has product {:.6}", w.cycle, w.product)
        }
        Verdict::NotReversible => {
            let (i, j) = r.one_way.unwrap_or_default();
            format!("rate {i} -> {j} has no reverse")
        }
    }
}

fn chain_rows(c: &ChainReport) -> CsvRow {
    CsvRow {
        check: "reversibility".into(),
        subject: c.source.clone(),
        verdict: format!("{:?}", c.report.verdict).to_lowercase(),
        detail: describe(&c.report),
    }
}

pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grammar = cfg.load_grammar()?;
    let locality = validate_local(&grammar);
    let boundedness = validate_locally_bounded(&grammar);
    let mut hard_failures = Vec::new();
    if !locality.is_local() {
        hard_failures.push(format!("not local: {}", locality.offending.join(", ")));
    }
    if boundedness.verdict == Boundedness::Fail {
        hard_failures.push("breaks the degree cap".into());
    }
    let grammar_chain = if grammar.rules.is_empty() {
        None
    } else {
        match grammar_chain(cfg, &grammar) {
            Ok(c) => Some(c),
            Err(CliError::Validation(reason)) => {
                hard_failures.push(format!("grammar: {reason}"));
                None
            }
            Err(e) => return Err(e),
        }
    };
    let chain = file_chain(cfg)?;
    for c in grammar_chain.iter().chain(&chain) {
        if c.report.verdict != Verdict::Reversible {
            hard_failures.push(format!("{}: {}", c.source, describe(&c.report)));
        }
    }
    let report = VerifyReport {
        locality,
        boundedness,
        grammar_chain,
        chain,
        hard_failures,
    };
    let mut table = vec![CsvRow {
        check: "locality".into(),
        subject: "grammar".into(),
        verdict: if report.locality.is_local() { "pass" } else { "fail" }.into(),
        detail: report.locality.offending.join(" "),
    }];
    table.extend(report.boundedness.rules.iter().map(|r| CsvRow {
        check: "boundedness".into(),
        subject: r.rule.clone(),
        verdict: format!("{:?}", r.verdict).to_lowercase(),
        detail: format!("worst degree {} best degree {}", r.worst_degree, r.best_degree),
    }));
    table.extend(report.grammar_chain.iter().chain(&report.chain).map(chain_rows));
    let mut sink = Sink::new(cfg, "verify")?;
    sink.emit(&report, &table)?;
    let passed = report.hard_failures.is_empty();
    Ok(Outcome {
        written: sink.written,
        passed,
        message: if passed {
            "all checks passed".into()
        } else {
            report.hard_failures.join("; ")
        },
    })
}

#[derive(Serialize)]
struct LinkRow {
    i: usize,
    j: usize,
    ratio: f64,
}

pub fn cmd_reversibility(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let result = match file_chain(cfg)? {
        Some(c) => c,
        None => grammar_chain(cfg, &cfg.load_grammar()?)?,
    };
    let table: Vec<LinkRow> = result.report.ratios.iter().map(|&(i, j, ratio)| LinkRow { i, j, ratio }).collect();
    let mut sink = Sink::new(cfg, "reversibility")?;
    sink.emit(&result, &table)?;
    Ok(Outcome {
        written: sink.written,
        passed: result.report.verdict == Verdict::Reversible,
        message: format!("{:?}: {}", result.report.verdict, describe(&result.report)),
    })
}
