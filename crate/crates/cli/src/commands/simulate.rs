use macrodim::analysis::stats::Moments;
use macrodim::simulator::Prepared;
use serde::Serialize;

use super::{sim_config, window, MomentSummary, Outcome, WindowSummary};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct ReplicaSummary {
    pub replica: u64,
    pub seed: u64,
    pub events: u64,
    pub touched: usize,
    pub final_vertices: usize,
    pub final_edges: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub window: WindowSummary,
    pub initial_embeddings: usize,
    pub event_count: MomentSummary,
    pub touched: MomentSummary,
    pub replicas: Vec<ReplicaSummary>,
}

pub fn cmd_simulate(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grammar = cfg.load_grammar()?;
    let win = window(cfg, &grammar, None)?;
    let mut sim = sim_config(cfg, &grammar, cfg.epsilon);
    sim.record_events = cfg.event_logs;
    let prepared = Prepared::new(&win, &sim)?;
    let mut sink = Sink::new(cfg, "simulate")?;
    if cfg.event_logs {
        std::fs::create_dir_all(sink.path("events"))?;
    }
    let log_dir = sink.path("events");
    let rows = prepared.run_replicas(&sim, cfg.replicas, |i, t| -> Result<ReplicaSummary, CliError> {
        if cfg.event_logs {
            std::fs::write(log_dir.join(format!("replica-{i:06}.log")), t.event_log(&grammar))?;
        }
        let last = t.final_graph.as_ref().expect("final graph kept");
        Ok(ReplicaSummary {
            replica: i,
            seed: t.seed,
            events: t.event_count,
            touched: t.touched.len(),
            final_vertices: last.vertex_count(),
            final_edges: last.edge_count(),
        })
    })?;
    let rows: Vec<ReplicaSummary> = rows.into_iter().collect::<Result<_, _>>()?;
    let (mut events, mut touched) = (Moments::default(), Moments::default());
    for r in &rows {
        events.push(r.events as f64);
        touched.push(r.touched as f64);
    }
    let report = SimulateReport {
        window: (&win).into(),
        initial_embeddings: prepared.initial_embeddings(),
        event_count: (&events).into(),
        touched: (&touched).into(),
        replicas: rows,
    };
    sink.emit(&report, &report.replicas)?;
    if cfg.event_logs {
        sink.written.push(log_dir);
    }
    Ok(Outcome {
        written: sink.written,
        passed: true,
        message: format!(
            "{} replicas, mean {:.3} events (se {:.3})",
            cfg.replicas,
            report.event_count.mean,
            report.event_count.std_error
        ),
    })
}
