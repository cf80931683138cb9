//! File export of simulation artifacts: trace CSV, summary text and one SVG
//! line chart per recorded series. All writers are byte-deterministic for a
//! given trace.

use std::fs;
use std::io;
use std::path::Path;

use adapt_core::sim::{render_summary, render_trace_csv, SummaryStats, Trace};

use crate::plot::line_chart;
use crate::scenario::Scenario;

pub fn export_csv(trace: &Trace, path: &Path) -> io::Result<()> {
    fs::write(path, render_trace_csv(trace))
}

pub fn export_summary(stats: &SummaryStats, path: &Path) -> io::Result<()> {
    fs::write(path, render_summary(stats))
}

/// Every numeric series of the trace, in CSV column order:
/// `(column name, unit label, values)`.
pub fn trace_series(trace: &Trace, scenario: &Scenario) -> Vec<(String, String, Vec<f64>)> {
    let mut series: Vec<(String, String, Vec<f64>)> = Vec::new();
    let sd_unit = String::from("satisfaction degree");
    let column = |name: String, unit: String, pick: &dyn Fn(usize) -> f64| {
        let values = (0..trace.records.len()).map(pick).collect::<Vec<_>>();
        (name, unit, values)
    };

    for (i, id) in trace.context_ids.iter().enumerate() {
        series.push(column(
            format!("ac_{id}"),
            scenario.unit_of(id).to_string(),
            &|t| trace.records[t].context[i].1,
        ));
    }
    for (i, id) in trace.softgoal_ids.iter().enumerate() {
        series.push(column(format!("sd_desired_{id}"), sd_unit.clone(), &|t| {
            trace.records[t].desired_sd[i].1
        }));
    }
    for (i, id) in trace.task_ids.iter().enumerate() {
        series.push(column(
            format!("cfg_pre_{id}"),
            scenario.unit_of(id).to_string(),
            &|t| trace.records[t].configs_pre[i].1,
        ));
    }
    for (i, id) in trace.softgoal_ids.iter().enumerate() {
        series.push(column(
            format!("sd_actual_pre_{id}"),
            sd_unit.clone(),
            &|t| trace.records[t].actual_sd_pre[i].1,
        ));
    }
    for (i, id) in trace.softgoal_ids.iter().enumerate() {
        series.push(column(format!("ds_pre_{id}"), sd_unit.clone(), &|t| {
            trace.records[t].deviation_pre.deviations[i].delta
        }));
    }
    series.push(column(String::from("dS_pre"), sd_unit.clone(), &|t| {
        trace.records[t].deviation_pre.total
    }));
    for (i, id) in trace.task_ids.iter().enumerate() {
        series.push(column(
            format!("cfg_post_{id}"),
            scenario.unit_of(id).to_string(),
            &|t| trace.records[t].configs_post[i].1,
        ));
    }
    for (i, id) in trace.softgoal_ids.iter().enumerate() {
        series.push(column(
            format!("sd_actual_post_{id}"),
            sd_unit.clone(),
            &|t| trace.records[t].actual_sd_post[i].1,
        ));
    }
    for (i, id) in trace.softgoal_ids.iter().enumerate() {
        series.push(column(format!("ds_post_{id}"), sd_unit.clone(), &|t| {
            trace.records[t].deviation_post.deviations[i].delta
        }));
    }
    series.push(column(String::from("dS_post"), sd_unit, &|t| {
        trace.records[t].deviation_post.total
    }));
    series
}

/// Writes `plots/<series>.svg`, one chart per recorded series.
pub fn export_plots(trace: &Trace, scenario: &Scenario, dir: &Path) -> io::Result<()> {
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    for (name, unit, values) in trace_series(trace, scenario) {
        fs::write(plots.join(format!("{name}.svg")), line_chart(&name, &unit, &values))?;
    }
    Ok(())
}
