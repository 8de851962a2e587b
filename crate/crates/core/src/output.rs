//! Deterministic report emission: key-sorted JSON and RFC 4180 CSV.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use crate::ecosystem::Metrics;
use crate::error::{Error, Result};
use crate::scenarios::ScenarioReport;

/// Pretty JSON with object keys in sorted order, newline-terminated.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    // Going through Value sorts every map, whatever the source type's field order.
    let v = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// CSV with a header taken from the field names of `S`.
pub fn records_csv<S: Serialize>(rows: &[S]) -> Result<String> {
    let mut w = csv_writer();
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    finish(w)
}

/// Ecosystem trajectory, one row per round.
pub fn trajectory_csv(rows: &[Metrics]) -> Result<String> {
    if rows.is_empty() {
        let mut w = csv_writer();
        w.write_record([
            "round",
            "alive",
            "mean_p",
            "min_p",
            "max_p",
            "dispersion",
            "mean_resources",
            "total_goal_score",
            "cheats_this_round",
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
        return finish(w);
    }
    records_csv(rows)
}

fn number(v: f64) -> String {
    if v.is_finite() {
        // Adding zero turns -0 into 0.
        (v + 0.0).to_string()
    } else {
        String::new()
    }
}

/// One row per report × regime. Columns are `scenario`, `regime`, `role`,
/// `original_utility_gain`, then the union of `outcome.*`, `value.*`,
/// `flag.*` and `metric.*` keys in sorted order; absent cells stay empty.
pub fn scenario_csv(reports: &[ScenarioReport]) -> Result<String> {
    scenario_csv_labeled(None, reports)
}

/// Like [`scenario_csv`], with a leading column `name` holding `labels[i]`
/// on every row of `reports[i]`.
pub fn scenario_csv_labeled(label: Option<(&str, &[String])>, reports: &[ScenarioReport]) -> Result<String> {
    let mut outcomes = BTreeSet::new();
    let mut values = BTreeSet::new();
    let mut flags = BTreeSet::new();
    let mut metrics = BTreeSet::new();
    for r in reports {
        for g in r.regimes() {
            outcomes.extend(g.outcome.keys().cloned());
            values.extend(g.values.keys().cloned());
        }
        flags.extend(r.flags.keys().cloned());
        metrics.extend(r.metrics.keys().cloned());
    }
    let mut w = csv_writer();
    let mut header: Vec<String> = label.iter().map(|(name, _)| name.to_string()).collect();
    header.extend(
        ["scenario", "regime", "role", "original_utility_gain"]
            .iter()
            .map(|s| s.to_string()),
    );
    header.extend(outcomes.iter().map(|k| format!("outcome.{k}")));
    header.extend(values.iter().map(|k| format!("value.{k}")));
    header.extend(flags.iter().map(|k| format!("flag.{k}")));
    header.extend(metrics.iter().map(|k| format!("metric.{k}")));
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (i, r) in reports.iter().enumerate() {
        for (k, g) in r.regimes().enumerate() {
            let role = match k {
                0 => "baseline",
                1 => "modified",
                _ => "additional",
            };
            let mut row: Vec<String> = label
                .iter()
                .map(|(_, labels)| labels.get(i).cloned().unwrap_or_default())
                .collect();
            row.extend([
                r.scenario.clone(),
                g.name.clone(),
                role.to_string(),
                number(r.original_utility_gain),
            ]);
            row.extend(outcomes.iter().map(|o| g.outcome.get(o).cloned().unwrap_or_default()));
            row.extend(values.iter().map(|v| g.values.get(v).map(|x| number(*x)).unwrap_or_default()));
            row.extend(flags.iter().map(|f| r.flags.get(f).map(|b| b.to_string()).unwrap_or_default()));
            row.extend(metrics.iter().map(|m| r.metrics.get(m).map(|x| number(*x)).unwrap_or_default()));
            w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    finish(w)
}

/// Writes `contents` to `path`, creating missing parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
