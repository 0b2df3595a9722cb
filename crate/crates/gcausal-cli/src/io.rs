//! File formats: panel CSV, groups JSON, graph JSON, and the result
//! CSV/JSON writers. All writers emit "\n" line endings and shortest
//! round-trip float formatting, so identical inputs produce identical bytes.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use gcausal_core::{GroupCausalGraph, GroupPartition, Matrix, TimeSeriesPanel};

use crate::error::{CliError, Result};

/// How [`load_panel`] treats missing cells (empty, `nan`, `na`, `null`).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Fail on the first missing cell, naming its row and column.
    #[default]
    #[value(name = "error")]
    Error,
    /// Remove every row that contains a missing cell.
    #[value(name = "drop_rows")]
    DropRows,
    /// Linearly interpolate between the nearest observed values of the
    /// column; boundary gaps copy the nearest observation.
    #[value(name = "interpolate")]
    Interpolate,
}

/// Read a file that the config referenced. A path that cannot be opened is
/// a configuration error (exit code 2) and the message names the path.
pub fn read_referenced_file(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan") || cell.eq_ignore_ascii_case("na")
        || cell.eq_ignore_ascii_case("null")
}

/// Load a panel CSV: one header row of variable names, then one row per
/// time step, comma separated, `.` decimal, no quoting. Lines starting with
/// `#` are skipped, so result CSVs that carry a config comment re-ingest
/// cleanly. Missing cells are handled per `policy`.
pub fn load_panel(path: &Path, policy: MissingPolicy) -> Result<TimeSeriesPanel> {
    let text = read_referenced_file(path)?;
    let mut lines = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::data(format!("{}: no header row", path.display())))?;
    let names: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let n = names.len();

    // Parse into rows of Option<f64>; None marks a missing cell.
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row_no = idx + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != n {
            return Err(CliError::data(format!(
                "{}: row {row_no} has {} fields, expected {n}",
                path.display(),
                cells.len()
            )));
        }
        let mut row = Vec::with_capacity(n);
        for (j, cell) in cells.iter().enumerate() {
            if is_missing(cell) {
                if policy == MissingPolicy::Error {
                    return Err(CliError::data(format!(
                        "{}: row {row_no}, column '{}': missing value",
                        path.display(),
                        names[j]
                    )));
                }
                row.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError::data(format!(
                        "{}: row {row_no}, column '{}': cannot parse '{cell}' as a number",
                        path.display(),
                        names[j]
                    ))
                })?;
                row.push(Some(v));
            }
        }
        rows.push(row);
    }

    match policy {
        MissingPolicy::Error => {}
        MissingPolicy::DropRows => rows.retain(|r| r.iter().all(Option::is_some)),
        MissingPolicy::Interpolate => interpolate_columns(&mut rows, &names, path)?,
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }

    let t = rows.len();
    let mut values = Matrix::zeros(t, n);
    for (r, row) in rows.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            values.set(r, j, cell.expect("missing cells resolved above"));
        }
    }
    Ok(TimeSeriesPanel::new(values, names)?)
}

/// Replace None cells column by column: linear interpolation between the
/// nearest observed neighbours, nearest-value extension at the boundaries.
fn interpolate_columns(
    rows: &mut [Vec<Option<f64>>],
    names: &[String],
    path: &Path,
) -> Result<()> {
    let t = rows.len();
    for j in 0..names.len() {
        let observed: Vec<(usize, f64)> = (0..t)
            .filter_map(|r| rows[r][j].map(|v| (r, v)))
            .collect();
        if observed.is_empty() {
            return Err(CliError::data(format!(
                "{}: column '{}' has no observed values to interpolate",
                path.display(),
                names[j]
            )));
        }
        for (r, row) in rows.iter_mut().enumerate() {
            if row[j].is_some() {
                continue;
            }
            let next = observed.iter().find(|&&(o, _)| o > r);
            let prev = observed.iter().rev().find(|&&(o, _)| o < r);
            let filled = match (prev, next) {
                (Some(&(rp, vp)), Some(&(rn, vn))) => {
                    let w = (r - rp) as f64 / (rn - rp) as f64;
                    vp + w * (vn - vp)
                }
                (Some(&(_, vp)), None) => vp,
                (None, Some(&(_, vn))) => vn,
                (None, None) => unreachable!("observed is non-empty"),
            };
            row[j] = Some(filled);
        }
    }
    Ok(())
}

/// Serialize the panel back to CSV: header of variable names, then rows.
/// Floats use shortest round-trip formatting, so a written panel re-loads
/// bit for bit.
pub fn write_panel(path: &Path, panel: &TimeSeriesPanel) -> Result<()> {
    let mut out = String::new();
    out.push_str(&panel.variable_names.join(","));
    out.push('\n');
    for r in 0..panel.len() {
        let cells: Vec<String> = (0..panel.num_vars())
            .map(|j| format!("{}", panel.values.get(r, j)))
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct GroupsFile {
    groups: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

/// Load a groups JSON file ({"groups": [[idx, ...], ...], "names": [...]})
/// and validate it against the panel width.
pub fn load_groups(path: &Path, num_vars: usize) -> Result<(GroupPartition, Option<Vec<String>>)> {
    let text = read_referenced_file(path)?;
    let file: GroupsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("{}: invalid groups JSON: {e}", path.display())))?;
    if let Some(names) = &file.names {
        if names.len() != file.groups.len() {
            return Err(CliError::data(format!(
                "{}: {} group names for {} groups",
                path.display(),
                names.len(),
                file.groups.len()
            )));
        }
    }
    let partition = GroupPartition::new(file.groups, num_vars)?;
    Ok((partition, file.names))
}

pub fn write_groups(
    path: &Path,
    partition: &GroupPartition,
    names: Option<&[String]>,
) -> Result<()> {
    let file = GroupsFile {
        groups: partition.groups.clone(),
        names: names.map(<[String]>::to_vec),
    };
    write_json(path, &file)
}

/// Write a graph under the fixed schema {"groups": G, "adjacency": [[bool]]};
/// this file format is pinned, so no config object is embedded here.
pub fn write_graph(path: &Path, graph: &GroupCausalGraph) -> Result<()> {
    write_json(path, graph)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// Result CSV: a `# config: {...}` audit line, a header, then rows. Loaders
/// in this module skip `#` lines, so these files stay machine-readable.
pub fn write_result_csv(
    path: &Path,
    config_json: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = format!("# config: {config_json}\n");
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// Shortest round-trip decimal form of an f64 for CSV cells.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
