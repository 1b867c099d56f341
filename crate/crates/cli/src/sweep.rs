//! Grid sweeps: `ouldp sweep <command> --axis start..stop x count ...`.
//!
//! An axis is either evenly spaced, `start..stop x count`, or an explicit
//! list, `{v1,v2,...}`.
//!
//! Each cell re-parses the target command with the cell's values, so a
//! sweep accepts exactly the flags of its target. Rows are emitted in
//! lexicographic order with the first axis varying slowest.

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use crate::commands::execute;
use crate::output::{csv_cell, csv_number, CliError, SCHEMA_VERSION};
use crate::{report_error, Cli};

/// Output columns per sweepable command.
fn columns(target: &str) -> Option<&'static [&'static str]> {
    Some(match target {
        "mle" => &["theta_hat"],
        "cgf" => &["value", "phi", "sigma2", "gamma"],
        "rate" | "legendre" => &["rate", "branch"],
        "contract" => &["rate", "branch", "closed_form"],
        "ci-bound" => &["bound", "log_bound", "y_star", "h_value"],
        "laplace-bound" => &["bound", "log_bound", "exact"],
        "mc-tail" => &["p_hat", "se"],
        "ldp-slope" => &["slope", "target"],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Param {
    Fixed(Vec<String>),
    Axis(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
struct SweepSpec {
    params: Vec<(String, Param)>,
    csv: Option<String>,
}

fn parse_axis(text: &str) -> Result<Option<Vec<f64>>, String> {
    if let Some(list) = text.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let points = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{}` in axis `{text}`", v.trim()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(Some(points));
    }
    let Some((start, tail)) = text.split_once("..") else {
        return Ok(None);
    };
    let (stop, count) = tail
        .split_once('x')
        .ok_or_else(|| format!("axis `{text}` needs a count: start..stop x count"))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number `{}` in axis `{text}`", s.trim()))
    };
    let (start, stop) = (parse(start)?, parse(stop)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| format!("bad count `{}` in axis `{text}`", count.trim()))?;
    if count == 0 {
        return Err(format!("axis `{text}` has no points"));
    }
    if count == 1 {
        return Ok(Some(vec![start]));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok(Some(
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    stop
                } else {
                    start + i as f64 * step
                }
            })
            .collect(),
    ))
}

fn parse_spec(rest: &[String]) -> Result<SweepSpec, String> {
    let mut params = Vec::new();
    let mut csv = None;
    let mut i = 0;
    while i < rest.len() {
        let flag = &rest[i];
        let name = flag
            .strip_prefix("--")
            .ok_or_else(|| format!("expected a --flag, found `{flag}`"))?
            .to_string();
        i += 1;
        let mut values = Vec::new();
        while i < rest.len() && !rest[i].starts_with("--") {
            values.push(rest[i].clone());
            i += 1;
        }
        if name == "csv" {
            match values.as_slice() {
                [path] => csv = Some(path.clone()),
                _ => return Err("--csv takes one path".into()),
            }
            continue;
        }
        let joined = values.join(" ");
        let param = match parse_axis(&joined)? {
            Some(points) => Param::Axis(points),
            None => Param::Fixed(values),
        };
        params.push((name, param));
    }
    Ok(SweepSpec { params, csv })
}

/// Cartesian product, first axis slowest.
fn cells(axes: &[&Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, points| {
        acc.iter()
            .flat_map(|prefix| {
                points.iter().map(move |&p| {
                    let mut row = prefix.clone();
                    row.push(p);
                    row
                })
            })
            .collect()
    })
}

fn usage(message: String) -> ExitCode {
    eprintln!("error: {message}");
    eprintln!("usage: ouldp sweep <command> [--flag value | --flag start..stop x count | --flag {{v1,v2,...}}]... [--csv PATH]");
    ExitCode::from(2)
}

pub fn run(target: &str, rest: &[String]) -> ExitCode {
    let Some(outputs) = columns(target) else {
        return usage(format!("`{target}` cannot be swept"));
    };
    let spec = match parse_spec(rest) {
        Ok(s) => s,
        Err(m) => return usage(m),
    };
    let axis_names: Vec<&str> = spec
        .params
        .iter()
        .filter(|(_, p)| matches!(p, Param::Axis(_)))
        .map(|(n, _)| n.as_str())
        .collect();
    let axes: Vec<&Vec<f64>> = spec
        .params
        .iter()
        .filter_map(|(_, p)| match p {
            Param::Axis(v) => Some(v),
            Param::Fixed(_) => None,
        })
        .collect();

    let mut lines = vec![axis_names
        .iter()
        .chain(outputs.iter())
        .copied()
        .collect::<Vec<_>>()
        .join(",")];
    let mut failures = 0usize;
    for cell in cells(&axes) {
        let mut argv = vec!["ouldp".to_string(), target.to_string()];
        let mut values = cell.iter();
        for (name, param) in &spec.params {
            argv.push(format!("--{name}"));
            match param {
                Param::Fixed(v) => argv.extend(v.iter().cloned()),
                Param::Axis(_) => argv.push(values.next().expect("one value per axis").to_string()),
            }
        }
        let command = match Cli::try_parse_from(&argv) {
            Ok(cli) => cli.command,
            Err(e) => {
                let _ = e.print();
                return ExitCode::from(2);
            }
        };
        let mut row: Vec<String> = cell.iter().map(|&v| csv_number(v)).collect();
        match execute(command) {
            Ok(outcome) => {
                let json = outcome.record.to_json(target);
                row.extend(
                    outputs
                        .iter()
                        .map(|k| csv_cell(json.get(*k).unwrap_or(&Value::Null))),
                );
            }
            Err(_) => {
                failures += 1;
                row.extend(outputs.iter().map(|_| "nan".to_string()));
            }
        }
        lines.push(row.join(","));
    }
    let table = lines.join("\n") + "\n";

    match spec.csv {
        None => print!("{table}"),
        Some(path) => {
            if let Err(e) = fs::write(&path, &table) {
                return report_error("sweep", 0, &CliError::new("io", format!("{path}: {e}")));
            }
            let summary = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "sweep",
                "version": env!("CARGO_PKG_VERSION"),
                "target": target,
                "axes": axis_names,
                "columns": outputs,
                "rows": lines.len() - 1,
                "failed_cells": failures,
                "csv": path,
            });
            println!("{summary}");
        }
    }
    ExitCode::SUCCESS
}
