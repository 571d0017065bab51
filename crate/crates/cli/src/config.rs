//! Plain `key = value` study configuration files.
//!
//! ```text
//! # CIFAR-10
//! n_total = 50000
//! epsilon = 1
//! grid = 500: 1,2,3
//! grid = 5000: 1,2,3
//! ```

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use augequiv_core::{GridEntry, StudyConfig};

/// Keys a config file may set.
pub const KEYS: &[&str] = &[
    "dataset",
    "classifier",
    "n_total",
    "epsilon",
    "ratio_cap",
    "criterion",
    "loss",
    "selection",
    "ir_scale",
    "contour_resolution",
    "contour_levels",
    "contour_extent",
    "grid",
];

pub fn load_config(path: &Path, base: Option<StudyConfig>) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_config(&text, base).with_context(|| format!("in {}", path.display()))
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| anyhow!("line {line}: {key} = '{raw}' is not a valid value"))
}

/// Parses config text on top of `base` (a preset), or from scratch, in
/// which case `n_total` is required. The result is validated.
pub fn parse_config(text: &str, base: Option<StudyConfig>) -> Result<StudyConfig> {
    let from_scratch = base.is_none();
    let mut cfg = base.unwrap_or_else(|| StudyConfig::new("", 0));
    let mut grid: Option<Vec<GridEntry>> = None;
    let mut saw_n_total = false;

    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, val) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {n}: expected 'key = value', got '{line}'"))?;
        let (key, val) = (key.trim(), val.trim());
        match key {
            "dataset" => cfg.dataset_id = val.to_string(),
            "classifier" => cfg.classifier = (!val.is_empty()).then(|| val.to_string()),
            "n_total" => {
                cfg.n_total = value(n, key, val)?;
                saw_n_total = true;
            }
            "epsilon" => cfg.epsilon = value(n, key, val)?,
            "ratio_cap" => cfg.ratio_cap = value(n, key, val)?,
            "criterion" => cfg.criterion = val.parse().map_err(|e| anyhow!("line {n}: {e}"))?,
            "loss" => cfg.loss = val.parse().map_err(|e| anyhow!("line {n}: {e}"))?,
            "selection" => cfg.selection = val.parse().map_err(|e| anyhow!("line {n}: {e}"))?,
            "ir_scale" => cfg.ir_scale = value(n, key, val)?,
            "contour_resolution" => cfg.contour_resolution = value(n, key, val)?,
            "contour_levels" => cfg.contour_levels = value(n, key, val)?,
            "contour_extent" => cfg.contour_extent = value(n, key, val)?,
            "grid" => {
                let entry = parse_grid(n, val)?;
                let g = grid.get_or_insert_with(Vec::new);
                if g.iter().any(|e| e.n_base == entry.n_base) {
                    bail!("line {n}: duplicate n_base {} in grid", entry.n_base);
                }
                g.push(entry);
            }
            other => bail!("line {n}: unknown key '{other}' (known: {})", KEYS.join(", ")),
        }
    }
    if from_scratch && !saw_n_total {
        bail!("n_total is required without a preset");
    }
    if let Some(g) = grid {
        cfg.tuple_grid = g;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `n_base: r1,r2,...`
fn parse_grid(line: usize, val: &str) -> Result<GridEntry> {
    let (base, ratios) = val
        .split_once(':')
        .ok_or_else(|| anyhow!("line {line}: grid needs 'n_base: r1,r2,...', got '{val}'"))?;
    let n_base: u64 = value(line, "grid n_base", base.trim())?;
    let ratios = ratios
        .split(',')
        .map(|r| value(line, "grid ratio", r.trim()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridEntry::new(n_base, &ratios))
}
