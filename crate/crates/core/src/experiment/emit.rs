//! CSV and JSON writers. CSV is the canonical data format; JSON mirrors it.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::stats::{CurveSummary, StateStat};
use crate::error::Result;
use crate::store::write_atomic;

pub const CURVES_HEADER: &str = "iteration,mse_mean,mse_std,mse_mavg,mse_min";
pub const TOP5_HEADER: &str = "state,mean_prob,std_prob";
pub const KL_HEADER: &str = "epoch,kl_mean,kl_std,kl_min";

pub fn curves_csv(c: &CurveSummary) -> String {
    let mut out = format!("{CURVES_HEADER}\n");
    for i in 0..c.iteration.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.iteration[i], c.mse_mean[i], c.mse_std[i], c.mse_mavg[i], c.mse_min[i]
        );
    }
    out
}

pub fn states_csv(rows: &[StateStat]) -> String {
    let mut out = format!("{TOP5_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.state, r.mean_prob, r.std_prob);
    }
    out
}

pub fn kl_csv(mean: &[f64], std: &[f64], min: &[f64]) -> String {
    let mut out = format!("{KL_HEADER}\n");
    for i in 0..mean.len() {
        let _ = writeln!(out, "{i},{},{},{}", mean[i], std[i], min[i]);
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_atomic(&dir.join(name), text.as_bytes())
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}
