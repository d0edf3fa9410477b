use std::io::Write;

use serde::Serialize;

use super::config::ScenarioConfig;
use super::run::{run, RunRecord};
use crate::error::{Error, Result};
use crate::metrics::RunSummary;

/// Percentage change of a candidate run against its baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub baseline: String,
    pub candidate: String,
    pub rmse_change_pct: [f64; 3],
    pub max_err_change_pct: [f64; 3],
    pub energy_change_pct: [f64; 3],
    pub baseline_summary: RunSummary,
    pub candidate_summary: RunSummary,
}

fn pct(base: f64, cand: f64) -> f64 {
    if base == cand {
        0.0
    } else {
        100.0 * (cand - base) / base
    }
}

fn pct3(base: &[f64; 3], cand: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| pct(base[i], cand[i]))
}

/// Members of a pair may differ only in controller variant, preview noise and name.
fn check_pair(base: &ScenarioConfig, cand: &ScenarioConfig) -> Result<()> {
    let mut aligned = base.clone();
    aligned.name.clone_from(&cand.name);
    aligned.controller_variant = cand.controller_variant;
    aligned.preview_snr = cand.preview_snr;
    aligned.preview_snr_db = cand.preview_snr_db;
    aligned.seeds.preview_noise = cand.seeds.preview_noise;
    aligned.ff_pitch_moment = cand.ff_pitch_moment;
    if &aligned != cand {
        return Err(Error::Usage(format!(
            "pair '{}' / '{}' differs in more than controller variant and preview noise",
            base.name, cand.name
        )));
    }
    Ok(())
}

fn row(base: &RunRecord, cand: &RunRecord) -> ComparisonRow {
    let (b, c) = (&base.summary, &cand.summary);
    ComparisonRow {
        baseline: base.config.name.clone(),
        candidate: cand.config.name.clone(),
        rmse_change_pct: pct3(&b.rmse, &c.rmse),
        max_err_change_pct: pct3(&b.max_abs_err, &c.max_abs_err),
        energy_change_pct: pct3(&b.energy, &c.energy),
        baseline_summary: *b,
        candidate_summary: *c,
    }
}

/// Runs every `(baseline, candidate)` pair and reports per-DoF percentage
/// changes. All pairs are validated before any simulation starts; member
/// runs execute on separate threads.
pub fn compare(pairs: &[(ScenarioConfig, ScenarioConfig)]) -> Result<Vec<ComparisonRow>> {
    for (b, c) in pairs {
        b.validate()?;
        c.validate()?;
        check_pair(b, c)?;
    }
    let configs: Vec<&ScenarioConfig> = pairs.iter().flat_map(|(b, c)| [b, c]).collect();
    let records: Vec<Result<RunRecord>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(records.chunks(2).map(|p| row(&p[0], &p[1])).collect())
}

/// Mean of a per-DoF percentage field across rows and DoFs.
pub fn mean_change(rows: &[ComparisonRow], field: impl Fn(&ComparisonRow) -> [f64; 3]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().flat_map(&field).sum::<f64>() / (3 * rows.len()) as f64
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["baseline".to_string(), "candidate".to_string()];
    for metric in ["rmse", "maxerr", "energy"] {
        for dof in ["x", "z", "theta"] {
            header.push(format!("{metric}_{dof}_pct"));
        }
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.baseline.clone(), r.candidate.clone()];
        for v in r
            .rmse_change_pct
            .iter()
            .chain(&r.max_err_change_pct)
            .chain(&r.energy_change_pct)
        {
            rec.push(v.to_string());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
