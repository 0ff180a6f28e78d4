//! CSV series for histories, update records, aggregates and the rank table.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::history::{aggregate_trials, read_log, update_record, AggregatePoint, RunHistory, RunKind};
use super::rank::{HistogramBin, RankTable};
use super::RunConfig;
use crate::error::Result;
use crate::objective::Branch;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `index,y,branch,z`: every evaluation in order.
pub fn write_history_csv(path: &Path, h: &RunHistory) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,y,branch,z")?;
    for (i, o) in h.observations.iter().enumerate() {
        let branch = match o.branch {
            Branch::S21 => "s21",
            Branch::Penalty => "penalty",
        };
        writeln!(w, "{},{},{},{}", i + 1, o.y, branch, o.z)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_update_record_csv(path: &Path, series: &[(usize, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,best_y")?;
    for (i, y) in series {
        writeln!(w, "{i},{y}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv(path: &Path, agg: &[AggregatePoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "index,mean,min,max")?;
    for p in agg {
        writeln!(w, "{},{},{},{}", p.index, p.mean, p.min, p.max)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rank_table_csv(path: &Path, table: &RankTable) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "rank,bits,s21_db")?;
    for r in &table.rows {
        writeln!(w, "{},{},{}", r.rank, r.bits, r.s21_db)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv(path: &Path, bins: &[HistogramBin]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "bin_left_db,bin_right_db,count")?;
    for b in bins {
        writeln!(w, "{},{},{}", b.bin_left_db, b.bin_right_db, b.count)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes per-trial history and update-record files plus the aggregate for
/// one group of equal-length histories. Returns the files written.
pub fn write_trial_group(dir: &Path, label: &str, histories: &[RunHistory]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut series = Vec::with_capacity(histories.len());
    for (t, h) in histories.iter().enumerate() {
        let hist = dir.join(format!("{label}_history_{t:02}.csv"));
        write_history_csv(&hist, h)?;
        let upd = dir.join(format!("{label}_update_{t:02}.csv"));
        let s = update_record(h);
        write_update_record_csv(&upd, &s)?;
        series.push(s);
        written.extend([hist, upd]);
    }
    if !series.is_empty() {
        let agg = dir.join(format!("{label}_aggregate.csv"));
        write_aggregate_csv(&agg, &aggregate_trials(&series)?)?;
        written.push(agg);
    }
    Ok(written)
}

/// `trial,final_best_y,rank,percentile` against the canonical rank table.
pub fn write_summary_csv(path: &Path, histories: &[RunHistory], table: &RankTable) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "trial,final_best_y,rank,percentile")?;
    for (t, h) in histories.iter().enumerate() {
        if let Some(y) = h.final_best_y() {
            writeln!(w, "{t},{y},{},{}", table.rank_of_value(y), table.percentile(y))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads every `<kind>_trial_NN.jsonl` log in `dir`, grouped by kind and
/// ordered by trial number.
pub fn load_trial_logs(dir: &Path, cfg: &RunConfig) -> Result<BTreeMap<&'static str, Vec<RunHistory>>> {
    let mut found: BTreeMap<&'static str, Vec<(String, RunHistory)>> = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
            continue;
        };
        if !name.ends_with(".jsonl") {
            continue;
        }
        let kind = if name.starts_with("bocs_trial_") {
            RunKind::Bocs
        } else if name.starts_with("random_trial_") {
            RunKind::Random
        } else {
            continue;
        };
        let mut h = RunHistory::new(kind, cfg.clone());
        for r in read_log(&path)? {
            h.push(r.observation(), r.meta());
        }
        found.entry(kind.label()).or_default().push((name, h));
    }
    Ok(found
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(|a, b| a.0.cmp(&b.0));
            (k, v.into_iter().map(|(_, h)| h).collect())
        })
        .collect())
}
