//! Result files. Numbers are written in a fixed format so the same records
//! always produce the same bytes.

use super::plot::{Axis, Plot, Series};
use super::sweep::{curve, penalty_table, reach_table, Record, SweepResult};
use crate::complexity::{realization_table, Realization};
use crate::error::{Error, Result};
use crate::rx::{RequiredSnr, KP4_BER};
use std::fs;
use std::path::{Path, PathBuf};

pub const RECORD_HEADER: [&str; 12] = [
    "distance_km",
    "snr_db",
    "equalizer",
    "framing",
    "ber",
    "errors",
    "bits",
    "cc_per_symbol",
    "train_loss",
    "best_epoch",
    "seed",
    "status",
];

fn csv_err(e: csv::Error) -> Error {
    Error::format("csv output", e.to_string())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn sci(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:.6e}")
    }
}

pub fn records_csv(records: &[Record]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.distance_km.to_string(),
            r.snr_db.to_string(),
            r.equalizer.clone(),
            r.framing.clone(),
            sci(r.ber),
            r.errors.to_string(),
            r.bits.to_string(),
            opt(r.cc_per_symbol),
            r.train_loss.map(sci).unwrap_or_default(),
            opt(r.best_epoch),
            r.seed.to_string(),
            r.status.clone(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::format("csv output", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::format("csv output", e.to_string()))
}

fn required_fields(r: RequiredSnr) -> [String; 2] {
    match r {
        RequiredSnr::Reached(v) => [format!("{v:.4}"), "reached".into()],
        RequiredSnr::NoReach => [String::new(), "no_reach".into()],
        RequiredSnr::BelowGrid => [String::new(), "below_grid".into()],
    }
}

pub fn penalty_csv(records: &[Record]) -> Result<String> {
    let (reference, rows) = penalty_table(records);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["distance_km", "equalizer", "required_snr_db", "status", "penalty_db", "reference_snr_db"])
        .map_err(csv_err)?;
    let [ref_snr, _] = required_fields(reference);
    for row in rows {
        let [req, status] = required_fields(row.required);
        w.write_record([
            row.distance_km.to_string(),
            row.equalizer,
            req,
            status,
            row.penalty_db.map(|p| format!("{p:.4}")).unwrap_or_default(),
            ref_snr.clone(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn reach_csv(records: &[Record]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["equalizer", "cc_per_symbol", "reach_km"]).map_err(csv_err)?;
    for (id, cc, reach) in reach_table(records) {
        w.write_record([id, opt(cc), opt(reach)]).map_err(csv_err)?;
    }
    finish(w)
}

fn write(dir: &Path, name: &str, content: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content)?;
    written.push(path);
    Ok(())
}

fn write_timings(dir: &Path, result: &SweepResult, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut s = String::new();
    for t in &result.timings {
        s.push_str(&format!("{:.3}s\t{}\n", t.seconds, t.label));
    }
    write(dir, "timing.log", &s, written)
}

fn equalizers(records: &[Record]) -> Vec<String> {
    let mut ids: Vec<String> = Vec::new();
    for r in records {
        if !ids.contains(&r.equalizer) {
            ids.push(r.equalizer.clone());
        }
    }
    ids
}

fn distances(records: &[Record]) -> Vec<f64> {
    let mut d: Vec<f64> = Vec::new();
    for r in records {
        if !d.contains(&r.distance_km) {
            d.push(r.distance_km);
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

fn waterfall(records: &[Record], distance_km: f64) -> Plot {
    let mut plot = Plot::new(
        &format!("BER versus SNR, {distance_km} km"),
        Axis::linear("SNR (dB)"),
        Axis::log("BER"),
    );
    for id in equalizers(records) {
        let c = curve(records, distance_km, &id);
        if !c.is_empty() {
            plot.series.push(Series::line(&id, c));
        }
    }
    plot.threshold = Some(KP4_BER);
    plot
}

/// `ber.csv`, one waterfall plot per distance, `timing.log`.
pub fn emit_snr_sweep(dir: &Path, result: &SweepResult) -> Result<Vec<PathBuf>> {
    if result.records.is_empty() {
        return Err(Error::EmptyRequest("no records to write"));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, "ber.csv", &records_csv(&result.records)?, &mut written)?;
    write(dir, "required_snr.csv", &penalty_csv(&result.records)?, &mut written)?;
    for d in distances(&result.records) {
        write(dir, &format!("ber_{d}km.svg"), &waterfall(&result.records, d).render(), &mut written)?;
    }
    write_timings(dir, result, &mut written)?;
    Ok(written)
}

/// `ber.csv`, `penalty.csv` and the penalty-versus-distance plot.
pub fn emit_distance_sweep(dir: &Path, result: &SweepResult) -> Result<Vec<PathBuf>> {
    if result.records.is_empty() {
        return Err(Error::EmptyRequest("no records to write"));
    }
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, "ber.csv", &records_csv(&result.records)?, &mut written)?;
    write(dir, "penalty.csv", &penalty_csv(&result.records)?, &mut written)?;
    let (_, rows) = penalty_table(&result.records);
    let mut plot = Plot::new(
        "SNR penalty at the KP4 limit",
        Axis::linear("distance (km)"),
        Axis::linear("penalty (dB)"),
    );
    for id in equalizers(&result.records) {
        let mine: Vec<_> = rows.iter().filter(|r| r.equalizer == id && r.distance_km > 0.0).collect();
        let pts = mine.iter().filter_map(|r| r.penalty_db.map(|p| (r.distance_km, p))).collect();
        let missing = mine.iter().filter(|r| r.penalty_db.is_none()).map(|r| r.distance_km).collect();
        let mut s = Series::line(&id, pts);
        s.missing = missing;
        plot.series.push(s);
    }
    write(dir, "penalty.svg", &plot.render(), &mut written)?;
    write_timings(dir, result, &mut written)?;
    Ok(written)
}

/// `ber.csv`, `reach.csv`, `realizations.csv` and BER versus budget.
pub fn emit_complexity_scan(
    dir: &Path,
    result: &SweepResult,
    realizations: &[(String, Realization)],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write(dir, "realizations.csv", &realization_table(realizations), &mut written)?;
    if result.records.is_empty() {
        return Ok(written);
    }
    write(dir, "ber.csv", &records_csv(&result.records)?, &mut written)?;
    write(dir, "reach.csv", &reach_csv(&result.records)?, &mut written)?;
    for d in distances(&result.records) {
        let mut plot = Plot::new(
            &format!("BER versus complexity, {d} km"),
            Axis::log("multiplications per symbol"),
            Axis::log("BER"),
        );
        let mut families: Vec<String> = Vec::new();
        for r in &result.records {
            let fam = r.equalizer.split('@').next().unwrap_or_default().to_string();
            if !families.contains(&fam) {
                families.push(fam);
            }
        }
        for fam in families {
            let mut pts: Vec<(f64, f64)> = result
                .records
                .iter()
                .filter(|r| r.distance_km == d && r.ok() && r.equalizer.split('@').next() == Some(fam.as_str()))
                .filter_map(|r| r.cc_per_symbol.map(|cc| (cc as f64, r.floored_ber())))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            plot.series.push(Series::line(&fam, pts));
        }
        plot.threshold = Some(KP4_BER);
        write(dir, &format!("ber_vs_budget_{d}km.svg"), &plot.render(), &mut written)?;
    }
    write_timings(dir, result, &mut written)?;
    Ok(written)
}
