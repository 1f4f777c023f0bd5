//! The per-lesion table `lesions.csv`.

use std::path::Path;

use lesionmetrics::matching::{LesionRecord, LesionStatus};

use crate::error::{CmdResult, CommandError};
use crate::format::{full, parse_optional};

pub const HEADER: [&str; 10] = [
    "study_id",
    "lesion_id",
    "status",
    "gt_diameter_mm",
    "pred_diameter_mm",
    "gt_volume_mm3",
    "pred_volume_mm3",
    "dice",
    "nsd",
    "matched_pred_ids",
];

/// Writes records at full precision so the file can be re-aggregated.
pub fn write_lesions(path: &Path, records: &[&LesionRecord]) -> CmdResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.study_id.clone(),
            r.lesion_id.to_string(),
            r.status.as_str().to_string(),
            full(r.gt_diameter_mm),
            full(r.pred_diameter_mm),
            full(r.gt_volume_mm3),
            full(r.pred_volume_mm3),
            full(r.dice),
            full(r.nsd),
            r.matched_pred_ids.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_lesions(path: &Path) -> CmdResult<Vec<LesionRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CommandError::Data(format!("{}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != HEADER {
        return Err(CommandError::Data(format!("{}: unexpected header {:?}", path.display(), headers)));
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |what: &str| CommandError::Data(format!("{} row {}: bad {what}", path.display(), line + 2));
        let num = |i: usize| parse_optional(&row[i]).map_err(|_| bad(HEADER[i]));
        let status = match &row[2] {
            "TP" => LesionStatus::TP,
            "FN" => LesionStatus::FN,
            "FP" => LesionStatus::FP,
            _ => return Err(bad("status")),
        };
        out.push(LesionRecord {
            study_id: row[0].to_string(),
            lesion_id: row[1].parse().map_err(|_| bad("lesion_id"))?,
            status,
            gt_diameter_mm: num(3)?,
            pred_diameter_mm: num(4)?,
            gt_volume_mm3: num(5)?,
            pred_volume_mm3: num(6)?,
            dice: num(7)?,
            nsd: num(8)?,
            matched_pred_ids: row[9].to_string(),
        });
    }
    Ok(out)
}
