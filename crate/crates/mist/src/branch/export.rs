use std::io::Write;

use serde::Serialize;

use super::crossings::{CrossingEvent, CrossingKind};
use super::label::BranchTable;
use crate::error::Result;

#[derive(Serialize)]
struct BranchRow {
    flux: f64,
    j: usize,
    n_c: usize,
    #[serde(rename = "energy_GHz")]
    energy_ghz: f64,
    nt: f64,
    confidence: f64,
}

/// One row per labeled state: flux, j, n_c, energy_GHz, nt, confidence.
/// The header is written only when `header` is set, so several fluxes can share
/// one file.
pub fn write_branch_csv<W: Write>(w: W, flux: f64, table: &BranchTable, header: bool) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(header).from_writer(w);
    for j in 0..table.d {
        for n in 0..table.len(j) {
            wtr.serialize(BranchRow {
                flux,
                j,
                n_c: n,
                energy_ghz: table.energy[j][n],
                nt: table.nt[j][n],
                confidence: table.confidence[j][n],
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct CrossingRecord {
    pair: [usize; 2],
    flux: f64,
    n_c_star: f64,
    #[serde(rename = "gap_MHz")]
    gap_mhz: f64,
    kind: CrossingKind,
    delta: usize,
    adiabatic: bool,
}

/// JSON array of crossing records.
pub fn write_crossings_json<'a, W: Write>(w: W, events: impl IntoIterator<Item = &'a CrossingEvent>) -> Result<()> {
    let recs: Vec<CrossingRecord> = events
        .into_iter()
        .map(|e| CrossingRecord {
            pair: [e.branch_pair.0, e.branch_pair.1],
            flux: e.flux_ext,
            n_c_star: e.n_c_star,
            gap_mhz: e.gap_mhz,
            kind: e.kind,
            delta: e.delta,
            adiabatic: e.adiabatic,
        })
        .collect();
    serde_json::to_writer_pretty(w, &recs)?;
    Ok(())
}
