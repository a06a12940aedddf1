//! CSV output of configurations and event logs.

use std::io::Write;

use super::{Event, LatticeConfig};
use crate::error::Result;

/// One row per site: `run_id, t, x_1..x_d, occ`.
pub fn write_snapshot<W: Write>(w: &mut csv::Writer<W>, run_id: &str, config: &LatticeConfig) -> Result<()> {
    let g = config.geometry();
    let mut x = vec![0; g.dim()];
    for idx in 0..g.site_count() {
        g.coords_into(idx, &mut x);
        let mut row = vec![run_id.to_string(), config.time.to_string()];
        row.extend(x.iter().map(i64::to_string));
        row.push(u8::from(config.get(idx)).to_string());
        w.write_record(&row)?;
    }
    Ok(())
}

pub fn snapshot_header(d: usize) -> Vec<String> {
    let mut h = vec!["run_id".to_string(), "t".to_string()];
    h.extend((1..=d).map(|i| format!("x_{i}")));
    h.push("occ".to_string());
    h
}

pub fn event_header(d: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=d).map(|i| format!("x_{i}")));
    h.extend((1..=d).map(|i| format!("y_{i}")));
    h
}

/// Event log rows `t, x coords, y coords` (`x` copied `y`).
pub fn write_events<W: Write>(w: &mut csv::Writer<W>, config: &LatticeConfig, events: &[Event]) -> Result<()> {
    let g = config.geometry();
    for e in events {
        let mut row = vec![e.t.to_string()];
        row.extend(g.coords(e.target).iter().map(i64::to_string));
        row.extend(g.coords(e.source).iter().map(i64::to_string));
        w.write_record(&row)?;
    }
    Ok(())
}
