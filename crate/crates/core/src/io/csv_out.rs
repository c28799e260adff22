//! CSV writers. Every file starts with a header row.

use crate::dynsys::FlowSample;
use crate::partition::Partition;
use crate::ta::{Run, TimedAutomaton};
use std::io::Write;

pub type CsvResult = Result<(), csv::Error>;

/// `t,x1,...,xn`, one row per integration step.
pub fn write_flow<W: Write>(out: W, sample: &FlowSample) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    let n = sample.states.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    let mut last = f64::NEG_INFINITY;
    for (t, x) in sample.times.iter().zip(&sample.states) {
        if *t <= last {
            continue;
        }
        last = *t;
        let mut row = vec![format!("{t:?}")];
        row.extend(x.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,location,c1,...,cm`: the state at the start of each segment and at the
/// end of the run. Instantaneous switches collapse onto the last location
/// entered at that time, which keeps times strictly increasing.
pub fn write_run<W: Write>(out: W, ta: &TimedAutomaton, run: &Run) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "location".to_string()];
    header.extend(ta.clocks().iter().cloned());
    w.write_record(&header)?;
    let mut rows: Vec<(f64, usize, Vec<f64>)> = Vec::new();
    for s in &run.segments {
        let row = (s.start, s.location, s.entry.clone());
        match rows.last_mut() {
            Some(last) if last.0 >= s.start => *last = row,
            _ => rows.push(row),
        }
    }
    if let Some(s) = run.segments.last() {
        let end = s.start + s.delay;
        if rows.last().map_or(true, |r| end > r.0) {
            rows.push((
                end,
                s.location,
                s.entry.iter().map(|c| c + s.delay).collect(),
            ));
        }
    }
    for (t, loc, clocks) in rows {
        let mut row = vec![format!("{t:?}"), ta.location(loc).id.clone()];
        row.extend(clocks.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `point,x1,...,xn,cells` with the labels of every cell containing each
/// lattice point, separated by `;`.
pub fn write_membership<W: Write>(out: W, partition: &Partition) -> CsvResult {
    let mut w = csv::Writer::from_writer(out);
    let grid = partition.grid();
    let mut header = vec!["point".to_string()];
    header.extend((1..=grid.dim()).map(|i| format!("x{i}")));
    header.push("cells".into());
    w.write_record(&header)?;
    for p in 0..grid.len() {
        let mut row = vec![p.to_string()];
        row.extend(grid.point(p).iter().map(|v| format!("{v:?}")));
        let labels: Vec<String> = partition
            .cells_at(p)
            .iter()
            .map(|&c| partition.cells()[c as usize].label())
            .collect();
        row.push(labels.join(";"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
