//! Per-run figures: probability trajectories and prediction-vs-input scatters.

use std::path::Path;

use crate::activations::{ActivationKind, Catalog};
use crate::harness::grid::RunRecord;
use crate::harness::svg::{Chart, Series, PALETTE};
use crate::synthdata::Dataset;
use crate::{Error, Result};

/// Builds the trajectory chart: one line per candidate, catalog order.
pub fn trajectory_chart(record: &RunRecord) -> Result<Chart> {
    if !record.cell.model.is_routed() {
        return Err(Error::Unsupported(format!(
            "{} is a fixed-activation run; it has no selection probabilities to plot",
            record.cell.dir_name()
        )));
    }
    let mut chart = Chart::new(
        format!("Selection probabilities, {} truth, seed {}", record.cell.truth.label(), record.cell.seed),
        "epoch",
        "p_soft",
    )
    .with_y_range(0.0, 1.0);
    for kind in ActivationKind::ALL {
        let pts = record.trace.records.iter().map(|r| (r.epoch as f64, r.p_soft.get(kind))).collect();
        chart.push(Series::line(kind.label(), PALETTE[kind.index()], pts));
    }
    Ok(chart)
}

pub fn emit_trajectory_plot(record: &RunRecord, path: &Path) -> Result<()> {
    let svg = trajectory_chart(record)?.render();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Informative column against predicted and true targets on `data`.
///
/// Records without stored parameters (failed runs) plot the targets only.
pub fn fit_chart(record: &RunRecord, data: &Dataset, catalog: Catalog) -> Result<Chart> {
    let x1 = data.x.column(0);
    let mut chart = Chart::new(
        format!("{} on {} truth, seed {}", record.cell.model, record.cell.truth.label(), record.cell.seed),
        "x1",
        "y",
    );
    let truth: Vec<(f64, f64)> = x1.iter().zip(data.y.iter()).map(|(&x, &y)| (x, y)).collect();
    chart.push(Series::dots("true", PALETTE[0], truth));
    if let Some(net) = record.network(catalog) {
        let pred = net.predict(&data.x)?;
        let pts = x1.iter().enumerate().map(|(i, &x)| (x, pred.get(i, 0))).collect();
        chart.push(Series::dots("predicted", PALETTE[1], pts));
    }
    Ok(chart)
}

pub fn emit_fit_plot(record: &RunRecord, data: &Dataset, catalog: Catalog, path: &Path) -> Result<()> {
    let svg = fit_chart(record, data, catalog)?.render();
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
