//! Trajectory and fit figures for a single run, written as standalone SVG.
//!
//! cargo run --release --example plots -- [truth] [out_dir]

use std::path::PathBuf;

use actroute::harness::{emit_fit_plot, emit_trajectory_plot, run_cell, ExperimentSpec, GridCell, ModelVariant};
use actroute::ActivationKind;

fn main() -> actroute::Result<()> {
    let mut args = std::env::args().skip(1);
    let truth: ActivationKind = args.next().as_deref().unwrap_or("tanh").parse()?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| "plots_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| actroute::Error::Unsupported(e.to_string()))?;

    let spec = ExperimentSpec::default();
    let catalog = spec.data.catalog()?;
    for model in [ModelVariant::routed(0.3), ModelVariant::routed(0.0), ModelVariant::fixed(truth)] {
        let cell = GridCell { truth, model, seed: 0 };
        let rec = run_cell(&spec, cell);
        let (_, test) = spec.data.build(truth, 0)?;
        emit_fit_plot(&rec, &test, catalog, &out.join(format!("{}_fit.svg", cell.dir_name())))?;
        if model.is_routed() {
            emit_trajectory_plot(&rec, &out.join(format!("{}_trajectory.svg", cell.dir_name())))?;
        }
        println!("{:<24} test MSE {:.5}  selected {:?}", model.to_string(), rec.test_mse.unwrap_or(f64::NAN), rec.selected);
    }
    println!("figures written to {}", out.display());
    Ok(())
}
