//! Run a grid through the same argument parser as the `actroute` binary and
//! print the summary table.
//!
//! cargo run --release --example table_grid -- --truth sigmoid,tanh --seeds 0-2 --out /tmp/grid

use actroute::harness::{parse_cli, run_grid};

fn main() -> actroute::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let args = if args.is_empty() {
        ["--truth", "relu,sigmoid", "--seeds", "0-1", "--epochs", "150", "--out", "table_grid_out"]
            .map(String::from)
            .to_vec()
    } else {
        args
    };
    let spec = parse_cli(&args)?;
    let out = run_grid(&spec)?;
    print!("{}", out.summary.to_csv());

    println!("\nrouted selection (fraction of seeds choosing the truth):");
    for c in out.summary.cells.iter().filter(|c| c.model.is_routed()) {
        println!(
            "  {:<22} {:<10} {:.2}   final p(true) > 0.9 in {} seed(s)",
            c.model.to_string(),
            c.truth.label(),
            c.selection_fraction.unwrap_or(0.0),
            c.converged_seeds.unwrap_or(0)
        );
    }
    println!("\nartifacts in {}", spec.out.display());
    Ok(())
}
