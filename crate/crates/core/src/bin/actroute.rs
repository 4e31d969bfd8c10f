use std::process::ExitCode;

use actroute::harness::{parse_cli, run_grid, wants_help, USAGE};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if wants_help(&args) {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let spec = match parse_cli(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("actroute: {e}\n\n{USAGE}");
            return ExitCode::from(2);
        }
    };
    eprintln!("running {} runs into {}", spec.cells().len(), spec.out.display());
    match run_grid(&spec) {
        Ok(out) => {
            print!("{}", out.summary.to_csv());
            let failed = out.records.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} run(s) failed; see record.json files");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("actroute: {e}");
            ExitCode::FAILURE
        }
    }
}
