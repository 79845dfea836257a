use clap::Parser;
use freeseg_cli::Cli;

fn main() {
    let cli = Cli::parse();
    match freeseg_cli::run(cli) {
        Ok(report) => {
            eprintln!(
                "{:?}: {} in, {} out, {} rejected ({:.2}s)",
                report.stage,
                report.records_in,
                report.records_out,
                report.rejected(),
                report.wall_time
            );
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
