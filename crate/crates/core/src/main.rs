use clap::Parser;

use cogs::cli::{run, Cli};
use cogs::counterfactual::Limits;

fn main() {
    let cli = Cli::parse();
    let code = run(
        &cli,
        &Limits::from_env(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
