use clap::Parser;
use kgqa_service::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli) {
        Ok(out) => println!("{}", out.render(format)),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.exit_code());
        }
    }
}
