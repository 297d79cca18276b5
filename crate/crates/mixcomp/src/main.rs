use std::io::Write;

use clap::Parser;

use mixcomp::cli::{run, CliArgs, CliError};

fn main() {
    let args = match CliArgs::try_parse() {
        Ok(args) => args,
        Err(e) if e.use_stderr() => {
            eprint!("{e}");
            std::process::exit(1);
        }
        Err(e) => {
            // --help / --version
            print!("{e}");
            std::process::exit(0);
        }
    };

    let threads = args.threads.or_else(|| {
        std::env::var("MIXCOMP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be >= 1");
            std::process::exit(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }

    match run(&args) {
        Ok(json) => {
            if let Some(path) = &args.out {
                if let Err(e) = std::fs::write(path, json + "\n") {
                    eprintln!("error: writing {}: {e}", path.display());
                    std::process::exit(3);
                }
            } else {
                let mut stdout = std::io::stdout().lock();
                let _ = writeln!(stdout, "{json}");
            }
        }
        Err(err @ CliError::Usage(_)) | Err(err @ CliError::Parse(_)) | Err(err @ CliError::Estimation(_)) => {
            eprintln!("error: {}", err.message());
            std::process::exit(err.exit_code());
        }
    }
}
