use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use penduo::experiment::{run_experiment, ExperimentConfig, PRESETS};
use penduo::Error;

fn after_help() -> String {
    let mut s = String::from("Cases: elliptic, advdiff, burgers, rates, uzawa-demo\n\nPresets:\n");
    for (name, about, _) in PRESETS {
        s.push_str(&format!("  {name:<10} {about}\n"));
    }
    s.push_str("\nPrecedence: defaults < preset < --config file < flags.\n");
    s.push_str("Exit codes: 0 success, 1 invalid input, 2 runtime failure.");
    s
}

#[derive(Parser, Debug)]
#[command(name = "penduo", version, about = "Penalty and penalty-duality experiments for immersed rigid structures")]
#[command(after_help = after_help())]
struct Cli {
    /// Case name or preset.
    case: String,
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    /// Duality step (also the interface penalty factor).
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// Advection speed.
    #[arg(long)]
    c: Option<String>,
    /// on|off
    #[arg(long)]
    duality: Option<String>,
    /// on|off
    #[arg(long = "interior-penalty")]
    interior_penalty: Option<String>,
    /// wrap|penalized
    #[arg(long)]
    bc: Option<String>,
    /// on|off
    #[arg(long = "warm-start")]
    warm_start: Option<String>,
    #[arg(long)]
    xa: Option<String>,
    #[arg(long)]
    xb: Option<String>,
    #[arg(long)]
    length: Option<String>,
    #[arg(long)]
    u0: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Snapshot every N steps.
    #[arg(long)]
    stride: Option<String>,
    /// Comma-separated eps values.
    #[arg(long = "eps-sweep")]
    eps_sweep: Option<String>,
    /// all|alpha|beta|gamma|alpha_beta|custom
    #[arg(long)]
    variant: Option<String>,
}

impl Cli {
    fn flags(&self) -> Vec<(String, String)> {
        let pairs: [(&str, &Option<String>); 24] = [
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("gamma", &self.gamma),
            ("eps", &self.eps),
            ("r", &self.r),
            ("nodes", &self.nodes),
            ("steps", &self.steps),
            ("t_final", &self.t_final),
            ("nu", &self.nu),
            ("c", &self.c),
            ("duality", &self.duality),
            ("interior_penalty", &self.interior_penalty),
            ("bc", &self.bc),
            ("warm_start", &self.warm_start),
            ("xa", &self.xa),
            ("xb", &self.xb),
            ("length", &self.length),
            ("u0", &self.u0),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("out", &self.out),
            ("stride", &self.stride),
            ("eps_sweep", &self.eps_sweep),
            ("variant", &self.variant),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ExperimentConfig::load(&cli.case, cli.config.as_deref(), &cli.flags()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("penduo: {e}");
            return ExitCode::from(1);
        }
    };
    match run_experiment(&cfg) {
        Ok(report) => {
            println!("{}", serde_json::to_string(&report.summary["results"]).unwrap_or_default());
            println!("wrote {} files to {}", report.files.len(), report.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("penduo: {e}");
            let code = match e {
                Error::Validation(_) | Error::Parse { .. } => 1,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}
