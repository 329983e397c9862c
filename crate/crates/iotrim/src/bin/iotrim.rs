use std::net::Ipv4Addr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use iotrim::cli::{self, CliError, LoadedLab, ReportKind, RuleSpec, TrimOptions};
use iotrim::dnsctl::{RuleKind, RuleScope};

#[derive(Parser)]
#[command(name = "iotrim", version, about = "Discover, block, and classify IoT device destinations in an emulated lab")]
struct Args {
    /// Lab config file; defaults to the bundled three-device lab
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for lab randomness (round-robin cursors)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Clock pacing in real seconds per virtual second (0 = instant)
    #[arg(long, global = true)]
    scale: Option<f64>,
    /// Output directory override
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// DNS-behavior sweep: unique query names per power-off duration
    Sweep {
        #[arg(long)]
        device: String,
    },
    /// Run full campaigns and print the destination/blockable/traffic tables
    Trim {
        /// Device id (repeatable)
        #[arg(long)]
        device: Vec<String>,
        /// All configured devices
        #[arg(long)]
        all: bool,
        /// Campaign epochs for longitudinal comparison
        #[arg(long, default_value_t = 1)]
        epochs: u32,
    },
    /// Render tables from persisted ledgers without re-running
    Report {
        /// destinations|blockable|traffic|generalize|diff
        #[arg(long)]
        kind: String,
        /// Output directory of a previous trim run
        #[arg(long)]
        ledger: PathBuf,
        /// Second ledger for diff
        #[arg(long)]
        ledger_b: Option<PathBuf>,
    },
    /// Resolver administration and the standalone DNS endpoint
    Dns {
        #[command(subcommand)]
        command: DnsCommand,
    },
}

#[derive(Subcommand)]
enum DnsCommand {
    /// Serve the zone over UDP until interrupted
    Serve {
        #[arg(long, default_value_t = 5353)]
        dns_port: u16,
        /// Rules file applied at startup
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// One-shot lookup through a device's view
    Resolve {
        #[arg(long)]
        name: String,
        #[arg(long)]
        device: Option<String>,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Add a DNS override to a rules file
    Block {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        name: String,
        /// Scope to one device; omit for ALL
        #[arg(long)]
        device: Option<String>,
    },
    /// Remove a DNS override from a rules file
    Unblock {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        device: Option<String>,
    },
    /// Add an address drop rule for a hard-coded destination
    Drop {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long)]
        ip: Ipv4Addr,
        #[arg(long)]
        device: Option<String>,
    },
}

fn scope_of(device: Option<String>) -> RuleScope {
    match device {
        Some(id) => RuleScope::Device(id),
        None => RuleScope::All,
    }
}

fn run(args: Args) -> Result<(), CliError> {
    let mut lab = match &args.config {
        Some(path) => LoadedLab::from_config_file(path)?,
        None => LoadedLab::bundled(),
    };
    if let Some(scale) = args.scale {
        if scale < 0.0 {
            return Err(CliError::Usage("--scale must be >= 0".into()));
        }
        lab.scale = scale;
    }
    if let Some(out) = &args.out {
        lab.output_dir = out.clone();
    }
    let mut stdout = std::io::stdout().lock();

    match args.command {
        Command::Sweep { device } => {
            cli::cmd_sweep(&lab, &device, args.seed, args.json, &mut stdout)
        }
        Command::Trim { device, all, epochs } => cli::cmd_trim(
            &lab,
            &TrimOptions { devices: device, all, epochs, seed: args.seed, json: args.json },
            &mut stdout,
        ),
        Command::Report { kind, ledger, ledger_b } => {
            let kind: ReportKind = kind.parse()?;
            cli::cmd_report(kind, &ledger, ledger_b.as_deref(), &lab.ownership, args.json, &mut stdout)
        }
        Command::Dns { command } => match command {
            DnsCommand::Serve { dns_port, rules } => {
                let server = cli::start_dns_server(
                    &lab,
                    rules.as_deref(),
                    &format!("127.0.0.1:{dns_port}"),
                    args.seed,
                )?;
                eprintln!("iotrim dns: serving on {}", server.local_addr());
                loop {
                    std::thread::sleep(std::time::Duration::from_secs(3600));
                }
            }
            DnsCommand::Resolve { name, device, rules } => cli::cmd_dns_resolve(
                &lab,
                rules.as_deref(),
                &name,
                device.as_deref(),
                args.seed,
                &mut stdout,
            ),
            DnsCommand::Block { rules, name, device } => cli::cmd_dns_add_rule(
                &rules,
                RuleSpec { scope: scope_of(device), kind: RuleKind::DnsOverride { name } },
            ),
            DnsCommand::Unblock { rules, name, device } => cli::cmd_dns_remove_rule(
                &rules,
                &RuleSpec { scope: scope_of(device), kind: RuleKind::DnsOverride { name } },
            ),
            DnsCommand::Drop { rules, ip, device } => cli::cmd_dns_add_rule(
                &rules,
                RuleSpec { scope: scope_of(device), kind: RuleKind::IpDrop { address: ip } },
            ),
        },
    }
}

fn main() {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(err) => {
            // --help and --version are successes; anything else is usage.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(args) {
        eprintln!("iotrim: {err}");
        std::process::exit(err.exit_code());
    }
}
