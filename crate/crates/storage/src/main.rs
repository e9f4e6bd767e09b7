use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use regen_store::{encode_file, stats, EncodeOptions, Family, InputMode, RepairMode, Store};

#[derive(Parser)]
#[command(name = "regen-store", version, about = "Regenerating-code file store")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DirArg {
    /// Store directory.
    #[arg(long = "dir", visible_alias = "out-dir", default_value = ".")]
    dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Stripe and encode a file into n chunk files plus a manifest.
    Encode {
        file: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 257)]
        q: u32,
        #[arg(long = "out-dir", visible_alias = "dir")]
        out_dir: PathBuf,
        /// Payload interpretation.
        #[arg(long, value_enum, default_value_t = InputMode::Bytes)]
        input: InputMode,
    },
    /// Delete a node's chunk.
    Fail {
        node: usize,
        #[command(flatten)]
        dir: DirArg,
    },
    /// Regenerate a node's chunk from helpers.
    Repair {
        node: usize,
        #[command(flatten)]
        dir: DirArg,
        /// Comma-separated helper nodes.
        #[arg(long, value_delimiter = ',')]
        helpers: Option<Vec<usize>>,
        /// Afterwards decode from every k-subset of live nodes and compare.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decode the original file from k nodes.
    Reconstruct {
        #[command(flatten)]
        dir: DirArg,
        /// Comma-separated nodes; defaults to the k lowest live nodes.
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repair bandwidth totals from the ledger.
    Stats {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long)]
        json: bool,
    },
    /// Check the MDS property and the consistency of live chunks.
    Verify {
        #[command(flatten)]
        dir: DirArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Encode {
            file,
            family,
            n,
            k,
            q,
            out_dir,
            input,
        } => {
            let opts = EncodeOptions {
                family,
                n,
                k,
                q,
                input_mode: input,
            };
            let m = encode_file(&file, &out_dir, opts)?;
            println!(
                "encoded {} symbols into {} stripes: n={} k={} d={} alpha={} B={} q={}",
                m.original_len, m.stripes, m.n, m.k, m.d, m.alpha, m.stripe_symbols, m.q
            );
        }
        Command::Fail { node, dir } => {
            Store::open(&dir.dir)?.fail(node)?;
            println!("node {node} failed");
        }
        Command::Repair {
            node,
            dir,
            helpers,
            verify,
            seed,
        } => {
            let mut store = Store::open(&dir.dir)?;
            let out = store.repair(node, helpers.as_deref())?;
            let mode = match out.mode {
                RepairMode::Optimal => "optimal",
                RepairMode::Fallback => "fallback",
            };
            println!(
                "repaired node {} ({mode}) from {:?}: {} symbols/stripe, {} total, B={}",
                out.node,
                out.helpers,
                out.symbols_per_stripe,
                out.symbols_downloaded,
                store.manifest().stripe_symbols
            );
            if verify {
                let check = store.check_subsets(seed)?;
                println!(
                    "verify: {} of {} subsets decoded{}; inconsistent nodes {:?}",
                    check.subsets_checked,
                    check.subsets_total,
                    if check.exhaustive { "" } else { " (sampled)" },
                    check.inconsistent_nodes
                );
                if !check.passes() {
                    eprintln!("verify failed: bad subset {:?}", check.first_bad_subset);
                    return Ok(false);
                }
            }
        }
        Command::Reconstruct { dir, nodes, out } => {
            let store = Store::open(&dir.dir)?;
            let payload = store.reconstruct(nodes.as_deref())?;
            fs::write(&out, &payload).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} bytes to {}", payload.len(), out.display());
        }
        Command::Stats { dir, json } => {
            let s = stats(&dir.dir)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&s)?);
            } else {
                println!(
                    "repairs: {} ({} optimal, {} fallback)",
                    s.repairs, s.optimal_repairs, s.fallback_repairs
                );
                for r in &s.per_repair {
                    let mode = match r.mode {
                        Some(RepairMode::Optimal) => "optimal",
                        Some(RepairMode::Fallback) => "fallback",
                        None => "unknown",
                    };
                    println!(
                        "  node {} {mode}: {} vs {} symbols/stripe over {} stripes",
                        r.node, r.symbols_per_stripe, r.baseline_per_stripe, r.stripes
                    );
                }
                println!(
                    "repair bandwidth: {} symbols vs {} naive",
                    s.repair_symbols, s.baseline_symbols
                );
            }
        }
        Command::Verify { dir, seed, json } => {
            let store = Store::open(&dir.dir)?;
            let report = store.verify(seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!(
                    "mds: {} ({} of {} subsets{})",
                    if report.mds.first_failure.is_none() {
                        "ok"
                    } else {
                        "FAILED"
                    },
                    report.mds.checked,
                    report.mds.total,
                    if report.mds.exhaustive {
                        ""
                    } else {
                        ", sampled"
                    }
                );
                println!("live nodes: {:?}", report.live_nodes);
                match &report.subsets {
                    Some(c) => println!(
                        "chunks: {} subsets decoded, inconsistent {:?}, bad subset {:?}",
                        c.subsets_checked, c.inconsistent_nodes, c.first_bad_subset
                    ),
                    None => println!("chunks: fewer than k live nodes"),
                }
            }
            return Ok(report.passes());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
