//! Encode a bitstream into balanced PET descriptions and decode a prefix
//! from any subset of them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use jnsc_cli::{load_profile, read_json, write_json};
use jnsc_core::pet::{
    check_layout, decode, encode, make_layout, pack_bits, payload_checksum, unpack_bits,
    Description, PetManifest,
};

#[derive(Parser)]
#[command(name = "pet", version, about = "Priority encoding transmission codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Encode {
        /// `{"levels": [...], "rate": r}` or a bare array of levels.
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        rate: Option<f64>,
        /// Source samples per block, n.
        #[arg(long)]
        block: usize,
        /// Raw bytes, read most-significant bit first.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Decode {
        #[arg(long)]
        manifest: PathBuf,
        /// Description files; each is matched to its index by checksum.
        #[arg(long, num_args = 0.., value_delimiter = ',')]
        shares: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn share_name(index: usize) -> String {
    format!("desc_{index}.bin")
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Encode {
            profile,
            rate,
            block,
            input,
            out,
        } => {
            let profile = load_profile(&profile, rate)?;
            let layout = make_layout(&profile, block)?;
            check_layout(&layout)?;
            let bytes = std::fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let bits = unpack_bits(&bytes, bytes.len() * 8);
            let descriptions = encode(&bits, &layout, &profile)?;
            std::fs::create_dir_all(&out)?;
            for d in &descriptions {
                std::fs::write(out.join(share_name(d.index)), pack_bits(&d.payload))?;
            }
            let manifest = PetManifest::new(&profile, &layout, &descriptions);
            write_json(&out.join("manifest.json"), &manifest)?;
            println!(
                "{} descriptions of {} bits; prefixes ξ = {:?}",
                descriptions.len(),
                layout.columns(),
                layout.source_prefix_lengths()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Decode {
            manifest,
            shares,
            out,
        } => {
            let manifest: PetManifest = read_json(&manifest)?;
            let (profile, layout) = manifest.restore()?;
            let mut used = vec![false; manifest.checksums.len()];
            let received = shares
                .iter()
                .map(|p| identify(p, &manifest, layout.columns(), &mut used))
                .collect::<Result<Vec<_>>>()?;
            let prefix = decode(&received, &layout, &profile)?;
            std::fs::write(&out, pack_bits(&prefix))?;
            println!("recovered {} bits from {} descriptions", prefix.len(), received.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Identical payloads (repetition levels) take the lowest unused index.
fn identify(path: &Path, manifest: &PetManifest, bits: usize, used: &mut [bool]) -> Result<Description> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() != bits.div_ceil(8) {
        bail!("{} has {} bytes, expected {}", path.display(), bytes.len(), bits.div_ceil(8));
    }
    let payload = unpack_bits(&bytes, bits);
    let sum = payload_checksum(&payload);
    let Some(i) = (0..used.len()).find(|&i| !used[i] && manifest.checksums[i] == sum) else {
        bail!("{} matches no unused description in the manifest", path.display());
    };
    used[i] = true;
    Ok(Description {
        index: i + 1,
        payload,
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
