use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chaos_lfsr::cipher::KEY_REUSE_WARNING;
use chaos_lfsr::imageio::{corr2, encrypt_image, histogram_text, read_pgm, render_bitmap, write_pgm};
use chaos_lfsr::period::{check_proposition1, log2_histogram, PeriodReport, Proposition1Summary};
use chaos_lfsr::randstats::{run_suite, BitSequence};
use chaos_lfsr::{Execution, Key, MapFamily};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

const MAP_NOTE: &str = "The map is selected with --map and is NOT stored in the ciphertext. \
Decrypting with the wrong map (or key) silently produces garbage, so record both.";

#[derive(Parser)]
#[command(name = "chaos-lfsr", version, about = "Chaotic-map stream ciphers perturbed by an LFSR")]
#[command(after_help = MAP_NOTE)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapArg {
    /// Skew tent map
    Stm,
    /// Modified logistic map
    Mlm,
}

impl From<MapArg> for MapFamily {
    fn from(m: MapArg) -> Self {
        match m {
            MapArg::Stm => MapFamily::Stm,
            MapArg::Mlm => MapFamily::Mlm,
        }
    }
}

#[derive(Args)]
struct KeyArgs {
    /// Chaotic map; not recorded in any output
    #[arg(long, value_enum)]
    map: MapArg,
    /// 24 hex characters (x0 | gamma | LFSR seed)
    #[arg(long)]
    key: String,
}

#[derive(Args)]
#[command(after_help = MAP_NOTE)]
struct CryptArgs {
    #[command(flatten)]
    key: KeyArgs,
    /// Input file (default: standard input)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Output file (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print a fresh random key
    Keygen {
        #[arg(long, value_enum)]
        map: MapArg,
    },
    /// XOR the input with the keystream
    Encrypt(CryptArgs),
    /// Inverse of encrypt (the same operation)
    Decrypt(CryptArgs),
    /// Raw keystream bytes, first bit in the most significant position
    Keystream {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long)]
        bits: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomness test battery on a file's bits; exit 3 if any test fails
    Nist {
        #[arg(long = "in")]
        input: PathBuf,
        /// Use only the first N bits
        #[arg(long)]
        bits: Option<usize>,
        /// key=value output instead of the table
        #[arg(long)]
        kv: bool,
    },
    /// Measure keystream periods for random keys at small precision
    Period {
        #[arg(long, value_enum)]
        map: MapArg,
        /// Fractional bits n (8..=16)
        #[arg(long)]
        precision: u32,
        /// LFSR order k (3, 5 or 7) or "none" for the bare map
        #[arg(long)]
        lfsr_order: String,
        #[arg(long)]
        trials: usize,
        /// Seed of the key sampler
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// One CSV row per trial
        #[arg(long)]
        csv: bool,
    },
    /// Encrypt the pixel payload of a binary PGM
    ImageEncrypt {
        #[command(flatten)]
        key: KeyArgs,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pearson correlation of two equally sized PGM images
    ImageCorr {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Gray-level histogram as "value count" lines
    ImageHist {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Render keystream bits as a black/white PGM (1 = black)
    Bitmap {
        #[command(flatten)]
        key: KeyArgs,
        /// Disable the LFSR perturbation
        #[arg(long)]
        no_lfsr: bool,
        #[arg(long)]
        bits: usize,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure keystream throughput
    Bench {
        #[arg(long, value_enum)]
        map: MapArg,
        #[arg(long, default_value_t = 1 << 20)]
        bytes: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn io_failure(path: Option<&Path>, err: io::Error) -> Failure {
    match path {
        Some(p) => usage(format!("{}: {err}", p.display())),
        None => usage(err.to_string()),
    }
}

fn parse_key(args: &KeyArgs) -> Result<Key, Failure> {
    Key::parse(&args.key, args.map.into()).map_err(|e| invalid(format!("invalid --key: {e}")))
}

fn read_input(path: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match path {
        Some(p) => fs::read(p).map_err(|e| io_failure(Some(p), e)),
        None => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).map_err(|e| io_failure(None, e))?;
            Ok(buf)
        }
    }
}

fn write_output(path: Option<&Path>, data: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, data).map_err(|e| io_failure(Some(p), e)),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(data).and_then(|_| out.flush()).map_err(|e| io_failure(None, e))
        }
    }
}

fn read_image(path: &Path, flag: &str) -> Result<chaos_lfsr::imageio::GrayImage, Failure> {
    let bytes = read_input(Some(path))?;
    read_pgm(&bytes).map_err(|e| invalid(format!("{flag} {}: {e}", path.display())))
}

fn keystream_bits(key: &Key, bits: u64) -> Vec<u8> {
    let mut g = key.generator();
    let mut out = g.bytes((bits / 8) as usize);
    let rem = (bits % 8) as usize;
    if rem > 0 {
        let tail = g.bits(rem).iter().enumerate().fold(0u8, |acc, (i, &b)| acc | b << (7 - i));
        out.push(tail);
    }
    out
}

fn period_text(s: &Proposition1Summary) -> String {
    let mut out = String::new();
    let order = s.order.map_or("none".to_string(), |k| k.to_string());
    out += &format!("map {} precision {} lfsr-order {} trials {}\n", s.family, s.bits, order, s.trials.len());
    if let Some(pz) = s.lfsr_period {
        out += &format!("P_z {pz}\n");
        out += &format!("bit periods divisible by {pz}: {}/{}\n", s.divisible_count(), s.trials.len());
        let exceptions = s.exceptions();
        if exceptions.is_empty() {
            out += "exceptions: none\n";
        }
        for t in exceptions {
            let p = t.perturbed.as_ref().unwrap();
            out += &format!(
                "exception trial {} x0 {:#x} gamma {:#x} seed {:#x} bit period {}\n",
                t.index, t.key.x0, t.key.gamma_raw, t.key.lfsr_seed, p.bit_period
            );
        }
    }
    let fmt_median = |m: Option<f64>| m.map_or("-".to_string(), |v| v.to_string());
    out += &format!("bare state period median {}\n", fmt_median(s.median_bare_period()));
    let hist = |periods: &[u64]| {
        log2_histogram(periods)
            .iter()
            .map(|(b, c)| format!("2^{b}:{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    out += &format!("bare histogram {}\n", hist(&s.bare_state_periods()));
    if s.lfsr_period.is_some() {
        out += &format!("perturbed bit period median {}\n", fmt_median(s.median_perturbed_period()));
        out += &format!("perturbed histogram {}\n", hist(&s.perturbed_bit_periods()));
    }
    out
}

fn period_csv(s: &Proposition1Summary) -> String {
    let mut out = String::from(
        "trial,x0,gamma_raw,lfsr_seed,bare_state_period,bare_tail,bare_bit_period,\
perturbed_state_period,perturbed_tail,perturbed_bit_period,multiple_of_pz\n",
    );
    let cols = |r: Option<&PeriodReport>| match r {
        Some(r) => format!("{},{},{}", r.state_period, r.tail_length, r.bit_period),
        None => ",,".to_string(),
    };
    for t in &s.trials {
        let p = t.perturbed.as_ref();
        let multiple = p.and_then(PeriodReport::multiple_of_lfsr_period).map_or(String::new(), |m| m.to_string());
        out += &format!(
            "{},{},{},{},{},{},{}\n",
            t.index,
            t.key.x0,
            t.key.gamma_raw,
            t.key.lfsr_seed,
            cols(Some(&t.bare)),
            cols(p),
            multiple
        );
    }
    out
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Keygen { map } => {
            let key = Key::generate_os(map.into()).map_err(|e| usage(e.to_string()))?;
            println!("{}", key.encode());
        }
        Command::Encrypt(args) | Command::Decrypt(args) => {
            let key = parse_key(&args.key)?;
            eprintln!("warning: {KEY_REUSE_WARNING}");
            let mut data = read_input(args.input.as_deref())?;
            chaos_lfsr::cipher::apply_keystream(&key, &mut data);
            write_output(args.out.as_deref(), &data)?;
        }
        Command::Keystream { key, bits, out } => {
            let key = parse_key(&key)?;
            write_output(out.as_deref(), &keystream_bits(&key, bits))?;
        }
        Command::Nist { input, bits, kv } => {
            let bytes = read_input(Some(&input))?;
            if let Some(n) = bits {
                if n > bytes.len() * 8 {
                    return Err(invalid(format!("--bits {n} exceeds the {} bits in --in", bytes.len() * 8)));
                }
            }
            let seq = BitSequence::from_bytes(&bytes, bits).map_err(|e| invalid(format!("--in: {e}")))?;
            let report = run_suite(&seq, Execution::default());
            print!("{}", if kv { report.to_key_value() } else { report.to_text() });
            if !report.all_pass {
                return Err(Failure { code: 3, message: String::new() });
            }
        }
        Command::Period { map, precision, lfsr_order, trials, seed, csv } => {
            let order = match lfsr_order.as_str() {
                "none" => None,
                k => Some(k.parse::<u32>().map_err(|_| usage(format!("--lfsr-order: expected a number or none, got {k:?}")))?),
            };
            let summary = check_proposition1(trials, precision, order, map.into(), seed, Execution::default())
                .map_err(|e| usage(format!("--precision/--lfsr-order: {e}")))?;
            print!("{}", if csv { period_csv(&summary) } else { period_text(&summary) });
        }
        Command::ImageEncrypt { key, input, out } => {
            let key = parse_key(&key)?;
            let img = read_image(&input, "--in")?;
            write_output(Some(&out), &write_pgm(&encrypt_image(&key, &img)))?;
        }
        Command::ImageCorr { a, b } => {
            let ia = read_image(&a, "--a")?;
            let ib = read_image(&b, "--b")?;
            let r = corr2(&ia, &ib).map_err(|e| invalid(e.to_string()))?;
            println!("{r:.6}");
        }
        Command::ImageHist { input } => {
            print!("{}", histogram_text(&read_image(&input, "--in")?));
        }
        Command::Bitmap { key, no_lfsr, bits, width, out } => {
            let key = parse_key(&key)?;
            let mut g = if no_lfsr { key.bare_generator() } else { key.generator() };
            let seq = BitSequence::from_bits(&g.bits(bits)).map_err(|e| usage(format!("--bits: {e}")))?;
            let img = render_bitmap(&seq, width).map_err(|e| usage(format!("--width: {e}")))?;
            write_output(Some(&out), &write_pgm(&img))?;
        }
        Command::Bench { map, bytes } => {
            let mut keystream = Key::generate_os(map.into()).map_err(|e| usage(e.to_string()))?.generator();
            let start = Instant::now();
            let out = keystream.bytes(bytes);
            let secs = start.elapsed().as_secs_f64();
            std::hint::black_box(out);
            let family: MapFamily = map.into();
            println!("{family} {bytes} bytes in {secs:.3} s: {:.0} bytes/s", bytes as f64 / secs.max(1e-9));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}
