//! ChaosVeil command line: conceal, reveal, capacity, keyinfo, analyze,
//! attack.
//!
//! Machine-readable JSON summaries go to stdout; human-readable tables go
//! to files. Exit codes are stable: 0 success, 1 IO/config, 2 insufficient
//! capacity, 3 no keypoints in the cover, 4 bad stego magic, 5 truncated
//! payload.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chaosveil::codec;
use chaosveil::config::{effective_config, Overrides};
use chaosveil::report::{self, MetricRecord};
use chaosveil_core::analysis::{self, Direction};
use chaosveil_core::image::Image;
use chaosveil_core::keyforge::{self, KeyforgeError};
use chaosveil_core::pipeline::{self, SchemeConfig, SchemeError};
use chaosveil_core::sift;
use chaosveil_core::stego::{self, StegoError};

#[derive(Parser)]
#[command(
    name = "chaosveil",
    version,
    about = "Image cryptology: keypoint-derived keys, chaotic keystreams, dynamic k-LSB steganography"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Flat key=value config file; CHAOSVEIL_CONFIG is the fallback.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RK4 time step of the keystream generator.
    #[arg(long)]
    dt: Option<f64>,
    /// CNN settling steps behind each pixel's bit budget.
    #[arg(long = "n-steps")]
    n_steps: Option<u32>,
}

impl CommonOpts {
    fn config(&self) -> Result<SchemeConfig, CliError> {
        Ok(effective_config(
            self.config.as_deref(),
            Overrides {
                dt: self.dt,
                n_steps: self.n_steps,
            },
        )?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encrypt a message image and embed it into a cover image.
    Conceal {
        cover: PathBuf,
        message: PathBuf,
        /// Output stego image (.pgm or .png).
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Extract and decrypt the message hidden in a stego image.
    Reveal {
        stego: PathBuf,
        /// Output message image (.pgm or .png).
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Report the embeddable bit capacity of a cover image.
    Capacity {
        cover: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Debug: print the derived key material as JSON.
    Keyinfo {
        cover: PathBuf,
        message: PathBuf,
        /// Also dump detected keypoints as CSV (x,y,sigma,theta,response).
        #[arg(long)]
        keypoints_csv: Option<PathBuf>,
        /// Include the first N keystream bytes as hex (golden-test hook).
        #[arg(long)]
        keystream: Option<usize>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Compute quality/security metrics for images against a reference.
    Analyze {
        /// Images to analyze.
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Reference image for full-reference metrics.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// CSV report path.
        #[arg(long, default_value = "report.csv")]
        csv: PathBuf,
        /// Markdown report path.
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// LOWESS trend CSV of the temporal-complexity series.
        #[arg(long)]
        lowess: Option<PathBuf>,
        /// LOWESS smoothing factor.
        #[arg(long, default_value_t = 0.9)]
        smoothing: f64,
        /// Embedding-ratio comparison CSV (needs --message).
        #[arg(long)]
        er_csv: Option<PathBuf>,
        /// Occlusion attack fractions, e.g. occlusion=1/36,1/18,1/12
        /// (needs --message; treats each input image as a cover).
        #[arg(long, value_delimiter = ',')]
        attack: Vec<String>,
        /// Message image for --er-csv and --attack.
        #[arg(long)]
        message: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the occlusion attack against a cover/message pair.
    Attack {
        cover: PathBuf,
        message: PathBuf,
        /// Occlusion fractions, e.g. 0,1/36,1/18,1/12.
        #[arg(long, value_delimiter = ',', default_values_t = [
            "0".to_string(), "1/36".to_string(), "1/18".to_string(), "1/12".to_string()
        ])]
        occlusion: Vec<String>,
        /// Directory for the occluded stego and decrypted message images.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Codec(#[from] codec::CodecError),
    #[error(transparent)]
    Config(#[from] chaosveil::config::ConfigError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("{0}")]
    Usage(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scheme(SchemeError::Stego(e)) => match e {
                StegoError::InsufficientCapacity { .. } => 2,
                StegoError::BadMagic { .. } => 4,
                StegoError::TruncatedPayload { .. } => 5,
                _ => 1,
            },
            CliError::Scheme(SchemeError::Key(KeyforgeError::NoKeypointsFound)) => 3,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// JSON float rendering: shortest round-trip form, infinities as strings.
fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "\"inf\"".into()
    } else {
        "\"-inf\"".into()
    }
}

fn parse_fraction(text: &str) -> Result<f64, CliError> {
    let err = || CliError::Usage(format!("bad occlusion fraction {text:?}"));
    let value = if let Some((num, den)) = text.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| err())?;
        let d: f64 = den.trim().parse().map_err(|_| err())?;
        if d == 0.0 {
            return Err(err());
        }
        n / d
    } else {
        text.trim().parse().map_err(|_| err())?
    };
    if !(0.0..1.0).contains(&value) {
        return Err(err());
    }
    Ok(value)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Conceal {
            cover,
            message,
            out,
            common,
        } => cmd_conceal(&cover, &message, &out, &common.config()?),
        Command::Reveal { stego, out, common } => cmd_reveal(&stego, &out, &common.config()?),
        Command::Capacity { cover, common } => cmd_capacity(&cover, &common.config()?),
        Command::Keyinfo {
            cover,
            message,
            keypoints_csv,
            keystream,
            common,
        } => cmd_keyinfo(
            &cover,
            &message,
            keypoints_csv.as_deref(),
            keystream,
            &common.config()?,
        ),
        Command::Analyze {
            images,
            reference,
            csv,
            markdown,
            lowess,
            smoothing,
            er_csv,
            attack,
            message,
            common,
        } => cmd_analyze(AnalyzeArgs {
            images,
            reference,
            csv,
            markdown,
            lowess,
            smoothing,
            er_csv,
            attack,
            message,
            cfg: common.config()?,
        }),
        Command::Attack {
            cover,
            message,
            occlusion,
            out_dir,
            common,
        } => cmd_attack(
            &cover,
            &message,
            &occlusion,
            out_dir.as_deref(),
            &common.config()?,
        ),
    }
}

fn cmd_conceal(
    cover_path: &Path,
    message_path: &Path,
    out_path: &Path,
    cfg: &SchemeConfig,
) -> Result<(), CliError> {
    let cover = codec::load_image(cover_path)?;
    let message = codec::load_image(message_path)?;
    let outcome = pipeline::conceal(&cover, &message, cfg)?;
    codec::save_image(&outcome.stego, out_path)?;
    let psnr = analysis::psnr(&outcome.stego, &cover).map_err(SchemeError::from)?;
    let entropy = analysis::shannon_entropy(&outcome.stego);
    println!(
        "{{\"capacity_bits\":{},\"payload_bits\":{},\"psnr_vs_cover\":{},\"stego_entropy\":{}}}",
        outcome.capacity_bits,
        outcome.payload_bits,
        json_num(psnr),
        json_num(entropy)
    );
    Ok(())
}

fn cmd_reveal(stego_path: &Path, out_path: &Path, cfg: &SchemeConfig) -> Result<(), CliError> {
    let stego_img = codec::load_image(stego_path)?;
    let (message, header) = pipeline::reveal_with_header(&stego_img, cfg)?;
    codec::save_image(&message, out_path)?;
    // No-reference quality hint: PSNR against a flat white field.
    let white = Image::filled(stego_img.width(), stego_img.height(), 255);
    let psnr_estimate = analysis::psnr(&stego_img, &white).map_err(SchemeError::from)?;
    println!(
        "{{\"psnr_estimate\":{},\"header\":{{\"magic\":{},\"version\":{},\"msg_width\":{},\"msg_height\":{},\"h1\":{},\"h2\":{}}}}}",
        json_num(psnr_estimate),
        stego::MAGIC,
        stego::VERSION,
        header.msg_width,
        header.msg_height,
        header.h1,
        header.h2
    );
    Ok(())
}

fn cmd_capacity(cover_path: &Path, cfg: &SchemeConfig) -> Result<(), CliError> {
    let cover = codec::load_image(cover_path)?;
    let bits =
        stego::capacity(&cover, &cfg.template, cfg.stego_steps).map_err(SchemeError::from)?;
    let pixels = cover.pixel_count();
    let mean_k = if pixels > stego::HEADER_PIXELS {
        (bits - stego::HEADER_PIXELS as u64) as f64 / (pixels - stego::HEADER_PIXELS) as f64
    } else {
        0.0
    };
    println!(
        "{{\"capacity_bits\":{bits},\"total_pixels\":{pixels},\"mean_k\":{}}}",
        json_num(mean_k)
    );
    Ok(())
}

fn cmd_keyinfo(
    cover_path: &Path,
    message_path: &Path,
    keypoints_csv: Option<&Path>,
    keystream: Option<usize>,
    cfg: &SchemeConfig,
) -> Result<(), CliError> {
    let cover = codec::load_image(cover_path)?;
    let message = codec::load_image(message_path)?;
    let stable = keyforge::key_stable(&cover);
    let descriptors = sift::detect_and_describe(&stable, &cfg.sift).map_err(SchemeError::from)?;

    if let Some(path) = keypoints_csv {
        let mut csv = String::from("x,y,sigma,theta,response\n");
        for d in &descriptors {
            let k = &d.keypoint;
            csv.push_str(&format!(
                "{:.3},{:.3},{:.3},{:.4},{:.5}\n",
                k.x, k.y, k.sigma, k.theta, k.response
            ));
        }
        std::fs::write(path, csv)?;
    }

    let chosen = keyforge::select_descriptor(&descriptors).map_err(SchemeError::from)?;
    let key = keyforge::descriptor_to_rawkey(chosen);
    let params = keyforge::derive_params(&key, &message);
    let key_bytes: Vec<String> = key.bytes().iter().map(|b| b.to_string()).collect();
    let keystream_field = match keystream {
        Some(count) => {
            let ks = chaosveil_core::chaoscrypt::generate_keystream(
                &params,
                &cfg.template,
                count,
                cfg.dt,
            )
            .map_err(SchemeError::from)?;
            let hex: String = ks.bytes().iter().map(|b| format!("{b:02x}")).collect();
            format!(",\"keystream_hex\":\"{hex}\"")
        }
        None => String::new(),
    };
    println!(
        "{{\"keypoints\":{},\"raw_key\":[{}],\"h1\":{},\"h2\":{},\"key_sum\":{},\"key_xor\":{},\"lambda\":{},\"h\":{},\"x0\":[{},{},{}],\"n0\":{}{}}}",
        descriptors.len(),
        key_bytes.join(","),
        params.h1,
        params.h2,
        params.key_sum,
        params.key_xor,
        params.lambda,
        json_num(params.h),
        json_num(params.x0[0]),
        json_num(params.x0[1]),
        json_num(params.x0[2]),
        params.n0,
        keystream_field
    );
    Ok(())
}

struct AnalyzeArgs {
    images: Vec<PathBuf>,
    reference: Option<PathBuf>,
    csv: PathBuf,
    markdown: Option<PathBuf>,
    lowess: Option<PathBuf>,
    smoothing: f64,
    er_csv: Option<PathBuf>,
    attack: Vec<String>,
    message: Option<PathBuf>,
    cfg: SchemeConfig,
}

/// Header-only sniff of a stego image: payload bits if magic matches.
fn sniff_payload_bits(img: &Image, cfg: &SchemeConfig) -> Option<(u64, u32, u32)> {
    let payload = stego::extract(img, &cfg.template, cfg.stego_steps).ok()?;
    Some((
        stego::HEADER_PIXELS as u64 + 8 * payload.cipher.len() as u64,
        payload.header.msg_width as u32,
        payload.header.msg_height as u32,
    ))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let cfg = &args.cfg;
    let reference = args
        .reference
        .as_deref()
        .map(codec::load_image)
        .transpose()?;
    let message = args.message.as_deref().map(codec::load_image).transpose()?;
    // The first token may name the attack kind: `occlusion=1/36,...`.
    let attack_labels: Vec<String> = args
        .attack
        .iter()
        .map(|t| {
            t.strip_prefix("occlusion=")
                .unwrap_or(t.as_str())
                .to_string()
        })
        .collect();
    let fractions: Vec<f64> = attack_labels
        .iter()
        .map(|t| parse_fraction(t))
        .collect::<Result<_, _>>()?;
    if !fractions.is_empty() && message.is_none() {
        return Err(CliError::Usage("--attack requires --message".into()));
    }
    if args.er_csv.is_some() && message.is_none() {
        return Err(CliError::Usage("--er-csv requires --message".into()));
    }

    let mut inputs: Vec<(String, Image)> = Vec::new();
    for path in &args.images {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        inputs.push((name, codec::load_image(path)?));
    }
    inputs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut records = Vec::new();
    let mut er_rows = Vec::new();
    for (name, img) in &inputs {
        let mut rec = MetricRecord {
            name: name.clone(),
            entropy: analysis::shannon_entropy(img),
            corr_adjacent: analysis::adjacent_correlation(img, Direction::Horizontal).ok(),
            ..Default::default()
        };
        if let Some(reference) = &reference {
            rec.mse = analysis::mse(img, reference).ok();
            rec.psnr_db = analysis::psnr(img, reference).ok();
            rec.ssim = analysis::ssim(img, reference).ok();
            rec.corr_vs_ref = analysis::correlation(img, reference).ok();
            rec.temporal_complexity = analysis::temporal_complexity(img, reference).ok();
            if let Some((bits, w, h)) = sniff_payload_bits(img, cfg) {
                let msg = Image::filled(w.max(1), h.max(1), 0);
                rec.embedding_ratio_pct = Some(analysis::embedding_ratio(reference, &msg, bits));
            }
        }
        if !fractions.is_empty() {
            let msg = message.as_ref().expect("checked above");
            let points = pipeline::occlusion_attack(img, msg, &fractions, cfg)?;
            rec.occlusion_psnr_db = points.iter().map(|p| p.psnr_db).collect();
        }
        if let Some(msg) = &message {
            if args.er_csv.is_some() {
                let capacity = stego::capacity(img, &cfg.template, cfg.stego_steps)
                    .map_err(SchemeError::from)?;
                let dynamic = analysis::embedding_ratio(img, msg, capacity);
                let pixels = img.pixel_count() as u64;
                let fixed = [1u64, 2, 3, 4].map(|k| {
                    let bits = stego::HEADER_PIXELS as u64
                        + k * (pixels.saturating_sub(stego::HEADER_PIXELS as u64));
                    analysis::embedding_ratio(img, msg, bits)
                });
                er_rows.push((name.clone(), dynamic, fixed));
            }
        }
        records.push(rec);
    }

    let labels = attack_labels;
    std::fs::write(&args.csv, report::render_csv(&records, &labels))?;
    if let Some(md) = &args.markdown {
        std::fs::write(md, report::render_markdown(&records, &labels))?;
    }
    if let Some(path) = &args.lowess {
        let values: Vec<f64> = records
            .iter()
            .map(|r| r.temporal_complexity.unwrap_or(f64::NAN))
            .collect();
        if values.iter().any(|v| v.is_nan()) {
            return Err(CliError::Usage(
                "--lowess needs --reference so temporal complexity exists".into(),
            ));
        }
        let points: Vec<(f64, f64)> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i + 1) as f64, v))
            .collect();
        let fitted = analysis::lowess(&points, args.smoothing).map_err(SchemeError::from)?;
        let names: Vec<String> = records.iter().map(|r| r.name.clone()).collect();
        std::fs::write(path, report::render_lowess_csv(&names, &values, &fitted))?;
    }
    if let Some(path) = &args.er_csv {
        std::fs::write(path, report::render_er_csv(&er_rows))?;
    }
    println!(
        "{{\"images\":{},\"csv\":{:?}{}{}{}}}",
        records.len(),
        args.csv.display().to_string(),
        args.markdown
            .as_ref()
            .map(|p| format!(",\"markdown\":{:?}", p.display().to_string()))
            .unwrap_or_default(),
        args.lowess
            .as_ref()
            .map(|p| format!(",\"lowess\":{:?}", p.display().to_string()))
            .unwrap_or_default(),
        args.er_csv
            .as_ref()
            .map(|p| format!(",\"er_csv\":{:?}", p.display().to_string()))
            .unwrap_or_default(),
    );
    Ok(())
}

fn cmd_attack(
    cover_path: &Path,
    message_path: &Path,
    occlusion: &[String],
    out_dir: Option<&Path>,
    cfg: &SchemeConfig,
) -> Result<(), CliError> {
    let cover = codec::load_image(cover_path)?;
    let message = codec::load_image(message_path)?;
    let fractions: Vec<f64> = occlusion
        .iter()
        .map(|t| parse_fraction(t))
        .collect::<Result<_, _>>()?;
    let points = pipeline::occlusion_attack(&cover, &message, &fractions, cfg)?;

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        let outcome = pipeline::conceal(&cover, &message, cfg)?;
        for (label, point) in occlusion.iter().zip(&points) {
            let tag = label.replace('/', "_");
            let attacked = analysis::occlude(&outcome.stego, point.fraction);
            codec::save_image(&attacked, &dir.join(format!("stego_occ_{tag}.pgm")))?;
        }
    }

    let rows: Vec<String> = occlusion
        .iter()
        .zip(&points)
        .map(|(label, p)| {
            format!(
                "{{\"fraction\":\"{label}\",\"value\":{},\"psnr_db\":{}}}",
                json_num(p.fraction),
                json_num(p.psnr_db)
            )
        })
        .collect();
    println!("{{\"results\":[{}]}}", rows.join(","));
    Ok(())
}
