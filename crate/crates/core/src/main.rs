use clap::{Args, Parser, Subcommand};
use imdd_eq::complexity::{realization_table, realize_under_budget, ArchKind, ComplexityReport};
use imdd_eq::error::{Error, Result};
use imdd_eq::harness::seed::train_seed;
use imdd_eq::harness::{output, with_workers, Channel, Experiment, ExperimentConfig, Profile};
use imdd_eq::link::{self as io, LinkConfig, LinkRun, SlicedSignal};
use imdd_eq::nn::{Architecture, EqualizerSpec, TrainedModel};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "imdd-eq", version, about = "Sliced IM/DD link simulation and neural equalization")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    /// Output directory, overrides the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value_t = 74.0)]
    distance: f64,
    /// Optical SNR in dB; `inf` disables noise.
    #[arg(long, default_value_t = 10.0)]
    snr: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one channel realization and write it to a signal directory.
    Simulate(PointArgs),
    /// Train one equalizer and write its model file.
    Train {
        #[command(flatten)]
        point: PointArgs,
        /// Equalizer id from the configuration, or a preset name.
        #[arg(long, default_value = "sy-fnn")]
        equalizer: String,
        /// Signal directory from `simulate`; simulated afresh when omitted.
        #[arg(long)]
        signal: Option<PathBuf>,
    },
    /// Bit error ratio of a trained model on the test symbols of a signal.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        signal: PathBuf,
    },
    /// BER versus SNR for every configured receiver.
    SweepSnr,
    /// Required SNR and penalty versus fiber length.
    SweepDistance,
    /// Equalizers realized at each complexity budget.
    SweepComplexity,
    /// Print multiplication counts of the presets and budget realizations.
    Complexity,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(p) = c.profile {
        cfg.profile = p;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let workers = cli.common.workers;
    with_workers(workers, move || dispatch(cli.command, cfg))?
}

fn dispatch(command: Command, cfg: ExperimentConfig) -> Result<()> {
    let out = cfg.output_dir.clone();
    match command {
        Command::Simulate(p) => {
            let exp = Experiment::new(cfg)?;
            let ch = exp.channel(p.distance, p.snr)?;
            write_signal(&out, &ch)?;
            println!("wrote {} symbols to {}", ch.bits.len(), out.display());
        }
        Command::Train {
            point,
            equalizer,
            signal,
        } => {
            let exp = Experiment::new(cfg)?;
            let spec = find_spec(&exp.config, &equalizer)?;
            let ch = match signal {
                Some(dir) => read_signal(&dir)?,
                None => exp.channel(point.distance, point.snr)?,
            };
            let seed = train_seed(exp.seed(), ch.link.fiber_length_km, ch.link.snr_db, &equalizer);
            let spec = EqualizerSpec { seed, ..spec };
            let capture = ch.capture();
            let model = imdd_eq::nn::train(&spec, &capture, &exp.layout.split())?;
            let ber = model.evaluate(&capture, exp.layout.test.clone())?;
            fs::create_dir_all(&out)?;
            let path = out.join("model.txt");
            model.write_to(BufWriter::new(File::create(&path)?))?;
            println!(
                "{equalizer}: best epoch {}, train loss {:.6e}, test BER {:.6e} ({} errors / {} bits), model {}",
                model.best_epoch,
                model.final_train_loss(),
                ber.ber,
                ber.errors,
                ber.bits_counted,
                path.display()
            );
        }
        Command::Evaluate { model, signal } => {
            let exp = Experiment::new(cfg)?;
            let model = TrainedModel::read_from(File::open(&model)?)?;
            let ch = read_signal(&signal)?;
            if ch.bits.len() != exp.layout.total {
                return Err(Error::Dimension {
                    expected: exp.layout.total,
                    got: ch.bits.len(),
                });
            }
            let ber = model.evaluate(&ch.capture(), exp.layout.test.clone())?;
            println!("BER {:.6e} ({} errors / {} bits)", ber.ber, ber.errors, ber.bits_counted);
        }
        Command::SweepSnr => {
            let exp = Experiment::new(cfg)?;
            let res = exp.run_ber_vs_snr()?;
            report(&output::emit_snr_sweep(&out, &res)?, res.records.iter().filter(|r| !r.ok()).count());
        }
        Command::SweepDistance => {
            let exp = Experiment::new(cfg)?;
            let res = exp.run_penalty_vs_distance()?;
            report(&output::emit_distance_sweep(&out, &res)?, res.records.iter().filter(|r| !r.ok()).count());
        }
        Command::SweepComplexity => {
            let exp = Experiment::new(cfg)?;
            let (res, realizations) = exp.run_complexity_scan()?;
            let failed = res.records.iter().filter(|r| !r.ok()).count();
            report(&output::emit_complexity_scan(&out, &res, &realizations)?, failed);
        }
        Command::Complexity => print_complexity(&cfg)?,
    }
    Ok(())
}

fn report(files: &[PathBuf], failed: usize) {
    for f in files {
        println!("{}", f.display());
    }
    if failed > 0 {
        eprintln!("{failed} point(s) failed; see the status column");
    }
}

fn find_spec(cfg: &ExperimentConfig, id: &str) -> Result<EqualizerSpec> {
    if let Some((_, spec)) = cfg.equalizer_specs()?.into_iter().find(|(i, _)| i == id) {
        return Ok(spec);
    }
    let entry = imdd_eq::harness::EqualizerEntry::preset(id);
    entry.resolve(cfg.link.n_slices, &cfg.profile.settings())
}

fn print_complexity(cfg: &ExperimentConfig) -> Result<()> {
    println!("equalizer,arch,framing,k,m,n_h,n_w,cc_per_unit,cc_per_symbol");
    for name in EqualizerSpec::PRESETS {
        let spec = EqualizerSpec::preset(name)?;
        let n_w = match spec.arch {
            Architecture::Cnn { n_w } => Some(n_w),
            _ => None,
        };
        let r = ComplexityReport::new(ArchKind::of(&spec.arch), spec.framing, spec.n_hidden, n_w)?;
        println!(
            "{name},{},{:?},{},{},{},{},{},{}",
            r.arch.name(),
            r.mode,
            r.k,
            r.m,
            r.n_h,
            r.n_w.map(|w| w.to_string()).unwrap_or_default(),
            r.cc_per_unit,
            r.cc_per_symbol
        );
    }
    let mut rows = Vec::new();
    for name in EqualizerSpec::PRESETS {
        let spec = EqualizerSpec::preset(name)?;
        for &b in &cfg.sweep.budgets {
            rows.push((name.to_string(), realize_under_budget(ArchKind::of(&spec.arch), spec.framing, b)?));
        }
    }
    println!();
    print!("{}", realization_table(&rows));
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_signal(dir: &Path, ch: &Channel) -> Result<()> {
    fs::create_dir_all(dir)?;
    let link = toml::to_string(&ch.link).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(dir.join("link.toml"), link)?;
    io::write_sliced(&ch.run.sliced, create(&dir.join("signal.csv"))?)?;
    io::write_sliced(&ch.run.single_pd, create(&dir.join("single_pd.csv"))?)?;
    let drive = SlicedSignal::new(
        vec![ch.run.drive.clone()],
        ch.run.sliced.sps(),
        ch.run.sliced.symbol_alignment(),
    )?;
    io::write_sliced(&drive, create(&dir.join("drive.csv"))?)?;
    let mut bits = create(&dir.join("bits.txt"))?;
    io::write_bits(&ch.bits, &mut bits)?;
    bits.flush()?;
    Ok(())
}

fn read_signal(dir: &Path) -> Result<Channel> {
    let text = fs::read_to_string(dir.join("link.toml"))?;
    let link: LinkConfig = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let sliced = io::read_sliced(File::open(dir.join("signal.csv"))?)?;
    let single_pd = io::read_sliced(File::open(dir.join("single_pd.csv"))?)?;
    let drive = io::read_sliced(File::open(dir.join("drive.csv"))?)?.slices()[0].clone();
    let bits = io::read_bits(File::open(dir.join("bits.txt"))?)?;
    Ok(Channel {
        link,
        bits,
        run: LinkRun {
            drive,
            sliced,
            single_pd,
        },
    })
}
