//! The `shrubs` command-line tool.
//!
//! ```text
//! shrubs run   --stream led_a --items 10000 --M 8 --window 256 --alpha 0.1 --seed 7
//! shrubs run   --csv data.csv --label class --trace out.jsonl
//! shrubs sweep --stream led_a --items 5000 --n 5 --grid grid.txt --max-bytes 1000000
//! shrubs gen   --stream rbf_f --items 100 --out rbf.csv
//! ```
//!
//! Every flag can also be given in a `--config` file of `key = value` lines,
//! where the key is the flag name without dashes (`max-depth` and
//! `max_depth` are both accepted). Flags on the command line take precedence
//! over the file. Unknown keys are rejected.
//!
//! Exit codes: 0 success, 1 configuration error, 2 I/O or input data error,
//! 3 runtime domain error.
//!
//! All randomness derives from `--seed`: the stream uses
//! `derive_seed(seed, 1)` and the model `derive_seed(seed, 2)`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::ensemble::{EnsembleConfig, EnsembleState};
use crate::error::{Error, Result};
use crate::eval::{
    normalized_apf, pareto_front, run_sweep, sample_configs, test_then_train_with, write_front,
    write_summary, write_trace, ConfigGrid, EvalOptions, ParetoPoint, SweepOptions, SweepResult,
};
use crate::rng::derive_seed;
use crate::streams::{
    named_generator, write_csv, CsvOptions, CsvStream, DataStream, GeneratorConfig, StreamOptions,
    StreamSchema,
};

struct Key {
    id: &'static str,
    help: &'static str,
    flag: bool,
}

const fn opt(id: &'static str, help: &'static str) -> Key {
    Key {
        id,
        help,
        flag: false,
    }
}

const fn flag(id: &'static str, help: &'static str) -> Key {
    Key {
        id,
        help,
        flag: true,
    }
}

const GENERATOR_KEYS: &[Key] = &[
    opt("stream", "named generator: led, led_a, led_g, agrawal, agrawal_a, agrawal_g, rbf, rbf_f, rbf_m"),
    opt("items", "number of items [default: 10000, or every CSV row]"),
    opt("seed", "base random seed [default: 0]"),
    opt("drift_position", "item index of the drift center [default: items / 2]"),
    opt("drift_width", "drift width in items"),
    opt("noise", "LED segment noise probability"),
    opt("perturbation", "Agrawal attribute perturbation"),
];

const CSV_KEYS: &[Key] = &[
    opt("csv", "read samples from this CSV file instead of a generator"),
    opt("label", "label column of the CSV file [default: label]"),
    opt("categorical", "comma-separated categorical CSV columns"),
    opt("classes", "minimum number of classes"),
];

const MODEL_KEYS: &[Key] = &[
    opt("M", "maximum number of ensemble members [default: 32]"),
    opt("window", "sliding window size [default: 256]"),
    opt("alpha", "gradient step size [default: 0.1]"),
    opt("loss", "mse or ce [default: mse]"),
    opt("max_depth", "maximum shrub depth, or none [default: 8]"),
    opt("splitter", "train or random [default: train]"),
    opt("max_features", "d, sqrt or a count [default: d]"),
    opt("min_samples_split", "minimum node size to split [default: 2]"),
    flag("fully_grown", "grow shrubs until leaves are pure"),
    opt("train_every", "fit a new shrub every k items [default: 1]"),
    opt("checkpoint", "items between trace records [default: 1000]"),
    flag("timing", "record wall-clock seconds in traces and summaries"),
];

const RUN_KEYS: &[Key] = &[
    opt("trace", "JSON-lines trace output [default: trace.jsonl]"),
    opt("dump", "write the final ensemble as indented text"),
];

const SWEEP_KEYS: &[Key] = &[
    opt("grid", "hyperparameter grid file [default: built-in grid]"),
    opt("n", "number of sampled configurations [default: 10]"),
    opt("max_bytes", "drop configurations whose model ever exceeds this size"),
    opt("jobs", "worker threads [default: logical cores]"),
    opt("out", "summary CSV output [default: sweep.csv]"),
    opt("front", "Pareto front CSV output [default: front.csv]"),
];

const GEN_KEYS: &[Key] = &[opt("out", "CSV output path")];

fn command_keys(name: &str) -> Vec<&'static Key> {
    let groups: &[&[Key]] = match name {
        "run" => &[GENERATOR_KEYS, CSV_KEYS, MODEL_KEYS, RUN_KEYS],
        "sweep" => &[GENERATOR_KEYS, CSV_KEYS, MODEL_KEYS, SWEEP_KEYS],
        _ => &[GENERATOR_KEYS, GEN_KEYS],
    };
    groups.iter().flat_map(|g| g.iter()).collect()
}

fn subcommand(name: &'static str, about: &'static str) -> Command {
    let mut cmd = Command::new(name).about(about).arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value file; flags take precedence"),
    );
    for key in command_keys(name) {
        let arg = Arg::new(key.id).long(key.id.replace('_', "-")).help(key.help);
        cmd = cmd.arg(if key.flag {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE").allow_negative_numbers(true)
        });
    }
    cmd
}

pub fn command() -> Command {
    Command::new("shrubs")
        .about("Online classification with shrub ensembles")
        .subcommand_required(true)
        .subcommand(subcommand("run", "Test-then-train a single configuration"))
        .subcommand(subcommand("sweep", "Evaluate random configurations and summarize the Pareto front"))
        .subcommand(subcommand("gen", "Write generator samples to CSV"))
}

/// Resolved `key -> value` settings for one subcommand.
struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(name: &str, matches: &ArgMatches) -> Result<Self> {
        let keys = command_keys(name);
        let mut values = BTreeMap::new();
        if let Some(path) = matches.get_one::<String>("config") {
            let path = Path::new(path);
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::config(format!("{}:{}: expected key = value", path.display(), i + 1))
                })?;
                let k = k.trim().replace('-', "_");
                if !keys.iter().any(|key| key.id == k) {
                    return Err(Error::config(format!(
                        "unknown key '{k}' in {}",
                        path.display()
                    )));
                }
                values.insert(k, v.trim().to_string());
            }
        }
        for key in keys {
            if matches.value_source(key.id) != Some(ValueSource::CommandLine) {
                continue;
            }
            let v = if key.flag {
                "true".to_string()
            } else {
                matches.get_one::<String>(key.id).cloned().unwrap_or_default()
            };
            values.insert(key.id.to_string(), v);
        }
        Ok(Self { values })
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::config(format!("invalid value '{v}' for {}", flag_name(key)))
                })
            })
            .transpose()
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn parsed<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Error::config(format!("{}: {e}", flag_name(key))))
            })
            .transpose()
    }

    fn switch(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(Error::config(format!(
                "invalid value '{v}' for {}, expected true or false",
                flag_name(key)
            ))),
        }
    }
}

fn flag_name(key: &str) -> String {
    format!("--{}", key.replace('_', "-"))
}

/// Where samples come from.
enum Source {
    Generator {
        name: String,
        config: GeneratorConfig,
        seed: u64,
    },
    Csv {
        path: PathBuf,
        options: CsvOptions,
    },
}

impl Source {
    fn open(&self) -> Result<Box<dyn DataStream>> {
        Ok(match self {
            Source::Generator { name, config, seed } => Box::new(config.open(name, *seed)?),
            Source::Csv { path, options } => Box::new(CsvStream::open(path, options)?),
        })
    }
}

/// Resolves the data source and the number of items to process. Opens the
/// source once to learn its schema.
fn source(s: &Settings, seed: u64) -> Result<(Source, StreamSchema, u64)> {
    let items: Option<u64> = s.get("items")?;
    match (s.raw("stream"), s.raw("csv")) {
        (Some(_), Some(_)) => Err(Error::config("--stream and --csv are mutually exclusive")),
        (None, None) => Err(Error::config("missing --stream or --csv")),
        (Some(name), None) => {
            let items = items.unwrap_or(10_000);
            let opts = StreamOptions {
                drift_position: s.get("drift_position")?,
                drift_width: s.get("drift_width")?,
                noise: s.get("noise")?,
                perturbation: s.get("perturbation")?,
            };
            let config = named_generator(name, items, &opts)?;
            let source = Source::Generator {
                name: name.to_string(),
                config,
                seed: derive_seed(seed, 1),
            };
            let schema = source.open()?.schema().clone();
            if let Some(c) = s.get::<usize>("classes")? {
                if c != schema.n_classes {
                    return Err(Error::config(format!(
                        "--classes {c} does not match stream {name} with {} classes",
                        schema.n_classes
                    )));
                }
            }
            Ok((source, schema, items))
        }
        (None, Some(path)) => {
            let options = CsvOptions {
                label: s.raw("label").unwrap_or("label").to_string(),
                categorical: s
                    .raw("categorical")
                    .map(|v| {
                        v.split(',')
                            .map(str::trim)
                            .filter(|c| !c.is_empty())
                            .map(String::from)
                            .collect()
                    })
                    .unwrap_or_default(),
                min_classes: s.get("classes")?,
            };
            let stream = CsvStream::open(path, &options)?;
            let schema = stream.schema().clone();
            let items = items.unwrap_or(stream.rows());
            let source = Source::Csv {
                path: PathBuf::from(path),
                options,
            };
            Ok((source, schema, items))
        }
    }
}

fn model_config(s: &Settings, schema: &StreamSchema, seed: u64) -> Result<EnsembleConfig> {
    let mut cfg = EnsembleConfig::new(schema.n_classes);
    cfg.max_members = s.get_or("M", cfg.max_members)?;
    cfg.window = s.get_or("window", cfg.window)?;
    cfg.alpha = s.get_or("alpha", cfg.alpha)?;
    cfg.loss = s.parsed("loss")?.unwrap_or(cfg.loss);
    match s.raw("max_depth") {
        Some("none") => cfg.shrub.max_depth = None,
        Some(_) => cfg.shrub.max_depth = s.get("max_depth")?,
        None => {}
    }
    cfg.shrub.splitter = s.parsed("splitter")?.unwrap_or(cfg.shrub.splitter);
    cfg.shrub.max_features = s.parsed("max_features")?.unwrap_or(cfg.shrub.max_features);
    cfg.shrub.min_samples_split = s.get_or("min_samples_split", cfg.shrub.min_samples_split)?;
    cfg.shrub.fully_grown = s.switch("fully_grown")?;
    cfg.train_every = s.get_or("train_every", cfg.train_every)?;
    cfg.seed = derive_seed(seed, 2);
    cfg.validate()?;
    cfg.shrub.max_features.resolve(schema.n_features)?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn write_dump(model: &EnsembleState, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = create(path)?;
    for (i, (shrub, w)) in model.shrubs().iter().zip(model.weights()).enumerate() {
        writeln!(out, "member {i} weight {w}").map_err(io)?;
        out.write_all(shrub.dump().as_bytes()).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn print_header(schema: &StreamSchema) {
    println!(
        "stream={} d={} C={}",
        schema.name, schema.n_features, schema.n_classes
    );
}

fn cmd_run(s: &Settings) -> Result<()> {
    let started = Instant::now();
    let seed = s.get_or("seed", 0u64)?;
    let (source, schema, items) = source(s, seed)?;
    let config = model_config(s, &schema, seed)?;
    let checkpoint = s.get_or("checkpoint", 1000u64)?;
    let options = EvalOptions {
        timing: s.switch("timing")?,
        max_bytes: None,
    };
    let trace_path = PathBuf::from(s.raw("trace").unwrap_or("trace.jsonl"));
    let dump_path = s.raw("dump").map(PathBuf::from);
    if items == 0 {
        return Err(Error::config("--items must be at least 1"));
    }
    if checkpoint == 0 {
        return Err(Error::config("--checkpoint must be at least 1"));
    }

    print_header(&schema);
    let mut stream = source.open()?;
    let mut model = EnsembleState::new(config)?;
    let trace = test_then_train_with(&mut model, &mut stream, items, checkpoint, options)?;
    write_trace(&trace.records, &trace_path)?;
    if let Some(path) = dump_path {
        write_dump(&model, &path)?;
    }
    if trace.truncated {
        eprintln!(
            "warning: stream ended after {} of {items} items",
            trace.last().map_or(0, |r| r.items_seen)
        );
    }
    println!(
        "items={} final_acc={:.6} final_bytes={} runtime_s={:.3}",
        trace.last().map_or(0, |r| r.items_seen),
        trace.final_accuracy(),
        trace.final_bytes(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_sweep(s: &Settings) -> Result<()> {
    let started = Instant::now();
    let seed = s.get_or("seed", 0u64)?;
    let (source, schema, items) = source(s, seed)?;
    let base = model_config(s, &schema, seed)?;
    let grid = match s.raw("grid") {
        Some(path) => ConfigGrid::from_file(path)?,
        None => ConfigGrid::default(),
    };
    for mf in &grid.max_features {
        mf.resolve(schema.n_features)?;
    }
    let n = s.get_or("n", 10usize)?;
    if n == 0 {
        return Err(Error::config("--n must be at least 1"));
    }
    if items == 0 {
        return Err(Error::config("--items must be at least 1"));
    }
    let options = SweepOptions {
        n_items: items,
        checkpoint_every: s.get_or("checkpoint", 1000u64)?,
        max_bytes: s.get("max_bytes")?,
        jobs: s.get_or("jobs", 0usize)?,
        timing: s.switch("timing")?,
    };
    if options.checkpoint_every == 0 {
        return Err(Error::config("--checkpoint must be at least 1"));
    }
    let summary_path = PathBuf::from(s.raw("out").unwrap_or("sweep.csv"));
    let front_path = PathBuf::from(s.raw("front").unwrap_or("front.csv"));
    let configs = sample_configs(&grid, &base, n, seed)?;

    print_header(&schema);
    let results = run_sweep(&configs, |_| source.open(), &options)?;
    write_summary(&results, &summary_path)?;
    let points: Vec<ParetoPoint> = results.iter().map(SweepResult::pareto_point).collect();
    let (front, apf) = if points.is_empty() {
        eprintln!("warning: no configuration stayed within the byte budget; the front is empty");
        (Vec::new(), 0.0)
    } else {
        let max = points.iter().map(|p| p.size_bytes).max().unwrap_or(1).max(1);
        (pareto_front(&points)?, normalized_apf(&points, max)?)
    };
    write_front(&front, &front_path)?;
    for p in &front {
        println!(
            "front config={} acc={:.6} bytes={}",
            p.config_id, p.accuracy, p.size_bytes
        );
    }
    println!(
        "configs={} kept={} front={} runtime_s={:.3}",
        configs.len(),
        results.len(),
        front.len(),
        started.elapsed().as_secs_f64()
    );
    println!("normalized_apf={apf:.6}");
    Ok(())
}

fn cmd_gen(s: &Settings) -> Result<()> {
    let seed = s.get_or("seed", 0u64)?;
    if s.raw("stream").is_none() {
        return Err(Error::config("missing --stream"));
    }
    let out = PathBuf::from(
        s.raw("out")
            .ok_or_else(|| Error::config("missing --out"))?,
    );
    let (source, schema, items) = source(s, seed)?;
    let mut stream = source.open()?;
    let rows = write_csv(&mut *stream, items, &out)?;
    println!(
        "stream={} d={} C={} rows={rows} out={}",
        schema.name,
        schema.n_features,
        schema.n_classes,
        out.display()
    );
    Ok(())
}

/// Maps an error to the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        Error::Io { .. } | Error::Ingestion { .. } => 2,
        Error::Domain(_) | Error::LabelOutOfRange { .. } | Error::DimensionMismatch { .. } => 3,
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let Some((name, sub)) = matches.subcommand() else {
        return 1;
    };
    let result = Settings::resolve(name, sub).and_then(|s| match name {
        "run" => cmd_run(&s),
        "sweep" => cmd_sweep(&s),
        _ => cmd_gen(&s),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn path_arg(p: &Path) -> String {
        p.to_str().unwrap().to_string()
    }

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn run_writes_a_trace_with_the_final_record() {
        let d = dir();
        let trace = d.path().join("t.jsonl");
        let code = run([
            "shrubs", "run", "--stream", "led_a", "--items", "300", "--checkpoint", "100", "--M",
            "4", "--window", "32", "--seed", "7", "--trace", &path_arg(&trace),
        ]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&trace).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().last().unwrap().starts_with(r#"{"items":300,"#));
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let d = dir();
        let cfg = d.path().join("run.conf");
        let trace = d.path().join("t.jsonl");
        std::fs::write(
            &cfg,
            format!(
                "stream = led\nitems = 50\nmax-depth = 3\ncheckpoint = 10\ntrace = {}\n",
                path_arg(&trace)
            ),
        )
        .unwrap();
        let code = run(["shrubs", "run", "--config", &path_arg(&cfg), "--items", "20"]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&trace).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn unknown_config_key_is_a_config_error() {
        let d = dir();
        let cfg = d.path().join("bad.conf");
        std::fs::write(&cfg, "stream = led\nwindow_sz = 4\n").unwrap();
        assert_eq!(run(["shrubs", "run", "--config", &path_arg(&cfg)]), 1);
    }

    #[test]
    fn exit_codes() {
        let d = dir();
        let trace = d.path().join("never.jsonl");
        let t = path_arg(&trace);
        assert_eq!(run(["shrubs", "run", "--stream", "nope", "--trace", &t]), 1);
        assert_eq!(run(["shrubs", "run", "--stream", "led", "--alpha", "-1", "--trace", &t]), 1);
        assert_eq!(run(["shrubs", "run", "--stream", "led", "--bogus", "1"]), 1);
        assert_eq!(
            run(["shrubs", "run", "--csv", "/nonexistent/x.csv", "--trace", &t]),
            2
        );
        assert!(!trace.exists(), "no output on configuration errors");
    }

    #[test]
    fn gen_zero_items_writes_header_only() {
        let d = dir();
        let out = d.path().join("g.csv");
        assert_eq!(
            run(["shrubs", "gen", "--stream", "agrawal", "--items", "0", "--out", &path_arg(&out)]),
            0
        );
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, "f0,f1,f2,f3,f4,f5,f6,f7,f8,label\n");
    }
}
