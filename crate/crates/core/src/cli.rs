//! The `macc` command line.
//!
//! Every subcommand renders its full output into memory before writing, so an
//! invalid configuration never leaves partial output behind.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::analysis::{
    compare_with_baseline, envelope_table, sweep, write_envelope_csv, write_sweep_csv,
};
use crate::decoder::lemma_decode_map;
use crate::delivery::{build_schedule, TransmissionSchedule};
use crate::error::Error;
use crate::harness::{end_to_end, randomized_trials};
use crate::model::{validate_shape, DemandVector, SystemParams};
use crate::placement::place;
use crate::render::{fixed_text, placement_lines, ratio_text, schedule_lines};

/// Environment variable naming the directory outputs go to when `--out` is absent.
pub const OUT_DIR_ENV: &str = "MACC_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "macc",
    version,
    about = "Multi-access coded caching: schedules, decoding and rate analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rates, bound and sub-packetization at one point.
    Rates {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rates over a grid of (k, z) for fixed K.
    Sweep {
        #[arg(short = 'K', long = "users")]
        users: usize,
        /// Restrict to one k.
        #[arg(short = 'k', long = "cache-subfiles")]
        cache_subfiles: Option<usize>,
        /// Restrict to one z.
        #[arg(short = 'z', long = "access")]
        access: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Placement and the full transmission schedule.
    Schedule {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        demands: DemandArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// End-to-end decode check with a per-user decode table.
    Verify {
        #[command(flatten)]
        instance: InstanceArgs,
        #[command(flatten)]
        demands: DemandArgs,
        /// Additional randomized distinct-demand trials.
        #[arg(long)]
        trials: Option<usize>,
        /// File size as a multiple of the minimum.
        #[arg(long, default_value_t = 1)]
        scale: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Memory-sharing envelope over k for fixed K and z.
    Envelope {
        #[arg(short = 'K', long = "users")]
        users: usize,
        #[arg(short = 'z', long = "access")]
        access: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    #[arg(short = 'K', long = "users")]
    pub users: usize,
    /// Defaults to K.
    #[arg(short = 'N', long = "files")]
    pub files: Option<usize>,
    #[arg(short = 'k', long = "cache-subfiles")]
    pub cache_subfiles: usize,
    #[arg(short = 'z', long = "access")]
    pub access: usize,
}

impl InstanceArgs {
    fn params(&self) -> crate::Result<SystemParams> {
        SystemParams::new(
            self.files.unwrap_or(self.users),
            self.users,
            self.cache_subfiles,
            self.access,
        )
    }
}

#[derive(Debug, Args)]
pub struct DemandArgs {
    /// Comma-separated file index per user. Defaults to `u mod N`.
    #[arg(long, value_delimiter = ',', conflicts_with = "worst")]
    pub demands: Option<Vec<usize>>,
    /// Seeded random distinct demands.
    #[arg(long)]
    pub worst: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl DemandArgs {
    fn resolve(&self, params: &SystemParams) -> crate::Result<DemandVector> {
        match (&self.demands, self.worst) {
            (Some(d), _) => DemandVector::new(d.clone(), params),
            (None, true) => {
                DemandVector::worst_case(params, &mut ChaCha8Rng::seed_from_u64(self.seed))
            }
            (None, false) => Ok(DemandVector::identity(params)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; stdout when absent and no default directory is configured.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Rendered output plus the status to exit with.
struct Outcome {
    body: String,
    status: i32,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome {
            body,
            status: EXIT_OK,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(Error),
    Verification(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DecodeIncomplete { .. }
            | Error::InconsistentRecovery { .. }
            | Error::SizeMismatch(_) => Failure::Verification(e),
            other => Failure::Config(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(
    args: I,
    out_dir: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let (name, output) = match &cli.command {
        Command::Rates { output, .. } => ("rates", output),
        Command::Sweep { output, .. } => ("sweep", output),
        Command::Schedule { output, .. } => ("schedule", output),
        Command::Verify { output, .. } => ("verify", output),
        Command::Envelope { output, .. } => ("envelope", output),
    };
    let format = output.format.unwrap_or(match cli.command {
        Command::Sweep { .. } | Command::Envelope { .. } => Format::Csv,
        _ => Format::Text,
    });

    let result = execute(&cli.command, format).and_then(|outcome| {
        let target = output
            .out
            .clone()
            .or_else(|| out_dir.map(|d| d.join(format!("{name}.{}", format.extension()))));
        match target {
            Some(path) => {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&path, &outcome.body)?;
                writeln!(stderr, "wrote {}", path.display())?;
            }
            None => stdout.write_all(outcome.body.as_bytes())?,
        }
        Ok(outcome.status)
    });
    match result {
        Ok(status) => status,
        Err(Failure::Config(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
        Err(Failure::Verification(e)) => {
            let _ = writeln!(stderr, "verification failed: {e}");
            EXIT_VERIFY_FAILED
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(command: &Command, format: Format) -> Result<Outcome, Failure> {
    match command {
        Command::Rates { instance, .. } => cmd_rates(instance, format),
        Command::Sweep {
            users,
            cache_subfiles,
            access,
            ..
        } => cmd_sweep(*users, *cache_subfiles, *access, format),
        Command::Schedule {
            instance, demands, ..
        } => cmd_schedule(instance, demands, format),
        Command::Verify {
            instance,
            demands,
            trials,
            scale,
            ..
        } => cmd_verify(instance, demands, *trials, *scale, format),
        Command::Envelope { users, access, .. } => cmd_envelope(*users, *access, format),
    }
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<String, Failure> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn json_string(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn cmd_rates(instance: &InstanceArgs, format: Format) -> Result<Outcome, Failure> {
    let (users, k, z) = (instance.users, instance.cache_subfiles, instance.access);
    validate_shape(users, k, z)?;
    if instance.files == Some(0) {
        return Err(Error::InvalidParams("N must be at least 1".into()).into());
    }
    let row = sweep(users, Some(k..=k), Some(z..=z))?.remove(0);
    let body = match format {
        Format::Csv => csv_string(|b| write_sweep_csv(std::slice::from_ref(&row), b))?,
        Format::Json => json_string(&row),
        Format::Text => {
            let mut s = String::new();
            let files = instance.files.unwrap_or(users);
            let _ = writeln!(s, "K = {users}, N = {files}, k = {k}, z = {z}");
            let _ = writeln!(s, "gamma = {}", ratio_text(&row.gamma));
            let _ = writeln!(
                s,
                "R_new = {} ≈ {}",
                ratio_text(&row.rate_new),
                fixed_text(&row.rate_new, 6)
            );
            let _ = writeln!(
                s,
                "R_ic = {} ≈ {}",
                ratio_text(&row.rate_ic),
                fixed_text(&row.rate_ic, 6)
            );
            match &row.rate_lb {
                Some(lb) => {
                    let _ = writeln!(s, "R_lb = {} ≈ {}", ratio_text(lb), fixed_text(lb, 6));
                }
                None => s.push_str("R_lb = n/a (needs 2z >= K)\n"),
            }
            let _ = writeln!(
                s,
                "subpacketization_new = {} (per-round max), {} (payload lcm)",
                row.subpack_new.per_round_max, row.subpack_new.payload_lcm
            );
            let _ = writeln!(
                s,
                "subpacketization_ic = {}",
                row.subpack_ic.as_deref().unwrap_or("n/a (kz > K)")
            );
            s
        }
    };
    Ok(Outcome::ok(body))
}

fn cmd_sweep(
    users: usize,
    k: Option<usize>,
    z: Option<usize>,
    format: Format,
) -> Result<Outcome, Failure> {
    validate_shape(users, k.unwrap_or(1), z.unwrap_or(2))?;
    let rows = sweep(users, k.map(|k| k..=k), z.map(|z| z..=z))?;
    let body = match format {
        Format::Csv => csv_string(|b| write_sweep_csv(&rows, b))?,
        Format::Json => {
            json_string(&json!({ "rows": rows, "comparison": compare_with_baseline(&rows) }))
        }
        Format::Text => {
            let mut s = format!(
                "{:>4} {:>4} {:>4} {:>10} {:>12} {:>12} {:>12}\n",
                "K", "k", "z", "gamma", "R_new", "R_ic", "R_lb"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:>4} {:>4} {:>4} {:>10} {:>12} {:>12} {:>12}",
                    r.num_users,
                    r.cache_subfiles,
                    r.access_degree,
                    ratio_text(&r.gamma),
                    ratio_text(&r.rate_new),
                    ratio_text(&r.rate_ic),
                    r.rate_lb
                        .as_ref()
                        .map(ratio_text)
                        .unwrap_or_else(|| "-".into()),
                );
            }
            let c = compare_with_baseline(&rows);
            let _ = writeln!(
                s,
                "{} rows: {} strictly below the baseline, {} equal, {} above",
                c.rows, c.strictly_better, c.coinciding, c.worse
            );
            s
        }
    };
    Ok(Outcome::ok(body))
}

const SCHEDULE_CSV_HEADER: [&str; 10] = [
    "symbol",
    "round",
    "stage",
    "shift",
    "variant",
    "part_count",
    "subfile",
    "part",
    "user",
    "file",
];

fn schedule_csv(schedule: &TransmissionSchedule) -> Result<String, Failure> {
    csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(SCHEDULE_CSV_HEADER)?;
        for sym in schedule.symbols() {
            for t in &sym.terms {
                w.write_record([
                    sym.id.to_string(),
                    sym.id.round.to_string(),
                    sym.id.stage.to_string(),
                    sym.id.shift.to_string(),
                    format!("{:?}", sym.id.variant).to_lowercase(),
                    sym.part_count.to_string(),
                    t.subfile.to_string(),
                    t.part.to_string(),
                    t.user.to_string(),
                    t.file.to_string(),
                ])?;
            }
        }
        w.flush()
    })
}

fn cmd_schedule(
    instance: &InstanceArgs,
    demands: &DemandArgs,
    format: Format,
) -> Result<Outcome, Failure> {
    let params = instance.params()?;
    let demands = demands.resolve(&params)?;
    let schedule = build_schedule(&params, &demands)?;
    let contents = place(&params);
    let body = match format {
        Format::Json => json_string(&json!({
            "placement": placement_lines(&contents),
            "demands": demands.as_slice(),
            "schedule": schedule,
        })),
        Format::Csv => schedule_csv(&schedule)?,
        Format::Text => {
            let mut s = String::new();
            for line in placement_lines(&contents) {
                let _ = writeln!(s, "{line}");
            }
            s.push('\n');
            if schedule.is_empty() {
                s.push_str("no transmissions required\n");
            }
            for line in schedule_lines(&schedule) {
                let _ = writeln!(s, "{line}");
            }
            s
        }
    };
    Ok(Outcome::ok(body))
}

/// One row of the per-user decode table.
#[derive(Debug, Clone, serde::Serialize)]
struct DecodeRow {
    user: usize,
    file: usize,
    subfile: usize,
    part: usize,
    source: String,
}

fn cmd_verify(
    instance: &InstanceArgs,
    demands: &DemandArgs,
    trials: Option<usize>,
    scale: usize,
    format: Format,
) -> Result<Outcome, Failure> {
    let params = instance.params()?;
    let demands = demands.resolve(&params)?;
    if scale == 0 {
        return Err(Error::InvalidParams("scale must be at least 1".into()).into());
    }
    if trials.is_some_and(|n| n > 0) && params.num_files() < params.num_users() {
        return Err(Error::InvalidDemands(
            "randomized trials need N >= K for distinct demands".into(),
        )
        .into());
    }

    let mut rows = Vec::new();
    for alpha in 0..params.num_users() {
        for e in lemma_decode_map(alpha, &params)?.entries {
            rows.push(DecodeRow {
                user: alpha,
                file: demands.file_of(alpha),
                subfile: e.subfile.get(),
                part: e.part,
                source: e.source.to_string(),
            });
        }
    }
    let report = end_to_end(&params, &demands, 0, scale)?;
    let aggregate = trials
        .map(|n| randomized_trials(&params, n, demands_seed(&params)))
        .transpose()?;
    let passed = report.success()
        && report.plans_agree
        && aggregate.as_ref().is_none_or(|a| a.failures == 0);

    let body = match format {
        Format::Json => json_string(&json!({
            "decode_table": rows,
            "report": report,
            "trials": aggregate,
            "passed": passed,
        })),
        Format::Csv => csv_string(|buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(["user", "subfile", "part", "source"])?;
            for r in &rows {
                w.write_record([
                    r.user.to_string(),
                    r.subfile.to_string(),
                    r.part.to_string(),
                    r.source.clone(),
                ])?;
            }
            w.flush()
        })?,
        Format::Text => {
            let mut s = format!(
                "{:<6} {:<12} {:<14} {}\n",
                "user", "sub-file", "part", "source"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<6} {:<12} {:<14} {}",
                    format!("U{}", r.user),
                    format!("W[{}]^{}", r.subfile, r.file),
                    format!("W[{},{}]^{}", r.subfile, r.part, r.file),
                    r.source
                );
            }
            s.push('\n');
            let ok: Vec<String> = report
                .per_user_success
                .iter()
                .enumerate()
                .map(|(u, &ok)| format!("U{u}:{}", if ok { "ok" } else { "FAIL" }))
                .collect();
            let _ = writeln!(s, "decoded: {}", ok.join(" "));
            let _ = writeln!(
                s,
                "rate: measured {} formula {} ({} symbols, {} bytes for files of {} bytes)",
                ratio_text(&report.measured_rate),
                ratio_text(&report.formula_rate),
                report.symbols_sent,
                report.bytes_sent,
                report.file_len
            );
            let _ = writeln!(
                s,
                "decode plans consistent with peeling: {}",
                report.plans_agree
            );
            for m in &report.mismatches {
                let _ = writeln!(
                    s,
                    "mismatch: user {} sub-file {} byte {}",
                    m.user, m.subfile, m.byte_offset
                );
            }
            if let Some(a) = &aggregate {
                let _ = writeln!(
                    s,
                    "trials: {} run, {} failed, {} distinct demand vectors",
                    a.trials, a.failures, a.distinct_demand_vectors_tested
                );
            }
            let _ = writeln!(s, "result: {}", if passed { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Outcome {
        body,
        status: if passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
    })
}

/// Trial seed derived from the instance so repeated runs are identical.
fn demands_seed(params: &SystemParams) -> u64 {
    let (n, k, c, z) = (
        params.num_files() as u64,
        params.num_users() as u64,
        params.cache_subfiles() as u64,
        params.access_degree() as u64,
    );
    n.wrapping_mul(1_000_003) ^ k.wrapping_mul(10_007) ^ c.wrapping_mul(101) ^ z
}

fn cmd_envelope(users: usize, access: usize, format: Format) -> Result<Outcome, Failure> {
    validate_shape(users, 1, access)?;
    let table = envelope_table(users, access)?;
    let body = match format {
        Format::Csv => csv_string(|b| write_envelope_csv(&table, b))?,
        Format::Json => json_string(&table),
        Format::Text => {
            let mut s = format!("{:>4} {:>8} {:>10} {}\n", "k", "gamma", "rate", "vertex");
            for r in &table {
                let _ = writeln!(
                    s,
                    "{:>4} {:>8} {:>10} {}",
                    r.cache_subfiles,
                    ratio_text(&r.point.gamma),
                    ratio_text(&r.point.rate),
                    if r.hull_vertex { "yes" } else { "no" }
                );
            }
            s
        }
    };
    Ok(Outcome::ok(body))
}
