//! `macc`: end-to-end simulations, trade-off tables and verification suites
//! for multi-access coded caching.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use macc::analysis::{check_identities, tradeoff_csv, tradeoff_rows};
use macc::combinatorics::choose;
use macc::delivery::deliver;
use macc::dump::{write_broadcast, write_caches, write_library};
use macc::mds::any_k_columns_invertible;
use macc::placement::{place, scheme_codes};
use macc::simulate::{exhaustive_demands, random_demands, simulate, SimulationReport};
use macc::{DemandVector, Field, Library, MdsCode, Scheme, SchemeConfig};

/// Largest demand space `--demands exhaustive` enumerates before falling
/// back to the round-robin vector.
const EXHAUSTIVE_LIMIT: u128 = 4096;

#[derive(Parser)]
#[command(name = "macc", version, about = "Multi-access coded caching experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place, deliver and decode for every user; compare with the closed forms.
    Simulate(SimulateArgs),
    /// Achievable envelope and lower bound as CSV.
    Tradeoff(TradeoffArgs),
    /// Run an invariant suite and print a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DemandMode {
    Random,
    Exhaustive,
    Explicit,
}

#[derive(Args)]
struct SimulateArgs {
    /// mkr, s1, corner or s2.
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(short = 'C')]
    caches: Option<usize>,
    #[arg(short = 'r')]
    access: Option<usize>,
    #[arg(short = 't')]
    t: Option<usize>,
    #[arg(short = 'N')]
    files: Option<usize>,
    /// Requested file length in symbols, rounded up to the subpacketization.
    #[arg(long)]
    f_hint: Option<usize>,
    /// Field degree; defaults to the smallest that fits every code.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long, value_enum)]
    demands: Option<DemandMode>,
    /// Comma-separated files, one per user in lexicographic user order.
    #[arg(long, value_delimiter = ',')]
    demand_vector: Option<Vec<usize>>,
    /// Number of random demand vectors.
    #[arg(long)]
    count: Option<usize>,
    /// Defaults to MACC_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the linear-algebra oracle.
    #[arg(long)]
    no_oracle: bool,
    /// JSON file with the same fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Contents of `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunFile {
    scheme: Option<Scheme>,
    #[serde(rename = "C")]
    caches: Option<usize>,
    r: Option<usize>,
    t: Option<usize>,
    #[serde(rename = "N")]
    files: Option<usize>,
    f_hint: Option<usize>,
    m: Option<u32>,
    demands: Option<DemandMode>,
    demand_vector: Option<Vec<usize>>,
    count: Option<usize>,
    seed: Option<u64>,
    oracle: Option<bool>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// C=8, r=3, N=56.
    Fig3,
    /// C=5, r=3, N=10.
    Fig4,
    /// C=4, r=2, N=6.
    Fig5,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(short = 'C')]
    caches: Option<usize>,
    #[arg(short = 'r')]
    access: Option<usize>,
    #[arg(short = 'N')]
    files: Option<usize>,
    /// Evenly spaced envelope samples over [0, N/r], endpoints included.
    #[arg(long, default_value_t = 49)]
    grid: usize,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Decimal columns instead of exact p/q.
    #[arg(long)]
    decimal: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Mds,
    Decode,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Also write verify.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Verification(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Verification(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Verification(m) | Failure::Io(m) => m,
        }
    }
}

fn io<E: std::fmt::Display>(what: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", what.display()))
}

fn config_err<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tradeoff(a) => cmd_tradeoff(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("macc: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// What `report.json` holds.
#[derive(Serialize)]
struct SimulateOutput {
    seed: u64,
    demand_mode: DemandMode,
    /// The demand space was too large and only the round-robin vector ran.
    truncated: bool,
    field_degree: u32,
    file_len: usize,
    #[serde(flatten)]
    report: SimulationReport,
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("MACC_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(format!("MACC_SEED={s:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let file = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io(p))?;
            serde_json::from_str::<RunFile>(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => RunFile::default(),
    };
    let need = |v: Option<usize>, name: &str| v.ok_or_else(|| Failure::Config(format!("missing {name}")));
    let scheme = a
        .scheme
        .or(file.scheme)
        .ok_or_else(|| Failure::Config("missing --scheme".into()))?;
    let c = need(a.caches.or(file.caches), "-C")?;
    let r = need(a.access.or(file.r), "-r")?;
    let n = need(a.files.or(file.files), "-N")?;
    let t = a.t.or(file.t);
    let f_hint = a.f_hint.or(file.f_hint).unwrap_or(1);
    let seed = match a.seed.or(file.seed) {
        Some(s) => s,
        None => env_seed()?.unwrap_or(0),
    };
    let oracle = !a.no_oracle && file.oracle.unwrap_or(true);
    let explicit = a.demand_vector.or(file.demand_vector);
    let mode = a.demands.or(file.demands).unwrap_or(if explicit.is_some() {
        DemandMode::Explicit
    } else {
        DemandMode::Random
    });
    let count = a.count.or(file.count).unwrap_or(50);

    let mut config = SchemeConfig::new(scheme, c, r, t, n, f_hint).map_err(config_err)?;
    if let Some(m) = a.m.or(file.m) {
        config = config.with_field_degree(m).map_err(config_err)?;
    }
    let (demands, truncated) = match mode {
        DemandMode::Random => (random_demands(&config, seed, count), false),
        DemandMode::Exhaustive => exhaustive_demands(&config, EXHAUSTIVE_LIMIT),
        DemandMode::Explicit => {
            let v =
                explicit.ok_or_else(|| Failure::Config("--demands explicit needs --demand-vector".into()))?;
            (vec![DemandVector::new(&config, v).map_err(config_err)?], false)
        }
    };

    let library = Library::random(&config, seed);
    let caches = place(&config, &library).map_err(|e| Failure::Verification(e.to_string()))?;
    let report = simulate(&config, &library, &caches, &demands, oracle);

    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(io(dir))?;
        write_library(
            &config,
            &library,
            &dir.join("library.json"),
            &dir.join("library.bin"),
        )
        .map_err(io(dir))?;
        write_caches(&config, &caches, &dir.join("caches")).map_err(io(dir))?;
        let bdir = dir.join("broadcasts");
        fs::create_dir_all(&bdir).map_err(io(&bdir))?;
        for (i, d) in demands.iter().enumerate() {
            let batch = deliver(&config, &library, d).map_err(|e| Failure::Verification(e.to_string()))?;
            write_broadcast(
                &config,
                &batch,
                &bdir.join(format!("broadcast_{i}.json")),
                &bdir.join(format!("broadcast_{i}.bin")),
            )
            .map_err(io(&bdir))?;
        }
    }

    print_summary(&config, &report, truncated);
    let passed = report.passed;
    if let Some(dir) = &a.out {
        let out = SimulateOutput {
            seed,
            demand_mode: mode,
            truncated,
            field_degree: config.field_degree(),
            file_len: config.file_len(),
            report,
        };
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(&out).map_err(io(&path))? + "\n";
        fs::write(&path, text).map_err(io(&path))?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification(
            "simulation did not match the expected memory, rate or files".into(),
        ))
    }
}

fn print_summary(config: &SchemeConfig, report: &SimulationReport, truncated: bool) {
    let t = config.t_param().map(|t| format!(" t={t}")).unwrap_or_default();
    println!(
        "scheme {} C={} r={}{t} N={} m={} f={}",
        config.scheme().name(),
        config.caches(),
        config.access(),
        config.files(),
        config.field_degree(),
        config.file_len()
    );
    println!(
        "memory {} (expected {}){}",
        report.memory.first().map(|m| m.to_string()).unwrap_or_default(),
        report.expected_memory,
        if report.memory_ok { "" } else { " MISMATCH" }
    );
    let mut rates: Vec<String> = report.demand_vectors.iter().map(|o| o.rate.to_string()).collect();
    rates.sort();
    rates.dedup();
    let ok = report.demand_vectors.iter().filter(|o| o.passed).count();
    println!(
        "demand vectors {}{} passed {ok} rates {}",
        report.demand_vectors.len(),
        if truncated {
            " (truncated to round-robin)"
        } else {
            ""
        },
        rates.join(",")
    );
    for o in report.demand_vectors.iter().filter(|o| !o.passed) {
        let why = o
            .users
            .iter()
            .find_map(|u| u.error.clone())
            .unwrap_or_else(|| format!("rate {} expected {}", o.rate, o.expected_rate));
        println!("  failed {:?}: {why}", o.demands);
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
}

fn cmd_tradeoff(a: TradeoffArgs) -> Result<(), Failure> {
    let (pc, pr, pn) = match a.preset {
        Some(Preset::Fig3) => (Some(8), Some(3), Some(56)),
        Some(Preset::Fig4) => (Some(5), Some(3), Some(10)),
        Some(Preset::Fig5) => (Some(4), Some(2), Some(6)),
        None => (None, None, None),
    };
    let missing = |name: &str| Failure::Config(format!("missing {name} (or --preset)"));
    let c = a.caches.or(pc).ok_or_else(|| missing("-C"))?;
    let r = a.access.or(pr).ok_or_else(|| missing("-r"))?;
    let n = a.files.or(pn).ok_or_else(|| missing("-N"))?;
    let rows = tradeoff_rows(c, r, n, a.grid).map_err(config_err)?;
    let csv = tradeoff_csv(&rows, a.decimal);
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io(dir))?;
            let path = dir.join("tradeoff.csv");
            fs::write(&path, csv).map_err(io(&path))?;
            println!("{}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let run = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut suites = Vec::new();
    if run(Suite::Identities) {
        suites.push(identities_suite());
    }
    if run(Suite::Mds) {
        suites.push(mds_suite());
    }
    if run(Suite::Decode) {
        suites.push(decode_suite());
    }
    let passed = suites.iter().all(|s| s["passed"] == true);
    let summary = json!({ "passed": passed, "suites": suites });
    let text = serde_json::to_string_pretty(&summary).expect("json values serialize") + "\n";
    print!("{text}");
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join("verify.json");
        fs::write(&path, &text).map_err(io(&path))?;
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verification("verification suite failed".into()))
    }
}

fn identities_suite() -> Value {
    let rep = check_identities(12);
    json!({
        "suite": "identities",
        "passed": rep.all_hold(),
        "checked": rep.checked,
        "failures": rep.failures,
    })
}

/// Every Reed–Solomon code up to length 12 over its smallest field, in both
/// forms, and every code the placements build for `C <= 6`.
fn mds_suite() -> Value {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |code: &MdsCode, gf: &Field, source: String| {
        checked += 1;
        if !any_k_columns_invertible(code, gf, 0) {
            failures.push(json!({ "source": source, "k": code.k(), "n": code.n() }));
        }
    };
    for n in 1..=12 {
        let gf = Field::new(Field::degree_for_len(n)).expect("small degree");
        for k in 1..=n {
            let rs = MdsCode::reed_solomon(k, n, &gf).expect("n fits the field");
            check(&rs, &gf, format!("rs[{n},{k}]"));
            let sys = rs.systematize(&gf).expect("leading block invertible");
            check(&sys, &gf, format!("systematic rs[{n},{k}]"));
        }
    }
    for config in small_configs(6) {
        let gf = config.field();
        let codes = scheme_codes(&config).expect("valid configuration");
        for code in &codes {
            check(code, &gf, describe(&config));
        }
    }
    json!({
        "suite": "mds",
        "passed": failures.is_empty(),
        "checked": checked,
        "failures": failures,
    })
}

fn describe(config: &SchemeConfig) -> String {
    let t = config.t_param().map(|t| format!(",t={t}")).unwrap_or_default();
    format!(
        "{}(C={},r={}{t},N={})",
        config.scheme().name(),
        config.caches(),
        config.access(),
        config.files()
    )
}

/// Scheme 1 for every `t`, the corner, and scheme 2 at the two ends of its
/// file range, for all `2 <= C <= max_c`.
fn small_configs(max_c: usize) -> Vec<SchemeConfig> {
    let mut v = Vec::new();
    for c in 2..=max_c {
        for r in 1..c {
            for t in 1..=c - r {
                v.push(SchemeConfig::new(Scheme::Scheme1, c, r, Some(t), 2, 1).expect("valid"));
            }
            v.push(SchemeConfig::new(Scheme::Corner, c, r, None, 2, 1).expect("valid"));
            let lo = choose(c - 1, r) + 1;
            for n in [lo, choose(c, r).max(lo)] {
                v.push(SchemeConfig::new(Scheme::Scheme2, c, r, None, n, 1).expect("valid"));
            }
        }
    }
    v
}

/// All 64 demand vectors of `C=4, r=2, N=2` for each construction.
fn decode_suite() -> Value {
    let configs = [
        (Scheme::Mkr, Some(1)),
        (Scheme::Mkr, Some(2)),
        (Scheme::Scheme1, Some(1)),
        (Scheme::Scheme1, Some(2)),
        (Scheme::Corner, None),
    ];
    let mut runs = Vec::new();
    for (scheme, t) in configs {
        let config = SchemeConfig::new(scheme, 4, 2, t, 2, 1).expect("valid");
        let library = Library::random(&config, 0);
        let caches = place(&config, &library).expect("valid");
        let (demands, _) = exhaustive_demands(&config, EXHAUSTIVE_LIMIT);
        let rep = simulate(&config, &library, &caches, &demands, true);
        runs.push(json!({
            "config": describe(&config),
            "demand_vectors": demands.len(),
            "passed_vectors": rep.demand_vectors.iter().filter(|o| o.passed).count(),
            "passed": rep.passed,
        }));
    }
    let passed = runs.iter().all(|r| r["passed"] == true);
    json!({ "suite": "decode", "passed": passed, "runs": runs })
}
