//! Command-line front end: reproducible partition builds, growth-exponent
//! solves, ball enumerations with congruence statistics, character-sum
//! scans, and sieve runs.
//!
//! Every command writes fixed-format artifacts (17 significant digits for
//! reals, exact integers otherwise) plus a JSON manifest with content hashes,
//! so reruns diff byte-for-byte. Exit codes: 0 success, 2 usage error,
//! 3 bound violation found, 4 internal certification failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use geodesic_core::congruence::{self, Sl2Group};
use geodesic_core::exec::{self, ExecMode};
use geodesic_core::gaussian::{gi, GaussianInt, ResidueRing};
use geodesic_core::subshift::{self, SubshiftError};
use geodesic_core::{charsums, geodesics, hurwitz, sieve, thermo};

const EXIT_USAGE: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_CERTIFICATION: u8 = 4;

#[derive(Parser)]
#[command(
    name = "geodesic-lab",
    version,
    about = "desk-scale experiments on low-lying geodesics over the Gaussian integers"
)]
struct Cli {
    /// Worker threads for parallel scans (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Flat key=value file mirroring the long flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cache directory (overridden by GEODESIC_LAB_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Markov partition and its transition matrix.
    Partition(PartitionArgs),
    /// Solve the pressure equation for the growth exponent.
    Delta(DeltaArgs),
    /// Enumerate geodesic classes in a Frobenius ball.
    Enumerate(EnumerateArgs),
    /// Scan character sums against their Weil-type bounds.
    Charsums(CharsumArgs),
    /// Run the congruence ledger over the sifting set.
    Sieve(SieveArgs),
    /// Harvest square-free discriminants from a ball enumeration.
    Harvest(HarvestArgs),
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct DeltaArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    ball: f64,
    /// Gaussian modulus like `1+i` for congruence statistics.
    #[arg(long, value_name = "Q")]
    r#mod: Option<String>,
    /// Alternate path for the class CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CharsumArgs {
    #[arg(long, value_name = "Q")]
    r#mod: String,
    /// Scan all unit 4-tuples.
    #[arg(long, conflicts_with = "xi")]
    all_xi: bool,
    /// One tuple `a,b,c,d` of Gaussian integers.
    #[arg(long)]
    xi: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SieveArgs {
    #[arg(long)]
    radius: f64,
    #[arg(short = 'X', long, default_value_t = 32.0)]
    x: f64,
    #[arg(short = 'Y', long, default_value_t = 4.0)]
    y: f64,
    #[arg(short = 'Z', long, default_value_t = 4.0)]
    z: f64,
    /// Modulus norm ceiling for the ledger.
    #[arg(long, default_value_t = 40)]
    level: i128,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct HarvestArgs {
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    ball: f64,
    /// Growth exponent used in the multiplicity threshold (default: quick solve).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    eta: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let argv = merge_config_args(std::env::args().collect());
    let argv = match argv {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = Cli::parse_from(argv);
    exec::configure_workers(cli.workers);
    let cache = cache_dir(&cli);
    let outcome = match &cli.command {
        Command::Partition(args) => cmd_partition(args),
        Command::Delta(args) => cmd_delta(args),
        Command::Enumerate(args) => cmd_enumerate(args, cache.as_deref()),
        Command::Charsums(args) => cmd_charsums(args),
        Command::Sieve(args) => cmd_sieve(args),
        Command::Harvest(args) => cmd_harvest(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<SubshiftError>().is_some() {
                EXIT_CERTIFICATION
            } else {
                EXIT_USAGE
            };
            ExitCode::from(code)
        }
    }
}

/// Inject `key=value` pairs from `--config FILE` as long flags, letting
/// explicit command-line flags win.
fn merge_config_args(mut argv: Vec<String>) -> Result<Vec<String>> {
    let mut config_path = None;
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            config_path = argv.get(i + 1).cloned();
        } else if let Some(rest) = a.strip_prefix("--config=") {
            config_path = Some(rest.to_string());
        }
    }
    let Some(path) = config_path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config file {path}"))?;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line is not key=value: {line}"))?;
        let key = key.trim();
        let flag = format!("--{key}");
        let already = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if already {
            continue;
        }
        let value = value.trim();
        if value.eq_ignore_ascii_case("true") {
            argv.push(flag);
        } else {
            argv.push(format!("{flag}={value}"));
        }
    }
    Ok(argv)
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    std::env::var_os("GEODESIC_LAB_CACHE")
        .map(PathBuf::from)
        .or_else(|| cli.cache_dir.clone())
}

fn mode() -> ExecMode {
    ExecMode::default()
}

/// Parse `a+bi` forms: `3`, `i`, `-i`, `1+i`, `2-3i`, `4i`.
fn parse_gaussian(s: &str) -> Result<GaussianInt> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        bail!("empty Gaussian integer");
    }
    let parse_part = |p: &str| -> Result<i128> {
        match p {
            "" | "+" => Ok(1),
            "-" => Ok(-1),
            _ => p.parse::<i128>().context("bad integer part"),
        }
    };
    if let Some(im_part) = t.strip_suffix('i') {
        // split at the last +/- that is not the leading sign
        let bytes = im_part.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if bytes[k] == b'+' || bytes[k] == b'-' {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re: i128 = im_part[..k].parse().context("bad real part")?;
                let im = parse_part(&im_part[k..])?;
                Ok(gi(re, im))
            }
            None => Ok(gi(0, parse_part(im_part)?)),
        }
    } else {
        Ok(gi(t.parse::<i128>().context("bad integer")?, 0))
    }
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn sha256_hex(data: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(data);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects written files and their hashes for the manifest.
struct Outputs {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Outputs> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, data: &str) -> Result<()> {
        let path = self.dir.join(name);
        self.write_at(&path, name, data)
    }

    fn write_at(&mut self, path: &Path, name: &str, data: &str) -> Result<()> {
        std::fs::write(path, data).with_context(|| format!("cannot write {}", path.display()))?;
        self.hashes
            .insert(name.to_string(), sha256_hex(data.as_bytes()));
        Ok(())
    }

    fn manifest(
        &mut self,
        command: &str,
        params: BTreeMap<String, String>,
        input_hashes: BTreeMap<String, String>,
    ) -> Result<()> {
        let manifest = serde_json::json!({
            "command": command,
            "params": params,
            "versions": {
                "geodesic-lab": env!("CARGO_PKG_VERSION"),
            },
            "input_hashes": input_hashes,
            "output_hashes": self.hashes,
        });
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text)?;
        Ok(())
    }
}

fn build_system(radius: f64) -> Result<(hurwitz::Partition, subshift::TransitionMatrix)> {
    let p = hurwitz::build_partition(radius).map_err(|e| anyhow!("{e}"))?;
    let a = subshift::build_transitions(&p, mode())?;
    Ok((p, a))
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

fn cmd_partition(args: &PartitionArgs) -> Result<u8> {
    let (p, a) = build_system(args.radius)?;
    let s = subshift::check_irreducible_aperiodic(&a);
    let mut out = Outputs::new(&args.out)?;
    let export = serde_json::to_string_pretty(&p.export())? + "\n";
    out.write("partition.json", &export)?;
    out.write("transitions.csv", &subshift::transitions_csv(&a))?;
    let summary = serde_json::json!({
        "radius": args.radius,
        "parts": p.len(),
        "edges": a.edge_count(),
        "irreducible": s.irreducible,
        "aperiodic": s.period == 1,
        "period": s.period,
        "primitivity_index": s.primitivity_index,
    });
    out.write(
        "summary.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let params = BTreeMap::from([("radius".into(), args.radius.to_string())]);
    out.manifest("partition", params, BTreeMap::new())?;
    println!(
        "partition: {} parts, {} edges, irreducible={}, period={}, primitivity_index={:?}",
        p.len(),
        a.edge_count(),
        s.irreducible,
        s.period,
        s.primitivity_index
    );
    Ok(0)
}

fn cmd_delta(args: &DeltaArgs) -> Result<u8> {
    if args.tol < 1e-4 {
        bail!("tolerance below 1e-4 is not supported");
    }
    let (p, a) = build_system(args.radius)?;
    let res = thermo::solve_delta(&p, &a, args.tol, args.max_depth, mode())
        .map_err(|e| anyhow!("{e}"))?;
    let mut out = Outputs::new(&args.out)?;
    let mut csv = String::from("R,s,n,lower,upper,center\n");
    for e in &res.evals {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            args.radius,
            fmt_real(e.s),
            e.depth,
            fmt_real(e.lower),
            fmt_real(e.upper),
            fmt_real(e.center)
        ));
    }
    out.write("pressure.csv", &csv)?;
    let delta = serde_json::json!({
        "R": args.radius,
        "delta": res.delta,
        "lo": res.lo,
        "hi": res.hi,
        "certified": res.certified,
        "depth": res.depth_used,
    });
    out.write(
        "delta.json",
        &(serde_json::to_string_pretty(&delta)? + "\n"),
    )?;
    let params = BTreeMap::from([
        ("radius".into(), args.radius.to_string()),
        ("tol".into(), args.tol.to_string()),
        ("max_depth".into(), args.max_depth.to_string()),
    ]);
    out.manifest("delta", params, BTreeMap::new())?;
    println!(
        "delta = {:.6} in [{:.6}, {:.6}], certified={}, depth={}",
        res.delta, res.lo, res.hi, res.certified, res.depth_used
    );
    Ok(0)
}

fn classes_csv(classes: &[geodesics::GeodesicClass]) -> String {
    let mut s = String::from(
        "word,trace_re,trace_im,disc_re,disc_im,frob_sq,length,holonomy,squarefree,fundamental_eligible\n",
    );
    for c in classes {
        s.push_str(&format!(
            "\"{}\",{},{},{},{},{},{},{},{},{}\n",
            c.word.to_label_string(),
            c.trace.0,
            c.trace.1,
            c.disc.0,
            c.disc.1,
            c.frob_sq,
            fmt_real(c.length),
            fmt_real(c.holonomy),
            c.squarefree_disc,
            c.fundamental_eligible
        ));
    }
    s
}

fn cmd_enumerate(args: &EnumerateArgs, cache: Option<&Path>) -> Result<u8> {
    let (p, a) = build_system(args.radius)?;
    let mats = p.branch_matrices();

    let cache_key =
        sha256_hex(format!("enumerate:radius={}:ball={}", args.radius, args.ball).as_bytes());
    let mut input_hashes = BTreeMap::new();
    let cached_csv = cache.and_then(|dir| {
        let path = dir.join(&cache_key[..16]).join("geodesics.csv");
        std::fs::read_to_string(path).ok()
    });

    let csv_text = match cached_csv {
        Some(text) => {
            input_hashes.insert(
                format!("cache:{}", &cache_key[..16]),
                sha256_hex(text.as_bytes()),
            );
            text
        }
        None => {
            let classes = geodesics::enumerate_ball(&a, &mats, args.ball, mode());
            let text = classes_csv(&classes);
            if let Some(dir) = cache {
                let d = dir.join(&cache_key[..16]);
                std::fs::create_dir_all(&d).ok();
                std::fs::write(d.join("geodesics.csv"), &text).ok();
            }
            text
        }
    };
    // counts come from the artifact itself so cached and fresh runs agree
    let lines: Vec<&str> = csv_text.lines().skip(1).collect();
    let class_count = lines.len();
    let squarefree = lines.iter().filter(|l| l.contains(",true,")).count();
    let fundamental = lines.iter().filter(|l| l.ends_with(",true")).count();

    let mut out = Outputs::new(&args.out)?;
    match &args.csv {
        Some(path) => {
            let path = path.clone();
            out.write_at(&path, "geodesics.csv", &csv_text)?
        }
        None => out.write("geodesics.csv", &csv_text)?,
    }
    let mut summary = serde_json::json!({
        "radius": args.radius,
        "ball": args.ball,
        "classes": class_count,
        "squarefree_classes": squarefree,
        "fundamental_classes": fundamental,
    });

    if let Some(qs) = &args.r#mod {
        let q = parse_gaussian(qs)?;
        let group = Sl2Group::new(ResidueRing::new(q)).map_err(|e| anyhow!("{e}"))?;
        let set = geodesics::ball_matrix_set(&a, &mats, args.ball, true, mode());
        let rep = congruence::equidist_stats(&set, &group, mode()).map_err(|e| anyhow!("{e}"))?;
        out.write(
            "equidist.csv",
            &congruence::equidist_csv(&rep, args.radius, args.ball),
        )?;
        summary["equidist"] = serde_json::json!({
            "modulus": q.to_string(),
            "matrices": rep.total,
            "group_order": rep.group_order,
            "classes_hit": rep.classes_hit,
            "max_rel_dev": rep.max_rel_dev,
            "l2_dev": rep.l2_dev,
        });
    }
    out.write(
        "counts.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let mut params = BTreeMap::from([
        ("radius".into(), args.radius.to_string()),
        ("ball".into(), args.ball.to_string()),
    ]);
    if let Some(q) = &args.r#mod {
        params.insert("mod".into(), q.clone());
    }
    out.manifest("enumerate", params, input_hashes)?;
    println!(
        "enumerated {class_count} classes at R={}, X={}",
        args.radius, args.ball
    );
    Ok(0)
}

fn cmd_charsums(args: &CharsumArgs) -> Result<u8> {
    let q = parse_gaussian(&args.r#mod)?;
    if q.is_zero() {
        bail!("modulus must be nonzero");
    }
    let table = charsums::CharacterTable::new(q).map_err(|e| anyhow!("{e}"))?;
    let group = Sl2Group::new(ResidueRing::new(q)).map_err(|e| anyhow!("{e}"))?;
    let xi_list: Option<Vec<[GaussianInt; 4]>> = match (&args.xi, args.all_xi) {
        (Some(spec), _) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 4 {
                bail!("--xi needs four comma-separated Gaussian integers");
            }
            let mut xi = [GaussianInt::ZERO; 4];
            for (slot, p) in xi.iter_mut().zip(parts) {
                *slot = parse_gaussian(p)?;
            }
            Some(vec![xi])
        }
        (None, true) => None,
        (None, false) => bail!("pass --all-xi or --xi a,b,c,d"),
    };
    let rows = charsums::weil_margin_scan(&table, &group, xi_list.as_deref(), mode());
    let violations = rows.iter().filter(|r| r.violated()).count();
    let mut out = Outputs::new(&args.out)?;
    out.write("charsum_margins.csv", &charsums::margins_csv(&rows))?;
    let params = BTreeMap::from([
        ("mod".into(), args.r#mod.clone()),
        ("xi".into(), args.xi.clone().unwrap_or_else(|| "all".into())),
    ]);
    out.manifest("charsums", params, BTreeMap::new())?;
    println!(
        "scanned {} sums over modulus {q}: {} violations",
        rows.len(),
        violations
    );
    Ok(if violations > 0 { EXIT_VIOLATION } else { 0 })
}

fn cmd_sieve(args: &SieveArgs) -> Result<u8> {
    if args.level > congruence::ENUM_NORM_BOUND {
        bail!(
            "level {} exceeds the desk bound {}",
            args.level,
            congruence::ENUM_NORM_BOUND
        );
    }
    let (p, a) = build_system(args.radius)?;
    let set = sieve::build_sifting_set(&p, &a, args.x, args.y, args.z, mode())
        .map_err(|e| anyhow!("{e}"))?;
    let mats = p.branch_matrices();
    let (max_norm, c_measured) = set.norm_stats(&mats, mode()).map_err(|e| anyhow!("{e}"))?;
    let ledger = sieve::sieve_ledger(&set, &p, args.level, mode()).map_err(|e| anyhow!("{e}"))?;
    let mut out = Outputs::new(&args.out)?;
    out.write("ledger.csv", &ledger.to_csv())?;
    let summary = serde_json::json!({
        "radius": args.radius,
        "X": args.x, "Y": args.y, "Z": args.z,
        "level": args.level.to_string(),
        "xi_len": set.l_x, "omega_len": set.l_z,
        "xi_count": set.xi.len(),
        "aleph_count": set.aleph.len(),
        "omega_count": set.omega.len(),
        "pi_size": set.len(),
        "max_glued_norm": max_norm,
        "measured_c": c_measured,
        "remainder_mass": ledger.remainder_mass(),
    });
    out.write(
        "summary.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let params = BTreeMap::from([
        ("radius".into(), args.radius.to_string()),
        ("X".into(), args.x.to_string()),
        ("Y".into(), args.y.to_string()),
        ("Z".into(), args.z.to_string()),
        ("level".into(), args.level.to_string()),
    ]);
    let partition_hash = sha256_hex(serde_json::to_string(&p.export())?.as_bytes());
    let inputs = BTreeMap::from([("partition".to_string(), partition_hash)]);
    out.manifest("sieve", params, inputs)?;
    println!(
        "sifting set |Pi| = {} ({}x{}x{}), ledger rows = {}, remainder mass = {:.4}",
        set.len(),
        set.xi.len(),
        set.aleph.len(),
        set.omega.len(),
        ledger.rows.len(),
        ledger.remainder_mass()
    );
    Ok(0)
}

fn cmd_harvest(args: &HarvestArgs) -> Result<u8> {
    let (p, a) = build_system(args.radius)?;
    let mats = p.branch_matrices();
    let delta = match args.delta {
        Some(d) => d,
        None => {
            thermo::solve_delta(&p, &a, 1e-2, 2, mode())
                .map_err(|e| anyhow!("{e}"))?
                .delta
        }
    };
    let classes = geodesics::enumerate_ball(&a, &mats, args.ball, mode());
    let report = sieve::harvest(&classes, delta, args.eta);
    let mut out = Outputs::new(&args.out)?;
    out.write("harvest.csv", &sieve::harvest_csv(&report))?;
    let summary = serde_json::json!({
        "radius": args.radius,
        "ball": args.ball,
        "delta": delta,
        "eta": args.eta,
        "classes": report.total_classes,
        "distinct_traces": report.traces.len(),
        "squarefree_discriminants": report.d_set.len(),
        "threshold_hits": report.threshold_hits,
    });
    out.write(
        "summary.json",
        &(serde_json::to_string_pretty(&summary)? + "\n"),
    )?;
    let params = BTreeMap::from([
        ("radius".into(), args.radius.to_string()),
        ("ball".into(), args.ball.to_string()),
        ("delta".into(), delta.to_string()),
        ("eta".into(), args.eta.to_string()),
    ]);
    let partition_hash = sha256_hex(serde_json::to_string(&p.export())?.as_bytes());
    let inputs = BTreeMap::from([("partition".to_string(), partition_hash)]);
    out.manifest("harvest", params, inputs)?;
    println!(
        "harvest: {} classes, {} distinct traces, {} square-free discriminants",
        report.total_classes,
        report.traces.len(),
        report.d_set.len()
    );
    Ok(0)
}
