//! End-to-end tests of the command-line interface: artifact schemas,
//! byte-reproducibility, exit codes, config and cache plumbing.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_geodesic-lab")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    cmd.env_remove("GEODESIC_LAB_CACHE");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("geodesic-lab-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn partition_outputs_and_reproducibility() {
    let d1 = tmpdir("part1");
    let d2 = tmpdir("part2");
    for d in [&d1, &d2] {
        let out = run(
            &["partition", "--radius", "4", "--out", d.to_str().unwrap()],
            &[],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let summary: serde_json::Value = serde_json::from_str(&read(&d1, "summary.json")).unwrap();
    assert_eq!(summary["irreducible"], true);
    assert_eq!(summary["aperiodic"], true);
    assert!(summary["primitivity_index"].as_u64().unwrap() <= 3);
    assert_eq!(summary["parts"], 80);
    // byte-identical artifacts across reruns
    for name in [
        "partition.json",
        "transitions.csv",
        "summary.json",
        "manifest.json",
    ] {
        assert_eq!(
            read(&d1, name),
            read(&d2, name),
            "{name} differs across runs"
        );
    }
    // transitions.csv schema
    let csv = read(&d1, "transitions.csv");
    assert!(csv.starts_with("from_label,to_label\n"));
    assert!(csv.lines().count() > 100);
}

#[test]
fn delta_output_in_range() {
    let d = tmpdir("delta");
    let out = run(
        &[
            "delta",
            "--radius",
            "4",
            "--tol",
            "0.05",
            "--max-depth",
            "2",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let delta: serde_json::Value = serde_json::from_str(&read(&d, "delta.json")).unwrap();
    let value = delta["delta"].as_f64().unwrap();
    assert!(value > 0.0 && value < 2.0);
    let (lo, hi) = (delta["lo"].as_f64().unwrap(), delta["hi"].as_f64().unwrap());
    assert!(lo <= value && value <= hi);
    if delta["certified"] == true {
        assert!(hi - lo <= 0.05 + 1e-12);
    }
    let csv = read(&d, "pressure.csv");
    assert!(csv.starts_with("R,s,n,lower,upper,center\n"));
}

#[test]
fn enumerate_counts_and_congruence_bins() {
    let d = tmpdir("enum");
    let out = run(
        &[
            "enumerate",
            "--radius",
            "4",
            "--ball",
            "16",
            "--mod",
            "1+i",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let counts: serde_json::Value = serde_json::from_str(&read(&d, "counts.json")).unwrap();
    // golden count at (R=4, X=16), produced by the exhaustive (prune-free)
    // reference enumerator with two letters of length margin; the pruned
    // search reproduces it word for word
    assert_eq!(counts["classes"], 1764);
    // congruence bins sum to the binned matrix total
    let equidist = read(&d, "equidist.csv");
    let mut total = 0u64;
    for line in equidist.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        total += fields[5].parse::<u64>().unwrap();
    }
    assert_eq!(total, counts["equidist"]["matrices"].as_u64().unwrap());
    assert_eq!(counts["equidist"]["classes_hit"], 6);
    // geodesics.csv schema line
    let geo = read(&d, "geodesics.csv");
    assert!(geo.starts_with(
        "word,trace_re,trace_im,disc_re,disc_im,frob_sq,length,holonomy,squarefree,fundamental_eligible\n"
    ));
    assert_eq!(geo.lines().count(), 1 + 1764);
}

#[test]
fn enumerate_csv_path_and_cache_roundtrip() {
    let d = tmpdir("enumcache");
    let cache = tmpdir("cache");
    let csv_path = d.join("custom.csv");
    let args = [
        "enumerate",
        "--radius",
        "4",
        "--ball",
        "8",
        "--csv",
        csv_path.to_str().unwrap(),
        "--out",
        d.to_str().unwrap(),
    ];
    let out1 = run(&args, &[("GEODESIC_LAB_CACHE", cache.to_str().unwrap())]);
    assert!(out1.status.success());
    let first = std::fs::read_to_string(&csv_path).unwrap();
    // second run must reuse the cache and reproduce the bytes
    let out2 = run(&args, &[("GEODESIC_LAB_CACHE", cache.to_str().unwrap())]);
    assert!(out2.status.success());
    let second = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(first, second);
    let manifest: serde_json::Value = serde_json::from_str(&read(&d, "manifest.json")).unwrap();
    assert!(
        manifest["input_hashes"].as_object().unwrap().len() == 1,
        "second run should record the cache hit"
    );
}

#[test]
fn charsums_scan_and_exit_codes() {
    let d = tmpdir("charsums");
    let out = run(
        &[
            "charsums",
            "--mod",
            "2+i",
            "--all-xi",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&d, "charsum_margins.csv");
    assert!(csv.starts_with("q_re,q_im,chi_multiplier,xi,abs_sum,bound,margin\n"));
    // every margin is nonnegative
    for line in csv.lines().skip(1) {
        let margin: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(margin >= -1e-6);
    }

    // zero modulus is a usage error
    let bad = run(&["charsums", "--mod", "0", "--all-xi"], &[]);
    assert_eq!(bad.status.code(), Some(2));

    // missing xi selection is a usage error
    let bad = run(&["charsums", "--mod", "2+i"], &[]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn sieve_ledger_wiring() {
    let d = tmpdir("sieve");
    let out = run(
        &[
            "sieve",
            "--radius",
            "4",
            "-X",
            "6",
            "-Y",
            "4",
            "-Z",
            "4",
            "--level",
            "10",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&d, "ledger.csv");
    assert!(csv.starts_with("q_re,q_im,Uq,beta_num,beta_den,main,remainder\n"));
    let summary: serde_json::Value = serde_json::from_str(&read(&d, "summary.json")).unwrap();
    let pi = summary["pi_size"].as_u64().unwrap();
    // main column equals beta * |Pi| as exact rationals
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (num, den): (u64, u64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        let main: f64 = f[5].parse().unwrap();
        let expect = num as f64 * pi as f64 / den as f64;
        assert!((main - expect).abs() <= 1e-9 * expect.max(1.0));
    }
    // unit modulus row has zero remainder
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("1,0,"));
    let rem: f64 = first.rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(rem, 0.0);

    // manifest hash stability across reruns
    let d2 = tmpdir("sieve2");
    let out2 = run(
        &[
            "sieve",
            "--radius",
            "4",
            "-X",
            "6",
            "-Y",
            "4",
            "-Z",
            "4",
            "--level",
            "10",
            "--out",
            d2.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out2.status.success());
    assert_eq!(read(&d, "manifest.json"), read(&d2, "manifest.json"));
}

#[test]
fn harvest_emits_nonempty_family() {
    let d = tmpdir("harvest");
    let out = run(
        &[
            "harvest",
            "--radius",
            "4",
            "--ball",
            "16",
            "--delta",
            "1.82",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value = serde_json::from_str(&read(&d, "summary.json")).unwrap();
    assert!(summary["squarefree_discriminants"].as_u64().unwrap() > 0);
    let csv = read(&d, "harvest.csv");
    assert!(csv.starts_with("t_re,t_im,M,disc_re,disc_im,squarefree\n"));
}

#[test]
fn config_file_supplies_flags() {
    let d = tmpdir("config");
    let cfg = d.join("run.conf");
    std::fs::write(&cfg, "radius=4\nball=8\n# comment line\n").unwrap();
    let out = run(
        &[
            "enumerate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let counts: serde_json::Value = serde_json::from_str(&read(&d, "counts.json")).unwrap();
    assert_eq!(counts["ball"], 8.0);
    // explicit flags beat config values
    let out = run(
        &[
            "enumerate",
            "--config",
            cfg.to_str().unwrap(),
            "--ball",
            "6",
            "--out",
            d.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let counts: serde_json::Value = serde_json::from_str(&read(&d, "counts.json")).unwrap();
    assert_eq!(counts["ball"], 6.0);
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["partition"], &[]); // missing --radius
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["partition", "--radius", "2"], &[]); // radius below 3
    assert_eq!(out.status.code(), Some(2));
    let out = run(
        &["enumerate", "--radius", "4", "--ball", "8", "--mod", "37+i"],
        &[],
    );
    assert_eq!(out.status.code(), Some(2)); // norm over the enumeration bound
}
