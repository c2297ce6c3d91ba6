use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use homonym_core::stream::root_stream;
use homonym_core::zipf_pmf;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_homonym"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/pairs_dependent.csv")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

fn write_freq(path: &Path, counts: &[u64]) {
    let mut s = String::from("label,count\n");
    for (i, c) in counts.iter().enumerate() {
        s.push_str(&format!("N{i},{c}\n"));
    }
    fs::write(path, s).unwrap();
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn fit_zipf_recovers_exponent() {
    let dir = TempDir::new().unwrap();
    let d = zipf_pmf(1.0, 5000).unwrap();
    let mut counts = vec![0u64; d.len()];
    let mut rng = root_stream(1);
    for _ in 0..1_000_000 {
        counts[d.sample(&mut rng)] += 1;
    }
    let input = dir.path().join("freq.csv");
    write_freq(&input, &counts);
    let out_dir = dir.path().join("out");
    assert_ok(&run(&["fit-zipf", "--input", p(&input), "--out", p(&out_dir)]));

    let fit = read_json(&out_dir.join("zipf_fit.json"));
    let alpha = fit["alpha"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&alpha), "{alpha}");
    let k = fit["k"].as_u64().unwrap() as usize;
    let rows = read_rows(&out_dir.join("rank_frequency.csv"));
    assert_eq!(rows.len(), k);
    assert_eq!(&rows[0][0], "1");
    assert_eq!(&rows[0][1], "N0");
    let manifest = read_json(&out_dir.join("manifest.json"));
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn fit_zipf_single_label_is_domain_error() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("one.csv");
    write_freq(&input, &[12]);
    let out = run(&["fit-zipf", "--input", p(&input), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));
}

#[test]
fn missing_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(&["fit-zipf", "--input", "/no/such/file.csv", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_uniform_starts_at_zero_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let base = ["simulate", "--uniform", "365", "--grid", "1:100:20", "--replicates", "100", "--long", "--seed", "7"];
    assert_ok(&run(&[&base[..], &["--out", p(&a), "--workers", "1"]].concat()));
    assert_ok(&run(&[&base[..], &["--out", p(&b), "--workers", "8"]].concat()));

    let rows = read_rows(&a.join("curve.csv"));
    assert_eq!(&rows[0][0], "1");
    assert_eq!(&rows[0][1], "0");
    for name in ["curve.csv", "replicates.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let header = fs::read_to_string(a.join("curve.csv")).unwrap();
    assert!(header.starts_with("n,mean,stderr,replicates,logit,probit\n"));
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let args = |o: &Path| {
        run(&[
            "simulate",
            "--pairs",
            p(&fixture()),
            "--grid",
            "10:2000:6",
            "--replicates",
            "50",
            "--out",
            p(o),
        ])
    };
    assert_ok(&args(&out));
    let first: Vec<_> = ["curve.csv", "manifest.json", "ingest_report.json"]
        .iter()
        .map(|f| fs::read(out.join(f)).unwrap())
        .collect();
    assert_ok(&args(&out));
    for (f, bytes) in ["curve.csv", "manifest.json", "ingest_report.json"].iter().zip(first) {
        assert_eq!(fs::read(out.join(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn pair_and_independent_modes_differ() {
    let dir = TempDir::new().unwrap();
    let curve = |mode: &str| {
        let o = dir.path().join(mode);
        assert_ok(&run(&[
            "simulate",
            "--pairs",
            p(&fixture()),
            "--mode",
            mode,
            "--grid",
            "10:3000:8",
            "--replicates",
            "300",
            "--out",
            p(&o),
        ]));
        read_rows(&o.join("curve.csv"))
            .iter()
            .map(|r| (r[1].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap()))
            .collect::<Vec<_>>()
    };
    let pair = curve("pair");
    let ind = curve("independent");
    let separated = pair
        .iter()
        .zip(&ind)
        .any(|(a, b)| (a.0 - b.0).abs() > 3.0 * (a.1.powi(2) + b.1.powi(2)).sqrt());
    assert!(separated);
}

#[test]
fn conflicting_or_missing_sources_exit_two() {
    let dir = TempDir::new().unwrap();
    let o = p(dir.path());
    assert_eq!(run(&["simulate", "--uniform", "3", "--zipf", "1", "10", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--uniform", "3", "--mode", "independent", "--out", o]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--zipf", "-1", "10", "--out", o]).status.code(), Some(2));
}

fn write_planted_curve(path: &Path, a: f64, b: f64) {
    let mut s = String::from("n,mean,stderr,replicates\n");
    for i in 0..15 {
        let n = (1000.0 * 10f64.powf(i as f64 * 0.2)).round();
        let mean = homonym_core::normal::cdf(a + b * n.ln());
        s.push_str(&format!("{n},{mean},0.001,200\n"));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn extrapolate_recovers_planted_line() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    write_planted_curve(&curve, -3.0, 0.4);
    let o = dir.path().join("fit");
    assert_ok(&run(&[
        "extrapolate",
        "--curve",
        p(&curve),
        "--window",
        "1000:1000000",
        "--targets",
        "1e6,3.2e8",
        "--out",
        p(&o),
    ]));
    let fit = read_json(&o.join("fit.json"));
    assert!((fit["a"].as_f64().unwrap() + 3.0).abs() < 1e-6);
    assert!((fit["b"].as_f64().unwrap() - 0.4).abs() < 1e-6);
    assert_eq!(fit["transform"], "probit");
    let obj = fit.as_object().unwrap();
    for key in ["a", "b", "n_min", "n_max", "r_squared", "transform"] {
        assert!(obj.contains_key(key), "{key}");
    }
    let rows = read_rows(&o.join("predictions.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[1][0], "320000000");
    let pred: f64 = rows[0][1].parse().unwrap();
    assert!((pred - 0.994_235).abs() < 1e-5);
}

#[test]
fn extrapolate_window_outside_grid_exits_two() {
    let dir = TempDir::new().unwrap();
    let curve = dir.path().join("curve.csv");
    write_planted_curve(&curve, -3.0, 0.4);
    let out = run(&["extrapolate", "--curve", p(&curve), "--window", "1e9:1e10", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usable points"));
}

fn write_pairs(path: &Path, table: &[Vec<u64>]) {
    let mut s = String::from("first,last\n");
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            for _ in 0..c {
                s.push_str(&format!("F{i},L{j}\n"));
            }
        }
    }
    fs::write(path, s).unwrap();
}

#[test]
fn independence_product_and_dependent() {
    let dir = TempDir::new().unwrap();
    let product: Vec<Vec<u64>> = [6u64, 4, 3, 1]
        .iter()
        .map(|&a| [5u64, 3, 2].iter().map(|&b| a * b).collect())
        .collect();
    let prod_csv = dir.path().join("product.csv");
    write_pairs(&prod_csv, &product);
    let o = dir.path().join("prod");
    assert_ok(&run(&["independence", "--pairs", p(&prod_csv), "--m", "4", "--out", p(&o)]));
    let chi = read_json(&o.join("chi_square.json"));
    assert!(chi["chi_square"].as_f64().unwrap() <= 1e-9);
    assert_eq!(read_rows(&o.join("residuals.csv")).len(), 12);

    let o = dir.path().join("dep");
    let out = run(&["independence", "--pairs", p(&fixture()), "--m", "20", "--out", p(&o)]);
    assert_ok(&out);
    let chi = read_json(&o.join("chi_square.json"));
    assert_eq!(chi["dof"], 361);
    assert!(chi["p_value"].as_f64().unwrap() < 0.001);
    assert!(String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn independence_clips_large_m_with_warning() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("p.csv");
    write_pairs(&csv_path, &[vec![3, 1], vec![1, 3]]);
    let o = dir.path().join("o");
    let out = run(&["independence", "--pairs", p(&csv_path), "--m", "50", "--out", p(&o)]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(read_json(&o.join("chi_square.json"))["rows"], 2);
}

/// Counts over 10^6 units with the given top-10 and top-100 shares.
fn shaped_counts(top10: f64, top100: f64) -> Vec<u64> {
    let split = |sum: u64, parts: u64| (0..parts).map(move |i| sum / parts + u64::from(i < sum % parts));
    let total = 1_000_000u64;
    let head = (top10 * total as f64).round() as u64;
    let body = (top100 * total as f64).round() as u64 - head;
    let tail = total - head - body;
    let mut c: Vec<u64> = split(head, 10).chain(split(body, 90)).collect();
    let cap = *c.last().unwrap();
    c.extend(split(tail, tail.div_ceil(cap)));
    c
}

#[test]
fn period_report_shares_and_curves() {
    let dir = TempDir::new().unwrap();
    let periods = [
        ("1916-1940", 0.2517, 0.7905, 0.0183, 0.0866),
        ("1941-1965", 0.2050, 0.7261, 0.0176, 0.0841),
        ("1966-1990", 0.1259, 0.5698, 0.0157, 0.0783),
    ];
    let mut args: Vec<String> = vec!["period-report".into()];
    for (name, f10, f100, l10, l100) in periods {
        let first = dir.path().join(format!("first_{name}.csv"));
        let last = dir.path().join(format!("last_{name}.csv"));
        write_freq(&first, &shaped_counts(f10, f100));
        write_freq(&last, &shaped_counts(l10, l100));
        args.push("--first".into());
        args.push(format!("{name}={}", first.display()));
        args.push("--last".into());
        args.push(format!("{name}={}", last.display()));
    }
    let o = dir.path().join("out");
    args.extend(["--grid", "2000:30000:4", "--replicates", "200", "--out", p(&o)].map(String::from));
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_ok(&run(&argv[1..].iter().fold(vec![argv[0]], |mut v, a| {
        v.push(a);
        v
    })));

    let shares = read_rows(&o.join("top_share.csv"));
    assert_eq!(shares.len(), 6);
    for (row, (name, f10, f100, l10, l100)) in shares.chunks(2).zip(periods) {
        assert_eq!(&row[0][0], name);
        assert_eq!(&row[0][1], "first");
        assert!((row[0][4].parse::<f64>().unwrap() - f10).abs() < 1e-12);
        assert!((row[0][5].parse::<f64>().unwrap() - f100).abs() < 1e-12);
        assert!((row[1][4].parse::<f64>().unwrap() - l10).abs() < 1e-12);
        assert!((row[1][5].parse::<f64>().unwrap() - l100).abs() < 1e-12);
    }

    let curves = read_rows(&o.join("period_curves.csv"));
    assert_eq!(curves.len(), 3 * 4);
    let point = |period: usize, i: usize| {
        let r = &curves[period * 4 + i];
        (r[2].parse::<f64>().unwrap(), r[3].parse::<f64>().unwrap())
    };
    // concentration falls from one period to the next, and so does P_n
    for i in 0..4 {
        for period in 0..2 {
            let (m0, s0) = point(period, i);
            let (m1, s1) = point(period + 1, i);
            assert!(m0 > m1 + 3.0 * (s0 * s0 + s1 * s1).sqrt(), "n index {i}: {m0} vs {m1}");
        }
    }
}

#[test]
fn period_report_requires_matching_periods() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("f.csv");
    write_freq(&f, &[5, 3, 1]);
    let out = run(&[
        "period-report",
        "--first",
        &format!("a={}", f.display()),
        "--last",
        &format!("b={}", f.display()),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
