use cgrand::cli::{main_with_args, CSV_HEADER, EXIT_OK, EXIT_USAGE};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cgrand").chain(args.iter().copied());
    let code = main_with_args(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn run_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let p = path.to_str().unwrap();
    let args = [
        "run",
        "--code",
        "ebch8",
        "--snr",
        "4:4:1",
        "--frames",
        "100",
        "--budget",
        "100",
        "--constraints",
        "0",
        "--seed",
        "1",
        "--out",
        p,
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let first = std::fs::read(&path).unwrap();
    let (code, _, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(std::fs::read(&path).unwrap(), first);

    let text = String::from_utf8(first).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER.join(","));
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row.len(), CSV_HEADER.len());
    assert_eq!(row[1], "100");
    assert_eq!(&row[7..], ["0", "100", "100", "1"]);
}

#[test]
fn run_sweep_has_one_row_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let (code, _, err) = run(&[
        "run",
        "--code",
        "ebch8",
        "--snr",
        "1:3:0.5",
        "--frames",
        "50",
        "--budget",
        "64",
        "--constraints",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let snrs: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(snrs, ["1.00", "1.50", "2.00", "2.50", "3.00"]);
}

#[test]
fn too_many_constraints_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let (code, _, err) = run(&[
        "run",
        "--code",
        "ebch8",
        "--snr",
        "4:4:1",
        "--frames",
        "10",
        "--budget",
        "10",
        "--constraints",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains('2') || err.contains("achievable"), "{err}");
    assert!(!path.exists());
}

#[test]
fn malformed_arguments_are_usage_errors() {
    assert_eq!(run(&["run", "--code", "ebch8"]).0, EXIT_USAGE);
    assert_eq!(run(&["analyze", "--code", "nope"]).0, EXIT_USAGE);
    assert_eq!(run(&["verify", "--n", "30", "--p", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
}

#[test]
fn analyze_ebch128() {
    let (code, out, err) = run(&["analyze", "--code", "ebch128"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("(n=128, k=106)"), "{out}");
    assert!(out.contains("all-one row in row space of H: yes"));
    assert!(out.contains("constraints: 2"));
    assert_eq!(out.matches("  weight: 64").count(), 2);
    assert!(out.contains("unconstrained positions: 0"));
}

#[test]
fn analyze_parity_check_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.txt");
    std::fs::write(&path, "8 6\n11110110\n01010010\n").unwrap();
    let spec = format!("file:{}", path.display());
    let (code, out, err) = run(&["analyze", "--code", &spec]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("set: {1,3,6}"), "{out}");
    assert!(out.contains("set: {2,4,7}"), "{out}");
    assert!(out.contains("interval: [3, 5]"), "{out}");
    assert!(out.contains("interval: [6, 8]"), "{out}");
}

#[test]
fn verify_counts() {
    let (code, out, _) = run(&["verify", "--n", "10", "--p", "0"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("count 1024 expected 1024"));
    assert!(out.trim_end().ends_with("PASS"));

    let (code, out, _) = run(&["verify", "--n", "12", "--p", "3", "--trials", "5", "--seed", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.matches("count 512 expected 512 pass").count(), 5);
}
