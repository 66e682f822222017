use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_topophase");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn yield_rows() {
    assert_eq!(stdout(&["yield", "--rho", "0.99", "--n", "50"]), "rho,n,yield\n0.990000,50,0.605006\n");
    assert!(stdout(&["yield", "--rho", "1", "--n", "50"]).ends_with(",1.000000\n"));
    assert!(stdout(&["yield", "--rho", "0.9999", "--n", "50"]).ends_with(",0.995012\n"));
}

#[test]
fn mebs_worked_example() {
    let out = stdout(&[
        "mebs",
        "--c",
        "0.7,0.5,0.99,0.4",
        "--set",
        "cost_constants.c_switch_0=100",
        "--set",
        "cost_constants.labor_baseline=1000",
        "--set",
        "cost_constants.supervision_baseline=200",
        "--set",
        "product.facility_fixed=5000",
        "--set",
        "product.equipment_fixed=2000",
        "--set",
        "product.n_star_rule=5000",
    ]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let m: f64 = row[0].parse().unwrap();
    assert!((m - 1851.0).abs() <= 0.5, "{m}");
    assert_eq!(row[2], "Distributed");
    assert_eq!(row[6], "25.000000");
}

#[test]
fn mebs_with_zero_fixed_costs() {
    let out = stdout(&[
        "mebs",
        "--c",
        "1,1,1,1",
        "--set",
        "product.facility_fixed=0",
        "--set",
        "product.equipment_fixed=0",
    ]);
    assert!(out.lines().nth(1).unwrap().starts_with("0.000000,"));
    assert!(out.contains("Distributed"));
}

#[test]
fn select_site_and_rank_csv() {
    let classic = stdout(&["--config", "ab-sites", "select-site", "--c", "0.9,0.9,0.9,0.9"]);
    assert!(classic.lines().nth(1).unwrap().starts_with("1,B,"));
    let mca = stdout(&["--config", "mca-demo", "select-site", "--c", "1,1,1,1", "--mode", "mca"]);
    assert!(mca.lines().nth(1).unwrap().starts_with("1,arid,"));
    let rank = stdout(&["--config", "mca-demo", "mca-rank"]);
    assert!(rank.starts_with("rank,region_id,phi,humidity,dust,thermal_cycling,irradiance,precipitation_days\n"));
    assert!(rank.lines().nth(1).unwrap().starts_with("1,arid,"));
}

#[test]
fn allocate_writes_csv_to_out() {
    let dir = std::env::temp_dir().join(format!("topophase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("alloc.csv");
    let out = run(&["--config", "two-metro", "allocate", "--c", "1,1,1,1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("facilities=2"));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("region_id,is_facility,volume,assigned_to,distance_km\n"));
    assert!(csv.contains("metro-b,true,10000.000000,metro-b,0.000000\n"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sweep_reports_critical_points_on_stderr() {
    let out = run(&["--config", "two-metro", "sweep", "--steps", "11", "--method", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("t,kind,magnitude\n"));
    for kind in ["MciJump", "SigmaN", "SigmaW", "SigmaH"] {
        assert!(stderr.contains(kind), "{stderr}");
    }
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("t,mci,phase,facilities\n0.000000,1.000000,PhaseI,1\n"));
}

#[test]
fn phase_diagram_grid() {
    let csv = stdout(&["phase-diagram", "--rows", "3", "--cols", "4"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "a,gamma,phase,mci");
    assert_eq!(lines.len(), 13);
    assert!(lines[1].starts_with("0.000000,0.000000,PhaseI,"));
    assert!(lines[12].starts_with("1.000000,1.000000,PhaseIII,"));
}

#[test]
fn config_dump_reloads() {
    let dumped = stdout(&["--config", "two-metro", "--set", "world.transport_rate=0.02", "config"]);
    let dir = std::env::temp_dir().join(format!("topophase-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("resolved.json");
    std::fs::write(&path, &dumped).unwrap();
    assert_eq!(stdout(&["--config", path.to_str().unwrap(), "config"]), dumped);
    assert!(dumped.contains("\"transport_rate\": 0.02"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), 4);
    assert_eq!(code(&["yield", "--rho", "1.5"]), 4);
    assert_eq!(code(&["yield", "--rho", "0.9", "--n", "0"]), 4);
    assert_eq!(code(&["mebs", "--c", "0.5,0.5"]), 4);
    assert_eq!(code(&["validate", "--set", "noequals"]), 4);
    assert_eq!(code(&["sweep", "--steps", "1"]), 4);

    assert_eq!(code(&["--config", "/nonexistent/world.json", "validate"]), 2);
    assert_eq!(code(&["validate", "--set", "world.transport_rate=-1"]), 2);
    assert_eq!(code(&["validate", "--set", "world.no_such_key=1"]), 2);
    assert_eq!(code(&["validate", "--set", "product.price=5"]), 2);
    assert_eq!(code(&["--preset", "textiles", "mebs"]), 2);

    // the batch floor at zero capability exceeds all demand
    assert_eq!(code(&["--config", "two-metro", "allocate", "--c", "0,0,0,0", "--set", "product.facility_fixed=90000"]), 3);
}

#[test]
fn validation_lists_every_issue() {
    let out = run(&[
        "validate",
        "--set",
        "world.regions.1.id=metro-a",
        "--set",
        "world.regions.0.environment.humidity=140",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("id"), "{err}");
    assert!(err.contains("humidity"), "{err}");
}

#[test]
fn oracle_check_is_seeded() {
    let a = run(&["oracle-check", "--count", "10", "--seed", "3"]);
    let b = run(&["oracle-check", "--count", "10", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8(a.stdout).unwrap().lines().count(), 11);
}
