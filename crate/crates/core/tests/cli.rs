use std::path::Path;
use std::process::{Command, Output};

use risleo::output::read_coverage;

fn risleo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risleo"))
        .args(args)
        .output()
        .expect("spawn risleo")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn records(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn coverage_writes_one_map_per_elevation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = risleo(&[
        "coverage",
        "--out",
        out.to_str().unwrap(),
        "--elevations",
        "30,45,60",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for el in ["30", "45", "60"] {
        let path = out.join(format!("coverage_el{el}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x_m,y_m,snr_db,blocked\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_coverage(&path).unwrap().len(), 50 * 100);
    }
    let sidecar = std::fs::read_to_string(out.join("coverage.config.toml")).unwrap();
    assert!(sidecar.contains("elevations_deg = [30.0, 45.0, 60.0]"));
    assert!(sidecar.contains("radiation_exponent = 2.0"));
}

#[test]
fn blocked_cells_have_empty_snr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[panel]\nlength_y = 0.5\nlength_z = 0.3\n[grid]\nspacing = 2.0\nx_min = -10.0\n",
    );
    let out = dir.path().join("out");
    let o = risleo(&[
        "coverage",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--elevations",
        "45",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = records(&out.join("coverage_el45.csv"));
    assert!(!rows.is_empty());
    for r in rows {
        let x: f64 = r[0].parse().unwrap();
        if x < 0.0 {
            assert_eq!((r[2].as_str(), r[3].as_str()), ("", "1"));
        } else {
            assert!(r[2].parse::<f64>().is_ok());
            assert_eq!(r[3], "0");
        }
    }
}

#[test]
fn config_errors_name_the_key_and_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cases = [
        ("[grid]\nspacing = 0.0\n", "grid.spacing"),
        ("[panel]\nlenght_y = 2.0\n", "panel.lenght_y"),
        ("[link]\ntx_power_dbw = \"high\"\n", "link.tx_power_dbw"),
        (
            "[sweep]\nelevations_deg = [45.0, 95.0]\n",
            "sweep.elevations_deg[1]",
        ),
    ];
    for (text, key) in cases {
        let cfg = write_config(dir.path(), text);
        let o = risleo(&["coverage", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{text}");
        assert!(stderr(&o).contains(key), "{text}: {}", stderr(&o));
    }
    let o = risleo(&[
        "blockage-table",
        "--preset",
        "oneweb",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("constellation.preset"));
}

#[test]
fn io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = risleo(&[
        "blockage-table",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = risleo(&[
        "coverage",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tilt_sweep_rows_and_zero_tilt_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[sweep]\nusers = [[5.5, 0.5], [25.5, -10.5], [45.5, 20.5]]\n",
    );
    let out = dir.path().join("out");
    let o = risleo(&[
        "tilt-sweep",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--elevations",
        "45",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tilt = records(&out.join("tilt_sweep_el45.csv"));
    assert_eq!(tilt.len(), 3 * 61);
    for id in 0..3 {
        assert_eq!(tilt.iter().filter(|r| r[1] == id.to_string()).count(), 61);
    }

    let o = risleo(&[
        "coverage",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--elevations",
        "45",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let cov = records(&out.join("coverage_el45.csv"));
    for r in tilt.iter().filter(|r| r[0] == "0") {
        let cell = cov
            .iter()
            .find(|c| c[0] == r[2] && c[1] == r[3])
            .expect("user sits on a cell center");
        assert_eq!(cell[2], r[4]);
    }
}

#[test]
fn double_ris_has_four_links_per_position() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = risleo(&["double-ris", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for el in ["35", "45", "55", "65"] {
        let rows = records(&out.join(format!("double_ris_el{el}.csv")));
        assert_eq!(rows.len(), 4 * 50);
        for chunk in rows.chunks(4) {
            let links: Vec<_> = chunk.iter().map(|r| r[1].as_str()).collect();
            assert_eq!(links, ["los1", "los2", "ris1", "ris2"]);
            assert!(chunk.iter().all(|r| r[0] == chunk[0][0]));
            assert!(chunk[2..].iter().any(|r| r[3] == "0" && !r[2].is_empty()));
        }
    }
}

#[test]
fn blockage_table_preset_and_custom_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = risleo(&["blockage-table", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("80.5"));
    assert!(stdout.contains("69.1"));
    let rows = records(&out.join("blockage_table.csv"));
    assert_eq!(rows.len(), 6 * 3);
    let custom: Vec<_> = rows.iter().filter(|r| r[0] == "custom").collect();
    assert_eq!(custom.len(), 3);
    assert!(custom.iter().all(|r| r[1] == "1300" && r[7] == "5"));

    let o = risleo(&[
        "blockage-table",
        "--preset",
        "starlink-1-3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = records(&out.join("blockage_table.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "starlink-1-3" && r[2] == "58"));

    let sidecar = out.join("blockage-table.config.toml");
    let again = dir.path().join("again");
    let o = risleo(&[
        "blockage-table",
        "--config",
        sidecar.to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(out.join("blockage_table.csv")).unwrap(),
        std::fs::read(again.join("blockage_table.csv")).unwrap()
    );
}

#[test]
fn validate_passes_and_seed_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = risleo(&["validate", "--seed", "11", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().count() >= 9);
    assert!(stdout.lines().all(|l| l.starts_with("PASS ")));
    let sidecar = std::fs::read_to_string(out.join("validate.config.toml")).unwrap();
    assert!(sidecar.contains("seed = 11"));
}

#[test]
fn help_exits_zero_and_bad_usage_exits_one() {
    assert_eq!(risleo(&["--help"]).status.code(), Some(0));
    assert_eq!(risleo(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        risleo(&["coverage", "--workers", "many"]).status.code(),
        Some(1)
    );
}
