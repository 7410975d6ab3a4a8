use semsans_cli::{parse_config, Table};
use semsans_core::textures::{checkerboard_fields_with_cap, solve_checkerboard_fields};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn semsans(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semsans"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_value(o: &Output, key: &str) -> String {
    let text = String::from_utf8_lossy(&o.stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")).map(str::to_string))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

const PAIR: &str = "[neutron]\nwavelength = 1 nm\n[pair]\nb1 = 103.85 mT\nb2 = 150 mT\n";

#[test]
fn shipped_checkerboard_config_parses_and_solves() {
    let text = std::fs::read_to_string(repo_file("examples/checkerboard.cfg")).unwrap();
    let cfg = parse_config(&text).unwrap();
    let board = cfg.checkerboard.unwrap();
    assert_eq!(board.distances, [1.3, 0.9, 0.7, 0.3]);

    let dir = tempfile::tempdir().unwrap();
    let cfg_path = repo_file("examples/checkerboard.cfg");
    let o = semsans(&["solve-fields", cfg_path.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = Table::from_csv(&std::fs::read_to_string(dir.path().join("solve-fields.csv")).unwrap()).unwrap();
    let fields = table.column("field").unwrap();
    let expected = checkerboard_fields_with_cap(0.15, board.distances).unwrap();
    assert_eq!(fields, expected.to_vec());
    let [b2, b3, b4] = solve_checkerboard_fields(expected[0], board.distances).unwrap();
    for (got, want) in fields[1..].iter().zip([b2, b3, b4]) {
        assert!((got - want).abs() <= 1e-15, "{got} {want}");
    }
    assert_eq!(fields.iter().cloned().fold(0.0, f64::max), 0.15);
}

#[test]
fn missing_unit_exits_with_parse_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[neutron]\nwavelength = 1 nm\n[pair]\nB1 = 150\nb2 = 150 mT\n");
    let o = semsans(&["focus", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("4:") && err.contains("unit"), "{err}");
}

#[test]
fn exit_statuses_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    let cfg = write_config(d, "[neutron]\nwavelength = -1 nm\n");
    assert_eq!(semsans(&["refract", cfg.to_str().unwrap()], d).status.code(), Some(3));

    // Equal fields have no focus.
    let cfg = write_config(d, "[neutron]\nwavelength = 1 nm\n[pair]\nb1 = 0.1 T\nb2 = 0.1 T\n");
    assert_eq!(semsans(&["focus", cfg.to_str().unwrap()], d).status.code(), Some(4));

    // Entry height outside the prism face.
    let cfg = write_config(d, &format!("{PAIR}[detector]\nz = 2 m\n").replace("wavelength = 1 nm", "wavelength = 1 nm\ny0 = 5 cm"));
    assert_eq!(semsans(&["trace", cfg.to_str().unwrap()], d).status.code(), Some(4));

    let missing = d.join("nope.cfg");
    assert_eq!(semsans(&["trace", missing.to_str().unwrap()], d).status.code(), Some(5));

    let cfg = write_config(d, PAIR);
    let blocked = d.join("file");
    std::fs::write(&blocked, "").unwrap();
    assert_eq!(semsans(&["focus", cfg.to_str().unwrap()], &blocked).status.code(), Some(5));

    assert_eq!(semsans(&["validate", "--config", cfg.to_str().unwrap()], d).status.code(), Some(0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{PAIR}[texture]\ngrid = 24\n"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for cmd in ["refract", "trace", "focus", "phase", "fringe", "texture", "validate"] {
        for out in [&a, &b] {
            let o = semsans(&[cmd, cfg.to_str().unwrap()], out);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 21);
    for name in names {
        let x = std::fs::read(a.join(&name)).unwrap();
        let y = std::fs::read(b.join(&name)).unwrap();
        assert_eq!(x, y, "{name:?} differs");
        assert!(!x.contains(&b'\r'));
    }
}

#[test]
fn every_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{PAIR}[texture]\ngrid = 16\n[phase]\nsamples = 11\n"));
    let board = repo_file("examples/checkerboard.cfg");
    let runs = [
        ("refract", &cfg),
        ("trace", &cfg),
        ("focus", &cfg),
        ("phase", &cfg),
        ("fringe", &cfg),
        ("texture", &cfg),
        ("validate", &cfg),
        ("solve-fields", &board),
        ("oam", &board),
    ];
    for (cmd, path) in runs {
        let o = semsans(&[cmd, path.to_str().unwrap(), "--grid", "16"], dir.path());
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(dir.path().join(format!("{cmd}.csv"))).unwrap();
        let table = Table::from_csv(&text).unwrap();
        assert_eq!(table.meta["command"], cmd);
        assert_eq!(table.to_csv(), text, "{cmd}");
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{cmd}.meta.json"))).unwrap()).unwrap();
        assert_eq!(meta["rows"].as_u64().unwrap() as usize, table.rows.len());
        assert!(dir.path().join(format!("{cmd}.gp")).exists());
    }
}

#[test]
fn zero_gradient_texture_is_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[neutron]\nwavelength = 1 nm\nspin_theta = 60 deg\nspin_phi = 30 deg\n[pair]\nb1 = 0.1 T\nb2 = 0.1 T\n");
    let o = semsans(&["texture", cfg.to_str().unwrap(), "--grid", "12"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = Table::from_csv(&std::fs::read_to_string(dir.path().join("texture.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 144);
    let (t, p) = (60f64.to_radians(), 30f64.to_radians());
    let expected = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
    for row in &table.rows {
        for i in 0..3 {
            assert!((row[2 + i] - expected[i]).abs() <= 1e-15, "{row:?}");
        }
    }
}

#[test]
fn fringe_on_the_focusing_plane_has_full_visibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("examples/single_pair.cfg");
    let o = semsans(&["fringe", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_value(&o, "visibility"), "1.000000");

    let off = write_config(
        dir.path(),
        &std::fs::read_to_string(&cfg).unwrap().replace("offset = 0 mm", "offset = 2 cm"),
    );
    let o = semsans(&["fringe", off.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let v: f64 = stdout_value(&o, "visibility").parse().unwrap();
    assert!(v < 0.5, "{v}");
}

#[test]
fn grid_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let board = repo_file("examples/checkerboard.cfg");
    let o = semsans(&["oam", board.to_str().unwrap(), "--grid", "10", "--cells", "2", "--subtract-carrier"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_value(&o, "grid"), "10x10");
    assert_eq!(stdout_value(&o, "carrier_subtracted"), "true");
    let table = Table::from_csv(&std::fs::read_to_string(dir.path().join("oam.csv")).unwrap()).unwrap();
    let kappa: f64 = stdout_value(&o, "kappa_x_per_m").parse().unwrap();
    let x_max = table.column("x").unwrap().into_iter().fold(f64::MIN, f64::max);
    assert!((x_max * kappa / (2.0 * std::f64::consts::PI) - 1.0).abs() < 1e-6);

    let o = semsans(&["oam", board.to_str().unwrap(), "--grid", "1"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}
