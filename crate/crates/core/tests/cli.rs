use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_extrad"))
}

fn desk_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml")
}

fn desk_text() -> String {
    fs::read_to_string(desk_config()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("scenario.in.toml");
    fs::write(&path, text).unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_accepts_desk_config() {
    let out = exe().arg("check").arg(desk_config()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("24 sources"));
    assert!(stdout.contains("147 control points"));
}

#[test]
fn source_outside_sphere_is_a_config_error() {
    let dir = scratch("outside");
    let text = desk_text().replace("[medium]", "[[source]]\nposition = [0.0, 0.0, 0.95]\n\n[medium]");
    let out = exe().arg("check").arg(write_config(&dir, &text)).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("source[24]"), "{}", stderr(&out));
}

#[test]
fn malformed_number_reports_line() {
    let dir = scratch("malformed");
    let text = desk_text().replace("alpha = 1.0e-3", "alpha = 1.0e-3.5");
    let line = text.lines().position(|l| l.starts_with("alpha")).unwrap() + 1;
    let out = exe().arg("check").arg(write_config(&dir, &text)).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(&format!("line {line}")), "{}", stderr(&out));
}

#[test]
fn unknown_key_and_missing_file_are_config_errors() {
    let dir = scratch("unknown");
    let text = desk_text().replace("[medium]", "[medium]\nviscosity = 1.0");
    let out = exe().arg("check").arg(write_config(&dir, &text)).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("viscosity"));
    let out = exe().arg("check").arg(dir.join("absent.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_method_list_is_a_config_error() {
    for list in ["am,foo", "", "am,,am-rad", "am,am", "AM"] {
        let out = exe().args(["run"]).arg(desk_config()).args(["--methods", list, "--out"]).arg(scratch("badm")).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{list:?}");
    }
}

#[test]
fn bad_numeric_flags_are_config_errors() {
    let out = exe().arg("run").arg(desk_config()).args(["--threads", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = exe().arg("run").arg(desk_config()).args(["--freq-step", "-5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_method_run_writes_expected_files() {
    let dir = scratch("single");
    let out = exe().arg("run").arg(desk_config()).args(["--methods", "am", "--freq-step", "300", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let metrics = fs::read_to_string(dir.join("metrics_am.csv")).unwrap();
    let lines: Vec<&str> = metrics.lines().collect();
    assert_eq!(lines[0], "frequency_hz,mse,p_rad_watt,iterations,final_cost");
    // 100, 400, 700, 1000
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1.000000000000e2,"));
    assert!(!metrics.contains('\r'));
    assert!(!dir.join("metrics_am-rad.csv").exists());
    let field = fs::read_to_string(dir.join("field_am.csv")).unwrap();
    assert!(field.starts_with("x,y,power_db\n"));
    assert_eq!(field.lines().count(), 1 + 101 * 101);
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("am"));
    assert!(dir.join("scenario.toml").exists());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let a = scratch("threads1");
    let b = scratch("threads3");
    for (dir, threads) in [(&a, "1"), (&b, "3")] {
        let out = exe()
            .arg("run")
            .arg(desk_config())
            .args(["--freq-step", "300", "--threads", threads, "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    for method in ["am", "am-rad", "am-rad-dir"] {
        for stem in ["metrics", "field"] {
            let name = format!("{stem}_{method}.csv");
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn singular_system_is_a_numerical_failure() {
    let dir = scratch("singular");
    let text = desk_text()
        .replace("[medium]", "[[source]]\nposition = [0.0, 0.9, 0.5]\n\n[[source]]\nposition = [0.0, 0.9, 0.5]\n\n[medium]")
        .replace("alpha = 1.0e-3", "alpha = 1.0e-300")
        .replace("radius = 0.8", "radius = 1.2");
    let config = write_config(&dir, &text);
    let out = exe().arg("check").arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = exe().arg("run").arg(&config).args(["--methods", "am", "--freq-step", "300", "--out"]).arg(dir.join("out")).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("numerical failure"));
}
