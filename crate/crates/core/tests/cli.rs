use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use igr::cases::CASE_NAMES;

fn igr(args: &[&str], cwd: &Path, out_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_igr"));
    cmd.args(args).current_dir(cwd).env_remove("IGR_OUTPUT_DIR");
    if let Some(dir) = out_dir {
        cmd.env("IGR_OUTPUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SOD: &str = "case = sod\nm = 64\n[output]\nsnapshot_times = 0.1\nseries_stride = 10\n";

/// Every number is written as `d.dddddddddddddddde[+-]x`.
fn assert_full_precision(csv: &str) {
    for line in csv.lines().skip(1) {
        for v in line.split(',') {
            let mantissa = v.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.len(), 18, "{v}");
            v.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn version_and_case_listing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = igr(&["--version"], tmp.path(), None);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("igr {}", env!("CARGO_PKG_VERSION")));
    let out = igr(&["cases"], tmp.path(), None);
    assert!(out.status.success());
    let listed: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(str::to_string).collect();
    assert_eq!(listed, CASE_NAMES);
}

#[test]
fn run_writes_snapshots_series_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sod.cfg", SOD);
    let dir = tmp.path().join("out");
    let out = igr(&["run", &cfg], tmp.path(), Some(&dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["snapshot_t0.100000.csv", "snapshot_t0.200000.csv", "series.csv", "report.txt"] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    let csv = fs::read_to_string(dir.join("snapshot_t0.200000.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,rho,u,p,E,sigma"));
    assert_eq!(csv.lines().count(), 65);
    assert_full_precision(&csv);
    let report = fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("steps"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sod.cfg", SOD);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(igr(&["run", &cfg], tmp.path(), Some(&a)).status.success());
    assert!(igr(&["run", &cfg], tmp.path(), Some(&b)).status.success());
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn two_dimensional_snapshot_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "r2d.cfg", "case = riemann2d\nm = 16\nt_final = 0.02\n");
    let dir = tmp.path().join("out");
    let out = igr(&["run", &cfg], tmp.path(), Some(&dir));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("snapshot_t0.020000.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,y,rho,u,v,p,E,sigma"));
    assert_eq!(csv.lines().count(), 16 * 16 + 1);
    assert_full_precision(&csv);
}

#[test]
fn output_dir_from_config_when_env_unset() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sod.cfg", "case = sod\nm = 32\n[output]\ndir = results\n");
    assert!(igr(&["run", &cfg], tmp.path(), None).status.success());
    assert!(tmp.path().join("results/snapshot_t0.200000.csv").exists());
}

#[test]
fn overrides_apply_after_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sod.cfg", "case = sod\nm = 64\n");
    let dir = tmp.path().join("out");
    let out = igr(&["run", &cfg, "--override", "m=40", "--override", "scheme.flux=hllc"], tmp.path(), Some(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("snapshot_t0.200000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn config_errors_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_key = write_config(tmp.path(), "a.cfg", "case = sod\nresolution = 64\n");
    let out = igr(&["run", &bad_key], tmp.path(), Some(&tmp.path().join("o")));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let wrong_section = write_config(tmp.path(), "b.cfg", "case = sod\n[output]\ncfl = 0.5\n");
    assert_eq!(igr(&["run", &wrong_section], tmp.path(), None).status.code(), Some(1));
    let bad_combo = write_config(tmp.path(), "c.cfg", "case = sod\nscheme = igr\nrecon = weno5_component\n");
    assert_eq!(igr(&["run", &bad_combo], tmp.path(), None).status.code(), Some(1));
    let good = write_config(tmp.path(), "d.cfg", "case = sod\n");
    assert_eq!(igr(&["run", &good, "--override", "nonsense=1"], tmp.path(), None).status.code(), Some(1));
    assert_eq!(igr(&["run", "missing.cfg"], tmp.path(), None).status.code(), Some(1));
    assert_eq!(igr(&["study", &good], tmp.path(), None).status.code(), Some(1));
}

#[test]
fn blow_up_exits_with_two_and_reports_the_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "leblanc.cfg", "case = leblanc\nm = 450\nscheme = weno5\n");
    let dir = tmp.path().join("out");
    let out = igr(&["run", &cfg], tmp.path(), Some(&dir));
    assert_eq!(out.status.code(), Some(2));
    let report = fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("non-physical"), "{report}");
}

#[test]
fn study_writes_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "study.cfg",
        "case = convergence_sine\nalpha_factor = 1\n[study]\nregime = joint\nresolutions = 32, 64, 128\ntimes = 0.1\nref_factor = 2\n",
    );
    let dir = tmp.path().join("out");
    let out = igr(&["study", &cfg], tmp.path(), Some(&dir));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("study.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("time,m,h,alpha,err_rho,err_mu,err_E,err_sum,order"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let cfg = igr::config::parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        cfg.validate().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 8);
}
