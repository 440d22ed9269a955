//! End-to-end runs of the `calderon-lab` binary: output format, hashing,
//! artifacts and exit codes.

use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use calderon_core::mesh::{make_sphere_mesh, Domain, Mesh};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calderon-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn hash_line(csv: &str) -> &str {
    csv.lines().next().expect("non-empty output")
}

#[test]
fn csv_is_reproducible_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["basis-norms", "--levels", "1,2", "--format", "none", "--csv"];
    for p in [&a, &b] {
        let o = lab(&[&args[..], &[p.to_str().unwrap()]].concat());
        assert_eq!(o.status.code(), Some(0));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb, "identical configurations give identical bytes");
    let text = String::from_utf8(ta).unwrap();
    let header = hash_line(&text);
    assert!(header.starts_with("# config-hash: "), "{header}");
    assert_eq!(header.len(), "# config-hash: ".len() + 16);

    let other = lab(&["basis-norms", "--levels", "1,2", "--quad-degraded", "--format", "csv"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(hash_line(&stdout(&other)), header, "a different configuration changes the hash");
}

#[test]
fn markdown_has_rate_rows() {
    let o = lab(&["basis-norms", "--levels", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let md = stdout(&o);
    assert!(md.contains("| ooc"), "{md}");
    assert!(md.contains("| eoc"), "{md}");
    // aligned: every table line of the first table has the same width
    let widths: Vec<usize> =
        md.lines().filter(|l| l.starts_with('|')).map(|l| l.chars().count()).collect();
    assert!(widths.windows(2).all(|w| w[0] == w[1]), "{md}");
}

#[test]
fn single_level_reports_no_rate() {
    let o = lab(&["basis-norms", "--levels", "2", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let ooc = csv.lines().find(|l| l.starts_with("ooc")).expect("ooc row");
    assert!(ooc.contains("n/a"), "{ooc}");
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sphere levels\nlevels = 1,2\nquad_singular = 3\n").unwrap();
    let from_file = lab(&["basis-norms", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let from_flags = lab(&["basis-norms", "--levels", "1,2", "--quad-singular", "3", "--format", "csv"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), stdout(&from_flags));
    let overridden = lab(&["basis-norms", "--config", cfg.to_str().unwrap(), "--levels", "1", "--format", "csv"]);
    assert_eq!(stdout(&overridden).lines().filter(|l| l.starts_with("32,")).count(), 1);
}

#[test]
fn infrastructure_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(lab(&["basis-norms", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(lab(&["basis-norms", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
    assert_eq!(lab(&["basis-norms", "--levels", "1,x"]).status.code(), Some(2));
    assert_eq!(lab(&["spectrum", "--solution", "m3", "--target", "E"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_calderon-lab"))
        .args(["basis-norms", "--levels", "1"])
        .env("CALDERON_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_calderon-lab"))
            .args(["basis-norms", "--levels", "1,2", "--format", "csv"])
            .env("CALDERON_THREADS", n)
            .output()
            .unwrap()
    };
    let (one, two) = (run("1"), run("2"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn hypersingular_fault_e_is_detected_by_both_tests() {
    let o = lab(&["inject", "--solution", "2", "--target", "W", "--fault", "E", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1), "a Fail verdict sets exit code 1");
    let csv = stdout(&o);
    assert!(csv.lines().any(|l| l == "fail,fail,yes"), "{csv}");
}

#[test]
fn halved_single_layer_diagonal_has_negative_eigenvalues() {
    let o = lab(&["spectrum", "--solution", "2", "--target", "V", "--fault", "B", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    let faulted_min: f64 = csv
        .lines()
        .find(|l| l.starts_with("0,"))
        .and_then(|l| l.split(',').nth(2))
        .unwrap()
        .parse()
        .unwrap();
    assert!(faulted_min < 0.0, "{csv}");
    assert!(csv.contains("# faulted:") && csv.contains("CG did not converge"), "{csv}");
}

#[test]
fn mesh_is_exported_as_off() {
    let dir = tempfile::tempdir().unwrap();
    let pattern = dir.path().join("sphere{level}.off");
    let o = lab(&["basis-norms", "--levels", "1,2", "--format", "none", "--mesh-out", pattern.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for level in [1, 2] {
        let path = dir.path().join(format!("sphere{level}.off"));
        let read = Mesh::read_off(BufReader::new(std::fs::File::open(&path).unwrap()), Domain::Sphere).unwrap();
        let built = make_sphere_mesh(level);
        assert_eq!(read.panels(), built.panels());
        assert_eq!(read.vertices(), built.vertices());
    }
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn matrix_dump_is_square_and_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let o = lab(&["basis-norms", "--levels", "1", "--format", "none", "--dump-matrix", "V", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = read_matrix(&path);
    assert_eq!(v.len(), 32);
    for (i, row) in v.iter().enumerate() {
        assert_eq!(row.len(), 32);
        for (j, x) in row.iter().enumerate() {
            approx::assert_relative_eq!(*x, v[j][i], max_relative = 1e-10);
        }
    }
}
