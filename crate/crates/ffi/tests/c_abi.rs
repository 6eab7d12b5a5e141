use std::ffi::CStr;
use std::ptr;

use aglab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(aglab_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(aglab_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn error_bound_values() {
    let mut out = f64::NAN;
    unsafe {
        assert_eq!(aglab_error_bound(0.0, 0.3, 1.0, 0.5, &mut out), AglabStatus::Ok);
        assert_eq!(out, 0.0);
        assert_eq!(aglab_error_bound(0.05, 0.5, 1.0, 0.9, &mut out), AglabStatus::Ok);
        assert!((out - 1.6).abs() < 1e-12);
        assert_eq!(aglab_error_bound(0.0, 0.5, 0.0, 0.3, &mut out), AglabStatus::Ok);
        assert!((out - 0.6).abs() < 1e-12);
    }
    assert_eq!(last_error(), "");
}

#[test]
fn vacuous_bound_sets_message() {
    let mut out = -1.0;
    let status = unsafe { aglab_error_bound(0.1, 0.0, 1.0, 0.0, &mut out) };
    assert_eq!(status, AglabStatus::VacuousBound);
    assert_eq!(out, -1.0, "out must be untouched on failure");
    assert!(last_error().contains("vacuous"), "{}", last_error());
}

#[test]
fn null_out_pointers() {
    unsafe {
        assert_eq!(aglab_error_bound(0.0, 1.0, 1.0, 0.0, ptr::null_mut()), AglabStatus::NullPointer);
        let p = [0.5, 0.5];
        assert_eq!(aglab_tv_distance(p.as_ptr(), ptr::null(), 2, &mut 0.0), AglabStatus::NullPointer);
        assert_eq!(aglab_graph_node_count(ptr::null(), &mut 0), AglabStatus::NullPointer);
        aglab_graph_free(ptr::null_mut());
    }
}

#[test]
fn tv_distance_values() {
    let (p, q) = ([0.7, 0.3], [0.5, 0.5]);
    let mut out = 0.0;
    unsafe {
        assert_eq!(aglab_tv_distance(p.as_ptr(), q.as_ptr(), 2, &mut out), AglabStatus::Ok);
        assert!((out - 0.2).abs() < 1e-15);
        let (a, b) = ([1.0, 0.0], [0.0, 1.0]);
        assert_eq!(aglab_tv_distance(a.as_ptr(), b.as_ptr(), 2, &mut out), AglabStatus::Ok);
        assert_eq!(out, 1.0);
        let bad = [0.7, 0.7];
        assert_eq!(aglab_tv_distance(bad.as_ptr(), q.as_ptr(), 2, &mut out), AglabStatus::InvalidArgument);
    }
}

#[test]
fn replication_beta_values() {
    let mut out = 0.0;
    unsafe {
        assert_eq!(aglab_replication_beta(50_000, 1_000_000, 10, &mut out), AglabStatus::Ok);
        assert!((out - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(aglab_replication_beta(7, 7, 1, &mut out), AglabStatus::Ok);
        assert_eq!(out, 0.5);
        assert_eq!(aglab_replication_beta(7, 7, 0, &mut out), AglabStatus::InvalidArgument);
    }
}

struct Handle(*mut AglabGraph);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { aglab_graph_free(self.0) }
    }
}

fn disk_graph(xy: &[f64], radius: f64) -> Handle {
    let mut g = ptr::null_mut();
    let status = unsafe { aglab_graph_from_points(xy.as_ptr(), xy.len() / 2, radius, 0.05, &mut g) };
    assert_eq!(status, AglabStatus::Ok, "{}", last_error());
    assert!(!g.is_null());
    Handle(g)
}

#[test]
fn two_far_points_give_two_components() {
    let g = disk_graph(&[-1.0, 0.0, 1.0, 0.0], 0.3);
    let (mut nodes, mut comps) = (0, 0);
    unsafe {
        assert_eq!(aglab_graph_node_count(g.0, &mut nodes), AglabStatus::Ok);
        assert_eq!(aglab_graph_component_count(g.0, &mut comps), AglabStatus::Ok);
    }
    assert!(nodes > 20);
    assert_eq!(comps, 2);

    let mut values = vec![f64::NAN; 4];
    let mut written = 0;
    unsafe {
        assert_eq!(aglab_graph_eigenvalues(g.0, values.as_mut_ptr(), 4, &mut written), AglabStatus::Ok);
    }
    assert_eq!(written, 4);
    assert!(values[0].abs() < 1e-8 && values[1].abs() < 1e-8, "{values:?}");
    assert!(values[2] > 1e-6);
    assert!(values.windows(2).all(|w| w[0] <= w[1]));

    let mut lambda3 = 0.0;
    unsafe {
        assert_eq!(aglab_graph_lambda(g.0, 3, &mut lambda3), AglabStatus::Ok);
    }
    assert_eq!(lambda3, values[2]);
    let mut gap = 1.0;
    unsafe {
        assert_eq!(aglab_graph_spectral_gap(g.0, &mut gap), AglabStatus::Ok);
    }
    assert!(gap.abs() < 1e-8);
}

#[test]
fn lambda_index_out_of_range() {
    let g = disk_graph(&[0.0, 0.0], 0.2);
    let mut nodes = 0;
    let mut out = 0.0;
    unsafe {
        aglab_graph_node_count(g.0, &mut nodes);
        assert_eq!(aglab_graph_lambda(g.0, 0, &mut out), AglabStatus::OutOfRange);
        assert_eq!(aglab_graph_lambda(g.0, nodes + 1, &mut out), AglabStatus::OutOfRange);
        assert_eq!(aglab_graph_lambda(g.0, nodes, &mut out), AglabStatus::Ok);
    }
    assert!(out <= 2.0 + 1e-8);
}

#[test]
fn eigenvalue_capacity_larger_than_graph() {
    let g = disk_graph(&[0.0, 0.0], 0.1);
    let mut nodes = 0;
    unsafe { aglab_graph_node_count(g.0, &mut nodes) };
    let mut values = vec![f64::NAN; nodes + 10];
    let mut written = 0;
    unsafe {
        assert_eq!(aglab_graph_eigenvalues(g.0, values.as_mut_ptr(), values.len(), &mut written), AglabStatus::Ok);
    }
    assert_eq!(written, nodes);
    assert!(values[nodes..].iter().all(|v| v.is_nan()));
}

#[test]
fn threshold_graph_path() {
    let xy = [0.0, 0.0, 0.03, 0.0, 0.06, 0.0];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(aglab_graph_threshold(xy.as_ptr(), 3, 0.05, &mut g), AglabStatus::Ok);
    }
    let g = Handle(g);
    let mut values = [0.0; 3];
    let mut written = 0;
    unsafe {
        assert_eq!(aglab_graph_eigenvalues(g.0, values.as_mut_ptr(), 3, &mut written), AglabStatus::Ok);
    }
    // path on three nodes: 0, 1, 2
    for (v, want) in values.iter().zip([0.0, 1.0, 2.0]) {
        assert!((v - want).abs() < 1e-10, "{values:?}");
    }

    let far = [0.0, 0.0, 0.06, 0.0];
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(aglab_graph_threshold(far.as_ptr(), 2, 0.05, &mut h), AglabStatus::InvalidArgument);
    }
    assert!(h.is_null());
}

#[test]
fn invalid_graph_arguments() {
    let xy = [0.0, 0.0];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(aglab_graph_from_points(xy.as_ptr(), 1, -0.5, 0.05, &mut g), AglabStatus::InvalidArgument);
        assert_eq!(aglab_graph_from_points(ptr::null(), 1, 0.5, 0.05, &mut g), AglabStatus::NullPointer);
        assert_eq!(aglab_graph_from_points(xy.as_ptr(), 1, 0.5, 0.05, ptr::null_mut()), AglabStatus::NullPointer);
    }
    assert!(g.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/aglab.h")).unwrap();
    for name in [
        "AGLAB_STATUS_OK",
        "AGLAB_STATUS_VACUOUS_BOUND",
        "typedef struct AglabGraph AglabGraph",
        "aglab_version",
        "aglab_last_error",
        "aglab_error_bound",
        "aglab_tv_distance",
        "aglab_replication_beta",
        "aglab_graph_from_points",
        "aglab_graph_threshold",
        "aglab_graph_node_count",
        "aglab_graph_component_count",
        "aglab_graph_eigenvalues",
        "aglab_graph_lambda",
        "aglab_graph_spectral_gap",
        "aglab_graph_free",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(dir) = tempfile_dir() else { return };
    let src = dir.join("check.c");
    std::fs::write(
        &src,
        "#include \"aglab.h\"\nint main(void) {\n  double out;\n  AglabStatus s = aglab_error_bound(0.05, 0.5, 1.0, 0.0, &out);\n  AglabGraph *g = 0;\n  aglab_graph_free(g);\n  return s == AGLAB_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .status();
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("no C compiler available ({e}); skipping"),
    }
    let _ = std::fs::remove_dir_all(dir);
}

fn tempfile_dir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("aglab-ffi-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}
