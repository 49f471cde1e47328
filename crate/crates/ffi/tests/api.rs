use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use dotmat_ffi::*;

fn last_error() -> String {
    let p = dotmat_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn small_config() -> DotmatTrainConfig {
    DotmatTrainConfig {
        epochs: 50,
        dim: 4,
        learning_rate: 0.05,
        ..dotmat_train_config_default()
    }
}

unsafe fn dataset(users: &[u64], items: &[u64], ratings: &[f64]) -> *mut DotmatDataset {
    let mut ds = ptr::null_mut();
    let st = dotmat_dataset_from_triples(
        users.as_ptr(),
        items.as_ptr(),
        ratings.as_ptr(),
        ratings.len(),
        0.0,
        &mut ds,
    );
    assert_eq!(st, DotmatStatus::Ok);
    ds
}

#[test]
fn dataset_counts_and_training() {
    unsafe {
        let ds = dataset(&[1, 1, 2, 3], &[10, 20, 10, 30], &[4.0, 2.0, 5.0, 3.0]);
        let (mut nu, mut ni, mut nr, mut rmax) = (0, 0, 0, 0.0);
        assert_eq!(
            dotmat_dataset_counts(ds, &mut nu, &mut ni, &mut nr, &mut rmax),
            DotmatStatus::Ok
        );
        assert_eq!((nu, ni, nr, rmax), (3, 3, 4, 5.0));

        let cfg = small_config();
        for alg in [
            DotmatAlgorithm::Dotmat,
            DotmatAlgorithm::DotmatHybrid,
            DotmatAlgorithm::Mf,
        ] {
            let mut m = ptr::null_mut();
            assert_eq!(dotmat_train(ds, alg, &cfg, &mut m), DotmatStatus::Ok);
            assert_eq!(dotmat_model_dim(m), 4);
            let mut err = f64::NAN;
            assert_eq!(dotmat_model_mae(m, ds, &mut err), DotmatStatus::Ok);
            assert!(err.is_finite() && err >= 0.0);
            dotmat_model_free(m);
        }
        dotmat_dataset_free(ds);
    }
}

#[test]
fn datafree_training_ignores_ratings() {
    unsafe {
        let cfg = small_config();
        let a = dataset(&[1, 2], &[10, 20], &[1.0, 5.0]);
        let b = dataset(&[1, 2], &[10, 20], &[5.0, 1.0]);
        let (mut ma, mut mb) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            dotmat_train(a, DotmatAlgorithm::Dotmat, &cfg, &mut ma),
            DotmatStatus::Ok
        );
        assert_eq!(
            dotmat_train(b, DotmatAlgorithm::Dotmat, &cfg, &mut mb),
            DotmatStatus::Ok
        );
        let mut mc = ptr::null_mut();
        let (users, items) = ([1u64, 2], [10u64, 20]);
        assert_eq!(
            dotmat_train_datafree(users.as_ptr(), 2, items.as_ptr(), 2, &cfg, &mut mc),
            DotmatStatus::Ok
        );
        for (u, i) in [(1, 10), (1, 20), (2, 10), (2, 20)] {
            let (mut pa, mut pb, mut pc) = (0.0, 0.0, 0.0);
            dotmat_model_predict(ma, u, i, 5.0, &mut pa);
            dotmat_model_predict(mb, u, i, 5.0, &mut pb);
            dotmat_model_predict(mc, u, i, 5.0, &mut pc);
            assert_eq!(pa.to_bits(), pb.to_bits());
            assert_eq!(pa.to_bits(), pc.to_bits());
        }
        for m in [ma, mb, mc] {
            dotmat_model_free(m);
        }
        dotmat_dataset_free(a);
        dotmat_dataset_free(b);
    }
}

#[test]
fn model_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("m.txt").to_str().unwrap()).unwrap();
    unsafe {
        let cfg = small_config();
        let (users, items) = ([7u64, 8, 9], [1u64, 2]);
        let mut m = ptr::null_mut();
        dotmat_train_datafree(users.as_ptr(), 3, items.as_ptr(), 2, &cfg, &mut m);
        assert_eq!(dotmat_model_save(m, path.as_ptr()), DotmatStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(dotmat_model_load(path.as_ptr(), &mut back), DotmatStatus::Ok);
        let (mut p, mut q) = (0.0, 0.0);
        dotmat_model_predict(m, 9, 2, 5.0, &mut p);
        dotmat_model_predict(back, 9, 2, 5.0, &mut q);
        assert_eq!(p.to_bits(), q.to_bits());
        dotmat_model_free(m);
        dotmat_model_free(back);
    }
}

#[test]
fn dataset_load_from_movielens_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ratings.dat");
    std::fs::write(&file, "1::10::5::0\n2::10::3::1\n2::11::4::2\n").unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    unsafe {
        let mut ds = ptr::null_mut();
        assert_eq!(
            dotmat_dataset_load(path.as_ptr(), DotmatFormat::Auto, &mut ds),
            DotmatStatus::Ok
        );
        let mut n = 0;
        dotmat_dataset_counts(ds, ptr::null_mut(), ptr::null_mut(), &mut n, ptr::null_mut());
        assert_eq!(n, 3);
        dotmat_dataset_free(ds);

        std::fs::write(&file, "1::10::5::0\n2::ten::3::1\n").unwrap();
        let mut ds = ptr::null_mut();
        assert_eq!(
            dotmat_dataset_load(path.as_ptr(), DotmatFormat::Auto, &mut ds),
            DotmatStatus::Parse
        );
        assert!(ds.is_null());
        assert!(last_error().contains('2'));

        let missing = CString::new(dir.path().join("none.dat").to_str().unwrap()).unwrap();
        assert_eq!(
            dotmat_dataset_load(missing.as_ptr(), DotmatFormat::Auto, &mut ds),
            DotmatStatus::Io
        );
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut out = 0.0;
        assert_eq!(
            dotmat_clamped_dot(ptr::null(), ptr::null(), 2, 1e-6, &mut out),
            DotmatStatus::NullPointer
        );
        let (u, v) = ([0.5, 0.5], [0.5, 0.5]);
        assert_eq!(
            dotmat_clamped_dot(u.as_ptr(), v.as_ptr(), 2, 1e-6, &mut out),
            DotmatStatus::Ok
        );
        assert_eq!(out, 0.5);
        assert!(dotmat_last_error().is_null());

        assert_eq!(dotmat_mae(u.as_ptr(), v.as_ptr(), 0, &mut out), DotmatStatus::Config);
        assert!(!last_error().is_empty());

        let cfg = DotmatTrainConfig {
            dim: 0,
            ..small_config()
        };
        let ids = [1u64];
        let mut m = ptr::null_mut();
        assert_eq!(
            dotmat_train_datafree(ids.as_ptr(), 1, ids.as_ptr(), 1, &cfg, &mut m),
            DotmatStatus::Config
        );
        assert!(m.is_null());
        assert_eq!(dotmat_model_dim(ptr::null()), 0);
        dotmat_model_free(ptr::null_mut());
        dotmat_dataset_free(ptr::null_mut());
    }
}

#[test]
fn metric_wrappers() {
    unsafe {
        let (p, a) = ([1.0, 2.0, 4.0], [2.0, 2.0, 1.0]);
        let mut out = 0.0;
        assert_eq!(dotmat_mae(p.as_ptr(), a.as_ptr(), 3, &mut out), DotmatStatus::Ok);
        assert!((out - 4.0 / 3.0).abs() < 1e-12);

        let counts: Vec<f64> = (1..=50).map(|r| 1000.0 / r as f64).chain([0.0, 0.0]).collect();
        let mut zeros = 0;
        assert_eq!(
            dotmat_matthew_degree(counts.as_ptr(), counts.len(), &mut out, &mut zeros),
            DotmatStatus::Ok
        );
        assert!((out - 1.0).abs() < 1e-9);
        assert_eq!(zeros, 2);
    }
}

/// Newest `libdotmat_ffi*.a` next to the test binary or one level up.
/// `cargo test` refreshes the copy in `deps/` but not always the one above it.
fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    [deps, deps.parent().unwrap()]
        .iter()
        .filter_map(|d| std::fs::read_dir(d).ok())
        .flatten()
        .filter_map(|e| e.ok())
        .filter(|e| {
            let name = e.file_name();
            let name = name.to_string_lossy();
            name.starts_with("libdotmat_ffi") && name.ends_with(".a")
        })
        .max_by_key(|e| e.metadata().and_then(|m| m.modified()).ok())
        .map(|e| e.path())
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/dotmat.h")).unwrap();
    for name in [
        "dotmat_train_datafree",
        "dotmat_model_predict",
        "dotmat_last_error",
        "DOTMAT_STATUS_OK",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let lib = static_lib().expect("static library not built");
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new("cc")
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}", run.status);
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok"));
}
