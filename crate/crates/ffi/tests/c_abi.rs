use std::ffi::{c_char, CStr, CString};
use std::ptr;

use cointegra::johansen::{johansen_eigen, VecmSpec};
use cointegra::unitroot::{adf_test, DeterministicSpec, LagPolicy};
use cointegra::{Dataset, TimeSeries};
use cointegra_ffi::*;

const N: usize = 60;

fn walks() -> (Vec<&'static str>, Vec<f64>) {
    // three deterministic pseudo-random walks, the third tied to the first
    let mut vals = vec![0.0; 3 * N];
    let mut s = 12345u64;
    let mut next = || {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    for t in 1..N {
        vals[t] = vals[t - 1] + next();
        vals[N + t] = vals[N + t - 1] + next();
    }
    for t in 0..N {
        vals[2 * N + t] = 0.5 * vals[t] + 0.2 * next();
    }
    (vec!["a", "b", "c"], vals)
}

struct Handle(*mut CgDataset);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { cg_dataset_free(self.0) };
    }
}

fn make() -> Handle {
    let (names, vals) = walks();
    let c: Vec<CString> = names.iter().map(|n| CString::new(*n).unwrap()).collect();
    let ptrs: Vec<*const c_char> = c.iter().map(|s| s.as_ptr()).collect();
    let mut ds = ptr::null_mut();
    let rc = unsafe { cg_dataset_new(ptrs.as_ptr(), vals.as_ptr(), 3, N, 1950, &mut ds) };
    assert_eq!(rc, CG_OK);
    assert!(!ds.is_null());
    Handle(ds)
}

fn native() -> Dataset {
    let (names, vals) = walks();
    Dataset::new(
        names
            .iter()
            .enumerate()
            .map(|(j, n)| TimeSeries::new(*n, 1950, vals[j * N..(j + 1) * N].to_vec()).unwrap())
            .collect(),
    )
    .unwrap()
}

fn last_error() -> String {
    let p = cg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn adf_matches_native() {
    let ds = make();
    let name = CString::new("a").unwrap();
    let mut out = CgUnitRootResult::default();
    let rc = unsafe { cg_adf(ds.0, name.as_ptr(), 1, 2, &mut out) };
    assert_eq!(rc, CG_OK);
    assert!(cg_last_error_message().is_null());
    let r = adf_test(
        native().get("a").unwrap(),
        DeterministicSpec::Constant,
        LagPolicy::Fixed { lags: 2 },
    )
    .unwrap();
    assert_eq!(out.statistic, r.statistic);
    assert_eq!(out.lags_or_bandwidth, 2);
    assert_eq!(out.critical_values.pct5, r.critical_values.pct5);
}

#[test]
fn pp_and_za_run() {
    let ds = make();
    let name = CString::new("b").unwrap();
    let mut pp = CgUnitRootResult::default();
    assert_eq!(unsafe { cg_pp(ds.0, name.as_ptr(), 2, -1, &mut pp) }, CG_OK);
    assert!(pp.statistic.is_finite() && pp.n_obs == N - 1);
    let mut za = CgZaResult::default();
    assert_eq!(
        unsafe { cg_za(ds.0, name.as_ptr(), b'C' as c_char, 0.15, -1, &mut za) },
        CG_OK
    );
    assert!((1950..1950 + N as i32).contains(&za.break_year));
    assert_eq!(za.critical_values.pct5, -5.08);
    assert_eq!(
        unsafe { cg_za(ds.0, name.as_ptr(), b'Q' as c_char, 0.15, -1, &mut za) },
        CG_ERR_INVALID_ARG
    );
}

#[test]
fn johansen_eigenvalues_and_rank() {
    let ds = make();
    let mut buf = [0.0; 3];
    let mut len = 0;
    assert_eq!(
        unsafe { cg_johansen_eigenvalues(ds.0, 1, 3, buf.as_mut_ptr(), 3, &mut len) },
        CG_OK
    );
    assert_eq!(len, 3);
    let e = johansen_eigen(&native(), VecmSpec::default()).unwrap();
    assert_eq!(buf.to_vec(), e.eigenvalues);

    let mut small = [0.0; 2];
    let rc = unsafe { cg_johansen_eigenvalues(ds.0, 1, 3, small.as_mut_ptr(), 2, &mut len) };
    assert_eq!(rc, CG_ERR_INVALID_ARG);
    assert_eq!(len, 3);

    let mut rank = 99;
    assert_eq!(
        unsafe { cg_johansen_rank(ds.0, 1, 3, 0.05, &mut rank) },
        CG_OK
    );
    assert!(rank >= 1, "c is tied to a, rank {rank}");
    assert_eq!(
        unsafe { cg_johansen_rank(ds.0, 1, 3, 0.2, &mut rank) },
        CG_ERR_CONFIG
    );
    assert_eq!(
        unsafe { cg_johansen_rank(ds.0, 1, 9, 0.05, &mut rank) },
        CG_ERR_CONFIG
    );
}

#[test]
fn dols_writes_regressors_then_intercept() {
    let ds = make();
    let dep = CString::new("c").unwrap();
    let regs = [CString::new("a").unwrap(), CString::new("b").unwrap()];
    let ptrs: Vec<*const c_char> = regs.iter().map(|s| s.as_ptr()).collect();
    let mut b = [0.0; 3];
    let mut se = [0.0; 3];
    let rc = unsafe {
        cg_dols(
            ds.0,
            dep.as_ptr(),
            ptrs.as_ptr(),
            2,
            1,
            1,
            -1,
            b.as_mut_ptr(),
            se.as_mut_ptr(),
        )
    };
    assert_eq!(rc, CG_OK, "{}", last_error());
    assert!((b[0] - 0.5).abs() < 0.1, "{b:?}");
    assert!(se.iter().all(|s| *s > 0.0));
}

#[test]
fn errors_map_to_codes() {
    let ds = make();
    let missing = CString::new("zzz").unwrap();
    let mut out = CgUnitRootResult::default();
    assert_eq!(
        unsafe { cg_adf(ds.0, missing.as_ptr(), 1, 0, &mut out) },
        CG_ERR_CONFIG
    );
    assert!(last_error().contains("zzz"));
    assert_eq!(
        unsafe { cg_adf(ptr::null(), missing.as_ptr(), 1, 0, &mut out) },
        CG_ERR_NULL_POINTER
    );
    let a = CString::new("a").unwrap();
    assert_eq!(
        unsafe { cg_adf(ds.0, a.as_ptr(), 7, 0, &mut out) },
        CG_ERR_INVALID_ARG
    );

    let constant = [1.0; 30];
    let name = CString::new("k").unwrap();
    let names = [name.as_ptr()];
    let mut flat = ptr::null_mut();
    assert_eq!(
        unsafe { cg_dataset_new(names.as_ptr(), constant.as_ptr(), 1, 30, 2000, &mut flat) },
        CG_OK
    );
    let flat = Handle(flat);
    assert_eq!(
        unsafe { cg_adf(flat.0, name.as_ptr(), 1, 0, &mut out) },
        CG_ERR_NUMERICAL
    );

    let nan = [f64::NAN; 5];
    let mut bad = ptr::null_mut();
    assert_eq!(
        unsafe { cg_dataset_new(names.as_ptr(), nan.as_ptr(), 1, 5, 2000, &mut bad) },
        CG_ERR_DATA
    );
    assert!(bad.is_null());
}

#[test]
fn pipeline_json_round_trip() {
    let dir = CString::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/turkiye")).unwrap();
    let mut json = ptr::null_mut();
    let rc = unsafe { cg_pipeline_json(dir.as_ptr(), ptr::null(), &mut json) };
    assert_eq!(rc, CG_OK, "{}", last_error());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { cg_string_free(json) };
    let report = cointegra::report::PipelineReport::from_json(&text).unwrap();
    assert_eq!(report.meta.first_year, 1995);

    let cfg = CString::new("dependent = \"EXC\"\nregressors = [\"EXC\"]\n").unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { cg_pipeline_json(dir.as_ptr(), cfg.as_ptr(), &mut none) },
        CG_ERR_CONFIG
    );
    assert!(none.is_null());
}

#[test]
fn header_declares_the_abi() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cointegra.h"))
        .unwrap();
    for sym in [
        "cg_dataset_new",
        "cg_dataset_free",
        "cg_adf",
        "cg_pp",
        "cg_za",
        "cg_johansen_eigenvalues",
        "cg_johansen_rank",
        "cg_dols",
        "cg_pipeline_json",
        "cg_string_free",
        "cg_last_error_message",
        "typedef struct CgDataset CgDataset",
        "#define CG_ERR_PANIC 12",
    ] {
        assert!(h.contains(sym), "missing {sym}");
    }
}
