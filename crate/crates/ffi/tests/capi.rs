use std::ffi::{CStr, CString};
use std::ptr;

use qrex_ffi::*;

unsafe fn last_error() -> String {
    let p = qrex_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn version_and_theta() {
    let v = unsafe { CStr::from_ptr(qrex_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    assert!((qrex_theta(0.0) - 0.617).abs() < 1e-3);
}

#[test]
fn hamiltonian_lifecycle() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_defected_ising_1d(3, 2.0, &mut h), QrexStatus::Ok);
        let mut n = 0usize;
        assert_eq!(qrex_hamiltonian_num_qubits(h, &mut n), QrexStatus::Ok);
        assert_eq!(n, 3);
        let mut json = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_to_json(h, &mut json), QrexStatus::Ok);
        let mut h2 = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_from_json(json, &mut h2), QrexStatus::Ok);
        qrex_string_free(json);
        let mut h3 = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_with_defect(h2, 5.0, &mut h3), QrexStatus::Ok);
        let mut json3 = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_to_json(h3, &mut json3), QrexStatus::Ok);
        assert!(CStr::from_ptr(json3).to_str().unwrap().contains("\"J\":5.0"));
        qrex_string_free(json3);
        qrex_hamiltonian_free(h);
        qrex_hamiltonian_free(h2);
        qrex_hamiltonian_free(h3);
        qrex_hamiltonian_free(ptr::null_mut());
    }
}

#[test]
fn error_codes_and_messages() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_defected_ising_1d(2, 1.0, &mut h), QrexStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(!last_error().is_empty());
        let bad = CString::new("{\"n\": 2, \"terms\": [{\"coeff\": 1.0, \"paulis\": [[5, \"Z\"]]}]}").unwrap();
        assert_eq!(qrex_hamiltonian_from_json(bad.as_ptr(), &mut h), QrexStatus::InvalidArgument);
        assert!(last_error().contains("site 5"));
        assert_eq!(qrex_hamiltonian_from_json(ptr::null(), &mut h), QrexStatus::NullPointer);
        let mut n = 0usize;
        assert_eq!(qrex_hamiltonian_num_qubits(ptr::null(), &mut n), QrexStatus::NullPointer);
        assert_eq!(qrex_hamiltonian_defected_ising_1d(3, 1.0, &mut h), QrexStatus::Ok);
        assert!(qrex_last_error().is_null());
        let mut g = ptr::null_mut();
        assert_eq!(
            qrex_generator_build(h, -1.0, QrexWeight::Metropolis, QrexSwapMode::None, 0.0, &mut g),
            QrexStatus::InvalidArgument
        );
        qrex_hamiltonian_free(h);
        assert_eq!(qrex_hamiltonian_defected_ising_1d(4, 1.0, &mut h), QrexStatus::Ok);
        assert_eq!(
            qrex_generator_build(h, 1.0, QrexWeight::Metropolis, QrexSwapMode::Global, 1.0, &mut g),
            QrexStatus::ResourceGuard
        );
        assert!(g.is_null());
        qrex_hamiltonian_free(h);
        let cfg = CString::new("{\"scenario\": \"nope\"}").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(qrex_run_config(cfg.as_ptr(), 0, &mut r), QrexStatus::Config);
        assert!(last_error().contains("scenario"));
    }
}

#[test]
fn generator_gap_and_detailed_balance() {
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(qrex_hamiltonian_defected_ising_1d(3, 3.0, &mut h), QrexStatus::Ok);
        let mut g = ptr::null_mut();
        assert_eq!(
            qrex_generator_build(h, 1.0, QrexWeight::Metropolis, QrexSwapMode::LocalA, 0.0, &mut g),
            QrexStatus::Ok
        );
        let (mut ds, mut dj) = (0usize, 0usize);
        assert_eq!(qrex_generator_dim(g, QrexTarget::System, &mut ds), QrexStatus::Ok);
        assert_eq!(qrex_generator_dim(g, QrexTarget::Joint, &mut dj), QrexStatus::Ok);
        assert_eq!((ds, dj), (8, 32));
        let (mut gs, mut gj, mut db) = (0.0, 0.0, 1.0);
        assert_eq!(qrex_generator_gap(g, QrexTarget::System, &mut gs), QrexStatus::Ok);
        assert_eq!(qrex_generator_gap(g, QrexTarget::Joint, &mut gj), QrexStatus::Ok);
        assert_eq!(qrex_generator_detailed_balance(g, QrexTarget::Joint, &mut db), QrexStatus::Ok);
        assert!(gs > 0.0 && gj > gs, "{gs} {gj}");
        assert!(db < 1e-10);
        qrex_generator_free(g);
        qrex_hamiltonian_free(h);
    }
}

#[test]
fn run_config_and_encode() {
    unsafe {
        let cfg = CString::new("{\"scenario\": \"theta\"}").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(qrex_run_config(cfg.as_ptr(), 2, &mut r), QrexStatus::Ok);
        let mut passed = false;
        assert_eq!(qrex_report_passed(r, &mut passed), QrexStatus::Ok);
        assert!(passed);
        let mut len = 0usize;
        assert_eq!(qrex_report_len(r, &mut len), QrexStatus::Ok);
        assert_eq!(len, 401);
        let mut csv = ptr::null_mut();
        assert_eq!(qrex_report_encode(r, QrexFormat::Csv, &mut csv), QrexStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap();
        assert!(text.starts_with("beta_omega,theta_closed,theta_quadrature,abs_diff\n"));
        assert_eq!(text.lines().count(), 402);
        qrex_string_free(csv);
        let mut json = ptr::null_mut();
        assert_eq!(qrex_report_encode(r, QrexFormat::Json, &mut json), QrexStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"scenario\": \"theta\""));
        qrex_string_free(json);
        qrex_report_free(r);
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/qrex.h")).unwrap();
    for name in [
        "qrex_version",
        "qrex_last_error",
        "qrex_string_free",
        "qrex_theta",
        "qrex_hamiltonian_from_json",
        "qrex_hamiltonian_defected_ising_1d",
        "qrex_hamiltonian_with_defect",
        "qrex_hamiltonian_num_qubits",
        "qrex_hamiltonian_to_json",
        "qrex_hamiltonian_free",
        "qrex_generator_build",
        "qrex_generator_dim",
        "qrex_generator_gap",
        "qrex_generator_detailed_balance",
        "qrex_generator_free",
        "qrex_run_config",
        "qrex_report_passed",
        "qrex_report_len",
        "qrex_report_encode",
        "qrex_report_free",
        "QREX_STATUS_INVARIANT_FAILURE",
        "typedef struct QrexGenerator QrexGenerator",
    ] {
        assert!(header.contains(name), "{name} missing from qrex.h");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(&src, "#include \"qrex.h\"\nint main(void) { return qrex_theta(0.0) > 0.0 ? 0 : 1; }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("qrex-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
