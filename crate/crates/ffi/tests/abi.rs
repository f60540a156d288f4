use std::ffi::{CStr, CString};
use std::ptr;

use nabla_fdm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nf_last_error()) }
        .to_string_lossy()
        .into_owned()
}

struct Owned(*mut NfApproximant);

impl Drop for Owned {
    fn drop(&mut self) {
        unsafe { nf_approximant_free(self.0) }
    }
}

fn fit(integrator: bool, alpha: f64) -> Owned {
    let mut ap = ptr::null_mut();
    let st = unsafe {
        if integrator {
            nf_fit_with_integrator(alpha, 1e-3, 1e3, 100, 20, 8, &mut ap)
        } else {
            nf_fit_operator(alpha, 1e-3, 1e3, 100, 20, 8, &mut ap)
        }
    };
    assert_eq!(st, NfStatus::Ok, "{}", last_error());
    assert!(!ap.is_null());
    Owned(ap)
}

#[test]
fn fitted_handle_reports_its_shape() {
    let ap = fit(true, 0.6);
    let mut n = 0;
    assert_eq!(unsafe { nf_approximant_len(ap.0, &mut n) }, NfStatus::Ok);
    assert_eq!(n, 21);
    let (mut alpha, mut j, mut integ) = (0.0, 0.0, false);
    assert_eq!(
        unsafe { nf_approximant_info(ap.0, &mut alpha, &mut j, &mut integ) },
        NfStatus::Ok
    );
    assert_eq!(alpha, 0.6);
    assert!(integ && j.is_finite() && j < 1e-2, "{j}");
    let (mut re, mut im) = (vec![0.0; n], vec![0.0; n]);
    assert_eq!(
        unsafe { nf_approximant_poles(ap.0, re.as_mut_ptr(), im.as_mut_ptr(), n) },
        NfStatus::Ok
    );
    assert_eq!((re[0], im[0]), (0.0, 0.0));
    assert!(re[1..].iter().all(|&r| r > 0.0));
    let (mut sre, mut sim) = (0.0, 0.0);
    assert_eq!(
        unsafe { nf_approximant_eval(ap.0, 1.0, 0.0, &mut sre, &mut sim) },
        NfStatus::Ok
    );
    assert!((sre - 1.0).abs() < 1e-2 && sim.abs() < 1e-12, "{sre} {sim}");
}

#[test]
fn text_round_trip_through_c_strings() {
    let ap = fit(false, 0.5);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { nf_approximant_to_toml(ap.0, &mut text) }, NfStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { nf_approximant_from_toml(text, &mut back) }, NfStatus::Ok);
    unsafe { nf_string_free(text) };
    let back = Owned(back);
    let n = 21;
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        nf_approximant_residues(ap.0, a.as_mut_ptr(), b.as_mut_ptr(), n);
        nf_approximant_residues(back.0, c.as_mut_ptr(), d.as_mut_ptr(), n);
    }
    assert_eq!((a, b), (c, d));

    let bad = CString::new("alpha = 0.5\n").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { nf_approximant_from_toml(bad.as_ptr(), &mut out) },
        NfStatus::Config
    );
    assert!(out.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn calculus_and_simulation_agree() {
    let u: Vec<f64> = (0..41)
        .map(|i| if i == 0 { 0.0 } else { (i as f64 * 0.3).sin() })
        .collect();
    let mut sum = vec![0.0; u.len()];
    let mut back = vec![0.0; u.len()];
    unsafe {
        assert_eq!(nf_frac_sum(3, u.as_ptr(), u.len(), 0.4, sum.as_mut_ptr()), NfStatus::Ok);
        assert_eq!(
            nf_caputo_diff(3, sum.as_ptr(), u.len(), 0.4, back.as_mut_ptr()),
            NfStatus::Ok
        );
    }
    for (x, y) in back[1..].iter().zip(&u[1..]) {
        assert!((x - y).abs() < 1e-12);
    }

    let ap = fit(true, 0.5);
    let mut exact = vec![0.0; u.len()];
    let mut approx = vec![0.0; u.len()];
    unsafe {
        assert_eq!(
            nf_exact_linear(0.5, 1.0, 2.0, 3, u.as_ptr(), u.len(), exact.as_mut_ptr()),
            NfStatus::Ok
        );
        assert_eq!(
            nf_simulate_linear(ap.0, 1.0, 2.0, 3, u.as_ptr(), u.len(), approx.as_mut_ptr()),
            NfStatus::Ok,
            "{}",
            last_error()
        );
    }
    assert_eq!(exact[0], 2.0);
    let worst = exact
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst}");
}

#[test]
fn errors_map_to_codes() {
    let ap = fit(false, 0.5);
    let u = [0.0, 1.0, 1.0];
    let mut out = [0.0; 3];
    unsafe {
        assert_eq!(
            nf_frac_sum(0, ptr::null(), 3, 0.5, out.as_mut_ptr()),
            NfStatus::NullArgument
        );
        assert_eq!(
            nf_frac_sum(0, u.as_ptr(), 3, f64::NAN, out.as_mut_ptr()),
            NfStatus::InvalidArgument
        );
        assert_eq!(
            nf_caputo_diff(0, u.as_ptr(), 3, 1.5, out.as_mut_ptr()),
            NfStatus::InvalidArgument
        );
        assert_eq!(
            nf_frac_sum(0, u.as_ptr(), 0, 0.5, out.as_mut_ptr()),
            NfStatus::InvalidArgument
        );
        let mut tiny = [0.0; 2];
        assert_eq!(
            nf_approximant_poles(ap.0, tiny.as_mut_ptr(), tiny.as_mut_ptr(), 2),
            NfStatus::BufferTooSmall
        );
        assert!(last_error().contains("21"), "{}", last_error());
        // x0 != 0 needs the integrator variant
        assert_eq!(
            nf_simulate_linear(ap.0, 1.0, 1.0, 0, u.as_ptr(), 3, out.as_mut_ptr()),
            NfStatus::Config
        );
        let mut fitted = ptr::null_mut();
        assert_eq!(
            nf_fit_operator(0.5, 1e-3, 1e3, 10, 20, 3, &mut fitted),
            NfStatus::Config
        );
        assert!(fitted.is_null());
        assert_eq!(nf_approximant_len(ptr::null(), &mut 0), NfStatus::NullArgument);
        nf_approximant_free(ptr::null_mut());
        nf_string_free(ptr::null_mut());
    }
    assert_eq!(nf_frac_sum_ok(), NfStatus::Ok);
    assert!(last_error().is_empty());
}

fn nf_frac_sum_ok() -> NfStatus {
    let u = [0.0, 1.0];
    let mut out = [0.0; 2];
    unsafe { nf_frac_sum(0, u.as_ptr(), 2, 0.5, out.as_mut_ptr()) }
}

#[test]
fn hand_built_approximant() {
    let (pr, pi) = ([1.0, 2.0, 2.0], [0.0, 1.0, -1.0]);
    let (rr, ri) = ([0.5, 0.25, 0.25], [0.0, 0.5, -0.5]);
    let mut ap = ptr::null_mut();
    let st = unsafe {
        nf_approximant_new(
            0.5,
            pr.as_ptr(),
            pi.as_ptr(),
            rr.as_ptr(),
            ri.as_ptr(),
            3,
            false,
            &mut ap,
        )
    };
    assert_eq!(st, NfStatus::Ok, "{}", last_error());
    let ap = Owned(ap);
    let u = [0.0, 1.0, 0.0, 0.0];
    let mut y = [0.0; 4];
    assert_eq!(
        unsafe { nf_simulate_operator(ap.0, 0, u.as_ptr(), 4, y.as_mut_ptr()) },
        NfStatus::Ok
    );
    assert_eq!(y[0], 0.0);
    assert!(
        (y[1] - (0.5 / 2.0 + 2.0 * (0.25 * 3.0 + 0.5 * 1.0) / 10.0)).abs() < 1e-14,
        "{y:?}"
    );

    let mut bad = ptr::null_mut();
    let pi_open = [0.0, 1.0, 1.0];
    let st = unsafe {
        nf_approximant_new(
            0.5,
            pr.as_ptr(),
            pi_open.as_ptr(),
            rr.as_ptr(),
            ri.as_ptr(),
            3,
            false,
            &mut bad,
        )
    };
    assert_ne!(st, NfStatus::Ok);
    assert!(bad.is_null());
}
