use std::ffi::{c_char, CStr, CString};
use std::ptr;

use spt_qcnn_ffi::*;

fn last_error() -> String {
    unsafe {
        let n = spt_last_error_message(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; n + 1];
        spt_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn ground_state_round_trip() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(spt_ground_state(0.0, 0.0, 7, &mut s), SptStatus::Ok);
        assert_eq!(spt_state_num_qubits(s), 7);
        let (mut so, mut y) = (0.0, 0.0);
        assert_eq!(spt_state_string_order(s, &mut so), SptStatus::Ok);
        assert_eq!(spt_state_qcnn_output(s, &mut y), SptStatus::Ok);
        assert!((so - 1.0).abs() < 1e-10 && (y - 1.0).abs() < 1e-10, "{so} {y}");

        let (mut re, mut im) = (vec![0.0; 128], vec![0.0; 128]);
        assert_eq!(spt_state_amplitudes(s, re.as_mut_ptr(), im.as_mut_ptr(), 128), SptStatus::Ok);
        let mut t = ptr::null_mut();
        assert_eq!(spt_state_from_amplitudes(re.as_ptr(), im.as_ptr(), 128, &mut t), SptStatus::Ok);
        let mut rho = ptr::null_mut();
        assert_eq!(spt_density_from_state(t, &mut rho), SptStatus::Ok);
        let mut yr = 0.0;
        assert_eq!(spt_density_qcnn_output(rho, &mut yr), SptStatus::Ok);
        assert!((yr - y).abs() < 1e-12);
        spt_density_free(rho);
        spt_state_free(t);
        spt_state_free(s);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(spt_ground_state(0.0, 0.0, 1, &mut s), SptStatus::InvalidArgument);
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(spt_ground_state(0.0, 0.0, 7, ptr::null_mut()), SptStatus::NullPointer);
        assert_eq!(last_error(), "out_state is null");

        let mut v = 0.0;
        assert_eq!(spt_state_string_order(ptr::null(), &mut v), SptStatus::NullPointer);

        assert_eq!(spt_ground_state(0.0, 0.0, 7, &mut s), SptStatus::Ok);
        assert_eq!(last_error(), "");
        let mut re = vec![0.0; 4];
        let mut im = vec![0.0; 4];
        assert_eq!(spt_state_amplitudes(s, re.as_mut_ptr(), im.as_mut_ptr(), 4), SptStatus::SizeMismatch);
        spt_state_free(s);

        let re = [1.0, 0.0, 0.0];
        assert_eq!(spt_state_from_amplitudes(re.as_ptr(), re.as_ptr(), 3, &mut s), SptStatus::InvalidArgument);

        let path = CString::new("/nonexistent/device.toml").unwrap();
        let mut d = ptr::null_mut();
        assert_ne!(spt_device_load(path.as_ptr(), &mut d), SptStatus::Ok);
        assert!(d.is_null());

        let mut m = ptr::null_mut();
        assert_eq!(spt_msop_expand(1, &mut m), SptStatus::Ok);
        let (mut c, mut n) = (0.0, 0);
        assert_eq!(spt_msop_term(m, 10, &mut c, ptr::null_mut(), 0, &mut n), SptStatus::OutOfRange);
        spt_msop_free(m);

        spt_state_free(ptr::null_mut());
        spt_density_free(ptr::null_mut());
        spt_device_free(ptr::null_mut());
        spt_vqe_result_free(ptr::null_mut());
        spt_msop_free(ptr::null_mut());
    }
}

#[test]
fn msop_terms_are_readable() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(spt_msop_expand(1, &mut m), SptStatus::Ok);
        assert_eq!(spt_msop_num_terms(m), 10);
        assert_eq!(spt_msop_num_qubits(m), 7);
        let mut total = 0.0;
        let mut strings = Vec::new();
        for k in 0..10 {
            let (mut c, mut n) = (0.0, 0);
            assert_eq!(spt_msop_term(m, k, &mut c, ptr::null_mut(), 0, &mut n), SptStatus::Ok);
            let mut buf = vec![0 as c_char; n + 1];
            assert_eq!(spt_msop_term(m, k, &mut c, buf.as_mut_ptr(), buf.len(), &mut n), SptStatus::Ok);
            strings.push(CStr::from_ptr(buf.as_ptr()).to_str().unwrap().to_owned());
            total += c.abs();
        }
        assert_eq!(total, 3.0);
        assert!(strings.iter().any(|s| s.contains("X1 Y3 X4 Y5 X7")), "{strings:?}");

        // truncated copy still terminates
        let (mut c, mut n) = (0.0, 0);
        let mut small = [1 as c_char; 3];
        assert_eq!(spt_msop_term(m, 0, &mut c, small.as_mut_ptr(), 3, &mut n), SptStatus::Ok);
        assert_eq!(small[2], 0);
        assert!(n > 2);
        spt_msop_free(m);
    }
}

#[test]
fn vqe_and_noisy_readout() {
    unsafe {
        let mut opts = spt_vqe_options_default();
        opts.max_restarts = 4;
        let mut r = ptr::null_mut();
        assert_eq!(spt_vqe_optimize(0.0, -0.2, 7, &opts, &mut r), SptStatus::Ok);
        assert!(spt_vqe_result_accepted(r));
        assert!(spt_vqe_result_fidelity(r) > 0.9);
        let k = spt_vqe_result_num_angles(r);
        assert_eq!(k, 19);
        let mut angles = vec![0.0; k];
        assert_eq!(spt_vqe_result_angles(r, true, angles.as_mut_ptr(), k), SptStatus::Ok);
        assert!(angles[..7].iter().all(|a| a.abs() <= std::f64::consts::FRAC_PI_2));

        let mut ideal = ptr::null_mut();
        assert_eq!(spt_ansatz_state(7, 1, angles.as_ptr(), k, &mut ideal), SptStatus::Ok);
        let mut exact = ptr::null_mut();
        assert_eq!(spt_ground_state(0.0, -0.2, 7, &mut exact), SptStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        spt_state_string_order(ideal, &mut a);
        spt_state_string_order(exact, &mut b);
        assert!((a - b).abs() < 0.2, "{a} {b}");

        let mut dev = ptr::null_mut();
        assert_eq!(spt_device_table_one(&mut dev), SptStatus::Ok);
        let mut rho = ptr::null_mut();
        assert_eq!(spt_noisy_ansatz(dev, 7, 1, angles.as_ptr(), k, true, &mut rho), SptStatus::Ok);
        let (mut q, mut s) = (0.0, 0.0);
        assert_eq!(spt_noisy_qcnn_output(dev, rho, true, 0, 0, &mut q), SptStatus::Ok);
        assert_eq!(spt_noisy_string_order(dev, rho, true, 0, 0, &mut s), SptStatus::Ok);
        assert!(q > s && q < 1.0 && s > 0.0, "{q} {s}");

        let mut quiet = ptr::null_mut();
        assert_eq!(spt_device_noiseless(7, &mut quiet), SptStatus::Ok);
        let mut clean = ptr::null_mut();
        assert_eq!(spt_noisy_ansatz(quiet, 7, 1, angles.as_ptr(), k, true, &mut clean), SptStatus::Ok);
        let mut sc = 0.0;
        assert_eq!(spt_noisy_string_order(quiet, clean, false, 0, 0, &mut sc), SptStatus::Ok);
        assert!((sc - a).abs() < 1e-9, "{sc} {a}");

        for p in [rho, clean] {
            spt_density_free(p);
        }
        spt_device_free(dev);
        spt_device_free(quiet);
        spt_state_free(ideal);
        spt_state_free(exact);
        spt_vqe_result_free(r);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(spt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
