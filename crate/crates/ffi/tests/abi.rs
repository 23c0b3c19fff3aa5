use std::ffi::{CStr, CString};
use std::ptr;

use volterra_ffi::*;

fn message() -> String {
    let p = vk_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn kernel_calls() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(vk_kernel_eval(2, 0.0, &mut v), VkStatus::Ok);
        assert_eq!(v, -3.0);
        assert_eq!(vk_kernel_root(2, &mut v), VkStatus::Ok);
        let expected = 4f64.ln() / (3.0 * std::f64::consts::PI.powi(2));
        assert!((v - expected).abs() < 1e-10);
        assert_eq!(vk_kernel_max_step(2, &mut v), VkStatus::Ok);
        assert!((v - 2.0 * expected).abs() < 1e-9);
        assert_eq!(vk_kernel_max_step(1, &mut v), VkStatus::Ok);
        assert!(v.is_infinite());
        assert_eq!(vk_kernel_root(1, &mut v), VkStatus::NoRoot);
        assert_eq!(vk_kernel_eval(0, 0.1, &mut v), VkStatus::InvalidArgument);
        assert_eq!(vk_kernel_eval(2, -1.0, &mut v), VkStatus::InvalidArgument);
        assert!(message().contains("non-negative"));
        assert_eq!(
            vk_kernel_eval(2, 0.1, ptr::null_mut()),
            VkStatus::NullPointer
        );
    }
}

#[test]
fn solution_handle() {
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(
            vk_solve(VK_SCHEME_PRODUCT, 2, 0.1, 256, &mut sol),
            VkStatus::Ok
        );
        assert_eq!(vk_solution_len(sol), 256);
        let values = std::slice::from_raw_parts(vk_solution_values(sol), 256);
        assert!(values.iter().all(|v| v.is_finite()));
        let mut norm = 0.0;
        assert_eq!(vk_solution_norm(sol, &mut norm), VkStatus::Ok);
        assert!((norm - 0.000499).abs() < 0.02 * 0.000499);
        assert_eq!(vk_solution_overflow(sol), 0);
        vk_solution_free(sol);

        let mut sol = ptr::null_mut();
        assert_eq!(
            vk_solve(VK_SCHEME_MIDPOINT, 10, 0.1, 256, &mut sol),
            VkStatus::Ok
        );
        assert_eq!(vk_solution_overflow(sol), 1);
        vk_solution_free(sol);

        let mut sol = ptr::null_mut();
        assert_eq!(
            vk_solve(VK_SCHEME_MIDPOINT, 2, 0.1, 8, &mut sol),
            VkStatus::StepRejected
        );
        assert!(sol.is_null());
        assert_eq!(vk_solve(7, 2, 0.1, 8, &mut sol), VkStatus::InvalidArgument);
        assert_eq!(
            vk_solve(VK_SCHEME_PRODUCT, 2, 0.1, 0, &mut sol),
            VkStatus::InvalidArgument
        );
        assert_eq!(vk_solution_len(ptr::null()), 0);
        assert_eq!(vk_solution_overflow(ptr::null()), -1);
        vk_solution_free(ptr::null_mut());
    }
}

#[test]
fn order_codes() {
    let mut g = 0.0;
    unsafe {
        assert_eq!(
            vk_convergence_order(0.005001, 0.001242, &mut g),
            VkStatus::Ok
        );
        assert!((g - 2.009).abs() < 0.005);
        assert_eq!(
            vk_convergence_order(0.0, 0.1, &mut g),
            VkStatus::UndefinedOrder
        );
    }
}

#[test]
fn sigdec_handles() {
    unsafe {
        let text = CString::new("+18652239e2 (f=6, L=8)").unwrap();
        let mut a = ptr::null_mut();
        assert_eq!(vk_sigdec_parse(text.as_ptr(), &mut a), VkStatus::Ok);
        let mut b = ptr::null_mut();
        let text = CString::new("+44981421e-2 (f=6, L=8)").unwrap();
        assert_eq!(vk_sigdec_parse(text.as_ptr(), &mut b), VkStatus::Ok);

        let mut s = ptr::null_mut();
        assert_eq!(vk_sigdec_add(a, b, &mut s), VkStatus::Ok);
        assert_eq!(vk_sigdec_digits(s), 8);
        assert_eq!(vk_sigdec_exponent(s), 2);
        assert_eq!(vk_sigdec_valid(s), 5);
        let mut r = ptr::null_mut();
        assert_eq!(vk_sigdec_render(s, &mut r), VkStatus::Ok);
        assert_eq!(
            CStr::from_ptr(r).to_str().unwrap(),
            "+18656737e2 (f=5, L=8)"
        );
        vk_string_free(r);

        let mut d = ptr::null_mut();
        assert_eq!(vk_sigdec_sub(s, s, &mut d), VkStatus::Ok);
        assert_eq!(vk_sigdec_to_double(d), 0.0);
        assert_eq!(vk_sigdec_valid(d), 0);

        let mut x = ptr::null_mut();
        assert_eq!(vk_sigdec_from_real(0.1, 9, &mut x), VkStatus::Ok);
        assert_eq!(vk_sigdec_add(a, x, &mut d), VkStatus::DigitMismatch);
        for h in [a, b, s, x] {
            vk_sigdec_free(h);
        }

        let bad = CString::new("18652239").unwrap();
        let mut y = ptr::null_mut();
        assert_eq!(vk_sigdec_parse(bad.as_ptr(), &mut y), VkStatus::Parse);
        assert_eq!(vk_sigdec_parse(ptr::null(), &mut y), VkStatus::NullPointer);
        assert_eq!(
            vk_sigdec_from_real(f64::NAN, 8, &mut y),
            VkStatus::InvalidArgument
        );
        let huge = CString::new("+12345678e1200 (f=8, L=8)").unwrap();
        assert_eq!(vk_sigdec_parse(huge.as_ptr(), &mut y), VkStatus::Range);
    }
}

#[test]
fn estimates() {
    assert_eq!(vk_estimate_f_sum(2, 6, -2, 6), 5);
    let (m3, m4) = (
        CString::new("1865674275054").unwrap(),
        CString::new("1865674273715").unwrap(),
    );
    let mut f = 99;
    unsafe {
        assert_eq!(
            vk_estimate_f_diff(m3.as_ptr(), 12, m4.as_ptr(), 12, 13, &mut f),
            VkStatus::Ok
        );
        assert_eq!(f, 2);
        let junk = CString::new("12a").unwrap();
        assert_eq!(
            vk_estimate_f_diff(junk.as_ptr(), 1, m4.as_ptr(), 1, 13, &mut f),
            VkStatus::Parse
        );
    }
}

#[test]
fn status_messages() {
    for s in [VkStatus::Ok, VkStatus::StepRejected, VkStatus::Panic] {
        let p = vk_status_message(s);
        assert!(!unsafe { CStr::from_ptr(p) }.to_bytes().is_empty());
    }
}
