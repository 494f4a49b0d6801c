use std::ffi::{CStr, CString};
use std::ptr;

use mopchr_ffi::*;

fn parse(spec: &str) -> *mut MopchrSystem {
    let spec = CString::new(spec).unwrap();
    let mut sys = ptr::null_mut();
    assert_eq!(unsafe { mopchr_system_parse(spec.as_ptr(), &mut sys) }, MopchrStatus::Ok);
    sys
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(mopchr_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn charlier_lattice_exact_values() {
    let sys = parse("charlier:a=1,2");
    unsafe {
        let mut rank = 0;
        assert_eq!(mopchr_system_rank(sys, &mut rank), MopchrStatus::Ok);
        assert_eq!(rank, 2);
        let mut exact = false;
        assert_eq!(mopchr_system_is_exact(sys, &mut exact), MopchrStatus::Ok);
        assert!(exact);

        let mut lat = ptr::null_mut();
        assert_eq!(mopchr_nnrr(sys, 4, &mut lat), MopchrStatus::Ok);
        // Charlier: b_{n,j} = n_1 + n_2 + a_j, a_{n,j} = a_j n_j
        let n = [1usize, 2];
        let mut b = 0.0;
        assert_eq!(mopchr_lattice_b(lat, n.as_ptr(), 2, 1, &mut b), MopchrStatus::Ok);
        assert_eq!(b, 5.0);
        let mut a = 0.0;
        assert_eq!(mopchr_lattice_a(lat, n.as_ptr(), 2, 1, &mut a), MopchrStatus::Ok);
        assert_eq!(a, 4.0);
        let mut s = ptr::null_mut();
        assert_eq!(mopchr_lattice_exact(lat, n.as_ptr(), 2, 0, false, &mut s), MopchrStatus::Ok);
        assert_eq!(CStr::from_ptr(s).to_str().unwrap(), "1");
        mopchr_string_free(s);

        let mut cell = MopchrCellStatus::Absent;
        assert_eq!(mopchr_lattice_cell(lat, [9usize, 9].as_ptr(), 2, &mut cell), MopchrStatus::Ok);
        assert_eq!(cell, MopchrCellStatus::Absent);

        let mut needed = 0;
        assert_eq!(
            mopchr_type2_coeffs(lat, [1usize, 0].as_ptr(), 2, ptr::null_mut(), 0, &mut needed),
            MopchrStatus::BufferTooSmall
        );
        assert_eq!(needed, 2);
        let mut buf = [0.0; 2];
        assert_eq!(mopchr_type2_coeffs(lat, [1usize, 0].as_ptr(), 2, buf.as_mut_ptr(), 2, &mut needed), MopchrStatus::Ok);
        assert_eq!(buf, [-1.0, 1.0]);

        mopchr_lattice_free(lat);
        mopchr_system_free(sys);
    }
}

#[test]
fn laguerre_shift_through_transform() {
    let sys = parse("laguerre1:alpha=0");
    let phi = CString::new("roots=0").unwrap();
    unsafe {
        let mut lat = ptr::null_mut();
        assert_eq!(mopchr_transform(sys, phi.as_ptr(), 8, &mut lat), MopchrStatus::Ok);
        let mut breakdowns = 1;
        assert_eq!(mopchr_lattice_breakdowns(lat, &mut breakdowns), MopchrStatus::Ok);
        assert_eq!(breakdowns, 0);
        for n in 0..8usize {
            let mut b = 0.0;
            assert_eq!(mopchr_lattice_b(lat, [n].as_ptr(), 1, 0, &mut b), MopchrStatus::Ok);
            assert_eq!(b, (2 * n + 2) as f64);
        }
        mopchr_lattice_free(lat);
        mopchr_system_free(sys);
    }
}

#[test]
fn errors_map_to_codes() {
    unsafe {
        let mut sys = ptr::null_mut();
        let bad = CString::new("charlier:a=-1").unwrap();
        assert_eq!(mopchr_system_parse(bad.as_ptr(), &mut sys), MopchrStatus::Domain);
        assert!(sys.is_null());
        assert!(!last_error().is_empty());

        let unknown = CString::new("nosuch:x=1").unwrap();
        assert_eq!(mopchr_system_parse(unknown.as_ptr(), &mut sys), MopchrStatus::InvalidArgument);
        assert_eq!(mopchr_system_parse(ptr::null(), &mut sys), MopchrStatus::NullArgument);

        let sys = parse("charlier:a=1,2");
        let mut lat = ptr::null_mut();
        assert_eq!(mopchr_nnrr(sys, 3, &mut lat), MopchrStatus::Ok);
        assert!(last_error().is_empty());
        let mut v = 0.0;
        assert_eq!(mopchr_lattice_a(lat, [1usize].as_ptr(), 1, 0, &mut v), MopchrStatus::InvalidArgument);
        assert_eq!(mopchr_lattice_a(lat, [5usize, 5].as_ptr(), 2, 0, &mut v), MopchrStatus::NotFound);
        mopchr_lattice_free(lat);
        mopchr_system_free(sys);

        let jp = parse("jacobi_pineiro:alpha=0,1/2;beta=0");
        let mut exact = true;
        assert_eq!(mopchr_system_is_exact(jp, &mut exact), MopchrStatus::Ok);
        let mut lat = ptr::null_mut();
        assert_eq!(mopchr_nnrr(jp, 2, &mut lat), MopchrStatus::Ok);
        let mut s = ptr::null_mut();
        let status = mopchr_lattice_exact(lat, [1usize, 1].as_ptr(), 2, 0, true, &mut s);
        assert_eq!(status == MopchrStatus::Ok, exact);
        mopchr_string_free(s);
        mopchr_lattice_free(lat);
        mopchr_system_free(jp);
    }
}

#[test]
fn cli_entry_point_returns_exit_codes() {
    let args: Vec<CString> =
        ["mopchr", "verify", "--suite", "residuals", "--system", "charlier:a=1,2", "--dmax", "4"]
            .iter()
            .map(|s| CString::new(*s).unwrap())
            .collect();
    let ptrs: Vec<_> = args.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { mopchr_cli_main(ptrs.len() as i32, ptrs.as_ptr()) }, 0);
    let bad: Vec<CString> = ["mopchr", "jacobi", "--system", "charlier:a=0", "--len", "3"].iter().map(|s| CString::new(*s).unwrap()).collect();
    let ptrs: Vec<_> = bad.iter().map(|a| a.as_ptr()).collect();
    assert_eq!(unsafe { mopchr_cli_main(ptrs.len() as i32, ptrs.as_ptr()) }, 2);
    assert_eq!(unsafe { mopchr_cli_main(0, ptr::null()) }, 2);
}
