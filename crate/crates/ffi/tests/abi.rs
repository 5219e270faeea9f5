use std::ffi::{CStr, CString};
use std::ptr;

use gridplan_ffi::*;

fn s(x: &str) -> CString {
    CString::new(x).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gp_last_error()) }.to_string_lossy().into_owned()
}

struct Garver {
    case: *mut GpCase,
    cfg: *mut GpConfig,
}

impl Garver {
    fn new() -> Self {
        let mut case = ptr::null_mut();
        let mut cfg = ptr::null_mut();
        unsafe {
            assert_eq!(gp_case_load(s("garver6").as_ptr(), &mut case), GpStatus::Ok);
            assert_eq!(gp_config_load(s("thesis-ch4").as_ptr(), &mut cfg), GpStatus::Ok);
        }
        Garver { case, cfg }
    }
}

impl Drop for Garver {
    fn drop(&mut self) {
        unsafe {
            gp_case_free(self.case);
            gp_config_free(self.cfg);
        }
    }
}

#[test]
fn evaluate_bundled_plan() {
    let g = Garver::new();
    unsafe {
        assert_eq!(gp_case_bus_count(g.case), 6);
        let mut plan = ptr::null_mut();
        assert_eq!(gp_plan_load(g.case, s("garver-actnep").as_ptr(), 1, &mut plan), GpStatus::Ok);
        let mut cost = GpCost::default();
        let st = gp_evaluate(g.case, g.cfg, plan, s("ac-tnep").as_ptr(), 0, &mut cost);
        assert_eq!(st, GpStatus::Ok, "{}", last_error());
        assert_eq!(cost.feasible, 1);
        assert!((cost.total - 311e6).abs() < 1.0);
        gp_plan_free(plan);
    }
}

#[test]
fn solve_and_reload_plan() {
    let g = Garver::new();
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(gp_solve(g.case, g.cfg, s("dc-tnep").as_ptr(), 4, 0, &mut a), GpStatus::Ok, "{}", last_error());
        assert_eq!(gp_solve(g.case, g.cfg, s("dc-tnep").as_ptr(), 4, 0, &mut b), GpStatus::Ok);
        let (mut ca, mut cb) = (GpCost::default(), GpCost::default());
        assert_eq!(gp_solution_cost(a, &mut ca), GpStatus::Ok);
        assert_eq!(gp_solution_cost(b, &mut cb), GpStatus::Ok);
        assert_eq!(ca.total, cb.total);
        assert_eq!(ca.feasible, 1);

        let mut text = ptr::null_mut();
        assert_eq!(gp_solution_plan(a, &mut text), GpStatus::Ok);
        let mut plan = ptr::null_mut();
        assert_eq!(gp_plan_parse(g.case, text, 1, &mut plan), GpStatus::Ok, "{}", last_error());
        let mut again = GpCost::default();
        assert_eq!(gp_evaluate(g.case, g.cfg, plan, s("dc-tnep").as_ptr(), 0, &mut again), GpStatus::Ok);
        assert_eq!(again.total, ca.total);
        gp_plan_free(plan);
        gp_string_free(text);
        gp_solution_free(a);
        gp_solution_free(b);
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut case = ptr::null_mut();
        assert_eq!(gp_case_load(s("/no/such/case.toml").as_ptr(), &mut case), GpStatus::Io);
        assert!(case.is_null());
        assert!(last_error().contains("/no/such/case.toml"));

        assert_eq!(gp_case_load(ptr::null(), &mut case), GpStatus::NullPointer);
        assert_eq!(gp_case_load(s("garver6").as_ptr(), ptr::null_mut()), GpStatus::NullPointer);

        let bad = [0xffu8, 0xfe, 0];
        assert_eq!(gp_case_load(bad.as_ptr().cast(), &mut case), GpStatus::InvalidUtf8);
    }
    let g = Garver::new();
    assert_eq!(last_error(), "");
    unsafe {
        let mut sol = ptr::null_mut();
        assert_eq!(gp_solve(g.case, g.cfg, s("no-such-planner").as_ptr(), 0, 0, &mut sol), GpStatus::Config);
        assert!(sol.is_null());
        let mut plan = ptr::null_mut();
        let wrong = s("stage,item,count\n1,line:9-99,1\n");
        assert_ne!(gp_plan_parse(g.case, wrong.as_ptr(), 1, &mut plan), GpStatus::Ok);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        gp_case_free(ptr::null_mut());
        gp_config_free(ptr::null_mut());
        gp_plan_free(ptr::null_mut());
        gp_solution_free(ptr::null_mut());
        gp_string_free(ptr::null_mut());
        assert_eq!(gp_case_bus_count(ptr::null()), 0);
    }
    let v = unsafe { CStr::from_ptr(gp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/gridplan.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|r| r.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{}(", name)), "{} missing from header", name);
    }
    assert!(header.contains("typedef struct GpCase GpCase;"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let main = dir.path().join("main.c");
    std::fs::write(
        &main,
        "#include \"gridplan.h\"\nint main(void) { GpCase *c = 0; GpStatus s = gp_case_load(\"garver6\", &c); gp_case_free(c); return s == GP_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&main)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
