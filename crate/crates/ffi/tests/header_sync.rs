//! Guard against the committed header drifting from the exported surface.

#[test]
fn header_declares_every_exported_symbol() {
    let header = include_str!("../include/relvac.h");
    let exported = [
        "rv_last_error",
        "rv_version",
        "rv_simulate_json",
        "rv_trajectory_rows",
        "rv_trajectory_row",
        "rv_trajectory_events",
        "rv_trajectory_write_csv",
        "rv_trajectory_free",
        "rv_sound_speed_sq",
        "rv_lorentz_factor",
        "rv_number_density",
        "rv_verify_quick",
    ];
    for name in exported {
        assert!(header.contains(name), "header is missing `{name}`");
    }
    let source = include_str!("../src/lib.rs");
    for name in exported {
        assert!(source.contains(&format!("fn {name}")), "library is missing `{name}`");
    }
    // status codes stay in sync by value
    for (variant, value) in [
        ("RV_OK = 0", relvac_ffi::RvStatus::RvOk as i32),
        ("RV_INVALID_INPUT = 1", relvac_ffi::RvStatus::RvInvalidInput as i32),
        ("RV_DOMAIN_ERROR = 2", relvac_ffi::RvStatus::RvDomainError as i32),
        ("RV_ABORTED = 3", relvac_ffi::RvStatus::RvAborted as i32),
        ("RV_IO_ERROR = 4", relvac_ffi::RvStatus::RvIoError as i32),
        ("RV_INTERNAL = 5", relvac_ffi::RvStatus::RvInternal as i32),
    ] {
        assert!(header.contains(variant), "header is missing `{variant}`");
        let declared: i32 = variant.rsplit(' ').next().unwrap().parse().unwrap();
        assert_eq!(declared, value, "status value drifted for `{variant}`");
    }
}
