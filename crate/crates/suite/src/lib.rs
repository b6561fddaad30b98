//! Acceptance checks for `qchan`, kept in their own package so the suite
//! runs after every other test binary. Run with
//! `cargo test -p qchan-suite --test acceptance`.
