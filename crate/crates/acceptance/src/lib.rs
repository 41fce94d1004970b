//! Acceptance gate for the pathway workspace. The checks live in
//! `tests/acceptance`; run them with `cargo test -p ptc-acceptance`.
