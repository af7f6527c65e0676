//! Acceptance checks for `topicbench-core`, run with
//! `cargo test -p topicbench-validation --test acceptance`. The library itself
//! is empty; the checks live in `tests/acceptance.rs` with their fixture tables.
