//! Acceptance suite for the workspace. The checks and their independent
//! oracles live in `tests/acceptance.rs`; run them with
//! `cargo test -p gsqg-validation --test acceptance`, or a single criterion
//! with `ACCEPTANCE_ONLY=<n>`.
