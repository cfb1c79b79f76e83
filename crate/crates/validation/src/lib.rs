//! Acceptance suite for `coxf-core`; see `tests/acceptance.rs`.
