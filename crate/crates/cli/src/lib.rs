//! Output schemas and golden checks behind the `lel` binary.

pub mod output;
pub mod verify;
