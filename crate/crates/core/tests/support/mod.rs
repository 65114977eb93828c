//! Reference implementations shared by the integration tests and the CLI
//! acceptance suite. Nothing here calls the crate's own step function,
//! labelling or code generator internals.
#![allow(dead_code)]

pub mod oracle;
pub mod vhdl_interp;
