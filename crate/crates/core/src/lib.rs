//! Concurrent State Machine modelling and analysis.
//!
//! A system is a set of Moore machines stepping in lockstep. Guards are
//! Boolean formulas over symbols; a machine sees the outputs of every
//! machine plus the environment signals of the current step. The crate
//! parses systems, builds their reachability graph explicitly or with
//! BDDs, checks temporal queries and generates VHDL.

pub mod assets;
pub mod bdd;
pub mod error;
pub mod exec;
pub mod formula;
pub mod frontend;
pub mod lint;
pub mod mc;
pub mod model;
pub mod reach;
pub mod synth;
pub mod vhdl;

pub use bdd::{BddManager, BddRef, VarId};
pub use error::{FormulaError, InvalidSystem, QueryError, VhdlError};
pub use exec::Exec;
pub use formula::{BoolExpr, Symbol, SymbolTable, Valuation};
pub use frontend::{parse_queries, parse_system, ParsedSystem, QueryFile, QueryItem};
pub use lint::{validate, LintReport};
pub use mc::{check_ctl, check_query, check_suite, Ctl, Query, QueryMode, SuiteReport, Trace, Verdict};
pub use model::{Arc, GlobalState, Machine, State, System};
pub use reach::{build_rg_explicit, build_rg_symbolic, ReachGraph, SymbolicReachability};
pub use vhdl::{generate, structural_audit, CodegenOptions, StateEncoding};
