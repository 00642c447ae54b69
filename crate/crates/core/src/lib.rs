//! Stella: parser, extension-gated bidirectional typechecker with
//! subtyping, universal and recursive types, type reconstruction, and a
//! call-by-value interpreter.

pub mod diagnostic;
pub mod effects;
pub mod interp;
pub mod matching;
pub mod parser;
pub mod poly;
pub mod reconstruct;
pub mod span;
pub mod subtype;
pub mod syntax;
pub mod typer;

#[cfg(feature = "test-support")]
pub mod testing;

pub use diagnostic::{Diagnostic, ErrorTag};
pub use interp::{eval_program, eval_program_with_fuel, FuelExhausted, Interpreter, Outcome, RuntimeErrorKind, Value};
pub use parser::{parse_expr, parse_pattern, parse_program, parse_type, ParseError};
pub use span::{Pos, Span};
pub use syntax::{pretty_print, Expr, Extension, Pattern, Program, Type};
pub use typer::{typecheck_program, Checked, Options};
