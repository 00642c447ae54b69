use std::fmt;
use std::str::FromStr;

use crate::span::Span;

macro_rules! error_tags {
    ($($variant:ident,)*) => {
        /// Stable machine-readable identifier of a type error.
        #[allow(non_camel_case_types)]
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum ErrorTag {
            $($variant,)*
        }

        impl ErrorTag {
            pub const ALL: &'static [ErrorTag] = &[$(ErrorTag::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(ErrorTag::$variant => stringify!($variant),)*
                }
            }
        }
    };
}

error_tags! {
    ERROR_MISSING_MAIN,
    ERROR_INCORRECT_ARITY_OF_MAIN,
    ERROR_DUPLICATE_FUNCTION,
    ERROR_EXTENSION_NOT_ENABLED,
    ERROR_UNKNOWN_EXTENSION,
    ERROR_CONFLICTING_EXTENSIONS,
    ERROR_UNDEFINED_VARIABLE,
    ERROR_NOT_A_FUNCTION,
    ERROR_INCORRECT_NUMBER_OF_ARGUMENTS,
    ERROR_UNEXPECTED_NUMBER_OF_PARAMETERS_IN_LAMBDA,
    ERROR_UNEXPECTED_TYPE_FOR_PARAMETER,
    ERROR_DUPLICATE_PARAMETER,
    ERROR_UNEXPECTED_TYPE_FOR_EXPRESSION,
    ERROR_UNEXPECTED_LAMBDA,
    ERROR_UNEXPECTED_TUPLE_LENGTH,
    ERROR_NOT_A_TUPLE,
    ERROR_TUPLE_INDEX_OUT_OF_BOUNDS,
    ERROR_NOT_A_RECORD,
    ERROR_UNEXPECTED_FIELD_ACCESS,
    ERROR_DUPLICATE_RECORD_FIELDS,
    ERROR_MISSING_RECORD_FIELDS,
    ERROR_UNEXPECTED_RECORD_FIELDS,
    ERROR_DUPLICATE_VARIANT_LABELS,
    ERROR_UNEXPECTED_VARIANT_LABEL,
    ERROR_NOT_A_LIST,
    ERROR_AMBIGUOUS_SUM_TYPE,
    ERROR_AMBIGUOUS_VARIANT_TYPE,
    ERROR_AMBIGUOUS_LIST_TYPE,
    ERROR_AMBIGUOUS_PANIC_TYPE,
    ERROR_AMBIGUOUS_THROW_TYPE,
    ERROR_AMBIGUOUS_REFERENCE_TYPE,
    ERROR_NONEXHAUSTIVE_MATCH_PATTERNS,
    ERROR_ILLEGAL_EMPTY_MATCHING,
    ERROR_UNEXPECTED_PATTERN_FOR_TYPE,
    ERROR_DUPLICATE_PATTERN_VARIABLE,
    ERROR_NOT_A_REFERENCE,
    ERROR_EXCEPTION_TYPE_NOT_DECLARED,
    ERROR_DUPLICATE_EXCEPTION_TYPE,
    ERROR_DUPLICATE_EXCEPTION_VARIANT,
    ERROR_UNEXPECTED_SUBTYPE,
    ERROR_UNDEFINED_TYPE_VARIABLE,
    ERROR_NOT_A_GENERIC_FUNCTION,
    ERROR_INCORRECT_NUMBER_OF_TYPE_ARGUMENTS,
    ERROR_OCCURS_CHECK_INFINITE_TYPE,
    ERROR_UNDEFINED_TYPE_ALIAS,
    ERROR_CYCLIC_TYPE_ALIAS,
    ERROR_DUPLICATE_TYPE_ALIAS,
}

impl fmt::Display for ErrorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error tag `{0}`")]
pub struct UnknownTag(pub String);

impl FromStr for ErrorTag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorTag::ALL
            .iter()
            .copied()
            .find(|tag| tag.as_str() == s)
            .ok_or_else(|| UnknownTag(s.to_string()))
    }
}

/// A type error: tag, human-readable message and location.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{tag}: {message}")]
pub struct Diagnostic {
    pub tag: ErrorTag,
    pub message: String,
    pub span: Span,
    pub notes: Vec<String>,
}

impl Diagnostic {
    pub fn new(tag: ErrorTag, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic { tag, message: message.into(), span, notes: Vec::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Diagnostic {
        self.notes.push(note.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse_back() {
        for &tag in ErrorTag::ALL {
            assert_eq!(tag.as_str().parse::<ErrorTag>(), Ok(tag));
        }
        assert!("ERROR_FROBNICATED".parse::<ErrorTag>().is_err());
    }
}
