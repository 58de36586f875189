use std::fmt;

use serde::Serialize;

/// A region of source text. Lines and columns are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub file: String,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(file: &str, start: (u32, u32), end: (u32, u32)) -> Self {
        Span { file: file.to_string(), start_line: start.0, start_col: start.1, end_line: end.0, end_col: end.1 }
    }

    pub fn to(&self, other: &Span) -> Span {
        Span {
            file: self.file.clone(),
            start_line: self.start_line,
            start_col: self.start_col,
            end_line: other.end_line,
            end_col: other.end_col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        })
    }
}

/// The seven error kinds a well-typed program is guaranteed to avoid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Taxonomy {
    MethodNotUnderstood,
    FieldNotUnderstood,
    MethodNotAvailable,
    FieldNotAvailable,
    ParameterNotAvailable,
    FieldMisused,
    ParameterMisused,
}

impl Taxonomy {
    pub fn label(self) -> &'static str {
        match self {
            Taxonomy::MethodNotUnderstood => "Method not understood",
            Taxonomy::FieldNotUnderstood => "Field not understood",
            Taxonomy::MethodNotAvailable => "Method not available",
            Taxonomy::FieldNotAvailable => "Field not available",
            Taxonomy::ParameterNotAvailable => "Parameter not available",
            Taxonomy::FieldMisused => "Field misused",
            Taxonomy::ParameterMisused => "Parameter misused",
        }
    }
}

impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

macro_rules! codes {
    ($($name:ident),* $(,)?) => {
        /// Closed catalog of diagnostic codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum Code { $($name),* }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$name),*];

            pub fn as_str(self) -> &'static str {
                match self { $(Code::$name => stringify!($name)),* }
            }

            pub fn parse(s: &str) -> Option<Code> {
                match s { $(stringify!($name) => Some(Code::$name),)* _ => None }
            }
        }
    };
}

codes! {
    // parse and name resolution
    Io,
    SyntaxError,
    DuplicateName,
    UndeclaredName,
    EmptyEnum,
    EnumTypedField,
    MissingMainClass,
    InvalidMainClass,
    UnboundUsageVariable,
    UnfoldCycle,
    ArityMismatch,
    // typing, carrying a taxonomy label
    MethodNotUnderstood,
    FieldNotUnderstood,
    MethodNotAvailable,
    FieldNotAvailable,
    ParameterNotAvailable,
    FieldMisused,
    ParameterMisused,
    // typing, structural
    TypeMismatch,
    LinearValueDiscarded,
    BranchMismatch,
    LoopEnvMismatch,
    SwitchLabelMismatch,
    UnboundLoopLabel,
    NonTerminatedAfterUsage,
    EmptyBranch,
    UsageRecursionMismatch,
    MalformedRuntimeExpression,
    // configuration checking
    HeapMismatch,
    StackMismatch,
    ObjectEnvMismatch,
    StuckObject,
}

impl Code {
    pub fn taxonomy(self) -> Option<Taxonomy> {
        Some(match self {
            Code::MethodNotUnderstood => Taxonomy::MethodNotUnderstood,
            Code::FieldNotUnderstood => Taxonomy::FieldNotUnderstood,
            Code::MethodNotAvailable => Taxonomy::MethodNotAvailable,
            Code::FieldNotAvailable => Taxonomy::FieldNotAvailable,
            Code::ParameterNotAvailable => Taxonomy::ParameterNotAvailable,
            Code::FieldMisused => Taxonomy::FieldMisused,
            Code::ParameterMisused => Taxonomy::ParameterMisused,
            _ => return None,
        })
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Span,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, code, message: message.into(), span, notes: Vec::new() }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// One JSON record: code, taxonomy label, span, message.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            code: Code,
            taxonomy: Option<&'static str>,
            severity: Severity,
            span: &'a Span,
            message: &'a str,
        }
        serde_json::to_string(&Record {
            code: self.code,
            taxonomy: self.code.taxonomy().map(Taxonomy::label),
            severity: self.severity,
            span: &self.span,
            message: &self.message,
        })
        .expect("diagnostic records serialize")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}[{}]: {}",
            self.span.file, self.span.start_line, self.span.start_col, self.severity, self.code, self.message
        )
    }
}

/// Deterministic report order: by span, then by code.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| (&a.span, a.code, &a.message).cmp(&(&b.span, b.code, &b.message)));
}
