use std::fmt;

use serde::{Deserialize, Serialize};

use super::iri::is_absolute;
use super::vocab::{RDF_LANG_STRING, XSD_STRING};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    lexical: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    datatype: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    /// An explicit `xsd:string` datatype is folded into the simple form.
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        Literal {
            lexical: lexical.into(),
            datatype: (datatype != XSD_STRING).then_some(datatype),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.into()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Datatype IRI after applying the RDF 1.1 defaults.
    pub fn effective_datatype(&self) -> &str {
        match (&self.datatype, &self.language) {
            (Some(dt), _) => dt,
            (None, Some(_)) => RDF_LANG_STRING,
            (None, None) => XSD_STRING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    Iri { value: String },
    Blank { value: String },
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TermError {
    #[error("IRI {0:?} is not absolute")]
    RelativeIri(String),
    #[error("subject must be an IRI or blank node")]
    LiteralSubject,
    #[error("predicate must be an IRI")]
    NonIriPredicate,
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Result<Self, TermError> {
        let value = value.into();
        if !is_absolute(&value) {
            return Err(TermError::RelativeIri(value));
        }
        Ok(Term::Iri { value })
    }

    /// Caller guarantees `value` is absolute.
    pub(crate) fn iri_unchecked(value: impl Into<String>) -> Self {
        Term::Iri { value: value.into() }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::Blank { value: label.into() }
    }

    pub fn literal(lit: Literal) -> Self {
        Term::Literal(lit)
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri { value } => Some(value),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank { .. })
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri { .. })
    }
}

fn escape_string(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0C}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c as u32 == 0x7F => {
                out.push_str(&format!("\\u{:04X}", c as u32));
            }
            c => out.push(c),
        }
    }
}

fn escape_iri(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '\u{00}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                out.push_str(&format!("\\u{:04X}", c as u32));
            }
            c => out.push(c),
        }
    }
}

/// N-Triples rendering.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        match self {
            Term::Iri { value } => {
                out.push('<');
                escape_iri(value, &mut out);
                out.push('>');
            }
            Term::Blank { value } => {
                out.push_str("_:");
                out.push_str(value);
            }
            Term::Literal(lit) => {
                out.push('"');
                escape_string(&lit.lexical, &mut out);
                out.push('"');
                if let Some(lang) = &lit.language {
                    out.push('@');
                    out.push_str(lang);
                } else if let Some(dt) = &lit.datatype {
                    out.push_str("^^<");
                    escape_iri(dt, &mut out);
                    out.push('>');
                }
            }
        }
        f.write_str(&out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Self, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralSubject);
        }
        if !predicate.is_iri() {
            return Err(TermError::NonIriPredicate);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    /// Predicate IRI string.
    pub fn predicate_iri(&self) -> &str {
        self.predicate.as_iri().expect("predicate is always an IRI")
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub(crate) fn map_blanks(&self, mut f: impl FnMut(&str) -> String) -> Triple {
        let mut remap = |t: &Term| match t {
            Term::Blank { value } => Term::Blank { value: f(value) },
            other => other.clone(),
        };
        Triple {
            subject: remap(&self.subject),
            predicate: self.predicate.clone(),
            object: remap(&self.object),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
