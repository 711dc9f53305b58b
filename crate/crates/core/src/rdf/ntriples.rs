//! Line-oriented N-Triples parser with strict and lenient modes.

use super::iri::is_absolute;
use super::lex::{read_blank_label, read_iriref, read_langtag, read_string, Cursor, LexError, LexResult};
use super::parse::{BlankLabels, ParseError, ParseMode, RawParse};
use super::term::{Literal, Term, Triple};

fn absolute_iri(cur: &mut Cursor<'_>) -> LexResult<String> {
    let pos = cur.pos();
    let iri = read_iriref(cur)?;
    if !is_absolute(&iri) {
        return Err(LexError::new(pos, format!("relative IRI <{iri}> not allowed in N-Triples")));
    }
    Ok(iri)
}

fn subject(cur: &mut Cursor<'_>, blanks: &mut BlankLabels) -> LexResult<Term> {
    match cur.peek() {
        Some('<') => Ok(Term::iri_unchecked(absolute_iri(cur)?)),
        Some('_') if cur.rest().starts_with("_:") => {
            cur.eat_str("_:");
            Ok(blanks.named(&read_blank_label(cur)?))
        }
        _ => Err(cur.unexpected("subject IRI or blank node")),
    }
}

fn object(cur: &mut Cursor<'_>, blanks: &mut BlankLabels) -> LexResult<Term> {
    match cur.peek() {
        Some('"') => {
            let lexical = read_string(cur, false)?;
            if cur.eat_str("^^") {
                let dt = absolute_iri(cur)?;
                Ok(Term::literal(Literal::typed(lexical, dt)))
            } else if cur.eat('@') {
                let lang = read_langtag(cur)?;
                Ok(Term::literal(Literal::lang(lexical, lang)))
            } else {
                Ok(Term::literal(Literal::simple(lexical)))
            }
        }
        Some('<' | '_') => subject(cur, blanks),
        _ => Err(cur.unexpected("object term")),
    }
}

/// Parses one line. `Ok(None)` for blank and comment-only lines.
fn line(text: &str, blanks: &mut BlankLabels) -> LexResult<Option<Triple>> {
    let mut cur = Cursor::new(text);
    cur.skip_inline_ws();
    if cur.eof() || cur.peek() == Some('#') {
        return Ok(None);
    }
    let s = subject(&mut cur, blanks)?;
    cur.skip_inline_ws();
    let p = match cur.peek() {
        Some('<') => Term::iri_unchecked(absolute_iri(&mut cur)?),
        _ => return Err(cur.unexpected("predicate IRI")),
    };
    cur.skip_inline_ws();
    let o = object(&mut cur, blanks)?;
    cur.skip_inline_ws();
    cur.expect('.')?;
    cur.skip_inline_ws();
    if !(cur.eof() || cur.peek() == Some('#')) {
        return Err(cur.unexpected("end of line"));
    }
    let triple = Triple::new(s, p, o).expect("grammar guarantees term positions");
    Ok(Some(triple))
}

pub(crate) fn parse(text: &str, mode: ParseMode) -> Result<RawParse, ParseError> {
    let mut blanks = BlankLabels::default();
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw_line) in text.split('\n').enumerate() {
        let raw_line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        // labels introduced on a rejected line must not consume sequence numbers
        let checkpoint = blanks.clone();
        match line(raw_line, &mut blanks) {
            Ok(Some(t)) => triples.push(t),
            Ok(None) => {}
            Err(e) => {
                blanks = checkpoint;
                let column = raw_line[..e.pos.min(raw_line.len())].chars().count() + 1;
                let err = ParseError {
                    line: idx + 1,
                    column,
                    reason: e.reason,
                };
                match mode {
                    ParseMode::Strict => return Err(err),
                    ParseMode::Lenient => errors.push(err),
                }
            }
        }
    }
    Ok(RawParse { triples, errors })
}
