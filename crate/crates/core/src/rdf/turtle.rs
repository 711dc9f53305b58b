//! Turtle core grammar: prefixes, base, predicate/object lists, blank node
//! property lists, collections, and literal shorthands.

use std::collections::HashMap;

use super::iri::{is_absolute, resolve};
use super::lex::{
    is_pn_chars, is_pn_chars_base, is_pn_chars_u, read_blank_label, read_iriref, read_langtag,
    read_string, Cursor, LexError, LexResult, LineIndex,
};
use super::parse::{BlankLabels, ParseError, ParseMode, RawParse};
use super::term::{Literal, Term, Triple};
use super::vocab::{RDF_FIRST, RDF_NIL, RDF_REST, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

struct Parser<'a> {
    cur: Cursor<'a>,
    base: Option<String>,
    prefixes: HashMap<String, String>,
    blanks: BlankLabels,
    pending: Vec<Triple>,
}

fn is_plx_escape(c: char) -> bool {
    matches!(
        c,
        '_' | '~' | '.' | '-' | '!' | '$' | '&' | '\'' | '(' | ')' | '*' | '+' | ',' | ';' | '='
            | '/' | '?' | '#' | '@' | '%'
    )
}

impl<'a> Parser<'a> {
    fn ws(&mut self) {
        self.cur.skip_ws_and_comments();
    }

    fn emit(&mut self, s: Term, p: Term, o: Term) {
        let t = Triple::new(s, p, o).expect("grammar guarantees term positions");
        self.pending.push(t);
    }

    fn resolve_iri(&self, pos: usize, iri: String) -> LexResult<String> {
        if is_absolute(&iri) {
            return Ok(iri);
        }
        match &self.base {
            Some(base) => Ok(resolve(base, &iri)),
            None => Err(LexError::new(pos, format!("unresolvable relative IRI <{iri}> without base"))),
        }
    }

    fn iriref(&mut self) -> LexResult<String> {
        let pos = self.cur.pos();
        let raw = read_iriref(&mut self.cur)?;
        self.resolve_iri(pos, raw)
    }

    fn keyword_ahead(&self, word: &str) -> bool {
        let rest = self.cur.rest();
        rest.len() >= word.len()
            && rest[..word.len()].eq_ignore_ascii_case(word)
            && rest[word.len()..]
                .chars()
                .next()
                .is_none_or(|c| c.is_whitespace() || c == '<' || c == '#')
    }

    fn exact_keyword_ahead(&self, word: &str) -> bool {
        let rest = self.cur.rest();
        rest.starts_with(word)
            && rest[word.len()..]
                .chars()
                .next()
                .is_none_or(|c| !(is_pn_chars(c) || c == ':'))
    }

    /// `PN_PREFIX? ':'`; returns the prefix without the colon.
    fn pname_ns(&mut self) -> LexResult<String> {
        let start = self.cur.pos();
        if self.cur.peek().is_some_and(is_pn_chars_base) {
            self.cur.bump();
            loop {
                match self.cur.peek() {
                    Some(c) if is_pn_chars(c) => {
                        self.cur.bump();
                    }
                    Some('.') => {
                        let mut probe = self.cur.clone();
                        while probe.peek() == Some('.') {
                            probe.bump();
                        }
                        if probe.peek().is_some_and(is_pn_chars) {
                            self.cur.set_pos(probe.pos());
                        } else {
                            break;
                        }
                    }
                    _ => break,
                }
            }
        }
        let prefix = self.cur.slice(start).to_string();
        if !self.cur.eat(':') {
            self.cur.set_pos(start);
            return Err(self.cur.unexpected("prefixed name"));
        }
        Ok(prefix)
    }

    fn pn_local(&mut self) -> LexResult<String> {
        let mut out = String::new();
        let mut last_significant = 0usize;
        let mut first = true;
        loop {
            let Some(c) = self.cur.peek() else { break };
            let allowed = if first {
                is_pn_chars_u(c) || c == ':' || c.is_ascii_digit() || c == '%' || c == '\\'
            } else {
                is_pn_chars(c) || c == '.' || c == ':' || c == '%' || c == '\\'
            };
            if !allowed {
                break;
            }
            let pos = self.cur.pos();
            match c {
                '%' => {
                    self.cur.bump();
                    for _ in 0..2 {
                        match self.cur.bump() {
                            Some(h) if h.is_ascii_hexdigit() => {}
                            _ => return Err(LexError::new(pos, "invalid percent escape in local name")),
                        }
                    }
                    out.push_str(self.cur.slice(pos));
                }
                '\\' => {
                    self.cur.bump();
                    match self.cur.bump() {
                        Some(e) if is_plx_escape(e) => out.push(e),
                        _ => return Err(LexError::new(pos, "invalid escape in local name")),
                    }
                }
                c => {
                    self.cur.bump();
                    out.push(c);
                }
            }
            if c != '.' {
                last_significant = out.len();
            }
            first = false;
        }
        // trailing dots belong to the statement terminator
        let trailing = out.len() - last_significant;
        if trailing > 0 {
            out.truncate(last_significant);
            self.cur.set_pos(self.cur.pos() - trailing);
        }
        Ok(out)
    }

    fn prefixed_name(&mut self) -> LexResult<String> {
        let pos = self.cur.pos();
        let prefix = self.pname_ns()?;
        let local = self.pn_local()?;
        match self.prefixes.get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(LexError::new(pos, format!("undeclared prefix '{prefix}:'"))),
        }
    }

    fn iri(&mut self) -> LexResult<String> {
        if self.cur.peek() == Some('<') {
            self.iriref()
        } else {
            self.prefixed_name()
        }
    }

    fn directive(&mut self) -> LexResult<bool> {
        let sparql_style;
        let is_prefix;
        if self.cur.rest().starts_with("@prefix") {
            self.cur.eat_str("@prefix");
            sparql_style = false;
            is_prefix = true;
        } else if self.cur.rest().starts_with("@base") {
            self.cur.eat_str("@base");
            sparql_style = false;
            is_prefix = false;
        } else if self.keyword_ahead("PREFIX") {
            self.cur.set_pos(self.cur.pos() + "PREFIX".len());
            sparql_style = true;
            is_prefix = true;
        } else if self.keyword_ahead("BASE") {
            self.cur.set_pos(self.cur.pos() + "BASE".len());
            sparql_style = true;
            is_prefix = false;
        } else {
            return Ok(false);
        }
        self.ws();
        if is_prefix {
            let prefix = self.pname_ns()?;
            self.ws();
            let ns = self.iriref()?;
            if !sparql_style {
                self.ws();
                self.cur.expect('.')?;
            }
            self.prefixes.insert(prefix, ns);
        } else {
            let b = self.iriref()?;
            if !sparql_style {
                self.ws();
                self.cur.expect('.')?;
            }
            self.base = Some(b);
        }
        Ok(true)
    }

    fn blank_node_label(&mut self) -> LexResult<Term> {
        self.cur.eat_str("_:");
        let label = read_blank_label(&mut self.cur)?;
        Ok(self.blanks.named(&label))
    }

    /// `[` already peeked: either ANON or a property list.
    fn bracket(&mut self) -> LexResult<(Term, bool)> {
        self.cur.expect('[')?;
        self.ws();
        let node = self.blanks.fresh();
        if self.cur.eat(']') {
            return Ok((node, false));
        }
        self.predicate_object_list(&node)?;
        self.ws();
        self.cur.expect(']')?;
        Ok((node, true))
    }

    fn collection(&mut self) -> LexResult<Term> {
        self.cur.expect('(')?;
        let nil = Term::iri_unchecked(RDF_NIL);
        let mut head: Option<Term> = None;
        let mut prev: Option<Term> = None;
        loop {
            self.ws();
            if self.cur.eat(')') {
                break;
            }
            if self.cur.eof() {
                return Err(self.cur.unexpected("')'"));
            }
            let item = self.object()?;
            let node = self.blanks.fresh();
            if let Some(p) = prev.take() {
                self.emit(p, Term::iri_unchecked(RDF_REST), node.clone());
            }
            self.emit(node.clone(), Term::iri_unchecked(RDF_FIRST), item);
            if head.is_none() {
                head = Some(node.clone());
            }
            prev = Some(node);
        }
        match (head, prev) {
            (Some(h), Some(last)) => {
                self.emit(last, Term::iri_unchecked(RDF_REST), nil);
                Ok(h)
            }
            _ => Ok(nil),
        }
    }

    fn numeric(&mut self) -> LexResult<Option<Literal>> {
        let start = self.cur.pos();
        let bytes = self.cur.rest().as_bytes();
        let mut i = 0;
        if matches!(bytes.first(), Some(b'+' | b'-')) {
            i += 1;
        }
        let int_start = i;
        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
            i += 1;
        }
        let int_digits = i - int_start;
        let mut frac_digits = 0;
        let mut has_dot = false;
        if bytes.get(i) == Some(&b'.') {
            let mut j = i + 1;
            while bytes.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            let digits = j - i - 1;
            let exp_follows = matches!(bytes.get(j), Some(b'e' | b'E'));
            if digits > 0 || (exp_follows && int_digits > 0) {
                has_dot = true;
                frac_digits = digits;
                i = j;
            }
        }
        if int_digits == 0 && frac_digits == 0 {
            return Ok(None);
        }
        let mut has_exp = false;
        if matches!(bytes.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            let exp_start = j;
            while bytes.get(j).is_some_and(u8::is_ascii_digit) {
                j += 1;
            }
            if j == exp_start {
                return Err(LexError::new(start + i, "malformed exponent"));
            }
            has_exp = true;
            i = j;
        }
        self.cur.set_pos(start + i);
        let lexical = self.cur.slice(start).to_string();
        let dt = if has_exp {
            XSD_DOUBLE
        } else if has_dot {
            XSD_DECIMAL
        } else {
            XSD_INTEGER
        };
        Ok(Some(Literal::typed(lexical, dt)))
    }

    fn rdf_literal(&mut self) -> LexResult<Term> {
        let lexical = read_string(&mut self.cur, true)?;
        if self.cur.eat('@') {
            let lang = read_langtag(&mut self.cur)?;
            Ok(Term::literal(Literal::lang(lexical, lang)))
        } else if self.cur.eat_str("^^") {
            let dt = self.iri()?;
            Ok(Term::literal(Literal::typed(lexical, dt)))
        } else {
            Ok(Term::literal(Literal::simple(lexical)))
        }
    }

    fn object(&mut self) -> LexResult<Term> {
        match self.cur.peek() {
            Some('<') => Ok(Term::iri_unchecked(self.iriref()?)),
            Some('_') if self.cur.rest().starts_with("_:") => self.blank_node_label(),
            Some('[') => Ok(self.bracket()?.0),
            Some('(') => self.collection(),
            Some('"' | '\'') => self.rdf_literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => match self.numeric()? {
                Some(lit) => Ok(Term::literal(lit)),
                None => Err(self.cur.unexpected("object term")),
            },
            Some(_) if self.exact_keyword_ahead("true") => {
                self.cur.eat_str("true");
                Ok(Term::literal(Literal::typed("true", XSD_BOOLEAN)))
            }
            Some(_) if self.exact_keyword_ahead("false") => {
                self.cur.eat_str("false");
                Ok(Term::literal(Literal::typed("false", XSD_BOOLEAN)))
            }
            Some(_) => Ok(Term::iri_unchecked(self.prefixed_name()?)),
            None => Err(self.cur.unexpected("object term")),
        }
    }

    fn verb(&mut self) -> LexResult<Term> {
        if self.cur.peek() == Some('a')
            && self
                .cur
                .peek_nth(1)
                .is_none_or(|c| c.is_whitespace() || matches!(c, '<' | '"' | '\'' | '[' | '(' | '_' | '#'))
        {
            self.cur.bump();
            return Ok(Term::iri_unchecked(RDF_TYPE));
        }
        match self.cur.peek() {
            Some('<') => Ok(Term::iri_unchecked(self.iriref()?)),
            Some(c) if is_pn_chars_base(c) || c == ':' => Ok(Term::iri_unchecked(self.prefixed_name()?)),
            _ => Err(self.cur.unexpected("predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> LexResult<()> {
        loop {
            self.ws();
            let o = self.object()?;
            self.emit(subject.clone(), predicate.clone(), o);
            self.ws();
            if !self.cur.eat(',') {
                return Ok(());
            }
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> LexResult<()> {
        loop {
            self.ws();
            let p = self.verb()?;
            self.object_list(subject, &p)?;
            self.ws();
            if !self.cur.eat(';') {
                return Ok(());
            }
            loop {
                self.ws();
                if !self.cur.eat(';') {
                    break;
                }
            }
            self.ws();
            if matches!(self.cur.peek(), Some('.' | ']') | None) {
                return Ok(());
            }
        }
    }

    fn triples(&mut self) -> LexResult<()> {
        match self.cur.peek() {
            Some('[') => {
                let (node, had_props) = self.bracket()?;
                self.ws();
                if had_props && self.cur.peek() == Some('.') {
                    return Ok(());
                }
                self.predicate_object_list(&node)
            }
            Some('(') => {
                let head = self.collection()?;
                self.predicate_object_list(&head)
            }
            Some('_') if self.cur.rest().starts_with("_:") => {
                let s = self.blank_node_label()?;
                self.predicate_object_list(&s)
            }
            Some('<') => {
                let s = Term::iri_unchecked(self.iriref()?);
                self.predicate_object_list(&s)
            }
            Some(c) if is_pn_chars_base(c) || c == ':' => {
                let s = Term::iri_unchecked(self.prefixed_name()?);
                self.predicate_object_list(&s)
            }
            _ => Err(self.cur.unexpected("subject")),
        }
    }

    fn statement(&mut self) -> LexResult<()> {
        if self.directive()? {
            return Ok(());
        }
        self.triples()?;
        self.ws();
        self.cur.expect('.')
    }

    /// Skip past the next statement terminator, stepping over strings and IRIs.
    fn recover(&mut self, from: usize, line_oriented: bool) {
        self.cur.set_pos(from);
        if line_oriented {
            while let Some(c) = self.cur.bump() {
                if c == '\n' {
                    return;
                }
            }
            return;
        }
        while let Some(c) = self.cur.peek() {
            match c {
                '"' | '\'' => {
                    if read_string(&mut self.cur, true).is_err() {
                        // unterminated: resume at the next line
                        while let Some(c) = self.cur.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    }
                }
                '<' => {
                    self.cur.bump();
                    while let Some(c) = self.cur.peek() {
                        if c == '>' || c.is_whitespace() {
                            break;
                        }
                        self.cur.bump();
                    }
                    self.cur.eat('>');
                }
                '#' => self.ws(),
                '.' => {
                    self.cur.bump();
                    if self.cur.peek().is_none_or(|c| c.is_whitespace() || c == '#') {
                        return;
                    }
                }
                _ => {
                    self.cur.bump();
                }
            }
        }
    }
}

pub(crate) fn parse(text: &str, base: Option<&str>, mode: ParseMode) -> Result<RawParse, ParseError> {
    let lines = LineIndex::new(text);
    let mut p = Parser {
        cur: Cursor::new(text),
        base: base.map(str::to_string),
        prefixes: HashMap::new(),
        blanks: BlankLabels::default(),
        pending: Vec::new(),
    };
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    loop {
        p.ws();
        if p.cur.eof() {
            break;
        }
        let start = p.cur.pos();
        let checkpoint = p.blanks.clone();
        let line_oriented = p.keyword_ahead("PREFIX") || p.keyword_ahead("BASE");
        match p.statement() {
            Ok(()) => triples.append(&mut p.pending),
            Err(e) => {
                let (line, column) = lines.locate(text, e.pos);
                let err = ParseError {
                    line,
                    column,
                    reason: e.reason,
                };
                if mode == ParseMode::Strict {
                    return Err(err);
                }
                errors.push(err);
                p.pending.clear();
                p.blanks = checkpoint;
                p.recover(start, line_oriented);
            }
        }
    }
    Ok(RawParse { triples, errors })
}
