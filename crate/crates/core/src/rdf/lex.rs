//! Lexical productions shared by the N-Triples and Turtle parsers.

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LexError {
    pub pos: usize,
    pub reason: String,
}

impl LexError {
    pub fn new(pos: usize, reason: impl Into<String>) -> Self {
        LexError {
            pos,
            reason: reason.into(),
        }
    }
}

pub(crate) type LexResult<T> = Result<T, LexError>;

#[derive(Clone)]
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn set_pos(&mut self, pos: usize) {
        self.pos = pos;
    }

    pub fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub fn slice(&self, from: usize) -> &'a str {
        &self.src[from..self.pos]
    }

    pub fn eof(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    pub fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub fn eat_str(&mut self, s: &str) -> bool {
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: char) -> LexResult<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{c}'")))
        }
    }

    pub fn unexpected(&self, wanted: &str) -> LexError {
        match self.peek() {
            Some(c) => LexError::new(self.pos, format!("expected {wanted}, found {c:?}")),
            None => LexError::new(self.pos, format!("expected {wanted}, found end of input")),
        }
    }

    /// Skips spaces and tabs only.
    pub fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.pos += 1;
        }
    }

    /// Skips all whitespace and `#` comments.
    pub fn skip_ws_and_comments(&mut self) {
        loop {
            match self.peek() {
                Some(' ' | '\t' | '\n' | '\r') => self.pos += 1,
                Some('#') => {
                    while let Some(c) = self.peek() {
                        if c == '\n' || c == '\r' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }
}

/// Maps byte offsets to 1-based line and column (in characters).
pub(crate) struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    pub fn locate(&self, src: &str, pos: usize) -> (usize, usize) {
        let line = match self.starts.binary_search(&pos) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.starts[line];
        let pos = pos.min(src.len());
        let column = src[start..pos].chars().count() + 1;
        (line + 1, column)
    }
}

fn hex_value(cur: &mut Cursor<'_>, digits: usize) -> LexResult<char> {
    let start = cur.pos();
    let mut value: u32 = 0;
    for _ in 0..digits {
        let c = cur.bump().ok_or_else(|| LexError::new(start, "truncated unicode escape"))?;
        let d = c
            .to_digit(16)
            .ok_or_else(|| LexError::new(start, format!("invalid hex digit {c:?} in unicode escape")))?;
        value = value * 16 + d;
    }
    char::from_u32(value).ok_or_else(|| LexError::new(start, format!("invalid code point U+{value:X}")))
}

/// After a backslash: `uXXXX` or `UXXXXXXXX`.
fn read_uchar(cur: &mut Cursor<'_>) -> LexResult<char> {
    match cur.bump() {
        Some('u') => hex_value(cur, 4),
        Some('U') => hex_value(cur, 8),
        _ => Err(LexError::new(cur.pos(), "invalid escape sequence")),
    }
}

/// `<...>` with UCHAR escapes; returns the unescaped IRI text (possibly relative).
pub(crate) fn read_iriref(cur: &mut Cursor<'_>) -> LexResult<String> {
    let start = cur.pos();
    cur.expect('<')?;
    let mut out = String::new();
    loop {
        let c = cur
            .bump()
            .ok_or_else(|| LexError::new(start, "unterminated IRI"))?;
        match c {
            '>' => return Ok(out),
            '\\' => {
                let ch = read_uchar(cur)?;
                out.push(ch);
            }
            '\u{00}'..='\u{20}' | '<' | '"' | '{' | '}' | '|' | '^' | '`' => {
                return Err(LexError::new(
                    cur.pos() - c.len_utf8(),
                    format!("character {c:?} not allowed in IRI"),
                ));
            }
            c => out.push(c),
        }
    }
}

fn read_echar(cur: &mut Cursor<'_>) -> LexResult<char> {
    let pos = cur.pos();
    match cur.peek() {
        Some('u' | 'U') => read_uchar(cur),
        Some(c) => {
            cur.bump();
            match c {
                't' => Ok('\t'),
                'b' => Ok('\u{08}'),
                'n' => Ok('\n'),
                'r' => Ok('\r'),
                'f' => Ok('\u{0C}'),
                '"' => Ok('"'),
                '\'' => Ok('\''),
                '\\' => Ok('\\'),
                other => Err(LexError::new(pos, format!("invalid escape \\{other}"))),
            }
        }
        None => Err(LexError::new(pos, "truncated escape")),
    }
}

/// String literal body. `allow_turtle_forms` enables single quotes and
/// triple-quoted long strings.
pub(crate) fn read_string(cur: &mut Cursor<'_>, allow_turtle_forms: bool) -> LexResult<String> {
    let start = cur.pos();
    let quote = match cur.peek() {
        Some('"') => '"',
        Some('\'') if allow_turtle_forms => '\'',
        _ => return Err(cur.unexpected("string literal")),
    };
    let long_delim: String = std::iter::repeat_n(quote, 3).collect();
    let long = allow_turtle_forms && cur.rest().starts_with(&long_delim);
    let mut out = String::new();
    if long {
        cur.eat_str(&long_delim);
        loop {
            if cur.eat_str(&long_delim) {
                // up to two extra quotes may close the string content
                while cur.peek() == Some(quote) {
                    out.push(quote);
                    cur.bump();
                }
                return Ok(out);
            }
            match cur.bump() {
                None => return Err(LexError::new(start, "unterminated long string")),
                Some('\\') => out.push(read_echar(cur)?),
                Some(c) => out.push(c),
            }
        }
    }
    cur.bump();
    loop {
        match cur.bump() {
            None | Some('\n') | Some('\r') => {
                return Err(LexError::new(start, "unterminated string literal"));
            }
            Some('\\') => out.push(read_echar(cur)?),
            Some(c) if c == quote => return Ok(out),
            Some(c) => out.push(c),
        }
    }
}

/// After `@`: `[a-zA-Z]+ ('-' [a-zA-Z0-9]+)*`.
pub(crate) fn read_langtag(cur: &mut Cursor<'_>) -> LexResult<String> {
    let start = cur.pos();
    while cur.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
        cur.bump();
    }
    if cur.pos() == start {
        return Err(LexError::new(start, "empty language tag"));
    }
    while cur.peek() == Some('-') {
        cur.bump();
        let seg = cur.pos();
        while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
            cur.bump();
        }
        if cur.pos() == seg {
            return Err(LexError::new(seg, "empty language subtag"));
        }
    }
    Ok(cur.slice(start).to_string())
}

pub(crate) fn is_pn_chars_base(c: char) -> bool {
    matches!(c,
        'A'..='Z' | 'a'..='z'
        | '\u{00C0}'..='\u{00D6}' | '\u{00D8}'..='\u{00F6}' | '\u{00F8}'..='\u{02FF}'
        | '\u{0370}'..='\u{037D}' | '\u{037F}'..='\u{1FFF}' | '\u{200C}'..='\u{200D}'
        | '\u{2070}'..='\u{218F}' | '\u{2C00}'..='\u{2FEF}' | '\u{3001}'..='\u{D7FF}'
        | '\u{F900}'..='\u{FDCF}' | '\u{FDF0}'..='\u{FFFD}' | '\u{10000}'..='\u{EFFFF}')
}

pub(crate) fn is_pn_chars_u(c: char) -> bool {
    is_pn_chars_base(c) || c == '_'
}

pub(crate) fn is_pn_chars(c: char) -> bool {
    is_pn_chars_u(c)
        || c == '-'
        || c.is_ascii_digit()
        || c == '\u{00B7}'
        || ('\u{0300}'..='\u{036F}').contains(&c)
        || ('\u{203F}'..='\u{2040}').contains(&c)
}

/// After `_:`: the blank node label.
pub(crate) fn read_blank_label(cur: &mut Cursor<'_>) -> LexResult<String> {
    let start = cur.pos();
    match cur.peek() {
        Some(c) if is_pn_chars_u(c) || c.is_ascii_digit() => {
            cur.bump();
        }
        _ => return Err(cur.unexpected("blank node label")),
    }
    loop {
        match cur.peek() {
            Some(c) if is_pn_chars(c) => {
                cur.bump();
            }
            Some('.') => {
                // a dot is only part of the label when followed by more label chars
                let after = cur.peek_nth(1);
                if after.is_some_and(|c| is_pn_chars(c) || c == '.') {
                    let save = cur.pos();
                    cur.bump();
                    let mut probe = cur.clone();
                    while probe.peek() == Some('.') {
                        probe.bump();
                    }
                    if probe.peek().is_some_and(is_pn_chars) {
                        continue;
                    }
                    cur.set_pos(save);
                }
                break;
            }
            _ => break,
        }
    }
    Ok(cur.slice(start).to_string())
}
