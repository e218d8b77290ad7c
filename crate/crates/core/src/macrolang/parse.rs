use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Delimiter {
    /// `<?js ... ?>`
    Pure,
    /// `<$js ... $>`
    Dependency,
}

impl Delimiter {
    pub fn open(self) -> &'static str {
        match self {
            Delimiter::Pure => "<?js",
            Delimiter::Dependency => "<$js",
        }
    }

    pub fn close(self) -> &'static str {
        match self {
            Delimiter::Pure => "?>",
            Delimiter::Dependency => "$>",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Directive {
    Emit(String),
    Define(String, String),
    Use(String),
    Constant(String),
    Link(String),
    Global(String, String),
    UseGlobal(String),
}

impl Directive {
    pub fn keyword(&self) -> &'static str {
        match self {
            Directive::Emit(_) => "emit",
            Directive::Define(..) => "define",
            Directive::Use(_) => "use",
            Directive::Constant(_) => "constant",
            Directive::Link(_) => "link",
            Directive::Global(..) => "global",
            Directive::UseGlobal(_) => "useglobal",
        }
    }

    /// Renders the directive in canonical source form.
    pub fn to_source(&self) -> String {
        match self {
            Directive::Emit(s) => format!("emit {}", quote(s)),
            Directive::Define(n, s) => format!("define {n} {}", quote(s)),
            Directive::Use(n) => format!("use {n}"),
            Directive::Constant(n) => format!("constant {n}"),
            Directive::Link(s) => format!("link {}", quote(s)),
            Directive::Global(n, s) => format!("global {n} {}", quote(s)),
            Directive::UseGlobal(n) => format!("useglobal {n}"),
        }
    }
}

/// Quotes `s` as a DSL string literal.
pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpannedDirective {
    pub directive: Directive,
    /// Byte range of the directive source text, whitespace trimmed.
    pub span: Range<usize>,
    /// Byte range of the quoted string argument (quotes included), if any.
    pub string_span: Option<Range<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    Directive(SpannedDirective),
    Nested(MacroUnit),
}

/// One delimited macro unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroUnit {
    pub delimiter: Delimiter,
    /// Byte range including both delimiters.
    pub span: Range<usize>,
    pub depth: usize,
    pub items: Vec<Item>,
}

impl MacroUnit {
    /// The unit's own directives, excluding nested units.
    pub fn directives(&self) -> impl Iterator<Item = &SpannedDirective> {
        self.items.iter().filter_map(|i| match i {
            Item::Directive(d) => Some(d),
            Item::Nested(_) => None,
        })
    }

    pub fn nested(&self) -> impl Iterator<Item = &MacroUnit> {
        self.items.iter().filter_map(|i| match i {
            Item::Nested(u) => Some(u),
            Item::Directive(_) => None,
        })
    }

    pub fn has_nested(&self) -> bool {
        self.nested().next().is_some()
    }

    /// Visits this unit and every nested unit, outermost first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a MacroUnit)) {
        f(self);
        for n in self.nested() {
            n.walk(f);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Segment {
    Literal(Range<usize>),
    Unit(MacroUnit),
}

impl Segment {
    pub fn span(&self) -> Range<usize> {
        match self {
            Segment::Literal(r) => r.clone(),
            Segment::Unit(u) => u.span.clone(),
        }
    }
}

/// Visits every unit in `segments`, nested ones included.
pub fn walk_units<'a>(segments: &'a [Segment], mut f: impl FnMut(&'a MacroUnit)) {
    for s in segments {
        if let Segment::Unit(u) = s {
            u.walk(&mut f);
        }
    }
}

/// 1-based (line, column) of byte offset `pos`; columns count characters.
pub fn line_col(text: &str, pos: usize) -> (usize, usize) {
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let col = before[before.rfind('\n').map_or(0, |i| i + 1)..].chars().count() + 1;
    (line, col)
}

struct Parser<'a> {
    path: &'a str,
    text: &'a str,
    bytes: &'a [u8],
}

fn opener_at(bytes: &[u8], pos: usize) -> Option<Delimiter> {
    let rest = &bytes[pos..];
    let delim = if rest.starts_with(b"<?js") {
        Delimiter::Pure
    } else if rest.starts_with(b"<$js") {
        Delimiter::Dependency
    } else {
        return None;
    };
    match rest.get(4) {
        None => Some(delim),
        Some(c) if c.is_ascii_whitespace() => Some(delim),
        Some(b'?') if delim == Delimiter::Pure && rest.get(5) == Some(&b'>') => Some(delim),
        Some(b'$') if delim == Delimiter::Dependency && rest.get(5) == Some(&b'>') => Some(delim),
        _ => None,
    }
}

fn closer_at(bytes: &[u8], pos: usize) -> Option<Delimiter> {
    let rest = &bytes[pos..];
    if rest.starts_with(b"?>") {
        Some(Delimiter::Pure)
    } else if rest.starts_with(b"$>") {
        Some(Delimiter::Dependency)
    } else {
        None
    }
}

impl<'a> Parser<'a> {
    fn error(&self, pos: usize, message: impl Into<String>) -> Error {
        let (line, column) = line_col(self.text, pos);
        Error::Parse {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn segments(&self) -> Result<Vec<Segment>> {
        let mut out = Vec::new();
        let mut lit_start = 0;
        let mut pos = 0;
        while pos < self.bytes.len() {
            if let Some(delim) = opener_at(self.bytes, pos) {
                if lit_start < pos {
                    out.push(Segment::Literal(lit_start..pos));
                }
                let unit = self.unit(pos, delim, 0)?;
                pos = unit.span.end;
                lit_start = pos;
                out.push(Segment::Unit(unit));
            } else {
                pos += 1;
            }
        }
        if lit_start < self.bytes.len() {
            out.push(Segment::Literal(lit_start..self.bytes.len()));
        }
        Ok(out)
    }

    fn unit(&self, start: usize, delimiter: Delimiter, depth: usize) -> Result<MacroUnit> {
        let mut pos = start + 4;
        let mut items = Vec::new();
        loop {
            while pos < self.bytes.len() && (self.bytes[pos].is_ascii_whitespace() || self.bytes[pos] == b';') {
                pos += 1;
            }
            if pos >= self.bytes.len() {
                return Err(self.error(start, format!("unterminated `{}` unit", delimiter.open())));
            }
            if let Some(close) = closer_at(self.bytes, pos) {
                if close != delimiter {
                    return Err(self.error(
                        pos,
                        format!("`{}` closes a unit opened with `{}`", close.close(), delimiter.open()),
                    ));
                }
                return Ok(MacroUnit {
                    delimiter,
                    span: start..pos + 2,
                    depth,
                    items,
                });
            }
            if let Some(inner) = opener_at(self.bytes, pos) {
                let nested = self.unit(pos, inner, depth + 1)?;
                pos = nested.span.end;
                items.push(Item::Nested(nested));
                continue;
            }
            let d = self.directive(pos)?;
            pos = d.span.end;
            items.push(Item::Directive(d));
        }
    }

    /// Scans one directive starting at `start`, honoring string literals.
    fn directive(&self, start: usize) -> Result<SpannedDirective> {
        let mut pos = start;
        let mut tokens: Vec<(Token, Range<usize>)> = Vec::new();
        while pos < self.bytes.len() {
            let c = self.bytes[pos];
            if c == b';' || closer_at(self.bytes, pos).is_some() || opener_at(self.bytes, pos).is_some() {
                break;
            }
            if c.is_ascii_whitespace() {
                pos += 1;
                continue;
            }
            if c == b'"' {
                let (s, end) = self.string(pos)?;
                tokens.push((Token::Str(s), pos..end));
                pos = end;
                continue;
            }
            if c.is_ascii_alphabetic() || c == b'_' {
                let end = pos
                    + self.bytes[pos..]
                        .iter()
                        .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                        .count();
                tokens.push((Token::Word(self.text[pos..end].to_string()), pos..end));
                pos = end;
                continue;
            }
            return Err(self.error(pos, format!("unexpected character {:?}", self.text[pos..].chars().next().unwrap())));
        }
        let end = tokens.last().map_or(start, |t| t.1.end);
        let span = start..end;
        let err = |msg: &str| self.error(start, msg.to_string());
        let Some((Token::Word(kw), _)) = tokens.first() else {
            return Err(err("expected a directive keyword"));
        };
        let args = &tokens[1..];
        let word = |i: usize| match args.get(i) {
            Some((Token::Word(w), _)) => Ok(w.clone()),
            _ => Err(err(&format!("`{kw}` expects a name argument"))),
        };
        let string = |i: usize| match args.get(i) {
            Some((Token::Str(s), r)) => Ok((s.clone(), r.clone())),
            _ => Err(err(&format!("`{kw}` expects a string argument"))),
        };
        let (directive, string_span, arity) = match kw.as_str() {
            "emit" => {
                let (s, r) = string(0)?;
                (Directive::Emit(s), Some(r), 1)
            }
            "define" => {
                let (s, r) = string(1)?;
                (Directive::Define(word(0)?, s), Some(r), 2)
            }
            "use" => (Directive::Use(word(0)?), None, 1),
            "constant" => (Directive::Constant(word(0)?), None, 1),
            "link" => {
                let (s, r) = string(0)?;
                (Directive::Link(s), Some(r), 1)
            }
            "global" => {
                let (s, r) = string(1)?;
                (Directive::Global(word(0)?, s), Some(r), 2)
            }
            "useglobal" => (Directive::UseGlobal(word(0)?), None, 1),
            other => return Err(err(&format!("unknown directive `{other}`"))),
        };
        if args.len() != arity {
            return Err(err(&format!("`{kw}` takes {arity} argument(s), got {}", args.len())));
        }
        Ok(SpannedDirective {
            directive,
            span,
            string_span,
        })
    }

    fn string(&self, start: usize) -> Result<(String, usize)> {
        let mut out = String::new();
        let mut chars = self.text[start + 1..].char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' => return Ok((out, start + 1 + i + 1)),
                '\\' => match chars.next() {
                    Some((_, e @ ('"' | '\\'))) => out.push(e),
                    _ => return Err(self.error(start + 1 + i, "invalid escape in string")),
                },
                c => out.push(c),
            }
        }
        Err(self.error(start, "unterminated string"))
    }
}

enum Token {
    Word(String),
    Str(String),
}

/// Splits `text` into literal runs and macro units. `path` is only used in
/// error messages.
pub fn parse_macros(path: &str, text: &str) -> Result<Vec<Segment>> {
    Parser {
        path,
        text,
        bytes: text.as_bytes(),
    }
    .segments()
}

/// Decodes `bytes` as UTF-8 and parses it.
pub fn parse_bytes(path: &str, bytes: &[u8]) -> Result<Vec<Segment>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: 0,
        column: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    parse_macros(path, text)
}
