use crate::schema::Comparator;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Name(String),
    Num(f64),
    Cmp(Comparator),
    /// `:-`
    If,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::Cmp(c) => format!("`{c}`"),
            Tok::If => "`:-`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// 1-based line and column (in characters).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, (Pos, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                let c = chars[i];
                advance(&mut i, &mut line, &mut col, c);
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let (tok, len) = match c {
            '{' => (Tok::LBrace, 1),
            '}' => (Tok::RBrace, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            ':' if peek == Some('-') => (Tok::If, 2),
            '=' if peek == Some('=') => (Tok::Cmp(Comparator::Eq), 2),
            '!' if peek == Some('=') => (Tok::Cmp(Comparator::Ne), 2),
            '<' if peek == Some('=') => (Tok::Cmp(Comparator::Le), 2),
            '<' => (Tok::Cmp(Comparator::Lt), 1),
            '>' if peek == Some('=') => (Tok::Cmp(Comparator::Ge), 2),
            '>' => (Tok::Cmp(Comparator::Gt), 1),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = chars[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                    .count();
                (Tok::Name(chars[i..i + len].iter().collect()), len)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let len = number_len(&chars[i..]);
                let lexeme: String = chars[i..i + len].iter().collect();
                match lexeme.parse::<f64>() {
                    Ok(x) if len > 0 && !x.is_nan() => (Tok::Num(x), len),
                    _ => return Err((pos, format!("malformed number `{lexeme}`"))),
                }
            }
            other => return Err((pos, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, pos });
        for _ in 0..len {
            let c = chars[i];
            advance(&mut i, &mut line, &mut col, c);
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, column: col },
    });
    Ok(out)
}

/// Length of `[+-]? (inf | digits ('.' digits)? ([eE] [+-]? digits)?)`. A
/// trailing `.` not followed by a digit is left for the rule terminator.
fn number_len(s: &[char]) -> usize {
    let mut n = 0;
    if matches!(s.first(), Some('-' | '+')) {
        n += 1;
    }
    if s[n..].starts_with(&['i', 'n', 'f']) {
        let end = n + 3;
        let continues = s
            .get(end)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
        return if continues { end + 1 } else { end };
    }
    let digits = |from: usize| s[from..].iter().take_while(|c| c.is_ascii_digit()).count();
    let int = digits(n);
    if int == 0 {
        return n.max(1);
    }
    n += int;
    if s.get(n) == Some(&'.') && s.get(n + 1).is_some_and(char::is_ascii_digit) {
        n += 1 + digits(n + 1);
    }
    if matches!(s.get(n), Some('e' | 'E')) {
        let mut m = n + 1;
        if matches!(s.get(m), Some('-' | '+')) {
            m += 1;
        }
        let exp = digits(m);
        if exp > 0 {
            n = m + exp;
        }
    }
    n
}
