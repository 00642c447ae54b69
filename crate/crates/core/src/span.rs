use std::fmt;

/// A position in source text. Lines and columns are 1-based, columns count
/// characters (not bytes).
#[derive(Clone, Copy, Debug, Default, Eq, PartialEq, Ord, PartialOrd, Hash)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl Pos {
    pub const START: Pos = Pos { offset: 0, line: 1, col: 1 };
}

/// Half-open source range `[start, end)`.
///
/// Spans never take part in AST equality: two `Span`s always compare equal,
/// so syntax trees produced from differently formatted text compare by
/// structure alone. Use [`Span::same_range`] to compare locations.
#[derive(Clone, Copy, Debug, Default, Hash)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub const DUMMY: Span = Span { start: Pos::START, end: Pos::START };

    pub fn new(start: Pos, end: Pos) -> Span {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }

    pub fn line(&self) -> usize {
        self.start.line
    }

    pub fn col(&self) -> usize {
        self.start.col
    }

    pub fn same_range(&self, other: &Span) -> bool {
        self.start == other.start && self.end == other.end
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}
