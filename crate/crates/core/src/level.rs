//! ASCII maps and JSON level sets.
//!
//! One character encodes one cell. Lowercase letters are object sprites,
//! uppercase letters and digits are word sprites and `_` is an empty cell.

use std::collections::HashSet;
use std::fmt;

use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("unknown map character {ch:?} at row {row}, column {col}")]
    UnknownCharacter { ch: char, row: usize, col: usize },
    #[error("row {row} has a different length from row 0")]
    RaggedRows { row: usize },
    #[error("map is empty")]
    EmptyMap,
    #[error("level set does not match the schema at {path}")]
    Schema { path: String },
    #[error("level {level_id:?} failed to parse: {source}")]
    LevelParse {
        level_id: String,
        #[source]
        source: Box<LevelError>,
    },
    #[error("duplicate level id {0:?}")]
    DuplicateId(String),
}

/// The closed noun vocabulary shared by objects and noun words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Noun {
    Baba,
    Wall,
    Flag,
    Rock,
    Water,
    Skull,
    Grass,
    Lava,
}

impl Noun {
    pub const ALL: [Noun; 8] = [
        Noun::Baba,
        Noun::Wall,
        Noun::Flag,
        Noun::Rock,
        Noun::Water,
        Noun::Skull,
        Noun::Grass,
        Noun::Lava,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Noun::Baba => "BABA",
            Noun::Wall => "WALL",
            Noun::Flag => "FLAG",
            Noun::Rock => "ROCK",
            Noun::Water => "WATER",
            Noun::Skull => "SKULL",
            Noun::Grass => "GRASS",
            Noun::Lava => "LAVA",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    fn object_code(self) -> char {
        match self {
            Noun::Baba => 'b',
            Noun::Wall => 'w',
            Noun::Flag => 'f',
            Noun::Rock => 'r',
            Noun::Water => 'a',
            Noun::Skull => 's',
            Noun::Grass => 'g',
            Noun::Lava => 'l',
        }
    }
}

impl fmt::Display for Noun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Property keywords a rule can assign to a noun.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    You,
    Win,
    Push,
    Stop,
    Move,
    Kill,
    Sink,
    Hot,
    Melt,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::You,
        Property::Win,
        Property::Push,
        Property::Stop,
        Property::Move,
        Property::Kill,
        Property::Sink,
        Property::Hot,
        Property::Melt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::You => "YOU",
            Property::Win => "WIN",
            Property::Push => "PUSH",
            Property::Stop => "STOP",
            Property::Move => "MOVE",
            Property::Kill => "KILL",
            Property::Sink => "SINK",
            Property::Hot => "HOT",
            Property::Melt => "MELT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Word {
    Noun(Noun),
    Is,
    Property(Property),
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::Noun(n) => n.fmt(f),
            Word::Is => f.write_str("IS"),
            Word::Property(p) => p.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpriteKind {
    Object(Noun),
    Word(Word),
}

impl SpriteKind {
    /// Looks up a cell code. `_` (empty) and unknown characters return `None`.
    pub fn from_code(ch: char) -> Option<SpriteKind> {
        use Property as P;
        let kind = match ch {
            'b' => SpriteKind::Object(Noun::Baba),
            'w' => SpriteKind::Object(Noun::Wall),
            'f' => SpriteKind::Object(Noun::Flag),
            'r' => SpriteKind::Object(Noun::Rock),
            'a' => SpriteKind::Object(Noun::Water),
            's' => SpriteKind::Object(Noun::Skull),
            'g' => SpriteKind::Object(Noun::Grass),
            'l' => SpriteKind::Object(Noun::Lava),
            'B' => SpriteKind::Word(Word::Noun(Noun::Baba)),
            'W' => SpriteKind::Word(Word::Noun(Noun::Wall)),
            'F' => SpriteKind::Word(Word::Noun(Noun::Flag)),
            'R' => SpriteKind::Word(Word::Noun(Noun::Rock)),
            'A' => SpriteKind::Word(Word::Noun(Noun::Water)),
            'S' => SpriteKind::Word(Word::Noun(Noun::Skull)),
            'G' => SpriteKind::Word(Word::Noun(Noun::Grass)),
            'L' => SpriteKind::Word(Word::Noun(Noun::Lava)),
            '1' => SpriteKind::Word(Word::Is),
            'U' => SpriteKind::Word(Word::Property(P::You)),
            'N' => SpriteKind::Word(Word::Property(P::Win)),
            'P' => SpriteKind::Word(Word::Property(P::Push)),
            'T' => SpriteKind::Word(Word::Property(P::Stop)),
            'M' => SpriteKind::Word(Word::Property(P::Move)),
            'K' => SpriteKind::Word(Word::Property(P::Kill)),
            'V' => SpriteKind::Word(Word::Property(P::Sink)),
            'H' => SpriteKind::Word(Word::Property(P::Hot)),
            'E' => SpriteKind::Word(Word::Property(P::Melt)),
            _ => return None,
        };
        Some(kind)
    }

    pub fn code(self) -> char {
        use Property as P;
        match self {
            SpriteKind::Object(n) => n.object_code(),
            SpriteKind::Word(Word::Noun(n)) => n.object_code().to_ascii_uppercase(),
            SpriteKind::Word(Word::Is) => '1',
            SpriteKind::Word(Word::Property(p)) => match p {
                P::You => 'U',
                P::Win => 'N',
                P::Push => 'P',
                P::Stop => 'T',
                P::Move => 'M',
                P::Kill => 'K',
                P::Sink => 'V',
                P::Hot => 'H',
                P::Melt => 'E',
            },
        }
    }

    pub fn is_word(self) -> bool {
        matches!(self, SpriteKind::Word(_))
    }

    pub fn object_noun(self) -> Option<Noun> {
        match self {
            SpriteKind::Object(n) => Some(n),
            SpriteKind::Word(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub fn reverse(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }

    pub fn delta(self) -> (isize, isize) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub x: usize,
    pub y: usize,
}

impl Position {
    pub const fn new(x: usize, y: usize) -> Self {
        Position { x, y }
    }

    /// The neighbouring cell in `dir`, or `None` past the board edge.
    pub fn step(self, dir: Direction, width: usize, height: usize) -> Option<Position> {
        let (dx, dy) = dir.delta();
        let x = self.x.checked_add_signed(dx)?;
        let y = self.y.checked_add_signed(dy)?;
        (x < width && y < height).then_some(Position { x, y })
    }

    pub fn manhattan(self, other: Position) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sprite {
    pub kind: SpriteKind,
    pub pos: Position,
    pub facing: Direction,
}

impl Sprite {
    pub fn new(kind: SpriteKind, pos: Position) -> Self {
        Sprite {
            kind,
            pos,
            facing: Direction::Right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Board {
    pub width: usize,
    pub height: usize,
    pub sprites: Vec<Sprite>,
}

impl Board {
    pub fn empty(width: usize, height: usize) -> Self {
        Board {
            width,
            height,
            sprites: Vec::new(),
        }
    }

    pub fn in_bounds(&self, pos: Position) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn cell_index(&self, pos: Position) -> usize {
        pos.y * self.width + pos.x
    }

    pub fn word_count(&self) -> usize {
        self.sprites.iter().filter(|s| s.kind.is_word()).count()
    }

    pub fn sprites_at(&self, pos: Position) -> impl Iterator<Item = &Sprite> {
        self.sprites.iter().filter(move |s| s.pos == pos)
    }

    /// Sprites sorted into a canonical order, for comparing boards up to
    /// list ordering.
    pub fn canonical_sprites(&self) -> Vec<Sprite> {
        let mut out = self.sprites.clone();
        out.sort_by_key(|s| (s.pos.y, s.pos.x, s.kind, s.facing));
        out
    }
}

/// Parses an ASCII map into a board. All sprites start facing right.
pub fn parse_ascii_map(text: &str) -> Result<Board, LevelError> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    if text.is_empty() {
        return Err(LevelError::EmptyMap);
    }
    let rows: Vec<&str> = text.split('\n').map(|r| r.strip_suffix('\r').unwrap_or(r)).collect();
    let width = rows[0].chars().count();
    if width == 0 {
        return Err(LevelError::EmptyMap);
    }
    let mut board = Board::empty(width, rows.len());
    for (y, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(LevelError::RaggedRows { row: y });
        }
        for (x, ch) in row.chars().enumerate() {
            if ch == '_' {
                continue;
            }
            let kind = SpriteKind::from_code(ch).ok_or(LevelError::UnknownCharacter { ch, row: y, col: x })?;
            board.sprites.push(Sprite::new(kind, Position::new(x, y)));
        }
    }
    Ok(board)
}

/// Renders a board as an ASCII map.
///
/// Overlapping sprites collapse to one code: words win over objects, and
/// within a category the sprite later in the list wins.
pub fn serialize_ascii_map(board: &Board) -> String {
    let mut cells: Vec<Option<SpriteKind>> = vec![None; board.width * board.height];
    for sprite in &board.sprites {
        let slot = &mut cells[board.cell_index(sprite.pos)];
        let replace = match slot {
            None => true,
            Some(current) => sprite.kind.is_word() || !current.is_word(),
        };
        if replace {
            *slot = Some(sprite.kind);
        }
    }
    let mut out = String::with_capacity((board.width + 1) * board.height);
    for (y, row) in cells.chunks(board.width).enumerate() {
        if y > 0 {
            out.push('\n');
        }
        out.extend(row.iter().map(|c| c.map_or('_', SpriteKind::code)));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub id: String,
    pub name: String,
    pub author: String,
    pub ascii: String,
    pub solution: String,
}

impl Level {
    pub fn new(id: impl Into<String>, ascii: impl Into<String>) -> Self {
        Level {
            id: id.into(),
            name: String::new(),
            author: String::new(),
            ascii: ascii.into(),
            solution: String::new(),
        }
    }

    pub fn board(&self) -> Result<Board, LevelError> {
        parse_ascii_map(&self.ascii)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    pub name: String,
    pub levels: Vec<Level>,
}

impl LevelSet {
    pub fn get(&self, id: &str) -> Option<&Level> {
        self.levels.iter().find(|l| l.id == id)
    }

    pub fn to_json(&self) -> String {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "id": l.id,
                    "name": l.name,
                    "author": l.author,
                    "ascii": l.ascii,
                    "solution": l.solution,
                })
            })
            .collect();
        let doc = serde_json::json!({ "name": self.name, "levels": levels });
        serde_json::to_string_pretty(&doc).expect("level set serializes")
    }
}

fn schema(path: impl Into<String>) -> LevelError {
    LevelError::Schema { path: path.into() }
}

fn required_str<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a str, LevelError> {
    obj.get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| schema(format!("{path}.{key}")))
}

fn optional_str(obj: &Map<String, Value>, key: &str, path: &str) -> Result<String, LevelError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(String::new()),
        Some(Value::String(s)) => Ok(s.clone()),
        Some(_) => Err(schema(format!("{path}.{key}"))),
    }
}

/// Loads a level-set JSON document, validating every map. Unknown fields
/// are ignored.
pub fn load_level_set(json_text: &str) -> Result<LevelSet, LevelError> {
    let doc: Value = serde_json::from_str(json_text).map_err(|_| schema("$"))?;
    let root = doc.as_object().ok_or_else(|| schema("$"))?;
    let name = required_str(root, "name", "$")?.to_string();
    let entries = root
        .get("levels")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("$.levels"))?;

    let mut seen = HashSet::new();
    let mut levels = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let path = format!("$.levels[{i}]");
        let obj = entry.as_object().ok_or_else(|| schema(path.clone()))?;
        let id = required_str(obj, "id", &path)?.to_string();
        let ascii = required_str(obj, "ascii", &path)?.to_string();
        let solution = optional_str(obj, "solution", &path)?;
        if !solution.chars().all(|c| matches!(c, 'U' | 'D' | 'L' | 'R' | 'W')) {
            return Err(schema(format!("{path}.solution")));
        }
        if let Err(e) = parse_ascii_map(&ascii) {
            return Err(LevelError::LevelParse {
                level_id: id,
                source: Box::new(e),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(LevelError::DuplicateId(id));
        }
        levels.push(Level {
            id,
            name: optional_str(obj, "name", &path)?,
            author: optional_str(obj, "author", &path)?,
            ascii,
            solution,
        });
    }
    Ok(LevelSet { name, levels })
}
