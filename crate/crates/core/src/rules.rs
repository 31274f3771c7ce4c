//! Rule parsing from word lines, property classification and noun
//! transformation.

use std::collections::HashSet;
use std::fmt;

use crate::level::{Board, Noun, Position, Property, SpriteKind, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Noun(Noun),
    Property(Property),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Noun(n) => n.fmt(f),
            Predicate::Property(p) => p.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// An active `X-IS-Y` triple, anchored at the position of its `IS` word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rule {
    pub subject: Noun,
    pub predicate: Predicate,
    pub anchor: Position,
    pub orientation: Orientation,
}

impl Rule {
    pub fn key(&self) -> (Noun, Predicate) {
        (self.subject, self.predicate)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-IS-{}", self.subject, self.predicate)
    }
}

/// Rules in scan order (row-major by anchor, horizontal before vertical),
/// deduplicated by `(subject, predicate)`. Equality ignores order.
#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.rules.len() == other.rules.len() && self.keys() == other.keys()
    }
}

impl Eq for RuleSet {}

impl RuleSet {
    /// Builds a set from rules in the given order, dropping later duplicates.
    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Self {
        let mut seen = HashSet::new();
        let rules = rules.into_iter().filter(|r| seen.insert(r.key())).collect();
        RuleSet { rules }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn keys(&self) -> HashSet<(Noun, Predicate)> {
        self.rules.iter().map(Rule::key).collect()
    }

    pub fn contains(&self, subject: Noun, predicate: Predicate) -> bool {
        self.rules
            .iter()
            .any(|r| r.subject == subject && r.predicate == predicate)
    }

    pub fn has_property_rule(&self, property: Property) -> bool {
        self.rules.iter().any(|r| r.predicate == Predicate::Property(property))
    }

    pub fn property_table(&self) -> PropertyTable {
        let mut table = PropertyTable::default();
        for rule in &self.rules {
            if let Predicate::Property(p) = rule.predicate {
                table.0[rule.subject.index()].insert(p);
            }
        }
        table
    }

    /// The noun an `X` object turns into this tick, if any. `X-IS-X` blocks
    /// every transformation of `X`; otherwise the first `X-IS-Y` in scan
    /// order wins.
    pub fn transform_target(&self, subject: Noun) -> Option<Noun> {
        if self.contains(subject, Predicate::Noun(subject)) {
            return None;
        }
        self.rules.iter().find_map(|r| match r.predicate {
            Predicate::Noun(y) if r.subject == subject && y != subject => Some(y),
            _ => None,
        })
    }

    /// One `X-IS-Y` line per rule.
    pub fn render(&self) -> Vec<String> {
        self.rules.iter().map(Rule::to_string).collect()
    }
}

impl<'a> IntoIterator for &'a RuleSet {
    type Item = &'a Rule;
    type IntoIter = std::slice::Iter<'a, Rule>;

    fn into_iter(self) -> Self::IntoIter {
        self.rules.iter()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct PropertySet(u16);

impl PropertySet {
    pub fn insert(&mut self, p: Property) {
        self.0 |= 1 << p.index();
    }

    pub fn contains(self, p: Property) -> bool {
        self.0 & (1 << p.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

/// Properties per noun, derived from the active property rules.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PropertyTable([PropertySet; Noun::ALL.len()]);

impl PropertyTable {
    pub fn of(&self, noun: Noun) -> PropertySet {
        self.0[noun.index()]
    }

    /// Properties of a sprite kind. Words carry none; their pushability is
    /// intrinsic.
    pub fn of_kind(&self, kind: SpriteKind) -> PropertySet {
        match kind {
            SpriteKind::Object(n) => self.of(n),
            SpriteKind::Word(_) => PropertySet::default(),
        }
    }

    pub fn is_pushable(&self, kind: SpriteKind) -> bool {
        kind.is_word() || self.of_kind(kind).contains(Property::Push)
    }

    /// STOP objects block unless they are also PUSH.
    pub fn blocks(&self, kind: SpriteKind) -> bool {
        let props = self.of_kind(kind);
        props.contains(Property::Stop) && !props.contains(Property::Push)
    }
}

/// Object sprite indices grouped by property.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyIndex {
    lists: [Vec<usize>; Property::ALL.len()],
}

impl PropertyIndex {
    pub fn get(&self, property: Property) -> &[usize] {
        &self.lists[property.index()]
    }

    pub fn you(&self) -> &[usize] {
        self.get(Property::You)
    }

    pub fn win(&self) -> &[usize] {
        self.get(Property::Win)
    }
}

fn words_by_cell(board: &Board) -> Vec<Vec<Word>> {
    let mut cells = vec![Vec::new(); board.width * board.height];
    for sprite in &board.sprites {
        if let SpriteKind::Word(w) = sprite.kind {
            cells[board.cell_index(sprite.pos)].push(w);
        }
    }
    cells
}

/// Reads every `noun IS noun|property` line, left to right and top to
/// bottom. A single `IS` can anchor one horizontal and one vertical rule.
pub fn scan_rules(board: &Board) -> RuleSet {
    let cells = words_by_cell(board);
    let at = |x: usize, y: usize| &cells[y * board.width + x];

    let mut anchors: Vec<Position> = board
        .sprites
        .iter()
        .filter(|s| s.kind == SpriteKind::Word(Word::Is))
        .map(|s| s.pos)
        .collect();
    anchors.sort_by_key(|p| (p.y, p.x));
    anchors.dedup();

    let mut found = Vec::new();
    for anchor in anchors {
        let Position { x, y } = anchor;
        let lines = [
            (Orientation::Horizontal, x > 0 && x + 1 < board.width),
            (Orientation::Vertical, y > 0 && y + 1 < board.height),
        ];
        for (orientation, fits) in lines {
            if !fits {
                continue;
            }
            let (before, after) = match orientation {
                Orientation::Horizontal => (at(x - 1, y), at(x + 1, y)),
                Orientation::Vertical => (at(x, y - 1), at(x, y + 1)),
            };
            for &b in before {
                let Word::Noun(subject) = b else { continue };
                for &a in after {
                    let predicate = match a {
                        Word::Noun(n) => Predicate::Noun(n),
                        Word::Property(p) => Predicate::Property(p),
                        Word::Is => continue,
                    };
                    found.push(Rule {
                        subject,
                        predicate,
                        anchor,
                        orientation,
                    });
                }
            }
        }
    }
    RuleSet::from_rules(found)
}

pub fn classify_objects(board: &Board, rules: &RuleSet) -> PropertyIndex {
    let table = rules.property_table();
    let mut index = PropertyIndex::default();
    for (i, sprite) in board.sprites.iter().enumerate() {
        let props = table.of_kind(sprite.kind);
        if props.is_empty() {
            continue;
        }
        for p in Property::ALL {
            if props.contains(p) {
                index.lists[p.index()].push(i);
            }
        }
    }
    index
}

/// Applies one layer of `X-IS-Y` transformations. Positions, facings and
/// words are untouched.
pub fn apply_transformations(board: &Board, rules: &RuleSet) -> Board {
    let targets: Vec<Option<Noun>> = Noun::ALL.iter().map(|&n| rules.transform_target(n)).collect();
    let mut out = board.clone();
    if targets.iter().all(Option::is_none) {
        return out;
    }
    for sprite in &mut out.sprites {
        if let SpriteKind::Object(n) = sprite.kind {
            if let Some(y) = targets[n.index()] {
                sprite.kind = SpriteKind::Object(y);
            }
        }
    }
    out
}
