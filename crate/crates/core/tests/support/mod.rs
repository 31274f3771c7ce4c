//! Reference implementations written against the game rules directly, on
//! a plain grid of character stacks. They share nothing with the engine
//! beyond the cell codes, and are used to cross-check it.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use keke_core::level::{Direction, Position, Sprite, SpriteKind};
use keke_core::{Board, GameState};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const NOUN_WORDS: &str = "BWFRASGL";
pub const PROPERTY_WORDS: &str = "UNPTMKVHE";
pub const IS_WORD: char = '1';
pub const OBJECTS: &str = "bwfrasgl";
pub const ACTIONS: [char; 5] = ['U', 'D', 'L', 'R', 'W'];

pub fn is_word(c: char) -> bool {
    c == IS_WORD || NOUN_WORDS.contains(c) || PROPERTY_WORDS.contains(c)
}

fn is_noun_word(c: char) -> bool {
    NOUN_WORDS.contains(c)
}

/// Noun word for an object code (`b` -> `B`).
fn noun_of(c: char) -> Option<char> {
    OBJECTS.contains(c).then(|| c.to_ascii_uppercase())
}

// ---------------------------------------------------------------- rules

/// Every (subject, predicate) pair formed by any three word sprites lying on
/// consecutive cells left→right or top→bottom. Cubic in the word count.
pub fn brute_force_rules(words: &[(char, usize, usize)]) -> BTreeSet<(char, char)> {
    let mut out = BTreeSet::new();
    for &(a, ax, ay) in words {
        for &(b, bx, by) in words {
            for &(c, cx, cy) in words {
                let horizontal = ay == by && by == cy && ax + 1 == bx && bx + 1 == cx;
                let vertical = ax == bx && bx == cx && ay + 1 == by && by + 1 == cy;
                if !(horizontal || vertical) {
                    continue;
                }
                if is_noun_word(a) && b == IS_WORD && (is_noun_word(c) || PROPERTY_WORDS.contains(c)) {
                    out.insert((a, c));
                }
            }
        }
    }
    out
}

/// Rule keys of an engine rule set, written as word codes.
pub fn engine_rule_codes(rules: &keke_core::RuleSet) -> BTreeSet<(char, char)> {
    rules
        .iter()
        .map(|r| {
            let subject = SpriteKind::Word(keke_core::level::Word::Noun(r.subject)).code();
            let predicate = match r.predicate {
                keke_core::rules::Predicate::Noun(n) => SpriteKind::Word(keke_core::level::Word::Noun(n)).code(),
                keke_core::rules::Predicate::Property(p) => {
                    SpriteKind::Word(keke_core::level::Word::Property(p)).code()
                }
            };
            (subject, predicate)
        })
        .collect()
}

pub fn board_words(board: &Board) -> Vec<(char, usize, usize)> {
    board
        .sprites
        .iter()
        .filter(|s| s.kind.is_word())
        .map(|s| (s.kind.code(), s.pos.x, s.pos.y))
        .collect()
}

/// A random board up to 8×8 with words (possibly stacked) and objects
/// scattered over it.
pub fn random_word_board(rng: &mut impl Rng) -> Board {
    let width = rng.random_range(1..=8);
    let height = rng.random_range(1..=8);
    let mut board = Board::empty(width, height);
    let cells = width * height;
    let words = rng.random_range(0..=cells.min(40));
    for _ in 0..words {
        let roll = rng.random_range(0..100);
        let code = if roll < 35 {
            IS_WORD
        } else if roll < 70 {
            *NOUN_WORDS.as_bytes().choose(rng).unwrap() as char
        } else {
            *PROPERTY_WORDS.as_bytes().choose(rng).unwrap() as char
        };
        let pos = Position::new(rng.random_range(0..width), rng.random_range(0..height));
        board
            .sprites
            .push(Sprite::new(SpriteKind::from_code(code).unwrap(), pos));
    }
    for _ in 0..rng.random_range(0..=cells / 2) {
        let code = *OBJECTS.as_bytes().choose(rng).unwrap() as char;
        let pos = Position::new(rng.random_range(0..width), rng.random_range(0..height));
        board
            .sprites
            .push(Sprite::new(SpriteKind::from_code(code).unwrap(), pos));
    }
    board
}

// ---------------------------------------------------------------- world

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Result3 {
    Ongoing,
    Win,
    Lose,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Item {
    id: u32,
    code: char,
    facing: char,
}

/// Grid of item stacks. Item ids record creation order, which breaks ties
/// between objects sharing a cell.
#[derive(Debug, Clone)]
pub struct World {
    w: usize,
    h: usize,
    cells: Vec<Vec<Item>>,
    pub outcome: Result3,
}

/// Sorted (y, x, code, facing) tuples plus the outcome.
pub type Canon = (Vec<(usize, usize, char, char)>, Result3);

fn offset(dir: char) -> (isize, isize) {
    match dir {
        'U' => (0, -1),
        'D' => (0, 1),
        'L' => (-1, 0),
        'R' => (1, 0),
        _ => (0, 0),
    }
}

fn reverse(dir: char) -> char {
    match dir {
        'U' => 'D',
        'D' => 'U',
        'L' => 'R',
        _ => 'L',
    }
}

impl World {
    pub fn parse(ascii: &str) -> World {
        let rows: Vec<&str> = ascii.lines().collect();
        let h = rows.len();
        let w = rows[0].chars().count();
        let mut cells = vec![Vec::new(); w * h];
        let mut id = 0;
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.chars().enumerate() {
                if c != '_' {
                    cells[y * w + x].push(Item {
                        id,
                        code: c,
                        facing: 'R',
                    });
                    id += 1;
                }
            }
        }
        World {
            w,
            h,
            cells,
            outcome: Result3::Ongoing,
        }
    }

    fn neighbour(&self, cell: usize, dir: char) -> Option<usize> {
        let (dx, dy) = offset(dir);
        let x = (cell % self.w) as isize + dx;
        let y = (cell / self.w) as isize + dy;
        (x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h).then(|| y as usize * self.w + x as usize)
    }

    /// Rules in scan order: IS anchors row-major, horizontal before vertical.
    fn rules(&self) -> Vec<(char, char)> {
        let word = |cell: Option<usize>| -> Vec<char> {
            cell.map(|c| self.cells[c].iter().map(|i| i.code).filter(|&c| is_word(c)).collect())
                .unwrap_or_default()
        };
        let mut out: Vec<(char, char)> = Vec::new();
        for cell in 0..self.cells.len() {
            if !self.cells[cell].iter().any(|i| i.code == IS_WORD) {
                continue;
            }
            let x = cell % self.w;
            let y = cell / self.w;
            let horizontal = (x > 0).then(|| (Some(cell - 1), self.neighbour(cell, 'R')));
            let vertical = (y > 0).then(|| (Some(cell - self.w), self.neighbour(cell, 'D')));
            for (before, after) in [horizontal, vertical].into_iter().flatten() {
                for a in word(before) {
                    for c in word(after) {
                        if is_noun_word(a) && (is_noun_word(c) || PROPERTY_WORDS.contains(c)) && !out.contains(&(a, c))
                        {
                            out.push((a, c));
                        }
                    }
                }
            }
        }
        out
    }

    fn has(rules: &[(char, char)], code: char, property: char) -> bool {
        noun_of(code).is_some_and(|n| rules.contains(&(n, property)))
    }

    fn pushable(rules: &[(char, char)], code: char) -> bool {
        is_word(code) || Self::has(rules, code, 'P')
    }

    fn blocker(rules: &[(char, char)], code: char) -> bool {
        Self::has(rules, code, 'T') && !Self::has(rules, code, 'P')
    }

    /// Clears the way into `cell` by pushing its pushables onward.
    fn make_room(&mut self, rules: &[(char, char)], cell: usize, dir: char) -> bool {
        if self.cells[cell].iter().any(|i| Self::blocker(rules, i.code)) {
            return false;
        }
        if !self.cells[cell].iter().any(|i| Self::pushable(rules, i.code)) {
            return true;
        }
        let Some(next) = self.neighbour(cell, dir) else {
            return false;
        };
        if !self.make_room(rules, next, dir) {
            return false;
        }
        let (moving, staying): (Vec<Item>, Vec<Item>) =
            self.cells[cell].drain(..).partition(|i| Self::pushable(rules, i.code));
        self.cells[cell] = staying;
        self.cells[next].extend(moving);
        true
    }

    fn locate(&self, id: u32) -> usize {
        self.cells.iter().position(|c| c.iter().any(|i| i.id == id)).unwrap()
    }

    fn walk(&mut self, rules: &[(char, char)], id: u32, dir: char) -> bool {
        let from = self.locate(id);
        let Some(to) = self.neighbour(from, dir) else {
            return false;
        };
        if !self.make_room(rules, to, dir) {
            return false;
        }
        let at = self.cells[from].iter().position(|i| i.id == id).unwrap();
        let item = self.cells[from].remove(at);
        self.cells[to].push(item);
        true
    }

    fn ids_with(&self, rules: &[(char, char)], property: char) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (cell, items) in self.cells.iter().enumerate() {
            for i in items {
                if Self::has(rules, i.code, property) {
                    out.push((cell, i.id));
                }
            }
        }
        out
    }

    pub fn step(&self, action: char) -> World {
        assert_eq!(self.outcome, Result3::Ongoing);
        let mut next = self.clone();
        let rules = self.rules();

        if action != 'W' {
            let mut players = self.ids_with(&rules, 'U');
            let w = self.w;
            players.sort_by_key(|&(cell, id)| {
                let (x, y) = ((cell % w) as isize, (cell / w) as isize);
                let lead = match action {
                    'R' => -x,
                    'L' => x,
                    'D' => -y,
                    _ => y,
                };
                (lead, y, x, id)
            });
            for (_, id) in players {
                next.walk(&rules, id, action);
            }
        }

        let mut movers = next.ids_with(&rules, 'M');
        movers.sort_by_key(|&(cell, id)| (cell, id));
        for (_, id) in movers {
            let cell = next.locate(id);
            let facing = next.cells[cell].iter().find(|i| i.id == id).unwrap().facing;
            if !next.walk(&rules, id, facing) {
                let cell = next.locate(id);
                next.cells[cell].iter_mut().find(|i| i.id == id).unwrap().facing = reverse(facing);
                next.walk(&rules, id, reverse(facing));
            }
        }

        let rules = next.rules();
        let mut target: HashMap<char, char> = HashMap::new();
        for &(x, y) in &rules {
            if rules.contains(&(x, x)) || !is_noun_word(y) || x == y {
                continue;
            }
            target.entry(x).or_insert(y);
        }
        for items in &mut next.cells {
            for i in items.iter_mut() {
                if let Some(y) = noun_of(i.code).and_then(|n| target.get(&n)) {
                    i.code = y.to_ascii_lowercase();
                }
            }
        }

        let rules = next.rules();
        for items in &mut next.cells {
            let objects: Vec<&Item> = items.iter().filter(|i| !is_word(i.code)).collect();
            if objects.len() < 2 {
                continue;
            }
            let sink = objects.iter().any(|i| Self::has(&rules, i.code, 'V'));
            let dies = |me: &Item| -> bool {
                if sink {
                    return true;
                }
                let other = |p: char| objects.iter().any(|o| o.id != me.id && Self::has(&rules, o.code, p));
                (Self::has(&rules, me.code, 'U') && other('K')) || (Self::has(&rules, me.code, 'E') && other('H'))
            };
            let doomed: HashSet<u32> = objects.iter().filter(|i| dies(i)).map(|i| i.id).collect();
            items.retain(|i| !doomed.contains(&i.id));
        }

        let you_cells: HashSet<usize> = next.ids_with(&rules, 'U').into_iter().map(|(c, _)| c).collect();
        let win = next.ids_with(&rules, 'N').iter().any(|(c, _)| you_cells.contains(c));
        next.outcome = if win {
            Result3::Win
        } else if you_cells.is_empty() || !rules.iter().any(|&(_, p)| p == 'U') {
            Result3::Lose
        } else {
            Result3::Ongoing
        };
        next
    }

    pub fn canon(&self) -> Canon {
        let mut sprites = Vec::new();
        for (cell, items) in self.cells.iter().enumerate() {
            for i in items {
                sprites.push((cell / self.w, cell % self.w, i.code, i.facing));
            }
        }
        sprites.sort();
        (sprites, self.outcome)
    }
}

fn facing_code(d: Direction) -> char {
    match d {
        Direction::Up => 'U',
        Direction::Down => 'D',
        Direction::Left => 'L',
        Direction::Right => 'R',
    }
}

pub fn engine_canon(state: &GameState) -> Canon {
    let mut sprites: Vec<_> = state
        .board()
        .sprites
        .iter()
        .map(|s| (s.pos.y, s.pos.x, s.kind.code(), facing_code(s.facing)))
        .collect();
    sprites.sort();
    let outcome = match state.outcome() {
        keke_core::Outcome::Ongoing => Result3::Ongoing,
        keke_core::Outcome::Win => Result3::Win,
        keke_core::Outcome::Lose => Result3::Lose,
    };
    (sprites, outcome)
}

// ---------------------------------------------------------------- search

/// All states reachable from `start` by any action sequence, not expanding
/// terminal states. `None` once more than `cap` states are found.
pub fn oracle_reachable(start: &World, cap: usize) -> Option<HashSet<Canon>> {
    let mut seen = HashSet::from([start.canon()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(world) = queue.pop_front() {
        if world.outcome != Result3::Ongoing {
            continue;
        }
        for a in ACTIONS {
            let next = world.step(a);
            if seen.insert(next.canon()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(next);
            }
        }
    }
    Some(seen)
}

pub fn engine_reachable(start: &GameState, cap: usize) -> Option<HashSet<Canon>> {
    let mut seen = HashSet::from([engine_canon(start)]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(state) = queue.pop_front() {
        if state.outcome().is_terminal() {
            continue;
        }
        for a in keke_core::Action::ALL {
            let next = state.step(a).unwrap();
            if seen.insert(engine_canon(&next)) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(next);
            }
        }
    }
    Some(seen)
}

/// Length of the shortest winning action sequence up to `max_len`, by
/// trying every sequence of each length in turn. Sequences are cut at the
/// first terminal state.
pub fn shortest_by_enumeration(start: &World, max_len: usize) -> Option<usize> {
    fn wins_within(world: &World, depth: usize) -> bool {
        if depth == 0 {
            return false;
        }
        ACTIONS.iter().any(|&a| {
            let next = world.step(a);
            match next.outcome {
                Result3::Win => true,
                Result3::Lose => false,
                Result3::Ongoing => wins_within(&next, depth - 1),
            }
        })
    }
    (1..=max_len).find(|&d| wins_within(start, d))
}

// ---------------------------------------------------------------- levels

const PHRASES: &[&str] = &[
    "F1N", "R1P", "W1T", "A1V", "S1M", "S1K", "L1H", "B1E", "R1B", "W1P", "F1P", "A1N", "R1W", "G1N", "R1M", "W1F",
];

struct Grid {
    w: usize,
    h: usize,
    cells: Vec<char>,
}

impl Grid {
    fn new(w: usize, h: usize) -> Self {
        Grid {
            w,
            h,
            cells: vec!['_'; w * h],
        }
    }

    /// Places `text` horizontally or vertically on free cells, if it fits
    /// somewhere within a few attempts.
    fn place_line(&mut self, rng: &mut impl Rng, text: &str) -> bool {
        let n = text.len();
        for _ in 0..20 {
            let vertical = rng.random_bool(0.5);
            let (span_w, span_h) = if vertical { (1, n) } else { (n, 1) };
            if span_w > self.w || span_h > self.h {
                continue;
            }
            let x = rng.random_range(0..=self.w - span_w);
            let y = rng.random_range(0..=self.h - span_h);
            let cells: Vec<usize> = (0..n)
                .map(|k| {
                    if vertical {
                        (y + k) * self.w + x
                    } else {
                        y * self.w + x + k
                    }
                })
                .collect();
            if cells.iter().all(|&c| self.cells[c] == '_') {
                for (c, ch) in cells.into_iter().zip(text.chars()) {
                    self.cells[c] = ch;
                }
                return true;
            }
        }
        false
    }

    fn place_object(&mut self, rng: &mut impl Rng, code: char) -> bool {
        let free: Vec<usize> = (0..self.cells.len()).filter(|&c| self.cells[c] == '_').collect();
        match free.choose(rng) {
            Some(&c) => {
                self.cells[c] = code;
                true
            }
            None => false,
        }
    }

    fn ascii(&self) -> String {
        self.cells
            .chunks(self.w)
            .map(|row| row.iter().collect::<String>())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// A random `w`×`h` level with BABA-IS-YOU, up to `extra` further rule
/// phrases and a handful of objects including at least one baba.
pub fn random_level(rng: &mut impl Rng, w: usize, h: usize, extra: usize, objects: usize) -> String {
    let mut grid = Grid::new(w, h);
    grid.place_line(rng, "B1U");
    for _ in 0..rng.random_range(0..=extra) {
        let phrase = *PHRASES.choose(rng).unwrap();
        grid.place_line(rng, phrase);
    }
    grid.place_object(rng, 'b');
    for _ in 0..rng.random_range(1..=objects) {
        let code = OBJECTS.as_bytes()[rng.random_range(0..OBJECTS.len())] as char;
        grid.place_object(rng, code);
    }
    grid.ascii()
}

/// A small level with a reachable win condition: BABA-IS-YOU, FLAG-IS-WIN,
/// a flag and some clutter.
pub fn random_goal_level(rng: &mut impl Rng) -> String {
    let w = rng.random_range(4..=6);
    let h = rng.random_range(4..=6);
    let mut grid = Grid::new(w, h);
    grid.place_line(rng, "B1U");
    grid.place_line(rng, "F1N");
    if rng.random_bool(0.5) {
        let phrase = *["W1T", "R1P", "A1V", "S1K", "R1F", "W1P"].choose(rng).unwrap();
        grid.place_line(rng, phrase);
    }
    grid.place_object(rng, 'b');
    grid.place_object(rng, 'f');
    for _ in 0..rng.random_range(0..=4) {
        let code = *b"wwrras".choose(rng).unwrap() as char;
        grid.place_object(rng, code);
    }
    grid.ascii()
}
