//! Best-first backtracking layout search.
//!
//! Every entry is tried as the anchor word at the origin. From there the
//! search branches over every (unplaced entry, legal crossing) pair, best
//! candidates first: more new crossings, then a smaller bounding box, then a
//! seeded tie-break. It stops as soon as all entries are placed or the node
//! budget runs out, and keeps the best partial layout seen.

use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};

use super::{intersections_of, CrosswordLayout, Direction, Entry, GridConfig, GridError, Placement, MAX_ENTRIES};

#[derive(Debug, Clone, Copy, Default)]
struct Cell {
    letter: u8,
    across: bool,
    down: bool,
}

impl Cell {
    fn covered(&self, dir: Direction) -> bool {
        match dir {
            Direction::Across => self.across,
            Direction::Down => self.down,
        }
    }

    fn set(&mut self, dir: Direction, on: bool) {
        match dir {
            Direction::Across => self.across = on,
            Direction::Down => self.down = on,
        }
    }
}

type Spot = (i64, i64, Direction);

#[derive(Debug, Clone, Copy)]
struct Move {
    entry: usize,
    spot: Spot,
    crossings: usize,
    area: i64,
    tie: u64,
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

struct Search<'a> {
    words: Vec<&'a [u8]>,
    cfg: &'a GridConfig,
    cells: HashMap<(i64, i64), Cell>,
    placed: Vec<Option<Spot>>,
    placed_count: usize,
    crossings: usize,
    visited: HashSet<Vec<(usize, i64, i64, Direction)>>,
    nodes: u64,
    exhausted: bool,
    done: bool,
    best: Option<(usize, usize, i64, Vec<Option<Spot>>)>,
}

impl<'a> Search<'a> {
    fn span(&self, extra: Option<(Spot, usize)>) -> (i64, i64, i64, i64) {
        let mut b = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
        let spots = self
            .placed
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (s, self.words[i].len())))
            .chain(extra);
        for ((r, c, d), len) in spots {
            let (dr, dc) = d.step();
            let (er, ec) = (r + dr * (len as i64 - 1), c + dc * (len as i64 - 1));
            b = (b.0.min(r), b.1.min(c), b.2.max(er), b.3.max(ec));
        }
        b
    }

    fn fits(&self, b: (i64, i64, i64, i64)) -> bool {
        b.2 - b.0 < self.cfg.max_height as i64 && b.3 - b.1 < self.cfg.max_width as i64
    }

    /// Number of crossings made by putting `word` at `spot`, or `None` if illegal.
    fn legal(&self, word: &[u8], (r, c, dir): Spot) -> Option<usize> {
        let (dr, dc) = dir.step();
        let len = word.len() as i64;
        if self.cells.contains_key(&(r - dr, c - dc)) || self.cells.contains_key(&(r + dr * len, c + dc * len)) {
            return None;
        }
        let mut crossings = 0;
        for (k, &letter) in word.iter().enumerate() {
            let pos = (r + dr * k as i64, c + dc * k as i64);
            match self.cells.get(&pos) {
                Some(cell) => {
                    if cell.letter != letter || cell.covered(dir) {
                        return None;
                    }
                    crossings += 1;
                }
                None => {
                    if self.cells.contains_key(&(pos.0 - dc, pos.1 - dr)) || self.cells.contains_key(&(pos.0 + dc, pos.1 + dr)) {
                        return None;
                    }
                }
            }
        }
        Some(crossings)
    }

    fn apply(&mut self, entry: usize, spot: Spot, crossings: usize) {
        let (r, c, dir) = spot;
        let (dr, dc) = dir.step();
        for (k, &letter) in self.words[entry].iter().enumerate() {
            let cell = self.cells.entry((r + dr * k as i64, c + dc * k as i64)).or_default();
            cell.letter = letter;
            cell.set(dir, true);
        }
        self.placed[entry] = Some(spot);
        self.placed_count += 1;
        self.crossings += crossings;
    }

    fn undo(&mut self, entry: usize, crossings: usize) {
        let (r, c, dir) = self.placed[entry].take().expect("entry was placed");
        let (dr, dc) = dir.step();
        for k in 0..self.words[entry].len() as i64 {
            let pos = (r + dr * k, c + dc * k);
            let cell = self.cells.get_mut(&pos).expect("placed cell exists");
            cell.set(dir, false);
            if !cell.across && !cell.down {
                self.cells.remove(&pos);
            }
        }
        self.placed_count -= 1;
        self.crossings -= crossings;
    }

    fn moves(&self) -> Vec<Move> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (entry, word) in self.words.iter().enumerate() {
            if self.placed[entry].is_some() {
                continue;
            }
            for (&(r, c), cell) in &self.cells {
                if cell.across && cell.down {
                    continue;
                }
                let dir = if cell.across { Direction::Down } else { Direction::Across };
                let (dr, dc) = dir.step();
                for (j, &letter) in word.iter().enumerate() {
                    if letter != cell.letter {
                        continue;
                    }
                    let spot = (r - dr * j as i64, c - dc * j as i64, dir);
                    if !seen.insert((entry, spot)) {
                        continue;
                    }
                    let Some(crossings) = self.legal(word, spot) else { continue };
                    let b = self.span(Some((spot, word.len())));
                    if !self.fits(b) {
                        continue;
                    }
                    let mut tie = self.cfg.seed;
                    for v in [entry as u64, spot.0 as u64, spot.1 as u64, dir as u64] {
                        tie = mix(tie ^ v);
                    }
                    out.push(Move { entry, spot, crossings, area: (b.2 - b.0 + 1) * (b.3 - b.1 + 1), tie });
                }
            }
        }
        out.sort_by_key(|m| (Reverse(m.crossings), m.area, m.tie, m.entry, m.spot));
        out
    }

    fn state_key(&self) -> Vec<(usize, i64, i64, Direction)> {
        let (r0, c0, _, _) = self.span(None);
        self.placed
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|(r, c, d)| (i, r - r0, c - c0, d)))
            .collect()
    }

    fn record(&mut self) {
        let b = self.span(None);
        let area = (b.2 - b.0 + 1) * (b.3 - b.1 + 1);
        let better = match &self.best {
            None => true,
            Some((n, x, a, _)) => (self.placed_count, self.crossings, Reverse(area)) > (*n, *x, Reverse(*a)),
        };
        if better {
            self.best = Some((self.placed_count, self.crossings, area, self.placed.clone()));
        }
    }

    fn dfs(&mut self) {
        if self.nodes >= self.cfg.node_budget {
            self.exhausted = true;
            return;
        }
        self.nodes += 1;
        if !self.visited.insert(self.state_key()) {
            return;
        }
        self.record();
        if self.placed_count == self.words.len() {
            self.done = true;
            return;
        }
        for m in self.moves() {
            self.apply(m.entry, m.spot, m.crossings);
            self.dfs();
            self.undo(m.entry, m.crossings);
            if self.done || self.exhausted {
                return;
            }
        }
    }
}

/// Lays out as many entries as the search can fit.
///
/// Deterministic for a given entry order and seed. Entries that could not be
/// connected to the layout are listed in `unplaced`; `budget_exhausted` is set
/// when that happened because the node budget ran out.
pub fn build(entries: &[Entry], cfg: &GridConfig) -> Result<CrosswordLayout, GridError> {
    if entries.is_empty() {
        return Err(GridError::NoEntries);
    }
    if entries.len() > MAX_ENTRIES {
        return Err(GridError::TooManyEntries(entries.len()));
    }
    let mut ids = HashSet::new();
    for e in entries {
        e.check()?;
        if !ids.insert(e.id.as_str()) {
            return Err(GridError::DuplicateId(e.id.clone()));
        }
    }
    let mut search = Search {
        words: entries.iter().map(|e| e.answer_grid.as_bytes()).collect(),
        cfg,
        cells: HashMap::new(),
        placed: vec![None; entries.len()],
        placed_count: 0,
        crossings: 0,
        visited: HashSet::new(),
        nodes: 0,
        exhausted: false,
        done: false,
        best: None,
    };
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by_key(|&i| (Reverse(entries[i].answer_grid.len()), i));
    let mut dirs = vec![Direction::Across];
    if cfg.max_width != cfg.max_height {
        dirs.push(Direction::Down);
    }
    'anchors: for dir in dirs {
        for &i in &order {
            let spot = (0, 0, dir);
            if !search.fits(search.span(Some((spot, entries[i].answer_grid.len())))) {
                continue;
            }
            if search.best.as_ref().is_some_and(|b| b.0 == entries.len()) {
                break 'anchors;
            }
            search.apply(i, spot, 0);
            search.dfs();
            search.undo(i, 0);
            if search.done || search.exhausted {
                break 'anchors;
            }
        }
    }
    let Some((_, _, _, best)) = search.best.take() else {
        return Err(GridError::NoPlacement);
    };
    search.placed = best;
    let (r0, c0, r1, c1) = search.span(None);
    let mut placements: Vec<Placement> = search
        .placed
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            s.map(|(r, c, direction)| Placement {
                entry_id: entries[i].id.clone(),
                row: (r - r0) as usize,
                col: (c - c0) as usize,
                direction,
            })
        })
        .collect();
    placements.sort_by_key(|p| (p.row, p.col, p.direction));
    let unplaced: Vec<String> = entries
        .iter()
        .zip(&search.placed)
        .filter(|(_, s)| s.is_none())
        .map(|(e, _)| e.id.clone())
        .collect();
    let by_id = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let intersections = intersections_of(&placements, &by_id);
    Ok(CrosswordLayout {
        width: (c1 - c0 + 1) as usize,
        height: (r1 - r0 + 1) as usize,
        budget_exhausted: search.exhausted && !unplaced.is_empty(),
        placements,
        intersections,
        unplaced,
    })
}

#[cfg(test)]
mod tests {
    use super::super::validate_layout;
    use super::*;

    fn entries(answers: &[&str]) -> Vec<Entry> {
        answers
            .iter()
            .enumerate()
            .map(|(i, a)| Entry::new(format!("e{i}"), a, format!("clue {i}")).unwrap())
            .collect()
    }

    #[test]
    fn single_entry_at_origin() {
        let es = entries(&["Roma"]);
        let l = build(&es, &GridConfig::default()).unwrap();
        assert_eq!((l.width, l.height), (4, 1));
        assert_eq!(l.placements, vec![Placement { entry_id: "e0".into(), row: 0, col: 0, direction: Direction::Across }]);
    }

    #[test]
    fn two_words_cross() {
        let es = entries(&["Roma", "Amore"]);
        let l = build(&es, &GridConfig::default()).unwrap();
        assert_eq!(l.placements.len(), 2);
        assert_eq!(l.intersections.len(), 1);
        assert!(validate_layout(&l, &es).valid);
    }

    #[test]
    fn no_shared_letter_leaves_one_unplaced() {
        let es = entries(&["BB", "CC"]);
        let l = build(&es, &GridConfig::default()).unwrap();
        assert_eq!(l.placements.len(), 1);
        assert_eq!(l.unplaced, vec!["e1".to_string()]);
        assert!(!l.budget_exhausted);
        assert!(validate_layout(&l, &es).valid);
    }

    #[test]
    fn bounds_are_respected() {
        let es = entries(&["Roma"]);
        let cfg = GridConfig { max_width: 3, max_height: 3, ..Default::default() };
        assert_eq!(build(&es, &cfg), Err(GridError::NoPlacement));
        let cfg = GridConfig { max_width: 1, max_height: 5, ..Default::default() };
        let l = build(&es, &cfg).unwrap();
        assert_eq!(l.placements[0].direction, Direction::Down);
    }

    #[test]
    fn input_errors() {
        assert_eq!(build(&[], &GridConfig::default()), Err(GridError::NoEntries));
        let mut es = entries(&["Roma", "Mare"]);
        es[1].id = "e0".into();
        assert!(matches!(build(&es, &GridConfig::default()), Err(GridError::DuplicateId(_))));
        let many = entries(&["Roma"; 51]);
        assert_eq!(build(&many, &GridConfig::default()), Err(GridError::TooManyEntries(51)));
    }

    #[test]
    fn deterministic_and_budget_flag() {
        let es = entries(&["Roma", "Amore", "Mare", "Sole", "Luna", "Arte", "Nave", "Pane", "Etna", "Oro"]);
        let a = build(&es, &GridConfig::default()).unwrap();
        let b = build(&es, &GridConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(validate_layout(&a, &es).valid);
        let tiny = GridConfig { node_budget: 1, ..Default::default() };
        let l = build(&es, &tiny).unwrap();
        assert!(l.budget_exhausted);
        assert_eq!(l.placements.len(), 1);
    }
}
