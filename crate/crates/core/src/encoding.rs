//! One-hot design vectors and the filter layouts they describe.
//!
//! A design is 22 bits. The first ten bits are five two-bit element slots in
//! the order input port, capacitor 1, inductor, capacitor 2, output port
//! (`10` = low/left candidate, `01` = high/right candidate). The last twelve
//! bits are four three-bit path selections for the segments between
//! consecutive elements (`100` = X first, `010` = turn halfway, `001` = Y
//! first). Path triples may be empty (disconnected, replaced by a dummy plane)
//! or multi-hot (union of routes).

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ELEMENT_COUNT: usize = 5;
pub const SEGMENT_COUNT: usize = 4;
pub const ELEMENT_BITS: usize = 2 * ELEMENT_COUNT;
pub const DESIGN_BITS: usize = ELEMENT_BITS + 3 * SEGMENT_COUNT;

/// Number of canonical designs: 2^5 slot choices times 3^4 single routes.
pub const CANONICAL_COUNT: usize = 2592;

/// Grid cell, 1-based: `ix` in `1..=nx`, `iy` in `1..=ny`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub ix: i32,
    pub iy: i32,
}

impl Cell {
    pub const fn new(ix: i32, iy: i32) -> Self {
        Self { ix, iy }
    }

    pub fn manhattan(self, other: Cell) -> i32 {
        (self.ix - other.ix).abs() + (self.iy - other.iy).abs()
    }

    fn is_adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.ix, self.iy)
    }
}

/// Board discretization. Lengths are in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub nx: i32,
    pub ny: i32,
    pub board_w: f64,
    pub board_h: f64,
    pub substrate_h: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 10,
            ny: 15,
            board_w: 150.0,
            board_h: 100.0,
            substrate_h: 1.6,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        let dims = [self.board_w, self.board_h, self.substrate_h];
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidConfig(
                "board dimensions must be finite and positive".into(),
            ));
        }
        Ok(())
    }

    /// Cell length along X in millimetres.
    pub fn cell_w(&self) -> f64 {
        self.board_w / self.nx as f64
    }

    /// Cell length along Y in millimetres.
    pub fn cell_h(&self) -> f64 {
        self.board_h / self.ny as f64
    }

    pub fn contains(&self, c: Cell) -> bool {
        (1..=self.nx).contains(&c.ix) && (1..=self.ny).contains(&c.iy)
    }

    pub fn cell_count(&self) -> usize {
        (self.nx * self.ny) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    InputPort,
    Cap1,
    Inductor,
    Cap2,
    OutputPort,
}

impl ElementKind {
    /// Board order, left to right.
    pub const ALL: [ElementKind; ELEMENT_COUNT] = [
        ElementKind::InputPort,
        ElementKind::Cap1,
        ElementKind::Inductor,
        ElementKind::Cap2,
        ElementKind::OutputPort,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Which of the two candidate cells an element occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    /// Bottom or left candidate, bit pattern `10`.
    Low,
    /// Top or right candidate, bit pattern `01`.
    High,
}

impl Slot {
    pub const ALL: [Slot; 2] = [Slot::Low, Slot::High];

    fn bits(self) -> [bool; 2] {
        match self {
            Slot::Low => [true, false],
            Slot::High => [false, true],
        }
    }
}

/// Route shape between two terminals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// All X steps, then all Y steps.
    A,
    /// Half the Y steps, all X steps, remaining Y steps.
    B,
    /// All Y steps, then all X steps.
    C,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::A, Variant::B, Variant::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    InputCap1,
    Cap1Inductor,
    InductorCap2,
    Cap2Output,
}

impl Segment {
    pub const ALL: [Segment; SEGMENT_COUNT] = [
        Segment::InputCap1,
        Segment::Cap1Inductor,
        Segment::InductorCap2,
        Segment::Cap2Output,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two elements this segment joins, in board order.
    pub fn elements(self) -> (ElementKind, ElementKind) {
        let i = self.index();
        (ElementKind::ALL[i], ElementKind::ALL[i + 1])
    }
}

/// The 22-bit decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DesignVector([bool; DESIGN_BITS]);

impl DesignVector {
    pub const fn new(bits: [bool; DESIGN_BITS]) -> Self {
        Self(bits)
    }

    pub fn from_slice(bits: &[bool]) -> Result<Self> {
        let arr: [bool; DESIGN_BITS] = bits.try_into().map_err(|_| {
            Error::InvalidBits(format!("expected {DESIGN_BITS} bits, got {}", bits.len()))
        })?;
        Ok(Self(arr))
    }

    /// Builds the canonical vector for the given slots and single-variant paths.
    pub fn from_choices(slots: [Slot; ELEMENT_COUNT], variants: [Variant; SEGMENT_COUNT]) -> Self {
        let mut bits = [false; DESIGN_BITS];
        for (m, slot) in slots.iter().enumerate() {
            bits[2 * m..2 * m + 2].copy_from_slice(&slot.bits());
        }
        for (s, v) in variants.iter().enumerate() {
            bits[ELEMENT_BITS + 3 * s + v.index()] = true;
        }
        Self(bits)
    }

    pub fn bits(&self) -> &[bool; DESIGN_BITS] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<bool> {
        self.0.to_vec()
    }

    /// The two bits of element `m` (0-based).
    pub fn element_pair(&self, m: usize) -> [bool; 2] {
        [self.0[2 * m], self.0[2 * m + 1]]
    }

    /// The three bits of segment `s` (0-based).
    pub fn path_triple(&self, s: usize) -> [bool; 3] {
        let o = ELEMENT_BITS + 3 * s;
        [self.0[o], self.0[o + 1], self.0[o + 2]]
    }

    /// Returns a copy with bit `i` flipped.
    pub fn flipped(&self, i: usize) -> Self {
        let mut bits = self.0;
        bits[i] = !bits[i];
        Self(bits)
    }
}

impl fmt::Display for DesignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&bits_to_string(&self.0))
    }
}

impl FromStr for DesignVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = parse_bits(s)?;
        Self::from_slice(&bits)
    }
}

impl Serialize for DesignVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DesignVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Formats a bit slice as a `0`/`1` string.
pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a `0`/`1` string of any length.
pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::InvalidBits(format!("unexpected character {other:?}"))),
        })
        .collect()
}

/// Subset of route variants chosen for one segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VariantSet([bool; 3]);

impl VariantSet {
    pub const fn from_bits(bits: [bool; 3]) -> Self {
        Self(bits)
    }

    pub fn single(v: Variant) -> Self {
        let mut bits = [false; 3];
        bits[v.index()] = true;
        Self(bits)
    }

    pub fn bits(&self) -> [bool; 3] {
        self.0
    }

    pub fn contains(&self, v: Variant) -> bool {
        self.0[v.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = Variant> + '_ {
        Variant::ALL.into_iter().filter(|v| self.contains(*v))
    }

    pub fn len(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All seven nonempty subsets, singletons first.
    pub fn nonempty_subsets() -> [VariantSet; 7] {
        [
            VariantSet([true, false, false]),
            VariantSet([false, true, false]),
            VariantSet([false, false, true]),
            VariantSet([true, true, false]),
            VariantSet([true, false, true]),
            VariantSet([false, true, true]),
            VariantSet([true, true, true]),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementPlacement {
    pub kind: ElementKind,
    pub slot: Slot,
    pub cell: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathSelection {
    pub segment: Segment,
    pub variants: VariantSet,
}

/// Decoded layout of a feasible design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedGeometry {
    pub placements: [ElementPlacement; ELEMENT_COUNT],
    pub paths: [PathSelection; SEGMENT_COUNT],
    pub segment_cells: [BTreeSet<Cell>; SEGMENT_COUNT],
    pub dummy_flags: [bool; SEGMENT_COUNT],
}

impl RealizedGeometry {
    pub fn cell_of(&self, kind: ElementKind) -> Cell {
        self.placements[kind.index()].cell
    }

    /// Terminals of a segment in routing order.
    pub fn terminals(&self, segment: Segment) -> (Cell, Cell) {
        let (a, b) = segment.elements();
        routing_order(self.cell_of(a), self.cell_of(b))
    }

    pub fn has_dummy(&self) -> bool {
        self.dummy_flags.iter().any(|&d| d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Feasible(RealizedGeometry),
    OneHotViolation(u32),
}

/// Candidate cells for every element, `[low, high]` per kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElementLayout {
    pub input_port: [Cell; 2],
    pub cap1: [Cell; 2],
    pub inductor: [Cell; 2],
    pub cap2: [Cell; 2],
    pub output_port: [Cell; 2],
}

impl Default for ElementLayout {
    fn default() -> Self {
        Self {
            input_port: [Cell::new(1, 4), Cell::new(1, 12)],
            cap1: [Cell::new(3, 4), Cell::new(3, 12)],
            inductor: [Cell::new(6, 4), Cell::new(6, 12)],
            cap2: [Cell::new(8, 4), Cell::new(8, 12)],
            output_port: [Cell::new(10, 4), Cell::new(10, 12)],
        }
    }
}

impl ElementLayout {
    pub fn candidates(&self, kind: ElementKind) -> [Cell; 2] {
        match kind {
            ElementKind::InputPort => self.input_port,
            ElementKind::Cap1 => self.cap1,
            ElementKind::Inductor => self.inductor,
            ElementKind::Cap2 => self.cap2,
            ElementKind::OutputPort => self.output_port,
        }
    }

    pub fn cell(&self, kind: ElementKind, slot: Slot) -> Cell {
        let [low, high] = self.candidates(kind);
        match slot {
            Slot::Low => low,
            Slot::High => high,
        }
    }
}

/// Grid plus candidate slots: everything needed to turn bits into geometry.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Board {
    pub grid: GridSpec,
    pub layout: ElementLayout,
}

impl Board {
    pub fn new(grid: GridSpec, layout: ElementLayout) -> Result<Self> {
        let board = Self { grid, layout };
        board.validate()?;
        Ok(board)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let mut seen = BTreeSet::new();
        for kind in ElementKind::ALL {
            let [low, high] = self.layout.candidates(kind);
            if low == high {
                return Err(Error::InvalidConfig(format!(
                    "{kind:?} candidates coincide at {low}"
                )));
            }
            for c in [low, high] {
                if !self.grid.contains(c) {
                    return Err(Error::InvalidConfig(format!("{kind:?} candidate {c} is off-grid")));
                }
                if !seen.insert(c) {
                    return Err(Error::InvalidConfig(format!("candidate cell {c} is shared")));
                }
            }
        }
        Ok(())
    }

    pub fn decode(&self, x: &DesignVector) -> DecodeOutcome {
        let z = one_hot_violation(x);
        if z > 0 {
            return DecodeOutcome::OneHotViolation(z);
        }

        let placements = ElementKind::ALL.map(|kind| {
            let slot = if x.element_pair(kind.index()) == [true, false] {
                Slot::Low
            } else {
                Slot::High
            };
            ElementPlacement {
                kind,
                slot,
                cell: self.layout.cell(kind, slot),
            }
        });

        let paths = Segment::ALL.map(|segment| PathSelection {
            segment,
            variants: VariantSet::from_bits(x.path_triple(segment.index())),
        });

        let mut dummy_flags = [false; SEGMENT_COUNT];
        let segment_cells = Segment::ALL.map(|segment| {
            let (a, b) = segment.elements();
            let (start, end) = routing_order(
                placements[a.index()].cell,
                placements[b.index()].cell,
            );
            let variants = paths[segment.index()].variants;
            if variants.is_empty() {
                dummy_flags[segment.index()] = true;
                dummy_conductor(start, end, &self.grid)
            } else {
                route_union(start, end, variants)
            }
        });

        DecodeOutcome::Feasible(RealizedGeometry {
            placements,
            paths,
            segment_cells,
            dummy_flags,
        })
    }

    /// Inverse of [`Board::decode`] for layouts without dummy conductors.
    pub fn encode(&self, g: &RealizedGeometry) -> Result<DesignVector> {
        let mut bits = [false; DESIGN_BITS];

        for (m, kind) in ElementKind::ALL.into_iter().enumerate() {
            let p = &g.placements[m];
            if p.kind != kind {
                return Err(Error::NotEncodable(format!(
                    "placement {m} is {:?}, expected {kind:?}",
                    p.kind
                )));
            }
            let slot = Slot::ALL
                .into_iter()
                .find(|&s| self.layout.cell(kind, s) == p.cell)
                .ok_or_else(|| {
                    Error::NotEncodable(format!("{kind:?} at {} is not a candidate cell", p.cell))
                })?;
            bits[2 * m..2 * m + 2].copy_from_slice(&slot.bits());
        }

        for segment in Segment::ALL {
            let s = segment.index();
            if g.dummy_flags[s] {
                return Err(Error::NotEncodable(format!(
                    "segment {segment:?} carries a dummy conductor"
                )));
            }
            let (a, b) = g.terminals(segment);
            let cells = &g.segment_cells[s];
            let recorded = g.paths[s].variants;
            let chosen = if !recorded.is_empty() && route_union(a, b, recorded) == *cells {
                recorded
            } else {
                VariantSet::nonempty_subsets()
                    .into_iter()
                    .find(|&vs| route_union(a, b, vs) == *cells)
                    .ok_or_else(|| {
                        Error::NotEncodable(format!(
                            "segment {segment:?} cells match no route or union of routes"
                        ))
                    })?
            };
            let o = ELEMENT_BITS + 3 * s;
            bits[o..o + 3].copy_from_slice(&chosen.bits());
        }

        Ok(DesignVector(bits))
    }
}

/// Sum over the five element pairs of `(x[2m-1] + x[2m] - 1)^2`.
pub fn one_hot_violation(x: &DesignVector) -> u32 {
    (0..ELEMENT_COUNT)
        .map(|m| {
            let [p, q] = x.element_pair(m);
            let d = p as i32 + q as i32 - 1;
            (d * d) as u32
        })
        .sum()
}

/// Routes are drawn from the upper terminal to the lower one; equal heights
/// go left to right.
pub fn routing_order(a: Cell, b: Cell) -> (Cell, Cell) {
    if a.iy > b.iy || (a.iy == b.iy && a.ix <= b.ix) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Cell sequence from `a` to `b` for one route variant.
pub fn route_path(a: Cell, b: Cell, v: Variant) -> Vec<Cell> {
    let dy = b.iy - a.iy;
    let first_y = match v {
        Variant::A => 0,
        Variant::B => dy.abs() / 2,
        Variant::C => dy.abs(),
    };

    let mut path = Vec::with_capacity(a.manhattan(b) as usize + 1);
    let mut cur = a;
    path.push(cur);
    let step_y = |cur: &mut Cell, path: &mut Vec<Cell>, n: i32| {
        for _ in 0..n {
            cur.iy += dy.signum();
            path.push(*cur);
        }
    };
    step_y(&mut cur, &mut path, first_y);
    while cur.ix != b.ix {
        cur.ix += (b.ix - cur.ix).signum();
        path.push(cur);
    }
    step_y(&mut cur, &mut path, dy.abs() - first_y);
    path
}

/// Union of the cells of every selected variant.
pub fn route_union(a: Cell, b: Cell, variants: VariantSet) -> BTreeSet<Cell> {
    variants
        .iter()
        .flat_map(|v| route_path(a, b, v))
        .collect()
}

/// Filled bounding rectangle of two terminals, clipped to the grid.
pub fn dummy_conductor(a: Cell, b: Cell, grid: &GridSpec) -> BTreeSet<Cell> {
    let (x0, x1) = (a.ix.min(b.ix).max(1), a.ix.max(b.ix).min(grid.nx));
    let (y0, y1) = (a.iy.min(b.iy).max(1), a.iy.max(b.iy).min(grid.ny));
    (x0..=x1)
        .flat_map(|ix| (y0..=y1).map(move |iy| Cell::new(ix, iy)))
        .collect()
}

/// All 2592 one-hot, single-route designs in index-lexicographic order over
/// (element slots, then route variants), low before high and A before B before C.
pub fn enumerate_canonical() -> impl Iterator<Item = DesignVector> {
    (0..CANONICAL_COUNT).map(|mut k| {
        let mut variants = [Variant::A; SEGMENT_COUNT];
        for s in (0..SEGMENT_COUNT).rev() {
            variants[s] = Variant::ALL[k % 3];
            k /= 3;
        }
        let mut slots = [Slot::Low; ELEMENT_COUNT];
        for m in (0..ELEMENT_COUNT).rev() {
            slots[m] = Slot::ALL[k % 2];
            k /= 2;
        }
        DesignVector::from_choices(slots, variants)
    })
}

/// True when the cells form a single 4-connected component.
pub fn is_four_connected(cells: &BTreeSet<Cell>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in [
            Cell::new(c.ix + 1, c.iy),
            Cell::new(c.ix - 1, c.iy),
            Cell::new(c.ix, c.iy + 1),
            Cell::new(c.ix, c.iy - 1),
        ] {
            if cells.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == cells.len()
}

/// True when consecutive cells are 4-adjacent and no cell repeats.
pub fn is_simple_path(path: &[Cell]) -> bool {
    let distinct: BTreeSet<_> = path.iter().collect();
    distinct.len() == path.len() && path.windows(2).all(|w| w[0].is_adjacent(w[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(s: &str) -> DesignVector {
        s.parse().unwrap()
    }

    fn feasible(board: &Board, s: &str) -> RealizedGeometry {
        match board.decode(&dv(s)) {
            DecodeOutcome::Feasible(g) => g,
            other => panic!("expected feasible decode, got {other:?}"),
        }
    }

    #[test]
    fn violation_counts() {
        assert_eq!(one_hot_violation(&dv("0000000000010001100100")), 5);
        assert_eq!(one_hot_violation(&dv("0101101010010001100100")), 0);
        assert_eq!(one_hot_violation(&dv("1101101010010001100100")), 1);
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!("0101".parse::<DesignVector>().is_err());
        assert!("010110101001000110010x".parse::<DesignVector>().is_err());
        assert!("01011010100100011001001".parse::<DesignVector>().is_err());
    }

    #[test]
    fn decode_reference_layout() {
        let board = Board::default();
        let g = feasible(&board, "0101101010010001100100");
        let slots: Vec<Slot> = g.placements.iter().map(|p| p.slot).collect();
        assert_eq!(slots, [Slot::High, Slot::High, Slot::Low, Slot::Low, Slot::Low]);
        let variants: Vec<Vec<Variant>> = g.paths.iter().map(|p| p.variants.iter().collect()).collect();
        assert_eq!(
            variants,
            vec![vec![Variant::B], vec![Variant::C], vec![Variant::A], vec![Variant::A]]
        );
        assert_eq!(g.dummy_flags, [false; 4]);
    }

    #[test]
    fn decode_disconnected_layout_uses_dummies() {
        let board = Board::default();
        let g = feasible(&board, "1001011001000001000100");
        assert_eq!(g.dummy_flags, [true, false, true, false]);
        let (a, b) = g.terminals(Segment::InputCap1);
        assert_eq!(g.segment_cells[0], dummy_conductor(a, b, &board.grid));
    }

    #[test]
    fn decode_violation_skips_geometry() {
        let board = Board::default();
        assert_eq!(
            board.decode(&dv("0000000000111111111111")),
            DecodeOutcome::OneHotViolation(5)
        );
    }

    #[test]
    fn encode_all_low_all_a() {
        let board = Board::default();
        let x = DesignVector::from_choices([Slot::Low; 5], [Variant::A; 4]);
        assert_eq!(x.to_string(), "1010101010100100100100");
        let g = feasible(&board, "1010101010100100100100");
        assert_eq!(board.encode(&g).unwrap(), x);
    }

    #[test]
    fn encode_rejects_dummy_segment() {
        let board = Board::default();
        let g = feasible(&board, "1001011001000001000100");
        assert!(matches!(board.encode(&g), Err(Error::NotEncodable(_))));
    }

    #[test]
    fn dummy_cells_match_no_route_union() {
        // Enumerate all seven variant subsets for the dummy segments of the
        // disconnected reference layout.
        let board = Board::default();
        let g = feasible(&board, "1001011001000001000100");
        for s in [0, 2] {
            let (a, b) = g.terminals(Segment::ALL[s]);
            for vs in VariantSet::nonempty_subsets() {
                assert_ne!(route_union(a, b, vs), g.segment_cells[s]);
            }
        }
        // Forget the flag: encode must still refuse because the cells match nothing.
        let mut stripped = g.clone();
        stripped.dummy_flags = [false; 4];
        assert!(board.encode(&stripped).is_err());
    }

    #[test]
    fn encode_rejects_foreign_cells() {
        let board = Board::default();
        let mut g = feasible(&board, "0101101010010001100100");
        g.segment_cells[1].insert(Cell::new(10, 15));
        assert!(board.encode(&g).is_err());
        let mut g = feasible(&board, "0101101010010001100100");
        g.placements[2].cell = Cell::new(5, 5);
        assert!(board.encode(&g).is_err());
    }

    #[test]
    fn multi_hot_is_union() {
        let board = Board::default();
        let g = feasible(&board, "0101101010011001100100");
        let (a, b) = g.terminals(Segment::InputCap1);
        let mut expected: BTreeSet<Cell> = route_path(a, b, Variant::B).into_iter().collect();
        expected.extend(route_path(a, b, Variant::C));
        assert_eq!(g.segment_cells[0], expected);
        assert!(is_four_connected(&g.segment_cells[0]));
    }

    #[test]
    fn straight_column_route() {
        let expected: Vec<Cell> = (3..=9).map(|iy| Cell::new(2, iy)).collect();
        for v in Variant::ALL {
            assert_eq!(route_path(Cell::new(2, 3), Cell::new(2, 9), v), expected);
        }
    }

    #[test]
    fn route_a_literal() {
        let got = route_path(Cell::new(1, 1), Cell::new(4, 5), Variant::A);
        let expected = [(1, 1), (2, 1), (3, 1), (4, 1), (4, 2), (4, 3), (4, 4), (4, 5)]
            .map(|(x, y)| Cell::new(x, y));
        assert_eq!(got, expected);
    }

    #[test]
    fn route_b_turns_halfway() {
        // Reference walk: 2 Y steps, 3 X steps, 3 Y steps.
        let mut walk = vec![Cell::new(1, 1)];
        let mut c = Cell::new(1, 1);
        for (dx, dy, n) in [(0, 1, 2), (1, 0, 3), (0, 1, 3)] {
            for _ in 0..n {
                c = Cell::new(c.ix + dx, c.iy + dy);
                walk.push(c);
            }
        }
        let got = route_path(Cell::new(1, 1), Cell::new(4, 6), Variant::B);
        assert_eq!(got, walk);
        assert_eq!(got.len(), 3 + 5 + 1);
    }

    #[test]
    fn dummy_rectangles() {
        let grid = GridSpec::default();
        assert_eq!(
            dummy_conductor(Cell::new(1, 1), Cell::new(1, 1), &grid),
            BTreeSet::from([Cell::new(1, 1)])
        );
        assert_eq!(dummy_conductor(Cell::new(2, 2), Cell::new(4, 5), &grid).len(), 12);
        assert_eq!(dummy_conductor(Cell::new(1, 1), Cell::new(10, 15), &grid).len(), 150);
    }

    #[test]
    fn canonical_enumeration_shape() {
        let all: Vec<DesignVector> = enumerate_canonical().collect();
        assert_eq!(all.len(), CANONICAL_COUNT);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), CANONICAL_COUNT);
        assert_eq!(all[0].to_string(), "1010101010100100100100");
        assert_eq!(all[1].to_string(), "1010101010100100100010");
        for x in &all {
            assert_eq!(one_hot_violation(x), 0);
            for s in 0..SEGMENT_COUNT {
                assert_eq!(x.path_triple(s).iter().filter(|&&b| b).count(), 1);
            }
        }
    }

    #[test]
    fn board_validation() {
        assert!(Board::default().validate().is_ok());
        let layout = ElementLayout {
            cap1: [Cell::new(3, 4), Cell::new(3, 4)],
            ..ElementLayout::default()
        };
        assert!(Board::new(GridSpec::default(), layout).is_err());
        let mut layout = ElementLayout::default();
        layout.output_port[1] = Cell::new(11, 12);
        assert!(Board::new(GridSpec::default(), layout).is_err());
        let grid = GridSpec { nx: 1, ..GridSpec::default() };
        assert!(grid.validate().is_err());
    }
}
