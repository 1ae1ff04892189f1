//! Square-lattice geometry: steps, anchored oriented self-avoiding polygons,
//! their enumeration, and the patch graph induced by a polygon and its
//! neighbourhood.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: i32,
    pub y: i32,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0, y: 0 };

    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self) -> u32 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    pub fn neighbors(self) -> [Point; 4] {
        Step::ALL.map(|s| self + s.delta())
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// A unit step. The declaration order R, U, L, D is the enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    R,
    U,
    L,
    D,
}

impl Step {
    pub const ALL: [Step; 4] = [Step::R, Step::U, Step::L, Step::D];

    pub fn delta(self) -> Point {
        match self {
            Step::R => Point::new(1, 0),
            Step::U => Point::new(0, 1),
            Step::L => Point::new(-1, 0),
            Step::D => Point::new(0, -1),
        }
    }

    pub fn inverse(self) -> Step {
        match self {
            Step::R => Step::L,
            Step::U => Step::D,
            Step::L => Step::R,
            Step::D => Step::U,
        }
    }

    pub fn from_char(c: char) -> Result<Step> {
        match c {
            'R' => Ok(Step::R),
            'U' => Ok(Step::U),
            'L' => Ok(Step::L),
            'D' => Ok(Step::D),
            other => Err(Error::InvalidStep(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Step::R => 'R',
            Step::U => 'U',
            Step::L => 'L',
            Step::D => 'D',
        }
    }

    /// The step joining two lattice neighbours.
    pub fn between(from: Point, to: Point) -> Option<Step> {
        let d = to - from;
        Step::ALL.into_iter().find(|s| s.delta() == d)
    }
}

pub fn steps_to_string(steps: &[Step]) -> String {
    steps.iter().map(|s| s.as_char()).collect()
}

pub fn parse_steps(s: &str) -> Result<Vec<Step>> {
    s.trim().chars().map(Step::from_char).collect()
}

/// Infinite vertex-transitive lattice. Only the square lattice is provided.
pub trait Lattice {
    /// Vertex degree λ.
    fn degree(&self) -> u32;
    fn neighbors(&self, p: Point) -> Vec<Point>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SquareLattice;

impl SquareLattice {
    pub const DEGREE: u32 = 4;
}

impl Lattice for SquareLattice {
    fn degree(&self) -> u32 {
        Self::DEGREE
    }

    fn neighbors(&self, p: Point) -> Vec<Point> {
        p.neighbors().to_vec()
    }
}

/// Anchored, oriented self-avoiding closed walk starting at the origin.
///
/// `vertices` holds the ℓ distinct vertices in visiting order, starting at the
/// origin; the closing return to the origin is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sap {
    steps: Vec<Step>,
    vertices: Vec<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyMode {
    /// Distinguishes anchor and orientation.
    OrientedAnchored,
    /// Quotients the starting point only.
    Shape,
}

impl Sap {
    pub fn parse(s: &str) -> Result<Sap> {
        parse_sap(s)
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Sap> {
        if steps.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut vertices = Vec::with_capacity(steps.len());
        let mut seen = HashSet::with_capacity(steps.len());
        let mut cur = Point::ORIGIN;
        for (i, s) in steps.iter().enumerate() {
            if !seen.insert(cur) {
                return Err(Error::NotSimple(cur.x, cur.y));
            }
            vertices.push(cur);
            cur = cur + s.delta();
            if cur == Point::ORIGIN && i + 1 < steps.len() {
                return Err(Error::NotSimple(0, 0));
            }
        }
        if cur != Point::ORIGIN {
            return Err(Error::NotClosed(cur.x, cur.y));
        }
        Ok(Sap { steps, vertices })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// ℓ(p).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_edge(&self) -> bool {
        self.steps.len() == 2
    }

    pub fn step_string(&self) -> String {
        steps_to_string(&self.steps)
    }

    /// Same cycle traversed in the opposite direction, anchored at the origin.
    pub fn reversed(&self) -> Sap {
        let steps: Vec<Step> = self.steps.iter().rev().map(|s| s.inverse()).collect();
        Sap::from_steps(steps).expect("reversal of a SAP is a SAP")
    }

    /// Re-anchors the cycle at its `k`-th vertex, then translates that vertex
    /// to the origin.
    pub fn rotated(&self, k: usize) -> Sap {
        let n = self.steps.len();
        let steps: Vec<Step> = (0..n).map(|i| self.steps[(i + k) % n]).collect();
        Sap::from_steps(steps).expect("rotation of a SAP is a SAP")
    }

    pub fn canonical_key(&self, mode: KeyMode) -> String {
        match mode {
            KeyMode::OrientedAnchored => self.step_string(),
            KeyMode::Shape => (0..self.len())
                .map(|k| {
                    let n = self.steps.len();
                    (0..n).map(|i| self.steps[(i + k) % n].as_char()).collect::<String>()
                })
                .min()
                .unwrap_or_default(),
        }
    }

    /// Translation-normalised vertex support.
    pub fn support_key(&self) -> SupportKey {
        SupportKey::from_points(&self.vertices)
    }
}

impl fmt::Display for Sap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.step_string())
    }
}

impl FromStr for Sap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sap> {
        parse_sap(s)
    }
}

pub fn parse_sap(s: &str) -> Result<Sap> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::EmptyInput);
    }
    Sap::from_steps(parse_steps(s)?)
}

/// Vertex set translated so that its minimal x and y are zero, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportKey(Vec<Point>);

impl SupportKey {
    pub fn from_points(points: &[Point]) -> SupportKey {
        let min_x = points.iter().map(|p| p.x).min().unwrap_or(0);
        let min_y = points.iter().map(|p| p.y).min().unwrap_or(0);
        let set: BTreeSet<Point> = points.iter().map(|p| Point::new(p.x - min_x, p.y - min_y)).collect();
        SupportKey(set.into_iter().collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    /// Compact text form `x,y;x,y;…`.
    pub fn encode(&self) -> String {
        self.0.iter().map(|p| format!("{},{}", p.x, p.y)).collect::<Vec<_>>().join(";")
    }

    pub fn decode(s: &str) -> Result<SupportKey> {
        let pts = s
            .split(';')
            .map(|pair| {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("bad support point {pair:?}")))?;
                let x = x.trim().parse().map_err(|_| Error::Parse(format!("bad x in {pair:?}")))?;
                let y = y.trim().parse().map_err(|_| Error::Parse(format!("bad y in {pair:?}")))?;
                Ok(Point::new(x, y))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SupportKey::from_points(&pts))
    }
}

/// Depth-first enumeration of anchored oriented SAPs from the origin.
///
/// Steps are tried in the order R, U, L, D; a branch is abandoned when the
/// remaining step budget is smaller than the distance back to the origin.
pub struct SapEnumerator {
    max_len: usize,
    steps: Vec<Step>,
    path: Vec<Point>,
    visited: HashSet<Point>,
    next_dir: Vec<u8>,
}

pub fn enumerate_anchored_saps(max_len: usize) -> SapEnumerator {
    SapEnumerator {
        max_len,
        steps: Vec::new(),
        path: vec![Point::ORIGIN],
        visited: HashSet::from([Point::ORIGIN]),
        next_dir: vec![0],
    }
}

impl Iterator for SapEnumerator {
    type Item = Sap;

    fn next(&mut self) -> Option<Sap> {
        loop {
            let depth = self.steps.len();
            let dir = self.next_dir.last_mut()?;
            if *dir as usize >= Step::ALL.len() {
                self.next_dir.pop();
                if let Some(p) = self.path.pop() {
                    if depth > 0 {
                        self.visited.remove(&p);
                    }
                }
                self.steps.pop();
                if self.next_dir.is_empty() {
                    return None;
                }
                continue;
            }
            let step = Step::ALL[*dir as usize];
            *dir += 1;
            let cur = *self.path.last().expect("path is never empty while enumerating");
            let next = cur + step.delta();
            let len = depth + 1;
            if len > self.max_len {
                continue;
            }
            if next == Point::ORIGIN {
                if len >= 2 {
                    let mut steps = self.steps.clone();
                    steps.push(step);
                    let vertices = self.path.clone();
                    return Some(Sap { steps, vertices });
                }
                continue;
            }
            if self.visited.contains(&next) || (self.max_len - len) < next.manhattan() as usize {
                continue;
            }
            self.steps.push(step);
            self.path.push(next);
            self.visited.insert(next);
            self.next_dir.push(0);
        }
    }
}

/// Induced subgraph on a polygon's support and its lattice neighbours.
///
/// Support vertices come first, in visiting order, followed by the
/// neighbours in sorted order.
#[derive(Clone, Debug)]
pub struct PatchGraph {
    pub vertices: Vec<Point>,
    pub index: HashMap<Point, usize>,
    /// Row-major 0/1 adjacency, `n × n`.
    pub b_matrix: Vec<Vec<u8>>,
    pub deg: Vec<u32>,
    support_len: usize,
}

impl PatchGraph {
    pub fn from_support(support: &[Point]) -> PatchGraph {
        let mut vertices: Vec<Point> = Vec::new();
        let mut index = HashMap::new();
        for &p in support {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(p) {
                e.insert(vertices.len());
                vertices.push(p);
            }
        }
        let support_len = vertices.len();
        let ring: BTreeSet<Point> = support
            .iter()
            .flat_map(|p| p.neighbors())
            .filter(|p| !index.contains_key(p))
            .collect();
        for p in ring {
            index.insert(p, vertices.len());
            vertices.push(p);
        }
        let n = vertices.len();
        let mut b_matrix = vec![vec![0u8; n]; n];
        for (i, p) in vertices.iter().enumerate() {
            for q in p.neighbors() {
                if let Some(&j) = index.get(&q) {
                    b_matrix[i][j] = 1;
                }
            }
        }
        let deg = b_matrix.iter().map(|row| row.iter().map(|&b| b as u32).sum()).collect();
        PatchGraph { vertices, index, b_matrix, deg, support_len }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Number of support vertices (they occupy the first rows).
    pub fn support_len(&self) -> usize {
        self.support_len
    }

    /// Adjacency lists derived from `b_matrix`.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        self.b_matrix
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &b)| b == 1).map(|(j, _)| j).collect())
            .collect()
    }

    /// Adjacency lists of the edges with at least one endpoint on the
    /// support. This is `A − A_{G∖p}`, the matrix entering the sieve
    /// determinants; edges between two neighbour vertices are not in it.
    pub fn sieve_adjacency(&self) -> Vec<Vec<usize>> {
        let k = self.support_len;
        self.b_matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, &b)| b == 1 && (i < k || j < k))
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect()
    }

    /// Row sums of the sieve adjacency.
    pub fn sieve_deg(&self) -> Vec<u32> {
        self.sieve_adjacency().iter().map(|r| r.len() as u32).collect()
    }

    /// Largest coordinate extent of the patch along either axis.
    pub fn extent(&self) -> i32 {
        let (min_x, max_x) = min_max(self.vertices.iter().map(|p| p.x));
        let (min_y, max_y) = min_max(self.vertices.iter().map(|p| p.y));
        (max_x - min_x + 1).max(max_y - min_y + 1)
    }
}

fn min_max(it: impl Iterator<Item = i32>) -> (i32, i32) {
    it.fold((i32::MAX, i32::MIN), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn build_patch(p: &Sap) -> PatchGraph {
    PatchGraph::from_support(p.vertices())
}

/// Boundary of the axis-aligned `w × h` rectangle, counter-clockwise from
/// the lower-left corner.
pub fn rectangle(w: usize, h: usize) -> Sap {
    let mut s = String::new();
    s.extend(std::iter::repeat_n('R', w));
    s.extend(std::iter::repeat_n('U', h));
    s.extend(std::iter::repeat_n('L', w));
    s.extend(std::iter::repeat_n('D', h));
    parse_sap(&s).expect("rectangle boundary is a SAP")
}
