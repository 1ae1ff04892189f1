//! Brute-force ground truth: chronological loop erasure, exhaustive
//! enumeration of closed walks, and a Monte-Carlo first-return estimator.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{parse_steps, steps_to_string, Point, Sap, Step};

/// Largest walk length accepted by [`count_last_loop`].
pub const COUNT_MAX_LEN: usize = 14;
/// Largest walk length accepted by [`last_loop_histogram`].
pub const HISTOGRAM_MAX_LEN: usize = 12;

/// A nearest-neighbour walk; self-intersections are allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    pub steps: Vec<Step>,
    pub start: Point,
}

impl Walk {
    pub fn parse(s: &str) -> Result<Walk> {
        Ok(Walk { steps: parse_steps(s)?, start: Point::ORIGIN })
    }

    pub fn end(&self) -> Point {
        self.steps.iter().fold(self.start, |p, s| p + s.delta())
    }

    pub fn is_closed(&self) -> bool {
        self.end() == self.start
    }
}

/// One erased loop: the vertex where it closed and its steps from there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErasedLoop {
    pub anchor: Point,
    pub steps: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErasureRecord {
    pub erased_loops: Vec<ErasedLoop>,
    /// The surviving self-avoiding path, start first.
    pub skeleton: Vec<Point>,
    closed: bool,
}

impl ErasureRecord {
    /// The last erased loop of a closed walk.
    pub fn last(&self) -> Result<&ErasedLoop> {
        if !self.closed {
            let end = *self.skeleton.last().expect("skeleton holds the start");
            return Err(Error::OpenWalkNoLast(end.x, end.y));
        }
        self.erased_loops.last().ok_or(Error::EmptyInput)
    }
}

/// Lawler's chronological loop erasure. On revisiting a vertex of the
/// current path, the loop from that vertex to the revisit is removed.
pub fn loop_erase(w: &Walk) -> ErasureRecord {
    let mut path = vec![w.start];
    let mut position: HashMap<Point, usize> = HashMap::from([(w.start, 0)]);
    let mut loops = Vec::new();
    let mut cur = w.start;
    for s in &w.steps {
        let next = cur + s.delta();
        if let Some(&i) = position.get(&next) {
            let mut steps: Vec<Step> = path[i..].windows(2).map(|e| Step::between(e[0], e[1]).unwrap()).collect();
            steps.push(*s);
            loops.push(ErasedLoop { anchor: next, steps: steps_to_string(&steps) });
            for p in path.drain(i + 1..) {
                position.remove(&p);
            }
        } else {
            position.insert(next, path.len());
            path.push(next);
        }
        cur = next;
    }
    let closed = cur == w.start && !w.steps.is_empty();
    ErasureRecord { erased_loops: loops, skeleton: path, closed }
}

/// Depth-first walker that keeps the loop-erased path of its current
/// prefix, with undo.
struct Explorer {
    radius: i32,
    side: usize,
    /// 1 + index on the path, 0 when off the path.
    on_path: Vec<u32>,
    path: Vec<Point>,
}

impl Explorer {
    fn new(max_len: usize) -> Explorer {
        let radius = max_len as i32 + 1;
        let side = (2 * radius + 1) as usize;
        let mut e = Explorer { radius, side, on_path: vec![0; side * side], path: Vec::with_capacity(max_len + 1) };
        e.push(Point::ORIGIN);
        e
    }

    fn cell(&self, p: Point) -> usize {
        (p.x + self.radius) as usize + self.side * (p.y + self.radius) as usize
    }

    fn push(&mut self, p: Point) {
        let c = self.cell(p);
        self.path.push(p);
        self.on_path[c] = self.path.len() as u32;
    }

    /// Applies a step to `next`; returns the erased segment for undo.
    fn step(&mut self, next: Point) -> Option<Vec<Point>> {
        let c = self.cell(next);
        let idx = self.on_path[c];
        if idx == 0 {
            self.push(next);
            None
        } else {
            let removed: Vec<Point> = self.path.drain(idx as usize..).collect();
            for p in &removed {
                let c = self.cell(*p);
                self.on_path[c] = 0;
            }
            Some(removed)
        }
    }

    fn undo(&mut self, erased: Option<Vec<Point>>) {
        match erased {
            None => {
                let p = self.path.pop().expect("pushed before");
                let c = self.cell(p);
                self.on_path[c] = 0;
            }
            Some(removed) => {
                for p in removed {
                    self.push(p);
                }
            }
        }
    }
}

/// Walks of length `remaining` from the explorer state that end at `target`,
/// visiting `leaf` on each.
fn explore(e: &mut Explorer, cur: Point, remaining: usize, target: Point, leaf: &mut dyn FnMut(&Explorer)) {
    if remaining == 0 {
        if cur == target {
            leaf(e);
        }
        return;
    }
    for s in Step::ALL {
        let next = cur + s.delta();
        if (next - target).manhattan() as usize > remaining - 1 {
            continue;
        }
        let undo = e.step(next);
        explore(e, next, remaining - 1, target, leaf);
        e.undo(undo);
    }
}

/// First two steps, the shard unit for parallel enumeration.
fn prefixes() -> Vec<[Step; 2]> {
    Step::ALL.iter().flat_map(|&a| Step::ALL.iter().map(move |&b| [a, b])).collect()
}

/// Number of closed walks of length `len` from the origin whose last erased
/// loop is `p` (anchored at the origin, with its orientation).
pub fn count_last_loop(p: &Sap, len: usize) -> Result<u64> {
    if len > COUNT_MAX_LEN {
        return Err(Error::LengthTooLarge { len, max: COUNT_MAX_LEN });
    }
    if len < p.len() || !len.is_multiple_of(2) {
        return Ok(0);
    }
    // The last step closes the last loop at the origin, so the erased path of
    // the first len − 1 steps must be exactly the vertex sequence of p.
    let target: Vec<Point> = p.vertices().to_vec();
    let last = *target.last().unwrap();
    let shards = prefixes();
    let total = shards
        .par_iter()
        .map(|prefix| {
            let mut e = Explorer::new(len);
            let mut cur = Point::ORIGIN;
            let mut undo = Vec::new();
            let steps_left = len - 1;
            if steps_left < 2 {
                // Only the edge with len = 2: one step, handled by prefix[0].
                if prefix[1] != Step::R {
                    return 0;
                }
                let next = cur + prefix[0].delta();
                e.step(next);
                return u64::from(e.path == target);
            }
            for s in prefix {
                cur = cur + s.delta();
                undo.push(e.step(cur));
            }
            if (cur - last).manhattan() as usize > steps_left - 2 {
                return 0;
            }
            let mut count = 0u64;
            explore(&mut e, cur, steps_left - 2, last, &mut |ex: &Explorer| {
                if ex.path == target {
                    count += 1;
                }
            });
            count
        })
        .sum();
    Ok(total)
}

/// Histogram of last erased loops over all closed walks of length `len`,
/// keyed by the loop's step string from the origin.
pub fn last_loop_histogram(len: usize) -> Result<BTreeMap<String, u64>> {
    if len > HISTOGRAM_MAX_LEN {
        return Err(Error::LengthTooLarge { len, max: HISTOGRAM_MAX_LEN });
    }
    if len == 0 || !len.is_multiple_of(2) {
        return Ok(BTreeMap::new());
    }
    let shards: Vec<Step> = Step::ALL.to_vec();
    let parts: Vec<BTreeMap<String, u64>> = shards
        .par_iter()
        .map(|&first| {
            let mut e = Explorer::new(len);
            let cur = first.delta();
            let u = e.step(cur);
            let mut hist: BTreeMap<String, u64> = BTreeMap::new();
            // Walk of len − 1 steps ending next to the origin, then close.
            for last in Step::ALL {
                let before = Point::ORIGIN - last.delta();
                explore(&mut e, cur, len - 2, before, &mut |ex: &Explorer| {
                    let mut steps: Vec<Step> =
                        ex.path.windows(2).map(|w| Step::between(w[0], w[1]).unwrap()).collect();
                    steps.push(last);
                    *hist.entry(steps_to_string(&steps)).or_default() += 1;
                });
            }
            e.undo(u);
            hist
        })
        .collect();
    let mut out = BTreeMap::new();
    for h in parts {
        for (k, v) in h {
            *out.entry(k).or_default() += v;
        }
    }
    Ok(out)
}

/// Result of the Monte-Carlo estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub truncated_fraction: f64,
    pub samples: u64,
    pub returned: u64,
    pub hits: u64,
    pub generator: &'static str,
}

const MC_CHUNK: u64 = 4096;

/// Uniform walks from the origin run until their first return (abandoned
/// after `max_len` steps). The estimate is the fraction of returning walks
/// whose last erased loop is `p`. Sample `i` uses ChaCha8 stream
/// `i / 4096` of `seed`, so results do not depend on the thread count.
pub fn mc_first_return(p: &Sap, samples: u64, max_len: usize, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if max_len < 2 || !max_len.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("max_len {max_len} must be even and at least 2")));
    }
    let target = p.vertices().to_vec();
    let chunks = samples.div_ceil(MC_CHUNK);
    let (returned, hits) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut returned = 0u64;
            let mut hits = 0u64;
            let mut path: Vec<Point> = Vec::new();
            let mut position: HashMap<Point, usize> = HashMap::new();
            for _ in 0..n {
                path.clear();
                position.clear();
                path.push(Point::ORIGIN);
                position.insert(Point::ORIGIN, 0);
                let mut cur = Point::ORIGIN;
                for _ in 0..max_len {
                    let next = cur + Step::ALL[rng.gen_range(0..4)].delta();
                    if next == Point::ORIGIN {
                        returned += 1;
                        if path == target {
                            hits += 1;
                        }
                        break;
                    }
                    if let Some(&i) = position.get(&next) {
                        for q in path.drain(i + 1..) {
                            position.remove(&q);
                        }
                    } else {
                        position.insert(next, path.len());
                        path.push(next);
                    }
                    cur = next;
                }
            }
            (returned, hits)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let estimate = if returned == 0 { 0.0 } else { hits as f64 / returned as f64 };
    let stderr = if returned == 0 { f64::INFINITY } else { (estimate * (1.0 - estimate) / returned as f64).sqrt() };
    Ok(McEstimate {
        estimate,
        stderr,
        truncated_fraction: (samples - returned) as f64 / samples as f64,
        samples,
        returned,
        hits,
        generator: "ChaCha8",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::parse_sap;

    #[test]
    fn erasure_examples() {
        let r = loop_erase(&Walk::parse("RL").unwrap());
        assert_eq!(r.last().unwrap().steps, "RL");
        let r = loop_erase(&Walk::parse("RULD").unwrap());
        assert_eq!(r.last().unwrap().steps, "RULD");
        let r = loop_erase(&Walk::parse("RLUD").unwrap());
        let loops: Vec<&str> = r.erased_loops.iter().map(|l| l.steps.as_str()).collect();
        assert_eq!(loops, ["RL", "UD"]);
        let r = loop_erase(&Walk::parse("RULDRL").unwrap());
        let loops: Vec<&str> = r.erased_loops.iter().map(|l| l.steps.as_str()).collect();
        assert_eq!(loops, ["RULD", "RL"]);
        let open = loop_erase(&Walk::parse("RRUL").unwrap());
        assert!(matches!(open.last(), Err(Error::OpenWalkNoLast(1, 1))));
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_last_loop(&parse_sap("RL").unwrap(), 2).unwrap(), 1);
        assert_eq!(count_last_loop(&parse_sap("RL").unwrap(), 4).unwrap(), 7);
        assert_eq!(count_last_loop(&parse_sap("RULD").unwrap(), 6).unwrap(), 12);
        assert_eq!(count_last_loop(&parse_sap("RULD").unwrap(), 5).unwrap(), 0);
        assert_eq!(count_last_loop(&parse_sap("RULD").unwrap(), 12).unwrap(), 23464);
        assert!(matches!(count_last_loop(&parse_sap("RL").unwrap(), 16), Err(Error::LengthTooLarge { .. })));
    }

    #[test]
    fn histograms() {
        let h2 = last_loop_histogram(2).unwrap();
        assert_eq!(h2.len(), 4);
        assert!(h2.values().all(|&c| c == 1));
        let h4 = last_loop_histogram(4).unwrap();
        assert_eq!(h4.values().sum::<u64>(), 36);
        assert_eq!(h4["RL"], 7);
        assert_eq!(h4.iter().filter(|(k, _)| k.len() == 4).count(), 8);
        assert!(h4.iter().filter(|(k, _)| k.len() == 4).all(|(_, &v)| v == 1));
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let p = parse_sap("RL").unwrap();
        let a = mc_first_return(&p, 3000, 200, 7).unwrap();
        let b = mc_first_return(&p, 3000, 200, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.returned > 0 && a.truncated_fraction < 0.6);
        assert!((a.estimate - 0.125).abs() < 5.0 * a.stderr + 0.02, "{a:?}");
        assert!(mc_first_return(&p, 0, 10, 1).is_err());
        assert!(mc_first_return(&p, 10, 11, 1).is_err());
    }
}
