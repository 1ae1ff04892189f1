//! The regularised Green matrix C on the square lattice.
//!
//! Exact entries have the form `a + b/π`. They are generated from three
//! seeds (`c(0,0) = 0`, `c(1,0) = −1` and the closed diagonal
//! `c(m,m) = −(4/π)·Σ_{k=0}^{m−1} 1/(2k+1)`) and the discrete-harmonic
//! recursion `4·c(v) = 4·δ_{v,0} + Σ_{u~v} c(u)`, solved for one unknown at a
//! time while sweeping outward diagonal by diagonal. An independent
//! quadrature of the integral representation is provided as an oracle.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use rug::Rational;

use crate::error::{Error, Result};
use crate::lattice::{PatchGraph, Point, SquareLattice};
use crate::ring::{BigFloat, PiPoly};

/// Entry of C, always of χ-degree at most one.
pub type CEntry = PiPoly;

/// Entries of C restricted to a patch; `rows[i][j] = c(v_j − v_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: Vec<Vec<CEntry>>,
}

impl CMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> &CEntry {
        &self.rows[i][j]
    }
}

/// Octant table `t[x][y]`, `0 ≤ y ≤ x ≤ radius`.
struct CTable {
    radius: usize,
    t: Vec<Vec<PiPoly>>,
}

impl CTable {
    fn build(radius: usize) -> CTable {
        let radius = radius.max(2);
        let lambda = PiPoly::from(SquareLattice::DEGREE as i64);
        let mut t: Vec<Vec<Option<PiPoly>>> = (0..=radius).map(|x| vec![None; x + 1]).collect();

        t[0][0] = Some(PiPoly::zero());
        t[1][0] = Some(PiPoly::from(-1));
        // Diagonal seeds. The lower summation index is 0, so that c(1,1) = −4/π.
        let mut harmonic = Rational::new();
        for m in 1..=radius {
            harmonic += Rational::from((1, 2 * m as i64 - 1));
            t[m][m] = Some(PiPoly::linear(Rational::new(), Rational::from(-4) * harmonic.clone()));
        }
        // First off-diagonal from the symmetric recursion at (m,m):
        // 4·c(m,m) = 2·c(m+1,m) + 2·c(m,m−1).
        for m in 1..radius {
            let v = &(&PiPoly::from(2) * t[m][m].as_ref().unwrap()) - t[m][m - 1].as_ref().unwrap();
            t[m + 1][m] = Some(v);
        }
        let get = |t: &Vec<Vec<Option<PiPoly>>>, x: usize, y: i64| -> PiPoly {
            let y = y.unsigned_abs() as usize;
            let (a, b) = if x >= y { (x, y) } else { (y, x) };
            t[a][b].clone().expect("recursion order visits known entries only")
        };
        // Diagonal d+1 from diagonal d, y increasing:
        // c(x+1,y) = 4·c(x,y) − c(x−1,y) − c(x,y+1) − c(x,y−1).
        for d in 1..radius {
            for y in 0.. {
                let x = y + d;
                if x + 1 > radius {
                    break;
                }
                let here = get(&t, x, y as i64);
                let v = &(&lambda * &here)
                    - &(&(&get(&t, x - 1, y as i64) + &get(&t, x, y as i64 + 1)) + &get(&t, x, y as i64 - 1));
                t[x + 1][y] = Some(v);
            }
        }
        let t = t
            .into_iter()
            .map(|row| row.into_iter().map(|e| e.expect("every octant entry is filled")).collect())
            .collect();
        CTable { radius, t }
    }

    fn lookup(&self, dx: i64, dy: i64) -> Option<&PiPoly> {
        let (a, b) = octant(dx, dy);
        if a > self.radius {
            return None;
        }
        Some(&self.t[a][b])
    }
}

fn octant(dx: i64, dy: i64) -> (usize, usize) {
    let (ax, ay) = (dx.unsigned_abs() as usize, dy.unsigned_abs() as usize);
    if ax >= ay {
        (ax, ay)
    } else {
        (ay, ax)
    }
}

fn table() -> &'static RwLock<CTable> {
    static TABLE: OnceLock<RwLock<CTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(CTable::build(16)))
}

/// Makes sure every offset with coordinates up to `radius` is memoised.
pub fn ensure_radius(radius: usize) {
    if table().read().expect("C table lock").radius >= radius {
        return;
    }
    let mut guard = table().write().expect("C table lock");
    if guard.radius < radius {
        let new_radius = radius.max(guard.radius * 2);
        *guard = CTable::build(new_radius);
    }
}

/// Exact `c(dx, dy) = a + b/π`.
pub fn c_entry(dx: i64, dy: i64) -> CEntry {
    let (a, _) = octant(dx, dy);
    ensure_radius(a);
    table()
        .read()
        .expect("C table lock")
        .lookup(dx, dy)
        .cloned()
        .expect("radius was ensured")
}

/// Integrand of the integral representation after taking the real part:
/// `(1/τ)·(1 − cos(2m·atan(1/τ))·((τ−1)/(τ+1))^k)`, `m = dx − dy`, `k = dx + dy`.
fn integrand(tau: f64, m: i64, k: i64) -> f64 {
    if tau == 0.0 {
        // Limit τ → 0: 1 − cos(mπ)(−1)^k = 1 − (−1)^{m+k} = 0 to first order;
        // the integrand tends to a finite value handled by the interior nodes.
        return 0.0;
    }
    let theta = (1.0 / tau).atan();
    let r = (tau - 1.0) / (tau + 1.0);
    (1.0 - (2.0 * m as f64 * theta).cos() * r.powi(k as i32)) / tau
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7/15 panel: (estimate, error estimate).
fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, budget: &mut usize) -> Option<f64> {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    while let Some((lo, hi, t)) = stack.pop() {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let (v, err) = gk15(f, lo, hi);
        if err <= t || (hi - lo) < 1e-14 {
            total += v;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, t * 0.5));
            stack.push((mid, hi, t * 0.5));
        }
    }
    Some(total)
}

/// Numeric `c(dx, dy)` by adaptive Gauss–Kronrod quadrature of the integral
/// representation, split at τ = 1 with `τ = 1/s` on the infinite half.
pub fn c_entry_numeric(dx: i64, dy: i64, quadrature_tol: f64) -> Result<f64> {
    if quadrature_tol.is_nan() || quadrature_tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("quadrature tolerance {quadrature_tol} must be positive")));
    }
    // The representation has a pole at τ = 1 when dx + dy < 0, so move the
    // offset into the first octant first.
    let (a, b) = octant(dx, dy);
    let (m, k) = ((a - b) as i64, (a + b) as i64);
    let near = move |tau: f64| integrand(tau, m, k);
    let far = move |s: f64| if s == 0.0 { 0.0 } else { integrand(1.0 / s, m, k) / (s * s) };
    let mut budget = 20_000usize;
    let tol = quadrature_tol * 0.25;
    let a = adaptive(&near, 0.0, 1.0, tol, &mut budget);
    let b = adaptive(&far, 0.0, 1.0, tol, &mut budget);
    match (a, b) {
        (Some(a), Some(b)) => Ok(-(a + b) / std::f64::consts::PI),
        _ => Err(Error::QuadratureNotConverged { dx, dy, evaluations: 20_000 * 15 }),
    }
}

/// Exact C restricted to a patch.
pub fn c_matrix(patch: &PatchGraph) -> CMatrix {
    CMatrix { rows: c_block(&patch.vertices) }
}

pub fn c_matrix_numeric(patch: &PatchGraph, prec: u32) -> Vec<Vec<BigFloat>> {
    c_block_numeric(&patch.vertices, prec)
}

/// `c(b − a)` for all pairs of `points`.
pub fn c_block(points: &[Point]) -> Vec<Vec<CEntry>> {
    let mut cache: HashMap<(usize, usize), CEntry> = HashMap::new();
    pairwise(points, |dx, dy| cache.entry(octant(dx, dy)).or_insert_with(|| c_entry(dx, dy)).clone())
}

pub fn c_block_numeric(points: &[Point], prec: u32) -> Vec<Vec<BigFloat>> {
    let mut cache: HashMap<(usize, usize), BigFloat> = HashMap::new();
    pairwise(points, |dx, dy| cache.entry(octant(dx, dy)).or_insert_with(|| c_entry(dx, dy).eval(prec)).clone())
}

fn pairwise<T>(points: &[Point], mut f: impl FnMut(i64, i64) -> T) -> Vec<Vec<T>> {
    points
        .iter()
        .map(|a| points.iter().map(|b| f((b.x - a.x) as i64, (b.y - a.y) as i64)).collect())
        .collect()
}

/// `c(dx,dy)` as f64, for quick comparisons.
pub fn c_entry_f64(dx: i64, dy: i64) -> f64 {
    c_entry(dx, dy).eval_f64()
}
