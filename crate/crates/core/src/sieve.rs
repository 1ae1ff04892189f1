//! Last-erased-loop fractions `F_p/λ^{ℓ(p)}` and their partial sums.
//!
//! With `M = I + (1/λ)·C|_p·B_p` on the patch around `p`,
//! `F_p/λ^ℓ = deg^T·adj(M)·1 / λ^{ℓ+1}`. Here `B_p` holds the lattice edges
//! touching the support of `p` (the difference `A − A_{G∖p}`) and `deg` its
//! row sums; the factor `1/λ` is the value of `z` at which the resolvent is
//! regularised. The bilinear form of the adjugate
//! is taken from the determinant lemma,
//! `deg^T·adj(M)·1 = det(M + 1·deg^T) − det(M)`, so the exact path needs two
//! determinants over ℚ[χ].
//!
//! Eliminating the neighbour vertices gives the same value from `C` on the
//! support alone, `1^T·adj(C|_p)·1 / λ^ℓ`. The numeric path uses this
//! ℓ×ℓ form (one LU factorisation), which is what makes long polygons cheap.

use std::collections::BTreeMap;
use std::sync::mpsc;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{c_block, c_block_numeric, c_matrix};
use crate::lattice::{build_patch, enumerate_anchored_saps, KeyMode, PatchGraph, Sap, SquareLattice, SupportKey};
use crate::linalg::{adjugate_fl, matrix_norm1, pipoly_det, FloatLu};
use crate::ring::{check_precision, BigFloat, PiPoly};
use crate::store::{CacheRecord, Store, ENGINE_VERSION};

const LAMBDA: u32 = SquareLattice::DEGREE;
const GUARD_BITS: u32 = 64;

/// One evaluated fraction.
#[derive(Clone, Debug)]
pub struct FractionResult {
    pub sap_key: String,
    pub exact: Option<PiPoly>,
    pub numeric: BigFloat,
    pub ell: usize,
    pub patch_size: usize,
    pub precision: u32,
}

/// `M = I + (1/λ)·C|_p·B_p` over ℚ[χ].
pub fn patch_matrix(patch: &PatchGraph) -> Vec<Vec<PiPoly>> {
    let c = c_matrix(patch);
    let adj = patch.sieve_adjacency();
    let n = patch.len();
    let inv_lambda = Rational::from((1, LAMBDA));
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = adj[j].iter().fold(PiPoly::zero(), |acc, &k| &acc + c.get(i, k)).scale(&inv_lambda);
                    if i == j {
                        e = &e + &PiPoly::one();
                    }
                    e
                })
                .collect()
        })
        .collect()
}

fn lambda_power(ell: usize) -> Integer {
    Integer::from(LAMBDA).pow((ell + 1) as u32)
}

/// Exact `F_p/λ^{ℓ(p)}` as an element of ℚ[χ].
pub fn fraction_exact(p: &Sap) -> PiPoly {
    fraction_exact_on_patch(&build_patch(p), p.len())
}

pub(crate) fn fraction_exact_on_patch(patch: &PatchGraph, ell: usize) -> PiPoly {
    let m = patch_matrix(patch);
    let deg = patch.sieve_deg();
    let det0 = pipoly_det(&m);
    let shifted: Vec<Vec<PiPoly>> = m
        .iter()
        .map(|row| row.iter().zip(&deg).map(|(e, &d)| e + &PiPoly::from(d as i64)).collect())
        .collect();
    let det1 = pipoly_det(&shifted);
    (&det1 - &det0).div_exact_int(&lambda_power(ell)).expect("λ is nonzero")
}

/// Same quantity through the full Faddeev–LeVerrier adjugate; `O(n⁴)`
/// ring operations, meant for cross-checking on small patches.
pub fn fraction_exact_fl(p: &Sap) -> PiPoly {
    let patch = build_patch(p);
    let (adj, _) = adjugate_fl(&patch_matrix(&patch));
    let deg = patch.sieve_deg();
    let mut total = PiPoly::zero();
    for (i, row) in adj.iter().enumerate() {
        let d = PiPoly::from(deg[i] as i64);
        let s = row.iter().fold(PiPoly::zero(), |acc, e| &acc + e);
        total = &total + &(&d * &s);
    }
    total.div_exact_int(&lambda_power(p.len())).expect("λ is nonzero")
}

/// Numeric `F_p/λ^{ℓ(p)}` by pivoted LU in MPFR arithmetic. Falls back to the
/// exact path when the 1-norm condition estimate exceeds `2^{precision/2}`.
/// The fraction on the support of `p` only: with `K = C|_p`,
/// `F_p/λ^ℓ = 1^T·adj(K)·1 / λ^ℓ = (det(K + 1·1^T) − det K) / λ^ℓ`.
/// Equal to [`fraction_exact`] as an element of ℚ[χ].
pub fn fraction_exact_reduced(p: &Sap) -> PiPoly {
    let k = c_block(p.vertices());
    let det0 = pipoly_det(&k);
    let one = PiPoly::one();
    let shifted: Vec<Vec<PiPoly>> = k.iter().map(|row| row.iter().map(|e| e + &one).collect()).collect();
    let det1 = pipoly_det(&shifted);
    let scale = Integer::from(LAMBDA).pow(p.len() as u32);
    (&det1 - &det0).div_exact_int(&scale).expect("λ is nonzero")
}

/// MPFR evaluation of the reduced form with `GUARD_BITS` extra bits; falls
/// back to the exact reduced form when the Hager estimate of the condition
/// number exceeds `2^(precision/2)`.
pub fn fraction_numeric(p: &Sap, precision: u32) -> Result<BigFloat> {
    check_precision(precision)?;
    match fraction_lu(p, precision) {
        Some(v) => Ok(v),
        None => {
            log::warn!("ill-conditioned support matrix for {}, using the exact path", p.step_string());
            let v = fraction_exact_reduced(p).eval(precision);
            if !v.is_finite() {
                return Err(Error::PrecisionInsufficient(format!("fallback failed for {}", p.step_string())));
            }
            Ok(v)
        }
    }
}

/// `F_p/λ^ℓ = 1^T·adj(C|_p)·1 / λ^ℓ` on the support alone, by LU.
fn fraction_lu(p: &Sap, precision: u32) -> Option<BigFloat> {
    let prec = precision + GUARD_BITS;
    let k = c_block_numeric(p.vertices(), prec);
    let norm = matrix_norm1(&k, prec);
    let lu = FloatLu::new(k, prec)?;
    let cond = norm * lu.inverse_norm1_estimate();
    let limit = Float::with_val(prec, Float::u_exp(1, (precision / 2) as i32));
    if !cond.is_finite() || cond > limit {
        return None;
    }
    let ones = vec![Float::with_val(prec, 1); p.len()];
    let mut sum = Float::new(prec);
    for xi in lu.solve(&ones) {
        sum += xi;
    }
    let scale = Integer::from(LAMBDA).pow(p.len() as u32);
    let v = lu.det() * sum / Float::with_val(prec, scale);
    Some(Float::with_val(precision, v))
}

/// Exact when asked, numeric always.
pub fn evaluate(p: &Sap, exact: bool, precision: u32) -> Result<FractionResult> {
    check_precision(precision)?;
    let patch = build_patch(p);
    let (exact_value, numeric) = if exact {
        let e = fraction_exact_on_patch(&patch, p.len());
        let v = e.eval(precision);
        (Some(e), v)
    } else {
        (None, fraction_numeric(p, precision)?)
    };
    Ok(FractionResult {
        sap_key: p.canonical_key(KeyMode::OrientedAnchored),
        exact: exact_value,
        numeric,
        ell: p.len(),
        patch_size: patch.len(),
        precision,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Exact,
    Numeric,
}

/// One row of the partial-sum table.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub len: usize,
    pub s: BigFloat,
    pub count: u64,
}

#[derive(Clone, Debug, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `L,count,S` with S to `digits` significant digits.
    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("L,count,S\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.len, r.count, format_float(&r.s, digits)));
        }
        out
    }
}

pub fn format_float(v: &BigFloat, digits: usize) -> String {
    v.to_string_radix(10, Some(digits))
}

/// A vertex support together with its anchored-oriented multiplicity.
#[derive(Clone, Debug)]
pub struct ShapeClass {
    pub key: SupportKey,
    pub representative: Sap,
    pub ell: usize,
    pub multiplicity: u64,
}

/// Groups the anchored oriented SAPs of length ≤ `max_len` by support,
/// in deterministic key order.
pub fn shape_classes(max_len: usize) -> Vec<ShapeClass> {
    let mut classes: BTreeMap<(usize, SupportKey), ShapeClass> = BTreeMap::new();
    for sap in enumerate_anchored_saps(max_len) {
        let key = sap.support_key();
        classes
            .entry((sap.len(), key.clone()))
            .and_modify(|c| c.multiplicity += 1)
            .or_insert(ShapeClass { key, ell: sap.len(), representative: sap, multiplicity: 1 });
    }
    classes.into_values().collect()
}

/// Values of one class, as computed by a sweep worker or read from a cache.
#[derive(Clone, Debug)]
pub struct ClassValue {
    pub exact: Option<PiPoly>,
    pub numeric: BigFloat,
}

pub fn compute_class(sap: &Sap, mode: SweepMode, precision: u32) -> Result<ClassValue> {
    match mode {
        SweepMode::Exact => {
            let e = fraction_exact(sap);
            let numeric = e.eval(precision);
            Ok(ClassValue { exact: Some(e), numeric })
        }
        SweepMode::Numeric => Ok(ClassValue { exact: None, numeric: fraction_numeric(sap, precision)? }),
    }
}

/// Accumulates `S(L)` rows for even `L ≤ max_len` from per-length sums.
pub fn table_from_sums(max_len: usize, sums: &BTreeMap<usize, (BigFloat, u64)>, precision: u32) -> SweepTable {
    let mut acc = Float::new(precision);
    let mut count = 0u64;
    let mut rows = Vec::new();
    for len in (2..=max_len).step_by(2) {
        if let Some((s, c)) = sums.get(&len) {
            acc += s;
            count += c;
        }
        rows.push(SweepRow { len, s: acc.clone(), count });
    }
    SweepTable { rows }
}

/// Least-squares slope of `log(1 − S(L))` against `log L` over rows with `L ≥ 6`.
pub fn fit_exponent(rows: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(l, s)| *l >= 6.0 && *s < 1.0)
        .map(|(l, s)| (l.ln(), (1.0 - s).ln()))
        .collect();
    let distinct = {
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
        xs.len()
    };
    if pts.len() < 4 || distinct < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 4 rows with L ≥ 6 and distinct L, got {} ({} distinct)",
            pts.len(),
            distinct
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Exact-to-float helper for rational constants used in tests and `verify`.
pub fn rational_to_float(q: &Rational, precision: u32) -> BigFloat {
    Float::with_val(precision, q)
}

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub max_len: usize,
    pub mode: SweepMode,
    pub precision: u32,
    /// Evaluate one representative per support instead of every anchored SAP.
    pub dedup: bool,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub table: SweepTable,
    /// Fractions evaluated in this run.
    pub computed: usize,
    /// Classes replayed from the cache.
    pub cached: usize,
}

fn cached_value(r: &CacheRecord, mode: SweepMode, precision: u32) -> Option<ClassValue> {
    match mode {
        SweepMode::Exact => {
            let e: PiPoly = r.exact.as_deref()?.parse().ok()?;
            let numeric = e.eval(precision);
            Some(ClassValue { exact: Some(e), numeric })
        }
        SweepMode::Numeric => {
            if r.precision != precision {
                return None;
            }
            let v = Float::parse(&r.numeric).ok()?;
            Some(ClassValue { exact: None, numeric: Float::with_val(precision, v) })
        }
    }
}

/// Partial sums `S(L)` over anchored oriented SAPs through the origin.
///
/// Runs on the current rayon pool. Sums are accumulated in a fixed order, so
/// the table does not depend on the number of threads. With a store, cached
/// classes are replayed and new ones appended as they finish.
pub fn sweep(opts: &SweepOptions, store: Option<&mut Store>) -> Result<SweepOutcome> {
    check_precision(opts.precision)?;
    if opts.max_len < 2 {
        return Err(Error::InvalidArgument(format!("max_len {} is below 2", opts.max_len)));
    }
    if !opts.dedup {
        if store.is_some() {
            return Err(Error::InvalidArgument("the cache requires shape dedup".into()));
        }
        return sweep_all(opts);
    }
    let classes = shape_classes(opts.max_len);
    let keys: Vec<String> = classes.iter().map(|c| c.key.encode()).collect();
    let mut values: Vec<Option<ClassValue>> = vec![None; classes.len()];
    if let Some(st) = store.as_deref() {
        for (i, k) in keys.iter().enumerate() {
            values[i] = st.lookup_current(k).and_then(|r| cached_value(r, opts.mode, opts.precision));
        }
    }
    let pending: Vec<usize> = (0..classes.len()).filter(|&i| values[i].is_none()).collect();
    let cached = classes.len() - pending.len();
    log::info!("sweep L ≤ {}: {} classes, {} cached", opts.max_len, classes.len(), cached);

    let compute = |i: usize| -> Result<(usize, ClassValue)> {
        Ok((i, compute_class(&classes[i].representative, opts.mode, opts.precision)?))
    };
    let results: Vec<(usize, ClassValue)> = match store {
        None => pending.par_iter().map(|&i| compute(i)).collect::<Result<_>>()?,
        Some(st) => {
            let (tx, rx) = mpsc::channel::<CacheRecord>();
            let sink = &mut *st;
            let out = std::thread::scope(|scope| {
                let writer = scope.spawn(move || -> Result<()> {
                    for r in rx {
                        sink.append(r)?;
                    }
                    Ok(())
                });
                let out = pending
                    .par_iter()
                    .map_with(tx, |tx, &i| {
                        let (i, v) = compute(i)?;
                        let c = &classes[i];
                        let record = CacheRecord {
                            shape_key: keys[i].clone(),
                            ell: c.ell,
                            multiplicity: c.multiplicity,
                            exact: v.exact.as_ref().map(|e| e.to_string()),
                            numeric: v.numeric.to_string_radix(10, None),
                            precision: opts.precision,
                            engine_version: ENGINE_VERSION.to_string(),
                        };
                        // A closed channel means the writer failed; its error is reported below.
                        let _ = tx.send(record);
                        Ok((i, v))
                    })
                    .collect::<Result<Vec<_>>>();
                writer.join().expect("cache writer panicked")?;
                out
            })?;
            st.compact()?;
            out
        }
    };
    let computed = results.len();
    for (i, v) in results {
        values[i] = Some(v);
    }
    let mut sums: BTreeMap<usize, (BigFloat, u64)> = BTreeMap::new();
    for (c, v) in classes.iter().zip(&values) {
        let v = v.as_ref().expect("every class is cached or computed");
        let e = sums.entry(c.ell).or_insert_with(|| (Float::new(opts.precision), 0));
        e.0 += Float::with_val(opts.precision, &v.numeric * c.multiplicity);
        e.1 += c.multiplicity;
    }
    Ok(SweepOutcome { table: table_from_sums(opts.max_len, &sums, opts.precision), computed, cached })
}

fn sweep_all(opts: &SweepOptions) -> Result<SweepOutcome> {
    let saps: Vec<Sap> = enumerate_anchored_saps(opts.max_len).collect();
    let values: Vec<ClassValue> =
        saps.par_iter().map(|p| compute_class(p, opts.mode, opts.precision)).collect::<Result<_>>()?;
    let mut sums: BTreeMap<usize, (BigFloat, u64)> = BTreeMap::new();
    for (p, v) in saps.iter().zip(&values) {
        let e = sums.entry(p.len()).or_insert_with(|| (Float::new(opts.precision), 0));
        e.0 += &v.numeric;
        e.1 += 1;
    }
    Ok(SweepOutcome { table: table_from_sums(opts.max_len, &sums, opts.precision), computed: saps.len(), cached: 0 })
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{parse_sap, rectangle};

    #[test]
    fn edge_is_one_eighth() {
        let f = fraction_exact(&parse_sap("RL").unwrap());
        assert_eq!(f, PiPoly::constant(Rational::from((1, 8))));
    }

    #[test]
    fn unit_square_matches_closed_form() {
        // 128(π − 2)/(4⁴π³) = (1/2)χ² − χ³
        let f = fraction_exact(&parse_sap("RULD").unwrap());
        let expected = PiPoly::from_coeffs(vec![
            Rational::new(),
            Rational::new(),
            Rational::from((1, 2)),
            Rational::from(-1),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn small_rectangles() {
        let v = |s: &Sap| fraction_exact(s).eval_f64();
        assert!((v(&rectangle(2, 1)) - 0.002585).abs() < 5e-7);
        assert!((v(&rectangle(3, 1)) - 0.00035499).abs() < 5e-9);
        assert!((v(&rectangle(2, 2)) - 0.00044623).abs() < 5e-9);
    }

    #[test]
    fn fl_path_agrees() {
        for s in ["RL", "RULD", "RRULLD"] {
            let p = parse_sap(s).unwrap();
            assert_eq!(fraction_exact(&p), fraction_exact_fl(&p));
        }
    }

    #[test]
    fn numeric_agrees_with_exact() {
        for s in ["RL", "RULD", "RRULLD", "RRUULLDD", "RRULULLDDR"] {
            let p = parse_sap(s).unwrap();
            let e = fraction_exact(&p).eval(256);
            let n = fraction_numeric(&p, 256).unwrap();
            let diff = Float::with_val(256, &e - &n).abs();
            assert!(diff < 1e-60, "{s}: {e} vs {n}");
        }
        assert!(fraction_numeric(&parse_sap("RL").unwrap(), 52).is_err());
    }

    #[test]
    fn exponent_fit() {
        let synthetic: Vec<(f64, f64)> =
            (3..=7).map(|k| (2.0 * k as f64, 1.0 - (2.0 * k as f64).powf(-0.6))).collect();
        assert!((fit_exponent(&synthetic).unwrap() + 0.6).abs() < 1e-6);
        assert!(fit_exponent(&[(8.0, 0.7), (8.0, 0.7)]).is_err());
    }
}
