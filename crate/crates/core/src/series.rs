//! Truncated power series with exact rational coefficients, and the
//! generating functions of closed walks on the square lattice.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::finite::Digraph;
use crate::lattice::{build_patch, Point, Sap, SquareLattice};
use crate::ring::{catalan, check_precision, pi, BigFloat};
use crate::sieve::fraction_exact;

/// Power series known up to and including `z^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatSeries {
    coeffs: Vec<Rational>,
}

impl RatSeries {
    /// Coefficients beyond `order` are dropped, missing ones are zero.
    pub fn new(mut coeffs: Vec<Rational>, order: usize) -> RatSeries {
        coeffs.resize(order + 1, Rational::new());
        RatSeries { coeffs }
    }

    pub fn from_integers<I: IntoIterator<Item = Integer>>(coeffs: I, order: usize) -> RatSeries {
        RatSeries::new(coeffs.into_iter().map(Rational::from).collect(), order)
    }

    pub fn zero(order: usize) -> RatSeries {
        RatSeries::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> RatSeries {
        RatSeries::new(vec![Rational::from(1)], order)
    }

    /// `z^k` truncated at `order`.
    pub fn monomial(k: usize, order: usize) -> RatSeries {
        let mut s = RatSeries::zero(order);
        if k <= order {
            s.coeffs[k] = Rational::from(1);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `[z^n]`; `None` beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Option<&Rational> {
        self.coeffs.get(n)
    }

    pub fn truncate(&self, order: usize) -> RatSeries {
        RatSeries::new(self.coeffs[..=order.min(self.order())].to_vec(), order.min(self.order()))
    }

    pub fn scale(&self, k: &Rational) -> RatSeries {
        RatSeries { coeffs: self.coeffs.iter().map(|c| Rational::from(c * k)).collect() }
    }

    /// Multiplication by `z^k`; the order grows by `k`.
    pub fn shift(&self, k: usize) -> RatSeries {
        let mut coeffs = vec![Rational::new(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        RatSeries { coeffs }
    }

    /// `1/self`, defined when the constant term is nonzero.
    pub fn recip(&self) -> Result<RatSeries> {
        let c0 = &self.coeffs[0];
        if *c0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let inv0 = Rational::from(c0.recip_ref());
        let n = self.order();
        let mut out = vec![Rational::new(); n + 1];
        out[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Rational::new();
            for j in 1..=k {
                if self.coeffs[j] != 0 {
                    acc += Rational::from(&self.coeffs[j] * &out[k - j]);
                }
            }
            out[k] = -acc * &inv0;
        }
        Ok(RatSeries { coeffs: out })
    }

    /// `exp(self)`, defined when the constant term is zero.
    pub fn exp(&self) -> Result<RatSeries> {
        if self.coeffs[0] != 0 {
            return Err(Error::InvalidArgument("exp needs a zero constant term".into()));
        }
        let n = self.order();
        let mut g = vec![Rational::new(); n + 1];
        g[0] = Rational::from(1);
        // n·g_n = Σ_{k=1}^{n} k·f_k·g_{n−k}
        for m in 1..=n {
            let mut acc = Rational::new();
            for k in 1..=m {
                if self.coeffs[k] != 0 {
                    acc += Rational::from(&self.coeffs[k] * &g[m - k]) * k as u32;
                }
            }
            g[m] = acc / m as u32;
        }
        Ok(RatSeries { coeffs: g })
    }

    /// `log(self)` for a series with constant term 1.
    pub fn log(&self) -> Result<RatSeries> {
        if self.coeffs[0] != 1 {
            return Err(Error::InvalidArgument("log needs constant term 1".into()));
        }
        let d = self.derivative();
        let q = &d * &self.recip()?.truncate(d.order());
        Ok(q.integral())
    }

    pub fn derivative(&self) -> RatSeries {
        let n = self.order();
        if n == 0 {
            return RatSeries::zero(0);
        }
        RatSeries { coeffs: (1..=n).map(|k| Rational::from(&self.coeffs[k] * k as u32)).collect() }
    }

    /// Formal antiderivative with zero constant; the order grows by one.
    pub fn integral(&self) -> RatSeries {
        let mut coeffs = vec![Rational::new()];
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, c)| Rational::from(c / (k as u32 + 1))));
        RatSeries { coeffs }
    }

    /// `z·f′(z)`.
    pub fn z_derivative(&self) -> RatSeries {
        RatSeries { coeffs: self.coeffs.iter().enumerate().map(|(k, c)| Rational::from(c * k as u32)).collect() }
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| *c.denom() == 1)
    }

    /// Evaluates the truncated polynomial at `z`.
    pub fn eval_f64(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c.to_f64())
    }

    pub fn eval(&self, z: &BigFloat) -> BigFloat {
        let prec = z.prec();
        self.coeffs.iter().rev().fold(Float::new(prec), |acc, c| acc * z + c)
    }
}

impl fmt::Display for RatSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let sep = if first { "" } else { " + " };
            match k {
                0 => write!(f, "{sep}{c}")?,
                1 => write!(f, "{sep}{c}*z")?,
                _ => write!(f, "{sep}{c}*z^{k}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order() + 1)
    }
}

impl Add<&RatSeries> for &RatSeries {
    type Output = RatSeries;
    fn add(self, rhs: &RatSeries) -> RatSeries {
        let n = self.order().min(rhs.order());
        RatSeries { coeffs: (0..=n).map(|k| Rational::from(&self.coeffs[k] + &rhs.coeffs[k])).collect() }
    }
}

impl Sub<&RatSeries> for &RatSeries {
    type Output = RatSeries;
    fn sub(self, rhs: &RatSeries) -> RatSeries {
        let n = self.order().min(rhs.order());
        RatSeries { coeffs: (0..=n).map(|k| Rational::from(&self.coeffs[k] - &rhs.coeffs[k])).collect() }
    }
}

impl Neg for &RatSeries {
    type Output = RatSeries;
    fn neg(self) -> RatSeries {
        RatSeries { coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }
}

impl Mul<&RatSeries> for &RatSeries {
    type Output = RatSeries;
    fn mul(self, rhs: &RatSeries) -> RatSeries {
        let n = self.order().min(rhs.order());
        let mut out = vec![Rational::new(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(n + 1 - i) {
                if *b != 0 {
                    out[i + j] += Rational::from(a * b);
                }
            }
        }
        RatSeries { coeffs: out }
    }
}

/// Integer series truncated at a fixed order, used internally for walk counts.
type IntSeries = Vec<Integer>;

fn int_mul(a: &[Integer], b: &[Integer], order: usize) -> IntSeries {
    let mut out = vec![Integer::new(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            if *y != 0 {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Inverse of an integer series with constant term ±1.
fn int_recip(a: &[Integer], order: usize) -> IntSeries {
    let c0 = a[0].to_i32().expect("unit constant term");
    debug_assert!(c0 == 1 || c0 == -1);
    let mut out = vec![Integer::new(); order + 1];
    out[0] = Integer::from(c0);
    for k in 1..=order {
        let mut acc = Integer::new();
        for j in 1..=k.min(a.len() - 1) {
            if a[j] != 0 {
                acc += &a[j] * &out[k - j];
            }
        }
        out[k] = -acc * c0;
    }
    out
}

/// Determinant of a matrix of integer series whose constant part is the
/// identity, by elimination without pivoting.
fn int_series_det(mut m: Vec<Vec<IntSeries>>, order: usize) -> IntSeries {
    let n = m.len();
    let mut det = {
        let mut one = vec![Integer::new(); order + 1];
        one[0] = Integer::from(1);
        one
    };
    for k in 0..n {
        let pivot = m[k][k].clone();
        det = int_mul(&det, &pivot, order);
        if k + 1 == n {
            break;
        }
        let inv = int_recip(&pivot, order);
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            if row[k].iter().all(|c| *c == 0) {
                continue;
            }
            let factor = int_mul(&row[k], &inv, order);
            for j in k + 1..n {
                if pivot_row[j].iter().all(|c| *c == 0) {
                    continue;
                }
                let t = int_mul(&factor, &pivot_row[j], order);
                for (a, b) in row[j].iter_mut().zip(t) {
                    *a -= b;
                }
            }
        }
    }
    det
}

fn binom(n: u32, k: i64) -> Integer {
    if k < 0 || k > n as i64 {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k as u32))
}

/// `[z^{2n}]R(z) = C(2n,n)²`, odd coefficients zero.
pub fn r_series(order: usize) -> RatSeries {
    resolvent_entry_series(0, 0, order)
}

/// Walks of each length with displacement `(dx, dy)`:
/// `[z^n] = C(n,(n+dx+dy)/2)·C(n,(n+dx−dy)/2)`.
pub fn resolvent_entry_series(dx: i64, dy: i64, order: usize) -> RatSeries {
    RatSeries::from_integers(resolvent_entry_ints(dx, dy, order), order)
}

fn resolvent_entry_ints(dx: i64, dy: i64, order: usize) -> IntSeries {
    (0..=order)
        .map(|n| {
            let s = n as i64 + dx + dy;
            let d = n as i64 + dx - dy;
            if s % 2 != 0 {
                Integer::new()
            } else {
                binom(n as u32, s / 2) * binom(n as u32, d / 2)
            }
        })
        .collect()
}

/// `R_p(z) = z^{ℓ(p)}·det(I + z·R(z)|_{G_p}·B_p)` up to `z^order`.
pub fn rp_series_infinite(p: &Sap, order: usize) -> Result<RatSeries> {
    let ell = p.len();
    if order < ell {
        return Err(Error::InvalidArgument(format!("order {order} is below the polygon length {ell}")));
    }
    let k = order - ell;
    let patch = build_patch(p);
    let n = patch.len();
    let adj = patch.sieve_adjacency();
    let mut cache = std::collections::HashMap::new();
    let mut entry = |a: Point, b: Point| -> IntSeries {
        let key = ((b.x - a.x).abs(), (b.y - a.y).abs());
        cache
            .entry(key)
            .or_insert_with(|| resolvent_entry_ints(key.0 as i64, key.1 as i64, k))
            .clone()
    };
    let v = &patch.vertices;
    // (z·R·B)_{ij} = z·Σ_{l ~ j} R_{il}
    let mut m: Vec<Vec<IntSeries>> = vec![vec![vec![Integer::new(); k + 1]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let cell = &mut m[i][j];
            for &l in &adj[j] {
                let r = entry(v[i], v[l]);
                for t in 0..k {
                    cell[t + 1] += &r[t];
                }
            }
            if i == j {
                cell[0] += 1;
            }
        }
    }
    let det = int_series_det(m, k);
    Ok(RatSeries::from_integers(det, k).shift(ell))
}

/// Rooted-hike zeta function `exp(∫ (R(z) − 1)/z dz)`.
pub fn zeta_tilde(order: usize) -> RatSeries {
    let r = r_series(order);
    let coeffs: Vec<Rational> =
        (0..=order).map(|n| if n == 0 { Rational::new() } else { Rational::from(&r.coeffs[n] / n as u32) }).collect();
    RatSeries::new(coeffs, order).exp().expect("zero constant term")
}

pub fn mu_tilde(order: usize) -> RatSeries {
    zeta_tilde(order).recip().expect("unit constant term")
}

/// `α = (1/4)·e^{4G/π}`, G Catalan's constant.
pub fn alpha(precision: u32) -> Result<BigFloat> {
    check_precision(precision)?;
    let prec = precision + 32;
    let x = catalan(prec) * 4u32 / pi(prec);
    Ok(Float::with_val(precision, x.exp() / 4u32))
}

/// One row of the coefficient-ratio table.
#[derive(Clone, Debug)]
pub struct RatioPoint {
    pub ell: usize,
    pub ratio: Rational,
    pub scaled_error: f64,
}

/// `[z^ℓ]R_p / [z^ℓ]R` for even `ℓ ≤ order`, with `(ratio − F_p/4^{ℓ(p)})·ℓ`.
pub fn ratio_convergence(p: &Sap, order: usize) -> Result<Vec<RatioPoint>> {
    if order < p.len() + 4 {
        return Err(Error::InvalidArgument(format!("order must be at least ℓ(p) + 4 = {}", p.len() + 4)));
    }
    let rp = rp_series_infinite(p, order)?;
    let r = r_series(order);
    let limit = fraction_exact(p).eval(256);
    let mut out = Vec::new();
    for ell in (p.len()..=order).step_by(2) {
        let ratio = Rational::from(&rp.coeffs[ell] / &r.coeffs[ell]);
        let diff = Float::with_val(256, &ratio) - &limit;
        out.push(RatioPoint { ell, scaled_error: (diff * ell as u32).to_f64(), ratio });
    }
    Ok(out)
}

/// `f_w(ℓ) = [z^ℓ]R(z/λ)`: `C(ℓ,ℓ/2)²·4^{−ℓ}` for even `ℓ ≥ 0`, else 0.
pub fn f_w(ell: i64) -> Rational {
    if ell < 0 || ell % 2 != 0 {
        return Rational::new();
    }
    let c = binom(ell as u32, ell / 2);
    let lam = Integer::from(SquareLattice::DEGREE);
    Rational::from((c.clone() * c, Integer::from(rug::ops::Pow::pow(&lam, ell as u32))))
}

/// The `n × n` periodic square lattice.
#[derive(Clone, Debug)]
pub struct TorusGraph {
    pub n: usize,
    adjacency: Vec<Vec<usize>>,
}

impl TorusGraph {
    pub fn vertex_count(&self) -> usize {
        self.n * self.n
    }

    /// Vertex index of a lattice point, wrapped.
    pub fn index(&self, p: Point) -> usize {
        let n = self.n as i32;
        (p.x.rem_euclid(n) + n * p.y.rem_euclid(n)) as usize
    }

    pub fn adjacency_lists(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Dense 0/1 adjacency matrix (multi-edges of the 2×2 torus counted).
    pub fn adjacency_matrix(&self) -> Vec<Vec<u8>> {
        let big_n = self.vertex_count();
        let mut a = vec![vec![0u8; big_n]; big_n];
        for (i, row) in self.adjacency.iter().enumerate() {
            for &j in row {
                a[i][j] += 1;
            }
        }
        a
    }

    pub fn to_digraph(&self) -> Digraph {
        Digraph::from_adjacency_lists(&self.adjacency)
    }

    /// Eigenvalues `2cos(2πj/n) + 2cos(2πk/n)`.
    pub fn eigenvalues(&self, precision: u32) -> Vec<BigFloat> {
        let prec = precision + 32;
        let two_pi_n = pi(prec) * 2u32 / self.n as u32;
        let cosines: Vec<BigFloat> = (0..self.n).map(|j| Float::with_val(prec, &two_pi_n * j as u32).cos() * 2u32).collect();
        let mut out = Vec::with_capacity(self.n * self.n);
        for a in &cosines {
            for b in &cosines {
                out.push(Float::with_val(precision, a + b));
            }
        }
        out
    }
}

pub fn torus(n: usize) -> Result<TorusGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("torus side {n} must be at least 3")));
    }
    let t = TorusGraph { n, adjacency: Vec::new() };
    let adjacency = (0..n * n)
        .map(|v| {
            let p = Point { x: (v % n) as i32, y: (v / n) as i32 };
            p.neighbors().iter().map(|&q| t.index(q)).collect()
        })
        .collect();
    Ok(TorusGraph { n, adjacency })
}

/// `z^{ℓ(p)}·det(I − zA_{t∖p})/det(I − zA_t)` up to `z^order`.
pub fn rp_series_torus(t: &TorusGraph, p: &Sap, order: usize) -> Result<RatSeries> {
    let patch = build_patch(p);
    let extent = patch.extent();
    if (t.n as i32) < extent + 2 {
        return Err(Error::SapDoesNotFit { extent, side: t.n });
    }
    let ell = p.len();
    if order < ell {
        return Err(Error::InvalidArgument(format!("order {order} is below the polygon length {ell}")));
    }
    let g = t.to_digraph();
    let support: Vec<usize> = p.vertices().iter().map(|&v| t.index(v)).collect();
    let rest = g.without_vertices(&support);
    let k = order - ell;
    let num = rest.det_series(k);
    let zeta = g.zeta_series(k);
    Ok((&num * &zeta).shift(ell))
}

/// Complete elliptic integrals `K(m)` and `E(m)` in the parameter convention,
/// by the arithmetic-geometric mean.
pub fn elliptic_ke(m: f64) -> (f64, f64) {
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut c2 = m;
    let mut sum = 0.5 * c2;
    let mut pow2 = 0.5;
    for _ in 0..60 {
        if (a - b).abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        let cn = 0.5 * (a - b);
        pow2 *= 2.0;
        sum += pow2 * cn * cn;
        a = an;
        b = bn;
        c2 = cn * cn;
    }
    let _ = c2;
    let k = std::f64::consts::PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

/// Which closed form to compare against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    Edge,
    UnitSquare,
}

impl ClosedForm {
    pub fn sap(self) -> Sap {
        Sap::parse(match self {
            ClosedForm::Edge => "RL",
            ClosedForm::UnitSquare => "RULD",
        })
        .expect("valid polygon")
    }

    pub fn eval(self, z: f64) -> f64 {
        use std::f64::consts::PI;
        if z == 0.0 {
            return 0.0;
        }
        let x = 16.0 * z * z;
        let (k, e) = elliptic_ke(x);
        match self {
            ClosedForm::Edge => {
                PI / 4.0 - 1.0 / 16.0 + (64.0 * z * z - 4.0) * k * k / (16.0 * PI * PI) + (k - PI * PI) / (4.0 * PI)
            }
            ClosedForm::UnitSquare => {
                let first = ((x - 1.0) * k + e).powi(2);
                let second = (1.0 - x) * k * k + 2.0 * k * (8.0 * PI * z * z - e) - 4.0 * PI * PI * z * z + e * e;
                first * second / (256.0 * PI.powi(4) * z.powi(4))
            }
        }
    }
}

/// `(series, closed form)` at `z0`, the series truncated where its tail is
/// below `10⁻¹²`.
pub fn closed_form_check(form: ClosedForm, z0: f64) -> Result<(f64, f64)> {
    if !(0.0..0.25).contains(&z0) {
        return Err(Error::InvalidArgument(format!("z0 = {z0} must lie in [0, 1/4)")));
    }
    if z0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    // Coefficients are below 16^{n}, so the tail after z^{2n} is below
    // (16z²)^{n+1}/(1 − 16z²).
    let q = 16.0 * z0 * z0;
    let mut half = 1usize;
    while q.powi(half as i32 + 1) / (1.0 - q) > 1e-12 {
        half += 1;
    }
    if half > 2000 {
        return Err(Error::InvalidArgument(format!("z0 = {z0} is too close to 1/4")));
    }
    let series = rp_series_infinite(&form.sap(), 2 * half)?;
    Ok((series.eval_f64(z0), form.eval(z0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(s: &RatSeries) -> Vec<i64> {
        s.coeffs().iter().map(|c| c.numer().to_i64().unwrap()).collect()
    }

    #[test]
    fn closed_walk_counts() {
        let r = r_series(6);
        assert_eq!(ints(&r), vec![1, 0, 4, 0, 36, 0, 400]);
        let e = resolvent_entry_series(1, 0, 3);
        assert_eq!(ints(&e), vec![0, 1, 0, 9]);
        assert_eq!(*resolvent_entry_series(2, 2, 3).coeff(3).unwrap(), 0);
    }

    #[test]
    fn edge_and_square_series() {
        let e = rp_series_infinite(&Sap::parse("RL").unwrap(), 12).unwrap();
        assert_eq!(ints(&e), vec![0, 0, 1, 0, 7, 0, 70, 0, 807, 0, 10046, 0, 131206]);
        let s = rp_series_infinite(&Sap::parse("RULD").unwrap(), 12).unwrap();
        assert_eq!(ints(&s), vec![0, 0, 0, 0, 1, 0, 12, 0, 144, 0, 1804, 0, 23464]);
    }

    #[test]
    fn rooted_hikes() {
        assert_eq!(ints(&zeta_tilde(12)), vec![1, 0, 2, 0, 11, 0, 86, 0, 805, 0, 8402, 0, 94306]);
        assert_eq!(ints(&mu_tilde(12)), vec![1, 0, -2, 0, -7, 0, -50, 0, -456, 0, -4728, 0, -53095]);
        let a = alpha(128).unwrap().to_f64();
        assert!((a - 0.8025).abs() < 5e-5, "{a}");
    }

    #[test]
    fn series_algebra() {
        let a = RatSeries::new(vec![Rational::from(1), Rational::from((1, 3)), Rational::from(-2)], 6);
        let inv = a.recip().unwrap();
        assert_eq!(&a * &inv, RatSeries::one(6));
        let l = a.log().unwrap();
        assert_eq!(l.exp().unwrap().truncate(6), a);
        assert!(RatSeries::zero(3).recip().is_err());
    }

    #[test]
    fn walk_density() {
        assert_eq!(f_w(2), Rational::from((1, 4)));
        assert_eq!(f_w(3), 0);
        assert_eq!(f_w(-2), 0);
        let v = f_w(20).to_f64();
        assert!((v * 10.0 * std::f64::consts::PI - 1.0).abs() < 0.03);
    }

    #[test]
    fn torus_edge() {
        let t = torus(8).unwrap();
        let s = rp_series_torus(&t, &Sap::parse("RL").unwrap(), 6).unwrap();
        assert_eq!(ints(&s)[..5], [0, 0, 1, 0, 7]);
        let big = crate::lattice::rectangle(6, 6);
        assert!(matches!(rp_series_torus(&t, &big, 14), Err(Error::SapDoesNotFit { .. })));
    }

    #[test]
    fn elliptic_values() {
        let (k, e) = elliptic_ke(0.0);
        assert!((k - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((e - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let (k, e) = elliptic_ke(0.5);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-13);
        assert!((e - 1.350_643_881_047_675_5).abs() < 1e-13);
    }

    #[test]
    fn closed_forms_at_a_point() {
        let (s, c) = closed_form_check(ClosedForm::Edge, 0.1).unwrap();
        assert!((s - c).abs() < 1e-8 && (s - 0.010_779_226).abs() < 1e-9, "{s} {c}");
        let (s, c) = closed_form_check(ClosedForm::UnitSquare, 0.1).unwrap();
        assert!((s - c).abs() < 1e-8, "{s} {c}");
        assert_eq!(closed_form_check(ClosedForm::Edge, 0.0).unwrap(), (0.0, 0.0));
    }
}
