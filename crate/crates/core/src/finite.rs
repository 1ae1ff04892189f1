//! Hikes on finite weighted digraphs: zeta, Möbius and von Mangoldt series,
//! Viennot's lemma and the finite sieve asymptotics.
//!
//! `det(I − zA)` is obtained exactly from the power sums `tr(A^k)` through
//! `det(I − zA) = exp(−Σ tr(A^k)·z^k/k)`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ring::{check_precision, parse_rational, BigFloat};
use crate::series::{RatSeries, TorusGraph};

/// Finite digraph with rational edge weights.
#[derive(Debug)]
pub struct Digraph {
    n: usize,
    /// `out[i] = [(j, A_ij)]`, nonzero weights only.
    out: Vec<Vec<(usize, Rational)>>,
    spectrum: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for Digraph {
    fn clone(&self) -> Self {
        Digraph { n: self.n, out: self.out.clone(), spectrum: OnceLock::new() }
    }
}

#[derive(Serialize, Deserialize)]
struct DigraphFile {
    n: usize,
    edges: Vec<(usize, usize, Value)>,
}

/// Sorted set of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new(mut v: Vec<usize>) -> VertexSet {
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    /// Parses `0,1,5`.
    pub fn parse(s: &str) -> Result<VertexSet> {
        let v = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad vertex index {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(VertexSet::new(v))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl Digraph {
    pub fn new(n: usize, edges: &[(usize, usize, Rational)]) -> Result<Digraph> {
        if n == 0 {
            return Err(Error::InvalidArgument("a digraph needs at least one vertex".into()));
        }
        let mut out: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); n];
        for (i, j, w) in edges {
            if *i >= n || *j >= n {
                return Err(Error::InvalidArgument(format!("edge ({i}, {j}) is outside 0..{n}")));
            }
            match out[*i].iter_mut().find(|(k, _)| k == j) {
                Some((_, x)) => *x += w,
                None => out[*i].push((*j, w.clone())),
            }
        }
        for row in &mut out {
            row.retain(|(_, w)| *w != 0);
            row.sort_by_key(|(j, _)| *j);
        }
        Ok(Digraph { n, out, spectrum: OnceLock::new() })
    }

    /// Unit weights; repeated entries add up.
    pub fn from_adjacency_lists(adj: &[Vec<usize>]) -> Digraph {
        let edges: Vec<(usize, usize, Rational)> = adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&j| (i, j, Rational::from(1))))
            .collect();
        Digraph::new(adj.len().max(1), &edges).expect("indices are in range")
    }

    pub fn from_json(text: &str) -> Result<Digraph> {
        let file: DigraphFile = serde_json::from_str(text)?;
        let edges = file
            .edges
            .into_iter()
            .map(|(i, j, w)| {
                let w = match &w {
                    Value::String(s) => parse_rational(s)?,
                    Value::Number(x) if x.is_i64() => Rational::from(x.as_i64().unwrap()),
                    other => return Err(Error::Parse(format!("edge weight {other} is not an integer or \"num/den\""))),
                };
                Ok((i, j, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Digraph::new(file.n, &edges)
    }

    pub fn to_json(&self) -> String {
        let edges = self
            .out
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, w)| (i, *j, Value::String(w.to_string()))))
            .collect();
        serde_json::to_string(&DigraphFile { n: self.n, edges }).expect("serialisable")
    }

    /// Directed cycle `0 → 1 → … → n−1 → 0`.
    pub fn directed_cycle(n: usize) -> Digraph {
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![(i + 1) % n]).collect();
        Digraph::from_adjacency_lists(&adj)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weight(&self, i: usize, j: usize) -> Rational {
        self.out[i].iter().find(|(k, _)| *k == j).map(|(_, w)| w.clone()).unwrap_or_default()
    }

    /// Induced subgraph on the complement of `removed`, vertices renumbered
    /// in increasing order. Removing every vertex yields the empty graph,
    /// represented with `n = 0`.
    pub fn without_vertices(&self, removed: &[usize]) -> Digraph {
        let mut keep = vec![true; self.n];
        for &v in removed {
            if v < self.n {
                keep[v] = false;
            }
        }
        let mut new_index = vec![usize::MAX; self.n];
        let mut m = 0;
        for v in 0..self.n {
            if keep[v] {
                new_index[v] = m;
                m += 1;
            }
        }
        let out = (0..self.n)
            .filter(|&v| keep[v])
            .map(|v| {
                self.out[v].iter().filter(|(j, _)| keep[*j]).map(|(j, w)| (new_index[*j], w.clone())).collect()
            })
            .collect();
        Digraph { n: m, out, spectrum: OnceLock::new() }
    }

    fn integer_weights(&self) -> Option<Vec<Vec<(usize, Integer)>>> {
        self.out
            .iter()
            .map(|row| {
                row.iter()
                    .map(|(j, w)| if *w.denom() == 1 { Some((*j, w.numer().clone())) } else { None })
                    .collect()
            })
            .collect()
    }

    /// `tr(A^k)` for `k = 1..=order` (index 0 holds `n`).
    pub fn power_sums(&self, order: usize) -> Vec<Rational> {
        let mut sums = vec![Rational::new(); order + 1];
        sums[0] = Rational::from(self.n as u64);
        if let Some(int_out) = self.integer_weights() {
            for start in 0..self.n {
                let mut v = vec![Integer::new(); self.n];
                v[start] = Integer::from(1);
                for s in sums.iter_mut().skip(1) {
                    let mut next = vec![Integer::new(); self.n];
                    for (i, vi) in v.iter().enumerate() {
                        if *vi == 0 {
                            continue;
                        }
                        for (j, w) in &int_out[i] {
                            next[*j] += vi * w;
                        }
                    }
                    *s += &next[start];
                    v = next;
                }
            }
        } else {
            for start in 0..self.n {
                let mut v = vec![Rational::new(); self.n];
                v[start] = Rational::from(1);
                for s in sums.iter_mut().skip(1) {
                    let mut next = vec![Rational::new(); self.n];
                    for (i, vi) in v.iter().enumerate() {
                        if *vi == 0 {
                            continue;
                        }
                        for (j, w) in &self.out[i] {
                            next[*j] += Rational::from(vi * w);
                        }
                    }
                    *s += &next[start];
                    v = next;
                }
            }
        }
        sums
    }

    /// `det(I − zA)` as a series up to `z^order`.
    pub fn det_series(&self, order: usize) -> RatSeries {
        if self.n == 0 {
            return RatSeries::one(order);
        }
        let p = self.power_sums(order);
        let coeffs: Vec<Rational> =
            (0..=order).map(|k| if k == 0 { Rational::new() } else { -Rational::from(&p[k] / k as u32) }).collect();
        RatSeries::new(coeffs, order).exp().expect("zero constant term")
    }

    /// `det(I − zA)` as an exact polynomial (degree ≤ n).
    pub fn mu_poly(&self) -> Vec<Rational> {
        let mut c = self.det_series(self.n).coeffs().to_vec();
        while c.len() > 1 && *c.last().unwrap() == 0 {
            c.pop();
        }
        c
    }

    /// `ζ(z) = 1/det(I − zA)`.
    pub fn zeta_series(&self, order: usize) -> RatSeries {
        self.det_series(order).recip().expect("unit constant term")
    }

    /// `Λ(z) = z·ζ′(z)/ζ(z) = tr((I − zA)^{−1}) − n`.
    pub fn lambda_series(&self, order: usize) -> RatSeries {
        let mut p = self.power_sums(order);
        p[0] = Rational::new();
        RatSeries::new(p, order)
    }

    /// Eigenvalues as `(re, im)` pairs in double precision.
    pub fn spectrum(&self) -> &[(f64, f64)] {
        self.spectrum.get_or_init(|| {
            let m = DMatrix::from_fn(self.n, self.n, |i, j| self.weight(i, j).to_f64());
            m.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect()
        })
    }

    /// Dominant eigenvalue modulus `λ` and the number `g` of eigenvalues of
    /// that modulus. Nonnegative graphs with constant row sums get λ exactly;
    /// otherwise a real dominant eigenvalue is refined by Newton's method on
    /// the characteristic polynomial.
    pub fn dominant(&self, precision: u32) -> Result<(BigFloat, usize)> {
        check_precision(precision)?;
        let spec = self.spectrum();
        let modulus = |(re, im): &(f64, f64)| re.hypot(*im);
        let top = spec.iter().map(modulus).fold(0.0f64, f64::max);
        let g = spec.iter().filter(|e| (modulus(e) - top).abs() <= 1e-6 * top.max(1.0)).count();
        if let Some(r) = self.constant_row_sum() {
            return Ok((Float::with_val(precision, &r), g));
        }
        let real_top = spec.iter().any(|(re, im)| im.abs() < 1e-9 * top.max(1.0) && (re - top).abs() < 1e-6 * top.max(1.0));
        if !real_top || top == 0.0 {
            return Ok((Float::with_val(precision, top), g));
        }
        // Newton on χ(x) = Σ q_k x^{n−k}.
        let q = self.mu_poly();
        let prec = precision + 32;
        let mut x = Float::with_val(prec, top);
        for _ in 0..200 {
            let (v, d) = char_poly_eval(&q, self.n, &x);
            if d.is_zero() {
                break;
            }
            let step = Float::with_val(prec, &v / &d);
            x -= &step;
            if step.is_zero() || step.get_exp().unwrap_or(i32::MIN) < x.get_exp().unwrap_or(0) - prec as i32 + 4 {
                break;
            }
        }
        Ok((Float::with_val(precision, x), g))
    }

    fn constant_row_sum(&self) -> Option<Rational> {
        if self.out.iter().flatten().any(|(_, w)| *w < 0) {
            return None;
        }
        let sums: Vec<Rational> =
            self.out.iter().map(|row| row.iter().fold(Rational::new(), |a, (_, w)| a + w)).collect();
        if sums.windows(2).all(|w| w[0] == w[1]) {
            sums.into_iter().next()
        } else {
            None
        }
    }
}

fn char_poly_eval(q: &[Rational], n: usize, x: &BigFloat) -> (BigFloat, BigFloat) {
    let prec = x.prec();
    let mut v = Float::new(prec);
    let mut d = Float::new(prec);
    // χ(x) = Σ_k q_k·x^{n−k}: Horner with k ascending.
    for k in 0..=n {
        d = d * x + &v;
        v *= x;
        if let Some(c) = q.get(k) {
            v += c;
        }
    }
    (v, d)
}

fn eval_poly(q: &[Rational], z: &BigFloat) -> BigFloat {
    q.iter().rev().fold(Float::new(z.prec()), |acc, c| acc * z + c)
}

/// k-th derivative of a polynomial at `z`.
fn eval_poly_derivative(q: &[Rational], k: usize, z: &BigFloat) -> BigFloat {
    let prec = z.prec();
    let mut acc = Float::new(prec);
    for j in (k..q.len()).rev() {
        let falling = (j - k + 1..=j).fold(Integer::from(1), |a, t| a * t as u64);
        acc = acc * z + Rational::from(&q[j] * falling);
    }
    acc
}

pub fn zeta_series(g: &Digraph, order: usize) -> RatSeries {
    g.zeta_series(order)
}

pub fn mu_poly(g: &Digraph) -> Vec<Rational> {
    g.mu_poly()
}

pub fn lambda_series(g: &Digraph, order: usize) -> RatSeries {
    g.lambda_series(order)
}

/// `z^{p_len}·det(I − zA_{G∖p})/det(I − zA)` up to `z^order`.
pub fn viennot_series(g: &Digraph, support: &VertexSet, p_len: usize, order: usize) -> Result<RatSeries> {
    if support.is_empty() {
        return Err(Error::InvalidArgument("the prime support must not be empty".into()));
    }
    if order < p_len {
        return Ok(RatSeries::zero(order));
    }
    let k = order - p_len;
    let rest = g.without_vertices(support.as_slice());
    Ok((&rest.det_series(k) * &g.zeta_series(k)).shift(p_len))
}

/// `λ^{−p_len}·det(I − A_{G∖p}/λ)`.
pub fn sieve_asymptote(g: &Digraph, support: &VertexSet, p_len: usize, precision: u32) -> Result<BigFloat> {
    let (lambda, _) = g.dominant(precision + 32)?;
    let q = g.without_vertices(support.as_slice()).mu_poly();
    let inv = Float::with_val(precision + 32, lambda.recip_ref());
    let v = eval_poly(&q, &inv) * Float::with_val(precision + 32, (&inv).pow(p_len as u32));
    Ok(Float::with_val(precision, v))
}

/// `[z^l]` of the Viennot series over `[z^l]ζ`, exactly.
pub fn exact_ratio(g: &Digraph, support: &VertexSet, p_len: usize, l: usize) -> Result<Rational> {
    let v = viennot_series(g, support, p_len, l)?;
    let h = g.zeta_series(l);
    let d = h.coeff(l).expect("order l");
    if *d == 0 {
        return Err(Error::ZeroDensity(l));
    }
    Ok(Rational::from(v.coeff(l).expect("order l") / d))
}

/// Error term of the length corollary:
/// `λ^{−ℓ(p)}·Σ_{k=0}^{k_max} [(−1)^k·∇^k f(l−ℓ(p))/(f(l)·λ^k·k!) − δ_{k,0}]·Q^{(k)}(1/λ)`
/// with `f(m) = [z^m]ζ(z/λ)` (zero for `m < 0`), `∇` the backward difference
/// and `Q(z) = det(I − zA_{G∖p})`.
pub fn length_corollary_error(
    g: &Digraph,
    support: &VertexSet,
    p_len: usize,
    l: usize,
    k_max: usize,
    precision: u32,
) -> Result<BigFloat> {
    let prec = precision + 64;
    let (lambda, _) = g.dominant(prec)?;
    let hikes = g.zeta_series(l);
    let f = |m: i64| -> BigFloat {
        if m < 0 {
            return Float::new(prec);
        }
        let h = hikes.coeff(m as usize).expect("m ≤ l");
        Float::with_val(prec, h) / Float::with_val(prec, (&lambda).pow(m as i32))
    };
    let fl = f(l as i64);
    if fl.is_zero() {
        return Err(Error::ZeroDensity(l));
    }
    let q = g.without_vertices(support.as_slice()).mu_poly();
    let inv = Float::with_val(prec, lambda.recip_ref());
    let x = l as i64 - p_len as i64;
    let mut total = Float::new(prec);
    let mut fact = Integer::from(1);
    for k in 0..=k_max {
        if k > 0 {
            fact *= k as u64;
        }
        // (−1)^k ∇^k f(x) = Σ_i (−1)^{k+i} C(k,i) f(x − i)
        let mut nabla = Float::new(prec);
        for i in 0..=k {
            let c = Integer::from(Integer::binomial_u(k as u32, i as u32));
            let term = f(x - i as i64) * c;
            if (k + i) % 2 == 0 {
                nabla += term;
            } else {
                nabla -= term;
            }
        }
        let mut coeff = nabla / &fl / Float::with_val(prec, (&lambda).pow(k as i32)) / &fact;
        if k == 0 {
            coeff -= 1;
        }
        total += coeff * eval_poly_derivative(&q, k, &inv);
    }
    let v = total * Float::with_val(prec, (&inv).pow(p_len as u32));
    Ok(Float::with_val(precision, v))
}

/// `α_N = Π_{λ_i ≠ 4}(1 − λ_i/4)` over the torus spectrum, the dominant
/// eigenvalue excluded once.
pub fn torus_alpha_n(t: &TorusGraph, precision: u32) -> BigFloat {
    let prec = precision + 32;
    let eig = t.eigenvalues(prec);
    let mut prod = Float::with_val(prec, 1);
    // Index 0 is j = k = 0, the eigenvalue 4.
    for e in eig.iter().skip(1) {
        prod *= Float::with_val(prec, 1) - Float::with_val(prec, e / 4u32);
    }
    Float::with_val(precision, prod)
}

/// `(det(I − A_{t∖•}/4), α_N/N)`.
pub fn walks_to_hikes_check(t: &TorusGraph, precision: u32) -> Result<(BigFloat, BigFloat)> {
    check_precision(precision)?;
    let g = t.to_digraph().without_vertices(&[0]);
    let q = g.mu_poly();
    let quarter = Float::with_val(precision + 32, 0.25);
    let lhs = Float::with_val(precision, eval_poly(&q, &quarter));
    let rhs = Float::with_val(precision, torus_alpha_n(t, precision) / t.vertex_count() as u32);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::torus;

    fn ints(c: &[Rational]) -> Vec<i64> {
        c.iter().map(|x| x.numer().to_i64().unwrap()).collect()
    }

    #[test]
    fn cycle_series() {
        let g = Digraph::directed_cycle(3);
        assert_eq!(ints(g.zeta_series(9).coeffs()), vec![1, 0, 0, 1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(ints(&g.mu_poly()), vec![1, 0, 0, -1]);
        assert_eq!(ints(g.lambda_series(6).coeffs()), vec![0, 0, 0, 3, 0, 0, 3]);
    }

    #[test]
    fn loop_weight_series() {
        let g = Digraph::new(1, &[(0, 0, Rational::from((2, 3)))]).unwrap();
        let z = g.zeta_series(3);
        assert_eq!(z.coeff(3).unwrap(), &Rational::from((8, 27)));
    }

    #[test]
    fn complete_digraph() {
        let edges: Vec<_> =
            (0..3).flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j, Rational::from(1)))).collect();
        let g = Digraph::new(3, &edges).unwrap();
        assert_eq!(ints(&g.mu_poly()), vec![1, 0, -3, -2]);
        assert_eq!(ints(g.zeta_series(4).coeffs()), vec![1, 0, 3, 2, 9]);
        let (lambda, mult) = g.dominant(128).unwrap();
        assert_eq!(lambda.to_f64(), 2.0);
        assert_eq!(mult, 1);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 2, "edges": [[0, 1, "1/2"], [1, 0, 3]]}"#;
        let g = Digraph::from_json(text).unwrap();
        let h = Digraph::from_json(&g.to_json()).unwrap();
        assert_eq!(h.weight(0, 1), Rational::from((1, 2)));
        assert_eq!(h.weight(1, 0), Rational::from(3));
        assert!(Digraph::from_json(r#"{"n": 1, "edges": [[0, 3, "1"]]}"#).is_err());
    }

    #[test]
    fn cycle_prime() {
        let g = Digraph::directed_cycle(3);
        let p = VertexSet::new(vec![0, 1, 2]);
        let v = viennot_series(&g, &p, 3, 9).unwrap();
        assert_eq!(ints(v.coeffs()), vec![0, 0, 0, 1, 0, 0, 1, 0, 0, 1]);
        assert_eq!(sieve_asymptote(&g, &p, 3, 128).unwrap().to_f64(), 1.0);
        for l in [3usize, 6, 9] {
            assert!(length_corollary_error(&g, &p, 3, l, 3, 128).unwrap().is_zero());
        }
    }

    #[test]
    fn torus_identities() {
        let t = torus(4).unwrap();
        let (lhs, rhs) = walks_to_hikes_check(&t, 128).unwrap();
        let rel = ((lhs.to_f64() - rhs.to_f64()) / rhs.to_f64()).abs();
        assert!(rel < 1e-9, "{lhs} {rhs}");
        let g = t.to_digraph();
        let p = VertexSet::new(vec![0, 1]);
        assert!(matches!(length_corollary_error(&g, &p, 2, 5, 16, 128), Err(Error::ZeroDensity(5))));
    }
}
