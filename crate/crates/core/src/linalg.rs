//! Dense linear algebra over ℤ, ℚ, ℚ[χ] and MPFR floats.

use rug::ops::NegAssign;
use rug::{Float, Integer, Rational};

use crate::ring::{BigFloat, PiPoly};

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut a: Vec<Vec<Integer>>) -> Integer {
    let n = a.len();
    if n == 0 {
        return Integer::from(1);
    }
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Integer::new(),
            }
        }
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            let lead = row[k].clone();
            for j in k + 1..n {
                let mut v = Integer::from(&row[j] * &pivot_row[k]);
                v -= &lead * &pivot_row[j];
                v.div_exact_mut(&prev);
                row[j] = v;
            }
            row[k] = Integer::new();
        }
        prev = a[k][k].clone();
    }
    let mut d = a[n - 1][n - 1].clone();
    if sign < 0 {
        d.neg_assign();
    }
    d
}

/// Determinant of a rational matrix (rows scaled to integers, then Bareiss).
pub fn rational_det(a: &[Vec<Rational>]) -> Rational {
    let mut scale = Rational::from(1);
    let rows = a
        .iter()
        .map(|row| {
            let mut l = Integer::from(1);
            for v in row {
                l.lcm_mut(v.denom());
            }
            scale *= &l;
            row.iter().map(|v| v.numer() * (&l / Integer::from(v.denom()))).collect()
        })
        .collect();
    Rational::from(bareiss_det(rows)) / scale
}

/// Polynomial through `(t, values[t])`, `t = 0..values.len()`, in monomial form.
pub fn interpolate_at_naturals(values: &[Rational]) -> Vec<Rational> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    // Newton forward differences, divided by k! on the fly.
    let mut diffs = values.to_vec();
    let mut newton = Vec::with_capacity(n);
    let mut fact = Integer::from(1);
    for k in 0..n {
        if k > 0 {
            fact *= k as u32;
        }
        newton.push(Rational::from(&diffs[0] / &fact));
        for i in 0..diffs.len() - 1 {
            let d = Rational::from(&diffs[i + 1] - &diffs[i]);
            diffs[i] = d;
        }
        diffs.pop();
    }
    // p(t) = d0 + t·(d1 + (t−1)·(d2 + …)), expanded from the inside out.
    let mut poly: Vec<Rational> = vec![newton[n - 1].clone()];
    for k in (0..n - 1).rev() {
        // poly ← poly·(t − k) + newton[k]
        let mut next = vec![Rational::new(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= Rational::from(c * k as u32);
        }
        next[0] += &newton[k];
        poly = next;
    }
    while poly.last().is_some_and(|c| *c == 0) {
        poly.pop();
    }
    poly
}

/// Determinant of a matrix over ℚ[χ], by evaluation at χ = 0, 1, …, D and
/// interpolation, where D bounds the degree of the determinant.
pub fn pipoly_det(m: &[Vec<PiPoly>]) -> PiPoly {
    let n = m.len();
    if n == 0 {
        return PiPoly::one();
    }
    let max_deg = m.iter().flatten().filter_map(|e| e.degree()).max().unwrap_or(0);
    let bound = n * max_deg;
    let mut denom = Integer::from(1);
    for e in m.iter().flatten() {
        for c in e.coeffs() {
            denom.lcm_mut(c.denom());
        }
    }
    let scaled: Vec<Vec<Vec<Integer>>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    e.coeffs()
                        .iter()
                        .map(|c| c.numer() * Integer::from(&denom / c.denom()))
                        .collect()
                })
                .collect()
        })
        .collect();
    let denom_n = Rational::from(Integer::from(rug::ops::Pow::pow(&denom, n as u32)));
    let values: Vec<Rational> = (0..=bound)
        .map(|t| {
            let t = Integer::from(t);
            let a = scaled
                .iter()
                .map(|row| row.iter().map(|coeffs| horner_int(coeffs, &t)).collect())
                .collect();
            Rational::from(bareiss_det(a)) / &denom_n
        })
        .collect();
    PiPoly::from_coeffs(interpolate_at_naturals(&values))
}

fn horner_int(coeffs: &[Integer], t: &Integer) -> Integer {
    let mut acc = Integer::new();
    for c in coeffs.iter().rev() {
        acc *= t;
        acc += c;
    }
    acc
}

/// Faddeev–LeVerrier: returns `(adj(A), det(A))` over ℚ[χ]. The only
/// divisions are by the integers `1..=n`.
pub fn adjugate_fl(a: &[Vec<PiPoly>]) -> (Vec<Vec<PiPoly>>, PiPoly) {
    let n = a.len();
    if n == 0 {
        return (Vec::new(), PiPoly::one());
    }
    let identity = |c: &PiPoly| -> Vec<Vec<PiPoly>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { c.clone() } else { PiPoly::zero() }).collect()).collect()
    };
    let mut m = identity(&PiPoly::one());
    let mut coeff = PiPoly::one();
    let mut am: Vec<Vec<PiPoly>> = Vec::new();
    for k in 1..=n {
        if k > 1 {
            m = std::mem::take(&mut am);
            for (i, row) in m.iter_mut().enumerate() {
                row[i] = &row[i] + &coeff;
            }
        }
        am = pipoly_mat_mul(a, &m);
        let trace = (0..n).fold(PiPoly::zero(), |acc, i| &acc + &am[i][i]);
        coeff = (-trace).div_exact_int(&Integer::from(k)).expect("k is nonzero");
    }
    let prev_m = m;
    // `coeff` is now c_0 and `prev_m` is M_n.
    let det = if n.is_multiple_of(2) { coeff.clone() } else { -coeff.clone() };
    let adj = if n % 2 == 1 {
        prev_m
    } else {
        prev_m.into_iter().map(|row| row.into_iter().map(|e| -e).collect()).collect()
    };
    (adj, det)
}

pub fn pipoly_mat_mul(a: &[Vec<PiPoly>], b: &[Vec<PiPoly>]) -> Vec<Vec<PiPoly>> {
    let n = a.len();
    let p = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut acc = PiPoly::zero();
                    for (k, aik) in a[i].iter().enumerate() {
                        if !aik.is_zero() && !b[k][j].is_zero() {
                            acc = &acc + &(aik * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// LU factorisation with partial pivoting in MPFR arithmetic.
#[derive(Clone, Debug)]
pub struct FloatLu {
    lu: Vec<Vec<BigFloat>>,
    perm: Vec<usize>,
    sign: i32,
    prec: u32,
}

impl FloatLu {
    /// Returns `None` when an exactly zero pivot is met.
    pub fn new(mut a: Vec<Vec<BigFloat>>, prec: u32) -> Option<FloatLu> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].cmp_abs(&a[j][k]).expect("no NaN")).unwrap();
            if a[p][k].is_zero() {
                return None;
            }
            if p != k {
                a.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let (top, bottom) = a.split_at_mut(k + 1);
            let pivot_row = &top[k];
            let inv = Float::with_val(prec, pivot_row[k].recip_ref());
            for row in bottom.iter_mut() {
                if row[k].is_zero() {
                    continue;
                }
                row[k] *= &inv;
                let factor = row[k].clone();
                for j in k + 1..n {
                    row[j] -= &factor * &pivot_row[j];
                }
            }
        }
        Some(FloatLu { lu: a, perm, sign, prec })
    }

    pub fn len(&self) -> usize {
        self.lu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lu.is_empty()
    }

    pub fn det(&self) -> BigFloat {
        let mut d = Float::with_val(self.prec, self.sign);
        for (i, row) in self.lu.iter().enumerate() {
            d *= &row[i];
        }
        d
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[BigFloat]) -> Vec<BigFloat> {
        let n = self.len();
        let mut x: Vec<BigFloat> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let t = Float::with_val(self.prec, &self.lu[i][j] * &x[j]);
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = Float::with_val(self.prec, &self.lu[i][j] * &x[j]);
                x[i] -= t;
            }
            x[i] /= &self.lu[i][i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[BigFloat]) -> Vec<BigFloat> {
        let n = self.len();
        let mut y: Vec<BigFloat> = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                let t = Float::with_val(self.prec, &self.lu[j][i] * &y[j]);
                y[i] -= t;
            }
            y[i] /= &self.lu[i][i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = Float::with_val(self.prec, &self.lu[j][i] * &y[j]);
                y[i] -= t;
            }
        }
        let mut x = vec![Float::new(self.prec); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i].clone();
        }
        x
    }

    /// Hager's estimate of `‖A⁻¹‖₁`.
    pub fn inverse_norm1_estimate(&self) -> BigFloat {
        let n = self.len();
        if n == 0 {
            return Float::new(self.prec);
        }
        let mut x = vec![Float::with_val(self.prec, 1.0 / n as f64); n];
        let mut best = Float::new(self.prec);
        for _ in 0..5 {
            let y = self.solve(&x);
            let norm = norm1(&y, self.prec);
            if norm <= best {
                break;
            }
            best = norm;
            let s: Vec<BigFloat> =
                y.iter().map(|v| Float::with_val(self.prec, if v.is_sign_negative() { -1 } else { 1 })).collect();
            let z = self.solve_transpose(&s);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.cmp_abs(b.1).expect("no NaN"))
                .map(|(j, v)| (j, Float::with_val(self.prec, v.abs_ref())))
                .unwrap();
            let ztx = z.iter().zip(&x).fold(Float::new(self.prec), |acc, (a, b)| acc + Float::with_val(self.prec, a * b));
            if zmax <= ztx {
                break;
            }
            x = vec![Float::new(self.prec); n];
            x[j] = Float::with_val(self.prec, 1);
        }
        best
    }
}

fn norm1(v: &[BigFloat], prec: u32) -> BigFloat {
    v.iter().fold(Float::new(prec), |acc, x| acc + Float::with_val(prec, x.abs_ref()))
}

/// `max_j Σ_i |a_ij|`.
pub fn matrix_norm1(a: &[Vec<BigFloat>], prec: u32) -> BigFloat {
    let n = a.first().map_or(0, |r| r.len());
    (0..n)
        .map(|j| a.iter().fold(Float::new(prec), |acc, row| acc + Float::with_val(prec, row[j].abs_ref())))
        .max_by(|a, b| a.partial_cmp(b).expect("no NaN"))
        .unwrap_or_else(|| Float::new(prec))
}
