//! Pointwise exterior algebra of (p,p)-forms in m complex dimensions.
//!
//! A form is stored as a coefficient map over pairs (I, J) of strictly
//! increasing multi-indices of length p. The represented form in the
//! all-dz-then-all-dzbar normal form is
//!
//!   sum c_{I,J} (-1)^{p(p-1)/2} (sqrt(-1)/2pi)^p dz_I wedge dzbar_J,
//!
//! i.e. the stored coefficient already includes the reordering sign between
//! the normal form and the product-of-pairs basis
//! prod (sqrt(-1)/2pi) dz_i wedge dzbar_j. With that convention the wedge
//! sign reduces to the two index-merge signs (the dz/dzbar interchange sign
//! (-1)^{p_A p_B} cancels against the change in the reordering sign), a
//! positive (1,1) form has positive top powers, and the top coefficient of
//! a (m,m) form is read off directly. Unit-tested against the hand-expanded
//! m = 2 case.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_complex::Complex64;

use crate::error::{Error, Result};

type Index = Vec<u8>;

/// A (p,p)-type form at a point of an m-dimensional chart.
/// Chart coordinate labels are 0..m-1 (coordinate z_{i+2} of the paper chart).
#[derive(Debug, Clone, PartialEq)]
pub struct FormPQ {
    pub m: usize,
    pub p: usize,
    pub coeffs: BTreeMap<(Index, Index), Complex64>,
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Merge two strictly increasing index lists; None when they overlap,
/// otherwise the merged list and the sign of the sorting permutation.
fn merge_signed(a: &[u8], b: &[u8]) -> Option<(Index, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a-elements.
            inversions += a.len() - i;
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

impl FormPQ {
    /// The zero (p,p) form.
    pub fn zero(m: usize, p: usize) -> Self {
        FormPQ { m, p, coeffs: BTreeMap::new() }
    }

    /// A scalar, i.e. a (0,0) form.
    pub fn scalar(m: usize, c: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert((Vec::new(), Vec::new()), c);
        FormPQ { m, p: 0, coeffs }
    }

    pub fn scalar_re(m: usize, c: f64) -> Self {
        Self::scalar(m, Complex64::new(c, 0.0))
    }

    /// A (1,1) form from its coefficient matrix h[i][j] on dz_i wedge dzbar_j.
    pub fn one_one(h: &nalgebra::DMatrix<Complex64>) -> Self {
        let m = h.nrows();
        let mut coeffs = BTreeMap::new();
        for i in 0..m {
            for j in 0..m {
                let c = h[(i, j)];
                if c != czero() {
                    coeffs.insert((vec![i as u8], vec![j as u8]), c);
                }
            }
        }
        FormPQ { m, p: 1, coeffs }
    }

    pub fn get(&self, i: &[u8], j: &[u8]) -> Complex64 {
        self.coeffs.get(&(i.to_vec(), j.to_vec())).copied().unwrap_or_else(czero)
    }

    pub fn add(&self, other: &FormPQ) -> Result<FormPQ> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch(self.m, other.m));
        }
        assert_eq!(self.p, other.p, "cannot add forms of different degree");
        let mut out = self.clone();
        for (k, v) in &other.coeffs {
            *out.coeffs.entry(k.clone()).or_insert_with(czero) += v;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FormPQ) -> Result<FormPQ> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> FormPQ {
        let coeffs = self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        FormPQ { m: self.m, p: self.p, coeffs }
    }

    pub fn scale_re(&self, c: f64) -> FormPQ {
        self.scale(Complex64::new(c, 0.0))
    }

    /// Wedge product of two (p,p)-type forms.
    pub fn wedge(&self, other: &FormPQ) -> Result<FormPQ> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch(self.m, other.m));
        }
        let p = self.p + other.p;
        assert!(p <= self.m, "wedge degree {p} exceeds dimension {}", self.m);
        let mut out = FormPQ::zero(self.m, p);
        for ((i1, j1), c1) in &self.coeffs {
            for ((i2, j2), c2) in &other.coeffs {
                let Some((iw, si)) = merge_signed(i1, i2) else { continue };
                let Some((jw, sj)) = merge_signed(j1, j2) else { continue };
                *out.coeffs.entry((iw, jw)).or_insert_with(czero) += c1 * c2 * (si * sj);
            }
        }
        Ok(out)
    }

    /// k-fold wedge power; k = 0 yields the scalar 1.
    pub fn pow(&self, k: usize) -> FormPQ {
        let mut out = FormPQ::scalar_re(self.m, 1.0);
        for _ in 0..k {
            out = out.wedge(self).expect("power of a form with itself");
        }
        out
    }

    /// Coefficient of the product-of-pairs volume basis
    /// prod_i (sqrt(-1)/2pi) dz_i wedge dzbar_i, for a (m,m) form.
    pub fn top_coefficient(&self) -> Result<Complex64> {
        if self.p != self.m {
            return Err(Error::WrongDegree { expected: self.m, got: self.p });
        }
        let full: Index = (0..self.m as u8).collect();
        Ok(self.get(&full, &full))
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference against another form of the same degree.
    pub fn max_abs_diff(&self, other: &FormPQ) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, v) in &self.coeffs {
            worst = worst.max((v - other.coeffs.get(k).copied().unwrap_or_else(czero)).norm());
        }
        for (k, v) in &other.coeffs {
            if !self.coeffs.contains_key(k) {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    /// max_abs_diff relative to the larger of the two norms.
    pub fn rel_diff(&self, other: &FormPQ) -> f64 {
        let scale = self.max_abs().max(other.max_abs());
        if scale == 0.0 {
            0.0
        } else {
            self.max_abs_diff(other) / scale
        }
    }
}

/// A (1,1)-form valued m x m matrix; entry (k, l) is Theta_k^l.
#[derive(Debug, Clone)]
pub struct CurvatureMatrix {
    pub m: usize,
    pub entries: Vec<Vec<FormPQ>>,
}

impl CurvatureMatrix {
    pub fn new(entries: Vec<Vec<FormPQ>>) -> Self {
        let m = entries.len();
        for row in &entries {
            assert_eq!(row.len(), m);
            for e in row {
                assert_eq!(e.m, m);
            }
        }
        CurvatureMatrix { m, entries }
    }
}

fn perm_sign(perm: &[usize]) -> f64 {
    let mut inv = 0usize;
    for i in 0..perm.len() {
        for j in (i + 1)..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The invariant-polynomial contraction shared by the Chern forms and their
/// polarization: (1/q!) sum_{sigma in S_q} sgn(sigma)
/// sum_{i_1..i_q} slots[0]_{i_1}^{i_sigma(1)} wedge ... wedge
/// slots[q-1]_{i_q}^{i_sigma(q)}.
fn invariant_poly(m: usize, slots: &[&[Vec<FormPQ>]]) -> FormPQ {
    let q = slots.len();
    let out_p: usize = slots.iter().map(|s| s[0][0].p).sum();
    let mut acc = FormPQ::zero(m, out_p);
    for perm in (0..q).permutations(q) {
        let sign = perm_sign(&perm);
        let mut idx = vec![0usize; q];
        loop {
            // Chain product slots[t][ idx[t] ][ idx[perm[t]] ] over t.
            let mut term = FormPQ::scalar_re(m, 1.0);
            let mut zero = false;
            for t in 0..q {
                let f = &slots[t][idx[t]][idx[perm[t]]];
                if f.coeffs.is_empty() {
                    zero = true;
                    break;
                }
                term = term.wedge(f).expect("invariant_poly wedge");
            }
            if !zero {
                acc = acc.add(&term.scale_re(sign)).expect("invariant_poly add");
            }
            // Advance the multi-index.
            let mut t = 0;
            loop {
                if t == q {
                    break;
                }
                idx[t] += 1;
                if idx[t] < m {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == q {
                break;
            }
        }
    }
    let mut fact = 1.0;
    for t in 1..=q {
        fact *= t as f64;
    }
    acc.scale_re(1.0 / fact)
}

/// q-th Chern form by direct antisymmetrization over S_q.
pub fn chern_direct(theta: &CurvatureMatrix, q: usize) -> FormPQ {
    assert!(q >= 1 && q <= theta.m, "need 1 <= q <= m");
    let slots: Vec<&[Vec<FormPQ>]> = (0..q).map(|_| theta.entries.as_slice()).collect();
    invariant_poly(theta.m, &slots)
}

/// Trace of the j-cycle wedge: sum Theta_{i1}^{i2} wedge ... wedge Theta_{ij}^{i1}.
pub fn trace_power(theta: &CurvatureMatrix, j: usize) -> FormPQ {
    assert!(j >= 1 && j <= theta.m, "need 1 <= j <= m");
    let m = theta.m;
    let mut acc = FormPQ::zero(m, j);
    let mut idx = vec![0usize; j];
    loop {
        let mut term = FormPQ::scalar_re(m, 1.0);
        let mut zero = false;
        for t in 0..j {
            let f = &theta.entries[idx[t]][idx[(t + 1) % j]];
            if f.coeffs.is_empty() {
                zero = true;
                break;
            }
            term = term.wedge(f).expect("trace_power wedge");
        }
        if !zero {
            acc = acc.add(&term).expect("trace_power add");
        }
        let mut t = 0;
        loop {
            if t == j {
                break;
            }
            idx[t] += 1;
            if idx[t] < m {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
        if t == j {
            break;
        }
    }
    acc
}

/// q-th Chern form by the Newton-type recursion
/// P^q = (1/q) sum_{j=1}^{q} (-1)^{j-1} phi_j wedge P^{q-j}.
pub fn chern_newton(theta: &CurvatureMatrix, q: usize) -> FormPQ {
    assert!(q >= 1 && q <= theta.m, "need 1 <= q <= m");
    let m = theta.m;
    let phis: Vec<FormPQ> = (1..=q).map(|j| trace_power(theta, j)).collect();
    let mut ps: Vec<FormPQ> = vec![FormPQ::scalar_re(m, 1.0)];
    for qq in 1..=q {
        let mut acc = FormPQ::zero(m, qq);
        for j in 1..=qq {
            let term = phis[j - 1].wedge(&ps[qq - j]).expect("newton wedge");
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            acc = acc.add(&term.scale_re(sign)).expect("newton add");
        }
        ps.push(acc.scale_re(1.0 / qq as f64));
    }
    ps.pop().unwrap()
}

/// Polarization of P^q with the first slot replaced by the scalar matrix
/// nabla_X: a (q-1, q-1) form. For q = 1 this is the scalar div X.
pub fn polarization_nabla_x(
    nabla_x: &nalgebra::DMatrix<Complex64>,
    theta: &CurvatureMatrix,
    q: usize,
) -> FormPQ {
    assert!(q >= 1 && q <= theta.m, "need 1 <= q <= m");
    let m = theta.m;
    let x_slot: Vec<Vec<FormPQ>> = (0..m)
        .map(|k| (0..m).map(|l| FormPQ::scalar(m, nabla_x[(k, l)])).collect())
        .collect();
    let mut slots: Vec<&[Vec<FormPQ>]> = vec![x_slot.as_slice()];
    for _ in 1..q {
        slots.push(theta.entries.as_slice());
    }
    invariant_poly(m, &slots)
}
