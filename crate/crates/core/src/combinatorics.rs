//! Exact combinatorics of the invariant formulas.
//!
//! Everything here is arbitrary-precision rational arithmetic: binomials,
//! the alpha coefficients expanding the q-th Chern form of a degree-d
//! hypersurface in CP^n, and the two independent exact routes to the
//! Bando-Futaki invariants F_q. The two routes must agree identically;
//! their agreement is the cross-check the numeric route is measured against.

use num::bigint::BigInt;
use num::traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat_int, Rational};

/// Binomial coefficient C(a, b); zero outside 0 <= b <= a.
pub fn binomial(a: usize, b: i64) -> BigInt {
    if b < 0 || b as usize > a {
        return BigInt::zero();
    }
    let b = b as usize;
    let b = b.min(a - b);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..b {
        num *= BigInt::from(a - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

fn binomial_rat(a: usize, b: i64) -> Rational {
    Rational::from_integer(binomial(a, b))
}

/// Table of the coefficients alpha_{qk} expanding the q-th Chern form of a
/// degree-d hypersurface in CP^n in powers of omega and the xi-potential form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaTable {
    pub n: usize,
    pub d: usize,
    /// Row q holds (alpha_{q0}, ..., alpha_{qq}); all entries are integers.
    pub rows: Vec<Vec<Rational>>,
}

impl AlphaTable {
    pub fn entry(&self, q: usize, k: usize) -> &Rational {
        &self.rows[q][k]
    }
}

fn check_range(n: usize, d: usize) -> Result<()> {
    if n < 1 || d < 1 || d > n {
        return Err(Error::Domain(format!("need 1 <= d <= n, got n={n}, d={d}")));
    }
    Ok(())
}

/// Build rows 0..=q_max of the alpha table by the recurrence
/// alpha_{qq} = C(n+1,q) - d*alpha_{(q-1)(q-1)},
/// alpha_{q(q-k)} = -[d*alpha_{(q-1)(q-k-1)} + alpha_{(q-1)(q-k)}] for 0 < k < q,
/// alpha_{q0} = (-1)^q.
pub fn alpha_table(n: usize, d: usize, q_max: usize) -> Result<AlphaTable> {
    check_range(n, d)?;
    if q_max >= n {
        return Err(Error::Domain(format!("need q_max <= n-1, got q_max={q_max}, n={n}")));
    }
    let d_rat = rat_int(d as i64);
    let mut rows: Vec<Vec<Rational>> = vec![vec![rat_int(1)]];
    for q in 1..=q_max {
        let prev = &rows[q - 1];
        let mut row = vec![Rational::zero(); q + 1];
        row[0] = if q % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        row[q] = binomial_rat(n + 1, q as i64) - &d_rat * &prev[q - 1];
        for k in 1..q {
            // Entry alpha_{q(q-k)} sits at column q-k.
            let col = q - k;
            row[col] = -(&d_rat * &prev[col - 1] + &prev[col]);
        }
        rows.push(row);
    }
    Ok(AlphaTable { n, d, rows })
}

/// Closed form alpha_{qk} = (-1)^q sum_{l=0}^{k} (-1)^l d^{k-l} C(q-l, k-l) C(n+1, l).
pub fn alpha_closed(n: usize, d: usize, q: usize, k: usize) -> Result<Rational> {
    check_range(n, d)?;
    if k > q || q >= n {
        return Err(Error::Domain(format!("need k <= q <= n-1, got q={q}, k={k}, n={n}")));
    }
    let mut sum = Rational::zero();
    for l in 0..=k {
        let mut term = Rational::from_integer(
            BigInt::from(d).pow((k - l) as u32)
                * binomial(q - l, (k - l) as i64)
                * binomial(n + 1, l as i64),
        );
        if l % 2 == 1 {
            term = -term;
        }
        sum += term;
    }
    if q % 2 == 1 {
        sum = -sum;
    }
    Ok(sum)
}

fn check_q(n: usize, d: usize, q: usize) -> Result<()> {
    check_range(n, d)?;
    if q < 1 || q > n - 1 {
        return Err(Error::Domain(format!("need 1 <= q <= n-1, got q={q}, n={n}")));
    }
    Ok(())
}

/// Closed form for the q-th Bando-Futaki invariant:
/// F_q = -(n+1-d)^{n-q} * ((d-1)(n+1)/n) * sum_{j=0}^{q-1} (-d)^j (j+1) C(n, q-j-1) * kappa.
pub fn bando_futaki_closed(n: usize, d: usize, q: usize, kappa: &Rational) -> Result<Rational> {
    check_q(n, d, q)?;
    let mut sum = Rational::zero();
    for j in 0..q {
        let mut term = Rational::from_integer(
            BigInt::from(d).pow(j as u32) * BigInt::from(j + 1) * binomial(n, (q - j - 1) as i64),
        );
        if j % 2 == 1 {
            term = -term;
        }
        sum += term;
    }
    let front = rat_int((n + 1 - d) as i64).pow((n - q) as i32)
        * rat_int((d as i64 - 1) * (n as i64 + 1))
        / rat_int(n as i64);
    Ok(-front * sum * kappa)
}

/// Coefficient-recurrence route:
/// F_q = kappa (n+1-d)^{n-q} (alpha_{qq} q/n + d alpha_{q(q-1)}).
pub fn bando_futaki_coeff_route(n: usize, d: usize, q: usize, kappa: &Rational) -> Result<Rational> {
    check_q(n, d, q)?;
    let table = alpha_table(n, d, q)?;
    let inner = table.entry(q, q) * rat_int(q as i64) / rat_int(n as i64)
        + rat_int(d as i64) * table.entry(q, q - 1);
    Ok(kappa * rat_int((n + 1 - d) as i64).pow((n - q) as i32) * inner)
}

/// First invariant in corollary form: F_1 = -(n+1-d)^{n-1} (n+1)(d-1) kappa / n.
pub fn futaki_first(n: usize, d: usize, kappa: &Rational) -> Result<Rational> {
    check_q(n, d, 1)?;
    Ok(-rat_int((n + 1 - d) as i64).pow((n - 1) as i32)
        * rat_int((n as i64 + 1) * (d as i64 - 1))
        / rat_int(n as i64)
        * kappa)
}
