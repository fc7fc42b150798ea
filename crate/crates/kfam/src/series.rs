//! Exact truncated power series over arbitrary-precision rationals.
//!
//! A [`CoeffSeries`] of order `N` stores `a_0..=a_N`; every result is exact for
//! all indices up to the minimum order of its operands. Coefficients may be
//! negative in intermediate results (e.g. `ψ/ψ'`); [`SeriesClassTag`] rejects
//! them.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numerics::LogNumber;
use crate::par;

/// Default truncation order.
pub const DEFAULT_TRUNCATION: usize = 4096;

/// Truncated power series `a_0 + a_1 z + … + a_N z^N` with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffSeries {
    coeffs: Vec<BigRational>,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

impl CoeffSeries {
    /// Series from coefficients `a_0..=a_N`; an empty vector is the zero series of order 0.
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        CoeffSeries { coeffs }
    }

    /// Integer coefficients, zero-padded (or truncated) to `order`.
    pub fn from_integers(values: &[i64], order: usize) -> Self {
        Self::from_fn(order, |n| values.get(n).map_or_else(BigRational::zero, |&v| rat(v)))
    }

    pub fn from_fn<F: Fn(usize) -> BigRational>(order: usize, f: F) -> Self {
        CoeffSeries { coeffs: (0..=order).map(f).collect() }
    }

    pub fn zero(order: usize) -> Self {
        Self::from_fn(order, |_| BigRational::zero())
    }

    /// `z^k` truncated at `order`.
    pub fn monomial(k: usize, order: usize) -> Self {
        Self::from_fn(order, |n| if n == k { BigRational::one() } else { BigRational::zero() })
    }

    /// `Σ z^n/n!` truncated at `order`.
    pub fn exp_z(order: usize) -> Self {
        let mut c = Vec::with_capacity(order + 1);
        let mut fact = BigInt::one();
        for n in 0..=order {
            if n > 0 {
                fact *= n;
            }
            c.push(BigRational::new(BigInt::one(), fact.clone()));
        }
        CoeffSeries { coeffs: c }
    }

    /// `1/(1−z)` truncated at `order`.
    pub fn geometric(order: usize) -> Self {
        Self::from_fn(order, |_| BigRational::one())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigRational> {
        self.coeffs
    }

    /// `a_n`, or `IndexBeyondTruncation` when `n > N`.
    pub fn coeff(&self, n: usize) -> Result<&BigRational> {
        self.coeffs.get(n).ok_or_else(|| Error::IndexBeyondTruncation(format!("n={n} > order={}", self.order())))
    }

    /// Drops coefficients above `order` (no-op if already shorter).
    pub fn truncate(&self, order: usize) -> Self {
        CoeffSeries { coeffs: self.coeffs[..=order.min(self.order())].to_vec() }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn nonzero_indices(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&i| !self.coeffs[i].is_zero()).collect()
    }

    /// Index of the first nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// gcd of the indices `n ≥ 1` with `a_n ≠ 0` (0 if there are none).
    pub fn q_gcd(&self) -> u64 {
        self.nonzero_indices().into_iter().filter(|&n| n > 0).fold(0u64, |g, n| g.gcd(&(n as u64)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::from_fn(order, |n| &self.coeffs[n] + &other.coeffs[n])
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self::from_fn(order, |n| &self.coeffs[n] - &other.coeffs[n])
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        CoeffSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// `f(cz)`.
    pub fn dilate(&self, c: &BigRational) -> Self {
        let mut p = BigRational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &p);
            p *= c;
        }
        CoeffSeries { coeffs: out }
    }

    /// `z^k f(z)`, keeping the order.
    pub fn shift(&self, k: usize) -> Self {
        let order = self.order();
        Self::from_fn(order, |n| if n >= k { self.coeffs[n - k].clone() } else { BigRational::zero() })
    }

    /// `z^k f(z)` with order raised by `k`.
    pub fn shift_extend(&self, k: usize) -> Self {
        Self::from_fn(self.order() + k, |n| if n >= k { self.coeffs[n - k].clone() } else { BigRational::zero() })
    }

    /// Formal derivative `f'` (order drops by one).
    pub fn formal_derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::from_fn(self.order() - 1, |n| &self.coeffs[n + 1] * BigInt::from(n + 1))
    }

    /// Truncated sum at a real point.
    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + crate::numerics::ratio_to_f64(c))
    }

    /// `ln a_n` for each coefficient (`-inf` for zero); `None` if any is negative.
    pub fn ln_coeffs(&self) -> Option<Vec<f64>> {
        if !self.is_nonnegative() {
            return None;
        }
        Some(par::map_slice(&self.coeffs, |c| LogNumber::from_ratio(c).ln_abs()))
    }

    /// Text form: `order=N` followed by one `num/den` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("order={}\n", self.order());
        for c in &self.coeffs {
            s.push_str(&format!("{}/{}\n", c.numer(), c.denom()));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::ParseError("empty input".into()))?;
        let order: usize = header
            .strip_prefix("order=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::ParseError(format!("bad header '{header}'")))?;
        let coeffs = lines.map(parse_rational).collect::<Result<Vec<_>>>()?;
        if coeffs.len() != order + 1 {
            return Err(Error::ParseError(format!("order={order} but {} coefficients", coeffs.len())));
        }
        Ok(CoeffSeries { coeffs })
    }
}

impl fmt::Display for CoeffSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·z")?,
                _ => write!(f, "{c}·z^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order() + 1)
    }
}

impl FromStr for CoeffSeries {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

/// Parses `p/q`, an integer, or a plain decimal such as `-0.125` or `2.5e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::ParseError(format!("not a rational: '{s}'"));
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Membership of a series in the classes `K` (`a_0 > 0`) and `K_s` (`z^l·K`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeriesClassTag {
    pub in_k: bool,
    pub in_ks: bool,
    /// Valuation `l` with `f/z^l ∈ K` when `in_ks`.
    pub shift: usize,
}

impl SeriesClassTag {
    /// Classifies the truncation; negative coefficients are rejected.
    pub fn classify(f: &CoeffSeries) -> Result<Self> {
        if let Some(n) = f.coeffs.iter().position(|c| c.is_negative()) {
            return Err(Error::NegativeCoefficient(format!("a_{n} < 0")));
        }
        let nz = f.nonzero_indices();
        let in_ks = nz.len() >= 2;
        let shift = nz.first().copied().unwrap_or(0);
        Ok(SeriesClassTag { in_k: in_ks && shift == 0, in_ks, shift })
    }
}

/// Clears denominators: returns integer numerators and their common denominator.
pub(crate) fn common_denominator(a: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let mut d = BigInt::one();
    for x in a {
        if !x.is_zero() && !x.denom().is_one() {
            d = d.lcm(x.denom());
        }
    }
    let nums = a.iter().map(|x| if x.is_zero() { BigInt::zero() } else { x.numer() * (&d / x.denom()) }).collect();
    (nums, d)
}

/// Truncated integer convolution; output index `k` is computed independently.
fn convolve(a: &[BigInt], b: &[BigInt], order: usize) -> Vec<BigInt> {
    let nza: Vec<usize> = (0..a.len().min(order + 1)).filter(|&i| !a[i].is_zero()).collect();
    let nzb: Vec<bool> = b.iter().map(|x| !x.is_zero()).collect();
    par::map_range(order + 1, |k| {
        let mut acc = BigInt::zero();
        for &i in &nza {
            if i > k {
                break;
            }
            let j = k - i;
            if j < nzb.len() && nzb[j] {
                acc += &a[i] * &b[j];
            }
        }
        acc
    })
}

/// Product, truncated at the smaller order.
pub fn mul(a: &CoeffSeries, b: &CoeffSeries) -> CoeffSeries {
    let order = a.order().min(b.order());
    let (na, da) = common_denominator(&a.coeffs[..=order]);
    let (nb, db) = common_denominator(&b.coeffs[..=order]);
    let d = da * db;
    let c = convolve(&na, &nb, order);
    CoeffSeries { coeffs: c.into_iter().map(|x| BigRational::new(x, d.clone())).collect() }
}

/// Schoolbook double loop over rationals; the reference for [`mul`].
pub fn mul_schoolbook(a: &CoeffSeries, b: &CoeffSeries) -> CoeffSeries {
    let order = a.order().min(b.order());
    CoeffSeries::from_fn(order, |k| (0..=k).fold(BigRational::zero(), |acc, j| acc + &a.coeffs[j] * &b.coeffs[k - j]))
}

/// `a^n` by binary exponentiation, truncating after every multiply.
pub fn pow(a: &CoeffSeries, n: u64) -> CoeffSeries {
    assert!(n >= 1, "pow exponent must be positive");
    let mut result: Option<CoeffSeries> = None;
    let mut base = a.clone();
    let mut e = n;
    loop {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => mul(&r, &base),
            });
        }
        e >>= 1;
        if e == 0 {
            break;
        }
        base = mul(&base, &base);
    }
    result.expect("n >= 1")
}

/// Number of coefficient multiplies [`power_series`] performs.
pub fn power_cost(psi: &CoeffSeries, order: usize) -> u128 {
    let nnz = psi.truncate(order).nonzero_indices().len().max(1) as u128;
    (order as u128 + 1) * nnz
}

/// Truncated `ψ^n` by the power recurrence
/// `k φ_0 P_k = Σ_{j≥1} ((n+1)j − k) φ_j P_{k−j}`, run on integers.
///
/// Three exact integer forms are available and the one with smaller numbers is
/// used. Clearing the denominator `d` of `φ` scales `P_k` by `dⁿ`. Normalizing
/// to `φ̃ = φ/φ_0` with denominator `D` and substituting `z = Dw` gives integer
/// coefficients with constant term 1 and scales `P_k` by `Dᵏ`. Reading `φ̃` as an
/// exponential generating function, with `E` the denominator of `j!·φ̃_j`, makes
/// `k!·Eᵏ·P_k` integral, which keeps factorial denominators out of the numbers.
/// Every division is exact.
pub fn power_series(psi: &CoeffSeries, n: u64, order: usize) -> CoeffSeries {
    let psi = psi.truncate(order);
    let Some(v) = psi.valuation() else {
        return CoeffSeries::zero(order);
    };
    let shift = (v as u128) * (n as u128);
    if shift > order as u128 {
        return CoeffSeries::zero(order);
    }
    let shift = shift as usize;
    let m = order - shift;
    let phi: Vec<BigRational> = psi.coeffs[v..].iter().take(m + 1).cloned().collect();
    let (num, d) = common_denominator(&phi);
    let phi0 = phi[0].clone();
    let norm: Vec<BigRational> = phi.iter().map(|c| c / &phi0).collect();
    let (norm_num, dd) = common_denominator(&norm);
    let mut fact = BigInt::one();
    let egf: Vec<BigRational> = norm
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if j > 0 {
                fact *= j;
            }
            if c.is_zero() {
                BigRational::zero()
            } else {
                c * &fact
            }
        })
        .collect();
    let (egf_num, ee) = common_denominator(&egf);
    let cost_plain = n as f64 * (d.bits() as f64 + num[0].bits() as f64);
    let cost_scaled = m as f64 * dd.bits() as f64;
    let cost_egf = m as f64 * ee.bits() as f64 + crate::numerics::ln_factorial(m as u64) / std::f64::consts::LN_2;
    let mut out = vec![BigRational::zero(); order + 1];
    let lead = || if phi0.is_one() { phi0.clone() } else { num_traits::pow(phi0.clone(), n as usize) };
    if cost_egf < cost_plain.min(cost_scaled) {
        // c_j = E^{j−1}·(E·j!·φ̃_j) are the EGF coefficients of φ̃(Ew)
        let mut c: Vec<BigInt> = Vec::with_capacity(egf_num.len());
        let mut ep = BigInt::one();
        for (j, x) in egf_num.iter().enumerate() {
            if j == 0 {
                c.push(BigInt::one());
                continue;
            }
            c.push(x * &ep);
            ep *= &ee;
        }
        let q = egf_recurrence(&c, n, m);
        let lead = lead();
        let mut scale = BigInt::one();
        for (i, qi) in q.iter().enumerate() {
            if i > 0 {
                scale *= &ee * i;
            }
            if !qi.is_zero() {
                out[i + shift] = scaled_term(qi, &scale, &lead);
            }
        }
    } else if cost_plain <= cost_scaled {
        let p = power_recurrence(&num, num[0].clone(), n, m, num_traits::pow(num[0].clone(), n as usize));
        let dn = num_traits::pow(d, n as usize);
        for (i, pi) in p.iter().enumerate() {
            if !pi.is_zero() {
                out[i + shift] = scaled_term(pi, &dn, &BigRational::one());
            }
        }
    } else {
        // c_j = D^{j−1}·(D φ̃_j) are the coefficients of φ̃(Dw)
        let mut c: Vec<BigInt> = Vec::with_capacity(norm_num.len());
        let mut dp = BigInt::one();
        for (j, x) in norm_num.iter().enumerate() {
            if j == 0 {
                c.push(BigInt::one());
                continue;
            }
            c.push(x * &dp);
            dp *= &dd;
        }
        let p = power_recurrence(&c, BigInt::one(), n, m, BigInt::one());
        let lead = lead();
        let mut dk = BigInt::one();
        for (i, pi) in p.iter().enumerate() {
            if i > 0 {
                dk *= &dd;
            }
            if !pi.is_zero() {
                out[i + shift] = scaled_term(pi, &dk, &lead);
            }
        }
    }
    CoeffSeries { coeffs: out }
}

/// `lead · p/den`, skipping reductions by one: binary gcd against 1 costs a
/// full pass per bit of `p`.
fn scaled_term(p: &BigInt, den: &BigInt, lead: &BigRational) -> BigRational {
    let r = if den.is_one() { BigRational::from_integer(p.clone()) } else { BigRational::new(p.clone(), den.clone()) };
    if lead.is_one() {
        r
    } else {
        r * lead
    }
}

/// `Q_0 = 1`, `k Q_k = Σ_{j≥1} ((n+1)j − k)·C(k, j)·c_j·Q_{k−j}` for `k ≤ m`, where
/// `c` holds EGF coefficients with `c_0 = 1`.
fn egf_recurrence(c: &[BigInt], n: u64, m: usize) -> Vec<BigInt> {
    let nz: Vec<usize> = (1..c.len()).filter(|&j| !c[j].is_zero()).collect();
    let np1 = BigInt::from(n) + 1;
    let mut q: Vec<BigInt> = Vec::with_capacity(m + 1);
    q.push(BigInt::one());
    for k in 1..=m {
        let mut acc = BigInt::zero();
        let mut binom = BigInt::one();
        let mut jb = 0usize;
        for &j in &nz {
            if j > k {
                break;
            }
            // advance C(k, jb) to C(k, j)
            while jb < j {
                jb += 1;
                binom = binom * (k + 1 - jb) / jb;
            }
            let w = &np1 * j - k;
            acc += w * &binom * &c[j] * &q[k - j];
        }
        let (quot, r) = acc.div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero(), "EGF power recurrence division must be exact");
        q.push(quot);
    }
    q
}

/// `P_0 = p0`, `k φ_0 P_k = Σ_{j≥1} ((n+1)j − k) φ_j P_{k−j}` for `k ≤ m`.
fn power_recurrence(phi: &[BigInt], phi0: BigInt, n: u64, m: usize, p0: BigInt) -> Vec<BigInt> {
    let nz: Vec<usize> = (1..phi.len()).filter(|&j| !phi[j].is_zero()).collect();
    let np1 = BigInt::from(n) + 1;
    let mut p: Vec<BigInt> = Vec::with_capacity(m + 1);
    p.push(p0);
    for k in 1..=m {
        let mut acc = BigInt::zero();
        for &j in &nz {
            if j > k {
                break;
            }
            let w = &np1 * j - k;
            acc += w * &phi[j] * &p[k - j];
        }
        let den = &phi0 * k;
        let (q, r) = acc.div_rem(&den);
        debug_assert!(r.is_zero(), "power recurrence division must be exact");
        p.push(q);
    }
    p
}

/// `e^g` with the constant `g_0` factored out: the value is `e^{g_0}·series`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpSeries {
    /// Exact exponent of the symbolic prefactor.
    pub prefactor_exponent: BigRational,
    pub series: CoeffSeries,
}

/// Exponential via `n f_n = Σ_{k=1}^{n} k g_k f_{n−k}`.
pub fn exp_series(g: &CoeffSeries) -> ExpSeries {
    let order = g.order();
    let kg: Vec<BigRational> = (0..=order).map(|k| &g.coeffs[k] * BigInt::from(k)).collect();
    let nz: Vec<usize> = (1..=order).filter(|&k| !kg[k].is_zero()).collect();
    let mut f: Vec<BigRational> = Vec::with_capacity(order + 1);
    f.push(BigRational::one());
    for n in 1..=order {
        let mut acc = BigRational::zero();
        for &k in &nz {
            if k > n {
                break;
            }
            acc += &kg[k] * &f[n - k];
        }
        f.push(acc / BigInt::from(n));
    }
    ExpSeries { prefactor_exponent: g.coeffs[0].clone(), series: CoeffSeries { coeffs: f } }
}

/// `ln f = ln(a_0) + series`, with `series_0 = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogSeries {
    /// `a_0`; the constant term of the logarithm is `ln a_0`.
    pub scale: BigRational,
    pub series: CoeffSeries,
}

/// Logarithm, inverse to [`exp_series`].
pub fn log_series(f: &CoeffSeries) -> Result<LogSeries> {
    let a0 = f.coeffs[0].clone();
    if a0.is_zero() {
        return Err(Error::ZeroConstantTerm("a_0 = 0".into()));
    }
    let order = f.order();
    let fh: Vec<BigRational> = f.coeffs.iter().map(|c| c / &a0).collect();
    let mut h: Vec<BigRational> = vec![BigRational::zero(); order + 1];
    for n in 1..=order {
        let mut acc = &fh[n] * BigInt::from(n);
        for k in 1..n {
            if !h[k].is_zero() && !fh[n - k].is_zero() {
                acc -= &h[k] * BigInt::from(k) * &fh[n - k];
            }
        }
        h[n] = acc / BigInt::from(n);
    }
    Ok(LogSeries { scale: a0, series: CoeffSeries { coeffs: h } })
}

/// `f∘g` by Horner's rule; requires `g_0 = 0`. Order is `min(order f, order g)`.
pub fn compose(f: &CoeffSeries, g: &CoeffSeries) -> Result<CoeffSeries> {
    if !g.coeffs[0].is_zero() {
        return Err(Error::NonzeroInnerConstant(format!("g_0 = {}", g.coeffs[0])));
    }
    let order = f.order().min(g.order());
    let g = g.truncate(order);
    let mut acc = CoeffSeries::zero(order);
    for c in f.coeffs[..=order].iter().rev() {
        acc = mul(&acc, &g);
        acc.coeffs[0] += c;
    }
    Ok(acc)
}

/// `D_f(z) = z f'(z)`, i.e. coefficients `n a_n`.
pub fn derivative_series(f: &CoeffSeries) -> CoeffSeries {
    CoeffSeries::from_fn(f.order(), |n| &f.coeffs[n] * BigInt::from(n))
}

/// `1/f`; requires `a_0 ≠ 0`.
pub fn reciprocal(f: &CoeffSeries) -> Result<CoeffSeries> {
    let a0 = f.coeffs[0].clone();
    if a0.is_zero() {
        return Err(Error::ZeroConstantTerm("a_0 = 0".into()));
    }
    let order = f.order();
    let nz: Vec<usize> = (1..=order).filter(|&k| !f.coeffs[k].is_zero()).collect();
    let mut r: Vec<BigRational> = Vec::with_capacity(order + 1);
    r.push(a0.recip());
    for n in 1..=order {
        let mut acc = BigRational::zero();
        for &k in &nz {
            if k > n {
                break;
            }
            acc += &f.coeffs[k] * &r[n - k];
        }
        r.push(-acc / &a0);
    }
    Ok(CoeffSeries { coeffs: r })
}

/// `f / g`; requires `g_0 ≠ 0`.
pub fn div(f: &CoeffSeries, g: &CoeffSeries) -> Result<CoeffSeries> {
    Ok(mul(f, &reciprocal(g)?))
}

/// Solution `g` of `g = z·ψ(g)` to order `n_max`, via `A_n = (1/n)[z^{n−1}]ψ^n`.
///
/// Debug builds also run [`lagrange_fixed_point`] and assert exact agreement.
pub fn lagrange_invert(psi: &CoeffSeries, n_max: usize) -> Result<CoeffSeries> {
    if psi.coeffs[0].is_zero() {
        return Err(Error::ZeroConstantTerm("psi_0 = 0".into()));
    }
    if psi.order() + 1 < n_max {
        return Err(Error::IndexBeyondTruncation(format!(
            "ψ known to order {}, inversion to {n_max} needs {}",
            psi.order(),
            n_max - 1
        )));
    }
    let a = par::map_range(n_max, |i| {
        let n = i + 1;
        let pw = power_series(psi, n as u64, n - 1);
        &pw.coeffs[n - 1] / BigInt::from(n)
    });
    let mut coeffs = Vec::with_capacity(n_max + 1);
    coeffs.push(BigRational::zero());
    coeffs.extend(a);
    let g = CoeffSeries { coeffs };
    #[cfg(debug_assertions)]
    {
        let fp = lagrange_fixed_point(psi, n_max)?;
        assert_eq!(g, fp, "inversion formula disagrees with fixed-point iteration");
    }
    Ok(g)
}

/// Iterates `g ← z·ψ(g)`; iteration `i` fixes coefficient `i`.
pub fn lagrange_fixed_point(psi: &CoeffSeries, n_max: usize) -> Result<CoeffSeries> {
    if psi.coeffs[0].is_zero() {
        return Err(Error::ZeroConstantTerm("psi_0 = 0".into()));
    }
    if psi.order() + 1 < n_max {
        return Err(Error::IndexBeyondTruncation(format!(
            "ψ known to order {}, inversion to {n_max} needs {}",
            psi.order(),
            n_max - 1
        )));
    }
    let mut g = CoeffSeries::zero(0);
    for i in 1..=n_max {
        let inner = compose(&psi.truncate(i - 1), &g.truncate(i - 1))?;
        g = inner.shift_extend(1);
    }
    if n_max == 0 {
        g = CoeffSeries::zero(0);
    }
    Ok(g)
}

/// `a_n` of `f`.
pub fn coeff(f: &CoeffSeries, n: usize) -> Result<BigRational> {
    f.coeff(n).cloned()
}

/// Exact value of a rational as a ratio of integers converted to `f64`.
pub fn to_f64(x: &BigRational) -> f64 {
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(p), Some(q)) if p.is_finite() && q.is_finite() => p / q,
        _ => crate::numerics::ratio_to_f64(x),
    }
}
