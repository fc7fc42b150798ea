//! Coefficients `COEFF_k(ψⁿ)` of large powers: an exact oracle and saddle-point
//! estimators for each regime of `k/n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::asym::{self, Estimate};
use crate::error::{Error, Result};
use crate::khinchin::{self, Family};
use crate::numerics::{LogNumber, LN_2PI};
use crate::series::{self, CoeffSeries};

/// Estimator selection; thresholds live in [`RegimeThresholds`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    /// `A ≤ k/n ≤ B` with `0 < A < B < M_ψ`.
    Comparable {
        a: f64,
        b: f64,
    },
    /// Fixed saddle `m_ψ(τ) = L` with the Gaussian correction for `ω`.
    LimitL {
        l: f64,
        omega: f64,
    },
    /// Saddle on the boundary `t = R`, `L = M_ψ`.
    BoundaryL,
    SmallK,
    SmallKRefined {
        j: usize,
    },
    FixedK,
    LargeK,
    Auto,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Comparable { .. } => "comparable",
            Regime::LimitL { .. } => "limit-l",
            Regime::BoundaryL => "boundary",
            Regime::SmallK => "small-k",
            Regime::SmallKRefined { .. } => "small-k-refined",
            Regime::FixedK => "fixed-k",
            Regime::LargeK => "large-k",
            Regime::Auto => "auto",
        }
    }
}

/// Policy thresholds for regime checks and [`auto_regime`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegimeThresholds {
    /// `k/n ≤ small` selects the small-k regime.
    pub small: f64,
    /// `k/n ≥ large` selects the large-k regime.
    pub large: f64,
    /// Largest `k` handled by tuple enumeration.
    pub fixed_k_max: u64,
    /// Fixed-k requires `n ≥ fixed_k_ratio · k`.
    pub fixed_k_ratio: u64,
    /// Comparable band is `(lo, hi)·min(M_ψ, cap)`.
    pub band_lo: f64,
    pub band_hi: f64,
    pub cap: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { small: 0.05, large: 20.0, fixed_k_max: 64, fixed_k_ratio: 10, band_lo: 0.05, band_hi: 0.95, cap: 20.0 }
    }
}

/// Default bound on `(k + 1)·log₂ n` for the exact oracle.
pub const DEFAULT_BUDGET: f64 = 1e9;

/// `COEFF_k(h·ψⁿ)`, with `h ≡ 1` when absent.
#[derive(Clone)]
pub struct PowerCoeffQuery {
    pub psi: Family,
    pub n: u64,
    pub k: u64,
    pub h: Option<Family>,
}

impl PowerCoeffQuery {
    pub fn new(psi: Family, n: u64, k: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DomainError("power n must be >= 1".into()));
        }
        if k as usize > psi.trunc() {
            return Err(Error::IndexBeyondTruncation(format!("k={k} > truncation {}", psi.trunc())));
        }
        Ok(PowerCoeffQuery { psi, n, k, h: None })
    }

    pub fn with_prefactor(mut self, h: Family) -> Self {
        self.h = Some(h);
        self
    }

    pub fn ratio(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

/// Exact `COEFF_k(h·ψⁿ)` without the symbolic factor `e^{n·scale_ψ + scale_h}`.
pub fn exact_power_coeff(q: &PowerCoeffQuery, budget: f64) -> Result<BigRational> {
    let k = q.k as usize;
    let cost = (k as f64 + 1.0) * (q.n as f64).log2().max(1.0);
    if cost > budget {
        return Err(Error::BudgetExceeded(format!("(k+1)·log2 n = {cost:.3e} > {budget:.3e}")));
    }
    // coefficients above k cannot reach COEFF_k
    let psi = q.psi.exact_coeffs(k)?.truncate(k);
    let pw = series::power_series(&psi, q.n, k);
    match &q.h {
        None => Ok(pw.coeffs()[k].clone()),
        Some(h) => {
            let hc = h.exact_coeffs(k)?.truncate(k);
            Ok((0..=k).fold(BigRational::zero(), |acc, j| acc + &hc.coeffs()[j] * &pw.coeffs()[k - j]))
        }
    }
}

/// Exact `COEFF_k(h·ψⁿ)` in log space, including the symbolic factor.
pub fn exact_power_ln(q: &PowerCoeffQuery, budget: f64) -> Result<LogNumber> {
    let v = exact_power_coeff(q, budget)?;
    let scale = q.n as f64 * q.psi.coeff_ln_scale() + q.h.as_ref().map_or(0.0, |h| h.coeff_ln_scale());
    let l = LogNumber::from_ratio(&v);
    Ok(LogNumber::new(l.sign(), l.ln_abs() + scale))
}

fn check_q(q: &PowerCoeffQuery) -> Result<f64> {
    let qg = q.psi.q_gcd();
    if !q.k.is_multiple_of(qg) {
        return Err(Error::QGcdViolation(format!("Q_ψ={qg} does not divide k={}; the coefficient is 0", q.k)));
    }
    Ok(qg as f64)
}

/// `ln Q + n ln ψ(τ) − k ln τ − ½ ln(2π n σ²(τ))`.
fn saddle_formula(q: &PowerCoeffQuery, qg: f64, t: f64, ln_psi: f64, var: f64) -> f64 {
    let (n, k) = (q.n as f64, q.k as f64);
    qg.ln() + n * ln_psi - k * t.ln() - 0.5 * (LN_2PI + (n * var).ln())
}

fn estimate_at_ratio(q: &PowerCoeffQuery, method: &'static str) -> Result<Estimate> {
    let qg = check_q(q)?;
    let sp = asym::solve_mean(&q.psi, q.ratio())?;
    let ln = saddle_formula(q, qg, sp.t, sp.ln_f, sp.var);
    Ok(meta(q, method, ln, sp.t))
}

fn meta(q: &PowerCoeffQuery, method: &'static str, ln: f64, t: f64) -> Estimate {
    Estimate::new(method, ln, q.psi.label(), vec![("n", q.n as f64), ("k", q.k as f64), ("tau", t)])
}

/// Saddle estimate for `A ≤ k/n ≤ B < M_ψ`.
pub fn estimate_comparable(q: &PowerCoeffQuery, a: f64, b: f64) -> Result<Estimate> {
    let r = q.ratio();
    if !(0.0 < a && a < b && b < q.psi.mean_sup()) {
        return Err(Error::RatioOutOfBand(format!("band ({a}, {b}) not inside (0, M_ψ={})", q.psi.mean_sup())));
    }
    if r < a || r > b {
        return Err(Error::RatioOutOfBand(format!("k/n={r} outside [{a}, {b}]")));
    }
    estimate_at_ratio(q, "comparable")
}

/// Saddle fixed at `m_ψ(τ) = L`, corrected by `e^{−ω²/(2σ²(τ))}` where
/// `(nL − k)/√n → −ω`.
pub fn estimate_limit_l(q: &PowerCoeffQuery, l: f64, omega: f64) -> Result<Estimate> {
    if !(l > 0.0) || l >= q.psi.mean_sup() {
        return Err(Error::LAboveMeanSup(format!("L={l} not in (0, M_ψ={})", q.psi.mean_sup())));
    }
    let qg = check_q(q)?;
    let sp = asym::solve_mean(&q.psi, l)?;
    let ln = saddle_formula(q, qg, sp.t, sp.ln_f, sp.var) - omega * omega / (2.0 * sp.var);
    let mut e = meta(q, "limit-l", ln, sp.t);
    e.meta.push(("omega", omega));
    Ok(e)
}

/// Saddle at `t = R` for `L = M_ψ`, with `ω = (k − n M_ψ)/√n`.
pub fn estimate_boundary(q: &PowerCoeffQuery) -> Result<Estimate> {
    let (r, m) = (q.psi.radius(), q.psi.mean_sup());
    if r.is_infinite() || m.is_infinite() {
        return Err(Error::DomainError(format!("boundary regime needs R < ∞ and M_ψ < ∞ (R={r}, M={m})")));
    }
    if !q.psi.boundary_allowed() {
        return Err(Error::BoundaryVarianceInfinite(format!("{} has no boundary extension", q.psi.label())));
    }
    let p = khinchin::point(&q.psi, r)?;
    if !p.var.is_finite() {
        return Err(Error::BoundaryVarianceInfinite(format!("σ²(R) diverges for {}", q.psi.label())));
    }
    let qg = check_q(q)?;
    let omega = (q.k as f64 - q.n as f64 * m) / (q.n as f64).sqrt();
    let ln = saddle_formula(q, qg, r, p.ln_f, p.var) - omega * omega / (2.0 * p.var);
    let mut e = meta(q, "boundary", ln, r);
    e.meta.push(("omega", omega));
    Ok(e)
}

fn low_coeffs(psi: &Family, order: usize) -> Result<CoeffSeries> {
    Ok(psi.exact_coeffs(order)?.truncate(order))
}

fn require_b1(psi: &Family) -> Result<CoeffSeries> {
    let c = low_coeffs(psi, 1)?;
    if c.coeffs()[1].is_zero() {
        return Err(Error::FirstCoefficientZero(format!("ψ′(0) = 0 for {}", psi.label())));
    }
    Ok(c)
}

/// `(1/√(2π))·ψⁿ(τ)/τᵏ·1/√k` with `m_ψ(τ) = k/n`.
pub fn estimate_small_k(q: &PowerCoeffQuery, th: &RegimeThresholds) -> Result<Estimate> {
    require_b1(&q.psi)?;
    let r = q.ratio();
    if r > th.small {
        return Err(Error::RegimeMismatch(format!("k/n={r} > {}", th.small)));
    }
    if q.k == 0 {
        return Err(Error::DomainError("small-k needs k >= 1".into()));
    }
    let sp = asym::solve_mean(&q.psi, r)?;
    let ln = q.n as f64 * sp.ln_f - q.k as f64 * sp.t.ln() - 0.5 * (LN_2PI + (q.k as f64).ln());
    Ok(meta(q, "small-k", ln, sp.t))
}

/// `B_j = (1/j)·COEFF_{j−1}((ψ/ψ′)^{j−1})` for `j ≤ max_j`; index 0 holds 0.
pub fn small_k_constants(psi: &CoeffSeries, max_j: usize) -> Result<Vec<BigRational>> {
    if psi.order() < 1 || psi.coeffs()[1].is_zero() {
        return Err(Error::FirstCoefficientZero("ψ′(0) = 0".into()));
    }
    let order = max_j.max(1);
    let p = psi.truncate(order);
    let ratio = series::div(&p, &p.formal_derivative())?;
    let mut out = vec![BigRational::zero(); max_j + 1];
    for j in 1..=max_j {
        let c =
            if j == 1 { BigRational::one() } else { series::power_series(&ratio, (j - 1) as u64, j - 1).coeffs()[j - 1].clone() };
        out[j] = c / BigRational::from_integer(BigInt::from(j));
    }
    Ok(out)
}

/// `(1/√(2π))·b₀^{n−k}b₁ᵏ·nᵏeᵏ/(kᵏ√k)·exp(−Σ_{j=2}^{J} B_j/(j−1)·kʲ/n^{j−1})`.
pub fn estimate_small_k_refined(q: &PowerCoeffQuery, j_max: usize) -> Result<Estimate> {
    if j_max == 0 {
        return Err(Error::DomainError("J must be >= 1".into()));
    }
    if q.k == 0 {
        return Err(Error::DomainError("small-k needs k >= 1".into()));
    }
    let c = low_coeffs(&q.psi, j_max.max(1))?;
    let bs = small_k_constants(&c, j_max)?;
    let b0 = series::to_f64(&c.coeffs()[0]);
    let b1 = series::to_f64(&c.coeffs()[1]);
    let (n, k) = (q.n as f64, q.k as f64);
    let mut ln =
        -0.5 * LN_2PI + (n - k) * b0.ln() + k * b1.ln() + k * n.ln() + k - k * k.ln() - 0.5 * k.ln() + n * q.psi.coeff_ln_scale();
    for (j, bj) in bs.iter().enumerate().skip(2) {
        let jf = j as f64;
        ln -= series::to_f64(bj) / (jf - 1.0) * (jf * k.ln() - (jf - 1.0) * n.ln()).exp();
    }
    let mut e = meta(q, "small-k-refined", ln, 0.0);
    e.meta.push(("J", j_max as f64));
    Ok(e)
}

/// `COEFF_k(ψⁿ) = Σ_{l=0}^{k} C(n,l)·b₀^{n−l}·C_l` with `C_l = COEFF_k((ψ − b₀)^l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixedKPoly {
    pub k: usize,
    pub b0: BigRational,
    /// `C_0, …, C_k`.
    pub c: Vec<BigRational>,
}

impl FixedKPoly {
    /// Exact value at power `n`.
    pub fn eval(&self, n: u64) -> BigRational {
        let mut total = BigRational::zero();
        let mut binom = BigRational::one();
        for (l, cl) in self.c.iter().enumerate() {
            if l as u64 > n {
                break;
            }
            if l > 0 {
                binom = binom * BigRational::from_integer(BigInt::from(n - l as u64 + 1))
                    / BigRational::from_integer(BigInt::from(l));
            }
            if !cl.is_zero() {
                total += &binom * num_traits::pow(self.b0.clone(), (n - l as u64) as usize) * cl;
            }
        }
        total
    }

    /// Coefficients `p_i` with `COEFF_k(ψⁿ) = b₀ⁿ·Σ_i p_i nⁱ` for `n ≥ k`.
    pub fn poly_in_n(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.k + 1];
        // falling factorial n(n−1)…(n−l+1) as a polynomial in n
        let mut fall = vec![BigRational::one()];
        let mut fact = BigRational::one();
        let b0_inv = self.b0.recip();
        let mut b0_pow = BigRational::one();
        for (l, cl) in self.c.iter().enumerate() {
            if l > 0 {
                let mut next = vec![BigRational::zero(); fall.len() + 1];
                let shift = BigRational::from_integer(BigInt::from(l - 1));
                for (i, a) in fall.iter().enumerate() {
                    next[i + 1] += a;
                    next[i] -= a * &shift;
                }
                fall = next;
                fact *= BigRational::from_integer(BigInt::from(l));
                b0_pow *= &b0_inv;
            }
            if cl.is_zero() {
                continue;
            }
            let w = cl * &b0_pow / &fact;
            for (i, a) in fall.iter().enumerate() {
                out[i] += a * &w;
            }
        }
        while out.len() > 1 && out.last().is_some_and(|x| x.is_zero()) {
            out.pop();
        }
        out
    }

    /// `(γ, c)` with `COEFF_k(ψⁿ) ∼ c·b₀^{n}·n^γ`; `None` for the zero polynomial.
    pub fn leading_term(&self) -> Option<(usize, BigRational)> {
        let p = self.poly_in_n();
        let g = p.iter().rposition(|x| !x.is_zero())?;
        Some((g, p[g].clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }
}

pub const FIXED_K_MAX: usize = 64;

pub fn fixed_k_polynomial(psi: &CoeffSeries, k: usize) -> Result<FixedKPoly> {
    if k > FIXED_K_MAX {
        return Err(Error::KTooLarge(format!("k={k} > {FIXED_K_MAX}")));
    }
    let p = psi.truncate(k);
    let b0 = p.coeffs()[0].clone();
    if b0.is_zero() || b0.is_negative() {
        return Err(Error::ZeroConstantTerm("fixed-k expansion needs b₀ > 0".into()));
    }
    let mut tail = p.clone().into_coeffs();
    tail[0] = BigRational::zero();
    let tail = CoeffSeries::new(tail);
    let c = (0..=k)
        .map(|l| {
            if l == 0 {
                if k == 0 {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            } else {
                series::power_series(&tail, l as u64, k).coeffs()[k].clone()
            }
        })
        .collect();
    Ok(FixedKPoly { k, b0, c })
}

/// Uniformly strongly Gaussian ψ with `k/n ≥ large`.
pub fn estimate_large_k(q: &PowerCoeffQuery, th: &RegimeThresholds) -> Result<Estimate> {
    if !q.psi.usg() {
        return Err(Error::NotUSG(format!("{} is not flagged uniformly strongly Gaussian", q.psi.label())));
    }
    let r = q.ratio();
    if r < th.large {
        return Err(Error::RegimeMismatch(format!("k/n={r} < {}", th.large)));
    }
    estimate_at_ratio(q, "large-k")
}

/// Saddle estimate multiplied by `h(τ)`; in the small-k regime by `h(0)`.
pub fn estimate_with_prefactor(q: &PowerCoeffQuery, th: &RegimeThresholds) -> Result<Estimate> {
    let Some(h) = &q.h else {
        return if q.ratio() <= th.small { estimate_small_k(q, th) } else { estimate_at_ratio(q, "comparable") };
    };
    if h.radius() < q.psi.radius() {
        return Err(Error::PrefactorRadiusTooSmall(format!("R_h={} < R_ψ={}", h.radius(), q.psi.radius())));
    }
    if q.ratio() <= th.small {
        let base = estimate_small_k(q, th)?;
        let ln = base.ln() + h.ln_f(0.0)?;
        let t = base.meta_value("tau").unwrap_or(0.0);
        return Ok(meta(q, "prefactor-small-k", ln, t));
    }
    let base = estimate_at_ratio(q, "comparable")?;
    let t = base.meta_value("tau").unwrap_or(0.0);
    let ln = base.ln() + h.ln_f(t)?;
    Ok(meta(q, "prefactor", ln, t))
}

/// Deterministic regime choice: fixed-k first, then small-k, large-k, the
/// comparable band, and the boundary.
pub fn auto_regime(q: &PowerCoeffQuery, th: &RegimeThresholds) -> Result<Regime> {
    let r = q.ratio();
    if q.k <= th.fixed_k_max && q.n >= th.fixed_k_ratio * q.k && q.psi.has_coeffs() {
        return Ok(Regime::FixedK);
    }
    if r <= th.small {
        return Ok(Regime::SmallK);
    }
    if q.psi.usg() && r >= th.large {
        return Ok(Regime::LargeK);
    }
    let m = q.psi.mean_sup();
    let cap = m.min(th.cap);
    let (a, b) = (th.band_lo * cap, th.band_hi * cap);
    if r >= a && r <= b {
        return Ok(Regime::Comparable { a, b });
    }
    if m.is_infinite() {
        // entire or unbounded mean: any ratio is interior
        return Ok(Regime::Comparable { a: a.min(r), b: b.max(r) });
    }
    if r >= m && q.psi.radius().is_finite() && q.psi.boundary_allowed() {
        if let Ok(p) = khinchin::point(&q.psi, q.psi.radius()) {
            if p.var.is_finite() {
                return Ok(Regime::BoundaryL);
            }
        }
    }
    Err(Error::NoApplicableRegime(format!("k/n={r} with M_ψ={m}")))
}

/// Dispatches to the estimator for `regime`; `FixedK` returns the exact value.
pub fn estimate(q: &PowerCoeffQuery, regime: Regime, th: &RegimeThresholds) -> Result<Estimate> {
    match regime {
        Regime::Auto => estimate(q, auto_regime(q, th)?, th),
        Regime::Comparable { a, b } => {
            let e = estimate_comparable(q, a, b)?;
            match &q.h {
                Some(h) => {
                    let t = e.meta_value("tau").unwrap_or(0.0);
                    Ok(meta(q, "prefactor", e.ln() + h.ln_f(t)?, t))
                }
                None => Ok(e),
            }
        }
        Regime::LimitL { l, omega } => estimate_limit_l(q, l, omega),
        Regime::BoundaryL => estimate_boundary(q),
        Regime::SmallK => match &q.h {
            Some(_) => estimate_with_prefactor(q, th),
            None => estimate_small_k(q, th),
        },
        Regime::SmallKRefined { j } => estimate_small_k_refined(q, j),
        Regime::LargeK => estimate_large_k(q, th),
        Regime::FixedK => {
            let k = q.k as usize;
            let poly = fixed_k_polynomial(&low_coeffs(&q.psi, k)?, k)?;
            let v = match &q.h {
                None => poly.eval(q.n),
                Some(_) => exact_power_coeff(q, DEFAULT_BUDGET)?,
            };
            if v.is_zero() {
                return Err(Error::QGcdViolation(format!("COEFF_{k}(ψ^{}) = 0", q.n)));
            }
            let l = LogNumber::from_ratio(&v);
            let ln = l.ln_abs() + q.n as f64 * q.psi.coeff_ln_scale() + q.h.as_ref().map_or(0.0, |h| h.coeff_ln_scale());
            Ok(meta(q, "fixed-k", ln, 0.0))
        }
    }
}
