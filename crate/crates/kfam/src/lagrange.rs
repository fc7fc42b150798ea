//! Solutions of `g = z·ψ(g)`: apex, exact inversion, tree-count asymptotics,
//! and Lagrangian (total-progeny) distributions with a seeded sampler.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asym::{self, Estimate};
use crate::error::{Error, Result};
use crate::khinchin::{self, Family};
use crate::numerics::{self, LogNumber, LN_2PI};
use crate::par;
use crate::series::{self, CoeffSeries};

/// Radius with `m_ψ(τ) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Apex {
    Interior {
        tau: f64,
        ln_psi: f64,
        var: f64,
    },
    /// `M_ψ = 1` attained at `t = R` with finite boundary variance.
    Boundary {
        r: f64,
        ln_psi: f64,
        var: f64,
    },
    /// `ψ = a + bz`: `A_n = a·bⁿ⁻¹` exactly.
    Linear {
        a: BigRational,
        b: BigRational,
    },
}

impl Apex {
    /// `(τ, ln ψ(τ), σ²(τ))`; `None` for the linear edge.
    pub fn saddle(&self) -> Option<(f64, f64, f64)> {
        match *self {
            Apex::Interior { tau, ln_psi, var } => Some((tau, ln_psi, var)),
            Apex::Boundary { r, ln_psi, var } => Some((r, ln_psi, var)),
            Apex::Linear { .. } => None,
        }
    }
}

const MEAN_ONE_TOL: f64 = 1e-12;

pub fn apex(psi: &Family) -> Result<Apex> {
    let m = psi.mean_sup();
    if m > 1.0 + MEAN_ONE_TOL {
        let sp = asym::solve_mean(psi, 1.0)?;
        return Ok(Apex::Interior { tau: sp.t, ln_psi: sp.ln_f, var: sp.var });
    }
    if (m - 1.0).abs() <= MEAN_ONE_TOL {
        let r = psi.radius();
        if r.is_infinite() && psi.has_coeffs() {
            let c = psi.exact_coeffs(2)?;
            if c.coeffs()[2..].iter().all(|x| x.is_zero()) {
                return Ok(Apex::Linear { a: c.coeffs()[0].clone(), b: c.coeffs()[1].clone() });
            }
        }
        if r.is_finite() && psi.boundary_allowed() {
            let p = khinchin::point(psi, r)?;
            if p.var.is_finite() {
                return Ok(Apex::Boundary { r, ln_psi: p.ln_f, var: p.var });
            }
        }
    }
    Err(Error::MeanSupBelowOne(format!("M_ψ={m} admits no apex for {}", psi.label())))
}

/// `(1/n)·COEFF_{n−1}(H′·ψⁿ) = COEFF_n(H∘g)`.
pub fn extended_coeff(h: &CoeffSeries, psi: &CoeffSeries, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    if psi.order() + 1 < n {
        return Err(Error::IndexBeyondTruncation(format!("ψ known to order {}, n={n} needs {}", psi.order(), n - 1)));
    }
    let pw = series::power_series(psi, n as u64, n - 1);
    let hd = h.formal_derivative();
    let s = (0..n).fold(BigRational::zero(), |acc, j| match hd.coeffs().get(j) {
        Some(c) if !c.is_zero() => acc + c * &pw.coeffs()[n - 1 - j],
        _ => acc,
    });
    Ok(s / BigRational::from_integer(BigInt::from(n)))
}

/// Evidence that `A_n Rⁿ⁻¹ n^{3/2}/ψⁿ(R)` tends to 0 when `M_ψ < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayCertificate {
    /// `(n, scaled value)` along a doubling grid.
    pub scaled: Vec<(u64, f64)>,
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OmmResult {
    Estimate(Estimate),
    Decay(DecayCertificate),
}

impl OmmResult {
    pub fn estimate(self) -> Option<Estimate> {
        match self {
            OmmResult::Estimate(e) => Some(e),
            OmmResult::Decay(_) => None,
        }
    }
}

fn check_residue(psi: &Family, n: u64, q: u64) -> Result<f64> {
    let qg = psi.q_gcd();
    if n < q || !(n - q).is_multiple_of(qg) {
        return Err(Error::ZeroCoefficient(format!("n − {q} = {} is not a multiple of Q_ψ={qg}", n as i64 - q as i64)));
    }
    Ok(qg as f64)
}

/// `ln[(Q/√(2π))·(τ/σ)·n^{−3/2}·(ψ(τ)/τ)ⁿ]`.
fn omm_ln(qg: f64, tau: f64, ln_psi: f64, var: f64, n: f64) -> f64 {
    qg.ln() - 0.5 * LN_2PI + tau.ln() - 0.5 * var.ln() - 1.5 * n.ln() + n * (ln_psi - tau.ln())
}

/// Estimate of `A_n = COEFF_n(g)`; a decay certificate when `M_ψ < 1`.
pub fn omm_estimate(psi: &Family, n: u64) -> Result<OmmResult> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    let qg = check_residue(psi, n, 1)?;
    let ap = match apex(psi) {
        Ok(a) => a,
        Err(Error::MeanSupBelowOne(_)) if psi.mean_sup() < 1.0 => return decay_certificate(psi, n).map(OmmResult::Decay),
        Err(e) => return Err(e),
    };
    let nf = n as f64;
    let (ln, tau) = match &ap {
        Apex::Linear { a, b } => {
            let v = a * num_traits::pow(b.clone(), (n - 1) as usize);
            (LogNumber::from_ratio(&v).ln_abs(), f64::NAN)
        }
        _ => {
            let (tau, lp, var) = ap.saddle().expect("non-linear apex");
            (omm_ln(qg, tau, lp, var, nf), tau)
        }
    };
    Ok(OmmResult::Estimate(Estimate::new("otter-meir-moon", ln, psi.label(), vec![("n", nf), ("tau", tau)])))
}

fn decay_certificate(psi: &Family, n: u64) -> Result<DecayCertificate> {
    let r = psi.radius();
    if !r.is_finite() || !psi.boundary_allowed() {
        return Err(Error::MeanSupBelowOne(format!("M_ψ < 1 and ψ(R) unavailable for {}", psi.label())));
    }
    let ln_psi_r = psi.ln_f(r)?;
    let n_max = (n as usize).max(8);
    let a = series::lagrange_invert(&psi.exact_coeffs(n_max)?.truncate(n_max), n_max)?;
    let mut scaled = Vec::new();
    let mut m = 4usize;
    while m <= n_max {
        let la = LogNumber::from_ratio(&a.coeffs()[m]).ln_abs() + m as f64 * psi.coeff_ln_scale();
        let v = (la + (m as f64 - 1.0) * r.ln() - m as f64 * ln_psi_r + 1.5 * (m as f64).ln()).exp();
        scaled.push((m as u64, v));
        m *= 2;
    }
    let decreasing = scaled.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(DecayCertificate { scaled, decreasing })
}

/// Optional `α`-scaling for [`power_asym`]: saddle at `m_ψ(τ_α) = 1 − α`,
/// corrected by `e^{−β²/(2σ²(τ_α))}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlphaScaling {
    pub alpha: f64,
    pub beta: f64,
}

/// Estimate of `B_{n,q} = COEFF_n(g^q) = (q/n)·COEFF_{n−q}(ψⁿ)`.
pub fn power_asym(psi: &Family, q: u64, n: u64, scaling: Option<AlphaScaling>) -> Result<Estimate> {
    if q == 0 || n == 0 {
        return Err(Error::DomainError(format!("q={q}, n={n} must be >= 1")));
    }
    let qg = check_residue(psi, n, q)?;
    let nf = n as f64;
    let qf = q as f64;
    let ap = apex(psi)?;
    let ln = match (scaling, ap.saddle()) {
        (None, Some((tau, lp, var))) => omm_ln(qg, tau, lp, var, nf) + qf.ln() + (qf - 1.0) * tau.ln(),
        (Some(AlphaScaling { alpha, beta }), Some(_)) => {
            if !(0.0..1.0).contains(&alpha) {
                return Err(Error::DomainError(format!("α={alpha} outside [0, 1)")));
            }
            let sp = asym::solve_mean(psi, 1.0 - alpha)?;
            let k = nf - qf;
            (qf / nf).ln() + qg.ln() + nf * sp.ln_f
                - k * sp.t.ln()
                - 0.5 * (LN_2PI + (nf * sp.var).ln())
                - beta * beta / (2.0 * sp.var)
        }
        (_, None) => {
            let Apex::Linear { a, b } = ap else { unreachable!() };
            // g = az/(1 − bz)
            let v = num_traits::pow(a, q as usize)
                * num_traits::pow(b, (n - q) as usize)
                * BigRational::from_integer(binom_big(n - 1, q - 1));
            LogNumber::from_ratio(&v).ln_abs()
        }
    };
    Ok(Estimate::new("lagrange-power", ln, psi.label(), vec![("n", nf), ("q", qf)]))
}

fn binom_big(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Outer function `H` in `COEFF_n(H∘g)`.
#[derive(Clone)]
pub enum Outer {
    Poly(CoeffSeries),
    Family(Family),
}

impl Outer {
    fn radius(&self) -> f64 {
        match self {
            Outer::Poly(_) => f64::INFINITY,
            Outer::Family(f) => f.radius(),
        }
    }

    /// `ln H′(x)` for `x > 0`.
    fn ln_derivative(&self, x: f64) -> Result<f64> {
        match self {
            Outer::Poly(p) => {
                let d = p.formal_derivative().eval_f64(x);
                if !(d > 0.0) {
                    return Err(Error::DomainError(format!("H′({x}) = {d} is not positive")));
                }
                Ok(d.ln())
            }
            Outer::Family(f) => {
                let p = khinchin::point(f, x)?;
                Ok(p.ln_f + p.mean.ln() - x.ln())
            }
        }
    }

    fn coeffs(&self, order: usize) -> Result<CoeffSeries> {
        match self {
            Outer::Poly(p) => Ok(CoeffSeries::from_fn(order, |i| p.coeffs().get(i).cloned().unwrap_or_else(BigRational::zero))),
            Outer::Family(f) => Ok(f.exact_coeffs(order)?.truncate(order)),
        }
    }

    fn ln_scale(&self) -> f64 {
        match self {
            Outer::Poly(_) => 0.0,
            Outer::Family(f) => f.coeff_ln_scale(),
        }
    }
}

/// `COEFF_n(H(g)) ∼ (Q/√(2π))·H′(τ)·τ/σ(τ)·n^{−3/2}·(ψ(τ)/τ)ⁿ`.
pub fn func_asym(h: &Outer, psi: &Family, n: u64) -> Result<Estimate> {
    if h.radius() < psi.radius() {
        return Err(Error::PrefactorRadiusTooSmall(format!("R_H={} < R_ψ={}", h.radius(), psi.radius())));
    }
    let qg = psi.q_gcd() as f64;
    let (tau, lp, var) = apex(psi)?.saddle().ok_or_else(|| Error::DomainError("linear ψ has no interior apex".into()))?;
    let ln = omm_ln(qg, tau, lp, var, n as f64) + h.ln_derivative(tau)?;
    Ok(Estimate::new("lagrange-func", ln, psi.label(), vec![("n", n as f64), ("tau", tau)]))
}

/// Exact `COEFF_n(H∘g)` in log space.
pub fn func_exact(h: &Outer, psi: &Family, n: u64) -> Result<LogNumber> {
    let n_us = n as usize;
    let hc = h.coeffs(n_us)?;
    let pc = psi.exact_coeffs(n_us)?.truncate(n_us);
    let v = extended_coeff(&hc, &pc, n_us)?;
    let l = LogNumber::from_ratio(&v);
    // ψ scale enters every ψ factor of g; g's nth coefficient carries n of them minus the outer shift
    Ok(LogNumber::new(l.sign(), l.ln_abs() + h.ln_scale() + n as f64 * psi.coeff_ln_scale()))
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::ParameterDomain(format!("t={t} outside (0, 1]")));
    }
    Ok(())
}

/// `P(Z = n) = (j/n)·e^{−tn}(tn)^{n−j}/(n−j)!`, `n ≥ j`.
pub fn borel_tanner_pmf(t: f64, j: u64, n: u64) -> Result<f64> {
    Ok(borel_tanner_ln_pmf(t, j, n)?.exp())
}

pub fn borel_tanner_ln_pmf(t: f64, j: u64, n: u64) -> Result<f64> {
    check_t(t)?;
    if j == 0 || n < j {
        return Err(Error::IndexBelowJ(format!("n={n} < j={j}")));
    }
    let (nf, jf) = (n as f64, j as f64);
    let pow = if n == j { 0.0 } else { (nf - jf) * (t * nf).ln() };
    Ok(jf.ln() - nf.ln() - t * nf + pow - numerics::ln_factorial(n - j))
}

/// `P(Z = n)·e^{tn} = (j/n)(tn)^{n−j}/(n−j)!` for rational `t`.
pub fn borel_tanner_scaled(t: &BigRational, j: u64, n: u64) -> Result<BigRational> {
    if j == 0 || n < j {
        return Err(Error::IndexBelowJ(format!("n={n} < j={j}")));
    }
    let tn = t * BigRational::from_integer(BigInt::from(n));
    let fact: BigInt = (1..=n - j).fold(BigInt::one(), |a, i| a * BigInt::from(i));
    Ok(BigRational::new(BigInt::from(j), BigInt::from(n)) * num_traits::pow(tn, (n - j) as usize)
        / BigRational::from_integer(fact))
}

/// `(j/n)·COEFF_{n−j}((e^{tz})ⁿ)`: the same quantity through the power oracle.
pub fn borel_tanner_via_powers(t: &BigRational, j: u64, n: u64) -> Result<BigRational> {
    if j == 0 || n < j {
        return Err(Error::IndexBelowJ(format!("n={n} < j={j}")));
    }
    let order = (n - j) as usize;
    let e = CoeffSeries::exp_z(order).dilate(t);
    let c = series::power_series(&e, n, order).coeffs()[order].clone();
    Ok(BigRational::new(BigInt::from(j), BigInt::from(n)) * c)
}

/// `(j/√(2π))·n^{−3/2}·t^{n−j}·e^{n(1−t)}`.
pub fn borel_tanner_asym(t: f64, j: u64, n: u64) -> Result<Estimate> {
    check_t(t)?;
    let (nf, jf) = (n as f64, j as f64);
    let ln = jf.ln() - 0.5 * LN_2PI - 1.5 * nf.ln() + (nf - jf) * t.ln() + nf * (1.0 - t);
    Ok(Estimate::new("borel-tanner", ln, "borel", vec![("n", nf), ("j", jf), ("t", t)]))
}

/// `(1/n!)·e^{−tn−s}(tn + s)^{n−1}·s`.
pub fn poisson_poisson_pmf(s: f64, t: f64, n: u64) -> Result<f64> {
    check_t(t)?;
    if !(s > 0.0) || n == 0 {
        return Err(Error::ParameterDomain(format!("s={s}, n={n}")));
    }
    let nf = n as f64;
    Ok((-numerics::ln_factorial(n) - t * nf - s + (nf - 1.0) * (t * nf + s).ln() + s.ln()).exp())
}

/// `e^{s/t−s}·s·t^{n−1}·e^{n(1−t)}/(√(2π) n^{3/2})`.
pub fn poisson_poisson_asym(s: f64, t: f64, n: u64) -> Result<Estimate> {
    check_t(t)?;
    if !(s > 0.0) || n == 0 {
        return Err(Error::ParameterDomain(format!("s={s}, n={n}")));
    }
    let nf = n as f64;
    let ln = s / t - s + s.ln() + (nf - 1.0) * t.ln() + nf * (1.0 - t) - 0.5 * LN_2PI - 1.5 * nf.ln();
    Ok(Estimate::new("poisson-poisson", ln, "poisson", vec![("n", nf), ("s", s), ("t", t)]))
}

/// Law of the initial generation.
#[derive(Clone)]
pub enum Initial {
    /// Exactly `j` founders.
    Monomial(u32),
    /// Founders drawn from the family tilted at `s`.
    Family(Family),
}

impl Initial {
    fn radius(&self) -> f64 {
        match self {
            Initial::Monomial(_) => f64::INFINITY,
            Initial::Family(f) => f.radius(),
        }
    }
}

/// Offspring law `ψ_t(z) = ψ(tz)/ψ(t)` with initial law `f_s(z) = f(sz)/f(s)`.
#[derive(Clone)]
pub struct LagrangianSpec {
    pub psi: Family,
    pub init: Initial,
    pub t: f64,
    pub s: f64,
}

impl LagrangianSpec {
    /// Borel–Tanner: Poisson(t) offspring, `j` founders.
    pub fn borel(psi_exp: Family, t: f64, j: u32) -> Self {
        LagrangianSpec { psi: psi_exp, init: Initial::Monomial(j), t, s: 1.0 }
    }

    fn mean_offspring(&self) -> Result<f64> {
        khinchin::mean(&self.psi, self.t)
    }
}

/// `(1/√(2π))·(s/f(s))·(ψ(τ)/ψ(t))ⁿ·(t/τ)^{n−1}·n^{−3/2}·f′(sτ/t)/σ_ψ(τ)`.
pub fn general_lagrangian_asym(spec: &LagrangianSpec, n: u64) -> Result<Estimate> {
    let (t, s) = (spec.t, spec.s);
    if !(t > 0.0) || !(s > 0.0) || n == 0 {
        return Err(Error::ParameterDomain(format!("t={t}, s={s}, n={n}")));
    }
    let (tau, lp_tau, var) =
        apex(&spec.psi)?.saddle().ok_or_else(|| Error::ParameterDomain("linear ψ has no interior apex".into()))?;
    if t > tau * (1.0 + 1e-12) {
        return Err(Error::ParameterDomain(format!("t={t} > apex τ={tau}")));
    }
    let x = s * tau / t;
    if x >= spec.init.radius() {
        return Err(Error::ParameterDomain(format!("sτ/t={x} >= S={}", spec.init.radius())));
    }
    let nf = n as f64;
    let lp_t = spec.psi.ln_f(t)?;
    // ln(s/f(s)) + ln f′(sτ/t)
    let init = match &spec.init {
        Initial::Monomial(j) => {
            let jf = f64::from(*j);
            s.ln() - jf * s.ln() + jf.ln() + (jf - 1.0) * x.ln()
        }
        Initial::Family(f) => {
            let p = khinchin::point(f, x)?;
            s.ln() - f.ln_f(s)? + p.ln_f + p.mean.ln() - x.ln()
        }
    };
    let ln = -0.5 * LN_2PI + init + nf * (lp_tau - lp_t) + (nf - 1.0) * (t.ln() - tau.ln()) - 1.5 * nf.ln() - 0.5 * var.ln();
    Ok(Estimate::new("lagrangian", ln, spec.psi.label(), vec![("n", nf), ("t", t), ("s", s), ("tau", tau)]))
}

/// Exact `P(Z = n) = (1/n)·COEFF_{n−1}(f_s′·ψ_tⁿ)`: rational sums with
/// `ψ(t)^{−n}` and `f(s)^{−1}` applied in log space.
pub fn lagrangian_pmf_exact(spec: &LagrangianSpec, n: u64) -> Result<LogNumber> {
    if n == 0 {
        return Ok(LogNumber::ZERO);
    }
    let n_us = n as usize;
    let t = BigRational::from_float(spec.t).ok_or_else(|| Error::ParameterDomain(format!("t={}", spec.t)))?;
    let s = BigRational::from_float(spec.s).ok_or_else(|| Error::ParameterDomain(format!("s={}", spec.s)))?;
    let psi_t = spec.psi.exact_coeffs(n_us)?.truncate(n_us).dilate(&t);
    let (h, ln_fs) = match &spec.init {
        Initial::Monomial(j) => (CoeffSeries::monomial(*j as usize, n_us), 0.0),
        Initial::Family(f) => {
            let c = f.exact_coeffs(n_us)?.truncate(n_us).dilate(&s);
            (c, f.ln_f(spec.s)? - f.coeff_ln_scale())
        }
    };
    let v = extended_coeff(&h, &psi_t, n_us)?;
    let l = LogNumber::from_ratio(&v);
    let ln_psi_t = spec.psi.ln_f(spec.t)? - spec.psi.coeff_ln_scale();
    Ok(LogNumber::new(l.sign(), l.ln_abs() - n as f64 * ln_psi_t - ln_fs))
}

/// Default per-trial node cap for [`gw_sample`].
pub const GW_NODE_CAP: u64 = 1_000_000;
/// Trials per independent generator stream.
pub const GW_CHUNK: u64 = 1024;

/// Empirical total-progeny histogram; `counts[n]` is the number of trials with
/// `Z = n`, and trials that reached the node cap are counted in `censored`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GwSample {
    pub trials: u64,
    pub counts: Vec<u64>,
    pub censored: u64,
}

impl GwSample {
    pub fn frequency(&self, n: usize) -> f64 {
        self.counts.get(n).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.trials as f64
    }
}

/// Inverse-CDF table for a tilted law `c_k x^k / F(x)`.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(fam: &Family, x: f64) -> Result<Self> {
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for k in 0..=fam.trunc() as u64 {
            acc += khinchin::mass(fam, x, k)?;
            cdf.push(acc);
            if 1.0 - acc < 1e-16 {
                break;
            }
        }
        Ok(Sampler { cdf })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.random::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.partition_point(|&c| c <= u) as u64
    }
}

/// Simulates the Galton–Watson process; chunk `c` of `GW_CHUNK` trials uses
/// stream `c` of a generator seeded by `seed`, so results do not depend on the
/// thread count.
pub fn gw_sample(spec: &LagrangianSpec, trials: u64, seed: u64, node_cap: u64) -> Result<GwSample> {
    if trials == 0 {
        return Err(Error::DomainError("trials must be >= 1".into()));
    }
    let m = spec.mean_offspring()?;
    if m > 1.0 + 1e-12 {
        return Err(Error::SupercriticalSpec(format!("m_ψ(t)={m} > 1")));
    }
    let off = Sampler::new(&spec.psi, spec.t)?;
    let init = match &spec.init {
        Initial::Monomial(j) => Founders::Fixed(u64::from(*j)),
        Initial::Family(f) => Founders::Drawn(Sampler::new(f, spec.s)?),
    };
    let chunks = trials.div_ceil(GW_CHUNK);
    let parts = par::map_range(chunks as usize, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let len = GW_CHUNK.min(trials - c as u64 * GW_CHUNK);
        let mut out: Vec<Option<u64>> = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let founders = match &init {
                Founders::Fixed(j) => *j,
                Founders::Drawn(s) => s.draw(&mut rng),
            };
            out.push(run_tree(founders, &off, &mut rng, node_cap));
        }
        out
    });
    let mut counts = Vec::new();
    let mut censored = 0;
    for z in parts.into_iter().flatten() {
        match z {
            Some(n) => {
                let n = n as usize;
                if counts.len() <= n {
                    counts.resize(n + 1, 0);
                }
                counts[n] += 1;
            }
            None => censored += 1,
        }
    }
    Ok(GwSample { trials, counts, censored })
}

enum Founders {
    Fixed(u64),
    Drawn(Sampler),
}

/// Total progeny, `None` once it exceeds `cap`.
fn run_tree(founders: u64, off: &Sampler, rng: &mut ChaCha8Rng, cap: u64) -> Option<u64> {
    let mut total = founders;
    let mut pending = founders;
    while pending > 0 {
        if total > cap {
            return None;
        }
        pending -= 1;
        let k = off.draw(rng);
        total += k;
        pending += k;
    }
    Some(total)
}

/// `A_n` as `f64` from exact inversion, for radius diagnostics.
pub fn tree_counts(psi: &Family, n_max: usize) -> Result<Vec<f64>> {
    let a = series::lagrange_invert(&psi.exact_coeffs(n_max)?.truncate(n_max), n_max)?;
    Ok(a.coeffs().iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_family;
    use crate::series::{rat, ratio};

    fn fam(s: &str) -> Family {
        make_family(&s.parse().unwrap(), 4096).unwrap()
    }

    #[test]
    fn apex_examples() {
        let Apex::Interior { tau, .. } = apex(&fam("exp")).unwrap() else { panic!() };
        assert!((tau - 1.0).abs() < 1e-9);
        let Apex::Interior { tau, .. } = apex(&fam("geom")).unwrap() else { panic!() };
        assert!((tau - 0.5).abs() < 1e-9);
        assert_eq!(apex(&fam("bernoulli")).unwrap(), Apex::Linear { a: rat(1), b: rat(1) });
        assert_eq!(apex(&fam("polylog:4,1/100")).unwrap_err().name(), "MeanSupBelowOne");
    }

    #[test]
    fn extended_examples() {
        let e = CoeffSeries::exp_z(12);
        assert_eq!(extended_coeff(&CoeffSeries::monomial(2, 8), &e, 4).unwrap(), rat(4));
        assert_eq!(extended_coeff(&CoeffSeries::monomial(1, 8), &CoeffSeries::from_integers(&[1, 1], 8), 5).unwrap(), rat(1));
        let inv = series::lagrange_invert(&e, 12).unwrap();
        for n in 1..=12 {
            assert_eq!(extended_coeff(&CoeffSeries::monomial(1, 12), &e, n).unwrap(), inv.coeffs()[n]);
        }
        // H∘g by composition
        let h = CoeffSeries::from_integers(&[0, 1, 3, 0, 2], 12);
        let comp = series::compose(&h, &inv).unwrap();
        for n in 1..=12 {
            assert_eq!(extended_coeff(&h, &e, n).unwrap(), comp.coeffs()[n]);
        }
    }

    #[test]
    fn omm_examples() {
        let e = fam("exp");
        let mut prev = f64::INFINITY;
        for n in [5u64, 20, 100] {
            let est = omm_estimate(&e, n).unwrap().estimate().unwrap();
            let exact = LogNumber::from_ln((n as f64 - 1.0) * (n as f64).ln() - numerics::ln_factorial(n));
            let r = est.ratio_from(&exact);
            if n == 5 {
                // estimate/exact ≈ 1.017
                assert!((1.0 / r - 1.017).abs() < 0.001, "{r}");
            }
            assert!((r - 1.0).abs() < prev && (r - 1.0).abs() <= 1.0 / (4.0 * n as f64));
            prev = (r - 1.0).abs();
        }
        let g = omm_estimate(&fam("geom"), 50).unwrap().estimate().unwrap();
        let exact = LogNumber::from_bigint(&binom_big(98, 49)).ln_abs() - 50f64.ln();
        let r = g.ratio_from(&LogNumber::from_ln(exact));
        assert!((r - 1.0).abs() < 0.02, "{r}");
        assert_eq!(omm_estimate(&fam("poly:1,0,1"), 4).unwrap_err().name(), "ZeroCoefficient");
        assert!(omm_estimate(&fam("poly:1,0,1"), 5).is_ok());
        let lin = omm_estimate(&fam("poly:2,3"), 4).unwrap().estimate().unwrap();
        assert!((lin.ln() - (2.0 * 27f64).ln()).abs() < 1e-12);
        let OmmResult::Decay(c) = omm_estimate(&fam("polylog:4,1/100"), 64).unwrap() else { panic!() };
        assert!(c.decreasing && c.scaled.len() >= 4);
    }

    #[test]
    fn power_asym_examples() {
        let e = fam("exp");
        let a = power_asym(&e, 1, 30, None).unwrap();
        let b = omm_estimate(&e, 30).unwrap().estimate().unwrap();
        assert!((a.ln() - b.ln()).abs() < 1e-12);
        let n = 20u64;
        let est = power_asym(&e, 2, n, None).unwrap();
        // (2/20)·20¹⁸/18!
        let exact = LogNumber::from_ln((2.0f64 / 20.0).ln() + 18.0 * 20f64.ln() - numerics::ln_factorial(18));
        let r = est.ratio_from(&exact);
        assert!((r - 1.0).abs() < 0.1, "{r}");
        let z = power_asym(&e, 2, n, Some(AlphaScaling { alpha: 0.0, beta: 0.0 })).unwrap();
        assert!((z.ln() - est.ln()).abs() < 1e-9);
    }

    #[test]
    fn func_asym_examples() {
        let e = fam("exp");
        let z = func_asym(&Outer::Poly(CoeffSeries::monomial(1, 1)), &e, 40).unwrap();
        let o = omm_estimate(&e, 40).unwrap().estimate().unwrap();
        assert!((z.ln() - o.ln()).abs() < 1e-12);
        let h2 = Outer::Poly(CoeffSeries::monomial(2, 2));
        let r = func_asym(&h2, &e, 30).unwrap().ratio_from(&func_exact(&h2, &e, 30).unwrap());
        assert!((r - 1.0).abs() < 0.05, "{r}");
        let he = Outer::Family(e.clone());
        let r = func_asym(&he, &e, 20).unwrap().ratio_from(&func_exact(&he, &e, 20).unwrap());
        assert!((r - 1.0).abs() < 0.1, "{r}");
        assert_eq!(func_asym(&Outer::Family(fam("geom")), &e, 10).unwrap_err().name(), "PrefactorRadiusTooSmall");
    }

    #[test]
    fn borel_tanner_examples() {
        let e1 = (-1f64).exp();
        assert!((borel_tanner_pmf(1.0, 1, 1).unwrap() - e1).abs() < 1e-15);
        assert!((borel_tanner_pmf(1.0, 1, 2).unwrap() - e1 * e1).abs() < 1e-15);
        assert!((borel_tanner_pmf(0.5, 2, 2).unwrap() - e1).abs() < 1e-15);
        assert_eq!(borel_tanner_pmf(0.5, 3, 2).unwrap_err().name(), "IndexBelowJ");
        let t = ratio(1, 2);
        for n in 3..20 {
            assert_eq!(borel_tanner_scaled(&t, 3, n).unwrap(), borel_tanner_via_powers(&t, 3, n).unwrap());
        }
        let mut prev = f64::INFINITY;
        for n in [50u64, 100, 200] {
            let r = (borel_tanner_ln_pmf(1.0, 1, n).unwrap() - borel_tanner_asym(1.0, 1, n).unwrap().ln()).exp();
            assert!((r - 1.0).abs() < prev);
            prev = (r - 1.0).abs();
        }
        let r = (borel_tanner_ln_pmf(0.5, 3, 200).unwrap() - borel_tanner_asym(0.5, 3, 200).unwrap().ln()).exp();
        assert!((r - 1.0).abs() < 0.02, "{r}");
        assert!(borel_tanner_asym(0.5, 3, 3).unwrap().ln().is_finite());
        let mass: f64 = (1..=2000).map(|n| borel_tanner_pmf(0.5, 1, n).unwrap()).sum();
        assert!(mass <= 1.0 + 1e-12 && mass > 1.0 - 1e-12);
    }

    #[test]
    fn poisson_examples() {
        let (s, t) = (2.0, 0.8);
        assert!((poisson_poisson_pmf(s, t, 1).unwrap() - (-t - s).exp() * s).abs() < 1e-15);
        // (1 + s/(tn))^{n−1} = e^{s/t}·e^{−(s/t + s²/(2t²))/n + O(n⁻²)}
        let mut prev = f64::INFINITY;
        for n in [200u64, 400, 800] {
            let r = (poisson_poisson_pmf(s, t, n).unwrap().ln() - poisson_poisson_asym(s, t, n).unwrap().ln()).exp();
            let c = (-(s / t + s * s / (2.0 * t * t)) / n as f64).exp();
            assert!((r / c - 1.0).abs() < 0.002, "{r} vs {c}");
            assert!((r - 1.0).abs() < prev);
            prev = (r - 1.0).abs();
        }
        // s → 0: P(Z=n) ≈ s·P_BT(Z=n | j=1)
        let s = 1e-6;
        for n in [1u64, 5, 20] {
            let r = poisson_poisson_pmf(s, t, n).unwrap() / (s * borel_tanner_pmf(t, 1, n).unwrap());
            assert!((r - 1.0).abs() < 1e-4, "{r}");
        }
    }

    #[test]
    fn general_lagrangian_examples() {
        let e = fam("exp");
        let bt = LagrangianSpec::borel(e.clone(), 0.6, 3);
        let a = general_lagrangian_asym(&bt, 80).unwrap();
        let b = borel_tanner_asym(0.6, 3, 80).unwrap();
        assert!((a.ln() - b.ln()).abs() < 1e-9);
        let pp = LagrangianSpec { psi: e.clone(), init: Initial::Family(e.clone()), t: 0.8, s: 2.0 };
        let a = general_lagrangian_asym(&pp, 100).unwrap();
        assert!((a.ln() - poisson_poisson_asym(2.0, 0.8, 100).unwrap().ln()).abs() < 1e-9);
        let ex = lagrangian_pmf_exact(&pp, 30).unwrap();
        assert!((ex.to_f64() / poisson_poisson_pmf(2.0, 0.8, 30).unwrap() - 1.0).abs() < 1e-10);
        let lin = LagrangianSpec { psi: e.clone(), init: Initial::Family(fam("bernoulli")), t: 0.9, s: 1.0 };
        let r = general_lagrangian_asym(&lin, 100).unwrap().ratio_from(&lagrangian_pmf_exact(&lin, 100).unwrap());
        assert!((r - 1.0).abs() < 0.05, "{r}");
        let bad = LagrangianSpec { psi: e.clone(), init: Initial::Family(fam("geom")), t: 0.5, s: 0.6 };
        assert_eq!(general_lagrangian_asym(&bad, 10).unwrap_err().name(), "ParameterDomain");
    }

    #[test]
    fn scaling_identity() {
        // g_t(z) = (1/t)·g((t/ψ(t))z) for ψ = e^z: with e^{−tn} factored out,
        // COEFF_n of the tilted solution equals t^{n−1}·n^{n−1}/n!.
        let t = ratio(7, 10);
        let tilted = series::lagrange_invert(&CoeffSeries::exp_z(32).dilate(&t), 32).unwrap();
        let g = series::lagrange_invert(&CoeffSeries::exp_z(32), 32).unwrap();
        for n in 1..=32usize {
            assert_eq!(tilted.coeffs()[n], &g.coeffs()[n] * num_traits::pow(t.clone(), n - 1));
        }
    }

    #[test]
    fn radius_of_solution() {
        // A_{n+1}/A_n → ψ(τ)/τ
        for (s, want) in [("exp", std::f64::consts::E), ("geom", 4.0)] {
            let a = tree_counts(&fam(s), 64).unwrap();
            for n in 32..64 {
                assert!((a[n + 1] / a[n] / want - 1.0).abs() < 0.05);
            }
        }
    }

    #[test]
    fn sampler_examples() {
        let spec = LagrangianSpec::borel(fam("exp"), 0.5, 1);
        let a = gw_sample(&spec, 20_000, 7, GW_NODE_CAP).unwrap();
        let b = gw_sample(&spec, 20_000, 7, GW_NODE_CAP).unwrap();
        assert_eq!(a, b);
        let p1 = (-0.5f64).exp();
        assert!((a.frequency(1) - p1).abs() < 4.0 * (p1 * (1.0 - p1) / 20_000.0).sqrt());
        assert_eq!(a.censored, 0);
        let crit = gw_sample(&LagrangianSpec::borel(fam("exp"), 1.0, 1), 2000, 1, 10_000).unwrap();
        assert!(crit.censored > 0);
        let sup = LagrangianSpec::borel(fam("exp"), 1.0, 1);
        let sup = LagrangianSpec { t: 1.5, ..sup };
        assert_eq!(gw_sample(&sup, 10, 1, GW_NODE_CAP).unwrap_err().name(), "SupercriticalSpec");
    }
}
