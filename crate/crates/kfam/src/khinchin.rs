//! Khinchin families: the laws `P(X_t = n) = a_n tⁿ / f(t)` attached to a
//! power series with non-negative coefficients.
//!
//! A [`Family`] wraps an [`Evaluator`] (closed-form `ln f`, fulcrum
//! derivatives, complex evaluation) with optional exact coefficient access and
//! the metadata `R`, `M_f`, `Q_f` and the USG flag.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use num_integer::Integer;

use crate::catalog::FamilySpec;
use crate::error::{Error, Result};
use crate::numerics::{self, LogNumber};
use crate::par;
use crate::series::{self, CoeffSeries, DEFAULT_TRUNCATION};

/// Closed-form evaluation of a generating function on `[0, R)`.
///
/// Vectors indexed by order carry a placeholder at index 0.
pub trait Evaluator: Send + Sync {
    /// `ln f(t)`.
    fn ln_f(&self, t: f64) -> f64;

    /// `[_, F′(s), …, F^{(order)}(s)]` at `s = ln t`: the cumulants of `X_t`.
    /// `None` when that order has no closed form.
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>>;

    /// `[_, t f′/f, …, t^j f^{(j)}/f]` when available in closed form.
    fn factorial_moments(&self, _t: f64, _order: usize) -> Option<Vec<f64>> {
        None
    }

    /// `ln f(z)` on any branch (only differences are exponentiated).
    fn ln_f_complex(&self, _z: Complex64) -> Option<Complex64> {
        None
    }

    /// `ln a_n` from a closed-form coefficient rule.
    fn ln_coeff(&self, _n: u64) -> Option<f64> {
        None
    }
}

type CoeffBuilder = dyn Fn(usize) -> Result<CoeffSeries> + Send + Sync;

/// Lazily grown exact coefficients.
struct CoeffCache {
    build: Box<CoeffBuilder>,
    exact: Mutex<Option<Arc<CoeffSeries>>>,
    logs: Mutex<Option<Arc<Vec<f64>>>>,
}

impl CoeffCache {
    fn exact(&self, order: usize, limit: usize) -> Result<Arc<CoeffSeries>> {
        if order > limit {
            return Err(Error::IndexBeyondTruncation(format!("n={order} > trunc={limit}")));
        }
        let mut guard = self.exact.lock().expect("coefficient cache poisoned");
        if let Some(s) = guard.as_ref() {
            if s.order() >= order {
                return Ok(s.clone());
            }
        }
        let current = guard.as_ref().map_or(0, |s| s.order());
        let target = order.max(64).max(2 * current).min(limit);
        let s = Arc::new((self.build)(target)?);
        *guard = Some(s.clone());
        Ok(s)
    }

    fn logs(&self, order: usize, limit: usize) -> Result<Arc<Vec<f64>>> {
        {
            let guard = self.logs.lock().expect("coefficient cache poisoned");
            if let Some(l) = guard.as_ref() {
                if l.len() > order {
                    return Ok(l.clone());
                }
            }
        }
        let s = self.exact(order, limit)?;
        let l = Arc::new(s.ln_coeffs().ok_or_else(|| Error::NegativeCoefficient("family coefficients".into()))?);
        *self.logs.lock().expect("coefficient cache poisoned") = Some(l.clone());
        Ok(l)
    }
}

/// An evaluable generating function with its Khinchin-family metadata.
#[derive(Clone)]
pub struct Family {
    label: String,
    eval: Arc<dyn Evaluator>,
    coeffs: Option<Arc<CoeffCache>>,
    radius: f64,
    mean_sup: f64,
    q_gcd: u64,
    usg: bool,
    boundary: bool,
    coeff_ln_scale: f64,
    trunc: usize,
    spec: Option<FamilySpec>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family")
            .field("label", &self.label)
            .field("radius", &self.radius)
            .field("mean_sup", &self.mean_sup)
            .field("q_gcd", &self.q_gcd)
            .field("usg", &self.usg)
            .finish()
    }
}

impl Family {
    /// A family from an evaluator; `radius`/`mean_sup` may be `f64::INFINITY`.
    pub fn new(label: impl Into<String>, eval: Arc<dyn Evaluator>, radius: f64, mean_sup: f64, q_gcd: u64) -> Self {
        Family {
            label: label.into(),
            eval,
            coeffs: None,
            radius,
            mean_sup,
            q_gcd: q_gcd.max(1),
            usg: false,
            boundary: false,
            coeff_ln_scale: 0.0,
            trunc: DEFAULT_TRUNCATION,
            spec: None,
        }
    }

    /// Attaches an exact coefficient oracle `order ↦ a_0..=a_order`.
    pub fn with_coeffs<F>(mut self, build: F) -> Self
    where
        F: Fn(usize) -> Result<CoeffSeries> + Send + Sync + 'static,
    {
        self.coeffs = Some(Arc::new(CoeffCache { build: Box::new(build), exact: Mutex::new(None), logs: Mutex::new(None) }));
        self
    }

    pub fn with_usg(mut self, usg: bool) -> Self {
        self.usg = usg;
        self
    }

    /// Allows evaluation at `t = R` (finite boundary mean).
    pub fn with_boundary(mut self, ok: bool) -> Self {
        self.boundary = ok;
        self
    }

    /// The true coefficients are `e^{scale}` times the oracle's.
    pub fn with_coeff_ln_scale(mut self, scale: f64) -> Self {
        self.coeff_ln_scale = scale;
        self
    }

    pub fn with_trunc(mut self, trunc: usize) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn with_spec(mut self, spec: FamilySpec) -> Self {
        self.spec = Some(spec);
        self
    }

    /// Finite polynomial family from non-negative exact coefficients.
    pub fn polynomial(label: impl Into<String>, poly: &CoeffSeries) -> Result<Self> {
        let eval = PolyEval::new(poly)?;
        let nz = poly.nonzero_indices();
        let deg = *nz.last().ok_or_else(|| Error::InvalidSpec("zero polynomial".into()))?;
        let q = poly.q_gcd();
        let p = poly.clone();
        Ok(Family::new(label, Arc::new(eval), f64::INFINITY, deg as f64, q).with_coeffs(move |order| {
            Ok(CoeffSeries::from_fn(order, |n| p.coeffs().get(n).cloned().unwrap_or_else(num_traits::Zero::zero)))
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn mean_sup(&self) -> f64 {
        self.mean_sup
    }

    pub fn q_gcd(&self) -> u64 {
        self.q_gcd
    }

    pub fn usg(&self) -> bool {
        self.usg
    }

    pub fn boundary_allowed(&self) -> bool {
        self.boundary
    }

    pub fn is_entire(&self) -> bool {
        self.radius.is_infinite()
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn spec(&self) -> Option<&FamilySpec> {
        self.spec.as_ref()
    }

    pub fn evaluator(&self) -> &Arc<dyn Evaluator> {
        &self.eval
    }

    pub fn has_coeffs(&self) -> bool {
        self.coeffs.is_some()
    }

    pub fn coeff_ln_scale(&self) -> f64 {
        self.coeff_ln_scale
    }

    /// `Err(RadiusOutOfRange)` unless `0 ≤ t < R` (or `t = R` when allowed).
    pub fn check_radius(&self, t: f64) -> Result<()> {
        let ok = t >= 0.0 && t.is_finite() && (t < self.radius || (self.boundary && t == self.radius));
        if ok {
            Ok(())
        } else {
            Err(Error::RadiusOutOfRange(format!("t={t}, R={}", self.radius)))
        }
    }

    /// `ln f(t)`.
    pub fn ln_f(&self, t: f64) -> Result<f64> {
        self.check_radius(t)?;
        Ok(self.eval.ln_f(t))
    }

    /// Exact coefficients up to at least `order`.
    pub fn exact_coeffs(&self, order: usize) -> Result<Arc<CoeffSeries>> {
        let c = self.coeffs.as_ref().ok_or_else(|| Error::NoCoefficientAccess(self.label.clone()))?;
        c.exact(order, self.trunc)
    }

    /// `ln a_n` (without the symbolic scale), `-inf` for zero coefficients.
    pub fn ln_coeff(&self, n: u64) -> Result<f64> {
        if let Some(v) = self.eval.ln_coeff(n) {
            return Ok(v - self.coeff_ln_scale);
        }
        let c = self.coeffs.as_ref().ok_or_else(|| Error::NoCoefficientAccess(self.label.clone()))?;
        let logs = c.logs(n as usize, self.trunc)?;
        Ok(logs[n as usize])
    }

    /// `ln a_n` including the symbolic scale.
    pub fn ln_coeff_true(&self, n: u64) -> Result<f64> {
        Ok(self.ln_coeff(n)? + self.coeff_ln_scale)
    }

    /// `f·g` on the common disc (the sum of independent variables).
    pub fn product(a: &Family, b: &Family) -> Family {
        let eval = ProductEval { a: a.eval.clone(), b: b.eval.clone() };
        let mut fam = Family::new(
            format!("({})*({})", a.label, b.label),
            Arc::new(eval),
            a.radius.min(b.radius),
            f64::INFINITY,
            a.q_gcd.gcd(&b.q_gcd),
        );
        fam.mean_sup = if a.radius == b.radius {
            a.mean_sup + b.mean_sup
        } else if a.radius < b.radius {
            a.mean_sup + b.eval.cumulants(a.radius, 1).map_or(f64::INFINITY, |k| k[1])
        } else {
            b.mean_sup + a.eval.cumulants(b.radius, 1).map_or(f64::INFINITY, |k| k[1])
        };
        fam.coeff_ln_scale = a.coeff_ln_scale + b.coeff_ln_scale;
        fam.trunc = a.trunc.min(b.trunc);
        if let (Some(ca), Some(cb)) = (a.coeffs.clone(), b.coeffs.clone()) {
            let limit = fam.trunc;
            fam = fam
                .with_coeffs(move |order| Ok(series::mul(&*ca.exact(order, limit)?, &*cb.exact(order, limit)?).truncate(order)));
        }
        fam
    }

    /// `h(z) = f(z^N)`.
    pub fn subordinate(f: &Family, n: u32) -> Family {
        let eval = SubordinateEval { inner: f.eval.clone(), n };
        let radius = f.radius.powf(1.0 / f64::from(n));
        let mut fam = Family::new(
            format!("({})(z^{n})", f.label),
            Arc::new(eval),
            radius,
            f.mean_sup * f64::from(n),
            f.q_gcd * u64::from(n),
        );
        fam.boundary = f.boundary;
        fam.coeff_ln_scale = f.coeff_ln_scale;
        fam.trunc = f.trunc;
        if let Some(c) = f.coeffs.clone() {
            let limit = f.trunc;
            let nn = n as usize;
            fam = fam.with_coeffs(move |order| {
                let inner = c.exact(order / nn, limit)?;
                Ok(CoeffSeries::from_fn(order, |i| {
                    if i % nn == 0 {
                        inner.coeffs()[i / nn].clone()
                    } else {
                        num_traits::Zero::zero()
                    }
                }))
            });
        }
        fam
    }
}

/// `(t, f(t), m_f(t), σ_f²(t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KhinchinPoint {
    pub t: f64,
    pub ln_f: f64,
    pub mean: f64,
    pub var: f64,
}

/// Mean and variance at `t`.
pub fn point(fam: &Family, t: f64) -> Result<KhinchinPoint> {
    fam.check_radius(t)?;
    if t == 0.0 {
        return Ok(KhinchinPoint { t, ln_f: fam.eval.ln_f(0.0), mean: 0.0, var: 0.0 });
    }
    let k = cumulants(fam, t, 2)?;
    Ok(KhinchinPoint { t, ln_f: fam.eval.ln_f(t), mean: k[1], var: k[2] })
}

/// `m_f(t) = t f′(t)/f(t)`.
pub fn mean(fam: &Family, t: f64) -> Result<f64> {
    Ok(point(fam, t)?.mean)
}

/// `σ_f²(t) = t m_f′(t)`.
pub fn variance(fam: &Family, t: f64) -> Result<f64> {
    Ok(point(fam, t)?.var)
}

/// Cumulants `κ_1..κ_order` of `X_t` (index 0 unused).
///
/// Closed forms first; otherwise orders 3 and 4 come from Richardson
/// differences of `F″`, and any order from coefficient sums.
pub fn cumulants(fam: &Family, t: f64, order: usize) -> Result<Vec<f64>> {
    fam.check_radius(t)?;
    if t == 0.0 {
        return Ok(vec![0.0; order + 1]);
    }
    if let Some(k) = fam.eval.cumulants(t, order) {
        return Ok(k);
    }
    if order <= 4 {
        if let Some(base) = fam.eval.cumulants(t, 2) {
            let s = t.ln();
            let h = 1e-4 * s.abs().max(1.0);
            let f2 = |s: f64| fam.eval.cumulants(s.exp(), 2).map_or(f64::NAN, |k| k[2]);
            fam.check_radius((s + h).exp())?;
            let mut k = base;
            k.resize(order + 1, 0.0);
            if order >= 3 {
                k[3] = numerics::richardson_diff(f2, s, h);
            }
            if order >= 4 {
                let d2 = |h: f64| (f2(s + h) - 2.0 * f2(s) + f2(s - h)) / (h * h);
                k[4] = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
            }
            if k.iter().all(|v| v.is_finite()) {
                return Ok(k);
            }
        }
    }
    if fam.has_coeffs() {
        let w = mass_window(fam, t, None, None)?;
        let m: f64 = w.masses.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        let mut central = vec![0.0; order + 1];
        for (n, p) in w.masses.iter().enumerate() {
            let d = n as f64 - m;
            let mut pw = 1.0;
            for c in central.iter_mut().skip(1) {
                pw *= d;
                *c += pw * p;
            }
        }
        let mut k = numerics::cumulants_from_moments(&central);
        k[1] = m;
        return Ok(k);
    }
    Err(Error::DerivativeOrderUnavailable(format!("order={order} for {}", fam.label)))
}

/// Fulcrum derivatives `F′(s), …, F^{(max_order)}(s)` with `F(s) = ln f(e^s)`.
pub fn fulcrum_derivs(fam: &Family, s: f64, max_order: usize) -> Result<Vec<f64>> {
    let k = cumulants(fam, s.exp(), max_order)?;
    Ok(k[1..].to_vec())
}

/// Raw moments `E X_t^q`, `q ≤ order` (index 0 is 1).
fn raw_moments(fam: &Family, t: f64, order: usize) -> Result<Vec<f64>> {
    let k = cumulants(fam, t, order)?;
    Ok(numerics::moments_from_cumulants(&k))
}

/// `t^j f^{(j)}(t)/f(t) = E[X_t (X_t − 1)⋯(X_t − j + 1)]`.
pub fn factorial_moment(fam: &Family, t: f64, j: usize) -> Result<f64> {
    fam.check_radius(t)?;
    if j == 0 {
        return Ok(1.0);
    }
    if let Some(fm) = fam.eval.factorial_moments(t, j) {
        return Ok(fm[j]);
    }
    let mu = raw_moments(fam, t, j)?;
    let s1 = numerics::stirling1_table(j);
    Ok((1..=j).map(|i| s1[j][i] * mu[i]).sum())
}

/// `E X_t^k = Σ_j S(k, j) t^j f^{(j)}(t)/f(t)`.
pub fn moment(fam: &Family, t: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let s2 = numerics::stirling2_table(k);
    let mut acc = 0.0;
    for j in 1..=k {
        acc += s2[k][j] * factorial_moment(fam, t, j)?;
    }
    Ok(acc)
}

/// `E (X_t − m)^k`, from the cumulants with `κ_1` set to zero.
pub fn central_moment(fam: &Family, t: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let mut kappa = cumulants(fam, t, k)?;
    kappa[1] = 0.0;
    Ok(numerics::moments_from_cumulants(&kappa)[k])
}

/// `E e^{iθX_t} = f(te^{iθ})/f(t)`.
pub fn charfn(fam: &Family, t: f64, theta: f64) -> Result<Complex64> {
    fam.check_radius(t)?;
    if t == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = Complex64::from_polar(t, theta);
    let lz = fam.eval.ln_f_complex(z).ok_or_else(|| Error::ComplexEvalUnavailable(fam.label.clone()))?;
    Ok((lz - fam.eval.ln_f(t)).exp())
}

/// `E e^{iθ(X_t − m)/σ}`.
pub fn normalized_charfn(fam: &Family, t: f64, theta: f64) -> Result<Complex64> {
    let p = point(fam, t)?;
    let sigma = p.var.sqrt();
    let c = charfn(fam, t, theta / sigma)?;
    Ok(c * Complex64::from_polar(1.0, -theta * p.mean / sigma))
}

/// `E e^{λX_t} = f(te^λ)/f(t)`.
pub fn mgf(fam: &Family, t: f64, lambda: f64) -> Result<f64> {
    fam.check_radius(t)?;
    let u = t * lambda.exp();
    fam.check_radius(u).map_err(|_| Error::RadiusOutOfRange(format!("t·e^λ={u}, R={}", fam.radius)))?;
    Ok((fam.eval.ln_f(u) - fam.eval.ln_f(t)).exp())
}

/// Two-sided Chernoff bound for `|X_t − m_f(t)| ≥ y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffBound {
    /// `Σ(s, Λ) = 2 max_{|u|≤Λ} (F′(s+u) − F′(s))/u` on the grid.
    pub sigma_sum: f64,
    pub bound: f64,
}

pub const CHERNOFF_GRID: usize = 1024;

/// `min(1, 2e^{−y²/(2Σ)})` when `y ≤ ΛΣ`, else `min(1, 2e^{−Λy/2})`.
pub fn chernoff_bound(fam: &Family, t: f64, y: f64, big_lambda: f64) -> Result<ChernoffBound> {
    if !(big_lambda > 0.0) || !(y >= 0.0) || !(t > 0.0) {
        return Err(Error::DomainError(format!("t={t}, y={y}, Λ={big_lambda}")));
    }
    fam.check_radius(t * big_lambda.exp())?;
    let s = t.ln();
    let m0 = mean(fam, t)?;
    let ratios = par::map_range(CHERNOFF_GRID, |i| {
        let u = big_lambda * (2.0 * i as f64 - (CHERNOFF_GRID - 1) as f64) / (CHERNOFF_GRID - 1) as f64;
        mean(fam, (s + u).exp()).map(|m| (m - m0) / u)
    });
    let mut max = 0.0f64;
    for r in ratios {
        max = max.max(r?);
    }
    let sigma_sum = 2.0 * max;
    let raw =
        if y <= big_lambda * sigma_sum { 2.0 * (-y * y / (2.0 * sigma_sum)).exp() } else { 2.0 * (-big_lambda * y / 2.0).exp() };
    Ok(ChernoffBound { sigma_sum, bound: raw.min(1.0) })
}

/// `σ_f(t)/m_f(t)`.
pub fn clan_ratio(fam: &Family, t: f64) -> Result<f64> {
    let p = point(fam, t)?;
    if p.mean == 0.0 {
        return Err(Error::ZeroMean(format!("t={t}")));
    }
    Ok(p.var.sqrt() / p.mean)
}

/// Gap statistics over the coefficient window `0..=window`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapStats {
    pub window: usize,
    /// Largest gap between consecutive nonzero indices in the window.
    pub gap: Option<usize>,
    /// Largest gap among nonzero indices in the upper half of the window;
    /// a lower estimate of the limsup of gaps.
    pub gap_tail_lower: Option<usize>,
    pub q_gcd: u64,
    pub nonzero: usize,
    /// Fewer than 8 nonzero coefficients: `q_gcd` is provisional.
    pub provisional: bool,
}

pub fn gap_stats(fam: &Family, window: usize) -> Result<GapStats> {
    let c = fam.exact_coeffs(window)?;
    let idx: Vec<usize> = c.truncate(window).nonzero_indices();
    let gap = idx.windows(2).map(|w| w[1] - w[0]).max();
    let half = window / 2;
    let gap_tail_lower = idx.windows(2).filter(|w| w[0] >= half).map(|w| w[1] - w[0]).max();
    let q = idx.iter().filter(|&&n| n > 0).fold(0u64, |g, &n| g.gcd(&(n as u64)));
    Ok(GapStats { window, gap, gap_tail_lower, q_gcd: q.max(1), nonzero: idx.len(), provisional: idx.len() < 8 })
}

/// Zero-free sector `|θ| < π/(2σ)` around the positive axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroFree {
    pub halfwidth: f64,
    /// Grid check of `f(te^{iθ}) ≠ 0`; `None` without complex evaluation.
    pub verified: Option<bool>,
}

pub const ZERO_FREE_GRID: usize = 256;

pub fn zero_free_halfwidth(fam: &Family, t: f64) -> Result<ZeroFree> {
    let p = point(fam, t)?;
    let halfwidth = PI / (2.0 * p.var.sqrt());
    let verified = if fam.eval.ln_f_complex(Complex64::new(t, 0.0)).is_some() {
        let theta_max = halfwidth.min(PI);
        let ok = (0..ZERO_FREE_GRID).all(|i| {
            let theta = -theta_max + 2.0 * theta_max * (i as f64 + 0.5) / ZERO_FREE_GRID as f64;
            match fam.eval.ln_f_complex(Complex64::from_polar(t, theta)) {
                Some(l) => l.re.is_finite(),
                None => false,
            }
        });
        Some(ok)
    } else {
        None
    };
    Ok(ZeroFree { halfwidth, verified })
}

/// Masses `0..=N` together with a rigorous bound on the mass beyond `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassWindow {
    pub masses: Vec<f64>,
    pub tail_bound: f64,
    /// Comparison radius used for the tail bound.
    pub t_star: f64,
}

/// `P(X_t = n)`.
pub fn mass(fam: &Family, t: f64, n: u64) -> Result<f64> {
    fam.check_radius(t)?;
    if t == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let la = fam.ln_coeff(n)?;
    if la == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((la + fam.coeff_ln_scale + n as f64 * t.ln() - fam.eval.ln_f(t)).exp())
}

/// Tail bound `Σ_{n>N} a_n tⁿ / f(t) ≤ (f(t*)/f(t))·(t/t*)^{N+1}/(1 − t/t*)`,
/// minimized over candidate comparison radii (or at the given `t_star`).
pub fn tail_bound(fam: &Family, t: f64, n_max: usize, t_star: Option<f64>) -> Result<(f64, f64)> {
    fam.check_radius(t)?;
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let lf = fam.eval.ln_f(t);
    let bound_at = |ts: f64| -> f64 {
        let r = t / ts;
        let v = fam.eval.ln_f(ts) - lf + (n_max as f64 + 1.0) * r.ln() - (-r).ln_1p();
        v.exp()
    };
    if let Some(ts) = t_star {
        if !(ts > t) {
            return Err(Error::DomainError(format!("t*={ts} <= t={t}")));
        }
        fam.check_radius(ts)?;
        return Ok((bound_at(ts), ts));
    }
    let candidates: Vec<f64> = if fam.radius.is_infinite() {
        let m = mean(fam, t)?.max(1.0);
        let scale = (n_max as f64 / m).max(1.5);
        [1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, scale, scale.sqrt()].iter().map(|c| t * c).collect()
    } else {
        let r = fam.radius;
        let mut v: Vec<f64> = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.97, 0.99].iter().map(|c| t + (r - t) * c).collect();
        if fam.boundary {
            v.push(r);
        }
        v
    };
    let mut best = (f64::INFINITY, f64::NAN);
    for ts in candidates {
        if ts > t && fam.check_radius(ts).is_ok() {
            let b = bound_at(ts);
            if b < best.0 {
                best = (b, ts);
            }
        }
    }
    if best.1.is_nan() {
        return Err(Error::RadiusOutOfRange(format!("no comparison radius above t={t}")));
    }
    Ok(best)
}

/// Window `m + 12σ + 16`, doubled until the tail bound is below `1e−15`
/// or the truncation is reached.
fn default_window(fam: &Family, t: f64, p: &KhinchinPoint) -> Result<usize> {
    let mut n = ((p.mean + 12.0 * p.var.sqrt() + 16.0).ceil() as usize).min(fam.trunc);
    if t == 0.0 {
        return Ok(n);
    }
    while n < fam.trunc && tail_bound(fam, t, n, None)?.0 > 1e-15 {
        n = (2 * n).min(fam.trunc);
    }
    Ok(n)
}

/// Masses up to `n_max` (default: see [`default_window`])
/// and the tail bound beyond it.
pub fn mass_window(fam: &Family, t: f64, n_max: Option<usize>, t_star: Option<f64>) -> Result<MassWindow> {
    let p = point(fam, t)?;
    let n_max = match n_max {
        Some(n) => n,
        None => default_window(fam, t, &p)?,
    };
    let lt = t.ln();
    let masses = if t == 0.0 {
        (0..=n_max).map(|n| if n == 0 { 1.0 } else { 0.0 }).collect()
    } else {
        let lf = p.ln_f;
        // warm the cache once, then read in parallel
        fam.ln_coeff(n_max as u64)?;
        let v =
            par::map_range(n_max + 1, |n| fam.ln_coeff(n as u64).map(|la| (la + fam.coeff_ln_scale + n as f64 * lt - lf).exp()));
        v.into_iter().collect::<Result<Vec<f64>>>()?
    };
    let (tail, ts) = tail_bound(fam, t, n_max, t_star)?;
    Ok(MassWindow { masses, tail_bound: tail, t_star: ts })
}

/// Largest term `μ(t) = max_n a_n tⁿ` and the bound `f(t) ≤ H⁻¹ μ (1 + σ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxTerm {
    pub index: u64,
    pub value: LogNumber,
    pub bound_holds: bool,
}

/// `H = 1/(4√2)`.
pub const MAX_TERM_H: f64 = 0.176_776_695_296_636_9;

pub fn max_term(fam: &Family, t: f64) -> Result<MaxTerm> {
    let p = point(fam, t)?;
    if !fam.has_coeffs() && fam.eval.ln_coeff(0).is_none() {
        return Err(Error::NoCoefficientAccess(fam.label.clone()));
    }
    let n_max = ((p.mean + 12.0 * p.var.sqrt() + 16.0).ceil() as usize).min(fam.trunc);
    fam.ln_coeff(n_max as u64)?;
    let lt = if t > 0.0 { t.ln() } else { f64::NEG_INFINITY };
    let mut best = (0u64, f64::NEG_INFINITY);
    for n in 0..=n_max as u64 {
        let la = fam.ln_coeff(n)?;
        if la == f64::NEG_INFINITY {
            continue;
        }
        let v = la + fam.coeff_ln_scale + if n == 0 { 0.0 } else { n as f64 * lt };
        if v > best.1 {
            best = (n, v);
        }
    }
    let bound = -MAX_TERM_H.ln() + best.1 + (1.0 + p.var.sqrt()).ln();
    Ok(MaxTerm { index: best.0, value: LogNumber::from_ln(best.1), bound_holds: p.ln_f <= bound + 1e-12 })
}

/// Order estimate `max_t ln m_f(t)/ln t` over a grid of radii `t > 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderEstimate {
    pub per_point: Vec<(f64, f64)>,
    pub estimate: f64,
}

pub fn estimate_order(fam: &Family, grid: &[f64]) -> Result<OrderEstimate> {
    if !fam.is_entire() {
        return Err(Error::NotEntire(format!("R={}", fam.radius)));
    }
    if grid.iter().any(|&t| !(t > 1.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DomainError("grid must be increasing with t > 1".into()));
    }
    let mut per_point = Vec::with_capacity(grid.len());
    for &t in grid {
        per_point.push((t, mean(fam, t)?.ln() / t.ln()));
    }
    let estimate = per_point.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(OrderEstimate { per_point, estimate })
}

/// Finite polynomial with non-negative coefficients.
pub struct PolyEval {
    ln_a: Vec<f64>,
}

impl PolyEval {
    pub fn new(poly: &CoeffSeries) -> Result<Self> {
        let ln_a = poly.ln_coeffs().ok_or_else(|| Error::NegativeCoefficient(format!("{poly}")))?;
        Ok(PolyEval { ln_a })
    }

    fn log_terms(&self, t: f64) -> Vec<(usize, f64)> {
        let lt = t.ln();
        self.ln_a
            .iter()
            .enumerate()
            .filter(|(_, la)| la.is_finite())
            .map(|(n, la)| (n, if n == 0 { *la } else { la + n as f64 * lt }))
            .collect()
    }

    fn weights(&self, t: f64) -> Vec<(usize, f64)> {
        let terms = self.log_terms(t);
        let lf = log_sum_exp(terms.iter().map(|x| x.1));
        terms.into_iter().map(|(n, v)| (n, (v - lf).exp())).collect()
    }
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(it: I) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}

impl Evaluator for PolyEval {
    fn ln_f(&self, t: f64) -> f64 {
        log_sum_exp(self.log_terms(t).into_iter().map(|x| x.1))
    }

    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let w = self.weights(t);
        let m: f64 = w.iter().map(|(n, p)| *n as f64 * p).sum();
        let mut central = vec![0.0; order + 1];
        central[0] = 1.0;
        for (n, p) in &w {
            let d = *n as f64 - m;
            let mut pw = 1.0;
            for c in central.iter_mut().skip(1) {
                pw *= d;
                *c += pw * p;
            }
        }
        let mut k = numerics::cumulants_from_moments(&central);
        if order >= 1 {
            k[1] = m;
        }
        Some(k)
    }

    fn factorial_moments(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let w = self.weights(t);
        let mut fm = vec![0.0; order + 1];
        fm[0] = 1.0;
        for (n, p) in &w {
            let mut falling = 1.0;
            for (j, slot) in fm.iter_mut().enumerate().skip(1) {
                falling *= *n as f64 - (j - 1) as f64;
                *slot += falling * p;
            }
        }
        Some(fm)
    }

    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        let lz = z.ln();
        let terms: Vec<Complex64> = self
            .ln_a
            .iter()
            .enumerate()
            .filter(|(_, la)| la.is_finite())
            .map(|(n, la)| if n == 0 { Complex64::new(*la, 0.0) } else { lz * n as f64 + la })
            .collect();
        let m = terms.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let s: Complex64 = terms.iter().map(|c| (c - m).exp()).sum();
        Some(s.ln() + m)
    }

    fn ln_coeff(&self, n: u64) -> Option<f64> {
        Some(self.ln_a.get(n as usize).copied().unwrap_or(f64::NEG_INFINITY))
    }
}

struct ProductEval {
    a: Arc<dyn Evaluator>,
    b: Arc<dyn Evaluator>,
}

impl Evaluator for ProductEval {
    fn ln_f(&self, t: f64) -> f64 {
        self.a.ln_f(t) + self.b.ln_f(t)
    }

    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let ka = self.a.cumulants(t, order)?;
        let kb = self.b.cumulants(t, order)?;
        Some(ka.iter().zip(&kb).map(|(x, y)| x + y).collect())
    }

    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(self.a.ln_f_complex(z)? + self.b.ln_f_complex(z)?)
    }
}

struct SubordinateEval {
    inner: Arc<dyn Evaluator>,
    n: u32,
}

impl Evaluator for SubordinateEval {
    fn ln_f(&self, t: f64) -> f64 {
        self.inner.ln_f(t.powi(self.n as i32))
    }

    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let k = self.inner.cumulants(t.powi(self.n as i32), order)?;
        let n = f64::from(self.n);
        Some(k.iter().enumerate().map(|(q, v)| v * n.powi(q as i32)).collect())
    }

    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        self.inner.ln_f_complex(z.powu(self.n))
    }

    fn ln_coeff(&self, n: u64) -> Option<f64> {
        let q = u64::from(self.n);
        if n.is_multiple_of(q) {
            self.inner.ln_coeff(n / q)
        } else {
            // only meaningful when the inner family has a closed rule
            self.inner.ln_coeff(0).map(|_| f64::NEG_INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    fn poly(v: &[i64]) -> Family {
        Family::polynomial("poly", &CoeffSeries::from_integers(v, v.len() - 1)).unwrap()
    }

    #[test]
    fn polynomial_basics() {
        let f = poly(&[1, 1]);
        assert!((mass(&f, 1.0, 1).unwrap() - 0.5).abs() < 1e-15);
        let p = point(&f, 1.0).unwrap();
        assert!((p.mean - 0.5).abs() < 1e-15 && (p.var - 0.25).abs() < 1e-15);
        let zf = zero_free_halfwidth(&f, 1.0).unwrap();
        assert!((zf.halfwidth - PI).abs() < 1e-12);
        let c = charfn(&f, 2.0, 0.7).unwrap();
        let direct = (Complex64::new(1.0, 0.0) + Complex64::from_polar(2.0, 0.7)) / 3.0;
        assert!((c - direct).norm() < 1e-14);
    }

    #[test]
    fn max_term_polynomial() {
        let m = max_term(&poly(&[1, 1]), 2.0).unwrap();
        assert_eq!(m.index, 1);
        assert!((m.value.to_f64() - 2.0).abs() < 1e-14 && m.bound_holds);
    }

    #[test]
    fn gap_stats_lacunary() {
        let idx = [0usize, 1, 2, 4, 8, 16, 32, 64];
        let s = CoeffSeries::from_fn(64, |n| if idx.contains(&n) { rat(1) } else { rat(0) });
        let g = gap_stats(&Family::polynomial("lac", &s).unwrap(), 64).unwrap();
        assert_eq!(g.gap, Some(32));
        assert_eq!(g.q_gcd, 1);
        assert!(!g.provisional);
        let few = gap_stats(&Family::polynomial("lac", &s.truncate(16)).unwrap(), 16).unwrap();
        assert!(few.provisional && few.gap == Some(8));
    }

    #[test]
    fn degenerate_t_zero() {
        let f = poly(&[2, 3, 1]);
        assert_eq!(mass(&f, 0.0, 0).unwrap(), 1.0);
        assert_eq!(mass(&f, 0.0, 2).unwrap(), 0.0);
        assert_eq!(mean(&f, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn product_and_subordinate_laws() {
        let a = poly(&[1, 2, 1]);
        let b = poly(&[3, 0, 1, 1]);
        let ab = Family::product(&a, &b);
        let t = 0.8;
        let (pa, pb, pab) = (point(&a, t).unwrap(), point(&b, t).unwrap(), point(&ab, t).unwrap());
        assert!((pab.mean - pa.mean - pb.mean).abs() < 1e-12);
        assert!((pab.var - pa.var - pb.var).abs() < 1e-12);
        let h = Family::subordinate(&a, 3);
        let ph = point(&h, t).unwrap();
        let pi = point(&a, t.powi(3)).unwrap();
        assert!((ph.mean - 3.0 * pi.mean).abs() < 1e-12);
        assert!((ph.var - 9.0 * pi.var).abs() < 1e-12);
        assert_eq!(h.q_gcd(), 3);
        assert!((mass(&h, t, 3).unwrap() - mass(&a, t.powi(3), 1).unwrap()).abs() < 1e-14);
    }
}
