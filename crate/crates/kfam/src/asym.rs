//! Saddle-point coefficient estimates, closed-form partition and Bell
//! asymptotics, and Gaussianity diagnostics of Khinchin families.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::catalog::{self, FamilySpec};
use crate::error::{Error, Result};
use crate::khinchin::{self, Family, KhinchinPoint};
use crate::numerics::{self, LogNumber, RootBracket, Tolerance, LN_2PI, ZETA2};
use crate::par;

/// Radius `t_n` with `m_f(t_n) = n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddlePoint {
    pub n: f64,
    pub t: f64,
    pub ln_f: f64,
    pub mean: f64,
    pub var: f64,
}

/// A log-space estimate together with the inputs that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub method: &'static str,
    pub value: LogNumber,
    pub family: String,
    pub meta: Vec<(&'static str, f64)>,
}

impl Estimate {
    pub fn new(method: &'static str, ln_value: f64, family: impl Into<String>, meta: Vec<(&'static str, f64)>) -> Self {
        Estimate { method, value: LogNumber::from_ln(ln_value), family: family.into(), meta }
    }

    pub fn ln(&self) -> f64 {
        self.value.ln_abs()
    }

    /// `exact / estimate`, computed in log space.
    pub fn ratio_from(&self, exact: &LogNumber) -> f64 {
        (exact.ln_abs() - self.ln()).exp()
    }

    pub fn meta_value(&self, key: &str) -> Option<f64> {
        self.meta.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

/// Solves `m_f(t) = target` in the variable `s = ln t`.
pub fn solve_mean(fam: &Family, target: f64) -> Result<SaddlePoint> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::DomainError(format!("n={target} must be positive")));
    }
    if target >= fam.mean_sup() {
        return Err(Error::TargetAboveMeanSup(format!("n={target} >= M_f={}", fam.mean_sup())));
    }
    let m = |s: f64| khinchin::mean(fam, s.exp()).unwrap_or(f64::NAN);
    let r = fam.radius();
    // upper end
    let hi = if r.is_infinite() {
        let mut hi = target.max(1.0).ln();
        let mut ok = false;
        for _ in 0..4000 {
            if m(hi) > target {
                ok = true;
                break;
            }
            hi += 1.0;
        }
        if !ok {
            return Err(Error::NoConvergence(format!("no upper bracket for n={target}")));
        }
        hi
    } else {
        let lr = r.ln();
        let mut found = None;
        for k in 1..=60 {
            let s = lr + (-(0.5f64).powi(k)).ln_1p();
            if m(s) > target {
                found = Some(s);
                break;
            }
        }
        match found {
            Some(s) => s,
            None if fam.boundary_allowed() => lr,
            None => return Err(Error::NoConvergence(format!("n={target} too close to M_f"))),
        }
    };
    let mut lo = hi.min(0.0) - 1.0;
    for _ in 0..4000 {
        if m(lo) < target {
            break;
        }
        lo -= 1.0;
    }
    let tol = Tolerance { value_rel: 1e-11, t_rel: 1e-15, max_iter: 400 };
    let s = numerics::solve_monotone(m, target, RootBracket::new(lo, hi)?, tol)?;
    let p = khinchin::point(fam, s.exp())?;
    Ok(SaddlePoint { n: target, t: p.t, ln_f: p.ln_f, mean: p.mean, var: p.var })
}

/// Saddle point for the index `n`.
pub fn saddle_solve(fam: &Family, n: u64) -> Result<SaddlePoint> {
    solve_mean(fam, n as f64)
}

fn check_lattice(fam: &Family, n: u64) -> Result<f64> {
    let q = fam.q_gcd();
    if !n.is_multiple_of(q) {
        return Err(Error::QGcdNotOne(format!("Q_f={q} does not divide n={n}; a_n = 0")));
    }
    Ok(q as f64)
}

/// `a_n ≈ Q f(t_n)/(√(2π) σ_f(t_n) t_nⁿ)`; `Q = Q_f`, defined for `Q | n`.
pub fn hayman_estimate(fam: &Family, n: u64) -> Result<Estimate> {
    let q = check_lattice(fam, n)?;
    let sp = saddle_solve(fam, n)?;
    let ln = q.ln() + sp.ln_f - n as f64 * sp.t.ln() - 0.5 * (LN_2PI + sp.var.ln());
    Ok(Estimate::new("hayman", ln, fam.label(), vec![("n", n as f64), ("t", sp.t), ("q", q)]))
}

/// Hayman's formula evaluated at `τ_n` with the approximate `m̃`, `σ̃`.
pub fn baez_duarte_estimate(fam: &Family, n: u64) -> Result<Estimate> {
    let spec = fam.spec().ok_or_else(|| Error::NoApproxAvailable(fam.label().to_string()))?;
    let am = catalog::approx_moments(spec)?;
    let q = check_lattice(fam, n)?;
    let tau = am.tau(n as f64)?;
    let ln = q.ln() + fam.ln_f(tau)? - n as f64 * tau.ln() - 0.5 * (LN_2PI + am.var(tau).ln());
    Ok(Estimate::new("baez-duarte", ln, fam.label(), vec![("n", n as f64), ("t", tau), ("q", q)]))
}

/// Closed-form partition asymptotics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartitionKind {
    /// `p(n)`.
    HardyRamanujan,
    /// `q(n)`, distinct parts.
    Distinct,
    /// Parts in `{aj + b : j ≥ 0}`, `gcd(a, b) = 1`.
    Ingham { a: u32, b: u32 },
    /// Plane partitions (colored with `b = 1`).
    WrightPlane,
    /// Colored partitions with `j^b` colors, `b ≤ 2`.
    Colored { b: u32 },
}

pub fn closed_partition_asym(kind: PartitionKind, n: u64) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    let nf = n as f64;
    let ln = match kind {
        PartitionKind::HardyRamanujan => -(4.0 * 3f64.sqrt()).ln() - nf.ln() + PI * (2.0 * nf / 3.0).sqrt(),
        PartitionKind::Distinct => -(4.0 * 3f64.powf(0.25)).ln() - 0.75 * nf.ln() + PI * (nf / 3.0).sqrt(),
        PartitionKind::Ingham { a, b } => {
            if a == 0 || b == 0 {
                return Err(Error::DomainError(format!("a={a}, b={b} must be >= 1")));
            }
            if num_integer::gcd(a, b) != 1 {
                return Err(Error::GcdNotOne(format!("gcd(a={a}, b={b}) > 1")));
            }
            let (a, b) = (f64::from(a), f64::from(b));
            let ba = b / (2.0 * a);
            -(2.0 * 2f64.sqrt() * PI).ln() + numerics::log_gamma(b / a)? + (ba - 0.5) * a.ln() + ba * ZETA2.ln()
                - (0.5 + ba) * nf.ln()
                + PI * (2.0 * nf / (3.0 * a)).sqrt()
        }
        PartitionKind::WrightPlane => return closed_colored(1, n, "wright-plane"),
        PartitionKind::Colored { b } => return closed_colored(b, n, "colored"),
    };
    Ok(Estimate::new(kind_name(kind), ln, "closed-form", vec![("n", nf)]))
}

fn kind_name(kind: PartitionKind) -> &'static str {
    match kind {
        PartitionKind::HardyRamanujan => "hardy-ramanujan",
        PartitionKind::Distinct => "distinct",
        PartitionKind::Ingham { .. } => "ingham",
        PartitionKind::WrightPlane => "wright-plane",
        PartitionKind::Colored { .. } => "colored",
    }
}

/// `α_b n^{−β_b} exp(γ_b n^{(b+1)/(b+2)})`.
fn closed_colored(b: u32, n: u64, method: &'static str) -> Result<Estimate> {
    if b > 2 {
        return Err(Error::UnsupportedColoredOrder(format!("b={b} > 2")));
    }
    let zn = numerics::zeta_neg(b)?;
    let zp = numerics::zeta_prime_neg(b)?;
    let bf = f64::from(b);
    let gz = numerics::log_gamma(bf + 2.0)? + numerics::zeta_real(bf + 2.0)?.ln(); // ln Γ(b+2)ζ(b+2)
    let ln_alpha = -0.5 * LN_2PI + zp - 0.5 * (bf + 2.0).ln() + (-2.0 * zn + 1.0) / (2.0 * (bf + 2.0)) * gz;
    let beta = (-2.0 * zn + bf + 3.0) / (2.0 * (bf + 2.0));
    let gamma = (bf + 2.0) / (bf + 1.0) * (gz / (bf + 2.0)).exp();
    let nf = n as f64;
    let ln = ln_alpha - beta * nf.ln() + gamma * nf.powf((bf + 1.0) / (bf + 2.0));
    Ok(Estimate::new(method, ln, "closed-form", vec![("n", nf), ("b", bf)]))
}

/// `B_n/n! ≈ e^{e^W − 1}/(√(2π) √(W(W+1)e^W) Wⁿ)`, `W = W(n)`.
pub fn moser_wyman(n: u64) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::DomainError("n must be >= 1".into()));
    }
    let nf = n as f64;
    let w = numerics::lambert_w0(nf)?;
    let ln = w.exp_m1() - 0.5 * LN_2PI - 0.5 * (w * (w + 1.0) * w.exp()).ln() - nf * w.ln();
    Ok(Estimate::new("moser-wyman", ln, "bell", vec![("n", nf), ("t", w)]))
}

/// Window sup `max_n |a_n tⁿ/f(t)·√(2π)σ − e^{−(m−n)²/(2σ²)}|`.
///
/// The default window is `m ± 10σ` (clamped below at 0); a supplied window must
/// cover it.
pub fn local_clt_sup(fam: &Family, t: f64, window: Option<(u64, u64)>) -> Result<f64> {
    let p = khinchin::point(fam, t)?;
    let sigma = p.var.sqrt();
    let need_lo = (p.mean - 10.0 * sigma).max(0.0).floor() as u64;
    let need_hi = (p.mean + 10.0 * sigma).ceil() as u64;
    let (lo, hi) = window.unwrap_or((need_lo, need_hi));
    if lo > need_lo || hi < need_hi || hi as usize > fam.trunc() {
        return Err(Error::WindowTooNarrow(format!(
            "window [{lo}, {hi}] does not cover m ± 10σ = [{need_lo}, {need_hi}] within trunc={}",
            fam.trunc()
        )));
    }
    fam.ln_coeff(hi)?;
    let scale = (2.0 * PI).sqrt() * sigma;
    let vals = par::map_range((hi - lo + 1) as usize, |i| {
        let n = lo + i as u64;
        khinchin::mass(fam, t, n).map(|mass| {
            let d = p.mean - n as f64;
            (mass * scale - (-d * d / (2.0 * p.var)).exp()).abs()
        })
    });
    let mut sup = 0.0f64;
    for v in vals {
        sup = sup.max(v?);
    }
    Ok(sup)
}

/// `E e^{iθX̌_t}` from a precomputed point.
fn normalized_cf(fam: &Family, p: &KhinchinPoint, theta: f64) -> Result<Complex64> {
    let sigma = p.var.sqrt();
    let z = Complex64::from_polar(p.t, theta / sigma);
    let lz = fam.evaluator().ln_f_complex(z).ok_or_else(|| Error::ComplexEvalUnavailable(fam.label().to_string()))?;
    Ok((lz - p.ln_f - Complex64::new(0.0, theta * p.mean / sigma)).exp())
}

pub const GAUSSIAN_BASE_POINTS: usize = 4096;
pub const GAUSSIAN_TOL: f64 = 1e-8;
const GAUSSIAN_MAX_DOUBLINGS: usize = 4;

/// `∫_{|θ|≤πσ} |E e^{iθX̌_t} − e^{−θ²/2}| dθ` by composite Simpson.
pub fn strong_gaussian_integral(fam: &Family, t: f64) -> Result<f64> {
    strong_gaussian_integral_with_tol(fam, t, GAUSSIAN_TOL)
}

/// [`strong_gaussian_integral`] with a caller-chosen quadrature tolerance `tol > 0`.
pub fn strong_gaussian_integral_with_tol(fam: &Family, t: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::DomainError(format!("tol={tol} must be > 0")));
    }
    let p = khinchin::point(fam, t)?;
    if t == 0.0 || p.var == 0.0 {
        return Err(Error::DomainError(format!("t={t} gives a degenerate law")));
    }
    normalized_cf(fam, &p, 0.0)?;
    let upper = PI * p.var.sqrt();
    // the integrand is even in θ
    let q = numerics::simpson(
        |th| {
            let c = normalized_cf(fam, &p, th).unwrap_or(Complex64::new(f64::NAN, 0.0));
            (c - (-0.5 * th * th).exp()).norm()
        },
        0.0,
        upper,
        GAUSSIAN_BASE_POINTS,
        tol,
        GAUSSIAN_MAX_DOUBLINGS,
    );
    Ok(2.0 * q.value)
}

/// `F‴(s)/F″(s)^{3/2}` at `s = ln t`.
pub fn gaussianity_ratio(fam: &Family, t: f64) -> Result<f64> {
    let k = khinchin::cumulants(fam, t, 3)?;
    Ok(k[3] / k[2].powf(1.5))
}

/// Major/minor arc suprema for a cut angle `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutDiagnostics {
    /// `sup_{|θ|≤hσ} |E e^{iθX̌_t} e^{θ²/2} − 1|`.
    pub major_sup: f64,
    /// `σ · sup_{hσ≤|θ|≤πσ} |E e^{iθX̌_t}|`.
    pub minor_sup_scaled: f64,
}

pub const CUT_GRID: usize = 2048;

pub fn cut_diagnostics(fam: &Family, t: f64, h: f64) -> Result<CutDiagnostics> {
    if !(h > 0.0 && h <= PI) {
        return Err(Error::DomainError(format!("h={h} outside (0, π]")));
    }
    let p = khinchin::point(fam, t)?;
    let sigma = p.var.sqrt();
    normalized_cf(fam, &p, 0.0)?;
    let grid = |a: f64, b: f64, f: &(dyn Fn(f64) -> f64 + Sync)| -> f64 {
        par::map_range(CUT_GRID, |i| f(a + (b - a) * i as f64 / (CUT_GRID - 1) as f64)).into_iter().fold(0.0, f64::max)
    };
    let cf = |th: f64| normalized_cf(fam, &p, th).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let major_sup = grid(0.0, h * sigma, &|th| (cf(th) * (0.5 * th * th).exp() - 1.0).norm());
    let minor_sup_scaled = if h >= PI { 0.0 } else { sigma * grid(h * sigma, PI * sigma, &|th| cf(th).norm()) };
    Ok(CutDiagnostics { major_sup, minor_sup_scaled })
}

/// Exact `ln a_n` from the catalog oracle, for ratio checks.
pub fn exact_ln_coeff(spec: &FamilySpec, n: usize) -> Result<LogNumber> {
    let s = catalog::exact_coeffs(spec, n)?;
    Ok(LogNumber::from_ratio(&s.coeffs()[n]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_family;

    fn fam(s: &str) -> Family {
        make_family(&s.parse().unwrap(), 4096).unwrap()
    }

    #[test]
    fn saddle_examples() {
        assert!((saddle_solve(&fam("exp"), 7).unwrap().t - 7.0).abs() < 1e-9);
        let b = saddle_solve(&fam("bell"), 10).unwrap();
        assert!((b.t - numerics::lambert_w0(10.0).unwrap()).abs() < 1e-10);
        let p = saddle_solve(&fam("P"), 100).unwrap();
        assert!((p.mean - 100.0).abs() <= 1e-9 * 100.0);
        let approx = (-PI / 600f64.sqrt()).exp();
        assert!((p.t / approx - 1.0).abs() < 0.03);
        assert_eq!(saddle_solve(&fam("binom:3"), 3).unwrap_err().name(), "TargetAboveMeanSup");
        let g = saddle_solve(&fam("geom"), 1).unwrap();
        assert!((g.t - 0.5).abs() < 1e-10);
    }

    #[test]
    fn hayman_examples() {
        let e = hayman_estimate(&fam("exp"), 10).unwrap();
        let exact = LogNumber::from_ln(-numerics::ln_factorial(10));
        let r = e.ratio_from(&exact);
        assert!((r - 1.0 / (1.0 + 1.0 / 120.0)).abs() < 1e-4, "{r}");
        let p = hayman_estimate(&fam("P"), 100).unwrap();
        let rp = p.ratio_from(&LogNumber::from_f64(190_569_292.0));
        assert!((rp - 1.0).abs() < 0.06, "{rp}");
        let b = hayman_estimate(&fam("bell"), 20).unwrap();
        let rb = b.ratio_from(&exact_ln_coeff(&FamilySpec::Bell, 20).unwrap());
        assert!((rb - 1.0).abs() < 0.05, "{rb}");
    }

    #[test]
    fn hayman_on_lattice() {
        let f = fam("expof:poly:0,0,1");
        assert_eq!(hayman_estimate(&f, 7).unwrap_err().name(), "QGcdNotOne");
        // e^{z²}: a_{2k} = 1/k!
        let e = hayman_estimate(&f, 40).unwrap();
        let exact = LogNumber::from_ln(-numerics::ln_factorial(20));
        assert!((e.ratio_from(&exact) - 1.0).abs() < 0.01);
    }

    #[test]
    fn baez_duarte_examples() {
        let p = baez_duarte_estimate(&fam("P"), 100).unwrap();
        let r = p.ratio_from(&LogNumber::from_f64(190_569_292.0));
        assert!((r - 1.0 / 1.0457).abs() < 0.01, "{r}");
        let q = baez_duarte_estimate(&fam("Q"), 100).unwrap();
        let rq = q.ratio_from(&exact_ln_coeff(&FamilySpec::DistinctQ, 100).unwrap());
        assert!((rq - 1.0).abs() < 0.1);
        let b1 = baez_duarte_estimate(&fam("bell"), 50).unwrap();
        let b2 = hayman_estimate(&fam("bell"), 50).unwrap();
        assert!((b1.ln() - b2.ln()).abs() < 1e-9 * b2.ln().abs());
        let m = moser_wyman(50).unwrap();
        assert!((m.ln() - b2.ln()).abs() < 1e-9 * b2.ln().abs());
    }

    #[test]
    fn closed_forms() {
        let hr = closed_partition_asym(PartitionKind::HardyRamanujan, 100).unwrap();
        let r = (hr.ln() - (190_569_292f64).ln()).exp();
        assert!((r - 1.047).abs() < 0.002, "{r}");
        for n in [10u64, 100, 1000] {
            let c0 = closed_partition_asym(PartitionKind::Colored { b: 0 }, n).unwrap();
            let hr = closed_partition_asym(PartitionKind::HardyRamanujan, n).unwrap();
            assert!((c0.ln() - hr.ln()).abs() < 1e-12 * hr.ln().abs());
            let i11 = closed_partition_asym(PartitionKind::Ingham { a: 1, b: 1 }, n).unwrap();
            assert!((i11.ln() - hr.ln()).abs() < 1e-12 * hr.ln().abs());
            let i21 = closed_partition_asym(PartitionKind::Ingham { a: 2, b: 1 }, n).unwrap();
            let d = closed_partition_asym(PartitionKind::Distinct, n).unwrap();
            assert!((i21.ln() - d.ln()).abs() < 1e-12 * d.ln().abs());
        }
        assert_eq!(closed_partition_asym(PartitionKind::Ingham { a: 4, b: 2 }, 10).unwrap_err().name(), "GcdNotOne");
        assert_eq!(closed_partition_asym(PartitionKind::Colored { b: 3 }, 10).unwrap_err().name(), "UnsupportedColoredOrder");
        assert!(moser_wyman(1).unwrap().ln().is_finite());
    }

    #[test]
    fn local_clt_examples() {
        let e = fam("exp");
        assert!(local_clt_sup(&e, 100.0, None).unwrap() < 0.05);
        let s: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&t| local_clt_sup(&e, t, None).unwrap()).collect();
        assert!(s[0] > s[1] && s[1] > s[2]);
        assert!(local_clt_sup(&fam("geom"), 0.99, None).unwrap() > 0.3);
        assert_eq!(local_clt_sup(&e, 100.0, Some((90, 110))).unwrap_err().name(), "WindowTooNarrow");
    }

    #[test]
    fn strong_gaussian_examples() {
        let e = fam("exp");
        // leading term of the integrand is e^{−θ²/2}|θ|³/(6σ), integrating to 2/(3σ)
        let v400 = strong_gaussian_integral(&e, 400.0).unwrap();
        assert!((v400 * 30.0 - 1.0).abs() < 0.02, "{v400}");
        let v: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&t| strong_gaussian_integral(&e, t).unwrap()).collect();
        assert!(v[0] > v[1] && v[1] > v[2]);
        // a two-point law stays far from Gaussian
        assert!(strong_gaussian_integral(&fam("bernoulli"), 1.0).unwrap() > 0.2);
    }

    #[test]
    fn gaussianity_ratio_examples() {
        assert!((gaussianity_ratio(&fam("exp"), 9.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        let s: f64 = 0.01;
        let r = gaussianity_ratio(&fam("P"), (-s).exp()).unwrap();
        let want = 3.0 / (2.0 * ZETA2).sqrt() * s.sqrt();
        assert!((r / want - 1.0).abs() < 0.1, "{r} vs {want}");
        assert!(gaussianity_ratio(&fam("bell"), 10.0).unwrap() < gaussianity_ratio(&fam("bell"), 2.0).unwrap());
    }

    #[test]
    fn cut_examples() {
        let e = fam("exp");
        let mut prev = f64::INFINITY;
        for &t in &[1e2f64, 1e3, 1e4] {
            let h = t.powf(-0.4);
            let c = cut_diagnostics(&e, t, h).unwrap();
            assert!(c.major_sup < prev);
            prev = c.major_sup;
            // |E e^{iθX̌}| = e^{−t(1−cos θ/σ)} is decreasing on the minor arc
            let want = t.sqrt() * (-t * (1.0 - h.cos())).exp();
            assert!((c.minor_sup_scaled / want - 1.0).abs() < 1e-9);
        }
        // major sup ≈ (hσ)³/(6σ) = t^{−0.2}/6
        assert!((prev * 6.0 * 1e4f64.powf(0.2) - 1.0).abs() < 0.05, "{prev}");
        let far: Vec<f64> =
            [1e4f64, 1e5, 1e6].iter().map(|&t| cut_diagnostics(&e, t, t.powf(-0.4)).unwrap().minor_sup_scaled).collect();
        assert!(far[0] > far[1] && far[1] > far[2]);
        assert_eq!(cut_diagnostics(&e, 10.0, PI).unwrap().minor_sup_scaled, 0.0);
        let s = 0.05f64;
        let p = cut_diagnostics(&fam("P"), (-s).exp(), s.powf(1.4)).unwrap();
        assert!(p.major_sup < 1.0 && p.minor_sup_scaled.is_finite(), "{p:?}");
    }
}
