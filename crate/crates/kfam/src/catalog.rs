//! Named generating functions: closed-form evaluators, exact coefficient
//! oracles, approximate mean/variance functions and axis asymptotics.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::khinchin::{Evaluator, Family};
use crate::numerics::{self, LogNumber, ZETA2};
use crate::series::{self, parse_rational, rat, CoeffSeries};

/// Largest coefficient order the exact oracles will build.
pub const MAX_TRUNCATION: usize = 100_000;

/// Textual grammar accepted by [`FamilySpec::from_str`].
pub const GRAMMAR: &str = "exp | bernoulli | binom:N | geom | negbinom:N | poly:a0,a1,... | bell | P | Q \
| Pab:a,b | Wab:a,b | expof:<spec> | canprod:b1,b2,... | setsoflists | polylog:p[,eps]";

/// A catalog generating function.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    /// `e^z`.
    Exp,
    /// `1 + z`.
    Bernoulli,
    /// `(1 + z)^N`.
    Binomial(u32),
    /// `1/(1 − z)`.
    Geometric,
    /// `1/(1 − z)^N`.
    NegBinomial(u32),
    /// Finite polynomial with non-negative rational coefficients.
    Polynomial(CoeffSeries),
    /// `e^{e^z − 1}`.
    Bell,
    /// `∏_{j≥1} 1/(1 − z^j)`.
    PartitionP,
    /// `∏_{j≥1} (1 + z^j)`.
    DistinctQ,
    /// `∏_{j≥0} 1/(1 − z^{aj+b})`.
    ArithmeticP(u32, u32),
    /// `∏_{j≥1} (1 − z^{ja})^{−j^b}`.
    ColoredW(u32, u32),
    /// `e^{g(z)}` with `g` another catalog entry (typically a polynomial).
    ExpOf(Box<FamilySpec>),
    /// `∏_k (1 + z/b_k)` over a finite list of positive increasing zeros.
    CanonicalProduct(Vec<BigRational>),
    /// `e^{z/(1 − z)}`.
    SetsOfLists,
    /// `1 + ε Li_p(z)`: radius 1 with finite boundary moments of low order.
    ShiftedPolylog { p: u32, eps: BigRational },
}

fn invalid(msg: impl fmt::Display) -> Error {
    Error::InvalidSpec(format!("{msg}; grammar: {GRAMMAR}"))
}

fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.trim().parse::<u32>().map_err(|_| invalid(format!("{what} must be a non-negative integer, got '{s}'")))
}

fn parse_list(s: &str) -> Result<Vec<BigRational>> {
    s.split(',').map(|x| parse_rational(x.trim())).collect()
}

fn join(v: &[BigRational]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = parse_spec(s)?;
        spec.validate(true)?;
        Ok(spec)
    }
}

fn parse_spec(s: &str) -> Result<FamilySpec> {
    {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let need = |what: &str| rest.ok_or_else(|| invalid(format!("'{head}' needs {what}")));
        let no_args = |spec: FamilySpec| match rest {
            None => Ok(spec),
            Some(_) => Err(invalid(format!("'{head}' takes no arguments"))),
        };
        let pair = |what: &str| -> Result<(u32, u32)> {
            let r = need(what)?;
            let (a, b) = r.split_once(',').ok_or_else(|| invalid(format!("'{head}' needs {what}")))?;
            Ok((parse_u32(a, "a")?, parse_u32(b, "b")?))
        };
        let spec = match head {
            "exp" => no_args(FamilySpec::Exp)?,
            "bernoulli" => no_args(FamilySpec::Bernoulli)?,
            "binom" => FamilySpec::Binomial(parse_u32(need("N")?, "N")?),
            "geom" => no_args(FamilySpec::Geometric)?,
            "negbinom" => FamilySpec::NegBinomial(parse_u32(need("N")?, "N")?),
            "poly" => {
                let c = parse_list(need("coefficients")?)?;
                let order = c.len() - 1;
                FamilySpec::Polynomial(CoeffSeries::new(c).truncate(order))
            }
            "bell" => no_args(FamilySpec::Bell)?,
            "P" => no_args(FamilySpec::PartitionP)?,
            "Q" => no_args(FamilySpec::DistinctQ)?,
            "Pab" => {
                let (a, b) = pair("a,b")?;
                FamilySpec::ArithmeticP(a, b)
            }
            "Wab" => {
                let (a, b) = pair("a,b")?;
                FamilySpec::ColoredW(a, b)
            }
            "expof" => {
                let inner = parse_spec(need("an inner spec")?)?;
                inner.validate(false)?;
                FamilySpec::ExpOf(Box::new(inner))
            }
            "canprod" => FamilySpec::CanonicalProduct(parse_list(need("zeros")?)?),
            "setsoflists" => no_args(FamilySpec::SetsOfLists)?,
            "polylog" => {
                let r = need("p[,eps]")?;
                let (p, eps) = match r.split_once(',') {
                    Some((p, e)) => (parse_u32(p, "p")?, parse_rational(e.trim())?),
                    None => (parse_u32(r, "p")?, rat(1)),
                };
                FamilySpec::ShiftedPolylog { p, eps }
            }
            _ => return Err(invalid(format!("unknown family '{head}'"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Exp => write!(f, "exp"),
            FamilySpec::Bernoulli => write!(f, "bernoulli"),
            FamilySpec::Binomial(n) => write!(f, "binom:{n}"),
            FamilySpec::Geometric => write!(f, "geom"),
            FamilySpec::NegBinomial(n) => write!(f, "negbinom:{n}"),
            FamilySpec::Polynomial(p) => write!(f, "poly:{}", join(p.coeffs())),
            FamilySpec::Bell => write!(f, "bell"),
            FamilySpec::PartitionP => write!(f, "P"),
            FamilySpec::DistinctQ => write!(f, "Q"),
            FamilySpec::ArithmeticP(a, b) => write!(f, "Pab:{a},{b}"),
            FamilySpec::ColoredW(a, b) => write!(f, "Wab:{a},{b}"),
            FamilySpec::ExpOf(g) => write!(f, "expof:{g}"),
            FamilySpec::CanonicalProduct(z) => write!(f, "canprod:{}", join(z)),
            FamilySpec::SetsOfLists => write!(f, "setsoflists"),
            FamilySpec::ShiftedPolylog { p, eps } => write!(f, "polylog:{p},{eps}"),
        }
    }
}

impl FamilySpec {
    /// Checks parameter invariants; inner specs of `ExpOf` may vanish at 0.
    pub fn validate(&self, top: bool) -> Result<()> {
        match self {
            FamilySpec::Binomial(0) | FamilySpec::NegBinomial(0) => Err(invalid("N must be >= 1")),
            FamilySpec::ArithmeticP(a, b) if *a == 0 || *b == 0 => Err(invalid("Pab needs a,b >= 1")),
            FamilySpec::ColoredW(0, _) => Err(invalid("Wab needs a >= 1")),
            FamilySpec::Polynomial(p) => {
                if !p.is_nonnegative() {
                    return Err(invalid(format!("negative coefficient in poly:{}", join(p.coeffs()))));
                }
                let nz = p.nonzero_indices();
                if nz.iter().all(|&n| n == 0) {
                    return Err(invalid("poly needs a nonzero coefficient of positive index"));
                }
                if top && nz[0] != 0 {
                    return Err(invalid("poly needs a_0 > 0"));
                }
                Ok(())
            }
            FamilySpec::ExpOf(g) => g.validate(false),
            FamilySpec::CanonicalProduct(z) => {
                if z.is_empty() || !z[0].is_positive() || z.windows(2).any(|w| w[1] <= w[0]) {
                    Err(invalid("canprod zeros must be positive and strictly increasing"))
                } else {
                    Ok(())
                }
            }
            FamilySpec::ShiftedPolylog { p, eps } => {
                if *p < 2 || !eps.is_positive() {
                    Err(invalid("polylog needs p >= 2 and eps > 0"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Asserted uniformly strongly Gaussian.
    pub fn usg(&self) -> bool {
        matches!(
            self,
            FamilySpec::Exp | FamilySpec::Bell | FamilySpec::PartitionP | FamilySpec::DistinctQ | FamilySpec::ColoredW(1, _)
        )
    }
}

// ---------------------------------------------------------------------------
// Evaluators

/// `e^z`.
struct ExpZ;

impl Evaluator for ExpZ {
    fn ln_f(&self, t: f64) -> f64 {
        t
    }
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let mut k = vec![t; order + 1];
        k[0] = 0.0;
        Some(k)
    }
    fn factorial_moments(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        Some((0..=order).map(|j| t.powi(j as i32)).collect())
    }
    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z)
    }
    fn ln_coeff(&self, n: u64) -> Option<f64> {
        Some(-numerics::ln_factorial(n))
    }
}

/// Touchard polynomial `T_q(x) = Σ_k S(q,k) x^k`.
fn touchard(s2: &[Vec<f64>], q: usize, x: f64) -> f64 {
    (0..=q).rev().fold(0.0, |acc, k| acc * x + s2[q][k])
}

/// `e^{e^z − 1}`: `κ_q = e^t T_q(t)`, `t^j f^{(j)}/f = t^j T_j(e^t)`.
struct BellEval;

impl Evaluator for BellEval {
    fn ln_f(&self, t: f64) -> f64 {
        t.exp_m1()
    }
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let s2 = numerics::stirling2_table(order);
        let et = t.exp();
        Some((0..=order).map(|q| if q == 0 { 0.0 } else { et * touchard(&s2, q, t) }).collect())
    }
    fn factorial_moments(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let s2 = numerics::stirling2_table(order);
        let et = t.exp();
        Some((0..=order).map(|j| t.powi(j as i32) * touchard(&s2, j, et)).collect())
    }
    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z.exp() - 1.0)
    }
}

/// `e^{z/(1−z)}`: `κ_q = Li_{−q}(t)`.
struct SetsOfListsEval;

impl Evaluator for SetsOfListsEval {
    fn ln_f(&self, t: f64) -> f64 {
        t / (1.0 - t)
    }
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        Some((0..=order).map(|q| if q == 0 { 0.0 } else { numerics::polylog_neg(q, t, 1.0 - t) }).collect())
    }
    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(z / (1.0 - z))
    }
}

/// `e^{g}` for an inner evaluator `g`: `κ_q = θ^q g = g(t)·E[Y_t^q]`.
struct ExpOfEval {
    inner: Arc<dyn Evaluator>,
}

impl Evaluator for ExpOfEval {
    fn ln_f(&self, t: f64) -> f64 {
        self.inner.ln_f(t).exp()
    }
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let g = self.inner.ln_f(t).exp();
        let mu = numerics::moments_from_cumulants(&self.inner.cumulants(t, order)?);
        Some((0..=order).map(|q| if q == 0 { 0.0 } else { g * mu[q] }).collect())
    }
    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        Some(self.inner.ln_f_complex(z)?.exp())
    }
}

/// `1 + ε Li_p(z)`; raw moments `θ^j ψ/ψ = ε Li_{p−j}(t)/ψ(t)`.
struct PolylogEval {
    p: i32,
    eps: f64,
}

impl Evaluator for PolylogEval {
    fn ln_f(&self, t: f64) -> f64 {
        (self.eps * numerics::polylog(self.p, t).unwrap_or(f64::NAN)).ln_1p()
    }
    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let psi = 1.0 + self.eps * numerics::polylog(self.p, t).ok()?;
        let mut mu = vec![1.0; order + 1];
        for (j, m) in mu.iter_mut().enumerate().skip(1) {
            *m = self.eps * numerics::polylog(self.p - j as i32, t).ok()? / psi;
        }
        Some(numerics::cumulants_from_moments(&mu))
    }
    fn ln_coeff(&self, n: u64) -> Option<f64> {
        Some(if n == 0 { 0.0 } else { self.eps.ln() - f64::from(self.p) * (n as f64).ln() })
    }
}

/// One factor `(1 − ρ t^e)^{−c}` (pole) or `(1 + ρ t^e)^c` (zero).
#[derive(Clone, Copy, Debug)]
struct Factor {
    c: f64,
    e: f64,
    ln_rho: f64,
}

type FactorSeq = Arc<dyn Fn(u64) -> Factor + Send + Sync>;

enum Factors {
    Finite(Vec<Factor>),
    /// Factors indexed `1, 2, …` with exponents increasing to infinity.
    Seq(FactorSeq),
}

/// Product families summed in log space.
///
/// `θ^q` of `−c ln(1 − x)` is `c e^q Li_{1−q}(x)`; of `c ln(1 + x)` it is
/// `−c e^q Li_{1−q}(−x)`. Infinite products stop once the current term is
/// below `1e−16` of the partial sum and the geometric tail majorant built from
/// the (decreasing) term ratio is below `1e−14` of it.
struct LogSumEval {
    pole: bool,
    factors: Factors,
    ln_coeff: Option<Arc<dyn Fn(u64) -> f64 + Send + Sync>>,
}

const MAX_FACTORS: u64 = 100_000_000;

impl LogSumEval {
    fn factor_terms(&self, fac: &Factor, lt: f64, order: usize, out: &mut [f64]) {
        let lx = fac.ln_rho + fac.e * lt;
        let x = lx.exp();
        if self.pole {
            let omx = -lx.exp_m1();
            out[0] = -fac.c * if x < 0.5 { (-x).ln_1p() } else { omx.ln() };
            let mut eq = 1.0;
            for q in 1..=order {
                eq *= fac.e;
                out[q] = fac.c * eq * numerics::polylog_neg(q - 1, x, omx);
            }
        } else {
            out[0] = fac.c * x.ln_1p();
            let mut eq = 1.0;
            for q in 1..=order {
                eq *= fac.e;
                out[q] = -fac.c * eq * numerics::polylog_neg(q - 1, -x, 1.0 + x);
            }
        }
    }

    /// `[ln f, κ_1, …, κ_order]`.
    fn sums(&self, t: f64, order: usize) -> Vec<f64> {
        let mut acc = vec![0.0; order + 1];
        if t == 0.0 {
            return acc;
        }
        let lt = t.ln();
        let mut buf = vec![0.0; order + 1];
        match &self.factors {
            Factors::Finite(v) => {
                for fac in v {
                    self.factor_terms(fac, lt, order, &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                }
            }
            Factors::Seq(seq) => {
                let mut prev = f64::INFINITY;
                for j in 1..=MAX_FACTORS {
                    let fac = seq(j);
                    self.factor_terms(&fac, lt, order, &mut buf);
                    acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
                    let mag = buf[order].abs();
                    if mag == 0.0 && fac.ln_rho + fac.e * lt < -745.0 {
                        break;
                    }
                    let small = buf.iter().zip(&acc).all(|(b, a)| b.abs() <= 1e-16 * a.abs());
                    let r = mag / prev;
                    if small && r < 1.0 && mag * r / (1.0 - r) <= 1e-14 * acc[order].abs() {
                        break;
                    }
                    prev = mag;
                }
            }
        }
        acc
    }

    fn factor_complex(&self, fac: &Factor, lz: Complex64) -> (Complex64, f64) {
        let w = (lz * fac.e + fac.ln_rho).exp();
        let wn = w.norm();
        let ln1 = |u: Complex64| -> Complex64 {
            if u.norm() < 1e-3 {
                u - u * u / 2.0 + u * u * u / 3.0 - u * u * u * u / 4.0
            } else {
                (u + 1.0).ln()
            }
        };
        let v = if self.pole { -ln1(-w) * fac.c } else { ln1(w) * fac.c };
        (v, wn * fac.c)
    }
}

impl Evaluator for LogSumEval {
    fn ln_f(&self, t: f64) -> f64 {
        self.sums(t, 0)[0]
    }

    fn cumulants(&self, t: f64, order: usize) -> Option<Vec<f64>> {
        let mut s = self.sums(t, order);
        s[0] = 0.0;
        Some(s)
    }

    fn ln_f_complex(&self, z: Complex64) -> Option<Complex64> {
        let lz = z.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        match &self.factors {
            Factors::Finite(v) => {
                for fac in v {
                    acc += self.factor_complex(fac, lz).0;
                }
            }
            Factors::Seq(seq) => {
                let mut prev = f64::INFINITY;
                for j in 1..=MAX_FACTORS {
                    let (v, mag) = self.factor_complex(&seq(j), lz);
                    acc += v;
                    let r = mag / prev;
                    if mag == 0.0
                        || (r < 1.0 && mag <= 1e-16 * acc.norm().max(1e-300) && mag * r / (1.0 - r) <= 1e-14 * acc.norm())
                    {
                        break;
                    }
                    prev = mag;
                }
            }
        }
        Some(acc)
    }

    fn ln_coeff(&self, n: u64) -> Option<f64> {
        self.ln_coeff.as_ref().map(|f| f(n))
    }
}

fn ln_binom(n: f64, k: f64) -> f64 {
    numerics::log_gamma(n + 1.0).unwrap_or(f64::NAN)
        - numerics::log_gamma(k + 1.0).unwrap_or(f64::NAN)
        - numerics::log_gamma(n - k + 1.0).unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// Construction

fn guard(n: usize) -> Result<()> {
    if n > MAX_TRUNCATION {
        Err(Error::TruncationTooLarge(format!("N={n} > {MAX_TRUNCATION}")))
    } else {
        Ok(())
    }
}

fn ln_abs_rational(x: &BigRational) -> f64 {
    LogNumber::from_ratio(x).ln_abs()
}

/// Binds the closed forms and exact oracles of `spec` to a [`Family`] whose
/// coefficient access is limited to order `trunc`.
pub fn make_family(spec: &FamilySpec, trunc: usize) -> Result<Family> {
    guard(trunc)?;
    spec.validate(true)?;
    let fam = build_family(spec)?;
    let oracle = spec.clone();
    let fam =
        if matches!(spec, FamilySpec::Polynomial(_)) { fam } else { fam.with_coeffs(move |order| exact_coeffs(&oracle, order)) };
    Ok(fam.with_usg(spec.usg()).with_trunc(trunc).with_spec(spec.clone()))
}

fn build_family(spec: &FamilySpec) -> Result<Family> {
    let label = spec.to_string();
    let inf = f64::INFINITY;
    let pole = |factors: Factors, ln_coeff: Option<Arc<dyn Fn(u64) -> f64 + Send + Sync>>| {
        Arc::new(LogSumEval { pole: true, factors, ln_coeff })
    };
    let zero = |factors: Factors, ln_coeff: Option<Arc<dyn Fn(u64) -> f64 + Send + Sync>>| {
        Arc::new(LogSumEval { pole: false, factors, ln_coeff })
    };
    let unit = |c: f64| Factor { c, e: 1.0, ln_rho: 0.0 };
    Ok(match spec {
        FamilySpec::Exp => Family::new(label, Arc::new(ExpZ), inf, inf, 1),
        FamilySpec::Bernoulli => {
            let lc: Arc<dyn Fn(u64) -> f64 + Send + Sync> = Arc::new(|n| if n <= 1 { 0.0 } else { f64::NEG_INFINITY });
            Family::new(label, zero(Factors::Finite(vec![unit(1.0)]), Some(lc)), inf, 1.0, 1)
        }
        FamilySpec::Binomial(n) => {
            let nn = f64::from(*n);
            let lc: Arc<dyn Fn(u64) -> f64 + Send + Sync> =
                Arc::new(move |k| if k as f64 > nn { f64::NEG_INFINITY } else { ln_binom(nn, k as f64) });
            Family::new(label, zero(Factors::Finite(vec![unit(nn)]), Some(lc)), inf, nn, 1)
        }
        FamilySpec::Geometric => {
            let lc: Arc<dyn Fn(u64) -> f64 + Send + Sync> = Arc::new(|_| 0.0);
            Family::new(label, pole(Factors::Finite(vec![unit(1.0)]), Some(lc)), 1.0, inf, 1)
        }
        FamilySpec::NegBinomial(n) => {
            let nn = f64::from(*n);
            let lc: Arc<dyn Fn(u64) -> f64 + Send + Sync> = Arc::new(move |k| ln_binom(nn + k as f64 - 1.0, k as f64));
            Family::new(label, pole(Factors::Finite(vec![unit(nn)]), Some(lc)), 1.0, inf, 1)
        }
        FamilySpec::Polynomial(p) => Family::polynomial(label, p)?,
        FamilySpec::Bell => Family::new(label, Arc::new(BellEval), inf, inf, 1),
        FamilySpec::PartitionP => {
            let seq: FactorSeq = Arc::new(|j| Factor { c: 1.0, e: j as f64, ln_rho: 0.0 });
            Family::new(label, pole(Factors::Seq(seq), None), 1.0, inf, 1)
        }
        FamilySpec::DistinctQ => {
            let seq: FactorSeq = Arc::new(|j| Factor { c: 1.0, e: j as f64, ln_rho: 0.0 });
            Family::new(label, zero(Factors::Seq(seq), None), 1.0, inf, 1)
        }
        FamilySpec::ArithmeticP(a, b) => {
            let q = u64::from(*a).gcd(&u64::from(*b));
            let (a, b) = (f64::from(*a), f64::from(*b));
            let seq: FactorSeq = Arc::new(move |j| Factor { c: 1.0, e: a * (j - 1) as f64 + b, ln_rho: 0.0 });
            Family::new(label, pole(Factors::Seq(seq), None), 1.0, inf, q)
        }
        FamilySpec::ColoredW(a, b) => {
            let (af, bi) = (f64::from(*a), *b as i32);
            let seq: FactorSeq = Arc::new(move |j| Factor { c: (j as f64).powi(bi), e: af * j as f64, ln_rho: 0.0 });
            Family::new(label, pole(Factors::Seq(seq), None), 1.0, inf, u64::from(*a))
        }
        FamilySpec::ExpOf(g) => {
            let inner = build_family(g)?;
            let mean_sup = if inner.is_entire() || inner.mean_sup().is_infinite() {
                inf
            } else {
                inner.ln_f(inner.radius())?.exp() * inner.mean_sup()
            };
            let g0 = match g.as_ref() {
                FamilySpec::Polynomial(p) => series::to_f64(&p.coeffs()[0]),
                other => exact_coeffs(other, 0).map(|s| series::to_f64(&s.coeffs()[0]))?,
            };
            Family::new(label, Arc::new(ExpOfEval { inner: inner.evaluator().clone() }), inner.radius(), mean_sup, inner.q_gcd())
                .with_boundary(inner.boundary_allowed())
                .with_coeff_ln_scale(g0)
        }
        FamilySpec::CanonicalProduct(zeros) => {
            let factors = zeros.iter().map(|b| Factor { c: 1.0, e: 1.0, ln_rho: -ln_abs_rational(b) }).collect();
            Family::new(label, zero(Factors::Finite(factors), None), inf, zeros.len() as f64, 1)
        }
        FamilySpec::SetsOfLists => Family::new(label, Arc::new(SetsOfListsEval), 1.0, inf, 1),
        FamilySpec::ShiftedPolylog { p, eps } => {
            let e = series::to_f64(eps);
            let p = *p as i32;
            let mean_sup = if p >= 3 {
                let z = |s: i32| numerics::zeta_real(f64::from(s)).unwrap_or(f64::NAN);
                e * z(p - 1) / (1.0 + e * z(p))
            } else {
                inf
            };
            Family::new(label, Arc::new(PolylogEval { p, eps: e }), 1.0, mean_sup, 1).with_boundary(p >= 3)
        }
    })
}

// ---------------------------------------------------------------------------
// Exact coefficient oracles

fn from_ints(v: Vec<BigInt>) -> CoeffSeries {
    CoeffSeries::new(v.into_iter().map(BigRational::from_integer).collect())
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut f = Vec::with_capacity(n + 1);
    f.push(BigInt::one());
    for k in 1..=n {
        let next = &f[k - 1] * BigInt::from(k);
        f.push(next);
    }
    f
}

/// `p(0..=n)` by Euler's pentagonal recurrence.
pub fn partitions_pentagonal(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for m in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > m {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let mut term = p[m - g1].clone();
            if g2 <= m {
                term += &p[m - g2];
            }
            if k % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        p[m] = acc;
    }
    p
}

/// Coefficients of `∏_{parts} 1/(1 − z^part)` by direct product expansion.
pub fn product_partitions<I: IntoIterator<Item = usize>>(parts: I, n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n + 1];
    c[0] = BigInt::one();
    for part in parts {
        if part == 0 || part > n {
            continue;
        }
        for m in part..=n {
            let add = c[m - part].clone();
            c[m] += add;
        }
    }
    c
}

/// Coefficients of `∏_{parts} (1 + z^part)`.
pub fn product_distinct<I: IntoIterator<Item = usize>>(parts: I, n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n + 1];
    c[0] = BigInt::one();
    for part in parts {
        if part == 0 || part > n {
            continue;
        }
        for m in (part..=n).rev() {
            let add = c[m - part].clone();
            c[m] += add;
        }
    }
    c
}

/// Coefficients of `∏_e (1 − z^e)^{−c_e}` via `n w_n = Σ_k D_k w_{n−k}`,
/// `D_k = Σ_{e | k} e c_e`; `mult(e)` returns `c_e`.
pub fn euler_transform<F: Fn(usize) -> u64>(mult: F, n: usize) -> Vec<BigInt> {
    let mut d = vec![BigInt::zero(); n + 1];
    for e in 1..=n {
        let c = mult(e);
        if c == 0 {
            continue;
        }
        let ec = BigInt::from(e) * BigInt::from(c);
        for k in (e..=n).step_by(e) {
            d[k] += &ec;
        }
    }
    let mut w = vec![BigInt::zero(); n + 1];
    w[0] = BigInt::one();
    for m in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1..=m {
            if !d[k].is_zero() && !w[m - k].is_zero() {
                acc += &d[k] * &w[m - k];
            }
        }
        w[m] = acc / BigInt::from(m);
    }
    w
}

/// Bell numbers `B_0..=B_n` by the Bell triangle.
pub fn bell_numbers(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    let mut row = vec![BigInt::one()];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().expect("nonempty row").clone());
        for k in 0..row.len() {
            let v = &next[k] + &row[k];
            next.push(v);
        }
        out.push(next[0].clone());
        row = next;
    }
    out
}

/// Exact coefficients `a_0..=a_n` of the catalog entry.
pub fn exact_coeffs(spec: &FamilySpec, n: usize) -> Result<CoeffSeries> {
    guard(n)?;
    Ok(match spec {
        FamilySpec::Exp => CoeffSeries::exp_z(n),
        FamilySpec::Bernoulli => CoeffSeries::from_fn(n, |k| rat(i64::from(k <= 1))),
        FamilySpec::Binomial(m) => {
            let m = *m as usize;
            let mut v = vec![BigInt::zero(); n + 1];
            let mut c = BigInt::one();
            for (k, slot) in v.iter_mut().enumerate().take(m.min(n) + 1) {
                *slot = c.clone();
                c = c * BigInt::from(m - k) / BigInt::from(k + 1);
            }
            from_ints(v)
        }
        FamilySpec::Geometric => CoeffSeries::geometric(n),
        FamilySpec::NegBinomial(m) => {
            let m = *m as usize;
            let mut v = Vec::with_capacity(n + 1);
            let mut c = BigInt::one();
            for k in 0..=n {
                v.push(c.clone());
                c = c * BigInt::from(m + k) / BigInt::from(k + 1);
            }
            from_ints(v)
        }
        FamilySpec::Polynomial(p) => CoeffSeries::from_fn(n, |k| p.coeffs().get(k).cloned().unwrap_or_else(BigRational::zero)),
        FamilySpec::Bell => {
            let b = bell_numbers(n);
            let f = factorials(n);
            CoeffSeries::from_fn(n, |k| BigRational::new(b[k].clone(), f[k].clone()))
        }
        FamilySpec::PartitionP => from_ints(partitions_pentagonal(n)),
        FamilySpec::DistinctQ => from_ints(product_distinct(1..=n, n)),
        FamilySpec::ArithmeticP(a, b) => {
            let (a, b) = (*a as usize, *b as usize);
            from_ints(product_partitions((0..).map(|j| a * j + b).take_while(|&p| p <= n), n))
        }
        FamilySpec::ColoredW(a, b) => {
            let (a, b) = (*a as usize, *b);
            from_ints(euler_transform(|e| if e % a == 0 { ((e / a) as u64).pow(b) } else { 0 }, n))
        }
        FamilySpec::ExpOf(g) => series::exp_series(&exact_coeffs(g, n)?).series,
        FamilySpec::CanonicalProduct(zeros) => {
            let mut acc = CoeffSeries::from_fn(n, |k| rat(i64::from(k == 0)));
            for b in zeros {
                let factor = CoeffSeries::from_fn(n, |k| match k {
                    0 => rat(1),
                    1 => b.recip(),
                    _ => rat(0),
                });
                acc = series::mul(&acc, &factor);
            }
            acc
        }
        FamilySpec::SetsOfLists => {
            // a(m) = (2m−1) a(m−1) − (m−1)(m−2) a(m−2)
            let mut v: Vec<BigInt> = Vec::with_capacity(n + 1);
            for m in 0..=n {
                let x = if m <= 1 {
                    BigInt::one()
                } else {
                    BigInt::from(2 * m - 1) * &v[m - 1] - BigInt::from((m - 1) * (m - 2)) * &v[m - 2]
                };
                v.push(x);
            }
            let f = factorials(n);
            CoeffSeries::from_fn(n, |k| BigRational::new(v[k].clone(), f[k].clone()))
        }
        FamilySpec::ShiftedPolylog { p, eps } => {
            CoeffSeries::from_fn(n, |k| if k == 0 { rat(1) } else { eps / BigRational::from_integer(BigInt::from(k).pow(*p)) })
        }
    })
}

// ---------------------------------------------------------------------------
// Approximate mean/variance and axis asymptotics

/// Approximations `m̃`, `σ̃²` with a closed-form inverse `m̃(τ_n) = n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ApproxMoments {
    /// `m̃(e^{−s}) = A s^{−α}` and `σ̃²(e^{−s}) = α A s^{−α−1}`.
    Power { a: f64, alpha: f64 },
    /// Exact `m = t e^t`, `σ² = (t + t²) e^t`, inverted by Lambert W.
    Bell,
    /// Exact `m = σ² = t`.
    Exp,
}

impl ApproxMoments {
    /// `m̃(t)`.
    pub fn mean(&self, t: f64) -> f64 {
        match *self {
            ApproxMoments::Power { a, alpha } => a * (-t.ln()).powf(-alpha),
            ApproxMoments::Bell => t * t.exp(),
            ApproxMoments::Exp => t,
        }
    }

    /// `σ̃²(t)`.
    pub fn var(&self, t: f64) -> f64 {
        match *self {
            ApproxMoments::Power { a, alpha } => alpha * a * (-t.ln()).powf(-alpha - 1.0),
            ApproxMoments::Bell => (t + t * t) * t.exp(),
            ApproxMoments::Exp => t,
        }
    }

    /// `m̃(e^{−s})`.
    pub fn mean_s(&self, s: f64) -> f64 {
        self.mean((-s).exp())
    }

    /// `σ̃²(e^{−s})`.
    pub fn var_s(&self, s: f64) -> f64 {
        self.var((-s).exp())
    }

    /// `τ_n` solving `m̃(τ_n) = n`.
    pub fn tau(&self, n: f64) -> Result<f64> {
        Ok(match *self {
            ApproxMoments::Power { a, alpha } => (-(a / n).powf(1.0 / alpha)).exp(),
            ApproxMoments::Bell => numerics::lambert_w0(n)?,
            ApproxMoments::Exp => n,
        })
    }

    /// `s_n = −ln τ_n` for the partition-type forms.
    pub fn s_n(&self, n: f64) -> Result<f64> {
        Ok(-self.tau(n)?.ln())
    }
}

/// `c = (b+1)/a` and `A = ζ(1+c) Γ(1+c)/a` for `W_a^b`.
fn colored_constants(a: u32, b: u32) -> Result<(f64, f64)> {
    let c = f64::from(b + 1) / f64::from(a);
    let big_a = numerics::zeta_real(1.0 + c)? * numerics::log_gamma(1.0 + c)?.exp() / f64::from(a);
    Ok((c, big_a))
}

/// Approximate moments for the partition products (and the exact closed
/// forms for `Bell` and `Exp`).
pub fn approx_moments(spec: &FamilySpec) -> Result<ApproxMoments> {
    Ok(match spec {
        FamilySpec::PartitionP => ApproxMoments::Power { a: ZETA2, alpha: 2.0 },
        FamilySpec::DistinctQ => ApproxMoments::Power { a: ZETA2 / 2.0, alpha: 2.0 },
        FamilySpec::ArithmeticP(a, _) => ApproxMoments::Power { a: ZETA2 / f64::from(*a), alpha: 2.0 },
        FamilySpec::ColoredW(a, b) => {
            let (c, big_a) = colored_constants(*a, *b)?;
            ApproxMoments::Power { a: big_a, alpha: 1.0 + c }
        }
        FamilySpec::Bell => ApproxMoments::Bell,
        FamilySpec::Exp => ApproxMoments::Exp,
        other => return Err(Error::NoApproxAvailable(other.to_string())),
    })
}

/// `ln f(e^{−s})` as `s ↓ 0` for `P`, `Q`, `P_{a,b}` and `W_a^b` (`b ≤ 2`).
pub fn axis_asymptotic(spec: &FamilySpec, s: f64) -> Result<LogNumber> {
    if !(s > 0.0) {
        return Err(Error::DomainError(format!("s={s} must be > 0")));
    }
    let pab = |a: f64, b: f64| -> Result<f64> {
        Ok(-0.5 * numerics::LN_2PI + numerics::log_gamma(b / a)? + (b / a - 0.5) * (a * s).ln() + ZETA2 / (a * s))
    };
    let ln_f = match spec {
        FamilySpec::PartitionP => pab(1.0, 1.0)?,
        FamilySpec::DistinctQ => pab(2.0, 1.0)?,
        FamilySpec::ArithmeticP(a, b) => pab(f64::from(*a), f64::from(*b))?,
        FamilySpec::ColoredW(a, b) => {
            let zp = numerics::zeta_prime_neg(*b).map_err(|_| Error::NoAxisFormula(format!("Wab:{a},{b} needs b <= 2")))?;
            let c = f64::from(b + 1) / f64::from(*a);
            let lead = numerics::zeta_real(1.0 + c)? * numerics::log_gamma(c)?.exp() / f64::from(*a);
            lead * s.powf(-c) - numerics::zeta_neg(*b)? * s.ln() + f64::from(*a) * zp
        }
        other => return Err(Error::NoAxisFormula(other.to_string())),
    };
    Ok(LogNumber::from_ln(ln_f))
}

/// Number of zeros `b_k ≤ t` of a canonical product.
pub fn zero_counting(zeros: &[BigRational], t: f64) -> usize {
    zeros.iter().filter(|b| series::to_f64(b) <= t).count()
}

// ---------------------------------------------------------------------------
// Set constructions and coefficient criteria

/// `b_m = (1/m) Σ_{j | m} j c_j`, so that `exp(b) = ∏ (1 − z^j)^{−c_j}`.
pub fn multiset_transform(c: &CoeffSeries) -> CoeffSeries {
    let n = c.order();
    let mut acc = vec![BigRational::zero(); n + 1];
    for j in 1..=n {
        if c.coeffs()[j].is_zero() {
            continue;
        }
        let jc = &c.coeffs()[j] * BigInt::from(j);
        for m in (j..=n).step_by(j) {
            acc[m] += &jc;
        }
    }
    CoeffSeries::new(acc.into_iter().enumerate().map(|(m, v)| if m == 0 { v } else { v / BigInt::from(m) }).collect())
}

/// `b_m = (1/m) Σ_{jk = m} j c_j (−1)^{k+1}`, so that `exp(b) = ∏ (1 + z^j)^{c_j}`.
pub fn powerset_transform(c: &CoeffSeries) -> CoeffSeries {
    let n = c.order();
    let mut acc = vec![BigRational::zero(); n + 1];
    for j in 1..=n {
        if c.coeffs()[j].is_zero() {
            continue;
        }
        let jc = &c.coeffs()[j] * BigInt::from(j);
        for (k, m) in (j..=n).step_by(j).enumerate() {
            if k % 2 == 0 {
                acc[m] += &jc;
            } else {
                acc[m] -= &jc;
            }
        }
    }
    CoeffSeries::new(acc.into_iter().enumerate().map(|(m, v)| if m == 0 { v } else { v / BigInt::from(m) }).collect())
}

/// Outcome of a coefficient-window criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub reason: String,
    pub first_violation: Option<usize>,
}

fn window_check<L, U>(g: &CoeffSeries, lower: L, upper: U, params_ok: bool, inequality: &str) -> Verdict
where
    L: Fn(usize) -> f64,
    U: Fn(usize) -> f64,
{
    const SLACK: f64 = 1e-12;
    for n in 1..=g.order() {
        let b = &g.coeffs()[n];
        let lb = if b.is_positive() { ln_abs_rational(b) } else { f64::NEG_INFINITY };
        if b.is_negative() || lb < lower(n) - SLACK * lower(n).abs().max(1.0) {
            return Verdict { holds: false, reason: format!("lower-bound at n={n}"), first_violation: Some(n) };
        }
        if lb > upper(n) + SLACK * upper(n).abs().max(1.0) {
            return Verdict { holds: false, reason: format!("upper-bound at n={n}"), first_violation: Some(n) };
        }
    }
    if !params_ok {
        return Verdict { holds: false, reason: format!("parameter-inequality {inequality} fails"), first_violation: None };
    }
    Verdict { holds: true, reason: "ok".into(), first_violation: None }
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// `Bβⁿ/n! ≤ b_n ≤ Lλⁿ/n!` on the window and `2λ < 3β`.
pub fn hayman_criterion_entire(g: &CoeffSeries, b: f64, beta: f64, l: f64, lambda: f64) -> Verdict {
    let lower = |n: usize| b.ln() + n as f64 * ln_or_neg_inf(beta) - numerics::ln_factorial(n as u64);
    let upper = |n: usize| l.ln() + n as f64 * ln_or_neg_inf(lambda) - numerics::ln_factorial(n as u64);
    window_check(g, lower, upper, 2.0 * lambda < 3.0 * beta, "2λ < 3β")
}

/// `B n^β/Rⁿ ≤ b_n ≤ L n^λ/Rⁿ` on the window and `2λ < 3β + 1`.
pub fn hayman_criterion_finite(g: &CoeffSeries, b: f64, beta: f64, l: f64, lambda: f64, r: f64) -> Verdict {
    let lower = |n: usize| b.ln() + beta * (n as f64).ln() - n as f64 * r.ln();
    let upper = |n: usize| l.ln() + lambda * (n as f64).ln() - n as f64 * r.ln();
    window_check(g, lower, upper, 2.0 * lambda < 3.0 * beta + 1.0, "2λ < 3β+1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::khinchin::{self, mass, mean, point, variance};
    use crate::series::ratio;
    use std::f64::consts::PI;

    fn fam(s: &str) -> Family {
        make_family(&s.parse().unwrap(), 4096).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn grammar_roundtrip() {
        for s in [
            "exp",
            "bernoulli",
            "binom:5",
            "geom",
            "negbinom:3",
            "poly:1,2,1/2",
            "bell",
            "P",
            "Q",
            "Pab:2,1",
            "Wab:1,1",
            "expof:poly:0,1,1",
            "canprod:1,2,4",
            "setsoflists",
            "polylog:4,1",
        ] {
            let spec: FamilySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let e = "foo".parse::<FamilySpec>().unwrap_err();
        assert_eq!(e.name(), "InvalidSpec");
        assert!(e.to_string().contains("Pab:a,b"));
        assert!("binom:0".parse::<FamilySpec>().is_err());
        assert!("poly:1,-1".parse::<FamilySpec>().is_err());
    }

    #[test]
    fn basic_means() {
        assert!(close(mean(&fam("exp"), 5.0).unwrap(), 5.0, 1e-15));
        let p = point(&fam("bell"), 2.0).unwrap();
        let e2 = 2f64.exp();
        assert!(close(p.mean, 2.0 * e2, 1e-14) && close(p.var, 6.0 * e2, 1e-14));
        let g = point(&fam("geom"), 0.5).unwrap();
        assert!(close(g.mean, 1.0, 1e-14) && close(g.var, 2.0, 1e-14));
        assert_eq!(fam("geom").radius(), 1.0);
        assert!(fam("geom").mean_sup().is_infinite());
    }

    #[test]
    fn mass_examples() {
        let e = fam("exp");
        assert!(close(mass(&e, 2.0, 3).unwrap(), (-2f64).exp() * 8.0 / 6.0, 1e-14));
        let p = fam("P");
        let lp = p.ln_f(0.5).unwrap();
        assert!(close(mass(&p, 0.5, 3).unwrap(), 3.0 / 8.0 / lp.exp(), 1e-13));
    }

    #[test]
    fn moments_examples() {
        assert!(close(khinchin::moment(&fam("exp"), 1.0, 3).unwrap(), 5.0, 1e-13));
        assert!(close(khinchin::moment(&fam("geom"), 0.5, 3).unwrap(), 13.0, 1e-13));
        assert!(close(khinchin::central_moment(&fam("exp"), 1.0, 4).unwrap(), 4.0, 1e-13));
        let b = fam("binom:7");
        assert!(close(khinchin::factorial_moment(&b, 0.3, 1).unwrap(), 7.0 * 0.3 / 1.3, 1e-14));
    }

    #[test]
    fn arithmetic_21_is_q() {
        let (a, q) = (fam("Pab:2,1"), fam("Q"));
        for &t in &[0.3, 0.6, 0.9] {
            assert!(close(a.ln_f(t).unwrap(), q.ln_f(t).unwrap(), 1e-12));
            assert!(close(mean(&a, t).unwrap(), mean(&q, t).unwrap(), 1e-12));
        }
        assert_eq!(
            exact_coeffs(&FamilySpec::ArithmeticP(2, 1), 100).unwrap(),
            exact_coeffs(&FamilySpec::DistinctQ, 100).unwrap()
        );
    }

    #[test]
    fn oracle_values() {
        let p = partitions_pentagonal(2000);
        assert_eq!(p[5], BigInt::from(7));
        assert_eq!(p[100], BigInt::from(190_569_292u64));
        assert_eq!(p, product_partitions(1..=2000, 2000));
        assert_eq!(p, euler_transform(|_| 1, 2000));
        assert_eq!(product_distinct(1..=6, 6)[6], BigInt::from(4));
        assert_eq!(bell_numbers(6)[6], BigInt::from(203));
        let m = exact_coeffs(&FamilySpec::ColoredW(1, 1), 50).unwrap();
        assert_eq!(m.coeffs()[50], rat(10_499_640_707));
        assert_eq!(exact_coeffs(&FamilySpec::SetsOfLists, 4).unwrap().coeffs()[4], ratio(73, 24));
        assert_eq!(exact_coeffs(&FamilySpec::PartitionP, 100_001).unwrap_err().name(), "TruncationTooLarge");
    }

    #[test]
    fn q_p_identities() {
        let (p, q) = (fam("P"), fam("Q"));
        for &t in &[0.3, 0.6, 0.9] {
            let lhs = q.ln_f(t).unwrap() + p.ln_f(t * t).unwrap();
            assert!((lhs - p.ln_f(t).unwrap()).abs() < 1e-10);
            let mq = mean(&p, t).unwrap() - 2.0 * mean(&p, t * t).unwrap();
            assert!(close(mean(&q, t).unwrap(), mq, 1e-10));
        }
        let ps = exact_coeffs(&FamilySpec::PartitionP, 256).unwrap();
        let p2 = CoeffSeries::from_fn(256, |k| if k % 2 == 0 { ps.coeffs()[k / 2].clone() } else { rat(0) });
        let qs = exact_coeffs(&FamilySpec::DistinctQ, 256).unwrap();
        assert_eq!(series::mul(&qs, &p2), ps);
    }

    #[test]
    fn variance_is_t_dm_dt() {
        for s in [
            "exp",
            "bell",
            "geom",
            "P",
            "Q",
            "Pab:3,2",
            "Wab:1,1",
            "Wab:2,0",
            "setsoflists",
            "binom:4",
            "canprod:1,3,9",
            "expof:poly:0,1,1",
            "polylog:4,1",
        ] {
            let f = fam(s);
            for &t in &[0.2, 0.5, 0.8] {
                let v = variance(&f, t).unwrap();
                let h = 1e-4 * t;
                let d = numerics::richardson_diff(|x| mean(&f, x).unwrap(), t, h);
                assert!(close(t * d, v, 1e-6), "{s} t={t}: {} vs {v}", t * d);
            }
        }
    }

    #[test]
    fn normalization_and_moment_sums() {
        for s in ["exp", "bell", "geom", "P", "Q", "Wab:1,1", "setsoflists", "negbinom:3", "expof:poly:0,1,1"] {
            let f = fam(s);
            for &t in &[0.1, 0.4, 0.7] {
                let w = khinchin::mass_window(&f, t, None, None).unwrap();
                let total: f64 = w.masses.iter().sum();
                assert!(total <= 1.0 + 1e-12 && total >= 1.0 - w.tail_bound - 1e-12, "{s} t={t}");
                assert!(w.tail_bound < 1e-9, "{s} t={t} tail {}", w.tail_bound);
                for k in 1..=4 {
                    let direct: f64 = w.masses.iter().enumerate().map(|(n, p)| (n as f64).powi(k as i32) * p).sum();
                    let via_stirling = khinchin::moment(&f, t, k).unwrap();
                    assert!(close(via_stirling, direct, 1e-8), "{s} t={t} k={k}: {via_stirling} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn approx_moment_examples() {
        let p = approx_moments(&FamilySpec::PartitionP).unwrap();
        assert!(close(p.mean_s(0.1), PI * PI / 0.06, 1e-13));
        let q = approx_moments(&FamilySpec::DistinctQ).unwrap();
        assert!(close(q.mean_s(0.1), ZETA2 / 0.02, 1e-13));
        let w = approx_moments(&FamilySpec::ColoredW(1, 1)).unwrap();
        assert!(close(w.mean_s(0.1), 2.0 * numerics::zeta_real(3.0).unwrap() * 1000.0, 1e-12));
        assert!(close(w.var_s(0.1), 6.0 * numerics::zeta_real(3.0).unwrap() * 1e4, 1e-12));
        assert_eq!(approx_moments(&FamilySpec::Geometric).unwrap_err().name(), "NoApproxAvailable");
        assert!(close(q.s_n(100.0).unwrap(), (ZETA2 / 200.0).sqrt(), 1e-14));
    }

    #[test]
    fn admissibility_residual_shrinks() {
        for spec in [FamilySpec::PartitionP, FamilySpec::DistinctQ, FamilySpec::ArithmeticP(2, 3), FamilySpec::ColoredW(1, 1)] {
            let f = make_family(&spec, 64).unwrap();
            let am = approx_moments(&spec).unwrap();
            let resid = |s: f64| {
                let t = (-s).exp();
                ((am.mean(t) - mean(&f, t).unwrap()) / am.var(t).sqrt()).abs()
            };
            assert!(resid(0.01) < resid(0.1), "{spec}");
        }
    }

    #[test]
    fn axis_asymptotics_approach_direct() {
        for spec in [FamilySpec::PartitionP, FamilySpec::DistinctQ, FamilySpec::ColoredW(1, 1), FamilySpec::ArithmeticP(3, 1)] {
            let f = make_family(&spec, 64).unwrap();
            let mut prev = f64::INFINITY;
            for &s in &[0.2f64, 0.1, 0.05, 0.02] {
                let direct = f.ln_f((-s).exp()).unwrap();
                let err = (axis_asymptotic(&spec, s).unwrap().ln_abs() - direct).abs();
                assert!(err < prev, "{spec} s={s}");
                prev = err;
            }
            assert!(prev < 0.02, "{spec}");
        }
        assert_eq!(axis_asymptotic(&FamilySpec::ColoredW(1, 3), 0.1).unwrap_err().name(), "NoAxisFormula");
        assert_eq!(axis_asymptotic(&FamilySpec::Exp, 0.1).unwrap_err().name(), "NoAxisFormula");
    }

    #[test]
    fn transforms() {
        let ones = CoeffSeries::from_fn(256, |k| rat(i64::from(k > 0)));
        let b = multiset_transform(&ones);
        assert_eq!(b.coeffs()[6], rat(2));
        assert_eq!(series::exp_series(&b).series, exact_coeffs(&FamilySpec::PartitionP, 256).unwrap());
        let js = CoeffSeries::from_fn(256, |k| rat(k as i64));
        let bm = multiset_transform(&js);
        assert_eq!(series::exp_series(&bm).series, exact_coeffs(&FamilySpec::ColoredW(1, 1), 256).unwrap());
        let bp = powerset_transform(&ones);
        assert_eq!(bp.coeffs()[4], ratio(1, 4));
        assert_eq!(series::exp_series(&bp).series.coeffs()[6], rat(4));
        let single = CoeffSeries::from_fn(8, |k| rat(i64::from(k == 1)));
        assert_eq!(multiset_transform(&single).coeffs()[5], ratio(1, 5));
        assert_eq!(powerset_transform(&single).coeffs()[4], ratio(-1, 4));
    }

    #[test]
    fn hayman_criteria() {
        let expm1 = CoeffSeries::exp_z(40).sub(&CoeffSeries::from_fn(40, |k| rat(i64::from(k == 0))));
        assert!(hayman_criterion_entire(&expm1, 1.0, 1.0, 1.0, 1.0).holds);
        let zez = CoeffSeries::exp_z(40).shift(1);
        let v = hayman_criterion_entire(&zez, 1.0, 1.0, 2.0, 2.0);
        assert!(!v.holds && v.reason.contains("parameter"));
        let n = 512;
        let sigma1 = CoeffSeries::from_fn(n, |m| {
            if m == 0 {
                rat(0)
            } else {
                ratio((1..=m).filter(|d| m % d == 0).sum::<usize>() as i64, m as i64)
            }
        });
        let d = (1..=n).map(|m| series::to_f64(&sigma1.coeffs()[m]) / (m as f64).powf(0.3)).fold(0.0, f64::max);
        assert!(hayman_criterion_finite(&sigma1, 1.0, 0.0, d, 0.3, 1.0).holds);
        assert!(!hayman_criterion_finite(&sigma1, 1.0, 0.0, d, 1.0, 1.0).holds);
    }
}
