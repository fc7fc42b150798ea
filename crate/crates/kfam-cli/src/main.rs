//! `kf`: exact coefficients and asymptotic estimates for Khinchin families.
//!
//! Exit codes: 0 success, 1 selftest failure, 2 usage error, 3 domain error
//! (the library error name is echoed first on stderr).

mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kfam::asym::{self, PartitionKind};
use kfam::catalog::{make_family, FamilySpec, MAX_TRUNCATION};
use kfam::khinchin::{self, Family};
use kfam::lagrange::{self, Initial, LagrangianSpec, OmmResult, Outer};
use kfam::large_powers::{self, PowerCoeffQuery, Regime, RegimeThresholds, DEFAULT_BUDGET};
use kfam::numerics::LogNumber;
use kfam::series::{CoeffSeries, DEFAULT_TRUNCATION};
use kfam::validation;

use output::{Cell, Format, Rows};

const AFTER_HELP: &str = "\
Family grammar: exp | bernoulli | binom:N | geom | negbinom:N | poly:a0,a1,... | bell | P | Q | Pab:a,b | Wab:a,b | expof:<spec> | canprod:b1,b2,... | setsoflists | polylog:p[,eps]
Output: decimals carry 12 significant digits; a log-space column x is followed by x_ln = ln=<value>; x is '-' when |ln| > 700.
Columns: coeff/lagrange/largepow: method, n, [k], value, value_ln, exact, exact_ln, ratio (exact/estimate); family: stat, t, value; diag: t, S_t, sg_integral, gaussianity; selftest: id, status, title, detail.
Environment: KF_TRUNC overrides the default truncation (4096); --trunc overrides both.
Exit codes: 0 ok, 1 selftest failure, 2 usage error, 3 domain error.";

#[derive(Parser)]
#[command(name = "kf", version, about = "Coefficients of power series via Khinchin families", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Clone)]
struct Common {
    /// Truncation order of series families (at most 100000).
    #[arg(long, global = true)]
    trunc: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    out: Format,
}

#[derive(Subcommand)]
enum Verb {
    /// Exact and estimated coefficient a_n of a family.
    Coeff {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: u64,
        /// Comma list of: exact, hayman, bd (Baez-Duarte), closed, hr, distinct, plane, mw.
        #[arg(long, default_value = "exact,hayman")]
        method: String,
        #[command(flatten)]
        common: Common,
    },
    /// Khinchin-family statistics at t.
    Family {
        #[arg(long)]
        family: String,
        #[arg(long)]
        t: f64,
        /// Comma list of: lnf, mean, var, sd, mass (needs --n), moment (needs --k), gaussianity.
        #[arg(long, default_value = "mean,var")]
        stats: String,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// COEFF_k of psi^n (times an optional prefactor h) in a chosen regime.
    Largepow {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        /// auto | comparable:a,b | limit:L[,omega] | boundary | smallk | refined:J | fixedk | largek
        #[arg(long, default_value = "auto")]
        regime: String,
        /// Prefactor family.
        #[arg(long)]
        h: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Lagrange-equation coefficients and Lagrangian distributions.
    Lagrange {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        n: u64,
        /// Comma list of: exact, omm, power (g^k, needs --k), func (H(g), needs --h),
        /// borel (Poisson offspring, needs --t; --k founders), lagrangian (psi offspring tilted at --t; --k founders),
        /// sample (Galton-Watson sampler for the lagrangian spec; --trials, --seed).
        #[arg(long, default_value = "exact,omm")]
        method: String,
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long)]
        h: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = validation::MC_SEED)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussianity diagnostics on a grid of t.
    Diag {
        #[arg(long)]
        family: String,
        /// Comma list of t values.
        #[arg(long)]
        t: String,
        /// Quadrature tolerance of the strong-Gaussian integral.
        #[arg(long, default_value_t = asym::GAUSSIAN_TOL)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance criteria; exit 0 iff all pass.
    Selftest {
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Usage(String),
    Domain(kfam::Error),
    Selftest,
}

impl From<kfam::Error> for Failure {
    fn from(e: kfam::Error) -> Self {
        Failure::Domain(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.verb) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
        Err(Failure::Selftest) => ExitCode::from(1),
    }
}

fn truncation(c: &Common) -> Run<usize> {
    let t = match c.trunc {
        Some(t) => t,
        None => match std::env::var("KF_TRUNC") {
            Ok(v) => v.trim().parse().map_err(|_| usage(format!("KF_TRUNC='{v}' is not a positive integer")))?,
            Err(_) => DEFAULT_TRUNCATION,
        },
    };
    if t == 0 || t > MAX_TRUNCATION {
        return Err(usage(format!("truncation {t} outside 1..={MAX_TRUNCATION}")));
    }
    Ok(t)
}

fn spec(s: &str) -> Run<FamilySpec> {
    Ok(s.parse::<FamilySpec>()?)
}

fn family(s: &str, trunc: usize) -> Run<Family> {
    Ok(make_family(&spec(s)?, trunc)?)
}

fn list(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).collect()
}

fn ratio_cell(exact: Option<&LogNumber>, est: &LogNumber) -> Cell {
    match exact {
        Some(e) if !e.is_zero() && !est.is_zero() => Cell::Num((e.ln_abs() - est.ln_abs()).exp()),
        _ => Cell::Missing,
    }
}

fn run(verb: Verb) -> Run<String> {
    match verb {
        Verb::Coeff { family: f, n, method, common } => coeff(&f, n, &method, &common),
        Verb::Family { family: f, t, stats, n, k, common } => family_stats(&f, t, &stats, n, k, &common),
        Verb::Largepow { psi, n, k, regime, h, common } => largepow(&psi, n, k, &regime, h.as_deref(), &common),
        Verb::Lagrange { psi, n, method, k, t, h, trials, seed, common } => {
            lagrange_verb(&LagrangeArgs { psi, n, method, k, t, h, trials, seed }, &common)
        }
        Verb::Diag { family: f, t, tol, common } => diag(&f, &t, tol, &common),
        Verb::Selftest { common } => selftest(&common),
    }
}

fn closed_kind(s: &FamilySpec) -> Run<PartitionKind> {
    match s {
        FamilySpec::PartitionP => Ok(PartitionKind::HardyRamanujan),
        FamilySpec::DistinctQ => Ok(PartitionKind::Distinct),
        FamilySpec::ArithmeticP(a, b) => Ok(PartitionKind::Ingham { a: *a, b: *b }),
        FamilySpec::ColoredW(1, 1) => Ok(PartitionKind::WrightPlane),
        FamilySpec::ColoredW(1, b) => Ok(PartitionKind::Colored { b: *b }),
        other => Err(usage(format!("no closed partition form for '{other}'"))),
    }
}

fn coeff(f: &str, n: u64, method: &str, common: &Common) -> Run<String> {
    let trunc = truncation(common)?;
    let s = spec(f)?;
    let methods = list(method);
    if methods.is_empty() {
        return Err(usage("--method is empty"));
    }
    let mut estimates: Vec<(String, LogNumber)> = Vec::new();
    let mut exact: Option<LogNumber> = None;
    let want_exact = methods.contains(&"exact");
    let mut fam: Option<Family> = None;
    for m in &methods {
        let mut get_fam = || -> Run<Family> {
            if fam.is_none() {
                fam = Some(make_family(&s, trunc)?);
            }
            Ok(fam.clone().expect("family was just built"))
        };
        let est = match *m {
            "exact" => continue,
            "hayman" => asym::hayman_estimate(&get_fam()?, n)?,
            "bd" => asym::baez_duarte_estimate(&get_fam()?, n)?,
            "closed" if s == FamilySpec::Bell => asym::moser_wyman(n)?,
            "closed" => asym::closed_partition_asym(closed_kind(&s)?, n)?,
            "hr" => asym::closed_partition_asym(PartitionKind::HardyRamanujan, n)?,
            "distinct" => asym::closed_partition_asym(PartitionKind::Distinct, n)?,
            "plane" => asym::closed_partition_asym(PartitionKind::WrightPlane, n)?,
            "mw" => asym::moser_wyman(n)?,
            other => return Err(usage(format!("unknown coeff method '{other}'"))),
        };
        estimates.push((m.to_string(), est.value));
    }
    if want_exact {
        if n as usize > trunc {
            return Err(kfam::Error::IndexBeyondTruncation(format!("n={n} > truncation {trunc}")).into());
        }
        exact = Some(asym::exact_ln_coeff(&s, n as usize)?);
    } else if n as usize <= trunc {
        exact = asym::exact_ln_coeff(&s, n as usize).ok();
    }
    let mut rows = Rows::new(&[("method", false), ("n", false), ("value", true), ("ratio", false)]);
    for m in &methods {
        if *m == "exact" {
            let e = exact.expect("exact computed when requested");
            rows.push(vec![Cell::Text("exact".into()), Cell::Int(n), Cell::Log(e), Cell::Num(1.0)]);
        } else if let Some((_, v)) = estimates.iter().find(|(name, _)| name == m) {
            rows.push(vec![Cell::Text(m.to_string()), Cell::Int(n), Cell::Log(*v), ratio_cell(exact.as_ref(), v)]);
        }
    }
    Ok(rows.render(common.out))
}

fn family_stats(f: &str, t: f64, stats: &str, n: Option<u64>, k: Option<usize>, common: &Common) -> Run<String> {
    let fam = family(f, truncation(common)?)?;
    let mut rows = Rows::new(&[("stat", false), ("t", false), ("value", false)]);
    for st in list(stats) {
        let v = match st {
            "lnf" => fam.ln_f(t)?,
            "mean" => khinchin::mean(&fam, t)?,
            "var" => khinchin::variance(&fam, t)?,
            "sd" => khinchin::variance(&fam, t)?.sqrt(),
            "mass" => khinchin::mass(&fam, t, n.ok_or_else(|| usage("stat 'mass' needs --n"))?)?,
            "moment" => khinchin::moment(&fam, t, k.ok_or_else(|| usage("stat 'moment' needs --k"))?)?,
            "gaussianity" => asym::gaussianity_ratio(&fam, t)?,
            other => return Err(usage(format!("unknown stat '{other}'"))),
        };
        rows.push(vec![Cell::Text(st.into()), Cell::Num(t), Cell::Num(v)]);
    }
    Ok(rows.render(common.out))
}

fn nums(s: &str, what: &str) -> Run<Vec<f64>> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| usage(format!("{what}: '{x}' is not a number")))).collect()
}

fn parse_regime(s: &str) -> Run<Regime> {
    let (head, rest) = s.split_once(':').map_or((s, None), |(h, r)| (h, Some(r)));
    let args = |want: usize, max: usize| -> Run<Vec<f64>> {
        let v = rest.map(|r| nums(r, "regime")).transpose()?.unwrap_or_default();
        if v.len() < want || v.len() > max {
            return Err(usage(format!("regime '{head}' takes {want}..={max} arguments")));
        }
        Ok(v)
    };
    Ok(match head {
        "auto" => Regime::Auto,
        "comparable" => {
            let v = args(2, 2)?;
            Regime::Comparable { a: v[0], b: v[1] }
        }
        "limit" => {
            let v = args(1, 2)?;
            Regime::LimitL { l: v[0], omega: v.get(1).copied().unwrap_or(0.0) }
        }
        "boundary" => Regime::BoundaryL,
        "smallk" => Regime::SmallK,
        "refined" => {
            let v = args(1, 1)?;
            if v[0] < 0.0 || v[0].fract() != 0.0 {
                return Err(usage("refined:J needs an integer J >= 0"));
            }
            Regime::SmallKRefined { j: v[0] as usize }
        }
        "fixedk" => Regime::FixedK,
        "largek" => Regime::LargeK,
        other => return Err(usage(format!("unknown regime '{other}'"))),
    })
}

fn largepow(psi: &str, n: u64, k: u64, regime: &str, h: Option<&str>, common: &Common) -> Run<String> {
    let trunc = truncation(common)?;
    let regime = parse_regime(regime)?;
    let mut q = PowerCoeffQuery::new(family(psi, trunc)?, n, k)?;
    if let Some(h) = h {
        q = q.with_prefactor(family(h, trunc)?);
    }
    let th = RegimeThresholds::default();
    let chosen = match regime {
        Regime::Auto => large_powers::auto_regime(&q, &th)?,
        r => r,
    };
    let est = large_powers::estimate(&q, chosen, &th)?;
    let exact = match large_powers::exact_power_ln(&q, DEFAULT_BUDGET) {
        Ok(v) => Some(v),
        Err(kfam::Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut rows =
        Rows::new(&[("regime", false), ("n", false), ("k", false), ("value", true), ("exact", true), ("ratio", false)]);
    rows.push(vec![
        Cell::Text(chosen.name().into()),
        Cell::Int(n),
        Cell::Int(k),
        Cell::Log(est.value),
        exact.map_or(Cell::Missing, Cell::Log),
        ratio_cell(exact.as_ref(), &est.value),
    ]);
    Ok(rows.render(common.out))
}

struct LagrangeArgs {
    psi: String,
    n: u64,
    method: String,
    k: Option<u64>,
    t: Option<f64>,
    h: Option<String>,
    trials: u64,
    seed: u64,
}

fn lagrange_verb(a: &LagrangeArgs, common: &Common) -> Run<String> {
    let trunc = truncation(common)?;
    let psi = family(&a.psi, trunc)?;
    let n = a.n;
    let mut rows = Rows::new(&[("method", false), ("n", false), ("value", true), ("exact", true), ("ratio", false)]);
    let mut push = |name: &str, est: Option<LogNumber>, exact: Option<LogNumber>| {
        let ratio = match &est {
            Some(e) => ratio_cell(exact.as_ref(), e),
            None => Cell::Missing,
        };
        rows.push(vec![
            Cell::Text(name.into()),
            Cell::Int(n),
            est.map_or(Cell::Missing, Cell::Log),
            exact.map_or(Cell::Missing, Cell::Log),
            ratio,
        ]);
    };
    let z = Outer::Poly(CoeffSeries::monomial(1, 1));
    let founders = || -> Run<u32> {
        let j = a.k.unwrap_or(1);
        u32::try_from(j).ok().filter(|&j| j >= 1).ok_or_else(|| usage(format!("--k={j} founders must be in 1..=2^32-1")))
    };
    let tilt = || a.t.ok_or_else(|| usage("this method needs --t"));
    let lagrangian = || -> Run<LagrangianSpec> {
        Ok(LagrangianSpec { psi: psi.clone(), init: Initial::Monomial(founders()?), t: tilt()?, s: 1.0 })
    };
    for m in list(&a.method) {
        match m {
            "exact" => push("exact", Some(lagrange::func_exact(&z, &psi, n)?), None),
            "omm" => {
                let exact = lagrange::func_exact(&z, &psi, n).ok();
                match lagrange::omm_estimate(&psi, n)? {
                    OmmResult::Estimate(e) => push("omm", Some(e.value), exact),
                    OmmResult::Decay(_) => push("omm-decay-certificate", None, exact),
                }
            }
            "power" => {
                let q = a.k.ok_or_else(|| usage("method 'power' needs --k"))?;
                let qs = usize::try_from(q).map_err(|_| usage("--k too large"))?;
                let zq = Outer::Poly(CoeffSeries::monomial(qs, qs));
                let exact = lagrange::func_exact(&zq, &psi, n).ok();
                push("power", Some(lagrange::power_asym(&psi, q, n, None)?.value), exact);
            }
            "func" => {
                let h = Outer::Family(family(a.h.as_deref().ok_or_else(|| usage("method 'func' needs --h"))?, trunc)?);
                let exact = lagrange::func_exact(&h, &psi, n).ok();
                push("func", Some(lagrange::func_asym(&h, &psi, n)?.value), exact);
            }
            "borel" => {
                let (t, j) = (tilt()?, u64::from(founders()?));
                let exact = LogNumber::from_ln(lagrange::borel_tanner_ln_pmf(t, j, n)?);
                push("borel", Some(lagrange::borel_tanner_asym(t, j, n)?.value), Some(exact));
            }
            "lagrangian" => {
                let sp = lagrangian()?;
                let exact = lagrange::lagrangian_pmf_exact(&sp, n)?;
                push("lagrangian", Some(lagrange::general_lagrangian_asym(&sp, n)?.value), Some(exact));
            }
            "sample" => {
                let sp = lagrangian()?;
                let s = lagrange::gw_sample(&sp, a.trials, a.seed, lagrange::GW_NODE_CAP)?;
                let freq = s.frequency(usize::try_from(n).map_err(|_| usage("--n too large"))?);
                let exact = lagrange::lagrangian_pmf_exact(&sp, n).ok();
                let est = if freq > 0.0 { Some(LogNumber::from_f64(freq)) } else { Some(LogNumber::ZERO) };
                push("sample", est, exact);
            }
            other => return Err(usage(format!("unknown lagrange method '{other}'"))),
        }
    }
    Ok(rows.render(common.out))
}

fn diag(f: &str, t: &str, tol: f64, common: &Common) -> Run<String> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(usage(format!("--tol={tol} must be > 0")));
    }
    let fam = family(f, truncation(common)?)?;
    let mut rows = Rows::new(&[("t", false), ("S_t", false), ("sg_integral", false), ("gaussianity", false)]);
    for t in nums(t, "--t")? {
        rows.push(vec![
            Cell::Num(t),
            Cell::Num(asym::local_clt_sup(&fam, t, None)?),
            Cell::Num(asym::strong_gaussian_integral_with_tol(&fam, t, tol)?),
            Cell::Num(asym::gaussianity_ratio(&fam, t)?),
        ]);
    }
    Ok(rows.render(common.out))
}

fn selftest(common: &Common) -> Run<String> {
    let reports = validation::run_all();
    let mut rows = Rows::new(&[("id", false), ("status", false), ("title", false), ("detail", false)]);
    for r in &reports {
        rows.push(vec![
            Cell::Int(u64::from(r.id)),
            Cell::Text(if r.passed { "PASS" } else { "FAIL" }.into()),
            Cell::Text(r.title.into()),
            Cell::Text(r.detail.clone()),
        ]);
    }
    print!("{}", rows.render(common.out));
    if reports.iter().all(|r| r.passed) {
        Ok(String::new())
    } else {
        Err(Failure::Selftest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes_parse() {
        assert!(matches!(parse_regime("limit:0.5").ok(), Some(Regime::LimitL { l, omega }) if l == 0.5 && omega == 0.0));
        assert!(matches!(parse_regime("refined:2").ok(), Some(Regime::SmallKRefined { j: 2 })));
        assert!(parse_regime("comparable:0.1").is_err());
        assert!(parse_regime("sideways").is_err());
    }

    #[test]
    fn closed_kinds_follow_the_family() {
        assert!(matches!(closed_kind(&FamilySpec::ColoredW(1, 1)).ok(), Some(PartitionKind::WrightPlane)));
        assert!(closed_kind(&FamilySpec::Exp).is_err());
    }

    #[test]
    fn catalog_exposes_the_grammar() {
        assert!(kfam::catalog::GRAMMAR.contains("poly:"));
    }
}
