//! Acceptance criteria: each check compares an estimator with an exact oracle
//! at a stated tolerance and reports PASS or FAIL with the observed numbers.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::asym::{self, PartitionKind};
use crate::catalog::{self, make_family, FamilySpec};
use crate::error::Result;
use crate::khinchin::{self, Family};
use crate::lagrange::{self, LagrangianSpec};
use crate::large_powers::{self, PowerCoeffQuery, DEFAULT_BUDGET};
use crate::numerics::{self, LogNumber};
use crate::series::{self, ratio, CoeffSeries};

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!("{} criterion {:>2} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.id, self.title, self.detail)
    }
}

pub const TITLES: [&str; 12] = [
    "Stirling via Hayman",
    "Hardy-Ramanujan ratios",
    "Baez-Duarte vs Hayman for P",
    "distinct and plane partitions",
    "Moser-Wyman",
    "Lagrange exactness triangle",
    "Otter-Meir-Moon",
    "Borel-Tanner identity",
    "large powers, comparable regime",
    "large powers, small k",
    "property suite",
    "Monte Carlo Borel sampler",
];

/// Closed-form/exact ratios frozen from the exact oracles, with a band half-width.
pub const BAND: f64 = 0.002;
pub const FROZEN_HR: [(u64, f64); 5] = [(50, 1.065440), (100, 1.045714), (200, 1.032029), (500, 1.020095), (1000, 1.014152)];
pub const FROZEN_DISTINCT: [(u64, f64); 4] = [(50, 1.026199), (100, 1.017964), (200, 1.012475), (500, 1.007765)];
pub const FROZEN_PLANE: [(u64, f64); 4] = [(50, 1.018144), (100, 1.011320), (200, 1.007088), (500, 1.003830)];
pub const FROZEN_MOSER_WYMAN: [(u64, f64); 4] = [(20, 1.015327), (50, 1.007238), (100, 1.004062), (200, 1.002260)];

/// Seed of the Monte Carlo criterion.
pub const MC_SEED: u64 = 0x5EED_B07E;
pub const MC_TRIALS: u64 = 100_000;

pub fn run(id: u8) -> CriterionReport {
    let start = Instant::now();
    let out = match id {
        1 => c1_stirling(),
        2 => c2_hardy_ramanujan(),
        3 => c3_baez_duarte(),
        4 => c4_distinct_plane(),
        5 => c5_moser_wyman(),
        6 => c6_triangle(),
        7 => c7_omm(),
        8 => c8_borel_tanner(),
        9 => c9_comparable(),
        10 => c10_small_k(),
        11 => c11_properties(),
        12 => c12_monte_carlo(),
        _ => Ok((false, format!("unknown criterion {id}"))),
    };
    let secs = start.elapsed().as_secs_f64();
    let limit = match id {
        1 => Some(1.0),
        2 => Some(5.0),
        11 => Some(60.0),
        _ => None,
    };
    let (mut passed, mut detail) = out.unwrap_or_else(|e| (false, format!("error {}: {e}", e.name())));
    if let Some(l) = limit {
        let _ = write!(detail, "; runtime {secs:.2}s (limit {l}s)");
        // timing limits are stated for optimized builds
        if cfg!(not(debug_assertions)) && secs > l {
            passed = false;
        }
    } else {
        let _ = write!(detail, "; runtime {secs:.2}s");
    }
    CriterionReport { id, title: TITLES[(id as usize).saturating_sub(1).min(11)], passed, detail }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=12).map(run).collect()
}

type Outcome = Result<(bool, String)>;

fn fam(spec: &str) -> Result<Family> {
    make_family(&spec.parse()?, 20_000)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[(u64, f64)]) -> String {
    v.iter().map(|(n, r)| format!("{n}:{r:.6}")).collect::<Vec<_>>().join(" ")
}

fn c1_stirling() -> Outcome {
    let e = fam("exp")?;
    let mut ok = true;
    let mut obs = Vec::new();
    for n in [10u64, 50, 100, 500] {
        let est = asym::hayman_estimate(&e, n)?;
        let r = est.ratio_from(&LogNumber::from_ln(-numerics::ln_factorial(n)));
        ok &= (r - 1.0).abs() <= 1.0 / (8.0 * n as f64);
        obs.push((n, r));
    }
    Ok((ok, format!("exact/estimate {}; bound 1/(8n)", fmt_list(&obs))))
}

fn partition_ratios(kind: PartitionKind, exact: &[BigInt], grid: &[u64]) -> Result<Vec<(u64, f64)>> {
    grid.iter()
        .map(|&n| {
            let c = asym::closed_partition_asym(kind, n)?;
            Ok((n, (c.ln() - LogNumber::from_bigint(&exact[n as usize]).ln_abs()).exp()))
        })
        .collect()
}

fn in_bands(obs: &[(u64, f64)], frozen: &[(u64, f64)]) -> bool {
    obs.iter().zip(frozen).all(|((n, r), (m, f))| n == m && (r - f).abs() <= BAND)
}

fn c2_hardy_ramanujan() -> Outcome {
    let p = catalog::partitions_pentagonal(1000);
    let grid: Vec<u64> = FROZEN_HR.iter().map(|x| x.0).collect();
    let obs = partition_ratios(PartitionKind::HardyRamanujan, &p, &grid)?;
    let r: Vec<f64> = obs.iter().map(|x| x.1).collect();
    let at100 = r[1];
    let ok = (1.02..=1.07).contains(&at100) && strictly_decreasing(&r) && r[4] < 1.03 && in_bands(&obs, &FROZEN_HR);
    Ok((ok, format!("closed/exact {}; n=100 in [1.02, 1.07]; frozen bands ±{BAND}", fmt_list(&obs))))
}

fn c3_baez_duarte() -> Outcome {
    let p = fam("P")?;
    let mut ok = true;
    let mut obs = Vec::new();
    let mut pred = Vec::new();
    for n in [100u64, 500, 1000] {
        let bd = asym::baez_duarte_estimate(&p, n)?;
        let h = asym::hayman_estimate(&p, n)?;
        let r = (bd.ln() - h.ln()).exp();
        ok &= (r - 1.0).abs() <= 0.01;
        obs.push((n, r));
        let s = PI / (6.0 * n as f64).sqrt();
        pred.push((n, 1.0 + 15.0 * s / (8.0 * PI * PI)));
    }
    Ok((
        ok,
        format!("baez-duarte/hayman {}; second-order prediction 1+15s/(8π²) {}; tolerance 1%", fmt_list(&obs), fmt_list(&pred)),
    ))
}

fn c4_distinct_plane() -> Outcome {
    let grid: Vec<u64> = FROZEN_DISTINCT.iter().map(|x| x.0).collect();
    let q = catalog::product_distinct(1..=500, 500);
    let dq = partition_ratios(PartitionKind::Distinct, &q, &grid)?;
    let plane = catalog::euler_transform(|j| j as u64, 500);
    let dp = partition_ratios(PartitionKind::WrightPlane, &plane, &grid)?;
    let rq: Vec<f64> = dq.iter().map(|x| x.1).collect();
    let rp: Vec<f64> = dp.iter().map(|x| x.1).collect();
    let ok =
        strictly_decreasing(&rq) && strictly_decreasing(&rp) && in_bands(&dq, &FROZEN_DISTINCT) && in_bands(&dp, &FROZEN_PLANE);
    Ok((ok, format!("distinct {}; plane {}; frozen bands ±{BAND}", fmt_list(&dq), fmt_list(&dp))))
}

fn c5_moser_wyman() -> Outcome {
    let b = catalog::exact_coeffs(&FamilySpec::Bell, 200)?;
    let mut obs = Vec::new();
    for (n, _) in FROZEN_MOSER_WYMAN {
        let est = asym::moser_wyman(n)?;
        let exact = LogNumber::from_ratio(&b.coeffs()[n as usize]);
        obs.push((n, (est.ln() - exact.ln_abs()).exp()));
    }
    let r: Vec<f64> = obs.iter().map(|x| x.1).collect();
    let ok = strictly_decreasing(&r) && in_bands(&obs, &FROZEN_MOSER_WYMAN);
    Ok((ok, format!("estimate/exact {}; frozen bands ±{BAND}", fmt_list(&obs))))
}

fn c6_triangle() -> Outcome {
    const ORDER: usize = 64;
    let psis = [
        ("exp", CoeffSeries::exp_z(ORDER)),
        ("1+z", CoeffSeries::from_integers(&[1, 1], ORDER)),
        ("1/(1-z)", CoeffSeries::geometric(ORDER)),
        ("1+z+z^2", CoeffSeries::from_integers(&[1, 1, 1], ORDER)),
    ];
    let z = CoeffSeries::monomial(1, ORDER);
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, psi) in &psis {
        let inv = series::lagrange_invert(psi, ORDER)?;
        let fp = series::lagrange_fixed_point(psi, ORDER)?;
        let mut agree = inv == fp;
        for n in 1..=ORDER {
            agree &= lagrange::extended_coeff(&z, psi, n)? == inv.coeffs()[n];
        }
        ok &= agree;
        notes.push(format!("{name}:{}", if agree { "equal" } else { "MISMATCH" }));
    }
    Ok((ok, format!("order {ORDER}, exact rationals: {}", notes.join(" "))))
}

fn c7_omm() -> Outcome {
    let e = fam("exp")?;
    let mut ok = true;
    let mut obs = Vec::new();
    for n in [5u64, 20, 100] {
        let est = lagrange::omm_estimate(&e, n)?
            .estimate()
            .ok_or_else(|| crate::Error::DomainError("unexpected decay certificate".into()))?;
        let nf = n as f64;
        let exact = LogNumber::from_ln((nf - 1.0) * nf.ln() - numerics::ln_factorial(n));
        let r = est.ratio_from(&exact);
        ok &= (r - 1.0).abs() <= 1.0 / (4.0 * nf);
        obs.push((n, r));
    }
    Ok((ok, format!("exact/estimate {}; bound 1/(4n)", fmt_list(&obs))))
}

fn c8_borel_tanner() -> Outcome {
    let ts = [ratio(1, 2), ratio(3, 4), ratio(1, 1)];
    let mut cells = 0;
    let mut equal = 0;
    for t in &ts {
        for j in 1..=3u64 {
            for n in j..j + 20 {
                cells += 1;
                if lagrange::borel_tanner_scaled(t, j, n)? == lagrange::borel_tanner_via_powers(t, j, n)? {
                    equal += 1;
                }
            }
        }
    }
    let mut ok = equal == cells;
    let mut obs = Vec::new();
    for (t, j) in [(0.5, 3u64), (1.0, 1)] {
        let r = (lagrange::borel_tanner_ln_pmf(t, j, 200)? - lagrange::borel_tanner_asym(t, j, 200)?.ln()).exp();
        ok &= (r - 1.0).abs() <= 0.02;
        obs.push(format!("t={t},j={j}:{r:.6}"));
    }
    Ok((ok, format!("identity exact on {equal}/{cells} cells; pmf/asym at n=200 {}; tolerance 2%", obs.join(" "))))
}

fn c9_comparable() -> Outcome {
    let b = fam("bernoulli")?;
    let mut ok = true;
    let mut obs = Vec::new();
    for n in [100u64, 1000] {
        let q = PowerCoeffQuery::new(b.clone(), n, n / 2)?;
        let est = large_powers::estimate_limit_l(&q, 0.5, 0.0)?;
        let exact = large_powers::exact_power_ln(&q, DEFAULT_BUDGET)?;
        let r = (est.ln() - exact.ln_abs()).exp();
        let pass = (r - 1.0).abs() <= 1.0 / (4.0 * n as f64);
        ok &= pass;
        obs.push(format!("n={n}: est/exact−1={:.4e} vs 1/(4n)={:.4e}", r - 1.0, 1.0 / (4.0 * n as f64)));
    }
    let n = 10_000u64;
    let lambda = 1.0;
    let k = (n as f64 / 2.0 + lambda * (n as f64).sqrt()).floor() as u64;
    let q = PowerCoeffQuery::new(b.clone(), n, k)?;
    let q0 = PowerCoeffQuery::new(b, n, n / 2)?;
    let corr = large_powers::estimate_limit_l(&q, 0.5, lambda)?.ln() - large_powers::estimate_limit_l(&q, 0.5, 0.0)?.ln();
    let exact =
        large_powers::exact_power_ln(&q, DEFAULT_BUDGET)?.ln_abs() - large_powers::exact_power_ln(&q0, DEFAULT_BUDGET)?.ln_abs();
    let rel = (exact - corr).exp() - 1.0;
    ok &= (corr + 2.0 * lambda * lambda).abs() < 1e-12 && rel.abs() <= 0.05;
    obs.push(format!("λ=1, n=10⁴: exact ratio/e^(−2λ²) − 1 = {rel:.4e} (tolerance 5%)"));
    Ok((ok, obs.join("; ")))
}

fn c10_small_k() -> Outcome {
    let n = 10_000u64;
    let k = (n as f64).sqrt().floor() as u64;
    let q = PowerCoeffQuery::new(fam("exp")?, n, k)?;
    let est = large_powers::estimate_small_k_refined(&q, 2)?;
    let exact = LogNumber::from_ln(k as f64 * (n as f64).ln() - numerics::ln_factorial(k));
    let r = est.ratio_from(&exact);
    let mut ok = (r - 1.0).abs() <= 0.02;
    let psis = [
        CoeffSeries::from_integers(&[1, 1], 8),
        CoeffSeries::from_integers(&[1, 1, 1], 8),
        CoeffSeries::from_integers(&[1, 0, 1], 8),
        CoeffSeries::exp_z(8),
    ];
    let mut cells = 0;
    let mut equal = 0;
    for psi in &psis {
        for kk in 0..=8usize {
            let poly = large_powers::fixed_k_polynomial(psi, kk)?;
            for nn in 1..=50u64 {
                cells += 1;
                let want: BigRational = series::power_series(psi, nn, kk).coeffs()[kk].clone();
                if poly.eval(nn) == want {
                    equal += 1;
                }
            }
        }
    }
    ok &= equal == cells;
    Ok((ok, format!("refined J=2 exact/estimate {r:.6} (tolerance 2%); fixed-k exact on {equal}/{cells} cells")))
}

fn c11_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let cases = [("exp", 5.0), ("geom", 0.5), ("P", 0.9), ("bell", 2.0), ("binom:7", 1.3)];
    for (s, t) in cases {
        let f = fam(s)?;
        let w = khinchin::mass_window(&f, t, None, None)?;
        let total: f64 = w.masses.iter().sum();
        check(&format!("normalization {s}"), total <= 1.0 + 1e-12 && total >= 1.0 - w.tail_bound - 1e-12);
        let p = khinchin::point(&f, t)?;
        let dm = numerics::richardson_diff(|x| khinchin::mean(&f, x).unwrap_or(f64::NAN), t, 1e-3 * t);
        check(&format!("variance law {s}"), ((t * dm) / p.var - 1.0).abs() <= 1e-6);
        for k in 1..=4usize {
            let direct: f64 = w.masses.iter().enumerate().map(|(n, m)| (n as f64).powi(k as i32) * m).sum();
            let via = khinchin::moment(&f, t, k)?;
            check(&format!("moment {s} k={k}"), (via / direct - 1.0).abs() <= 1e-8);
        }
        for i in 0..64 {
            let th = -PI + 2.0 * PI * i as f64 / 63.0;
            if let Ok(c) = khinchin::charfn(&f, t, th) {
                check(&format!("|charfn| {s}"), c.norm() <= 1.0 + 1e-12);
            }
        }
    }
    let e = fam("exp")?;
    let g = fam("geom")?;
    let pr = Family::product(&e, &g);
    let (pa, pb, pp) = (khinchin::point(&e, 0.5)?, khinchin::point(&g, 0.5)?, khinchin::point(&pr, 0.5)?);
    check("product mean", (pp.mean - pa.mean - pb.mean).abs() <= 1e-10 * pp.mean);
    check("product variance", (pp.var - pa.var - pb.var).abs() <= 1e-10 * pp.var);
    let sub = Family::subordinate(&g, 3);
    let (ps, pg) = (khinchin::point(&sub, 0.7)?, khinchin::point(&g, 0.7f64.powi(3))?);
    check("subordination mean", (ps.mean - 3.0 * pg.mean).abs() <= 1e-10 * ps.mean);
    check("subordination variance", (ps.var - 9.0 * pg.var).abs() <= 1e-10 * ps.var);
    for (s, t) in [("exp", 20.0), ("P", 0.95), ("bernoulli", 3.0)] {
        let z = khinchin::zero_free_halfwidth(&fam(s)?, t)?;
        check(&format!("zero-free {s}"), z.verified == Some(true));
    }
    let grid = [10.0, 100.0, 1000.0];
    let lclt = grid.iter().map(|&t| asym::local_clt_sup(&e, t, None)).collect::<Result<Vec<_>>>()?;
    check("local CLT decreasing", strictly_decreasing(&lclt));
    let sg = grid.iter().map(|&t| asym::strong_gaussian_integral(&e, t)).collect::<Result<Vec<_>>>()?;
    check("strong Gaussian decreasing", strictly_decreasing(&sg));
    for (s, t, lam) in [("exp", 50.0, 0.5), ("P", 0.9, 0.05), ("geom", 0.5, 0.3)] {
        let f = fam(s)?;
        let w = khinchin::mass_window(&f, t, None, None)?;
        let m = khinchin::mean(&f, t)?;
        let sd = khinchin::variance(&f, t)?.sqrt();
        for mult in [0.5, 1.0, 2.0, 3.0] {
            let y = mult * sd;
            let emp: f64 = w.masses.iter().enumerate().filter(|(n, _)| (*n as f64 - m).abs() >= y).map(|(_, p)| p).sum();
            let b = khinchin::chernoff_bound(&f, t, y, lam)?;
            check(&format!("chernoff {s} y={mult}σ"), emp <= b.bound + w.tail_bound);
        }
    }
    let ok = failures.is_empty();
    let detail = if ok { "all invariants hold".to_string() } else { format!("violations: {}", failures.join(", ")) };
    Ok((ok, detail))
}

fn c12_monte_carlo() -> Outcome {
    let spec = LagrangianSpec::borel(fam("exp")?, 0.5, 1);
    let a = lagrange::gw_sample(&spec, MC_TRIALS, MC_SEED, lagrange::GW_NODE_CAP)?;
    let b = lagrange::gw_sample(&spec, MC_TRIALS, MC_SEED, lagrange::GW_NODE_CAP)?;
    let replay = format!("{:?}", a) == format!("{:?}", b);
    let mut cells = 0;
    let mut inside = 0;
    let mut worst = 0.0f64;
    for n in 1..=200u64 {
        let p = lagrange::borel_tanner_pmf(0.5, 1, n)?;
        if p < 1e-3 {
            continue;
        }
        cells += 1;
        let sd = (p * (1.0 - p) / MC_TRIALS as f64).sqrt();
        let z = (a.frequency(n as usize) - p).abs() / sd;
        worst = worst.max(z);
        if z <= 4.0 {
            inside += 1;
        }
    }
    let ok = replay && inside == cells && cells > 0 && a.censored == 0;
    Ok((ok, format!("{inside}/{cells} cells within 4σ (max |z|={worst:.2}); replay identical: {replay}; seed {MC_SEED:#x}")))
}
