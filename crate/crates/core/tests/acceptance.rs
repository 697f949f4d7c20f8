//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftgcd::adversary::{
    crt_hard_instance, verify_hard_instance, DEFAULT_PRIME_LIMIT, DEFAULT_VERIFY_LIMIT,
};
use shiftgcd::bhconstants::{constants, gamma_of, theta};
use shiftgcd::cli::execute;
use shiftgcd::coprime::{
    ell_exact, greedy_bound_audit, DEFAULT_AUDIT_SIEVE_CAP, DEFAULT_LEVEL_LIMIT,
};
use shiftgcd::linform::{
    bound_audit, convergence_sweep, r_brute, r_mobius, u_d, u_d_brute, DEFAULT_R_BRUTE_LIMIT,
    DEFAULT_UD_BRUTE_LIMIT, DEFAULT_WORK_BUDGET,
};
use shiftgcd::numbercore::{gcd_vec, height, IntVector};
use shiftgcd::shiftsearch::{
    brute_force_shifted_gcd, certify, exponent_experiment, max_shifted_gcd_with, SearchOptions,
    DEFAULT_ENUMERATION_LIMIT,
};

// Thresholds.
const CONVERGENCE_GAP_MAX: f64 = 0.1;
const KAPPA_RESIDUAL_MAX: f64 = 1e-12;
const GREEDY_RATIO_CEILING: f64 = 25.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn v(xs: &[i64]) -> IntVector {
    IntVector::from_i64s(xs).unwrap()
}

fn err(e: shiftgcd::Error) -> String {
    e.to_string()
}

fn mobius_identity() -> Outcome {
    let examples = [
        (v(&[1, 1]), 1, 0u64),
        (v(&[1, 1]), 2, 8),
        (v(&[1, 2]), 1, 0),
    ];
    for (a, h, want) in &examples {
        let m = r_mobius(a, *h, DEFAULT_WORK_BUDGET).map_err(err)?;
        let b = r_brute(a, *h, DEFAULT_R_BRUTE_LIMIT).map_err(err)?;
        check(m == b && m == (*want).into(), || {
            format!("a={a}, h={h}: mobius {m}, brute {b}, expected {want}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let n = rng.gen_range(2..=3);
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
        let g = raw.iter().fold(0, |g, x| g.gcd(x));
        let a = v(&raw.iter().map(|x| x / g).collect::<Vec<_>>());
        let h = rng.gen_range(1..=6);
        let m = r_mobius(&a, h, DEFAULT_WORK_BUDGET).map_err(err)?;
        let b = r_brute(&a, h, DEFAULT_R_BRUTE_LIMIT).map_err(err)?;
        check(m == b, || format!("a={a}, h={h}: mobius {m} != brute {b}"))?;
    }
    Ok("50 random instances and 3 worked examples agree exactly".into())
}

fn convergence() -> Outcome {
    let rows = convergence_sweep(&v(&[1, 2]), &[8, 32], DEFAULT_WORK_BUDGET).map_err(err)?;
    let (g8, g32) = (rows[0].gap, rows[1].gap);
    check(g32 < g8, || {
        format!("gap at h=32 ({g32}) is not below gap at h=8 ({g8})")
    })?;
    check(g32 <= CONVERGENCE_GAP_MAX, || {
        format!("gap at h=32 is {g32} > {CONVERGENCE_GAP_MAX}")
    })?;
    Ok(format!("gap(8) = {g8:.6}, gap(32) = {g32:.6}"))
}

fn ud_bounds() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut asymptotic, mut squarefree) = (0, 0);
    for i in 0..200 {
        let n = rng.gen_range(2..=3usize);
        let a = loop {
            let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
            let a = v(&raw);
            if gcd_vec(&a).is_one() {
                break a;
            }
        };
        let h = rng.gen_range(1..=40u64);
        // Alternate between the asymptotic range and the full truncation range.
        let top = if i % 2 == 0 {
            (2 * h / (3 * n as u64)).max(1)
        } else {
            (height(&a) * n * h).to_u64().unwrap()
        };
        let d = rng.gen_range(1..=top);
        let audit = bound_audit(&a, h, &[d]).map_err(err)?;
        let row = &audit.rows[0];
        check(audit.violations == 0, || {
            format!("a={a}, h={h}, d={d}: {row:?}")
        })?;
        asymptotic += usize::from(row.asymptotic.is_some());
        squarefree += usize::from(row.squarefree_bound.is_some());
    }
    Ok(format!(
        "200 samples, 0 violations ({asymptotic} asymptotic checks, {squarefree} squarefree checks)"
    ))
}

fn shift_exactness() -> Outcome {
    let mut count = 0;
    for a1 in 1..=30 {
        for a2 in 1..=30 {
            let a = v(&[a1, a2]);
            for h in 0..=2u64 {
                let opts = SearchOptions {
                    allow_large_shift: h >= a1.min(a2) as u64,
                    ..SearchOptions::default()
                };
                let fast = max_shifted_gcd_with(&a, h, &opts).map_err(err)?;
                let slow =
                    brute_force_shifted_gcd(&a, h, DEFAULT_ENUMERATION_LIMIT).map_err(err)?;
                check(fast.d == slow.d, || {
                    format!("a={a}, H={h}: scan {} != brute {}", fast.d, slow.d)
                })?;
                certify(&a, h, &fast).map_err(err)?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} instances agree, all witnesses certified"))
}

fn exponent_empirics() -> Outcome {
    let records = exponent_experiment(2, 0.5, 1_000_000, 50, 5).map_err(err)?;
    let th = theta(2, 0.5).map_err(err)?;
    for r in &records {
        check(r.d >= BigInt::from(2 * r.height_bound), || {
            format!("a={:?}: d = {} < 2H = {}", r.a, r.d, 2 * r.height_bound)
        })?;
    }
    let mut exps: Vec<f64> = records.iter().map(|r| r.exponent).collect();
    exps.sort_by(f64::total_cmp);
    let median = 0.5 * (exps[24] + exps[25]);
    check(median >= 1.0 + th, || {
        format!("median exponent {median} < 1 + theta = {}", 1.0 + th)
    })?;
    Ok(format!(
        "H = {}, median exponent {median:.4} >= 1 + theta = {:.4}",
        records[0].height_bound,
        1.0 + th
    ))
}

fn constants_grid() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=10 {
        for k in 1..=9 {
            let eps = k as f64 / 10.0;
            let c = constants(n, eps).map_err(err)?;
            check(c.residual < KAPPA_RESIDUAL_MAX, || {
                format!("n={n}, eps={eps}: residual {}", c.residual)
            })?;
            check(eps * c.kappa > 1.0, || {
                format!("n={n}, eps={eps}: eps*kappa = {}", eps * c.kappa)
            })?;
            check(c.theta > 0.0, || {
                format!("n={n}, eps={eps}: theta = {}", c.theta)
            })?;
            worst = worst.max(c.residual);
        }
    }
    check(gamma_of(1.0) == 0.25, || {
        format!("gamma(1) = {}", gamma_of(1.0))
    })?;
    Ok(format!(
        "81 grid points, worst residual {worst:.2e}, gamma(1) = 0.25"
    ))
}

fn greedy_coprime() -> Outcome {
    let (mut worst, mut checks) = (0.0f64, 0);
    for n in 2..=6 {
        let audit = greedy_bound_audit(
            200,
            n,
            1_000_000_000_000,
            7 + n as u64,
            DEFAULT_AUDIT_SIEVE_CAP,
        )
        .map_err(err)?;
        check(audit.certificate_failures == 0, || {
            format!("n={n}: {} certificate failures", audit.certificate_failures)
        })?;
        check(audit.jacobsthal_violations == 0, || {
            format!(
                "n={n}: {} Jacobsthal step violations",
                audit.jacobsthal_violations
            )
        })?;
        check(audit.max_ratio <= GREEDY_RATIO_CEILING, || {
            format!("n={n}: ratio {} > {GREEDY_RATIO_CEILING}", audit.max_ratio)
        })?;
        worst = worst.max(audit.max_ratio);
        checks += audit.jacobsthal_checks;
    }
    Ok(format!(
        "1000 instances certified, max ratio {worst:.3}, {checks} Jacobsthal step checks"
    ))
}

fn crt_adversary() -> Outcome {
    let cases = [
        (1, 1),
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 1),
        (2, 2),
        (3, 1),
    ];
    for (n, h) in cases {
        let inst = crt_hard_instance(n, h, DEFAULT_PRIME_LIMIT).map_err(err)?;
        let cert = verify_hard_instance(&inst, DEFAULT_VERIFY_LIMIT).map_err(err)?;
        check(cert.passed, || format!("n={n}, H={h}: {cert:?}"))?;
    }
    let inst = crt_hard_instance(2, 1, DEFAULT_PRIME_LIMIT).map_err(err)?;
    let ell = ell_exact(&inst.vector().map_err(err)?, DEFAULT_LEVEL_LIMIT).map_err(err)?;
    check(ell.height >= 2, || {
        format!("ell = {} for the (2, 1) instance", ell.height)
    })?;
    let one = crt_hard_instance(1, 1, DEFAULT_PRIME_LIMIT).map_err(err)?;
    check(one.a == [BigInt::from(9)], || {
        format!("n=1, H=1 gives {:?}", one.a)
    })?;
    Ok(format!(
        "{} instances verified, ell(2,1) = {}, a_1 = 9",
        cases.len(),
        ell.height
    ))
}

fn ud_oracle_grid() -> Outcome {
    let mut count = 0;
    let mut grid: Vec<Vec<i64>> = Vec::new();
    for x in 1..=10 {
        for y in 1..=10 {
            grid.push(vec![x, y]);
            for z in 1..=10 {
                grid.push(vec![x, y, z]);
            }
        }
    }
    for raw in &grid {
        let a = v(raw);
        for h in 1..=8 {
            for d in 1..=50 {
                let fast = u_d(&a, h, d).map_err(err)?;
                let slow = u_d_brute(&a, h, d, DEFAULT_UD_BRUTE_LIMIT).map_err(err)?;
                check(fast == slow, || {
                    format!("a={a}, h={h}, d={d}: {fast} != {slow}")
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (a, h, d) points agree"))
}

fn cli_determinism() -> Outcome {
    let runs: [&[&str]; 3] = [
        &[
            "shiftgcd",
            "exponent-sweep",
            "--n",
            "2",
            "--eps",
            "0.5",
            "--scale",
            "10000",
            "--trials",
            "5",
            "--seed",
            "9",
        ],
        &[
            "shiftgcd",
            "greedy-audit",
            "--n",
            "3",
            "--samples",
            "20",
            "--magnitude",
            "1000000",
            "--seed",
            "4",
        ],
        &[
            "shiftgcd",
            "bound-audit",
            "--a",
            "1,2,3",
            "--h",
            "12",
            "--samples",
            "10",
            "--seed",
            "2",
            "--format",
            "csv",
        ],
    ];
    for args in runs {
        let (x, y) = (execute(args), execute(args));
        check(x.code == 0 && x == y, || {
            format!("{args:?} not reproducible: {x:?}")
        })?;
    }
    let malformed: [&[&str]; 4] = [
        &["shiftgcd", "max-gcd-shift", "--a", "4,x", "--H", "1"],
        &["shiftgcd", "constants", "--n", "2", "--eps", "1.5"],
        &["shiftgcd", "max-gcd-shift", "--a", "4,6"],
        &["shiftgcd", "max-gcd-shift", "--a", "4,6", "--H", "5"],
    ];
    for args in malformed {
        let out = execute(args);
        check(out.code == 2, || {
            format!("{args:?} exited {} not 2", out.code)
        })?;
    }
    let guarded: [&[&str]; 3] = [
        &[
            "shiftgcd",
            "jacobsthal",
            "--m",
            "223092870",
            "--guard",
            "1000",
        ],
        &[
            "shiftgcd",
            "l-exact",
            "--a",
            "6,6,6,6,6,6,6,6",
            "--guard",
            "1000",
        ],
        &[
            "shiftgcd", "count-r", "--a", "1,2", "--h", "50", "--method", "brute", "--guard",
            "1000",
        ],
    ];
    for args in guarded {
        let out = execute(args);
        check(out.code == 3, || {
            format!("{args:?} exited {} not 3", out.code)
        })?;
    }
    Ok("3 seeded runs byte-identical, 4 malformed inputs exit 2, 3 guard trips exit 3".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Moebius identity equals brute count", 30, mobius_identity),
        ("convergence to 6/pi^2", 60, convergence),
        ("U_d bound audit", 60, ud_bounds),
        ("shifted gcd exactness", 20, shift_exactness),
        ("shifted gcd exponent empirics", 60, exponent_empirics),
        ("constants grid", 1, constants_grid),
        ("greedy coprime shifting", 120, greedy_coprime),
        ("CRT adversary", 30, crt_adversary),
        ("U_d oracle grid", 30, ud_oracle_grid),
        ("CLI determinism and exit codes", 5, cli_determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= Duration::from_secs(*budget) {
                Ok(detail)
            } else {
                Err(format!(
                    "{detail}; but took {elapsed:.2?}, budget {budget} s"
                ))
            }
        });
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {:>2} {name}: {detail} [{elapsed:.2?}]",
                i + 1
            ),
            Err(detail) => {
                failures += 1;
                println!(
                    "FAIL criterion {:>2} {name}: {detail} [{elapsed:.2?}]",
                    i + 1
                );
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
