//! End-to-end acceptance checks. Each criterion prints one PASS or FAIL
//! line with its wall time; the process exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sphere_re_core::dynamics::verify_rigid_rotation;
use sphere_re_core::equations::rigid_rotation_residual;
use sphere_re_core::euler::{
    contour_scan, cotangent_g, critical_angle_ac, equal_mass_isosceles, euler_quintic, newtonian_g,
    GridSpec, MeridianShape, PolylineKind,
};
use sphere_re_core::inertia::{eigen_sym3, identity_check, inertia_tensor, j_matrix_from_config};
use sphere_re_core::lagrange::{isosceles_solve, solve_lre};
use sphere_re_core::{cotangent, negate, CartesianConfig, Error, MassTriple, ShapeAngles};

type Check = Result<(), String>;

/// A configuration that should rotate rigidly about e_z.
struct Candidate {
    label: String,
    masses: MassTriple,
    positions: CartesianConfig,
    omega_sq: f64,
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_sample(rng: &mut ChaCha8Rng) -> (MassTriple, CartesianConfig) {
    let m = MassTriple::new(
        rng.random_range(0.1..10.0),
        rng.random_range(0.1..10.0),
        rng.random_range(0.1..10.0),
    )
    .unwrap();
    loop {
        let q = [random_unit(rng), random_unit(rng), random_unit(rng)];
        let ok = (0..3).all(|i| (0..i).all(|j| q[i].dot(&q[j]).abs() < 1.0 - 1e-6));
        if ok {
            return (m, CartesianConfig::new(q).unwrap());
        }
    }
}

fn similarity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 0..1000 {
        let (m, c) = random_sample(&mut rng);
        let i = inertia_tensor(&c, &m);
        let j = j_matrix_from_config(&c, &m);
        let two_m = 2.0 * m.total();
        ensure((i.trace() - two_m).abs() <= 1e-10 * two_m.max(1.0), || {
            format!("sample {n}: trace I = {} vs 2M = {two_m}", i.trace())
        })?;
        ensure((j.trace() - two_m).abs() <= 1e-10 * two_m.max(1.0), || {
            format!("sample {n}: trace J = {} vs 2M = {two_m}", j.trace())
        })?;
        let (li, lj) = (eigen_sym3(&i).lambda, eigen_sym3(&j).lambda);
        let scale = li[2].abs().max(1e-300);
        for k in 0..3 {
            ensure((li[k] - lj[k]).abs() <= 1e-9 * scale, || {
                format!("sample {n}: spectra differ, I {li:?} J {lj:?}")
            })?;
        }
    }
    Ok(())
}

fn identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (m, c) = random_sample(&mut rng);
        let axis = random_unit(&mut rng);
        worst = worst.max(identity_check(&c, &m, &axis));
    }
    ensure(worst <= 1e-10, || format!("worst residual {worst:e}"))
}

fn isosceles_candidate(sigma12: f64, sigma: f64) -> Result<Candidate, String> {
    let m = MassTriple::equal(1.0).unwrap();
    let sh = ShapeAngles::from_angles(sigma12, sigma, sigma).map_err(|e| e.to_string())?;
    let sol = solve_lre(&m, &sh, cotangent().as_ref(), 1e-9).map_err(|e| e.to_string())?;
    Ok(Candidate {
        label: format!("Lagrange isosceles ({sigma12:.5}, {sigma:.5})"),
        masses: m,
        positions: sol.positions(),
        omega_sq: sol.omega_sq,
    })
}

fn near(roots: &[f64], target: f64, tol: f64) -> Option<f64> {
    roots.iter().copied().find(|r| (r - target).abs() <= tol)
}

fn lagrange_numbers(out: &mut Vec<Candidate>) -> Check {
    let r = isosceles_solve(FRAC_PI_3);
    let s = near(&r, 1.33240, 1e-4).ok_or_else(|| format!("pi/3: roots {r:?}"))?;
    let c = isosceles_candidate(FRAC_PI_3, s)?;
    ensure((c.omega_sq - 3.85072).abs() <= 1e-3, || {
        format!("pi/3: omega^2 = {}", c.omega_sq)
    })?;
    let w = c.omega_sq;
    out.push(c);

    let r = isosceles_solve(2.0 * FRAC_PI_3);
    let s = near(&r, 1.80918, 1e-4).ok_or_else(|| format!("2pi/3: roots {r:?}"))?;
    let c = isosceles_candidate(2.0 * FRAC_PI_3, s)?;
    ensure((c.omega_sq - w).abs() <= 1e-3, || {
        format!("2pi/3: omega^2 = {} vs {w}", c.omega_sq)
    })?;
    out.push(c);

    let r = isosceles_solve(FRAC_PI_6);
    for target in [1.51596, 2.73083] {
        let s = near(&r, target, 1e-4)
            .ok_or_else(|| format!("pi/6: no root near {target} in {r:?}"))?;
        out.push(isosceles_candidate(FRAC_PI_6, s)?);
    }
    Ok(())
}

fn equilateral(out: &mut Vec<Candidate>) -> Check {
    let m = MassTriple::equal(1.0).unwrap();
    let p = cotangent();
    for sigma in [FRAC_PI_3, FRAC_PI_2, 2.0] {
        let sh = ShapeAngles::equilateral(sigma).unwrap();
        let sol =
            solve_lre(&m, &sh, p.as_ref(), 1e-9).map_err(|e| format!("sigma = {sigma}: {e}"))?;
        let ct = ((1.0 + 2.0 * sigma.cos()) / 3.0).sqrt();
        let w = 3.0 / sigma.sin().powi(3);
        for c in sol.cos_theta {
            ensure((c - ct).abs() <= 1e-10, || {
                format!("sigma = {sigma}: cos theta {c} vs {ct}")
            })?;
        }
        ensure((sol.omega_sq - w).abs() <= 1e-10 * w.max(1.0), || {
            format!("sigma = {sigma}: omega^2 {} vs {w}", sol.omega_sq)
        })?;
        out.push(Candidate {
            label: format!("Lagrange equilateral {sigma:.5}"),
            masses: m,
            positions: sol.positions(),
            omega_sq: sol.omega_sq,
        });
    }
    for sigma in [2.0 * FRAC_PI_3, 2.1, 2.5] {
        let res =
            ShapeAngles::equilateral(sigma).and_then(|sh| solve_lre(&m, &sh, p.as_ref(), 1e-9));
        ensure(
            matches!(res, Err(Error::NotAnRE { .. } | Error::InvalidEigenpair(_))),
            || format!("sigma = {sigma}: expected rejection, got {res:?}"),
        )?;
    }
    Ok(())
}

fn euler_critical(out: &mut Vec<Candidate>) -> Check {
    let ac = critical_angle_ac();
    ensure((ac - 1.8124).abs() <= 1e-4, || format!("a_c = {ac}"))?;
    let m = MassTriple::equal(1.0).unwrap();
    let p = cotangent();
    let set = contour_scan(&m, p.as_ref(), GridSpec::square(256)).map_err(|e| e.to_string())?;
    let scalene: Vec<_> = set.points_of(PolylineKind::Scalene).collect();
    ensure(!scalene.is_empty(), || "no scalene points traced".into())?;
    let (lo, hi) = (FRAC_PI_2 + 1e-3, ac + 1e-3);
    for pt in &scalene {
        let big = pt.largest_arc();
        ensure(big > lo && big < hi, || {
            format!("largest arc {big} at (a, y) = ({}, {})", pt.a, pt.y)
        })?;
    }
    // a handful of traced points go on to the dynamics check
    let step = (scalene.len() / 4).max(1);
    for pt in scalene.iter().step_by(step).take(4) {
        let sol = sphere_re_core::euler::solve_euler(&m, &pt.shape(), p.as_ref(), 1e-8)
            .map_err(|e| e.to_string())?;
        out.push(Candidate {
            label: format!("Euler scalene (a, y) = ({:.5}, {:.5})", pt.a, pt.y),
            masses: m,
            positions: sol.positions(),
            omega_sq: sol
                .omega
                .omega_sq()
                .ok_or("undetermined rate on the scalene curve")?,
        });
    }
    Ok(())
}

fn euler_isosceles(out: &mut Vec<Candidate>) -> Check {
    let m = MassTriple::equal(1.0).unwrap();
    let p = cotangent();
    for theta in [FRAC_PI_3, 0.6, 3.0 * PI / 4.0] {
        let sol = equal_mass_isosceles(theta).map_err(|e| format!("theta = {theta}: {e}"))?;
        ensure(sol.residual <= 1e-8, || {
            format!("theta = {theta}: residual {}", sol.residual)
        })?;
        let w = sol.omega.omega_sq().ok_or("undetermined rate")?;
        let eom = rigid_rotation_residual(&sol.positions(), &m, p.as_ref(), w)
            .map_err(|e| e.to_string())?;
        ensure(eom.relative() <= 1e-8, || {
            format!("theta = {theta}: oracle residual {}", eom.relative())
        })?;
        let middle = sol.positions().get(2).z;
        if theta < 2.0 * FRAC_PI_3 {
            ensure((middle.abs() - 1.0).abs() <= 1e-12, || {
                format!("theta = {theta}: middle body z = {middle}")
            })?;
        } else {
            ensure(middle.abs() <= 1e-12, || {
                format!("theta = {theta}: middle body z = {middle}")
            })?;
        }
        out.push(Candidate {
            label: format!("Euler isosceles {theta:.5}"),
            masses: m,
            positions: sol.positions(),
            omega_sq: w,
        });
    }
    let sol = equal_mass_isosceles(FRAC_PI_3).map_err(|e| e.to_string())?;
    let w = sol.omega.omega_sq().unwrap_or(f64::NAN);
    let exact = 32.0 / (3.0 * 3f64.sqrt());
    ensure((w - exact).abs() <= 1e-10, || {
        format!("theta = pi/3: omega^2 {w} vs {exact}")
    })?;
    // the half-size value 16/(3 sqrt3) is reported, not asserted
    let half = 16.0 / (3.0 * 3f64.sqrt());
    let r = rigid_rotation_residual(&sol.positions(), &m, p.as_ref(), half)
        .map_err(|e| e.to_string())?;
    println!(
        "    note: omega^2 = 16/(3 sqrt3) leaves relative residual {:.3e}",
        r.relative()
    );
    Ok(())
}

fn dynamics(candidates: &[Candidate]) -> Check {
    ensure(!candidates.is_empty(), || {
        "no solutions reached this check".into()
    })?;
    let p = cotangent();
    let mut failures = Vec::new();
    for c in candidates {
        let tr = match verify_rigid_rotation(
            &c.positions,
            &c.masses,
            p.as_ref(),
            c.omega_sq,
            10.0,
            Some(1e-3),
        ) {
            Ok(tr) => tr,
            Err(e) => {
                failures.push(format!("{}: {e}", c.label));
                continue;
            }
        };
        let r = tr.report;
        if !(r.shape_drift <= 1e-6 && r.angular_momentum_drift <= 1e-8 && r.energy_drift <= 1e-8) {
            // halving dt tells integration error (drops ~16x) from an
            // unstable solution amplifying roundoff (does not drop)
            let half = verify_rigid_rotation(
                &c.positions,
                &c.masses,
                p.as_ref(),
                c.omega_sq,
                10.0,
                Some(5e-4),
            )
            .map_or(f64::NAN, |t| t.report.shape_drift);
            failures.push(format!(
                "{}: shape {:.2e} (dt/2: {half:.2e}), c {:.2e}, E {:.2e}",
                c.label, r.shape_drift, r.angular_momentum_drift, r.energy_drift
            ));
        }
    }
    ensure(failures.is_empty(), || {
        format!(
            "{} of {} drifted: {}",
            failures.len(),
            candidates.len(),
            failures.join("\n      ")
        )
    })?;
    // equilateral triangle on a great circle: every force cancels
    let fixed = equal_mass_isosceles(2.0 * FRAC_PI_3).map_err(|e| e.to_string())?;
    let m = MassTriple::equal(1.0).unwrap();
    let tr = verify_rigid_rotation(&fixed.positions(), &m, p.as_ref(), 0.0, 10.0, Some(1e-3))
        .map_err(|e| e.to_string())?;
    let moved = tr.report.rotation_error.unwrap_or(f64::INFINITY);
    ensure(moved <= 1e-8 && tr.report.shape_drift <= 1e-8, || {
        format!("fixed point moved: {:?}", tr.report)
    })
}

fn negative_controls() -> Check {
    let p = cotangent();
    let unequal = MassTriple::new(1.0, 2.0, 3.0).unwrap();
    for sigma in [FRAC_PI_3, FRAC_PI_2, 2.0] {
        let sh = ShapeAngles::equilateral(sigma).unwrap();
        let res = solve_lre(&unequal, &sh, p.as_ref(), 1e-9);
        ensure(res.is_err(), || {
            format!("unequal masses accepted at sigma = {sigma}")
        })?;
    }
    let rep = negate(cotangent());
    let unit = MassTriple::equal(1.0).unwrap();
    let sh = ShapeAngles::equilateral(FRAC_PI_2).unwrap();
    let res = solve_lre(&unit, &sh, rep.as_ref(), 1e-9);
    ensure(matches!(res, Err(Error::RepulsiveNoLRE)), || {
        format!("repulsive potential gave {res:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut accepted = 0;
    for _ in 0..2000 {
        let (m, c) = random_sample(&mut rng);
        let Ok(sh) = sphere_re_core::geometry::shape_of(&c) else {
            continue;
        };
        if let Ok(sol) = solve_lre(&m, &sh, p.as_ref(), 1e-6) {
            accepted += 1;
            ensure(sol.omega_sq > 0.0, || {
                format!("omega^2 = {} returned", sol.omega_sq)
            })?;
        }
    }
    let unit_cases = (1..200).map(|k| 0.01 + k as f64 * 0.0125);
    for s in unit_cases {
        if let Ok(sol) =
            ShapeAngles::equilateral(s).and_then(|sh| solve_lre(&unit, &sh, p.as_ref(), 1e-9))
        {
            accepted += 1;
            ensure(sol.omega_sq > 0.0, || {
                format!("omega^2 = {} at sigma = {s}", sol.omega_sq)
            })?;
        }
    }
    ensure(accepted > 0, || {
        "nothing accepted, the check is vacuous".into()
    })
}

fn newtonian_limit() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let m = MassTriple::new(
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
            rng.random_range(0.1..10.0),
        )
        .unwrap();
        let z: f64 = rng.random_range(0.2..3.0);
        let r = [0.0, 1.0, 1.0 + z];
        let limit = newtonian_g(&m, r);
        let quintic = 2.0 * euler_quintic(&m, z);
        ensure(
            (limit - quintic).abs() <= 1e-10 * quintic.abs().max(1.0),
            || format!("limit {limit} vs quintic {quintic}"),
        )?;
        let err = |eps: f64| -> Result<f64, String> {
            let sh = MeridianShape::new(eps * r[1], eps * r[2]).map_err(|e| e.to_string())?;
            Ok((cotangent_g(&m, &sh) / eps.powi(5) - quintic).abs())
        };
        let (e2, e3) = (err(1e-2)?, err(1e-3)?);
        let ratio = e2 / e3;
        ensure((50.0..=200.0).contains(&ratio), || {
            format!(
                "m = {:?}, z = {z}: errors {e2:e}, {e3:e}, ratio {ratio}",
                m.as_array()
            )
        })?;
    }
    Ok(())
}

fn report(n: usize, name: &str, limit: Duration, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let res = f();
    let took = start.elapsed();
    let res =
        res.and_then(|_| ensure(took <= limit, || format!("took {took:?}, budget {limit:?}")));
    match &res {
        Ok(()) => println!("criterion {n} ({name}): PASS [{:.3} s]", took.as_secs_f64()),
        Err(msg) => println!(
            "criterion {n} ({name}): FAIL [{:.3} s] {msg}",
            took.as_secs_f64()
        ),
    }
    res.is_ok()
}

fn main() {
    let sec = Duration::from_secs;
    let mut candidates = Vec::new();
    let results = [
        report(1, "I and J similarity", sec(1), similarity),
        report(2, "axis identity", sec(1), identity),
        report(3, "Lagrange isosceles numbers", sec(1), || {
            lagrange_numbers(&mut candidates)
        }),
        report(4, "equilateral closed form", sec(1), || {
            equilateral(&mut candidates)
        }),
        report(5, "Euler critical angle and scalene arc", sec(30), || {
            euler_critical(&mut candidates)
        }),
        report(6, "Euler isosceles branches", sec(1), || {
            euler_isosceles(&mut candidates)
        }),
        report(7, "dynamics verification", sec(60), || {
            dynamics(&candidates)
        }),
        report(8, "negative controls", sec(1), negative_controls),
        report(9, "Newtonian limit", sec(1), newtonian_limit),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
