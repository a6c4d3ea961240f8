//! Acceptance criteria 1 to 10. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use hilbert_core::convergence::{density_convergence, norm_ratio_field, smoothing_sequence, Grid};
use hilbert_core::hyperbolicity::delta_probe;
use hilbert_core::john::{john_ellipsoid, sandwich_check};
use hilbert_core::local_geometry::{regression_suite, theorem12_report, Theorem12Config};
use hilbert_core::measure::{hilbert_density, VolumeMethod};
use hilbert_core::metric::{geodesic_additivity_defect, hilbert_distance};
use hilbert_core::spectrum::{
    cheeger_quotient, cylinder, cylinder_sandwich, cylinder_spectral_bound, fact2_check,
    minimize_rayleigh, Family, Profile, QuotientConfig, CYLINDER_C1, CYLINDER_C2,
};
use hilbert_core::ConvexBody;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, name: &str, budget: Duration, start: Instant, pass: bool, detail: String) {
    let t = start.elapsed();
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} {name}: {} ({detail}; {:.1}s, budget {}s)",
        if pass { "PASS" } else { "FAIL" },
        t.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {id} failed: {detail}");
}

fn random_interior(body: &ConvexBody, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let (lo, hi) = body.bounding_box();
    loop {
        let x = DVector::from_fn(lo.len(), |i, _| rng.gen_range(lo[i]..hi[i]));
        if body.contains(&x).unwrap() {
            return x;
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
    }
    s * h / 3.0
}

/// Rayleigh quotient of a radial profile on the hyperbolic plane.
fn radial_rayleigh(p: &Profile) -> f64 {
    let b = p.radius() * (1.0 - 1e-13);
    let num = simpson(|x| p.derivative(x).powi(2) * x.sinh(), 0.0, b, 20_000);
    let den = simpson(|x| p.value(x).powi(2) * x.sinh(), 0.0, b, 20_000);
    num / den
}

#[test]
fn criterion_01_klein_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut dist_err: f64 = 0.0;
    for n in [2usize, 3] {
        let ball = ConvexBody::unit_ball(n);
        let o = DVector::zeros(n);
        for _ in 0..500 {
            let u = DVector::from_fn(n, |_, _| rng.gen::<f64>() - 0.5).normalize();
            let r: f64 = rng.gen_range(0.0..0.99);
            let d = hilbert_distance(&ball, &o, &(u * r)).unwrap();
            dist_err = dist_err.max((d - 0.5 * ((1.0 + r) / (1.0 - r)).ln()).abs());
        }
    }
    let disk = ConvexBody::unit_ball(2);
    let mut dens_err: f64 = 0.0;
    for i in 0..=19 {
        let r = 0.05 * i as f64;
        let a = 0.7 * i as f64;
        let p = DVector::from_vec(vec![r * a.cos(), r * a.sin()]);
        let h = hilbert_density(&disk, &p, VolumeMethod::Polygon { resolution: 512 })
            .unwrap()
            .h;
        dens_err = dens_err.max((h / (1.0 - r * r).powf(-1.5) - 1.0).abs());
    }
    verdict(
        1,
        "klein oracle",
        Duration::from_secs(10),
        start,
        dist_err < 1e-10 && dens_err < 1e-3,
        format!("distance err {dist_err:.2e} < 1e-10, density rel err {dens_err:.2e} < 1e-3"),
    );
}

#[test]
fn criterion_02_metric_axioms() {
    let start = Instant::now();
    let suite = regression_suite().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut sym, mut tri, mut add): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0);
    for k in 0..1000 {
        let body = &suite[k % suite.len()].body;
        let p = random_interior(body, &mut rng);
        let q = random_interior(body, &mut rng);
        let r = random_interior(body, &mut rng);
        let dpq = hilbert_distance(body, &p, &q).unwrap();
        let dqp = hilbert_distance(body, &q, &p).unwrap();
        let dqr = hilbert_distance(body, &q, &r).unwrap();
        let dpr = hilbert_distance(body, &p, &r).unwrap();
        sym = sym.max((dpq - dqp).abs());
        tri = tri.max(dpr - dpq - dqr);
        let s: f64 = rng.gen_range(0.05..0.95);
        let m = &p + (&r - &p) * s;
        add = add.max(geodesic_additivity_defect(body, &p, &m, &r).unwrap());
    }
    verdict(
        2,
        "metric axioms",
        Duration::from_secs(60),
        start,
        sym < 1e-9 && tri < 1e-9 && add < 1e-9,
        format!("symmetry {sym:.2e}, triangle excess {tri:.2e}, additivity {add:.2e}, all < 1e-9"),
    );
}

#[test]
fn criterion_03_local_geometry_constants() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let (mut gap, mut center, mut chord, mut up, mut low) =
        (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut reports = 0;
    for sb in regression_suite().unwrap() {
        assert!(sb.points.len() >= 5);
        let cfg = Theorem12Config::default_for(sb.body.dim());
        for p in &sb.points {
            let r = theorem12_report(&sb.body, p, &cfg).unwrap();
            reports += 1;
            gap = gap.min(r.gap.d0);
            center = center.max(r.survey.center_min_exit_max / r.bounds.center_exit);
            chord = chord.max(r.survey.chord_bound_max / r.bounds.chord);
            up = up.max(r.survey.lip_upper);
            low = low.min(r.survey.lip_lower / r.bounds.lip_lower);
            if !r.pass {
                failures.push(format!("{} {:?}: {:?}", sb.name, p.as_slice(), r.checks));
            }
        }
    }
    verdict(
        3,
        "local geometry constants",
        Duration::from_secs(600),
        start,
        failures.is_empty(),
        format!(
            "{reports} balls; min gap {gap:.4} >= 0.0090744, center exit / bound {center:.3}, \
             chord / bound {chord:.4}, max ratio {up:.3} <= 110.196, min ratio / bound {low:.1}; failures {failures:?}"
        ),
    );
}

#[test]
fn criterion_04_john_sandwich() {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for sb in regression_suite().unwrap() {
        let n = sb.body.dim() as f64;
        let e = john_ellipsoid(&sb.body, 128).unwrap();
        let s = sandwich_check(&sb.body, &e, None).unwrap();
        let bound = if s.symmetric { n.sqrt() } else { n } + 1e-3;
        ok &= s.contained && s.cover_factor <= bound;
        let pinned = match sb.name {
            "square" => (s.cover_factor - 2f64.sqrt()).abs() < 1e-4,
            "triangle" => (s.cover_factor - 2.0).abs() < 1e-3,
            _ => true,
        };
        ok &= pinned;
        lines.push(format!("{} {:.5}", sb.name, s.cover_factor));
    }
    verdict(
        4,
        "john sandwich",
        Duration::from_secs(60),
        start,
        ok,
        format!("cover factors [{}]", lines.join(", ")),
    );
}

#[test]
fn criterion_05_cylinder() {
    let start = Instant::now();
    let qs = [
        [0.0, 0.0],
        [0.5, 0.0],
        [0.0, -0.7],
        [0.3, 0.4],
        [-0.85, 0.1],
    ];
    let mut points = Vec::new();
    for q in qs {
        for i in 0..7 {
            points.push((q, -0.9 + 0.3 * i as f64));
        }
    }
    let rep = cylinder_sandwich(&points, 100_000, 42).unwrap();
    let (lo, hi) = (CYLINDER_C1 - 0.05, CYLINDER_C2 + 0.05);
    let in_window = rep.rows.iter().all(|r| r.ratio >= lo && r.ratio <= hi);
    let rmin = rep
        .rows
        .iter()
        .map(|r| r.ratio)
        .fold(f64::INFINITY, f64::min);
    let rmax = rep.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    // the vertical radius depends on t only
    let mut spread: f64 = 0.0;
    for f in &rep.fact1 {
        for g in rep.fact1.iter().filter(|g| g.t == f.t) {
            spread = spread.max((f.vertical_radius - g.vertical_radius).abs());
        }
    }
    let angles = [0.0, 0.3, 0.6, 1.0, 1.3];
    let f2 = [
        fact2_check(1.0, 1.0, &angles).unwrap(),
        fact2_check(1.0, 3.0, &angles).unwrap(),
    ];
    let f2max = f2.iter().map(|f| f.max_defect).fold(0.0, f64::max);
    verdict(
        5,
        "cylinder sandwich and facts",
        Duration::from_secs(600),
        start,
        in_window && rep.fact1_max_defect < 1e-9 && spread < 1e-9 && f2max < 1e-6,
        format!(
            "ratios in [{rmin:.4}, {rmax:.4}] within [{lo:.4}, {hi:.2}] over {} points; fact1 defect {:.2e}, \
             q-spread {spread:.2e}; fact2 defect {f2max:.2e}",
            rep.rows.len(),
            rep.fact1_max_defect
        ),
    );
}

#[test]
fn criterion_06_spectral_benchmarks() {
    let start = Instant::now();
    let disk = ConvexBody::unit_ball(2);
    let cfg = QuotientConfig::default();
    let m = minimize_rayleigh(
        &disk,
        &DVector::zeros(2),
        Family::Exponential,
        &[8.0, 12.0, 15.0],
        &cfg,
    )
    .unwrap();
    let best = &m.best;
    let oracle = radial_rayleigh(&best.profile);
    let disk_ok = (0.24..=0.30).contains(&best.quotient)
        && (best.quotient - oracle).abs() <= 3.0 * best.stderr;

    let cyl = cylinder();
    let ccfg = QuotientConfig {
        samples: 4096,
        ..Default::default()
    };
    let bound = cylinder_spectral_bound();
    let mut cyl_min = f64::INFINITY;
    let mut cyl_ok = true;
    for family in [Family::Exponential, Family::Tent] {
        let c =
            minimize_rayleigh(&cyl, &DVector::zeros(3), family, &[2.0, 4.0, 6.0], &ccfg).unwrap();
        for r in &c.per_radius {
            cyl_ok &= r.quotient >= bound - 3.0 * r.stderr;
            cyl_min = cyl_min.min(r.quotient);
        }
    }
    verdict(
        6,
        "spectral benchmarks",
        Duration::from_secs(600),
        start,
        disk_ok && cyl_ok,
        format!(
            "disk min {:.4} +- {:.4} at {:?}, oracle {oracle:.4}, window [0.24, 0.30]; cylinder min {cyl_min:.4} >= {bound:.5}",
            best.quotient, best.stderr, best.profile
        ),
    );
}

#[test]
fn criterion_07_cheeger_proxy() {
    let start = Instant::now();
    let disk = ConvexBody::unit_ball(2);
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [1.0f64, 2.0, 5.0] {
        let c = cheeger_quotient(&disk, &DVector::zeros(2), r, 0.05, 8192, 42).unwrap();
        let oracle = 1.0 / (r / 2.0).tanh();
        let rel = (c.quotient / oracle - 1.0).abs();
        ok &= rel < 0.05;
        parts.push(format!("R={r}: {:.4} vs {oracle:.4}", c.quotient));
    }
    verdict(
        7,
        "cheeger proxy",
        Duration::from_secs(300),
        start,
        ok,
        format!("{} within 5%", parts.join(", ")),
    );
}

/// `1 - inf M` for the disk of radius `1 + 1/k` against the unit disk over
/// `|p| <= 0.5`, from the Klein norm on a fine polar grid.
fn disk_deficit_oracle(k: f64) -> f64 {
    let norm = |r: f64, p: f64, a: f64| {
        let pv = p * a.cos();
        let s = r * r - p * p;
        (pv * pv + s).sqrt() / s
    };
    let r = 1.0 + 1.0 / k;
    let mut inf = f64::INFINITY;
    for i in 0..=200 {
        let p = 0.5 * i as f64 / 200.0;
        for j in 0..=720 {
            let a = PI * j as f64 / 720.0;
            inf = inf.min(norm(r, p, a) / norm(1.0, p, a));
        }
    }
    1.0 - inf
}

#[test]
fn criterion_08_convergence() {
    let start = Instant::now();
    let limit = ConvexBody::unit_ball(2);
    let grid = Grid::default_for(&ConvexBody::ball(DVector::zeros(2), 0.5).unwrap()).unwrap();
    let mut disk_err: f64 = 0.0;
    let mut monotone = true;
    let mut last = f64::INFINITY;
    for k in [2.0, 4.0, 8.0, 16.0, 32.0] {
        let member = ConvexBody::ball(DVector::zeros(2), 1.0 + 1.0 / k).unwrap();
        let f = norm_ratio_field(&member, &limit, &grid).unwrap();
        disk_err = disk_err.max((f.sup_deficit - disk_deficit_oracle(k)).abs());
        monotone &= f.sup_deficit < last;
        last = f.sup_deficit;
    }
    let cyl = cylinder();
    let cgrid = Grid::default_for(&cyl.scaled(0.5).unwrap()).unwrap();
    let members = smoothing_sequence(&cyl, &[2, 4, 8, 16, 32, 64]).unwrap();
    let c = density_convergence(&members, &cyl, &cgrid).unwrap();
    verdict(
        8,
        "convergence",
        Duration::from_secs(600),
        start,
        disk_err < 1e-3 && monotone && c.norm_monotone && c.final_deviation < 0.1,
        format!(
            "disk deficit err {disk_err:.2e} < 1e-3, monotone {monotone}; cylinder M monotone {}, \
             final deviation {:.4} < 0.1",
            c.norm_monotone, c.final_deviation
        ),
    );
}

#[test]
fn criterion_09_hyperbolicity() {
    let start = Instant::now();
    let scales = [2.0, 4.0, 6.0];
    let disk = delta_probe(
        &ConvexBody::unit_ball(2),
        &DVector::zeros(2),
        &scales,
        10_000,
        42,
    )
    .unwrap();
    let cyl = delta_probe(&cylinder(), &DVector::zeros(3), &scales, 10_000, 42).unwrap();
    let d: Vec<f64> = disk.iter().map(|e| e.max_defect).collect();
    let c: Vec<f64> = cyl.iter().map(|e| e.max_defect).collect();
    verdict(
        9,
        "hyperbolicity separation",
        Duration::from_secs(300),
        start,
        d[2] <= d[0] + 1.0 && c[2] >= c[0] + 0.5,
        format!("disk {d:.3?} (growth <= 1.0), cylinder {c:.3?} (growth >= 0.5)"),
    );
}

#[test]
fn criterion_10_reproducibility() {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("hilbert-lab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let body = dir.join("triangle.json");
    std::fs::write(
        &body,
        r#"{"type": "vpolytope", "vertices": [[1, 0], [-0.5, 0.8], [-0.5, -0.8]]}"#,
    )
    .unwrap();
    let body = body.to_str().unwrap().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["distance", "--body", &body, "--p", "0,0", "--q", "0.3,0.1"],
        vec![
            "density",
            "--body",
            &body,
            "--p",
            "0.1,0",
            "--samples",
            "4000",
        ],
        vec!["john", "--body", &body],
        vec!["theorem12", "--body", &body, "--p", "0.2,0.1"],
        vec!["cylinder", "--tgrid", "-0.5:0.5:3", "--samples", "4000"],
        vec![
            "rayleigh",
            "--body",
            &body,
            "--radii",
            "2,3",
            "--samples",
            "2048",
        ],
        vec![
            "cheeger",
            "--body",
            &body,
            "--radius",
            "1",
            "--samples",
            "2048",
        ],
        vec!["converge", "--body", &body, "--ks", "2,4"],
        vec![
            "delta",
            "--body",
            &body,
            "--scales",
            "1,2",
            "--quadruples",
            "500",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let mut mismatched = Vec::new();
    let mut failed = Vec::new();
    for args in &runs {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_hilbert-lab"))
                .args(["--seed", "7"])
                .args(args)
                .env("HILBERT_LAB_THREADS", "2")
                .output()
                .unwrap()
        };
        let (a, b) = (run(), run());
        if a.status.code() == Some(2) {
            failed.push(format!(
                "{}: {}",
                args[0],
                String::from_utf8_lossy(&a.stderr)
            ));
        }
        if a.stdout != b.stdout || a.stdout.is_empty() {
            mismatched.push(args[0].clone());
        }
    }
    std::fs::remove_dir_all(&dir).ok();
    verdict(
        10,
        "reproducibility",
        Duration::from_secs(600),
        start,
        mismatched.is_empty() && failed.is_empty(),
        format!(
            "{} commands rerun; differing {mismatched:?}; errors {failed:?}",
            runs.len()
        ),
    );
}
