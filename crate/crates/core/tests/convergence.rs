use hilbert_core::convergence::*;
use hilbert_core::spectrum::cylinder;
use hilbert_core::ConvexBody;
use nalgebra::DVector;

/// Klein norm of a unit `v` at `p` in the disk of radius `r`.
fn klein_norm(r: f64, p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let pv = p.dot(v);
    let s = r * r - p.norm_squared();
    (pv * pv + s).sqrt() / s
}

/// `inf M` over `|p| <= 0.5` and all directions, on a fine polar grid.
fn disk_deficit_oracle(k: f64) -> f64 {
    let r = 1.0 + 1.0 / k;
    let mut inf = f64::INFINITY;
    for i in 0..=200 {
        let p = DVector::from_vec(vec![0.5 * i as f64 / 200.0, 0.0]);
        for j in 0..=720 {
            let a = std::f64::consts::PI * j as f64 / 720.0;
            let v = DVector::from_vec(vec![a.cos(), a.sin()]);
            inf = inf.min(klein_norm(r, &p, &v) / klein_norm(1.0, &p, &v));
        }
    }
    1.0 - inf
}

#[test]
fn concentric_disks_match_closed_form() {
    let limit = ConvexBody::unit_ball(2);
    let a = ConvexBody::ball(DVector::zeros(2), 0.5).unwrap();
    let grid = Grid::default_for(&a).unwrap();
    let mut last = f64::INFINITY;
    for k in [2.0, 4.0, 10.0, 16.0, 32.0] {
        let member = ConvexBody::ball(DVector::zeros(2), 1.0 + 1.0 / k).unwrap();
        let f = norm_ratio_field(&member, &limit, &grid).unwrap();
        let oracle = disk_deficit_oracle(k);
        println!("k={k} deficit={} oracle={oracle}", f.sup_deficit);
        assert!((f.sup_deficit - oracle).abs() < 1e-3);
        assert!(f.sup_ratio <= 1.0 + 1e-10);
        assert!(f.sup_deficit < last);
        if k == 10.0 {
            assert!(f.sup_deficit > 0.0 && f.sup_deficit < 0.2);
        }
        last = f.sup_deficit;
    }
}

#[test]
fn concentric_disk_densities() {
    let limit = ConvexBody::unit_ball(2);
    let a = ConvexBody::ball(DVector::zeros(2), 0.5).unwrap();
    let grid = Grid::default_for(&a).unwrap();
    let members: Vec<_> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|k| ConvexBody::ball(DVector::zeros(2), 1.0 + 1.0 / k).unwrap())
        .collect();
    let c = density_convergence(&members, &limit, &grid).unwrap();
    for r in &c.rows {
        println!("{r:?}");
    }
    assert!(c.deviation_monotone && c.norm_monotone && c.within_envelope);
    let last = c.rows.last().unwrap();
    assert!(last.density_deviation < 3.0 * (1.0 - last.inf_norm_ratio));
    let constant = density_convergence(std::slice::from_ref(&limit), &limit, &grid).unwrap();
    assert_eq!(constant.final_deviation, 0.0);
}

#[test]
fn smoothed_cylinder_sequence() {
    let cyl = cylinder();
    let a = cyl.scaled(0.5).unwrap();
    let grid = Grid::default_for(&a).unwrap();
    let members = smoothing_sequence(&cyl, &[2, 4, 8, 16, 32, 64]).unwrap();
    let c = density_convergence(&members, &cyl, &grid).unwrap();
    for r in &c.rows {
        println!("{r:?}");
    }
    assert!(c.norm_monotone && c.deviation_monotone && c.within_envelope);
    assert!(c.final_deviation < 0.1);
}
