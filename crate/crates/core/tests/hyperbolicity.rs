use hilbert_core::hyperbolicity::*;
use hilbert_core::metric::hilbert_distance;
use hilbert_core::spectrum::cylinder;
use hilbert_core::ConvexBody;
use nalgebra::{DMatrix, DVector};

fn v(xs: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(xs)
}

/// Klein distance in the unit disk.
fn klein(p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let num = 1.0 - p.dot(q);
    let den = ((1.0 - p.norm_squared()) * (1.0 - q.norm_squared())).sqrt();
    (num / den).acosh()
}

#[test]
fn klein_gromov_product() {
    let disk = ConvexBody::unit_ball(2);
    let (x, y, w) = (v(&[0.5, 0.0]), v(&[-0.5, 0.0]), v(&[0.0, 0.5]));
    let expected = 0.5 * (klein(&x, &w) + klein(&y, &w) - klein(&x, &y));
    assert!((gromov_product(&disk, &x, &y, &w).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn disk_bounded_cylinder_growing() {
    let disk = ConvexBody::unit_ball(2);
    let d = delta_probe(&disk, &v(&[0.0, 0.0]), &[2.0, 4.0, 6.0], 10_000, 42).unwrap();
    let cyl = cylinder();
    let c = delta_probe(&cyl, &v(&[0.0, 0.0, 0.0]), &[2.0, 4.0, 6.0], 10_000, 42).unwrap();
    println!(
        "disk {:?}",
        d.iter().map(|e| e.max_defect).collect::<Vec<_>>()
    );
    println!(
        "cyl {:?}",
        c.iter().map(|e| e.max_defect).collect::<Vec<_>>()
    );
    assert!(d[2].max_defect <= d[0].max_defect + 1.0);
    assert!(c[2].max_defect >= c[0].max_defect + 0.5);
    assert!(c[0].max_defect < c[1].max_defect && c[1].max_defect < c[2].max_defect);
}

#[test]
fn more_quadruples_never_lower_the_estimate() {
    let sq = ConvexBody::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let a = delta_probe(&sq, &v(&[0.0, 0.0]), &[3.0], 500, 7).unwrap();
    let b = delta_probe(&sq, &v(&[0.0, 0.0]), &[3.0], 2000, 7).unwrap();
    assert!(b[0].max_defect >= a[0].max_defect);
}

#[test]
fn defects_are_affine_invariant() {
    let sq = ConvexBody::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
    let map = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, -0.5, 0.2]);
    let shift = v(&[4.0, -1.0]);
    let img = sq.affine_image(&map, &shift).unwrap();
    let est = delta_probe(&sq, &v(&[0.0, 0.0]), &[3.0], 200, 1).unwrap();
    let q = est[0].witness.clone().map(DVector::from_vec);
    let mapped = q.clone().map(|p| &map * p + &shift);
    let a = four_point_defect(&sq, &q).unwrap();
    let b = four_point_defect(&img, &mapped).unwrap();
    assert!((a - b).abs() < 1e-8, "{a} {b}");
    assert!((a - est[0].max_defect).abs() < 1e-15);
    let d0 = hilbert_distance(&sq, &q[0], &q[1]).unwrap();
    let d1 = hilbert_distance(&img, &mapped[0], &mapped[1]).unwrap();
    assert!((d0 - d1).abs() < 1e-8);
}
