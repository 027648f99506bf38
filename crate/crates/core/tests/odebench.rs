use lie_maps::liemap::{BuildOptions, PolynomialSystem, Term};
use lie_maps::odebench::{
    mean_relative_error, mean_relative_error_many, mse, rk4_solve, rk4_solve_sampled, vdp_rhs, vdp_system, FnRhs,
    VdpSweep, VDP_ICS,
};
use lie_maps::{Error, Exec, TrajectoryDataset};
use nalgebra::{DMatrix, DVector};

fn end_error(h: f64) -> f64 {
    let a = DMatrix::from_row_slice(2, 2, &[-0.4, 1.0, -1.0, -0.2]);
    let sys = PolynomialSystem::linear(&a).unwrap();
    let x0 = DVector::from_vec(vec![1.0, 0.5]);
    let exact = (&a * 2.0).exp() * &x0;
    let run = rk4_solve(&sys, x0.as_slice(), 2.0, h).unwrap();
    (DVector::from_column_slice(run.last()) - exact).norm()
}

#[test]
fn rk4_is_fourth_order() {
    let ratio = end_error(0.1) / end_error(0.05);
    assert!((14.0..=18.0).contains(&ratio), "ratio {ratio}");
    let order = ratio.log2();
    assert!((3.8..=4.2).contains(&order));
}

#[test]
fn rk4_order_on_vdp() {
    let fine = rk4_solve(&vdp_system(), &[1.0, 2.0], 1.0, 1e-4).unwrap();
    let err = |h: f64| {
        let r = rk4_solve(&vdp_system(), &[1.0, 2.0], 1.0, h).unwrap();
        let (a, b) = (r.last(), fine.last());
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    };
    let order = (err(0.05) / err(0.025)).log2();
    assert!((3.8..=4.2).contains(&order), "order {order}");
}

#[test]
fn polynomial_and_closure_rhs_agree() {
    let f = FnRhs::new(2, vdp_rhs);
    let a = rk4_solve_sampled(&vdp_system(), &VDP_ICS[3], 2.0, 1e-3, 10).unwrap();
    let b = rk4_solve_sampled(&f, &VDP_ICS[3], 2.0, 1e-3, 10).unwrap();
    assert_eq!(a.len(), 201);
    for (x, y) in a.states().iter().zip(b.states()) {
        assert!((x[0] - y[0]).abs() < 1e-12 && (x[1] - y[1]).abs() < 1e-12);
    }
}

#[test]
fn blow_up_is_reported() {
    // x' = x² leaves every bound at t = 1
    let sys = PolynomialSystem::from_terms(1, &[Term { target: 0, exponents: vec![2], coeff: 1.0 }]).unwrap();
    assert!(matches!(rk4_solve(&sys, &[1.0], 2.0, 1e-2), Err(Error::Diverged { .. })));
}

#[test]
fn relative_error_definition() {
    let r = TrajectoryDataset::new(0.0, 0.1, vec![vec![9.0, 9.0], vec![3.0, 4.0], vec![0.0, 2.0]]).unwrap();
    let p = TrajectoryDataset::new(0.0, 0.1, vec![vec![0.0, 0.0], vec![3.0, 4.5], vec![0.0, 2.0]]).unwrap();
    // the initial sample is skipped: (0.5/5 + 0)/2
    assert!((mean_relative_error(&p, &r).unwrap() - 0.05).abs() < 1e-15);
    assert_eq!(mean_relative_error(&r, &r).unwrap(), 0.0);
    let many = mean_relative_error_many(&[p.clone(), r.clone()], &[r.clone(), r.clone()]).unwrap();
    assert!((many - 0.025).abs() < 1e-15);
    let short = TrajectoryDataset::new(0.0, 0.1, vec![vec![1.0, 1.0]]).unwrap();
    assert!(mean_relative_error(&short, &short).is_err());
    let other_dt = TrajectoryDataset::new(0.0, 0.2, r.states().to_vec()).unwrap();
    assert!(mean_relative_error(&other_dt, &r).is_err());
    assert_eq!(mse(&[1.0, 3.0], &[0.0, 1.0]).unwrap(), 2.5);
}

#[test]
fn short_sweep_improves_with_order() {
    let sweep = VdpSweep { t_end: 2.0, ..VdpSweep::default() };
    let refs = sweep.references(Exec::default()).unwrap();
    assert_eq!(refs[0].len(), 201);
    let rows = sweep.run(&[2, 3, 5], &BuildOptions::default(), &refs).unwrap();
    assert!(rows[0].mean_relative_error > rows[1].mean_relative_error);
    assert!(rows[1].mean_relative_error > rows[2].mean_relative_error);
    assert_eq!(rows[2].per_ic.len(), 4);
}
