use udw_harvest::flat::{p0_closed, x0_closed, DetectorConfig};
use udw_harvest::gcorr::{delta_p1, delta_x1, tilde_p1, tilde_x1};
use udw_harvest::metric::{Geometry, StarConfig};
use udw_harvest::negativity::negativity_of;
use udw_harvest::quad::QuadSpec;

#[test]
fn probe() {
    let spec = QuadSpec::default();
    let d = DetectorConfig::new(1.0, 5.0, 1.0).unwrap();
    let (r1, lp) = (2.0, 5.0);
    let r2 = r1 + lp;
    let geom = Geometry::new(r1, lp).unwrap();
    let m_ref = 1e-3;
    let m_earth = 7e-10 * r1;
    let scale = m_earth / m_ref;
    let star_ref = StarConfig::new(m_ref, 1.0).unwrap();
    let star_earth = StarConfig::new(m_earth, 1.0).unwrap();

    let p0 = p0_closed(&d).unwrap();
    let x0 = x0_closed(&d, lp).unwrap();
    let n0 = negativity_of(p0, p0, x0).unwrap();
    println!("p0      = {p0:.16e}   (oracle 2.0893956321178086e-14)");
    println!("absx0   = {:.16e}   (oracle 1.7909364784265745e-12)", x0.norm());
    println!("n0      = {n0:.16e}   (oracle 3.540085044210793e-12)");

    let dp1r = delta_p1(r1, &d, &star_ref, &spec).unwrap();
    let dp2r = delta_p1(r2, &d, &star_ref, &spec).unwrap();
    println!(
        "dp_ref_r1 = {:.16e} conv={} (oracle 4.5713908744820025e-18)",
        dp1r.value.re, dp1r.converged
    );
    println!(
        "dp_ref_r2 = {:.16e} conv={} (oracle 3.772814964972146e-18)",
        dp2r.value.re, dp2r.converged
    );
    let dxr = delta_x1(&geom, &d, &star_ref, &spec).unwrap();
    println!(
        "dx_ref    = ({:.16e}, {:.16e}) conv={} (oracle -3.8745968983866887e-16, -2.303133866840784e-16)",
        dxr.value.re, dxr.value.im, dxr.converged
    );

    let tp1 = tilde_p1(r1, &d, &star_earth).unwrap();
    let tp2 = tilde_p1(r2, &d, &star_earth).unwrap();
    let tx = tilde_x1(&geom, &d, &star_earth).unwrap();
    println!("tp1 = {tp1:.16e}");
    println!("tp2 = {tp2:.16e}");
    println!("tx  = ({:.16e}, {:.16e})", tx.re, tx.im);

    let p1 = p0 + tp1 + dp1r.value.re * scale;
    let p2 = p0 + tp2 + dp2r.value.re * scale;
    let x = x0 + tx + dxr.value * scale;
    let n1 = negativity_of(p1, p2, x).unwrap() - n0;
    println!("n1    = {n1:.16e}   (oracle 9.312365408792174e-22)");
    println!("ratio = {:.16e}   (oracle 2.630548501658445e-10)", n1 / n0);
}

#[test]
fn probe_flag() {
    use udw_harvest::negativity::compute_perturbed;
    let spec = QuadSpec::default();
    let d = DetectorConfig::new(10.0, 0.5, 1.0).unwrap();
    let geom = Geometry::new(2.0, 0.01).unwrap();
    for m in [1e-3, 0.01] {
        let st = StarConfig::new(m, 1.0).unwrap();
        let res = compute_perturbed(&d, &geom, &st, &spec).unwrap();
        println!(
            "M={m}: p0={:.6e} dp1={:.6e} ratio={:.6e} ok={} conv={}",
            res.p0,
            res.breakdown.delta_p[0],
            res.breakdown.delta_p[0].abs() / res.p0,
            res.perturbative_ok,
            res.converged
        );
    }
    let st = StarConfig::new(1e-3, 1.0).unwrap();
    for de in [10.0, 11.0, 12.0, 14.0, 16.0] {
        let d = DetectorConfig::new(de, 0.5, 1.0).unwrap();
        let res = compute_perturbed(&d, &geom, &st, &spec).unwrap();
        println!(
            "dE={de}: p0={:.6e} dp1={:.6e} ratio={:.6e} ok={} conv={}",
            res.p0,
            res.breakdown.delta_p[0],
            res.breakdown.delta_p[0].abs() / res.p0,
            res.perturbative_ok,
            res.converged
        );
    }
}

#[test]
fn probe_xside() {
    use udw_harvest::negativity::compute_perturbed;
    let spec = QuadSpec::default();
    for (de, sig, lp, r1, m) in [
        (5.0, 1.0, 10.0, 2.0, 1e-3),
        (5.0, 1.0, 10.0, 2.0, 0.01),
        (5.0, 1.0, 20.0, 2.0, 0.01),
        (5.0, 1.0, 40.0, 2.0, 0.01),
        (5.0, 1.0, 20.0, 1.5, 0.01),
        (1.0, 1.0, 20.0, 1.5, 0.01),
        (3.0, 1.0, 30.0, 1.2, 0.01),
    ] {
        let d = DetectorConfig::new(de, sig, 1.0).unwrap();
        let geom = Geometry::new(r1, lp).unwrap();
        let st = StarConfig::new(m, 1.0).unwrap();
        let res = compute_perturbed(&d, &geom, &st, &spec).unwrap();
        let x0n = x0_closed(&d, lp).unwrap().norm();
        println!(
            "dE={de} lp={lp} r1={r1} M={m}: |x0|={:.3e} |tx|/|x0|={:.3e} |dx|/|x0|={:.3e} dp1/p0={:.3e} ok={} conv={}",
            x0n,
            res.breakdown.tilde_x.norm() / x0n,
            res.breakdown.delta_x.norm() / x0n,
            res.breakdown.delta_p[0].abs() / res.p0,
            res.perturbative_ok,
            res.converged
        );
    }
}
