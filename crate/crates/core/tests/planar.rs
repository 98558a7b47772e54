//! Cross-module checks on planar domains.

use capoint::field2d::{flux_probe, harmonic_center, principal_eigen2d, Bc, RobinSolver};
use capoint::geom2d::{build_grid, DomainSpec};
use std::f64::consts::PI;

#[test]
fn robin_disk_law_at_fine_spacing() {
    let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 128.0).unwrap();
    let s = RobinSolver::new(&g).unwrap();
    for p in [0.0f64, 0.25, 0.5] {
        let v = s.value(p, 0.0).unwrap();
        assert!((v - (1.0 - p * p).ln()).abs() <= 5e-3, "p = {p}: {v}");
        assert!(s.field(p, 0.0).unwrap().satisfies_max_principle(1e-10));
    }
}

#[test]
fn disk_eigenvalue_converges() {
    let j01 = 2.404_825_557_695_773f64;
    let errs: Vec<f64> = [16.0, 32.0, 64.0]
        .iter()
        .map(|n| {
            let g = build_grid(&DomainSpec::unit_disk(), 1.0 / n).unwrap();
            (principal_eigen2d(&g, Bc::Dirichlet).unwrap().lambda - j01 * j01).abs()
        })
        .collect();
    assert!(errs[0] / errs[1] >= 3.0 && errs[1] / errs[2] >= 3.0, "{errs:?}");
}

#[test]
fn mirror_domain_mirrors_both_points() {
    let spec = DomainSpec::profile_str("0.2+0.3*x").unwrap();
    let h = 1.0 / 32.0;
    let a = build_grid(&spec, h).unwrap();
    let b = build_grid(&spec.reflected().unwrap(), h).unwrap();
    let (ca, _) = harmonic_center(&a).unwrap();
    let (cb, _) = harmonic_center(&b).unwrap();
    assert!((ca.0 - (1.0 - cb.0)).abs() <= 2.0 * h);
    for bc in [Bc::Dirichlet, Bc::Mixed] {
        let ma = principal_eigen2d(&a, bc).unwrap().m.0;
        let mb = principal_eigen2d(&b, bc).unwrap().m.0;
        assert!((ma - (1.0 - mb)).abs() <= 2.0 * h, "{bc:?}: {ma} vs {mb}");
    }
}

#[test]
fn off_center_flux_follows_the_robin_function() {
    let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 128.0).unwrap();
    let eps = 0.05f64;
    let p = 0.3;
    let f = flux_probe(&g, (p, 0.0), eps, Bc::Dirichlet).unwrap();
    let v = RobinSolver::new(&g).unwrap().value(p, 0.0).unwrap();
    let ratio = f.flux * ((1.0 / eps).ln() + v) / (2.0 * PI);
    assert!((ratio - 1.0).abs() <= 0.05, "{ratio}");
    let centered = flux_probe(&g, (0.0, 0.0), eps, Bc::Dirichlet).unwrap();
    assert!(centered.flux < f.flux);
}
