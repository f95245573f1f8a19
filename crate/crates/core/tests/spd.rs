use ebm_core::assembly::{assemble, AssemblyOptions};
use ebm_core::geometry::shapes;
use ebm_core::interpolation::Strategy;
use ebm_core::spd::{check_operator, check_segment, diag_dominance, minor_oracle, Verdict};
use ebm_core::{Coefficient, Geometry, Grid, GridContext, ProblemSpec};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sweep_values() -> Vec<f64> {
    (1..=60).map(|k| k as f64 * 0.05).collect()
}

#[test]
fn certified_segments_have_positive_minors() {
    let mut certified = 0;
    for n in 1..=8 {
        for &a in &sweep_values() {
            for &b in &sweep_values() {
                if check_segment(n, a, b).certified {
                    certified += 1;
                    let minors = minor_oracle(n, a, b).unwrap();
                    assert!(minors.iter().all(|&m| m > 0.0), "n={n} a={a} b={b}: {minors:?}");
                }
            }
        }
    }
    assert!(certified > 10_000);
}

#[test]
fn minors_match_dense_determinants() {
    for n in 1..=6 {
        for (a, b) in [(0.3, 2.5), (1.7, 0.4), (2.0, 2.0)] {
            let mut m = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                m[(i, i)] = 2.0;
                if i + 1 < n {
                    m[(i, i + 1)] = -1.0;
                    m[(i + 1, i)] = -1.0;
                }
            }
            m[(0, 0)] = a;
            if n > 1 {
                m[(n - 1, n - 1)] = b;
            }
            let minors = minor_oracle(n, a, b).unwrap();
            for k in 1..=n {
                let det = m.view((0, 0), (k, k)).determinant();
                assert!((minors[k - 1] - det).abs() < 1e-12, "n={n} k={k}");
            }
        }
    }
}

#[test]
fn appendix_recurrences_hold() {
    for n in 3..=8 {
        for &a in &sweep_values() {
            for &b in &sweep_values() {
                let full = minor_oracle(n, a, b).unwrap();
                let reduced = minor_oracle(n - 1, 2.0 - 1.0 / a, b).unwrap();
                // Q_{n-1}^{(n)}(a) = a Q_{n-2}^{(n-1)}(2 - 1/a)
                let q = full[n - 2];
                let q_rec = a * reduced[n - 3];
                // P^{(n)}(a, b) = a P^{(n-1)}(2 - 1/a, b)
                let p = full[n - 1];
                let p_rec = a * reduced[n - 2];
                for (x, y) in [(q, q_rec), (p, p_rec)] {
                    let rel = (x - y).abs() / x.abs().max(1e-300);
                    assert!(rel < 1e-10 || (x - y).abs() < 1e-13, "n={n} a={a} b={b}: {x} vs {y}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn checker_is_monotone(n in 1usize..10, a in 0.0f64..3.0, b in 0.0f64..3.0, da in 0.0f64..1.0, db in 0.0f64..1.0) {
        if check_segment(n, a, b).certified {
            prop_assert!(check_segment(n, a + da, b + db).certified);
        }
    }
}

fn min_eigenvalue(sys: &ebm_core::assembly::OperatorSystem<f64>) -> f64 {
    let n = sys.dim();
    let mut m = DMatrix::zeros(n, n);
    for (r, row) in sys.a.to_dense().into_iter().enumerate() {
        for (c, v) in row.into_iter().enumerate() {
            m[(r, c)] = v;
        }
    }
    m.symmetric_eigenvalues().min()
}

#[test]
fn certified_operators_have_positive_spectrum() {
    let geoms: Vec<(Geometry<f64>, Grid<f64>)> = vec![
        (shapes::glass(), Grid::square(0.0, 1.0, 28).unwrap()),
        (shapes::tilted_square(), Grid::square(-3.0, 3.0, 24).unwrap()),
        (shapes::disk(0.77), Grid::square(-1.0, 1.0, 22).unwrap()),
    ];
    for (geom, grid) in geoms {
        for strategy in [Strategy::Mixed, Strategy::Rbf] {
            let p = ProblemSpec::poisson(geom.clone(), Coefficient::Constant(1.0), |_, _| 0.0, |_, _| 0.0);
            let ctx = GridContext::new(grid, &geom).unwrap();
            let sys = assemble(&p, &ctx, AssemblyOptions::with_strategy(strategy)).unwrap();
            assert!(sys.dim() <= 400, "{}", sys.dim());
            let cert = check_operator(&sys);
            if cert.verdict == Verdict::Certified {
                assert!(min_eigenvalue(&sys) > 0.0);
            }
        }
    }
}

#[test]
fn uncut_disk_is_certified_and_dominant() {
    // interface a hair beyond the outermost inside points along every grid line
    let geom = Geometry::level_set(|x: f64, y: f64| (x.abs() - 0.5 - 1e-13).max(y.abs() - 0.5 - 1e-13));
    let p = ProblemSpec::poisson(geom.clone(), Coefficient::Constant(1.0), |_, _| 0.0, |_, _| 0.0);
    let ctx = GridContext::new(Grid::square(-1.0, 1.0, 20).unwrap(), &geom).unwrap();
    let sys = assemble(&p, &ctx, AssemblyOptions::default()).unwrap();
    let cert = check_operator(&sys);
    assert_eq!(cert.verdict, Verdict::Certified);
    assert!(cert.dominance.dominant);
}

#[test]
fn variable_beta_is_skipped() {
    let p = ProblemSpec::poisson(
        shapes::disk(0.5),
        Coefficient::variable(|x: f64, y: f64| 0.25 - x * x - y * y),
        |_, _| 0.0,
        |_, _| 0.0,
    );
    let ctx = GridContext::new(Grid::square(-1.0, 1.0, 40).unwrap(), &p.geometry).unwrap();
    let sys = assemble(&p, &ctx, AssemblyOptions::default()).unwrap();
    let cert = check_operator(&sys);
    assert_eq!(cert.verdict, Verdict::Skipped);
    assert_eq!(cert.dominance, diag_dominance(sys.a.csr()));
}

#[test]
fn line_only_assemblies_are_dominant() {
    for n in (30..60).step_by(3) {
        let p = ProblemSpec::poisson(shapes::disk(0.77), Coefficient::Constant(2.0), |_, _| 0.0, |_, _| 0.0);
        let ctx = GridContext::new(Grid::square(-1.0, 1.0, n).unwrap(), &p.geometry).unwrap();
        let sys = assemble(&p, &ctx, AssemblyOptions::default()).unwrap();
        if sys.method_counts().1 == 0 {
            assert!(diag_dominance(sys.a.csr()).dominant);
        }
    }
}
