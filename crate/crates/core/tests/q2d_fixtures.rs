use dsharp_core::q2d::{self, design_matrix, fit_coefficients, Lambda, Q2dOptions, QpData, Solver};
use dsharp_core::sharpening::make_dsharp;
use dsharp_core::{BaseModel, Family, Univariate};

fn bimodal() -> QpData {
    QpData::new(vec![
        (-3.40, 0.04),
        (-2.53, 0.15),
        (-1.20, 0.39),
        (0.0, 0.50),
        (2.0, 0.75),
        (2.83, 0.90),
        (3.60, 0.97),
    ])
    .unwrap()
}

fn navy() -> QpData {
    QpData::new(vec![(0.12, 0.01), (1.30, 0.20), (3.00, 0.50), (7.00, 0.80), (26.17, 0.99)])
        .unwrap()
}

fn local_maxima<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    (1..n).filter(|&i| ys[i] > ys[i - 1] && ys[i] >= ys[i + 1]).map(|i| xs[i]).collect()
}

#[test]
fn two_cluster_pairs_are_bimodal() {
    let fit = q2d::q2d(&bimodal(), Family::Normal, &Q2dOptions::default()).unwrap();
    let peaks = local_maxima(|x| fit.model.pdf(x), -8.0, 8.0, 4000);
    assert_eq!(peaks.len(), 2, "{peaks:?}");
    assert!((peaks[0] + 2.0).abs() <= 0.5 && (peaks[1] - 2.0).abs() <= 0.5, "{peaks:?}");
}

#[test]
fn navy_fit_at_small_penalty_reproduces_pairs() {
    let base = BaseModel::exponential(4.32).unwrap();
    let (v, s0) = design_matrix(&navy(), &base, 6).unwrap();
    let lmax = q2d::solve_lasso(&v, &s0, Lambda::Fixed(0.0)).unwrap().lambda_max;
    let opts = Q2dOptions { lambda: Lambda::Fixed(1e-4 * lmax), ..Q2dOptions::default() };
    let fit = fit_coefficients(&navy(), &base, &opts).unwrap();
    for &(x, p) in navy().pairs() {
        let got = fit.model.cdf(x);
        assert!((got - p).abs() < 0.02, "x={x}: {got} vs {p}");
    }
    // the repaired model moves mass toward the peak and into the tail
    assert!(fit.model.pdf(0.5) != base.pdf(0.5));
}

#[test]
fn navy_median_rule() {
    let b = q2d::init_exponential(&navy()).unwrap();
    assert!((b.params()[0].1 - 4.328).abs() < 1e-3);
}

#[test]
fn planted_second_coefficient() {
    let base = BaseModel::normal(0.0, 1.0).unwrap();
    let truth = make_dsharp(base.clone(), &[(2, 0.25)]).unwrap();
    let ps = [0.05, 0.15, 0.3, 0.5, 0.7, 0.85, 0.95];
    let pairs = ps.iter().map(|&p| (truth.quantile(p).unwrap(), p)).collect();
    let qp = QpData::new(pairs).unwrap();
    let opts = Q2dOptions { m: 2, solver: Solver::Ols, lambda: Lambda::Auto };
    let fit = fit_coefficients(&qp, &base, &opts).unwrap();
    assert!(fit.beta[0].abs() < 1e-6 && (fit.beta[1] - 0.25).abs() < 1e-6, "{:?}", fit.beta);
}

#[test]
fn square_ols_interpolates() {
    let base = BaseModel::normal(0.0, 1.0).unwrap();
    let qp = QpData::new(vec![(-1.5, 0.05), (-0.4, 0.3), (0.2, 0.6), (1.1, 0.9)]).unwrap();
    let opts = Q2dOptions { m: 4, solver: Solver::Ols, lambda: Lambda::Auto };
    let fit = fit_coefficients(&qp, &base, &opts).unwrap();
    for &(x, p) in qp.pairs() {
        assert!((fit.series_cdf(x) - p).abs() < 1e-6);
    }
}

#[test]
fn lasso_solutions_satisfy_kkt() {
    let base = BaseModel::normal(0.0, 2.3).unwrap();
    let (v, s0) = design_matrix(&bimodal(), &base, 6).unwrap();
    let lmax = q2d::solve_lasso(&v, &s0, Lambda::Fixed(0.0)).unwrap().lambda_max;
    for lambda in q2d::lambda_grid(lmax) {
        let fit = q2d::solve_lasso(&v, &s0, Lambda::Fixed(lambda)).unwrap();
        let fitted = s0.mul_vec(&fit.beta);
        for j in 0..6 {
            // gradient of the squared loss: -2 s_j^T r
            let g: f64 = -2.0 * (0..s0.rows()).map(|i| s0.get(i, j) * (v[i] - fitted[i])).sum::<f64>();
            if fit.beta[j] == 0.0 {
                assert!(g.abs() <= lambda * (1.0 + 1e-6) + 1e-9, "j={j} lambda={lambda}");
            } else {
                assert!((g + lambda * fit.beta[j].signum()).abs() < 1e-6 * lmax, "j={j} lambda={lambda}");
            }
        }
    }
}

#[test]
fn lasso_support_grows_on_orthogonal_design() {
    let s0 = q2d::Matrix::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, 0.0],
    ]);
    let v = [0.3, -0.1, 0.05, 0.2];
    let lmax = q2d::solve_lasso(&v, &s0, Lambda::Fixed(0.0)).unwrap().lambda_max;
    let mut last = 0;
    for lambda in q2d::lambda_grid(lmax) {
        let fit = q2d::solve_lasso(&v, &s0, Lambda::Fixed(lambda)).unwrap();
        let nz = fit.beta.iter().filter(|b| **b != 0.0).count();
        assert!(nz >= last);
        last = nz;
    }
    assert_eq!(last, 3);
}
