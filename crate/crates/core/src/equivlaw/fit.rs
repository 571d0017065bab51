use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use super::{EquivalenceLaw, EquivalenceTuple, LossSpace};
use crate::error::{Error, Result};

/// Starting `c1` values: `0.25 * 2^(k/2)` for `k = 0..=8`.
pub const C1_STARTS: [f64; 9] = [
    0.25,
    0.5 * FRAC_1_SQRT_2,
    0.5,
    FRAC_1_SQRT_2,
    1.0,
    SQRT_2,
    2.0,
    2.0 * SQRT_2,
    4.0,
];

/// Starting `c2` values.
pub const C2_STARTS: [f64; 7] = [1.1, 1.5, 2.0, 4.0, 8.0, 16.0, 40.0];

const MAX_ITER: usize = 500;

/// Where one start went.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartOutcome {
    pub c1_start: f64,
    pub c2_start: f64,
    /// Final `(c1, c2)`, `None` if the start diverged.
    pub result: Option<(f64, f64)>,
    /// Sum of squared residuals at the end point.
    pub loss: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LawDiagnostics {
    pub loss_space: LossSpace,
    /// Sum of squared residuals in `loss_space` at the optimum.
    pub loss: f64,
    /// Root mean square of `log y - log y_hat`, whatever the loss space.
    pub log_rmse: f64,
    /// Tuples used in the fit.
    pub n_tuples: usize,
    /// Tuples with `n_syn+ = 0`, left out because `log 0` is undefined.
    pub n_zero_excluded: usize,
    /// Index into `starts` of the chosen optimum.
    pub best_start: usize,
    pub starts: Vec<StartOutcome>,
}

/// `ln(1 + e^w)` without overflow.
fn softplus(w: f64) -> f64 {
    if w > 30.0 {
        w + (-w).exp().ln_1p()
    } else {
        w.exp().ln_1p()
    }
}

fn sigmoid(w: f64) -> f64 {
    1.0 / (1.0 + (-w).exp())
}

/// `ln(e^x - 1)` for `x > 0`.
fn log_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

struct Problem<'a> {
    /// `(tau n_base, r, y)` per tuple.
    data: &'a [(f64, f64, f64)],
    loss: LossSpace,
}

impl Problem<'_> {
    /// Residuals and their Jacobian rows in `(u, w)`, `c1 = e^u`,
    /// `c2 = 1 + e^w`.
    fn eval(&self, u: f64, w: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let l = softplus(w);
        let s = sigmoid(w);
        let mut res = Vec::with_capacity(self.data.len());
        let mut jac = Vec::with_capacity(self.data.len());
        for &(tn, r, y) in self.data {
            let rl = r * l;
            let log_pred = tn * u + log_expm1(rl);
            // d/dw log(e^{rL} - 1) = r sigma(w) / (1 - e^{-rL})
            let dw = r * s / -(-rl).exp_m1();
            match self.loss {
                LossSpace::Log => {
                    res.push(log_pred - y.ln());
                    jac.push([tn, dw]);
                }
                LossSpace::Linear => {
                    let pred = log_pred.exp();
                    res.push(pred - y);
                    jac.push([pred * tn, pred * dw]);
                }
            }
        }
        (res, jac)
    }

    fn loss(&self, u: f64, w: f64) -> f64 {
        let v: f64 = self.eval(u, w).0.iter().map(|e| e * e).sum();
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }

    /// Gauss-Newton with step halving. Falls back to steepest descent
    /// when the normal matrix is singular.
    fn descend(&self, mut u: f64, mut w: f64) -> (f64, f64, f64, usize) {
        let mut f = self.loss(u, w);
        let mut it = 0;
        while it < MAX_ITER && f.is_finite() {
            it += 1;
            let (res, jac) = self.eval(u, w);
            let (mut a, mut b, mut c, mut gu, mut gw) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for (e, j) in res.iter().zip(&jac) {
                a += j[0] * j[0];
                b += j[0] * j[1];
                c += j[1] * j[1];
                gu += j[0] * e;
                gw += j[1] * e;
            }
            let det = a * c - b * b;
            let (du, dw) = if det > 1e-14 * (a * c).max(f64::MIN_POSITIVE) {
                (-(c * gu - b * gw) / det, -(a * gw - b * gu) / det)
            } else {
                let scale = (a + c).max(f64::MIN_POSITIVE);
                (-gu / scale, -gw / scale)
            };
            if !(du.is_finite() && dw.is_finite()) {
                break;
            }
            let mut step = 1.0;
            let mut improved = false;
            for _ in 0..60 {
                let (nu, nw) = (u + step * du, w + step * dw);
                let nf = self.loss(nu, nw);
                if nf < f {
                    let done = f - nf <= 1e-15 * f
                        || (step * du).abs() + (step * dw).abs() <= 1e-13 * (1.0 + u.abs() + w.abs());
                    u = nu;
                    w = nw;
                    f = nf;
                    improved = !done;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (u, w, f, it)
    }
}

/// Fits `(c1, c2)` to solved tuples at fixed `tau`.
///
/// Runs Gauss-Newton from each of the 63 `(c1, c2)` start pairs and keeps
/// the lowest loss (earliest start on exact ties). Tuples with
/// `n_syn+ = 0` are counted but not fitted. Needs at least three usable
/// tuples covering two distinct real ratios.
pub fn fit_law(tuples: &[EquivalenceTuple], tau: f64, loss: LossSpace) -> Result<EquivalenceLaw> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
    }
    let usable: Vec<&EquivalenceTuple> = tuples.iter().filter(|t| t.n_syn_plus > 0.0).collect();
    let n_zero_excluded = tuples.len() - usable.len();
    let ratios: BTreeSet<u64> = usable.iter().map(|t| t.real_ratio().to_bits()).collect();
    if usable.len() < 3 || ratios.len() < 2 {
        return Err(Error::InsufficientData {
            context: format!(
                "law fit ({} usable tuples over {} distinct ratios, need 3 over 2)",
                usable.len(),
                ratios.len()
            ),
            needed: 3,
            found: usable.len(),
        });
    }
    if let Some(t) = usable
        .iter()
        .find(|t| !(t.real_ratio() > 0.0) || !t.syn_ratio().is_finite())
    {
        return Err(Error::LawFit(format!(
            "tuple at n_base = {} has real ratio {}",
            t.n_base,
            t.real_ratio()
        )));
    }

    let data: Vec<(f64, f64, f64)> = usable
        .iter()
        .map(|t| (tau * t.n_base as f64, t.real_ratio(), t.syn_ratio()))
        .collect();
    let problem = Problem { data: &data, loss };

    let mut starts = Vec::with_capacity(C1_STARTS.len() * C2_STARTS.len());
    let mut best: Option<(usize, f64, f64, f64)> = None;
    for &c1 in &C1_STARTS {
        for &c2 in &C2_STARTS {
            let (u, w, f, iterations) = problem.descend(c1.ln(), (c2 - 1.0).ln());
            let (fc1, fc2) = (u.exp(), 1.0 + w.exp());
            let ok = f.is_finite() && fc1.is_finite() && fc2.is_finite() && fc1 > 0.0 && fc2 > 1.0;
            if ok && best.map_or(true, |(_, bf, ..)| f < bf) {
                best = Some((starts.len(), f, u, w));
            }
            starts.push(StartOutcome {
                c1_start: c1,
                c2_start: c2,
                result: ok.then_some((fc1, fc2)),
                loss: f,
                iterations,
            });
        }
    }

    let Some((best_start, f, u, w)) = best else {
        return Err(Error::LawFit(format!("all {} starts diverged", starts.len())));
    };
    let log_problem = Problem {
        data: &data,
        loss: LossSpace::Log,
    };
    let log_rmse = (log_problem.loss(u, w) / data.len() as f64).sqrt();
    Ok(EquivalenceLaw {
        c1: u.exp(),
        c2: 1.0 + w.exp(),
        tau,
        diagnostics: LawDiagnostics {
            loss_space: loss,
            loss: f,
            log_rmse,
            n_tuples: data.len(),
            n_zero_excluded,
            best_start,
            starts,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivlaw::predict_ratio;

    fn forward(c1: f64, c2: f64, tau: f64, grid: &[(u64, &[f64])]) -> Vec<EquivalenceTuple> {
        grid.iter()
            .flat_map(|&(nb, rs)| {
                rs.iter().map(move |&r| EquivalenceTuple {
                    n_base: nb,
                    n_real_plus: r * nb as f64,
                    n_syn_plus: predict_ratio(c1, c2, tau, nb as f64, r) * nb as f64,
                    surface_id: String::new(),
                })
            })
            .collect()
    }

    const CIFAR: [(u64, &[f64]); 3] = [
        (500, &[1.0, 2.0, 3.0]),
        (5000, &[1.0, 2.0, 3.0]),
        (25_000, &[1.0, 2.0, 3.0]),
    ];

    #[test]
    fn starts_are_powers_of_root_two() {
        for (k, c) in C1_STARTS.iter().enumerate() {
            assert!((c - 0.25 * 2f64.powf(k as f64 / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn recovers_cifar_closed_constants() {
        let tuples = forward(0.88, 2.53, 1.0 / 5000.0, &CIFAR);
        for loss in [LossSpace::Log, LossSpace::Linear] {
            let law = fit_law(&tuples, 1.0 / 5000.0, loss).unwrap();
            assert!((law.c1 - 0.88).abs() < 1e-3, "{loss}: {}", law.c1);
            assert!((law.c2 - 2.53).abs() < 1e-3, "{loss}: {}", law.c2);
            assert_eq!(law.diagnostics.starts.len(), 63);
            assert!(law.diagnostics.log_rmse < 1e-8);
        }
    }

    #[test]
    fn unit_c1_stays_unit() {
        let tuples = forward(1.0, 2.0, 1.0 / 5000.0, &CIFAR);
        let law = fit_law(&tuples, 1.0 / 5000.0, LossSpace::Log).unwrap();
        assert!((law.c1 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_tuples_excluded_and_counted() {
        let mut tuples = forward(0.9, 3.0, 1e-3, &CIFAR[..1]);
        tuples.extend(forward(0.9, 3.0, 1e-3, &[(1000, &[1.0])]));
        tuples.push(EquivalenceTuple {
            n_base: 500,
            n_real_plus: 50.0,
            n_syn_plus: 0.0,
            surface_id: String::new(),
        });
        let law = fit_law(&tuples, 1e-3, LossSpace::Log).unwrap();
        assert_eq!(law.diagnostics.n_zero_excluded, 1);
        assert_eq!(law.diagnostics.n_tuples, 4);
    }

    #[test]
    fn preconditions() {
        let two = forward(0.9, 3.0, 1e-3, &[(500, &[1.0, 2.0])]);
        assert!(matches!(
            fit_law(&two, 1e-3, LossSpace::Log),
            Err(Error::InsufficientData { .. })
        ));
        let one_ratio = forward(0.9, 3.0, 1e-3, &[(500, &[1.0]), (600, &[1.0]), (700, &[1.0])]);
        assert!(fit_law(&one_ratio, 1e-3, LossSpace::Log).is_err());
        assert!(fit_law(&forward(0.9, 3.0, 1e-3, &CIFAR), 0.0, LossSpace::Log).is_err());
    }

    #[test]
    fn numerics_helpers() {
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((softplus(50.0) - 50.0).abs() < 1e-15);
        assert!((log_expm1(1.0) - (1f64.exp() - 1.0).ln()).abs() < 1e-14);
        assert!((log_expm1(800.0) - 800.0).abs() < 1e-12);
    }
}
