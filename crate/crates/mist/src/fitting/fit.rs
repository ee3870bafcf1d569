//! Bounded multi-start simplex fit and identifiability diagnostics.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::model::TransitionModel;
use super::problem::{weighted_cost, CostBreakdown, FitProblem, INVALID_PENALTY};
use crate::error::{Error, Result};
use crate::optim::{nelder_mead_box, NelderMeadOptions};
use crate::params::CircuitParams;

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Starts in addition to the initial guess.
    pub extra_starts: usize,
    /// Uniform perturbation of the extra starts, in units of the box width.
    pub perturbation: f64,
    pub seed: u64,
    pub nelder_mead: NelderMeadOptions,
    /// Compute the Jacobian condition number at the optimum.
    pub condition_number: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            extra_starts: 8,
            perturbation: 0.1,
            seed: 7,
            nelder_mead: NelderMeadOptions { max_evals: 3000, f_tol_abs: 1e-10, f_tol_rel: 1e-9, x_tol: 1e-7, initial_step: 0.05 },
            condition_number: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub start: Vec<f64>,
    pub cost: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: CircuitParams,
    /// (name, value) of the free parameters.
    pub fitted: Vec<(String, f64)>,
    pub cost: f64,
    pub breakdown: Option<CostBreakdown>,
    pub starts: Vec<StartSummary>,
    pub converged: bool,
    pub condition_number: Option<f64>,
}

fn to_unit(problem: &FitProblem, values: &[f64]) -> Vec<f64> {
    values.iter().zip(&problem.bounds).map(|(v, (a, b))| (v - a) / (b - a)).collect()
}

fn from_unit(problem: &FitProblem, x: &[f64]) -> Vec<f64> {
    x.iter().zip(&problem.bounds).map(|(u, (a, b))| a + u * (b - a)).collect()
}

fn scalar_cost(problem: &FitProblem, base: &CircuitParams, values: &[f64]) -> f64 {
    let trial = problem.apply(base, values);
    match weighted_cost(problem, &trial) {
        Ok(c) => c.total,
        Err(_) => INVALID_PENALTY * (problem.points.len() + problem.anchors.len()).max(1) as f64,
    }
}

/// Minimise the weighted cost from `initial` and from perturbed copies of it
/// (in parallel, each with its own seeded stream). The best start wins; ties
/// go to the lower start index, so the result does not depend on scheduling.
pub fn fit(problem: &FitProblem, initial: &CircuitParams, opts: &FitOptions) -> Result<FitResult> {
    problem.validate()?;
    let x0: Vec<f64> = problem.free_params.iter().map(|fp| fp.get(initial)).collect();
    if x0.iter().zip(&problem.bounds).any(|(v, (a, b))| v < a || v > b) {
        return Err(Error::InvalidParameter("initial parameters outside the bounds".into()));
    }
    let u0 = to_unit(problem, &x0);
    let dim = u0.len();
    let mut starts = vec![u0.clone()];
    for s in 0..opts.extra_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(s as u64 + 1);
        starts.push(u0.iter().map(|u| (u + opts.perturbation * rng.gen_range(-1.0..=1.0)).clamp(0.0, 1.0)).collect());
    }
    let lo = vec![0.0; dim];
    let hi = vec![1.0; dim];
    let runs: Vec<_> = starts
        .par_iter()
        .map(|s| {
            let m = nelder_mead_box(|u| scalar_cost(problem, initial, &from_unit(problem, u)), s, &lo, &hi, &opts.nelder_mead);
            (s.clone(), m)
        })
        .collect();
    let best = (0..runs.len()).min_by(|&a, &b| runs[a].1.f.total_cmp(&runs[b].1.f).then(a.cmp(&b))).unwrap();
    let values = from_unit(problem, &runs[best].1.x);
    let params = problem.apply(initial, &values);
    let converged = runs.iter().any(|(_, m)| m.converged);
    let condition_number = if opts.condition_number { jacobian_condition(problem, &params).ok() } else { None };
    let result = FitResult {
        params,
        fitted: problem.free_params.iter().zip(&values).map(|(fp, v)| (fp.name().to_string(), *v)).collect(),
        cost: runs[best].1.f,
        breakdown: weighted_cost(problem, &params).ok(),
        starts: runs
            .iter()
            .map(|(s, m)| StartSummary { start: from_unit(problem, s), cost: m.f, evals: m.evals, converged: m.converged })
            .collect(),
        converged,
        condition_number,
    };
    if !converged {
        return Err(Error::FitFailed { best_cost: result.cost, best: Box::new(result) });
    }
    Ok(result)
}

/// Condition number of the Jacobian of band-weighted model frequencies with
/// respect to the relative change of each free parameter, by central
/// differences.
pub fn jacobian_condition(problem: &FitProblem, p: &CircuitParams) -> Result<f64> {
    let rows = |q: &CircuitParams| -> Result<Vec<f64>> {
        let model = TransitionModel::new(q, &problem.spec)?;
        let fluxes = problem.fluxes();
        let specs: Vec<_> = fluxes.iter().map(|&f| model.at_flux(f)).collect::<Result<_>>()?;
        problem
            .points
            .iter()
            .map(|pt| {
                let k = fluxes.iter().position(|g| g.to_bits() == pt.flux_ext.to_bits()).unwrap();
                specs[k]
                    .get(pt.transition_id)
                    .map(|v| v / pt.band_weight)
                    .ok_or_else(|| Error::InvalidParameter(format!("{} unlabeled at flux {}", pt.transition_id, pt.flux_ext)))
            })
            .collect()
    };
    let h = 1e-5;
    let n = problem.points.len();
    let m = problem.free_params.len();
    let mut jac = Mat::<f64>::zeros(n, m);
    for (c, fp) in problem.free_params.iter().enumerate() {
        let v = fp.get(p);
        let (mut up, mut dn) = (*p, *p);
        fp.set(&mut up, v * (1.0 + h));
        fp.set(&mut dn, v * (1.0 - h));
        let (a, b) = (rows(&up)?, rows(&dn)?);
        for r in 0..n {
            jac[(r, c)] = (a[r] - b[r]) / (2.0 * h);
        }
    }
    let s = jac.singular_values();
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

/// JSON report: params, cost, residuals and condition number.
pub fn fit_report(result: &FitResult) -> serde_json::Value {
    serde_json::json!({
        "params": result.params,
        "fitted": result.fitted.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect::<serde_json::Map<_, _>>(),
        "cost": result.cost,
        "converged": result.converged,
        "residuals": result.breakdown.as_ref().map(|b| &b.points),
        "anchors": result.breakdown.as_ref().map(|b| &b.anchors),
        "condition_number": result.condition_number,
        "starts": result.starts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::{synthetic_points, FreeParam, TransitionId};

    fn small_problem(free: Vec<FreeParam>, initial: &CircuitParams) -> FitProblem {
        let p = CircuitParams::measured_sample();
        let pts = synthetic_points(&p, &[-0.1, 0.0, 0.08], &TransitionId::ALL, 0.01, 0.0, 1).unwrap();
        FitProblem::new(pts, vec![], free, initial, 0.5).unwrap()
    }

    #[test]
    fn single_parameter_round_trip() {
        let truth = CircuitParams::measured_sample();
        let mut init = truth;
        init.e_j *= 1.1;
        let prob = small_problem(vec![FreeParam::EJ], &init);
        let opts = FitOptions { extra_starts: 0, condition_number: false, ..Default::default() };
        let r = fit(&prob, &init, &opts).unwrap();
        assert!((r.params.e_j / truth.e_j - 1.0).abs() < 5e-3, "{}", r.params.e_j);
        assert!(r.cost >= 0.0);
        let (lo, hi) = prob.bounds[0];
        assert!(r.params.e_j >= lo && r.params.e_j <= hi);
    }

    #[test]
    fn initial_outside_bounds_rejected() {
        let init = CircuitParams::measured_sample();
        let mut prob = small_problem(vec![FreeParam::EJ], &init);
        prob.bounds[0] = (init.e_j * 2.0, init.e_j * 3.0);
        assert!(fit(&prob, &init, &FitOptions::default()).is_err());
    }

    #[test]
    fn unit_box_round_trip() {
        let init = CircuitParams::measured_sample();
        let prob = small_problem(vec![FreeParam::EJ, FreeParam::GAc], &init);
        let v = vec![init.e_j * 0.9, init.g_ac * 1.2];
        let back = from_unit(&prob, &to_unit(&prob, &v));
        assert!(back.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-12 * b.abs()));
    }
}
