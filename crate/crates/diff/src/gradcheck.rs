use crate::error::DiffError;
use crate::params::{Bound, ParamStore};
use crate::tape::{Tape, Var};

/// Step for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Gradients smaller than this are compared in absolute rather than
/// relative terms; finite-difference roundoff is about `1e-11 / FD_STEP`.
pub const REL_FLOOR: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.params.iter().all(|p| p.max_rel_error < self.tol)
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params.iter().max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

pub fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares reverse-mode gradients of the scalar built by `f` against
/// central differences, for every element of every unfrozen parameter.
pub fn grad_check<F>(store: &ParamStore, f: F, tol: f64) -> Result<GradCheckReport, DiffError>
where
    F: Fn(&mut Tape, &Bound) -> Result<Var, DiffError>,
{
    let mut tape = Tape::new();
    let bound = store.bind(&mut tape);
    let loss = f(&mut tape, &bound)?;
    let grads = bound.collect(&tape.backward(loss)?, store);

    let eval = |s: &ParamStore| -> Result<f64, DiffError> {
        let mut tape = Tape::new();
        let bound = s.bind(&mut tape);
        let loss = f(&mut tape, &bound)?;
        Ok(tape.value(loss).item())
    };

    let mut work = store.clone();
    let mut params = Vec::new();
    for id in store.ids() {
        if store.is_frozen(id) {
            continue;
        }
        let mut worst = 0.0f64;
        for j in 0..store.get(id).numel() {
            let x0 = store.get(id).data()[j];
            work.get_mut(id).data_mut()[j] = x0 + FD_STEP;
            let up = eval(&work)?;
            work.get_mut(id).data_mut()[j] = x0 - FD_STEP;
            let down = eval(&work)?;
            work.get_mut(id).data_mut()[j] = x0;
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(rel_error(grads[id.index()].data()[j], numeric));
        }
        params.push(ParamCheck {
            name: store.name(id).to_string(),
            max_rel_error: worst,
        });
    }
    Ok(GradCheckReport { params, tol })
}
