use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::{default_names, TimeSeries, VarModel};
use super::yule_walker::{check_stability, companion_form};
use crate::error::{Result, TrgcError};
use crate::linalg::{psd_factor, solve_discrete_lyapunov};

/// Draws `T` samples of a stable VAR with Gaussian innovations `N(0, Σ)`.
///
/// The initial state `[z_0; …; z_{-p+1}]` is drawn from the stationary
/// distribution, then `burn_in` further samples are generated and dropped.
pub fn simulate<R: Rng + ?Sized>(
    model: &VarModel,
    t: usize,
    rng: &mut R,
    burn_in: usize,
) -> Result<TimeSeries> {
    let stability = check_stability(model);
    if !stability.stable {
        return Err(TrgcError::Unstable {
            radius: stability.spectral_radius,
        });
    }
    if t == 0 {
        return Err(TrgcError::InvalidInput("series length must be positive".into()));
    }
    let d = model.dim();
    let p = model.order();
    let comp = companion_form(model);
    let stationary = solve_discrete_lyapunov(&comp.matrix, &comp.resid_cov)?;
    let init_factor = psd_factor(&stationary)?;
    let innov_factor = psd_factor(model.resid_cov())?;

    let draw = |n: usize, rng: &mut R| -> DVector<f64> {
        DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
    };

    // history[k] = z_{t-1-k}
    let init = &init_factor * draw(d * p, rng);
    let mut history: Vec<DVector<f64>> = (0..p)
        .map(|k| init.rows(k * d, d).into_owned())
        .collect();

    let total = burn_in + t;
    let mut out = DMatrix::zeros(t, d);
    for step in 0..total {
        let mut z = &innov_factor * draw(d, rng);
        for (k, a) in model.coeffs().iter().enumerate() {
            z += a * &history[k];
        }
        if step >= burn_in {
            let row = step - burn_in;
            for c in 0..d {
                out[(row, c)] = z[c];
            }
        }
        history.rotate_right(1);
        history[0] = z;
    }
    TimeSeries::new(out, default_names(d))
}

/// [`simulate`] with a ChaCha8 generator seeded from `seed`; the seed is
/// recorded on the returned series.
pub fn simulate_seeded(model: &VarModel, t: usize, seed: u64, burn_in: usize) -> Result<TimeSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(simulate(model, t, &mut rng, burn_in)?.with_seed(Some(seed)))
}
