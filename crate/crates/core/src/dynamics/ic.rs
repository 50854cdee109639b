use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::InitialState;
use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, is_real, normalize_max_positive, real_eigenvector};
use crate::network::{CycleDescriptor, FixedPoint, HetNetwork};
use crate::stability::{TransitionMatrix, EIGENVECTOR_SIGN_TOL};

/// The fixed point with independent uniform `(0, epsilon)` noise on every
/// inactive component. Deterministic in `seed`.
pub fn perturbed_ic(fp: &FixedPoint, n: usize, epsilon: f64, seed: u64) -> Result<Vec<f64>> {
    if !(epsilon >= 0.0 && epsilon < fp.xhat / 10.0) {
        return Err(Error::Domain(format!(
            "epsilon must lie in [0, xhat/10) = [0, {}), got {epsilon}",
            fp.xhat / 10.0
        )));
    }
    let mut x = fp.state(n);
    if epsilon == 0.0 {
        return Ok(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, v) in x.iter_mut().enumerate() {
        if !fp.active.contains(k) {
            let u: f64 = rng.sample(Open01);
            *v = epsilon * u;
        }
    }
    Ok(x)
}

/// Log-space state at the first fixed point of `cycle` whose coordinates are
/// `scale * v`, with `v` the eigenvector of eigenvalue `which_eig` (in
/// descending-modulus order) scaled so its largest entry is `1`. Active
/// nodes and the node just displaced on entry sit at `xhat`.
pub fn eigenvector_ic(
    net: &HetNetwork,
    cycle: &CycleDescriptor,
    m: &TransitionMatrix,
    which_eig: usize,
    scale: f64,
) -> Result<InitialState> {
    if !(scale < 0.0) {
        return Err(Error::Domain(format!("scale must be negative, got {scale}")));
    }
    if m.coordinates.len() != m.q {
        return Err(Error::Domain("transition matrix carries no node coordinates".into()));
    }
    let ev = eigenvalues(&m.entries)?;
    let lambda = *ev.get(which_eig).ok_or_else(|| {
        Error::Domain(format!("eigenvalue index {which_eig} out of range for q = {}", m.q))
    })?;
    if !is_real(lambda) {
        return Err(Error::Domain(format!("eigenvalue {lambda} is not real")));
    }
    let v = normalize_max_positive(&real_eigenvector(&m.entries, lambda.re));
    if v.iter().any(|&x| x <= EIGENVECTOR_SIGN_TOL) {
        return Err(Error::Domain(format!(
            "eigenvector of {} has mixed signs or zeros",
            lambda.re
        )));
    }
    let fp = &net.fixed_points[cycle.fixed_points[0]];
    let ln_xhat = fp.xhat.ln();
    let mut y = vec![ln_xhat; net.graph.n()];
    for (&node, &vk) in m.coordinates.iter().zip(v.iter()) {
        y[node] = scale * vk;
    }
    Ok(InitialState::Log(y))
}
