//! Inputs shared by the benchmarks.

use umbilic::family::{perturb, symmetric_umbilic, GeneratingFunction, Perturbation};

/// The symmetric umbilic with radial perturbation `eps`.
pub fn perturbed(eps: f64) -> GeneratingFunction {
    perturb(&symmetric_umbilic(), &Perturbation::radial(eps)).expect("small perturbation")
}
