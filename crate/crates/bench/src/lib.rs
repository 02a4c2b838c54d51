//! Benchmark fixtures for the solver kernels.

use vlasov_dg::scenario::initial_state;
use vlasov_dg::{BasisFamily, Discretization, PhaseMesh, Scenario, SolutionState};

/// Choice-1 Weibel data on an `n^3` mesh of degree `k`.
pub fn weibel_fixture(n: usize, k: usize) -> (Discretization, SolutionState) {
    let scenario = Scenario::preset("weibel-choice1").expect("preset");
    let mesh = PhaseMesh::new(scenario.domain(1.2).expect("domain"), n, n, n).expect("mesh");
    let disc = Discretization::new(mesh, k, BasisFamily::PType).expect("discretization");
    let state = initial_state(&disc, &scenario, k + 4).expect("initial state");
    (disc, state)
}
