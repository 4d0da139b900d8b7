//! Run the same quench through all four engines and print C^zz_1(t).
//!
//! Usage: cargo run --release --example four_engines

use quench_core::analysis::XiSeries;
use quench_core::dtwa::{run_dtwa, TrajectoryEnsembleConfig};
use quench_core::variational::{evolve_tvmc, ground_state_solve, SrConfig, TvmcConfig};
use quench_core::{fermion, sector, IsingParams, QuenchProtocol};

fn main() {
    let n = 10;
    let h_f = 1.5;
    let protocol = QuenchProtocol::uniform(
        IsingParams::tfim(n, 100.0),
        IsingParams::tfim(n, h_f),
        2.0,
        20,
    )
    .unwrap();
    println!("quench (h_x = 100, h_z = 0) -> (h_x = {h_f}, h_z = 0), N = {n}\n");

    let exact = sector::quench_series(&protocol).unwrap();
    let free = fermion::quench_series(&protocol).unwrap();

    let sr = SrConfig { gamma: 1e-3, max_iters: 4000, ..SrConfig::default() };
    let ground = ground_state_solve(&protocol.initial, 4, true, &sr).unwrap();
    println!(
        "SR ground state: E = {:.8} after {} iterations",
        ground.final_energy().re,
        ground.iterations
    );
    let rbm = evolve_tvmc(&ground.ansatz, &protocol, &TvmcConfig::default()).unwrap();

    let semi = run_dtwa(&protocol, &TrajectoryEnsembleConfig::new(5000, 1)).unwrap();

    println!("\n   t      exact    fermion    rbm(a=4)   dtwa");
    for (ti, t) in protocol.times.iter().enumerate() {
        println!(
            "{t:5.2}  {:+.5}   {:+.5}   {:+.5}   {:+.5} ± {:.5}",
            exact.values[ti][1],
            free.values[ti][1],
            rbm.series.values[ti][1],
            semi.series.values[ti][1],
            semi.series.stderr.as_ref().unwrap()[ti][1],
        );
    }

    let xi = XiSeries::from_correlations(&exact);
    if let Some(x) = xi.xi_at(1.0) {
        println!("\nexact correlation length at t = 1: xi = {x:.4}");
    }
}
