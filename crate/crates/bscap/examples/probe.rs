use bscap::circuit::*;
use bscap::Snr;
use std::time::Instant;

fn main() {
    let rho = Snr::from_db(20.0).unwrap();
    let t53 = SwitchedLoadTopology::new(5, 3).unwrap();
    let seeds: Vec<u64> = (0..16).collect();
    let tm = Instant::now();
    let best = optimize_circuit_multi(&t53, rho, &seeds, &CircuitOptimizeOptions::default()).unwrap();
    println!("5c3r best-of-16: mi {:.4} conv={} total {:?}", best.mi_bpcu, best.converged, tm.elapsed());

    let t50 = SwitchedLoadTopology::new(5, 0).unwrap();
    let tm = Instant::now();
    let best = optimize_circuit_multi(&t50, rho, &seeds, &CircuitOptimizeOptions::default()).unwrap();
    println!("5c0r best-of-16: mi {:.4} conv={} total {:?}", best.mi_bpcu, best.converged, tm.elapsed());
}
