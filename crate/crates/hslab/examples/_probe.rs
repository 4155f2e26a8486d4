use hslab::halfspace::{geometric_schedule, solve_entire, EntireOptions};
use hslab::solver::SolveOptions;
use hslab::testfn::gap_ladder;

fn main() {
    let t0 = std::time::Instant::now();
    let opts = EntireOptions {
        r_max: 12.0,
        grid_n: 192,
        gamma: 3.0,
        eps_schedule: geometric_schedule(0.4, 0.03, 6),
        solve: SolveOptions { tol_grad: 3e-7, max_iter: 6000, ..Default::default() },
    };
    let entire = solve_entire(3, 1.5, 0.5, -1.0, &opts).unwrap();
    println!("halfspace solve: {:?}", t0.elapsed());
    println!("c1 = {:.8}", entire.c1);
    println!("K1 = {:.6} K2 = {:.6} K3 = {:.6} (tails {:?})",
        entire.constants.k1, entire.constants.k2, entire.constants.k3, entire.constants.tail_fractions);
    println!("decay: exp {:.3} res {:.2e} conclusive {}", entire.decay.exponent, entire.decay.residual, entire.decay.conclusive);
    println!("kelvin dev = {:.4}, tail d = {:.5}", entire.kelvin_deviation, entire.tail.d);
    for s in &entire.steps {
        println!("  eps {:.4} -> c {:.8} m {:.3} iters {{?}} grad {:.1e}", s.epsilon, s.c_level, s.m, s.grad_norm);
    }

    for alpha in [-0.5f64, 0.0] {
        let t1 = std::time::Instant::now();
        let unit = 0.6 / entire.r_max;
        let eps_list = [unit / 10.0, unit / 20.0, unit / 40.0, unit / 80.0];
        let ladder = gap_ladder(&entire, alpha, 0.6, &eps_list, 1.0, 1536).unwrap();
        println!("alpha = {alpha}: ladder in {:?}", t1.elapsed());
        for r in &ladder.records {
            println!("  eps {:.6}: A {:.6} maxPhi {:.8} t* {:.4} gap {:+.4e}",
                r.eps, r.a, r.max_phi, r.t_at_max, r.gap);
        }
        println!("  slope fit {:+.5e}  (-H K1/2 = {:+.5e})", ladder.slope, ladder.predicted_slope);
        println!("  shift slopes {:?}", ladder.shift_slopes);
        println!("  predicted    {:?}", ladder.predicted_shifts);
    }
}
