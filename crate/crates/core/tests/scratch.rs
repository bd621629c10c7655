use smoothlab_core::approx::{best_approx, ApproxSpace, BestApproxConfig};
use smoothlab_core::catalog::FunctionSpec;
use smoothlab_core::quasinorm::PNorm;

#[test]
#[ignore]
fn oversolve_corner_n32() {
    let f = FunctionSpec::FEpsR { eps: 1e-3, r: 2 }.build().unwrap();
    let p = PNorm::new(0.6);
    for (starts, iters, factor, path) in [
        (8usize, 300usize, 32usize, vec![]),
        (24, 600, 32, vec![]),
        (24, 600, 64, vec![]),
        (40, 900, 64, vec![2.0, 1.5, 1.2, 1.0, 0.9, 0.8, 0.72, 0.66, 0.6]),
    ] {
        let cfg = BestApproxConfig {
            starts, max_iters: iters, seed: 42, collocation_factor: factor,
            p_path: path, ..Default::default()
        };
        let t = std::time::Instant::now();
        let r = best_approx(&f, ApproxSpace::trig(32), p, &cfg).unwrap();
        println!("starts={starts} iters={iters} m={factor}d: E={:.6e} (start {}) {:.1}s",
                 r.error, r.chosen_start, t.elapsed().as_secs_f64());
    }
}
