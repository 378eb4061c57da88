//! Operation counts grow linearly in N when the depth follows log4 N.

use afmm::{EvalSet64, FmmConfig, FmmEngine64, SourceSet64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn work(n: usize, theta: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let pos = (0..n).map(|_| C64::new(rng.gen(), rng.gen())).collect();
    let s = SourceSet64::new(pos, vec![C64::new(1.0, 0.0); n]).unwrap();
    let e = EvalSet64::at_sources(&s);
    let n_levels = ((n as f64).ln() / 4f64.ln()).round() as usize + 1;
    let cfg = FmmConfig {
        theta,
        n_levels,
        ..Default::default()
    };
    FmmEngine64::new(cfg).unwrap().plan(&s, &e).unwrap().work()
}

#[test]
fn work_per_point_is_flat() {
    for theta in [0.35, 0.5, 0.65] {
        let per: Vec<f64> = [1 << 12, 1 << 14, 1 << 16].iter().map(|&n| work(n, theta) / n as f64).collect();
        let c = per.iter().sum::<f64>() / per.len() as f64;
        for w in &per {
            assert!((w - c).abs() <= 0.25 * c, "θ = {theta}: {per:?}");
        }
    }
}
