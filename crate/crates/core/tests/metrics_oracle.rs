#[path = "support/oracles.rs"]
mod oracles;

use mc_elmap::metrics::{angular_similarity, frechet, jerk, sse, MetricsReport};
use mc_elmap::Trajectory;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_traj(rng: &mut ChaCha8Rng, len: usize, d: usize) -> Trajectory {
    Trajectory::new(DMatrix::from_fn(len, d, |_, _| rng.random_range(-1.0..1.0))).unwrap()
}

#[test]
fn frechet_matches_coupling_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..150 {
        let d = rng.random_range(1..=3);
        let (la, lb) = (rng.random_range(3..=6), rng.random_range(3..=6));
        let a = random_traj(&mut rng, la, d);
        let b = random_traj(&mut rng, lb, d);
        let fast = frechet(&a, &b).unwrap();
        let brute = oracles::brute_frechet(&a, &b);
        assert!((fast - brute).abs() <= 1e-12, "{fast} vs {brute}");
        assert!((frechet(&b, &a).unwrap() - fast).abs() <= 1e-12);
    }
}

#[test]
fn cubic_jerk_closed_form() {
    // Third difference of c * t^3 + lower terms is 6c at every step.
    for (n, c) in [(4usize, 1.0), (10, 0.5), (25, -2.0)] {
        let p = DMatrix::from_fn(n, 2, |t, j| {
            let t = t as f64;
            if j == 0 { c * t.powi(3) - 3.0 * t * t + t } else { 2.0 * c * t.powi(3) + 7.0 }
        });
        let expected = 36.0 * (c * c + 4.0 * c * c) * (n - 3) as f64;
        assert_eq!(jerk(&Trajectory::new(p).unwrap()).unwrap(), expected);
    }
}

fn interp(p: &DMatrix<f64>, len: usize) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::from_fn(len, p.ncols(), |k, j| {
        let s = k as f64 * (n - 1) as f64 / (len - 1) as f64;
        let i = (s.floor() as usize).min(n - 2);
        let f = s - i as f64;
        p[(i, j)] * (1.0 - f) + p[(i + 1, j)] * f
    })
}

#[test]
fn sse_and_angular_against_hand_resampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let (la, lb) = (rng.random_range(3..=12), rng.random_range(3..=12));
        let a = random_traj(&mut rng, la, 2);
        let b = random_traj(&mut rng, lb, 2);
        let len = a.len().max(b.len());
        let (ra, rb) = (interp(a.points(), len), interp(b.points(), len));
        let expected = (&ra - &rb).norm_squared();
        assert!((sse(&a, &b).unwrap() - expected).abs() <= 1e-12 * (1.0 + expected));
        let mut ang = 0.0;
        for t in 0..len - 1 {
            let u = ra.row(t + 1) - ra.row(t);
            let v = rb.row(t + 1) - rb.row(t);
            ang += (1.0 - u.dot(&v) / (u.norm() * v.norm())) / 2.0;
        }
        ang /= (len - 1) as f64;
        assert!((angular_similarity(&a, &b).unwrap() - ang).abs() < 1e-12);
    }
}

#[test]
fn report_averages_over_demos() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let repro = random_traj(&mut rng, 8, 2);
    let demos: Vec<_> = (0..3).map(|_| random_traj(&mut rng, 8, 2)).collect();
    let r = MetricsReport::against_set(&repro, &demos).unwrap();
    let mean_f: f64 = demos.iter().map(|d| frechet(&repro, d).unwrap()).sum::<f64>() / 3.0;
    assert!((r.frechet - mean_f).abs() < 1e-12);
    assert_eq!(r.jerk, jerk(&repro).unwrap());
    assert!(MetricsReport::against_set(&repro, &[]).is_err());
}
