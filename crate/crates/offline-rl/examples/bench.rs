use cmdp_core::{rng_from_seed, StateVec, Transition};
use offline_rl::{grad_q, QApproximator, QLoss};
use rand::Rng as _;
use std::time::Instant;

fn main() {
    let mut rng = rng_from_seed(0);
    let q = QApproximator::with_default_arch(&mut rng);
    let batch_owned: Vec<Transition> = (0..256)
        .map(|_| Transition {
            s: StateVec::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-8.0..8.0)),
            a: rng.gen_range(0..5),
            m: Some(0),
            u: None,
            s_next: StateVec::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0),
            r: rng.gen_range(-10.0..10.0),
            done: false,
        })
        .collect();
    let batch: Vec<&Transition> = batch_owned.iter().collect();

    let t0 = Instant::now();
    let mut acc = 0.0;
    for _ in 0..200 {
        let (l, _) = grad_q(&q, &batch, 0.99, QLoss::Dqn, None);
        acc += l;
    }
    println!("grad_q dqn: {:.2} ms/step (acc {acc:.3})", t0.elapsed().as_secs_f64() * 1000.0 / 200.0);

    let t0 = Instant::now();
    let mut s = 0.0;
    for t in batch.iter().cycle().take(200 * 256) {
        s += q.forward(&t.s)[0];
    }
    println!("forward only: {:.2} ms/256 (s {s:.3})", t0.elapsed().as_secs_f64() * 1000.0 / 200.0);

    let t0 = Instant::now();
    let mut v = 0.3f64;
    for _ in 0..200 * 256 * 256 {
        v = (v + 0.001).tanh();
    }
    println!("tanh x 256: {:.3} ms ({v:.3})", t0.elapsed().as_secs_f64() * 1000.0 / (200.0 * 256.0));
}
