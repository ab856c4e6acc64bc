use bco_core::geometry::{sample_sphere, ConvexDomain, ShrunkenDomain};
use bco_core::rng::{Purpose, Streams};
use bco_core::Vector;
use rand::Rng;

use super::Check;

const SAMPLES: u64 = 1_000;
const TOL: f64 = 1e-9;

fn shapes() -> Vec<(&'static str, ConvexDomain)> {
    vec![
        ("ball", ConvexDomain::ball(3, 1.5).expect("ball")),
        ("box", ConvexDomain::boxed(vec![1.0, 0.25, 2.0]).expect("box")),
    ]
}

fn wide_point<R: Rng>(dim: usize, rng: &mut R) -> Vector {
    Vector::from_fn(dim, |_, _| rng.random_range(-4.0..4.0))
}

/// `max |Ĉ − I/d|` over entries, with `Ĉ` the empirical second moment of `n` sphere draws.
pub fn sphere_covariance_error(dim: usize, n: usize, seed: u64) -> f64 {
    let mut rng = Streams::new(seed).rng(Purpose::Probe, dim as u64);
    let mut acc = vec![0.0; dim * dim];
    for _ in 0..n {
        let v = sample_sphere(dim, &mut rng);
        let v = v.as_vector();
        for i in 0..dim {
            for j in 0..dim {
                acc[i * dim + j] += v[i] * v[j];
            }
        }
    }
    let target = 1.0 / dim as f64;
    (0..dim * dim)
        .map(|k| {
            let expected = if k / dim == k % dim { target } else { 0.0 };
            (acc[k] / n as f64 - expected).abs()
        })
        .fold(0.0, f64::max)
}

pub fn checks() -> Vec<Check> {
    let mut out = Vec::new();
    for (name, domain) in shapes() {
        let streams = Streams::new(7);
        let (mut idem, mut expand): (f64, f64) = (0.0, 0.0);
        for k in 0..SAMPLES {
            let mut rng = streams.rng(Purpose::Probe, k);
            let (a, b, z) = (wide_point(3, &mut rng), wide_point(3, &mut rng), wide_point(3, &mut rng));
            let pz = domain.project(&z).expect("dimension");
            idem = idem.max((domain.project(&pz).expect("dimension") - &pz).norm());
            let (pa, pb) = (domain.project(&a).expect("dimension"), domain.project(&b).expect("dimension"));
            expand = expand.max((pa - pb).norm() - (a - b).norm());
        }
        out.push(Check::at_most(format!("geometry/{name} projection idempotence"), idem, TOL));
        out.push(Check::at_most(format!("geometry/{name} projection non-expansiveness"), expand, TOL));

        let delta = 0.2;
        let shrunk = ShrunkenDomain::for_perturbation(&domain, delta).expect("δ < r");
        let mut worst: f64 = 0.0;
        for k in 0..SAMPLES {
            let mut rng = streams.rng(Purpose::Other(1), k);
            let y = shrunk.project(&wide_point(3, &mut rng)).expect("dimension");
            let q = y + sample_sphere(3, &mut rng).as_vector() * delta;
            worst = worst.max((domain.project(&q).expect("dimension") - &q).norm());
        }
        out.push(Check::at_most(format!("geometry/{name} perturbed queries stay feasible"), worst, TOL));
    }
    let n = 200_000;
    for d in [2usize, 5, 8] {
        let bound = 4.0 * (1.0 / (d * n) as f64).sqrt();
        out.push(Check::at_most(format!("geometry/sphere covariance d={d}"), sphere_covariance_error(d, n, 11), bound));
    }
    out
}
