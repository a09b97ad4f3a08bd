mod common;

use std::collections::HashSet;

use bwsts::corpus;
use bwsts::counter::{CounterConfig, CounterMachine};
use bwsts::cover::{
    backward_coverability, check_cover_monotone_bounded, downset_normalize, downset_post, forward_cover_semiproc,
    forward_search, is_inductive, noncover_semiproc, x0_coverability, CoverCertificate, DownSet, ExtNat, FiniteSystem,
    Ideal, MonotoneMachine, NonCover, OmegaVec, Search,
};
use bwsts::model::ModelFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: u64 = 6;

fn random_downset(rng: &mut impl Rng, controls: usize, dim: usize) -> DownSet {
    let n = rng.gen_range(0..=3);
    downset_normalize((0..n).map(|_| {
        let v = (0..dim)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    ExtNat::Omega
                } else {
                    ExtNat::Fin(rng.gen_range(0..=3))
                }
            })
            .collect();
        Ideal::new(rng.gen_range(0..controls), OmegaVec(v))
    }))
}

fn all_configs(controls: usize, dim: usize, cap: u64) -> Vec<CounterConfig> {
    let mut vals = vec![Vec::new()];
    for _ in 0..dim {
        vals = vals
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (0..=cap).map(move |n| {
                    let mut q = p.clone();
                    q.push(n);
                    q
                })
            })
            .collect();
    }
    (0..controls)
        .flat_map(|q| vals.iter().map(move |v| CounterConfig::new(q, v.clone())))
        .collect()
}

/// Explicit denotation of `d` restricted to entries `<= cap`.
fn denotation(d: &DownSet, controls: usize, dim: usize, cap: u64) -> HashSet<CounterConfig> {
    all_configs(controls, dim, cap)
        .into_iter()
        .filter(|x| {
            d.ideals().iter().any(|i| {
                i.control == x.control
                    && i.bound.0.iter().zip(x.valuation.as_slice()).all(|(b, &v)| match b {
                        ExtNat::Omega => true,
                        ExtNat::Fin(n) => v <= *n,
                    })
            })
        })
        .collect()
}

#[test]
fn membership_matches_denotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let (controls, dim) = (rng.gen_range(1..=3), rng.gen_range(1..=2));
        let d = random_downset(&mut rng, controls, dim);
        let den = denotation(&d, controls, dim, CAP);
        for x in all_configs(controls, dim, CAP) {
            assert_eq!(d.contains(&x), den.contains(&x));
        }
        let e = random_downset(&mut rng, controls, dim);
        let den_e = denotation(&e, controls, dim, CAP);
        if d.is_subset(&e) {
            assert!(den.is_subset(&den_e));
        }
    }
}

#[test]
fn post_matches_explicit_successors() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut tested = 0;
    while tested < 200 {
        let m = common::random_counter_machine(&mut rng, 0.3);
        if m.controls.len() > 3 {
            continue;
        }
        tested += 1;
        let (q, k) = (m.controls.len(), m.dim());
        let d = random_downset(&mut rng, q, k);
        let post = downset_post(&m, &d);
        let succ: Vec<CounterConfig> = denotation(&d, q, k, CAP)
            .iter()
            .flat_map(|x| m.post(x).into_iter().map(|(_, y)| y))
            .collect();
        for y in all_configs(q, k, CAP - 1) {
            let explicit = succ.iter().any(|z| bwsts::ordering::counter_state_leq(&y, z).unwrap());
            assert_eq!(post.contains(&y), explicit, "{y:?} in post of {d:?}");
        }
    }
}

fn agree(m: &CounterMachine, x0: &CounterConfig, y: &CounterConfig) -> bool {
    let mm = MonotoneMachine::new(m).unwrap();
    let b = backward_coverability(&mm, x0, y).unwrap();
    match common::capped_cover_oracle(m, x0, y, 8) {
        Some(o) => o == b.coverable,
        None if b.coverable => matches!(forward_search(m, x0, y, 200_000), Search::Found { .. }),
        None => {
            let inv = b.invariant(m);
            inv.contains(x0) && !inv.contains(y) && is_inductive(m, &inv)
        }
    }
}

#[test]
fn backward_agrees_with_forward_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let m = common::random_monotone_machine(&mut rng);
        for _ in 0..20 {
            let x0 = common::random_config(&mut rng, &m, 2);
            let y = common::random_config(&mut rng, &m, 4);
            assert!(agree(&m, &x0, &y), "{m:?} {x0:?} {y:?}");
        }
    }
}

#[test]
fn noncover_certificates_are_closed_under_iterated_post() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut found = Vec::new();
    let m8 = match corpus::load(corpus::M8) {
        ModelFile::Counter { machine, .. } => machine,
        _ => unreachable!(),
    };
    if let NonCover::NotCoverable(d) =
        noncover_semiproc(&m8, &m8.initial_config(), &CounterConfig::new(1, vec![1]), 10_000)
    {
        found.push((m8.clone(), d));
    }
    for _ in 0..150 {
        let m = common::random_counter_machine(&mut rng, 0.2);
        if m.controls.len() > 3 || m.dim() > 1 {
            continue;
        }
        let x0 = m.initial_config();
        let y = common::random_config(&mut rng, &m, 2);
        if let NonCover::NotCoverable(d) = noncover_semiproc(&m, &x0, &y, 500) {
            assert!(d.contains(&x0) && !d.contains(&y));
            found.push((m, d));
        }
    }
    assert!(found.len() >= 10, "{}", found.len());
    for (m, d) in found {
        let mut cur = d.clone();
        for _ in 0..5 {
            cur = downset_post(&m, &cur);
            assert!(cur.is_subset(&d));
        }
    }
}

#[test]
fn forward_sequence_is_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let m = common::random_monotone_machine(&mut rng);
        let mm = MonotoneMachine::new(&m).unwrap();
        let x0 = common::random_config(&mut rng, &m, 2);
        let y = common::random_config(&mut rng, &m, 6);
        let r = forward_cover_semiproc(&mm, &x0, &y, 8);
        assert!(r.sets.windows(2).all(|w| w[0].is_subset(&w[1])));
        if r.coverable {
            assert!(matches!(forward_search(&m, &x0, &y, 100_000), Search::Found { .. }));
        }
    }
}

#[test]
fn monotone_iff_cover_monotone_from_every_state() {
    let systems = common::finite_systems(3);
    for (leq, succ) in &systems {
        let s = FiniteSystem {
            leq: leq.clone(),
            succ: succ.clone(),
        };
        let n = leq.len();
        assert_eq!(s.is_monotone(), (0..n).all(|x0| s.is_cover_monotone(x0)));
    }
    assert_eq!(common::quasi_orders(3).len(), 29);
    assert_eq!(systems.len(), 2 + 4 * 16 + 29 * 512);
}

#[test]
fn coverability_certificates_check_out() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut decided = 0;
    for _ in 0..40 {
        let m = common::random_counter_machine(&mut rng, 0.2);
        if m.dim() > 1 || m.controls.len() > 3 {
            continue;
        }
        let x0 = m.initial_config();
        if check_cover_monotone_bounded(&m, &x0, 4, 5).is_some() {
            continue;
        }
        let y = common::random_config(&mut rng, &m, 3);
        let v = x0_coverability(&m, &x0, &y, 5_000, true);
        if let Some(w) = &v.witness {
            decided += 1;
            assert!(w.verify(&m, &x0, &y));
            if let CoverCertificate::Run { .. } = w {
                assert!(v.is_positive());
            } else {
                assert!(v.is_negative());
            }
        }
    }
    assert!(decided > 0);
}
