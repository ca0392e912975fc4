use omegalab::sieve::{omega_oracle, primes_up_to, Sieve, SieveConfig};

fn sieve(limit: u64, workers: usize, segment_len: usize) -> Sieve {
    Sieve::new(
        SieveConfig::with_limit(limit)
            .workers(workers)
            .segment_len(segment_len),
    )
    .unwrap()
}

#[test]
fn agrees_with_trial_division_to_a_million() {
    let s = sieve(1_000_000, 1, 1 << 16);
    let seg = s.sieve_segment(1, 1_000_001).unwrap();
    for (n, k) in seg.iter() {
        assert_eq!(u32::from(k), omega_oracle(n), "n = {n}");
    }
}

#[test]
fn segmentation_does_not_matter() {
    let reference = sieve(200_000, 1, 1 << 20)
        .sieve_segment(1, 200_001)
        .unwrap();
    for len in [1usize, 7, 1000, 65_536] {
        let s = sieve(200_000, 3, len);
        let hist = s.pi_k_histogram(200_000).unwrap();
        let mut counts = vec![0u64; hist.counts().len()];
        for (_, k) in reference.iter() {
            counts[usize::from(k)] += 1;
        }
        assert_eq!(hist.counts(), &counts[..], "segment length {len}");
    }
}

#[test]
fn windows_inside_the_range() {
    let s = sieve(10_000_000, 2, 1 << 12);
    for &(lo, hi) in &[
        (1u64, 2u64),
        (9_999_000, 10_000_001),
        (4_194_300, 4_194_310),
        (65_535, 65_538),
    ] {
        let seg = s.sieve_segment(lo, hi).unwrap();
        for (n, k) in seg.iter() {
            assert_eq!(u32::from(k), omega_oracle(n), "n = {n}");
        }
    }
}

#[test]
fn worker_count_does_not_change_profiles() {
    let ns = [1000u64, 54_321, 300_000];
    let base = sieve(300_000, 1, 10_000).profiles(&ns).unwrap();
    for w in [2, 4, 8] {
        let other = sieve(300_000, w, 10_000).profiles(&ns).unwrap();
        for (a, b) in base.iter().zip(&other) {
            assert_eq!(a.histogram(), b.histogram());
            let bits = |p: &omegalab::sieve::OmegaProfile| {
                p.reciprocal_sums()
                    .iter()
                    .map(|x| x.to_bits())
                    .collect::<Vec<_>>()
            };
            assert_eq!(bits(a), bits(b), "workers = {w}");
        }
    }
}

#[test]
fn primes_match_the_first_histogram_column() {
    let s = sieve(100_000, 2, 4096);
    let hist = s.pi_k_histogram(100_000).unwrap();
    assert_eq!(hist.get(1), primes_up_to(100_000).len() as u64);
    assert_eq!(hist.get(1), 9592);
    assert_eq!(s.base_primes().last(), Some(&313));
}
