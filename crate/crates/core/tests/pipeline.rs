//! Library-level pipeline checks: generated embeddings through each
//! clustering route back to ground-truth labels.

use diarkit::affinity::{cosine_affinity, fuse_kernels, kernel_affinity, KernelId};
use diarkit::classic::{ahc_cluster, kmeans_cluster, AhcConfig, AhcStop, Linkage};
use diarkit::embeddings::unit_normalize;
use diarkit::fixtures::{gen_embeddings, FixtureSpec};
use diarkit::kmeans::ClusterAssignment;
use diarkit::pruning::{prune_fixed_k, prune_pna, prune_top_p};
use diarkit::spectral::{spectral_cluster, SpectralConfig};

/// Best accuracy over all label permutations (K <= 3 here, brute force).
fn best_permutation_accuracy(got: &ClusterAssignment, truth: &[usize]) -> f64 {
    let k = got.k().max(truth.iter().max().map_or(0, |&m| m + 1));
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let hits = got
            .labels()
            .iter()
            .zip(truth)
            .filter(|(&g, &t)| p[g] == t)
            .count();
        best = best.max(hits);
    });
    best as f64 / truth.len() as f64
}

fn permute(slots: &mut Vec<usize>, at: usize, visit: &mut impl FnMut(&[usize])) {
    if at == slots.len() {
        visit(slots);
        return;
    }
    for i in at..slots.len() {
        slots.swap(at, i);
        permute(slots, at + 1, visit);
        slots.swap(at, i);
    }
}

#[test]
fn every_route_recovers_separated_clusters() {
    let spec = FixtureSpec {
        seed: 17,
        ..Default::default()
    };
    let (set, truth) = gen_embeddings(&spec).unwrap();
    let set = unit_normalize(&set).unwrap();
    let spectral_cfg = SpectralConfig {
        seed: 17,
        ..Default::default()
    };

    let ahc = ahc_cluster(
        &set,
        &AhcConfig {
            linkage: Linkage::Average,
            stop: AhcStop::TargetK(2),
        },
    )
    .unwrap();
    assert_eq!(best_permutation_accuracy(&ahc, &truth), 1.0, "ahc");

    let km = kmeans_cluster(&set, 2, 10, 17).unwrap();
    assert_eq!(best_permutation_accuracy(&km, &truth), 1.0, "kmeans");

    let affinity = cosine_affinity(&set).unwrap();
    let routes: Vec<(&str, diarkit::affinity::AffinityMatrix)> = vec![
        ("sc-fixed", prune_fixed_k(&affinity, 10).unwrap()),
        ("sc-adapt", prune_top_p(&affinity, 0.01, 2).unwrap()),
        ("sc-pna", prune_pna(&affinity, 0.20, 2).unwrap()),
        ("sc-mk", {
            let kernels: Vec<_> = KernelId::ALL
                .iter()
                .map(|&k| kernel_affinity(&set, k).unwrap())
                .collect();
            prune_fixed_k(&fuse_kernels(&kernels).unwrap(), 15).unwrap()
        }),
    ];
    for (name, pruned) in routes {
        let got = spectral_cluster(&pruned, &spectral_cfg).unwrap();
        assert_eq!(best_permutation_accuracy(&got, &truth), 1.0, "{name}");
    }
}

#[test]
fn noisy_gaussian_clusters_spectral_exact() {
    // Looser clouds than the acceptance fixture, still separable.
    for seed in [1u64, 2, 3] {
        let spec = FixtureSpec {
            seed,
            n_segments: 40,
            dim: 12,
            within_cosine: 0.85,
            across_cosine: 0.15,
            ..Default::default()
        };
        let (set, truth) = gen_embeddings(&spec).unwrap();
        let set = unit_normalize(&set).unwrap();
        let affinity = cosine_affinity(&set).unwrap();
        let got = spectral_cluster(
            &affinity,
            &SpectralConfig {
                seed,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(best_permutation_accuracy(&got, &truth), 1.0, "seed {seed}");
    }
}

#[test]
fn eigengap_estimation_mode_finds_two_speakers() {
    let spec = FixtureSpec {
        seed: 5,
        ..Default::default()
    };
    let (set, truth) = gen_embeddings(&spec).unwrap();
    let set = unit_normalize(&set).unwrap();
    let affinity = cosine_affinity(&set).unwrap();
    let pruned = prune_fixed_k(&affinity, 10).unwrap();
    let got = spectral_cluster(
        &pruned,
        &SpectralConfig {
            num_speakers: None,
            max_speakers: 8,
            kmeans_restarts: 10,
            seed: 5,
        },
    )
    .unwrap();
    assert_eq!(got.k(), 2);
    assert_eq!(best_permutation_accuracy(&got, &truth), 1.0);
}
