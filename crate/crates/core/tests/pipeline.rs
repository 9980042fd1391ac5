//! Stages of the pipeline chained through their public interfaces.

use std::fs::File;

use approx::assert_abs_diff_eq;

use toric_harmonic::bergman::{harmonic_norming, norming_constants, BergmanFamily, NormingTable};
use toric_harmonic::harness::{build_approximant, solve_harmonic_map, ExperimentConfig};

#[test]
fn cached_norming_tables_give_the_same_approximant() {
    let fam = solve_harmonic_map(&ExperimentConfig::geodesic(0.1)).unwrap();
    let k = 12;
    let direct = build_approximant(&fam, k).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for (i, u) in fam.boundary().iter().enumerate() {
        let path = dir.path().join(format!("q{i}.csv"));
        norming_constants(u, k).unwrap().write_csv(File::create(&path).unwrap()).unwrap();
        tables.push(NormingTable::read_csv(File::open(&path).unwrap()).unwrap());
    }
    let cached = BergmanFamily::new(harmonic_norming(fam.domain(), &tables).unwrap());

    for node in [0, 7, 20] {
        for rho in [-2.5, 0.0, 1.3] {
            assert_abs_diff_eq!(cached.value(node, &[rho]), direct.value(node, &[rho]), epsilon = 1e-12);
        }
    }
}

#[test]
fn approximant_endpoints_are_boundary_bergman_potentials() {
    let fam = solve_harmonic_map(&ExperimentConfig::geodesic(0.1)).unwrap();
    let k = 8;
    let bf = build_approximant(&fam, k).unwrap();
    // at y = 0 the potential is (1/k) log Σ exp(αρ − log Q_α)
    let q = norming_constants(&fam.boundary()[0], k).unwrap();
    for rho in [-1.0, 0.4, 2.0] {
        let terms: Vec<f64> = (0..=k).zip(q.log_q()).map(|(a, lq)| a as f64 * rho - lq).collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
        assert_abs_diff_eq!(bf.value(0, &[rho]), lse / k as f64, epsilon = 1e-12);
    }
}
