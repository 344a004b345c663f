//! Helpers shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;

use dexmix_core::ingest::{AlignmentSet, ReadRecord, TranscriptCatalog, TranscriptEntry};

pub fn catalog(k: usize) -> TranscriptCatalog {
    TranscriptCatalog::new(
        (0..k)
            .map(|i| TranscriptEntry {
                id: format!("t{}", i + 1),
                length: 1000,
            })
            .collect(),
    )
    .unwrap()
}

fn random_read<R: Rng>(k: usize, rng: &mut R) -> ReadRecord {
    let mut aligns = Vec::new();
    while aligns.is_empty() {
        for t in 0..k {
            if rng.random_bool(0.5) {
                aligns.push((t, rng.random_range(0.1..1.0)));
            }
        }
    }
    ReadRecord {
        id: String::new(),
        aligns,
    }
}

/// Random instance with `K` in {2, 3} and at most 8 reads in total.
pub fn tiny_instance<R: Rng>(rng: &mut R) -> AlignmentSet {
    let k = rng.random_range(2..=3);
    let r = rng.random_range(0..=5);
    let s = rng.random_range(0..=8 - r);
    let reads_a = (0..r).map(|_| random_read(k, rng)).collect();
    let reads_b = (0..s).map(|_| random_read(k, rng)).collect();
    AlignmentSet::new(catalog(k), reads_a, reads_b).unwrap()
}

/// One-sample Kolmogorov-Smirnov distance against `cdf`.
pub fn ks_one_sample(mut x: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(mut x: Vec<f64>, mut y: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
        }
    }
    det
}
