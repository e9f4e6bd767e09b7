#![allow(dead_code)]

use regen_core::{CodeParams, Dk1Code, MiserCode, PrimeField};

pub fn next_prime(at_least: u32) -> u32 {
    (at_least.max(2)..)
        .find(|&q| (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0))
        .unwrap()
}

/// Every MISER instance with k ≤ 4, n ≤ 8 over the smallest usable prime.
pub fn miser_instances() -> Vec<MiserCode> {
    let mut out = Vec::new();
    for k in 1..=4usize {
        for n in (2 * k)..=8 {
            for d in (2 * k - 1)..n {
                let Ok(params) = CodeParams::new(n, k, d) else {
                    continue;
                };
                let q = next_prime((params.alpha + n - k).max(4) as u32);
                let field = PrimeField::new(q).unwrap();
                out.push(MiserCode::construct_general(params, field).unwrap());
            }
        }
    }
    out
}

pub fn dk1_instances() -> Vec<Dk1Code> {
    let mut out = Vec::new();
    for k in 1..=4usize {
        for n in (k + 2)..=8 {
            let field = PrimeField::new(next_prime(n as u32)).unwrap();
            out.push(Dk1Code::new(n, k, field).unwrap());
        }
    }
    out
}

/// Independent solver for `uᵗ G = y` with `G` square, by Gaussian
/// elimination on `Gᵗ u = y` with plain u64 arithmetic.
pub fn oracle_solve(q: u32, g: &[Vec<u32>], y: &[u32]) -> Option<Vec<u32>> {
    let q = q as u64;
    let n = g.len();
    let mut a: Vec<Vec<u64>> = (0..n)
        .map(|r| {
            let mut row: Vec<u64> = (0..n).map(|c| g[c][r] as u64).collect();
            row.push(y[r] as u64);
            row
        })
        .collect();
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= q;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % q;
            }
            b = b * b % q;
            e >>= 1;
        }
        acc
    };
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        let inv = pow(a[col][col], q - 2);
        for v in a[col].iter_mut() {
            *v = *v * inv % q;
        }
        let pivot = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            let factor = row[col];
            if r != col && factor != 0 {
                for (x, &p) in row.iter_mut().zip(&pivot) {
                    *x = (*x + q * q - factor * p) % q;
                }
            }
        }
    }
    Some(a.iter().map(|row| row[n] as u32).collect())
}

/// Rows of the `B × B` matrix `[G^(m1) … G^(mk)]` as `Vec<Vec<u32>>`.
pub fn stacked_rows(gens: &[regen_core::Matrix], nodes: &[usize]) -> Vec<Vec<u32>> {
    let b = gens[0].rows();
    (0..b)
        .map(|r| {
            nodes
                .iter()
                .flat_map(|&m| gens[m].row(r).to_vec())
                .collect()
        })
        .collect()
}
