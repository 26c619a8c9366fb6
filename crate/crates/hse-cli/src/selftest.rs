//! `hse selftest`: a fast oracle-equivalence sweep that exercises the
//! Gram-sum metric path against the dense constructions, the closed-form
//! Haar moment, and the sector formulas. Exits nonzero if anything drifts.

use hse_core::haar::sample_haar_state;
use hse_core::krylov::{
    commutant_dimension, count_sectors_formula, frozen_state_count, largest_sector_formula,
    pair_flip_components,
};
use hse_core::linalg::CMat;
use hse_core::metrics::{
    delta_gram, haar_moment_dense, hs_distance_sq, sym_dim, temporal_moment_dense,
    MomentMatrix, TemporalEnsemble,
};
use hse_core::rng::{derive_seed, seeded_rng};
use hse_core::Complex64;

use crate::{CliError, CliResult};

pub fn run(seed: u64) -> CliResult<()> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("selftest PASS {name}: {detail}");
        } else {
            println!("selftest FAIL {name}: {detail}");
            failures += 1;
        }
    };

    // Gram path vs dense oracle across small dimensions and orders.
    let mut worst = 0.0f64;
    for d in 2..=5usize {
        for k in 1..=3u32 {
            for trial in 0..3u64 {
                let mut rng = seeded_rng(derive_seed(seed, (d as u64) << 16 | (k as u64) << 8 | trial));
                let t = 12 + 7 * trial as usize;
                let mut ens = TemporalEnsemble::new(d, k);
                let mut states = Vec::new();
                for _ in 0..t {
                    let psi = sample_haar_state(d, &mut rng);
                    ens.accumulate_state(&psi).map_err(CliError::from)?;
                    states.push(psi);
                }
                let refs: Vec<&[Complex64]> = states.iter().map(|s| s.as_slice()).collect();
                let dense = hs_distance_sq(
                    &temporal_moment_dense(&refs, k)?,
                    &haar_moment_dense(d, k)?,
                )?;
                let gram = delta_gram(&ens, k, d)?;
                worst = worst.max((dense - gram).abs());
            }
        }
    }
    check(
        "gram-vs-dense",
        worst < 1e-10,
        format!("max |delta_gram - dense| = {worst:e}"),
    );

    // Closed-form Haar moment at D=2, k=2: (I + SWAP)/6.
    let m = haar_moment_dense(2, 2)?;
    let mut expect = CMat::identity(4);
    for a in 0..2 {
        for b in 0..2 {
            expect[(a * 2 + b, b * 2 + a)] += Complex64::new(1.0, 0.0);
        }
    }
    let expect = MomentMatrix::new(2, 2, expect.scale(Complex64::new(1.0 / 6.0, 0.0)))?;
    let dist = hs_distance_sq(&m, &expect)?;
    check("haar-moment-closed-form", dist == 0.0, format!("HS^2 = {dist:e}"));

    // Purity identity.
    let purity = m.matrix().mul(m.matrix()).trace().re;
    let target = 1.0 / sym_dim(2, 2) as f64;
    check(
        "haar-purity",
        (purity - target).abs() < 1e-14,
        format!("Tr rho^2 = {purity} vs {target}"),
    );

    // Sector formulas against reachability.
    let mut ok = true;
    let mut detail = String::new();
    for (n, d) in [(4usize, 3usize), (3, 4), (4, 2), (5, 3)] {
        let bfs = pair_flip_components(n, d)?;
        let frozen_ok = frozen_state_count(n, d)? == bfs.frozen_count() as u128;
        let commutant_ok = commutant_dimension(n, d)? == bfs.sector_count() as u128;
        let count_ok = d < 3 || count_sectors_formula(n, d)? == bfs.sector_count() as u128;
        let largest_ok = d < 3
            || n % 2 != 0
            || largest_sector_formula(n, d)? == bfs.largest_dim() as u128;
        if !(frozen_ok && commutant_ok && count_ok && largest_ok) {
            ok = false;
            detail.push_str(&format!("(N={n},d={d}) "));
        }
    }
    check(
        "krylov-formulas",
        ok,
        if detail.is_empty() { "all (N,d) pairs agree".into() } else { detail },
    );

    if failures > 0 {
        Err(CliError::numerical(format!("{failures} selftest check(s) failed")))
    } else {
        println!("selftest: all checks passed");
        Ok(())
    }
}
