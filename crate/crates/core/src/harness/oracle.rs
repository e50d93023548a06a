//! Exact values by exhaustive enumeration.
//!
//! Everything here works on bit masks (bit `i` = position `i`) and shares no
//! code with the protocol implementation it checks. Bob's bases are fixed to
//! all-rectilinear: relabeling the two bases at any position maps the
//! protocol onto itself, so only the mismatch pattern `θ ⊕ η` matters. Each
//! outcome on a mismatched position carries Born weight 1/2; matched
//! positions reproduce `R_B`. Rounds whose commitment aborts are excluded,
//! matching the harness, which re-runs them.
//!
//! Weights are integers in units of `2^{-n} / lcm(1..=n)^2`, so every
//! accumulated probability is exact until the final division.

use super::{Experiment, HarnessError};

/// Enumeration cap.
pub const ORACLE_MAX_N: usize = 6;

fn check_n(n: usize) -> Result<(), HarnessError> {
    if !(2..=ORACLE_MAX_N).contains(&n) {
        return Err(HarnessError::Config(format!("oracle supports 2 <= n <= {ORACLE_MAX_N}, got {n}")));
    }
    Ok(())
}

fn parity(mask: u64) -> u8 {
    (mask.count_ones() & 1) as u8
}

fn lcm_upto(n: usize) -> u128 {
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    (1..=n as u128).fold(1, |acc, k| acc / gcd(acc, k) * k)
}

fn ratio(num: u128, den: u128) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Positions whose exclusion leaves parity `b` on the rest under `r`.
fn exclusion_set(ra: u64, r: u64, b: u8, n: usize) -> Vec<usize> {
    (0..n)
        .filter(|&x| {
            let keep = !(1u64 << x);
            parity(ra & r & keep) == b
        })
        .collect()
}

/// Calls `f(ra, weight)` for every Alice outcome string given Bob's string
/// and the mismatch pattern; `weight` is `unit · 2^{n - |mism|}`.
fn for_each_outcome(rb: u64, mism: u64, n: usize, unit: u128, mut f: impl FnMut(u64, u128)) {
    let w = unit << (n - mism.count_ones() as usize);
    let mut sub = mism;
    loop {
        f((rb & !mism) | sub, w);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & mism;
    }
}

/// Exact honest-round quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HonestOracle {
    /// Acceptance probability of completed rounds.
    pub accept: f64,
    /// Probability a commitment has no valid exclusion.
    pub commit_abort: f64,
}

/// Honest Alice with a uniform bit, uniform public mask.
pub fn honest_oracle(n: usize) -> Result<HonestOracle, HarnessError> {
    check_n(n)?;
    let full = (1u64 << n) - 1;
    let unit = lcm_upto(n);
    let (mut accepted, mut completed, mut aborted) = (0u128, 0u128, 0u128);
    for r in 0..=full {
        for rb in 0..=full {
            for mism in 0..=full {
                for_each_outcome(rb, mism, n, unit, |ra, w| {
                    for b in 0..2u8 {
                        let xs = exclusion_set(ra, r, b, n);
                        if xs.is_empty() {
                            aborted += w;
                            continue;
                        }
                        let wx = w / xs.len() as u128;
                        for &x in &xs {
                            let others = full & !(1u64 << x);
                            let consistent = (ra ^ rb) & !mism & others == 0;
                            let parity_ok = parity(ra & r & others) == b;
                            completed += wx;
                            if consistent && parity_ok {
                                accepted += wx;
                            }
                        }
                    }
                });
            }
        }
    }
    Ok(HonestOracle { accept: ratio(accepted, completed), commit_abort: ratio(aborted, aborted + completed) })
}

/// Exact single-round flip-cheat quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BindOracle {
    /// Probability Bob accepts the flipped opening.
    pub accept: f64,
    /// Probability no position is flippable (counted as a failed cheat).
    pub failed: f64,
    /// Detection probability restricted to matched-basis flips.
    pub matched_detection: f64,
    /// Detection probability restricted to mismatched-basis flips.
    pub mismatched_detection: f64,
}

/// Alice commits 1, then opens 0 by flipping a uniformly chosen position with
/// outcome 1, `r = 1`, outside `x`. Uniform `R_B`, `θ`, `r`.
pub fn bind_oracle(n: usize) -> Result<BindOracle, HarnessError> {
    check_n(n)?;
    let full = (1u64 << n) - 1;
    let l = lcm_upto(n);
    let (mut accepted, mut total, mut failed) = (0u128, 0u128, 0u128);
    let mut by_match = [[0u128; 2]; 2]; // [matched][detected]
    for r in 0..=full {
        for rb in 0..=full {
            for mism in 0..=full {
                for_each_outcome(rb, mism, n, l * l, |ra, w| {
                    let xs = exclusion_set(ra, r, 1, n);
                    if xs.is_empty() {
                        return;
                    }
                    let wx = w / xs.len() as u128;
                    for &x in &xs {
                        total += wx;
                        let others = full & !(1u64 << x);
                        let flippable: Vec<usize> = (0..n).filter(|&i| (ra & r & others) >> i & 1 == 1).collect();
                        if flippable.is_empty() {
                            failed += wx;
                            continue;
                        }
                        let wf = wx / flippable.len() as u128;
                        for &i in &flippable {
                            let claimed = ra ^ (1u64 << i);
                            let consistent = (claimed ^ rb) & !mism & others == 0;
                            let parity_ok = parity(claimed & r & others) == 0;
                            let matched = (mism >> i & 1 == 0) as usize;
                            let ok = consistent && parity_ok;
                            by_match[matched][(!ok) as usize] += wf;
                            if ok {
                                accepted += wf;
                            }
                        }
                    }
                });
            }
        }
    }
    let rate = |row: [u128; 2]| ratio(row[1], row[0] + row[1]);
    Ok(BindOracle {
        accept: ratio(accepted, total),
        failed: ratio(failed, total),
        matched_detection: rate(by_match[1]),
        mismatched_detection: rate(by_match[0]),
    })
}

/// Exact guessing accuracies for an honest Alice with a uniform bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcealOracle {
    /// Optimal (posterior) accuracy given `r` of weight `k` and `r(x) = 0`.
    pub posterior: f64,
    /// Parity-proxy accuracy under the same conditioning.
    pub parity_proxy: f64,
    /// Optimal accuracy for `r` of weight `k` without conditioning on `r(x)`.
    pub unconditional: f64,
    /// Optimal accuracy given `r(x) = 1`, where `k - 1` ones remain (`NaN`
    /// for `k = 0`).
    pub excluded_one: f64,
    /// `(1 + 2^{-k}) / 2`.
    pub closed_form: f64,
}

/// Enumerates every `r` of weight `k`, `R_B`, `θ`, outcome, `b` and `x`,
/// accumulating the joint weight of each view `(r, R_B, x)` with each bit.
/// Accuracy of the best guess is `Σ_view max_b P(view, b) / Σ P`.
pub fn conceal_oracle(n: usize, k: usize) -> Result<ConcealOracle, HarnessError> {
    check_n(n)?;
    if k >= n {
        return Err(HarnessError::Config(format!("conceal oracle needs k <= n - 1, got k = {k}, n = {n}")));
    }
    let full = (1u64 << n) - 1;
    let unit = lcm_upto(n);
    let (mut best, mut proxy, mut total) = (0u128, 0u128, 0u128);
    let (mut best_all, mut total_all) = (0u128, 0u128);
    let (mut best_one, mut total_one) = (0u128, 0u128);
    let mut table = vec![[0u128; 2]; (1usize << n) * n];
    for r in (0..=full).filter(|m: &u64| m.count_ones() as usize == k) {
        table.iter_mut().for_each(|e| *e = [0; 2]);
        for rb in 0..=full {
            for mism in 0..=full {
                for_each_outcome(rb, mism, n, unit, |ra, w| {
                    for b in 0..2u8 {
                        let xs = exclusion_set(ra, r, b, n);
                        for &x in &xs {
                            table[rb as usize * n + x][b as usize] += w / xs.len() as u128;
                        }
                    }
                });
            }
        }
        for rb in 0..=full {
            for x in 0..n {
                let [p0, p1] = table[rb as usize * n + x];
                best_all += p0.max(p1);
                total_all += p0 + p1;
                if r >> x & 1 == 1 {
                    best_one += p0.max(p1);
                    total_one += p0 + p1;
                    continue;
                }
                best += p0.max(p1);
                total += p0 + p1;
                let guess = parity(rb & r & !(1u64 << x));
                proxy += if guess == 0 { p0 } else { p1 };
            }
        }
    }
    Ok(ConcealOracle {
        posterior: ratio(best, total),
        parity_proxy: ratio(proxy, total),
        unconditional: ratio(best_all, total_all),
        excluded_one: if total_one == 0 { f64::NAN } else { ratio(best_one, total_one) },
        closed_form: (1.0 + 0.5f64.powi(k as i32)) / 2.0,
    })
}

/// Exact value of the quantity `experiment` estimates. `k` is the round
/// count for `bind` and the r-weight for `conceal`.
pub fn enumerate_oracle(experiment: Experiment, n: usize, k: usize) -> Result<f64, HarnessError> {
    match experiment {
        Experiment::Honest => Ok(honest_oracle(n)?.accept),
        Experiment::Bind => Ok(bind_oracle(n)?.accept.powi(k as i32)),
        Experiment::Conceal => Ok(conceal_oracle(n, k)?.posterior),
        Experiment::Mlc | Experiment::Nosig => {
            Err(HarnessError::Config(format!("no enumeration oracle for {experiment}")))
        }
    }
}
