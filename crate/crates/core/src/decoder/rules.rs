//! Variable-node and check-node update kernels.
//!
//! Every check kernel reads only `v2c` and writes only the `c2v` entries of
//! its own check, so checks can be processed in any order.

use crate::code::TannerGraph;
use crate::scnu::sign;

use super::DecodeError;

/// Largest tanh product fed to `atanh`.
pub const SPA_CLAMP: f64 = 1.0 - 1e-15;

/// Min-sum magnitude variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinSumMode {
    Plain,
    Normalized(f64),
    Offset(f64),
}

impl MinSumMode {
    #[inline]
    fn shape(self, min: f64) -> f64 {
        match self {
            MinSumMode::Plain => min,
            MinSumMode::Normalized(a) => a * min,
            MinSumMode::Offset(b) => (min - b).max(0.0),
        }
    }
}

fn check_sizes(graph: &TannerGraph, n: usize, edges: &[usize]) -> Result<(), DecodeError> {
    if n != graph.n_vars() {
        return Err(DecodeError::LengthMismatch { expected: graph.n_vars(), got: n });
    }
    for &len in edges {
        if len != graph.n_edges() {
            return Err(DecodeError::LengthMismatch { expected: graph.n_edges(), got: len });
        }
    }
    Ok(())
}

/// `v2c[e] = L_i + sum of c2v over the other edges of i`. Writes the full
/// sums `L_i + sum c2v` into `total`.
pub fn vn_update(graph: &TannerGraph, llr: &[f64], c2v: &[f64], v2c: &mut [f64], total: &mut [f64]) -> Result<(), DecodeError> {
    check_sizes(graph, llr.len(), &[c2v.len(), v2c.len()])?;
    check_sizes(graph, total.len(), &[])?;
    vn_update_unchecked(graph, llr, c2v, v2c, total);
    Ok(())
}

pub(crate) fn vn_update_unchecked(graph: &TannerGraph, llr: &[f64], c2v: &[f64], v2c: &mut [f64], total: &mut [f64]) {
    for i in 0..graph.n_vars() {
        let edges = graph.var_edges(i);
        let t = edges.iter().fold(llr[i], |acc, &e| acc + c2v[e as usize]);
        total[i] = t;
        for &e in edges {
            v2c[e as usize] = t - c2v[e as usize];
        }
    }
}

/// Sum-product update of check `j`.
pub fn spa_check(graph: &TannerGraph, j: usize, v2c: &[f64], c2v: &mut [f64], scratch: &mut Vec<f64>) {
    let edges = graph.check_edges(j);
    let d = edges.len();
    // scratch[0..d]: tanh(|L|/2); scratch[d..2d + 1]: suffix products.
    scratch.clear();
    scratch.resize(2 * d + 1, 1.0);
    let mut parity = 1.0;
    for (k, e) in edges.clone().enumerate() {
        let l = v2c[e];
        parity *= sign(l);
        scratch[k] = tanh_half(l.abs());
    }
    for k in (0..d).rev() {
        scratch[d + k] = scratch[d + k + 1] * scratch[k];
    }
    let mut prefix = 1.0;
    for (k, e) in edges.enumerate() {
        let p = (prefix * scratch[d + k + 1]).min(SPA_CLAMP);
        prefix *= scratch[k];
        c2v[e] = parity * sign(v2c[e]) * two_atanh(p);
    }
}

/// `tanh(x / 2) = (1 - e^-x) / (1 + e^-x)` for `x >= 0`.
#[inline]
fn tanh_half(x: f64) -> f64 {
    let e = (-x).exp();
    (1.0 - e) / (1.0 + e)
}

/// `2 atanh(p) = ln((1 + p) / (1 - p))` for `0 <= p < 1`.
#[inline]
fn two_atanh(p: f64) -> f64 {
    ((1.0 + p) / (1.0 - p)).ln()
}

/// Min-sum family update of check `j`.
pub fn minsum_check(graph: &TannerGraph, j: usize, v2c: &[f64], c2v: &mut [f64], mode: MinSumMode) {
    let edges = graph.check_edges(j);
    let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, usize::MAX);
    let mut parity = 1.0;
    for e in edges.clone() {
        let l = v2c[e];
        parity *= sign(l);
        let m = l.abs();
        if m < min1 {
            min2 = min1;
            min1 = m;
            arg = e;
        } else if m < min2 {
            min2 = m;
        }
    }
    let (out1, out2) = (mode.shape(min1), mode.shape(min2));
    for e in edges {
        let mag = if e == arg { out2 } else { out1 };
        c2v[e] = parity * sign(v2c[e]) * mag;
    }
}

/// Binary update of check `j`: extrinsic product of signs, unit magnitude.
pub fn ddbmp_check(graph: &TannerGraph, j: usize, v2c: &[f64], c2v: &mut [f64]) {
    let edges = graph.check_edges(j);
    let parity: f64 = edges.clone().map(|e| sign(v2c[e])).product();
    for e in edges {
        c2v[e] = parity * sign(v2c[e]);
    }
}

pub fn cn_update_spa(graph: &TannerGraph, v2c: &[f64], c2v: &mut [f64]) -> Result<(), DecodeError> {
    check_sizes(graph, graph.n_vars(), &[v2c.len(), c2v.len()])?;
    let mut scratch = Vec::new();
    for j in 0..graph.n_checks() {
        spa_check(graph, j, v2c, c2v, &mut scratch);
    }
    Ok(())
}

pub fn cn_update_minsum(graph: &TannerGraph, v2c: &[f64], mode: MinSumMode, c2v: &mut [f64]) -> Result<(), DecodeError> {
    check_sizes(graph, graph.n_vars(), &[v2c.len(), c2v.len()])?;
    for j in 0..graph.n_checks() {
        minsum_check(graph, j, v2c, c2v, mode);
    }
    Ok(())
}

pub fn cn_update_ddbmp(graph: &TannerGraph, v2c: &[f64], c2v: &mut [f64]) -> Result<(), DecodeError> {
    check_sizes(graph, graph.n_vars(), &[v2c.len(), c2v.len()])?;
    for j in 0..graph.n_checks() {
        ddbmp_check(graph, j, v2c, c2v);
    }
    Ok(())
}

/// Variable side of the binary decoder. Each node keeps a memory `m_i` that
/// accumulates the mean of its incoming binary messages, saturated at
/// `+-d_v`; outgoing messages are `sgn(L_i + m_i - c2v / d_v)` and the output
/// LLR is `L_i + m_i`.
pub fn ddbmp_vn_update(
    graph: &TannerGraph,
    llr: &[f64],
    c2v: &[f64],
    memory: &mut [f64],
    v2c: &mut [f64],
    total: &mut [f64],
) {
    for i in 0..graph.n_vars() {
        let edges = graph.var_edges(i);
        let dv = edges.len() as f64;
        let sum: f64 = edges.iter().map(|&e| c2v[e as usize]).sum();
        memory[i] = (memory[i] + sum / dv).clamp(-dv, dv);
        let t = llr[i] + memory[i];
        total[i] = t;
        for &e in edges {
            v2c[e as usize] = sign(t - c2v[e as usize] / dv);
        }
    }
}

/// Successive relaxation: `new <- (1 - gamma) prev + gamma new`, and the
/// result becomes the next `prev`.
pub fn apply_sr(prev: &mut [f64], new: &mut [f64], gamma: f64) {
    for (p, n) in prev.iter_mut().zip(new.iter_mut()) {
        *n = (1.0 - gamma) * *p + gamma * *n;
        *p = *n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spc(d: usize) -> TannerGraph {
        TannerGraph::from_rows(d, &[(0..d).collect()]).unwrap()
    }

    #[test]
    fn vn_update_examples() {
        // Variable 0 sits on three checks.
        let g = TannerGraph::from_rows(2, &[vec![0, 1], vec![0], vec![0, 1]]).unwrap();
        let llr = [1.0, -2.0];
        let zero = vec![0.0; g.n_edges()];
        let mut v2c = vec![9.0; g.n_edges()];
        let mut total = vec![0.0; 2];
        vn_update(&g, &llr, &zero, &mut v2c, &mut total).unwrap();
        for e in 0..g.n_edges() {
            assert_eq!(v2c[e], llr[g.edge_var(e)]);
        }
        let mut c2v = vec![0.0; g.n_edges()];
        let e_var0: Vec<usize> = g.var_edges(0).iter().map(|&e| e as usize).collect();
        c2v[e_var0[0]] = 0.5;
        c2v[e_var0[1]] = -0.25;
        c2v[e_var0[2]] = 0.75;
        vn_update(&g, &llr, &c2v, &mut v2c, &mut total).unwrap();
        assert_eq!(v2c[e_var0[0]], 1.5);
        assert_eq!(total[0], 2.0);
        // sum of outgoing = d_v L + (d_v - 1) sum c2v
        let out: f64 = e_var0.iter().map(|&e| v2c[e]).sum();
        assert!((out - (3.0 * 1.0 + 2.0 * 1.0)).abs() < 1e-12);
        assert!(vn_update(&g, &llr[..1], &c2v, &mut v2c, &mut total).is_err());
    }

    #[test]
    fn spa_examples() {
        let g = spc(3);
        let mut c2v = vec![0.0; 3];
        cn_update_spa(&g, &[1.0, 2.0, 0.3], &mut c2v).unwrap();
        assert!((c2v[2] - 0.735326).abs() < 1e-6, "{}", c2v[2]);
        let want = 2.0 * ((0.5f64).tanh() * (1.0f64).tanh()).atanh();
        assert!((c2v[2] - want).abs() < 1e-15);
        cn_update_spa(&g, &[0.0, 2.0, -0.3], &mut c2v).unwrap();
        assert_eq!(c2v[1].abs(), 0.0);
        assert_eq!(c2v[2].abs(), 0.0);
        let g2 = spc(2);
        let mut c = vec![0.0; 2];
        cn_update_spa(&g2, &[1.25, -3.5], &mut c).unwrap();
        assert!((c[0] + 3.5).abs() < 1e-12 && (c[1] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn fast_transcendentals_match_std() {
        for k in 0..2000 {
            let x = k as f64 * 0.02;
            assert!((tanh_half(x) - (0.5 * x).tanh()).abs() <= 1e-15, "{x}");
        }
        for k in 0..1000 {
            let p = k as f64 / 1000.0;
            assert!((two_atanh(p) - 2.0 * p.atanh()).abs() <= 1e-14 * (1.0 + 2.0 * p.atanh()), "{p}");
        }
        assert!(two_atanh(SPA_CLAMP).is_finite());
    }

    #[test]
    fn spa_saturates_for_huge_inputs() {
        let g = spc(3);
        let mut c2v = vec![0.0; 3];
        cn_update_spa(&g, &[1e6, 1e6, -1e6], &mut c2v).unwrap();
        assert!(c2v.iter().all(|v| v.is_finite()));
        assert!(c2v[2] > 30.0);
    }

    /// Exact extrinsic LLRs of a single parity check by summing over all
    /// configurations of the other bits.
    fn brute_force_extrinsic(l: &[f64]) -> Vec<f64> {
        let d = l.len();
        // log P(x = 0) and log P(x = 1) per bit.
        let lp: Vec<(f64, f64)> = l
            .iter()
            .map(|&x| {
                let z = (1.0 + (-x.abs()).exp()).ln();
                if x >= 0.0 {
                    (-z, -x - z)
                } else {
                    (x - z, -z)
                }
            })
            .collect();
        (0..d)
            .map(|k| {
                let others: Vec<usize> = (0..d).filter(|&o| o != k).collect();
                let mut even = Vec::new();
                let mut odd = Vec::new();
                for mask in 0u32..(1 << others.len()) {
                    let w: f64 = others
                        .iter()
                        .enumerate()
                        .map(|(b, &o)| if (mask >> b) & 1 == 1 { lp[o].1 } else { lp[o].0 })
                        .sum();
                    if mask.count_ones() % 2 == 0 {
                        even.push(w);
                    } else {
                        odd.push(w);
                    }
                }
                log_sum_exp(&even) - log_sum_exp(&odd)
            })
            .collect()
    }

    fn log_sum_exp(v: &[f64]) -> f64 {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
    }

    #[test]
    fn spa_matches_brute_force_on_single_checks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for d in 3..=10 {
            let g = spc(d);
            let mut c2v = vec![0.0; d];
            for _ in 0..200 {
                let l: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
                cn_update_spa(&g, &l, &mut c2v).unwrap();
                let want = brute_force_extrinsic(&l);
                for (a, b) in c2v.iter().zip(&want) {
                    assert!((a - b).abs() < 1e-9, "d={d} {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn minsum_examples() {
        let g = spc(3);
        let l = [1.0, -2.0, 0.5];
        let mut c = vec![0.0; 3];
        cn_update_minsum(&g, &l, MinSumMode::Plain, &mut c).unwrap();
        assert_eq!(c[0], -0.5);
        assert_eq!(c[1], 0.5);
        assert_eq!(c[2], -1.0);
        cn_update_minsum(&g, &l, MinSumMode::Normalized(0.8), &mut c).unwrap();
        assert!((c[0] + 0.4).abs() < 1e-15);
        cn_update_minsum(&g, &l, MinSumMode::Offset(0.3), &mut c).unwrap();
        assert!((c[0] + 0.2).abs() < 1e-15);
        cn_update_minsum(&g, &l, MinSumMode::Offset(1.0), &mut c).unwrap();
        assert_eq!(c[0].abs(), 0.0);
    }

    #[test]
    fn minsum_ties_use_the_other_minimum() {
        let g = spc(4);
        let mut c = vec![0.0; 4];
        cn_update_minsum(&g, &[2.0, 2.0, 3.0, 5.0], MinSumMode::Plain, &mut c).unwrap();
        assert_eq!(c, vec![2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn ddbmp_examples() {
        let g = spc(4);
        let mut c = vec![0.0; 4];
        cn_update_ddbmp(&g, &[1.0, 2.0, 0.5, 7.0], &mut c).unwrap();
        assert_eq!(c, vec![1.0; 4]);
        cn_update_ddbmp(&g, &[1.0, -2.0, 0.5, 7.0], &mut c).unwrap();
        assert_eq!(c, vec![-1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn ddbmp_memory_grows_linearly_then_saturates() {
        // One variable on three checks, all messages +1.
        let g = TannerGraph::from_rows(1, &[vec![0], vec![0], vec![0]]).unwrap();
        let c2v = vec![1.0; 3];
        let mut mem = vec![0.0];
        let mut v2c = vec![0.0; 3];
        let mut total = vec![0.0];
        let mut seen = Vec::new();
        for _ in 0..5 {
            ddbmp_vn_update(&g, &[-2.5], &c2v, &mut mem, &mut v2c, &mut total);
            seen.push(mem[0]);
        }
        assert_eq!(seen, vec![1.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(total[0], 0.5);
        assert_eq!(v2c, vec![1.0; 3]);
    }

    #[test]
    fn sr_examples() {
        let mut prev = vec![2.0, -1.0];
        let mut new = vec![0.0, 3.0];
        apply_sr(&mut prev, &mut new, 0.5);
        assert_eq!(new, vec![1.0, 1.0]);
        assert_eq!(prev, new);
        let mut prev = vec![7.0];
        let mut new = vec![3.0];
        apply_sr(&mut prev, &mut new, 1.0);
        assert_eq!(new, vec![3.0]);
        // Geometric convergence to a constant target.
        let mut prev = vec![10.0];
        let mut gaps = Vec::new();
        for _ in 0..20 {
            let mut n = vec![4.0];
            apply_sr(&mut prev, &mut n, 0.3);
            gaps.push((n[0] - 4.0).abs());
        }
        for w in gaps.windows(2) {
            assert!((w[1] / w[0] - 0.7).abs() < 1e-9);
        }
    }
}
