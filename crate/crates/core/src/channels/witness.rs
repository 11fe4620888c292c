use serde::{Deserialize, Serialize};

use super::maps::{DoublyStochasticMap, TTransform};
use crate::accessibility::{check_probability, sorted_padded};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest vector length [`t_transform_chain`] accepts by default.
pub const DEFAULT_WITNESS_CAP: usize = 1 << 12;

/// A T-transform chain carrying `p` to `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformWitness<S> {
    /// Acts on decreasingly sorted, zero-padded vectors: `chain·p↓ = q↓`.
    pub chain: DoublyStochasticMap<S>,
    /// `p↓[k] = p[p_order[k]]` (indices past `p.len()` are padding zeros).
    pub p_order: Vec<usize>,
    /// `q↓[k] = q[q_order[k]]`.
    pub q_order: Vec<usize>,
}

impl<S: Scalar> TransformWitness<S> {
    /// The witness on original coordinates: sort `p` by swaps, run the chain,
    /// then unsort into `q`'s order by swaps.
    pub fn full_map(&self) -> DoublyStochasticMap<S> {
        let n = self.chain.size();
        let mut transforms = permutation_swaps(&self.p_order, true);
        transforms.extend(self.chain.transforms().expect("chains are compositions").iter().cloned());
        transforms.extend(permutation_swaps(&self.q_order, false));
        DoublyStochasticMap::from_transforms(n, transforms).expect("swaps and chain steps are valid")
    }

    /// `‖full_map·p - q‖₁` after zero-padding.
    pub fn l1_error(&self, p: &[S], q: &[S]) -> Result<S> {
        let n = self.chain.size();
        let mut pp = p.to_vec();
        pp.resize(n, S::zero());
        let mut qq = q.to_vec();
        qq.resize(n, S::zero());
        let image = self.full_map().apply_vector(&pp)?;
        Ok(image.iter().zip(&qq).fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs()))
    }
}

/// Swaps realising `x ↦ x[order]` (`gather = true`) or its inverse
/// `y[order] ↦ y` (`gather = false`).
fn permutation_swaps<S: Scalar>(order: &[usize], gather: bool) -> Vec<TTransform<S>> {
    let n = order.len();
    // pos[v] = current position of the value originally at index v;
    // at[k] = original index of the value now at position k.
    let mut pos: Vec<usize> = (0..n).collect();
    let mut at: Vec<usize> = (0..n).collect();
    let mut swaps = Vec::new();
    if gather {
        for k in 0..n {
            let src = pos[order[k]];
            if src != k {
                swaps.push(TTransform::swap(k, src));
                let (vk, vs) = (at[k], at[src]);
                at.swap(k, src);
                pos[vk] = src;
                pos[vs] = k;
            }
        }
    } else {
        // Inverse of the gather: undo its swaps in reverse order.
        let mut forward = permutation_swaps::<S>(order, true);
        forward.reverse();
        swaps = forward;
    }
    swaps
}

fn descending_order<S: Scalar>(p: &[S], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let value = |i: usize| if i < p.len() { p[i].clone() } else { S::zero() };
    order.sort_by(|&a, &b| value(b).partial_cmp(&value(a)).expect("comparable").then(a.cmp(&b)));
    order
}

/// Builds a T-transform chain with `chain·p↓ = q↓`, using the largest-gap
/// pairing: `j` is the last index with `x_j > q_j`, `k` the first index after
/// `j` with `x_k < q_k`. Fails when no such pairing exists, which happens
/// exactly when `p` does not majorize `q`.
pub fn t_transform_chain<S: Scalar>(p: &[S], q: &[S]) -> Result<TransformWitness<S>> {
    t_transform_chain_with_cap(p, q, DEFAULT_WITNESS_CAP)
}

pub fn t_transform_chain_with_cap<S: Scalar>(p: &[S], q: &[S], cap: usize) -> Result<TransformWitness<S>> {
    let n = p.len().max(q.len());
    if n > cap {
        return Err(Error::CapExceeded { size: n, cap });
    }
    check_probability(p)?;
    check_probability(q)?;
    let mut x = sorted_padded(p, n);
    let target = sorted_padded(q, n);
    let tol = S::tolerance();
    let mut transforms: Vec<TTransform<S>> = Vec::new();
    loop {
        let Some(j) = (0..n).rev().find(|&i| x[i] > target[i].clone() + tol.clone()) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| x[i].clone() + tol.clone() < target[i]) else {
            return Err(Error::NotMajorized(format!("no coordinate after {j} can absorb its excess")));
        };
        if transforms.len() + 1 >= n.max(2) {
            return Err(Error::NotMajorized("chain exceeds n - 1 steps".into()));
        }
        let excess = x[j].clone() - target[j].clone();
        let deficit = target[k].clone() - x[k].clone();
        let shift = if excess < deficit { excess } else { deficit };
        let spread = x[j].clone() - x[k].clone();
        let t = S::one() - shift / spread;
        if t.is_negative() || t > S::one() {
            return Err(Error::NotMajorized(format!("step mixing ({j}, {k}) needs weight {t}")));
        }
        let tr = TTransform { i: j, j: k, t };
        tr.apply_in_place(&mut x);
        transforms.push(tr);
    }
    let residual = x.iter().zip(&target).fold(S::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs());
    if residual > S::witness_tolerance() {
        return Err(Error::NotMajorized(format!("chain image misses the target by {residual}")));
    }
    Ok(TransformWitness {
        chain: DoublyStochasticMap::from_transforms(n, transforms)?,
        p_order: descending_order(p, n),
        q_order: descending_order(q, n),
    })
}
