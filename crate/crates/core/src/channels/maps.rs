use serde::{Deserialize, Serialize};

use crate::accessibility::{check_probability, majorizes};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Mixes coordinates `i` and `j`: `x_i ← t·x_i + (1-t)·x_j` and
/// `x_j ← (1-t)·x_i + t·x_j`. `t = 0` swaps them, `t = 1` is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTransform<S> {
    pub i: usize,
    pub j: usize,
    pub t: S,
}

impl<S: Scalar> TTransform<S> {
    pub fn swap(i: usize, j: usize) -> Self {
        TTransform { i, j, t: S::zero() }
    }

    pub fn apply_in_place(&self, x: &mut [S]) {
        let (a, b) = (x[self.i].clone(), x[self.j].clone());
        let s = S::one() - self.t.clone();
        x[self.i] = self.t.clone() * a.clone() + s.clone() * b.clone();
        x[self.j] = s * a + self.t.clone() * b;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum MapRepr<S> {
    Matrix { rows: Vec<Vec<S>> },
    /// Applied first to last.
    Composition { transforms: Vec<TTransform<S>> },
}

/// An `n × n` doubly stochastic matrix, kept either explicitly or as a chain
/// of T-transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublyStochasticMap<S> {
    size: usize,
    repr: MapRepr<S>,
}

impl<S: Scalar> DoublyStochasticMap<S> {
    pub fn identity(size: usize) -> Self {
        DoublyStochasticMap { size, repr: MapRepr::Composition { transforms: Vec::new() } }
    }

    pub fn from_matrix(rows: Vec<Vec<S>>) -> Result<Self> {
        let map = DoublyStochasticMap { size: rows.len(), repr: MapRepr::Matrix { rows } };
        map.validate()?;
        Ok(map)
    }

    pub fn from_transforms(size: usize, transforms: Vec<TTransform<S>>) -> Result<Self> {
        for (k, tr) in transforms.iter().enumerate() {
            if tr.i >= size || tr.j >= size || tr.i == tr.j {
                return Err(Error::InvalidMap(format!("transform {k} mixes ({}, {}) in size {size}", tr.i, tr.j)));
            }
            if tr.t.is_negative() || tr.t > S::one() {
                return Err(Error::InvalidMap(format!("transform {k} has weight {} outside [0, 1]", tr.t)));
            }
        }
        Ok(DoublyStochasticMap { size, repr: MapRepr::Composition { transforms } })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn repr(&self) -> &MapRepr<S> {
        &self.repr
    }

    /// T-transforms of a composition map; `None` for explicit matrices.
    pub fn transforms(&self) -> Option<&[TTransform<S>]> {
        match &self.repr {
            MapRepr::Composition { transforms } => Some(transforms),
            MapRepr::Matrix { .. } => None,
        }
    }

    /// Explicit matrix, expanding a composition column by column.
    pub fn to_matrix(&self) -> Vec<Vec<S>> {
        match &self.repr {
            MapRepr::Matrix { rows } => rows.clone(),
            MapRepr::Composition { .. } => {
                let mut rows = vec![vec![S::zero(); self.size]; self.size];
                for c in 0..self.size {
                    let mut e = vec![S::zero(); self.size];
                    e[c] = S::one();
                    let col = self.apply_unchecked(&e);
                    for (r, v) in col.into_iter().enumerate() {
                        rows[r][c] = v;
                    }
                }
                rows
            }
        }
    }

    /// Row and column sums equal to one and entries in `[0, 1]`, within the
    /// scalar tolerance.
    pub fn validate(&self) -> Result<()> {
        let rows = self.to_matrix();
        let n = self.size;
        let tol = S::tolerance();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for (c, v) in row.iter().enumerate() {
                if *v < S::zero() - tol.clone() || *v > S::one() + tol.clone() {
                    return Err(Error::InvalidMap(format!("entry ({r}, {c}) = {v} outside [0, 1]")));
                }
            }
            let sum = row.iter().fold(S::zero(), |a, v| a + v.clone());
            if (sum.clone() - S::one()).abs() > tol {
                return Err(Error::InvalidMap(format!("row {r} sums to {sum}")));
            }
        }
        for c in 0..n {
            let sum = rows.iter().fold(S::zero(), |a, row| a + row[c].clone());
            if (sum.clone() - S::one()).abs() > tol {
                return Err(Error::InvalidMap(format!("column {c} sums to {sum}")));
            }
        }
        Ok(())
    }

    fn apply_unchecked(&self, p: &[S]) -> Vec<S> {
        match &self.repr {
            MapRepr::Matrix { rows } => rows
                .iter()
                .map(|row| row.iter().zip(p).fold(S::zero(), |a, (m, x)| a + m.clone() * x.clone()))
                .collect(),
            MapRepr::Composition { transforms } => {
                let mut x = p.to_vec();
                for tr in transforms {
                    tr.apply_in_place(&mut x);
                }
                x
            }
        }
    }

    /// `T·p` without normalization checks, for arbitrary vectors.
    pub fn apply_vector(&self, p: &[S]) -> Result<Vec<S>> {
        if p.len() != self.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: p.len() });
        }
        Ok(self.apply_unchecked(p))
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &DoublyStochasticMap<S>) -> Result<Self> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: other.size });
        }
        match (&self.repr, &other.repr) {
            (MapRepr::Composition { transforms: a }, MapRepr::Composition { transforms: b }) => {
                Ok(DoublyStochasticMap {
                    size: self.size,
                    repr: MapRepr::Composition { transforms: a.iter().chain(b).cloned().collect() },
                })
            }
            _ => {
                let (a, b) = (self.to_matrix(), other.to_matrix());
                let n = self.size;
                let rows = (0..n)
                    .map(|r| {
                        (0..n)
                            .map(|c| (0..n).fold(S::zero(), |acc, k| acc + b[r][k].clone() * a[k][c].clone()))
                            .collect()
                    })
                    .collect();
                Ok(DoublyStochasticMap { size: n, repr: MapRepr::Matrix { rows } })
            }
        }
    }
}

/// `T·p` for a probability vector, checking that the image is normalized
/// and majorized by `p`.
pub fn apply_map<S: Scalar>(map: &DoublyStochasticMap<S>, p: &[S]) -> Result<Vec<S>> {
    check_probability(p)?;
    let image = map.apply_vector(p)?;
    check_probability(&image).map_err(|e| Error::InvariantViolation(format!("image is not a distribution: {e}")))?;
    if !majorizes(p, &image)? {
        return Err(Error::InvariantViolation("image is not majorized by the input".into()));
    }
    Ok(image)
}
