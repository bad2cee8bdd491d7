use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Coupling graph given by a dense, possibly directed and weighted adjacency matrix.
///
/// Row `k` lists the inputs of oscillator `k`: `a_{kl}` weights the influence of `l` on `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    adjacency: DMatrix<f64>,
}

impl Network {
    pub fn all_to_all(n: usize) -> Self {
        Self {
            adjacency: DMatrix::from_element(n, n, 1.0),
        }
    }

    pub fn from_matrix(adjacency: DMatrix<f64>) -> Result<Self> {
        if adjacency.nrows() != adjacency.ncols() {
            return Err(Error::DimensionMismatch {
                expected: adjacency.nrows(),
                got: adjacency.ncols(),
            });
        }
        if adjacency.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParams("non-finite adjacency entry".into()));
        }
        Ok(Self { adjacency })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |k, l| rows[k][l]))
    }

    /// Undirected unweighted graph from an edge list.
    pub fn undirected(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut a = DMatrix::zeros(n, n);
        for &(k, l) in edges {
            a[(k, l)] = 1.0;
            a[(l, k)] = 1.0;
        }
        Self { adjacency: a }
    }

    pub fn len(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn weight(&self, k: usize, l: usize) -> f64 {
        self.adjacency[(k, l)]
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|k| self.adjacency.row(k).iter().copied().collect())
            .collect()
    }

    /// Weighted out-degree `Σ_l a_{kl}`.
    pub fn degree(&self, k: usize) -> f64 {
        self.adjacency.row(k).sum()
    }

    pub fn is_all_to_all(&self) -> bool {
        self.adjacency.iter().all(|&a| a == 1.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.adjacency == self.adjacency.transpose()
    }

    /// Nonzero entries `(k, l, a_kl)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |k| {
            (0..n).filter_map(move |l| {
                let a = self.adjacency[(k, l)];
                (a != 0.0).then_some((k, l, a))
            })
        })
    }

    /// Stable content hash, used for caching reductions.
    pub fn content_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.len().hash(&mut h);
        for k in 0..self.len() {
            for l in 0..self.len() {
                self.adjacency[(k, l)].to_bits().hash(&mut h);
            }
        }
        h.finish()
    }
}

/// JSON form: the string `"all_to_all"` or a list of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AdjacencySpec {
    Named(String),
    Rows(Vec<Vec<f64>>),
}

impl AdjacencySpec {
    pub fn build(&self, n: usize) -> Result<Network> {
        match self {
            AdjacencySpec::Named(name) if name == "all_to_all" => Ok(Network::all_to_all(n)),
            AdjacencySpec::Named(name) => {
                Err(Error::InvalidParams(format!("unknown adjacency '{name}'")))
            }
            AdjacencySpec::Rows(rows) => {
                let net = Network::from_rows(rows)?;
                if net.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        got: net.len(),
                    });
                }
                Ok(net)
            }
        }
    }
}

impl Serialize for Network {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        Network::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_to_all_is_ones() {
        let net = Network::all_to_all(4);
        assert!(net.is_all_to_all());
        assert_eq!(net.degree(2), 4.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Network::from_rows(&[vec![0.0, 1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn adjacency_spec() {
        let spec: AdjacencySpec = serde_json::from_str("\"all_to_all\"").unwrap();
        assert!(spec.build(3).unwrap().is_all_to_all());
        let spec: AdjacencySpec = serde_json::from_str("[[0,1],[1,0]]").unwrap();
        assert_eq!(spec.build(2).unwrap().weight(0, 1), 1.0);
        assert!(spec.build(3).is_err());
    }

    #[test]
    fn hash_changes_with_content() {
        let a = Network::all_to_all(3);
        let b = Network::undirected(3, &[(0, 1), (1, 2)]);
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), Network::all_to_all(3).content_hash());
    }
}
