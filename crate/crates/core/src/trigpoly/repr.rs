//! JSON form of [`TrigPoly`]: `{n, terms: [{modes: [[idx, freq], ...], re, im}]}`
//! with terms in canonical order.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FreqVector, TrigPoly};
use crate::error::Error;

#[derive(Serialize, Deserialize)]
pub(super) struct TermRepr {
    modes: Vec<[i64; 2]>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
pub(super) struct TrigPolyRepr {
    n: usize,
    terms: Vec<TermRepr>,
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        let terms = p
            .terms
            .iter()
            .map(|(freq, c)| TermRepr {
                modes: freq
                    .entries()
                    .iter()
                    .map(|&(i, f)| [i as i64, f as i64])
                    .collect(),
                re: c.re,
                im: c.im,
            })
            .collect();
        TrigPolyRepr { n: p.n, terms }
    }
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = Error;

    fn try_from(r: TrigPolyRepr) -> Result<Self, Error> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for t in r.terms {
            let mut pairs = Vec::with_capacity(t.modes.len());
            for [idx, freq] in t.modes {
                let idx = usize::try_from(idx)
                    .map_err(|_| Error::Serde(format!("negative oscillator index {idx}")))?;
                let freq = i32::try_from(freq)
                    .map_err(|_| Error::Serde(format!("frequency {freq} out of range")))?;
                pairs.push((idx, freq));
            }
            terms.push((FreqVector::new(pairs), Complex64::new(t.re, t.im)));
        }
        TrigPoly::from_terms(r.n, terms)
    }
}

