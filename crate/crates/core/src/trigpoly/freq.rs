use std::cmp::Ordering;
use std::fmt;

/// Integer frequency vector `n` of a Fourier mode `exp(i n·φ)`.
///
/// Stored sparsely as `(oscillator index, frequency)` pairs sorted by index,
/// with zero frequencies dropped. `total` caches `Σ n_j`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FreqVector {
    entries: Vec<(u32, i32)>,
    total: i32,
}

impl FreqVector {
    /// The zero vector (constant mode).
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a frequency vector, merging repeated indices and dropping zeros.
    pub fn new<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (usize, i32)>,
    {
        let mut entries: Vec<(u32, i32)> = pairs
            .into_iter()
            .map(|(idx, f)| (idx as u32, f))
            .collect();
        entries.sort_unstable_by_key(|e| e.0);
        let mut merged: Vec<(u32, i32)> = Vec::with_capacity(entries.len());
        for (idx, f) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 += f,
                _ => merged.push((idx, f)),
            }
        }
        merged.retain(|e| e.1 != 0);
        let total = merged.iter().map(|e| e.1).sum();
        Self {
            entries: merged,
            total,
        }
    }

    pub fn single(idx: usize, freq: i32) -> Self {
        Self::new([(idx, freq)])
    }

    pub fn entries(&self) -> &[(u32, i32)] {
        &self.entries
    }

    /// Sum of all frequencies, `Σ n_j`.
    pub fn total(&self) -> i32 {
        self.total
    }

    /// Total degree `Σ |n_j|`.
    pub fn degree(&self) -> u32 {
        self.entries.iter().map(|e| e.1.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Frequency of oscillator `idx` (zero when absent).
    pub fn freq(&self, idx: usize) -> i32 {
        self.entries
            .binary_search_by_key(&(idx as u32), |e| e.0)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    /// Largest oscillator index carrying a nonzero frequency.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|e| e.0 as usize)
    }

    /// True when the first nonzero entry is positive; the zero vector is not positive.
    pub fn is_positive(&self) -> bool {
        self.entries.first().is_some_and(|e| e.1 > 0)
    }

    pub fn negated(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|&(i, f)| (i, -f)).collect(),
            total: -self.total,
        }
    }

    /// Frequency vector of the product of two modes.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut a, mut b) = (0, 0);
        while a < self.entries.len() && b < other.entries.len() {
            let (ia, fa) = self.entries[a];
            let (ib, fb) = other.entries[b];
            match ia.cmp(&ib) {
                Ordering::Less => {
                    out.push((ia, fa));
                    a += 1;
                }
                Ordering::Greater => {
                    out.push((ib, fb));
                    b += 1;
                }
                Ordering::Equal => {
                    if fa + fb != 0 {
                        out.push((ia, fa + fb));
                    }
                    a += 1;
                    b += 1;
                }
            }
        }
        out.extend_from_slice(&self.entries[a..]);
        out.extend_from_slice(&other.entries[b..]);
        Self {
            entries: out,
            total: self.total + other.total,
        }
    }

    /// `n·φ`.
    pub fn dot(&self, phases: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(i, f)| f as f64 * phases[i as usize])
            .sum()
    }

    /// Applies an oscillator relabeling `idx -> perm[idx]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        Self::new(self.entries.iter().map(|&(i, f)| (perm[i as usize], f)))
    }
}

impl Ord for FreqVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl PartialOrd for FreqVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FreqVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FreqVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (pos, &(idx, freq)) in self.entries.iter().enumerate() {
            let sign = if freq < 0 { "-" } else if pos > 0 { "+" } else { "" };
            let mag = freq.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}φ{idx}")?;
            } else {
                write!(f, "{sign}{mag}φ{idx}")?;
            }
        }
        Ok(())
    }
}
