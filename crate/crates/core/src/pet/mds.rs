//! Systematic maximum-distance-separable erasure codes over GF(2^m).
//!
//! Rows `0..k` of a codeword are the data rows; rows `k..n` are parity.
//! Parity uses a Cauchy matrix `1 / (x_j + y_i)` with `y_i = i` and
//! `x_j = k + j`, so every square submatrix is invertible and any `k` rows
//! determine the data. The repetition (`k = 1`) and single-parity
//! (`k = n - 1`) codes use all-one coefficients and exist over every field.

use crate::error::PetError;

use super::gf::Field;

#[derive(Debug, Clone)]
pub struct MdsCode {
    field: &'static Field,
    k: usize,
    n: usize,
    /// `(n - k) x k` parity coefficients.
    parity: Vec<Vec<u16>>,
}

impl MdsCode {
    /// A `(k, n)` code with symbols of `bits` bits.
    pub fn new(k: usize, n: usize, bits: u32) -> Result<Self, PetError> {
        if k == 0 || k > n || !(1..=16).contains(&bits) {
            return Err(PetError::InvalidCode { k, n });
        }
        let field = Field::get(bits);
        let parity = if k == 1 || k + 1 == n || k == n {
            vec![vec![1u16; k]; n - k]
        } else {
            if n > field.order() {
                return Err(PetError::InvalidCode { k, n });
            }
            (0..n - k)
                .map(|j| {
                    (0..k)
                        .map(|i| field.inv(((k + j) ^ i) as u16))
                        .collect()
                })
                .collect()
        };
        Ok(Self {
            field,
            k,
            n,
            parity,
        })
    }

    /// True if a `(k, n)` code exists with `bits`-bit symbols here.
    pub fn supports(k: usize, n: usize, bits: u32) -> bool {
        Self::new(k, n, bits).is_ok()
    }

    pub fn data_rows(&self) -> usize {
        self.k
    }

    pub fn total_rows(&self) -> usize {
        self.n
    }

    /// Generator row for codeword row `r`.
    fn generator_row(&self, r: usize) -> Vec<u16> {
        if r < self.k {
            let mut row = vec![0u16; self.k];
            row[r] = 1;
            row
        } else {
            self.parity[r - self.k].clone()
        }
    }

    /// Parity rows for `k` equal-length data rows.
    pub fn encode(&self, data: &[Vec<u16>]) -> Result<Vec<Vec<u16>>, PetError> {
        if data.len() != self.k {
            return Err(PetError::InsufficientShares {
                needed: self.k,
                got: data.len(),
            });
        }
        let len = data[0].len();
        if data.iter().any(|r| r.len() != len) {
            return Err(PetError::RaggedRows);
        }
        Ok(self
            .parity
            .iter()
            .map(|coeffs| {
                let mut out = vec![0u16; len];
                for (row, &c) in data.iter().zip(coeffs) {
                    if c == 0 {
                        continue;
                    }
                    for (o, &d) in out.iter_mut().zip(row) {
                        *o ^= self.field.mul(c, d);
                    }
                }
                out
            })
            .collect())
    }

    /// Recovers the data rows from any `k` distinct codeword rows, given as
    /// `(row index, symbols)`. Extra rows beyond the first `k` are ignored.
    pub fn decode(&self, shares: &[(usize, &[u16])]) -> Result<Vec<Vec<u16>>, PetError> {
        let mut seen = vec![false; self.n];
        for &(r, _) in shares {
            if r >= self.n {
                return Err(PetError::BadIndex(r));
            }
            if seen[r] {
                return Err(PetError::DuplicateIndex(r));
            }
            seen[r] = true;
        }
        if shares.len() < self.k {
            return Err(PetError::InsufficientShares {
                needed: self.k,
                got: shares.len(),
            });
        }
        let mut chosen: Vec<(usize, &[u16])> = shares.to_vec();
        chosen.sort_by_key(|s| s.0);
        chosen.truncate(self.k);
        let len = chosen[0].1.len();
        if chosen.iter().any(|s| s.1.len() != len) {
            return Err(PetError::RaggedRows);
        }
        if chosen.iter().all(|s| s.0 < self.k) {
            return Ok(chosen.iter().map(|s| s.1.to_vec()).collect());
        }

        // invert the k x k generator submatrix by Gauss-Jordan elimination
        let f = self.field;
        let k = self.k;
        let mut m: Vec<Vec<u16>> = chosen.iter().map(|s| self.generator_row(s.0)).collect();
        let mut inv: Vec<Vec<u16>> = (0..k)
            .map(|i| (0..k).map(|j| u16::from(i == j)).collect())
            .collect();
        for col in 0..k {
            let pivot = (col..k)
                .find(|&r| m[r][col] != 0)
                .expect("MDS submatrix is invertible");
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let p = f.inv(m[col][col]);
            for j in 0..k {
                m[col][j] = f.mul(m[col][j], p);
                inv[col][j] = f.mul(inv[col][j], p);
            }
            for r in 0..k {
                let factor = m[r][col];
                if r == col || factor == 0 {
                    continue;
                }
                for j in 0..k {
                    let a = f.mul(factor, m[col][j]);
                    m[r][j] ^= a;
                    let b = f.mul(factor, inv[col][j]);
                    inv[r][j] ^= b;
                }
            }
        }

        Ok(inv
            .iter()
            .map(|coeffs| {
                let mut out = vec![0u16; len];
                for (&c, share) in coeffs.iter().zip(&chosen) {
                    if c == 0 {
                        continue;
                    }
                    for (o, &d) in out.iter_mut().zip(share.1) {
                        *o ^= f.mul(c, d);
                    }
                }
                out
            })
            .collect())
    }
}

/// Parity rows of a systematic `(k, total_rows)` byte-symbol code, where
/// `k = data_rows.len()`.
pub fn mds_encode(data_rows: &[Vec<u8>], total_rows: usize) -> Result<Vec<Vec<u8>>, PetError> {
    let k = data_rows.len();
    if total_rows > 255 {
        return Err(PetError::InvalidCode { k, n: total_rows });
    }
    let code = MdsCode::new(k, total_rows, 8)?;
    let widened: Vec<Vec<u16>> = data_rows
        .iter()
        .map(|r| r.iter().map(|&b| b as u16).collect())
        .collect();
    Ok(code
        .encode(&widened)?
        .into_iter()
        .map(|r| r.into_iter().map(|s| s as u8).collect())
        .collect())
}

/// Data rows of a `(k, total_rows)` byte-symbol code from any `k` rows,
/// given with their codeword indices (`0..k` data, `k..total_rows` parity).
pub fn mds_decode(
    shares: &[(usize, Vec<u8>)],
    k: usize,
    total_rows: usize,
) -> Result<Vec<Vec<u8>>, PetError> {
    if total_rows > 255 {
        return Err(PetError::InvalidCode { k, n: total_rows });
    }
    let code = MdsCode::new(k, total_rows, 8)?;
    let widened: Vec<(usize, Vec<u16>)> = shares
        .iter()
        .map(|(i, r)| (*i, r.iter().map(|&b| b as u16).collect()))
        .collect();
    let refs: Vec<(usize, &[u16])> = widened.iter().map(|(i, r)| (*i, r.as_slice())).collect();
    Ok(code
        .decode(&refs)?
        .into_iter()
        .map(|r| r.into_iter().map(|s| s as u8).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, k: usize, len: usize) -> Vec<Vec<u8>> {
        (0..k).map(|_| (0..len).map(|_| rng.gen()).collect()).collect()
    }

    fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == size)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect()
    }

    #[test]
    fn repetition_parity_copies_data() {
        let data = vec![vec![7u8, 0, 255]];
        assert_eq!(mds_encode(&data, 2).unwrap(), data);
    }

    #[test]
    fn full_rate_has_no_parity() {
        let data = vec![vec![1u8], vec![2], vec![3]];
        assert!(mds_encode(&data, 3).unwrap().is_empty());
        let shares: Vec<(usize, Vec<u8>)> = data.iter().cloned().enumerate().collect();
        assert_eq!(mds_decode(&shares, 3, 3).unwrap(), data);
    }

    #[test]
    fn every_k_subset_decodes_and_smaller_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=7 {
            for k in 1..=n {
                let data = random_rows(&mut rng, k, 5);
                let parity = mds_encode(&data, n).unwrap();
                let all: Vec<Vec<u8>> = data.iter().chain(&parity).cloned().collect();
                for s in subsets(n, k) {
                    let shares: Vec<(usize, Vec<u8>)> =
                        s.iter().map(|&i| (i, all[i].clone())).collect();
                    assert_eq!(mds_decode(&shares, k, n).unwrap(), data, "n={n} k={k} {s:?}");
                }
                for s in subsets(n, k - 1) {
                    let shares: Vec<(usize, Vec<u8>)> =
                        s.iter().map(|&i| (i, all[i].clone())).collect();
                    assert_eq!(
                        mds_decode(&shares, k, n),
                        Err(PetError::InsufficientShares { needed: k, got: k - 1 })
                    );
                }
            }
        }
    }

    #[test]
    fn small_fields_cover_what_exists() {
        // (2, 4) over bits does not exist; repetition and parity codes do
        assert!(!MdsCode::supports(2, 4, 1));
        assert!(MdsCode::supports(1, 4, 1));
        assert!(MdsCode::supports(3, 4, 1));
        assert!(MdsCode::supports(2, 4, 2));
        assert!(!MdsCode::supports(3, 6, 2));
        assert!(MdsCode::supports(3, 6, 3));
        let code = MdsCode::new(2, 4, 2).unwrap();
        let data = vec![vec![1u16, 2, 3], vec![3u16, 0, 1]];
        let parity = code.encode(&data).unwrap();
        let rows: Vec<Vec<u16>> = data.iter().chain(&parity).cloned().collect();
        for s in subsets(4, 2) {
            let shares: Vec<(usize, &[u16])> = s.iter().map(|&i| (i, rows[i].as_slice())).collect();
            assert_eq!(code.decode(&shares).unwrap(), data);
        }
    }

    #[test]
    fn share_validation() {
        let data = vec![vec![1u8], vec![2]];
        let shares = vec![(0, data[0].clone()), (0, data[0].clone())];
        assert_eq!(mds_decode(&shares, 2, 3), Err(PetError::DuplicateIndex(0)));
        let shares = vec![(5, data[0].clone()), (0, data[0].clone())];
        assert_eq!(mds_decode(&shares, 2, 3), Err(PetError::BadIndex(5)));
        assert!(mds_encode(&data, 256).is_err());
        assert!(mds_encode(&[], 3).is_err());
    }
}
