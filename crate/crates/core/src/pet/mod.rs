//! Priority encoding transmission: K balanced descriptions from a
//! progressive bitstream.
//!
//! The code is a `K x (n·r)` bit matrix split into K column segments of
//! widths `w_l`. Segment `l` holds `l·w_l` source bits in its first `l`
//! rows and the parity of an `(l, K)` MDS code in the remaining rows. Each
//! row is one description, so any `l` descriptions recover the first
//! `ξ_l = Σ_{k≤l} k·w_k` source bits.

mod gf;
mod mds;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::PetError;
use crate::rainbow::{DistortionModel, Drf};

pub use gf::Field;
pub use mds::{mds_decode, mds_encode, MdsCode};

/// Largest description count the codec supports.
pub const MAX_DESCRIPTIONS: usize = 255;

/// Level fractions `y` with `Σ y_l = 1`, and the per-description rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct PetProfile {
    levels: Vec<f64>,
    rate: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    levels: Vec<f64>,
    rate: f64,
}

impl TryFrom<RawProfile> for PetProfile {
    type Error = PetError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        PetProfile::new(raw.levels, raw.rate)
    }
}

impl From<PetProfile> for RawProfile {
    fn from(p: PetProfile) -> Self {
        RawProfile {
            levels: p.levels,
            rate: p.rate,
        }
    }
}

impl PetProfile {
    pub fn new(levels: Vec<f64>, rate: f64) -> Result<Self, PetError> {
        if levels.is_empty() || levels.len() > MAX_DESCRIPTIONS {
            return Err(PetError::InvalidProfile(format!(
                "need 1 to {MAX_DESCRIPTIONS} levels, got {}",
                levels.len()
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(PetError::InvalidProfile(format!("rate must be positive, got {rate}")));
        }
        if let Some(i) = levels.iter().position(|y| !(y.is_finite() && *y >= 0.0)) {
            return Err(PetError::InvalidProfile(format!(
                "y_{} = {} is not a non-negative number",
                i + 1,
                levels[i]
            )));
        }
        let sum: f64 = levels.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(PetError::InvalidProfile(format!("levels sum to {sum}, not 1")));
        }
        Ok(Self { levels, rate })
    }

    /// All weight on level `l` (1-based).
    pub fn single_level(k: usize, l: usize, rate: f64) -> Result<Self, PetError> {
        if l == 0 || l > k {
            return Err(PetError::InvalidProfile(format!("level {l} outside 1..={k}")));
        }
        let mut y = vec![0.0; k];
        y[l - 1] = 1.0;
        Self::new(y, rate)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn descriptions(&self) -> usize {
        self.levels.len()
    }

    /// `r Σ_{l≤k} l·y_l`: the source rate recoverable from `k` descriptions.
    pub fn recoverable_rate(&self, k: usize) -> f64 {
        self.rate
            * self
                .levels
                .iter()
                .take(k)
                .enumerate()
                .map(|(i, y)| (i + 1) as f64 * y)
                .sum::<f64>()
    }

    /// δ(k) = D_X(r Σ_{l≤k} l·y_l) as a distortion model.
    pub fn distortion_model(&self, drf: &Drf) -> Result<DistortionModel, crate::error::FlowError> {
        let k = self.descriptions();
        DistortionModel::from_fn(k, drf.clone(), |j| pet_distortion(j, self, drf))
    }
}

/// D_X(r Σ_{l≤k} l·y_l); `k = 0` gives D_X(0), `k > K` saturates.
pub fn pet_distortion(k: usize, profile: &PetProfile, drf: &Drf) -> f64 {
    drf.eval(profile.recoverable_rate(k))
}

/// Column partition of the description matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetLayout {
    block_length: usize,
    columns: usize,
    widths: Vec<usize>,
    prefix: Vec<usize>,
    column_starts: Vec<usize>,
}

impl PetLayout {
    /// Source samples per block, `n`.
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// Bits per description, `n·r`.
    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn descriptions(&self) -> usize {
        self.widths.len()
    }

    /// Segment widths `w_1..w_K`.
    pub fn segment_widths(&self) -> &[usize] {
        &self.widths
    }

    /// `ξ_0..ξ_K`.
    pub fn source_prefix_lengths(&self) -> &[usize] {
        &self.prefix
    }

    /// `ξ_l`, saturating at `ξ_K`.
    pub fn prefix_len(&self, l: usize) -> usize {
        self.prefix[l.min(self.widths.len())]
    }

    /// Stream position where level `l`'s source bits start, `ξ_{l-1}`, for
    /// `l = 1..=K`.
    pub fn segment_offsets(&self) -> &[usize] {
        &self.prefix[..self.widths.len()]
    }

    /// First matrix column of each segment.
    pub fn column_starts(&self) -> &[usize] {
        &self.column_starts
    }

    /// Source bits consumed per block, `ξ_K`.
    pub fn source_bits(&self) -> usize {
        *self.prefix.last().expect("prefix has K+1 entries")
    }
}

/// Integer widths from `n·r·y_l` by largest remainder, ties to the lower
/// level, so that `Σ w_l = n·r`.
pub fn make_layout(profile: &PetProfile, n: usize) -> Result<PetLayout, PetError> {
    let exact = n as f64 * profile.rate();
    let columns = exact.round();
    if (exact - columns).abs() > 1e-9 * exact.abs().max(1.0) {
        return Err(PetError::NonIntegralColumns(exact));
    }
    let columns = columns as usize;
    let k = profile.descriptions();

    let mut widths = Vec::with_capacity(k);
    let mut remainders = Vec::with_capacity(k);
    for &y in profile.levels() {
        let raw = columns as f64 * y;
        let floor = (raw + 1e-9).floor();
        widths.push(floor as usize);
        remainders.push((raw - floor).max(0.0));
    }
    let assigned: usize = widths.iter().sum();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
    for &i in order.iter().take(columns.saturating_sub(assigned)) {
        widths[i] += 1;
    }
    // guard against float sums landing one above n·r
    let mut excess = widths.iter().sum::<usize>().saturating_sub(columns);
    for i in (0..k).rev() {
        while excess > 0 && widths[i] > 0 {
            widths[i] -= 1;
            excess -= 1;
        }
    }

    let mut prefix = vec![0usize; k + 1];
    let mut column_starts = vec![0usize; k];
    for l in 1..=k {
        prefix[l] = prefix[l - 1] + l * widths[l - 1];
        if l < k {
            column_starts[l] = column_starts[l - 1] + widths[l - 1];
        }
    }
    Ok(PetLayout {
        block_length: n,
        columns,
        widths,
        prefix,
        column_starts,
    })
}

/// One description: a row of the matrix. `index` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Description {
    pub index: usize,
    pub payload: Vec<bool>,
}

/// Symbol sizes covering a segment of `width` columns: 8-bit symbols with
/// the remainder merged into the last one.
fn chunks(width: usize) -> Vec<(usize, u32)> {
    if width < 8 {
        return vec![(0, width as u32)];
    }
    let full = width / 8;
    let tail = width % 8;
    let mut out: Vec<(usize, u32)> = (0..full - 1).map(|i| (8 * i, 8)).collect();
    out.push((8 * (full - 1), (8 + tail) as u32));
    out
}

fn to_symbol(bits: &[bool]) -> u16 {
    bits.iter().fold(0u16, |s, &b| s << 1 | u16::from(b))
}

fn from_symbol(s: u16, bits: u32, out: &mut [bool]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = s >> (bits as usize - 1 - i) & 1 == 1;
    }
}

/// Codes for each chunk of segment `level`.
fn segment_codes(level: usize, width: usize, k: usize) -> Result<Vec<(usize, u32, MdsCode)>, PetError> {
    chunks(width)
        .into_iter()
        .map(|(start, bits)| {
            MdsCode::new(level, k, bits)
                .map(|code| (start, bits, code))
                .map_err(|_| PetError::SegmentTooNarrow {
                    level,
                    width,
                    descriptions: k,
                })
        })
        .collect()
}

/// Checks that every non-empty segment admits an MDS code.
pub fn check_layout(layout: &PetLayout) -> Result<(), PetError> {
    let k = layout.descriptions();
    for (i, &w) in layout.segment_widths().iter().enumerate() {
        if w > 0 {
            segment_codes(i + 1, w, k)?;
        }
    }
    Ok(())
}

/// Splits the first `ξ_K` bits of `source_bits` into K descriptions.
pub fn encode(
    source_bits: &[bool],
    layout: &PetLayout,
    profile: &PetProfile,
) -> Result<Vec<Description>, PetError> {
    let k = profile.descriptions();
    if layout.descriptions() != k {
        return Err(PetError::InvalidProfile(format!(
            "layout has {} levels, profile has {k}",
            layout.descriptions()
        )));
    }
    let needed = layout.source_bits();
    if source_bits.len() < needed {
        return Err(PetError::InsufficientBits {
            needed,
            got: source_bits.len(),
        });
    }
    let mut rows = vec![vec![false; layout.columns()]; k];
    for l in 1..=k {
        let w = layout.segment_widths()[l - 1];
        if w == 0 {
            continue;
        }
        let col0 = layout.column_starts()[l - 1];
        let src = &source_bits[layout.prefix_len(l - 1)..layout.prefix_len(l)];
        for (i, row) in rows.iter_mut().take(l).enumerate() {
            row[col0..col0 + w].copy_from_slice(&src[i * w..(i + 1) * w]);
        }
        for (start, bits, code) in segment_codes(l, w, k)? {
            let b = bits as usize;
            let data: Vec<Vec<u16>> = rows[..l]
                .iter()
                .map(|r| vec![to_symbol(&r[col0 + start..col0 + start + b])])
                .collect();
            let parity = code.encode(&data)?;
            for (j, p) in parity.iter().enumerate() {
                let row = &mut rows[l + j];
                from_symbol(p[0], bits, &mut row[col0 + start..col0 + start + b]);
            }
        }
    }
    Ok(rows
        .into_iter()
        .enumerate()
        .map(|(i, payload)| Description {
            index: i + 1,
            payload,
        })
        .collect())
}

/// Recovers the first `ξ_l` source bits from `l` distinct descriptions.
pub fn decode(
    received: &[Description],
    layout: &PetLayout,
    profile: &PetProfile,
) -> Result<Vec<bool>, PetError> {
    let k = profile.descriptions();
    let mut seen = vec![false; k + 1];
    for d in received {
        if d.index == 0 || d.index > k {
            return Err(PetError::BadIndex(d.index));
        }
        if seen[d.index] {
            return Err(PetError::DuplicateIndex(d.index));
        }
        seen[d.index] = true;
        if d.payload.len() != layout.columns() {
            return Err(PetError::PayloadLength {
                index: d.index,
                got: d.payload.len(),
                expected: layout.columns(),
            });
        }
    }
    let l = received.len().min(k);
    let mut sorted: Vec<&Description> = received.iter().collect();
    sorted.sort_by_key(|d| d.index);

    let mut out = vec![false; layout.prefix_len(l)];
    for level in 1..=l {
        let w = layout.segment_widths()[level - 1];
        if w == 0 {
            continue;
        }
        let col0 = layout.column_starts()[level - 1];
        let base = layout.prefix_len(level - 1);
        for (start, bits, code) in segment_codes(level, w, k)? {
            let b = bits as usize;
            let symbols: Vec<(usize, Vec<u16>)> = sorted
                .iter()
                .map(|d| {
                    let s = to_symbol(&d.payload[col0 + start..col0 + start + b]);
                    (d.index - 1, vec![s])
                })
                .collect();
            let shares: Vec<(usize, &[u16])> =
                symbols.iter().map(|(i, s)| (*i, s.as_slice())).collect();
            let data = code.decode(&shares)?;
            for (i, row) in data.iter().enumerate() {
                let at = base + i * w + start;
                from_symbol(row[0], bits, &mut out[at..at + b]);
            }
        }
    }
    Ok(out)
}

/// Bits packed most-significant first; the last byte is zero-padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| {
            c.iter()
                .enumerate()
                .fold(0u8, |b, (i, &bit)| b | u8::from(bit) << (7 - i))
        })
        .collect()
}

/// The first `len` bits of `bytes`, most-significant first.
pub fn unpack_bits(bytes: &[u8], len: usize) -> Vec<bool> {
    (0..len.min(bytes.len() * 8))
        .map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect()
}

/// Hex SHA-256 of a payload's packed bytes.
pub fn payload_checksum(payload: &[bool]) -> String {
    Sha256::digest(pack_bits(payload))
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Everything a decoder needs besides the payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PetManifest {
    pub descriptions: usize,
    pub rate: f64,
    pub block_length: usize,
    pub levels: Vec<f64>,
    pub segment_widths: Vec<usize>,
    pub source_prefix_lengths: Vec<usize>,
    pub payload_bits: usize,
    /// SHA-256 of each packed payload, by description index.
    pub checksums: Vec<String>,
}

impl PetManifest {
    pub fn new(profile: &PetProfile, layout: &PetLayout, descriptions: &[Description]) -> Self {
        let mut sorted: Vec<&Description> = descriptions.iter().collect();
        sorted.sort_by_key(|d| d.index);
        Self {
            descriptions: profile.descriptions(),
            rate: profile.rate(),
            block_length: layout.block_length(),
            levels: profile.levels().to_vec(),
            segment_widths: layout.segment_widths().to_vec(),
            source_prefix_lengths: layout.source_prefix_lengths().to_vec(),
            payload_bits: layout.columns(),
            checksums: sorted.iter().map(|d| payload_checksum(&d.payload)).collect(),
        }
    }

    /// Rebuilds the profile and layout, checking they agree with the
    /// recorded widths.
    pub fn restore(&self) -> Result<(PetProfile, PetLayout), PetError> {
        let profile = PetProfile::new(self.levels.clone(), self.rate)?;
        if profile.descriptions() != self.descriptions {
            return Err(PetError::InvalidProfile(format!(
                "manifest lists {} descriptions but {} levels",
                self.descriptions,
                profile.descriptions()
            )));
        }
        let layout = make_layout(&profile, self.block_length)?;
        if layout.segment_widths() != self.segment_widths.as_slice()
            || layout.source_prefix_lengths() != self.source_prefix_lengths.as_slice()
        {
            return Err(PetError::InvalidProfile(
                "recorded widths do not match the profile".into(),
            ));
        }
        Ok((profile, layout))
    }

    /// True if `d` matches the recorded checksum for its index.
    pub fn verify(&self, d: &Description) -> bool {
        d.index >= 1
            && self
                .checksums
                .get(d.index - 1)
                .is_some_and(|c| *c == payload_checksum(&d.payload))
    }
}
