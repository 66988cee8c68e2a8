//! Gray-code Sobol sequence backed by a vendored Joe–Kuo direction-number table.
//!
//! The table is the plain-text format `d s a m_1 ... m_s`, one line per
//! dimension starting at `d = 2`. Dimension 1 is the van der Corput sequence
//! and has no entry. A header line that does not start with a digit is skipped.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Bits of precision in each coordinate.
pub const BITS: usize = 32;

const SCALE: f64 = 1.0 / 4_294_967_296.0;

static TABLE_TEXT: &str = include_str!("../../data/new-joe-kuo-6.21201");
static TABLE: OnceLock<Vec<PrimitiveEntry>> = OnceLock::new();

/// One row of the direction-number table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveEntry {
    pub dimension: usize,
    /// Degree `s` of the primitive polynomial.
    pub degree: u32,
    /// Interior coefficients `a` of the polynomial, packed as bits.
    pub coefficients: u32,
    /// Initial direction integers `m_1..m_s`.
    pub initial: Vec<u32>,
}

/// Parses a direction-number file.
pub fn parse_direction_numbers(text: &str) -> Result<Vec<PrimitiveEntry>> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || !line.starts_with(|c: char| c.is_ascii_digit()) {
            continue;
        }
        let bad = |reason: &str| Error::DirectionTable {
            line: lineno + 1,
            reason: reason.to_string(),
        };
        let fields = line
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|_| bad("non-integer field")))
            .collect::<Result<Vec<_>>>()?;
        if fields.len() < 4 {
            return Err(bad("expected `d s a m_1 ... m_s`"));
        }
        let (dimension, degree, coefficients) = (fields[0] as usize, fields[1] as u32, fields[2]);
        let initial: Vec<u32> = fields[3..].iter().map(|&m| m as u32).collect();
        if degree == 0 || degree as usize >= BITS || initial.len() != degree as usize {
            return Err(bad("degree does not match number of initial direction integers"));
        }
        if coefficients >> (degree - 1) != 0 {
            return Err(bad("polynomial coefficients exceed degree"));
        }
        for (i, &m) in initial.iter().enumerate() {
            if m % 2 == 0 || u64::from(m) >= 1u64 << (i + 1) {
                return Err(bad("initial direction integer m_i must be odd and below 2^i"));
            }
        }
        let expected = entries.len() + 2;
        if dimension != expected {
            return Err(bad("dimensions must be consecutive starting at 2"));
        }
        entries.push(PrimitiveEntry {
            dimension,
            degree,
            coefficients: coefficients as u32,
            initial,
        });
    }
    Ok(entries)
}

fn table() -> &'static [PrimitiveEntry] {
    TABLE.get_or_init(|| parse_direction_numbers(TABLE_TEXT).expect("vendored direction-number table is well formed"))
}

/// Largest dimension supported by the vendored table.
pub fn max_dimension() -> usize {
    table().len() + 1
}

/// Expands one table row (or the van der Corput dimension when `entry` is
/// `None`) into `BITS` direction integers.
fn direction_integers(entry: Option<&PrimitiveEntry>) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    match entry {
        None => {
            for (i, vi) in v.iter_mut().enumerate() {
                *vi = 1u32 << (BITS - 1 - i);
            }
        }
        Some(e) => {
            let s = e.degree as usize;
            for (i, &m) in e.initial.iter().enumerate() {
                v[i] = m << (BITS - 1 - i);
            }
            for i in s..BITS {
                let mut x = v[i - s] ^ (v[i - s] >> s);
                for k in 1..s {
                    if (e.coefficients >> (s - 1 - k)) & 1 == 1 {
                        x ^= v[i - k];
                    }
                }
                v[i] = x;
            }
        }
    }
    v
}

/// A point of the unit cube, every coordinate in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QmcPoint {
    pub coords: Vec<f64>,
}

impl QmcPoint {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Direction integers for the first `dim` dimensions.
#[derive(Debug, Clone)]
pub struct Sobol {
    directions: Vec<[u32; BITS]>,
}

impl Sobol {
    pub fn new(dim: usize) -> Result<Self> {
        Self::from_table(dim, table())
    }

    /// Builds a generator from an explicitly supplied table.
    pub fn from_table(dim: usize, entries: &[PrimitiveEntry]) -> Result<Self> {
        let max = entries.len() + 1;
        if dim == 0 || dim > max {
            return Err(Error::UnsupportedDimension { dim, max });
        }
        let directions = std::iter::once(direction_integers(None))
            .chain(entries[..dim - 1].iter().map(|e| direction_integers(Some(e))))
            .collect();
        Ok(Self { directions })
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    /// Integer coordinates of the `index`-th point in Gray-code order.
    pub fn point_bits(&self, index: u32, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (o, dirs) in out.iter_mut().zip(&self.directions) {
            let mut x = 0u32;
            let mut g = gray;
            let mut bit = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= dirs[bit];
                }
                g >>= 1;
                bit += 1;
            }
            *o = x;
        }
    }

    pub fn point(&self, index: u32) -> QmcPoint {
        let mut bits = vec![0u32; self.dim()];
        self.point_bits(index, &mut bits);
        QmcPoint {
            coords: bits.into_iter().map(to_unit).collect(),
        }
    }

    /// Incremental generator starting at index 0.
    pub fn points(&self) -> GrayCodePoints<'_> {
        GrayCodePoints {
            sobol: self,
            state: vec![0; self.dim()],
            index: 0,
        }
    }
}

#[inline]
pub(crate) fn to_unit(x: u32) -> f64 {
    f64::from(x) * SCALE
}

/// Walks the sequence one point at a time, XOR-ing a single direction
/// integer per coordinate per step.
#[derive(Debug)]
pub struct GrayCodePoints<'a> {
    sobol: &'a Sobol,
    state: Vec<u32>,
    index: u64,
}

impl GrayCodePoints<'_> {
    /// Index of the point the next call to [`Self::next_bits`] returns.
    pub fn index(&self) -> u64 {
        self.index
    }

    /// Integer coordinates of the current point; advances the generator.
    pub fn next_bits(&mut self) -> Option<&[u32]> {
        if self.index > u64::from(u32::MAX) {
            return None;
        }
        if self.index > 0 {
            let bit = (self.index.trailing_zeros()) as usize;
            for (s, dirs) in self.state.iter_mut().zip(&self.sobol.directions) {
                *s ^= dirs[bit];
            }
        }
        self.index += 1;
        Some(&self.state)
    }
}

impl Iterator for GrayCodePoints<'_> {
    type Item = QmcPoint;

    fn next(&mut self) -> Option<QmcPoint> {
        self.next_bits().map(|bits| QmcPoint {
            coords: bits.iter().map(|&b| to_unit(b)).collect(),
        })
    }
}

/// The `index`-th point of the `dim`-dimensional Sobol sequence.
pub fn sobol_point(index: u32, dim: usize) -> Result<QmcPoint> {
    Ok(Sobol::new(dim)?.point(index))
}
