//! GF(2^m) log/antilog arithmetic and line-incidence vectors of the
//! projective plane PG(2, 2^s) and the Euclidean plane EG(2, 2^s).
//!
//! Points of both planes are indexed by discrete logarithm with respect to a
//! primitive element of the ambient field, which turns the line-point
//! incidence matrix into a circulant: one incidence vector defines the code.

use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Primitive polynomials (with the leading term) used for each extension
/// degree, indexed by `m`.
const PRIMITIVE_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B,
    0x4443, 0x8003, 0x1100B,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("extension degree {0} out of range 1..={MAX_DEGREE}")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#x} is not primitive for degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("geometry parameter s = {s} is unsupported: needs GF(2^{m}), max degree is {MAX_DEGREE}")]
    GeometryTooLarge { s: u32, m: u32 },
    #[error("geometry parameter s must be at least 1")]
    GeometryTooSmall,
}

/// The field GF(2^m) with precomputed log and antilog tables.
#[derive(Debug, Clone)]
pub struct FieldGF2m {
    m: u32,
    prim_poly: u32,
    log_table: Vec<u32>,
    antilog_table: Vec<u32>,
}

impl FieldGF2m {
    /// Builds the field using the built-in primitive polynomial for `m`.
    pub fn new(m: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        Self::with_poly(m, PRIMITIVE_POLYS[m as usize])
    }

    /// Builds the field from an explicit polynomial, rejecting it unless `x`
    /// generates the full multiplicative group.
    pub fn with_poly(m: u32, prim_poly: u32) -> Result<Self, FieldError> {
        if m == 0 || m > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        let size = 1usize << m;
        let order = size - 1;
        let mut antilog_table = vec![0u32; order];
        let mut log_table = vec![u32::MAX; size];
        // In GF(2) itself the primitive element is 1.
        let generator: u32 = if m == 1 { 1 } else { 2 };
        let mut current: u32 = 1;
        for (k, slot) in antilog_table.iter_mut().enumerate() {
            if log_table[current as usize] != u32::MAX {
                return Err(FieldError::NotPrimitive { m, poly: prim_poly });
            }
            *slot = current;
            log_table[current as usize] = k as u32;
            current = mul_slow(current, generator, m, prim_poly);
        }
        if current != 1 {
            return Err(FieldError::NotPrimitive { m, poly: prim_poly });
        }
        // log(0) is undefined; the slot is never read through `log`.
        log_table[0] = 0;
        Ok(Self {
            m,
            prim_poly,
            log_table,
            antilog_table,
        })
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn prim_poly(&self) -> u32 {
        self.prim_poly
    }

    /// Number of field elements, `2^m`.
    pub fn size(&self) -> usize {
        1 << self.m
    }

    /// Multiplicative order of the primitive element, `2^m - 1`.
    pub fn order(&self) -> usize {
        self.antilog_table.len()
    }

    /// `alpha^k` for any integer exponent (reduced modulo the group order).
    pub fn exp(&self, k: i64) -> u32 {
        let n = self.order() as i64;
        self.antilog_table[k.rem_euclid(n) as usize]
    }

    /// Discrete logarithm of a nonzero element.
    pub fn log(&self, a: u32) -> Option<u32> {
        if a == 0 || a as usize >= self.size() {
            None
        } else {
            Some(self.log_table[a as usize])
        }
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = self.log_table[a as usize] as usize + self.log_table[b as usize] as usize;
        self.antilog_table[s % self.order()]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        let l = self.log(a)? as i64;
        Some(self.exp(-l))
    }
}

/// Shift-and-reduce multiplication used only to build the tables.
fn mul_slow(mut a: u32, mut b: u32, m: u32, poly: u32) -> u32 {
    let mut acc = 0u32;
    let top = 1u32 << m;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

/// Which plane a line-incidence vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Geometry {
    /// PG(2, 2^s): n = q^2 + q + 1, line weight q + 1.
    Projective,
    /// EG(2, 2^s) without the origin: n = q^2 - 1, line weight q.
    Euclidean,
}

/// Sparse 0/1 vector of length `n` with sorted support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceVector {
    pub n: usize,
    pub support: Vec<usize>,
    /// Primitive polynomial of the ambient field the points were indexed in.
    pub field_poly: u32,
}

impl IncidenceVector {
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    /// Dense 0/1 representation.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.n];
        for &p in &self.support {
            v[p] = 1;
        }
        v
    }

    /// Support of the vector cyclically shifted right by `shift`.
    pub fn shifted(&self, shift: usize) -> Vec<usize> {
        let mut s: Vec<usize> = self.support.iter().map(|&p| (p + shift) % self.n).collect();
        s.sort_unstable();
        s
    }
}

/// Picks the lexicographically smallest sorted support among all cyclic
/// shifts that contain position 0.
fn canonical_shift(n: usize, support: &[usize]) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for &d in support {
        let mut s: Vec<usize> = support.iter().map(|&p| (p + n - d) % n).collect();
        s.sort_unstable();
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    }
    best.unwrap_or_default()
}

fn check_s(s: u32, mult: u32) -> Result<u32, FieldError> {
    if s == 0 {
        return Err(FieldError::GeometryTooSmall);
    }
    let m = s.saturating_mul(mult);
    if m > MAX_DEGREE {
        return Err(FieldError::GeometryTooLarge { s, m });
    }
    Ok(m)
}

/// Incidence vector of a line of PG(2, 2^s) over the cyclic Singer group.
///
/// Points are the elements of GF(q^3)* modulo GF(q)*, indexed by
/// `log(x) mod (q^2 + q + 1)`. The line spanned by `1` and `alpha` is
/// `{1} ∪ {a + alpha : a ∈ GF(q)}`, whose support is a perfect
/// difference set.
pub fn pg_line_incidence(s: u32) -> Result<IncidenceVector, FieldError> {
    let m = check_s(s, 3)?;
    let field = FieldGF2m::new(m)?;
    let q = 1usize << s;
    let n = q * q + q + 1;
    // GF(q)* inside GF(q^3) is generated by alpha^n.
    let alpha = field.exp(1);
    // The point 1 (b = 0) and alpha itself (a = 0).
    let mut support = vec![0usize, 1];
    for k in 0..(q - 1) {
        let a = field.exp((n * k) as i64);
        let point = field.add(a, alpha);
        support.push(field.log(point).expect("a + alpha is nonzero") as usize % n);
    }
    support.sort_unstable();
    support.dedup();
    debug_assert_eq!(support.len(), q + 1);
    Ok(IncidenceVector {
        n,
        support: canonical_shift(n, &support),
        field_poly: field.prim_poly(),
    })
}

/// Incidence vector of a line of EG(2, 2^s) not passing through the origin,
/// indexed by discrete logarithm in GF(q^2): the line `{1 + alpha t : t ∈ GF(q)}`.
pub fn eg_line_incidence(s: u32) -> Result<IncidenceVector, FieldError> {
    let m = check_s(s, 2)?;
    let field = FieldGF2m::new(m)?;
    let q = 1usize << s;
    let n = q * q - 1;
    let alpha = field.exp(1);
    let mut support = vec![0usize];
    // GF(q)* inside GF(q^2) is generated by alpha^(q+1).
    for k in 0..(q - 1) {
        let t = field.exp(((q + 1) * k) as i64);
        let point = field.add(1, field.mul(alpha, t));
        support.push(field.log(point).expect("line avoids the origin") as usize);
    }
    support.sort_unstable();
    support.dedup();
    debug_assert_eq!(support.len(), q);
    Ok(IncidenceVector {
        n,
        support: canonical_shift(n, &support),
        field_poly: field.prim_poly(),
    })
}

/// Line incidence vector for the given geometry.
pub fn line_incidence(geometry: Geometry, s: u32) -> Result<IncidenceVector, FieldError> {
    match geometry {
        Geometry::Projective => pg_line_incidence(s),
        Geometry::Euclidean => eg_line_incidence(s),
    }
}
