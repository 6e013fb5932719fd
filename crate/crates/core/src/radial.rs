//! Piecewise radial power functions.
//!
//! A [`RadialFunction`] is a finite sum of terms `coef * |x|^alpha` restricted
//! to disjoint annuli `lo <= |x| < hi`. The set is closed under scaling and
//! under addition of functions whose overlapping pieces share an exponent,
//! which covers every function the witness constructions need. Keeping one
//! power per annulus makes `∫ |f|^p` available in closed form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One term `coef * t^alpha` on `lo <= t < hi` (`hi` may be `+inf`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub coef: f64,
    pub alpha: f64,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, coef: f64, alpha: f64) -> Self {
        Self { lo, hi, coef, alpha }
    }

    fn validate(&self) -> Result<()> {
        let reason = if !(self.lo.is_finite() && self.lo >= 0.0) {
            "lo must be finite and >= 0"
        } else if self.hi.is_nan() || self.hi <= self.lo {
            "hi must be greater than lo"
        } else if !self.coef.is_finite() {
            "coef must be finite"
        } else if !self.alpha.is_finite() {
            "alpha must be finite"
        } else {
            return Ok(());
        };
        Err(Error::InvalidPiece {
            lo: self.lo,
            hi: self.hi,
            coef: self.coef,
            alpha: self.alpha,
            reason,
        })
    }

    #[inline]
    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t < self.hi
    }
}

/// Canonical piecewise radial power function.
///
/// Invariants: pieces are sorted, pairwise disjoint, have nonzero
/// coefficients, and adjacent pieces with identical `(coef, alpha)` are
/// merged. The zero function has no pieces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RadialFunction {
    pieces: Vec<Piece>,
}

impl RadialFunction {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `coef * |x|^alpha` on `lo <= |x| < hi`.
    pub fn power(lo: f64, hi: f64, coef: f64, alpha: f64) -> Result<Self> {
        canonicalize([Piece::new(lo, hi, coef, alpha)])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Value at radius `t > 0`.
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.pieces.partition_point(|pc| pc.hi <= t);
        match self.pieces.get(idx) {
            Some(pc) if pc.contains(t) => pc.coef * t.powf(pc.alpha),
            _ => 0.0,
        }
    }

    /// The piece whose interval contains `t`, if any.
    pub fn piece_at(&self, t: f64) -> Option<&Piece> {
        let idx = self.pieces.partition_point(|pc| pc.hi <= t);
        self.pieces.get(idx).filter(|pc| pc.contains(t))
    }

    pub fn scale(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::zero();
        }
        let pieces = self
            .pieces
            .iter()
            .map(|pc| Piece { coef: pc.coef * c, ..*pc })
            .collect();
        Self { pieces: normalize_sorted(pieces) }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        canonicalize(self.pieces.iter().chain(other.pieces.iter()).copied())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Restriction to `lo <= |x| < hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Self {
        let pieces = self
            .pieces
            .iter()
            .filter_map(|pc| {
                let a = pc.lo.max(lo);
                let b = pc.hi.min(hi);
                (a < b).then_some(Piece { lo: a, hi: b, ..*pc })
            })
            .collect();
        Self { pieces: normalize_sorted(pieces) }
    }

    /// All distinct finite interval endpoints, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|pc| [pc.lo, pc.hi])
            .filter(|t| t.is_finite())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn largest_finite_breakpoint(&self) -> Option<f64> {
        self.breakpoints().last().copied()
    }

    pub fn smallest_positive_breakpoint(&self) -> Option<f64> {
        self.breakpoints().into_iter().find(|&t| t > 0.0)
    }

    /// Bit pattern of the canonical form, usable as a hash key.
    pub fn cache_key(&self) -> Vec<u64> {
        self.pieces
            .iter()
            .flat_map(|pc| [pc.lo, pc.hi, pc.coef, pc.alpha].map(f64::to_bits))
            .collect()
    }

    /// One `lo hi coef alpha` line per piece.
    pub fn to_record(&self) -> String {
        self.pieces
            .iter()
            .map(|pc| format!("{} {} {} {}\n", pc.lo, pc.hi, pc.coef, pc.alpha))
            .collect()
    }
}

/// Brings an arbitrary list of pieces into canonical form.
///
/// Overlapping pieces must share their exponent, in which case the
/// coefficients add.
pub fn canonicalize<I>(raw: I) -> Result<RadialFunction>
where
    I: IntoIterator<Item = Piece>,
{
    let mut raw: Vec<Piece> = raw.into_iter().collect();
    for pc in &raw {
        pc.validate()?;
    }
    raw.retain(|pc| pc.coef != 0.0);
    if raw.is_empty() {
        return Ok(RadialFunction::zero());
    }

    let mut cuts: Vec<f64> = raw.iter().flat_map(|pc| [pc.lo, pc.hi]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut out: Vec<Piece> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut acc: Option<(f64, f64)> = None;
        for pc in raw.iter().filter(|pc| pc.lo <= a && pc.hi >= b) {
            acc = Some(match acc {
                None => (pc.coef, pc.alpha),
                Some((_, alpha)) if alpha != pc.alpha => {
                    return Err(Error::MixedExponentOverlap {
                        lo: a,
                        hi: b,
                        first: alpha,
                        second: pc.alpha,
                    })
                }
                Some((coef, alpha)) => (coef + pc.coef, alpha),
            });
        }
        if let Some((coef, alpha)) = acc {
            out.push(Piece::new(a, b, coef, alpha));
        }
    }
    Ok(RadialFunction { pieces: normalize_sorted(out) })
}

/// Drops zero pieces and merges contiguous pieces with equal terms.
fn normalize_sorted(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for pc in pieces.into_iter().filter(|pc| pc.coef != 0.0) {
        match out.last_mut() {
            Some(prev) if prev.hi == pc.lo && prev.coef == pc.coef && prev.alpha == pc.alpha => {
                prev.hi = pc.hi;
            }
            _ => out.push(pc),
        }
    }
    out
}

impl fmt::Display for RadialFunction {
    /// Pieces separated by `"; "`, the inline form accepted by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, pc) in self.pieces.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} {} {} {}", pc.lo, pc.hi, pc.coef, pc.alpha)?;
        }
        Ok(())
    }
}

impl FromStr for RadialFunction {
    type Err = Error;

    /// Parses pieces `lo hi coef alpha` separated by newlines or `;`.
    /// `inf` denotes an unbounded outer radius. Empty input is the zero
    /// function.
    fn from_str(s: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        let mut fields: Vec<(f64, usize, usize)> = Vec::with_capacity(4);
        let mut record_start = (1, 1);

        let flush = |fields: &mut Vec<(f64, usize, usize)>,
                     pieces: &mut Vec<Piece>,
                     start: (usize, usize)|
         -> Result<()> {
            match fields.len() {
                0 => Ok(()),
                4 => {
                    let pc = Piece::new(fields[0].0, fields[1].0, fields[2].0, fields[3].0);
                    pc.validate().map_err(|e| Error::Parse {
                        line: fields[0].1,
                        column: fields[0].2,
                        message: e.to_string(),
                    })?;
                    pieces.push(pc);
                    fields.clear();
                    Ok(())
                }
                k => Err(Error::Parse {
                    line: start.0,
                    column: start.1,
                    message: format!("expected 4 fields `lo hi coef alpha`, found {k}"),
                }),
            }
        };

        let mut line = 1;
        let mut col = 1;
        let mut chars = s.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            if c == '\n' || c == ';' {
                flush(&mut fields, &mut pieces, record_start)?;
                chars.next();
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                record_start = (line, col);
            } else if c.is_whitespace() {
                chars.next();
                col += 1;
            } else {
                let (tok_line, tok_col) = (line, col);
                if fields.is_empty() {
                    record_start = (tok_line, tok_col);
                }
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_whitespace() || c == ';' {
                        break;
                    }
                    end = j + c.len_utf8();
                    col += 1;
                    chars.next();
                }
                let tok = &s[i..end];
                if fields.len() == 4 {
                    return Err(Error::Parse {
                        line: tok_line,
                        column: tok_col,
                        message: format!("unexpected fifth field `{tok}`"),
                    });
                }
                let value: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: tok_line,
                    column: tok_col,
                    message: format!("`{tok}` is not a number"),
                })?;
                if value.is_nan() {
                    return Err(Error::Parse {
                        line: tok_line,
                        column: tok_col,
                        message: "NaN is not allowed".into(),
                    });
                }
                fields.push((value, tok_line, tok_col));
            }
        }
        flush(&mut fields, &mut pieces, record_start)?;
        canonicalize(pieces)
    }
}

impl Serialize for RadialFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RadialFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pc(lo: f64, hi: f64, coef: f64, alpha: f64) -> Piece {
        Piece::new(lo, hi, coef, alpha)
    }

    #[test]
    fn like_terms_add() {
        let f = canonicalize([pc(0.0, 1.0, 1.0, -0.5), pc(0.0, 1.0, 1.0, -0.5)]).unwrap();
        assert_eq!(f.pieces(), &[pc(0.0, 1.0, 2.0, -0.5)]);
    }

    #[test]
    fn truncation_difference() {
        let h = canonicalize([pc(0.0, f64::INFINITY, 1.0, -0.5), pc(0.0, 1.0, -1.0, -0.5)]).unwrap();
        assert_eq!(h.pieces(), &[pc(1.0, f64::INFINITY, 1.0, -0.5)]);
    }

    #[test]
    fn mixed_exponent_overlap_rejected() {
        let err = canonicalize([pc(0.0, 1.0, 1.0, -0.5), pc(0.5, 2.0, 1.0, -1.0)]).unwrap_err();
        assert!(matches!(err, Error::MixedExponentOverlap { lo, hi, .. } if lo == 0.5 && hi == 1.0));
    }

    #[test]
    fn adjacent_different_exponents_are_fine() {
        let f = canonicalize([pc(0.0, 1.0, 1.0, -0.5), pc(1.0, 2.0, 1.0, -1.0)]).unwrap();
        assert_eq!(f.pieces().len(), 2);
    }

    #[test]
    fn invalid_pieces() {
        assert!(matches!(
            canonicalize([pc(1.0, 1.0, 1.0, 0.0)]),
            Err(Error::InvalidPiece { .. })
        ));
        assert!(canonicalize([pc(-1.0, 1.0, 1.0, 0.0)]).is_err());
        assert!(canonicalize([pc(f64::INFINITY, f64::INFINITY, 1.0, 0.0)]).is_err());
        assert!(canonicalize([pc(0.0, 1.0, f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn scale_and_add() {
        let f = RadialFunction::power(0.0, f64::INFINITY, 1.0, -0.5).unwrap();
        assert!(f.scale(0.0).is_zero());
        assert_eq!(f.scale(2.0).pieces(), &[pc(0.0, f64::INFINITY, 2.0, -0.5)]);
        assert!(f.add(&f.scale(-1.0)).unwrap().is_zero());

        let g = f.restrict(0.0, 1.0);
        let h = f.restrict(1.0, f64::INFINITY);
        assert_eq!(g.add(&h).unwrap(), f);
    }

    #[test]
    fn eval_examples() {
        let f = RadialFunction::power(0.0, f64::INFINITY, 1.0, -0.5).unwrap();
        assert_eq!(f.eval(4.0), 0.5);
        let g = RadialFunction::power(0.0, 0.25, 1.0, -0.5).unwrap();
        assert_eq!(g.eval(0.5), 0.0);
        assert_eq!(g.eval(0.25), 0.0);
    }

    #[test]
    fn parse_and_display() {
        let f: RadialFunction = "0 inf 1 -0.5".parse().unwrap();
        assert_eq!(f.pieces(), &[pc(0.0, f64::INFINITY, 1.0, -0.5)]);
        assert_eq!(f.to_string(), "0 inf 1 -0.5");
        assert_eq!(f.to_record(), "0 inf 1 -0.5\n");

        let k: RadialFunction = "0 1 1 -0.5; 1 inf -1 -0.5".parse().unwrap();
        assert_eq!(k.pieces().len(), 2);
        let k2: RadialFunction = "0 1 1 -0.5\n1 inf -1 -0.5\n".parse().unwrap();
        assert_eq!(k, k2);

        assert!("".parse::<RadialFunction>().unwrap().is_zero());
        assert!("  ;  \n".parse::<RadialFunction>().unwrap().is_zero());
    }

    #[test]
    fn parse_errors_carry_position() {
        match "0 1 1 -0.5\n1 2 x 0".parse::<RadialFunction>() {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        match "0 1 1; 1 2 3 4".parse::<RadialFunction>() {
            Err(Error::Parse { line, column, message }) => {
                assert_eq!((line, column), (1, 1));
                assert!(message.contains("found 3"));
            }
            other => panic!("unexpected {other:?}"),
        }
        match "0 1 1 1 5".parse::<RadialFunction>() {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!("2 1 1 0".parse::<RadialFunction>().is_err());
        assert!("0 1 1 0; 0.5 2 1 1".parse::<RadialFunction>().is_err());
    }

    #[test]
    fn serde_as_string() {
        let f: RadialFunction = "0 1 2 -0.5; 1 inf -1 -0.5".parse().unwrap();
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, "\"0 1 2 -0.5; 1 inf -1 -0.5\"");
        let back: RadialFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    fn raw_pieces(alpha: f64) -> impl Strategy<Value = Vec<Piece>> {
        let piece = (0u8..8, 1u8..6, -4i8..=4).prop_map(move |(lo, w, c)| {
            let lo = f64::from(lo) * 0.5;
            let hi = if w == 5 { f64::INFINITY } else { lo + f64::from(w) * 0.5 };
            Piece::new(lo, hi, f64::from(c) * 0.5, alpha)
        });
        proptest::collection::vec(piece, 0..6)
    }

    fn sample_radii() -> Vec<f64> {
        (1..200).map(|i| i as f64 * 0.037).collect()
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent_and_pointwise(raw in raw_pieces(-0.5)) {
            let f = canonicalize(raw.clone()).unwrap();
            let again = canonicalize(f.pieces().to_vec()).unwrap();
            prop_assert_eq!(&again, &f);
            for w in f.pieces().windows(2) {
                prop_assert!(w[0].hi <= w[1].lo);
            }
            prop_assert!(f.pieces().iter().all(|pc| pc.coef != 0.0));
            for t in sample_radii() {
                let direct: f64 = raw.iter().filter(|pc| pc.contains(t)).map(|pc| pc.coef * t.powf(pc.alpha)).sum();
                prop_assert!((f.eval(t) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            }
        }

        #[test]
        fn add_is_pointwise(a in raw_pieces(-1.0), b in raw_pieces(-1.0), c in -3.0f64..3.0) {
            let f = canonicalize(a).unwrap();
            let g = canonicalize(b).unwrap();
            let sum = f.add(&g).unwrap();
            let scaled = f.scale(c);
            for t in sample_radii() {
                let expect = f.eval(t) + g.eval(t);
                prop_assert!((sum.eval(t) - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
                let expect = c * f.eval(t);
                prop_assert!((scaled.eval(t) - expect).abs() <= 4.0 * f64::EPSILON * expect.abs());
            }
        }

        #[test]
        fn display_parse_round_trip(raw in raw_pieces(-0.25)) {
            let f = canonicalize(raw).unwrap();
            let back: RadialFunction = f.to_string().parse().unwrap();
            prop_assert_eq!(&back, &f);
            let back: RadialFunction = f.to_record().parse().unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
