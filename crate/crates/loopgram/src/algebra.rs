//! Category codes and the bitwise algebra they live in.
//!
//! A category is a fixed-width bit vector: one byte per base type, `n` bits
//! per byte with `n` odd. Within a byte the bits stand, left to right, for
//! the iterated right inverses, the base type itself (the central bit), and
//! the iterated left inverses. For `n = 3` the order is (/x, x, x\).
//! Adjacent categories contract byte by byte: a byte can be written as a
//! product of two bytes in exactly `2n` ways (splits plus pair insertions),
//! and a pair of bytes combines into a child iff it matches one of those
//! patterns.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unknown base type `{0}`")]
    UnknownBaseType(String),
    #[error("duplicate element `{0}` in expression")]
    DuplicateElement(String),
    #[error("element `{0}` is not representable with {1} bits per byte")]
    UnrepresentableOrder(String, usize),
    #[error("invalid byte length {0}: need an odd length >= 3")]
    InvalidByteLength(usize),
    #[error("code has {got} bits but the configuration requires {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no decomposition pattern matches byte {byte}")]
    InvalidAdjacency { byte: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot parse code string `{0}`")]
    BadCodeString(String),
}

/// Shape of the category vectors: how many base types (bytes) and how many
/// bits each byte carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraConfig {
    num_bytes: usize,
    bits_per_byte: usize,
    base_type_names: Vec<String>,
}

impl AlgebraConfig {
    /// Default base types for the three-byte configuration.
    pub const DEFAULT_NAMES: [&'static str; 3] = ["S", "NP", "N"];

    pub fn new(num_bytes: usize, bits_per_byte: usize) -> Result<Self, AlgebraError> {
        let names = if num_bytes == 3 {
            Self::DEFAULT_NAMES.iter().map(|s| s.to_string()).collect()
        } else {
            (1..=num_bytes).map(|i| format!("T{i}")).collect()
        };
        Self::with_names(num_bytes, bits_per_byte, names)
    }

    pub fn with_names(
        num_bytes: usize,
        bits_per_byte: usize,
        base_type_names: Vec<String>,
    ) -> Result<Self, AlgebraError> {
        if num_bytes == 0 {
            return Err(AlgebraError::InvalidConfig("num_bytes must be >= 1".into()));
        }
        if bits_per_byte < 3 || bits_per_byte.is_multiple_of(2) {
            return Err(AlgebraError::InvalidByteLength(bits_per_byte));
        }
        if base_type_names.len() != num_bytes {
            return Err(AlgebraError::InvalidConfig(format!(
                "{} base type names for {} bytes",
                base_type_names.len(),
                num_bytes
            )));
        }
        if num_bytes * bits_per_byte > 64 {
            return Err(AlgebraError::InvalidConfig(
                "codes wider than 64 bits are not supported".into(),
            ));
        }
        Ok(Self { num_bytes, bits_per_byte, base_type_names })
    }

    pub fn num_bytes(&self) -> usize {
        self.num_bytes
    }

    pub fn bits_per_byte(&self) -> usize {
        self.bits_per_byte
    }

    pub fn base_type_names(&self) -> &[String] {
        &self.base_type_names
    }

    /// Total bit width of one category code.
    pub fn code_len(&self) -> usize {
        self.num_bytes * self.bits_per_byte
    }

    /// Index of the central bit within a byte (0-based).
    pub fn central_bit(&self) -> usize {
        (self.bits_per_byte - 1) / 2
    }

    /// Parse a code string like `"010 101 000"`.
    pub fn parse_code(&self, s: &str) -> Result<CategoryCode, AlgebraError> {
        let mut code = CategoryCode::zero(self.code_len());
        let mut i = 0;
        for ch in s.chars() {
            match ch {
                '0' | '1' => {
                    if i >= self.code_len() {
                        return Err(AlgebraError::BadCodeString(s.to_string()));
                    }
                    code.set(i, ch == '1');
                    i += 1;
                }
                c if c.is_whitespace() => {}
                _ => return Err(AlgebraError::BadCodeString(s.to_string())),
            }
        }
        if i != self.code_len() {
            return Err(AlgebraError::BadCodeString(s.to_string()));
        }
        Ok(code)
    }

    /// Render a code as space-separated byte groups, e.g. `"010 101 000"`.
    pub fn render_code(&self, code: &CategoryCode) -> String {
        let mut out = String::with_capacity(self.code_len() + self.num_bytes);
        for b in 0..self.num_bytes {
            if b > 0 {
                out.push(' ');
            }
            for i in 0..self.bits_per_byte {
                out.push(if code.get(b * self.bits_per_byte + i) { '1' } else { '0' });
            }
        }
        out
    }

    fn check_len(&self, code: &CategoryCode) -> Result<(), AlgebraError> {
        if code.len() != self.code_len() {
            return Err(AlgebraError::LengthMismatch {
                expected: self.code_len(),
                got: code.len(),
            });
        }
        Ok(())
    }
}

/// A binary category vector, at most 64 bits wide. Bit 0 is the leftmost bit
/// of the first byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CategoryCode {
    len: u16,
    bits: u64,
}

impl CategoryCode {
    pub fn zero(len: usize) -> Self {
        assert!(len <= 64, "category codes are limited to 64 bits");
        Self { len: len as u16, bits: 0 }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut code = Self::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            code.set(i, b != 0);
        }
        code
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len());
        self.bits >> i & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len());
        if value {
            self.bits |= 1 << i;
        } else {
            self.bits &= !(1 << i);
        }
    }

    /// True iff every bit is 0, i.e. the code is the identity element.
    pub fn is_identity(&self) -> bool {
        self.bits == 0
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Bits of one byte as a u32, leftmost bit in the lowest position.
    fn byte(&self, byte: usize, n: usize) -> u32 {
        ((self.bits >> (byte * n)) & ((1u64 << n) - 1)) as u32
    }

    fn set_byte(&mut self, byte: usize, n: usize, value: u32) {
        let mask = ((1u64 << n) - 1) << (byte * n);
        self.bits = (self.bits & !mask) | ((value as u64) << (byte * n));
    }
}

impl fmt::Display for CategoryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", if self.get(i) { 1 } else { 0 })?;
        }
        Ok(())
    }
}

/// A category vector with real-valued bits, used during the continuous search.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryValue(pub Vec<f64>);

impl CategoryValue {
    pub fn from_code(code: &CategoryCode) -> Self {
        Self((0..code.len()).map(|i| if code.get(i) { 1.0 } else { 0.0 }).collect())
    }

    /// Round every bit at threshold 0.5; a value of exactly 0.5 rounds to 0.
    pub fn round(&self) -> CategoryCode {
        round_bits(&self.0)
    }
}

/// Round a slice of bit values to a binary code (0.5 rounds down).
pub fn round_bits(vals: &[f64]) -> CategoryCode {
    let mut code = CategoryCode::zero(vals.len());
    for (i, &v) in vals.iter().enumerate() {
        code.set(i, v > 0.5);
    }
    code
}

/// One parent-byte position in a decomposition pattern: either a fixed
/// constant or a copy of a child bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentBit {
    Fixed(u8),
    Child(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// Left byte carries child bits `0..k`, right byte carries the rest.
    Split(usize),
    /// Split after bit `k-1` with the canceling pair (e_{k+1}, e_k) inserted
    /// at the seam.
    Insertion(usize),
}

/// One of the 2n ways of writing a byte as a product of two bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionPattern {
    pub kind: PatternKind,
    pub left: Vec<ParentBit>,
    pub right: Vec<ParentBit>,
}

impl DecompositionPattern {
    fn split(k: usize, n: usize) -> Self {
        let left = (0..n)
            .map(|i| if i < k { ParentBit::Child(i) } else { ParentBit::Fixed(0) })
            .collect();
        let right = (0..n)
            .map(|i| if i < k { ParentBit::Fixed(0) } else { ParentBit::Child(i) })
            .collect();
        Self { kind: PatternKind::Split(k), left, right }
    }

    fn insertion(k: usize, n: usize) -> Self {
        let left = (0..n)
            .map(|i| {
                if i < k {
                    ParentBit::Child(i)
                } else if i == k {
                    ParentBit::Fixed(1)
                } else {
                    ParentBit::Fixed(0)
                }
            })
            .collect();
        let right = (0..n)
            .map(|i| {
                if i + 1 < k {
                    ParentBit::Fixed(0)
                } else if i + 1 == k {
                    ParentBit::Fixed(1)
                } else {
                    ParentBit::Child(i)
                }
            })
            .collect();
        Self { kind: PatternKind::Insertion(k), left, right }
    }

    /// Apply the pattern to a binary child byte, yielding the two parent
    /// bytes (leftmost bit in the lowest position).
    pub fn apply(&self, child: u32) -> (u32, u32) {
        let project = |template: &[ParentBit]| {
            let mut out = 0u32;
            for (i, pb) in template.iter().enumerate() {
                let bit = match pb {
                    ParentBit::Fixed(v) => *v as u32,
                    ParentBit::Child(k) => child >> k & 1,
                };
                out |= bit << i;
            }
            out
        };
        (project(&self.left), project(&self.right))
    }

    /// Recover the child byte if the given parent pair matches this pattern.
    pub fn invert(&self, left: u32, right: u32) -> Option<u32> {
        let mut child = 0u32;
        for (template, parent) in [(&self.left, left), (&self.right, right)] {
            for (i, pb) in template.iter().enumerate() {
                let bit = parent >> i & 1;
                match pb {
                    ParentBit::Fixed(v) => {
                        if bit != *v as u32 {
                            return None;
                        }
                    }
                    ParentBit::Child(k) => child |= bit << k,
                }
            }
        }
        Some(child)
    }

    /// Parent bits that disagree with the pattern applied to `child`.
    pub fn mismatches(&self, child: u32, left: u32, right: u32) -> u32 {
        let (el, er) = self.apply(child);
        (el ^ left).count_ones() + (er ^ right).count_ones()
    }
}

/// Enumerate the `2n` decomposition patterns for byte length `n`, in the
/// order split(n), split(n-1), insertion(n-1), ..., split(1), insertion(1),
/// split(0).
pub fn enumerate_decompositions(n: usize) -> Result<Vec<DecompositionPattern>, AlgebraError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(AlgebraError::InvalidByteLength(n));
    }
    let mut patterns = Vec::with_capacity(2 * n);
    patterns.push(DecompositionPattern::split(n, n));
    for k in (1..n).rev() {
        patterns.push(DecompositionPattern::split(k, n));
        patterns.push(DecompositionPattern::insertion(k, n));
    }
    patterns.push(DecompositionPattern::split(0, n));
    Ok(patterns)
}

/// Parse algebraic notation like `"/NP S NP\"` into a code. The empty string
/// (or `"1"`) denotes the identity.
pub fn encode_expression(expr: &str, config: &AlgebraConfig) -> Result<CategoryCode, AlgebraError> {
    let mut code = CategoryCode::zero(config.code_len());
    let trimmed = expr.trim();
    if trimmed.is_empty() || trimmed == "1" {
        return Ok(code);
    }
    let n = config.bits_per_byte;
    let central = config.central_bit();
    for token in trimmed.split_whitespace() {
        let slashes = token.chars().take_while(|&c| c == '/').count();
        let backslashes = token.chars().rev().take_while(|&c| c == '\\').count();
        let name = &token[slashes..token.len() - backslashes];
        if name.is_empty() || (slashes > 0 && backslashes > 0) {
            return Err(AlgebraError::UnknownBaseType(token.to_string()));
        }
        let byte = config
            .base_type_names
            .iter()
            .position(|b| b == name)
            .ok_or_else(|| AlgebraError::UnknownBaseType(name.to_string()))?;
        // /X sits left of the central bit, X\ right of it, deeper inverses
        // farther out.
        let offset = central as isize - slashes as isize + backslashes as isize;
        if offset < 0 || offset as usize >= n {
            return Err(AlgebraError::UnrepresentableOrder(token.to_string(), n));
        }
        let pos = byte * n + offset as usize;
        if code.get(pos) {
            return Err(AlgebraError::DuplicateElement(token.to_string()));
        }
        code.set(pos, true);
    }
    Ok(code)
}

/// Render a code in algebraic notation; the identity renders as `"1"`.
pub fn decode_expression(code: &CategoryCode, config: &AlgebraConfig) -> Result<String, AlgebraError> {
    config.check_len(code)?;
    if code.is_identity() {
        return Ok("1".to_string());
    }
    let n = config.bits_per_byte;
    let central = config.central_bit();
    // Canonical order groups by inverse level -- all right inverses first,
    // then base types, then left inverses -- which keeps the rendered word
    // free of internal cancellations. Bytes commute, so within a level the
    // byte order is just a convention.
    let mut parts = Vec::new();
    for i in 0..n {
        for byte in 0..config.num_bytes {
            if !code.get(byte * n + i) {
                continue;
            }
            let name = &config.base_type_names[byte];
            if i < central {
                parts.push(format!("{}{}", "/".repeat(central - i), name));
            } else {
                parts.push(format!("{}{}", name, "\\".repeat(i - central)));
            }
        }
    }
    Ok(parts.join(" "))
}

/// Contract two adjacent codes into their product, byte by byte. Fails with
/// `InvalidAdjacency` when some byte pair matches no decomposition pattern.
pub fn combine(
    left: &CategoryCode,
    right: &CategoryCode,
    config: &AlgebraConfig,
) -> Result<CategoryCode, AlgebraError> {
    config.check_len(left)?;
    config.check_len(right)?;
    let n = config.bits_per_byte;
    let patterns = enumerate_decompositions(n)?;
    let mut child = CategoryCode::zero(config.code_len());
    for b in 0..config.num_bytes {
        let (lb, rb) = (left.byte(b, n), right.byte(b, n));
        let found = patterns.iter().find_map(|p| p.invert(lb, rb));
        match found {
            Some(c) => child.set_byte(b, n, c),
            None => return Err(AlgebraError::InvalidAdjacency { byte: b }),
        }
    }
    Ok(child)
}

/// Minimum number of parent bits that must be flipped for `(left, right)` to
/// be a valid decomposition of `child`, choosing the best pattern per byte.
pub fn branch_mismatch(
    child: &CategoryCode,
    left: &CategoryCode,
    right: &CategoryCode,
    config: &AlgebraConfig,
) -> u32 {
    let n = config.bits_per_byte;
    let patterns = enumerate_decompositions(n).expect("valid config");
    (0..config.num_bytes)
        .map(|b| {
            let (cb, lb, rb) = (child.byte(b, n), left.byte(b, n), right.byte(b, n));
            patterns.iter().map(|p| p.mismatches(cb, lb, rb)).min().unwrap()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> AlgebraConfig {
        AlgebraConfig::new(3, 3).unwrap()
    }

    fn c(s: &str) -> CategoryCode {
        cfg().parse_code(s).unwrap()
    }

    // Symbolic free-reduction oracle: a byte is a word in the elements
    // e_1..e_n (ascending bit positions); the seam pair (e_{k+1}, e_k)
    // cancels.
    fn reduce_product(left: u32, right: u32, n: usize) -> Option<Vec<usize>> {
        let word = |byte: u32| (0..n).filter(|i| byte >> i & 1 == 1).collect::<Vec<_>>();
        let mut lw = word(left);
        let mut rw = word(right);
        while let (Some(&a), Some(&b)) = (lw.last(), rw.first()) {
            if a == b + 1 {
                lw.pop();
                rw.remove(0);
            } else {
                break;
            }
        }
        lw.extend(rw);
        // The result is only a byte if its elements are still ascending.
        if lw.windows(2).all(|w| w[0] < w[1]) {
            Some(lw)
        } else {
            None
        }
    }

    #[test]
    fn table_encodings_round_trip() {
        let cfg = cfg();
        let table = [
            ("S", "010 000 000"),
            ("NP", "000 010 000"),
            ("N", "000 000 010"),
            ("/S", "100 000 000"),
            ("/S S S\\", "111 000 000"),
            ("/NP S", "010 100 000"),
            ("/NP S NP\\", "010 101 000"),
            ("S S\\", "011 000 000"),
            ("NP N\\", "000 010 001"),
            ("N N\\", "000 000 011"),
            ("/N N NP\\", "000 001 110"),
        ];
        for (expr, bits) in table {
            let code = encode_expression(expr, &cfg).unwrap();
            assert_eq!(cfg.render_code(&code), bits, "encoding of {expr}");
            assert_eq!(decode_expression(&code, &cfg).unwrap(), expr, "decoding of {bits}");
        }
    }

    #[test]
    fn identity_encoding() {
        let cfg = cfg();
        let id = encode_expression("", &cfg).unwrap();
        assert!(id.is_identity());
        assert_eq!(cfg.render_code(&id), "000 000 000");
        assert_eq!(decode_expression(&id, &cfg).unwrap(), "1");
        assert_eq!(encode_expression("1", &cfg).unwrap(), id);
    }

    #[test]
    fn encode_decode_inverse_on_all_codes() {
        let cfg = cfg();
        for bits in 0u64..512 {
            let code = CategoryCode { len: 9, bits };
            let expr = decode_expression(&code, &cfg).unwrap();
            assert_eq!(encode_expression(&expr, &cfg).unwrap(), code, "expr {expr}");
        }
    }

    #[test]
    fn encode_errors() {
        let cfg = cfg();
        assert!(matches!(
            encode_expression("/X S", &cfg),
            Err(AlgebraError::UnknownBaseType(_))
        ));
        assert!(matches!(
            encode_expression("S S", &cfg),
            Err(AlgebraError::DuplicateElement(_))
        ));
        assert!(matches!(
            encode_expression("//S", &cfg),
            Err(AlgebraError::UnrepresentableOrder(_, 3))
        ));
        let short = CategoryCode::zero(6);
        assert!(matches!(
            decode_expression(&short, &cfg),
            Err(AlgebraError::LengthMismatch { expected: 9, got: 6 })
        ));
    }

    #[test]
    fn higher_order_inverses_need_wider_bytes() {
        let cfg5 = AlgebraConfig::new(3, 5).unwrap();
        let code = encode_expression("//S", &cfg5).unwrap();
        assert_eq!(cfg5.render_code(&code), "10000 00000 00000");
        assert_eq!(decode_expression(&code, &cfg5).unwrap(), "//S");
        let deep = encode_expression("S\\\\", &cfg5).unwrap();
        assert_eq!(cfg5.render_code(&deep), "00001 00000 00000");
    }

    #[test]
    fn pattern_count_and_templates() {
        let pats = enumerate_decompositions(3).unwrap();
        assert_eq!(pats.len(), 6);
        // The six n=3 forms: abc*000, ab0*00c, ab1*01c, a00*0bc, a10*1bc,
        // 000*abc.
        use ParentBit::{Child as C, Fixed as F};
        let expected = [
            (vec![C(0), C(1), C(2)], vec![F(0), F(0), F(0)]),
            (vec![C(0), C(1), F(0)], vec![F(0), F(0), C(2)]),
            (vec![C(0), C(1), F(1)], vec![F(0), F(1), C(2)]),
            (vec![C(0), F(0), F(0)], vec![F(0), C(1), C(2)]),
            (vec![C(0), F(1), F(0)], vec![F(1), C(1), C(2)]),
            (vec![F(0), F(0), F(0)], vec![C(0), C(1), C(2)]),
        ];
        for (p, (l, r)) in pats.iter().zip(expected.iter()) {
            assert_eq!(&p.left, l, "{:?}", p.kind);
            assert_eq!(&p.right, r, "{:?}", p.kind);
        }
        assert_eq!(enumerate_decompositions(5).unwrap().len(), 10);
        assert!(enumerate_decompositions(4).is_err());
        assert!(enumerate_decompositions(1).is_err());
    }

    #[test]
    fn patterns_reduce_to_child() {
        for n in [3usize, 5] {
            let pats = enumerate_decompositions(n).unwrap();
            // All templates distinct.
            for i in 0..pats.len() {
                for j in i + 1..pats.len() {
                    assert!(pats[i].left != pats[j].left || pats[i].right != pats[j].right);
                }
            }
            for child in 0u32..1 << n {
                let child_word: Vec<usize> = (0..n).filter(|i| child >> i & 1 == 1).collect();
                for p in &pats {
                    let (l, r) = p.apply(child);
                    let reduced = reduce_product(l, r, n)
                        .unwrap_or_else(|| panic!("{:?} on {child:0width$b}", p.kind, width = n));
                    assert_eq!(reduced, child_word, "{:?} on {child:b}", p.kind);
                }
            }
        }
    }

    #[test]
    fn combine_matches_brute_force_on_all_byte_pairs() {
        let cfg1 = AlgebraConfig::with_names(1, 3, vec!["S".into()]).unwrap();
        let pats = enumerate_decompositions(3).unwrap();
        for l in 0u32..8 {
            for r in 0u32..8 {
                // Oracle: enumerate all 8 candidate children against all 6
                // patterns applied forward.
                let mut children = Vec::new();
                for cand in 0u32..8 {
                    if pats.iter().any(|p| p.apply(cand) == (l, r)) {
                        children.push(cand);
                    }
                }
                children.dedup();
                assert!(children.len() <= 1, "ambiguous pair {l:03b} {r:03b}");
                let left = CategoryCode { len: 3, bits: l as u64 };
                let right = CategoryCode { len: 3, bits: r as u64 };
                match combine(&left, &right, &cfg1) {
                    Ok(child) => assert_eq!(children, vec![child.bits as u32]),
                    Err(AlgebraError::InvalidAdjacency { byte: 0 }) => {
                        assert!(children.is_empty(), "missed child for {l:03b} {r:03b}")
                    }
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn combine_examples() {
        let cfg = cfg();
        // Determiner * noun -> noun phrase.
        let det = c("000 010 001");
        let noun = c("000 000 010");
        assert_eq!(combine(&det, &noun, &cfg).unwrap(), c("000 010 000"));
        // Sentence * punctuation -> identity.
        let s = c("010 000 000");
        let punct = c("100 000 000");
        let root = combine(&s, &punct, &cfg).unwrap();
        assert!(root.is_identity());
        // Two nouns do not contract.
        assert_eq!(
            combine(&noun, &noun, &cfg),
            Err(AlgebraError::InvalidAdjacency { byte: 2 })
        );
    }

    #[test]
    fn identity_is_a_two_sided_unit() {
        let cfg = cfg();
        let id = CategoryCode::zero(9);
        for bits in 0u64..512 {
            let code = CategoryCode { len: 9, bits };
            assert_eq!(combine(&code, &id, &cfg).unwrap(), code);
            assert_eq!(combine(&id, &code, &cfg).unwrap(), code);
        }
    }

    #[test]
    fn branch_mismatch_counts_flips() {
        let cfg = cfg();
        let det = c("000 010 001");
        let noun = c("000 000 010");
        let np = c("000 010 000");
        assert_eq!(branch_mismatch(&np, &det, &noun, &cfg), 0);
        // Corrupt one parent bit: one flip repairs it.
        let mut bad = det;
        bad.set(0, true);
        assert_eq!(branch_mismatch(&np, &bad, &noun, &cfg), 1);
    }

    #[test]
    fn rounding_threshold() {
        let v = CategoryValue(vec![0.0, 0.5, 0.500001, 1.0, 0.49]);
        let code = v.round();
        let bits: Vec<bool> = (0..5).map(|i| code.get(i)).collect();
        assert_eq!(bits, vec![false, false, true, true, false]);
    }

    #[test]
    fn code_string_parsing() {
        let cfg = cfg();
        assert_eq!(cfg.render_code(&c("010 101 000")), "010 101 000");
        assert!(cfg.parse_code("010 101").is_err());
        assert!(cfg.parse_code("010 101 0002").is_err());
        assert!(cfg.parse_code("01x 101 000").is_err());
    }
}
