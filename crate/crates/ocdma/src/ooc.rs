//! One-dimensional optical orthogonal codes: construction over cyclic
//! difference sets, exhaustive correlation validation, and the line-oriented
//! code-family text format.
//!
//! A family is described by the quadruple (F, W, h_a, h_c): code length in
//! chips, code weight, and the auto-/cross-correlation bounds. Codewords are
//! stored as sorted chip-position sets, canonicalized so the smallest position
//! is 0 (cyclic shifts are absorbed by the channel model).

use std::fmt;
use std::fmt::Write as _;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OocError {
    #[error("code length must be at least 2, got {0}")]
    InvalidLength(u32),
    #[error("code weight must be at least 2, got {0}")]
    InvalidWeight(u32),
    #[error("weight {weight} exceeds code length {length}")]
    WeightExceedsLength { weight: u32, length: u32 },
    #[error("chip position {position} outside [0, {length})")]
    PositionOutOfRange { position: u32, length: u32 },
    #[error("duplicate chip position {0}")]
    DuplicatePosition(u32),
    #[error("codeword has no positions")]
    EmptyCodeword,
    #[error("shift {shift} outside [0, {length})")]
    ShiftOutOfRange { shift: u32, length: u32 },
    #[error("codeword lengths differ: {0} vs {1}")]
    LengthMismatch(u32, u32),
    #[error("codeword {index} has weight {got}, family weight is {want}")]
    WeightMismatch { index: usize, got: usize, want: u32 },
    #[error("codeword {index} has length {got}, family length is {want}")]
    FamilyLengthMismatch { index: usize, got: u32, want: u32 },
    #[error("correlation bound must be at least 1")]
    InvalidBound,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// One codeword: W chip positions inside a length-F bit frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    length: u32,
    positions: Vec<u32>,
}

impl Codeword {
    /// Builds a codeword from chip positions (any order; stored sorted).
    pub fn new(length: u32, mut positions: Vec<u32>) -> Result<Self, OocError> {
        if length < 2 {
            return Err(OocError::InvalidLength(length));
        }
        if positions.is_empty() {
            return Err(OocError::EmptyCodeword);
        }
        positions.sort_unstable();
        for pair in positions.windows(2) {
            if pair[0] == pair[1] {
                return Err(OocError::DuplicatePosition(pair[0]));
            }
        }
        if let Some(&last) = positions.last() {
            if last >= length {
                return Err(OocError::PositionOutOfRange {
                    position: last,
                    length,
                });
            }
        }
        Ok(Codeword { length, positions })
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn weight(&self) -> usize {
        self.positions.len()
    }

    /// Sorted chip positions.
    pub fn positions(&self) -> &[u32] {
        &self.positions
    }

    fn contains(&self, position: u32) -> bool {
        self.positions.binary_search(&position).is_ok()
    }

    /// Cyclic autocorrelation |P ∩ (P + shift mod F)|. Equals the weight at
    /// shift 0.
    pub fn autocorrelation(&self, shift: u32) -> Result<u32, OocError> {
        cross_correlation(self, self, shift)
    }
}

/// Cyclic cross-correlation |a ∩ (b + shift mod F)|.
pub fn cross_correlation(a: &Codeword, b: &Codeword, shift: u32) -> Result<u32, OocError> {
    if a.length != b.length {
        return Err(OocError::LengthMismatch(a.length, b.length));
    }
    let f = a.length;
    if shift >= f {
        return Err(OocError::ShiftOutOfRange { shift, length: f });
    }
    let mut hits = 0;
    for &p in &b.positions {
        let q = if p + shift >= f {
            p + shift - f
        } else {
            p + shift
        };
        if a.contains(q) {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Johnson-bound family cardinality floor((F-1) / (W (W-1))) for unit
/// correlation constraints.
pub fn max_cardinality(length: u32, weight: u32) -> Result<u64, OocError> {
    if length < 2 {
        return Err(OocError::InvalidLength(length));
    }
    if weight < 2 {
        return Err(OocError::InvalidWeight(weight));
    }
    Ok((length as u64 - 1) / (weight as u64 * (weight as u64 - 1)))
}

/// A code family plus its correlation contract. Construction checks only
/// structure (lengths and weights); correlation bounds are checked by
/// [`validate_family`], which treats violations as reportable data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeFamily {
    length: u32,
    weight: u32,
    ha: u32,
    hc: u32,
    codewords: Vec<Codeword>,
}

impl CodeFamily {
    pub fn new(
        length: u32,
        weight: u32,
        ha: u32,
        hc: u32,
        codewords: Vec<Codeword>,
    ) -> Result<Self, OocError> {
        if length < 2 {
            return Err(OocError::InvalidLength(length));
        }
        if weight < 2 {
            return Err(OocError::InvalidWeight(weight));
        }
        if weight > length {
            return Err(OocError::WeightExceedsLength { weight, length });
        }
        if ha == 0 || hc == 0 {
            return Err(OocError::InvalidBound);
        }
        for (index, cw) in codewords.iter().enumerate() {
            if cw.length != length {
                return Err(OocError::FamilyLengthMismatch {
                    index,
                    got: cw.length,
                    want: length,
                });
            }
            if cw.weight() != weight as usize {
                return Err(OocError::WeightMismatch {
                    index,
                    got: cw.weight(),
                    want: weight,
                });
            }
        }
        Ok(CodeFamily {
            length,
            weight,
            ha,
            hc,
            codewords,
        })
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn ha(&self) -> u32 {
        self.ha
    }

    pub fn hc(&self) -> u32 {
        self.hc
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    /// Serializes to the code-family text format: header `F W ha hc`, then
    /// one line of ascending chip positions per codeword. LF endings, no
    /// trailing whitespace.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.length, self.weight, self.ha, self.hc
        );
        for cw in &self.codewords {
            let mut first = true;
            for &p in cw.positions() {
                if first {
                    first = false;
                } else {
                    out.push(' ');
                }
                let _ = write!(out, "{}", p);
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format produced by [`CodeFamily::to_text`]. Structure
    /// is enforced strictly (single spaces, ascending positions, LF endings);
    /// correlation violations are left for [`validate_family`].
    pub fn parse_text(text: &str) -> Result<Self, OocError> {
        let parse_err = |line: usize, message: String| OocError::Parse { line, message };
        if !text.ends_with('\n') {
            return Err(parse_err(
                text.lines().count(),
                "file must end with a newline".into(),
            ));
        }
        let mut lines: Vec<&str> = text.split('\n').collect();
        // The trailing LF produces one empty tail element; drop it.
        debug_assert_eq!(lines.last(), Some(&""));
        lines.pop();
        if lines.is_empty() {
            return Err(parse_err(1, "missing header line".into()));
        }
        let fields = split_strict(lines[0]).map_err(|m| parse_err(1, m))?;
        if fields.len() != 4 {
            return Err(parse_err(
                1,
                format!("header needs 4 fields `F W ha hc`, got {}", fields.len()),
            ));
        }
        let nums: Vec<u32> = fields
            .iter()
            .map(|t| t.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(1, format!("bad header integer: {e}")))?;
        let (length, weight, ha, hc) = (nums[0], nums[1], nums[2], nums[3]);
        let mut codewords = Vec::new();
        for (idx, line) in lines[1..].iter().enumerate() {
            let line_no = idx + 2;
            if line.is_empty() {
                return Err(parse_err(line_no, "blank line inside code file".into()));
            }
            let fields = split_strict(line).map_err(|m| parse_err(line_no, m))?;
            if fields.len() != weight as usize {
                return Err(parse_err(
                    line_no,
                    format!("expected {} positions, got {}", weight, fields.len()),
                ));
            }
            let mut positions = Vec::with_capacity(fields.len());
            for t in &fields {
                let p: u32 = t
                    .parse()
                    .map_err(|e| parse_err(line_no, format!("bad position: {e}")))?;
                positions.push(p);
            }
            if !positions.windows(2).all(|w| w[0] < w[1]) {
                return Err(parse_err(
                    line_no,
                    "positions must be strictly ascending".into(),
                ));
            }
            let cw =
                Codeword::new(length, positions).map_err(|e| parse_err(line_no, e.to_string()))?;
            codewords.push(cw);
        }
        CodeFamily::new(length, weight, ha, hc, codewords)
    }
}

fn split_strict(line: &str) -> Result<Vec<&str>, String> {
    if line.starts_with(' ') || line.ends_with(' ') {
        return Err("leading or trailing whitespace".into());
    }
    if line.contains('\r') || line.contains('\t') {
        return Err("only single spaces and LF endings are allowed".into());
    }
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.iter().any(|t| t.is_empty()) {
        return Err("repeated spaces".into());
    }
    Ok(fields)
}

/// One reason a family failed validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Autocorrelation of `codeword` at a nonzero `shift` exceeded h_a.
    AutoCorrelation {
        codeword: usize,
        shift: u32,
        value: u32,
        limit: u32,
    },
    /// Cross-correlation of the ordered pair at `shift` exceeded h_c.
    CrossCorrelation {
        first: usize,
        second: usize,
        shift: u32,
        value: u32,
        limit: u32,
    },
    /// Family size exceeds the unit-constraint cardinality bound.
    FamilySize { size: usize, bound: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AutoCorrelation {
                codeword,
                shift,
                value,
                limit,
            } => write!(
                f,
                "codeword {codeword}: autocorrelation {value} > {limit} at shift {shift}"
            ),
            Violation::CrossCorrelation {
                first,
                second,
                shift,
                value,
                limit,
            } => write!(
                f,
                "pair ({first}, {second}): cross-correlation {value} > {limit} at shift {shift}"
            ),
            Violation::FamilySize { size, bound } => {
                write!(f, "family size {size} exceeds cardinality bound {bound}")
            }
        }
    }
}

/// Outcome of an exhaustive correlation scan.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

/// Scans every codeword, ordered pair, and shift; collects every violation.
/// An empty family passes vacuously.
pub fn validate_family(family: &CodeFamily) -> ValidationReport {
    let mut violations = Vec::new();
    let f = family.length();
    for (i, cw) in family.codewords().iter().enumerate() {
        for shift in 1..f {
            let value = cw.autocorrelation(shift).expect("shift in range");
            if value > family.ha() {
                violations.push(Violation::AutoCorrelation {
                    codeword: i,
                    shift,
                    value,
                    limit: family.ha(),
                });
            }
        }
    }
    for (i, a) in family.codewords().iter().enumerate() {
        for (j, b) in family.codewords().iter().enumerate() {
            if i == j {
                continue;
            }
            for shift in 0..f {
                let value = cross_correlation(a, b, shift).expect("shift in range");
                if value > family.hc() {
                    violations.push(Violation::CrossCorrelation {
                        first: i,
                        second: j,
                        shift,
                        value,
                        limit: family.hc(),
                    });
                }
            }
        }
    }
    if family.ha() == 1 && family.hc() == 1 {
        let bound = max_cardinality(family.length(), family.weight()).expect("valid family");
        if family.len() as u64 > bound {
            violations.push(Violation::FamilySize {
                size: family.len(),
                bound,
            });
        }
    }
    ValidationReport { violations }
}

/// Greedy lexicographic packing of cyclic difference sets: repeatedly commit
/// the lexicographically smallest codeword whose internal differences are
/// duplicate-free and disjoint from every difference already in use. Exact
/// for unit constraints, deterministic for a fixed (F, W), and tight for
/// W = 2 (every difference pair {d, F-d} except the self-paired F/2).
///
/// Returns an empty family when no codeword fits (W(W-1) > F-1).
pub fn generate_family(length: u32, weight: u32) -> Result<CodeFamily, OocError> {
    if length < 2 {
        return Err(OocError::InvalidLength(length));
    }
    if weight < 2 {
        return Err(OocError::InvalidWeight(weight));
    }
    if weight > length {
        return Err(OocError::WeightExceedsLength { weight, length });
    }
    let f = length as usize;
    let mut used = vec![false; f]; // index = difference, 0 unused
    let mut codewords = Vec::new();
    while let Some(positions) = first_fit(length, weight, &used) {
        mark_differences(&positions, length, &mut used, true);
        codewords.push(Codeword::new(length, positions).expect("constructed in range"));
    }
    let family = CodeFamily::new(length, weight, 1, 1, codewords)?;
    let report = validate_family(&family);
    assert!(
        report.pass(),
        "generated family failed exhaustive validation: {:?}",
        report.violations()
    );
    Ok(family)
}

fn mark_differences(positions: &[u32], length: u32, used: &mut [bool], value: bool) {
    for (i, &a) in positions.iter().enumerate() {
        for &b in &positions[i + 1..] {
            let d = (b - a) as usize;
            used[d] = value;
            used[length as usize - d] = value;
        }
    }
}

/// Lexicographically first canonical codeword (positions start at 0) whose
/// differences are all fresh; depth-first with difference pruning.
fn first_fit(length: u32, weight: u32, used: &[bool]) -> Option<Vec<u32>> {
    let mut prefix = vec![0u32];
    let mut tentative = vec![false; length as usize];
    if extend(length, weight, used, &mut tentative, &mut prefix) {
        Some(prefix)
    } else {
        None
    }
}

fn extend(
    length: u32,
    weight: u32,
    used: &[bool],
    tentative: &mut [bool],
    prefix: &mut Vec<u32>,
) -> bool {
    if prefix.len() == weight as usize {
        return true;
    }
    let remaining = weight as usize - prefix.len();
    let start = prefix.last().unwrap() + 1;
    let end = length - remaining as u32; // leave room for ascending tail
    for q in start..=end {
        let mut added: Vec<usize> = Vec::with_capacity(2 * prefix.len());
        let mut ok = true;
        for &p in prefix.iter() {
            let d = (q - p) as usize;
            let d2 = length as usize - d;
            if d == d2 || used[d] || tentative[d] || used[d2] || tentative[d2] {
                ok = false;
                break;
            }
            tentative[d] = true;
            added.push(d);
            tentative[d2] = true;
            added.push(d2);
        }
        if ok {
            prefix.push(q);
            if extend(length, weight, used, tentative, prefix) {
                return true;
            }
            prefix.pop();
        }
        for d in added {
            tentative[d] = false;
        }
    }
    false
}
