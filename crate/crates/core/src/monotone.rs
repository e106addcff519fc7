//! Points, labels, componentwise dominance and the frontier-backed design
//! state for monotone non-decreasing binary functions on `[0,1]^p`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// A point of the closed unit cube.
///
/// Coordinates are finite and lie in `[0, 1]`; `-0.0` is normalised to
/// `0.0` so that equality, ordering and hashing agree.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitPoint(Vec<f64>);

impl UnitPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::usage("a point needs at least one coordinate"));
        }
        if let Some(bad) = coords
            .iter()
            .find(|c| !c.is_finite() || **c < 0.0 || **c > 1.0)
        {
            return Err(Error::usage(format!(
                "coordinate {bad} lies outside the unit interval"
            )));
        }
        Ok(Self::from_unchecked(coords))
    }

    /// Caller guarantees the coordinates are in `[0, 1]`.
    pub(crate) fn from_unchecked(mut coords: Vec<f64>) -> Self {
        for c in &mut coords {
            *c += 0.0;
        }
        UnitPoint(coords)
    }

    pub fn splat(dimension: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// The point `1 - x`, which swaps the roles of lower and upper boxes.
    pub fn reflect(&self) -> Self {
        UnitPoint(self.0.iter().map(|c| 1.0 - c + 0.0).collect())
    }

    /// `true` iff `self_k <= other_k` for every coordinate.
    ///
    /// Panics on dimension mismatch; use [`dominates_leq`] for the checked form.
    pub fn leq(&self, other: &UnitPoint) -> bool {
        debug_assert_eq!(self.dimension(), other.dimension());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Lexicographic order on coordinates.
    pub fn lex_cmp(&self, other: &UnitPoint) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

impl fmt::Debug for UnitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("").field(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for UnitPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitPoint::new(v)
    }
}

impl From<UnitPoint> for Vec<f64> {
    fn from(p: UnitPoint) -> Self {
        p.0
    }
}

impl Eq for UnitPoint {}

impl Hash for UnitPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for c in &self.0 {
            c.to_bits().hash(state);
        }
    }
}

impl PartialOrd for UnitPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for UnitPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lex_cmp(other)
    }
}

/// A binary outcome, serialised as `-1` / `1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Negative => -1,
            Label::Positive => 1,
        }
    }

    pub fn from_sign(value: f64) -> Label {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }
}

impl TryFrom<i8> for Label {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            other => Err(Error::usage(format!("label must be -1 or 1, got {other}"))),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.as_i8()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub point: UnitPoint,
    pub label: Label,
}

impl LabeledPoint {
    pub fn new(point: UnitPoint, label: Label) -> Self {
        Self { point, label }
    }
}

/// What monotonicity lets us infer about a query point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certainty {
    CertainNegative,
    CertainPositive,
    Unknown,
}

impl Certainty {
    pub fn is_unknown(self) -> bool {
        self == Certainty::Unknown
    }

    pub fn label(self) -> Option<Label> {
        match self {
            Certainty::CertainNegative => Some(Label::Negative),
            Certainty::CertainPositive => Some(Label::Positive),
            Certainty::Unknown => None,
        }
    }
}

/// Checked componentwise `a <= b`.
pub fn dominates_leq(a: &UnitPoint, b: &UnitPoint) -> Result<bool> {
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            actual: b.dimension(),
        });
    }
    Ok(a.leq(b))
}

/// Number of unordered pairs `{x, y}` with `x <= y` or `y <= x`.
pub fn count_comparable_pairs(points: &[UnitPoint]) -> u64 {
    let mut count = 0;
    for (i, x) in points.iter().enumerate() {
        for y in &points[i + 1..] {
            if x.leq(y) || y.leq(x) {
                count += 1;
            }
        }
    }
    count
}

/// Which extreme elements an [`Antichain`] retains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Keeps maximal points; covers everything below them.
    Lower,
    /// Keeps minimal points; covers everything above them.
    Upper,
}

/// A set of pairwise incomparable points, kept in lexicographic order so that
/// two antichains with the same members compare equal.
///
/// In dimension one an antichain has at most one member, so the linear scans
/// below are constant time there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Antichain {
    side: Side,
    points: Vec<UnitPoint>,
}

impl Antichain {
    pub fn new(side: Side) -> Self {
        Self {
            side,
            points: Vec::new(),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn points(&self) -> &[UnitPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `a` is at least as extreme as `b` on this side.
    fn beats(&self, a: &UnitPoint, b: &UnitPoint) -> bool {
        match self.side {
            Side::Lower => b.leq(a),
            Side::Upper => a.leq(b),
        }
    }

    /// A member whose box contains `q`, if any.
    pub fn witness(&self, q: &UnitPoint) -> Option<&UnitPoint> {
        self.points.iter().find(|f| self.beats(f, q))
    }

    pub fn covers(&self, q: &UnitPoint) -> bool {
        self.witness(q).is_some()
    }

    /// Adds `p`, dropping members it dominates. Returns `false` when `p` was
    /// already covered and the antichain is unchanged.
    pub fn insert(&mut self, p: UnitPoint) -> bool {
        if self.covers(&p) {
            return false;
        }
        let side = self.side;
        self.points.retain(|f| match side {
            Side::Lower => !f.leq(&p),
            Side::Upper => !p.leq(f),
        });
        let at = self
            .points
            .binary_search_by(|f| f.lex_cmp(&p))
            .unwrap_or_else(|i| i);
        self.points.insert(at, p);
        true
    }
}

/// Everything known about a design campaign: evaluated points in order, the
/// two frontiers that summarise them, the current grid level and the pending
/// candidate pool.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignState {
    dimension: usize,
    evaluated: Vec<LabeledPoint>,
    negative: Antichain,
    positive: Antichain,
    /// Grid level the next candidate set will be generated from.
    pub level: u32,
    /// Candidate pool, lexicographically sorted.
    pub candidates: Vec<UnitPoint>,
}

impl DesignState {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::usage("dimension must be positive"));
        }
        Ok(Self {
            dimension,
            evaluated: Vec::new(),
            negative: Antichain::new(Side::Lower),
            positive: Antichain::new(Side::Upper),
            level: 0,
            candidates: Vec::new(),
        })
    }

    /// Replays observations in order, without a candidate pool.
    pub fn from_observations<'a>(
        dimension: usize,
        observations: impl IntoIterator<Item = &'a LabeledPoint>,
    ) -> Result<Self> {
        let mut state = Self::new(dimension)?;
        for obs in observations {
            state.record(obs.clone())?;
        }
        Ok(state)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn evaluated(&self) -> &[LabeledPoint] {
        &self.evaluated
    }

    /// Maximal negative points.
    pub fn negative_frontier(&self) -> &[UnitPoint] {
        self.negative.points()
    }

    /// Minimal positive points.
    pub fn positive_frontier(&self) -> &[UnitPoint] {
        self.positive.points()
    }

    pub fn count(&self, label: Label) -> usize {
        self.evaluated.iter().filter(|o| o.label == label).count()
    }

    fn check_dimension(&self, q: &UnitPoint) -> Result<()> {
        if q.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: q.dimension(),
            });
        }
        Ok(())
    }

    /// Infers the label of `q` from dominance alone.
    pub fn classify(&self, q: &UnitPoint) -> Result<Certainty> {
        self.check_dimension(q)?;
        Ok(self.classify_unchecked(q)?)
    }

    pub(crate) fn classify_unchecked(&self, q: &UnitPoint) -> Result<Certainty> {
        let neg = self.negative.covers(q);
        let pos = self.positive.covers(q);
        match (neg, pos) {
            (true, true) => Err(Error::CorruptState { point: q.clone() }),
            (true, false) => Ok(Certainty::CertainNegative),
            (false, true) => Ok(Certainty::CertainPositive),
            (false, false) => Ok(Certainty::Unknown),
        }
    }

    /// Appends an observation and updates the frontier of its sign, leaving
    /// the candidate pool untouched.
    ///
    /// Fails without modifying the state if the observation contradicts
    /// monotonicity.
    pub fn record(&mut self, obs: LabeledPoint) -> Result<()> {
        self.check_dimension(&obs.point)?;
        match obs.label {
            Label::Negative => {
                if let Some(pos) = self.positive.witness(&obs.point) {
                    return Err(Error::NonMonotone(Violation {
                        negative: obs.point.clone(),
                        positive: pos.clone(),
                    }));
                }
                self.negative.insert(obs.point.clone());
            }
            Label::Positive => {
                if let Some(neg) = self.negative.witness(&obs.point) {
                    return Err(Error::NonMonotone(Violation {
                        negative: neg.clone(),
                        positive: obs.point.clone(),
                    }));
                }
                self.positive.insert(obs.point.clone());
            }
        }
        self.evaluated.push(obs);
        Ok(())
    }

    /// Records an observation and then drops every candidate whose label has
    /// become certain. Returns the number of candidates dropped.
    pub fn insert_observation(&mut self, obs: LabeledPoint) -> Result<usize> {
        self.record(obs)?;
        self.prune_candidates()
    }

    /// Removes certainly classified candidates; returns how many were removed.
    pub fn prune_candidates(&mut self) -> Result<usize> {
        let before = self.candidates.len();
        let mut kept = Vec::with_capacity(before);
        for c in std::mem::take(&mut self.candidates) {
            if self.classify_unchecked(&c)?.is_unknown() {
                kept.push(c);
            }
        }
        self.candidates = kept;
        Ok(before - self.candidates.len())
    }
}
