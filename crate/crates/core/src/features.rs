//! Vectorization of persistence diagrams: Betti curves, persistent entropy,
//! total persistence (`Σ l ln l`), and persistence-landscape norms, plus the
//! 4-bit combination code that selects which of them enter a feature vector.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::persistence::{Death, PersistenceDiagram};
use crate::scalar::Scalar;

/// What to do with classes that never die.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InfinitePolicy {
    /// Replace the death by the largest finite death in the diagram
    /// (the filtration threshold if there is none).
    #[default]
    ClampToMax,
    Drop,
}

impl InfinitePolicy {
    pub fn name(self) -> &'static str {
        match self {
            InfinitePolicy::ClampToMax => "clamp-to-max",
            InfinitePolicy::Drop => "drop",
        }
    }
}

impl FromStr for InfinitePolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp-to-max" => Ok(InfinitePolicy::ClampToMax),
            "drop" => Ok(InfinitePolicy::Drop),
            other => Err(Error::Config(format!(
                "unknown infinite-bar policy {other:?} (expected clamp-to-max or drop)"
            ))),
        }
    }
}

/// Finite bars per homology dimension, all with positive lifetime.
#[derive(Debug, Clone, PartialEq)]
pub struct BarcodeSet<T> {
    per_dim: Vec<Vec<(T, T)>>,
}

impl<T: Scalar> BarcodeSet<T> {
    /// Bars with non-positive lifetime are discarded.
    pub fn from_bars(per_dim: Vec<Vec<(T, T)>>) -> Self {
        Self {
            per_dim: per_dim
                .into_iter()
                .map(|bars| bars.into_iter().filter(|(b, d)| *d > *b).collect())
                .collect(),
        }
    }

    pub fn bars(&self, dim: usize) -> &[(T, T)] {
        self.per_dim.get(dim).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn lifetimes(&self, dim: usize) -> impl Iterator<Item = T> + '_ {
        self.bars(dim).iter().map(|(b, d)| *d - *b)
    }

    pub fn dims(&self) -> usize {
        self.per_dim.len()
    }
}

pub fn clamp_infinite<T: Scalar>(diagram: &PersistenceDiagram<T>, policy: InfinitePolicy) -> BarcodeSet<T> {
    let cap = diagram
        .pairs()
        .iter()
        .filter_map(|p| p.death.finite())
        .reduce(T::max)
        .unwrap_or_else(|| diagram.max_radius());
    let mut per_dim = vec![Vec::new(); diagram.max_dim() + 1];
    for p in diagram.pairs() {
        if p.dim >= per_dim.len() {
            per_dim.resize(p.dim + 1, Vec::new());
        }
        let death = match (p.death, policy) {
            (Death::At(d), _) => d,
            (Death::Never, InfinitePolicy::ClampToMax) => cap,
            (Death::Never, InfinitePolicy::Drop) => continue,
        };
        per_dim[p.dim].push((p.birth, death));
    }
    BarcodeSet::from_bars(per_dim)
}

/// `m` samples of the Betti number at radii `i·E/m`, `i = 1…m`, where `E` is
/// the last death in the dimension. A bar counts at `r` when `birth <= r < death`.
pub fn betti_curve<T: Scalar>(bars: &BarcodeSet<T>, dim: usize, m: usize) -> Vec<usize> {
    let bars = bars.bars(dim);
    let Some(end) = bars.iter().map(|(_, d)| *d).reduce(T::max) else {
        return vec![0; m];
    };
    let mf = T::from_usize_lossy(m);
    (1..=m)
        .map(|i| {
            let r = T::from_usize_lossy(i) * end / mf;
            bars.iter().filter(|(b, d)| *b <= r && r < *d).count()
        })
        .collect()
}

/// Shannon entropy (natural log) of the normalized lifetimes.
pub fn persistent_entropy<T: Scalar>(bars: &BarcodeSet<T>, dim: usize) -> T {
    if bars.bars(dim).len() < 2 {
        return T::zero();
    }
    let total: T = bars.lifetimes(dim).sum();
    -bars
        .lifetimes(dim)
        .map(|l| {
            let p = l / total;
            p * p.ln()
        })
        .sum::<T>()
}

/// `Σ l ln l` over the lifetimes of the dimension.
pub fn total_persistence<T: Scalar>(bars: &BarcodeSet<T>, dim: usize) -> T {
    bars.lifetimes(dim).map(|l| l * l.ln()).sum()
}

#[inline]
fn tent<T: Scalar>((a, b): (T, T), x: T) -> T {
    if x <= a || x >= b {
        T::zero()
    } else {
        (x - a).min(b - x)
    }
}

/// `λ_k(x)`: the `k`-th largest tent value at `x` (1-based `k`), 0 if absent.
pub fn landscape_value<T: Scalar>(bars: &[(T, T)], k: usize, x: T) -> T {
    assert!(k >= 1, "landscape levels are 1-based");
    let mut vals: Vec<T> = bars.iter().map(|&bar| tent(bar, x)).collect();
    if k > vals.len() {
        return T::zero();
    }
    vals.select_nth_unstable_by(k - 1, |a, b| b.total_cmp_finite(a));
    vals[k - 1]
}

/// Every x where some `λ_k` can change slope: bar ends, tent peaks, and the
/// crossings `(a_i + b_j)/2` of a rising and a falling edge.
fn landscape_breakpoints<T: Scalar>(bars: &[(T, T)]) -> Vec<T> {
    let two = T::lit(2.0);
    let lo = bars.iter().map(|b| b.0).fold(T::infinity(), T::min);
    let hi = bars.iter().map(|b| b.1).fold(T::neg_infinity(), T::max);
    let mut xs = Vec::with_capacity(bars.len() * (bars.len() + 2));
    for &(a, b) in bars {
        xs.push(a);
        xs.push(b);
        xs.push((a + b) / two);
        for &(_, b2) in bars {
            let x = (a + b2) / two;
            if x > lo && x < hi {
                xs.push(x);
            }
        }
    }
    xs.sort_by(|a, b| a.total_cmp_finite(b));
    xs.dedup();
    xs
}

/// `∫_0^h f^p` for the linear `f` going from `y0` to `y1`, both `>= 0`.
fn integrate_linear_power<T: Scalar>(y0: T, y1: T, h: T, p: T) -> T {
    if p == T::lit(2.0) {
        return h * (y0 * y0 + y0 * y1 + y1 * y1) / T::lit(3.0);
    }
    if (y1 - y0).abs() <= T::epsilon() * (y0.abs() + y1.abs()) {
        return h * y0.powf(p);
    }
    h * (y1.powf(p + T::one()) - y0.powf(p + T::one())) / ((p + T::one()) * (y1 - y0))
}

/// `(Σ_{k<=k_max} ‖λ_k‖_p^p)^{1/p}`, integrated exactly over the piecewise-linear landscape.
pub fn landscape_norm<T: Scalar>(bars: &BarcodeSet<T>, dim: usize, p: T, k_max: usize) -> T {
    let bars = bars.bars(dim);
    if bars.is_empty() || k_max == 0 {
        return T::zero();
    }
    let levels = k_max.min(bars.len());
    let xs = landscape_breakpoints(bars);
    let mut prev: Option<(T, Vec<T>)> = None;
    let mut acc = T::zero();
    let mut vals: Vec<T> = Vec::with_capacity(bars.len());
    for &x in &xs {
        vals.clear();
        vals.extend(bars.iter().map(|&bar| tent(bar, x)));
        vals.sort_unstable_by(|a, b| b.total_cmp_finite(a));
        let top: Vec<T> = vals[..levels].to_vec();
        if let Some((x0, y0)) = &prev {
            let h = x - *x0;
            for k in 0..levels {
                acc += integrate_linear_power(y0[k], top[k], h, p);
            }
        }
        prev = Some((x, top));
    }
    acc.powf(T::one() / p)
}

/// One of the four diagram summaries, in code-bit order (most significant first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    BettiCurve,
    TotalPersistence,
    Entropy,
    LandscapeL2,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::BettiCurve,
        Feature::TotalPersistence,
        Feature::Entropy,
        Feature::LandscapeL2,
    ];

    pub fn bit(self) -> u8 {
        match self {
            Feature::BettiCurve => 0b1000,
            Feature::TotalPersistence => 0b0100,
            Feature::Entropy => 0b0010,
            Feature::LandscapeL2 => 0b0001,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Feature::BettiCurve => "betti",
            Feature::TotalPersistence => "total_persistence",
            Feature::Entropy => "entropy",
            Feature::LandscapeL2 => "landscape_l2",
        }
    }
}

/// Decimal code `1…15` of a non-empty feature subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ComboCode(u8);

impl ComboCode {
    pub fn new(code: u8) -> Result<Self> {
        match code {
            0 => Err(Error::Config("empty combination: code 0 selects no features".into())),
            1..=15 => Ok(Self(code)),
            _ => Err(Error::Config(format!("combination code {code} outside 1..=15"))),
        }
    }

    /// From inclusion flags `[betti, total_persistence, entropy, landscape_l2]`.
    pub fn encode(bits: [bool; 4]) -> Result<Self> {
        let code = Feature::ALL
            .iter()
            .zip(bits)
            .filter(|(_, on)| *on)
            .fold(0u8, |acc, (f, _)| acc | f.bit());
        Self::new(code)
    }

    pub fn decode(self) -> [bool; 4] {
        Feature::ALL.map(|f| self.0 & f.bit() != 0)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn features(self) -> impl Iterator<Item = Feature> {
        Feature::ALL.into_iter().filter(move |f| self.0 & f.bit() != 0)
    }

    pub fn all() -> impl Iterator<Item = ComboCode> {
        (1..=15).map(ComboCode)
    }

    /// The `(0110)_2` style rendering.
    pub fn binary(self) -> String {
        format!("{:04b}", self.0)
    }
}

impl fmt::Display for ComboCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for ComboCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let code = s
            .trim()
            .parse::<u8>()
            .map_err(|_| Error::Config(format!("bad combination code {s:?}")))?;
        Self::new(code)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub max_dim: usize,
    pub betti_bins: usize,
    pub landscape_k_max: usize,
    pub landscape_p: f64,
    pub infinite_policy: InfinitePolicy,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            max_dim: 1,
            betti_bins: 100,
            landscape_k_max: 5,
            landscape_p: 2.0,
            infinite_policy: InfinitePolicy::ClampToMax,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.betti_bins == 0 {
            return Err(Error::Config("betti_bins must be at least 1".into()));
        }
        if self.landscape_k_max == 0 {
            return Err(Error::Config("landscape_k_max must be at least 1".into()));
        }
        if !(self.landscape_p >= 1.0 && self.landscape_p.is_finite()) {
            return Err(Error::Config(format!("landscape_p must be >= 1, got {}", self.landscape_p)));
        }
        if self.max_dim > crate::persistence::MAX_HOMOLOGY_DIM {
            return Err(Error::Config(format!("max_dim {} too large", self.max_dim)));
        }
        Ok(())
    }

    /// Column layout for `combo`: features in code-bit order, then homology
    /// dimension, then position within the feature.
    pub fn layout(&self, combo: ComboCode) -> Vec<FeatureSlot> {
        let mut out = Vec::new();
        for feature in combo.features() {
            for dim in 0..=self.max_dim {
                let width = if feature == Feature::BettiCurve { self.betti_bins } else { 1 };
                out.extend((0..width).map(|index| FeatureSlot { feature, dim, index }));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSlot {
    pub feature: Feature,
    pub dim: usize,
    pub index: usize,
}

impl fmt::Display for FeatureSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.feature {
            Feature::BettiCurve => write!(f, "betti[h{}][{}]", self.dim, self.index + 1),
            other => write!(f, "{}[h{}]", other.short_name(), self.dim),
        }
    }
}

/// Every feature of one diagram, computed once and sliced per combination.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlocks<T> {
    pub betti: Vec<Vec<usize>>,
    pub total_persistence: Vec<T>,
    pub entropy: Vec<T>,
    pub landscape: Vec<T>,
}

impl<T: Scalar> FeatureBlocks<T> {
    pub fn compute(diagram: &PersistenceDiagram<T>, config: &FeatureConfig) -> Self {
        let bars = clamp_infinite(diagram, config.infinite_policy);
        let dims = 0..=config.max_dim;
        let p = T::lit(config.landscape_p);
        Self {
            betti: dims.clone().map(|d| betti_curve(&bars, d, config.betti_bins)).collect(),
            total_persistence: dims.clone().map(|d| total_persistence(&bars, d)).collect(),
            entropy: dims.clone().map(|d| persistent_entropy(&bars, d)).collect(),
            landscape: dims.map(|d| landscape_norm(&bars, d, p, config.landscape_k_max)).collect(),
        }
    }

    pub fn assemble(&self, combo: ComboCode) -> TopoFeatureVector<T> {
        let mut values = Vec::new();
        let mut layout = Vec::new();
        for feature in combo.features() {
            for dim in 0..self.betti.len() {
                match feature {
                    Feature::BettiCurve => {
                        for (index, &c) in self.betti[dim].iter().enumerate() {
                            values.push(T::from_usize_lossy(c));
                            layout.push(FeatureSlot { feature, dim, index });
                        }
                    }
                    Feature::TotalPersistence => {
                        values.push(self.total_persistence[dim]);
                        layout.push(FeatureSlot { feature, dim, index: 0 });
                    }
                    Feature::Entropy => {
                        values.push(self.entropy[dim]);
                        layout.push(FeatureSlot { feature, dim, index: 0 });
                    }
                    Feature::LandscapeL2 => {
                        values.push(self.landscape[dim]);
                        layout.push(FeatureSlot { feature, dim, index: 0 });
                    }
                }
            }
        }
        TopoFeatureVector { combo, values, layout }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoFeatureVector<T> {
    pub combo: ComboCode,
    pub values: Vec<T>,
    pub layout: Vec<FeatureSlot>,
}

pub fn feature_vector<T: Scalar>(
    diagram: &PersistenceDiagram<T>,
    combo: ComboCode,
    config: &FeatureConfig,
) -> TopoFeatureVector<T> {
    FeatureBlocks::compute(diagram, config).assemble(combo)
}
