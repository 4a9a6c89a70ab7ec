//! Linear array geometries.
//!
//! Positions are stored in units of `d0 = λ/2` and are always anchored at the
//! origin. Fractional spacings (for instance a uniform sparse array with
//! `η = 4.1`) are representable; co-array processing requires
//! [`ElementLayout::on_integer_grid`].

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::coarray;
use crate::error::{invalid, Error, Result};

/// Largest element count handled by the exhaustive ruler search.
pub const MRA_SEARCH_MAX: usize = 8;
/// Supported element counts for [`make_mra`].
pub const MRA_MIN: usize = 3;
pub const MRA_MAX: usize = 16;

/// Published minimum-redundancy rulers for 9..=16 elements, stored as
/// adjacent gaps. Lengths: 29, 36, 43, 50, 58, 68, 79, 90.
///
/// Every entry except the 13-element one follows the Wichmann construction
/// `1^r, r+1, (2r+1)^r, (4r+3)^s, (2r+2)^(r+1), 1^r`.
const MRA_TABLE: [(usize, &[u32]); 8] = [
    (9, &[1, 2, 3, 7, 7, 4, 4, 1]),
    (10, &[1, 2, 3, 7, 7, 7, 4, 4, 1]),
    (11, &[1, 2, 3, 7, 7, 7, 7, 4, 4, 1]),
    (12, &[1, 2, 3, 7, 7, 7, 7, 7, 4, 4, 1]),
    (13, MRA13_GAPS),
    (14, &[1, 1, 3, 5, 5, 11, 11, 11, 6, 6, 6, 1, 1]),
    (15, &[1, 1, 3, 5, 5, 11, 11, 11, 11, 6, 6, 6, 1, 1]),
    (16, &[1, 1, 3, 5, 5, 11, 11, 11, 11, 11, 6, 6, 6, 1, 1]),
];

// Found by `hole_free_rulers(13, 58)`; same selection rule as `make_mra`.
const MRA13_GAPS: &[u32] = &[1, 2, 3, 11, 3, 7, 8, 10, 4, 4, 4, 1];

/// Architecture tag together with the generator parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Architecture {
    Compact { m: usize },
    Usa { m: usize, eta: f64 },
    Modular { modules: usize, per_module: usize, gamma: f64 },
    Nested { inner: usize, outer: usize },
    Coprime { first: usize, second: usize },
    MinimumRedundancy { m: usize },
    ExtendedMra { subarrays: usize, sub_m: usize },
    Custom,
}

impl Architecture {
    /// Short tag used on the command line and in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Architecture::Compact { .. } => "ca",
            Architecture::Usa { .. } => "usa",
            Architecture::Modular { .. } => "moa",
            Architecture::Nested { .. } => "na",
            Architecture::Coprime { .. } => "cpa",
            Architecture::MinimumRedundancy { .. } => "mra",
            Architecture::ExtendedMra { .. } => "emra",
            Architecture::Custom => "custom",
        }
    }

    /// Builds the layout this tag describes.
    pub fn build(&self) -> Result<ElementLayout> {
        match *self {
            Architecture::Compact { m } => make_compact(m),
            Architecture::Usa { m, eta } => make_usa(m, eta),
            Architecture::Modular { modules, per_module, gamma } => {
                make_moa(modules, per_module, gamma)
            }
            Architecture::Nested { inner, outer } => make_nested(inner, outer),
            Architecture::Coprime { first, second } => make_coprime(first, second),
            Architecture::MinimumRedundancy { m } => make_mra(m),
            Architecture::ExtendedMra { subarrays, sub_m } => make_emra(subarrays, sub_m),
            Architecture::Custom => Err(invalid("custom layouts carry explicit positions")),
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Architecture::Compact { m } => write!(f, "ca m={m}"),
            Architecture::Usa { m, eta } => write!(f, "usa m={m} eta={eta}"),
            Architecture::Modular { modules, per_module, gamma } => {
                write!(f, "moa n={modules} m={per_module} gamma={gamma}")
            }
            Architecture::Nested { inner, outer } => write!(f, "na min={inner} mou={outer}"),
            Architecture::Coprime { first, second } => write!(f, "cpa mf={first} ms={second}"),
            Architecture::MinimumRedundancy { m } => write!(f, "mra m={m}"),
            Architecture::ExtendedMra { subarrays, sub_m } => {
                write!(f, "emra n={subarrays} m={sub_m}")
            }
            Architecture::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for Architecture {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) form, e.g. `usa m=32 eta=4.1`.
    fn from_str(s: &str) -> Result<Self> {
        let mut words = s.split_whitespace();
        let tag = words.next().ok_or_else(|| invalid("empty architecture"))?;
        let mut kv = std::collections::HashMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| invalid(format!("expected key=value, got `{w}`")))?;
            kv.insert(k, v);
        }
        let int = |k: &str| -> Result<usize> {
            kv.get(k)
                .ok_or_else(|| invalid(format!("`{tag}` needs `{k}`")))?
                .parse()
                .map_err(|_| invalid(format!("`{k}` must be an integer")))
        };
        let real = |k: &str| -> Result<f64> {
            kv.get(k)
                .ok_or_else(|| invalid(format!("`{tag}` needs `{k}`")))?
                .parse()
                .map_err(|_| invalid(format!("`{k}` must be a number")))
        };
        Ok(match tag {
            "ca" => Architecture::Compact { m: int("m")? },
            "usa" => Architecture::Usa { m: int("m")?, eta: real("eta")? },
            "moa" => Architecture::Modular {
                modules: int("n")?,
                per_module: int("m")?,
                gamma: real("gamma")?,
            },
            "na" => Architecture::Nested { inner: int("min")?, outer: int("mou")? },
            "cpa" => Architecture::Coprime { first: int("mf")?, second: int("ms")? },
            "mra" => Architecture::MinimumRedundancy { m: int("m")? },
            "emra" => Architecture::ExtendedMra { subarrays: int("n")?, sub_m: int("m")? },
            "custom" => Architecture::Custom,
            other => return Err(invalid(format!("unknown architecture `{other}`"))),
        })
    }
}

/// File- and CSV-safe names: the bare tag, or the full description when a
/// tag repeats.
pub fn unique_labels(architectures: &[Architecture]) -> Vec<String> {
    architectures
        .iter()
        .map(|a| {
            if architectures.iter().filter(|b| b.tag() == a.tag()).count() > 1 {
                a.to_string().replace(' ', "_")
            } else {
                a.tag().to_string()
            }
        })
        .collect()
}

/// Element positions of a linear array in units of `d0 = λ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementLayout {
    positions: Vec<f64>,
    architecture: Architecture,
}

/// How [`ElementLayout::aperture`] measures the physical size of an array.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApertureConvention {
    /// `(max - min) · d0`.
    Span,
    /// `M · mean adjacent gap · d0`, i.e. one pitch per element.
    Count,
}

impl ElementLayout {
    pub fn new(positions: Vec<f64>, architecture: Architecture) -> Result<Self> {
        if positions.len() < 2 {
            return Err(invalid("a layout needs at least two elements"));
        }
        if positions[0] != 0.0 {
            return Err(invalid("layouts are anchored at the origin (first position must be 0)"));
        }
        for w in positions.windows(2) {
            if !w[1].is_finite() || w[1] <= w[0] {
                return Err(invalid("positions must be finite and strictly increasing"));
            }
        }
        Ok(Self { positions, architecture })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest position, in units of d0.
    pub fn span(&self) -> f64 {
        self.positions[self.positions.len() - 1]
    }

    pub fn aperture(&self, convention: ApertureConvention, wavelength: f64) -> f64 {
        let d0 = wavelength / 2.0;
        match convention {
            ApertureConvention::Span => self.span() * d0,
            ApertureConvention::Count => {
                let m = self.len() as f64;
                let mean_gap = self.span() / (m - 1.0);
                m * mean_gap * d0
            }
        }
    }

    /// Element x-coordinates in meters.
    pub fn positions_m(&self, wavelength: f64) -> Vec<f64> {
        self.positions.iter().map(|p| p * wavelength / 2.0).collect()
    }

    pub fn on_integer_grid(&self, tol: f64) -> bool {
        self.positions.iter().all(|p| (p - p.round()).abs() <= tol)
    }

    /// Rounded integer positions, or the first offending position.
    pub fn integer_positions(&self, tol: f64) -> Result<Vec<i64>> {
        self.positions
            .iter()
            .map(|&p| {
                if (p - p.round()).abs() <= tol {
                    Ok(p.round() as i64)
                } else {
                    Err(Error::NonIntegerGrid { position: p })
                }
            })
            .collect()
    }

    /// True when all adjacent gaps are equal (compact or uniform sparse).
    pub fn is_uniform(&self, tol: f64) -> bool {
        let g0 = self.positions[1] - self.positions[0];
        self.positions.windows(2).all(|w| ((w[1] - w[0]) - g0).abs() <= tol)
    }

    /// The first `n` elements, e.g. the reference sub-array of a spatially
    /// smoothed covariance.
    pub fn subarray(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(invalid(format!("sub-array of {n} elements from a {}-element layout", self.len())));
        }
        let architecture = match self.architecture {
            Architecture::Compact { .. } => Architecture::Compact { m: n },
            Architecture::Usa { eta, .. } => Architecture::Usa { m: n, eta },
            _ => Architecture::Custom,
        };
        Self::new(self.positions[..n].to_vec(), architecture)
    }

    /// Text form: a `# <architecture>` header followed by one position per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.architecture);
        for p in &self.positions {
            out.push_str(&format!("{p}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut architecture = Architecture::Custom;
        let mut positions = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                if positions.is_empty() && i == 0 {
                    architecture = header.trim().parse().map_err(|e: Error| Error::Parse {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                }
                continue;
            }
            let p: f64 = line.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("`{line}` is not a number"),
            })?;
            positions.push(p);
        }
        ElementLayout::new(positions, architecture)
    }
}

pub fn make_compact(m: usize) -> Result<ElementLayout> {
    if m < 2 {
        return Err(invalid("compact array needs M >= 2"));
    }
    ElementLayout::new((0..m).map(|i| i as f64).collect(), Architecture::Compact { m })
}

/// Uniform sparse array with spacing `eta · d0`.
pub fn make_usa(m: usize, eta: f64) -> Result<ElementLayout> {
    if m < 2 {
        return Err(invalid("uniform sparse array needs M >= 2"));
    }
    if !(eta >= 1.0) || !eta.is_finite() {
        return Err(invalid(format!("sparsity parameter eta must be >= 1, got {eta}")));
    }
    ElementLayout::new((0..m).map(|i| i as f64 * eta).collect(), Architecture::Usa { m, eta })
}

/// Modular array: `modules` compact modules of `per_module` elements whose
/// first elements are `gamma · d0` apart.
pub fn make_moa(modules: usize, per_module: usize, gamma: f64) -> Result<ElementLayout> {
    if modules == 0 || per_module == 0 {
        return Err(invalid("modular array needs at least one module and one element per module"));
    }
    if !(gamma >= per_module as f64) {
        return Err(invalid(format!(
            "inter-module spacing gamma={gamma} must be >= elements per module ({per_module})"
        )));
    }
    let positions = (0..modules)
        .flat_map(|n| (0..per_module).map(move |i| n as f64 * gamma + i as f64))
        .collect();
    ElementLayout::new(positions, Architecture::Modular { modules, per_module, gamma })
}

/// Two-level nested array: `{0..inner-1} ∪ {k(inner+1) - 1 : k = 1..=outer}`.
pub fn make_nested(inner: usize, outer: usize) -> Result<ElementLayout> {
    if inner == 0 || outer == 0 {
        return Err(invalid("nested array needs M_in >= 1 and M_ou >= 1"));
    }
    let pitch = inner + 1;
    let positions = (0..inner)
        .chain((1..=outer).map(|k| k * pitch - 1))
        .map(|p| p as f64)
        .collect();
    ElementLayout::new(positions, Architecture::Nested { inner, outer })
}

/// Co-prime array: the union of `{k·second : k < first}` and
/// `{k·first : k < second}` sharing the origin element.
pub fn make_coprime(first: usize, second: usize) -> Result<ElementLayout> {
    if first < 2 || second < 2 {
        return Err(invalid("co-prime array needs M_f >= 2 and M_s >= 2"));
    }
    if gcd(first, second) != 1 {
        return Err(invalid(format!("M_f={first} and M_s={second} are not co-prime")));
    }
    let set: BTreeSet<usize> = (0..first)
        .map(|k| k * second)
        .chain((0..second).map(|k| k * first))
        .collect();
    ElementLayout::new(
        set.into_iter().map(|p| p as f64).collect(),
        Architecture::Coprime { first, second },
    )
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Minimum-redundancy array with a hole-free difference co-array of maximal
/// extent.
///
/// Up to [`MRA_SEARCH_MAX`] elements the layout comes from [`mra_search`];
/// among the optimal rulers the one with the fewest unit gaps wins, ties
/// broken lexicographically. Larger counts come from an embedded ruler table
/// that is re-checked for holes on every call.
pub fn make_mra(m: usize) -> Result<ElementLayout> {
    if !(MRA_MIN..=MRA_MAX).contains(&m) {
        return Err(Error::UnsupportedCount { count: m, min: MRA_MIN, max: MRA_MAX });
    }
    let positions: Vec<u32> = if m <= MRA_SEARCH_MAX {
        let mut rulers = hole_free_rulers_max(m, m * (m - 1) / 2)?;
        rulers.sort_by_key(|r| (unit_gaps(r), r.clone()));
        rulers.swap_remove(0)
    } else {
        let (_, gaps) = MRA_TABLE.iter().find(|(n, _)| *n == m).expect("table covers 9..=16");
        std::iter::once(0)
            .chain(gaps.iter().scan(0u32, |acc, g| {
                *acc += g;
                Some(*acc)
            }))
            .collect()
    };
    let layout = ElementLayout::new(
        positions.iter().map(|&p| p as f64).collect(),
        Architecture::MinimumRedundancy { m },
    )?;
    let profile = coarray::difference_coarray(&layout)?;
    if !profile.holes().is_empty() {
        return Err(invalid(format!("embedded ruler for M={m} has holes")));
    }
    Ok(layout)
}

fn unit_gaps(r: &[u32]) -> usize {
    r.windows(2).filter(|w| w[1] - w[0] == 1).count()
}

/// All origin-anchored `m`-element integer layouts of span at most
/// `max_aperture` whose difference co-array is hole-free with the largest
/// achievable contiguous extent.
pub fn mra_search(m: usize, max_aperture: usize) -> Result<Vec<ElementLayout>> {
    if m > MRA_SEARCH_MAX {
        return Err(Error::UnsupportedCount { count: m, min: 2, max: MRA_SEARCH_MAX });
    }
    if m < 2 {
        return Err(invalid("ruler search needs at least two elements"));
    }
    hole_free_rulers_max(m, max_aperture)?
        .into_iter()
        .map(|r| {
            ElementLayout::new(
                r.into_iter().map(|p| p as f64).collect(),
                Architecture::MinimumRedundancy { m },
            )
        })
        .collect()
}

fn hole_free_rulers_max(m: usize, max_aperture: usize) -> Result<Vec<Vec<u32>>> {
    if max_aperture + 1 < m {
        return Err(invalid(format!(
            "no {m}-element integer layout fits in aperture {max_aperture}"
        )));
    }
    let upper = max_aperture.min(m * (m - 1) / 2);
    for length in (m - 1..=upper).rev() {
        let found = hole_free_rulers(m, length);
        if !found.is_empty() {
            return Ok(found);
        }
    }
    unreachable!("the compact layout of span m-1 is always hole-free")
}

/// Every `m`-mark ruler of exactly `length` that measures all distances
/// `1..=length`.
///
/// Depth-first: the largest distance still unmeasured can only be realised
/// by `length - d + 1` mark pairs, so the search branches over those pairs
/// and prunes when the marks left cannot supply enough new distances.
pub fn hole_free_rulers(m: usize, length: usize) -> Vec<Vec<u32>> {
    assert!(length < 128, "ruler search works on 128-bit masks");
    if m < 2 || length + 1 < m {
        return Vec::new();
    }
    let full: u128 = if length == 127 { !1 } else { ((1u128 << (length + 1)) - 1) & !1 };
    let mut found = BTreeSet::new();
    let mut search = RulerSearch { m, length, full, found: &mut found };
    let marks = 1u128 | (1u128 << length);
    search.descend(marks, 2, 1u128 << length);
    found.into_iter().collect()
}

struct RulerSearch<'a> {
    m: usize,
    length: usize,
    full: u128,
    found: &'a mut BTreeSet<Vec<u32>>,
}

impl RulerSearch<'_> {
    fn descend(&mut self, marks: u128, placed: usize, covered: u128) {
        let missing = self.full & !covered;
        if missing == 0 {
            self.complete(marks, placed, 0);
            return;
        }
        if placed == self.m {
            return;
        }
        let left = self.m - placed;
        let supply = left * placed + left * (left - 1) / 2;
        if missing.count_ones() as usize > supply {
            return;
        }
        let d = 127 - missing.leading_zeros() as usize;
        for a in 0..=(self.length - d) {
            let b = a + d;
            let need = usize::from(marks >> a & 1 == 0) + usize::from(marks >> b & 1 == 0);
            if need > left {
                continue;
            }
            let mut nm = marks;
            let mut nc = covered;
            for x in [a, b] {
                if nm >> x & 1 == 0 {
                    nc |= distances_from(nm, x);
                    nm |= 1 << x;
                }
            }
            self.descend(nm, placed + need, nc);
        }
    }

    /// Hole-free with marks to spare: any placement of the remainder works.
    fn complete(&mut self, marks: u128, placed: usize, from: usize) {
        if placed == self.m {
            let ruler = (0..=self.length).filter(|&x| marks >> x & 1 == 1).map(|x| x as u32);
            self.found.insert(ruler.collect());
            return;
        }
        for x in from..self.length {
            if marks >> x & 1 == 0 {
                self.complete(marks | 1 << x, placed + 1, x + 1);
            }
        }
    }
}

fn distances_from(marks: u128, x: usize) -> u128 {
    let mut out = 0u128;
    let mut rest = marks;
    while rest != 0 {
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        out |= 1u128 << p.abs_diff(x);
    }
    out & !1
}

/// Extended MRA: `subarrays` copies of `make_mra(sub_m)` tiled at pitch
/// `L_sub + 1` where `L_sub` is the sub-array span.
pub fn make_emra(subarrays: usize, sub_m: usize) -> Result<ElementLayout> {
    if subarrays == 0 {
        return Err(invalid("extended MRA needs at least one sub-array"));
    }
    let sub = make_mra(sub_m)?;
    let pitch = sub.span() + 1.0;
    let positions = (0..subarrays)
        .flat_map(|k| sub.positions().iter().map(move |p| p + k as f64 * pitch))
        .collect();
    ElementLayout::new(positions, Architecture::ExtendedMra { subarrays, sub_m })
}
