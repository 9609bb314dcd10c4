//! Probability measures on the real line and their moment sequences.
//!
//! A measure arrives in one of three representations: finitely many weighted
//! atoms, a nonnegative density sampled on a uniform grid, or an analytic
//! family with closed-form density. Moments ∫x^n dm are exact sums for
//! atoms, composite Simpson sums for grids, and adaptive interval-doubling
//! Gauss-Legendre quadrature for the analytic families. Orders whose tail
//! integral cannot be certified to converge are reported `Divergent` rather
//! than returned as garbage values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    gl_integrate, gl_integrate_log, improper_log_integral, logaddexp, logsubexp, simpson_on_grid,
    TailAccumulator, TailOutcome,
};

/// Hard cap on moment orders; above this, f64 root extraction and factorial
/// deflation lose meaning faster than any caller can use them.
pub const MAX_MOMENT_ORDER: usize = 60;

const WEIGHT_SUM_TOL: f64 = 1e-12;
const GRID_MASS_TOL: f64 = 1e-9;
const NORMALIZE_TOL: f64 = 1e-12;
const NEGATIVE_CLAMP: f64 = 1e-12;
const SUPPORT_CUTOFF_REL: f64 = 1e-12;

/// One weighted point of an atomic measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

/// Density samples on the uniform grid x_j = a + j·(b-a)/(M-1), j = 0..M-1,
/// endpoints included. All grid integrals use one composite-Simpson rule;
/// probability-measure uses require the mass to be 1 within 1e-9, and
/// `normalize` produces that form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    pub a: f64,
    pub b: f64,
    pub samples: Vec<f64>,
}

impl GridDensity {
    pub fn new(a: f64, b: f64, samples: Vec<f64>) -> Result<Self> {
        let g = GridDensity { a, b, samples };
        g.validate_shape()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.samples.len() as f64 - 1.0)
    }

    pub fn point(&self, j: usize) -> f64 {
        self.a + j as f64 * self.step()
    }

    /// Total mass under the same quadrature rule the moments use; mixing
    /// rules would let a normalized density have a zeroth moment away
    /// from 1.
    pub fn mass(&self) -> f64 {
        simpson_on_grid(&self.samples, self.step())
    }

    fn validate_shape(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::validation("grid density needs at least 2 samples"));
        }
        if !(self.b > self.a) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::validation(format!(
                "grid interval [{}, {}] is not a finite interval with a < b",
                self.a, self.b
            )));
        }
        for (j, s) in self.samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::validation(format!("sample {j} is not finite")));
            }
            if *s < -NEGATIVE_CLAMP {
                return Err(Error::validation(format!(
                    "sample {j} is negative ({s}); densities must be nonnegative"
                )));
            }
        }
        Ok(())
    }

    /// Scales the samples by a common factor so the mass is 1 within
    /// 1e-12. Negative samples within the 1e-12 round-off band are clamped
    /// to zero first; an all-zero density has no normalization.
    pub fn normalize(&self) -> Result<GridDensity> {
        self.validate_shape()?;
        let mut samples = self.samples.clone();
        for s in &mut samples {
            if *s < 0.0 {
                *s = 0.0;
            }
        }
        let clamped = GridDensity { a: self.a, b: self.b, samples };
        let mass = clamped.mass();
        if mass <= 0.0 {
            return Err(Error::Degenerate(
                "density is identically zero; normalization is undefined".into(),
            ));
        }
        let mut out = clamped;
        for s in &mut out.samples {
            *s /= mass;
        }
        debug_assert!((out.mass() - 1.0).abs() <= NORMALIZE_TOL);
        Ok(out)
    }

    fn validate_as_measure(&self) -> Result<()> {
        self.validate_shape()?;
        let mass = self.mass();
        if (mass - 1.0).abs() > GRID_MASS_TOL {
            return Err(Error::validation(format!(
                "grid density integrates to {mass}, not 1; call normalize first"
            )));
        }
        Ok(())
    }
}

/// Closed-form density families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name")]
pub enum AnalyticFamily {
    /// Constant density 1/(b-a) on [a, b].
    Uniform { a: f64, b: f64 },
    /// Normal density with the given mean and standard deviation.
    Gaussian { mean: f64, stddev: f64 },
    /// Density 2ε²·x^{-3} on [ε, ∞): total mass 1, first moment 2ε, and no
    /// finite moment of order ≥ 2.
    HeavyTail { epsilon: f64 },
}

impl AnalyticFamily {
    fn validate(&self) -> Result<()> {
        match *self {
            AnalyticFamily::Uniform { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::validation(format!("uniform interval [{a}, {b}] needs a < b")));
                }
            }
            AnalyticFamily::Gaussian { mean, stddev } => {
                if !mean.is_finite() || !(stddev > 0.0) || !stddev.is_finite() {
                    return Err(Error::validation(format!(
                        "gaussian(mean={mean}, stddev={stddev}) needs a finite mean and stddev > 0"
                    )));
                }
            }
            AnalyticFamily::HeavyTail { epsilon } => {
                if !(epsilon > 0.0) || !epsilon.is_finite() {
                    return Err(Error::validation(format!("heavy tail needs epsilon > 0, got {epsilon}")));
                }
            }
        }
        Ok(())
    }

    /// Pointwise density value.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            AnalyticFamily::Uniform { a, b } => {
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            AnalyticFamily::Gaussian { mean, stddev } => {
                let z = (x - mean) / stddev;
                (-0.5 * z * z).exp() / (stddev * (2.0 * std::f64::consts::PI).sqrt())
            }
            AnalyticFamily::HeavyTail { epsilon } => {
                if x >= epsilon {
                    2.0 * epsilon * epsilon / (x * x * x)
                } else {
                    0.0
                }
            }
        }
    }

    /// Samples the density on [a, b] with m points and renormalizes, i.e.
    /// the restriction of the measure to the window. Degenerate when the
    /// window misses the support entirely.
    pub fn to_grid(&self, a: f64, b: f64, m: usize) -> Result<GridDensity> {
        self.validate()?;
        if m < 2 {
            return Err(Error::validation("grid needs at least 2 samples"));
        }
        if !(a < b) {
            return Err(Error::validation("grid window needs a < b"));
        }
        let h = (b - a) / (m as f64 - 1.0);
        // the last point must be b exactly: a + (m-1)·h can land one ulp
        // past it and read a support-boundary density as 0
        let samples: Vec<f64> = (0..m)
            .map(|j| self.density(if j == m - 1 { b } else { a + j as f64 * h }))
            .collect();
        GridDensity { a, b, samples }.normalize()
    }
}

impl std::fmt::Display for AnalyticFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            AnalyticFamily::Uniform { a, b } => write!(f, "Uniform[{a}, {b}]"),
            AnalyticFamily::Gaussian { mean, stddev } => write!(f, "Gaussian(mean={mean}, stddev={stddev})"),
            AnalyticFamily::HeavyTail { epsilon } => write!(f, "HeavyTail(epsilon={epsilon})"),
        }
    }
}

/// A probability measure in one of its three representations. The JSON form
/// is tagged by a "variant" field; analytic families add a "name" field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant")]
pub enum MeasureSpec {
    Atoms { atoms: Vec<Atom> },
    GridDensity(GridDensity),
    Analytic(AnalyticFamily),
}

impl MeasureSpec {
    pub fn atoms(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let m = MeasureSpec::Atoms {
            atoms: pairs.into_iter().map(|(location, weight)| Atom { location, weight }).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn grid(g: GridDensity) -> Result<Self> {
        let m = MeasureSpec::GridDensity(g);
        m.validate()?;
        Ok(m)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        let m = MeasureSpec::Analytic(AnalyticFamily::Uniform { a, b });
        m.validate()?;
        Ok(m)
    }

    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        let m = MeasureSpec::Analytic(AnalyticFamily::Gaussian { mean, stddev });
        m.validate()?;
        Ok(m)
    }

    pub fn heavy_tail(epsilon: f64) -> Result<Self> {
        let m = MeasureSpec::Analytic(AnalyticFamily::HeavyTail { epsilon });
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MeasureSpec::Atoms { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::validation("atomic measure needs at least one atom"));
                }
                let mut sum = 0.0;
                for (i, atom) in atoms.iter().enumerate() {
                    if !atom.location.is_finite() {
                        return Err(Error::validation(format!("atom {i} location is not finite")));
                    }
                    if !(atom.weight > 0.0) || atom.weight > 1.0 + WEIGHT_SUM_TOL {
                        return Err(Error::validation(format!(
                            "atom {i} weight {} is outside (0, 1]",
                            atom.weight
                        )));
                    }
                    if i > 0 && !(atom.location > atoms[i - 1].location) {
                        return Err(Error::validation(
                            "atom locations must be strictly increasing".to_string(),
                        ));
                    }
                    sum += atom.weight;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(Error::validation(format!("atom weights sum to {sum}, not 1")));
                }
                Ok(())
            }
            MeasureSpec::GridDensity(g) => g.validate_as_measure(),
            MeasureSpec::Analytic(f) => f.validate(),
        }
    }

    /// ∫ x^n dm with a Finite/Divergent verdict. Finite values carry
    /// absolute-or-relative error ≤ tol; Divergent entries carry NaN.
    pub fn moment(&self, n: usize, tol: f64) -> Result<(f64, MomentStatus)> {
        self.validate()?;
        check_order_and_tol(n, tol)?;
        Ok(self.moment_unchecked(n, tol))
    }

    fn moment_unchecked(&self, n: usize, tol: f64) -> (f64, MomentStatus) {
        match self {
            MeasureSpec::Atoms { atoms } => {
                let v = atoms.iter().map(|a| a.weight * a.location.powi(n as i32)).sum();
                (v, MomentStatus::Finite)
            }
            MeasureSpec::GridDensity(g) => {
                let h = g.step();
                let integrand: Vec<f64> =
                    g.samples.iter().enumerate().map(|(j, s)| s * g.point(j).powi(n as i32)).collect();
                (simpson_on_grid(&integrand, h), MomentStatus::Finite)
            }
            MeasureSpec::Analytic(family) => analytic_moment(*family, n, tol),
        }
    }

    /// Moments of orders 0..=max_order in one pass. Once an order is flagged
    /// Divergent every higher order is flagged without recomputation:
    /// ∫|x|^n dm ≥ ∫_{|x|>1} |x|^k dm for n ≥ k, so divergence is monotone
    /// in the order.
    pub fn moments_prefix(&self, max_order: usize, tol: f64) -> Result<MomentSequence> {
        self.validate()?;
        check_order_and_tol(max_order, tol)?;
        let mut entries = Vec::with_capacity(max_order + 1);
        let mut diverged = false;
        for n in 0..=max_order {
            if diverged {
                entries.push(MomentEntry { n, value: f64::NAN, status: MomentStatus::Divergent });
                continue;
            }
            let (value, status) = self.moment_unchecked(n, tol);
            if status == MomentStatus::Divergent {
                diverged = true;
            }
            entries.push(MomentEntry { n, value, status });
        }
        MomentSequence::new(entries, self.to_string())
    }

    /// Radius of the smallest closed ball around 0 containing the support.
    pub fn support_radius(&self) -> Result<SupportRadius> {
        self.validate()?;
        Ok(match self {
            MeasureSpec::Atoms { atoms } => SupportRadius::Bounded(
                atoms.iter().map(|a| a.location.abs()).fold(0.0, f64::max),
            ),
            MeasureSpec::GridDensity(g) => {
                let peak = g.samples.iter().cloned().fold(0.0, f64::max);
                let cutoff = SUPPORT_CUTOFF_REL * peak;
                let r = g
                    .samples
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| **s > cutoff)
                    .map(|(j, _)| g.point(j).abs())
                    .fold(0.0, f64::max);
                SupportRadius::Bounded(r)
            }
            MeasureSpec::Analytic(AnalyticFamily::Uniform { a, b }) => {
                SupportRadius::Bounded(a.abs().max(b.abs()))
            }
            MeasureSpec::Analytic(_) => SupportRadius::Unbounded,
        })
    }
}

impl std::fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasureSpec::Atoms { atoms } => write!(f, "Atoms(k={})", atoms.len()),
            MeasureSpec::GridDensity(g) => {
                write!(f, "GridDensity[{}, {}; M={}]", g.a, g.b, g.samples.len())
            }
            MeasureSpec::Analytic(fam) => fam.fmt(f),
        }
    }
}

/// Smallest bounding radius of a measure's support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SupportRadius {
    Bounded(f64),
    Unbounded,
}

/// Convergence verdict for one moment order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentStatus {
    Finite,
    Divergent,
}

impl std::fmt::Display for MomentStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentStatus::Finite => "Finite",
            MomentStatus::Divergent => "Divergent",
        })
    }
}

impl std::str::FromStr for MomentStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Finite" => Ok(MomentStatus::Finite),
            "Divergent" => Ok(MomentStatus::Divergent),
            other => Err(Error::validation(format!("unknown moment status {other:?}"))),
        }
    }
}

/// One row of a moment table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub n: usize,
    pub value: f64,
    pub status: MomentStatus,
}

/// A contiguous moment table m_0..m_N with per-order convergence status and
/// a human-readable provenance label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    entries: Vec<MomentEntry>,
    source: String,
}

impl MomentSequence {
    pub fn new(entries: Vec<MomentEntry>, source: impl Into<String>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::validation("moment sequence needs at least the order-0 entry"));
        }
        for (i, e) in entries.iter().enumerate() {
            if e.n != i {
                return Err(Error::validation(format!(
                    "moment orders must be contiguous from 0; entry {i} has order {}",
                    e.n
                )));
            }
            if e.status == MomentStatus::Finite && !e.value.is_finite() {
                return Err(Error::validation(format!(
                    "order {i} is marked Finite but its value is {}",
                    e.value
                )));
            }
        }
        let head = &entries[0];
        if head.status != MomentStatus::Finite || (head.value - 1.0).abs() > 1e-9 {
            return Err(Error::validation(format!(
                "order 0 must be Finite and equal 1 within 1e-9, got {} ({})",
                head.value, head.status
            )));
        }
        Ok(MomentSequence { entries, source: source.into() })
    }

    /// Builds an all-Finite sequence from raw values (order 0 first).
    pub fn from_values(values: &[f64], source: impl Into<String>) -> Result<Self> {
        let entries = values
            .iter()
            .enumerate()
            .map(|(n, &value)| MomentEntry { n, value, status: MomentStatus::Finite })
            .collect();
        MomentSequence::new(entries, source)
    }

    pub fn entries(&self) -> &[MomentEntry] {
        &self.entries
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Largest order in the table.
    pub fn horizon(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn value(&self, n: usize) -> Option<f64> {
        self.entries.get(n).and_then(|e| {
            if e.status == MomentStatus::Finite {
                Some(e.value)
            } else {
                None
            }
        })
    }

    pub fn status(&self, n: usize) -> Option<MomentStatus> {
        self.entries.get(n).map(|e| e.status)
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("n,value,status\n");
        for e in &self.entries {
            out.push_str(&format!("{},{},{}\n", e.n, e.value, e.status));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "n,value,status" => {}
            other => {
                return Err(Error::validation(format!(
                    "moment CSV must start with header 'n,value,status', got {other:?}"
                )))
            }
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::validation(format!("row {i} has {} fields, expected 3", fields.len())));
            }
            let n: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("row {i}: bad order {:?}", fields[0])))?;
            let value: f64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::validation(format!("row {i}: bad value {:?}", fields[1])))?;
            let status: MomentStatus = fields[2].trim().parse()?;
            entries.push(MomentEntry { n, value, status });
        }
        MomentSequence::new(entries, "csv import")
    }
}

/// L1 distance between two measures in a common representation: exact sum of
/// weight differences over the merged location set for atom pairs, the grid
/// quadrature of |p - q| for densities on an identical grid. Anything else
/// has no common grid and is a representation error.
pub fn l1_distance(p: &MeasureSpec, q: &MeasureSpec) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    match (p, q) {
        (MeasureSpec::Atoms { atoms: pa }, MeasureSpec::Atoms { atoms: qa }) => {
            let mut i = 0;
            let mut j = 0;
            let mut total = 0.0;
            while i < pa.len() || j < qa.len() {
                if j >= qa.len() || (i < pa.len() && pa[i].location < qa[j].location) {
                    total += pa[i].weight;
                    i += 1;
                } else if i >= pa.len() || qa[j].location < pa[i].location {
                    total += qa[j].weight;
                    j += 1;
                } else {
                    total += (pa[i].weight - qa[j].weight).abs();
                    i += 1;
                    j += 1;
                }
            }
            Ok(total)
        }
        (MeasureSpec::GridDensity(pg), MeasureSpec::GridDensity(qg)) => {
            if pg.a != qg.a || pg.b != qg.b || pg.samples.len() != qg.samples.len() {
                return Err(Error::Representation(format!(
                    "grids differ ([{}, {}; M={}] vs [{}, {}; M={}])",
                    pg.a,
                    pg.b,
                    pg.samples.len(),
                    qg.a,
                    qg.b,
                    qg.samples.len()
                )));
            }
            let diff: Vec<f64> =
                pg.samples.iter().zip(&qg.samples).map(|(x, y)| (x - y).abs()).collect();
            Ok(GridDensity { a: pg.a, b: pg.b, samples: diff }.mass())
        }
        _ => Err(Error::Representation(format!(
            "no common grid for {p} vs {q}; grid analytic families with to_grid first"
        ))),
    }
}

fn check_order_and_tol(n: usize, tol: f64) -> Result<()> {
    if n > MAX_MOMENT_ORDER {
        return Err(Error::AccuracyBudget(format!(
            "moment order {n} exceeds the cap {MAX_MOMENT_ORDER}"
        )));
    }
    if !(tol > 0.0) || !(tol < 1.0) {
        return Err(Error::validation(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Moment of an analytic family by quadrature. Uniform integrates exactly on
/// its interval; the unbounded families go through the interval-doubling
/// driver, accumulating the x > 0 and x < 0 contributions of |x|^n·ρ
/// separately in log space (moment existence is absolute integrability, and
/// log-magnitude accumulation keeps partial sums representable past 1e300).
fn analytic_moment(family: AnalyticFamily, n: usize, tol: f64) -> (f64, MomentStatus) {
    match family {
        AnalyticFamily::Uniform { a, b } => {
            let v = gl_integrate(|x| x.powi(n as i32), a, b) / (b - a);
            (v, MomentStatus::Finite)
        }
        AnalyticFamily::HeavyTail { epsilon } => {
            let log_f = |x: f64| {
                let base = (2.0 * epsilon * epsilon).ln() - 3.0 * x.ln();
                if n == 0 {
                    base
                } else {
                    base + n as f64 * x.ln()
                }
            };
            match improper_log_integral(log_f, epsilon, epsilon, tol) {
                TailOutcome::Converged(ln_v) => (ln_v.exp(), MomentStatus::Finite),
                TailOutcome::Divergent => (f64::NAN, MomentStatus::Divergent),
            }
        }
        AnalyticFamily::Gaussian { mean, stddev } => gaussian_moment(mean, stddev, n, tol),
    }
}

/// Gaussian moments over doubling windows centered at the mean, clipped at
/// x = 0 so each side is a single-signed integrand: m_n = I⁺ + (-1)^n·I⁻
/// with I^± = ∫ |x|^n ρ over the positive/negative half-line.
fn gaussian_moment(mean: f64, stddev: f64, n: usize, tol: f64) -> (f64, MomentStatus) {
    let log_rho = |x: f64| {
        let z = (x - mean) / stddev;
        -0.5 * z * z - (stddev * (2.0 * std::f64::consts::PI).sqrt()).ln()
    };
    let log_f = |x: f64| {
        if n == 0 {
            log_rho(x)
        } else if x == 0.0 {
            f64::NEG_INFINITY
        } else {
            log_rho(x) + n as f64 * x.abs().ln()
        }
    };
    let mut plus_ln = f64::NEG_INFINITY;
    let mut minus_ln = f64::NEG_INFINITY;
    let mut add_piece = |lo: f64, hi: f64| -> f64 {
        if hi <= lo {
            return f64::NEG_INFINITY;
        }
        let mut increment = f64::NEG_INFINITY;
        let mut accumulate = |lo: f64, hi: f64, side: &mut f64| {
            if hi > lo {
                let seg = gl_integrate_log(log_f, lo, hi);
                *side = logaddexp(*side, seg);
                increment = logaddexp(increment, seg);
            }
        };
        if lo >= 0.0 {
            accumulate(lo, hi, &mut plus_ln);
        } else if hi <= 0.0 {
            accumulate(lo, hi, &mut minus_ln);
        } else {
            accumulate(lo, 0.0, &mut minus_ln);
            accumulate(0.0, hi, &mut plus_ln);
        }
        increment
    };

    let width0 = 4.0 * stddev;
    let mut acc = TailAccumulator::new(tol);
    let mut outcome = acc.push(add_piece(mean - width0, mean + width0));
    let mut k = 0u32;
    while outcome.is_none() {
        let inner = width0 * 2f64.powi(k as i32);
        let outer = inner * 2.0;
        let right = add_piece(mean + inner, mean + outer);
        let left = add_piece(mean - outer, mean - inner);
        outcome = acc.push(logaddexp(right, left));
        k += 1;
    }
    match outcome.unwrap() {
        TailOutcome::Converged(_) => (signed_combine(plus_ln, minus_ln, n), MomentStatus::Finite),
        TailOutcome::Divergent => (f64::NAN, MomentStatus::Divergent),
    }
}

/// exp(plus_ln) + (-1)^n exp(minus_ln) assembled in log space.
fn signed_combine(plus_ln: f64, minus_ln: f64, n: usize) -> f64 {
    if n % 2 == 0 {
        logaddexp(plus_ln, minus_ln).exp()
    } else if plus_ln >= minus_ln {
        logsubexp(plus_ln, minus_ln).exp()
    } else {
        -logsubexp(minus_ln, plus_ln).exp()
    }
}
