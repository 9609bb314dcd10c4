//! Scenario runner for the two-bump phase sweep: builds ψ_δ for each phase,
//! tabulates position and momentum moments, and checks the full set of
//! interference assertions: moments blind to δ, distributions not.
//!
//! The runner is deterministic: no randomness enters, and the report is a
//! pure function of the configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{l1_distance, GridDensity, MeasureSpec, MomentSequence};
use crate::moments::{classify_determinacy, DeterminacyClass, DeterminacyVerdict};
use crate::wavefunction::{
    bump, cross_term_identity_residual, momentum_distribution, momentum_moment, superpose,
    BumpSpec, Route, SampledWave, MAX_P_MOMENT_ORDER,
};

/// Hard ceiling on the cross-term identity defect at every phase; pure
/// transform numerics, independent of the configured tolerances.
pub const CROSS_TERM_TOL: f64 = 1e-6;

/// Factor between the moment-invariance tolerance and the distribution
/// separation it must coexist with: the sweep only counts as interference
/// if some pair of momentum distributions is 1000× farther apart than any
/// moment moved.
pub const SEPARATION_FACTOR: f64 = 1000.0;

/// Full description of one sweep. Deserializes from JSON with every field
/// optional (missing fields take the defaults below).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub bump1: BumpSpec,
    pub bump2: BumpSpec,
    pub a: f64,
    pub b: f64,
    pub samples: usize,
    pub deltas: Vec<f64>,
    pub max_order: usize,
    pub invariance_tol: f64,
    pub two_route_tol: f64,
}

impl Default for ScenarioConfig {
    /// Two unit bumps of half-width 1 centered at ∓2 (gap 2 ≫ one grid
    /// cell) on [-16, 16] with M = 4096, eight equispaced phases in
    /// [0, 2π), moments through order 8.
    fn default() -> Self {
        ScenarioConfig {
            bump1: BumpSpec::new(-2.0, 1.0, 0.0),
            bump2: BumpSpec::new(2.0, 1.0, 0.0),
            a: -16.0,
            b: 16.0,
            samples: 4096,
            deltas: (0..8).map(|k| k as f64 * std::f64::consts::FRAC_PI_4).collect(),
            max_order: MAX_P_MOMENT_ORDER,
            invariance_tol: 1e-6,
            two_route_tol: 1e-4,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_order > MAX_P_MOMENT_ORDER {
            return Err(Error::validation(format!(
                "max moment order {} exceeds the cap {MAX_P_MOMENT_ORDER}",
                self.max_order
            )));
        }
        if self.deltas.is_empty() {
            return Err(Error::validation("phase list must not be empty".to_string()));
        }
        if self.deltas.iter().any(|d| !d.is_finite()) {
            return Err(Error::validation("phases must be finite".to_string()));
        }
        for (name, tol) in [("invariance_tol", self.invariance_tol), ("two_route_tol", self.two_route_tol)] {
            if !(tol > 0.0) || !(tol < 1.0) {
                return Err(Error::validation(format!("{name} must lie in (0, 1), got {tol}")));
            }
        }
        // grid shape and support containment checked by the bump builder;
        // disjointness checked by the superposition. Build once to surface
        // those errors at validation time.
        let phi1 = bump(self.bump1, self.a, self.b, self.samples)?;
        let phi2 = bump(self.bump2, self.a, self.b, self.samples)?;
        superpose(&phi1, &phi2, 0.0)?;
        Ok(())
    }
}

/// Grid and sweep parameters the report was generated with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub domain: [f64; 2],
    pub samples: usize,
    pub delta_count: usize,
    pub max_order: usize,
    pub version: String,
}

/// One pairwise distance between momentum distributions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Entry {
    pub delta_a: f64,
    pub delta_b: f64,
    pub distance: f64,
}

/// Everything the sweep measured. The position-moment table is computed
/// once: the position densities are δ-invariant to the bit (checked and
/// reported as `position_density_residual`), so per-δ tables would repeat
/// it; the CSV export still emits one row per (δ, n) for auditability.
#[derive(Clone, Debug, Serialize)]
pub struct InterferenceReport {
    pub metadata: ReportMetadata,
    pub deltas: Vec<f64>,
    /// Position moments 0..=N (identical for every δ).
    pub q_moments: Vec<f64>,
    /// Momentum moments 0..=N per δ, momentum-space route.
    pub p_moments: Vec<Vec<f64>>,
    /// Max over δ of sup_x |ρ_δ(x) - ρ_0(x)|.
    pub position_density_residual: f64,
    /// Max over δ of |m_n(P, ψ_δ) - m_n(P, ψ_0)| per order.
    pub p_invariance_residual: Vec<f64>,
    /// Max over δ of |m_n(P, ψ_δ) - ½m_n(P, φ₁) - ½m_n(P, φ₂)| per order.
    pub split_residual: Vec<f64>,
    /// Max over δ of the position-route vs momentum-route gap per order.
    pub two_route_residual: Vec<f64>,
    /// Cross-term identity defect per δ.
    pub cross_term_residuals: Vec<f64>,
    /// All pairwise distances between momentum distributions.
    pub l1_distances: Vec<L1Entry>,
    /// Distance for the (0, π) pair when both phases are present, else the
    /// largest pairwise distance; absent for a single-phase sweep.
    pub headline_l1: Option<f64>,
    /// Determinacy classification of each δ's momentum moment sequence.
    pub verdicts: Vec<DeterminacyVerdict>,
    #[serde(skip)]
    momentum_densities: Vec<GridDensity>,
}

impl InterferenceReport {
    /// Momentum distributions per δ (CSV payload; not part of the JSON).
    pub fn momentum_densities(&self) -> &[GridDensity] {
        &self.momentum_densities
    }
}

/// Runs the sweep and enforces the scenario assertions:
/// (a) position densities δ-invariant, (b) momentum moments δ-invariant and
/// equal to the half-half split, (c) some pair of momentum distributions
/// separated by more than 1000× the invariance tolerance, (d) cross-term
/// identity within 1e-6 at every δ, (e) no momentum distribution classified
/// as compactly supported. Any violation is a scenario-contradiction error
/// naming the quantity.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<InterferenceReport> {
    cfg.validate()?;
    let n_orders = cfg.max_order + 1;
    let phi1 = bump(cfg.bump1, cfg.a, cfg.b, cfg.samples)?;
    let phi2 = bump(cfg.bump2, cfg.a, cfg.b, cfg.samples)?;
    let psis: Vec<SampledWave> =
        cfg.deltas.iter().map(|&d| superpose(&phi1, &phi2, d)).collect::<Result<_>>()?;

    // (a) position densities must agree sample-wise across the sweep
    let densities_x: Vec<GridDensity> =
        psis.iter().map(|p| p.position_density()).collect::<Result<_>>()?;
    let mut position_density_residual = 0.0f64;
    for d in &densities_x[1..] {
        let sup = d
            .samples
            .iter()
            .zip(&densities_x[0].samples)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        position_density_residual = position_density_residual.max(sup);
    }
    if position_density_residual > cfg.invariance_tol {
        return Err(Error::contradiction(
            "position density invariance",
            format!(
                "sup deviation {position_density_residual} exceeds {}",
                cfg.invariance_tol
            ),
        ));
    }

    // position moments once, from the shared density
    let q_seq =
        MeasureSpec::grid(densities_x[0].clone())?.moments_prefix(cfg.max_order, 1e-9)?;
    let q_moments: Vec<f64> = q_seq.entries().iter().map(|e| e.value).collect();

    // momentum moments per δ by both routes
    let mut p_moments: Vec<Vec<f64>> = Vec::with_capacity(psis.len());
    let mut two_route_residual = vec![0.0f64; n_orders];
    for psi in &psis {
        let mut row = Vec::with_capacity(n_orders);
        for n in 0..n_orders {
            let mk = momentum_moment(psi, n, Route::MomentumSpace)?;
            let mp = momentum_moment(psi, n, Route::PositionSpace)?;
            let gap = (mk - mp).abs();
            two_route_residual[n] = two_route_residual[n].max(gap);
            if gap > cfg.two_route_tol * (1.0 + mk.abs().max(mp.abs())) {
                return Err(Error::contradiction(
                    "two-route agreement",
                    format!("order {n}: momentum-space {mk} vs position-space {mp}"),
                ));
            }
            row.push(mk);
        }
        p_moments.push(row);
    }

    // (b) δ-invariance and the half-half split of the momentum moments
    let mut p_invariance_residual = vec![0.0f64; n_orders];
    for row in &p_moments[1..] {
        for (n, (v, v0)) in row.iter().zip(&p_moments[0]).enumerate() {
            let dev = (v - v0).abs();
            p_invariance_residual[n] = p_invariance_residual[n].max(dev);
            if dev > cfg.invariance_tol * (1.0 + v0.abs()) {
                return Err(Error::contradiction(
                    "momentum moment invariance",
                    format!("order {n}: {v} at some δ vs {v0} at δ = {}", cfg.deltas[0]),
                ));
            }
        }
    }
    let mut split_residual = vec![0.0f64; n_orders];
    for n in 0..n_orders {
        let half_half = 0.5 * momentum_moment(&phi1, n, Route::MomentumSpace)?
            + 0.5 * momentum_moment(&phi2, n, Route::MomentumSpace)?;
        for row in &p_moments {
            let dev = (row[n] - half_half).abs();
            split_residual[n] = split_residual[n].max(dev);
            if dev > cfg.invariance_tol * (1.0 + half_half.abs()) {
                return Err(Error::contradiction(
                    "split identity",
                    format!("order {n}: {} vs ½+½ value {half_half}", row[n]),
                ));
            }
        }
    }

    // (c) the momentum distributions themselves must separate
    let momentum_densities: Vec<GridDensity> =
        psis.iter().map(momentum_distribution).collect::<Result<_>>()?;
    let as_measures: Vec<MeasureSpec> = momentum_densities
        .iter()
        .map(|g| MeasureSpec::grid(g.clone()))
        .collect::<Result<_>>()?;
    let mut l1_distances = Vec::new();
    let mut max_pair = 0.0f64;
    let mut zero_pi: Option<f64> = None;
    for i in 0..as_measures.len() {
        for j in (i + 1)..as_measures.len() {
            let distance = l1_distance(&as_measures[i], &as_measures[j])?;
            max_pair = max_pair.max(distance);
            let (da, db) = (cfg.deltas[i], cfg.deltas[j]);
            if (da.min(db)).abs() <= 1e-12 && (da.max(db) - std::f64::consts::PI).abs() <= 1e-12 {
                zero_pi = Some(distance);
            }
            l1_distances.push(L1Entry { delta_a: da, delta_b: db, distance });
        }
    }
    let headline_l1 = if l1_distances.is_empty() { None } else { Some(zero_pi.unwrap_or(max_pair)) };
    if !l1_distances.is_empty() && max_pair <= SEPARATION_FACTOR * cfg.invariance_tol {
        return Err(Error::contradiction(
            "l1 separation",
            format!(
                "largest pairwise distance {max_pair} does not exceed {} × {}",
                SEPARATION_FACTOR, cfg.invariance_tol
            ),
        ));
    }

    // (d) cross-term identity at every δ
    let mut cross_term_residuals = Vec::with_capacity(cfg.deltas.len());
    for &delta in &cfg.deltas {
        let r = cross_term_identity_residual(&phi1, &phi2, delta)?;
        if r > CROSS_TERM_TOL {
            return Err(Error::contradiction(
                "cross-term identity",
                format!("residual {r} at δ = {delta} exceeds {CROSS_TERM_TOL}"),
            ));
        }
        cross_term_residuals.push(r);
    }

    // (e) momentum distributions live on the whole line: their moment
    // sequences must never classify as compactly supported
    let mut verdicts = Vec::with_capacity(cfg.deltas.len());
    for (row, &delta) in p_moments.iter().zip(&cfg.deltas) {
        let seq = MomentSequence::from_values(row, format!("momentum sweep δ = {delta}"))?;
        let verdict = classify_determinacy(&seq)?;
        if verdict.class == DeterminacyClass::CompactSupport {
            return Err(Error::contradiction(
                "determinacy class",
                format!("momentum distribution at δ = {delta} classified as compactly supported"),
            ));
        }
        verdicts.push(verdict);
    }

    Ok(InterferenceReport {
        metadata: ReportMetadata {
            domain: [cfg.a, cfg.b],
            samples: cfg.samples,
            delta_count: cfg.deltas.len(),
            max_order: cfg.max_order,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        deltas: cfg.deltas.clone(),
        q_moments,
        p_moments,
        position_density_residual,
        p_invariance_residual,
        split_residual,
        two_route_residual,
        cross_term_residuals,
        l1_distances,
        headline_l1,
        verdicts,
        momentum_densities,
    })
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })
}

/// Writes `report.json`, `moments_Q.csv`, `moments_P.csv` (rows
/// `delta,n,value`), and one `momentum_density_<δ>.csv` (rows `k,value`)
/// per phase into `dir`, creating it if needed. Byte-deterministic for a
/// fixed report. Returns the written paths.
pub fn export_report(report: &InterferenceReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)
        .map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    let mut written = Vec::new();

    let json_path = dir.join("report.json");
    let mut json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Validation(format!("report serialization failed: {e}")))?;
    json.push('\n');
    write_file(&json_path, &json)?;
    written.push(json_path);

    let mut q_csv = String::from("delta,n,value\n");
    for &delta in &report.deltas {
        for (n, v) in report.q_moments.iter().enumerate() {
            q_csv.push_str(&format!("{delta},{n},{v}\n"));
        }
    }
    let q_path = dir.join("moments_Q.csv");
    write_file(&q_path, &q_csv)?;
    written.push(q_path);

    let mut p_csv = String::from("delta,n,value\n");
    for (row, &delta) in report.p_moments.iter().zip(&report.deltas) {
        for (n, v) in row.iter().enumerate() {
            p_csv.push_str(&format!("{delta},{n},{v}\n"));
        }
    }
    let p_path = dir.join("moments_P.csv");
    write_file(&p_path, &p_csv)?;
    written.push(p_path);

    for (density, &delta) in report.momentum_densities.iter().zip(&report.deltas) {
        let mut csv = String::from("k,value\n");
        for (j, v) in density.samples.iter().enumerate() {
            csv.push_str(&format!("{},{v}\n", density.point(j)));
        }
        let path = dir.join(format!("momentum_density_{delta:.4}.csv"));
        write_file(&path, &csv)?;
        written.push(path);
    }
    Ok(written)
}
