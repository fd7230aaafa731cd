//! Zonal reference mapping on the Bilger mixture fraction.
//!
//! Cells are binned into mixture-fraction zones; the lowest cell id in
//! each zone becomes the zone's reference and is always solved
//! explicitly. Another cell in the zone skips its own solve when its
//! state is close enough to the reference, receiving the reference's
//! state increment instead. With zero tolerances only exact matches map,
//! so enabling the feature cannot change results.

use crate::kinetics::CompositionVector;
use std::collections::HashMap;

/// Tuning knobs for the mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefMapConfig {
    /// Number of mixture-fraction zones spanning [0, 1].
    pub z_bins: usize,
    /// Mixture-fraction similarity tolerance.
    pub eps_z: f64,
    /// Temperature similarity tolerance, K.
    pub eps_t: f64,
    pub enabled: bool,
}

impl Default for RefMapConfig {
    fn default() -> Self {
        RefMapConfig { z_bins: 16, eps_z: 1e-3, eps_t: 10.0, enabled: true }
    }
}

/// What happens to one cell this iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    SolveExplicit,
    /// Receive the increment of the named reference cell.
    MapFromReference { reference: u64 },
}

/// Per-cell zones and dispositions for one worker's cell set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZoneAssignment {
    /// Zone index per cell, parallel to the input order.
    pub zone: Vec<usize>,
    pub disposition: Vec<Disposition>,
    /// Reference cell id per zone; `None` for empty zones.
    pub zone_reference: Vec<Option<u64>>,
}

impl ZoneAssignment {
    pub fn explicit_count(&self) -> usize {
        self.disposition
            .iter()
            .filter(|d| matches!(d, Disposition::SolveExplicit))
            .count()
    }
}

/// Zone index for a mixture fraction: `floor(Z z_bins)` clamped to the
/// valid range so Z = 1 lands in the last zone.
#[inline]
pub fn zone_of(z: f64, z_bins: usize) -> usize {
    ((z * z_bins as f64) as usize).min(z_bins - 1)
}

/// Bin cells by mixture fraction and pick dispositions.
///
/// `cells` lists `(cell_id, Z, T)` per cell. The reference of a zone is
/// its lowest cell id. A non-reference cell maps iff its Z and T both
/// lie within the tolerances of the reference's; otherwise it solves
/// explicitly. A disabled config marks every cell solve-explicit.
pub fn assign_zones(cells: &[(u64, f64, f64)], config: &RefMapConfig) -> ZoneAssignment {
    assert!(config.z_bins >= 1);
    assert!(config.eps_z >= 0.0 && config.eps_t >= 0.0);
    let zone: Vec<usize> = cells.iter().map(|&(_, z, _)| {
        debug_assert!((0.0..=1.0).contains(&z), "Z = {z}");
        zone_of(z, config.z_bins)
    }).collect();

    let mut zone_reference: Vec<Option<u64>> = vec![None; config.z_bins];
    let mut ref_state: Vec<(f64, f64)> = vec![(0.0, 0.0); config.z_bins];
    if config.enabled {
        for (&(id, z, t), &zi) in cells.iter().zip(&zone) {
            match zone_reference[zi] {
                Some(prev) if prev <= id => {}
                _ => {
                    zone_reference[zi] = Some(id);
                    ref_state[zi] = (z, t);
                }
            }
        }
    }

    let disposition = cells
        .iter()
        .zip(&zone)
        .map(|(&(id, z, t), &zi)| match zone_reference[zi] {
            Some(reference) if reference != id => {
                let (zr, tr) = ref_state[zi];
                if (z - zr).abs() <= config.eps_z && (t - tr).abs() <= config.eps_t {
                    Disposition::MapFromReference { reference }
                } else {
                    Disposition::SolveExplicit
                }
            }
            _ => Disposition::SolveExplicit,
        })
        .collect();

    ZoneAssignment { zone, disposition, zone_reference }
}

/// The mapped state: the cell's own state plus the reference's
/// increment. When the two old states are bit-identical this is exactly
/// the reference's new state. Stored mass fractions are clipped to
/// [0, 1] and rescaled if they overshoot a unit sum, so the implied
/// species stays valid.
pub fn map_solution(
    phi_own: &CompositionVector,
    phi_ref_old: &CompositionVector,
    phi_ref_new: &CompositionVector,
) -> CompositionVector {
    let bitwise_equal = phi_own.t.to_bits() == phi_ref_old.t.to_bits()
        && phi_own.y.len() == phi_ref_old.y.len()
        && phi_own
            .y
            .iter()
            .zip(&phi_ref_old.y)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    if bitwise_equal {
        return phi_ref_new.clone();
    }
    let t = phi_own.t + (phi_ref_new.t - phi_ref_old.t);
    let mut y: Vec<f64> = phi_own
        .y
        .iter()
        .zip(&phi_ref_new.y)
        .zip(&phi_ref_old.y)
        .map(|((own, new), old)| (own + (new - old)).clamp(0.0, 1.0))
        .collect();
    let sum: f64 = y.iter().sum();
    if sum > 1.0 {
        for v in &mut y {
            *v /= sum;
        }
    }
    CompositionVector { t, y }
}

/// Build the full per-cell solution set from the explicit solves.
///
/// `states` holds every cell's pre-iteration state in the same order as
/// the `assign_zones` input; `explicit` maps solved cell ids to their
/// new states and must cover every solve-explicit cell. Panics on a
/// missing reference solution, which would break the module invariant
/// that references are always solved explicitly.
pub fn apply_mapping(
    assignment: &ZoneAssignment,
    cell_ids: &[u64],
    states: &[CompositionVector],
    explicit: &HashMap<u64, CompositionVector>,
) -> Vec<CompositionVector> {
    assert_eq!(cell_ids.len(), states.len());
    assert_eq!(cell_ids.len(), assignment.disposition.len());
    let index: HashMap<u64, usize> = cell_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    assignment
        .disposition
        .iter()
        .enumerate()
        .map(|(i, d)| match d {
            Disposition::SolveExplicit => explicit
                .get(&cell_ids[i])
                .unwrap_or_else(|| panic!("missing explicit solution for cell {}", cell_ids[i]))
                .clone(),
            Disposition::MapFromReference { reference } => {
                let ri = index[reference];
                let ref_new = explicit
                    .get(reference)
                    .unwrap_or_else(|| panic!("missing reference solution for cell {reference}"));
                map_solution(&states[i], &states[ri], ref_new)
            }
        })
        .collect()
}
