//! The 2D field: shear-layer initialization and the explicit mixing step.

use super::{HarnessError, RunConfig};
use crate::kinetics::{bilger_z, CompositionVector, KineticsError, Mechanism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;

/// The gathered 2D state. Cells are stored in `ix * ny + iy` order, so a
/// contiguous block of cell indices is a slab of constant-x lines; the
/// shear layer varies along x, which gives contiguous worker partitions
/// their uneven chemistry load.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub nx: usize,
    pub ny: usize,
    /// Grid spacing, m (square cells).
    pub h: f64,
    pub pressure: f64,
    pub cells: Vec<CompositionVector>,
    /// Cached Bilger mixture fraction per cell.
    pub z: Vec<f64>,
}

impl FieldState {
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        ix * self.ny + iy
    }

    /// Cell-center x coordinate, m.
    #[inline]
    pub fn x_of(&self, ix: usize) -> f64 {
        (ix as f64 + 0.5) * self.h
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn max_t(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.t))
    }

    /// Recompute the Z cache from the compositions.
    pub fn refresh_z(&mut self, m: &Mechanism) -> Result<(), KineticsError> {
        for (c, z) in self.cells.iter().zip(&mut self.z) {
            *z = bilger_z(m, &c.full_y())?.clamp(0.0, 1.0);
        }
        Ok(())
    }
}

/// Initialize the shear layer: Z(x) = (1 + tanh((x - L/2)/d))/2 with
/// d = L/20, compositions blended linearly between the mechanism's
/// streams, and a Gaussian temperature bump T(x) = T_base +
/// (T_peak - T_base) exp(-((x - L/2)/d)^2) centered on the interface so
/// ignition starts there. A small seeded per-cell noise (uniform in
/// [-t_noise, t_noise]) breaks the exact degeneracy of constant-x lines.
pub fn init_shear_layer(m: &Mechanism, config: &RunConfig) -> Result<FieldState, HarnessError> {
    config.validate()?;
    let (nx, ny) = (config.nx, config.ny);
    let l = config.domain_length;
    let h = l / nx as f64;
    let delta = l / 20.0;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut cells = Vec::with_capacity(nx * ny);
    for ix in 0..nx {
        let x = (ix as f64 + 0.5) * h;
        let s = (x - 0.5 * l) / delta;
        let z = 0.5 * (1.0 + s.tanh());
        let t_profile = config.t_base + (config.t_peak - config.t_base) * (-s * s).exp();
        let y_full: Vec<f64> = m
            .fuel_stream
            .iter()
            .zip(&m.oxidizer_stream)
            .map(|(f, o)| z * f + (1.0 - z) * o)
            .collect();
        for _ in 0..ny {
            let noise = if config.t_noise > 0.0 {
                rng.gen_range(-config.t_noise..=config.t_noise)
            } else {
                0.0
            };
            cells.push(CompositionVector::from_full(t_profile + noise, &y_full));
        }
    }
    let mut field = FieldState {
        nx,
        ny,
        h,
        pressure: config.pressure,
        z: vec![0.0; cells.len()],
        cells,
    };
    field.refresh_z(m)?;
    Ok(field)
}

/// Explicit 5-point Laplacian diffusion of T and the stored mass
/// fractions with zero-gradient boundaries. Sub-steps internally so the
/// per-direction diffusion number D dt_sub / h^2 stays at or below 0.25.
/// The implied species keeps the mass-fraction sum at one structurally.
pub fn mixing_step(
    field: &mut FieldState,
    m: &Mechanism,
    diffusivity: f64,
    dt: f64,
) -> Result<(), KineticsError> {
    assert!(diffusivity >= 0.0 && dt >= 0.0);
    if diffusivity == 0.0 || dt == 0.0 {
        return Ok(());
    }
    let h2 = field.h * field.h;
    let substeps = (diffusivity * dt / (0.25 * h2)).ceil().max(1.0) as usize;
    let r = diffusivity * (dt / substeps as f64) / h2;
    let (nx, ny) = (field.nx, field.ny);
    let n_stored = field.cells[0].y.len();

    let mut old: Vec<CompositionVector> = Vec::new();
    for _ in 0..substeps {
        old.clone_from(&field.cells);
        for ix in 0..nx {
            for iy in 0..ny {
                let i = ix * ny + iy;
                // Neumann boundaries: a missing neighbor mirrors the cell
                let xm = if ix > 0 { ix - 1 } else { ix } * ny + iy;
                let xp = if ix + 1 < nx { ix + 1 } else { ix } * ny + iy;
                let ym = ix * ny + if iy > 0 { iy - 1 } else { iy };
                let yp = ix * ny + if iy + 1 < ny { iy + 1 } else { iy };
                let lap = |f: &dyn Fn(&CompositionVector) -> f64| {
                    f(&old[xm]) + f(&old[xp]) + f(&old[ym]) + f(&old[yp]) - 4.0 * f(&old[i])
                };
                field.cells[i].t = old[i].t + r * lap(&|c| c.t);
                for k in 0..n_stored {
                    field.cells[i].y[k] = old[i].y[k] + r * lap(&|c| c.y[k]);
                }
            }
        }
    }
    field.refresh_z(m)
}

/// Write the field as CSV: `x, y, T, Z`, then one column per species.
pub fn write_field_csv(
    field: &FieldState,
    m: &Mechanism,
    path: &std::path::Path,
) -> Result<(), HarnessError> {
    let io_err = |source| HarnessError::Io { path: path.display().to_string(), source };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    let names: Vec<&str> = m.species.iter().map(|s| s.name.as_str()).collect();
    (|| {
        writeln!(out, "x,y,T,Z,{}", names.join(","))?;
        for ix in 0..field.nx {
            for iy in 0..field.ny {
                let i = field.idx(ix, iy);
                let c = &field.cells[i];
                write!(
                    out,
                    "{:.6e},{:.6e},{:.6e},{:.6e}",
                    field.x_of(ix),
                    (iy as f64 + 0.5) * field.h,
                    c.t,
                    field.z[i]
                )?;
                for y in c.full_y() {
                    write!(out, ",{y:.6e}")?;
                }
                writeln!(out)?;
            }
        }
        out.flush()
    })()
    .map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::parse_mechanism;

    fn small_config() -> RunConfig {
        let mut c = RunConfig::default();
        c.nx = 16;
        c.ny = 8;
        c.workers = 2;
        c.t_noise = 0.0;
        c
    }

    #[test]
    fn profile_center_and_edges() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = small_config();
        c.nx = 17; // odd: center cell sits exactly at L/2
        let f = init_shear_layer(&m, &c).unwrap();
        let mid = f.idx(8, 0);
        assert!((f.z[mid] - 0.5).abs() < 1e-12);
        assert!((f.cells[mid].t - c.t_peak).abs() < 1e-9);
        // far left is essentially pure oxidizer at the base temperature
        let left = f.idx(0, 0);
        assert!(f.z[left] < 1e-6);
        assert!((f.cells[left].t - c.t_base).abs() < 1e-6);
        let y_full = f.cells[left].full_y();
        for (y, o) in y_full.iter().zip(&m.oxidizer_stream) {
            assert!((y - o).abs() < 1e-6);
        }
    }

    #[test]
    fn z_profile_mirror_symmetry() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let c = small_config();
        let f = init_shear_layer(&m, &c).unwrap();
        for ix in 0..c.nx {
            let a = f.z[f.idx(ix, 0)];
            let b = f.z[f.idx(c.nx - 1 - ix, 0)];
            assert!((a + b - 1.0).abs() < 1e-12, "ix {ix}: {a} + {b}");
        }
    }

    #[test]
    fn uniform_field_is_a_fixed_point_of_mixing() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = small_config();
        c.t_peak = c.t_base; // flatten the bump
        let mut f = init_shear_layer(&m, &c).unwrap();
        // flatten composition too
        let uniform = f.cells[0].clone();
        for cell in &mut f.cells {
            *cell = uniform.clone();
        }
        let before = f.cells.clone();
        mixing_step(&mut f, &m, c.diffusivity, 1e-5).unwrap();
        assert_eq!(f.cells, before);
    }

    #[test]
    fn mixing_conserves_species_totals() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let c = small_config();
        let mut f = init_shear_layer(&m, &c).unwrap();
        let n_stored = f.cells[0].y.len();
        let totals_before: Vec<f64> = (0..n_stored)
            .map(|k| f.cells.iter().map(|c| c.y[k]).sum())
            .collect();
        let t_before: f64 = f.cells.iter().map(|c| c.t).sum();
        mixing_step(&mut f, &m, c.diffusivity, 2e-6).unwrap();
        for (k, &b) in totals_before.iter().enumerate() {
            let a: f64 = f.cells.iter().map(|c| c.y[k]).sum();
            if b.abs() > 0.0 {
                assert!((a - b).abs() / b.abs() < 1e-12, "species {k}: {a} vs {b}");
            }
        }
        let t_after: f64 = f.cells.iter().map(|c| c.t).sum();
        assert!((t_after - t_before).abs() / t_before < 1e-12);
    }

    #[test]
    fn hot_spot_spreads_symmetrically() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = small_config();
        c.nx = 9;
        c.ny = 9;
        c.t_peak = c.t_base;
        let mut f = init_shear_layer(&m, &c).unwrap();
        let uniform = f.cells[0].clone();
        for cell in &mut f.cells {
            *cell = uniform.clone();
        }
        let center = f.idx(4, 4);
        f.cells[center].t += 100.0;
        mixing_step(&mut f, &m, c.diffusivity, 1e-7).unwrap();
        let dt = |ix: usize, iy: usize| f.cells[f.idx(ix, iy)].t - uniform.t;
        let neighbors = [dt(3, 4), dt(5, 4), dt(4, 3), dt(4, 5)];
        for w in &neighbors[1..] {
            assert!((w - neighbors[0]).abs() < 1e-12);
        }
        assert!(neighbors[0] > 0.0);
    }

    #[test]
    fn cached_z_matches_recomputed_after_mixing() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let c = small_config();
        let mut f = init_shear_layer(&m, &c).unwrap();
        mixing_step(&mut f, &m, c.diffusivity, 2e-6).unwrap();
        for (cell, &z) in f.cells.iter().zip(&f.z) {
            let fresh = bilger_z(&m, &cell.full_y()).unwrap().clamp(0.0, 1.0);
            assert!((fresh - z).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_is_seeded_and_reproducible() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = small_config();
        c.t_noise = 0.5;
        let a = init_shear_layer(&m, &c).unwrap();
        let b = init_shear_layer(&m, &c).unwrap();
        assert_eq!(a, b);
        c.seed = 1;
        let d = init_shear_layer(&m, &c).unwrap();
        assert_ne!(a, d);
    }
}
