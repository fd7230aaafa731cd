//! Exact and finite-difference Jacobians of the reactor right-hand side.
//!
//! The analytical Jacobian differentiates the full chain: density and
//! concentrations through (T, Y), Arrhenius forward rates and
//! thermodynamic reverse rates through T, third-body factors through Y,
//! mixture heat capacity and molar enthalpies through T, and the implied
//! last mass fraction `Y_N = 1 - sum Y_i`.

use super::rates::{concentrations, rhs_state, thermo_tables, RateWorkspace};
use super::{CompositionVector, KineticsError, Mechanism, P_ATM, R_UNIVERSAL};
use crate::dense::DenseMatrix;

#[inline]
fn powu(x: f64, n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        2 => x * x,
        _ => x.powi(n as i32),
    }
}

/// d(prod_i c_i^nu_i)/dc_k for one side of a reaction, written as sparse
/// (index, value) pushes into `dq_dc`, scaled by `scale`.
fn side_derivatives(
    stoich: &[(usize, u32)],
    conc: &[f64],
    scale: f64,
    dq_dc: &mut [f64],
) {
    for (slot, &(i, n)) in stoich.iter().enumerate() {
        let mut d = scale * n as f64 * powu(conc[i], n - 1);
        for (other, &(j, m)) in stoich.iter().enumerate() {
            if other != slot {
                d *= powu(conc[j], m);
            }
        }
        dq_dc[i] += d;
    }
}

/// Exact Jacobian of the right-hand side with respect to the state
/// `[T, Y_1..Y_{N-1}]`, written into `out` (state_dim x state_dim).
pub(crate) fn analytical_jacobian_state(
    m: &Mechanism,
    state: &[f64],
    p: f64,
    ws: &mut RateWorkspace,
    out: &mut DenseMatrix,
) -> Result<(), KineticsError> {
    let n = m.n_species();
    let t = state[0];
    if !(t > 0.0) {
        return Err(KineticsError::Invalid(format!("non-positive temperature {t}")));
    }
    let rho = concentrations(m, state, p, ws);
    {
        let RateWorkspace { cp, h, s, dcp, .. } = ws;
        thermo_tables(m, t, Some(cp), h, s, Some(dcp))?;
    }
    // S = sum_k max(Y_k,0)/W_k appears in the density derivative.
    let s_sum = p / (R_UNIVERSAL * t * rho);
    let w_last = m.species[n - 1].molecular_weight;
    for j in 0..n - 1 {
        let wj = m.species[j].molecular_weight;
        ws.drho_dy[j] = -(rho / s_sum) * (ws.dclip[j] / wj - ws.dclip[n - 1] / w_last);
    }

    ws.wdot.fill(0.0);
    ws.dwdot_dc.fill(0.0);
    ws.dwdot_dt.fill(0.0);

    for r in &m.reactions {
        let kf = r.a_si * t.powf(r.b) * (-r.t_act / t).exp();
        let dkf_dt = kf * (r.b + r.t_act / t) / t;
        let mut prod_f = 1.0;
        for &(i, nu) in &r.reactants {
            prod_f *= powu(ws.conc[i], nu);
        }
        let (kr, dkr_dt, prod_r) = if r.reversible {
            let c0 = P_ATM / (R_UNIVERSAL * t);
            let kc = super::rates::equilibrium_kc(r, t, &ws.h, &ws.s, c0);
            let kr = kf / kc;
            let mut dh = 0.0;
            for &(i, nu) in &r.products {
                dh += nu as f64 * ws.h[i];
            }
            for &(i, nu) in &r.reactants {
                dh -= nu as f64 * ws.h[i];
            }
            let dlnkc_dt = dh / (R_UNIVERSAL * t * t) - r.delta_nu as f64 / t;
            let dkr = kr * (dkf_dt / kf - dlnkc_dt);
            let mut prod_r = 1.0;
            for &(i, nu) in &r.products {
                prod_r *= powu(ws.conc[i], nu);
            }
            (kr, dkr, prod_r)
        } else {
            (0.0, 0.0, 0.0)
        };

        let q_net = kf * prod_f - kr * prod_r;
        let m_factor = match &r.third_body {
            Some(eff) => eff.iter().zip(&ws.conc).map(|(e, c)| e * c).sum(),
            None => 1.0,
        };
        let q_total = m_factor * q_net;

        // dQ/dc_k with the rate constants held fixed.
        ws.dq_dc.fill(0.0);
        side_derivatives(&r.reactants, &ws.conc, m_factor * kf, &mut ws.dq_dc);
        if r.reversible {
            side_derivatives(&r.products, &ws.conc, -m_factor * kr, &mut ws.dq_dc);
        }
        if let Some(eff) = &r.third_body {
            for k in 0..n {
                ws.dq_dc[k] += eff[k] * q_net;
            }
        }
        // Explicit temperature dependence through k_f and k_r.
        let dq_dt = m_factor * (dkf_dt * prod_f - dkr_dt * prod_r);

        for &(i, nu) in &r.products {
            let nu = nu as f64;
            ws.wdot[i] += nu * q_total;
            ws.dwdot_dt[i] += nu * dq_dt;
            let row = ws.dwdot_dc.row_mut(i);
            for k in 0..n {
                row[k] += nu * ws.dq_dc[k];
            }
        }
        for &(i, nu) in &r.reactants {
            let nu = nu as f64;
            ws.wdot[i] -= nu * q_total;
            ws.dwdot_dt[i] -= nu * dq_dt;
            let row = ws.dwdot_dc.row_mut(i);
            for k in 0..n {
                row[k] -= nu * ws.dq_dc[k];
            }
        }
    }

    // Chain through the concentrations: dc_k/dT = -c_k/T and
    // dc_k/dY_j = (c_k/rho) drho_dy_j + (rho/W_k) d(clip Y_k)/dY_j.
    for i in 0..n {
        let row = ws.dwdot_dc.row(i);
        let mut u = 0.0;
        let mut ct = 0.0;
        for k in 0..n {
            u += row[k] * ws.conc[k];
            ct += row[k] * ws.conc[k];
        }
        ws.chain_u[i] = u / rho;
        ws.dwdot_dt[i] -= ct / t;
    }

    // Energy equation pieces.
    let mut cp_mass = 0.0;
    let mut dcpm_dt = 0.0;
    let mut num = 0.0;
    let mut dnum_dt = 0.0;
    for i in 0..n {
        let w = m.species[i].molecular_weight;
        cp_mass += ws.yfull[i] * ws.cp[i] / w;
        dcpm_dt += ws.yfull[i] * ws.dcp[i] / w;
        num += ws.h[i] * ws.wdot[i];
        dnum_dt += ws.cp[i] * ws.wdot[i] + ws.h[i] * ws.dwdot_dt[i];
    }
    let den = rho * cp_mass;
    let dden_dt = -(rho / t) * cp_mass + rho * dcpm_dt;
    out[(0, 0)] = -(dnum_dt * den - num * dden_dt) / (den * den);

    let cp_last = ws.cp[n - 1] / w_last;
    for j in 0..n - 1 {
        let wj = m.species[j].molecular_weight;
        let mut dnum = 0.0;
        for i in 0..n {
            // dwdot_i/dY_j
            let a_ij = ws.dwdot_dc.row(i)[j];
            let a_in = ws.dwdot_dc.row(i)[n - 1];
            let d = ws.drho_dy[j] * ws.chain_u[i] + a_ij * (rho / wj) * ws.dclip[j]
                - a_in * (rho / w_last) * ws.dclip[n - 1];
            dnum += ws.h[i] * d;
        }
        let dden = ws.drho_dy[j] * cp_mass + rho * (ws.cp[j] / wj - cp_last);
        out[(0, 1 + j)] = -(dnum * den - num * dden) / (den * den);
    }

    for i in 0..n - 1 {
        let wi = m.species[i].molecular_weight;
        out[(1 + i, 0)] = wi * (ws.dwdot_dt[i] + ws.wdot[i] / t) / rho;
        for j in 0..n - 1 {
            let wj = m.species[j].molecular_weight;
            let a_ij = ws.dwdot_dc.row(i)[j];
            let a_in = ws.dwdot_dc.row(i)[n - 1];
            let dwdot = ws.drho_dy[j] * ws.chain_u[i] + a_ij * (rho / wj) * ws.dclip[j]
                - a_in * (rho / w_last) * ws.dclip[n - 1];
            out[(1 + i, 1 + j)] = wi * (dwdot - ws.wdot[i] * ws.drho_dy[j] / rho) / rho;
        }
    }
    Ok(())
}

/// Fully analytical Jacobian `J_ij = df_i/dphi_j` of the reactor ODE.
pub fn analytical_jacobian(
    m: &Mechanism,
    phi: &CompositionVector,
    p: f64,
) -> Result<DenseMatrix, KineticsError> {
    let mut ws = RateWorkspace::new(m);
    let mut out = DenseMatrix::zeros(m.state_dim());
    analytical_jacobian_state(m, &phi.to_state(), p, &mut ws, &mut out)?;
    Ok(out)
}

/// Central finite-difference Jacobian with per-component step
/// `max(eta |phi_j|, eta * abstol_floor)`, written into `out`.
/// Returns the number of right-hand-side evaluations (always `2 n`).
pub(crate) fn fd_jacobian_state(
    m: &Mechanism,
    state: &[f64],
    p: f64,
    eta: f64,
    abstol_floor: f64,
    ws: &mut RateWorkspace,
    out: &mut DenseMatrix,
) -> Result<usize, KineticsError> {
    let n = m.state_dim();
    let mut pert = state.to_vec();
    let mut f_plus = vec![0.0; n];
    let mut f_minus = vec![0.0; n];
    let mut evals = 0;
    for j in 0..n {
        let step = (eta * state[j].abs()).max(eta * abstol_floor);
        pert[j] = state[j] + step;
        rhs_state(m, &pert, p, ws, &mut f_plus)?;
        pert[j] = state[j] - step;
        rhs_state(m, &pert, p, ws, &mut f_minus)?;
        pert[j] = state[j];
        evals += 2;
        for i in 0..n {
            out[(i, j)] = (f_plus[i] - f_minus[i]) / (2.0 * step);
        }
    }
    Ok(evals)
}

/// Central finite-difference Jacobian with relative step `eta`
/// (default 1e-6) floored at `eta * abstol_floor` per component.
pub fn fd_jacobian(
    m: &Mechanism,
    phi: &CompositionVector,
    p: f64,
    eta: f64,
    abstol_floor: f64,
) -> Result<DenseMatrix, KineticsError> {
    Ok(fd_jacobian_counted(m, phi, p, eta, abstol_floor)?.0)
}

/// Like [`fd_jacobian`], additionally reporting the number of rhs
/// evaluations spent (exactly `2 n`).
pub fn fd_jacobian_counted(
    m: &Mechanism,
    phi: &CompositionVector,
    p: f64,
    eta: f64,
    abstol_floor: f64,
) -> Result<(DenseMatrix, usize), KineticsError> {
    let mut ws = RateWorkspace::new(m);
    let mut out = DenseMatrix::zeros(m.state_dim());
    let evals = fd_jacobian_state(m, &phi.to_state(), p, eta, abstol_floor, &mut ws, &mut out)?;
    Ok((out, evals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::parse_mechanism;

    /// Largest element error between two Jacobians, scaled per column by
    /// the column's max-abs entry.
    pub(crate) fn column_scaled_error(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        let n = a.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut scale = 0.0f64;
            for i in 0..n {
                scale = scale.max(b[(i, j)].abs()).max(a[(i, j)].abs());
            }
            if scale == 0.0 {
                continue;
            }
            for i in 0..n {
                worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn linear_chain_species_block_is_rate_matrix() {
        // Isothermal A -> B, first order, zero enthalpy: the species
        // block of J is the constant rate matrix.
        let m = parse_mechanism(
            "ELEMENTS\nX 10.0\nSPECIES\n\
             A X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             C X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             REACTIONS\nA => B  3.0 0 0\nB => C  7.0 0 0\n",
        )
        .unwrap();
        let phi = CompositionVector { t: 1000.0, y: vec![0.5, 0.3] };
        let j = analytical_jacobian(&m, &phi, 101325.0).unwrap();
        // dY_A/dt = -3 Y_A ; dY_B/dt = 3 Y_A - 7 Y_B (equal weights).
        assert!((j[(1, 1)] - (-3.0)).abs() < 1e-10);
        assert!(j[(1, 2)].abs() < 1e-10);
        assert!((j[(2, 1)] - 3.0).abs() < 1e-10);
        assert!((j[(2, 2)] - (-7.0)).abs() < 1e-10);
        // zero heat release: temperature row vanishes
        assert!(j[(0, 0)].abs() < 1e-12);
        assert!(j[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn spectator_species_column_is_zero_when_decoupled() {
        // D takes no part in any reaction; with equal molecular weights
        // and identical thermo the density/heat-capacity coupling of its
        // column cancels, so the species-block entries are zero.
        let m = parse_mechanism(
            "ELEMENTS\nX 10.0\nSPECIES\n\
             A X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             D X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             REACTIONS\nA => B  3.0 0 0\n",
        )
        .unwrap();
        let phi = CompositionVector { t: 1000.0, y: vec![0.5, 0.2] };
        let j = analytical_jacobian(&m, &phi, 101325.0).unwrap();
        // column of Y_D (state column 2), species rows
        assert!(j[(1, 2)].abs() < 1e-12, "dfA/dYD = {}", j[(1, 2)]);
        assert!(j[(2, 2)].abs() < 1e-12, "dfD/dYD = {}", j[(2, 2)]);
    }

    #[test]
    fn matches_finite_difference_on_h2_air() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let states = crate::kinetics::test_states::random_h2_air_states(&m, 20, 7);
        for phi in &states {
            let ja = analytical_jacobian(&m, phi, 101325.0).unwrap();
            let jf = fd_jacobian(&m, phi, 101325.0, 1e-6, 1e-8).unwrap();
            let err = column_scaled_error(&ja, &jf);
            assert!(err < 1e-5, "scaled error {err} at T={}", phi.t);
        }
    }

    #[test]
    fn fd_cost_is_two_n_rhs_evals() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let phi = CompositionVector {
            t: 1500.0,
            y: crate::kinetics::test_states::stoich_h2_air(&m),
        };
        let (_, evals) = fd_jacobian_counted(&m, &phi, 101325.0, 1e-6, 1e-8).unwrap();
        assert_eq!(evals, 2 * m.state_dim());
    }

    #[test]
    fn fd_of_zero_rhs_is_zero() {
        let m = parse_mechanism(
            "ELEMENTS\nX 10.0\nSPECIES\n\
             A X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n",
        )
        .unwrap();
        let phi = CompositionVector { t: 900.0, y: vec![0.4] };
        let j = fd_jacobian(&m, &phi, 101325.0, 1e-6, 1e-8).unwrap();
        assert_eq!(j.max_abs(), 0.0);
    }
}
