//! Density-matrix reference for a single entanglement swap.
//!
//! Qubits are ordered `1 2 3 4` (qubit 1 is the most significant bit). Pair
//! `(1,2)` and pair `(3,4)` start in isotropic states; qubits 2 and 3 are
//! measured in the Bell basis and qubit 4 receives the Pauli correction that
//! maps the outcome back to `|phi+>`. The returned fidelity is the
//! outcome-averaged overlap of the corrected `(1,4)` state with `|phi+>`.
//! Everything is real, so plain `f64` arrays suffice.

type Mat4 = [[f64; 4]; 4];

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `|phi+>`, `|phi->`, `|psi+>`, `|psi->` over basis `|00>, |01>, |10>, |11>`.
const BELL: [[f64; 4]; 4] = [
    [H, 0.0, 0.0, H],
    [H, 0.0, 0.0, -H],
    [0.0, H, H, 0.0],
    [0.0, H, -H, 0.0],
];

const I2: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
const X2: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
const Z2: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
/// `Z X`, equal to `i Y`; the global phase drops out of `U rho U^dagger`.
const ZX2: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// Correction on qubit 4 for each Bell outcome, in [`BELL`] order.
const CORRECTIONS: [[[f64; 2]; 2]; 4] = [I2, Z2, X2, ZX2];

fn isotropic(fidelity: f64) -> Mat4 {
    let w = (4.0 * fidelity - 1.0) / 3.0;
    let noise = (1.0 - fidelity) / 3.0;
    let phi = BELL[0];
    let mut rho = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rho[i][j] = w * phi[i] * phi[j] + if i == j { noise } else { 0.0 };
        }
    }
    rho
}

#[inline]
fn bit(index: usize, qubit: usize) -> usize {
    // qubit 1 is bit 3 of a 4-bit index
    (index >> (4 - qubit)) & 1
}

/// Fidelity with `|phi+>` after swapping isotropic pairs of fidelity `f1`
/// and `f2`. Inputs are not range checked; the construction is defined for
/// any real fidelity.
pub fn swap_oracle_isotropic(f1: f64, f2: f64) -> f64 {
    let left = isotropic(f1);
    let right = isotropic(f2);

    // full 16x16 product state
    let mut rho = [[0.0; 16]; 16];
    for (r, row) in rho.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            let l = (bit(r, 1) << 1 | bit(r, 2), bit(c, 1) << 1 | bit(c, 2));
            let rr = (bit(r, 3) << 1 | bit(r, 4), bit(c, 3) << 1 | bit(c, 4));
            *entry = left[l.0][l.1] * right[rr.0][rr.1];
        }
    }

    let phi = BELL[0];
    let mut fidelity = 0.0;
    for (outcome, bell) in BELL.iter().enumerate() {
        // unnormalised (1,4) state after projecting (2,3) onto `bell`
        let mut sigma: Mat4 = [[0.0; 4]; 4];
        for r in 0..16 {
            let br = bell[bit(r, 2) << 1 | bit(r, 3)];
            if br == 0.0 {
                continue;
            }
            for c in 0..16 {
                let bc = bell[bit(c, 2) << 1 | bit(c, 3)];
                if bc == 0.0 {
                    continue;
                }
                let outer = (bit(r, 1) << 1 | bit(r, 4), bit(c, 1) << 1 | bit(c, 4));
                sigma[outer.0][outer.1] += br * bc * rho[r][c];
            }
        }

        // (I (x) U) sigma (I (x) U)^T
        let u = CORRECTIONS[outcome];
        let mut full_u: Mat4 = [[0.0; 4]; 4];
        for a in 0..2 {
            for d in 0..2 {
                for d2 in 0..2 {
                    full_u[a << 1 | d][a << 1 | d2] = u[d][d2];
                }
            }
        }
        let mut corrected: Mat4 = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    for m in 0..4 {
                        s += full_u[i][k] * sigma[k][m] * full_u[j][m];
                    }
                }
                corrected[i][j] = s;
            }
        }

        for i in 0..4 {
            for j in 0..4 {
                fidelity += phi[i] * corrected[i][j] * phi[j];
            }
        }
    }
    fidelity
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_state_has_stated_fidelity() {
        for f in [0.25, 0.6, 0.93, 1.0] {
            let rho = isotropic(f);
            let phi = BELL[0];
            let mut overlap = 0.0;
            let mut trace = 0.0;
            for i in 0..4 {
                trace += rho[i][i];
                for j in 0..4 {
                    overlap += phi[i] * rho[i][j] * phi[j];
                }
            }
            assert!((overlap - f).abs() < 1e-14);
            assert!((trace - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn oracle_fixed_points() {
        assert!((swap_oracle_isotropic(1.0, 1.0) - 1.0).abs() < 1e-14);
        assert!((swap_oracle_isotropic(0.25, 0.7) - 0.25).abs() < 1e-14);
        assert!((swap_oracle_isotropic(1.0, 0.8) - 0.8).abs() < 1e-14);
    }
}
