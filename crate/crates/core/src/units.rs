//! Physical constants and unit conversions.
//!
//! Energies are carried in microelectronvolts (μeV) throughout the crate and
//! laboratory times in nanoseconds. Dynamical equations are integrated with
//! ħ = 1, so a "reduced" time is measured in ħ/μeV (≈ 0.658 ns).
//!
//! | quantity        | unit          |
//! |-----------------|---------------|
//! | energy          | μeV           |
//! | time            | ns (lab), ħ/μeV (integrator) |
//! | magnetic field  | T             |
//! | temperature     | K             |
//! | impedance       | Ω             |
//! | lever arm, κ    | eV/V          |

/// Bohr magneton in μeV/T.
pub const MU_B: f64 = 57.883818060;
/// Boltzmann constant in μeV/K.
pub const K_B: f64 = 86.17333262;
/// Reduced Planck constant in μeV·ns.
pub const HBAR: f64 = 0.6582119569;
/// Planck constant in μeV·ns (equivalently μeV per GHz).
pub const PLANCK: f64 = 2.0 * std::f64::consts::PI * HBAR;
/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Reduced Planck constant in J·s.
pub const HBAR_SI: f64 = 1.054571817e-34;
/// ħ/e² in ohms.
pub const HBAR_OVER_E2: f64 = HBAR_SI / (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);
/// Microelectronvolts per electronvolt.
pub const UEV_PER_EV: f64 = 1.0e6;

/// Nanoseconds to reduced time (ħ/μeV).
#[inline]
pub fn ns_to_reduced(t_ns: f64) -> f64 {
    t_ns / HBAR
}

/// Reduced time (ħ/μeV) to nanoseconds.
#[inline]
pub fn reduced_to_ns(t: f64) -> f64 {
    t * HBAR
}

/// Thermal energy k_B T in μeV.
#[inline]
pub fn thermal_energy(temperature_k: f64) -> f64 {
    K_B * temperature_k
}

/// Converts an energy in μeV to the equivalent frequency E/h in GHz.
#[inline]
pub fn uev_to_ghz(e: f64) -> f64 {
    e / PLANCK
}

/// Converts a circuit energy ħΩ in μeV to an angular frequency in rad/s.
#[inline]
pub fn uev_to_rad_per_s(e: f64) -> f64 {
    e / (HBAR * 1.0e-9)
}

/// Converts an angular frequency in rad/s to ħΩ in μeV.
#[inline]
pub fn rad_per_s_to_uev(omega: f64) -> f64 {
    omega * HBAR * 1.0e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thermal_energy_at_room_temperature() {
        // k_B · 300 K ≈ 25.852 meV
        assert!((thermal_energy(300.0) - 25852.0).abs() < 0.1);
    }

    #[test]
    fn resistance_quantum() {
        assert!((HBAR_OVER_E2 - 4108.236).abs() < 1e-3);
    }

    #[test]
    fn frequency_round_trip() {
        let e = 37.5;
        assert!((rad_per_s_to_uev(uev_to_rad_per_s(e)) - e).abs() < 1e-12);
        // 25 μeV is about 6.04 GHz
        assert!((uev_to_ghz(25.0) - 6.045).abs() < 1e-3);
    }
}
