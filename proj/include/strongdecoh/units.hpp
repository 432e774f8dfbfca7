// units.hpp — Unit conventions (hbar = 1, fs, rad/fs) and boundary conversions

#pragma once

namespace strongdecoh::units {

// rad/fs per cm^-1 (2 pi c with c in cm/fs)
inline constexpr double kCmToRadPerFs = 1.8836515673088534e-4;

inline constexpr double kBoltzmannCmPerK = 0.695034800;
// value used by the spin-boson reproduction profile
inline constexpr double kBoltzmannPaperCmPerK = 0.734;

inline constexpr double cm_to_rad_fs(double cm) { return cm * kCmToRadPerFs; }
inline constexpr double rad_fs_to_cm(double w) { return w / kCmToRadPerFs; }

// rate in 1/fs to 1/ps
inline constexpr double per_fs_to_per_ps(double r) { return r * 1e3; }

// angular frequency 1/tau (tau in fs) expressed in cm^-1
inline constexpr double inverse_time_to_cm(double tau_fs) { return rad_fs_to_cm(1.0 / tau_fs); }

// beta in fs (1/(rad/fs)) for temperature T [K] and Boltzmann constant kB [cm^-1/K]
inline constexpr double beta_from_temperature(double T, double kB_cm_per_K = kBoltzmannCmPerK) {
    return 1.0 / cm_to_rad_fs(kB_cm_per_K * T);
}

} // namespace strongdecoh::units
