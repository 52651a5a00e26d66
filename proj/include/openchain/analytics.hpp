#pragma once

// Closed-form benchmarks and growth-law fits.

#include "openchain/errors.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace openchain {

/// Entanglement entropy (bits) of one spin of the pair |up down> evolved with
/// the XX exchange for time t. 0 log 0 = 0.
double two_spin_entropy(double t, double J = 1.0);

/// N gamma exp(-N gamma t), the waiting-time density of the first jump on
/// N sites that each jump at rate gamma. Zero for t < 0.
double jump_time_pdf(double t, long n_sites, double gamma);

/// Weight of the rare entangling jumps in a four-spin block: a Neel
/// configuration of the block has steady-state probability 1/8, and each
/// has two entangling jumps.
inline constexpr double four_spin_block_weight = 0.25;

struct PlateauTerms {
    double two_site = 0.0;             ///< J^2/(16 g^2 ln2) [2(E-1) + ln(16 g^2/J^2)]
    double four_spin_correction = 0.0; ///< J^2/(32 g^2)
    [[nodiscard]] double total() const { return two_site + four_spin_correction; }
};

/// Large-gamma estimate of the trajectory entanglement plateau for balanced
/// emission and absorption, gamma = gamma_plus = gamma_minus.
PlateauTerms plateau_terms(double gamma, double J = 1.0);
inline double plateau_estimate(double gamma, double J = 1.0) { return plateau_terms(gamma, J).total(); }

struct FitWindow {
    double t_min = 0.0;
    double t_max = 0.0;
};

struct FitResult {
    std::string model;          ///< "power_law" or "log_growth"
    double exponent_or_slope   = 0.0;
    double prefactor_or_offset = 0.0;
    FitWindow window;
    double residual        = 0.0; ///< rms residual of the linearized fit
    std::size_t n_points   = 0;
};

/// Minimum number of samples inside a fit window.
inline constexpr std::size_t min_fit_points = 8;

/// S = A t^alpha, least squares in (ln t, ln S) over t_min <= t <= t_max.
FitResult fit_power_law(const std::vector<double> &t, const std::vector<double> &s, FitWindow window = {1.1, 3.9});

/// S = slope log2(t) + offset, least squares in (log2 t, S).
FitResult fit_log_growth(const std::vector<double> &t, const std::vector<double> &s, FitWindow window);

} // namespace openchain
