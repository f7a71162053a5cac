#pragma once

// Cooperativity of a released, ballistically expanding and falling atom cloud
// probed by a horizontal Gaussian beam through its initial centre:
//
//     C(t) = C0 tau_r^2 / (tau_r^2 + t^2) * exp(-t^4 / (tau_g^2 (tau_r^2 + t^2)))
//
// with tau_r = sigma_r / sigma_v and tau_g = 2 sqrt(2) sigma_v / g.

#include "coldsqz/constants.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace coldsqz {

struct CloudParams {
    double sigma_r = 4.0e-3; // m, Gaussian std
    double temp_k = 5.0e-3;
    double mass_kg = constants::cesium_mass;
    double c0 = 220.0;
    double g_grav = constants::standard_gravity;

    void validate() const;

    double sigma_v() const; // m/s, per axis
    double tau_r() const;
    // Infinite when g_grav == 0.
    double tau_g() const;
};

struct CooperativitySample {
    double t_s = 0.0;
    double c = 0.0;
    std::optional<double> sigma_c;
};

double cooperativity_decay(double t, const CloudParams& cp);

// Same law in fit coordinates.
double cooperativity_decay(double t, double c0, double tau_r, double tau_g);

enum class McEstimator {
    // Sample points of the beam profile and velocities, then weight by the
    // initial cloud density at the back-propagated position. Bounded weights.
    Beam,
    // Sample atoms from the cloud and weight by the beam intensity at their
    // position; variance grows as the beam narrows.
    Atoms,
};

struct McOptions {
    std::size_t samples = 1'000'000;
    std::uint64_t seed = 1;
    McEstimator estimator = McEstimator::Beam;
    unsigned threads = 0; // 0: hardware concurrency
};

struct McResult {
    std::vector<CooperativitySample> samples; // sigma_c is the standard error
    std::vector<std::string> warnings;
};

// Monte Carlo estimate of the beam-weighted column overlap, normalized so its
// expectation at t = 0 is C0. Samples are drawn in fixed-size blocks whose
// seeds derive from (seed, block index), so results do not depend on the
// thread count.
McResult mc_cooperativity(const CloudParams& cp, double waist, std::span<const double> times,
                          const McOptions& options = {});

// Exact expectation of mc_cooperativity for a finite waist.
double finite_waist_cooperativity(double t, const CloudParams& cp, double waist);

struct FitResult {
    bool ok = false;
    std::string diagnostic;

    double c0 = 0.0;
    double tau_r = 0.0;
    double tau_g = 0.0;
    double sigma_r = 0.0;
    double temp_k = 0.0;
    double sigma_v = 0.0;

    // One-sigma uncertainties from the Jacobian at the optimum.
    double c0_err = 0.0;
    double tau_r_err = 0.0;
    double tau_g_err = 0.0;
    double sigma_r_err = 0.0;
    double temp_k_err = 0.0;

    double rms_residual = 0.0;
    int iterations = 0;
};

// Weighted least squares of the decay law over log(C0, tau_r, tau_g): coarse
// grid with C0 solved linearly, then damped Gauss-Newton. Samples with
// sigma_c are weighted by 1/sigma_c^2, otherwise equally. Never throws on
// degenerate data; returns ok == false with a diagnostic instead.
FitResult fit_cooperativity(std::span<const CooperativitySample> samples,
                            double mass_kg = constants::cesium_mass,
                            double g_grav = constants::standard_gravity);

} // namespace coldsqz
