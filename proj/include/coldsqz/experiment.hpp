#pragma once

// Synthetic measurement traces: quasi-static branch tracking of the cavity
// steady state under a slow scan, output-noise envelope at one analysis
// frequency, LO phase modulation, spectrum-analyzer noise and video filtering,
// and shot/electronic-noise calibration.

#include "coldsqz/cloud.hpp"
#include "coldsqz/model.hpp"
#include "coldsqz/noise.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coldsqz {

enum class ScanMode { FreeRelease, PiezoSweep };

struct ScanConfig {
    ScanMode mode = ScanMode::FreeRelease;
    double duration_s = 30.0e-3;
    double dt_s = 2.0e-6;
    double drive_Y = 280.0;
    double theta0 = -5.0;
    double theta_rate = 1000.0; // kappa units per second, piezo only
    double lo_freq_hz = 1.0e3;
    double lo_phase0 = 0.0;
    double omega_hz = 5.0e6;
    double rel_noise = 0.10;
    double vbw_hz = 20.0e3;
    double elec_floor = 0.10; // electronic noise in shot-noise units
    double eta = 0.9;
    std::uint64_t seed = 1;

    void validate() const;
    std::size_t sample_count() const;
};

struct TraceSample {
    double t_s = 0.0;
    double c = 0.0;
    double theta = 0.0;     // imposed cavity detuning
    double theta_eff = 0.0; // theta - 2 C delta S(X)
    double X = 0.0;
    Branch branch = Branch::Monostable;
    double s_true = 1.0;    // envelope-resolved noise at the LO phase, after efficiency
    double s_meas = 1.0;
    double s_min = 1.0;
    double s_max = 1.0;
    double shot_ref = 1.0;
};

struct BranchJump {
    std::size_t index = 0; // first sample on the new branch
    double t_s = 0.0;
    double c = 0.0;
    double theta = 0.0;
    double X_before = 0.0;
    double X_after = 0.0;
};

struct Trace {
    std::vector<TraceSample> samples;
    std::vector<BranchJump> jumps;
    std::vector<std::string> warnings;
};

double lo_phase(double t, const ScanConfig& sc);

// Multiplies by (1 + rel_noise xi) with xi standard normal from `seed`, then
// runs a single-pole low-pass at vbw_hz started at the first noisy sample.
std::vector<double> analyzer_chain(std::span<const double> s_true, const ScanConfig& sc,
                                   std::uint64_t seed);

// Variance ratio of the single-pole filter output to its white input.
double analyzer_noise_bandwidth_ratio(const ScanConfig& sc);

// (raw - mean(elec)) / (mean(shot_raw) - mean(elec)).
std::vector<double> calibrate_and_correct(std::span<const double> raw,
                                          std::span<const double> shot_raw,
                                          std::span<const double> elec);

// Lowest drive at which some cooperativity in [c_lo, c_hi] is bistable at the
// given cavity detuning; infinite when none is.
double bistability_threshold(const ModelParams& params, double c_lo, double c_hi);

Trace free_release_scan(const ScanConfig& sc, const CloudParams& cp, const ModelParams& params);

Trace piezo_scan(const ScanConfig& sc, const ModelParams& params);

} // namespace coldsqz
