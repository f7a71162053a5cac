#pragma once

// Linearized quantum-Langevin noise of the atom-cavity system and the
// quadrature noise spectrum of the field leaving the input mirror.
//
// Spectra are symmetric-ordered and normalized so that vacuum (shot noise)
// is the identity; squeezing reads as an eigenvalue below 1.

#include "coldsqz/model.hpp"

#include <Eigen/Dense>

namespace coldsqz {

// Linear system  d/dt z = A z + B xi  over
//   z = (da_re, da_im, {dp_re, dp_im, dd}_j),
// where da is the intracavity field fluctuation in photon units and
// (dp_j, dd_j) are bin polarization and inversion fluctuations in mean-field
// units. The white channels xi are the cavity input pair, an optional loss
// pair, and three atomic channels per bin, with symmetric-ordered spectral
// density `channel_density`.
struct FluctuationSystem {
    Eigen::MatrixXd drift;
    Eigen::MatrixXd input;
    Eigen::MatrixXd channel_density;
    double output_coupling = 0.0; // sqrt(2 kappa_in): a_out = output_coupling * a - a_in
    int bin_count = 0;

    Eigen::Index dimension() const { return drift.rows(); }
    Eigen::MatrixXd diffusion() const { return input * channel_density * input.transpose(); }
};

struct QuadratureSpectrum {
    double omega_hz = 0.0;
    Eigen::Matrix2d V = Eigen::Matrix2d::Identity();
    double s_min = 1.0;
    double s_max = 1.0;
    double theta_min = 0.0;

    // Noise of the quadrature cos(phi) a_re + sin(phi) a_im.
    double at_phase(double phi) const;
};

struct QuadratureExtrema {
    double s_min = 1.0;
    double s_max = 1.0;
    double theta_min = 0.0; // in [0, pi); 0 for an isotropic V
};

struct DetectionChain {
    double eta = 0.9;
    double photodiode_qe = 0.96;
    double mode_overlap = 0.9 / 0.96;

    void validate() const;
};

FluctuationSystem build_fluctuation_system(const SteadyState& ss, const ModelParams& params);

QuadratureSpectrum output_spectrum(const FluctuationSystem& fs, double omega_hz);

QuadratureExtrema quadrature_extrema(const Eigen::Matrix2d& V);

double apply_efficiency(double S, double eta);
QuadratureSpectrum apply_efficiency(const QuadratureSpectrum& spectrum, double eta);

// Largest real part among the drift eigenvalues; negative on dynamically
// stable states.
double max_drift_real_part(const FluctuationSystem& fs);

} // namespace coldsqz
