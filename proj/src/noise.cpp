#include "coldsqz/noise.hpp"

#include "coldsqz/errors.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace coldsqz {

namespace {

using cd = std::complex<double>;

// Real 2x2 form of z -> alpha z + beta conj(z).
Eigen::Matrix2d real_form(cd alpha, cd beta = 0.0)
{
    Eigen::Matrix2d m;
    m << alpha.real() + beta.real(), -alpha.imag() + beta.imag(),
         alpha.imag() + beta.imag(), alpha.real() - beta.real();
    return m;
}

// Symmetric-ordered diffusion (2D) of one two-level atom in the coordinates
// (p_re, p_im, d), from the generalized Einstein relation for spontaneous
// emission at rate gamma_par plus pure dephasing making the dipole decay
// at gamma. The operator-ordered matrix is over (sigma, sigma^dag, sigma_z).
Eigen::Matrix3d atomic_diffusion(cd p, double d, double gamma, double gamma_par)
{
    const double lambda = std::sqrt(gamma_par / (4.0 * gamma));
    const double excited = 0.5 * (1.0 - d);
    const double ground = 0.5 * (1.0 + d);
    const cd sigma = cd(0.0, -lambda) * p;

    Eigen::Matrix3cd ordered = Eigen::Matrix3cd::Zero();
    ordered(0, 1) = gamma_par * excited + 2.0 * gamma * ground;
    ordered(1, 0) = (2.0 * gamma - gamma_par) * excited;
    ordered(0, 2) = 2.0 * gamma_par * sigma;
    ordered(2, 1) = 2.0 * gamma_par * std::conj(sigma);
    ordered(2, 2) = 4.0 * gamma_par * excited;

    // p = i sigma / lambda, d = -sigma_z.
    Eigen::Matrix3cd to_real;
    to_real << cd(0.0, 0.5 / lambda), cd(0.0, -0.5 / lambda), 0.0,
               cd(0.5 / lambda, 0.0), cd(0.5 / lambda, 0.0), 0.0,
               0.0, 0.0, -1.0;
    const Eigen::Matrix3cd m = to_real * ordered * to_real.transpose();
    return m.real();
}

} // namespace

double QuadratureSpectrum::at_phase(double phi) const
{
    const double c = std::cos(phi), s = std::sin(phi);
    return c * c * V(0, 0) + 2.0 * s * c * V(0, 1) + s * s * V(1, 1);
}

void DetectionChain::validate() const
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw DomainError("detection: eta must be in (0, 1]");
    if (!(photodiode_qe > 0.0 && photodiode_qe <= 1.0))
        throw DomainError("detection: photodiode_qe must be in (0, 1]");
    if (!(mode_overlap > 0.0 && mode_overlap <= 1.0))
        throw DomainError("detection: mode_overlap must be in (0, 1]");
}

FluctuationSystem build_fluctuation_system(const SteadyState& ss, const ModelParams& params)
{
    params.validate();
    if (params.gamma_par_ratio > 2.0)
        throw DomainError("noise: gamma_par_ratio > 2 has no positive atomic diffusion");

    const double kappa = params.kappa_hz;
    const double gamma = params.gamma_hz;
    const double gamma_par = params.gamma_par_ratio * gamma;
    const double N = params.n_atoms;
    const double C = params.C;
    const double delta = params.delta;
    const int M = static_cast<int>(ss.bins.size());
    const int n = 2 + 3 * M;

    // Single-atom coupling and the photon <-> saturation-unit field scale.
    const double g = std::sqrt(2.0 * C * kappa * gamma / N);
    const double field_scale = 2.0 * g / std::sqrt(gamma * gamma_par);
    // 2 C kappa / field_scale, written without the division.
    const double back_action = 0.5 * g * N * std::sqrt(gamma_par / gamma);

    const double kappa_in = (1.0 - params.loss_fraction) * kappa;
    const double kappa_loss = params.loss_fraction * kappa;
    const bool lossy = kappa_loss > 0.0;
    const int field_channels = lossy ? 4 : 2;
    const int channels = field_channels + 3 * M;

    FluctuationSystem fs;
    fs.bin_count = M;
    fs.drift = Eigen::MatrixXd::Zero(n, n);
    fs.input = Eigen::MatrixXd::Zero(n, channels);
    fs.channel_density = Eigen::MatrixXd::Zero(channels, channels);
    fs.output_coupling = std::sqrt(2.0 * kappa_in);

    fs.drift.block<2, 2>(0, 0) = real_form(-kappa * cd(1.0, params.theta));
    fs.input(0, 0) = fs.input(1, 1) = std::sqrt(2.0 * kappa_in);
    fs.channel_density(0, 0) = fs.channel_density(1, 1) = 0.25;
    if (lossy) {
        fs.input(0, 2) = fs.input(1, 3) = std::sqrt(2.0 * kappa_loss);
        fs.channel_density(2, 2) = fs.channel_density(3, 3) = 0.25;
    }

    const cd x = ss.x;
    for (int j = 0; j < M; ++j) {
        const BinState& b = ss.bins[j];
        const int i = 2 + 3 * j;
        const int ch = field_channels + 3 * j;

        // da' = -back_action * w u dp
        fs.drift.block<2, 2>(0, i) = real_form(-back_action * b.w * b.u);
        // dp' = gamma [u d field_scale da + u x dd - (1 + i delta) dp]
        fs.drift.block<2, 2>(i, 0) = real_form(gamma * b.u * b.d * field_scale);
        fs.drift.block<2, 2>(i, i) = real_form(-gamma * cd(1.0, delta));
        const cd x_term = gamma * b.u * x;
        fs.drift(i, i + 2) = x_term.real();
        fs.drift(i + 1, i + 2) = x_term.imag();
        // dd' = -gamma_par [u Re(field_scale da* p + x* dp) + dd]
        fs.drift(i + 2, 0) = -gamma_par * b.u * field_scale * b.p.real();
        fs.drift(i + 2, 1) = -gamma_par * b.u * field_scale * b.p.imag();
        fs.drift(i + 2, i) = -gamma_par * b.u * x.real();
        fs.drift(i + 2, i + 1) = -gamma_par * b.u * x.imag();
        fs.drift(i + 2, i + 2) = -gamma_par;

        fs.input.block<3, 3>(i, ch).setIdentity();
        fs.channel_density.block<3, 3>(ch, ch) =
            atomic_diffusion(b.p, b.d, gamma, gamma_par) / (b.w * N);
    }
    return fs;
}

QuadratureSpectrum output_spectrum(const FluctuationSystem& fs, double omega_hz)
{
    if (!(omega_hz >= 0.0))
        throw DomainError("output_spectrum: analysis frequency must be >= 0");
    const Eigen::Index n = fs.dimension();
    const Eigen::MatrixXcd shifted =
        fs.drift.cast<cd>() - cd(0.0, omega_hz) * Eigen::MatrixXcd::Identity(n, n);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(shifted.transpose());
    const double rcond = lu.rcond();
    if (!(rcond > 1e-14)) {
        std::ostringstream msg;
        msg << "output_spectrum: drift resolvent singular at omega = " << omega_hz
            << " Hz (rcond " << rcond << "); state sits on an instability boundary";
        throw NumericalError(msg.str());
    }
    // Field rows of (A - i Omega)^-1.
    const Eigen::MatrixXcd field_rows =
        lu.solve(Eigen::MatrixXcd::Identity(n, 2)).transpose();

    // a_out = output_coupling * a - a_in, a = -(A - i Omega)^-1 B xi.
    Eigen::MatrixXcd transfer = -fs.output_coupling * field_rows * fs.input.cast<cd>();
    transfer(0, 0) -= 1.0;
    transfer(1, 1) -= 1.0;
    const Eigen::MatrixXcd S = transfer * fs.channel_density.cast<cd>() * transfer.adjoint();

    QuadratureSpectrum q;
    q.omega_hz = omega_hz;
    q.V = 4.0 * S.real();
    q.V(0, 1) = q.V(1, 0) = 0.5 * (q.V(0, 1) + q.V(1, 0));
    const QuadratureExtrema e = quadrature_extrema(q.V);
    q.s_min = e.s_min;
    q.s_max = e.s_max;
    q.theta_min = e.theta_min;
    return q;
}

QuadratureExtrema quadrature_extrema(const Eigen::Matrix2d& V)
{
    const double scale = std::max({std::abs(V(0, 0)), std::abs(V(1, 1)), std::abs(V(0, 1)), 1.0});
    if (std::abs(V(0, 1) - V(1, 0)) > 1e-12 * scale)
        throw DomainError("quadrature_extrema: V must be symmetric");
    const double b = 0.5 * (V(0, 1) + V(1, 0));
    const double mean = 0.5 * (V(0, 0) + V(1, 1));
    const double half_diff = 0.5 * (V(0, 0) - V(1, 1));
    const double radius = std::hypot(half_diff, b);

    QuadratureExtrema e;
    e.s_min = mean - radius;
    e.s_max = mean + radius;
    if (radius <= 1e-15 * scale) {
        e.theta_min = 0.0;
        return e;
    }
    const double major = 0.5 * std::atan2(b, half_diff);
    double minor = major + 0.5 * std::numbers::pi;
    minor = std::fmod(minor, std::numbers::pi);
    if (minor < 0.0)
        minor += std::numbers::pi;
    if (minor >= std::numbers::pi)
        minor -= std::numbers::pi;
    e.theta_min = minor;
    return e;
}

double apply_efficiency(double S, double eta)
{
    if (!(S >= 0.0))
        throw DomainError("apply_efficiency: noise power must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0))
        throw DomainError("apply_efficiency: eta must be in (0, 1]");
    return eta * S + (1.0 - eta);
}

QuadratureSpectrum apply_efficiency(const QuadratureSpectrum& spectrum, double eta)
{
    if (!(eta > 0.0 && eta <= 1.0))
        throw DomainError("apply_efficiency: eta must be in (0, 1]");
    QuadratureSpectrum out = spectrum;
    out.V = eta * spectrum.V + (1.0 - eta) * Eigen::Matrix2d::Identity();
    out.s_min = eta * spectrum.s_min + (1.0 - eta);
    out.s_max = eta * spectrum.s_max + (1.0 - eta);
    return out;
}

double max_drift_real_part(const FluctuationSystem& fs)
{
    const Eigen::EigenSolver<Eigen::MatrixXd> solver(fs.drift, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("max_drift_real_part: eigenvalue iteration failed");
    return solver.eigenvalues().real().maxCoeff();
}

} // namespace coldsqz
