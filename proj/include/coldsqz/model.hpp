#pragma once

// Steady-state optics of two-level atoms in a driven single-ended cavity.
//
// Intensities are in saturation units: the bin saturation denominator is
// 1 + delta^2 + u^2 X. The drive intensity Y and intracavity intensity X obey
//
//     Y = X [ (1 + 2 C S(X))^2 + (theta - 2 C delta S(X))^2 ],
//     S(X) = sum_j w_j u_j^2 / (1 + delta^2 + u_j^2 X),
//
// with delta the atomic detuning in units of the dipole half-width gamma and
// theta the cavity detuning in units of the field half-width kappa.

#include <complex>
#include <span>
#include <string_view>
#include <vector>

namespace coldsqz {

enum class Transverse { PlaneWave, GaussianBins, Custom };

// One transverse ring of atoms. w is the atom number of the ring relative to
// the mode-weighted atom number that defines C, so sum_j w_j u_j^2 == 1.
struct TransverseBin {
    double u = 1.0;
    double w = 1.0;
};

struct ModelParams {
    double C = 220.0;
    double delta = -20.0;
    double theta = 0.0;
    double kappa_hz = 5.0e6;   // cavity field half-width
    double gamma_hz = 2.6e6;   // atomic dipole half-width
    double gamma_par_ratio = 2.0;
    double n_atoms = 1.0e6;
    double loss_fraction = 0.0; // share of kappa leaking through unobserved ports
    Transverse transverse = Transverse::PlaneWave;
    int bin_count = 32;
    std::vector<TransverseBin> custom_bins;

    // Throws DomainError naming the first violated invariant.
    void validate() const;

    std::vector<TransverseBin> bins() const;
};

// Mode-weighted quadrature of the Gaussian beam cross-section in s = u^2:
// composite 4-point Gauss-Legendre on panels [2^-(k+1), 2^-k], bottom panel
// [0, 2^-(P-1)]. Integrates f(u^2) over the beam to high order for any M >= 1.
std::vector<TransverseBin> gaussian_bins(int count);

enum class Branch { Lower, Middle, Upper, Monostable };

std::string_view to_string(Branch branch);

struct BinState {
    double u = 1.0;
    double w = 1.0;
    std::complex<double> p; // polarization, u x d / (1 + i delta)
    double d = 1.0;         // ground-minus-excited population, in (0, 1]
};

struct SteadyState {
    std::complex<double> x; // drive amplitude taken real and positive
    double X = 0.0;
    double Y = 0.0;
    std::vector<BinState> bins;
    Branch branch = Branch::Monostable;
    bool stable = true;
    double slope = 1.0; // dY/dX at X
};

struct TurningPoints {
    std::vector<double> points; // ascending X
    bool bistable = false;
};

// Evaluates the state equation for one parameter set. Holds the bin layout so
// repeated evaluation inside root finders does not rebuild it.
class StateEquation {
public:
    explicit StateEquation(const ModelParams& params);

    double operator()(double X) const;
    double slope(double X) const;
    double saturation_sum(double X) const;
    // theta - 2 C delta S(X): cavity detuning seen by the field, including
    // the atomic dispersion at intensity X.
    double effective_detuning(double X) const;
    std::complex<double> field_amplitude(double X, double Y) const;

    const ModelParams& params() const { return params_; }
    std::span<const TransverseBin> bins() const { return bins_; }

private:
    ModelParams params_;
    std::vector<TransverseBin> bins_;
};

double state_equation(double X, const ModelParams& params);

// Continuum limit of the Gaussian layout:
// S(X) = ln(1 + X / (1 + delta^2)) / X.
double gaussian_state_equation(double X, const ModelParams& params);

double default_turning_search_limit(const ModelParams& params);

TurningPoints turning_points(const ModelParams& params, double X_max);
TurningPoints turning_points(const ModelParams& params);

std::vector<SteadyState> solve_steady_states(double Y, const ModelParams& params);

// Highest intracavity intensity reachable at drive Y when the cavity is tuned
// through resonance, relative to the empty-cavity value Y.
double peak_transmission_ratio(double C, double drive_Y, const ModelParams& params);

double cooperativity_from_amplitudes(double bistable_peak, double empty_peak, double drive_Y,
                                     const ModelParams& params);

// Cavity detunings in [theta_lo, theta_hi] at which drive Y sits exactly on a
// turning point, i.e. the edges of the bistable window at fixed drive.
std::vector<double> fold_detunings(double Y, const ModelParams& params, double theta_lo,
                                   double theta_hi, int grid = 400);

} // namespace coldsqz
