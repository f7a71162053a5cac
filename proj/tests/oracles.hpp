#pragma once

// Reference computations that share no code path with the library.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

// Plane-wave state equation written out directly.
inline double plane_wave_drive(double X, double C, double delta, double theta)
{
    const double D = 1.0 + delta * delta + X;
    const double a = 1.0 + 2.0 * C / D;
    const double b = theta - 2.0 * C * delta / D;
    return X * (a * a + b * b);
}

// Transverse average of 1/(1 + delta^2 + s X) over s in [0, 1] by adaptive
// Gauss-Kronrod.
inline double radial_saturation(double X, double delta)
{
    const auto f = [&](double s) { return 1.0 / (1.0 + delta * delta + s * X); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
}

inline double gaussian_drive_quadrature(double X, double C, double delta, double theta)
{
    const double S = radial_saturation(X, delta);
    const double a = 1.0 + 2.0 * C * S;
    const double b = theta - 2.0 * C * delta * S;
    return X * (a * a + b * b);
}

// Roots of f(X) = Y by sign changes on a dense logarithmic sweep, refined by
// plain bisection.
template <class F>
std::vector<double> dense_sweep_roots(F&& drive, double Y, double X_lo, double X_hi, int n = 200000)
{
    std::vector<double> roots;
    const double step = std::log(X_hi / X_lo) / n;
    double x0 = X_lo, f0 = drive(x0) - Y;
    for (int i = 1; i <= n; ++i) {
        const double x1 = X_lo * std::exp(step * i);
        const double f1 = drive(x1) - Y;
        if ((f0 < 0.0) != (f1 < 0.0)) {
            double a = x0, b = x1, fa = f0;
            for (int k = 0; k < 200 && b - a > 1e-15 * b; ++k) {
                const double m = 0.5 * (a + b);
                const double fm = drive(m) - Y;
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            roots.push_back(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

// Locations where the central-difference slope of drive(X) changes sign.
template <class F>
std::vector<double> dense_sweep_folds(F&& drive, double X_lo, double X_hi, int n = 200000)
{
    std::vector<double> folds;
    const double step = std::log(X_hi / X_lo) / n;
    auto slope = [&](double x) {
        const double h = 1e-6 * x;
        return drive(x + h) - drive(x - h);
    };
    double s0 = slope(X_lo);
    for (int i = 1; i <= n; ++i) {
        const double x = X_lo * std::exp(step * i);
        const double s1 = slope(x);
        if ((s0 < 0.0) != (s1 < 0.0))
            folds.push_back(x * std::exp(-0.5 * step));
        s0 = s1;
    }
    return folds;
}

// Eigenvalues of a symmetric 2x2 matrix by the closed formula.
inline std::pair<double, double> sym2_eigen(double a, double b, double c)
{
    const double m = 0.5 * (a + c);
    const double r = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    return {m - r, m + r};
}

// Decay law with CODATA constants, written independently of the library.
struct DecayLaw {
    double sigma_r, temp, mass, g;

    double sigma_v() const { return std::sqrt(1.380649e-23 * temp / mass); }
    double tau_r() const { return sigma_r / sigma_v(); }
    double tau_g() const { return 2.0 * std::sqrt(2.0) * sigma_v() / g; }
    double ratio(double t) const
    {
        const double r = tau_r(), q = tau_g();
        return r * r / (r * r + t * t) * std::exp(-std::pow(t, 4) / (q * q * (r * r + t * t)));
    }
};

// Steady-state covariance of dz = A z dt + dW, <dW dW^T> = D dt, by solving
// the Lyapunov equation A P + P A^T + D = 0 through Kronecker vectorization.
inline Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D)
{
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    // vec(A P) = (I kron A) vec P, vec(P A^T) = (A kron I) vec P, column-major.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j)
        L.block(j * n, j * n, n, n) += A;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            L.block(i * n, j * n, n, n) += A(i, j) * I;
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(D.data(), n * n);
    Eigen::VectorXd p = L.fullPivLu().solve(rhs);
    return Eigen::Map<Eigen::MatrixXd>(p.data(), n, n);
}

} // namespace oracle
