#include "coldsqz/model.hpp"

#include "coldsqz/errors.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coldsqz {

namespace {

constexpr int kTurningGrid = 800;
constexpr int kRefineBits = 40; // ~1e-12 relative, inside the 1e-10 contract

template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi)
{
    boost::uintmax_t iterations = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(kRefineBits + 10), iterations);
    if (iterations >= 300) {
        std::ostringstream msg;
        msg << "root refinement did not converge on [" << lo << ", " << hi << "]";
        throw NumericalError(msg.str());
    }
    return 0.5 * (a + b);
}

void push_unique(std::vector<double>& xs, double x)
{
    for (double existing : xs)
        if (std::abs(existing - x) <= 1e-9 * std::max(std::abs(existing), std::abs(x)))
            return;
    xs.push_back(x);
}

} // namespace

StateEquation::StateEquation(const ModelParams& params)
    : params_(params)
    , bins_(params.bins())
{
    params_.validate();
}

double StateEquation::saturation_sum(double X) const
{
    const double a = 1.0 + params_.delta * params_.delta;
    double sum = 0.0;
    for (const auto& b : bins_) {
        const double s = b.u * b.u;
        sum += b.w * s / (a + s * X);
    }
    return sum;
}

double StateEquation::operator()(double X) const
{
    if (X < 0.0)
        throw DomainError("state_equation: intensity must be >= 0");
    const double S = saturation_sum(X);
    const double absorptive = 1.0 + 2.0 * params_.C * S;
    const double dispersive = params_.theta - 2.0 * params_.C * params_.delta * S;
    return X * (absorptive * absorptive + dispersive * dispersive);
}

double StateEquation::slope(double X) const
{
    const double a = 1.0 + params_.delta * params_.delta;
    double S = 0.0, dS = 0.0;
    for (const auto& b : bins_) {
        const double s = b.u * b.u;
        const double den = a + s * X;
        S += b.w * s / den;
        dS -= b.w * s * s / (den * den);
    }
    const double C = params_.C;
    const double absorptive = 1.0 + 2.0 * C * S;
    const double dispersive = params_.theta - 2.0 * C * params_.delta * S;
    return absorptive * absorptive + dispersive * dispersive
        + 4.0 * C * X * dS * (absorptive - dispersive * params_.delta);
}

double StateEquation::effective_detuning(double X) const
{
    return params_.theta - 2.0 * params_.C * params_.delta * saturation_sum(X);
}

std::complex<double> StateEquation::field_amplitude(double X, double Y) const
{
    const double S = saturation_sum(X);
    const std::complex<double> response(1.0 + 2.0 * params_.C * S,
                                        params_.theta - 2.0 * params_.C * params_.delta * S);
    return std::sqrt(Y) / response;
}

double state_equation(double X, const ModelParams& params)
{
    return StateEquation(params)(X);
}

double gaussian_state_equation(double X, const ModelParams& params)
{
    params.validate();
    if (X < 0.0)
        throw DomainError("state_equation: intensity must be >= 0");
    const double a = 1.0 + params.delta * params.delta;
    const double S = X > 0.0 ? std::log1p(X / a) / X : 1.0 / a;
    const double absorptive = 1.0 + 2.0 * params.C * S;
    const double dispersive = params.theta - 2.0 * params.C * params.delta * S;
    return X * (absorptive * absorptive + dispersive * dispersive);
}

double default_turning_search_limit(const ModelParams& params)
{
    return 100.0 * (1.0 + params.delta * params.delta) * (1.0 + params.C);
}

TurningPoints turning_points(const ModelParams& params)
{
    return turning_points(params, default_turning_search_limit(params));
}

TurningPoints turning_points(const ModelParams& params, double X_max)
{
    if (!(X_max > 0.0))
        throw DomainError("turning_points: X_max must be > 0");
    const StateEquation eq(params);
    TurningPoints result;
    if (params.C == 0.0)
        return result;

    const double a = 1.0 + params.delta * params.delta;
    const double X_lo = std::min(1e-6 * a, 1e-3 * X_max);
    const double ratio = std::log(X_max / X_lo) / (kTurningGrid - 1);
    std::vector<double> xs(kTurningGrid), slopes(kTurningGrid);
    for (int i = 0; i < kTurningGrid; ++i) {
        xs[i] = X_lo * std::exp(ratio * i);
        slopes[i] = eq.slope(xs[i]);
    }
    xs.back() = X_max;
    slopes.back() = eq.slope(X_max);

    auto f = [&eq](double X) { return eq.slope(X); };
    std::vector<double> points;
    for (int i = 0; i + 1 < kTurningGrid; ++i) {
        const double s0 = slopes[i], s1 = slopes[i + 1];
        if (s0 == 0.0) {
            push_unique(points, xs[i]);
        } else if ((s0 < 0.0) != (s1 < 0.0) && s1 != 0.0) {
            push_unique(points, bracketed_root(f, xs[i], xs[i + 1], s0, s1));
        }
    }
    // Pairs of zeros closer than one grid cell, and tangential zeros, show up
    // as a positive local minimum of the slope on the grid.
    for (int i = 1; i + 1 < kTurningGrid; ++i) {
        if (!(slopes[i] > 0.0 && slopes[i] <= slopes[i - 1] && slopes[i] <= slopes[i + 1]))
            continue;
        if (!(slopes[i - 1] > 0.0 && slopes[i + 1] > 0.0))
            continue;
        const auto [xm, sm] = boost::math::tools::brent_find_minima(f, xs[i - 1], xs[i + 1], 52);
        const double scale = eq(xm) / xm; // the slope's natural size, >= 1
        if (sm < 0.0) {
            push_unique(points, bracketed_root(f, xs[i - 1], xm, slopes[i - 1], sm));
            push_unique(points, bracketed_root(f, xm, xs[i + 1], sm, slopes[i + 1]));
        } else if (sm <= 1e-9 * scale) {
            push_unique(points, xm);
        }
    }
    std::sort(points.begin(), points.end());
    result.points = std::move(points);
    result.bistable = result.points.size() == 2;
    return result;
}

std::vector<SteadyState> solve_steady_states(double Y, const ModelParams& params)
{
    if (!(Y >= 0.0) || !std::isfinite(Y))
        throw DomainError("solve_steady_states: drive intensity must be finite and >= 0");
    const StateEquation eq(params);
    const double a = 1.0 + params.delta * params.delta;

    std::vector<double> roots;
    TurningPoints tps;
    if (Y == 0.0) {
        roots.push_back(0.0);
    } else {
        tps = turning_points(params, std::max(Y, default_turning_search_limit(params)));
        std::vector<double> edges{0.0};
        for (double tp : tps.points)
            if (tp > 0.0 && tp < Y)
                edges.push_back(tp);
        edges.push_back(Y);

        auto f = [&](double X) { return eq(X) - Y; };
        std::vector<double> values(edges.size());
        for (std::size_t i = 0; i < edges.size(); ++i)
            values[i] = f(edges[i]);
        // Drive sitting on a turning point: a double root. Zeroing the value
        // keeps the (monotone) neighbouring intervals from re-finding it.
        for (std::size_t i = 1; i + 1 < edges.size(); ++i) {
            if (std::abs(values[i]) <= 1e-12 * Y) {
                values[i] = 0.0;
                push_unique(roots, edges[i]);
            }
        }
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const double f0 = values[i], f1 = values[i + 1];
            if (f0 == 0.0 || f1 == 0.0) {
                if (f1 == 0.0 && i + 2 == edges.size())
                    push_unique(roots, edges[i + 1]);
                continue;
            }
            if ((f0 < 0.0) != (f1 < 0.0))
                push_unique(roots, bracketed_root(f, edges[i], edges[i + 1], f0, f1));
        }
        if (roots.empty()) {
            std::ostringstream msg;
            msg << "solve_steady_states: no root bracketed for Y = " << Y << " (C = " << params.C
                << ", delta = " << params.delta << ", theta = " << params.theta << ")";
            throw NumericalError(msg.str());
        }
        std::sort(roots.begin(), roots.end());
    }

    std::vector<SteadyState> states;
    states.reserve(roots.size());
    for (double X : roots) {
        SteadyState ss;
        ss.X = X;
        ss.Y = Y;
        ss.x = eq.field_amplitude(X, Y);
        ss.slope = eq.slope(X);
        ss.stable = ss.slope >= 0.0;
        if (!ss.stable)
            ss.branch = Branch::Middle;
        else if (tps.bistable)
            ss.branch = X <= std::sqrt(tps.points[0] * tps.points[1]) ? Branch::Lower : Branch::Upper;
        else
            ss.branch = Branch::Monostable;
        for (const auto& b : eq.bins()) {
            BinState bs;
            bs.u = b.u;
            bs.w = b.w;
            bs.d = a / (a + b.u * b.u * X);
            bs.p = b.u * ss.x * bs.d / std::complex<double>(1.0, params.delta);
            ss.bins.push_back(bs);
        }
        states.push_back(std::move(ss));
    }
    return states;
}

double peak_transmission_ratio(double C, double drive_Y, const ModelParams& params)
{
    if (!(drive_Y > 0.0))
        throw DomainError("peak_transmission_ratio: drive must be > 0");
    ModelParams p = params;
    p.C = C;
    const StateEquation eq(p);
    // Tuning theta onto the atomic dispersion leaves only the absorptive factor.
    auto g = [&](double X) {
        const double A = 1.0 + 2.0 * C * eq.saturation_sum(X);
        return X * A * A - drive_Y;
    };
    constexpr int n = 400;
    double hi = drive_Y, ghi = g(hi);
    if (ghi == 0.0)
        return 1.0;
    for (int i = 1; i < n; ++i) {
        const double lo = drive_Y * std::pow(1e-14, static_cast<double>(i) / (n - 1));
        const double glo = g(lo);
        if (glo < 0.0)
            return bracketed_root(g, lo, hi, glo, ghi) / drive_Y;
        hi = lo;
        ghi = glo;
    }
    throw NumericalError("peak_transmission_ratio: no bracket for the transmission peak");
}

double cooperativity_from_amplitudes(double bistable_peak, double empty_peak, double drive_Y,
                                     const ModelParams& params)
{
    if (!(bistable_peak > 0.0) || !(empty_peak > 0.0))
        throw DomainError("cooperativity_from_amplitudes: peak amplitudes must be > 0");
    const double target = bistable_peak / empty_peak;
    if (target > 1.0 + 1e-12)
        throw DomainError("cooperativity_from_amplitudes: bistable peak exceeds empty-cavity peak");
    if (target >= 1.0)
        return 0.0;

    auto h = [&](double C) { return peak_transmission_ratio(C, drive_Y, params) - target; };
    double lo = 0.0, hi = 1.0;
    double hhi = h(hi);
    while (hhi > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12)
            throw NumericalError("cooperativity_from_amplitudes: ratio not reached for C <= 1e12");
        hhi = h(hi);
    }
    const double hlo = h(lo);
    if (hhi == 0.0)
        return hi;
    boost::uintmax_t iterations = 300;
    const auto [a, b] = boost::math::tools::toms748_solve(
        h, lo, hi, hlo, hhi, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (a + b);
}

std::vector<double> fold_detunings(double Y, const ModelParams& params, double theta_lo,
                                   double theta_hi, int grid)
{
    if (!(theta_hi > theta_lo) || grid < 2)
        throw DomainError("fold_detunings: need theta_hi > theta_lo and grid >= 2");
    auto inside = [&](double theta) {
        ModelParams p = params;
        p.theta = theta;
        const TurningPoints tps = turning_points(p, std::max(Y, default_turning_search_limit(p)));
        if (!tps.bistable)
            return false;
        const StateEquation eq(p);
        const double upper = eq(tps.points[0]);
        const double lower = eq(tps.points[1]);
        return Y > lower && Y < upper;
    };

    std::vector<double> edges;
    double prev_theta = theta_lo;
    bool prev = inside(theta_lo);
    for (int i = 1; i < grid; ++i) {
        const double theta = theta_lo + (theta_hi - theta_lo) * i / (grid - 1);
        const bool now = inside(theta);
        if (now != prev) {
            double a = prev_theta, b = theta;
            for (int k = 0; k < 60; ++k) {
                const double mid = 0.5 * (a + b);
                if (inside(mid) == prev)
                    a = mid;
                else
                    b = mid;
            }
            edges.push_back(0.5 * (a + b));
        }
        prev = now;
        prev_theta = theta;
    }
    return edges;
}

} // namespace coldsqz
