#include "coldsqz/experiment.hpp"

#include "coldsqz/errors.hpp"
#include "coldsqz/rng.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace coldsqz {

namespace {

// Drive ordinate of the high-X turning point, where the upper branch ends;
// the bistable window at this C opens above it.
double lower_fold_drive(const ModelParams& params)
{
    const TurningPoints tp = turning_points(params);
    if (!tp.bistable)
        return std::numeric_limits<double>::infinity();
    return state_equation(tp.points[1], params);
}

double log_distance(double a, double b)
{
    return std::abs(std::log(a) - std::log(b));
}

struct Tracker {
    bool started = false;
    double X = 0.0;
    std::vector<double> stable_roots; // at the previous step
};

// Picks the stable root continuing the tracked branch. Returns true when the
// tracked branch vanished and the state landed on a different one.
bool track(Tracker& tr, const std::vector<SteadyState>& roots, std::size_t& chosen)
{
    std::vector<std::size_t> stable;
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (roots[i].stable)
            stable.push_back(i);
    if (stable.empty())
        throw NumericalError("scan: no stable steady state at this step");

    bool jumped = false;
    if (!tr.started || tr.X <= 0.0 || roots[stable.front()].X <= 0.0) {
        chosen = stable.front(); // start on the lowest stable branch
    } else {
        chosen = *std::min_element(stable.begin(), stable.end(), [&](std::size_t a, std::size_t b) {
            return log_distance(roots[a].X, tr.X) < log_distance(roots[b].X, tr.X);
        });
        // A jump: the new state continues some other previously stable root
        // better than the tracked one.
        const double X = roots[chosen].X;
        for (double other : tr.stable_roots)
            if (other != tr.X && other > 0.0 && log_distance(X, other) < log_distance(X, tr.X))
                jumped = true;
    }
    tr.started = true;
    tr.X = roots[chosen].X;
    tr.stable_roots.clear();
    for (std::size_t i : stable)
        tr.stable_roots.push_back(roots[i].X);
    return jumped;
}

using Control = std::pair<double, double>; // (C, theta) at time t

template <class ControlFn>
Trace run_scan(const ScanConfig& sc, const ModelParams& base, ControlFn control)
{
    sc.validate();
    base.validate();
    const std::size_t n = sc.sample_count();
    Trace trace;
    trace.samples.resize(n);

    Tracker tracker;
    ModelParams params = base;
    for (std::size_t i = 0; i < n; ++i) {
        TraceSample& s = trace.samples[i];
        s.t_s = static_cast<double>(i) * sc.dt_s;
        const auto [c, theta] = control(s.t_s);
        params.C = c;
        params.theta = theta;
        s.c = c;
        s.theta = theta;

        const std::vector<SteadyState> roots = solve_steady_states(sc.drive_Y, params);
        std::size_t k = 0;
        const double X_before = tracker.X;
        if (track(tracker, roots, k) && i > 0)
            trace.jumps.push_back({i, s.t_s, c, theta, X_before, roots[k].X});
        const SteadyState& ss = roots[k];
        s.X = ss.X;
        s.branch = ss.branch;
        s.theta_eff = StateEquation(params).effective_detuning(ss.X);

        const QuadratureSpectrum q =
            apply_efficiency(output_spectrum(build_fluctuation_system(ss, params), sc.omega_hz), sc.eta);
        s.s_min = q.s_min;
        s.s_max = q.s_max;
        s.s_true = q.at_phase(lo_phase(s.t_s, sc));
    }

    std::vector<double> signal(n), shot(n, 1.0 + sc.elec_floor), floor(n, sc.elec_floor);
    for (std::size_t i = 0; i < n; ++i)
        signal[i] = trace.samples[i].s_true + sc.elec_floor;
    const std::vector<double> raw = analyzer_chain(signal, sc, derive_seed(sc.seed, 1));
    const std::vector<double> shot_raw = analyzer_chain(shot, sc, derive_seed(sc.seed, 2));
    const std::vector<double> elec = analyzer_chain(floor, sc, derive_seed(sc.seed, 3));
    const std::vector<double> meas = calibrate_and_correct(raw, shot_raw, elec);
    const std::vector<double> shot_ref = calibrate_and_correct(shot_raw, shot_raw, elec);
    for (std::size_t i = 0; i < n; ++i) {
        trace.samples[i].s_meas = meas[i];
        trace.samples[i].shot_ref = shot_ref[i];
    }

    bool crossed = false;
    for (std::size_t i = 1; i < n && !crossed; ++i)
        crossed = (trace.samples[i - 1].theta_eff < 0.0) != (trace.samples[i].theta_eff < 0.0);
    if (!crossed)
        trace.warnings.push_back("cavity resonance is never crossed during the scan");
    return trace;
}

} // namespace

double bistability_threshold(const ModelParams& params, double c_lo, double c_hi)
{
    params.validate();
    if (!(c_lo >= 0.0 && c_hi >= c_lo))
        throw DomainError("bistability_threshold: need 0 <= c_lo <= c_hi");
    constexpr int kGrid = 240;
    ModelParams p = params;
    auto at = [&](double c) {
        p.C = c;
        return lower_fold_drive(p);
    };
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    std::vector<double> cs(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        cs[i] = c_lo + (c_hi - c_lo) * i / (kGrid - 1);
        const double y = at(cs[i]);
        if (y < best) {
            best = y;
            best_i = i;
        }
    }
    if (best_i < 0)
        return best;
    const double a = cs[std::max(best_i - 1, 0)];
    const double b = cs[std::min(best_i + 1, kGrid - 1)];
    if (b > a) {
        const auto r = boost::math::tools::brent_find_minima(
            [&](double c) {
                const double y = at(c);
                return std::isfinite(y) ? y : std::numeric_limits<double>::max();
            },
            a, b, 52);
        best = std::min(best, r.second);
    }
    return best;
}

Trace free_release_scan(const ScanConfig& sc, const CloudParams& cp, const ModelParams& params)
{
    cp.validate();
    if (sc.mode != ScanMode::FreeRelease)
        throw DomainError("free_release_scan: scan mode must be FreeRelease");
    const double tau_r = cp.tau_r();
    const double tau_g = cp.tau_g();
    return run_scan(sc, params, [&](double t) {
        return Control{cooperativity_decay(t, cp.c0, tau_r, tau_g), sc.theta0};
    });
}

Trace piezo_scan(const ScanConfig& sc, const ModelParams& params)
{
    if (sc.mode != ScanMode::PiezoSweep)
        throw DomainError("piezo_scan: scan mode must be PiezoSweep");
    return run_scan(sc, params,
                    [&](double t) { return Control{params.C, sc.theta0 + sc.theta_rate * t}; });
}

} // namespace coldsqz
