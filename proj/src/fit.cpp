#include "coldsqz/cloud.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace coldsqz {

namespace {

struct Problem {
    Eigen::ArrayXd t;
    Eigen::ArrayXd c;
    Eigen::ArrayXd weight; // 1 / sigma^2
};

// Model and its derivatives with respect to log(C0), log(tau_r), log(tau_g).
Eigen::ArrayXd model(const Problem& pb, const Eigen::Vector3d& q, Eigen::MatrixXd* jac)
{
    const double c0 = std::exp(q(0)), tr = std::exp(q(1)), tg = std::exp(q(2));
    const Eigen::Index n = pb.t.size();
    Eigen::ArrayXd m(n);
    if (jac)
        jac->resize(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t2 = pb.t(i) * pb.t(i);
        const double r2 = tr * tr;
        const double den = r2 + t2;
        const double expo = t2 * t2 / (tg * tg * den);
        m(i) = c0 * r2 / den * std::exp(-expo);
        if (jac) {
            (*jac)(i, 0) = m(i);
            (*jac)(i, 1) = m(i) * (2.0 * t2 / den + 2.0 * expo * r2 / den);
            (*jac)(i, 2) = m(i) * 2.0 * expo;
        }
    }
    return m;
}

double cost(const Problem& pb, const Eigen::ArrayXd& m)
{
    return (pb.weight * (pb.c - m).square()).sum();
}

// Best C0 for fixed shape parameters (linear least squares).
double best_scale(const Problem& pb, const Eigen::ArrayXd& shape)
{
    const double den = (pb.weight * shape * shape).sum();
    return den > 0.0 ? (pb.weight * pb.c * shape).sum() / den : 0.0;
}

struct Refined {
    Eigen::Vector3d q = Eigen::Vector3d::Zero();
    Eigen::MatrixXd J;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

// Levenberg-Marquardt on the log parameters from q.
Refined refine(const Problem& pb, Eigen::Vector3d q)
{
    Refined out;
    Eigen::MatrixXd J;
    Eigen::ArrayXd m = model(pb, q, &J);
    double f = cost(pb, m);
    double lambda = 1e-3;
    const Eigen::VectorXd sw = pb.weight.sqrt().matrix();
    const double scale = (pb.weight * pb.c * pb.c).sum();
    int it = 0;
    bool converged = false;
    for (; it < 500 && !converged; ++it) {
        const Eigen::MatrixXd Jw = sw.asDiagonal() * J;
        const Eigen::VectorXd rw = (sw.array() * (pb.c - m)).matrix();
        const Eigen::Matrix3d JtJ = Jw.transpose() * Jw;
        const Eigen::Vector3d g = Jw.transpose() * rw;
        // Damping floor relative to the largest curvature keeps the step
        // finite when one direction is flat.
        const double floor = 1e-12 * std::max(JtJ.diagonal().maxCoeff(), 1e-300);
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries, lambda *= 10.0) {
            Eigen::Matrix3d H = JtJ;
            H.diagonal() += lambda * JtJ.diagonal().cwiseMax(floor);
            const Eigen::Vector3d step = H.ldlt().solve(g);
            if (!step.allFinite())
                continue;
            const Eigen::Vector3d qn = q + step;
            Eigen::MatrixXd Jn;
            const Eigen::ArrayXd mn = model(pb, qn, &Jn);
            const double fn = cost(pb, mn);
            if (std::isfinite(fn) && fn <= f) {
                converged = step.cwiseAbs().maxCoeff() < 1e-12 || (lambda < 1e-6 && f - fn <= 1e-15 * f)
                            || fn <= 1e-30 * scale;
                q = qn;
                m = mn;
                J = std::move(Jn);
                f = fn;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            converged = true; // no descent direction left
            break;
        }
    }
    out.q = q;
    out.J = std::move(J);
    out.f = f;
    out.iterations = it;
    out.converged = converged;
    return out;
}

FitResult failure(std::string why)
{
    FitResult r;
    r.ok = false;
    r.diagnostic = std::move(why);
    return r;
}

} // namespace

FitResult fit_cooperativity(std::span<const CooperativitySample> samples, double mass_kg,
                            double g_grav)
{
    if (!(mass_kg > 0.0) || !(g_grav > 0.0))
        return failure("mass_kg and g_grav must be > 0");
    if (samples.size() < 4)
        return failure("at least 4 samples required");

    Problem pb;
    const auto n = static_cast<Eigen::Index>(samples.size());
    pb.t.resize(n);
    pb.c.resize(n);
    pb.weight.resize(n);
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < n; ++i) {
        const CooperativitySample& s = samples[static_cast<std::size_t>(i)];
        if (!std::isfinite(s.t_s) || s.t_s < 0.0 || !std::isfinite(s.c) || s.c < 0.0)
            return failure("samples need finite t_s >= 0 and c >= 0");
        if (s.sigma_c && !(*s.sigma_c > 0.0 && std::isfinite(*s.sigma_c)))
            return failure("sigma_c must be finite and > 0 when given");
        pb.t(i) = s.t_s;
        pb.c(i) = s.c;
        pb.weight(i) = s.sigma_c ? 1.0 / (*s.sigma_c * *s.sigma_c) : 1.0;
        distinct.insert(s.t_s);
    }
    const double t_max = pb.t.maxCoeff();
    if (distinct.size() < 3 || !(t_max > 0.0))
        return failure("samples must span at least 3 distinct times > 0");
    if (!(pb.c.maxCoeff() > 0.0))
        return failure("all cooperativities are zero");

    // Coarse log grid over (tau_r, tau_g) in units of the sampled span. The
    // best cell of every tau_g column seeds one refinement, since the cost is
    // flat along tau_g wherever gravity is unresolved.
    constexpr int kGrid = 48;
    const double lo_r = std::log(1e-3 * t_max), hi_r = std::log(1e3 * t_max);
    const double lo_g = std::log(1e-2 * t_max), hi_g = std::log(1e4 * t_max);
    Refined best;
    for (int b = 0; b < kGrid; ++b) {
        double column_best = std::numeric_limits<double>::infinity();
        Eigen::Vector3d start;
        for (int a = 0; a < kGrid; ++a) {
            Eigen::Vector3d trial(0.0, lo_r + (hi_r - lo_r) * a / (kGrid - 1),
                                  lo_g + (hi_g - lo_g) * b / (kGrid - 1));
            const Eigen::ArrayXd shape = model(pb, trial, nullptr);
            const double scale = best_scale(pb, shape);
            if (!(scale > 0.0))
                continue;
            const double f = cost(pb, scale * shape);
            if (f < column_best) {
                column_best = f;
                trial(0) = std::log(scale);
                start = trial;
            }
        }
        if (!std::isfinite(column_best))
            continue;
        Refined r = refine(pb, start);
        if (r.f < best.f)
            best = std::move(r);
    }
    if (!std::isfinite(best.f))
        return failure("no positive-amplitude starting point found");
    const Eigen::Vector3d q = best.q;
    const Eigen::MatrixXd& J = best.J;
    const double f = best.f;
    const int it = best.iterations;
    const bool converged = best.converged;
    const Eigen::VectorXd sw = pb.weight.sqrt().matrix();

    FitResult r;
    r.iterations = it;
    r.c0 = std::exp(q(0));
    r.tau_r = std::exp(q(1));
    r.tau_g = std::exp(q(2));
    r.sigma_v = g_grav * r.tau_g / (2.0 * std::sqrt(2.0));
    r.temp_k = mass_kg * r.sigma_v * r.sigma_v / constants::boltzmann;
    r.sigma_r = r.tau_r * r.sigma_v;
    r.rms_residual = std::sqrt(f / static_cast<double>(n));

    const Eigen::MatrixXd Jw = sw.asDiagonal() * J;
    const Eigen::Matrix3d JtJ = Jw.transpose() * Jw;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(JtJ);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible())
        return failure("Jacobian is rank deficient; the data do not constrain all three parameters");
    // Residual variance: with explicit sigma_c the weights are absolute.
    const bool absolute = std::any_of(samples.begin(), samples.end(),
                                      [](const CooperativitySample& s) { return s.sigma_c.has_value(); });
    const double dof = static_cast<double>(std::max<Eigen::Index>(n - 3, 1));
    const double s2 = absolute ? 1.0 : f / dof;
    const Eigen::Matrix3d cov = s2 * lu.inverse();
    // Log-parameter covariances; sigma_r and T depend on (tau_r, tau_g) only.
    r.c0_err = r.c0 * std::sqrt(std::max(0.0, cov(0, 0)));
    r.tau_r_err = r.tau_r * std::sqrt(std::max(0.0, cov(1, 1)));
    r.tau_g_err = r.tau_g * std::sqrt(std::max(0.0, cov(2, 2)));
    r.sigma_r_err = r.sigma_r * std::sqrt(std::max(0.0, cov(1, 1) + 2.0 * cov(1, 2) + cov(2, 2)));
    r.temp_k_err = r.temp_k * 2.0 * std::sqrt(std::max(0.0, cov(2, 2)));

    const double decay = cooperativity_decay(t_max, r.c0, r.tau_r, r.tau_g) / r.c0;
    if (!(decay < 0.95))
        return failure("data show no resolvable decay over the sampled span");
    if (!std::isfinite(r.c0) || !std::isfinite(r.tau_r) || !std::isfinite(r.tau_g))
        return failure("fit diverged");
    r.ok = true;
    if (!converged) {
        std::ostringstream msg;
        msg << "iteration limit reached after " << it << " steps";
        r.diagnostic = msg.str();
    }
    return r;
}

} // namespace coldsqz
