#include "coldsqz/errors.hpp"
#include "coldsqz/model.hpp"
#include "coldsqz/noise.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace coldsqz;

namespace {

SteadyState lowest_stable(double Y, const ModelParams& p)
{
    for (const SteadyState& s : solve_steady_states(Y, p))
        if (s.stable)
            return s;
    throw std::runtime_error("no stable state");
}

double max_abs(const Eigen::Matrix2d& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("decoupled system at C = 0")
{
    ModelParams p;
    p.C = 0.0;
    p.theta = 0.0;
    p.delta = -20.0;
    // Unsaturated atoms: the field does not feed back and the Bloch block
    // relaxes at its bare rates.
    const SteadyState ss = solve_steady_states(1e-12, p).front();
    const FluctuationSystem fs = build_fluctuation_system(ss, p);
    REQUIRE(fs.dimension() == 5);
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(fs.drift).eigenvalues();
    std::vector<std::complex<double>> got(ev.data(), ev.data() + ev.size());
    const double k = p.kappa_hz, g = p.gamma_hz, gp = p.gamma_par_ratio * g;
    const std::vector<std::complex<double>> want = {{-k, 0.0}, {-k, 0.0}, {-g, g * 20.0}, {-g, -g * 20.0}, {-gp, 0.0}};
    for (const auto& w : want) {
        const auto it = std::min_element(got.begin(), got.end(), [&](auto a, auto b) { return std::abs(a - w) < std::abs(b - w); });
        CHECK(std::abs(*it - w) <= 1e-6 * std::abs(w));
        got.erase(it);
    }
    for (double omega : {0.0, 1e6, 5e6, 3e7}) {
        p.theta = 1.7;
        const auto q = output_spectrum(build_fluctuation_system(solve_steady_states(3.0, p).front(), p), omega);
        CHECK(max_abs(q.V - Eigen::Matrix2d::Identity()) <= 1e-12);
    }
}

TEST_CASE("stability of representative branches")
{
    ModelParams p;
    p.theta = -5.0;
    const SteadyState lower = lowest_stable(200.0, p);
    CHECK(max_drift_real_part(build_fluctuation_system(lower, p)) < 0.0);

    ModelParams a;
    a.C = 8.0;
    a.delta = 0.0;
    a.theta = 0.0;
    const TurningPoints tp = turning_points(a);
    const double Y = 0.5 * (state_equation(tp.points[0], a) + state_equation(tp.points[1], a));
    const auto roots = solve_steady_states(Y, a);
    REQUIRE(roots.size() == 3);
    CHECK(roots[1].branch == Branch::Middle);
    CHECK(max_drift_real_part(build_fluctuation_system(roots[1], a)) > 0.0);
}

TEST_CASE("quadrature extrema")
{
    Eigen::Matrix2d V;
    V << 0.6, 0.0, 0.0, 1.8;
    auto e = quadrature_extrema(V);
    CHECK(e.s_min == doctest::Approx(0.6));
    CHECK(e.s_max == doctest::Approx(1.8));
    CHECK(e.theta_min == doctest::Approx(0.0));

    e = quadrature_extrema(Eigen::Matrix2d::Identity());
    CHECK(e.s_min == 1.0);
    CHECK(e.s_max == 1.0);
    CHECK(e.theta_min == 0.0);

    V << 1.2, 0.3, 0.3, 1.2;
    e = quadrature_extrema(V);
    const auto [lo, hi] = oracle::sym2_eigen(1.2, 0.3, 1.2);
    CHECK(e.s_min == doctest::Approx(lo).epsilon(1e-14));
    CHECK(e.s_max == doctest::Approx(hi).epsilon(1e-14));
    CHECK(e.s_min == doctest::Approx(0.9));
    CHECK(e.s_max == doctest::Approx(1.5));
    CHECK(e.theta_min == doctest::Approx(3.0 * std::numbers::pi / 4.0));

    V << 1.0, 0.2, 0.25, 1.0;
    CHECK_THROWS_AS(quadrature_extrema(V), DomainError);
}

TEST_CASE("property: minor-axis angle gives the minimum quadrature noise")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        QuadratureSpectrum q;
        const double a = 1.0 + u(rng), c = 1.0 + u(rng), b = 0.4 * u(rng);
        q.V << a, b, b, c;
        const auto e = quadrature_extrema(q.V);
        CHECK(e.theta_min >= 0.0);
        CHECK(e.theta_min < std::numbers::pi);
        CHECK(q.at_phase(e.theta_min) == doctest::Approx(e.s_min).epsilon(1e-12));
        CHECK(q.at_phase(e.theta_min + std::numbers::pi / 2) == doctest::Approx(e.s_max).epsilon(1e-12));
    }
}

TEST_CASE("efficiency correction")
{
    CHECK(apply_efficiency(1.0, 0.9) == doctest::Approx(1.0));
    CHECK(apply_efficiency(0.0, 0.9) == doctest::Approx(0.1));
    CHECK(apply_efficiency(0.33, 0.9) == doctest::Approx(0.397));
    CHECK_THROWS_AS(apply_efficiency(-0.1, 0.9), DomainError);
    CHECK_THROWS_AS(apply_efficiency(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(apply_efficiency(0.5, 1.1), DomainError);
    DetectionChain d;
    CHECK_NOTHROW(d.validate());
    CHECK(d.photodiode_qe * d.mode_overlap == doctest::Approx(d.eta));
}

TEST_CASE("property: vacuum passivity at negligible intensity")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uC(0.0, 500.0), ud(-30.0, 30.0), ut(-10.0, 10.0), uo(0.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        ModelParams p;
        p.C = uC(rng);
        p.delta = ud(rng);
        p.theta = ut(rng);
        if (i % 4 == 0) {
            p.transverse = Transverse::GaussianBins;
            p.bin_count = 8;
        }
        const double X = 1e-6;
        const SteadyState ss = solve_steady_states(state_equation(X, p), p).front();
        const auto q = output_spectrum(build_fluctuation_system(ss, p), uo(rng) * p.kappa_hz);
        CHECK(max_abs(q.V - Eigen::Matrix2d::Identity()) <= 1e-6);
    }
}

TEST_CASE("vacuum covariance inside the cavity from the Lyapunov equation")
{
    // A passive system with vacuum inputs holds the field in vacuum:
    // symmetric-ordered covariance 1/4 per quadrature.
    ModelParams p;
    p.C = 50.0;
    p.delta = -4.0;
    p.theta = 1.0;
    const SteadyState ss = solve_steady_states(state_equation(1e-9, p), p).front();
    const FluctuationSystem fs = build_fluctuation_system(ss, p);
    const Eigen::MatrixXd P = oracle::lyapunov(fs.drift, fs.diffusion());
    CHECK(std::abs(P(0, 0) - 0.25) <= 1e-6);
    CHECK(std::abs(P(1, 1) - 0.25) <= 1e-6);
    CHECK(std::abs(P(0, 1)) <= 1e-6);
}

TEST_CASE("diffusion is symmetric positive semidefinite")
{
    ModelParams p;
    p.theta = -5.0;
    p.transverse = Transverse::GaussianBins;
    p.bin_count = 8;
    for (double Y : {1.0, 100.0, 250.0}) {
        for (const SteadyState& s : solve_steady_states(Y, p)) {
            const Eigen::MatrixXd D = build_fluctuation_system(s, p).diffusion();
            CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * D.cwiseAbs().maxCoeff());
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(D).eigenvalues();
            CHECK(ev.minCoeff() >= -1e-9 * ev.maxCoeff());
        }
    }
}

TEST_CASE("property: uncertainty product and positivity on stable states")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uC(0.0, 300.0), ud(-30.0, 30.0), ut(-10.0, 10.0), uly(-2.0, 4.0), uo(0.0, 4.0);
    int tested = 0;
    while (tested < 200) {
        ModelParams p;
        p.C = uC(rng);
        p.delta = ud(rng);
        p.theta = ut(rng);
        for (const SteadyState& s : solve_steady_states(std::pow(10.0, uly(rng)), p)) {
            if (!s.stable)
                continue;
            const FluctuationSystem fs = build_fluctuation_system(s, p);
            if (max_drift_real_part(fs) >= 0.0)
                continue;
            const auto q = output_spectrum(fs, uo(rng) * p.kappa_hz);
            CHECK(q.s_min >= -1e-9);
            CHECK(q.s_min * q.s_max >= 1.0 - 1e-9);
            ++tested;
        }
    }
}

TEST_CASE("property: spectrum depends on N only through C")
{
    ModelParams p;
    p.theta = -5.0;
    const SteadyState s = lowest_stable(200.0, p);
    const auto reference = output_spectrum(build_fluctuation_system(s, p), 5e6);
    for (double N : {1.0, 1e3, 1e9}) {
        ModelParams q = p;
        q.n_atoms = N;
        const auto v = output_spectrum(build_fluctuation_system(s, q), 5e6);
        CHECK(max_abs(v.V - reference.V) <= 1e-6 * max_abs(reference.V));
    }
}

TEST_CASE("high-frequency roll-off")
{
    ModelParams p;
    p.theta = -5.0;
    const SteadyState s = lowest_stable(250.0, p);
    const FluctuationSystem fs = build_fluctuation_system(s, p);
    for (double r : {20.0, 50.0, 200.0}) {
        const auto q = output_spectrum(fs, r * p.kappa_hz);
        CHECK(max_abs(q.V - Eigen::Matrix2d::Identity()) <= 10.0 / (r * r));
    }
}

TEST_CASE("zero-frequency excess noise diverges approaching a turning point")
{
    ModelParams p;
    p.C = 10.0;
    p.delta = 0.0;
    p.theta = 0.0;
    const TurningPoints tp = turning_points(p);
    REQUIRE(tp.bistable);
    const double Y_fold = state_equation(tp.points[0], p);
    double previous = 0.0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const SteadyState s = lowest_stable(Y_fold * (1.0 - eps), p);
        const auto q = output_spectrum(build_fluctuation_system(s, p), 0.0);
        CHECK(q.s_max > previous);
        previous = q.s_max;
    }
    CHECK(previous > 100.0);
}

TEST_CASE("experimental regime: squeezing before efficiency at 5 MHz")
{
    ModelParams p;
    p.theta = -5.0;
    double best = 1.0;
    // Lower branch just below threshold across the release-scan cooperativities.
    for (double C = 20.0; C <= 220.0; C += 2.0) {
        p.C = C;
        const SteadyState s = lowest_stable(267.3, p);
        best = std::min(best, output_spectrum(build_fluctuation_system(s, p), 5e6).s_min);
    }
    CHECK(best >= 0.4);
    CHECK(best <= 0.65);
}

TEST_CASE("loss channel keeps vacuum passivity and adds vacuum")
{
    ModelParams p;
    p.loss_fraction = 0.3;
    p.C = 0.0;
    const auto q = output_spectrum(build_fluctuation_system(solve_steady_states(5.0, p).front(), p), 1e6);
    CHECK(max_abs(q.V - Eigen::Matrix2d::Identity()) <= 1e-12);
    ModelParams lossless;
    lossless.theta = -5.0;
    ModelParams lossy = lossless;
    lossy.loss_fraction = 0.3;
    const SteadyState s = lowest_stable(250.0, lossless);
    const double clean = output_spectrum(build_fluctuation_system(s, lossless), 5e6).s_min;
    const double degraded = output_spectrum(build_fluctuation_system(s, lossy), 5e6).s_min;
    CHECK(degraded > clean);
}

TEST_CASE("invalid inputs")
{
    ModelParams p;
    p.gamma_par_ratio = 2.5;
    const SteadyState s = solve_steady_states(1.0, p).front();
    CHECK_THROWS_AS(build_fluctuation_system(s, p), DomainError);
    ModelParams ok;
    const FluctuationSystem fs = build_fluctuation_system(solve_steady_states(1.0, ok).front(), ok);
    CHECK_THROWS_AS(output_spectrum(fs, -1.0), DomainError);
}
