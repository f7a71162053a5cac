#include "coldsqz/errors.hpp"
#include "coldsqz/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace coldsqz {

namespace {

struct LegendreRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

LegendreRule gauss_legendre(int n)
{
    LegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        rule.nodes[i] = z;
        rule.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

constexpr int kNodesPerPanel = 4;

} // namespace

std::string_view to_string(Branch branch)
{
    switch (branch) {
    case Branch::Lower: return "lower";
    case Branch::Middle: return "middle";
    case Branch::Upper: return "upper";
    case Branch::Monostable: return "monostable";
    }
    return "unknown";
}

std::vector<TransverseBin> gaussian_bins(int count)
{
    if (count < 1)
        throw DomainError("gaussian_bins: bin count must be >= 1");

    // Small layouts use a single Gauss-Legendre panel over (0, 1].
    const int per_panel = count < 2 * kNodesPerPanel ? count : kNodesPerPanel;
    const int panels = count / per_panel;
    const int extra = count - panels * per_panel;

    std::vector<TransverseBin> bins;
    bins.reserve(count);
    for (int k = 0; k < panels; ++k) {
        const int n = per_panel + (k == 0 ? extra : 0);
        const double hi = std::ldexp(1.0, -k);
        const double lo = (k == panels - 1) ? 0.0 : std::ldexp(1.0, -(k + 1));
        const LegendreRule rule = gauss_legendre(n);
        for (int i = 0; i < n; ++i) {
            const double s = lo + 0.5 * (hi - lo) * (rule.nodes[i] + 1.0);
            const double weight = 0.5 * (hi - lo) * rule.weights[i];
            bins.push_back({std::sqrt(s), weight / s});
        }
    }
    return bins;
}

void ModelParams::validate() const
{
    auto fail = [](const std::string& what) { throw DomainError("model: " + what); };
    if (!(C >= 0.0) || !std::isfinite(C)) fail("C must be >= 0");
    if (!std::isfinite(delta)) fail("delta must be finite");
    if (!std::isfinite(theta)) fail("theta must be finite");
    if (!(kappa_hz > 0.0)) fail("kappa_hz must be > 0");
    if (!(gamma_hz > 0.0)) fail("gamma_hz must be > 0");
    if (!(gamma_par_ratio > 0.0)) fail("gamma_par_ratio must be > 0");
    if (!(n_atoms >= 1.0)) fail("n_atoms must be >= 1");
    if (!(loss_fraction >= 0.0 && loss_fraction < 1.0)) fail("loss_fraction must be in [0, 1)");
    if (transverse == Transverse::GaussianBins && bin_count < 1) fail("bins must be >= 1");
    if (transverse == Transverse::Custom) {
        if (custom_bins.empty()) fail("custom layout needs at least one bin");
        for (const auto& b : custom_bins)
            if (!(b.u > 0.0) || !(b.w > 0.0)) fail("custom bins need u > 0 and w > 0");
    }
}

std::vector<TransverseBin> ModelParams::bins() const
{
    switch (transverse) {
    case Transverse::PlaneWave: return {TransverseBin{1.0, 1.0}};
    case Transverse::GaussianBins: return gaussian_bins(bin_count);
    case Transverse::Custom: return custom_bins;
    }
    return {};
}

} // namespace coldsqz
