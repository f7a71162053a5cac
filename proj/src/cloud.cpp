#include "coldsqz/cloud.hpp"

#include "coldsqz/errors.hpp"
#include "coldsqz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace coldsqz {

void CloudParams::validate() const
{
    if (!(sigma_r > 0.0))
        throw DomainError("cloud: sigma_r must be > 0");
    if (!(temp_k > 0.0))
        throw DomainError("cloud: temp_k must be > 0");
    if (!(mass_kg > 0.0))
        throw DomainError("cloud: mass_kg must be > 0");
    if (!(c0 >= 0.0))
        throw DomainError("cloud: c0 must be >= 0");
    if (!(g_grav >= 0.0))
        throw DomainError("cloud: g_grav must be >= 0");
}

double CloudParams::sigma_v() const { return std::sqrt(constants::boltzmann * temp_k / mass_kg); }

double CloudParams::tau_r() const { return sigma_r / sigma_v(); }

double CloudParams::tau_g() const
{
    if (g_grav == 0.0)
        return std::numeric_limits<double>::infinity();
    return 2.0 * std::sqrt(2.0) * sigma_v() / g_grav;
}

double cooperativity_decay(double t, double c0, double tau_r, double tau_g)
{
    if (!(t >= 0.0))
        throw DomainError("cooperativity_decay: t must be >= 0");
    const double r2 = tau_r * tau_r;
    const double t2 = t * t;
    const double lorentz = r2 / (r2 + t2);
    if (std::isinf(tau_g))
        return c0 * lorentz;
    return c0 * lorentz * std::exp(-t2 * t2 / (tau_g * tau_g * (r2 + t2)));
}

double cooperativity_decay(double t, const CloudParams& cp)
{
    cp.validate();
    return cooperativity_decay(t, cp.c0, cp.tau_r(), cp.tau_g());
}

double finite_waist_cooperativity(double t, const CloudParams& cp, double waist)
{
    cp.validate();
    if (!(waist > 0.0))
        throw DomainError("finite_waist_cooperativity: waist must be > 0");
    const double beam = 0.25 * waist * waist;
    const double sr2 = cp.sigma_r * cp.sigma_r;
    const double sv = cp.sigma_v();
    const double spread = sr2 + sv * sv * t * t + beam;
    const double drop = 0.5 * cp.g_grav * t * t;
    return cp.c0 * (sr2 + beam) / spread * std::exp(-drop * drop / (2.0 * spread));
}

namespace {

constexpr std::size_t kBlockSize = 8192;

struct BlockSums {
    std::vector<double> sum;
    std::vector<double> sum_sq;
};

// Weights for one block; transverse plane (y horizontal, z up), beam along x.
void run_block(const CloudParams& cp, double waist, std::span<const double> times,
               McEstimator estimator, std::uint64_t seed, std::size_t block, std::size_t count,
               BlockSums& out)
{
    auto rng = make_stream(seed, block);
    std::normal_distribution<double> normal;
    const double sv = cp.sigma_v();
    const double sr = cp.sigma_r;
    out.sum.assign(times.size(), 0.0);
    out.sum_sq.assign(times.size(), 0.0);

    if (estimator == McEstimator::Beam) {
        const double beam_sd = 0.5 * waist;
        const double inv = 1.0 / (2.0 * sr * sr);
        for (std::size_t i = 0; i < count; ++i) {
            const double by = beam_sd * normal(rng), bz = beam_sd * normal(rng);
            const double vy = sv * normal(rng), vz = sv * normal(rng);
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double t = times[k];
                const double y0 = by - vy * t;
                const double z0 = bz - vz * t + 0.5 * cp.g_grav * t * t;
                const double wgt = std::exp(-(y0 * y0 + z0 * z0) * inv);
                out.sum[k] += wgt;
                out.sum_sq[k] += wgt * wgt;
            }
        }
    } else {
        const double inv = 2.0 / (waist * waist);
        for (std::size_t i = 0; i < count; ++i) {
            const double y0 = sr * normal(rng), z0 = sr * normal(rng);
            const double vy = sv * normal(rng), vz = sv * normal(rng);
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double t = times[k];
                const double y = y0 + vy * t;
                const double z = z0 + vz * t - 0.5 * cp.g_grav * t * t;
                const double wgt = std::exp(-(y * y + z * z) * inv);
                out.sum[k] += wgt;
                out.sum_sq[k] += wgt * wgt;
            }
        }
    }
}

} // namespace

McResult mc_cooperativity(const CloudParams& cp, double waist, std::span<const double> times,
                          const McOptions& options)
{
    cp.validate();
    if (!(waist > 0.0))
        throw DomainError("mc_cooperativity: waist must be > 0");
    if (options.samples < 2)
        throw DomainError("mc_cooperativity: at least 2 samples required");
    for (double t : times)
        if (!(t >= 0.0))
            throw DomainError("mc_cooperativity: times must be >= 0");

    McResult result;
    if (waist > cp.sigma_r / 5.0) {
        std::ostringstream msg;
        msg << "beam waist " << waist << " m exceeds sigma_r/5; finite-waist bias is not negligible";
        result.warnings.push_back(msg.str());
    }
    if (options.samples < 10'000)
        result.warnings.push_back("fewer than 1e4 samples; estimates are noisy");

    const std::size_t blocks = (options.samples + kBlockSize - 1) / kBlockSize;
    std::vector<BlockSums> sums(blocks);
    unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(blocks)));

    auto work = [&](unsigned id) {
        for (std::size_t b = id; b < blocks; b += workers) {
            const std::size_t count = std::min(kBlockSize, options.samples - b * kBlockSize);
            run_block(cp, waist, times, options.estimator, options.seed, b, count, sums[b]);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned id = 0; id < workers; ++id)
            pool.emplace_back(work, id);
    }

    const double sr2 = cp.sigma_r * cp.sigma_r;
    const double beam = 0.25 * waist * waist;
    const double norm = options.estimator == McEstimator::Beam ? cp.c0 * (sr2 + beam) / sr2
                                                               : cp.c0 * (sr2 + beam) / beam;
    const double n = static_cast<double>(options.samples);
    result.samples.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        double s = 0.0, s2 = 0.0;
        for (const BlockSums& b : sums) {
            s += b.sum[k];
            s2 += b.sum_sq[k];
        }
        const double mean = s / n;
        const double var = std::max(0.0, (s2 / n - mean * mean) * n / (n - 1.0));
        result.samples.push_back({times[k], norm * mean, norm * std::sqrt(var / n)});
    }
    return result;
}

} // namespace coldsqz
