#include "coldsqz/constants.hpp"
#include "coldsqz/errors.hpp"
#include "coldsqz/experiment.hpp"
#include "coldsqz/rng.hpp"

#include <cmath>
#include <numeric>
#include <random>

namespace coldsqz {

namespace {

double filter_alpha(const ScanConfig& sc)
{
    return 1.0 - std::exp(-constants::two_pi * sc.vbw_hz * sc.dt_s);
}

double mean(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

void ScanConfig::validate() const
{
    if (!(duration_s > 0.0))
        throw DomainError("scan: duration_s must be > 0");
    if (!(dt_s > 0.0) || dt_s > duration_s)
        throw DomainError("scan: dt_s must be in (0, duration_s]");
    if (!(drive_Y >= 0.0))
        throw DomainError("scan: drive_Y must be >= 0");
    if (!std::isfinite(theta0))
        throw DomainError("scan: theta0 must be finite");
    if (!std::isfinite(theta_rate))
        throw DomainError("scan: theta_rate must be finite");
    if (!(lo_freq_hz > 0.0))
        throw DomainError("scan: lo_freq_hz must be > 0");
    if (!std::isfinite(lo_phase0))
        throw DomainError("scan: lo_phase0 must be finite");
    if (!(omega_hz >= 0.0))
        throw DomainError("scan: omega_hz must be >= 0");
    if (!(rel_noise >= 0.0 && rel_noise < 1.0))
        throw DomainError("scan: rel_noise must be in [0, 1)");
    if (!(vbw_hz > 0.0))
        throw DomainError("scan: vbw_hz must be > 0");
    if (!(vbw_hz < 0.5 / dt_s))
        throw DomainError("scan: vbw_hz must be below the Nyquist frequency 1/(2 dt_s)");
    if (!(elec_floor >= 0.0))
        throw DomainError("scan: elec_floor must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0))
        throw DomainError("scan: eta must be in (0, 1]");
    if (mode == ScanMode::PiezoSweep && theta_rate == 0.0)
        throw DomainError("scan: theta_rate must be nonzero for a piezo sweep");
}

std::size_t ScanConfig::sample_count() const
{
    return static_cast<std::size_t>(std::floor(duration_s / dt_s + 1e-9)) + 1;
}

double lo_phase(double t, const ScanConfig& sc)
{
    return sc.lo_phase0 + constants::two_pi * sc.lo_freq_hz * t;
}

double analyzer_noise_bandwidth_ratio(const ScanConfig& sc)
{
    const double a = filter_alpha(sc);
    return a / (2.0 - a);
}

std::vector<double> analyzer_chain(std::span<const double> s_true, const ScanConfig& sc,
                                   std::uint64_t seed)
{
    sc.validate();
    std::vector<double> out(s_true.size());
    if (s_true.empty())
        return out;
    auto rng = make_stream(seed, 0);
    std::normal_distribution<double> normal;
    const double a = filter_alpha(sc);
    double y = 0.0;
    for (std::size_t i = 0; i < s_true.size(); ++i) {
        const double x = sc.rel_noise > 0.0 ? s_true[i] * (1.0 + sc.rel_noise * normal(rng)) : s_true[i];
        y = i == 0 ? x : y + a * (x - y);
        out[i] = y;
    }
    return out;
}

std::vector<double> calibrate_and_correct(std::span<const double> raw,
                                          std::span<const double> shot_raw,
                                          std::span<const double> elec)
{
    if (shot_raw.empty() || elec.empty())
        throw DomainError("calibrate_and_correct: shot and electronic references must be non-empty");
    const double e = mean(elec);
    const double denom = mean(shot_raw) - e;
    if (!(denom > 0.0))
        throw DomainError("calibrate_and_correct: mean shot level must exceed the electronic floor");
    std::vector<double> out(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i)
        out[i] = (raw[i] - e) / denom;
    return out;
}

} // namespace coldsqz
