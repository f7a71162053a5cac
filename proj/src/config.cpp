#include "coldsqz/config.hpp"

#include "coldsqz/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace coldsqz {

namespace {

enum class Kind { Real, Integer, Seed, Choice, OptionalReal, Text };

using Check = std::function<std::optional<std::string>(double)>;

struct KeySpec {
    std::string name;
    Kind kind;
    std::string fallback;
    Check check;
    std::vector<std::string> choices;
};

Check positive()
{
    return [](double v) -> std::optional<std::string> {
        if (v > 0.0 && std::isfinite(v))
            return std::nullopt;
        return "must be > 0";
    };
}

Check non_negative()
{
    return [](double v) -> std::optional<std::string> {
        if (v >= 0.0 && std::isfinite(v))
            return std::nullopt;
        return "must be >= 0";
    };
}

Check finite()
{
    return [](double v) -> std::optional<std::string> {
        if (std::isfinite(v))
            return std::nullopt;
        return "must be finite";
    };
}

Check at_least(double lo)
{
    return [lo](double v) -> std::optional<std::string> {
        if (v >= lo && std::isfinite(v))
            return std::nullopt;
        std::ostringstream msg;
        msg << "must be >= " << lo;
        return msg.str();
    };
}

Check half_open_unit(bool include_zero)
{
    // (0, 1] or [0, 1)
    return [include_zero](double v) -> std::optional<std::string> {
        if (include_zero ? (v >= 0.0 && v < 1.0) : (v > 0.0 && v <= 1.0))
            return std::nullopt;
        return include_zero ? "must be in [0, 1)" : "must be in (0, 1]";
    };
}

// Drive calibration: 25 uW of probe power is 0.97 of the release-scan
// bistability threshold for the default cloud and cavity.
constexpr const char* kDefaultSatPower = "9.3513e-08";

const std::vector<KeySpec>& specs()
{
    static const std::vector<KeySpec> table = {
        {"model.C", Kind::Real, "220", non_negative(), {}},
        {"model.delta", Kind::Real, "-20", finite(), {}},
        {"model.theta", Kind::Real, "0", finite(), {}},
        {"model.kappa_hz", Kind::Real, "5e6", positive(), {}},
        {"model.gamma_hz", Kind::Real, "2.6e6", positive(), {}},
        {"model.gamma_par_ratio", Kind::Real, "2", positive(), {}},
        {"model.n_atoms", Kind::Real, "1e6", at_least(1.0), {}},
        {"model.transverse", Kind::Choice, "plane", {}, {"plane", "gaussian"}},
        {"model.bins", Kind::Integer, "32", at_least(1.0), {}},
        {"model.loss_fraction", Kind::Real, "0", half_open_unit(true), {}},
        {"model.sat_power_w", Kind::Real, kDefaultSatPower, positive(), {}},

        {"cloud.sigma_r_m", Kind::Real, "4e-3", positive(), {}},
        {"cloud.temp_k", Kind::Real, "5e-3", positive(), {}},
        {"cloud.mass_kg", Kind::Real, "2.20695e-25", positive(), {}},
        {"cloud.c0", Kind::Real, "220", non_negative(), {}},
        {"cloud.g_grav", Kind::Real, "9.80665", non_negative(), {}},
        {"cloud.waist_m", Kind::Real, "2.6e-4", positive(), {}},
        {"cloud.samples", Kind::Integer, "1000000", at_least(2.0), {}},
        {"cloud.t_max_s", Kind::Real, "30e-3", positive(), {}},
        {"cloud.n_times", Kind::Integer, "31", at_least(2.0), {}},
        {"cloud.estimator", Kind::Choice, "beam", {}, {"beam", "atoms"}},
        {"cloud.threads", Kind::Integer, "0", at_least(0.0), {}},

        {"scan.duration_s", Kind::Real, "30e-3", positive(), {}},
        {"scan.dt_s", Kind::Real, "2e-6", positive(), {}},
        {"scan.drive_Y", Kind::OptionalReal, "", non_negative(), {}},
        {"scan.probe_power_w", Kind::Real, "25e-6", non_negative(), {}},
        {"scan.theta0", Kind::Real, "-5", finite(), {}},
        {"scan.theta_rate", Kind::Real, "1000", finite(), {}},
        {"scan.lo_freq_hz", Kind::Real, "1000", positive(), {}},
        {"scan.lo_phase0", Kind::Real, "0", finite(), {}},
        {"scan.omega_hz", Kind::Real, "5e6", non_negative(), {}},
        {"scan.rel_noise", Kind::Real, "0.1", half_open_unit(true), {}},
        {"scan.vbw_hz", Kind::Real, "20e3", positive(), {}},
        {"scan.elec_floor", Kind::Real, "0.1", non_negative(), {}},
        {"scan.seed", Kind::Seed, "1", {}, {}},
        {"scan.omega_min_hz", Kind::Real, "0", non_negative(), {}},
        {"scan.omega_max_hz", Kind::Real, "20e6", non_negative(), {}},
        {"scan.n_omega", Kind::Integer, "41", at_least(1.0), {}},
        {"scan.fock_cutoff", Kind::Integer, "15", at_least(1.0), {}},

        {"detection.eta", Kind::Real, "0.9", half_open_unit(false), {}},
        {"detection.pd_qe", Kind::Real, "0.96", half_open_unit(false), {}},
        {"detection.overlap", Kind::Real, "0.9375", half_open_unit(false), {}},

        {"output.path", Kind::Text, "-", {}, {}},
    };
    return table;
}

const KeySpec* find_spec(const std::string& key)
{
    for (const KeySpec& s : specs())
        if (s.name == key)
            return &s;
    return nullptr;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<double> parse_real(const std::string& text)
{
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> parse_int(const std::string& text)
{
    Int v{};
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        return std::nullopt;
    return v;
}

// Type and range check of one value; nullopt when valid.
std::optional<std::string> check_value(const KeySpec& spec, const std::string& value)
{
    switch (spec.kind) {
    case Kind::Text:
        if (value.empty())
            return "must not be empty";
        return std::nullopt;
    case Kind::Choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) {
            std::string msg = "must be one of";
            for (const std::string& c : spec.choices)
                msg += " " + c;
            return msg;
        }
        return std::nullopt;
    case Kind::Seed:
        if (!parse_int<std::uint64_t>(value))
            return "expected an unsigned 64-bit integer, got '" + value + "'";
        return std::nullopt;
    case Kind::Integer: {
        const auto v = parse_int<long long>(value);
        if (!v)
            return "expected an integer, got '" + value + "'";
        return spec.check ? spec.check(static_cast<double>(*v)) : std::nullopt;
    }
    case Kind::OptionalReal:
        if (value.empty())
            return std::nullopt;
        [[fallthrough]];
    case Kind::Real: {
        const auto v = parse_real(value);
        if (!v)
            return "expected a number, got '" + value + "'";
        return spec.check ? spec.check(*v) : std::nullopt;
    }
    }
    return std::nullopt;
}

} // namespace

std::string to_string(const ConfigIssue& issue)
{
    std::ostringstream out;
    if (!issue.source.empty()) {
        out << issue.source;
        if (issue.line > 0)
            out << ":" << issue.line;
        out << ": ";
    }
    if (!issue.key.empty())
        out << issue.key << ": ";
    out << issue.message;
    return out.str();
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues)
{
    std::string out;
    for (const ConfigIssue& i : issues) {
        if (!out.empty())
            out += "\n";
        out += to_string(i);
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::invalid_argument(join_issues(issues))
    , issues_(std::move(issues))
{
}

std::vector<double> SpectrumGrid::frequencies() const
{
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        out[i] = count == 1 ? omega_min_hz
                            : omega_min_hz + (omega_max_hz - omega_min_hz) * i / (count - 1);
    return out;
}

RunConfig::RunConfig()
{
    for (const KeySpec& s : specs())
        values_[s.name] = s.fallback;
}

const std::vector<std::string>& RunConfig::known_keys()
{
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const KeySpec& s : specs())
            k.push_back(s.name);
        return k;
    }();
    return keys;
}

void RunConfig::merge(const std::string& key, const std::string& value, const std::string& source,
                      int line, std::vector<ConfigIssue>& issues)
{
    const KeySpec* spec = find_spec(key);
    if (!spec) {
        issues.push_back({key, source, line, "unknown key"});
        return;
    }
    if (const auto err = check_value(*spec, value)) {
        issues.push_back({key, source, line, *err});
        return;
    }
    values_[key] = value;
    explicit_.insert(key);
}

void RunConfig::merge_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({{"", path, 0, "cannot open config file"}});
    std::vector<ConfigIssue> issues;
    std::string line;
    std::string section;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty())
            continue;
        if (body.front() == '[') {
            if (body.back() != ']' || body.size() < 3) {
                issues.push_back({"", path, number, "malformed section header '" + body + "'"});
                continue;
            }
            section = trim(body.substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            issues.push_back({"", path, number, "expected 'key = value', got '" + body + "'"});
            continue;
        }
        std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) {
            issues.push_back({"", path, number, "missing key before '='"});
            continue;
        }
        if (!section.empty() && key.find('.') == std::string::npos)
            key = section + "." + key;
        merge(key, value, path, number, issues);
    }
    if (!issues.empty())
        throw ConfigError(std::move(issues));
}

void RunConfig::merge_flags(const std::vector<std::string>& flags)
{
    std::vector<ConfigIssue> issues;
    for (const std::string& flag : flags) {
        std::string_view body = flag;
        if (body.starts_with("--"))
            body.remove_prefix(2);
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({std::string(body), "flag", 0, "expected --section.key=value"});
            continue;
        }
        merge(trim(body.substr(0, eq)), trim(body.substr(eq + 1)), "flag", 0, issues);
    }
    if (!issues.empty())
        throw ConfigError(std::move(issues));
}

bool RunConfig::is_set(const std::string& key) const { return explicit_.contains(key); }

std::string RunConfig::raw(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        throw DomainError("config: unknown key " + key);
    return it->second;
}

void RunConfig::set(const std::string& key, const std::string& value)
{
    std::vector<ConfigIssue> issues;
    merge(key, value, "flag", 0, issues);
    if (!issues.empty())
        throw ConfigError(std::move(issues));
}

void RunConfig::set_default(const std::string& key, const std::string& value)
{
    if (is_set(key))
        return;
    const KeySpec* spec = find_spec(key);
    if (!spec || check_value(*spec, value))
        throw DomainError("config: invalid default for " + key);
    values_[key] = value;
}

namespace {

// Values were checked on merge, so parsing cannot fail here.
double real_of(const std::map<std::string, std::string>& v, const std::string& key)
{
    return *parse_real(v.at(key));
}

int int_of(const std::map<std::string, std::string>& v, const std::string& key)
{
    return static_cast<int>(*parse_int<long long>(v.at(key)));
}

template <class Fn>
auto collect(const std::string& what, Fn build)
{
    try {
        return build();
    } catch (const DomainError& e) {
        throw ConfigError({{what, "", 0, e.what()}});
    }
}

} // namespace

ModelParams RunConfig::model() const
{
    return collect("model", [&] {
        ModelParams p;
        p.C = real_of(values_, "model.C");
        p.delta = real_of(values_, "model.delta");
        p.theta = real_of(values_, "model.theta");
        p.kappa_hz = real_of(values_, "model.kappa_hz");
        p.gamma_hz = real_of(values_, "model.gamma_hz");
        p.gamma_par_ratio = real_of(values_, "model.gamma_par_ratio");
        p.n_atoms = real_of(values_, "model.n_atoms");
        p.loss_fraction = real_of(values_, "model.loss_fraction");
        p.transverse = values_.at("model.transverse") == "gaussian" ? Transverse::GaussianBins
                                                                     : Transverse::PlaneWave;
        p.bin_count = int_of(values_, "model.bins");
        p.validate();
        return p;
    });
}

CloudParams RunConfig::cloud() const
{
    return collect("cloud", [&] {
        CloudParams c;
        c.sigma_r = real_of(values_, "cloud.sigma_r_m");
        c.temp_k = real_of(values_, "cloud.temp_k");
        c.mass_kg = real_of(values_, "cloud.mass_kg");
        c.c0 = real_of(values_, "cloud.c0");
        c.g_grav = real_of(values_, "cloud.g_grav");
        c.validate();
        return c;
    });
}

double RunConfig::drive_Y() const
{
    const std::string& y = values_.at("scan.drive_Y");
    if (!y.empty())
        return *parse_real(y);
    return real_of(values_, "scan.probe_power_w") / real_of(values_, "model.sat_power_w");
}

ScanConfig RunConfig::scan(ScanMode mode) const
{
    return collect("scan", [&] {
        ScanConfig s;
        s.mode = mode;
        s.duration_s = real_of(values_, "scan.duration_s");
        s.dt_s = real_of(values_, "scan.dt_s");
        s.drive_Y = drive_Y();
        s.theta0 = real_of(values_, "scan.theta0");
        s.theta_rate = real_of(values_, "scan.theta_rate");
        s.lo_freq_hz = real_of(values_, "scan.lo_freq_hz");
        s.lo_phase0 = real_of(values_, "scan.lo_phase0");
        s.omega_hz = real_of(values_, "scan.omega_hz");
        s.rel_noise = real_of(values_, "scan.rel_noise");
        s.vbw_hz = real_of(values_, "scan.vbw_hz");
        s.elec_floor = real_of(values_, "scan.elec_floor");
        s.eta = real_of(values_, "detection.eta");
        s.seed = *parse_int<std::uint64_t>(values_.at("scan.seed"));
        s.validate();
        return s;
    });
}

DetectionChain RunConfig::detection() const
{
    return collect("detection", [&] {
        DetectionChain d;
        d.eta = real_of(values_, "detection.eta");
        d.photodiode_qe = real_of(values_, "detection.pd_qe");
        d.mode_overlap = real_of(values_, "detection.overlap");
        d.validate();
        return d;
    });
}

SpectrumGrid RunConfig::spectrum_grid() const
{
    SpectrumGrid g;
    g.omega_min_hz = real_of(values_, "scan.omega_min_hz");
    g.omega_max_hz = real_of(values_, "scan.omega_max_hz");
    g.count = int_of(values_, "scan.n_omega");
    g.fock_cutoff = int_of(values_, "scan.fock_cutoff");
    if (g.omega_max_hz < g.omega_min_hz)
        throw ConfigError({{"scan.omega_max_hz", "", 0, "must be >= scan.omega_min_hz"}});
    return g;
}

McRun RunConfig::mc() const
{
    McRun m;
    m.waist_m = real_of(values_, "cloud.waist_m");
    m.t_max_s = real_of(values_, "cloud.t_max_s");
    m.n_times = int_of(values_, "cloud.n_times");
    m.options.samples = static_cast<std::size_t>(*parse_int<long long>(values_.at("cloud.samples")));
    m.options.seed = *parse_int<std::uint64_t>(values_.at("scan.seed"));
    m.options.estimator = values_.at("cloud.estimator") == "atoms" ? McEstimator::Atoms : McEstimator::Beam;
    m.options.threads = static_cast<unsigned>(int_of(values_, "cloud.threads"));
    return m;
}

std::string RunConfig::output_path() const { return values_.at("output.path"); }

void RunConfig::validate() const
{
    std::vector<ConfigIssue> issues;
    auto attempt = [&](auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            issues.insert(issues.end(), e.issues().begin(), e.issues().end());
        }
    };
    attempt([&] { (void)model(); });
    attempt([&] { (void)cloud(); });
    attempt([&] { (void)scan(ScanMode::FreeRelease); });
    attempt([&] { (void)detection(); });
    attempt([&] { (void)spectrum_grid(); });
    if (!issues.empty())
        throw ConfigError(std::move(issues));
}

} // namespace coldsqz
