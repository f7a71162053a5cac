// coldsqz: command-line front end.
//
//   coldsqz [-c FILE] <subcommand> [--section.key=value ...]
//
// Exit status: 0 success, 1 invalid input or configuration, 2 numerical or
// runtime failure.

#include "coldsqz/cloud.hpp"
#include "coldsqz/config.hpp"
#include "coldsqz/csv.hpp"
#include "coldsqz/errors.hpp"
#include "coldsqz/experiment.hpp"
#include "coldsqz/master_equation.hpp"
#include "coldsqz/model.hpp"
#include "coldsqz/noise.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace coldsqz;

// Writes to output.path, or stdout for "-". The file is replaced only after
// the body succeeds.
void emit(const RunConfig& cfg, const std::function<void(std::ostream&)>& body)
{
    const std::string path = cfg.output_path();
    if (path == "-") {
        std::ostringstream buf;
        body(buf);
        std::cout << buf.str() << std::flush;
        return;
    }
    std::ostringstream buf;
    body(buf);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << buf.str();
    if (!out)
        throw std::runtime_error("write to " + path + " failed");
}

void warn(const std::vector<std::string>& warnings)
{
    for (const std::string& w : warnings)
        std::cerr << "warning: " << w << '\n';
}

void run_steady(const RunConfig& cfg)
{
    const ModelParams p = cfg.model();
    const double Y = cfg.drive_Y();
    const std::vector<SteadyState> states = solve_steady_states(Y, p);
    const StateEquation eq(p);
    emit(cfg, [&](std::ostream& out) {
        CsvWriter w(out);
        w.header("X,Y,x_re,x_im,branch,stable,slope,theta_eff");
        for (const SteadyState& s : states)
            w.row({format_double(s.X), format_double(s.Y), format_double(s.x.real()),
                   format_double(s.x.imag()), std::string(to_string(s.branch)),
                   s.stable ? "1" : "0", format_double(s.slope),
                   format_double(eq.effective_detuning(s.X))});
    });
}

void run_turning(const RunConfig& cfg)
{
    const ModelParams p = cfg.model();
    const TurningPoints tp = turning_points(p);
    emit(cfg, [&](std::ostream& out) {
        CsvWriter w(out);
        w.header("X,Y,bistable");
        for (double X : tp.points)
            w.row({format_double(X), format_double(state_equation(X, p)), tp.bistable ? "1" : "0"});
    });
}

void run_spectrum(const RunConfig& cfg)
{
    const ModelParams p = cfg.model();
    const SpectrumGrid grid = cfg.spectrum_grid();
    const std::vector<SteadyState> states = solve_steady_states(cfg.drive_Y(), p);
    const SteadyState* chosen = nullptr;
    for (const SteadyState& s : states)
        if (s.stable) {
            chosen = &s;
            break;
        }
    if (!chosen)
        throw NumericalError("spectrum: no stable steady state at this drive");
    const FluctuationSystem fs = build_fluctuation_system(*chosen, p);
    std::vector<QuadratureSpectrum> spectra;
    for (double omega : grid.frequencies())
        spectra.push_back(output_spectrum(fs, omega));
    if (max_drift_real_part(fs) >= 0.0)
        std::cerr << "warning: selected steady state is dynamically unstable\n";
    emit(cfg, [&](std::ostream& out) { write_spectra(out, spectra); });
}

void run_release(const RunConfig& cfg)
{
    const Trace trace = free_release_scan(cfg.scan(ScanMode::FreeRelease), cfg.cloud(), cfg.model());
    warn(trace.warnings);
    emit(cfg, [&](std::ostream& out) { write_trace(out, trace); });
}

void run_piezo(RunConfig cfg)
{
    cfg.set_default("model.C", "20");
    cfg.set_default("scan.theta0", "-15");
    cfg.set_default("scan.probe_power_w", "16e-6");
    const Trace trace = piezo_scan(cfg.scan(ScanMode::PiezoSweep), cfg.model());
    warn(trace.warnings);
    for (const BranchJump& j : trace.jumps)
        std::cerr << "jump at t=" << format_double(j.t_s) << " s, theta=" << format_double(j.theta)
                  << ", X " << format_double(j.X_before) << " -> " << format_double(j.X_after) << '\n';
    emit(cfg, [&](std::ostream& out) { write_trace(out, trace); });
}

void run_fitc(const RunConfig& cfg, const std::string& data)
{
    const std::vector<CooperativitySample> samples = read_cooperativity_csv(data);
    const CloudParams cloud = cfg.cloud();
    const FitResult r = fit_cooperativity(samples, cloud.mass_kg, cloud.g_grav);
    if (!r.ok)
        throw NumericalError("fitc: " + r.diagnostic);
    if (!r.diagnostic.empty())
        std::cerr << "warning: " << r.diagnostic << '\n';
    emit(cfg, [&](std::ostream& out) {
        CsvWriter w(out);
        w.header("c0,tau_r_s,tau_g_s,sigma_r_m,temp_k,sigma_v_m_s,c0_err,tau_r_err,tau_g_err,"
                 "sigma_r_err,temp_k_err,rms_residual,iterations");
        w.row({r.c0, r.tau_r, r.tau_g, r.sigma_r, r.temp_k, r.sigma_v, r.c0_err, r.tau_r_err,
               r.tau_g_err, r.sigma_r_err, r.temp_k_err, r.rms_residual,
               static_cast<double>(r.iterations)});
    });
}

void run_mc_cloud(const RunConfig& cfg)
{
    const CloudParams cloud = cfg.cloud();
    const McRun mc = cfg.mc();
    std::vector<double> times(static_cast<std::size_t>(mc.n_times));
    for (int i = 0; i < mc.n_times; ++i)
        times[i] = mc.t_max_s * i / (mc.n_times - 1);
    const McResult r = mc_cooperativity(cloud, mc.waist_m, times, mc.options);
    warn(r.warnings);
    emit(cfg, [&](std::ostream& out) {
        CsvWriter w(out);
        w.header("t_s,c_mc,sigma_c,c_model");
        for (const CooperativitySample& s : r.samples)
            w.row({s.t_s, s.c, s.sigma_c.value_or(0.0), cooperativity_decay(s.t_s, cloud)});
    });
}

void run_oracle(const RunConfig& cfg)
{
    const ModelParams p = cfg.model();
    const SpectrumGrid grid = cfg.spectrum_grid();
    const double photons = cfg.drive_Y() * single_atom_saturation_photons(p);
    const std::vector<double> omegas = grid.frequencies();
    const std::vector<QuadratureSpectrum> spectra =
        me_oracle_spectrum(p, std::isfinite(photons) ? photons : 0.0, omegas, grid.fock_cutoff);
    emit(cfg, [&](std::ostream& out) { write_spectra(out, spectra); });
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cavity squeezing by cold two-level atoms: steady states, noise spectra, "
                 "cloud dynamics and synthetic scans"};
    app.require_subcommand(1);
    app.fallthrough();
    app.allow_extras();
    std::string config_path;
    app.add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);

    struct Sub {
        CLI::App* app;
        std::function<void(const RunConfig&)> run;
    };
    std::string fit_data;
    std::map<std::string, Sub> subs;
    auto add = [&](const std::string& name, const std::string& help,
                   std::function<void(const RunConfig&)> run) {
        CLI::App* s = app.add_subcommand(name, help);
        s->allow_extras();
        subs[name] = {s, std::move(run)};
        return s;
    };
    add("steady", "steady states at drive scan.drive_Y", run_steady);
    add("turning", "turning points of the state equation", run_turning);
    add("spectrum", "output noise spectrum on the lowest stable branch", run_spectrum);
    add("release", "free-release scan trace", run_release);
    add("piezo", "piezo cavity-sweep trace", [](const RunConfig& c) { run_piezo(c); });
    add("fitc", "fit the decay law to a t_s,c[,sigma_c] file",
        [&](const RunConfig& c) { run_fitc(c, fit_data); })
        ->add_option("data", fit_data, "cooperativity samples CSV")
        ->required();
    add("mc-cloud", "Monte Carlo check of the cooperativity decay", run_mc_cloud);
    add("oracle", "single-atom master-equation reference spectrum", run_oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg.merge_file(config_path);
        for (auto& [name, sub] : subs) {
            if (!sub.app->parsed())
                continue;
            cfg.merge_flags(app.remaining(true));
            cfg.validate();
            sub.run(cfg);
        }
    } catch (const ConfigError& e) {
        for (const ConfigIssue& i : e.issues())
            std::cerr << "error: " << to_string(i) << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
