#pragma once

#include "coldsqz/cloud.hpp"
#include "coldsqz/experiment.hpp"
#include "coldsqz/noise.hpp"

#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coldsqz {

inline constexpr std::string_view kTraceHeader =
    "t_s,c,theta_eff,X,branch,s_meas,s_min,s_max,shot_ref";
inline constexpr std::string_view kSpectrumHeader = "omega_hz,v11,v12,v22,s_min,s_max,theta_min";

// Shortest representation that parses back to the same double.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out)
        : out_(out)
    {
    }

    void header(std::string_view line);
    void row(std::initializer_list<double> values);
    // Mixed row: cells already formatted.
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

void write_trace(std::ostream& out, const Trace& trace);
void write_spectra(std::ostream& out, std::span<const QuadratureSpectrum> spectra);

// Reads `t_s,c[,sigma_c]` with a header line. Throws DomainError naming the
// line of the first malformed row.
std::vector<CooperativitySample> read_cooperativity_csv(const std::string& path);
std::vector<CooperativitySample> read_cooperativity_csv(std::istream& in, const std::string& name);

} // namespace coldsqz
