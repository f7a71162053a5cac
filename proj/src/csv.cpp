#include "coldsqz/csv.hpp"

#include "coldsqz/errors.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

namespace coldsqz {

std::string format_double(double v)
{
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc())
        throw NumericalError("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

void CsvWriter::header(std::string_view line) { out_ << line << '\n'; }

void CsvWriter::row(std::initializer_list<double> values)
{
    bool first = true;
    for (double v : values) {
        if (!first)
            out_ << ',';
        out_ << format_double(v);
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

void write_trace(std::ostream& out, const Trace& trace)
{
    CsvWriter w(out);
    w.header(kTraceHeader);
    for (const TraceSample& s : trace.samples)
        w.row({format_double(s.t_s), format_double(s.c), format_double(s.theta_eff),
               format_double(s.X), std::string(to_string(s.branch)), format_double(s.s_meas),
               format_double(s.s_min), format_double(s.s_max), format_double(s.shot_ref)});
}

void write_spectra(std::ostream& out, std::span<const QuadratureSpectrum> spectra)
{
    CsvWriter w(out);
    w.header(kSpectrumHeader);
    for (const QuadratureSpectrum& q : spectra)
        w.row({q.omega_hz, q.V(0, 0), q.V(0, 1), q.V(1, 1), q.s_min, q.s_max, q.theta_min});
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    for (std::string& c : cells) {
        const auto b = c.find_first_not_of(" \t\r");
        const auto e = c.find_last_not_of(" \t\r");
        c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
    }
    return cells;
}

double parse_cell(const std::string& cell, const std::string& name, int line)
{
    double v = 0.0;
    const char* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (cell.empty() || ec != std::errc() || ptr != end) {
        std::ostringstream msg;
        msg << name << ":" << line << ": expected a number, got '" << cell << "'";
        throw DomainError(msg.str());
    }
    return v;
}

} // namespace

std::vector<CooperativitySample> read_cooperativity_csv(std::istream& in, const std::string& name)
{
    std::string line;
    int number = 0;
    bool with_sigma = false;
    bool have_header = false;
    std::vector<CooperativitySample> out;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const std::vector<std::string> cells = split(line);
        if (!have_header) {
            if (cells.size() < 2 || cells[0] != "t_s" || cells[1] != "c"
                || (cells.size() == 3 && cells[2] != "sigma_c") || cells.size() > 3)
                throw DomainError(name + ":" + std::to_string(number)
                                  + ": header must be t_s,c or t_s,c,sigma_c");
            with_sigma = cells.size() == 3;
            have_header = true;
            continue;
        }
        if (cells.size() != (with_sigma ? 3u : 2u))
            throw DomainError(name + ":" + std::to_string(number) + ": wrong number of columns");
        CooperativitySample s;
        s.t_s = parse_cell(cells[0], name, number);
        s.c = parse_cell(cells[1], name, number);
        if (with_sigma)
            s.sigma_c = parse_cell(cells[2], name, number);
        if (!(s.t_s >= 0.0) || !(s.c >= 0.0))
            throw DomainError(name + ":" + std::to_string(number) + ": t_s and c must be >= 0");
        out.push_back(s);
    }
    if (!have_header)
        throw DomainError(name + ": empty file");
    return out;
}

std::vector<CooperativitySample> read_cooperativity_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw DomainError(path + ": cannot open");
    return read_cooperativity_csv(in, path);
}

} // namespace coldsqz
