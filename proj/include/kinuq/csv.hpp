#pragma once

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "collocation.hpp"
#include "fokker_planck.hpp"
#include "moments.hpp"
#include "monte_carlo.hpp"

// CSV emit/ingest for run outputs. All numbers are written with 15
// significant digits so reruns with identical seeds produce byte-identical
// files regardless of thread count.
namespace kinuq::csv {

struct MissingData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.15g", x);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // fixed newlines on any host
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline void write_row(std::ofstream& out, const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << format_number(row[i]);
    }
    out << '\n';
}

} // namespace detail

// t,mass,mean,energy[,stderr_mean,stderr_energy]
inline void write_moments(const std::string& path, const MomentSeries& series,
                          bool with_stderr) {
    auto out = detail::open_out(path);
    out << (with_stderr ? "t,mass,mean,energy,stderr_mean,stderr_energy"
                        : "t,mass,mean,energy")
        << '\n';
    for (const auto& r : series.records) {
        std::vector<double> row{r.time, r.mass, r.mean, r.energy};
        if (with_stderr) {
            row.push_back(r.stderr_mean);
            row.push_back(r.stderr_energy);
        }
        detail::write_row(out, row);
    }
}

// t,E_0..E_M,E_bar,E_det
inline void write_ensemble_moments(const std::string& path,
                                   const uq::CollocationEnsemble& ens,
                                   const MomentSeries& det) {
    auto out = detail::open_out(path);
    out << 't';
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) out << ",E_" << k;
    out << ",E_bar,E_det\n";
    const std::size_t n_t = ens.n_times();
    for (std::size_t i = 0; i < n_t; ++i) {
        const auto avg = uq::averaged_moments(ens, i);
        std::vector<double> row{avg.time};
        for (std::size_t k = 0; k < ens.n_nodes(); ++k)
            row.push_back(ens.moments[k][i].energy);
        row.push_back(avg.energy);
        row.push_back(i < det.size() ? det[i].energy : det.back().energy);
        detail::write_row(out, row);
    }
}

// t,se_0..se_M,se_bar — MC standard errors of the per-node and averaged energy
inline void write_ensemble_moment_stderr(const std::string& path,
                                         const uq::CollocationEnsemble& ens) {
    auto out = detail::open_out(path);
    out << 't';
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) out << ",se_" << k;
    out << ",se_bar\n";
    for (std::size_t i = 0; i < ens.n_times(); ++i) {
        const auto avg = uq::averaged_moments(ens, i);
        std::vector<double> row{avg.time};
        for (std::size_t k = 0; k < ens.n_nodes(); ++k)
            row.push_back(ens.moments[k][i].stderr_energy);
        row.push_back(avg.stderr_energy);
        detail::write_row(out, row);
    }
}

// v,f
inline void write_field(const std::string& path, const fp::FieldOnGrid& f) {
    auto out = detail::open_out(path);
    out << "v,f\n";
    for (std::size_t i = 0; i < f.values.size(); ++i)
        detail::write_row(out, {f.grid.center(i), f.values[i]});
}

// v,f_0..f_M,fbar,var at one stored snapshot
inline void write_ensemble_fields(const std::string& path,
                                  const uq::CollocationEnsemble& ens,
                                  std::size_t snapshot_index) {
    const auto fbar = uq::mean_field(ens, snapshot_index);
    const auto var = uq::variance_field(ens, snapshot_index);
    auto out = detail::open_out(path);
    out << 'v';
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) out << ",f_" << k;
    out << ",fbar,var\n";
    for (std::size_t i = 0; i < fbar.values.size(); ++i) {
        std::vector<double> row{fbar.grid.center(i)};
        for (std::size_t k = 0; k < ens.n_nodes(); ++k)
            row.push_back(ens.fields[k][snapshot_index].values[i]);
        row.push_back(fbar.values[i]);
        row.push_back(var.values[i]);
        detail::write_row(out, row);
    }
}

// v,f
inline void write_histogram(const std::string& path, const mc::Histogram& h) {
    auto out = detail::open_out(path);
    out << "v,f\n";
    for (std::size_t i = 0; i < h.centers.size(); ++i)
        detail::write_row(out, {h.centers[i], h.density[i]});
}

// v,f_0..f_M,fbar,var over histogram bins
inline void write_ensemble_histograms(const std::string& path,
                                      const uq::CollocationEnsemble& ens) {
    const auto fbar = uq::mean_histogram(ens);
    const auto var = uq::variance_histogram(ens);
    auto out = detail::open_out(path);
    out << 'v';
    for (std::size_t k = 0; k < ens.n_nodes(); ++k) out << ",f_" << k;
    out << ",fbar,var\n";
    for (std::size_t i = 0; i < fbar.centers.size(); ++i) {
        std::vector<double> row{fbar.centers[i]};
        for (std::size_t k = 0; k < ens.n_nodes(); ++k)
            row.push_back(ens.histograms[k].density[i]);
        row.push_back(fbar.density[i]);
        row.push_back(var.density[i]);
        detail::write_row(out, row);
    }
}

// t,residual,mass,energy
inline void write_residuals(const std::string& path,
                            const std::vector<std::array<double, 4>>& history) {
    auto out = detail::open_out(path);
    out << "t,residual,mass,energy\n";
    for (const auto& r : history)
        detail::write_row(out, {r[0], r[1], r[2], r[3]});
}

// ---- reading ------------------------------------------------------------------

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw MissingData("column not found: " + name);
    }
};

namespace detail {

// strtod instead of std::stod: stod throws out_of_range on subnormal cells,
// but anything %g printed (tail densities underflow past 1e-308) must parse.
inline double parse_cell(const std::string& cell, const std::string& path) {
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        throw MissingData("bad numeric cell '" + cell + "' in " + path);
    return x;
}

} // namespace detail

inline Table read_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingData("cannot open: " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw MissingData("empty file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) t.header.push_back(cell);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream rs(line);
        while (std::getline(rs, cell, ','))
            row.push_back(detail::parse_cell(cell, path));
        if (row.size() != t.header.size())
            throw MissingData("ragged row in " + path);
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw MissingData("no data rows in: " + path);
    return t;
}

} // namespace kinuq::csv
