#include "pfsl/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "pfsl/units.hpp"

namespace pfsl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    return out;
}

const char* axis_column(GridAxis a) {
    switch (a) {
        case GridAxis::Cv: return "c_v_f";
        case GridAxis::Ztx: return "z_tx_ohm";
        case GridAxis::Vdc: return "v_dc_v";
        case GridAxis::Fin: return "f_in_hz";
    }
    return "x";
}

}  // namespace

void write_sweep_csv(const SweepTrace& trace, const std::string& path) {
    if (trace.records.empty()) throw IoError("write_sweep_csv: empty trace");
    auto out = open_out(path);
    out << "p_in_dbm,s21_db,s11_db,p_sub_dbm,v_diode_peak_v\n";
    for (const auto& r : trace.records) {
        out << fmt(dbm_from_watts(r.p_in_w)) << ','
            << fmt(db_from_mag(std::abs(r.s21_ls))) << ','
            << fmt(db_from_mag(std::abs(r.s11_ls))) << ','
            << fmt(dbm_from_watts(r.p_sub_w)) << ',' << fmt(r.diode_v_peak) << '\n';
    }
}

void write_sparams_csv(const std::vector<SParameters>& points, const std::string& path) {
    if (points.empty()) throw IoError("write_sparams_csv: no points");
    auto out = open_out(path);
    out << "f_hz,s11_db,s21_db,s11_re,s11_im,s21_re,s21_im,s12_re,s12_im,s22_re,s22_im\n";
    for (const auto& p : points) {
        out << fmt(p.frequency) << ',' << fmt(db_from_mag(std::abs(p.s11))) << ','
            << fmt(db_from_mag(std::abs(p.s21))) << ',' << fmt(p.s11.real()) << ','
            << fmt(p.s11.imag()) << ',' << fmt(p.s21.real()) << ',' << fmt(p.s21.imag())
            << ',' << fmt(p.s12.real()) << ',' << fmt(p.s12.imag()) << ','
            << fmt(p.s22.real()) << ',' << fmt(p.s22.imag()) << '\n';
    }
}

void write_touchstone(const std::vector<SParameters>& points, const std::string& path,
                      double z0) {
    if (points.empty()) throw IoError("write_touchstone: no points");
    auto out = open_out(path);
    out << "# HZ S RI R " << fmt(z0) << "\n";
    for (const auto& p : points) {
        out << fmt(p.frequency) << ' ' << fmt(p.s11.real()) << ' ' << fmt(p.s11.imag())
            << ' ' << fmt(p.s21.real()) << ' ' << fmt(p.s21.imag()) << ' '
            << fmt(p.s12.real()) << ' ' << fmt(p.s12.imag()) << ' '
            << fmt(p.s22.real()) << ' ' << fmt(p.s22.imag()) << '\n';
    }
}

void write_grid_csv(const ContourGrid& grid, const std::string& path) {
    if (grid.values.empty()) throw IoError("write_grid_csv: empty grid");
    auto out = open_out(path);
    const char* value_col = grid.metric == GridMetric::Pth    ? "p_th_dbm"
                            : grid.metric == GridMetric::IlSs ? "il_ss_db"
                                                              : "p_max_dbm";
    out << axis_column(grid.x.axis) << ',' << axis_column(grid.y.axis) << ','
        << value_col << '\n';
    for (size_t iy = 0; iy < grid.ys.size(); ++iy) {
        for (size_t ix = 0; ix < grid.xs.size(); ++ix) {
            const double v = grid.at(static_cast<int>(ix), static_cast<int>(iy));
            double conv;
            if (std::isnan(v)) {
                conv = v;
            } else if (grid.metric == GridMetric::IlSs) {
                conv = db_from_power_ratio(v);
            } else {
                conv = dbm_from_watts(v);
            }
            out << fmt(grid.xs[ix]) << ',' << fmt(grid.ys[iy]) << ',' << fmt(conv) << '\n';
        }
    }
}

void write_ls_response_csv(const std::vector<std::pair<double, cplx>>& s21_by_f,
                           const std::string& path) {
    if (s21_by_f.empty()) throw IoError("write_ls_response_csv: no points");
    auto out = open_out(path);
    out << "f_hz,s21_db\n";
    for (const auto& [f, s21] : s21_by_f) {
        out << fmt(f) << ',' << fmt(db_from_mag(std::abs(s21))) << '\n';
    }
}

}  // namespace pfsl
