#pragma once

#include <string>
#include <vector>

#include "pfsl/ac_analysis.hpp"
#include "pfsl/analytic.hpp"
#include "pfsl/hb.hpp"

namespace pfsl {

// All writers: RFC-4180 quoting, LF line endings, 12 significant digits.
// Empty data throws IoError before any file is created.

void write_sweep_csv(const SweepTrace& trace, const std::string& path);

void write_sparams_csv(const std::vector<SParameters>& points, const std::string& path);

void write_touchstone(const std::vector<SParameters>& points, const std::string& path,
                      double z0);

void write_grid_csv(const ContourGrid& grid, const std::string& path);

void write_ls_response_csv(const std::vector<std::pair<double, cplx>>& s21_by_f,
                           const std::string& path);

}  // namespace pfsl
