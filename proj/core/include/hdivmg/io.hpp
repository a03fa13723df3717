#ifndef HDIVMG_IO_HPP
#define HDIVMG_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "hdivmg/driver.hpp"

namespace hdivmg
{

/// Legacy ASCII VTK (STRUCTURED_POINTS) with cell data: pressure and
/// divergence cell means, the cellwise average velocity, and kappa.
void
write_vtk(const std::filesystem::path &path, const Solution &solution);

/// Permeability preview as a VTK cell field.
void
write_field_vtk(const std::filesystem::path &path, const PermeabilityField &field);

/// Two-column key,value CSV of a solve report; the residual history is
/// written as rows residual_0, residual_1, ...
void
write_report_csv(const std::filesystem::path &path, const SolveReport &report);

/// Header "grid,<contrast>,..." then one row per grid; failed entries
/// are written as DNF.
void
write_sweep_csv(const std::filesystem::path &path, const SweepTable &table);

/// Several tables side by side, column headers prefixed by their label
/// (e.g. "RT0:1e+04").
void
write_sweep_csv(const std::filesystem::path &path, const std::vector<std::string> &labels,
                const std::vector<SweepTable> &tables);

/// Comma-separated rows, no quoting.
std::vector<std::vector<std::string>>
read_csv(const std::filesystem::path &path);

SweepTable
read_sweep_csv(const std::filesystem::path &path);

} // namespace hdivmg

#endif
