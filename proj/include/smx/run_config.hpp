#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smx/basis.hpp"
#include "smx/solver.hpp"
#include "smx/validation.hpp"

namespace smx {

/// One marginal basis: either B-splines (domain defaults to the grid
/// [1, n_j]) or a Fourier system (period defaults to n_j - 1, matching a
/// 0-based integer grid).
struct BasisSpec {
  enum class Kind { kBSpline, kFourier } kind = Kind::kBSpline;
  int num_basis = 0;
  int degree = 3;                      // b-spline only
  std::optional<std::pair<double, double>> domain;  // b-spline only
  std::optional<double> period;        // fourier only
};

/// Parsed and validated run configuration (strict schema: unknown keys are
/// rejected everywhere).
struct RunConfig {
  double zeta = 1.0;
  int lambda_count = 10;
  double lambda_ratio = 1e-4;
  Penalty penalty = Penalty::kL1;
  std::vector<BasisSpec> basis;
  SolverKind solver = SolverKind::kNpg;
  NpgConfig npg;
  int cv_repeats = 10;
  std::vector<std::size_t> cv_block_dims;
  std::uint64_t cv_seed = 0;
  std::uint64_t seed = 0;
  int threads = 1;

  /// Original JSON text, echoed into fit sidecars.
  std::string source_json;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Builds the marginal design matrices for a data grid. B-spline points are
/// the 1-based grid coordinates, Fourier points the 0-based ones.
TensorDesign build_design(const std::vector<BasisSpec>& basis,
                          const std::vector<std::size_t>& grid_dims);

}  // namespace smx
