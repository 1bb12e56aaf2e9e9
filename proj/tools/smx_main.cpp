// smx: soft maximin aggregation of grouped array data.
//
// Subcommands: simulate, fit, cv, aggregate, evaluate, export-signal.
// Arrays travel as SMMA binary files (group axis last), runs are configured
// by a strict JSON document, tables leave as CSV. Errors are reported as a
// JSON object on stderr; exit codes: 2 bad file format, 3 config schema
// violation, 4 shape mismatch, 1 anything else.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "smx/aggregation.hpp"
#include "smx/array_io.hpp"
#include "smx/run_config.hpp"
#include "smx/simgen.hpp"
#include "smx/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DataOnGrid {
  std::vector<std::size_t> grid;  // observation grid (group axis stripped)
  std::vector<smx::NdArray> responses;
};

DataOnGrid split_groups(const smx::NdArray& raw) {
  if (raw.rank() < 2)
    throw smx::ShapeError("dataset file must have a trailing group axis");
  DataOnGrid out;
  out.grid.assign(raw.dims().begin(), raw.dims().end() - 1);
  const std::size_t G = raw.dims().back();
  const std::size_t cells = raw.size() / G;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<double> buf(raw.data().begin() + long(g * cells),
                            raw.data().begin() + long((g + 1) * cells));
    out.responses.emplace_back(out.grid, std::move(buf));
  }
  return out;
}

smx::NdArray stack_groups(const std::vector<smx::NdArray>& responses) {
  std::vector<std::size_t> dims = responses.front().dims();
  dims.push_back(responses.size());
  smx::NdArray out(dims);
  std::size_t off = 0;
  for (const auto& y : responses) {
    std::copy(y.data().begin(), y.data().end(), out.data().begin() + long(off));
    off += y.size();
  }
  return out;
}

smx::NdArray stack_path(const std::vector<smx::NdArray>& betas) {
  std::vector<std::size_t> dims = betas.front().dims();
  dims.push_back(betas.size());
  smx::NdArray out(dims);
  std::size_t off = 0;
  for (const auto& b : betas) {
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + long(off));
    off += b.size();
  }
  return out;
}

json diagnostics_json(const smx::FitResult& fit) {
  json per_lambda = json::array();
  for (std::size_t i = 0; i < fit.lambdas.size(); ++i) {
    const auto& d = fit.diagnostics[i];
    per_lambda.push_back({{"lambda", fit.lambdas[i]},
                          {"iterations", d.iterations},
                          {"backtracks", d.backtracks},
                          {"objective", d.objective},
                          {"kkt_residual", d.kkt_residual},
                          {"converged", d.converged}});
  }
  return per_lambda;
}

void write_sidecar(const fs::path& fit_path, const smx::RunConfig& cfg,
                   const std::vector<std::size_t>& grid, const json& extra) {
  json side;
  side["config"] = json::parse(cfg.source_json);
  side["grid_dims"] = grid;
  for (auto it = extra.begin(); it != extra.end(); ++it) side[it.key()] = it.value();
  std::ofstream out(fit_path.string() + ".json");
  out << side.dump(2) << "\n";
}

json load_sidecar(const fs::path& fit_path) {
  std::ifstream in(fit_path.string() + ".json");
  if (!in)
    throw smx::FormatError("missing fit sidecar " + fit_path.string() + ".json");
  json side;
  in >> side;
  return side;
}

smx::NpgConfig experiment_solver_config(const smx::RunConfig& cfg) {
  return cfg.npg;
}

int run_simulate(const std::string& kind, std::uint64_t seed, const fs::path& out,
                 std::optional<fs::path> truth_out) {
  smx::Simulated sim = kind == "1d" ? smx::gen_1d(seed) : smx::gen_3d(seed);
  std::vector<smx::NdArray> ys;
  for (std::size_t g = 0; g < sim.data.num_groups(); ++g)
    ys.push_back(sim.data.response(g));
  smx::write_array(out, stack_groups(ys));
  const fs::path tpath =
      truth_out ? *truth_out : fs::path(out.string() + ".truth");
  smx::write_array(tpath, sim.truth.signal);
  json summary{{"data", out.string()},
               {"truth", tpath.string()},
               {"groups", sim.data.num_groups()},
               {"grid", sim.data.design().row_dims()}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_fit(const fs::path& data_path, const fs::path& cfg_path, const fs::path& out) {
  const smx::RunConfig cfg = smx::load_run_config(cfg_path);
  DataOnGrid data = split_groups(smx::read_array(data_path));
  smx::TensorDesign design = smx::build_design(cfg.basis, data.grid);
  auto ds = std::make_shared<smx::GroupedDataset>(
      smx::GroupedDataset::shared(std::move(design), std::move(data.responses)));

  std::vector<double> lambdas =
      cfg.penalty == smx::Penalty::kNone
          ? std::vector<double>{0.0}
          : smx::lambda_path(*ds, cfg.zeta, cfg.lambda_count, cfg.lambda_ratio);
  smx::FitResult fit;
  if (cfg.penalty == smx::Penalty::kNone) {
    smx::SoftMaximinProblem prob{ds, cfg.zeta, 0.0, smx::Penalty::kNone};
    smx::SingleFit single = cfg.solver == smx::SolverKind::kFista
                                ? smx::fista_solve(prob, cfg.npg)
                                : smx::npg_solve(prob, cfg.npg);
    fit.zeta = cfg.zeta;
    fit.lambdas = {0.0};
    fit.betas.push_back(std::move(single.beta));
    fit.diagnostics.push_back(single.diag);
  } else {
    fit = smx::solve_path(ds, cfg.zeta, lambdas, cfg.penalty, cfg.solver,
                          experiment_solver_config(cfg));
  }

  smx::write_array(out, stack_path(fit.betas));
  write_sidecar(out, cfg, data.grid,
                json{{"kind", "fit"},
                     {"zeta", fit.zeta},
                     {"lambdas", fit.lambdas},
                     {"diagnostics", diagnostics_json(fit)}});
  json summary{{"fit", out.string()}, {"lambdas", fit.lambdas.size()}};
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_cv(const fs::path& data_path, const fs::path& cfg_path, const fs::path& out) {
  const smx::RunConfig cfg = smx::load_run_config(cfg_path);
  DataOnGrid data = split_groups(smx::read_array(data_path));
  smx::TensorDesign design = smx::build_design(cfg.basis, data.grid);
  auto ds = std::make_shared<smx::GroupedDataset>(
      smx::GroupedDataset::shared(std::move(design), std::move(data.responses)));

  smx::CvConfig cv;
  cv.repeats = cfg.cv_repeats;
  cv.block_dims = cfg.cv_block_dims;
  cv.seed = cfg.cv_seed;
  cv.zeta = cfg.zeta;
  cv.penalty = cfg.penalty;
  cv.solver = cfg.solver;
  cv.solver_config = cfg.npg;
  cv.lambdas = smx::lambda_path(*ds, cfg.zeta, cfg.lambda_count, cfg.lambda_ratio);
  const smx::CvReport report = smx::block_cv(*ds, cv);

  json doc{{"lambdas", report.lambdas},
           {"mean_losses", report.mean_losses},
           {"repeat_losses", report.repeat_losses},
           {"selected", report.selected}};
  std::ofstream o(out);
  o << doc.dump(2) << "\n";
  std::cout << json{{"report", out.string()}, {"selected", report.selected}}.dump() << "\n";
  return 0;
}

int run_aggregate(const std::string& method, const fs::path& data_path,
                  const fs::path& cfg_path, const fs::path& out,
                  std::optional<int> lambda_index) {
  const smx::RunConfig cfg = smx::load_run_config(cfg_path);
  DataOnGrid data = split_groups(smx::read_array(data_path));
  smx::TensorDesign design = smx::build_design(cfg.basis, data.grid);
  auto ds = std::make_shared<smx::GroupedDataset>(
      smx::GroupedDataset::shared(std::move(design), std::move(data.responses)));

  std::vector<double> lambdas =
      cfg.penalty == smx::Penalty::kNone
          ? std::vector<double>{0.0}
          : smx::lambda_path(*ds, cfg.zeta, cfg.lambda_count, cfg.lambda_ratio);
  if (lambda_index) {
    if (*lambda_index < 0 || *lambda_index >= int(lambdas.size()))
      throw smx::PreconditionError("lambda index out of range");
  }

  // Per-group paths with warm starts, aggregated at each lambda.
  const std::size_t G = ds->num_groups();
  std::vector<smx::GroupEstimates> per_lambda(lambdas.size());
  for (auto& e : per_lambda) {
    e.betas.resize(G);
    e.diagnostics.resize(G);
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) per_lambda[i].lambda = lambdas[i];
  auto fit_group_path = [&](std::size_t g) {
    auto one = std::make_shared<smx::GroupedDataset>(
        smx::GroupedDataset::shared(ds->design(), {ds->response(g)}));
    smx::NdArray warm(one->coefficient_dims());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
      smx::SoftMaximinProblem prob{one, 1.0, lambdas[i], cfg.penalty};
      smx::SingleFit f = smx::npg_solve(prob, cfg.npg, &warm);
      warm = f.beta;
      per_lambda[i].betas[g] = std::move(f.beta);
      per_lambda[i].diagnostics[g] = f.diag;
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.threads, int(G)));
  if (workers == 1) {
    for (std::size_t g = 0; g < G; ++g) fit_group_path(g);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&] {
        for (std::size_t g = next.fetch_add(1); g < G; g = next.fetch_add(1))
          fit_group_path(g);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<smx::NdArray> betas;
  json weights = json::array();
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambda_index && int(i) != *lambda_index) continue;
    if (method == "magging") {
      smx::MaggingResult m = smx::magging(per_lambda[i], *ds);
      betas.push_back(std::move(m.beta));
      weights.push_back(m.weights);
    } else {
      betas.push_back(smx::mean_aggregate(per_lambda[i]));
    }
  }
  std::vector<double> used;
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (!lambda_index || int(i) == *lambda_index) used.push_back(lambdas[i]);

  smx::write_array(out, stack_path(betas));
  json extra{{"kind", "aggregate"},
             {"method", method},
             {"zeta", cfg.zeta},
             {"lambdas", used}};
  if (method == "magging") extra["weights"] = weights;
  write_sidecar(out, cfg, data.grid, extra);
  std::cout << json{{"fit", out.string()}, {"lambdas", used.size()}}.dump() << "\n";
  return 0;
}

struct LoadedFit {
  std::vector<std::size_t> grid;
  smx::TensorDesign design;
  std::vector<smx::NdArray> betas;
  std::vector<double> lambdas;
};

LoadedFit load_fit(const fs::path& fit_path) {
  const smx::NdArray raw = smx::read_array(fit_path);
  const json side = load_sidecar(fit_path);
  smx::RunConfig cfg = smx::parse_run_config(side.at("config").dump());
  std::vector<std::size_t> grid = side.at("grid_dims").get<std::vector<std::size_t>>();
  smx::TensorDesign design = smx::build_design(cfg.basis, grid);
  if (raw.rank() != cfg.basis.size() + 1)
    throw smx::ShapeError("fit file rank does not match config basis count plus path axis");
  // Split the trailing path axis.
  std::vector<std::size_t> cdims(raw.dims().begin(), raw.dims().end() - 1);
  const std::size_t K = raw.dims().back();
  const std::size_t p = raw.size() / K;
  std::vector<smx::NdArray> betas;
  for (std::size_t k = 0; k < K; ++k) {
    std::vector<double> buf(raw.data().begin() + long(k * p),
                            raw.data().begin() + long((k + 1) * p));
    betas.emplace_back(cdims, std::move(buf));
  }
  return LoadedFit{std::move(grid), std::move(design), std::move(betas),
                   side.at("lambdas").get<std::vector<double>>()};
}

int run_evaluate(const fs::path& fit_path, const fs::path& truth_path, const fs::path& out) {
  LoadedFit fit = load_fit(fit_path);
  smx::SimTruth truth;
  truth.signal = smx::read_array(truth_path);
  std::ofstream o(out);
  o << "lambda_index,lambda,mse\n";
  for (std::size_t k = 0; k < fit.betas.size(); ++k) {
    const double mse = smx::mse_vs_truth(fit.betas[k], fit.design, truth);
    o << k << "," << fit.lambdas[k] << "," << std::scientific << mse << "\n";
    o.unsetf(std::ios::scientific);
  }
  std::cout << json{{"table", out.string()}, {"rows", fit.betas.size()}}.dump() << "\n";
  return 0;
}

int run_export(const fs::path& fit_path, const std::string& slice_expr, int lambda_index,
               const fs::path& out) {
  LoadedFit fit = load_fit(fit_path);
  if (lambda_index < 0 || lambda_index >= int(fit.betas.size()))
    throw smx::PreconditionError("lambda index out of range");
  const smx::NdArray fitted = smx::design_matvec(fit.design, fit.betas[size_t(lambda_index)]);

  // Parse "axis=value" pairs; axes are named x, y, t (or axis0/1/2), values
  // are 1-based grid coordinates.
  std::vector<std::optional<std::size_t>> fixed(fit.grid.size());
  if (!slice_expr.empty()) {
    std::stringstream ss(slice_expr);
    std::string part;
    while (std::getline(ss, part, ',')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos)
        throw smx::PreconditionError("slice must look like t=50 or x=12,y=12");
      const std::string axis = part.substr(0, eq);
      const long val = std::stol(part.substr(eq + 1));
      std::size_t ax;
      if (axis == "x" || axis == "axis0")
        ax = 0;
      else if (axis == "y" || axis == "axis1")
        ax = 1;
      else if (axis == "t" || axis == "axis2")
        ax = fit.grid.size() - 1;
      else
        throw smx::PreconditionError("unknown slice axis \"" + axis + "\"");
      if (ax >= fit.grid.size())
        throw smx::ShapeError("slice axis beyond data rank");
      if (val < 1 || std::size_t(val) > fit.grid[ax])
        throw smx::PreconditionError("slice index out of range for axis " + axis);
      fixed[ax] = std::size_t(val - 1);
    }
  }

  std::ofstream o(out);
  std::vector<std::size_t> free_axes;
  for (std::size_t a = 0; a < fit.grid.size(); ++a)
    if (!fixed[a]) free_axes.push_back(a);
  for (std::size_t a : free_axes) o << "axis" << a << ",";
  o << "value\n";
  std::vector<std::size_t> idx(fit.grid.size(), 0);
  for (std::size_t a = 0; a < fit.grid.size(); ++a)
    if (fixed[a]) idx[a] = *fixed[a];
  // Iterate the free axes in column-major order.
  std::size_t count = 1;
  for (std::size_t a : free_axes) count *= fit.grid[a];
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a : free_axes) {
      idx[a] = rem % fit.grid[a];
      rem /= fit.grid[a];
    }
    for (std::size_t a : free_axes) o << (idx[a] + 1) << ",";
    o << fitted[fitted.offset(idx)] << "\n";
  }
  std::cout << json{{"table", out.string()}, {"rows", count}}.dump() << "\n";
  return 0;
}

int error_exit(int code, const std::string& kind, const std::string& message) {
  json err{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"soft maximin aggregation of heterogeneous array data"};
  app.require_subcommand(1);

  std::string sim_kind, slice_expr;
  std::uint64_t seed = 1;
  std::string data_path, cfg_path, out_path, fit_path, truth_path;
  std::string truth_out;
  int lambda_index = -1;

  auto* sim = app.add_subcommand("simulate", "generate a simulated dataset");
  sim->add_option("kind", sim_kind, "1d or 3d")->required()->check(CLI::IsMember({"1d", "3d"}));
  sim->add_option("--seed", seed, "generator seed");
  sim->add_option("--out", out_path, "output data file")->required();
  sim->add_option("--truth-out", truth_out, "output truth file (default <out>.truth)");

  auto* fit = app.add_subcommand("fit", "fit the penalized soft maximin path");
  fit->add_option("--data", data_path)->required();
  fit->add_option("--config", cfg_path)->required();
  fit->add_option("--out", out_path)->required();

  auto* cv = app.add_subcommand("cv", "block cross-validation over the lambda path");
  cv->add_option("--data", data_path)->required();
  cv->add_option("--config", cfg_path)->required();
  cv->add_option("--out", out_path)->required();

  auto* agg = app.add_subcommand("aggregate", "baseline estimators");
  std::string method;
  agg->add_option("method", method, "magging or mean")
      ->required()
      ->check(CLI::IsMember({"magging", "mean"}));
  agg->add_option("--data", data_path)->required();
  agg->add_option("--config", cfg_path)->required();
  agg->add_option("--out", out_path)->required();
  agg->add_option("--lambda-index", lambda_index, "restrict to one path index");

  auto* ev = app.add_subcommand("evaluate", "per-lambda MSE against a truth file");
  ev->add_option("--fit", fit_path)->required();
  ev->add_option("--truth", truth_path)->required();
  ev->add_option("--out", out_path)->required();

  auto* ex = app.add_subcommand("export-signal", "CSV slice of a fitted signal");
  ex->add_option("--fit", fit_path)->required();
  ex->add_option("--slice", slice_expr, "e.g. t=50 or x=12,y=12");
  ex->add_option("--lambda-index", lambda_index, "path index (default 0)");
  ex->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
    if (sim->parsed())
      return run_simulate(sim_kind, seed, out_path,
                          truth_out.empty() ? std::nullopt
                                            : std::optional<fs::path>(truth_out));
    if (fit->parsed()) return run_fit(data_path, cfg_path, out_path);
    if (cv->parsed()) return run_cv(data_path, cfg_path, out_path);
    if (agg->parsed())
      return run_aggregate(method, data_path, cfg_path, out_path,
                           lambda_index >= 0 ? std::optional<int>(lambda_index)
                                             : std::nullopt);
    if (ev->parsed()) return run_evaluate(fit_path, truth_path, out_path);
    if (ex->parsed())
      return run_export(fit_path, slice_expr, lambda_index >= 0 ? lambda_index : 0,
                        out_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const smx::FormatError& e) {
    return error_exit(2, "format", e.what());
  } catch (const smx::SchemaError& e) {
    return error_exit(3, "schema", e.what());
  } catch (const smx::ShapeError& e) {
    return error_exit(4, "shape", e.what());
  } catch (const std::exception& e) {
    return error_exit(1, "error", e.what());
  }
}
