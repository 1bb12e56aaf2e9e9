#include "smx/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace smx {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.contains(it.key()))
      throw SchemaError("unknown key \"" + it.key() + "\" in " + where);
}

double require_number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw SchemaError("missing key \"" + key + "\" in " + where);
  if (!obj[key].is_number()) throw SchemaError("\"" + key + "\" must be a number in " + where);
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback,
                 const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw SchemaError("\"" + key + "\" must be a number in " + where);
  return obj[key].get<double>();
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw SchemaError("\"" + key + "\" must be an integer in " + where);
  return obj[key].get<int>();
}

BasisSpec parse_basis(const json& b, std::size_t index) {
  const std::string where = "basis[" + std::to_string(index) + "]";
  if (!b.is_object()) throw SchemaError(where + " must be an object");
  if (!b.contains("type") || !b["type"].is_string())
    throw SchemaError(where + " needs a string \"type\"");
  const std::string type = b["type"].get<std::string>();
  BasisSpec spec;
  if (type == "bspline") {
    reject_unknown(b, {"type", "num_basis", "degree", "domain"}, where);
    spec.kind = BasisSpec::Kind::kBSpline;
    spec.num_basis = int(require_number(b, "num_basis", where));
    spec.degree = int_or(b, "degree", 3, where);
    if (b.contains("domain")) {
      if (!b["domain"].is_array() || b["domain"].size() != 2)
        throw SchemaError(where + ".domain must be [a, b]");
      spec.domain = {b["domain"][0].get<double>(), b["domain"][1].get<double>()};
    }
  } else if (type == "fourier") {
    reject_unknown(b, {"type", "num_basis", "period"}, where);
    spec.kind = BasisSpec::Kind::kFourier;
    spec.num_basis = int(require_number(b, "num_basis", where));
    if (b.contains("period")) spec.period = b["period"].get<double>();
  } else {
    throw SchemaError(where + ": unknown basis type \"" + type + "\"");
  }
  if (spec.num_basis < 1) throw SchemaError(where + ": num_basis must be >= 1");
  return spec;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config root must be a JSON object");
  reject_unknown(doc,
                 {"zeta", "lambda_count", "lambda_ratio", "penalty", "basis", "solver",
                  "npg", "cv", "seed", "threads"},
                 "config");

  RunConfig cfg;
  cfg.source_json = json_text;
  cfg.zeta = require_number(doc, "zeta", "config");
  if (!(cfg.zeta > 0.0)) throw SchemaError("zeta must be positive");
  cfg.lambda_count = int_or(doc, "lambda_count", 10, "config");
  if (cfg.lambda_count < 1) throw SchemaError("lambda_count must be >= 1");
  cfg.lambda_ratio = number_or(doc, "lambda_ratio", 1e-4, "config");
  if (!(cfg.lambda_ratio > 0.0 && cfg.lambda_ratio < 1.0))
    throw SchemaError("lambda_ratio must lie in (0, 1)");

  if (doc.contains("penalty")) {
    const std::string p = doc["penalty"].is_string() ? doc["penalty"].get<std::string>() : "";
    if (p == "l1")
      cfg.penalty = Penalty::kL1;
    else if (p == "none")
      cfg.penalty = Penalty::kNone;
    else
      throw SchemaError("penalty must be \"l1\" or \"none\"");
  }

  if (doc.contains("basis")) {
    if (!doc["basis"].is_array()) throw SchemaError("basis must be an array");
    for (std::size_t i = 0; i < doc["basis"].size(); ++i)
      cfg.basis.push_back(parse_basis(doc["basis"][i], i));
  }

  if (doc.contains("solver")) {
    const std::string s = doc["solver"].is_string() ? doc["solver"].get<std::string>() : "";
    if (s == "fista")
      cfg.solver = SolverKind::kFista;
    else if (s == "npg")
      cfg.solver = SolverKind::kNpg;
    else
      throw SchemaError("solver must be \"fista\" or \"npg\"");
  }

  if (doc.contains("npg")) {
    const json& n = doc["npg"];
    if (!n.is_object()) throw SchemaError("npg must be an object");
    reject_unknown(n,
                   {"L_min", "L_max", "tau", "c", "M", "max_iter", "tol", "kkt_tol",
                    "pairwise_scale", "L_init_rule"},
                   "npg");
    cfg.npg.L_min = number_or(n, "L_min", cfg.npg.L_min, "npg");
    cfg.npg.L_max = number_or(n, "L_max", cfg.npg.L_max, "npg");
    cfg.npg.tau = number_or(n, "tau", cfg.npg.tau, "npg");
    cfg.npg.c = number_or(n, "c", cfg.npg.c, "npg");
    cfg.npg.M = int_or(n, "M", cfg.npg.M, "npg");
    cfg.npg.max_iter = int_or(n, "max_iter", cfg.npg.max_iter, "npg");
    cfg.npg.tol = number_or(n, "tol", cfg.npg.tol, "npg");
    cfg.npg.kkt_tol = number_or(n, "kkt_tol", cfg.npg.kkt_tol, "npg");
    cfg.npg.pairwise_scale = number_or(n, "pairwise_scale", cfg.npg.pairwise_scale, "npg");
    if (n.contains("L_init_rule")) {
      const std::string r = n["L_init_rule"].get<std::string>();
      if (r == "bb" || r == "barzilai_borwein")
        cfg.npg.L_init_rule = NpgConfig::InitRule::kBarzilaiBorwein;
      else if (r == "constant")
        cfg.npg.L_init_rule = NpgConfig::InitRule::kConstant;
      else
        throw SchemaError("npg.L_init_rule must be \"bb\" or \"constant\"");
    }
    cfg.npg.validate();
  }

  cfg.seed = std::uint64_t(int_or(doc, "seed", 0, "config"));
  cfg.cv_seed = cfg.seed;
  if (doc.contains("cv")) {
    const json& c = doc["cv"];
    if (!c.is_object()) throw SchemaError("cv must be an object");
    reject_unknown(c, {"repeats", "block_dims", "seed"}, "cv");
    cfg.cv_repeats = int_or(c, "repeats", 10, "cv");
    if (cfg.cv_repeats < 1) throw SchemaError("cv.repeats must be >= 1");
    if (c.contains("block_dims")) {
      if (!c["block_dims"].is_array()) throw SchemaError("cv.block_dims must be an array");
      for (const auto& v : c["block_dims"]) {
        if (!v.is_number_integer() || v.get<long long>() < 1)
          throw SchemaError("cv.block_dims entries must be positive integers");
        cfg.cv_block_dims.push_back(std::size_t(v.get<long long>()));
      }
    }
    cfg.cv_seed = std::uint64_t(int_or(c, "seed", int(cfg.seed), "cv"));
  }
  cfg.threads = int_or(doc, "threads", 1, "config");
  if (cfg.threads < 1) throw SchemaError("threads must be >= 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

TensorDesign build_design(const std::vector<BasisSpec>& basis,
                          const std::vector<std::size_t>& grid_dims) {
  if (basis.size() != grid_dims.size())
    throw ShapeError("config has " + std::to_string(basis.size()) +
                     " basis specs for a rank-" + std::to_string(grid_dims.size()) +
                     " data grid");
  std::vector<DenseMatrix> factors;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const std::size_t n = grid_dims[k];
    const BasisSpec& b = basis[k];
    if (b.kind == BasisSpec::Kind::kBSpline) {
      BSplineSpec spec{b.degree, b.num_basis, 1.0, double(n)};
      if (b.domain) {
        spec.a = b.domain->first;
        spec.b = b.domain->second;
      }
      std::vector<double> pts(n);
      for (std::size_t i = 0; i < n; ++i) pts[i] = double(i + 1);
      factors.push_back(bspline_design(spec, pts));
    } else {
      FourierSpec spec{b.num_basis, b.period ? *b.period : double(n - 1)};
      std::vector<double> pts(n);
      for (std::size_t i = 0; i < n; ++i) pts[i] = double(i);
      factors.push_back(fourier_design(spec, pts));
    }
  }
  return TensorDesign(std::move(factors));
}

}  // namespace smx
