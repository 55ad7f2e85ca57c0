#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcast/broadcasting.hpp"
#include "qcast/channels.hpp"
#include "qcast/core.hpp"
#include "qcast/errors.hpp"
#include "qcast/fidelity.hpp"
#include "qcast/search.hpp"
#include "qcast/states.hpp"

// JSON and CSV codecs for the on-disk formats. All readers throw
// InvalidFormat with a message naming the violated invariant; writers are
// atomic (temp file, rename on success) so failed runs leave no partial
// output behind.
namespace qcast::io {

using json = nlohmann::json;

namespace detail {

inline void require_keys(const json& j, const std::vector<std::string>& allowed,
                         const std::string& context) {
  if (!j.is_object()) {
    throw InvalidFormat(context + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw InvalidFormat(context + ": unknown key \"" + item.key() + "\"");
    }
  }
}

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidFormat(context + ": missing key \"" + key + "\"");
  }
  return j.at(key);
}

inline double require_real(const json& j, const std::string& context) {
  if (!j.is_number()) {
    throw InvalidFormat(context + ": expected a number");
  }
  return j.get<double>();
}

inline Eigen::Index require_count(const json& j, const std::string& context) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InvalidFormat(context + ": expected a nonnegative integer");
  }
  return static_cast<Eigen::Index>(j.get<long long>());
}

}  // namespace detail

inline json matrix_to_json(const ComplexMatrix<double>& m) {
  json entries = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      entries.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    }
  }
  return json{{"dim", m.rows()}, {"entries", std::move(entries)}};
}

inline ComplexMatrix<double> matrix_from_json(const json& j) {
  detail::require_keys(j, {"dim", "entries"}, "matrix");
  const Eigen::Index dim = detail::require_count(detail::require_field(j, "dim", "matrix"),
                                                 "matrix dim");
  if (dim < 1) {
    throw InvalidFormat("matrix: dim must be positive");
  }
  const json& entries = detail::require_field(j, "entries", "matrix");
  if (!entries.is_array() || entries.size() != std::size_t(dim * dim)) {
    std::ostringstream msg;
    msg << "matrix: entries must be an array of " << dim * dim << " [re, im] pairs";
    throw InvalidFormat(msg.str());
  }
  ComplexMatrix<double> m(dim, dim);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index jj = 0; jj < dim; ++jj, ++k) {
      const json& cell = entries.at(k);
      if (!cell.is_array() || cell.size() != 2) {
        throw InvalidFormat("matrix: each entry must be a [re, im] pair");
      }
      m(i, jj) = std::complex<double>(detail::require_real(cell.at(0), "matrix entry"),
                                      detail::require_real(cell.at(1), "matrix entry"));
    }
  }
  return m;
}

inline json state_to_json(const DensityOperator<double>& rho) {
  return matrix_to_json(rho.matrix());
}

inline DensityOperator<double> state_from_json(const json& j, double tol = 1e-10) {
  return validate_density(matrix_from_json(j), tol);
}

inline json channel_to_json(const DilationChannel<double>& ch) {
  return json{{"dims", json::array({ch.dim_a(), ch.dim_b(), ch.dim_c()})},
              {"U", matrix_to_json(ch.unitary())},
              {"sigma", matrix_to_json(ch.sigma().matrix())},
              {"upsilon", matrix_to_json(ch.upsilon().matrix())}};
}

inline DilationChannel<double> channel_from_json(const json& j) {
  detail::require_keys(j, {"dims", "U", "sigma", "upsilon"}, "channel");
  const json& dims = detail::require_field(j, "dims", "channel");
  if (!dims.is_array() || dims.size() != 3) {
    throw InvalidFormat("channel: dims must be a [A, B, C] triple");
  }
  const Eigen::Index dim_a = detail::require_count(dims.at(0), "channel dims");
  const Eigen::Index dim_b = detail::require_count(dims.at(1), "channel dims");
  const Eigen::Index dim_c = detail::require_count(dims.at(2), "channel dims");
  return DilationChannel<double>(
      dim_a, dim_b, dim_c, matrix_from_json(detail::require_field(j, "U", "channel")),
      state_from_json(detail::require_field(j, "sigma", "channel")),
      state_from_json(detail::require_field(j, "upsilon", "channel")));
}

inline json povm_to_json(const Povm<double>& povm) {
  json elements = json::array();
  for (const auto& e : povm.elements()) {
    elements.push_back(matrix_to_json(e));
  }
  json out{{"elements", std::move(elements)}};
  if (povm.has_mu()) {
    json mu = json::array();
    for (Eigen::Index b = 0; b < povm.mu().size(); ++b) {
      mu.push_back(povm.mu()(b));
    }
    out["mu"] = std::move(mu);
  }
  return out;
}

inline Povm<double> povm_from_json(const json& j) {
  detail::require_keys(j, {"elements", "mu"}, "povm");
  const json& elements = detail::require_field(j, "elements", "povm");
  if (!elements.is_array() || elements.empty()) {
    throw InvalidFormat("povm: elements must be a nonempty array of matrices");
  }
  std::vector<ComplexMatrix<double>> parsed;
  parsed.reserve(elements.size());
  for (const json& e : elements) {
    parsed.push_back(matrix_from_json(e));
  }
  RealVector<double> mu;
  if (j.contains("mu")) {
    const json& raw = j.at("mu");
    if (!raw.is_array()) {
      throw InvalidFormat("povm: mu must be an array of reals");
    }
    mu.resize(Eigen::Index(raw.size()));
    for (std::size_t b = 0; b < raw.size(); ++b) {
      mu(Eigen::Index(b)) = detail::require_real(raw.at(b), "povm mu");
    }
  }
  return Povm<double>(std::move(parsed), std::move(mu));
}

inline json optimality_report_to_json(const OptimalityReport<double>& report) {
  json elements = json::array();
  for (const auto& e : report.elements) {
    elements.push_back(json{{"mu", e.mu},
                            {"residual", e.residual},
                            {"null_weight", e.null_weight}});
  }
  return json{{"elements", std::move(elements)},
              {"scale", report.scale},
              {"optimal", report.optimal}};
}

inline json chain_report_to_json(const ChainReport<double>& report) {
  json out{{"f_in", report.f_in},
           {"f_joint", report.f_joint},
           {"f_a", report.f_a},
           {"f_b", report.f_b},
           {"marginal_errors",
            json::array({report.marginal_errors[0], report.marginal_errors[1],
                         report.marginal_errors[2], report.marginal_errors[3]})},
           {"equality_gap", report.equality_gap},
           {"channel_consistent", report.channel_consistent},
           {"structural_skipped", report.structural_skipped}};
  if (report.structural.has_value()) {
    const auto& s = *report.structural;
    out["structural"] = json{{"g_op", matrix_to_json(s.g_op)},
                             {"h_op", matrix_to_json(s.h_op)},
                             {"g_residual", s.g_residual},
                             {"h_residual", s.h_residual},
                             {"g_vs_m", s.g_vs_m},
                             {"h_vs_m", s.h_vs_m},
                             {"null_residual_tilde0", s.null_residual_tilde0},
                             {"null_residual_tilde1", s.null_residual_tilde1}};
  } else {
    out["structural"] = nullptr;
  }
  return out;
}

inline json search_config_to_json(const SearchConfig<double>& cfg) {
  return json{{"ancilla_dim", cfg.ancilla_dim},
              {"restarts", cfg.restarts},
              {"max_iters", cfg.max_iters},
              {"step_init", cfg.step_init},
              {"step_min", cfg.step_min},
              {"seed", cfg.seed},
              {"objective", cfg.objective == SearchObjective::min_marginal_fidelity
                                ? "min_marginal_fidelity"
                                : "mean_marginal_fidelity"}};
}

inline SearchConfig<double> search_config_from_json(const json& j) {
  detail::require_keys(
      j, {"ancilla_dim", "restarts", "max_iters", "step_init", "step_min", "seed", "objective"},
      "search config");
  SearchConfig<double> cfg;
  if (j.contains("ancilla_dim")) {
    cfg.ancilla_dim = detail::require_count(j.at("ancilla_dim"), "search config ancilla_dim");
  }
  if (j.contains("restarts")) {
    cfg.restarts = int(detail::require_count(j.at("restarts"), "search config restarts"));
  }
  if (j.contains("max_iters")) {
    cfg.max_iters = int(detail::require_count(j.at("max_iters"), "search config max_iters"));
  }
  if (j.contains("step_init")) {
    cfg.step_init = detail::require_real(j.at("step_init"), "search config step_init");
  }
  if (j.contains("step_min")) {
    cfg.step_min = detail::require_real(j.at("step_min"), "search config step_min");
  }
  if (j.contains("seed")) {
    const json& seed = j.at("seed");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
      throw InvalidFormat("search config seed: expected an integer");
    }
    cfg.seed = seed.get<std::uint64_t>();
  }
  if (j.contains("objective")) {
    const json& objective = j.at("objective");
    if (objective == "min_marginal_fidelity") {
      cfg.objective = SearchObjective::min_marginal_fidelity;
    } else if (objective == "mean_marginal_fidelity") {
      cfg.objective = SearchObjective::mean_marginal_fidelity;
    } else {
      throw InvalidFormat(
          "search config objective: expected min_marginal_fidelity or mean_marginal_fidelity");
    }
  }
  return cfg;
}

inline json search_result_to_json(const SearchResult<double>& result) {
  json traces = json::array();
  for (const auto& trace : result.per_restart_trace) {
    json one = json::array();
    for (const auto& point : trace) {
      one.push_back(json{{"iteration", point.iteration}, {"quality", point.quality}});
    }
    traces.push_back(std::move(one));
  }
  return json{{"best_channel", channel_to_json(result.best_channel)},
              {"quality", result.quality},
              {"per_restart_trace", std::move(traces)},
              {"chain", chain_report_to_json(result.chain)},
              {"certified", result.certified},
              {"total_iterations", result.total_iterations},
              {"caveat", result.caveat}};
}

// Sweep driver configuration: a qubit-pair angle grid, the common purity,
// and the per-row search settings; every field has a documented default.
struct SweepConfig {
  std::vector<double> angles;
  double purity = 0.8;
  SearchConfig<double> search;

  SweepConfig() {
    const double half_pi = std::acos(-1.0) / 2.0;
    for (int i = 0; i < 9; ++i) {
      angles.push_back(half_pi * double(i) / 8.0);
    }
  }
};

inline SweepConfig sweep_config_from_json(const json& j) {
  detail::require_keys(j, {"angles", "purity", "search"}, "sweep config");
  SweepConfig cfg;
  if (j.contains("angles")) {
    const json& raw = j.at("angles");
    if (!raw.is_array() || raw.empty()) {
      throw InvalidFormat("sweep config angles: expected a nonempty array of reals");
    }
    cfg.angles.clear();
    for (const json& a : raw) {
      cfg.angles.push_back(detail::require_real(a, "sweep config angle"));
    }
  }
  if (j.contains("purity")) {
    cfg.purity = detail::require_real(j.at("purity"), "sweep config purity");
  }
  if (j.contains("search")) {
    cfg.search = search_config_from_json(j.at("search"));
  }
  return cfg;
}

inline std::string sweep_csv(const std::vector<SweepRow<double>>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "theta,commutator_norm,quality,certified,iters\n";
  for (const auto& row : rows) {
    out << row.theta << ',' << row.commutator_norm << ',' << row.quality << ','
        << (row.certified ? 1 : 0) << ',' << row.iters << '\n';
  }
  return out.str();
}

inline json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidFormat("cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidFormat("cannot parse " + path.string() + ": " + e.what());
  }
}

// Write-to-temp, rename-on-success; no partial file remains if the write
// fails midway.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open file for writing: " + temp.string());
    }
    out << text;
    out.flush();
    if (!out.good()) {
      out.close();
      std::filesystem::remove(temp);
      throw Error("write failed: " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw Error("cannot move output into place: " + path.string());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace qcast::io
