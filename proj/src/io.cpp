#include "pseudomix/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pseudomix::io {

namespace {

Json complex_to_json(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

std::complex<double> complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw invalid_input("complex entry must be a two-element array [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Json vector_to_json(const CVector<double>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

CVector<double> vector_from_json(const Json& j) {
  if (!j.is_array()) throw invalid_input("vector must be an array of [re, im] entries");
  CVector<double> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

Eigen::Index positive_int(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw invalid_input(std::string("missing integer field '") + key + "'");
  }
  const auto value = j.at(key).get<long long>();
  if (value < 1) throw invalid_input(std::string("field '") + key + "' must be positive");
  return static_cast<Eigen::Index>(value);
}

Json term_to_json(const ProductTerm<double>& t) {
  return {{"weight", t.weight}, {"vec1", vector_to_json(t.vec1)}, {"vec2", vector_to_json(t.vec2)},
          {"step", t.step}};
}

ProductTerm<double> term_from_json(const Json& j) {
  ProductTerm<double> t;
  t.weight = j.at("weight").get<double>();
  t.vec1 = vector_from_json(j.at("vec1"));
  t.vec2 = vector_from_json(j.at("vec2"));
  t.step = j.value("step", 0);
  return t;
}

std::string to_hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

}  // namespace

StateFile state_from_json(const Json& j) {
  if (!j.is_object()) throw invalid_input("state file must be a JSON object");
  StateFile s;
  s.dims = BipartiteDims(positive_int(j, "d1"), positive_int(j, "d2"));
  const Eigen::Index n = s.dims.dim();
  if (!j.contains("matrix") || !j.at("matrix").is_array()) {
    throw invalid_input("missing array field 'matrix'");
  }
  const Json& rows = j.at("matrix");
  if (static_cast<Eigen::Index>(rows.size()) != n) {
    throw invalid_input("matrix has " + std::to_string(rows.size()) + " rows, expected " +
                        std::to_string(n));
  }
  s.matrix.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw invalid_input("matrix row " + std::to_string(r) + " does not have " +
                          std::to_string(n) + " entries");
    }
    for (Eigen::Index c = 0; c < n; ++c) s.matrix(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  if (!s.matrix.allFinite()) throw invalid_input("matrix has non-finite entries");
  return s;
}

Json state_to_json(const StateFile& s) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < s.matrix.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < s.matrix.cols(); ++c) row.push_back(complex_to_json(s.matrix(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"d1", s.dims.d1}, {"d2", s.dims.d2}, {"matrix", std::move(rows)}};
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw invalid_input(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw invalid_input("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw invalid_input("write failed for " + path.string());
}

StateFile read_state_file(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return state_from_json(j);
  } catch (const Json::exception& e) {
    throw invalid_input(path.string() + ": " + e.what());
  }
}

void write_state_file(const std::filesystem::path& path, const StateFile& s) {
  write_json_file(path, state_to_json(s));
}

std::string content_hash(BipartiteDims dims, const CMatrix<double>& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t word) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (word >> (8 * byte)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(dims.d1));
  mix(static_cast<std::uint64_t>(dims.d2));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      mix(std::bit_cast<std::uint64_t>(m(r, c).real()));
      mix(std::bit_cast<std::uint64_t>(m(r, c).imag()));
    }
  return "fnv1a64:" + to_hex(h);
}

Json config_to_json(const PipelineConfig& cfg) {
  return {{"tol_residual", cfg.tol_residual},
          {"max_steps", cfg.max_steps},
          {"weight_prune", cfg.weight_prune},
          {"coalesce", cfg.coalesce},
          {"search",
           {{"restarts", cfg.search.restarts},
            {"max_sweeps", cfg.search.max_sweeps},
            {"sweep_tol", cfg.search.sweep_tol},
            {"angle_grid", cfg.search.angle_grid},
            {"stall_floor", cfg.search.stall_floor},
            {"seed", cfg.search.seed}}}};
}

PipelineConfig config_from_json(const Json& j) {
  try {
    PipelineConfig cfg;
    cfg.tol_residual = j.at("tol_residual").get<double>();
    cfg.max_steps = j.at("max_steps").get<int>();
    cfg.weight_prune = j.at("weight_prune").get<double>();
    cfg.coalesce = j.at("coalesce").get<bool>();
    const Json& s = j.at("search");
    cfg.search.restarts = s.at("restarts").get<int>();
    cfg.search.max_sweeps = s.at("max_sweeps").get<int>();
    cfg.search.sweep_tol = s.at("sweep_tol").get<double>();
    cfg.search.angle_grid = s.at("angle_grid").get<int>();
    cfg.search.stall_floor = s.at("stall_floor").get<double>();
    cfg.search.seed = s.at("seed").get<std::uint64_t>();
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw invalid_input(std::string("bad config echo: ") + e.what());
  }
}

Json make_report(const Decomposition<double>& d, const Pseudomixture<double>* p,
                 const PipelineConfig& cfg) {
  Json stats = Json::array();
  for (const auto& st : d.stats) {
    stats.push_back({{"step", st.step},
                     {"tr_a2", st.tr_a2},
                     {"tr_h2_after", st.tr_h2_after},
                     {"objective", st.objective},
                     {"used_probe_fallback", st.used_probe_fallback}});
  }
  Json plus = Json::array(), minus = Json::array();
  if (p != nullptr) {
    for (const auto& t : p->plus_terms) plus.push_back(term_to_json(t));
    for (const auto& t : p->minus_terms) minus.push_back(term_to_json(t));
  }
  const PptVerdict<double> ppt = ppt_check(d.input);
  Json report;
  report["input"] = {{"d1", d.input.dims().d1},
                     {"d2", d.input.dims().d2},
                     {"hash", content_hash(d.input.dims(), d.input.matrix())}};
  report["a"] = p != nullptr ? Json(p->a) : Json(nullptr);
  report["b"] = p != nullptr ? Json(p->b) : Json(nullptr);
  report["converged"] = d.converged;
  report["steps"] = d.steps();
  report["residual_hs"] = d.residual_hs();
  report["residual_op"] = d.residual_op();
  report["stats"] = std::move(stats);
  report["terms_plus"] = std::move(plus);
  report["terms_minus"] = std::move(minus);
  report["ppt"] = {{"verdict", ppt.name()},
                   {"min_pt_eigenvalue", ppt.min_pt_eigenvalue},
                   {"decisive", ppt.decisive}};
  report["config"] = config_to_json(cfg);
  return report;
}

Pseudomixture<double> pseudomixture_from_report(const Json& report) {
  try {
    Pseudomixture<double> p;
    p.dims = BipartiteDims(positive_int(report.at("input"), "d1"),
                           positive_int(report.at("input"), "d2"));
    if (report.at("a").is_null() || report.at("b").is_null()) {
      throw invalid_input("report carries no pseudomixture");
    }
    p.a = report.at("a").get<double>();
    p.b = report.at("b").get<double>();
    p.residual_hs = report.at("residual_hs").get<double>();
    for (const auto& t : report.at("terms_plus")) p.plus_terms.push_back(term_from_json(t));
    for (const auto& t : report.at("terms_minus")) p.minus_terms.push_back(term_from_json(t));
    return p;
  } catch (const Json::exception& e) {
    throw invalid_input(std::string("malformed report: ") + e.what());
  }
}

}  // namespace pseudomix::io
