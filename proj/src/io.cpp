#include "gluedgames/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gluedgames {

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& why) {
  throw std::invalid_argument(where + ": " + why);
}

const Json& need(const Json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) bad_field(where, std::string("missing field '") + key + "'");
  return *it;
}

}  // namespace

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    bad_field("complex scalar", "expected a two-element [re, im] array");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    bad_field("matrix", "expected a non-empty nested array");
  const Index rows = static_cast<Index>(j.size());
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    if (static_cast<Index>(j[r].size()) != cols)
      bad_field("matrix row " + std::to_string(r), "ragged row length");
    for (Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

Json game_to_json(const LcsGame& game) {
  Json equations = Json::array();
  for (const Equation& eq : game.system.equations)
    equations.push_back(Json{{"coeffs", eq.coeffs}, {"rhs", eq.rhs}});
  return Json{{"modulus", game.system.modulus},
              {"num_vars", game.system.num_vars},
              {"equations", std::move(equations)}};
}

LcsGame game_from_json(const Json& j) {
  const std::string where = "game";
  LinearSystem sys;
  sys.modulus = need(j, "modulus", where).get<int>();
  sys.num_vars = need(j, "num_vars", where).get<int>();
  const Json& equations = need(j, "equations", where);
  if (!equations.is_array() || equations.empty())
    bad_field(where, "'equations' must be a non-empty array");
  for (size_t i = 0; i < equations.size(); ++i) {
    const std::string eq_where = "game, equation " + std::to_string(i);
    Equation eq;
    const Json& coeffs = need(equations[i], "coeffs", eq_where);
    if (!coeffs.is_array()) bad_field(eq_where, "'coeffs' must be an array");
    for (const Json& c : coeffs) {
      if (!c.is_number_integer()) bad_field(eq_where, "non-integer coefficient");
      eq.coeffs.push_back(c.get<int>());
    }
    eq.rhs = need(equations[i], "rhs", eq_where).get<int>();
    sys.equations.push_back(std::move(eq));
  }
  return lcs_game(std::move(sys));  // revalidates with equation-level messages
}

Json state_to_json(const BipartiteState& state) {
  Json amps = Json::array();
  for (Index i = 0; i < state.amp.size(); ++i)
    amps.push_back(complex_to_json(state.amp(i)));
  return Json{{"dim_a", state.dim_a}, {"dim_b", state.dim_b},
              {"state", std::move(amps)}};
}

BipartiteState state_from_json(const Json& j) {
  const std::string where = "state";
  BipartiteState s;
  s.dim_a = need(j, "dim_a", where).get<Index>();
  s.dim_b = need(j, "dim_b", where).get<Index>();
  const Json& amps = need(j, "state", where);
  if (!amps.is_array() ||
      static_cast<Index>(amps.size()) != s.dim_a * s.dim_b)
    bad_field(where, "amplitude count must equal dim_a * dim_b");
  s.amp.resize(s.dim_a * s.dim_b);
  for (Index i = 0; i < s.amp.size(); ++i) s.amp(i) = complex_from_json(amps[i]);
  return s;
}

Json strategy_to_json(const BipartiteStrategy& strat) {
  Json j = state_to_json(strat.state);
  Json alice = Json::array(), bob = Json::array();
  for (const Matrix& m : strat.alice) alice.push_back(matrix_to_json(m));
  for (const Matrix& m : strat.bob) bob.push_back(matrix_to_json(m));
  j["alice"] = std::move(alice);
  j["bob"] = std::move(bob);
  if (!strat.alice_per_equation.empty()) {
    Json per = Json::object();
    for (const auto& [key, obs] : strat.alice_per_equation)
      per[std::to_string(key.first) + "," + std::to_string(key.second)] =
          matrix_to_json(obs);
    j["alice_per_equation"] = std::move(per);
  }
  return j;
}

BipartiteStrategy strategy_from_json(const Json& j) {
  const std::string where = "strategy";
  BipartiteStrategy s;
  s.state = state_from_json(j);
  const Json& alice = need(j, "alice", where);
  const Json& bob = need(j, "bob", where);
  if (!alice.is_array() || !bob.is_array() || alice.size() != bob.size())
    bad_field(where, "'alice' and 'bob' must be arrays of equal length");
  for (size_t i = 0; i < alice.size(); ++i) {
    s.alice.push_back(matrix_from_json(alice[i]));
    s.bob.push_back(matrix_from_json(bob[i]));
    if (s.alice.back().rows() != s.state.dim_a)
      bad_field(where + ", alice observable " + std::to_string(i),
                "dimension does not match dim_a");
    if (s.bob.back().rows() != s.state.dim_b)
      bad_field(where + ", bob observable " + std::to_string(i),
                "dimension does not match dim_b");
  }
  if (auto it = j.find("alice_per_equation"); it != j.end()) {
    for (const auto& [key, value] : it->items()) {
      const auto comma = key.find(',');
      if (comma == std::string::npos)
        bad_field(where, "per-equation key '" + key + "' is not 'x,i'");
      const int x = std::stoi(key.substr(0, comma));
      const int i = std::stoi(key.substr(comma + 1));
      s.alice_per_equation[{x, i}] = matrix_from_json(value);
    }
  }
  return s;
}

Json witness_to_json(const DilationWitness& witness) {
  return Json{{"isometry_a", matrix_to_json(witness.isometry_a)},
              {"isometry_b", matrix_to_json(witness.isometry_b)},
              {"aux", state_to_json(witness.aux)}};
}

DilationWitness witness_from_json(const Json& j) {
  const std::string where = "dilation witness";
  DilationWitness w;
  w.isometry_a = matrix_from_json(need(j, "isometry_a", where));
  w.isometry_b = matrix_from_json(need(j, "isometry_b", where));
  w.aux = state_from_json(need(j, "aux", where));
  return w;
}

namespace {

Json residuals_to_json(const std::vector<ResidualEntry>& entries) {
  Json table = Json::object();
  for (const ResidualEntry& e : entries) table[e.label] = e.value;
  return table;
}

Json clusters_to_json(const StateSelftestReport& report) {
  Json clusters = Json::array();
  for (const SchmidtCluster& c : report.clusters)
    clusters.push_back(Json{{"value", c.value}, {"multiplicity", c.multiplicity}});
  return Json{{"clusters", std::move(clusters)}, {"pass", report.pass}};
}

}  // namespace

Json decomposition_to_json(const DecompositionReport& report) {
  Json parts = Json::array();
  for (const SubstrategyRecord& part : report.parts) {
    Json p{{"present", part.present}, {"weight", part.weight}};
    if (part.present) {
      p["magic_square_value"] = part.magic_square_value;
      p["block_dim_alice"] = part.strategy.dim_a();
      p["block_dim_bob"] = part.strategy.dim_b();
      p["representation"] =
          Json{{"max_residual", part.representation.max_value},
               {"pass", part.representation.pass(report.tol)}};
      p["state_signature"] = clusters_to_json(part.state_signature);
    }
    parts.push_back(std::move(p));
  }
  return Json{{"tolerance", report.tol},
              {"restricted", report.restricted},
              {"degenerate", report.degenerate},
              {"residuals", residuals_to_json(report.residuals)},
              {"max_residual", report.max_residual_value},
              {"state_signature", clusters_to_json(report.full_state_signature)},
              {"parts", std::move(parts)},
              {"pass", report.pass}};
}

Json extraction_to_json(const ExtractionReport& report) {
  Json parts = Json::array();
  for (const ExtractionPart& part : report.parts) {
    Json p{{"present", part.present}, {"norm_squared", part.norm_squared}};
    if (part.present) {
      p["relation_residuals"] = residuals_to_json(part.relation_residuals);
      p["max_relation_residual"] = part.max_relation_residual;
      p["unitarized_magic_square_value"] = part.unitarized_ms_value;
      p["cross_consistency"] = part.cross_consistency;
    }
    parts.push_back(std::move(p));
  }
  return Json{
      {"reporting", "relation residuals are the bound-level quantities; the "
                    "unitarized winning probability is a convenience summary "
                    "of the sign-snapped compressions"},
      {"winning_probability", report.winning_probability},
      {"epsilon", report.epsilon},
      {"fixed_equation_choice",
       report.choice == FixedObservableChoice::kLowestEquation ? "lowest"
                                                               : "highest"},
      {"degenerate", report.degenerate},
      {"parts", std::move(parts)}};
}

Json dilation_to_json(const DilationReport& report) {
  return Json{{"state_residual", report.state_residual},
              {"alice", residuals_to_json(report.alice)},
              {"bob", residuals_to_json(report.bob)},
              {"max_residual", report.max_value}};
}

Json convex_dilation_to_json(const ConvexDilationReport& report) {
  return Json{{"state_residual", report.state_residual},
              {"alice", residuals_to_json(report.alice)},
              {"bob", residuals_to_json(report.bob)},
              {"max_residual", report.max_value}};
}

Json sweep_summary_to_json(const RobustSweepResult& sweep) {
  Json rows = Json::array();
  for (const ExtractionRow& row : sweep.extraction_rows)
    rows.push_back(Json{{"seed", row.seed},
                        {"epsilon", row.epsilon},
                        {"measured_deficit", row.measured_deficit},
                        {"max_defect", row.max_defect},
                        {"max_relation_residual", row.max_relation_residual},
                        {"min_unitarized_ms_value", row.min_unitarized_ms_value}});
  return Json{{"lemma_instances", sweep.lemma_rows.size()},
              {"min_lemma_slack", sweep.min_lemma_slack},
              {"defect_slope", sweep.defect_slope},
              {"defect_monotone", sweep.defect_monotone},
              {"extraction_slope", sweep.extraction_slope},
              {"extraction_monotone", sweep.extraction_monotone},
              {"extraction_rows", std::move(rows)}};
}

std::string sweep_to_csv(const RobustSweepResult& sweep) {
  std::ostringstream os;
  os.precision(17);
  os << "seed,epsilon,lemma,bound,measured,slack\n";
  for (const SweepRow& row : sweep.lemma_rows)
    os << row.seed << ',' << row.epsilon << ',' << row.lemma << ','
       << row.bound << ',' << row.measured << ',' << row.slack << '\n';
  return os.str();
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void save_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open file for writing: " + path);
  out << content;
}

}  // namespace gluedgames
