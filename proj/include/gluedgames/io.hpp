#pragma once

#include <string>

#include <json.hpp>

#include "gluedgames/robustness.hpp"

namespace gluedgames {

using Json = nlohmann::json;

// Complex scalars serialise as [re, im]; matrices as row-major nested
// arrays of them. Shared by every format below.

Json complex_to_json(const Complex& z);
Complex complex_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json game_to_json(const LcsGame& game);
/// Validates the linear-system invariants; failures name the equation and
/// field.
LcsGame game_from_json(const Json& j);

Json strategy_to_json(const BipartiteStrategy& strat);
BipartiteStrategy strategy_from_json(const Json& j);

Json witness_to_json(const DilationWitness& witness);
DilationWitness witness_from_json(const Json& j);

Json state_to_json(const BipartiteState& state);
BipartiteState state_from_json(const Json& j);

Json decomposition_to_json(const DecompositionReport& report);
Json extraction_to_json(const ExtractionReport& report);
Json dilation_to_json(const DilationReport& report);
Json convex_dilation_to_json(const ConvexDilationReport& report);

/// JSON summary of a sweep: fitted constants, monotonicity flags, worst
/// slack and the per-point extraction rows.
Json sweep_summary_to_json(const RobustSweepResult& sweep);
/// One line per lemma-bound instance: seed,epsilon,lemma,bound,measured,slack.
std::string sweep_to_csv(const RobustSweepResult& sweep);

Json load_json_file(const std::string& path);
void save_text_file(const std::string& path, const std::string& content);

}  // namespace gluedgames
