#include <cstdint>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gluedgames/io.hpp"

namespace gg = gluedgames;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct GlobalOptions {
  double tol = gg::kDefaultTol;
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string out;
};

void write_output(const GlobalOptions& opt, const std::string& content) {
  if (opt.out.empty()) {
    std::cout << content;
    if (content.empty() || content.back() != '\n') std::cout << '\n';
  } else {
    gg::save_text_file(opt.out, content);
  }
}

/// JSON is the machine format; the text rendering drops detail and says so
/// whenever it actually does (scalar outputs are complete either way).
void emit_report(const GlobalOptions& opt, const gg::Json& report,
                 const std::string& text, bool lossy = true) {
  if (opt.format == "json") {
    gg::Json wrapped{{"tool_version", kToolVersion},
                     {"tolerance", opt.tol},
                     {"seed", opt.seed},
                     {"report", report}};
    write_output(opt, wrapped.dump(2));
  } else if (lossy) {
    write_output(opt, "# lossy text rendering; --format json for the full report\n" + text);
  } else {
    write_output(opt, text);
  }
}

void emit_artifact(const GlobalOptions& opt, const gg::Json& artifact) {
  write_output(opt, artifact.dump(2));
}

std::vector<std::array<int, 4>> parse_characters(const std::string& spec) {
  std::vector<std::array<int, 4>> chars;
  std::stringstream ss(spec);
  std::string group;
  while (std::getline(ss, group, ',')) {
    if (group.size() != 4)
      throw std::invalid_argument("--chars: each group needs four signs");
    std::array<int, 4> chi{};
    for (int g = 0; g < 4; ++g) {
      if (group[g] == '+') chi[g] = 1;
      else if (group[g] == '-') chi[g] = -1;
      else throw std::invalid_argument("--chars: signs must be '+' or '-'");
    }
    chars.push_back(chi);
  }
  if (chars.empty()) throw std::invalid_argument("--chars: empty list");
  return chars;
}

std::vector<std::array<int, 4>> random_characters(std::mt19937_64& rng) {
  std::vector<std::array<int, 4>> chars(4);
  for (auto& chi : chars)
    for (int& v : chi) v = (rng() & 1u) ? 1 : -1;
  return chars;
}

gg::BipartiteState random_unit_state(gg::Index dim_a, gg::Index dim_b,
                                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  gg::Vector amp(dim_a * dim_b);
  for (gg::Index i = 0; i < amp.size(); ++i)
    amp(i) = gg::Complex(gauss(rng), gauss(rng));
  amp /= amp.norm();
  return gg::BipartiteState{dim_a, dim_b, amp};
}

std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  if (grid.empty()) throw std::invalid_argument("--eps-grid: empty grid");
  return grid;
}

std::string render_decomposition(const gg::DecompositionReport& report) {
  std::ostringstream os;
  os << "decomposition: " << (report.pass ? "PASS" : "FAIL") << '\n'
     << "  max proof-step residual: " << report.max_residual_value << '\n'
     << "  degenerate: " << (report.degenerate ? "yes" : "no") << '\n';
  for (int k = 0; k < 2; ++k) {
    const auto& part = report.parts[k];
    os << "  part " << (k + 1) << ": weight " << std::setprecision(12)
       << part.weight;
    if (part.present)
      os << ", magic-square value " << part.magic_square_value
         << ", representation "
         << (part.representation.pass(report.tol) ? "PASS" : "FAIL")
         << ", state signature "
         << (part.state_signature.pass ? "PASS" : "FAIL");
    else
      os << " (absent)";
    os << '\n';
  }
  os << "  state signature (full): "
     << (report.full_state_signature.pass ? "PASS" : "FAIL") << '\n';
  return os.str();
}

int run(int argc, char** argv) {
  CLI::App app{
      "Builders, evaluators and verifiers for binary linear-constraint-system "
      "nonlocal games and their glued variants"};
  app.set_version_flag("--version", kToolVersion);
  GlobalOptions opt;
  app.add_option("--tol", opt.tol, "numerical tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", opt.seed, "seed for all randomised constructions")
      ->capture_default_str();
  app.add_option("--format", opt.format, "report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  app.add_option("--out", opt.out, "write output to this file instead of stdout");
  app.require_subcommand(1);

  // ---- game ----
  auto* game_cmd = app.add_subcommand("game", "construct or analyse games")->fallthrough();
  game_cmd->require_subcommand(1);

  auto* game_build = game_cmd->add_subcommand("build", "emit a game as JSON")->fallthrough();
  std::string game_kind;
  std::vector<std::string> glue_inputs;
  game_build->add_option("kind", game_kind, "ms | mp | gms | glue")
      ->required()
      ->check(CLI::IsMember({"ms", "mp", "gms", "glue"}));
  game_build->add_option("inputs", glue_inputs, "two game files for 'glue'");
  game_build->callback([&] {
    gg::LcsGame game;
    if (game_kind == "ms") game = gg::magic_square();
    else if (game_kind == "mp") game = gg::magic_pentagram();
    else if (game_kind == "gms") game = gg::glued_magic_square();
    else {
      if (glue_inputs.size() != 2)
        throw std::invalid_argument("game build glue needs two input files");
      game = gg::glue(gg::game_from_json(gg::load_json_file(glue_inputs[0])),
                      gg::game_from_json(gg::load_json_file(glue_inputs[1])));
    }
    emit_artifact(opt, gg::game_to_json(game));
  });

  auto* game_value =
      game_cmd->add_subcommand("classical-value", "exact classical value")->fallthrough();
  std::string value_file;
  game_value->add_option("file", value_file, "game JSON")->required();
  game_value->callback([&] {
    gg::Rational value =
        gg::classical_value(gg::game_from_json(gg::load_json_file(value_file)));
    emit_report(opt,
                gg::Json{{"num", value.num}, {"den", value.den},
                         {"value", value.value()}},
                value.str() + "\n", false);
  });

  // ---- strategy ----
  auto* strategy_cmd =
      app.add_subcommand("strategy", "construct strategies as JSON")->fallthrough();
  strategy_cmd->require_subcommand(1);
  auto* strategy_build = strategy_cmd->add_subcommand("build", "emit a strategy")->fallthrough();
  std::string strategy_kind, chars_spec, xi_file, convex_spec, input_file,
      perturb_game_file;
  int glued_part = 1;
  double alpha = 1.0 / std::sqrt(2.0);
  double eps = 0.0;
  std::string build_file;
  strategy_build
      ->add_option("kind", strategy_kind,
                   "ideal-ms | ideal-mp | glued | example | convex | perturb")
      ->required()
      ->check(CLI::IsMember(
          {"ideal-ms", "ideal-mp", "glued", "example", "convex", "perturb"}));
  strategy_build->add_option(
      "file", build_file,
      "convex: the parts file; perturb: the strategy to perturb");
  strategy_build->add_option("--part", glued_part, "glued: active part (1 or 2)")
      ->check(CLI::IsMember({1, 2}));
  strategy_build->add_option(
      "--chars", chars_spec,
      "glued: four sign groups like '+-+-,++++,+--+,----' (default: random)");
  strategy_build->add_option("--alpha", alpha,
                             "example: weight of the first block");
  strategy_build->add_option("--xi", xi_file,
                             "example: auxiliary state JSON (default: random)");
  strategy_build->add_option("--spec", convex_spec,
                             "convex: JSON file {\"parts\":[{\"weight\":..,"
                             "\"strategy\":\"path\"},..]}");
  strategy_build->add_option("--input", input_file, "perturb: strategy JSON");
  strategy_build->add_option("--eps", eps, "perturb: target deficit");
  strategy_build->add_option("--game", perturb_game_file,
                             "perturb: game JSON (default: glued magic square)");
  strategy_build->callback([&] {
    std::mt19937_64 rng(opt.seed);
    gg::BipartiteStrategy strategy;
    if (strategy_kind == "ideal-ms") {
      strategy = gg::ideal_magic_square();
    } else if (strategy_kind == "ideal-mp") {
      strategy = gg::ideal_magic_pentagram();
    } else if (strategy_kind == "glued") {
      auto chars = chars_spec.empty() ? random_characters(rng)
                                      : parse_characters(chars_spec);
      strategy = gg::build_glued_strategy(
          glued_part,
          gg::representation_from_characters(chars, gg::bell_basis()),
          opt.tol);
    } else if (strategy_kind == "example") {
      gg::BipartiteState xi =
          xi_file.empty() ? random_unit_state(5, 5, rng)
                          : gg::state_from_json(gg::load_json_file(xi_file));
      strategy = gg::example_strategy(
          alpha, std::sqrt(std::max(0.0, 1.0 - alpha * alpha)), xi, opt.tol);
    } else if (strategy_kind == "convex") {
      if (convex_spec.empty()) convex_spec = build_file;
      if (convex_spec.empty())
        throw std::invalid_argument(
            "strategy build convex needs a parts file");
      gg::Json spec = gg::load_json_file(convex_spec);
      std::vector<std::pair<double, gg::BipartiteStrategy>> parts;
      for (const gg::Json& part : spec.at("parts"))
        parts.emplace_back(part.at("weight").get<double>(),
                           gg::strategy_from_json(gg::load_json_file(
                               part.at("strategy").get<std::string>())));
      strategy = gg::convex_combination(parts, opt.tol);
    } else {  // perturb
      if (input_file.empty()) input_file = build_file;
      if (input_file.empty())
        throw std::invalid_argument(
            "strategy build perturb needs a strategy file");
      gg::LcsGame game = perturb_game_file.empty()
                             ? gg::glued_magic_square()
                             : gg::game_from_json(
                                   gg::load_json_file(perturb_game_file));
      strategy = gg::perturb_strategy(
          game, gg::strategy_from_json(gg::load_json_file(input_file)), eps,
          opt.seed);
    }
    emit_artifact(opt, gg::strategy_to_json(strategy));
  });

  // ---- evaluate ----
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "winning probability of a strategy")->fallthrough();
  std::string eval_game_file, eval_strategy_file;
  evaluate_cmd->add_option("game", eval_game_file)->required();
  evaluate_cmd->add_option("strategy", eval_strategy_file)->required();
  evaluate_cmd->callback([&] {
    gg::LcsGame game = gg::game_from_json(gg::load_json_file(eval_game_file));
    gg::BipartiteStrategy strategy =
        gg::strategy_from_json(gg::load_json_file(eval_strategy_file));
    const double value = gg::winning_probability(game, strategy, opt.tol);
    std::ostringstream os;
    os << std::fixed << std::setprecision(12) << value << '\n';
    emit_report(opt, gg::Json{{"winning_probability", value}}, os.str(),
                false);
  });

  // ---- decompose ----
  auto* decompose_cmd = app.add_subcommand(
      "decompose",
      "split a perfect glued-magic-square strategy into its two parts")->fallthrough();
  std::string decompose_file;
  int decompose_exit = 0;
  decompose_cmd->add_option("strategy", decompose_file)->required();
  decompose_cmd->callback([&] {
    gg::DecompositionReport report = gg::decompose_gms(
        gg::strategy_from_json(gg::load_json_file(decompose_file)), opt.tol);
    emit_report(opt, gg::decomposition_to_json(report),
                render_decomposition(report));
    decompose_exit = report.pass ? 0 : 1;
  });

  // ---- robust ----
  auto* robust_cmd = app.add_subcommand("robust", "robustness sweeps")->fallthrough();
  robust_cmd->require_subcommand(1);
  auto* sweep_cmd = robust_cmd->add_subcommand(
      "sweep", "perturb a strategy over a deficit grid and check every bound")->fallthrough();
  std::string sweep_strategy_file, eps_grid_spec = "1e-2,1e-3,1e-4", csv_path,
              fix_choice = "lowest";
  int sweep_seeds = 10;
  int sweep_exit = 0;
  sweep_cmd->add_option("strategy", sweep_strategy_file)->required();
  sweep_cmd->add_option("--eps-grid", eps_grid_spec, "comma-separated deficits")
      ->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep_seeds, "seeds per grid point")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--csv", csv_path, "write per-instance rows here");
  sweep_cmd->add_option("--fix", fix_choice,
                        "equation supplying the fixed observable")
      ->check(CLI::IsMember({"lowest", "highest"}))
      ->capture_default_str();
  sweep_cmd->callback([&] {
    gg::BipartiteStrategy base =
        gg::strategy_from_json(gg::load_json_file(sweep_strategy_file));
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < sweep_seeds; ++s) seeds.push_back(opt.seed + s);
    gg::RobustSweepResult sweep = gg::robust_sweep(
        base, parse_grid(eps_grid_spec), seeds,
        fix_choice == "lowest" ? gg::FixedObservableChoice::kLowestEquation
                               : gg::FixedObservableChoice::kHighestEquation);
    if (!csv_path.empty()) gg::save_text_file(csv_path, gg::sweep_to_csv(sweep));
    std::ostringstream text;
    text << "sweep: " << sweep.lemma_rows.size() << " bound instances, worst slack "
         << sweep.min_lemma_slack << '\n'
         << "  defect slope " << sweep.defect_slope << " ("
         << (sweep.defect_monotone ? "monotone" : "not monotone") << ")\n"
         << "  extraction slope " << sweep.extraction_slope << " ("
         << (sweep.extraction_monotone ? "monotone" : "not monotone") << ")\n";
    emit_report(opt, gg::sweep_summary_to_json(sweep), text.str());
    const bool ok = sweep.min_lemma_slack >= -1e-12 && sweep.defect_monotone &&
                    sweep.extraction_monotone;
    sweep_exit = ok ? 0 : 1;
  });

  // ---- verify ----
  auto* verify_cmd = app.add_subcommand("verify", "verify witnesses")->fallthrough();
  verify_cmd->require_subcommand(1);
  auto* dilation_cmd = verify_cmd->add_subcommand(
      "dilation", "check that an ideal strategy locally dilates a strategy")->fallthrough();
  std::string dil_strategy_file, dil_ideal_file, dil_witness_file;
  int dilation_exit = 0;
  dilation_cmd->add_option("strategy", dil_strategy_file)->required();
  dilation_cmd->add_option("ideal", dil_ideal_file)->required();
  dilation_cmd->add_option("witness", dil_witness_file)->required();
  dilation_cmd->callback([&] {
    gg::DilationReport report = gg::verify_local_dilation(
        gg::strategy_from_json(gg::load_json_file(dil_strategy_file)),
        gg::strategy_from_json(gg::load_json_file(dil_ideal_file)),
        gg::witness_from_json(gg::load_json_file(dil_witness_file)), opt.tol);
    const bool pass = report.pass(opt.tol);
    std::ostringstream text;
    text << (pass ? "PASS" : "FAIL") << " (max residual " << report.max_value
         << ")\n";
    emit_report(opt, gg::dilation_to_json(report), text.str());
    dilation_exit = pass ? 0 : 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  return decompose_exit + sweep_exit + dilation_exit;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
