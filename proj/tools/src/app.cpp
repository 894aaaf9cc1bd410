#include <CLI11.hpp>

#include <ostream>

#include "poststab_cli/cli.hpp"

namespace poststab::cli {

namespace {

void add_common(CLI::App* cmd, Flags& f, bool scenario_required) {
  auto* s = cmd->add_option("--scenario", f.scenario, "scenario JSON file");
  if (scenario_required) s->required();
  cmd->add_option("--out", f.out, "output directory")->each([&f](const std::string&) { f.out_given = true; });
  cmd->add_option("--seed", f.seed, "seed for randomized sweeps (default: the scenario's, else 0)");
  cmd->add_flag("--oracle", f.oracle, "cross-check closed forms against quadrature");
  cmd->add_option("--tol", f.tol, "tolerance for oracle comparisons")->check(CLI::PositiveNumber);
  cmd->add_option("--format", f.format, "csv, json or both")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"csv", Format::Csv}, {"json", Format::Json}, {"both", Format::Both}}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Posterior stability bounds: verification suites, Gaussian closed forms, experiments", "poststab"};
  app.require_subcommand(1);
  Flags flags;
  GaussianArgs gargs;
  std::string experiment;

  auto* verify = app.add_subcommand("verify", "check every requested bound on a scenario");
  add_common(verify, flags, true);

  auto* gauss = app.add_subcommand("gaussian", "Gaussian closed forms, optionally against quadrature");
  add_common(gauss, flags, false);
  gauss->add_option("--mean-a", gargs.mean_a);
  gauss->add_option("--var-a", gargs.var_a);
  gauss->add_option("--mean-b", gargs.mean_b);
  gauss->add_option("--var-b", gargs.var_b);
  gauss->add_option("--distance", gargs.distances, "hellinger, kl, tv, w2 (repeatable; default all)");

  auto* exp = app.add_subcommand("experiment", "run one experiment section of a scenario");
  exp->add_option("name", experiment, "sensitivity, huber, brittleness, continuity or derivative")
      ->required()
      ->check(CLI::IsMember({"sensitivity", "huber", "brittleness", "continuity", "derivative"}));
  add_common(exp, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  if (*verify) return cmd_verify(flags, out, err);
  if (*gauss) return cmd_gaussian(gargs, flags, out, err);
  return cmd_experiment(experiment, flags, out, err);
}

}  // namespace poststab::cli
