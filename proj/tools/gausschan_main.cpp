#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gausschan/cli.hpp"

namespace cli = gausschan::cli;

int main(int argc, char** argv) {
  CLI::App app{"Gaussian channel toolkit: CP checks, composition, classification, division, semigroups"};
  app.require_subcommand(1);

  std::optional<double> tol_flag;
  bool as_json = false;
  app.add_option("--tol", tol_flag, "absolute and relative tolerance (overrides $GAUSSCHAN_TOL)");
  app.add_flag("--json", as_json, "print the machine-readable report");

  std::string path, second, dir;
  std::optional<std::string> out, out_left, out_right, out_dir;
  std::optional<double> epsilon;
  std::vector<double> times{1.0};

  auto* check = app.add_subcommand("check", "validate a channel file");
  check->add_option("path", path, "channel file")->required();

  auto* compose = app.add_subcommand("compose", "compose two channels (second acts first)");
  compose->add_option("first", path, "channel file")->required();
  compose->add_option("second", second, "channel file")->required();
  compose->add_option("--out", out, "write the product here");

  auto* classify = app.add_subcommand("classify", "aggregate classification report");
  classify->add_option("path", path, "channel file")->required();

  auto* divide = app.add_subcommand("divide", "split into two non-reversible factors");
  divide->add_option("path", path, "channel file")->required();
  divide->add_option("--epsilon", epsilon, "share of p(X,Y) given to the left factor");
  divide->add_option("--out-left", out_left, "left factor file");
  divide->add_option("--out-right", out_right, "right factor file");

  auto* semigroup = app.add_subcommand("semigroup", "evolve a generator file");
  semigroup->add_option("path", path, "generator file")->required();
  semigroup->add_option("--t", times, "evaluation times")->delimiter(',');
  semigroup->add_option("--out-dir", out_dir, "directory for evolved channel files");

  auto* embed = app.add_subcommand("embed-check", "is X the time-one map of a semigroup?");
  embed->add_option("path", path, "channel file")->required();

  auto* batch = app.add_subcommand("batch", "check and classify every *.json in a directory");
  batch->add_option("dir", dir, "directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto opt_path = [](const std::optional<std::string>& s) -> std::optional<std::filesystem::path> {
    if (!s) return std::nullopt;
    return std::filesystem::path(*s);
  };

  cli::Outcome outcome;
  try {
    const gausschan::Tolerance tol = cli::resolve_tolerance(tol_flag);
    if (*check) {
      outcome = cli::cmd_check(path, tol);
    } else if (*compose) {
      outcome = cli::cmd_compose(path, second, opt_path(out), tol);
    } else if (*classify) {
      outcome = cli::cmd_classify(path, tol);
    } else if (*divide) {
      outcome = cli::cmd_divide(path, epsilon, opt_path(out_left), opt_path(out_right), tol);
    } else if (*semigroup) {
      outcome = cli::cmd_semigroup(path, times, opt_path(out_dir), tol);
    } else if (*embed) {
      outcome = cli::cmd_embed_check(path, tol);
    } else {
      outcome = cli::cmd_batch(dir, tol);
    }
  } catch (const gausschan::Error& e) {
    outcome = cli::error_outcome("gausschan", e);
  }

  if (as_json) {
    std::cout << outcome.report.dump(2) << "\n";
  } else {
    std::cout << cli::render_human(outcome.report);
  }
  return outcome.exit_code;
}
