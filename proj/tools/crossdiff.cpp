#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "crossdiff/runner.hpp"

namespace {

struct NullBuffer : std::streambuf {
  int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crossdiff: structure-preserving cross-diffusion solver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool strict = false;
  int levels = 4;
  std::vector<double> w_values;

  auto add_common = [&](CLI::App* cmd, bool needs_out) {
    cmd->add_option("--config", config_path, "JSON run configuration")
        ->required();
    if (needs_out) cmd->add_option("--out", out_dir, "output directory");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run the time loop");
  add_common(sim, true);
  sim->add_flag("--strict", strict, "abort on any diagnostic violation");

  CLI::App* audit = app.add_subcommand("audit", "certify entropy structure");
  add_common(audit, true);

  CLI::App* conv = app.add_subcommand("converge", "tau-refinement study");
  add_common(conv, true);
  conv->add_option("--levels", levels, "number of tau halvings + 1");

  CLI::App* inv = app.add_subcommand("invert", "pointwise A-inversion");
  add_common(inv, false);
  inv->add_option("W", w_values, "target vector W")->required();

  CLI11_PARSE(app, argc, argv);

  NullBuffer null_buffer;
  std::ostream null_stream(&null_buffer);
  const char* verbosity = std::getenv("CROSSDIFF_LOG");
  const bool quiet = verbosity && std::string(verbosity) == "quiet";
  std::ostream& log = quiet ? null_stream : std::cout;

  try {
    crossdiff::RunConfig cfg = crossdiff::load_config(config_path);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (strict) cfg.output.strict = true;

    if (sim->parsed())
      return crossdiff::run_simulate(cfg, cfg.output.dir, log, std::cerr);
    if (audit->parsed())
      return crossdiff::run_audit(cfg, cfg.output.dir, log, std::cerr);
    if (conv->parsed())
      return crossdiff::run_converge(cfg, levels, cfg.output.dir, log,
                                     std::cerr);
    if (inv->parsed()) {
      crossdiff::Vec W(w_values.size());
      for (size_t i = 0; i < w_values.size(); ++i) W[i] = w_values[i];
      return crossdiff::run_invert(cfg, W, log, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return crossdiff::kExitError;
  }
  return crossdiff::kExitError;
}
