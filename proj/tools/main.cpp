#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "osp/config.hpp"
#include "osp/errors.hpp"
#include "osp/plot.hpp"
#include "osp/runner.hpp"

namespace {

constexpr int kConfigExit = 1;
constexpr int kRuntimeExit = 3;

std::filesystem::path output_dir(const std::string& flag, const osp::ExperimentConfig& config) {
  if (!flag.empty()) return flag;
  if (!config.output_dir.empty()) return config.output_dir;
  if (const char* env = std::getenv("OSP_OUTPUT_DIR"); env && *env) return env;
  return "osp_output";
}

int finish(const osp::RunReport& report, const std::filesystem::path& dir) {
  std::size_t failed = 0, gating = 0;
  for (const auto& c : report.checks)
    if (c.gating) {
      ++gating;
      failed += !c.check.satisfied;
    }
  std::size_t errors = 0;
  for (const auto& c : report.cells) errors += !c.ok;
  std::cout << dir.string() << ": " << report.cells.size() << " cells, " << errors << " errors, "
            << gating - failed << "/" << gating << " checks passed\n";
  return report.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"online structured prediction experiments"};
  app.require_subcommand(1);

  std::string config_path, out_flag, dir, stream_path;
  unsigned jobs = 1;

  auto* run = app.add_subcommand("run", "run every cell of an experiment config");
  run->add_option("config", config_path, "experiment YAML")->required();
  run->add_option("--jobs,-j", jobs, "cells run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--output,-o", out_flag, "output directory");

  auto* plot = app.add_subcommand("plot", "write SVG figures for a run directory");
  plot->add_option("dir", dir, "run directory")->required();

  auto* check = app.add_subcommand("check", "recompute the checks of a run directory");
  check->add_option("dir", dir, "run directory")->required();

  auto* replay = app.add_subcommand("replay", "run the configured learners on a stream CSV");
  replay->add_option("stream", stream_path, "stream CSV (t,x0..,y,regime)")->required();
  replay->add_option("--config,-c", config_path, "experiment YAML")->required();
  replay->add_option("--jobs,-j", jobs, "cells run concurrently")->check(CLI::PositiveNumber);
  replay->add_option("--output,-o", out_flag, "output directory");

  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  auto* stream = app.add_subcommand("stream", "write one generated stream of a config as CSV");
  stream->add_option("config", config_path, "experiment YAML")->required();
  stream->add_option("--horizon,-T", horizon, "rounds")->required()->check(CLI::PositiveNumber);
  stream->add_option("--seed,-s", seed, "stream seed");
  stream->add_option("--output,-o", out_flag, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto config = osp::load_config(config_path);
      const auto out = output_dir(out_flag, config);
      return finish(osp::run_experiment(config, {out, jobs, &std::cerr}), out);
    }
    if (replay->parsed()) {
      const auto config = osp::load_config(config_path);
      std::ifstream in(stream_path);
      if (!in) throw osp::FormatError("cannot open " + stream_path);
      const auto stream = osp::read_stream_csv(in);
      const auto out = output_dir(out_flag, config);
      return finish(osp::replay_stream(config, stream, {out, jobs, &std::cerr}), out);
    }
    if (stream->parsed()) {
      const auto config = osp::load_config(config_path);
      const auto space = osp::LossSpace::builtin(config.loss);
      const auto spec = config.stream_spec(space->num_labels(), horizon, seed);
      spec.validate();
      const auto rounds = osp::generate(spec).rounds;
      if (out_flag.empty()) {
        osp::write_stream_csv(std::cout, rounds);
      } else {
        std::ofstream out(out_flag, std::ios::binary);
        osp::write_stream_csv(out, rounds);
        if (!out) throw std::runtime_error("cannot write " + out_flag);
      }
      return 0;
    }
    if (check->parsed()) return finish(osp::check_directory(dir, &std::cerr), dir);
    if (plot->parsed()) {
      for (const auto& f : osp::plot_directory(dir)) {
        std::cout << f.path.string();
        if (f.kind == "scaling") std::printf(" slope=%.3f", f.slope);
        std::cout << "\n";
      }
      return 0;
    }
  } catch (const osp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const osp::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeExit;
  }
  return 0;
}
