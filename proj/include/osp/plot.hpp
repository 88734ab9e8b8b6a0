#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace osp {

struct PlotFile {
  std::filesystem::path path;
  std::string kind;  // "regret" or "scaling"
  double slope = 0.0;  // scaling figures only
};

// Reads summary.csv and the rounds.csv files of a run directory and writes
// SVG figures into dir/plots:
//   regret_lam<lambda>_T<T>.svg    mean cumulative regret per learner
//   scaling_<learner>_lam<lambda>.svg  log-log fit, when >= 4 horizons
// Throws FormatError naming any missing column.
std::vector<PlotFile> plot_directory(const std::filesystem::path& dir);

}  // namespace osp
