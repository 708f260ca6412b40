#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pe::cli {

enum class Subcommand { Density, Kernel, Bulk, Edge, Sample, Oracle, Contours };

enum class Format { Csv, Json };

/// Inclusive grid lo:hi:count.
struct GridSpec {
  double lo = 0.0;
  double hi = 0.0;
  int count = 1;

  std::vector<double> points() const;
};

/// Parses "lo:hi:count"; ValidationError on malformed text, count < 1 or lo > hi.
GridSpec parse_grid(const std::string& text);

struct RunConfig {
  Subcommand subcommand = Subcommand::Density;

  std::string model = "ginibre";  // ginibre | inverses | truncated
  int n = 1;
  int M = 1;
  int K = 0;
  std::vector<int> nu;
  std::vector<int> nuTilde;
  int kappa = 0;

  std::optional<double> x0;
  std::optional<double> phi;
  std::string xiGrid = "-2:2:9";
  std::string etaGrid;  // empty: same as xiGrid
  std::string xGrid = "0.5:3:6";
  std::string yGrid;  // empty: same as xGrid
  int grid = 200;     // density rows
  std::vector<int> nList;  // bulk/edge: convergence report instead of a grid table

  double panels = 0.0;
  int order = 16;
  double tol = 1e-6;
  std::string contours = "auto";  // auto | direct-left | direct-right | direct-best | bulk | edge
  std::string kind = "direct";    // contours subcommand: direct | bulk | edge
  int samples = 200;              // contours subcommand: points per segment

  int trials = 100;
  std::optional<std::uint64_t> seed;
  int bins = 0;  // sample: 0 writes raw values, otherwise a histogram

  Format format = Format::Csv;
  std::string out;  // empty: standard output
};

const char* subcommand_name(Subcommand s);

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;

/// Executes the subcommand and writes its table. Diagnostics go to standard error.
int run(const RunConfig& config);

}  // namespace pe::cli
