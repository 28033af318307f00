#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace zadr::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kValidationError = 2, kNotConverged = 3 };

struct RunConfig {
  std::string subcommand;
  std::filesystem::path input_path;
  std::filesystem::path model_path;
  std::filesystem::path initial_path;  // diagnose: defaults to <model>.initial.json
  std::filesystem::path output_path;
  std::filesystem::path svg_path;
  std::vector<std::string> components;
  std::vector<std::string> covariates;
  std::string ref_component;  // name or 1-based index; empty = first component
  std::string kind = "simple";
  std::string zero_mode = "renormalized";
  std::size_t bootstrap_B = 999;
  bool bias = false;
  std::uint64_t seed = 1;
  std::vector<std::size_t> sizes;
  std::size_t reps = 200;
  double zero_fraction = 1.0 / 6.0;
  int max_iterations = 500;
  std::string order_by;
  bool ternary = false;
  std::size_t curve_points = 100;
};

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_predict(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_diagnose(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_plot(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Companion file holding the zero-free initial model: model.json -> model.initial.json.
std::filesystem::path initial_model_path(const std::filesystem::path& model_path);

/// Barycentric projection onto the triangle (0,0), (1,0), (1/2, sqrt(3)/2).
std::pair<double, double> ternary_xy(double y1, double y2, double y3);

}  // namespace zadr::cli
