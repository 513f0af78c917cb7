#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "inpaintopt/inpaint.hpp"
#include "inpaintopt/spatial2d.hpp"
#include "inpaintopt/tonal2d.hpp"

namespace inpaintopt {

enum class SpatialMethod { Analytic, Sparsify };
enum class GvoMethod { None, Direct, Els, Fed, Eed };

std::string_view to_string(SpatialMethod m);
std::string_view to_string(GvoMethod m);
SpatialMethod parse_spatial_method(std::string_view name);
GvoMethod parse_gvo_method(std::string_view name);

struct PipelineConfig {
  std::string image;  // PGM path; empty selects the synthetic image
  std::string synth = "disk";
  int width = 64;
  int height = 64;
  OperatorKind op = OperatorKind::Homogeneous;
  EedParams eed;
  SolverConfig solver;
  SpatialMethod spatial = SpatialMethod::Sparsify;
  AnalyticParams analytic;
  SparsifyParams sparsify;
  bool exchange = true;
  ExchangeParams exchange_params;
  GvoMethod gvo = GvoMethod::Fed;
  double els_eps = 1e-3;
  FedConfig fed;
  EedGvoConfig eed_gvo;
  std::filesystem::path out_dir;  // empty: write nothing
  std::uint64_t seed = 0;

  void validate() const;
};

// Sets one option from its textual key/value form, as used by config files
// and command-line overrides.
void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view value);
// Lines of "key = value"; '#' starts a comment.
void apply_config_text(PipelineConfig& cfg, std::string_view text);
const std::vector<std::string_view>& config_keys();

struct StageReport {
  std::string stage;
  std::string method;
  double mse = 0.0;
  std::size_t mask_pixels = 0;
  double density = 0.0;
  long iterations = 0;
  double seconds = 0.0;  // kept out of report.json
};

struct PipelineReport {
  std::string image;
  std::string op;
  int width = 0;
  int height = 0;
  std::uint64_t seed = 0;
  std::vector<StageReport> stages;

  double final_mse() const { return stages.back().mse; }
  nlohmann::ordered_json to_json() const;
  nlohmann::ordered_json timing_json() const;
};

struct PipelineResult {
  PipelineReport report;
  Image f;
  Mask mask;
  Image g;
  Image u;
};

Image load_input_image(const PipelineConfig& cfg);

// Spatial selection, optional exchange, optional tonal optimisation. With an
// output directory it writes mask.pbm, tonal.csv, reconstruction.pgm,
// report.json, timing.json and per-stage CSV logs.
PipelineResult run_pipeline(const PipelineConfig& cfg);

struct Table1Row {
  int knots = 0;
  double interpolation = 0.0;
  double tonal = 0.0;
  double approximation = 0.0;
};

struct Table1 {
  std::vector<Table1Row> rows;
  std::vector<Table1Row> reference;
  // all nine values within the relative tolerance of the reference
  bool matches(double rel_tol = 0.01) const;
  std::string format() const;
};

// Free-knot errors for exp(2x-3)+x on [-4,4] with 5, 7 and 9 knots.
Table1 reproduce_table1();

}  // namespace inpaintopt
