#include "inpaintopt/pipeline.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "inpaintopt/errors.hpp"
#include "inpaintopt/io.hpp"
#include "inpaintopt/spatial1d.hpp"
#include "inpaintopt/synth.hpp"

namespace inpaintopt {

std::string_view to_string(SpatialMethod m) { return m == SpatialMethod::Analytic ? "analytic" : "sparsify"; }

std::string_view to_string(GvoMethod m) {
  switch (m) {
    case GvoMethod::None: return "none";
    case GvoMethod::Direct: return "direct";
    case GvoMethod::Els: return "els";
    case GvoMethod::Fed: return "fed";
    case GvoMethod::Eed: return "eed";
  }
  return "unknown";
}

SpatialMethod parse_spatial_method(std::string_view name) {
  if (name == "analytic") return SpatialMethod::Analytic;
  if (name == "sparsify") return SpatialMethod::Sparsify;
  throw ValidationError("unknown spatial method '" + std::string(name) + "'");
}

GvoMethod parse_gvo_method(std::string_view name) {
  for (GvoMethod m : {GvoMethod::None, GvoMethod::Direct, GvoMethod::Els, GvoMethod::Fed, GvoMethod::Eed}) {
    if (name == to_string(m)) return m;
  }
  throw ValidationError("unknown tonal method '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  if (image.empty() && (width < 1 || height < 1)) throw ValidationError("config: image size must be positive");
  eed.validate();
  solver.validate();
  analytic.validate();
  sparsify.validate();
  exchange_params.validate();
  fed.validate();
  eed_gvo.validate();
  if (!(els_eps > 0.0)) throw ValidationError("config: eps must be positive");
  const bool linear_method = gvo == GvoMethod::Direct || gvo == GvoMethod::Els || gvo == GvoMethod::Fed;
  if (op == OperatorKind::Eed && linear_method) {
    throw ValidationError("config: tonal method '" + std::string(to_string(gvo)) + "' needs a linear operator");
  }
  if (op != OperatorKind::Eed && gvo == GvoMethod::Eed) {
    throw ValidationError("config: tonal method 'eed' needs the eed operator");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ValidationError("config: invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError("config: invalid boolean '" + std::string(text) + "' for " + std::string(key));
}

}  // namespace

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "image", "synth", "width", "height", "operator", "lambda", "eed_sigma", "rel_residual_tol",
      "spatial", "sigma", "s", "d", "p", "q", "exchange", "m", "iters", "method", "eps", "M",
      "power_iters", "alpha_star_fraction", "alpha", "eta", "gvo_iters", "jacobian_refresh", "out",
      "seed"};
  return keys;
}

void apply_config_value(PipelineConfig& cfg, std::string_view key, std::string_view raw) {
  const std::string value = trim(raw);
  auto real = [&] { return parse_number<double>(key, value); };
  auto integer = [&] { return parse_number<long>(key, value); };
  if (key == "image") {
    cfg.image = value;
  } else if (key == "synth") {
    cfg.synth = value;
  } else if (key == "width") {
    cfg.width = static_cast<int>(integer());
  } else if (key == "height") {
    cfg.height = static_cast<int>(integer());
  } else if (key == "operator") {
    cfg.op = parse_operator_kind(value);
  } else if (key == "lambda") {
    cfg.eed.lambda = real();
  } else if (key == "eed_sigma") {
    cfg.eed.sigma = real();
  } else if (key == "rel_residual_tol") {
    cfg.solver.rel_residual_tol = real();
  } else if (key == "spatial") {
    cfg.spatial = parse_spatial_method(value);
  } else if (key == "sigma") {
    cfg.analytic.sigma = real();
  } else if (key == "s") {
    cfg.analytic.s = real();
  } else if (key == "d") {
    cfg.analytic.d = cfg.sparsify.d = real();
  } else if (key == "p") {
    cfg.sparsify.p = real();
  } else if (key == "q") {
    cfg.sparsify.q = real();
  } else if (key == "exchange") {
    cfg.exchange = parse_bool(key, value);
  } else if (key == "m") {
    const long m = integer();
    if (m < 1) throw ValidationError("config: m must be at least 1");
    cfg.exchange_params.m = static_cast<std::size_t>(m);
  } else if (key == "iters") {
    cfg.exchange_params.iterations = integer();
  } else if (key == "method") {
    cfg.gvo = parse_gvo_method(value);
  } else if (key == "eps") {
    cfg.els_eps = cfg.fed.eps = real();
  } else if (key == "M") {
    cfg.fed.M = static_cast<int>(integer());
  } else if (key == "power_iters") {
    cfg.fed.power_iters = static_cast<int>(integer());
  } else if (key == "alpha_star_fraction") {
    cfg.fed.alpha_star_fraction = real();
  } else if (key == "alpha") {
    cfg.eed_gvo.alpha = real();
  } else if (key == "eta") {
    cfg.eed_gvo.eta = real();
  } else if (key == "gvo_iters") {
    cfg.eed_gvo.iterations = static_cast<int>(integer());
  } else if (key == "jacobian_refresh") {
    cfg.eed_gvo.jacobian_refresh = static_cast<int>(integer());
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw ValidationError("config: unknown key '" + std::string(key) + "'");
  }
}

void apply_config_text(PipelineConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config: line " + std::to_string(number) + " is not of the form key = value");
    }
    apply_config_value(cfg, trim(std::string_view(content).substr(0, eq)),
                       std::string_view(content).substr(eq + 1));
  }
}

nlohmann::ordered_json PipelineReport::to_json() const {
  nlohmann::ordered_json j;
  j["image"] = image;
  j["operator"] = op;
  j["width"] = width;
  j["height"] = height;
  j["seed"] = seed;
  j["stages"] = nlohmann::ordered_json::array();
  for (const StageReport& s : stages) {
    j["stages"].push_back({{"stage", s.stage},
                           {"method", s.method},
                           {"mse", s.mse},
                           {"mask_pixels", s.mask_pixels},
                           {"density", s.density},
                           {"iterations", s.iterations}});
  }
  j["final_mse"] = stages.empty() ? 0.0 : final_mse();
  return j;
}

nlohmann::ordered_json PipelineReport::timing_json() const {
  nlohmann::ordered_json j;
  double total = 0.0;
  for (const StageReport& s : stages) {
    j[s.stage] = s.seconds;
    total += s.seconds;
  }
  j["total"] = total;
  return j;
}

Image load_input_image(const PipelineConfig& cfg) {
  if (!cfg.image.empty()) return read_pgm(cfg.image);
  return synth_image(cfg.synth, cfg.width, cfg.height);
}

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

class CsvLog {
 public:
  CsvLog(const std::filesystem::path& dir, const std::string& name, const std::string& header) {
    if (dir.empty()) return;
    out_.open(dir / name);
    if (!out_) throw ValidationError("cannot write " + (dir / name).string());
    out_ << std::setprecision(17) << header << '\n';
  }
  bool enabled() const { return out_.is_open(); }
  template <typename... Ts>
  void row(const Ts&... values) {
    if (!enabled()) return;
    const char* sep = "";
    ((out_ << sep << values, sep = ","), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

StageReport stage_report(std::string stage, std::string method, const Image& u, const Image& f, const Mask& mask,
                         long iterations, double seconds) {
  return StageReport{std::move(stage), std::move(method), mse(u, f), mask.count(), mask.density(), iterations,
                     seconds};
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  PipelineResult result;
  result.f = load_input_image(cfg);
  const Image& f = result.f;
  PipelineReport& report = result.report;
  report.image = cfg.image.empty() ? "synth:" + cfg.synth : cfg.image;
  report.op = std::string(to_string(cfg.op));
  report.width = f.width();
  report.height = f.height();
  report.seed = cfg.seed;

  const Inpainter inpaint(cfg.op, f.width(), f.height(), cfg.eed, cfg.solver);

  {
    Stopwatch clock;
    long iterations = 0;
    if (cfg.spatial == SpatialMethod::Analytic) {
      result.mask = analytic_mask(f, cfg.analytic);
    } else {
      SparsifyParams params = cfg.sparsify;
      params.seed = Seed{cfg.seed};
      CsvLog log(cfg.out_dir, "sparsify.csv", "iteration,mask_pixels,mse");
      Image warm;
      auto observer = [&](const SparsifyStep& step) {
        if (!log.enabled()) return;
        warm = inpaint(*step.mask, f, warm.size() == f.size() ? &warm : nullptr);
        log.row(step.iteration, step.mask->count(), mse(warm, f));
      };
      const SparsifyResult r = probabilistic_sparsification(f, inpaint, params, observer);
      result.mask = r.mask;
      iterations = r.iterations;
    }
    result.u = inpaint(result.mask, f);
    report.stages.push_back(stage_report("spatial", std::string(to_string(cfg.spatial)), result.u, f, result.mask,
                                         iterations, clock.seconds()));
  }

  if (cfg.exchange) {
    Stopwatch clock;
    ExchangeParams params = cfg.exchange_params;
    params.seed = Seed{cfg.seed + 1};
    CsvLog log(cfg.out_dir, "exchange.csv", "iteration,mse,accepted");
    const ExchangeResult r = nonlocal_pixel_exchange(
        f, result.mask, inpaint, params, [&](const ExchangeStep& s) { log.row(s.iteration, s.mse, s.accepted ? 1 : 0); });
    result.mask = r.mask;
    result.u = inpaint(result.mask, f);
    report.stages.push_back(
        stage_report("exchange", "nonlocal", result.u, f, result.mask, params.iterations, clock.seconds()));
  }

  result.g = masked_values(f, result.mask);
  if (cfg.gvo != GvoMethod::None) {
    Stopwatch clock;
    CsvLog log(cfg.out_dir, "gvo.csv", "iteration,grad_sq,mse");
    const GvoObserver observer = [&](const GvoStep& s) { log.row(s.iteration, s.grad_sq, s.mse); };
    GvoResult r;
    switch (cfg.gvo) {
      case GvoMethod::Direct:
        r = gvo_direct(f, result.mask, inpaint.linear_operator(), cfg.solver);
        break;
      case GvoMethod::Els:
        r = gvo_exact_line_search(f, result.mask, inpaint.linear_operator(), cfg.els_eps, cfg.solver, observer);
        break;
      case GvoMethod::Fed:
        r = gvo_fed(f, result.mask, inpaint.linear_operator(), cfg.fed, cfg.solver, observer);
        break;
      case GvoMethod::Eed:
        r = gvo_eed(f, result.mask, cfg.eed, cfg.eed_gvo, cfg.solver, observer);
        break;
      case GvoMethod::None:
        break;
    }
    result.g = r.g;
    result.u = inpaint(result.mask, result.g);
    report.stages.push_back(stage_report("gvo", std::string(to_string(cfg.gvo)), result.u, f, result.mask,
                                         r.iterations, clock.seconds()));
  }

  if (!cfg.out_dir.empty()) {
    write_pbm(result.mask, cfg.out_dir / "mask.pbm");
    write_tonal_csv(result.g, result.mask, cfg.out_dir / "tonal.csv");
    write_pgm(result.u, cfg.out_dir / "reconstruction.pgm");
    write_file(cfg.out_dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(cfg.out_dir / "timing.json", report.timing_json().dump(2) + "\n");
  }
  return result;
}

bool Table1::matches(double rel_tol) const {
  if (rows.size() != reference.size()) return false;
  auto close = [rel_tol](double v, double ref) { return std::abs(v - ref) <= rel_tol * std::abs(ref); };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!close(rows[i].interpolation, reference[i].interpolation) || !close(rows[i].tonal, reference[i].tonal) ||
        !close(rows[i].approximation, reference[i].approximation)) {
      return false;
    }
  }
  return true;
}

std::string Table1::format() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "knots  interpolation (ref)      tonal (ref)           optimal lines (ref)\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Table1Row& r = rows[i];
    const Table1Row& ref = reference[i];
    out << std::setw(5) << r.knots << "  " << std::setw(8) << r.interpolation << " (" << std::setw(7)
        << ref.interpolation << ")  " << std::setw(8) << r.tonal << " (" << std::setw(7) << ref.tonal << ")  "
        << std::setw(8) << r.approximation << " (" << std::setw(7) << ref.approximation << ")\n";
  }
  return out.str();
}

Table1 reproduce_table1() {
  const ConvexFunction1D f = builtin_function("exp2x3px");
  Table1 table;
  table.reference = {{5, 12.501, 4.229, 3.982}, {7, 5.134, 1.810, 1.748}, {9, 2.785, 0.999, 0.977}};
  for (const Table1Row& ref : table.reference) {
    const int intervals = ref.knots - 1;
    const FreeKnotResult interp = optimize_knots_interpolation(f, intervals);
    const Spline1D tonal = tonal_optimize_1d(f, interp.knots);
    const OptimalLineResult lines = optimal_line_knots(f, intervals);
    table.rows.push_back({ref.knots, l1_interp_error(f, interp.knots), l1_spline_error(f, tonal),
                          l1_spline_error(f, lines.spline)});
  }
  return table;
}

}  // namespace inpaintopt
