#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

#include "inpaintopt/errors.hpp"
#include "inpaintopt/io.hpp"
#include "inpaintopt/pipeline.hpp"
#include "inpaintopt/spatial1d.hpp"
#include "inpaintopt/synth.hpp"

using namespace inpaintopt;

namespace {

// Flags are stored as config key/value pairs.
struct Options {
  std::map<std::string, std::string> values;
  std::string mask_path;
  std::string tonal_path;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string function = "exp2x3px";
  int intervals = 4;
  std::string synth_output;
};

void add_value(CLI::App* app, Options& opts, const std::string& flag, const std::string& key,
               const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&opts, key](const std::string& v) { opts.values[key] = v; }, help);
}

void add_image_flags(CLI::App* app, Options& opts) {
  add_value(app, opts, "--image", "image", "input PGM");
  add_value(app, opts, "--synth", "synth", "synthetic image name when no --image is given");
  add_value(app, opts, "--width", "width", "synthetic image width");
  add_value(app, opts, "--height", "height", "synthetic image height");
  add_value(app, opts, "--lambda", "lambda", "EED contrast parameter");
  add_value(app, opts, "--eed-sigma", "eed_sigma", "EED presmoothing scale");
}

PipelineConfig build_config(const Options& opts) {
  PipelineConfig cfg;
  if (!opts.config_path.empty()) apply_config_text(cfg, read_file(opts.config_path));
  for (const auto& [key, value] : opts.values) apply_config_value(cfg, key, value);
  for (const std::string& item : opts.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + item + "'");
    apply_config_value(cfg, item.substr(0, eq), item.substr(eq + 1));
  }
  return cfg;
}

Mask load_mask(const Options& opts, const Image& f) {
  if (opts.mask_path.empty()) throw ValidationError("--mask is required");
  Mask mask = read_pbm(opts.mask_path);
  if (!mask.same_shape(f)) throw ValidationError("mask and image sizes differ");
  return mask;
}

Inpainter make_inpainter(const PipelineConfig& cfg, const Image& f) {
  return Inpainter(cfg.op, f.width(), f.height(), cfg.eed, cfg.solver);
}

// CSV rows go to <out>/<name> when an output directory is set, else stdout.
class CsvSink {
 public:
  CsvSink(const PipelineConfig& cfg, const std::string& name, const std::string& header) {
    if (!cfg.out_dir.empty()) {
      std::filesystem::create_directories(cfg.out_dir);
      file_.open(cfg.out_dir / name);
      if (!file_) throw ValidationError("cannot write " + (cfg.out_dir / name).string());
    }
    out() << std::setprecision(17) << header << '\n';
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_outputs(const PipelineConfig& cfg, const Mask* mask, const Image* g, const Image* u) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  if (mask) write_pbm(*mask, cfg.out_dir / "mask.pbm");
  if (g && mask) write_tonal_csv(*g, *mask, cfg.out_dir / "tonal.csv");
  if (u) write_pgm(*u, cfg.out_dir / "reconstruction.pgm");
}

void print_summary(const Mask& mask, double error) {
  std::cerr.precision(10);
  std::cerr << "mask pixels " << mask.count() << ", density " << mask.density() << ", mse " << error << '\n';
}

int cmd_inpaint(const Options& opts) {
  const PipelineConfig cfg = build_config(opts);
  const Image f = load_input_image(cfg);
  const Mask mask = load_mask(opts, f);
  const Image g = opts.tonal_path.empty() ? masked_values(f, mask)
                                          : read_tonal_csv(opts.tonal_path, f.width(), f.height());
  const Image u = make_inpainter(cfg, f)(mask, g);
  write_outputs(cfg, nullptr, nullptr, &u);
  print_summary(mask, mse(u, f));
  return 0;
}

int cmd_analytic(const Options& opts) {
  const PipelineConfig cfg = build_config(opts);
  const Image f = load_input_image(cfg);
  const Mask mask = analytic_mask(f, cfg.analytic);
  const Image u = make_inpainter(cfg, f)(mask, f);
  write_outputs(cfg, &mask, nullptr, &u);
  print_summary(mask, mse(u, f));
  return 0;
}

int cmd_sparsify(const Options& opts) {
  PipelineConfig cfg = build_config(opts);
  cfg.sparsify.seed = Seed{cfg.seed};
  const Image f = load_input_image(cfg);
  const Inpainter inpaint = make_inpainter(cfg, f);
  CsvSink log(cfg, "sparsify.csv", "iteration,mask_pixels,mse");
  Image warm;
  const SparsifyResult r = probabilistic_sparsification(f, inpaint, cfg.sparsify, [&](const SparsifyStep& s) {
    warm = inpaint(*s.mask, f, warm.size() == f.size() ? &warm : nullptr);
    log.out() << s.iteration << ',' << s.mask->count() << ',' << mse(warm, f) << '\n';
  });
  const Image u = inpaint(r.mask, f);
  write_outputs(cfg, &r.mask, nullptr, &u);
  print_summary(r.mask, mse(u, f));
  return 0;
}

int cmd_exchange(const Options& opts) {
  PipelineConfig cfg = build_config(opts);
  cfg.exchange_params.seed = Seed{cfg.seed};
  const Image f = load_input_image(cfg);
  const Mask mask = load_mask(opts, f);
  const Inpainter inpaint = make_inpainter(cfg, f);
  CsvSink log(cfg, "exchange.csv", "iteration,mask_pixels,mse,accepted");
  const ExchangeResult r = nonlocal_pixel_exchange(f, mask, inpaint, cfg.exchange_params, [&](const ExchangeStep& s) {
    log.out() << s.iteration << ',' << mask.count() << ',' << s.mse << ',' << (s.accepted ? 1 : 0) << '\n';
  });
  const Image u = inpaint(r.mask, f);
  write_outputs(cfg, &r.mask, nullptr, &u);
  print_summary(r.mask, mse(u, f));
  return 0;
}

int cmd_gvo(const Options& opts) {
  const PipelineConfig cfg = build_config(opts);
  const Image f = load_input_image(cfg);
  const Mask mask = load_mask(opts, f);
  if (cfg.gvo == GvoMethod::None) throw ValidationError("--method must be one of direct, els, fed, eed");
  cfg.validate();
  const Inpainter inpaint = make_inpainter(cfg, f);
  CsvSink log(cfg, "gvo.csv", "iteration,grad_sq,mse");
  const GvoObserver observer = [&](const GvoStep& s) {
    log.out() << s.iteration << ',' << s.grad_sq << ',' << s.mse << '\n';
  };
  GvoResult r;
  switch (cfg.gvo) {
    case GvoMethod::Direct: r = gvo_direct(f, mask, inpaint.linear_operator(), cfg.solver); break;
    case GvoMethod::Els:
      r = gvo_exact_line_search(f, mask, inpaint.linear_operator(), cfg.els_eps, cfg.solver, observer);
      break;
    case GvoMethod::Fed: r = gvo_fed(f, mask, inpaint.linear_operator(), cfg.fed, cfg.solver, observer); break;
    case GvoMethod::Eed: r = gvo_eed(f, mask, cfg.eed, cfg.eed_gvo, cfg.solver, observer); break;
    case GvoMethod::None: break;
  }
  const Image u = inpaint(mask, r.g);
  write_outputs(cfg, &mask, &r.g, &u);
  print_summary(mask, mse(u, f));
  std::cerr << "gradient evaluations " << r.gradient_evaluations << '\n';
  return 0;
}

int cmd_pipeline(const Options& opts) {
  const PipelineConfig cfg = build_config(opts);
  const PipelineResult r = run_pipeline(cfg);
  std::cout << r.report.to_json().dump(2) << '\n';
  return 0;
}

int cmd_freeknot1d(const Options& opts) {
  const ConvexFunction1D f = builtin_function(opts.function);
  if (opts.intervals < 1) throw ValidationError("--intervals must be at least 1");
  std::cout << std::setprecision(17) << "iteration,error\n";
  FreeKnotOptions fk;
  fk.observer = [](int iteration, const KnotSet&, double error) {
    std::cout << iteration << ',' << error << '\n';
  };
  const FreeKnotResult r = optimize_knots_interpolation(f, opts.intervals, std::nullopt, fk);
  std::cerr << "knots";
  for (double x : r.knots.positions()) std::cerr << ' ' << x;
  std::cerr << "\nerror " << l1_interp_error(f, r.knots) << ", iterations " << r.iterations << '\n';
  return 0;
}

int cmd_table1() {
  const Table1 table = reproduce_table1();
  std::cout << table.format();
  const bool ok = table.matches();
  std::cout << (ok ? "PASS" : "FAIL") << ": all values within 1% of the reference\n";
  return ok ? 0 : 2;
}

int cmd_synth(const Options& opts) {
  const PipelineConfig cfg = build_config(opts);
  const Image f = synth_image(cfg.synth, cfg.width, cfg.height);
  std::filesystem::path path = opts.synth_output;
  if (path.empty()) path = (cfg.out_dir.empty() ? std::filesystem::path(".") : cfg.out_dir) / (cfg.synth + ".pgm");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  write_pgm(f, path);
  std::cerr << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial and tonal data optimisation for PDE-based inpainting"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  add_value(&app, opts, "--seed", "seed", "random seed");
  add_value(&app, opts, "--operator", "operator", "homogeneous, biharmonic or eed");
  add_value(&app, opts, "--out", "out", "output directory");

  auto* inpaint = app.add_subcommand("inpaint", "reconstruct an image from a mask and optional tonal values");
  add_image_flags(inpaint, opts);
  inpaint->add_option("--mask", opts.mask_path, "mask PBM")->required();
  inpaint->add_option("--tonal", opts.tonal_path, "tonal CSV (defaults to the image values)");

  auto* analytic = app.add_subcommand("analytic", "mask from the dithered Laplacian magnitude");
  add_image_flags(analytic, opts);
  add_value(analytic, opts, "--sigma", "sigma", "presmoothing scale");
  add_value(analytic, opts, "--s", "s", "Laplacian exponent");
  add_value(analytic, opts, "--d", "d", "mask density");

  auto* sparsify = app.add_subcommand("sparsify", "probabilistic sparsification");
  add_image_flags(sparsify, opts);
  add_value(sparsify, opts, "--p", "p", "candidate fraction");
  add_value(sparsify, opts, "--q", "q", "removal fraction");
  add_value(sparsify, opts, "--d", "d", "mask density");

  auto* exchange = app.add_subcommand("exchange", "nonlocal pixel exchange");
  add_image_flags(exchange, opts);
  exchange->add_option("--mask", opts.mask_path, "initial mask PBM")->required();
  add_value(exchange, opts, "--m", "m", "candidate set size");
  add_value(exchange, opts, "--iters", "iters", "iteration budget");

  auto* gvo = app.add_subcommand("gvo", "tonal optimisation for a fixed mask");
  add_image_flags(gvo, opts);
  gvo->add_option("--mask", opts.mask_path, "mask PBM")->required();
  add_value(gvo, opts, "--method", "method", "direct, els, fed or eed");
  add_value(gvo, opts, "--M", "M", "FED cycle length");
  add_value(gvo, opts, "--eps", "eps", "stopping factor");
  add_value(gvo, opts, "--alpha", "alpha", "EED step size");
  add_value(gvo, opts, "--eta", "eta", "EED finite-difference perturbation");
  add_value(gvo, opts, "--iterations", "gvo_iters", "EED iterations");

  auto* pipeline = app.add_subcommand("pipeline", "spatial selection, exchange and tonal optimisation");
  pipeline->add_option("--config", opts.config_path, "key = value config file");
  pipeline->add_option("--set", opts.overrides, "override, key=value (repeatable)");

  auto* freeknot = app.add_subcommand("freeknot1d", "free-knot interpolation of a built-in 1D function");
  freeknot->add_option("--function", opts.function, "exp2x3px, expx or square");
  freeknot->add_option("--intervals", opts.intervals, "number of intervals");

  app.add_subcommand("table1", "1D free-knot error table");

  auto* synth = app.add_subcommand("synth", "write a synthetic test image");
  add_value(synth, opts, "--name", "synth", "disk, quadratic, affine, steps or gauss-blobs");
  add_value(synth, opts, "--width", "width", "width");
  add_value(synth, opts, "--height", "height", "height");
  synth->add_option("--output", opts.synth_output, "PGM path (default <out>/<name>.pgm)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (inpaint->parsed()) return cmd_inpaint(opts);
    if (analytic->parsed()) return cmd_analytic(opts);
    if (sparsify->parsed()) return cmd_sparsify(opts);
    if (exchange->parsed()) return cmd_exchange(opts);
    if (gvo->parsed()) return cmd_gvo(opts);
    if (pipeline->parsed()) return cmd_pipeline(opts);
    if (freeknot->parsed()) return cmd_freeknot1d(opts);
    if (synth->parsed()) return cmd_synth(opts);
    return cmd_table1();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
