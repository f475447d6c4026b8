#include "vtv/cli.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "vtv/bank_io.hpp"
#include "vtv/checks.hpp"
#include "vtv/metrics.hpp"
#include "vtv/pgm.hpp"

#ifndef VTV_VERSION
#define VTV_VERSION "unknown"
#endif

namespace vtv::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Preset {
  double lambda1, lambda_rest, gamma1, gamma_rest, tol;
};

Preset preset_for(Task task, UUpdate variant) {
  const SolverConfig c = task == Task::Deblur
                             ? (variant == UUpdate::Full ? SolverConfig::deblur_full()
                                                         : SolverConfig::deblur_reduced())
                             : (variant == UUpdate::Full ? SolverConfig::denoise_full()
                                                         : SolverConfig::denoise_reduced());
  return {c.lambda[0], c.lambda[1], c.gamma[0], c.gamma[1], c.tol};
}

std::string variant_name(UUpdate v) { return v == UUpdate::Full ? "full13" : "reduced17"; }
std::string shrinkage_name(Shrinkage s) { return s == Shrinkage::Anisotropic ? "aniso" : "iso"; }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

// Flag value if given on the command line, else the JSON value, else nothing.
template <typename T>
std::optional<T> merged(const CLI::Option* opt, const T& flag_value, const json& doc,
                        const char* key) {
  if (opt->count() > 0) return flag_value;
  if (doc.contains(key)) {
    try {
      return doc.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return std::nullopt;
}

std::string format_psnr(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

json psnr_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

struct ImageOutcome {
  std::string stem;
  double psnr_observed = 0.0;
  double psnr_restored = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::string error;
  bool diverged = false;
};

FilterBankd bank_for(const RunConfig& cfg) {
  FilterBankd bank = cfg.bank_path ? load_bank(*cfg.bank_path) : bspline_bank<double>();
  if (cfg.perturb_bank) bank = bank.with_scaled_kernel(0, 2.0);
  return bank;
}

std::string stem_of(const RunConfig& cfg, std::size_t index) {
  return cfg.inputs.empty() ? std::string("synthetic") : cfg.inputs[index].stem().string();
}

ImageOutcome restore_one(const RunConfig& cfg, std::size_t index) {
  ImageOutcome outcome;
  outcome.stem = stem_of(cfg, index);

  const DegradationOpd op = cfg.task == Task::Deblur
                                ? DegradationOpd::blur(motion_blur_kernel<double>(cfg.blur_len))
                                : DegradationOpd::identity();
  Imaged reference;
  Imaged observed;
  if (cfg.ref) {
    observed = read_pgm(cfg.inputs.at(index));
    reference = read_pgm(*cfg.ref);
    require_same_size(observed, reference, "input vs --ref");
  } else {
    reference = cfg.inputs.empty() ? synthetic_scene<double>() : read_pgm(cfg.inputs[index]);
    observed = apply_degradation(reference, op, cfg.noise);
  }

  const FilterBankd bank = bank_for(cfg);
  SolverConfig solver_cfg = cfg.solver;
  solver_cfg.record_trace = cfg.trace;

  const auto t0 = std::chrono::steady_clock::now();
  SplitBregman<double> solver(observed, op, bank, solver_cfg);
  SolveResult<double> result = solver.run();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  outcome.psnr_observed = psnr(reference, observed);
  outcome.psnr_restored = psnr(reference, result.u);
  outcome.iterations = result.iterations;
  outcome.seconds = result.seconds;
  outcome.converged = result.converged;

  const fs::path base = cfg.out_dir / outcome.stem;
  const auto file = [&](const std::string& suffix) {
    return fs::path(base.string() + suffix);
  };
  write_pgm(file("_observed.pgm"), observed);
  write_pgm(file("_restored.pgm"), result.u);
  {
    std::ofstream trace(file("_trace.csv"));
    if (!trace) throw IoError("cannot write " + file("_trace.csv").string());
    write_trace_csv(trace, result);
  }
  if (cfg.dump_features) {
    const auto restored_features = analyze(result.u, bank);
    const auto observed_features = analyze(observed, bank);
    for (std::size_t i = 0; i < bank.size(); ++i) {
      const std::string n = std::to_string(i + 1);
      write_pgm(file("_feature_" + n + ".pgm"), rescale_to_display(restored_features[i]));
      write_pgm(file("_observed_feature_" + n + ".pgm"), rescale_to_display(observed_features[i]));
    }
  }

  json meta;
  meta["tool"] = "vtv-restore";
  meta["version"] = VTV_VERSION;
  meta["task"] = task_name(cfg.task);
  meta["image"] = outcome.stem;
  meta["input"] = cfg.inputs.empty() ? std::string("synthetic") : cfg.inputs[index].string();
  meta["ref"] = cfg.ref ? json(cfg.ref->string()) : json(nullptr);
  meta["config"] = json::parse(config_to_json(cfg));
  meta["solver"] = {{"lambda", solver_cfg.lambda},
                    {"gamma", solver_cfg.gamma},
                    {"tol", solver_cfg.tol},
                    {"max_iter", solver_cfg.max_iter},
                    {"variant", variant_name(solver_cfg.u_update)},
                    {"shrinkage", shrinkage_name(solver_cfg.shrinkage)},
                    {"bank_channels", bank.size()}};
  meta["noise"] = {{"generator", kNoiseGeneratorId},
                   {"sigma", cfg.ref ? 0.0 : cfg.noise.sigma},
                   {"seed", cfg.noise.seed},
                   {"synthesized", !cfg.ref.has_value()}};
  meta["metrics"] = {{"psnr_observed", psnr_json(outcome.psnr_observed)},
                     {"psnr_restored", psnr_json(outcome.psnr_restored)},
                     {"iterations", result.iterations},
                     {"converged", result.converged},
                     {"final_rel_err", result.trace.empty() ? 0.0 : result.trace.back()},
                     {"seconds", result.seconds}};
  meta["outputs"] = {{"observed", file("_observed.pgm").filename().string()},
                     {"restored", file("_restored.pgm").filename().string()},
                     {"trace", file("_trace.csv").filename().string()}};
  std::ofstream meta_out(file("_metadata.json"));
  if (!meta_out) throw IoError("cannot write " + file("_metadata.json").string());
  meta_out << meta.dump(2) << '\n';
  return outcome;
}

int run_restoration(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const std::size_t count = cfg.inputs.empty() ? 1 : cfg.inputs.size();
  std::set<std::string> stems;
  for (std::size_t i = 0; i < count; ++i) {
    if (!stems.insert(stem_of(cfg, i)).second) {
      throw ConfigError("two inputs share the output stem '" + stem_of(cfg, i) + "'");
    }
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string());

  std::vector<ImageOutcome> outcomes(count);
  auto work = [&](std::size_t i) {
    try {
      outcomes[i] = restore_one(cfg, i);
    } catch (const NonFinite& e) {
      outcomes[i].stem = stem_of(cfg, i);
      outcomes[i].error = e.what();
      outcomes[i].diverged = true;
    } catch (const std::exception& e) {
      outcomes[i].stem = stem_of(cfg, i);
      outcomes[i].error = e.what();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(cfg.jobs, static_cast<int>(count))));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::ofstream metrics(cfg.out_dir / "metrics.csv");
  const std::string header = "image,psnr_noisy,psnr_restored,iters,seconds";
  metrics << header << '\n';
  out << header << '\n';
  bool failed = false;
  bool unconverged = false;
  for (const auto& o : outcomes) {
    if (!o.error.empty()) {
      err << "vtv-restore: " << o.stem << ": " << o.error << '\n';
      (o.diverged ? unconverged : failed) = true;
      continue;
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", o.seconds);
    const std::string line = o.stem + "," + format_psnr(o.psnr_observed) + "," +
                             format_psnr(o.psnr_restored) + "," + std::to_string(o.iterations) +
                             "," + secs;
    out << line << '\n';
    metrics << line << '\n';
    if (!o.converged) {
      err << "vtv-restore: " << o.stem << ": no convergence within " << cfg.solver.max_iter
          << " iterations\n";
      unconverged = true;
    }
  }
  if (failed) return kExitUsage;
  return unconverged ? kExitNotConverged : kExitOk;
}

}  // namespace

std::string task_name(Task task) {
  switch (task) {
    case Task::Denoise: return "denoise";
    case Task::Deblur: return "deblur";
    case Task::Selftest: return "selftest";
  }
  return "unknown";
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  CLI::App app{"Feature-space vector total variation restoration (split Bregman)", "vtv-restore"};
  std::string command;
  app.add_option("command", command, "denoise | deblur | selftest")
      ->required()
      ->check(CLI::IsMember({"denoise", "deblur", "selftest"}));

  std::vector<std::string> inputs;
  std::string ref, out_dir, variant, bank, shrinkage, config;
  double lambda1 = 0, lambda_rest = 0, gamma1 = 0, gamma_rest = 0, tol = 0, sigma = 0;
  int max_iter = 0, blur_len = 0, jobs = 0, min_size = 4;
  std::uint64_t seed = 0;
  bool trace = false, dump = false, perturb = false;

  auto* o_input = app.add_option("--input", inputs, "clean image(s) to degrade (PGM); default: built-in synthetic scene");
  auto* o_ref = app.add_option("--ref", ref, "ground truth; --input is then taken as the observation");
  auto* o_out = app.add_option("--out", out_dir, "output directory (created if absent)");
  auto* o_variant = app.add_option("--variant", variant, "u-update: full13 | reduced17")
                        ->check(CLI::IsMember({"full13", "reduced17"}));
  auto* o_l1 = app.add_option("--lambda1", lambda1, "regularisation weight, lowpass channel");
  auto* o_lr = app.add_option("--lambda-rest", lambda_rest, "regularisation weight, detail channels");
  auto* o_g1 = app.add_option("--gamma1", gamma1, "penalty weight, lowpass channel");
  auto* o_gr = app.add_option("--gamma-rest", gamma_rest, "penalty weight, detail channels");
  auto* o_tol = app.add_option("--tol", tol, "stop when ||u+ - u|| / ||u|| <= tol");
  auto* o_iter = app.add_option("--max-iter", max_iter, "iteration cap (default 200)");
  auto* o_sigma = app.add_option("--sigma", sigma, "noise std on the [0,255] scale");
  auto* o_blur = app.add_option("--blur-len", blur_len, "horizontal motion blur length (odd)");
  auto* o_seed = app.add_option("--seed", seed, "noise seed");
  auto* o_trace = app.add_flag("--trace", trace, "record the objective in the trace CSV");
  auto* o_dump = app.add_flag("--dump-features", dump, "write per-channel feature images");
  auto* o_jobs = app.add_option("--jobs", jobs, "parallel workers for several inputs");
  auto* o_bank = app.add_option("--bank", bank, "filter bank JSON (default: B-spline tight frame)");
  auto* o_shrink = app.add_option("--shrinkage", shrinkage, "aniso | iso")
                       ->check(CLI::IsMember({"aniso", "iso"}));
  app.add_option("--config", config, "JSON config; keys mirror the long flag names");
  app.add_flag("--perturb-bank", perturb, "selftest negative control: doubles kernel 1");
  app.add_option("--selftest-min-size", min_size, "smallest grid in selftest adjoint checks")
      ->check(CLI::Range(1, 1024));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  const json doc = config.empty() ? json::object() : read_json_file(config);
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg;
  cfg.task = command == "denoise" ? Task::Denoise
             : command == "deblur" ? Task::Deblur
                                   : Task::Selftest;
  cfg.perturb_bank = perturb;
  cfg.selftest_min_size = min_size;

  if (o_input->count() > 0) {
    for (const auto& s : inputs) cfg.inputs.emplace_back(s);
  } else if (doc.contains("input")) {
    const auto& v = doc.at("input");
    if (v.is_array()) {
      for (const auto& s : v) cfg.inputs.emplace_back(s.get<std::string>());
    } else {
      cfg.inputs.emplace_back(v.get<std::string>());
    }
  }
  if (auto v = merged(o_ref, ref, doc, "ref")) cfg.ref = fs::path(*v);
  if (auto v = merged(o_out, out_dir, doc, "out")) cfg.out_dir = *v;
  if (auto v = merged(o_bank, bank, doc, "bank")) cfg.bank_path = fs::path(*v);

  const UUpdate u_update = merged(o_variant, variant, doc, "variant").value_or("reduced17") == "full13"
                               ? UUpdate::Full
                               : UUpdate::Reduced;
  const Preset p = preset_for(cfg.task, u_update);
  const std::size_t m = cfg.bank_path ? load_bank(*cfg.bank_path).size() : 9;
  cfg.solver = SolverConfig::split(m, merged(o_l1, lambda1, doc, "lambda1").value_or(p.lambda1),
                                   merged(o_lr, lambda_rest, doc, "lambda-rest").value_or(p.lambda_rest),
                                   merged(o_g1, gamma1, doc, "gamma1").value_or(p.gamma1),
                                   merged(o_gr, gamma_rest, doc, "gamma-rest").value_or(p.gamma_rest),
                                   merged(o_tol, tol, doc, "tol").value_or(p.tol), u_update);
  cfg.solver.max_iter = merged(o_iter, max_iter, doc, "max-iter").value_or(200);
  const std::string shrink_name = merged(o_shrink, shrinkage, doc, "shrinkage").value_or("aniso");
  if (shrink_name != "aniso" && shrink_name != "iso") throw ConfigError("shrinkage must be aniso or iso");
  cfg.solver.shrinkage = shrink_name == "iso" ? Shrinkage::Isotropic : Shrinkage::Anisotropic;

  cfg.noise.sigma = merged(o_sigma, sigma, doc, "sigma").value_or(cfg.task == Task::Deblur ? 5.0 : 25.5);
  cfg.noise.seed = merged(o_seed, seed, doc, "seed").value_or(1);
  cfg.blur_len = merged(o_blur, blur_len, doc, "blur-len").value_or(9);
  cfg.trace = merged(o_trace, trace, doc, "trace").value_or(false);
  cfg.dump_features = merged(o_dump, dump, doc, "dump-features").value_or(false);
  cfg.jobs = merged(o_jobs, jobs, doc, "jobs").value_or(1);

  if (cfg.task != Task::Selftest) {
    cfg.solver.validate(m);
    if (cfg.noise.sigma < 0.0) throw ConfigError("--sigma must be >= 0");
    if (cfg.jobs < 1) throw ConfigError("--jobs must be >= 1");
    if (cfg.task == Task::Deblur) motion_blur_kernel<double>(cfg.blur_len);
    if (cfg.ref && cfg.inputs.size() != 1) throw ConfigError("--ref needs exactly one --input");
    for (const auto& in : cfg.inputs) {
      if (!fs::exists(in)) throw IoError("input does not exist: " + in.string());
    }
    if (cfg.ref && !fs::exists(*cfg.ref)) throw IoError("reference does not exist: " + cfg.ref->string());
  }
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  if (cfg.inputs.size() == 1) {
    doc["input"] = cfg.inputs[0].string();
  } else if (!cfg.inputs.empty()) {
    std::vector<std::string> v;
    for (const auto& p : cfg.inputs) v.push_back(p.string());
    doc["input"] = v;
  }
  if (cfg.ref) doc["ref"] = cfg.ref->string();
  if (cfg.bank_path) doc["bank"] = cfg.bank_path->string();
  doc["out"] = cfg.out_dir.string();
  doc["variant"] = variant_name(cfg.solver.u_update);
  doc["lambda1"] = cfg.solver.lambda.at(0);
  doc["lambda-rest"] = cfg.solver.lambda.size() > 1 ? cfg.solver.lambda[1] : cfg.solver.lambda[0];
  doc["gamma1"] = cfg.solver.gamma.at(0);
  doc["gamma-rest"] = cfg.solver.gamma.size() > 1 ? cfg.solver.gamma[1] : cfg.solver.gamma[0];
  doc["tol"] = cfg.solver.tol;
  doc["max-iter"] = cfg.solver.max_iter;
  doc["shrinkage"] = shrinkage_name(cfg.solver.shrinkage);
  doc["sigma"] = cfg.noise.sigma;
  doc["seed"] = cfg.noise.seed;
  doc["blur-len"] = cfg.blur_len;
  doc["trace"] = cfg.trace;
  doc["dump-features"] = cfg.dump_features;
  doc["jobs"] = cfg.jobs;
  return doc.dump(2);
}

int cmd_denoise(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_restoration(cfg, out, err);
}

int cmd_deblur(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return run_restoration(cfg, out, err);
}

int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const FilterBankd bank = bank_for(cfg);
  bool ok = true;
  for (const auto& c : run_selftest(bank, cfg.selftest_min_size)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e <= %.1e", c.value, c.threshold);
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << buf << ")\n";
    ok = ok && c.passed;
  }
  return ok ? kExitOk : kExitSelftestFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    const auto cfg = parse_args(argc, argv, out);
    if (!cfg) return kExitOk;
    switch (cfg->task) {
      case Task::Denoise: return cmd_denoise(*cfg, out, err);
      case Task::Deblur: return cmd_deblur(*cfg, out, err);
      case Task::Selftest: return cmd_selftest(*cfg, out, err);
    }
  } catch (const std::exception& e) {
    err << "vtv-restore: error: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace vtv::cli
