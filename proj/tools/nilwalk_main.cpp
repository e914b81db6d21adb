#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nilwalk/diffusion.hpp"
#include "nilwalk/io.hpp"
#include "nilwalk/presets.hpp"
#include "nilwalk/support.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>

using namespace nilwalk;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode { kOk = 0, kConfigError = 2, kHypothesisError = 3, kBudgetRefusal = 4 };

struct BudgetRefusal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Experiment {
  json config;
  AlgebraPtr alg;
  std::optional<RatVec> bias;
  Filtration filt;
  WeightDecomposition dec;
  std::optional<IncrementMeasure> measure;
  json task;
  uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::string out = ".";
};

RatVec parse_vec(const json& arr) {
  RatVec v;
  for (const auto& x : arr)
    v.push_back(x.is_string() ? parse_rational(x.get<std::string>())
                              : parse_rational(x.dump()));
  return v;
}

Vec parse_vec_d(const json& arr) {
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) v[static_cast<long>(i)] = arr[i].get<double>();
  return v;
}

Experiment load_experiment(const std::string& config_path,
                           std::optional<uint64_t> seed_override, int threads,
                           const std::string& out_override) {
  Experiment ex;
  ex.config = read_json(config_path);
  const json& cfg = ex.config;

  const json& alg_spec = cfg.at("algebra");
  if (alg_spec.is_string()) {
    std::string name = alg_spec.get<std::string>();
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json")
      ex.alg = std::make_shared<LieAlgebra>(algebra_from_json(read_json(name)));
    else
      ex.alg = std::make_shared<LieAlgebra>(build_preset(name));
  } else {
    ex.alg = std::make_shared<LieAlgebra>(algebra_from_json(alg_spec));
  }

  if (cfg.contains("bias") && !cfg.at("bias").is_null()) {
    ex.bias = parse_vec(cfg.at("bias"));
    if (static_cast<int>(ex.bias->size()) != ex.alg->dim())
      throw std::invalid_argument("bias length does not match algebra dim");
    ex.filt = weight_filtration(ex.alg, *ex.bias);
  } else {
    ex.filt = central_series(ex.alg);
  }
  ex.dec = choose_weight_decomposition(ex.filt);

  if (cfg.contains("measure"))
    ex.measure = measure_from_json(cfg.at("measure"), ex.alg->dim());
  ex.task = cfg.value("task", json::object());

  if (seed_override) {
    ex.seed = *seed_override;
    ex.seed_given = true;
  } else if (cfg.contains("seed")) {
    ex.seed = cfg.at("seed").get<uint64_t>();
    ex.seed_given = true;
  }
  ex.threads = threads;
  ex.out = out_override.empty() ? cfg.value("out", std::string(".")) : out_override;
  std::filesystem::create_directories(ex.out);
  return ex;
}

void require_seed(const Experiment& ex) {
  if (!ex.seed_given)
    throw std::invalid_argument("stochastic tasks require a seed (config or --seed)");
}

IncrementMeasure require_measure(const Experiment& ex) {
  if (!ex.measure) throw std::invalid_argument("task requires a measure");
  return *ex.measure;
}

json report_json(const ComparisonReport& rep) {
  json j;
  j["coord_ks"] = rep.coord_ks;
  j["direction_ks"] = rep.direction_ks;
  j["max_ks"] = rep.max_ks;
  j["ks_threshold"] = rep.ks_threshold;
  j["ecf_gap"] = rep.ecf_gap;
  j["ecf_threshold"] = rep.ecf_threshold;
  j["energy"] = rep.energy;
  j["energy_threshold"] = rep.energy_threshold;
  j["energy_pass"] = rep.energy_pass;
  j["n_a"] = rep.n_a;
  j["n_b"] = rep.n_b;
  j["pass"] = rep.pass;
  return j;
}

SmoothBump parse_bump(const json& j, int dim) {
  SmoothBump f;
  f.center = j.contains("center") ? parse_vec_d(j.at("center")) : Vec::Zero(dim);
  if (j.contains("halfwidth"))
    f.halfwidth = parse_vec_d(j.at("halfwidth"));
  else
    f.halfwidth = Vec::Constant(dim, 1.0);
  f.poly_coord = j.value("poly_coord", -1);
  if (f.center.size() != dim || f.halfwidth.size() != dim)
    throw std::invalid_argument("bump center/halfwidth must match algebra dim");
  return f;
}

WalkConfig walk_config(const Experiment& ex) {
  require_seed(ex);
  WalkConfig w;
  w.alg = ex.alg;
  w.dec = ex.dec;
  w.measure = require_measure(ex);
  w.N = ex.task.value("N", 1L);
  w.trials = ex.task.value("trials", 100000L);
  std::string rec = ex.task.value("recentering", std::string("drift"));
  if (rec == "none")
    w.recentering = Recentering::None;
  else if (rec == "drift")
    w.recentering = Recentering::DriftNX;
  else if (rec == "drift+custom")
    w.recentering = Recentering::DriftNXPlusCustom;
  else
    throw std::invalid_argument("unknown recentering mode: " + rec);
  if (ex.task.contains("g_n")) w.custom_g_n = parse_vec_d(ex.task.at("g_n"));
  std::string tr = ex.task.value("truncation", std::string("off"));
  if (tr == "off")
    w.truncation = TruncationMode::Off;
  else if (tr == "uniform")
    w.truncation = TruncationMode::Uniform;
  else if (tr == "gradual")
    w.truncation = TruncationMode::Gradual;
  else
    throw std::invalid_argument("unknown truncation mode: " + tr);
  w.gradual_gamma0 = ex.task.value("gamma0", 0.125);
  w.rescale = ex.task.value("rescale", true);
  w.seed = ex.seed;
  w.threads = ex.threads;
  return w;
}

GeneratorSpec generator_for(const Experiment& ex) {
  IncrementMeasure mu = require_measure(ex);
  return generator_from_measure(ex.dec, abelian_stats(mu, ex.dec));
}

int run_algebra(const Experiment& ex) {
  json out = algebra_to_json(*ex.alg);
  write_json(ex.out + "/algebra.json", out);
  std::printf("dim %d step %d, Jacobi-validated\n", ex.alg->dim(), ex.alg->step());
  return kOk;
}

int run_filtration(const Experiment& ex) {
  json out;
  out["filtration"] = filtration_to_json(ex.filt);
  out["decomposition"] = decomposition_to_json(ex.dec);
  out["homogeneous_dimension"] = homogeneous_dimension(ex.filt);
  write_json(ex.out + "/filtration.json", out);
  std::printf("homogeneous dimension %d, b_max %d\n", homogeneous_dimension(ex.filt),
              ex.filt.b_max());
  return kOk;
}

int run_walk(const Experiment& ex) {
  WalkConfig cfg = walk_config(ex);
  SampleBatch batch = walk_batch(cfg);
  batch.config_hash = config_hash(ex.config);
  write_batch_csv(ex.out + "/walk.csv", batch);
  write_batch_metadata(ex.out + "/walk_meta.json", batch, ex.config);
  std::printf("walk: N=%ld trials=%ld -> %s/walk.csv\n", cfg.N, cfg.trials,
              ex.out.c_str());
  return kOk;
}

int run_diffusion(const Experiment& ex) {
  if (ex.task.contains("density_table")) {
    const json& dt = ex.task.at("density_table");
    double zmax = dt.value("zmax", 3.0), rmax = dt.value("rmax", 4.0);
    int nz = dt.value("nz", 61), nr = dt.value("nr", 41);
    Mat rows(nz * nr, 3);
    long k = 0;
    for (int iz = 0; iz < nz; ++iz)
      for (int ir = 0; ir < nr; ++ir) {
        double z = -zmax + 2.0 * zmax * iz / (nz - 1);
        double r = rmax * ir / (nr - 1);
        rows(k, 0) = r;
        rows(k, 1) = z;
        rows(k, 2) = levy_density(r, 0.0, z);
        ++k;
      }
    write_csv(ex.out + "/levy_density.csv", {"r", "z", "density"}, rows);
    std::printf("levy density table -> %s/levy_density.csv\n", ex.out.c_str());
    return kOk;
  }
  require_seed(ex);
  GeneratorSpec gen = generator_for(ex);
  DiffusionConfig cfg{gen, ex.task.value("t", 1.0), ex.task.value("dt", 1e-3),
                      ex.task.value("trials", 1L), ex.seed, ex.threads};
  SampleBatch batch = diffusion_batch(cfg);
  batch.config_hash = config_hash(ex.config);
  write_batch_csv(ex.out + "/diffusion.csv", batch);
  write_batch_metadata(ex.out + "/diffusion_meta.json", batch, ex.config);
  std::printf("diffusion: t=%g trials=%ld -> %s/diffusion.csv\n", cfg.t, cfg.trials,
              ex.out.c_str());
  return kOk;
}

int run_compare(const Experiment& ex) {
  require_seed(ex);
  std::string mode = ex.task.value("mode", std::string("scaling"));
  json out;
  if (mode == "scaling" || mode == "semigroup") {
    GeneratorSpec gen = generator_for(ex);
    long trials = ex.task.value("trials", 100000L);
    double dt = ex.task.value("dt", 1e-3);
    ComparisonReport rep =
        mode == "scaling"
            ? scaling_check(gen, ex.task.value("t", 0.25), ex.task.value("r", 4.0),
                            trials, dt, ex.seed, ex.threads)
            : semigroup_check(gen, ex.task.value("s", 0.5), ex.task.value("t", 0.5),
                              trials, dt, ex.seed, ex.threads);
    out = report_json(rep);
  } else if (mode == "walk-vs-diffusion") {
    WalkConfig wcfg = walk_config(ex);
    SampleBatch walk = walk_batch(wcfg);
    GeneratorSpec gen = generator_for(ex);
    DiffusionConfig dcfg{gen, 1.0, ex.task.value("dt", 1e-3),
                         ex.task.value("diffusion_trials", wcfg.trials),
                         ex.seed + 0x9d5f, ex.threads};
    SampleBatch diff = diffusion_batch(dcfg);
    out = report_json(two_sample_distance(walk.data, diff.data));
  } else {
    throw std::invalid_argument("unknown compare mode: " + mode);
  }
  write_json(ex.out + "/compare.json", out);
  // flat CSV of the per-projection distances for plotting
  const auto& cks = out["coord_ks"];
  const auto& dks = out["direction_ks"];
  Mat rows(cks.size() + dks.size(), 2);
  long r = 0;
  for (const auto& v : cks) {
    rows(r, 0) = static_cast<double>(r);
    rows(r, 1) = v.get<double>();
    ++r;
  }
  for (const auto& v : dks) {
    rows(r, 0) = static_cast<double>(r);
    rows(r, 1) = v.get<double>();
    ++r;
  }
  write_csv(ex.out + "/compare.csv", {"projection", "ks"}, rows);
  std::printf("compare %s: max_ks %.5f (threshold %.5f) pass=%s\n", mode.c_str(),
              out["max_ks"].get<double>(), out["ks_threshold"].get<double>(),
              out["pass"].get<bool>() ? "yes" : "no");
  return kOk;
}

int run_be_curve(const Experiment& ex) {
  WalkConfig cfg = walk_config(ex);
  SmoothBump f = parse_bump(ex.task.value("f", json::object()), ex.alg->dim());
  std::vector<long> ns;
  for (const auto& n : ex.task.value("Ns", json::array({64, 256, 1024})))
    ns.push_back(n.get<long>());
  double reference;
  std::string ref_mode = ex.task.value("reference", std::string("diffusion"));
  if (ref_mode == "levy-quadrature") {
    // E_nu f on the normalized centered Heisenberg limit
    if (ex.alg->dim() != 3) throw std::invalid_argument("levy reference needs dim 3");
    const int cells = 24;
    double acc = 0, vol = 1;
    for (int c = 0; c < 3; ++c) vol *= 2.0 * f.halfwidth[c] / cells;
    Vec x(3);
    for (int i = 0; i < cells; ++i)
      for (int j = 0; j < cells; ++j)
        for (int k = 0; k < cells; ++k) {
          x[0] = f.center[0] + f.halfwidth[0] * (-1.0 + (2.0 * i + 1.0) / cells);
          x[1] = f.center[1] + f.halfwidth[1] * (-1.0 + (2.0 * j + 1.0) / cells);
          x[2] = f.center[2] + f.halfwidth[2] * (-1.0 + (2.0 * k + 1.0) / cells);
          acc += f(x) * levy_density(x[0], x[1], x[2]) * vol;
        }
    reference = acc;
  } else if (ref_mode == "diffusion") {
    GeneratorSpec gen = generator_for(ex);
    DiffusionConfig dcfg{gen, 1.0, ex.task.value("dt", 1e-3),
                         ex.task.value("diffusion_trials", 200000L), ex.seed + 0x51,
                         ex.threads};
    double acc = 0;
    std::mutex mu;
    diffusion_stream(dcfg, [&](long, const Vec& w) {
      double v = f(w);
      std::lock_guard<std::mutex> lock(mu);
      acc += v;
    });
    reference = acc / dcfg.trials;
  } else {
    reference = ex.task.at("reference_value").get<double>();
  }
  BeCurve curve =
      berry_esseen_curve(cfg, f, ns, reference, ex.task.value("trials", 100000L));
  json out;
  out["reference"] = curve.reference;
  out["slope"] = curve.slope;
  json pts = json::array();
  Mat rows(curve.points.size(), 4);
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    pts.push_back({{"N", p.N},
                   {"walk_mean", p.walk_mean},
                   {"error", p.error},
                   {"mc_stderr", p.mc_stderr}});
    rows(i, 0) = static_cast<double>(p.N);
    rows(i, 1) = p.walk_mean;
    rows(i, 2) = p.error;
    rows(i, 3) = p.mc_stderr;
  }
  out["points"] = pts;
  write_json(ex.out + "/be_curve.json", out);
  write_csv(ex.out + "/be_curve.csv", {"N", "walk_mean", "error", "mc_stderr"}, rows);
  std::printf("be-curve slope %.3f -> %s/be_curve.json\n", curve.slope, ex.out.c_str());
  return kOk;
}

int run_llt(const Experiment& ex) {
  WalkConfig cfg = walk_config(ex);
  SmoothBump f = parse_bump(ex.task.value("f", json::object()), ex.alg->dim());
  long samples = ex.task.value("samples", 1000000L);
  std::string pred = ex.task.value("prediction", std::string("levy"));
  LltPrediction mode =
      pred == "levy" ? LltPrediction::LevyHeisenberg : LltPrediction::DiffusionKde;
  std::optional<GeneratorSpec> gen;
  if (mode == LltPrediction::DiffusionKde) gen = generator_for(ex);
  std::optional<Vec> dev_g, dev_h;
  if (ex.task.contains("dev_g")) dev_g = parse_vec_d(ex.task.at("dev_g"));
  if (ex.task.contains("dev_h")) dev_h = parse_vec_d(ex.task.at("dev_h"));
  LltResult res =
      llt_ratio(cfg, f, samples, mode, gen ? &*gen : nullptr,
                ex.task.value("kde_trials", 20000L), dev_g ? &*dev_g : nullptr,
                dev_h ? &*dev_h : nullptr, ex.task.value("force_run", false));
  json out;
  out["estimate"] = res.estimate;
  out["prediction"] = res.prediction;
  out["ratio"] = res.ratio;
  out["ci_low"] = res.ci_low;
  out["ci_high"] = res.ci_high;
  out["expected_hits"] = res.expected_hits;
  out["support_hits"] = res.support_hits;
  out["refused"] = res.refused;
  out["required_budget"] = res.required_budget;
  write_json(ex.out + "/llt.json", out);
  if (res.refused)
    throw BudgetRefusal("insufficient expected hits (" +
                        std::to_string(res.expected_hits) + "); need at least " +
                        std::to_string(res.required_budget) + " samples");
  std::printf("llt: estimate %.5g prediction %.5g ratio %.3f\n", res.estimate,
              res.prediction, res.ratio);
  return kOk;
}

int run_support(const Experiment& ex) {
  std::string op = ex.task.value("op", std::string("horizontal"));
  json out;
  if (op == "horizontal") {
    GeneratorSpec gen = generator_for(ex);
    ControlSequence cs;
    for (const auto& step : ex.task.at("controls"))
      cs.steps.push_back({parse_vec(step.at(0)),
                          step.at(1).is_string()
                              ? parse_rational(step.at(1).get<std::string>())
                              : parse_rational(step.at(1).dump())});
    RatVec e = horizontal_endpoint_exact(gen, cs);
    json coords = json::array();
    for (const auto& c : e) coords.push_back(rational_to_string(c));
    out["endpoint"] = coords;
    if (ex.alg->dim() == 4) {
      RegionSide side = filiform_member_exact(e);
      out["filiform_member"] = side == RegionSide::Inside    ? "inside"
                               : side == RegionSide::Boundary ? "boundary"
                                                              : "outside";
    }
  } else if (op == "strichartz") {
    GradedStructure g = graded_structure(ex.dec);
    PiecewisePath path;
    for (const auto& b : ex.task.at("breakpoints"))
      path.breakpoints.push_back(b.is_string() ? parse_rational(b.get<std::string>())
                                               : parse_rational(b.dump()));
    for (const auto& v : ex.task.at("values")) path.values.push_back(parse_vec(v));
    RatVec e = strichartz_integral_exact(g, path);
    json coords = json::array();
    for (const auto& c : e) coords.push_back(rational_to_string(c));
    out["integral"] = coords;
  } else if (op == "member") {
    RatVec s = parse_vec(ex.task.at("point"));
    if (s.size() != 4) throw std::invalid_argument("member expects a 4-vector");
    RegionSide side = filiform_member_exact(s);
    out["filiform_member"] = side == RegionSide::Inside    ? "inside"
                             : side == RegionSide::Boundary ? "boundary"
                                                            : "outside";
  } else {
    throw std::invalid_argument("unknown support op: " + op);
  }
  write_json(ex.out + "/support.json", out);
  std::printf("support %s -> %s/support.json\n", op.c_str(), ex.out.c_str());
  return kOk;
}

int run_check(const Experiment& ex) {
  std::string kind = ex.task.value("check", std::string("gaussian-case"));
  json out;
  if (kind == "gaussian-case") {
    if (!ex.bias) throw std::invalid_argument("gaussian-case check requires a bias");
    GaussianCaseReport rep = gaussian_case_check(ex.alg, *ex.bias);
    out["condition_i"] = rep.condition_i;
    out["condition_iii"] = rep.condition_iii;
    out["agree"] = rep.agree;
    out["gaussian"] = rep.condition_i && rep.condition_iii;
  } else if (kind == "dc") {
    std::vector<RatVec> gens;
    for (const auto& g : ex.task.at("generators")) gens.push_back(parse_vec(g));
    DcReport rep = dc_condition_check(ex.alg, gens, ex.task.value("trials", 50),
                                      ex.seed_given ? ex.seed : 5);
    out["holds"] = rep.holds;
    if (!rep.holds) {
      json w = json::array();
      for (const auto& c : rep.witness_w) w.push_back(rational_to_string(c));
      out["witness"] = {{"generator", rep.witness_generator},
                        {"k", rep.witness_k},
                        {"w", w}};
    }
  } else if (kind == "asymp-close") {
    IncrementMeasure mu1 = measure_from_json(ex.task.at("measure_a"), ex.alg->dim());
    IncrementMeasure mu2 = measure_from_json(ex.task.at("measure_b"), ex.alg->dim());
    AsympCloseReport rep = asymptotically_close(mu1, mu2, ex.alg);
    out["verdict"] = rep.verdict == CloseVerdict::Close       ? "close"
                     : rep.verdict == CloseVerdict::NotClose ? "not-close"
                                                             : "not-comparable";
    out["filtrations_match"] = rep.filtrations_match;
    out["abelian_mean_match"] = rep.abelian_mean_match;
    out["abelian_cov_match"] = rep.abelian_cov_match;
    out["mean_mod_g3_match"] = rep.mean_mod_g3_match;
    if (!rep.detail.empty()) out["detail"] = rep.detail;
  } else {
    throw std::invalid_argument("unknown check: " + kind);
  }
  write_json(ex.out + "/check.json", out);
  std::printf("check %s -> %s/check.json\n", kind.c_str(), ex.out.c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nilwalk: limit theorems on nilpotent Lie groups, numerically"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<uint64_t> seed;
  int threads = 0;

  std::map<std::string, std::function<int(const Experiment&)>> handlers = {
      {"algebra", run_algebra},     {"filtration", run_filtration},
      {"walk", run_walk},           {"diffusion", run_diffusion},
      {"compare", run_compare},     {"be-curve", run_be_curve},
      {"llt", run_llt},             {"support", run_support},
      {"check", run_check},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, fn] : handlers) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--seed", seed, "RNG seed override");
    sub->add_option("--threads", threads, "worker threads (default: hardware)");
    sub->add_option("--out", out_dir, "output directory");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  std::string name = app.get_subcommands().front()->get_name();
  int code = kOk;
  std::string error;
  Experiment ex;
  try {
    ex = load_experiment(config_path, seed, threads, out_dir);
    code = handlers.at(name)(ex);
  } catch (const BudgetRefusal& e) {
    error = e.what();
    code = kBudgetRefusal;
  } catch (const HypothesisError& e) {
    error = e.what();
    code = kHypothesisError;
  } catch (const std::exception& e) {
    error = e.what();
    code = kConfigError;
  }

  // a manifest is always written, also on failure, when the output dir exists
  try {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest;
    manifest["task"] = name;
    manifest["version"] = kVersion;
    manifest["config_hash"] = ex.config.is_null() ? "" : config_hash(ex.config);
    manifest["seed"] = ex.seed;
    manifest["exit_code"] = code;
    manifest["timings"] = {{"total_s", elapsed}};
    if (!error.empty()) manifest["error"] = error;
    write_json(ex.out + "/manifest.json", manifest);
  } catch (...) {
  }

  if (!error.empty()) std::fprintf(stderr, "error: %s\n", error.c_str());
  return code;
}
