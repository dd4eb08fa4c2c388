#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "einit/core.hpp"
#include "einit/einit.hpp"
#include "einit/icp.hpp"
#include "einit/io.hpp"
#include "einit/metrics.hpp"
#include "einit/perturb.hpp"
#include "einit/shapes.hpp"

namespace einit::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSoftwareVersion = "0.1.0";

struct CloudSource {
  enum class Kind { File, Shape, Uniform };
  Kind kind = Kind::Uniform;
  std::string label;
  std::filesystem::path path;  // File
  std::string shape;           // Shape
  Index n = 100;               // Shape, Uniform
  Index d = 3;                 // Uniform
  double half_width = 20.0;    // Uniform
};

enum class Mode { Batch, CompareNoInit };

struct ExperimentConfig {
  std::string name = "experiment";
  Mode mode = Mode::Batch;
  std::vector<CloudSource> clouds;
  // The grid is the cartesian product of the three lists.
  std::vector<double> multiplicative{0.0};
  std::vector<double> additive{0.0};
  std::vector<double> occlusion{0.0};
  int trials = 100;
  GroupKind group = GroupKind::Ref;
  IcpParams icp;
  double threshold = kDefaultSuccessThreshold;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  /// Wall-clock columns make reports non-reproducible, so they are opt-in.
  bool record_timing = false;
  /// false draws every scene with O = I (only the permutation is random).
  bool random_orthogonal = true;

  void validate() const {
    if (clouds.empty()) fail(ErrorKind::InvalidInput, "config: no clouds");
    if (multiplicative.empty() || additive.empty() || occlusion.empty()) {
      fail(ErrorKind::InvalidInput, "config: corruption grids must be nonempty");
    }
    if (trials < 1) fail(ErrorKind::InvalidInput, "config: trials must be >= 1");
    if (!(threshold > 0.0)) fail(ErrorKind::InvalidInput, "config: threshold must be positive");
    for (double v : multiplicative) {
      if (!(v >= 0.0)) fail(ErrorKind::InvalidInput, "config: negative sigma");
    }
    for (double v : additive) {
      if (!(v >= 0.0)) fail(ErrorKind::InvalidInput, "config: negative sigma");
    }
    for (double v : occlusion) {
      if (!(v >= 0.0)) fail(ErrorKind::InvalidInput, "config: negative alpha");
    }
    icp.validate();
  }
};

struct CellParams {
  std::string cloud;
  double sigma_mult = 0.0;
  double sigma_add = 0.0;
  double alpha = 0.0;

  std::vector<CorruptionSpec> specs() const {
    std::vector<CorruptionSpec> out;
    if (sigma_mult > 0.0) out.push_back({CorruptionKind::Multiplicative, sigma_mult});
    if (sigma_add > 0.0) out.push_back({CorruptionKind::Additive, sigma_add});
    if (alpha > 0.0) out.push_back({CorruptionKind::Occlusion, alpha});
    return out;
  }
};

struct CellReport {
  CellParams params;
  std::vector<TrialRecord> trials;  // ordered by trial index

  double tau() const { return success_rate(trials); }
};

/// One arm of an experiment: every grid cell with its per-trial records.
struct BatchReport {
  std::string arm;
  std::vector<CellReport> cells;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<BatchReport> arms;
};

// ---------------------------------------------------------------------------
// Configuration

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; })) {
      throw ParseError(0, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

inline std::vector<double> grid(const json& j, const char* key) {
  if (!j.contains(key)) return {0.0};
  const json& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

inline CloudSource parse_cloud(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j, {"path", "shape", "uniform", "n", "label"}, "cloud");
  CloudSource c;
  if (j.contains("path")) {
    c.kind = CloudSource::Kind::File;
    c.path = j.at("path").get<std::string>();
    if (c.path.is_relative()) c.path = base_dir / c.path;
    c.label = c.path.stem().string();
  } else if (j.contains("shape")) {
    c.kind = CloudSource::Kind::Shape;
    c.shape = j.at("shape").get<std::string>();
    c.n = get_or<Index>(j, "n", 1000);
    c.label = c.shape;
  } else if (j.contains("uniform")) {
    const json& u = j.at("uniform");
    reject_unknown(u, {"n", "d", "half_width"}, "cloud.uniform");
    c.kind = CloudSource::Kind::Uniform;
    c.n = get_or<Index>(u, "n", 100);
    c.d = get_or<Index>(u, "d", 3);
    c.half_width = get_or<double>(u, "half_width", 20.0);
    c.label = "uniform";
  } else {
    throw ParseError(0, "cloud needs one of 'path', 'shape' or 'uniform'");
  }
  c.label = get_or<std::string>(j, "label", c.label);
  return c;
}

}  // namespace detail

/// Builds a config from its JSON form. Relative cloud paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
  try {
    if (!j.is_object()) throw ParseError(0, "config must be a JSON object");
    detail::reject_unknown(j,
                           {"schema_version", "name", "mode", "cloud", "clouds", "corruption", "trials", "group",
                            "icp", "threshold", "seed", "threads", "record_timing", "random_orthogonal"},
                           "config");
    if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion) {
      throw ParseError(0, "unsupported schema_version");
    }
    ExperimentConfig c;
    c.name = detail::get_or<std::string>(j, "name", c.name);
    const std::string mode = detail::get_or<std::string>(j, "mode", "batch");
    if (mode == "batch") {
      c.mode = Mode::Batch;
    } else if (mode == "compare_no_init") {
      c.mode = Mode::CompareNoInit;
    } else {
      throw ParseError(0, "mode must be 'batch' or 'compare_no_init'");
    }
    if (j.contains("cloud")) c.clouds.push_back(detail::parse_cloud(j.at("cloud"), base_dir));
    if (j.contains("clouds")) {
      for (const json& item : j.at("clouds")) c.clouds.push_back(detail::parse_cloud(item, base_dir));
    }
    if (j.contains("corruption")) {
      const json& k = j.at("corruption");
      detail::reject_unknown(k, {"multiplicative", "additive", "occlusion"}, "corruption");
      c.multiplicative = detail::grid(k, "multiplicative");
      c.additive = detail::grid(k, "additive");
      c.occlusion = detail::grid(k, "occlusion");
    }
    c.trials = detail::get_or<int>(j, "trials", c.trials);
    c.group = parse_group(detail::get_or<std::string>(j, "group", "ref"));
    if (j.contains("icp")) {
      const json& k = j.at("icp");
      detail::reject_unknown(k, {"max_iterations", "relative_tolerance", "absolute_floor", "allow_reflections"}, "icp");
      c.icp.max_iterations = detail::get_or<int>(k, "max_iterations", c.icp.max_iterations);
      c.icp.relative_tolerance = detail::get_or<double>(k, "relative_tolerance", c.icp.relative_tolerance);
      c.icp.absolute_floor = detail::get_or<double>(k, "absolute_floor", c.icp.absolute_floor);
      c.icp.allow_reflections = detail::get_or<bool>(k, "allow_reflections", c.icp.allow_reflections);
    }
    c.threshold = detail::get_or<double>(j, "threshold", c.threshold);
    c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
    c.threads = detail::get_or<int>(j, "threads", c.threads);
    c.record_timing = detail::get_or<bool>(j, "record_timing", c.record_timing);
    c.random_orthogonal = detail::get_or<bool>(j, "random_orthogonal", c.random_orthogonal);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("config: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

/// Fully populated echo of a config, as stored in reports.
inline json to_json(const ExperimentConfig& c) {
  json clouds = json::array();
  for (const CloudSource& s : c.clouds) {
    json item{{"label", s.label}};
    switch (s.kind) {
      case CloudSource::Kind::File: item["path"] = s.path.filename().string(); break;
      case CloudSource::Kind::Shape: item["shape"] = s.shape; item["n"] = s.n; break;
      case CloudSource::Kind::Uniform:
        item["uniform"] = {{"n", s.n}, {"d", s.d}, {"half_width", s.half_width}};
        break;
    }
    clouds.push_back(std::move(item));
  }
  return json{
      {"name", c.name},
      {"mode", c.mode == Mode::Batch ? "batch" : "compare_no_init"},
      {"clouds", clouds},
      {"corruption", {{"multiplicative", c.multiplicative}, {"additive", c.additive}, {"occlusion", c.occlusion}}},
      {"trials", c.trials},
      {"group", to_string(c.group)},
      {"icp",
       {{"max_iterations", c.icp.max_iterations},
        {"relative_tolerance", c.icp.relative_tolerance},
        {"absolute_floor", c.icp.absolute_floor},
        {"allow_reflections", c.icp.allow_reflections}}},
      {"threshold", c.threshold},
      {"seed", c.seed},
      {"record_timing", c.record_timing},
      {"random_orthogonal", c.random_orthogonal},
  };
}

// ---------------------------------------------------------------------------
// Running

inline PointCloud load_fixed_cloud(const CloudSource& src) {
  switch (src.kind) {
    case CloudSource::Kind::File: return io::load_cloud(src.path);
    case CloudSource::Kind::Shape: return shapes::by_name(src.shape, src.n);
    case CloudSource::Kind::Uniform: break;
  }
  fail(ErrorKind::InvalidInput, "uniform clouds are drawn per trial");
}

inline void require_full_rank(const PointCloud& cloud, const std::string& label) {
  const CovarianceEllipsoid e = covariance(center(cloud).cloud);
  if (cloud.size() < cloud.dim() + 1 || !(e.eigenvalues(0) > 0.0) ||
      e.eigenvalues(cloud.dim() - 1) / e.eigenvalues(0) < EInitParams{}.degenerate_ratio) {
    fail(ErrorKind::DegenerateCloud, "cloud '" + label + "' does not span its ambient space");
  }
}

/// The scene of one trial: fresh O and S (and a fresh cloud for uniform
/// sources), then corruption. Streams depend only on (seed, trial, stage).
inline SceneTruth make_scene(const ExperimentConfig& cfg, const CloudSource& src, const PointCloud* fixed,
                             const CellParams& cell, std::uint64_t trial) {
  std::optional<PointCloud> drawn;
  if (!fixed) {
    Rng cloud_rng(derive_seed(cfg.seed, trial, "cloud"));
    drawn = random_cloud(src.n, src.d, src.half_width, cloud_rng);
  }
  const PointCloud& p = fixed ? *fixed : *drawn;
  Rng scene_rng(derive_seed(cfg.seed, trial, "scene"));
  SceneTruth scene = random_scene(p, scene_rng);
  if (!cfg.random_orthogonal) {
    scene.orthogonal = Matrix::Identity(p.dim(), p.dim());
    scene.clean_target = permute_columns(p, scene.permutation);
    scene.target = scene.clean_target;
  }
  corrupt(scene, cell.specs(), derive_seed(cfg.seed, trial, "corruption"));
  return scene;
}

namespace detail {

template <typename Job>
void parallel_for(std::size_t count, int threads, Job&& job) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  // Report the failure of the lowest job so errors do not depend on scheduling.
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<CellParams> cells_for(const ExperimentConfig& cfg, const std::string& cloud) {
  std::vector<CellParams> out;
  for (double m : cfg.multiplicative) {
    for (double a : cfg.additive) {
      for (double o : cfg.occlusion) out.push_back({cloud, m, a, o});
    }
  }
  return out;
}

inline std::vector<BatchReport> run_arms(const ExperimentConfig& cfg, bool paired) {
  cfg.validate();
  EInitParams init_params;
  init_params.group = cfg.group;

  struct Job {
    std::size_t cloud;
    std::size_t cell;
    std::uint64_t trial;
  };
  std::vector<std::optional<PointCloud>> fixed(cfg.clouds.size());
  std::vector<std::vector<CellParams>> cells(cfg.clouds.size());
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cfg.clouds.size(); ++c) {
    const CloudSource& src = cfg.clouds[c];
    if (src.kind != CloudSource::Kind::Uniform) {
      fixed[c] = load_fixed_cloud(src);
      require_full_rank(*fixed[c], src.label);
    }
    cells[c] = cells_for(cfg, src.label);
    for (std::size_t k = 0; k < cells[c].size(); ++k) {
      for (int t = 0; t < cfg.trials; ++t) jobs.push_back({c, k, static_cast<std::uint64_t>(t)});
    }
  }

  std::vector<TrialRecord> with_init(jobs.size());
  std::vector<TrialRecord> without_init(paired ? jobs.size() : 0);
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t k) {
    const Job& job = jobs[k];
    const PointCloud* p = fixed[job.cloud] ? &*fixed[job.cloud] : nullptr;
    const SceneTruth scene = make_scene(cfg, cfg.clouds[job.cloud], p, cells[job.cloud][job.cell], job.trial);
    const RegistrationResult reg = register_clouds(scene.source, scene.target, init_params, cfg.icp);
    with_init[k] = evaluate(scene, reg, cfg.threshold);
    if (paired) {
      const RegistrationResult plain = register_without_init(
          scene.source, scene.target, RigidMotion::identity(scene.source.dim()), cfg.icp);
      without_init[k] = evaluate(scene, plain, cfg.threshold);
    }
  });

  std::vector<BatchReport> arms;
  arms.push_back({"einit", {}});
  if (paired) arms.push_back({"identity", {}});
  std::size_t k = 0;
  for (std::size_t c = 0; c < cfg.clouds.size(); ++c) {
    for (const CellParams& cell : cells[c]) {
      CellReport a{cell, {}};
      CellReport b{cell, {}};
      for (int t = 0; t < cfg.trials; ++t, ++k) {
        a.trials.push_back(with_init[k]);
        if (paired) b.trials.push_back(without_init[k]);
      }
      arms[0].cells.push_back(std::move(a));
      if (paired) arms[1].cells.push_back(std::move(b));
    }
  }
  return arms;
}

}  // namespace detail

/// Every grid cell of every cloud, `trials` registrations each.
inline BatchReport run_batch(const ExperimentConfig& cfg) { return std::move(detail::run_arms(cfg, false).front()); }

struct PairedReport {
  BatchReport with_init;
  BatchReport without_init;
};

/// The same scenes registered twice: ICP from E-Init and ICP from the identity.
inline PairedReport compare_no_init(const ExperimentConfig& cfg) {
  std::vector<BatchReport> arms = detail::run_arms(cfg, true);
  return {std::move(arms[0]), std::move(arms[1])};
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport r{cfg, {}};
  if (cfg.mode == Mode::Batch) {
    r.arms.push_back(run_batch(cfg));
  } else {
    PairedReport p = compare_no_init(cfg);
    r.arms.push_back(std::move(p.with_init));
    r.arms.push_back(std::move(p.without_init));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Reports

struct Summary {
  double mean = 0.0;
  double median = 0.0;
};

inline Summary summarize(std::vector<double> values) {
  if (values.empty()) return {};
  Summary s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return s;
}

struct Metric {
  const char* name;
  double TrialRecord::*field;
};

inline constexpr Metric kMetrics[] = {
    {"nu", &TrialRecord::nu},         {"delta", &TrialRecord::delta},         {"delta_spec", &TrialRecord::delta_spec},
    {"delta_o", &TrialRecord::delta_o}, {"delta_icp", &TrialRecord::delta_icp}, {"delta_icp_o", &TrialRecord::delta_icp_o},
};

inline Summary summarize(const CellReport& cell, double TrialRecord::*field) {
  std::vector<double> v;
  for (const TrialRecord& r : cell.trials) v.push_back(r.*field);
  return summarize(std::move(v));
}

/// Mean/median of delta_h over trials that have it; empty when none do.
inline std::optional<Summary> summarize_hamming(const CellReport& cell) {
  std::vector<double> v;
  for (const TrialRecord& r : cell.trials) {
    if (r.delta_h) v.push_back(*r.delta_h);
  }
  if (v.empty()) return std::nullopt;
  return summarize(std::move(v));
}

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string report_csv(const BatchReport& report, bool timing) {
  std::ostringstream out;
  out << "cloud,sigma_mult,sigma_add,alpha,n_trials,tau";
  for (const char* m : {"nu", "delta", "delta_spec", "delta_o", "delta_h", "delta_icp", "delta_icp_o"}) {
    out << ",mean_" << m << ",median_" << m;
  }
  if (timing) out << ",mean_seconds_einit,mean_seconds_icp";
  out << '\n';

  auto pair = [&](const Summary& s) { out << ',' << format_number(s.mean) << ',' << format_number(s.median); };
  for (const CellReport& cell : report.cells) {
    out << cell.params.cloud << ',' << format_number(cell.params.sigma_mult) << ','
        << format_number(cell.params.sigma_add) << ',' << format_number(cell.params.alpha) << ','
        << cell.trials.size() << ',' << format_number(cell.tau());
    pair(summarize(cell, &TrialRecord::nu));
    pair(summarize(cell, &TrialRecord::delta));
    pair(summarize(cell, &TrialRecord::delta_spec));
    pair(summarize(cell, &TrialRecord::delta_o));
    if (auto h = summarize_hamming(cell)) {
      pair(*h);
    } else {
      out << ",,";
    }
    pair(summarize(cell, &TrialRecord::delta_icp));
    pair(summarize(cell, &TrialRecord::delta_icp_o));
    if (timing) {
      out << ',' << format_number(summarize(cell, &TrialRecord::init_seconds).mean) << ','
          << format_number(summarize(cell, &TrialRecord::icp_seconds).mean);
    }
    out << '\n';
  }
  return out.str();
}

inline json trial_json(const TrialRecord& r, std::size_t index, bool timing) {
  json j{{"trial", index},
         {"nu", r.nu},
         {"delta", r.delta},
         {"delta_spec", r.delta_spec},
         {"delta_o", r.delta_o},
         {"delta_h", r.delta_h ? json(*r.delta_h) : json(nullptr)},
         {"delta_icp", r.delta_icp},
         {"delta_icp_o", r.delta_icp_o},
         {"success", r.success}};
  if (timing) {
    j["seconds_einit"] = r.init_seconds;
    j["seconds_icp"] = r.icp_seconds;
  }
  return j;
}

inline json report_json(const ExperimentReport& report) {
  const bool timing = report.config.record_timing;
  json arms = json::array();
  for (const BatchReport& arm : report.arms) {
    json cells = json::array();
    for (const CellReport& cell : arm.cells) {
      json mean = json::object();
      json median = json::object();
      for (const Metric& m : kMetrics) {
        const Summary s = summarize(cell, m.field);
        mean[m.name] = s.mean;
        median[m.name] = s.median;
      }
      const auto h = summarize_hamming(cell);
      mean["delta_h"] = h ? json(h->mean) : json(nullptr);
      median["delta_h"] = h ? json(h->median) : json(nullptr);
      json c{{"cloud", cell.params.cloud},
             {"sigma_mult", cell.params.sigma_mult},
             {"sigma_add", cell.params.sigma_add},
             {"alpha", cell.params.alpha},
             {"n_trials", cell.trials.size()},
             {"tau", cell.tau()},
             {"mean", mean},
             {"median", median}};
      if (timing) {
        c["mean_seconds_einit"] = summarize(cell, &TrialRecord::init_seconds).mean;
        c["mean_seconds_icp"] = summarize(cell, &TrialRecord::icp_seconds).mean;
      }
      json trials = json::array();
      for (std::size_t t = 0; t < cell.trials.size(); ++t) trials.push_back(trial_json(cell.trials[t], t, timing));
      c["trials"] = std::move(trials);
      cells.push_back(std::move(c));
    }
    arms.push_back({{"arm", arm.arm}, {"cells", std::move(cells)}});
  }
  return json{{"schema_version", kSchemaVersion},
              {"software_version", kSoftwareVersion},
              {"seed", report.config.seed},
              {"config", to_json(report.config)},
              {"arms", std::move(arms)}};
}

/// One row per (series, cell): mean nu on the horizontal axis, the chosen
/// statistic on the vertical. Series are clouds, suffixed by arm when paired.
inline std::string plot_csv(const ExperimentReport& report, const std::string& statistic) {
  std::ostringstream out;
  out << "series,sigma_mult,sigma_add,alpha,nu," << statistic << '\n';
  for (const BatchReport& arm : report.arms) {
    for (const CellReport& cell : arm.cells) {
      double value = 0.0;
      if (statistic == "tau") {
        value = cell.tau();
      } else if (statistic == "delta_spec") {
        value = summarize(cell, &TrialRecord::delta_spec).mean;
      } else if (statistic == "delta_o") {
        value = summarize(cell, &TrialRecord::delta_o).mean;
      } else {
        fail(ErrorKind::InvalidInput, "plot_csv: unknown statistic '" + statistic + "'");
      }
      std::string series = cell.params.cloud;
      if (report.arms.size() > 1) series += "/" + arm.arm;
      out << series << ',' << format_number(cell.params.sigma_mult) << ',' << format_number(cell.params.sigma_add)
          << ',' << format_number(cell.params.alpha) << ',' << format_number(summarize(cell, &TrialRecord::nu).mean)
          << ',' << format_number(value) << '\n';
    }
  }
  return out.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

/// Writes report csv(s), report.json and the plot series into `out_dir`.
/// Returns the written paths.
inline std::vector<std::filesystem::path> save_report(const ExperimentReport& report,
                                                      const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    written.push_back(out_dir / name);
    write_text(written.back(), text);
  };
  if (report.arms.size() == 1) {
    emit("report.csv", report_csv(report.arms.front(), report.config.record_timing));
  } else {
    for (const BatchReport& arm : report.arms) {
      emit("report_" + arm.arm + ".csv", report_csv(arm, report.config.record_timing));
    }
  }
  emit("report.json", report_json(report).dump(2) + "\n");
  for (const char* stat : {"tau", "delta_spec", "delta_o"}) emit(std::string("plot_") + stat + ".csv", plot_csv(report, stat));
  return written;
}

}  // namespace einit::harness
