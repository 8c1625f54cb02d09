#pragma once

#include <atomic>
#include <cctype>
#include <charconv>
#include <exception>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "cce/game_io.hpp"
#include "cce/game_spec.hpp"
#include "cce/solvers.hpp"

namespace cce {

inline constexpr const char* kCsvHeader = "iteration,time_s,epsilon,alpha,sw,sw_ratio,support";

struct ExperimentConfig {
  std::string game = "K3-3";
  std::string game_file;  // takes precedence over `game` when set
  Algorithm algorithm = Algorithm::kCfrJr;
  long iterations = 1000;
  long k = 1;
  std::vector<std::uint64_t> seeds{0};
  long eval_every = 50;
  std::vector<double> alpha_targets{0.05, 0.01, 0.005};
  std::string out_dir;  // empty: nothing is written
  std::string format = "csv";
  double time_limit_s = 0.0;
  int workers = 1;
  bool timing = true;
  bool resume = false;

  void validate() const {
    if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
    if (eval_every < 1) throw InvalidArgument("eval_every must be at least 1");
    if (k < 1) throw InvalidArgument("reconstruction rate k must be at least 1");
    if (k > iterations) throw InvalidArgument("reconstruction rate k exceeds the iteration count");
    if (seeds.empty()) throw InvalidArgument("at least one seed is required");
    for (double a : alpha_targets) {
      if (!(a > 0.0 && a <= 1.0)) throw InvalidArgument("alpha targets must lie in (0, 1]");
    }
    if (format != "csv" && format != "json") throw InvalidArgument("format must be csv or json");
    if (time_limit_s < 0.0) throw InvalidArgument("time limit must be non-negative");
    if (workers < 1) throw InvalidArgument("workers must be at least 1");
    if (game_file.empty()) parse_game_spec(game);
  }
};

/// Applies the keys present in a JSON config block on top of `base`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  try {
    if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
      if (key == "game") {
        base.game = v.is_string() ? v.get<std::string>() : to_string(game_spec_from_json(v));
      } else if (key == "game_file") {
        base.game_file = v.get<std::string>();
      } else if (key == "algo" || key == "algorithm") {
        base.algorithm = parse_algorithm(v.get<std::string>());
      } else if (key == "iters" || key == "iterations") {
        base.iterations = v.get<long>();
      } else if (key == "recon_rate" || key == "k") {
        base.k = v.get<long>();
      } else if (key == "seeds" || key == "seed") {
        base.seeds = v.is_array() ? v.get<std::vector<std::uint64_t>>() : std::vector{v.get<std::uint64_t>()};
      } else if (key == "eval_every") {
        base.eval_every = v.get<long>();
      } else if (key == "alpha_targets") {
        base.alpha_targets = v.get<std::vector<double>>();
      } else if (key == "out") {
        base.out_dir = v.get<std::string>();
      } else if (key == "format") {
        base.format = v.get<std::string>();
      } else if (key == "time_limit") {
        base.time_limit_s = v.get<double>();
      } else if (key == "workers") {
        base.workers = v.get<int>();
      } else if (key == "timing") {
        base.timing = v.get<bool>();
      } else if (key == "resume") {
        base.resume = v.get<bool>();
      } else {
        throw InvalidArgument("unknown config key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

namespace experiment_detail {

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace experiment_detail

/// CSV with the fixed header; one row per trace point.
inline void emit_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  using experiment_detail::format_number;
  out << kCsvHeader << '\n';
  for (const auto& p : trace) {
    out << p.iteration << ',' << format_number(p.time_s) << ',' << format_number(p.epsilon) << ','
        << format_number(p.alpha) << ',' << format_number(p.sw) << ',' << format_number(p.sw_ratio) << ','
        << p.support << '\n';
  }
}

inline nlohmann::ordered_json trace_to_json(const std::vector<TracePoint>& trace) {
  using experiment_detail::number_or_null;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : trace) {
    nlohmann::ordered_json j;
    j["iteration"] = p.iteration;
    j["time_s"] = p.time_s;
    j["time_total_s"] = p.time_total_s;
    j["epsilon"] = p.epsilon;
    j["alpha"] = p.alpha;
    j["epsilon_i"] = p.epsilon_i;
    j["sw"] = p.sw;
    j["sw_ratio"] = number_or_null(p.sw_ratio);
    j["support"] = p.support;
    j["regret_bound"] = number_or_null(p.regret_bound);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<TracePoint> trace_from_json(const nlohmann::json& arr) {
  using experiment_detail::number_from;
  std::vector<TracePoint> out;
  for (const auto& j : arr) {
    TracePoint p;
    p.iteration = j.at("iteration").get<long>();
    p.time_s = j.at("time_s").get<double>();
    p.time_total_s = j.at("time_total_s").get<double>();
    p.epsilon = j.at("epsilon").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.epsilon_i = j.at("epsilon_i").get<std::vector<double>>();
    p.sw = j.at("sw").get<double>();
    p.sw_ratio = number_from(j.at("sw_ratio"));
    p.support = j.at("support").get<long>();
    p.regret_bound = number_from(j.at("regret_bound"));
    out.push_back(std::move(p));
  }
  return out;
}

struct TargetHit {
  double alpha_target = 0.0;
  std::optional<long> iteration;
  std::optional<double> time_s;
};

/// First trace point at or below each α target.
inline std::vector<TargetHit> first_hits(const std::vector<TracePoint>& trace, const std::vector<double>& targets) {
  std::vector<TargetHit> hits;
  for (double a : targets) {
    TargetHit h{a, std::nullopt, std::nullopt};
    for (const auto& p : trace) {
      if (p.alpha <= a) {
        h.iteration = p.iteration;
        h.time_s = p.time_s;
        break;
      }
    }
    hits.push_back(h);
  }
  return hits;
}

struct CellResult {
  std::string name;
  std::uint64_t seed = 0;
  RunResult run;
  std::vector<TargetHit> hits;
  std::string output_path;
  std::string checkpoint_path;
};

struct Aggregate {
  double alpha_target = 0.0;
  int cells = 0;
  int hit = 0;
  double iteration_mean = 0.0, iteration_std = 0.0;
  double time_mean = 0.0, time_std = 0.0;
};

struct ExperimentResult {
  std::vector<CellResult> cells;
  std::vector<Aggregate> aggregate;
  double sw_upper_bound = 0.0;
  double delta = 0.0;

  /// 2 when some cell ran out of time before reaching any α target.
  int exit_code() const {
    for (const auto& c : cells) {
      if (!c.run.stopped_by_time) continue;
      bool any = false;
      for (const auto& h : c.hits) any = any || h.iteration.has_value();
      if (!any) return 2;
    }
    return 0;
  }
};

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
  return {m, s};
}

inline std::vector<Aggregate> aggregate(const std::vector<CellResult>& cells, const std::vector<double>& targets) {
  std::vector<Aggregate> out;
  for (std::size_t a = 0; a < targets.size(); ++a) {
    Aggregate g;
    g.alpha_target = targets[a];
    g.cells = static_cast<int>(cells.size());
    std::vector<double> its, times;
    for (const auto& c : cells) {
      if (!c.hits[a].iteration) continue;
      ++g.hit;
      its.push_back(static_cast<double>(*c.hits[a].iteration));
      times.push_back(*c.hits[a].time_s);
    }
    std::tie(g.iteration_mean, g.iteration_std) = mean_std(its);
    std::tie(g.time_mean, g.time_std) = mean_std(times);
    out.push_back(g);
  }
  return out;
}

inline std::string cell_name(const ExperimentConfig& cfg, const std::string& game_label, std::uint64_t seed) {
  std::string g;
  for (char c : game_label) g += (std::isalnum(static_cast<unsigned char>(c)) || c == '-') ? c : '_';
  std::string name = g + "_" + to_string(cfg.algorithm);
  if (cfg.algorithm == Algorithm::kCfrJrK) name += "_k" + std::to_string(cfg.k);
  if (cfg.algorithm == Algorithm::kCfrS) name += "_seed" + std::to_string(seed);
  return name;
}

inline std::string game_label(const ExperimentConfig& cfg) {
  if (cfg.game_file.empty()) return to_string(parse_game_spec(cfg.game));
  return std::filesystem::path(cfg.game_file).stem().string();
}

inline GameTree load_experiment_game(const ExperimentConfig& cfg) {
  return cfg.game_file.empty() ? make_game(cfg.game) : load_game(cfg.game_file);
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path);
}

inline nlohmann::ordered_json summary_to_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  using experiment_detail::number_or_null;
  nlohmann::ordered_json j;
  j["game"] = game_label(cfg);
  j["algorithm"] = to_string(cfg.algorithm);
  j["iterations"] = cfg.iterations;
  j["k"] = cfg.k;
  j["eval_every"] = cfg.eval_every;
  j["delta"] = r.delta;
  j["sw_upper_bound"] = r.sw_upper_bound;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["seed"] = c.seed;
    cj["iterations_run"] = c.run.trace.empty() ? 0 : c.run.trace.back().iteration;
    cj["stopped_by_time"] = c.run.stopped_by_time;
    cj["time_s"] = c.run.time_s;
    cj["time_total_s"] = c.run.time_total_s;
    if (!c.run.trace.empty()) cj["final"] = trace_to_json({c.run.trace.back()})[0];
    auto hits = nlohmann::ordered_json::array();
    for (const auto& h : c.hits) {
      nlohmann::ordered_json hj;
      hj["alpha"] = h.alpha_target;
      hj["iteration"] = h.iteration ? nlohmann::ordered_json(*h.iteration) : nlohmann::ordered_json(nullptr);
      hj["time_s"] = h.time_s ? nlohmann::ordered_json(*h.time_s) : nlohmann::ordered_json(nullptr);
      hits.push_back(std::move(hj));
    }
    cj["first_hits"] = std::move(hits);
    if (!c.output_path.empty()) cj["output"] = c.output_path;
    if (!c.checkpoint_path.empty()) cj["checkpoint"] = c.checkpoint_path;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  auto agg = nlohmann::ordered_json::array();
  for (const auto& g : r.aggregate) {
    nlohmann::ordered_json gj;
    gj["alpha"] = g.alpha_target;
    gj["cells"] = g.cells;
    gj["hit"] = g.hit;
    gj["iteration_mean"] = number_or_null(g.iteration_mean);
    gj["iteration_std"] = number_or_null(g.iteration_std);
    gj["time_mean"] = number_or_null(g.time_mean);
    gj["time_std"] = number_or_null(g.time_std);
    agg.push_back(std::move(gj));
  }
  j["aggregate"] = std::move(agg);
  return j;
}

/// Runs every (algorithm, seed) cell of the configuration; deterministic
/// algorithms run once regardless of the seed list. Output files go to
/// `out_dir` when set; a cell stopped by the time limit leaves a checkpoint
/// that `resume` picks up.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const GameTree tree = load_experiment_game(cfg);
  const std::string label = game_label(cfg);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (cfg.algorithm != Algorithm::kCfrS) seeds.resize(1);

  ExperimentResult result;
  result.delta = payoff_range(tree);
  result.sw_upper_bound = sw_upper_bound(tree);
  result.cells.resize(seeds.size());
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  auto run_cell = [&](std::size_t idx) {
    CellResult& cell = result.cells[idx];
    cell.seed = seeds[idx];
    cell.name = cell_name(cfg, label, cell.seed);
    const long k = cfg.algorithm == Algorithm::kCfrJrK ? cfg.k : 1;
    auto solver = make_solver(tree, cfg.algorithm, k, cell.seed);
    std::string ckpt;
    if (!cfg.out_dir.empty()) ckpt = (std::filesystem::path(cfg.out_dir) / (cell.name + ".checkpoint.json")).string();

    SolverOptions opt;
    opt.iterations = cfg.iterations;
    opt.eval_every = cfg.eval_every;
    opt.time_limit_s = cfg.time_limit_s;
    opt.timing = cfg.timing;
    std::vector<TracePoint> previous;
    if (cfg.resume && !ckpt.empty() && std::filesystem::exists(ckpt)) {
      std::ifstream in(ckpt);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw SchemaError(ckpt + ": " + e.what());
      }
      if (j.at("game").get<std::string>() != label) throw SchemaError(ckpt + ": game mismatch");
      solver->restore(j.at("solver"));
      previous = trace_from_json(j.at("trace"));
      opt.time_offset_s = j.at("time_s").get<double>();
    }
    cell.run = run_solver(*solver, opt);
    cell.run.trace.insert(cell.run.trace.begin(), previous.begin(), previous.end());
    cell.hits = first_hits(cell.run.trace, cfg.alpha_targets);

    if (cfg.out_dir.empty()) return;
    const auto base = std::filesystem::path(cfg.out_dir) / cell.name;
    if (cfg.format == "csv") {
      std::ostringstream os;
      emit_csv(os, cell.run.trace);
      cell.output_path = base.string() + ".csv";
      write_text(cell.output_path, os.str());
    } else {
      nlohmann::ordered_json j;
      j["game"] = label;
      j["algorithm"] = to_string(cfg.algorithm);
      j["seed"] = cell.seed;
      j["records"] = trace_to_json(cell.run.trace);
      cell.output_path = base.string() + ".json";
      write_text(cell.output_path, j.dump(1) + "\n");
    }
    if (cell.run.stopped_by_time) {
      nlohmann::ordered_json j;
      j["game"] = label;
      j["time_s"] = cell.run.time_s;
      j["trace"] = trace_to_json(cell.run.trace);
      j["solver"] = solver->checkpoint();
      cell.checkpoint_path = ckpt;
      write_text(ckpt, j.dump() + "\n");
    } else if (std::filesystem::exists(ckpt)) {
      std::filesystem::remove(ckpt);
    }
  };

  const int workers = std::min<int>(cfg.workers, static_cast<int>(seeds.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
          try {
            run_cell(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  result.aggregate = aggregate(result.cells, cfg.alpha_targets);
  if (!cfg.out_dir.empty()) {
    write_text((std::filesystem::path(cfg.out_dir) / "summary.json").string(), summary_to_json(cfg, result).dump(1) + "\n");
  }
  return result;
}

}  // namespace cce
