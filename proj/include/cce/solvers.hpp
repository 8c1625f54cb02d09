#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "cce/evaluation.hpp"
#include "cce/game_io.hpp"
#include "cce/joint.hpp"
#include "cce/reconstruction.hpp"
#include "cce/regret.hpp"
#include "cce/rng.hpp"

namespace cce {

enum class Algorithm { kCfr, kCfrS, kCfrJr, kCfrJrK };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kCfr: return "cfr";
    case Algorithm::kCfrS: return "cfr-s";
    case Algorithm::kCfrJr: return "cfr-jr";
    case Algorithm::kCfrJrK: return "cfr-jr-k";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "cfr") return Algorithm::kCfr;
  if (s == "cfr-s") return Algorithm::kCfrS;
  if (s == "cfr-jr") return Algorithm::kCfrJr;
  if (s == "cfr-jr-k") return Algorithm::kCfrJrK;
  throw InvalidArgument("unknown algorithm \"" + s + "\" (expected cfr, cfr-s, cfr-jr or cfr-jr-k)");
}

struct TracePoint {
  long iteration = 0;
  double time_s = 0.0;        // solver iterations only
  double time_total_s = 0.0;  // including evaluation sweeps
  double epsilon = 0.0;
  double alpha = 0.0;
  std::vector<double> epsilon_i;
  double sw = 0.0;
  double sw_ratio = 0.0;
  long support = 0;
  double regret_bound = 0.0;  // max_i R_i / t over the iterates behind the distribution

  bool operator==(const TracePoint&) const = default;
};

/// Common interface of the three learning dynamics. `step` runs one
/// iteration; `evaluate` measures the distribution the algorithm outputs.
class Solver {
 public:
  explicit Solver(const GameTree& tree) : tree_(tree) {}
  virtual ~Solver() = default;

  const GameTree& tree() const { return tree_; }
  virtual Algorithm algorithm() const = 0;
  virtual long iteration() const = 0;
  virtual void step() = 0;
  /// False while there is nothing to evaluate yet (CFR-Jr-k before t = k).
  virtual bool ready() const { return iteration() > 0; }
  virtual GapReport evaluate() const = 0;
  virtual long support() const = 0;
  virtual double regret_bound() const = 0;
  virtual nlohmann::json checkpoint() const = 0;
  virtual void restore(const nlohmann::json& j) = 0;

 protected:
  const GameTree& tree_;
};

namespace solver_detail {

inline nlohmann::json cfr_state_to_json(const CfrState& s) {
  nlohmann::json regrets = nlohmann::json::array(), sums = nlohmann::json::array();
  for (const auto& r : s.regrets) regrets.push_back(r.regret);
  for (const auto& a : s.averages) sums.push_back({{"sum", a.sum}, {"updates", a.updates}});
  return {{"iteration", s.iteration}, {"regrets", regrets}, {"averages", sums}};
}

inline void cfr_state_from_json(const GameTree& tree, CfrState& s, const nlohmann::json& j) {
  s = CfrState::init(tree);
  s.iteration = j.at("iteration").get<long>();
  for (PlayerId p = 0; p < tree.num_players(); ++p) {
    s.regrets[p].regret = j.at("regrets").at(p).get<std::vector<std::vector<double>>>();
    s.regrets[p].iterations = s.iteration;
    s.averages[p].sum = j.at("averages").at(p).at("sum").get<std::vector<std::vector<double>>>();
    s.averages[p].updates = j.at("averages").at(p).at("updates").get<long>();
    s.current[p] = s.regrets[p].strategy();
  }
}

inline nlohmann::json joint_to_json(const JointDistribution& x) {
  nlohmann::json plans = nlohmann::json::array();
  for (PlayerId p = 0; p < x.num_players(); ++p) {
    nlohmann::json list = nlohmann::json::array();
    for (int id = 0; id < x.registry(p).size(); ++id) list.push_back(x.registry(p).plan(id).choice);
    plans.push_back(std::move(list));
  }
  nlohmann::json keys = nlohmann::json::array();
  std::vector<double> weights;
  for (int e = 0; e < x.support(); ++e) {
    keys.push_back(std::vector<int>(x.key(e).begin(), x.key(e).begin() + x.num_players()));
    weights.push_back(x.raw_weight(e));
  }
  return {{"plans", plans}, {"keys", keys}, {"weights", weights}, {"mass", x.mass()}, {"normalizer", x.normalizer()}};
}

inline void joint_from_json(JointDistribution& x, const nlohmann::json& j) {
  for (PlayerId p = 0; p < x.num_players(); ++p) {
    for (const auto& c : j.at("plans").at(p)) {
      NormalFormPlan plan{p, c.get<std::vector<int>>()};
      x.registry(p).intern(plan);
    }
  }
  std::vector<JointKey> keys;
  for (const auto& k : j.at("keys")) {
    JointKey key;
    key.fill(kNone);
    const auto v = k.get<std::vector<int>>();
    std::copy(v.begin(), v.end(), key.begin());
    keys.push_back(key);
  }
  const auto weights = j.at("weights").get<std::vector<double>>();
  x.restore(keys, weights, j.at("mass").get<double>(), j.at("normalizer").get<long>());
}

inline void check_checkpoint(const nlohmann::json& j, Algorithm a) {
  if (j.value("format", std::string{}) != "cce-checkpoint" || j.value("version", 0) != 1) {
    throw SchemaError("checkpoint: unknown format or version");
  }
  if (j.at("algorithm").get<std::string>() != to_string(a)) throw SchemaError("checkpoint: algorithm mismatch");
}

inline nlohmann::json checkpoint_header(Algorithm a) {
  return {{"format", "cce-checkpoint"}, {"version", 1}, {"algorithm", to_string(a)}};
}

}  // namespace solver_detail

/// Vanilla CFR; the output is the product of the average strategies.
class CfrSolver : public Solver {
 public:
  explicit CfrSolver(const GameTree& tree)
      : Solver(tree), state_(CfrState::init(tree)), tracker_(tree) {}

  Algorithm algorithm() const override { return Algorithm::kCfr; }
  long iteration() const override { return state_.iteration; }
  const CfrState& state() const { return state_; }

  void step() override {
    std::vector<std::vector<double>> reach;
    for (const auto& s : state_.current) reach.push_back(behavioral_reach(tree_, s).terminal);
    tracker_.observe(reach);
    cfr_iteration(tree_, state_);
  }

  std::vector<BehavioralStrategy> average() const {
    std::vector<BehavioralStrategy> out;
    for (const auto& a : state_.averages) out.push_back(average_behavioral(a));
    return out;
  }

  GapReport evaluate() const override { return product_gap(tree_, average()); }
  long support() const override { return 0; }
  double regret_bound() const override { return tracker_.average_regret_bound(); }

  nlohmann::json checkpoint() const override {
    auto j = solver_detail::checkpoint_header(algorithm());
    j["cfr"] = solver_detail::cfr_state_to_json(state_);
    j["tracker"] = tracker_.to_json();
    return j;
  }

  void restore(const nlohmann::json& j) override {
    solver_detail::check_checkpoint(j, algorithm());
    solver_detail::cfr_state_from_json(tree_, state_, j.at("cfr"));
    tracker_.from_json(j.at("tracker"));
  }

 private:
  CfrState state_;
  ExternalRegretTracker tracker_;
};

/// CFR with joint reconstruction. At every iteration t ≡ 0 (mod k) the
/// strategies π^t played at t are turned into realization-equivalent
/// normal-form strategies and their product is folded into the joint
/// average; k = 1 is plain CFR-Jr.
class CfrJrSolver : public Solver {
 public:
  CfrJrSolver(const GameTree& tree, long k = 1)
      : Solver(tree), k_(k), state_(CfrState::init(tree)), joint_(tree), tracker_(tree) {
    if (k < 1) throw InvalidArgument("reconstruction rate k must be at least 1");
  }

  Algorithm algorithm() const override { return k_ == 1 ? Algorithm::kCfrJr : Algorithm::kCfrJrK; }
  long iteration() const override { return state_.iteration; }
  long rate() const { return k_; }
  const CfrState& state() const { return state_; }
  const JointDistribution& joint() const { return joint_; }
  const ExternalRegretTracker& tracker() const { return tracker_; }
  const ReconstructionStats& last_stats(PlayerId p) const { return stats_[p]; }
  bool ready() const override { return joint_.normalizer() > 0; }

  void step() override {
    const long t = state_.iteration + 1;
    if (t % k_ == 0) {
      const int P = tree_.num_players();
      std::vector<NormalFormStrategy> x;
      std::vector<std::vector<double>> reach;
      stats_.assign(P, {});
      for (PlayerId p = 0; p < P; ++p) {
        x.push_back(nf_strategy_reconstruction(tree_, state_.current[p], &stats_[p]));
        reach.push_back(behavioral_reach(tree_, state_.current[p]).terminal);
      }
      joint_accumulate(joint_, x);
      tracker_.observe(reach);
    }
    cfr_iteration(tree_, state_);
  }

  GapReport evaluate() const override { return cce_gap(tree_, joint_); }
  long support() const override { return joint_.support(); }
  double regret_bound() const override { return tracker_.average_regret_bound(); }

  nlohmann::json checkpoint() const override {
    auto j = solver_detail::checkpoint_header(algorithm());
    j["k"] = k_;
    j["cfr"] = solver_detail::cfr_state_to_json(state_);
    j["joint"] = solver_detail::joint_to_json(joint_);
    j["tracker"] = tracker_.to_json();
    return j;
  }

  void restore(const nlohmann::json& j) override {
    solver_detail::check_checkpoint(j, algorithm());
    if (j.at("k").get<long>() != k_) throw SchemaError("checkpoint: reconstruction rate mismatch");
    solver_detail::cfr_state_from_json(tree_, state_, j.at("cfr"));
    joint_ = JointDistribution(tree_);
    solver_detail::joint_from_json(joint_, j.at("joint"));
    tracker_.from_json(j.at("tracker"));
  }

 private:
  long k_;
  CfrState state_;
  JointDistribution joint_;
  ExternalRegretTracker tracker_;
  std::vector<ReconstructionStats> stats_;
};

/// CFR with sampling: every player draws a plan from her current strategy,
/// updates laminar regrets against the others' sampled plans, and the joint
/// plans are tallied into the empirical frequency of play.
class CfrSSolver : public Solver {
 public:
  CfrSSolver(const GameTree& tree, std::uint64_t seed, bool freeze_strategies = false)
      : Solver(tree), seed_(seed), freeze_(freeze_strategies), joint_(tree), tracker_(tree) {
    for (PlayerId p = 0; p < tree.num_players(); ++p) {
      regrets_.push_back(RegretTable::zeros(tree, p));
      current_.push_back(regrets_.back().strategy());
      rngs_.emplace_back(seed, static_cast<std::uint64_t>(p) + 1);
    }
  }

  Algorithm algorithm() const override { return Algorithm::kCfrS; }
  long iteration() const override { return t_; }
  const JointDistribution& joint() const { return joint_; }
  const std::vector<BehavioralStrategy>& current() const { return current_; }
  const RegretTable& regrets(PlayerId p) const { return regrets_[p]; }
  const ExternalRegretTracker& tracker() const { return tracker_; }

  void step() override {
    const int P = tree_.num_players();
    const int Z = tree_.num_terminals();
    std::vector<std::vector<int>> full(P);
    JointKey key;
    key.fill(kNone);
    for (PlayerId p = 0; p < P; ++p) {
      full[p] = sample_assignment(current_[p], rngs_[p]);
      key[p] = joint_.registry(p).intern(canonicalize(tree_, p, full[p]));
    }
    std::vector<std::vector<double>> reach(P, std::vector<double>(Z, 0.0));
    for (PlayerId p = 0; p < P; ++p) {
      joint_.registry(p).terminals(key[p]).for_each([&](int z) { reach[p][z] = 1.0; });
    }
    if (!freeze_) {
      std::vector<double> weight(Z);
      for (PlayerId p = 0; p < P; ++p) {
        for (int z = 0; z < Z; ++z) {
          double w = tree_.chance_reach(z);
          for (PlayerId q = 0; q < P && w != 0.0; ++q) {
            if (q != p) w *= reach[q][z];
          }
          weight[z] = w;
        }
        cfr_s_update(tree_, regrets_[p], full[p], weight);
      }
      for (PlayerId p = 0; p < P; ++p) regrets_[p].strategy_into(current_[p]);
    }
    joint_.add(key, 1.0);
    joint_.close_step();
    tracker_.observe(reach);
    ++t_;
  }

  GapReport evaluate() const override { return cce_gap(tree_, joint_); }
  long support() const override { return joint_.support(); }
  double regret_bound() const override { return tracker_.average_regret_bound(); }

  nlohmann::json checkpoint() const override {
    auto j = solver_detail::checkpoint_header(algorithm());
    j["seed"] = seed_;
    j["iteration"] = t_;
    nlohmann::json regrets = nlohmann::json::array(), rngs = nlohmann::json::array();
    for (const auto& r : regrets_) regrets.push_back(r.regret);
    for (const auto& r : rngs_) rngs.push_back(r.state());
    j["regrets"] = regrets;
    j["rng"] = rngs;
    j["joint"] = solver_detail::joint_to_json(joint_);
    j["tracker"] = tracker_.to_json();
    return j;
  }

  void restore(const nlohmann::json& j) override {
    solver_detail::check_checkpoint(j, algorithm());
    if (j.at("seed").get<std::uint64_t>() != seed_) throw SchemaError("checkpoint: seed mismatch");
    t_ = j.at("iteration").get<long>();
    for (PlayerId p = 0; p < tree_.num_players(); ++p) {
      regrets_[p].regret = j.at("regrets").at(p).get<std::vector<std::vector<double>>>();
      regrets_[p].iterations = t_;
      current_[p] = regrets_[p].strategy();
      rngs_[p].restore(j.at("rng").at(p).get<std::string>());
    }
    joint_ = JointDistribution(tree_);
    solver_detail::joint_from_json(joint_, j.at("joint"));
    tracker_.from_json(j.at("tracker"));
  }

 private:
  std::uint64_t seed_;
  bool freeze_;
  long t_ = 0;
  std::vector<RegretTable> regrets_;
  std::vector<BehavioralStrategy> current_;
  std::vector<Rng> rngs_;
  JointDistribution joint_;
  ExternalRegretTracker tracker_;
};

struct SolverOptions {
  long iterations = 1000;
  long eval_every = 50;
  double time_limit_s = 0.0;  // 0 disables the limit
  bool timing = true;         // false writes 0 into the time columns
  std::function<void(const TracePoint&)> on_eval;
  double time_offset_s = 0.0;  // time already spent before a resume
};

struct RunResult {
  std::vector<TracePoint> trace;
  bool stopped_by_time = false;
  double time_s = 0.0;
  double time_total_s = 0.0;
};

/// Runs `solver` up to `iterations`, evaluating every `eval_every`
/// iterations and at the last one.
inline RunResult run_solver(Solver& solver, const SolverOptions& opt) {
  using Clock = std::chrono::steady_clock;
  if (opt.iterations < 1) throw InvalidArgument("iterations must be at least 1");
  if (opt.eval_every < 1) throw InvalidArgument("eval_every must be at least 1");
  const GameTree& tree = solver.tree();
  const double upper = sw_upper_bound(tree);
  RunResult res;
  const auto start = Clock::now() - std::chrono::duration_cast<Clock::duration>(
                                         std::chrono::duration<double>(opt.time_offset_s));
  double solve_s = opt.time_offset_s;
  auto seconds = [](Clock::duration d) { return std::chrono::duration<double>(d).count(); };

  auto record = [&] {
    if (!solver.ready()) return;
    if (!res.trace.empty() && res.trace.back().iteration == solver.iteration()) return;
    const GapReport g = solver.evaluate();
    TracePoint tp;
    tp.iteration = solver.iteration();
    tp.time_s = opt.timing ? solve_s : 0.0;
    tp.time_total_s = opt.timing ? seconds(Clock::now() - start) : 0.0;
    tp.epsilon = g.epsilon;
    tp.alpha = g.alpha;
    tp.epsilon_i = g.epsilon_i;
    tp.sw = g.social_welfare;
    tp.sw_ratio = sw_ratio(g.social_welfare, upper);
    tp.support = solver.support();
    tp.regret_bound = solver.regret_bound();
    res.trace.push_back(tp);
    if (opt.on_eval) opt.on_eval(tp);
  };

  while (solver.iteration() < opt.iterations) {
    const auto t0 = Clock::now();
    solver.step();
    solve_s += seconds(Clock::now() - t0);
    if (solver.iteration() % opt.eval_every == 0) record();
    if (opt.time_limit_s > 0.0 && seconds(Clock::now() - start) >= opt.time_limit_s &&
        solver.iteration() < opt.iterations) {
      res.stopped_by_time = true;
      break;
    }
  }
  record();
  res.time_s = opt.timing ? solve_s : 0.0;
  res.time_total_s = opt.timing ? seconds(Clock::now() - start) : 0.0;
  return res;
}

inline std::unique_ptr<Solver> make_solver(const GameTree& tree, Algorithm algo, long k = 1,
                                           std::uint64_t seed = 0) {
  switch (algo) {
    case Algorithm::kCfr: return std::make_unique<CfrSolver>(tree);
    case Algorithm::kCfrS: return std::make_unique<CfrSSolver>(tree, seed);
    case Algorithm::kCfrJr: return std::make_unique<CfrJrSolver>(tree, 1);
    case Algorithm::kCfrJrK: return std::make_unique<CfrJrSolver>(tree, k);
  }
  throw InvalidArgument("unknown algorithm");
}

struct JointRun {
  JointDistribution joint;
  std::vector<TracePoint> trace;
};

inline JointRun run_cfr_jr_k(const GameTree& tree, long iterations, long k, long eval_every = 50) {
  if (k > iterations) throw InvalidArgument("reconstruction rate k exceeds the iteration count");
  CfrJrSolver s(tree, k);
  auto r = run_solver(s, SolverOptions{iterations, eval_every, 0.0, true, {}, 0.0});
  return {s.joint(), std::move(r.trace)};
}

inline JointRun run_cfr_jr(const GameTree& tree, long iterations, long eval_every = 50) {
  CfrJrSolver s(tree, 1);
  auto r = run_solver(s, SolverOptions{iterations, eval_every, 0.0, true, {}, 0.0});
  return {s.joint(), std::move(r.trace)};
}

inline JointRun run_cfr_s(const GameTree& tree, long iterations, std::uint64_t seed, long eval_every = 50) {
  CfrSSolver s(tree, seed);
  auto r = run_solver(s, SolverOptions{iterations, eval_every, 0.0, true, {}, 0.0});
  return {s.joint(), std::move(r.trace)};
}

struct ProductRun {
  std::vector<BehavioralStrategy> average;
  std::vector<TracePoint> trace;
};

inline ProductRun run_cfr(const GameTree& tree, long iterations, long eval_every = 50) {
  CfrSolver s(tree);
  auto r = run_solver(s, SolverOptions{iterations, eval_every, 0.0, true, {}, 0.0});
  return {s.average(), std::move(r.trace)};
}

}  // namespace cce
