#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace cce;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("cce_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TracePoint point(long it, double eps) {
  TracePoint tp;
  tp.iteration = it;
  tp.epsilon = eps;
  tp.alpha = eps / 2.0;
  tp.epsilon_i = {eps, eps / 3.0};
  tp.sw = 0.1;
  tp.sw_ratio = std::numeric_limits<double>::quiet_NaN();
  tp.support = 7;
  tp.regret_bound = 0.7;
  return tp;
}

template <class S>
void expect_checkpoint_resume_equivalent(const GameTree& t, S make) {
  auto whole = make();
  for (int i = 0; i < 60; ++i) whole->step();
  auto first = make();
  for (int i = 0; i < 25; ++i) first->step();
  const std::string saved = first->checkpoint().dump();
  auto second = make();
  second->restore(nlohmann::json::parse(saved));
  for (int i = 0; i < 35; ++i) second->step();
  EXPECT_EQ(second->iteration(), 60);
  EXPECT_EQ(second->checkpoint().dump(), whole->checkpoint().dump());
  EXPECT_EQ(second->evaluate().epsilon, whole->evaluate().epsilon);
  (void)t;
}

}  // namespace

TEST(Csv, EmptyTraceIsHeaderOnly) {
  std::ostringstream os;
  emit_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, OneRecordIsTwoLines) {
  std::ostringstream os;
  emit_csv(os, {point(50, 0.25)});
  const std::string s = os.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_NE(s.find("50,"), std::string::npos);
  EXPECT_NE(s.find("nan"), std::string::npos);
}

TEST(TraceJson, RoundTripIsExact) {
  const std::vector<TracePoint> trace{point(1, 0.123456789012345678), point(2, 1e-300), point(3, 0.0)};
  const auto back = trace_from_json(nlohmann::json::parse(trace_to_json(trace).dump()));
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(back[i].iteration, trace[i].iteration);
    EXPECT_EQ(back[i].epsilon, trace[i].epsilon);
    EXPECT_EQ(back[i].epsilon_i, trace[i].epsilon_i);
    EXPECT_TRUE(std::isnan(back[i].sw_ratio));
    EXPECT_EQ(back[i].support, trace[i].support);
  }
}

TEST(FirstHits, Targets) {
  std::vector<TracePoint> trace{point(10, 0.4), point(20, 0.08), point(30, 0.012)};
  const auto hits = first_hits(trace, {0.05, 0.01, 0.005});
  ASSERT_EQ(hits.size(), 3U);
  EXPECT_EQ(hits[0].iteration, 20L);
  EXPECT_EQ(hits[1].iteration, 30L);
  EXPECT_FALSE(hits[2].iteration.has_value());
}

TEST(Aggregates, SampleStd) {
  const auto [m, s] = mean_std({1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m, 2.0);
  EXPECT_DOUBLE_EQ(s, 1.0);
}

TEST(Config, JsonOverridesAndRejectsUnknownKeys) {
  ExperimentConfig base;
  base.iterations = 5;
  const auto cfg = config_from_json(nlohmann::json::parse(R"({"game":"G2-3-DA","algo":"cfr-jr-k","recon_rate":4,
      "iters":100,"seeds":[1,2],"alpha_targets":[0.1],"format":"json"})"),
                                    base);
  EXPECT_EQ(cfg.game, "G2-3-DA");
  EXPECT_EQ(cfg.algorithm, Algorithm::kCfrJrK);
  EXPECT_EQ(cfg.k, 4);
  EXPECT_EQ(cfg.iterations, 100);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(cfg.format, "json");
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"gaem":"K3-3"})")), InvalidArgument);
}

TEST(Config, ValidationErrors) {
  ExperimentConfig c;
  c.iterations = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.algorithm = Algorithm::kCfrJrK;
  c.k = 2000;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.game = "K9";
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.alpha_targets = {0.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(CellNames, Layout) {
  ExperimentConfig c;
  c.algorithm = Algorithm::kCfrS;
  EXPECT_EQ(cell_name(c, "K3-3", 4), "K3-3_cfr-s_seed4");
  c.algorithm = Algorithm::kCfrJrK;
  c.k = 5;
  EXPECT_EQ(cell_name(c, "R2-3:seed=7", 0), "R2-3_seed_7_cfr-jr-k_k5");
}

TEST(Checkpoint, SolversResumeExactly) {
  const GameTree t = make_game("K3-3");
  expect_checkpoint_resume_equivalent(t, [&] { return std::make_unique<CfrSolver>(t); });
  expect_checkpoint_resume_equivalent(t, [&] { return std::make_unique<CfrJrSolver>(t, 1); });
  expect_checkpoint_resume_equivalent(t, [&] { return std::make_unique<CfrJrSolver>(t, 4); });
  expect_checkpoint_resume_equivalent(t, [&] { return std::make_unique<CfrSSolver>(t, 9); });
}

TEST(Checkpoint, WrongAlgorithmIsRejected) {
  const GameTree t = figure2_game();
  CfrSolver a(t);
  a.step();
  CfrJrSolver b(t);
  EXPECT_THROW(b.restore(a.checkpoint()), SchemaError);
}

TEST(Experiment, NoTimingGivesByteIdenticalCsv) {
  ExperimentConfig c;
  c.game = "K3-3";
  c.iterations = 200;
  c.eval_every = 20;
  c.timing = false;
  c.out_dir = fresh_dir("bytes_a").string();
  run_experiment(c);
  const auto a = slurp(fs::path(c.out_dir) / "K3-3_cfr-jr.csv");
  c.out_dir = fresh_dir("bytes_b").string();
  run_experiment(c);
  EXPECT_EQ(a, slurp(fs::path(c.out_dir) / "K3-3_cfr-jr.csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 11);
}

TEST(Experiment, SeedFanOutAndAggregate) {
  ExperimentConfig c;
  c.game = "M-fig2";
  c.algorithm = Algorithm::kCfrS;
  c.iterations = 300;
  c.eval_every = 50;
  c.seeds = {1, 2, 3, 4, 5};
  c.workers = 3;
  c.alpha_targets = {0.5, 0.05};
  c.out_dir = fresh_dir("fanout").string();
  const auto r = run_experiment(c);
  ASSERT_EQ(r.cells.size(), 5U);
  ASSERT_EQ(r.aggregate.size(), 2U);
  EXPECT_EQ(r.aggregate[0].cells, 5);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / ("M-fig2_cfr-s_seed" + std::to_string(s) + ".csv")));
  }
  const auto summary = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "summary.json"));
  EXPECT_EQ(summary["cells"].size(), 5U);
  EXPECT_EQ(r.exit_code(), 0);

  // Deterministic algorithms ignore the seed list.
  c.algorithm = Algorithm::kCfrJr;
  EXPECT_EQ(run_experiment(c).cells.size(), 1U);
}

TEST(Experiment, JsonFormatAndZeroSumRatio) {
  ExperimentConfig c;
  c.game = "K3-3";
  c.iterations = 40;
  c.eval_every = 20;
  c.format = "json";
  c.out_dir = fresh_dir("json").string();
  run_experiment(c);
  const auto doc = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "K3-3_cfr-jr.json"));
  ASSERT_EQ(doc["records"].size(), 2U);
  EXPECT_TRUE(doc["records"][0]["sw_ratio"].is_null());
}

TEST(Experiment, TimeLimitCheckpointAndResume) {
  ExperimentConfig c;
  c.game = "K3-3";
  c.iterations = 120;
  c.eval_every = 40;
  c.timing = false;
  c.time_limit_s = 1e-9;
  c.alpha_targets = {1e-9};
  c.out_dir = fresh_dir("resume").string();
  const auto stopped = run_experiment(c);
  ASSERT_TRUE(stopped.cells[0].run.stopped_by_time);
  EXPECT_EQ(stopped.exit_code(), 2);
  const auto ckpt = fs::path(c.out_dir) / "K3-3_cfr-jr.checkpoint.json";
  ASSERT_TRUE(fs::exists(ckpt));

  c.time_limit_s = 0.0;
  c.resume = true;
  const auto resumed = run_experiment(c);
  EXPECT_FALSE(resumed.cells[0].run.stopped_by_time);
  EXPECT_FALSE(fs::exists(ckpt));

  c.resume = false;
  c.out_dir = fresh_dir("resume_ref").string();
  const auto whole = run_experiment(c);
  EXPECT_EQ(resumed.cells[0].run.trace.back().iteration, 120);
  EXPECT_EQ(resumed.cells[0].run.trace.back().epsilon, whole.cells[0].run.trace.back().epsilon);
  EXPECT_EQ(resumed.cells[0].run.trace.back().support, whole.cells[0].run.trace.back().support);
}

TEST(Experiment, PersistedInstanceGivesIdenticalTrace) {
  const auto dir = fresh_dir("persist");
  const auto path = (dir / "r23.json").string();
  save_game(make_game("R2-3:seed=7"), path);
  ExperimentConfig a;
  a.game = "R2-3:seed=7";
  a.iterations = 150;
  a.eval_every = 10;
  a.timing = false;
  ExperimentConfig b = a;
  b.game_file = path;
  const auto ra = run_experiment(a), rb = run_experiment(b);
  ASSERT_EQ(ra.cells[0].run.trace.size(), rb.cells[0].run.trace.size());
  for (std::size_t i = 0; i < ra.cells[0].run.trace.size(); ++i) {
    EXPECT_TRUE(ra.cells[0].run.trace[i] == rb.cells[0].run.trace[i]);
  }
}
