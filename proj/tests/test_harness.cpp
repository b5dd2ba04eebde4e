#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "l2hh/experiments.hpp"
#include "l2hh/generators.hpp"
#include "l2hh/misra_gries.hpp"
#include "l2hh/stream_io.hpp"

using namespace l2hh;

namespace {

std::map<ItemId, std::uint64_t> histogram(const std::vector<ItemId>& s) {
  std::map<ItemId, std::uint64_t> h;
  for (ItemId x : s) ++h[x];
  return h;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("l2hh_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Generators, SingleKind) {
  GeneratorSpec g;
  g.kind = StreamKind::single;
  g.n = 10;
  g.m = 5;
  g.single_item = 3;
  EXPECT_EQ(gen_stream(g), std::vector<ItemId>(5, 3));
}

TEST(Generators, PlantedFrequenciesExact) {
  GeneratorSpec g;
  g.kind = StreamKind::planted;
  g.n = 100;
  g.m = 1000;
  g.planted = {{7, 300}, {50, 120}};
  g.seed = 4;
  const auto s = gen_stream(g);
  ASSERT_EQ(s.size(), 1000u);
  const auto h = histogram(s);
  EXPECT_EQ(h.at(7), 300u);
  EXPECT_EQ(h.at(50), 120u);
  for (ItemId x : s) EXPECT_LT(x, 100u);
  EXPECT_EQ(s, gen_stream(g));
  g.seed = 5;
  EXPECT_NE(s, gen_stream(g));
}

TEST(Generators, DistinctAndUniform) {
  GeneratorSpec g;
  g.kind = StreamKind::distinct;
  g.n = 50;
  g.m = 50;
  const auto d = gen_stream(g);
  EXPECT_EQ(histogram(d).size(), 50u);
  g.m = 51;
  EXPECT_THROW(gen_stream(g), ParameterError);

  g.kind = StreamKind::uniform;
  g.n = 4;
  g.m = 40000;
  for (const auto& [id, c] : histogram(gen_stream(g))) EXPECT_NEAR(static_cast<double>(c), 10000.0, 400.0) << id;
}

TEST(Generators, ZipfRanksDecrease) {
  GeneratorSpec g;
  g.kind = StreamKind::zipf;
  g.n = 100;
  g.m = 200000;
  g.zipf_s = 1.0;
  const auto h = histogram(gen_stream(g));
  const auto w = zipf_weights(100, 1.0);
  for (ItemId r : {0, 1, 5, 20}) EXPECT_NEAR(static_cast<double>(h.at(r)) / 200000.0, w[r], 0.01);
  EXPECT_GT(h.at(0), h.at(1));
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
}

TEST(Generators, AdversarialOrderPutsHeavyItemsLast) {
  GeneratorSpec g;
  g.kind = StreamKind::planted;
  g.n = 100;
  g.m = 1000;
  g.planted = {{3, 100}, {4, 100}};
  g.order = StreamOrder::adversarial_heavy_last;
  const auto s = gen_stream(g);
  ASSERT_EQ(s.size(), 1000u);
  for (std::size_t i = 0; i < 750; ++i) EXPECT_TRUE(s[i] != 3 && s[i] != 4) << i;
  const auto h = histogram(s);
  EXPECT_EQ(h.at(3), 100u);
  EXPECT_EQ(h.at(4), 100u);
}

TEST(Generators, Errors) {
  GeneratorSpec g;
  g.kind = StreamKind::planted;
  g.n = 10;
  g.m = 100;
  g.planted = {{10, 5}};
  EXPECT_THROW(gen_stream(g), ParameterError);
  g.planted = {{1, 5}, {1, 6}};
  EXPECT_THROW(gen_stream(g), ParameterError);
  g.planted = {{1, 101}};
  EXPECT_THROW(gen_stream(g), ParameterError);
  g.planted = {{1, 30}};
  g.order = StreamOrder::adversarial_heavy_last;
  EXPECT_THROW(gen_stream(g), ParameterError);
  g.kind = StreamKind::uniform;
  EXPECT_THROW(gen_stream(g), ParameterError);
  EXPECT_THROW(parse_stream_kind("gauss"), UsageError);
  EXPECT_THROW(parse_stream_order("random"), UsageError);
  EXPECT_EQ(parse_stream_kind("zipf"), StreamKind::zipf);
  EXPECT_EQ(parse_stream_order("adversarial-heavy-last"), StreamOrder::adversarial_heavy_last);
}

TEST(Generators, PlantedFrequencyHitsFraction) {
  constexpr std::uint64_t n = 4096, m = 500000;
  const std::uint64_t p = planted_frequency_for_fraction(n, m, 3, 1.0, 0.3);
  // recompute E[F2] independently
  double h = 0;
  for (std::uint64_t r = 1; r <= n - 3; ++r) h += 1.0 / static_cast<double>(r);
  const double mb = static_cast<double>(m - 3 * p);
  double bg = 0;
  for (std::uint64_t r = 1; r <= n - 3; ++r) {
    const double w = 1.0 / static_cast<double>(r) / h;
    bg += mb * mb * w * w + mb * w * (1 - w);
  }
  const double f2 = bg + 3.0 * static_cast<double>(p) * p;
  EXPECT_NEAR(static_cast<double>(p) / std::sqrt(f2), 0.3, 1e-4);
  EXPECT_THROW(planted_frequency_for_fraction(n, m, 0, 1.0, 0.3), ParameterError);
  EXPECT_THROW(planted_frequency_for_fraction(n, m, 20, 1.0, 0.3), ParameterError);
}

TEST(Generators, TrialSeedsDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 1000; ++t) EXPECT_TRUE(seen.insert(trial_seed(42, t)).second);
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(MisraGries, Examples) {
  EXPECT_EQ(misra_gries(std::vector<ItemId>{1, 1, 1, 2}, 1), (std::map<ItemId, std::uint64_t>{{1, 2}}));
  EXPECT_EQ(misra_gries(std::vector<ItemId>{1, 2, 3}, 2), (std::map<ItemId, std::uint64_t>{}));
  EXPECT_EQ(misra_gries(std::vector<ItemId>{}, 3).size(), 0u);
  EXPECT_THROW(MisraGriesState(0), ParameterError);
}

TEST(MisraGries, UndercountBoundedByMOverKPlusOne) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t k = 1 + rng() % 20;
    GeneratorSpec g;
    g.kind = StreamKind::zipf;
    g.n = 200;
    g.m = 3000;
    g.seed = rep;
    const auto s = gen_stream(g);
    const auto truth = histogram(s);
    const auto got = misra_gries(s, k);
    EXPECT_LE(got.size(), k);
    const double slack = static_cast<double>(s.size()) / static_cast<double>(k + 1);
    for (const auto& [id, f] : truth) {
      const auto it = got.find(id);
      const double est = it == got.end() ? 0.0 : static_cast<double>(it->second);
      ASSERT_LE(est, static_cast<double>(f));
      ASSERT_GE(est, static_cast<double>(f) - slack);
    }
  }
  MisraGriesState st(5);
  SpaceMeter m;
  st.account(m, "mg");
  EXPECT_EQ(m.total().words, 10u);
}

TEST(StreamIo, TextAndBinaryRoundTrip) {
  const std::vector<ItemId> s{0, 5, 1ULL << 40, 7, ~0ULL};
  for (const char* name : {"s.txt", "s.bin"}) {
    const auto p = temp_path(name);
    write_stream(p, s);
    EXPECT_EQ(read_stream(p), s) << name;
    std::filesystem::remove(p);
  }
  EXPECT_EQ(std::filesystem::path("x.bin").extension(), ".bin");
}

TEST(StreamIo, TextParsing) {
  std::istringstream in("# header\n3\n\n  4 \n# c\n5\r\n");
  EXPECT_EQ(parse_text_stream(in), (std::vector<ItemId>{3, 4, 5}));
  std::istringstream bad("3\nfoo\n");
  EXPECT_THROW(parse_text_stream(bad), UsageError);
  std::istringstream neg("-1\n");
  EXPECT_THROW(parse_text_stream(neg), UsageError);
  std::istringstream trailing("12x\n");
  EXPECT_THROW(parse_text_stream(trailing), UsageError);
  EXPECT_THROW(read_stream("/nonexistent/dir/s.txt"), UsageError);

  const auto p = temp_path("odd.bin");
  std::ofstream(p, std::ios::binary) << "abc";
  EXPECT_THROW(read_stream(p), UsageError);
  std::filesystem::remove(p);
}

TEST(StreamIo, LoadConfig) {
  const auto p = temp_path("cfg.json");
  std::ofstream(p) << R"({"n": 2048, "epsilon": 0.1, "master_seed": 9})";
  const Config c = load_config(p);
  EXPECT_EQ(c.n, 2048u);
  EXPECT_EQ(c.master_seed, 9u);
  std::ofstream(p) << "{not json";
  EXPECT_THROW(load_config(p), UsageError);
  std::filesystem::remove(p);
  EXPECT_THROW(load_config(p), UsageError);
}

TEST(Experiments, KindParsing) {
  EXPECT_EQ(parse_experiment_kind("hh"), ExperimentKind::hh);
  EXPECT_EQ(to_string(ExperimentKind::chaining), "chaining");
  EXPECT_THROW(parse_experiment_kind("nope"), UsageError);
}

TEST(Experiments, RunIndexedKeepsOrderAcrossThreads) {
  const auto one = run_indexed(100, 1, [](std::uint64_t i) { return i * i; });
  const auto four = run_indexed(100, 4, [](std::uint64_t i) { return i * i; });
  EXPECT_EQ(one, four);
  EXPECT_THROW(run_indexed(10, 3,
                           [](std::uint64_t i) -> int {
                             if (i == 7) throw ParameterError("x");
                             return 0;
                           }),
               ParameterError);
}

TEST(Experiments, CountsieveReportShapeAndDeterminism) {
  Config c;
  c.n = 1024;
  c.master_seed = 3;
  ExperimentOptions o;
  o.trials = 3;
  const auto a = run_experiment(ExperimentKind::countsieve, c, o);
  o.threads = 2;
  const auto b = run_experiment(ExperimentKind::countsieve, c, o);
  ASSERT_EQ(a.outcomes.size(), 3u);
  EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
  EXPECT_EQ(a.kind, "countsieve");
  EXPECT_EQ(a.config.L, c.resolve().L);
  EXPECT_GT(a.space.total().words, 0u);
  for (const auto& out : a.outcomes) {
    EXPECT_EQ(out.seed, trial_seed(3, out.trial));
    EXPECT_TRUE(out.metrics.count("rounds"));
  }
  std::ostringstream csv;
  write_csv(csv, a);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text.rfind("trial,seed,success,", 0), 0u);
}

TEST(Experiments, HhOnSuppliedStream) {
  Config c;
  c.n = 256;
  c.epsilon = 0.5;
  ExperimentOptions o;
  o.trials = 2;
  o.stream = std::vector<ItemId>(500, 9);
  const auto r = run_experiment(ExperimentKind::hh, c, o);
  EXPECT_EQ(r.successes, 2u);
  EXPECT_EQ(r.aggregates.at("linf_rate"), 1.0);
  for (const auto& out : r.outcomes) EXPECT_EQ(out.metrics.at("reported"), 1.0);
  EXPECT_TRUE(assess(r).pass);
}

TEST(Experiments, F2CheckpointsAndCsv) {
  Config c;
  c.n = 64;
  c.epsilon = 0.5;
  ExperimentOptions o;
  o.trials = 2;
  o.m = 200;
  o.checkpoint_every = 50;
  const auto r = run_experiment(ExperimentKind::f2, c, o);
  ASSERT_EQ(r.checkpoints.size(), 4u);
  EXPECT_EQ(r.checkpoints.back().t, 200u);
  EXPECT_TRUE(r.aggregates.count("mean_max_rel_error"));
  std::ostringstream csv;
  write_checkpoints_csv(csv, r.checkpoints);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Experiments, ChainingAndDeletionRows) {
  Config c;
  c.n = 64;
  ExperimentOptions o;
  o.trials = 4;
  o.m_values = {100, 1000};
  o.deletion_n = {16, 64};
  const auto r = run_experiment(ExperimentKind::chaining, c, o);
  ASSERT_EQ(r.chaining.size(), 2u);
  ASSERT_EQ(r.deletion.size(), 2u);
  EXPECT_EQ(r.trials, 8u);
  for (const auto& row : r.chaining) {
    EXPECT_GT(row.mean_sup_ratio, 0.0);
    EXPECT_LE(row.mean_sup_ratio, row.max_sup_ratio);
  }
  const nlohmann::json j = r;
  EXPECT_EQ(j.at("chaining").size(), 2u);
  EXPECT_EQ(j.at("deletion").size(), 2u);
  EXPECT_FALSE(assess_deletion(run_experiment(ExperimentKind::countsieve, Config{}, {})).pass);
}

TEST(Experiments, SpaceRows) {
  Config c;
  ExperimentOptions o;
  o.n_values = {1 << 8, 1 << 10};
  const auto r = run_experiment(ExperimentKind::space, c, o);
  ASSERT_EQ(r.space_rows.size(), 2u);
  EXPECT_DOUBLE_EQ(r.space_rows[0].fit_ratio, 1.0);
  EXPECT_LT(r.space_rows[0].hh_words, r.space_rows[1].hh_words);
  EXPECT_EQ(r.trials, 2u);
}

TEST(Experiments, ZeroTrialsRejected) {
  ExperimentOptions o;
  o.trials = 0;
  EXPECT_THROW(run_experiment(ExperimentKind::hh, Config{}, o), ParameterError);
}
