// Command-line front end: stream generation, experiment runners and the
// Misra-Gries baseline.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "l2hh/experiments.hpp"
#include "l2hh/misra_gries.hpp"
#include "l2hh/stream_io.hpp"

namespace {

using namespace l2hh;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t trials = 1;
  std::string out;
  std::string format = "json";
  std::string stream_path;
  bool assert_thresholds = false;
  unsigned threads = 1;

  // config overrides
  std::optional<std::uint64_t> n;
  std::optional<std::uint64_t> m;
  std::optional<double> epsilon;

  // generator
  std::string kind;
  double zipf_s = 1.0;
  std::string planted;
  std::string background = "uniform";
  std::string order = "shuffled";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config file");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--trials", c.trials, "number of trials")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output path (stdout when omitted)");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--stream", c.stream_path, "ingest this stream instead of generating");
  app->add_flag("--assert", c.assert_thresholds, "exit 1 when the acceptance threshold fails");
  app->add_option("--threads", c.threads, "trial worker threads")->check(CLI::PositiveNumber);
  app->add_option("--n", c.n, "universe size");
  app->add_option("--m", c.m, "stream length");
  app->add_option("--epsilon", c.epsilon, "heaviness / accuracy parameter");
  app->add_option("--kind", c.kind, "uniform|zipf|planted|single|distinct");
  app->add_option("--zipf-s", c.zipf_s, "zipf exponent");
  app->add_option("--planted", c.planted, "id:freq[,id:freq...]");
  app->add_option("--background", c.background, "background kind for planted streams");
  app->add_option("--order", c.order, "shuffled|adversarial-heavy-last");
}

Config make_config(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : load_config(c.config_path);
  if (c.seed) cfg.master_seed = *c.seed;
  if (c.n) cfg.n = *c.n;
  if (c.m) cfg.m_hint = *c.m;
  if (c.epsilon) cfg.epsilon = *c.epsilon;
  return cfg;
}

std::vector<PlantedItem> parse_planted(const std::string& text) {
  std::vector<PlantedItem> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw UsageError("--planted expects id:freq pairs");
    try {
      out.push_back({std::stoull(part.substr(0, colon)), std::stoull(part.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw UsageError("--planted expects id:freq pairs");
    }
  }
  return out;
}

std::optional<GeneratorSpec> make_generator(const Common& c, const Config& cfg) {
  if (c.kind.empty()) return std::nullopt;
  GeneratorSpec g;
  g.kind = parse_stream_kind(c.kind);
  g.n = cfg.n;
  g.m = cfg.m_hint;
  g.zipf_s = c.zipf_s;
  g.background = parse_stream_kind(c.background);
  g.order = parse_stream_order(c.order);
  g.seed = cfg.master_seed;
  if (!c.planted.empty()) g.planted = parse_planted(c.planted);
  if (g.m == 0) throw UsageError("--m is required with --kind");
  return g;
}

template <class Write>
void emit(const std::string& path, Write write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  write(out);
}

int run_kind(ExperimentKind kind, const Common& c, ExperimentOptions opts, const std::string& checkpoints_out) {
  const Config cfg = make_config(c);
  opts.trials = c.trials;
  opts.threads = c.threads;
  opts.generator = make_generator(c, cfg);
  if (!c.stream_path.empty()) opts.stream = read_stream(c.stream_path);
  if (c.m) opts.m = *c.m;

  const ExperimentReport report = run_experiment(kind, cfg, opts);
  emit(c.out, [&](std::ostream& os) {
    if (c.format == "csv") {
      write_csv(os, report);
    } else {
      os << nlohmann::json(report).dump(2) << '\n';
    }
  });
  if (!checkpoints_out.empty()) {
    emit(checkpoints_out, [&](std::ostream& os) { write_checkpoints_csv(os, report.checkpoints); });
  }
  const Verdict v = assess(report);
  std::cerr << report.kind << ": " << v.detail << (v.pass ? " PASS" : " FAIL") << '\n';
  return c.assert_thresholds && !v.pass ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l2 heavy hitters streaming toolkit"};
  app.require_subcommand(1);

  Common gen_c, hh_c, cs_c, f2_c, ch_c, sp_c, mg_c;
  auto* gen = app.add_subcommand("gen", "generate a synthetic stream");
  add_common(gen, gen_c);

  auto* hh = app.add_subcommand("run-hh", "heavy-hitter detection trials");
  add_common(hh, hh_c);

  auto* cs = app.add_subcommand("run-countsieve", "single heavy-hitter CountSieve trials");
  add_common(cs, cs_c);

  auto* f2 = app.add_subcommand("run-f2", "F2 tracking at every position");
  add_common(f2, f2_c);
  std::uint64_t checkpoint_every = 0;
  std::string checkpoints_out;
  f2->add_option("--checkpoint-every", checkpoint_every, "emit (t, estimate, oracle_f2) every s updates");
  f2->add_option("--checkpoints-out", checkpoints_out, "CSV path for checkpoints");

  auto* ch = app.add_subcommand("run-chaining", "sup_ratio of the Bernoulli process");
  add_common(ch, ch_c);
  std::vector<std::uint64_t> m_values{1000, 10000, 100000};
  std::vector<std::uint64_t> deletion_n;
  std::uint32_t deletion_d = 1;
  ch->add_option("--m-values", m_values, "stream lengths")->delimiter(',');
  ch->add_option("--deletion-n", deletion_n, "universe sizes for the deletion stream")->delimiter(',');
  ch->add_option("--deletion-d", deletion_d, "process dimension on the deletion stream");

  auto* sp = app.add_subcommand("run-space", "measured words per universe size");
  add_common(sp, sp_c);
  std::vector<std::uint64_t> n_values{1ULL << 10, 1ULL << 14, 1ULL << 18};
  sp->add_option("--n-values", n_values, "universe sizes")->delimiter(',');

  auto* mg = app.add_subcommand("baseline-mg", "Misra-Gries counts for a stream");
  add_common(mg, mg_c);
  std::size_t mg_k = 100;
  mg->add_option("--k", mg_k, "number of counters")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      const Config cfg = make_config(gen_c);
      auto g = make_generator(gen_c, cfg);
      if (!g) throw UsageError("gen needs --kind");
      const auto stream = gen_stream(*g);
      if (gen_c.out.empty()) {
        for (ItemId id : stream) std::cout << id << '\n';
      } else {
        write_stream(gen_c.out, stream);
      }
      return 0;
    }
    if (hh->parsed()) return run_kind(ExperimentKind::hh, hh_c, {}, "");
    if (cs->parsed()) return run_kind(ExperimentKind::countsieve, cs_c, {}, "");
    if (f2->parsed()) {
      ExperimentOptions opts;
      opts.checkpoint_every = checkpoint_every;
      return run_kind(ExperimentKind::f2, f2_c, opts, checkpoints_out);
    }
    if (ch->parsed()) {
      ExperimentOptions opts;
      opts.m_values = m_values;
      opts.deletion_n = deletion_n;
      opts.deletion_d = deletion_d;
      return run_kind(ExperimentKind::chaining, ch_c, opts, "");
    }
    if (sp->parsed()) {
      ExperimentOptions opts;
      opts.n_values = n_values;
      return run_kind(ExperimentKind::space, sp_c, opts, "");
    }
    if (mg->parsed()) {
      const Config cfg = make_config(mg_c);
      std::vector<ItemId> stream;
      if (!mg_c.stream_path.empty()) {
        stream = read_stream(mg_c.stream_path);
      } else if (auto g = make_generator(mg_c, cfg)) {
        stream = gen_stream(*g);
      } else {
        throw UsageError("baseline-mg needs --stream or --kind");
      }
      const auto counts = misra_gries(stream, mg_k);
      emit(mg_c.out, [&](std::ostream& os) {
        if (mg_c.format == "csv") {
          os << "id,count\n";
          for (const auto& [id, count] : counts) os << id << ',' << count << '\n';
        } else {
          nlohmann::json items = nlohmann::json::array();
          for (const auto& [id, count] : counts) items.push_back({{"id", id}, {"count", count}});
          os << nlohmann::json{{"k", mg_k}, {"m", stream.size()}, {"items", items}}.dump(2) << '\n';
        }
      });
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const RangeError& e) {
    std::cerr << "range error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
