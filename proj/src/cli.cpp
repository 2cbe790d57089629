#include "taal/cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "taal/alignment.h"
#include "taal/random.h"
#include "taal/ratio_score.h"
#include "taal/stroke_io.h"
#include "taal/transcription.h"

namespace taal::cli {
namespace {

using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

std::string format(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double micros_since(Clock::time_point start) {
  return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

std::vector<std::string> methods_for(const std::string& method) {
  if (method == "nw") return {"nw"};
  if (method == "ratio") return {"ratio"};
  if (method == "both") return {"nw", "ratio"};
  throw InputError("method must be nw, ratio or both");
}

Ranking identify(const std::string& method, std::span<const StrokeId> strokes,
                 const IdentifyOptions& options) {
  return method == "nw" ? identify_tala_nw(strokes, builtin_talas(), options)
                        : identify_tala_ratio(strokes, builtin_talas(), options);
}

ParsedStrokes read_strokes(const std::string& path) {
  if (path == "-") return parse_stroke_text(std::cin);
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_stroke_text(in);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

Json ranking_json(const Ranking& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json j;
    j["tala"] = e.tala;
    j["score"] = e.score;
    j["normalized"] = e.normalized;
    if (r.method == "ratio") j["coverage"] = e.coverage;
    entries.push_back(std::move(j));
  }
  return entries;
}

// ---- eval ----

struct TrialOutcome {
  bool correct[2] = {false, false};
  double score[2] = {0.0, 0.0};
};

double true_tala_score(const Ranking& r, const std::string& tala) {
  for (const auto& e : r.entries) {
    if (e.tala == tala) return e.normalized;
  }
  return 0.0;
}

TrialOutcome run_trial(const TalaDefinition& tala, std::size_t tala_index, const NoisePoint& noise,
                       int trial, const EvalArgs& args, const std::vector<std::string>& methods) {
  // The seed ignores the grid point, so every noise level sees the same
  // offsets and noise streams.
  Rng rng(derive_seed(derive_seed(args.seed, tala_index), static_cast<std::uint64_t>(trial)));
  PerformanceSpec spec{tala.name, args.cycles};
  spec.start_offset = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(tala.matra_count)));
  const auto clean = generate_performance(spec);
  const auto noisy = corrupt(clean, {noise.p_sub, noise.p_del, noise.p_ins, {}, rng()});

  TrialOutcome out;
  if (noisy.strokes.empty()) return out;
  IdentifyOptions options;
  options.gharana_equivalence = args.gharana_equiv;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto ranking = identify(methods[m], noisy.strokes, options);
    out.correct[m] = ranking.top().tala == tala.name;
    out.score[m] = true_tala_score(ranking, tala.name);
  }
  return out;
}

// ---- bench ----

std::vector<StrokeId> bench_input(int length) {
  const auto& tintal = builtin_talas()[0];
  const int cycles = (length + tintal.matra_count - 1) / tintal.matra_count;
  auto perf = generate_performance({tintal.name, cycles});
  perf.strokes.resize(static_cast<std::size_t>(length));
  perf.onset_times.clear();
  return corrupt(perf, {0.1, 0.0, 0.0, {}, 1}).strokes;
}

BenchRow time_method(const std::string& method, const std::vector<StrokeId>& input, const BenchArgs& args) {
  volatile double sink = 0.0;
  for (int i = 0; i < args.warmup; ++i) sink = sink + identify(method, input, {}).top().normalized;
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(args.repeats));
  for (int i = 0; i < args.repeats; ++i) {
    const auto start = Clock::now();
    sink = sink + identify(method, input, {}).top().normalized;
    samples.push_back(micros_since(start));
  }
  BenchRow row{method, static_cast<int>(input.size())};
  row.mean_us = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(samples.size())));
  row.p95_us = samples[std::max<std::size_t>(rank, 1) - 1];
  return row;
}

// ---- maml-demo ----

void write_train_curve(const std::string& path, const std::vector<double>& curve) {
  auto out = open_output(path);
  out << "epoch,mean_query_loss\n";
  for (std::size_t e = 0; e < curve.size(); ++e) out << e << ',' << format("%.10g", curve[e]) << '\n';
}

void write_adapt_curve(const std::string& path, const meta::InitComparison& cmp) {
  auto out = open_output(path);
  out << "init,step,support_loss,query_loss\n";
  auto rows = [&out](const char* init, const std::vector<meta::TraceRow>& trace) {
    for (const auto& r : trace) {
      out << init << ',' << r.step << ',' << format("%.10g", r.support_loss) << ','
          << format("%.10g", r.query_loss) << '\n';
    }
  };
  rows("meta", cmp.meta_trace);
  rows("random", cmp.random_trace);
}

double mean_of(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  if (end <= begin) return 0.0;
  return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(begin),
                         v.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

Json maml_config_json(const meta::MamlConfig& c) {
  Json j;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["inner_steps"] = c.inner_steps;
  j["epochs"] = c.epochs;
  j["test_iterations"] = c.test_iterations;
  j["support_size"] = c.support_size;
  j["query_size"] = c.query_size;
  j["tasks_per_batch"] = c.tasks_per_batch;
  j["order"] = meta::to_string(c.order);
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

Json task_config_json(const meta::SyntheticTaskConfig& c) {
  Json j;
  j["feature_dim"] = c.feature_dim;
  j["classes"] = c.classes;
  j["frames_per_stroke"] = c.frames_per_stroke;
  j["decay_frames"] = c.decay_frames;
  j["domain_shift"] = c.domain_shift;
  j["noise"] = c.noise;
  j["train_tasks"] = c.train_tasks;
  j["seed"] = c.seed;
  return j;
}

OnsetAnnotation read_onsets(const std::string& path, Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return read_onset_csv(in, vocab);
  } catch (const std::runtime_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

Json pr_json(const PrecisionRecall& pr) {
  Json j;
  j["precision"] = pr.precision;
  j["recall"] = pr.recall;
  j["f1"] = pr.f1;
  j["matches"] = pr.matches;
  j["reference_count"] = pr.reference_count;
  j["estimate_count"] = pr.estimate_count;
  return j;
}

}  // namespace

void cmd_identify(const IdentifyArgs& args, std::ostream& out, std::ostream& err) {
  const auto methods = methods_for(args.method);
  const auto parsed = read_strokes(args.input);
  if (parsed.sequence.strokes.empty()) throw InputError("empty sequence");
  if (parsed.unknown_count > 0) {
    err << "warning: " << parsed.unknown_count << " unknown token(s) counted as out-of-vocabulary:";
    for (const auto& t : parsed.unknown_tokens) err << ' ' << t;
    err << '\n';
  }

  IdentifyOptions options;
  options.gharana_equivalence = args.gharana_equiv;
  std::vector<Json> docs;
  for (const auto& method : methods) {
    const auto start = Clock::now();
    const auto ranking = identify(method, parsed.sequence.strokes, options);
    const double elapsed = micros_since(start);

    Json doc;
    doc["input"] = args.input;
    doc["method"] = method;
    doc["ranking"] = ranking_json(ranking);
    doc["elapsed_us"] = args.timing ? Json(static_cast<std::int64_t>(std::llround(elapsed))) : Json(nullptr);
    Json flags;
    flags["low_confidence"] = ranking.low_confidence;
    flags["short_input"] = ranking.short_input;
    flags["gharana_equiv"] = args.gharana_equiv;
    flags["strokes"] = parsed.sequence.size();
    flags["unknown_count"] = parsed.unknown_count;
    flags["unknown_tokens"] = parsed.unknown_tokens;
    doc["flags"] = std::move(flags);
    docs.push_back(std::move(doc));
  }

  if (docs.size() == 1) {
    out << docs.front().dump(2) << '\n';
    return;
  }
  Json both;
  both["input"] = args.input;
  both["method"] = "both";
  both["results"] = docs;
  out << both.dump(2) << '\n';
}

std::vector<NoisePoint> parse_noise_grid(const std::vector<std::string>& items) {
  std::vector<NoisePoint> grid;
  for (const auto& item : items) {
    double v[3];
    std::size_t pos = 0;
    for (int k = 0; k < 3; ++k) {
      const auto end = k < 2 ? item.find(':', pos) : item.size();
      if (end == std::string::npos) throw InputError("noise point '" + item + "' is not sub:del:ins");
      const auto field = item.substr(pos, end - pos);
      try {
        std::size_t used = 0;
        v[k] = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::logic_error&) {
        throw InputError("noise point '" + item + "' has a bad number");
      }
      pos = end + 1;
    }
    NoiseSpec spec{v[0], v[1], v[2], {}, 0};
    try {
      spec.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError("noise point '" + item + "': " + e.what());
    }
    grid.push_back({v[0], v[1], v[2]});
  }
  return grid;
}

std::vector<NoisePoint> default_noise_grid() {
  return {{0.0, 0.0, 0.0}, {0.0, 0.05, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.2, 0.0}, {0.0, 0.3, 0.0}};
}

std::vector<EvalRow> run_eval(const EvalArgs& args) {
  if (args.trials < 1) throw InputError("trials must be >= 1");
  if (args.cycles < 1) throw InputError("cycles must be >= 1");
  if (args.threads < 1) throw InputError("threads must be >= 1");
  const auto methods = methods_for(args.method);
  const auto grid = args.grid.empty() ? default_noise_grid() : args.grid;
  for (const auto& g : grid) NoiseSpec{g.p_sub, g.p_del, g.p_ins, {}, 0}.validate();

  const auto& all = builtin_talas();
  std::vector<std::size_t> talas;
  if (args.talas.empty()) {
    for (std::size_t i = 0; i < all.size(); ++i) talas.push_back(i);
  } else {
    for (const auto& name : args.talas) {
      const auto* t = find_tala(name);
      if (t == nullptr) throw InputError("unknown tala '" + name + "'");
      talas.push_back(static_cast<std::size_t>(t - all.data()));
    }
  }

  const auto trials = static_cast<std::size_t>(args.trials);
  const std::size_t jobs = grid.size() * talas.size() * trials;
  std::vector<TrialOutcome> outcomes(jobs);
  auto work = [&](std::size_t job) {
    const std::size_t trial = job % trials;
    const std::size_t t = (job / trials) % talas.size();
    const std::size_t g = job / (trials * talas.size());
    outcomes[job] = run_trial(all[talas[t]], talas[t], grid[g], static_cast<int>(trial), args, methods);
  };

  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(args.threads), jobs);
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) work(j);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t j = w; j < jobs; j += workers) work(j);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Aggregation walks the outcomes in job order regardless of threading.
  std::vector<EvalRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t t = 0; t < talas.size(); ++t) {
      const std::size_t base = (g * talas.size() + t) * trials;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        int correct = 0;
        double score = 0.0;
        for (std::size_t k = 0; k < trials; ++k) {
          correct += outcomes[base + k].correct[m];
          score += outcomes[base + k].score[m];
        }
        rows.push_back({all[talas[t]].name, grid[g], methods[m],
                        static_cast<double>(correct) / static_cast<double>(trials),
                        score / static_cast<double>(trials)});
      }
    }
  }
  return rows;
}

void cmd_eval(const EvalArgs& args, std::ostream& out) {
  const auto rows = run_eval(args);
  out << "tala,p_sub,p_del,p_ins,method,accuracy,mean_score\n";
  for (const auto& r : rows) {
    out << r.tala << ',' << format("%g", r.noise.p_sub) << ',' << format("%g", r.noise.p_del) << ','
        << format("%g", r.noise.p_ins) << ',' << r.method << ',' << format("%.4f", r.accuracy) << ','
        << format("%.6f", r.mean_score) << '\n';
  }
}

std::vector<BenchRow> run_bench(const BenchArgs& args) {
  if (args.repeats < 0 || args.warmup < 0) throw InputError("repeats and warmup must be >= 0");
  std::vector<BenchRow> rows;
  if (args.repeats == 0) return rows;
  for (int n : args.lengths) {
    if (n < 1) throw InputError("input length must be >= 1");
    const auto input = bench_input(n);
    for (const char* method : {"nw", "ratio"}) rows.push_back(time_method(method, input, args));
  }
  return rows;
}

void cmd_bench(const BenchArgs& args, std::ostream& out) {
  const auto rows = run_bench(args);
  out << "method,input_len,mean_us,p95_us\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.input_len << ',' << format("%.3f", r.mean_us) << ','
        << format("%.3f", r.p95_us) << '\n';
  }
}

meta::MamlConfig load_maml_config(const std::string& path, meta::MamlConfig cfg) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw InputError(path + ": config must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    auto number = [&]() {
      if (!value.is_number()) throw InputError(path + ": '" + key + "' must be a number");
      return value.get<double>();
    };
    auto integer = [&]() {
      if (!value.is_number_integer()) throw InputError(path + ": '" + key + "' must be an integer");
      return value.get<std::int64_t>();
    };
    auto as_int = [&]() { return static_cast<int>(integer()); };
    if (key == "alpha") {
      cfg.alpha = number();
    } else if (key == "beta") {
      cfg.beta = number();
    } else if (key == "inner_steps") {
      cfg.inner_steps = as_int();
    } else if (key == "epochs") {
      cfg.epochs = as_int();
    } else if (key == "test_iterations") {
      cfg.test_iterations = as_int();
    } else if (key == "support_size") {
      cfg.support_size = as_int();
    } else if (key == "query_size") {
      cfg.query_size = as_int();
    } else if (key == "tasks_per_batch") {
      cfg.tasks_per_batch = as_int();
    } else if (key == "threads") {
      cfg.threads = as_int();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) throw InputError(path + ": 'seed' must be a non-negative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "order") {
      if (!value.is_string()) throw InputError(path + ": 'order' must be a string");
      cfg.order = meta::parse_meta_order(value.get<std::string>());
    } else {
      throw InputError(path + ": unknown config key '" + key + "'");
    }
  }
  return cfg;
}

DemoResult run_maml_demo(const DemoArgs& args) {
  args.maml.validate();
  if (args.compare_tasks < 1) throw InputError("compare tasks must be >= 1");
  if (args.hidden_dim < 1) throw InputError("hidden dim must be >= 1");
  meta::SyntheticTaskSource source(args.tasks, args.maml.support_size, args.maml.query_size);
  auto initial = meta::SurrogateModel::create(args.tasks.feature_dim, args.hidden_dim,
                                              args.tasks.task_classes(), args.maml.seed);
  DemoResult result{meta::meta_train(std::move(initial), source, args.maml), {}};
  result.comparison = meta::compare_initializations(
      result.train.model, [&source](std::size_t j) { return source.unseen_task(j); }, args.compare_tasks,
      args.maml);
  return result;
}

void cmd_maml_demo(const DemoArgs& args, std::ostream& out, std::ostream& err) {
  const auto start = Clock::now();
  const auto result = run_maml_demo(args);
  err << "maml-demo finished in " << format("%.2f", micros_since(start) / 1e6) << " s\n";

  const auto& curve = result.train.epoch_query_loss;
  const auto& cmp = result.comparison;
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const std::filesystem::path dir(args.out_dir);
    write_train_curve((dir / "meta_train_curve.csv").string(), curve);
    write_adapt_curve((dir / "meta_test_curve.csv").string(), cmp);
  }
  if (!args.save_params.empty()) {
    auto file = open_output(args.save_params);
    meta::save_params(file, result.train.model.phi());
  }

  Json summary;
  summary["config"] = maml_config_json(args.maml);
  summary["config"]["hidden_dim"] = args.hidden_dim;
  summary["config"]["tasks"] = task_config_json(args.tasks);

  Json train;
  train["epochs"] = curve.size();
  if (curve.empty()) {
    train["first_epoch_query_loss"] = nullptr;
    train["last_epoch_query_loss"] = nullptr;
  } else {
    const std::size_t window = std::min<std::size_t>(10, curve.size());
    train["first_epoch_query_loss"] = curve.front();
    train["last_epoch_query_loss"] = curve.back();
    train["first10_mean_query_loss"] = mean_of(curve, 0, window);
    train["last10_mean_query_loss"] = mean_of(curve, curve.size() - window, curve.size());
  }
  summary["train"] = std::move(train);

  Json test;
  test["tasks"] = cmp.tasks;
  test["meta_wins"] = cmp.wins;
  test["win_rate"] = cmp.win_rate();
  test["meta_mean_query_loss"] = mean_of(cmp.meta_query_loss, 0, cmp.meta_query_loss.size());
  test["random_mean_query_loss"] = mean_of(cmp.random_query_loss, 0, cmp.random_query_loss.size());
  test["meta_mean_query_accuracy"] = mean_of(cmp.meta_query_accuracy, 0, cmp.meta_query_accuracy.size());
  test["random_mean_query_accuracy"] =
      mean_of(cmp.random_query_accuracy, 0, cmp.random_query_accuracy.size());
  summary["test"] = std::move(test);

  summary["theta1_checksum"] = hex64(meta::checksum(result.train.model.theta1().parameters()));
  summary["phi_checksum"] = hex64(meta::checksum(result.train.model.phi().values));
  out << summary.dump(2) << '\n';
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const auto clean = generate_performance(args.performance);
  const auto seq = corrupt(clean, args.noise);
  const auto* tala = find_tala(args.performance.tala);
  const auto& p = args.performance;
  const auto& n = args.noise;
  std::vector<std::string> comments{
      tala->name + ", " + std::to_string(p.cycles) + " cycle(s), start offset " +
          std::to_string(p.start_offset) + ", " + format("%g", p.tempo_bpm) + " bpm" +
          (p.gharana_variant ? ", gharana variant" : ""),
      "noise sub=" + format("%g", n.p_sub) + " del=" + format("%g", n.p_del) + " ins=" + format("%g", n.p_ins) +
          " seed=" + std::to_string(n.seed)};
  write_stroke_text(out, seq, Vocabulary::standard(), tala->matra_count, comments);

  if (!args.onsets_path.empty()) {
    OnsetAnnotation onsets;
    for (std::size_t i = 0; i < seq.size(); ++i) onsets.events.push_back({seq.onset_times[i], seq.strokes[i]});
    auto file = open_output(args.onsets_path);
    write_onset_csv(file, onsets, Vocabulary::standard());
  }
}

void cmd_onset_eval(const OnsetEvalArgs& args, std::ostream& out) {
  if (!(args.collar > 0.0)) throw InputError("collar must be positive");
  Vocabulary vocab = Vocabulary::standard();
  const auto ref = read_onsets(args.reference, vocab);
  const auto est = read_onsets(args.estimate, vocab);
  const auto scores = onset_f1(ref, est, args.collar);

  Json doc;
  doc["collar"] = args.collar;
  doc["average"] = pr_json(scores.average);
  doc["weighted_f1"] = scores.weighted_f1;
  Json classes = Json::array();
  for (const auto& [label, pr] : scores.per_class) {
    Json j;
    j["label"] = vocab.name(label);
    j.update(pr_json(pr));
    classes.push_back(std::move(j));
  }
  doc["per_class"] = std::move(classes);
  out << doc.dump(2) << '\n';
}

void cmd_talas(std::ostream& out) { out << talas_to_json(builtin_talas()) << '\n'; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tala identification from tabla stroke sequences, onset evaluation and few-shot stroke-model "
               "meta-learning on synthetic tasks.",
               "taal"};
  app.require_subcommand(1);

  IdentifyArgs identify_args;
  bool no_timing = false;
  auto* identify_cmd = app.add_subcommand("identify", "Rank the builtin talas for a stroke sequence file");
  identify_cmd->add_option("input", identify_args.input, "Stroke text file, or - for stdin")->required();
  identify_cmd->add_option("--method", identify_args.method, "nw, ratio or both")
      ->check(CLI::IsMember({"nw", "ratio", "both"}))
      ->capture_default_str();
  identify_cmd->add_flag("--gharana-equiv", identify_args.gharana_equiv,
                         "Read gharana variant strokes as their canonical form");
  identify_cmd->add_flag("--no-timing", no_timing, "Write elapsed_us as null (reproducible output)");

  EvalArgs eval_args;
  std::vector<std::string> grid_items;
  auto* eval_cmd = app.add_subcommand("eval", "Identification accuracy over a noise grid");
  eval_cmd->add_option("--talas", eval_args.talas, "Talas to evaluate (default: all)")->delimiter(',');
  eval_cmd->add_option("--cycles", eval_args.cycles, "Cycles per synthetic performance")->capture_default_str();
  eval_cmd->add_option("--noise-grid", grid_items, "sub:del:ins points (default: p_del sweep 0..0.3)")
      ->delimiter(',');
  eval_cmd->add_option("--trials", eval_args.trials, "Trials per grid point and tala")->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed)->capture_default_str();
  eval_cmd->add_option("--method", eval_args.method, "nw, ratio or both")
      ->check(CLI::IsMember({"nw", "ratio", "both"}))
      ->capture_default_str();
  eval_cmd->add_flag("--gharana-equiv", eval_args.gharana_equiv);
  eval_cmd->add_option("--threads", eval_args.threads)->capture_default_str();

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "Time NW against ratio identification");
  bench_cmd->add_option("--length-strokes", bench_args.lengths, "Input lengths")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--repeats", bench_args.repeats)->capture_default_str();
  bench_cmd->add_option("--warmup", bench_args.warmup)->capture_default_str();

  DemoArgs demo_args;
  meta::MamlConfig inline_cfg;
  std::string config_path, order_text = "second_order";
  auto* demo_cmd = app.add_subcommand("maml-demo", "Meta-train on synthetic tasks, compare against random init");
  demo_cmd->add_option("--config", config_path, "Flat JSON of MAML settings; flags override it");
  std::vector<CLI::Option*> maml_flags{
      demo_cmd->add_option("--alpha", inline_cfg.alpha, "Inner learning rate")->capture_default_str(),
      demo_cmd->add_option("--beta", inline_cfg.beta, "Meta learning rate")->capture_default_str(),
      demo_cmd->add_option("--inner-steps", inline_cfg.inner_steps)->capture_default_str(),
      demo_cmd->add_option("--epochs", inline_cfg.epochs)->capture_default_str(),
      demo_cmd->add_option("--test-iterations", inline_cfg.test_iterations)->capture_default_str(),
      demo_cmd->add_option("--support-size", inline_cfg.support_size)->capture_default_str(),
      demo_cmd->add_option("--query-size", inline_cfg.query_size)->capture_default_str(),
      demo_cmd->add_option("--tasks-per-batch", inline_cfg.tasks_per_batch)->capture_default_str(),
      demo_cmd->add_option("--order", order_text, "second_order or first_order")->capture_default_str(),
      demo_cmd->add_option("--seed", inline_cfg.seed)->capture_default_str(),
      demo_cmd->add_option("--threads", inline_cfg.threads)->capture_default_str(),
  };
  demo_cmd->add_option("--compare-tasks", demo_args.compare_tasks, "Unseen tasks in the comparison")
      ->capture_default_str();
  demo_cmd->add_option("--hidden-dim", demo_args.hidden_dim)->capture_default_str();
  demo_cmd->add_option("--feature-dim", demo_args.tasks.feature_dim)->capture_default_str();
  demo_cmd->add_option("--classes", demo_args.tasks.classes)->capture_default_str();
  demo_cmd->add_option("--task-noise", demo_args.tasks.noise)->capture_default_str();
  demo_cmd->add_option("--domain-shift", demo_args.tasks.domain_shift)->capture_default_str();
  demo_cmd->add_option("--train-tasks", demo_args.tasks.train_tasks)->capture_default_str();
  demo_cmd->add_option("--task-seed", demo_args.tasks.seed)->capture_default_str();
  demo_cmd->add_option("--out-dir", demo_args.out_dir, "Directory for the curve CSVs");
  demo_cmd->add_option("--save-params", demo_args.save_params, "Write the trained phi here");

  SimulateArgs sim_args;
  sim_args.performance.tala = "Tintal";
  auto* sim_cmd = app.add_subcommand("simulate", "Write a synthetic (optionally corrupted) performance");
  sim_cmd->add_option("--tala", sim_args.performance.tala)->capture_default_str();
  sim_cmd->add_option("--cycles", sim_args.performance.cycles)->capture_default_str();
  sim_cmd->add_option("--tempo", sim_args.performance.tempo_bpm, "Matras per minute")->capture_default_str();
  sim_cmd->add_option("--offset", sim_args.performance.start_offset, "Starting matra")->capture_default_str();
  sim_cmd->add_flag("--variant", sim_args.performance.gharana_variant, "Use the gharana variant theka");
  sim_cmd->add_option("--p-sub", sim_args.noise.p_sub)->capture_default_str();
  sim_cmd->add_option("--p-del", sim_args.noise.p_del)->capture_default_str();
  sim_cmd->add_option("--p-ins", sim_args.noise.p_ins)->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.noise.seed)->capture_default_str();
  sim_cmd->add_option("--onsets", sim_args.onsets_path, "Also write an onset CSV");

  OnsetEvalArgs onset_args;
  auto* onset_cmd = app.add_subcommand("onset-eval", "Per-class onset precision/recall/F1");
  onset_cmd->add_option("reference", onset_args.reference, "Reference onset CSV")->required();
  onset_cmd->add_option("estimate", onset_args.estimate, "Estimated onset CSV")->required();
  onset_cmd->add_option("--collar", onset_args.collar, "Tolerance in seconds")->capture_default_str();

  auto* talas_cmd = app.add_subcommand("talas", "Print the builtin tala definitions as JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*identify_cmd) {
      identify_args.timing = !no_timing;
      cmd_identify(identify_args, out, err);
    } else if (*eval_cmd) {
      eval_args.grid = parse_noise_grid(grid_items);
      cmd_eval(eval_args, out);
    } else if (*bench_cmd) {
      cmd_bench(bench_args, out);
    } else if (*demo_cmd) {
      demo_args.maml = config_path.empty() ? meta::MamlConfig{} : load_maml_config(config_path, {});
      auto& m = demo_args.maml;
      const auto given = [](const CLI::Option* o) { return o->count() > 0; };
      if (given(maml_flags[0])) m.alpha = inline_cfg.alpha;
      if (given(maml_flags[1])) m.beta = inline_cfg.beta;
      if (given(maml_flags[2])) m.inner_steps = inline_cfg.inner_steps;
      if (given(maml_flags[3])) m.epochs = inline_cfg.epochs;
      if (given(maml_flags[4])) m.test_iterations = inline_cfg.test_iterations;
      if (given(maml_flags[5])) m.support_size = inline_cfg.support_size;
      if (given(maml_flags[6])) m.query_size = inline_cfg.query_size;
      if (given(maml_flags[7])) m.tasks_per_batch = inline_cfg.tasks_per_batch;
      if (given(maml_flags[8])) m.order = meta::parse_meta_order(order_text);
      if (given(maml_flags[9])) m.seed = inline_cfg.seed;
      if (given(maml_flags[10])) m.threads = inline_cfg.threads;
      cmd_maml_demo(demo_args, out, err);
    } else if (*sim_cmd) {
      cmd_simulate(sim_args, out);
    } else if (*onset_cmd) {
      cmd_onset_eval(onset_args, out);
    } else if (*talas_cmd) {
      cmd_talas(out);
    }
  } catch (const InputError& e) {
    err << "taal: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const meta::AdaptationDiverged& e) {
    err << "taal: error: " << e.what() << " at inner step " << e.step() << "; try a smaller alpha\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "taal: error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "taal: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace taal::cli
