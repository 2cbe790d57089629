// Command-line front end. Each subcommand is a plain function over an
// argument struct so tests and the acceptance suite can call it directly;
// run() does the argument parsing and maps errors to exit codes.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "taal/meta/maml.h"
#include "taal/meta/synthetic.h"
#include "taal/simulator.h"

namespace taal::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

/// Bad user input: unreadable file, malformed value, failed validation.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IdentifyArgs {
  std::string input;  // path, or "-" for stdin
  std::string method = "both";
  bool gharana_equiv = false;
  bool timing = true;  // false writes elapsed_us as null
};

void cmd_identify(const IdentifyArgs& args, std::ostream& out, std::ostream& err);

struct NoisePoint {
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
};

/// "sub:del:ins" triples.
std::vector<NoisePoint> parse_noise_grid(const std::vector<std::string>& items);

/// p_del in {0, 0.05, 0.1, 0.2, 0.3}, no substitutions or insertions.
std::vector<NoisePoint> default_noise_grid();

struct EvalArgs {
  std::vector<std::string> talas;  // empty: all builtin
  int cycles = 2;
  std::vector<NoisePoint> grid;    // empty: default_noise_grid()
  int trials = 100;
  std::uint64_t seed = 1;
  std::string method = "both";
  bool gharana_equiv = false;
  int threads = 1;
};

struct EvalRow {
  std::string tala;
  NoisePoint noise;
  std::string method;
  double accuracy = 0.0;
  double mean_score = 0.0;  // mean ranking key of the true tala
};

/// Rows ordered by grid point, then tala, then method (nw before ratio).
std::vector<EvalRow> run_eval(const EvalArgs& args);
void cmd_eval(const EvalArgs& args, std::ostream& out);

struct BenchArgs {
  std::vector<int> lengths{240};
  int repeats = 1000;
  int warmup = 10;
};

struct BenchRow {
  std::string method;
  int input_len = 0;
  double mean_us = 0.0;
  double p95_us = 0.0;
};

std::vector<BenchRow> run_bench(const BenchArgs& args);
void cmd_bench(const BenchArgs& args, std::ostream& out);

struct DemoArgs {
  meta::MamlConfig maml;
  meta::SyntheticTaskConfig tasks;
  std::size_t hidden_dim = 32;
  int compare_tasks = 50;
  std::string out_dir;      // curve CSVs are written only when set
  std::string save_params;  // trained phi, when set
};

struct DemoResult {
  meta::TrainResult train;
  meta::InitComparison comparison;
};

/// Flat JSON object of MamlConfig fields applied on top of `base`.
meta::MamlConfig load_maml_config(const std::string& path, meta::MamlConfig base);

DemoResult run_maml_demo(const DemoArgs& args);
void cmd_maml_demo(const DemoArgs& args, std::ostream& out, std::ostream& err);

struct SimulateArgs {
  PerformanceSpec performance;
  NoiseSpec noise;
  std::string onsets_path;  // onset CSV, when set
};

void cmd_simulate(const SimulateArgs& args, std::ostream& out);

struct OnsetEvalArgs {
  std::string reference;
  std::string estimate;
  double collar = 0.050;
};

void cmd_onset_eval(const OnsetEvalArgs& args, std::ostream& out);

void cmd_talas(std::ostream& out);

/// Parses `args` (program name excluded), runs the subcommand and returns
/// the exit code. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace taal::cli
