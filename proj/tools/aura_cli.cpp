#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aura/aura.hpp"

namespace {

int run_bench(const std::string& subject, const std::string& sweep,
              const std::string& device, std::size_t trials,
              std::size_t warmup, std::uint64_t seed,
              const std::string& out_path) {
  aura::bench::SweepSpec spec;
  spec.subject = subject == "auralizer" ? aura::bench::Subject::auralizer
                                        : aura::bench::Subject::convolver;
  if (sweep == "block-size")
    spec.parameter = aura::bench::SweptParameter::block_size;
  else if (sweep == "filter-length")
    spec.parameter = aura::bench::SweptParameter::filter_length_s;
  else if (sweep == "channels")
    spec.parameter = aura::bench::SweptParameter::channels;
  else
    spec.parameter = aura::bench::SweptParameter::fc_length_s;
  spec.values = aura::bench::default_sweep_values(spec.parameter);
  spec.backend = device;
  spec.trials = trials;
  spec.warmup_trials = warmup;
  spec.rng_seed = seed;

  const auto records = aura::bench::run_sweep(spec);
  aura::bench::emit_csv(records, out_path);
  std::cout << "wrote " << records.size() << " records to " << out_path
            << "\n";
  for (const auto& r : records)
    std::cout << "  " << r.parameter << "=" << r.value << "  mean "
              << r.mean_s * 1e3 << " ms  budget " << r.budget_s * 1e3
              << " ms  " << (r.realtime ? "real-time" : "over budget")
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "aura: multichannel auralization engine built on uniform partitioned "
      "convolution with integrated acoustic feedback cancellation"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand(
      "bench", "Time single-block processing across a parameter sweep");
  std::string subject = "convolver";
  std::string sweep = "block-size";
  std::string device = "reference";
  std::size_t trials = 10000;
  std::size_t warmup = 100;
  std::uint64_t seed = 0;
  std::string out_path = "bench.csv";
  bench->add_option("--subject", subject, "convolver or auralizer")
      ->check(CLI::IsMember({"convolver", "auralizer"}));
  bench->add_option("--sweep", sweep, "parameter to vary")
      ->check(CLI::IsMember(
          {"block-size", "filter-length", "channels", "fc-length"}));
  bench->add_option("--device", device,
                    "reference, parallel or accelerator (cpu/gpu aliases)");
  bench->add_option("--trials", trials, "timed calls per configuration");
  bench->add_option("--warmup", warmup, "untimed warmup calls");
  bench->add_option("--seed", seed, "workload RNG seed");
  bench->add_option("--out", out_path, "output CSV path");

  // process
  auto* process = app.add_subcommand(
      "process", "Filter a mono WAV file through the engine");
  aura::io::ProcessOptions popts;
  std::string fc_path;
  process->add_option("--in", popts.input, "mono float32 WAV input")
      ->required();
  process->add_option("--filters", popts.synth_filters,
                      "synthesis filter file (.wav or raw+sidecar)")
      ->required();
  process->add_option("--fc-filters", fc_path,
                      "feedback-cancellation filter file; enables the "
                      "auralization pipeline");
  process->add_option("--block-size", popts.block_size, "block size n_x");
  process->add_option("--device", popts.device, "execution backend");
  process->add_option("--gain", popts.input_gain, "input gain");
  process->add_option("--out", popts.output, "output WAV path")->required();

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Run the oracle-equivalence and closed-loop suites");
  std::string grid = "full";
  std::string verify_device = "reference";
  verify->add_option("--grid", grid, "small or full")
      ->check(CLI::IsMember({"small", "full"}));
  verify->add_option("--device", verify_device, "execution backend");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (bench->parsed())
      return run_bench(subject, sweep, device, trials, warmup, seed, out_path);
    if (process->parsed()) {
      if (!fc_path.empty()) popts.fc_filters = fc_path;
      aura::io::process_file(popts);
      std::cout << "wrote " << popts.output.string() << "\n";
      return 0;
    }
    if (verify->parsed()) {
      aura::verify::Options vopts;
      vopts.grid = grid == "small" ? aura::verify::Grid::small
                                   : aura::verify::Grid::full;
      vopts.device = verify_device;
      return aura::verify::run(vopts, std::cout) ? 0 : 1;
    }
  } catch (const aura::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
