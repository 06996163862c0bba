#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "schro/parallel.hpp"

namespace {

using schro::cli::RunConfig;

template <class T>
void set_if(CLI::Option* opt, std::optional<T>& dst, const T& value) {
  if (opt->count() > 0) dst = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the free Schrodinger equation"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out, config_path;
  unsigned threads = 0;
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed");
  auto* out_opt = app.add_option("--out", out, "output directory (run) or output file (other commands)");
  app.add_option("--config", config_path, "key=value config file; command-line flags win")->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", threads, "worker threads, 0 = hardware concurrency");

  auto* run = app.add_subcommand("run", "run a named experiment");
  run->fallthrough();
  std::string experiment;
  std::vector<double> R, sigma;
  std::vector<int> D;
  int trials = 0;
  double M = 1, K = 16, epsilon = 0, delta = 0, E = 0.5, spacing = 0.75;
  bool override_delta = false;
  auto* exp_opt = run->add_option("experiment", experiment, "experiment name");
  auto* R_opt = run->add_option("--R", R, "scales R (comma separated)")->delimiter(',');
  auto* sigma_opt = run->add_option("--sigma", sigma, "packet counts sigma")->delimiter(',');
  auto* D_opt = run->add_option("--D", D, "partition degrees D")->delimiter(',');
  auto* trials_opt = run->add_option("--trials", trials, "trials per scale");
  auto* M_opt = run->add_option("--M", M, "rescaling factor M");
  auto* K_opt = run->add_option("--K", K, "broadness parameter K");
  auto* eps_opt = run->add_option("--epsilon", epsilon, "epsilon; delta defaults to epsilon^2");
  auto* delta_opt = run->add_option("--delta", delta, "delta (must equal epsilon^2 without --override-delta)");
  run->add_flag("--override-delta", override_delta, "allow delta != epsilon^2");
  auto* E_opt = run->add_option("--E,--threshold", E, "focusing peak threshold as a fraction of the maximum");
  auto* spacing_opt = run->add_option("--spacing-factor", spacing, "focusing frequency spacing factor");

  auto* dec = app.add_subcommand("decompose", "wave-packet coefficients of a field file");
  dec->fallthrough();
  std::string dec_input;
  double kappa = 0.125;
  dec->add_option("field", dec_input, "binary field file")->required();
  dec->add_option("--kappa", kappa, "frame window parameter");

  auto* part = app.add_subcommand("partition", "polynomial partition of a mass file");
  part->fallthrough();
  std::string part_input;
  int part_D = 2;
  double part_r = 1.0;
  part->add_option("mass", part_input, "JSON mass file")->required();
  part->add_option("--D", part_D, "degree budget");
  part->add_option("--r", part_r, "time exponent of the mixed norm");

  auto* prop = app.add_subcommand("propagate", "space-time solution of a field file");
  prop->fallthrough();
  std::string prop_input;
  bool prop_json = false;
  prop->add_option("field", prop_input, "binary field file")->required();
  prop->add_flag("--json", prop_json, "write JSON instead of binary");

  auto* rep = app.add_subcommand("report", "summarize the runs in a directory");
  rep->fallthrough();
  std::string rep_dir;
  rep->add_option("dir", rep_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << nlohmann::json{{"error", "InvalidArgument"}, {"message", e.what()},
                                {"exit_code", schro::cli::kExitFailure}}
                     .dump()
              << '\n';
    return schro::cli::kExitFailure;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      cfg = schro::cli::config_from_key_values(schro::cli::parse_key_values(is));
    }
  } catch (const schro::Error& e) {
    std::cerr << schro::cli::error_json(e).dump() << '\n';
    return schro::cli::exit_code_for(e);
  }
  RunConfig flags;
  set_if(seed_opt, flags.seed, seed);
  set_if(out_opt, flags.out, out);
  set_if(threads_opt, flags.threads, threads);
  set_if(exp_opt, flags.experiment, experiment);
  set_if(R_opt, flags.R, R);
  set_if(sigma_opt, flags.sigma, sigma);
  set_if(D_opt, flags.D, D);
  set_if(trials_opt, flags.trials, trials);
  set_if(M_opt, flags.M, M);
  set_if(K_opt, flags.K, K);
  set_if(eps_opt, flags.epsilon, epsilon);
  set_if(delta_opt, flags.delta, delta);
  set_if(E_opt, flags.threshold, E);
  set_if(spacing_opt, flags.spacing_factor, spacing);
  flags.override_delta = override_delta;
  cfg = schro::cli::merge(cfg, flags);
  if (cfg.threads) schro::set_thread_count(*cfg.threads);

  if (*run) return schro::cli::cmd_run(cfg, std::cout, std::cerr);
  if (*dec)
    return schro::cli::cmd_decompose(dec_input, cfg.out.value_or(dec_input + ".coeffs.jsonl"), kappa, std::cout,
                                     std::cerr);
  if (*part)
    return schro::cli::cmd_partition(part_input, cfg.out.value_or(part_input + ".partition.json"), part_D, part_r,
                                     cfg.seed.value_or(1), std::cout, std::cerr);
  if (*prop)
    return schro::cli::cmd_propagate(prop_input, cfg.out.value_or(prop_input + (prop_json ? ".u.json" : ".u.bin")),
                                     prop_json, std::cout, std::cerr);
  return schro::cli::cmd_report(rep_dir, std::cout, std::cerr);
}
