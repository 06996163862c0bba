#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "schro/error.hpp"
#include "schro/examples.hpp"
#include "schro/partition.hpp"

namespace schro::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUnknownExperiment = 2;
inline constexpr int kExitEmptyInput = 3;

// Every knob is optional so that a config file and command-line flags can be
// layered; unset knobs fall back to the experiment defaults.
struct RunConfig {
  std::optional<std::string> experiment;
  std::optional<std::vector<double>> R;
  std::optional<std::vector<double>> sigma;
  std::optional<std::vector<int>> D;
  std::optional<int> trials;
  std::optional<double> M;
  std::optional<double> K;
  std::optional<double> epsilon;
  std::optional<double> delta;
  bool override_delta = false;
  std::optional<double> threshold;  // E, the focusing peak threshold
  std::optional<double> spacing_factor;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

// Flat key=value lines; blank lines and lines starting with '#' are ignored.
// Throws InvalidInput on a malformed line or a repeated key.
std::map<std::string, std::string> parse_key_values(std::istream& is);

// Throws InvalidInput on an unknown key or an unparsable value.
RunConfig config_from_key_values(const std::map<std::string, std::string>& kv);

// Fields set in `overrides` replace those in `base`.
RunConfig merge(RunConfig base, const RunConfig& overrides);

// Validates scales (powers of 2) and the delta = epsilon^2 coupling.
// Throws InvalidArgument.
ExperimentConfig to_experiment_config(const RunConfig& config);

nlohmann::json error_json(const Error& e);
nlohmann::json error_json(const std::exception& e);
int exit_code_for(const Error& e) noexcept;

// Log-log scatter of every fit's points with its fitted line; the CSV is
// embedded in a comment. Falls back to norm against row index without fits.
std::string svg_plot(const ExperimentResult& result, const std::string& csv);

struct RunPaths {
  std::filesystem::path manifest, csv, svg, done;
};
RunPaths run_paths(const std::filesystem::path& out_dir, const std::string& experiment);

// Each command writes machine-readable errors to `err` and returns an exit code.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_decompose(const std::string& input, const std::string& output, double kappa, std::ostream& out,
                  std::ostream& err);
int cmd_partition(const std::string& input, const std::string& output, int D, double r, std::uint64_t seed,
                  std::ostream& out, std::ostream& err);
int cmd_propagate(const std::string& input, const std::string& output, bool as_json, std::ostream& out,
                  std::ostream& err);
int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err);

// Mass file: {"dim", "R", "nx", "nt", "values"} on SpaceTimeLattice::uniform,
// values time-major.
struct MassFile {
  MassField W;
  double R = 0.0;
};
MassFile read_mass_file(const std::string& path);
nlohmann::json mass_file_json(const MassField& W, double R);

}  // namespace schro::cli
