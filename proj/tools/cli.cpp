#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "schro/field_io.hpp"
#include "schro/parallel.hpp"
#include "schro/version.hpp"
#include "schro/wavepacket.hpp"

namespace schro::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T v{};
  is >> v;
  if (!is || !(is >> std::ws).eof()) fail(ErrorCode::kInvalidInput, "bad value for " + key + ": '" + text + "'");
  return v;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::istringstream is(text);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(parse_number<T>(key, trim(item)));
  if (out.empty()) fail(ErrorCode::kInvalidInput, "empty list for " + key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  fail(ErrorCode::kInvalidInput, "bad boolean for " + key + ": '" + text + "'");
}

bool is_power_of_two(double v) {
  if (!(v >= 1) || v != std::floor(v) || v > 0x1p52) return false;
  const auto n = static_cast<std::uint64_t>(v);
  return (n & (n - 1)) == 0;
}

void require_powers_of_two(const char* name, std::span<const double> values) {
  for (double v : values)
    require(is_power_of_two(v), ErrorCode::kInvalidArgument,
            std::string(name) + " must be a power of 2, got " + std::to_string(v));
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Write to a sibling temporary and rename, so a reader never sees a partial file.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + tmp.string());
    os << content;
    os.flush();
    require(static_cast<bool>(os), ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  require(!ec, ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

void require_input(const std::string& path) {
  std::error_code ec;
  require(fs::is_regular_file(path, ec), ErrorCode::kIo, "no such file: " + path);
}

bool is_empty_file(const std::string& path) {
  std::error_code ec;
  return fs::is_regular_file(path, ec) && fs::file_size(path, ec) == 0 && !ec;
}

int report_empty(const std::string& what, std::ostream& err) {
  err << nlohmann::json{{"error", to_string(ErrorCode::kInvalidInput)},
                        {"message", "empty input: " + what},
                        {"exit_code", kExitEmptyInput}}
                .dump()
      << '\n';
  return kExitEmptyInput;
}

int report_error(const std::exception& e, std::ostream& err) {
  const auto* typed = dynamic_cast<const Error*>(&e);
  const nlohmann::json j = typed ? error_json(*typed) : error_json(e);
  err << j.dump() << '\n';
  return j["exit_code"].get<int>();
}

nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"R", c.R},
          {"sigma", c.sigma},
          {"D", c.D},
          {"trials", c.trials},
          {"M", c.M},
          {"K", c.K},
          {"epsilon", c.epsilon},
          {"delta", c.delta},
          {"E", c.focusing.threshold},
          {"spacing_factor", c.focusing.spacing_factor},
          {"resolution", c.focusing.resolution}};
}

nlohmann::json tolerances_json() {
  return {{"pigeonhole_C", 20.0},
          {"uniform_cube_factor", RatioOptions{}.uniform_factor},
          {"bisection_tol", BisectionOptions{}.tol},
          {"bisection_restarts", BisectionOptions{}.restarts},
          {"tie_tolerance", 1e-12},
          {"cap_leak_tol", 1e-10},
          {"fit", "least squares of ln(value) on ln(scale)"}};
}

nlohmann::json fit_json(const LabelledFit& f) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& [x, y] : f.fit.log_points) points.push_back({x, y});
  return {{"label", f.label},
          {"slope", f.fit.slope},
          {"intercept", f.fit.intercept},
          {"max_residual", f.fit.max_residual},
          {"log_points", points}};
}

nlohmann::json grids_of(const ExperimentResult& result) {
  nlohmann::json grids = nlohmann::json::array();
  std::set<std::string> seen;
  for (const auto& row : result.rows)
    for (const char* key : {"grid", "lattice"})
      if (row.details.is_object() && row.details.contains(key) && seen.insert(row.details[key].dump()).second)
        grids.push_back(row.details[key]);
  return grids;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::kInvalidInput,
            "config line " + std::to_string(number) + ": expected key=value");
    const std::string key = trim(t.substr(0, eq));
    require(kv.emplace(key, trim(t.substr(eq + 1))).second, ErrorCode::kInvalidInput,
            "config line " + std::to_string(number) + ": repeated key " + key);
  }
  return kv;
}

RunConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  for (const auto& [key, value] : kv) {
    if (key == "experiment") c.experiment = value;
    else if (key == "R") c.R = parse_list<double>(key, value);
    else if (key == "sigma") c.sigma = parse_list<double>(key, value);
    else if (key == "D") c.D = parse_list<int>(key, value);
    else if (key == "trials") c.trials = parse_number<int>(key, value);
    else if (key == "M") c.M = parse_number<double>(key, value);
    else if (key == "K") c.K = parse_number<double>(key, value);
    else if (key == "epsilon") c.epsilon = parse_number<double>(key, value);
    else if (key == "delta") c.delta = parse_number<double>(key, value);
    else if (key == "override_delta") c.override_delta = parse_bool(key, value);
    else if (key == "E" || key == "threshold") c.threshold = parse_number<double>(key, value);
    else if (key == "spacing_factor") c.spacing_factor = parse_number<double>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "out") c.out = value;
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else fail(ErrorCode::kInvalidInput, "unknown config key: " + key);
  }
  return c;
}

RunConfig merge(RunConfig base, const RunConfig& o) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(base.experiment, o.experiment);
  take(base.R, o.R);
  take(base.sigma, o.sigma);
  take(base.D, o.D);
  take(base.trials, o.trials);
  take(base.M, o.M);
  take(base.K, o.K);
  take(base.epsilon, o.epsilon);
  take(base.delta, o.delta);
  take(base.threshold, o.threshold);
  take(base.spacing_factor, o.spacing_factor);
  take(base.seed, o.seed);
  take(base.out, o.out);
  take(base.threads, o.threads);
  base.override_delta = base.override_delta || o.override_delta;
  return base;
}

ExperimentConfig to_experiment_config(const RunConfig& c) {
  ExperimentConfig e;
  require(c.experiment && !c.experiment->empty(), ErrorCode::kInvalidArgument, "no experiment named");
  e.name = *c.experiment;
  if (c.R) e.R = *c.R;
  if (c.sigma) e.sigma = *c.sigma;
  if (c.D) e.D = *c.D;
  if (c.trials) e.trials = *c.trials;
  if (c.M) e.M = *c.M;
  if (c.K) e.K = *c.K;
  if (c.seed) e.seed = *c.seed;
  if (c.threshold) e.focusing.threshold = *c.threshold;
  if (c.spacing_factor) e.focusing.spacing_factor = *c.spacing_factor;

  require_powers_of_two("R", e.R);
  require_powers_of_two("sigma", e.sigma);
  require_powers_of_two("M", std::span<const double>(&e.M, 1));
  require_powers_of_two("K", std::span<const double>(&e.K, 1));
  for (int d : e.D) require(d >= 1, ErrorCode::kInvalidArgument, "D must be >= 1");
  require(e.trials >= 0, ErrorCode::kInvalidArgument, "trials must be >= 0");
  require(e.focusing.threshold > 0 && e.focusing.threshold < 1, ErrorCode::kInvalidArgument,
          "E (threshold) must lie in (0, 1)");
  require(e.focusing.spacing_factor > 0, ErrorCode::kInvalidArgument, "spacing_factor must be positive");

  if (c.epsilon) e.epsilon = *c.epsilon;
  require(e.epsilon > 0 && e.epsilon < 1, ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  e.delta = e.epsilon * e.epsilon;
  if (c.delta) {
    const bool coupled = std::abs(*c.delta - e.delta) <= 1e-12 * e.delta;
    require(coupled || c.override_delta, ErrorCode::kInvalidArgument,
            "delta must equal epsilon^2 unless override_delta is set");
    e.delta = *c.delta;
  } else {
    require(!c.override_delta, ErrorCode::kInvalidArgument, "override_delta given without delta");
  }
  require(e.delta > 0 && e.delta < 0.5, ErrorCode::kInvalidArgument, "delta must lie in (0, 1/2)");
  return e;
}

nlohmann::json error_json(const Error& e) {
  return {{"error", to_string(e.code())}, {"message", e.what()}, {"exit_code", exit_code_for(e)}};
}

nlohmann::json error_json(const std::exception& e) {
  return {{"error", "Internal"}, {"message", e.what()}, {"exit_code", kExitFailure}};
}

int exit_code_for(const Error& e) noexcept {
  return e.code() == ErrorCode::kUnknownExperiment ? kExitUnknownExperiment : kExitFailure;
}

std::string svg_plot(const ExperimentResult& result, const std::string& csv) {
  struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;  // natural logs
    std::optional<ExponentFit> fit;
  };
  std::vector<Series> series;
  for (const auto& f : result.fits) series.push_back({f.label, f.fit.log_points, f.fit});
  if (series.empty()) {
    Series s{"norm by row", {}, std::nullopt};
    for (std::size_t i = 0; i < result.rows.size(); ++i)
      if (result.rows[i].norm > 0 && std::isfinite(result.rows[i].norm))
        s.points.emplace_back(std::log(static_cast<double>(i + 1)), std::log(result.rows[i].norm));
    series.push_back(std::move(s));
  }

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.05 * (x1 - x0), pady = 0.08 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

  const double W = 640, H = 480, left = 80, right = 220, top = 40, bottom = 60;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<!-- data (CSV)\n" << csv << "-->\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(result.name)
     << " (log-log)</text>\n"
     << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
     << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4, y = y0 + (y1 - y0) * i / 4;
    os << "<text x=\"" << px(x) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
       << format_number(std::exp(x)) << "</text>\n"
       << "<text x=\"" << left - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
       << format_number(std::exp(y)) << "</text>\n";
  }
  os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 20 << "\" text-anchor=\"middle\">scale</text>\n"
     << "<text x=\"20\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << (top + H - bottom) / 2 << ")\">value</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = palette[k % std::size(palette)];
    for (const auto& [x, y] : s.points)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3.5\" fill=\"" << colour << "\"/>\n";
    std::string legend = s.label;
    if (s.fit && !s.points.empty()) {
      double a = INFINITY, b = -INFINITY;
      for (const auto& p : s.points) a = std::min(a, p.first), b = std::max(b, p.first);
      const auto line = [&](double x) { return s.fit->intercept + s.fit->slope * x; };
      os << "<line x1=\"" << px(a) << "\" y1=\"" << py(line(a)) << "\" x2=\"" << px(b) << "\" y2=\""
         << py(line(b)) << "\" stroke=\"" << colour << "\" stroke-width=\"1.5\"/>\n";
      legend += ": slope " + format_number(s.fit->slope);
    }
    const double ly = top + 16 + 18 * static_cast<double>(k);
    os << "<rect x=\"" << W - right + 12 << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\""
       << colour << "\"/>\n"
       << "<text x=\"" << W - right + 28 << "\" y=\"" << ly << "\" font-size=\"10\">" << xml_escape(legend)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

RunPaths run_paths(const fs::path& dir, const std::string& name) {
  return {dir / (name + ".manifest.json"), dir / (name + ".csv"), dir / (name + ".svg"), dir / (name + ".done")};
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  ExperimentConfig exp;
  RunPaths paths;
  nlohmann::json manifest;
  try {
    exp = to_experiment_config(config);
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), exp.name) == names.end()) {
      std::string known;
      for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
      fail(ErrorCode::kUnknownExperiment, "'" + exp.name + "' (known: " + known + ")");
    }
    if (config.threads) set_thread_count(*config.threads);

    const fs::path dir = config.out.value_or("out");
    fs::create_directories(dir);
    paths = run_paths(dir, exp.name);
    fs::remove(paths.done);

    manifest = {{"experiment", exp.name},
                {"status", "running"},
                {"seed", exp.seed},
                {"threads", thread_count()},
                {"config", config_json(exp)},
                {"tolerances", tolerances_json()},
                {"git_revision", git_revision()},
                {"outputs", {{"csv", paths.csv.filename().string()}, {"svg", paths.svg.filename().string()}}}};
    write_file(paths.manifest, manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    return report_error(e, err);
  }

  try {
    const ExperimentResult result = run_experiment(exp);
    const std::string csv = to_csv(result);
    write_file(paths.csv, csv);
    write_file(paths.svg, svg_plot(result, csv));

    nlohmann::json fits = nlohmann::json::array(), rows = nlohmann::json::array();
    for (const auto& f : result.fits) fits.push_back(fit_json(f));
    for (const auto& r : result.rows)
      rows.push_back({{"R", r.R},
                      {"sigma_or_N", r.sigma_or_N},
                      {"M", r.M},
                      {"E", r.E},
                      {"norm", r.norm},
                      {"ratio", r.ratio},
                      {"fitted_slope", r.fitted_slope},
                      {"details", r.details}});
    manifest["status"] = "complete";
    manifest["grids"] = grids_of(result);
    manifest["fits"] = fits;
    manifest["rows"] = rows;
    manifest["summary"] = result.summary;
    write_file(paths.manifest, manifest.dump(2) + "\n");
    write_file(paths.done, exp.name + "\n");

    nlohmann::json brief = {{"experiment", exp.name}, {"csv", paths.csv.string()}, {"rows", result.rows.size()}};
    nlohmann::json slopes = nlohmann::json::array();
    for (const auto& f : result.fits) slopes.push_back({{"label", f.label}, {"slope", f.fit.slope}});
    brief["fits"] = slopes;
    out << brief.dump() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    const int code = report_error(e, err);
    try {
      const auto* typed = dynamic_cast<const Error*>(&e);
      manifest["status"] = "failed";
      manifest["error"] = typed ? error_json(*typed) : error_json(e);
      write_file(paths.manifest, manifest.dump(2) + "\n");
    } catch (const std::exception&) {
    }
    return code;
  }
}

int cmd_decompose(const std::string& input, const std::string& output, double kappa, std::ostream& out,
                  std::ostream& err) {
  if (is_empty_file(input)) return report_empty(input, err);
  try {
    require_input(input);
    const SpectralField f = load_spectral(input);
    const auto frame = WavePacketFrame::make(f.grid(), kappa);
    const CoefficientSet coeffs = decompose(f, frame);
    {
      std::ostringstream os;
      write_json_lines(os, coeffs);
      write_file(output, os.str());
    }
    SpectralField diff = reconstruct(coeffs);
    diff -= f;
    const double norm = f.l2_norm();
    const double error = norm > 0 ? diff.l2_norm() / norm : diff.l2_norm();
    out << nlohmann::json{{"coefficients", output},
                          {"count", coeffs.size()},
                          {"kappa", kappa},
                          {"dropped_mass", coeffs.dropped_mass()},
                          {"roundtrip_relative_error", error}}
               .dump()
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

MassFile read_mass_file(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, "mass file is not JSON: " + std::string(e.what()));
  }
  try {
    const int dim = j.at("dim").get<int>();
    const double R = j.at("R").get<double>();
    const auto nx = j.at("nx").get<std::size_t>();
    const auto nt = j.at("nt").get<std::size_t>();
    require((dim == 1 || dim == 2) && R > 0 && std::isfinite(R) && nx >= 2 && nt >= 2 && nx <= 4096 && nt <= 4096,
            ErrorCode::kInvalidInput, "bad mass file header");
    MassField W{SpaceTimeLattice::uniform(dim, R, nx, nt), j.at("values").get<std::vector<double>>()};
    require(W.values.size() == W.lattice.size(), ErrorCode::kInvalidInput,
            "mass file has " + std::to_string(W.values.size()) + " values, lattice needs " +
                std::to_string(W.lattice.size()));
    for (double v : W.values)
      require(std::isfinite(v) && v >= 0, ErrorCode::kInvalidInput, "masses must be finite and nonnegative");
    return {std::move(W), R};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, "bad mass file: " + std::string(e.what()));
  }
}

nlohmann::json mass_file_json(const MassField& W, double R) {
  return {{"dim", W.lattice.dim},
          {"R", R},
          {"nx", W.lattice.axis.size()},
          {"nt", W.lattice.times.size()},
          {"values", W.values}};
}

int cmd_partition(const std::string& input, const std::string& output, int D, double r, std::uint64_t seed,
                  std::ostream& out, std::ostream& err) {
  if (is_empty_file(input)) return report_empty(input, err);
  try {
    require_input(input);
    require(D >= 1, ErrorCode::kInvalidArgument, "D must be >= 1");
    const auto [W, R] = read_mass_file(input);
    PartitionOptions opts;
    opts.bisection.seed = seed;
    const PartitionResult res = polynomial_partition(W, D, r, R, opts);

    nlohmann::json cells = nlohmann::json::array();
    double lo = INFINITY, hi = 0.0;
    for (const auto& c : res.cells) {
      const double share = res.total_mass > 0 ? c.mass / res.total_mass : 0.0;
      lo = std::min(lo, share), hi = std::max(hi, share);
      cells.push_back({{"sign_vector", c.sign_vector}, {"mass", c.mass}, {"share", share},
                       {"mask", c.run_length_mask()}});
    }
    const nlohmann::json doc = {{"dim", W.lattice.dim},   {"R", R},
                                {"D", D},                 {"r", r},
                                {"steps", res.steps},     {"total_mass", res.total_mass},
                                {"tie_mass", res.tie_mass}, {"residuals", res.residuals},
                                {"polynomial", res.polynomial.to_json()}, {"cells", cells}};
    write_file(output, doc.dump() + "\n");
    out << nlohmann::json{{"partition", output},
                          {"cells", res.cells.size()},
                          {"steps", res.steps},
                          {"min_share", lo},
                          {"max_share", hi}}
               .dump()
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_propagate(const std::string& input, const std::string& output, bool as_json, std::ostream& out,
                  std::ostream& err) {
  if (is_empty_file(input)) return report_empty(input, err);
  try {
    require_input(input);
    const SpectralField f = load_spectral(input);
    const SpaceTimeField u = propagate(f);
    if (as_json) {
      write_file(output, to_json(u).dump() + "\n");
    } else {
      const std::string tmp = output + ".tmp";
      save_binary(tmp, u);
      std::error_code ec;
      fs::rename(tmp, output, ec);
      require(!ec, ErrorCode::kIo, "cannot rename " + tmp + ": " + ec.message());
    }
    const GridSpec& g = u.grid();
    out << nlohmann::json{{"field", output},
                          {"dim", g.dim},
                          {"R", g.R},
                          {"nx", g.nx},
                          {"nt", u.num_times()}}
               .dump()
        << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_report(const std::string& dir, std::ostream& out, std::ostream& err) {
  try {
    std::error_code ec;
    require(fs::is_directory(dir, ec), ErrorCode::kIo, "no such directory: " + dir);
    std::vector<fs::path> manifests;
    const std::string suffix = ".manifest.json";
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (entry.is_regular_file() && name.size() > suffix.size() &&
          name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        manifests.push_back(entry.path());
    }
    if (manifests.empty()) return report_empty("no run manifests in " + dir, err);
    std::sort(manifests.begin(), manifests.end());

    nlohmann::json runs = nlohmann::json::array(), interrupted = nlohmann::json::array();
    for (const auto& path : manifests) {
      const std::string name = path.filename().string();
      const std::string experiment = name.substr(0, name.size() - suffix.size());
      nlohmann::json run = {{"experiment", experiment}};
      const bool done = fs::exists(run_paths(dir, experiment).done);
      run["complete"] = done;
      try {
        std::ifstream is(path);
        const auto m = nlohmann::json::parse(is);
        run["status"] = m.value("status", "unknown");
        run["seed"] = m.value("seed", nlohmann::json());
        run["git_revision"] = m.value("git_revision", "");
        nlohmann::json slopes = nlohmann::json::array();
        if (m.contains("fits"))
          for (const auto& f : m["fits"])
            slopes.push_back({{"label", f.value("label", "")}, {"slope", f.value("slope", nlohmann::json())},
                              {"max_residual", f.value("max_residual", nlohmann::json())}});
        run["fits"] = slopes;
      } catch (const nlohmann::json::exception& e) {
        run["status"] = "unreadable";
        run["message"] = e.what();
      }
      if (!done) interrupted.push_back(experiment);
      runs.push_back(run);
    }
    out << nlohmann::json{{"directory", dir}, {"runs", runs}, {"interrupted", interrupted}}.dump(2) << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

}  // namespace schro::cli
