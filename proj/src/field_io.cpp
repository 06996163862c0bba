#include "schro/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "schro/error.hpp"

namespace schro {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put(std::ostream& os, T v) {
  static_assert(sizeof(T) == 8);
  unsigned char b[8];
  std::memcpy(b, &v, 8);
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  os.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    fail(ErrorCode::kInvalidInput, "truncated field file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
  T v;
  std::memcpy(&v, b, 8);
  return v;
}

bool uniform_times(const SpaceTimeField& u) {
  const auto t = u.times();
  if (t.size() == 1) return t[0] == 0.0;
  const auto expected = u.grid().time_samples();
  if (expected.size() != t.size()) return false;
  for (std::size_t m = 0; m < t.size(); ++m)
    if (std::abs(expected[m] - t[m]) > 1e-12 * u.grid().R) return false;
  return true;
}

std::vector<double> implied_times(const GridSpec& g) {
  return g.nt == 1 ? std::vector<double>{0.0} : g.time_samples();
}

}  // namespace

void write_binary(std::ostream& os, const SpaceTimeField& u) {
  const GridSpec& g = u.grid();
  require(uniform_times(u), ErrorCode::kInvalidArgument,
          "binary format needs the uniform time grid of the field's grid");
  put<std::int64_t>(os, g.dim);
  put<double>(os, g.R);
  put<double>(os, g.L);
  put<std::int64_t>(os, static_cast<std::int64_t>(g.nx));
  put<std::int64_t>(os, static_cast<std::int64_t>(u.num_times()));
  for (std::size_t x = 0; x < u.num_points(); ++x)
    for (std::size_t m = 0; m < u.num_times(); ++m) {
      put<double>(os, u.at(x, m).real());
      put<double>(os, u.at(x, m).imag());
    }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed");
}

SpaceTimeField read_binary(std::istream& is) {
  if (is.peek() == std::char_traits<char>::eof())
    fail(ErrorCode::kInvalidInput, "empty field file");
  GridSpec g;
  const auto dim = get<std::int64_t>(is);
  g.R = get<double>(is);
  g.L = get<double>(is);
  const auto nx = get<std::int64_t>(is);
  const auto nt = get<std::int64_t>(is);
  require((dim == 1 || dim == 2) && nx >= 2 && nx <= (1 << 20) && nt >= 1 && nt <= (1 << 24) &&
              std::isfinite(g.R) && g.R > 0 && std::isfinite(g.L) && g.L > 0,
          ErrorCode::kInvalidInput, "corrupt field header");
  g.dim = static_cast<int>(dim);
  g.nx = static_cast<std::size_t>(nx);
  g.nt = static_cast<std::size_t>(nt);
  SpaceTimeField u(g, implied_times(g));
  for (std::size_t x = 0; x < u.num_points(); ++x)
    for (std::size_t m = 0; m < u.num_times(); ++m) {
      const double re = get<double>(is);
      const double im = get<double>(is);
      u.at(x, m) = {re, im};
    }
  return u;
}

void save_binary(const std::string& path, const SpaceTimeField& u) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path);
  write_binary(os, u);
}

SpaceTimeField load_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kInvalidInput, "cannot open " + path);
  return read_binary(is);
}

void save_binary(const std::string& path, const SpectralField& f) {
  GridSpec g = f.grid();
  g.nt = 1;
  SpaceTimeField u(g, {0.0});
  const auto s = f.samples();
  std::copy(s.begin(), s.end(), u.slice(0).begin());
  save_binary(path, u);
}

SpectralField load_spectral(const std::string& path) {
  SpaceTimeField u = load_binary(path);
  require(u.num_times() >= 1, ErrorCode::kInvalidInput, "no samples");
  GridSpec g = u.grid();
  if (g.nt < 2) g.nt = static_cast<std::size_t>(std::ceil(g.R / g.dx() - 1e-12)) + 1;
  return SpectralField::from_samples(g, u.slice(0));
}

nlohmann::json to_json(const SpaceTimeField& u) {
  const GridSpec& g = u.grid();
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (std::size_t x = 0; x < u.num_points(); ++x)
    for (std::size_t m = 0; m < u.num_times(); ++m) {
      re.push_back(u.at(x, m).real());
      im.push_back(u.at(x, m).imag());
    }
  return {{"dim", g.dim}, {"R", g.R},   {"L", g.L},   {"nx", g.nx},
          {"nt", g.nt},   {"times", std::vector<double>(u.times().begin(), u.times().end())},
          {"re", re},     {"im", im}};
}

SpaceTimeField space_time_from_json(const nlohmann::json& j) {
  try {
    GridSpec g;
    g.dim = j.at("dim").get<int>();
    g.R = j.at("R").get<double>();
    g.L = j.at("L").get<double>();
    g.nx = j.at("nx").get<std::size_t>();
    g.nt = j.at("nt").get<std::size_t>();
    auto times = j.at("times").get<std::vector<double>>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    SpaceTimeField u(g, std::move(times));
    require(re.size() == u.values().size() && im.size() == re.size(), ErrorCode::kInvalidInput,
            "sample count does not match the header");
    std::size_t i = 0;
    for (std::size_t x = 0; x < u.num_points(); ++x)
      for (std::size_t m = 0; m < u.num_times(); ++m, ++i) u.at(x, m) = {re[i], im[i]};
    return u;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidInput, e.what());
  }
}

}  // namespace schro
