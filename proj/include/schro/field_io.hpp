#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "schro/field.hpp"

namespace schro {

// Binary layout: dim (i64), R (f64), L (f64), nx (i64), nt (i64), then
// interleaved (re, im) f64 pairs ordered by spatial point, then time. All
// values little-endian. Times are implied: uniform on [0, R], or {0} when nt == 1.
void write_binary(std::ostream& os, const SpaceTimeField& u);
SpaceTimeField read_binary(std::istream& is);
void save_binary(const std::string& path, const SpaceTimeField& u);
SpaceTimeField load_binary(const std::string& path);

// A spectral field is stored as its samples at t = 0.
void save_binary(const std::string& path, const SpectralField& f);
SpectralField load_spectral(const std::string& path);

nlohmann::json to_json(const SpaceTimeField& u);
SpaceTimeField space_time_from_json(const nlohmann::json& j);

}  // namespace schro
