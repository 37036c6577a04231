#include "vacsep/serialize.hpp"

#include <cmath>
#include <cstdio>

#include <boost/crc.hpp>
#include <json.hpp>

#include "vacsep/errors.hpp"

namespace vacsep::io {

using nlohmann::ordered_json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

// nlohmann's own float formatting is shortest-round-trip; the formats here
// promise a fixed 17 digits, so numbers are spliced in as raw text.
std::string object(const std::vector<std::pair<std::string, std::string>>& fields) {
  std::string out = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ", ";
    out += ordered_json(fields[i].first).dump() + ": " + fields[i].second;
  }
  return out + "}";
}

std::string number(double x) {
  // JSON has no non-finite literals.
  return std::isfinite(x) ? format_double(x) : "null";
}

std::string flag(bool b) { return b ? "1" : "0"; }

std::string optional_number(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string{};
}

}  // namespace

std::string variance_to_json(const VarianceMatrix2Mode& v) {
  return object({{"qq_A", number(v.qq_a)},
                 {"pp_A", number(v.pp_a)},
                 {"qq_B", number(v.qq_b)},
                 {"pp_B", number(v.pp_b)},
                 {"qq_AB", number(v.qq_ab)},
                 {"pp_AB", number(v.pp_ab)}});
}

VarianceMatrix2Mode variance_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw InputError(std::string("variance matrix JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("variance matrix JSON must be an object");
  auto get = [&](const char* key) {
    if (!j.contains(key)) throw InputError(std::string("variance matrix JSON lacks ") + key);
    if (!j[key].is_number()) throw InputError(std::string("variance matrix entry ") + key + " is not a number");
    return j[key].get<double>();
  };
  VarianceMatrix2Mode v;
  v.qq_a = get("qq_A");
  v.pp_a = get("pp_A");
  v.qq_b = get("qq_B");
  v.pp_b = get("pp_B");
  v.qq_ab = get("qq_AB");
  v.pp_ab = get("pp_AB");
  return v;
}

std::string profile_to_json(const chain::DiscreteProfile& p) {
  std::string weights = "[";
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    if (i) weights += ", ";
    weights += number(p.weights[i]);
  }
  weights += "]";
  return object({{"first_site", std::to_string(p.offset + 1)}, {"weights", weights}});
}

std::string chain_params_to_json(const chain::ChainParams& p) {
  return object({{"N", std::to_string(p.sites)},
                 {"alpha", number(p.alpha)},
                 {"m", number(p.mass)},
                 {"L", number(p.length)},
                 {"n", std::to_string(p.block)},
                 {"d", std::to_string(p.gap)}});
}

namespace csv {

std::string row(const chain::NCritRow& r) {
  if (!r.n_crit) return std::to_string(r.gap) + ",,,,";
  return std::to_string(r.gap) + "," + std::to_string(*r.n_crit) + "," + format_double(r.alpha) +
         "," + std::to_string(r.sites) + "," + format_double(r.epsilon_max);
}

std::string row(const continuum::OptimumPoint& p) {
  return format_double(p.gap) + "," + format_double(p.eps_max) + "," + format_double(p.length) +
         "," + format_double(p.tip) + "," + flag(p.converged);
}

std::string row(const continuum::LminPoint& p) {
  return format_double(p.gap) + "," + optional_number(p.length_min) + "," +
         (p.length_min ? format_double(p.tip) : std::string{}) + "," +
         flag(p.length_min.has_value()) + "," + flag(p.at_floor) + "," +
         flag(p.multiple_sign_changes);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace csv

std::uint32_t crc32(std::string_view bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

}  // namespace vacsep::io
