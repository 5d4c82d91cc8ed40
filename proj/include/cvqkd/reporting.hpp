#pragma once

// Transmission sweeps of the secret-key rates and the plain key=value
// configuration format used by the command-line tool.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cvqkd/channel.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/security_bounds.hpp"

namespace cvqkd {

struct Grid {
  double start = 0.05;
  double stop = 1.0;
  int steps = 96;
  bool log_spacing = false;

  void validate() const {
    if (!(start > 0.0) || !(stop > 0.0) || !std::isfinite(start) || !std::isfinite(stop)) {
      throw error(errc::parameter, "grid bounds must be positive and finite");
    }
    if (steps < 2) throw error(errc::parameter, "grid needs at least 2 steps");
  }

  std::vector<double> points() const {
    validate();
    std::vector<double> out(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(steps - 1);
      out[static_cast<std::size_t>(i)] =
          log_spacing ? std::exp(std::log(start) + u * (std::log(stop) - std::log(start)))
                      : start + u * (stop - start);
    }
    out.back() = stop;
    return out;
  }
};

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw error(errc::parameter, std::string(what) + ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses start:stop:steps[:log].
inline Grid parse_grid(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto colon = text.find(':', pos);
    parts.push_back(text.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() != 3 && parts.size() != 4) throw error(errc::parameter, "grid must be start:stop:steps[:log]");
  Grid g;
  g.start = detail::parse_double(parts[0], "grid start");
  g.stop = detail::parse_double(parts[1], "grid stop");
  const double steps = detail::parse_double(parts[2], "grid steps");
  if (steps != std::floor(steps) || steps > 1e7) throw error(errc::parameter, "grid steps must be an integer");
  g.steps = static_cast<int>(steps);
  if (parts.size() == 4) {
    if (parts[3] == "log") {
      g.log_spacing = true;
    } else if (parts[3] != "lin") {
      throw error(errc::parameter, "grid spacing must be 'log' or 'lin'");
    }
  }
  g.validate();
  return g;
}

struct SweepSpec {
  Grid transmission{};
  double variance = 11.0;
  double excess_noise = 0.02;
  double beta = 1.0;

  void validate() const {
    transmission.validate();
    if (!(variance >= 1.0) || !std::isfinite(variance)) throw error(errc::domain, "V must be >= 1");
    if (!(excess_noise >= 0.0 && excess_noise <= 2.0)) throw error(errc::domain, "eps must lie in [0, 2]");
    if (!(beta >= 0.0 && beta <= 1.0)) throw error(errc::domain, "beta must lie in [0, 1]");
  }
};

/// One transmission point of the sweep. Eve terms are reverse reconciliation.
struct RateRow {
  double transmission = 0.0;
  RateReport homodyne;
  RateReport heterodyne_new;
  RateReport heterodyne_old;
};

inline RateRow rate_row(double transmission, double excess_noise, double variance, double beta) {
  const ChannelParams c = symmetric_channel(transmission, excess_noise, variance);
  return {transmission, mutual_informations(c, Protocol::homodyne, Direction::reverse, beta),
          mutual_informations(c, Protocol::heterodyne_new, Direction::reverse, beta),
          mutual_informations(c, Protocol::heterodyne_old, Direction::reverse, beta)};
}

/// Evaluates every point first; any domain error surfaces before output exists.
inline std::vector<RateRow> rate_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<RateRow> rows;
  for (double t : spec.transmission.points()) rows.push_back(rate_row(t, spec.excess_noise, spec.variance, spec.beta));
  return rows;
}

inline const std::vector<std::string>& rates_header() {
  static const std::vector<std::string> h{"T",       "eps",     "V",          "beta",          "I_AB_hom",
                                          "I_EVE_hom", "dI_hom",  "I_AB_het",   "I_EVE_het_new", "dI_het_new",
                                          "I_EVE_het_old", "dI_het_old", "dI_eff_het_new"};
  return h;
}

inline csv::Table rates_table(const SweepSpec& spec, const std::vector<RateRow>& rows) {
  csv::Table t(rates_header());
  using csv::number;
  for (const auto& r : rows) {
    t.add({number(r.transmission), number(spec.excess_noise), number(spec.variance), number(spec.beta),
           number(r.homodyne.i_ab), number(r.homodyne.i_eve), number(r.homodyne.delta_i),
           number(r.heterodyne_new.i_ab), number(r.heterodyne_new.i_eve), number(r.heterodyne_new.delta_i),
           number(r.heterodyne_old.i_eve), number(r.heterodyne_old.delta_i), number(r.heterodyne_new.delta_i_eff)});
  }
  return t;
}

/// key=value lines; '#' starts a comment, blank lines are ignored.
inline std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = detail::trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw error(errc::parameter, "config line " + std::to_string(number) + " is not key=value");
    }
    std::string key(detail::trim(v.substr(0, eq)));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty()) throw error(errc::parameter, "config line " + std::to_string(number) + " has an empty key");
    out[key] = std::string(detail::trim(v.substr(eq + 1)));
  }
  return out;
}

inline std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw error(errc::parameter, "cannot read config file " + path);
  return parse_config(f);
}

}  // namespace cvqkd
