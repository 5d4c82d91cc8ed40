#pragma once

// Command dispatch for the cvqkd tool: bounds, rates, attack, search.
// Exit codes: 0 ok, 1 usage, 2 domain, 3 verification failure.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cvqkd/attack_models.hpp"
#include "cvqkd/csv.hpp"
#include "cvqkd/error.hpp"
#include "cvqkd/reporting.hpp"
#include "cvqkd/search_harness.hpp"
#include "cvqkd/security_bounds.hpp"

namespace cvqkd::cli {

enum exit_code : int { ok = 0, usage = 1, domain_error = 2, verification_failure = 3 };

namespace detail {

inline std::string num(double v) { return csv::number(v); }

inline void print(std::ostream& out, const std::string& s) { out << s << '\n'; }

struct Options {
  double t = 0.5;
  double eps = 0.02;
  double v = 11.0;
  double beta = 1.0;
  std::string grid = "0.05:1:96";
  std::string kind;
  std::string mode = "both";
  int pairs = 1;
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out;
  std::string config;
};

// Config keys become flags placed before the command-line ones, and only for
// options the command line does not set.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty()) return args;
  CLI::App* sub = nullptr;
  for (CLI::App* s : app.get_subcommands({})) {
    if (s->get_name() == args.front()) sub = s;
  }
  if (sub == nullptr) return args;
  const auto entries = read_config(config_path);
  std::vector<std::string> merged{args.front()};
  for (const auto& [key, value] : entries) {
    const std::string flag = "--" + key;
    if (key == "config") continue;
    if (sub->get_option_no_throw(flag) == nullptr) {
      throw CLI::ValidationError("--config", "unknown key '" + key + "' for command " + sub->get_name());
    }
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!given) {
      merged.push_back(flag);
      merged.push_back(value);
    }
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

inline int cmd_bounds(const Options& o, std::ostream& out) {
  const double chi = chi_total(o.t, o.eps);
  const double chi_e = hetero_chi_E_min(o.t, o.eps);
  const double v_min = hetero_V_min(o.v, chi_e);
  print(out, fmt::format("channel: T={} eps={} V={} chi={}", num(o.t), num(o.eps), num(o.v), num(chi)));
  print(out, fmt::format("homodyne RR: V_B'|E = {}", num(homodyne_rr_bound(o.v, o.t, chi))));
  print(out, fmt::format("homodyne DR: chi_E = {}", num(homodyne_dr_chi(chi))));
  print(out, fmt::format("heterodyne previous RR: V_B|E = {}", num(hetero_old_conditional(o.v, o.t, chi))));
  print(out, fmt::format("heterodyne new: chi_E_min = {}", num(chi_e)));
  print(out, fmt::format("heterodyne new: V_B'|E_min = {}", num(v_min)));
  print(out, fmt::format("coincidence RR: chi* = {}", num(coincidence_chi(o.t, o.v, Direction::reverse))));
  if (o.t >= 1.0) {
    print(out, fmt::format("coincidence DR: chi* = {}", num(coincidence_chi(o.t, o.v, Direction::direct))));
  } else {
    print(out, "coincidence DR: none (needs T >= 1)");
  }
  return ok;
}

inline int cmd_rates(const Options& o, std::ostream& out) {
  SweepSpec spec;
  spec.transmission = parse_grid(o.grid);
  spec.variance = o.v;
  spec.excess_noise = o.eps;
  spec.beta = o.beta;
  const auto rows = rate_sweep(spec);
  const std::string text = rates_table(spec, rows).str();
  if (o.out.empty()) {
    out << text;
  } else {
    csv::write_atomically(o.out, text);
    print(out, fmt::format("wrote {} rows to {}", rows.size(), o.out));
  }
  return ok;
}

inline std::string describe(const AttackTuning& tuning) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, FeedForwardTuning>) {
          return fmt::format("g_E = {}, T_E = {}", num(t.gain), num(t.tap_transmission));
        } else if constexpr (std::is_same_v<T, CloningTuning>) {
          return fmt::format("T_E = {}, G = {}", num(t.tap_transmission), num(t.amplifier_gain));
        } else if constexpr (std::is_same_v<T, TeleportationTuning>) {
          return fmt::format("g_E = {}, s = {}", num(t.gain), num(t.squeezing));
        } else {
          return fmt::format("T_E = {}, s = {}", num(t.tap_transmission), num(t.squeezing));
        }
      },
      tuning);
}

inline int cmd_attack(const Options& o, std::ostream& out) {
  const auto kind = parse_attack_kind(o.kind);
  if (!kind) throw CLI::ValidationError("--kind", "expected feedforward, cloning, teleportation or entangling-cloner");
  hetero_chi_E_min(o.t, o.eps);
  if (!(o.v >= 1.0)) throw error(errc::domain, "V must be >= 1");
  const NamedAttack a = build_attack(*kind, o.t, o.eps);
  const ChannelParams c = channel_params_from(a.matrix, o.v);
  const EveView view = eve_view_from(a.matrix, o.v);
  const double roundtrip = roundtrip_residual(c, o.t, o.eps);
  const double saturation = saturation_residual(view, o.t, o.eps, o.v);
  print(out, fmt::format("attack: {}", to_string(a.kind)));
  print(out, fmt::format("tuning: {}", describe(a.tuning)));
  if (o.eps == 0.0) print(out, "note: eps = 0, the attack acts as a beam-splitter of transmission T");
  print(out, fmt::format("channel: T_X={} eps_X={} T_P={} eps_P={} (round-trip residual {:.3e})",
                         num(c.x.transmission), num(c.x.excess_noise), num(c.p.transmission), num(c.p.excess_noise),
                         roundtrip));
  print(out, fmt::format("eve: chi_XE1={} chi_PE2={} V_X|E={} V_P|E={}", num(view.chi_xe1), num(view.chi_pe2),
                         num(view.v_x_cond), num(view.v_p_cond)));
  const double chi_e = hetero_chi_E_min(o.t, o.eps);
  print(out, fmt::format("bound: chi_E_min={} V_B'|E_min={} (saturation residual {:.3e})", num(chi_e),
                         num(hetero_V_min(o.v, chi_e)), saturation));
  const bool passed = roundtrip <= default_tolerances.channel_roundtrip && saturation <= default_tolerances.saturation;
  print(out, passed ? "PASS attack saturates the heterodyne bound" : "FAIL attack does not saturate the bound");
  return passed ? ok : verification_failure;
}

inline int cmd_search(const Options& o, std::ostream& out) {
  SearchConfig cfg;
  cfg.n_ancilla_pairs = o.pairs;
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.variance = o.v;
  cfg.transmission = o.t;
  cfg.excess_noise = o.eps;
  cfg.workers = o.workers;
  cfg.validate();
  std::vector<SearchSummary> summaries;
  if (o.mode == "homodyne" || o.mode == "both") summaries.push_back(verify_homodyne_optimality(cfg).summary);
  if (o.mode == "heterodyne" || o.mode == "both") summaries.push_back(verify_heterodyne_bound(cfg).summary);
  for (const auto& s : summaries) print(out, summary_line(s));
  const std::string text = summary_table(summaries).str();
  if (o.out.empty()) {
    out << text;
  } else {
    csv::write_atomically(o.out, text);
  }
  const bool passed = std::all_of(summaries.begin(), summaries.end(), [](const auto& s) { return s.passed; });
  return passed ? ok : verification_failure;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::Options o;
  CLI::App app{"Continuous-variable QKD bounds, attacks and randomized checks", "cvqkd"};
  app.require_subcommand(1);

  auto* bounds = app.add_subcommand("bounds", "Homodyne and heterodyne bounds for one channel");
  auto* rates = app.add_subcommand("rates", "Rate sweep over transmission, as CSV");
  auto* attack = app.add_subcommand("attack", "Build a named attack and check it saturates the bound");
  auto* search = app.add_subcommand("search", "Randomized attack search");

  auto add_channel = [&](CLI::App* s, bool with_t) {
    if (with_t) s->add_option("--T", o.t, "Channel transmission")->capture_default_str();
    s->add_option("--eps", o.eps, "Excess noise (shot-noise units)")->capture_default_str();
    s->add_option("--V", o.v, "Modulation variance V (shot-noise units)")->capture_default_str();
  };
  for (auto* s : {bounds, rates, attack, search}) s->add_option("--config", o.config, "key=value configuration file");
  add_channel(bounds, true);
  add_channel(rates, false);
  rates->add_option("--beta", o.beta, "Reconciliation efficiency")->capture_default_str();
  rates->add_option("--grid", o.grid, "Transmission grid start:stop:steps[:log]")->capture_default_str();
  rates->add_option("--out", o.out, "Output CSV path (stdout when omitted)");
  add_channel(attack, true);
  attack->add_option("--kind", o.kind, "feedforward | cloning | teleportation | entangling-cloner")->required();
  add_channel(search, true);
  search->add_option("--mode", o.mode, "homodyne | heterodyne | both")
      ->check(CLI::IsMember({"homodyne", "heterodyne", "both"}))
      ->capture_default_str();
  search->add_option("--pairs", o.pairs, "Ancilla pairs given to Eve")->check(CLI::Range(1, 5))->capture_default_str();
  search->add_option("--samples", o.samples, "Number of random attacks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  search->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  search->add_option("--workers", o.workers, "Worker threads (0: all cores)")->capture_default_str();
  search->add_option("--out", o.out, "Summary CSV path (stdout when omitted)");

  try {
    args = detail::merge_config(args, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }

  try {
    if (*bounds) return detail::cmd_bounds(o, out);
    if (*rates) return detail::cmd_rates(o, out);
    if (*attack) return detail::cmd_attack(o, out);
    return detail::cmd_search(o, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  } catch (const error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == errc::parameter || e.code() == errc::dimension ? usage : domain_error;
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(std::move(args), out, err);
}

}  // namespace cvqkd::cli
