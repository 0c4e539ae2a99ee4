#include "stbf/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "stbf/errors.hpp"

namespace stbf {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
  throw ConfigError(std::string(key) + ": invalid value '" + std::string(value) + "' (" + std::string(why) + ")");
}

double to_double(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (v == "-inf") return -std::numeric_limits<double>::infinity();
  if (v.empty()) bad(key, value, "expected a number");
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || std::isnan(d)) bad(key, value, "expected a number");
  return d;
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    bad(key, value, "expected a non-negative integer");
  errno = 0;
  const unsigned long long n = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) bad(key, value, "out of range");
  return n;
}

std::size_t to_size(std::string_view key, std::string_view value) {
  return static_cast<std::size_t>(to_u64(key, value));
}

std::vector<int> to_int_list(std::string_view key, std::string_view value) {
  std::vector<int> out;
  for (const auto& item : split(value, ',')) out.push_back(static_cast<int>(to_u64(key, item)));
  return out;
}

std::vector<MobileDoa> to_doa_pairs(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v.empty() || v == "none") return {};
  std::vector<double> d;
  for (const auto& item : split(v, ',')) d.push_back(to_double(key, item));
  if (d.size() % 2 != 0) bad(key, value, "angles come in path1,path2 pairs");
  std::vector<MobileDoa> out;
  for (std::size_t i = 0; i < d.size(); i += 2) out.push_back({d[i], d[i + 1]});
  return out;
}

Canceller to_variant(std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  if (v == "none" || v == "conventional") return Canceller::none;
  if (v == "adaptive") return Canceller::adaptive;
  if (v == "null_steering") return Canceller::null_steering;
  bad(key, value, "expected none|adaptive|null_steering");
}

// Error events up to this length are checked when a custom code is loaded.
constexpr std::size_t kRankGateDepth = 6;

void replace_code(SimConfig& cfg, std::vector<int> next, std::vector<int> outputs) {
  const std::size_t order = 4;
  if (next.empty() || next.size() % order != 0)
    throw ConfigError("sttc.next_state: length must be a multiple of 4");
  const int states = static_cast<int>(next.size() / order);
  try {
    TrellisCode code(states, 4, 2, std::move(next), std::move(outputs));
    if (verify_rank_criterion(code, kRankGateDepth).min_rank < 2)
      throw ConfigError("code fails the rank-2 diversity criterion");
    cfg.code = std::move(code);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("sttc tables: ") + e.what());
  }
}

struct KeyInfo {
  const char* key;
  const char* help;
};

constexpr KeyInfo kKeys[] = {
    {"variant", "none (conventional 4-antenna receiver) | adaptive | null_steering"},
    {"snr_db", "comma-separated SNR points in dB"},
    {"sir_db", "signal-to-interference ratio per interferer in dB, or inf"},
    {"doppler_hz", "maximum Doppler frequency of every path"},
    {"delay_us", "second-path delay in microseconds"},
    {"sample_period_us", "time-domain sample period in microseconds"},
    {"desired_doa", "desired mobile path DOAs: theta1,theta2 (degrees)"},
    {"cci_doa", "interferer path DOAs: theta1,theta2[,theta1,theta2...] or none"},
    {"path_powers", "average power of path 1 and path 2"},
    {"n_r", "receive array elements"},
    {"subcarriers", "OFDM subcarriers K"},
    {"cp_len", "cyclic prefix length in samples"},
    {"pilot.spacing", "pilot every N-th subcarrier starting at 0"},
    {"pilot.indices", "explicit comma-separated pilot subcarriers (overrides spacing)"},
    {"pilot.seed", "seed of the pilot symbol draw"},
    {"frames", "frames per SNR point"},
    {"seed", "master seed"},
    {"threads", "worker threads, 0 = hardware concurrency"},
    {"lms.mu", "fixed LMS step size, or auto"},
    {"lms.step_scale", "auto step size = step_scale / pilot spectrum energy"},
    {"lms.max_frames", "maximum LMS iterations"},
    {"lms.tolerance", "relative MSE change that stops LMS early, 0 disables"},
    {"lms.init", "first_element | steered (towards the beamformer's path)"},
    {"lms.reference", "path (CSI-based path pilot contribution) | antenna (raw pilots)"},
    {"lms.warmup_frames", "extra pilot-bearing frames before the data frame"},
    {"conventional.antennas", "leading array elements used by the conventional receiver, 0 = all"},
    {"deepen.width_deg", "width of each deepened null window"},
    {"deepen.passes", "null deepening passes, 0 disables deepening"},
    {"grid.points", "beam pattern grid points over [-90, 90] degrees"},
    {"cci.signal", "sttc (coded frames with own pilots) | qpsk (random symbols on all subcarriers)"},
    {"sttc.code", "default | delay_diversity"},
    {"sttc.next_state", "custom trellis next-state table, row-major states x 4"},
    {"sttc.outputs", "custom trellis output table, row-major states x 4 x 2"},
};

}  // namespace

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(to_double("list", item));
  return out;
}

KeyValueDoc parse_key_values(std::string_view text) {
  KeyValueDoc doc;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(n) + ": empty key");
    doc.entries.push_back({key, trim(std::string_view(t).substr(eq + 1)), n});
  }
  return doc;
}

void apply_setting(SimConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  const std::string v = trim(value);
  if (key == "variant") cfg.variant = to_variant(key, v);
  else if (key == "snr_db") {
    cfg.snr_db.clear();
    for (const auto& item : split(v, ',')) cfg.snr_db.push_back(to_double(key, item));
  } else if (key == "sir_db") cfg.sir_db = to_double(key, v);
  else if (key == "doppler_hz") cfg.doppler_hz = to_double(key, v);
  else if (key == "delay_us") cfg.delay_us = to_double(key, v);
  else if (key == "sample_period_us") cfg.sample_period_us = to_double(key, v);
  else if (key == "desired_doa") {
    const auto d = to_doa_pairs(key, v);
    if (d.size() != 1) bad(key, v, "expected exactly two angles");
    cfg.doa.desired = d[0];
  } else if (key == "cci_doa") cfg.doa.interferers = to_doa_pairs(key, v);
  else if (key == "path_powers") {
    const auto p = parse_double_list(v);
    if (p.size() != 2) bad(key, v, "expected two powers");
    cfg.doa.path_powers = {p[0], p[1]};
  } else if (key == "n_r") cfg.doa.n_r = to_size(key, v);
  else if (key == "subcarriers") cfg.subcarriers = to_size(key, v);
  else if (key == "cp_len") cfg.cp_len = to_size(key, v);
  else if (key == "pilot.spacing") cfg.pilot_spacing = to_size(key, v);
  else if (key == "pilot.indices") {
    cfg.pilot_indices.clear();
    for (int i : to_int_list(key, v)) cfg.pilot_indices.push_back(static_cast<std::size_t>(i));
  } else if (key == "pilot.seed") cfg.pilot_seed = to_u64(key, v);
  else if (key == "frames") cfg.frames = to_size(key, v);
  else if (key == "seed") cfg.seed = to_u64(key, v);
  else if (key == "threads") cfg.threads = to_size(key, v);
  else if (key == "lms.mu") {
    if (v == "auto") cfg.lms.mu.reset();
    else cfg.lms.mu = to_double(key, v);
  } else if (key == "lms.step_scale") cfg.lms.step_scale = to_double(key, v);
  else if (key == "lms.max_frames") cfg.lms.max_frames = to_size(key, v);
  else if (key == "lms.tolerance") cfg.lms.tolerance = to_double(key, v);
  else if (key == "lms.init") {
    if (v == "first_element") cfg.lms.init = WeightInit::first_element;
    else if (v == "steered") cfg.lms.init = WeightInit::steered;
    else bad(key, v, "expected first_element|steered");
  } else if (key == "lms.reference") {
    if (v == "path") cfg.lms_reference = LmsReference::path;
    else if (v == "antenna") cfg.lms_reference = LmsReference::antenna;
    else bad(key, v, "expected path|antenna");
  } else if (key == "lms.warmup_frames") cfg.warmup_frames = to_size(key, v);
  else if (key == "conventional.antennas") cfg.conventional_antennas = to_size(key, v);
  else if (key == "deepen.width_deg") cfg.null_width_deg = to_double(key, v);
  else if (key == "deepen.passes") cfg.deepen_passes = to_size(key, v);
  else if (key == "grid.points") cfg.grid_points = to_size(key, v);
  else if (key == "cci.signal") {
    if (v == "sttc") cfg.cci_signal = InterfererSignal::sttc;
    else if (v == "qpsk") cfg.cci_signal = InterfererSignal::qpsk;
    else bad(key, v, "expected sttc|qpsk");
  } else if (key == "sttc.code") {
    if (v == "default") cfg.code = default_sttc();
    else if (v == "delay_diversity") cfg.code = delay_diversity_qpsk();
    else bad(key, v, "expected default|delay_diversity");
  } else if (key == "sttc.next_state") {
    replace_code(cfg, to_int_list(key, v), cfg.code.output_table());
  } else if (key == "sttc.outputs") {
    replace_code(cfg, cfg.code.next_table(), to_int_list(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

Experiment experiment_from_doc(const KeyValueDoc& doc, std::string name) {
  Experiment e;
  e.name = std::move(name);
  std::vector<std::string> sweep_values;
  // Custom tables must be applied together once both are known.
  std::vector<int> next, outputs;
  for (const auto& entry : doc.entries) {
    try {
      if (entry.key == "sweep.key") e.sweep_key = entry.value;
      else if (entry.key == "sweep.values") sweep_values = split(entry.value, ';');
      else if (entry.key == "curve") {
        const auto colon = entry.value.find(':');
        if (colon == std::string::npos) throw ConfigError("curve: expected 'label: key=value | ...'");
        Experiment::Curve c{trim(std::string_view(entry.value).substr(0, colon)), {}};
        for (const auto& kv : split(std::string_view(entry.value).substr(colon + 1), '|')) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw ConfigError("curve: expected key=value, got '" + kv + "'");
          c.settings.emplace_back(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
        }
        e.curves.push_back(std::move(c));
      } else if (entry.key == "name") e.name = entry.value;
      else if (entry.key == "description") e.description = entry.value;
      else if (entry.key == "sttc.next_state") next = to_int_list(entry.key, entry.value);
      else if (entry.key == "sttc.outputs") outputs = to_int_list(entry.key, entry.value);
      else apply_setting(e.base, entry.key, entry.value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(entry.line) + ": " + err.what());
    }
  }
  if (!next.empty() || !outputs.empty()) {
    if (next.empty() || outputs.empty())
      throw ConfigError("sttc.next_state and sttc.outputs must be given together");
    replace_code(e.base, std::move(next), std::move(outputs));
  }
  if (!sweep_values.empty()) {
    if (e.sweep_key.empty()) throw ConfigError("sweep.values requires sweep.key");
    if (!e.curves.empty()) throw ConfigError("use either sweep.values or curve lines, not both");
    for (const auto& v : sweep_values) e.curves.push_back({v, {{e.sweep_key, v}}});
  }
  if (!e.curves.empty() && e.sweep_key.empty()) e.sweep_key = "curve";
  return e;
}

Experiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return experiment_from_doc(parse_key_values(ss.str()), path);
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : kKeys) out.emplace_back(k.key, k.help);
  out.emplace_back("sweep.key", "config key (or CSV column name) distinguishing curves");
  out.emplace_back("sweep.values", "';'-separated values of sweep.key, one curve each");
  out.emplace_back("curve", "label: key=value | key=value (repeatable; one curve per line)");
  return out;
}

}  // namespace stbf
