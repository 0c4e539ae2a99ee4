#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stbf/config.hpp"
#include "stbf/errors.hpp"
#include "stbf/sim.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frames;
  std::uint64_t trial = 0;
  bool keys = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key=value config file");
  cmd->add_option("--preset", o.preset, "named scenario preset (see 'presets')");
  cmd->add_option("--out", o.out, "output directory (default: $STBF_OUT_DIR, then cwd)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--set", o.overrides, "override a config key: key=value (repeatable)");
  cmd->add_option("--frames", o.frames, "frames per SNR point");
}

stbf::Experiment load(const Options& o) {
  if (!o.config.empty() && !o.preset.empty())
    throw stbf::ConfigError("give either --config or --preset, not both");
  stbf::Experiment e;
  if (!o.config.empty()) {
    e = stbf::load_experiment(o.config);
    e.name = fs::path(o.config).stem().string();
  } else if (!o.preset.empty()) {
    e = stbf::find_preset(o.preset);
  } else {
    e.name = "default";
  }
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw stbf::ConfigError("--set expects key=value, got '" + kv + "'");
    stbf::apply_setting(e.base, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) e.base.seed = *o.seed;
  if (o.frames) e.base.frames = *o.frames;
  // Overrides also win over curve settings for keys they name.
  for (auto& c : e.curves)
    for (const auto& kv : o.overrides) {
      const auto key = kv.substr(0, kv.find('='));
      std::erase_if(c.settings, [&](const auto& s) { return s.first == key; });
    }
  return e;
}

fs::path out_dir(const Options& o) {
  fs::path dir = !o.out.empty() ? fs::path(o.out)
                 : std::getenv("STBF_OUT_DIR") ? fs::path(std::getenv("STBF_OUT_DIR"))
                                               : fs::current_path();
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw stbf::Error("cannot write " + path.string());
  f << std::setprecision(10);
  return f;
}

void write_pattern(const fs::path& path, const stbf::BeamWeights& w, const stbf::AngleGrid& grid) {
  const auto p = stbf::beam_response(w, grid.angles());
  auto f = open_csv(path);
  f << "angle_deg,re,im,mag_db\n";
  for (std::size_t i = 0; i < p.angles_deg.size(); ++i) {
    const auto b = p.response[i];
    f << p.angles_deg[i] << ',' << b.real() << ',' << b.imag() << ','
      << 20.0 * std::log10(std::max(std::abs(b), 1e-300)) << '\n';
  }
  std::cout << path.string() << '\n';
}

int cmd_pattern(const Options& o) {
  const auto e = load(o);
  const stbf::Simulator sim(e.base);
  const auto tb = sim.inspect_trial(e.base.snr_db.front(), o.trial);
  const fs::path dir = out_dir(o);
  for (std::size_t l = 0; l < 2; ++l) {
    const std::string stem = e.name + "_w" + std::to_string(l + 1);
    write_pattern(dir / (stem + "_adaptive_pre.csv"), tb.adaptive_pre[l], sim.grid());
    write_pattern(dir / (stem + "_adaptive_post.csv"), tb.adaptive_post[l], sim.grid());
    if (tb.has_null_steering)
      write_pattern(dir / (stem + "_null_steering.csv"), tb.null_steering[l], sim.grid());
  }
  if (!tb.has_null_steering)
    std::cerr << "note: null-steering pattern skipped (DOA count differs from n_r)\n";
  return 0;
}

int cmd_converge(const Options& o) {
  const auto e = load(o);
  const stbf::Simulator sim(e.base);
  const auto tb = sim.inspect_trial(e.base.snr_db.front(), o.trial);
  const fs::path path = out_dir(o) / (e.name + "_converge.csv");
  auto f = open_csv(path);
  f << "iteration,mse_w1,mse_w2\n";
  const std::size_t n = std::max(tb.lms[0].mse.size(), tb.lms[1].mse.size());
  for (std::size_t i = 0; i < n; ++i) {
    f << i << ',';
    if (i < tb.lms[0].mse.size()) f << tb.lms[0].mse[i];
    f << ',';
    if (i < tb.lms[1].mse.size()) f << tb.lms[1].mse[i];
    f << '\n';
  }
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_fer(const Options& o) {
  const auto e = load(o);
  const auto curves = e.expand();
  for (const auto& [label, cfg] : curves) cfg.validate();
  const fs::path path = out_dir(o) / (e.name + "_fer.csv");
  auto f = open_csv(path);
  if (!e.sweep_key.empty()) f << e.sweep_key << ',';
  f << "snr_db,frames,errors,fer,ci_lo,ci_hi\n";
  for (const auto& [label, cfg] : curves) {
    const auto points = stbf::run_curve(cfg, [&](const stbf::FerPoint& p) {
      std::cerr << (label.empty() ? "" : e.sweep_key + "=" + label + " ") << "snr=" << p.snr_db
                << " dB  fer=" << p.fer << " (" << p.errors << "/" << p.frames << ")\n";
    });
    for (const auto& p : points) {
      if (!e.sweep_key.empty()) f << label << ',';
      f << p.snr_db << ',' << p.frames << ',' << p.errors << ',' << p.fer << ',' << p.ci_lo << ','
        << p.ci_hi << '\n';
    }
  }
  std::cout << path.string() << '\n';
  return 0;
}

int cmd_presets(const Options& o) {
  if (o.keys) {
    for (const auto& [k, help] : stbf::config_keys()) std::cout << std::left << std::setw(24) << k << help << '\n';
    return 0;
  }
  for (const auto& e : stbf::scenario_presets()) {
    std::cout << e.name << ": " << e.description << '\n';
    for (const auto& c : e.curves) {
      std::cout << "  " << e.sweep_key << '=' << c.label << ':';
      for (const auto& [k, v] : c.settings) std::cout << ' ' << k << '=' << v;
      std::cout << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STTC-OFDM uplink simulator with adaptive beamforming"};
  app.require_subcommand(1);
  Options o;
  auto* pattern = app.add_subcommand("pattern", "write beam pattern CSVs for one trained trial");
  auto* fer = app.add_subcommand("fer", "run FER curves and write one CSV");
  auto* converge = app.add_subcommand("converge", "write the LMS MSE trace of both beamformers");
  auto* presets = app.add_subcommand("presets", "list scenario presets");
  for (auto* cmd : {pattern, fer, converge}) add_common(cmd, o);
  for (auto* cmd : {pattern, converge}) cmd->add_option("--trial", o.trial, "trial index (default 0)");
  presets->add_flag("--keys", o.keys, "list documented config keys instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*pattern) return cmd_pattern(o);
    if (*fer) return cmd_fer(o);
    if (*converge) return cmd_converge(o);
    return cmd_presets(o);
  } catch (const stbf::ConfigError& e) {
    std::cerr << "stbf: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "stbf: error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
