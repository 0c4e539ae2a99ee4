#include <doctest.h>

#include <cmath>

#include "stbf/config.hpp"
#include "stbf/errors.hpp"
#include "stbf/sim.hpp"

using namespace stbf;

namespace {
SimConfig quiet(Canceller variant) {
  SimConfig c;
  c.variant = variant;
  c.sir_db = std::numeric_limits<double>::infinity();
  c.snr_db = {std::numeric_limits<double>::infinity()};
  c.threads = 1;
  return c;
}
}  // namespace

TEST_CASE("noise-free, CCI-free frames decode without error") {
  for (auto v : {Canceller::none, Canceller::adaptive, Canceller::null_steering}) {
    const Simulator sim(quiet(v));
    for (std::uint64_t t = 0; t < 10; ++t) {
      const auto out = sim.run_trial(std::numeric_limits<double>::infinity(), t);
      CHECK_MESSAGE(out.bit_errors == 0, to_string(v));
    }
  }
}

TEST_CASE("trials are deterministic and independent of the thread count") {
  SimConfig c;
  c.frames = 40;
  c.snr_db = {2.0};
  c.threads = 1;
  const Simulator sim(c);
  for (std::uint64_t t = 0; t < 5; ++t)
    CHECK(sim.run_trial(2.0, t).bit_errors == sim.run_trial(2.0, t).bit_errors);
  CHECK(run_trial(c, 2.0, 3) == run_trial(c, 2.0, 3));
  const auto a = run_curve(c);
  c.threads = 3;
  const auto b = run_curve(c);
  CHECK(a[0].errors == b[0].errors);
}

TEST_CASE("FER falls with SNR") {
  SimConfig c = quiet(Canceller::none);
  c.snr_db = {-4.0, 0.0, 6.0};
  c.frames = 150;
  const auto pts = run_curve(c);
  CHECK(pts[0].fer > pts[1].fer);
  CHECK(pts[1].fer > pts[2].fer);
  for (const auto& p : pts) {
    CHECK(p.ci_lo <= p.fer);
    CHECK(p.fer <= p.ci_hi);
  }
}

TEST_CASE("lower SIR hurts a single-antenna conventional receiver") {
  SimConfig c;
  c.variant = Canceller::none;
  c.conventional_antennas = 1;
  c.snr_db = {14.0};
  c.frames = 200;
  c.sir_db = 5.0;
  const auto low = run_curve(c);
  c.sir_db = 15.0;
  const auto high = run_curve(c);
  CHECK(low[0].errors > high[0].errors);
}

TEST_CASE("Clopper-Pearson interval") {
  const auto [lo0, hi0] = clopper_pearson(0, 100);
  CHECK(lo0 == 0.0);
  // Closed form for zero events: 1 - (alpha/2)^(1/n).
  CHECK(hi0 == doctest::Approx(1.0 - std::pow(0.025, 1.0 / 100.0)).epsilon(1e-9));
  const auto [lon, hin] = clopper_pearson(100, 100);
  CHECK(hin == 1.0);
  CHECK(lon == doctest::Approx(std::pow(0.025, 1.0 / 100.0)).epsilon(1e-9));
  const auto p = make_fer_point(10.0, 30, 200);
  CHECK(p.fer == doctest::Approx(0.15));
  CHECK(p.ci_lo < 0.15);
  CHECK(p.ci_hi > 0.15);
  // Reference values for 30/200 at 95%.
  CHECK(p.ci_lo == doctest::Approx(0.1036).epsilon(1e-3));
  CHECK(p.ci_hi == doctest::Approx(0.2073).epsilon(1e-3));
  CHECK_THROWS_AS(clopper_pearson(3, 2), InvalidDimension);
}

TEST_CASE("proportion tests") {
  CHECK(two_proportion_z(10, 100, 10, 100) == 0.0);
  CHECK(two_proportion_z(0, 100, 0, 100) == 0.0);
  // 30/100 vs 10/100: pooled p = 0.2, se = sqrt(0.2*0.8*0.02).
  CHECK(two_proportion_z(30, 100, 10, 100) == doctest::Approx(0.2 / std::sqrt(0.0032)));
  CHECK(homogeneity_p_value({{10, 100}, {10, 100}, {10, 100}}) == doctest::Approx(1.0));
  CHECK(homogeneity_p_value({{0, 100}, {0, 100}}) == 1.0);
  // Chi-square with 1 dof equals z^2 for two groups.
  const double z = two_proportion_z(30, 100, 10, 100);
  const double p = homogeneity_p_value({{30, 100}, {10, 100}});
  CHECK(p == doctest::Approx(std::erfc(std::abs(z) / std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("presets") {
  const auto all = scenario_presets();
  const std::vector<std::string> names{"fig4_pattern", "fig6_conventional_sir", "fig7_conventional_delay",
                                       "fig8_proposed_delay", "fig9_interferers",
                                       "fig10_angle_separation", "fig11_comparison"};
  REQUIRE(all.size() == names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    CHECK(all[i].name == names[i]);
    for (const auto& [label, cfg] : all[i].expand()) {
      cfg.validate();
      CHECK(cfg.doppler_hz == 50.0);
      if (all[i].sweep_key != "delay_us") CHECK(cfg.delay_us == 15.0);
      CHECK(cfg.null_width_deg == 5.0);
    }
  }
  const auto fig4 = find_preset("fig4_pattern").base;
  CHECK(fig4.doa.all_doas() == std::vector<double>{10, -20, -60, 40});

  const auto fig9 = find_preset("fig9_interferers").expand();
  REQUIRE(fig9.size() == 3);
  CHECK(fig9[2].second.doa.all_doas() == std::vector<double>{20, -60, 50, -20, 80, 0, 35, -45});
  CHECK(fig9[1].second.doa.all_doas() == std::vector<double>{20, -60, 50, -20, 80, 0});

  const auto fig8 = find_preset("fig8_proposed_delay").expand();
  REQUIRE(fig8.size() == 3);
  CHECK(fig8[0].second.delay_samples() == 5);
  CHECK(fig8[2].second.delay_samples() == 30);
  CHECK_THROWS_AS(find_preset("nope"), ConfigError);
}

TEST_CASE("pattern inspection exposes all beams") {
  const auto cfg = find_preset("fig4_pattern").base;
  const Simulator sim(cfg);
  const auto tb = sim.inspect_trial(10.0, 0);
  CHECK(tb.has_null_steering);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(tb.lms[l].mse.size() == cfg.lms.max_frames + 1);
    CHECK(tb.adaptive_pre[l].index == static_cast<int>(l + 1));
  }
}

TEST_CASE("config validation") {
  SimConfig c;
  c.frames = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SimConfig{};
  c.delay_us = 41.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SimConfig{};
  c.variant = Canceller::null_steering;
  c.doa.interferers.clear();
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SimConfig{};
  c.doa.desired.path1_deg = -90.0;
  CHECK_THROWS_AS(Simulator{c}, ConfigError);
}
