#include "stbf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "stbf/config.hpp"
#include "stbf/errors.hpp"

namespace stbf {

const char* to_string(Canceller c) {
  switch (c) {
    case Canceller::none: return "none";
    case Canceller::adaptive: return "adaptive";
    case Canceller::null_steering: return "null_steering";
  }
  return "?";
}

std::size_t SimConfig::delay_samples() const {
  return static_cast<std::size_t>(std::llround(delay_us / sample_period_us));
}

double SimConfig::frame_duration_s() const {
  return static_cast<double>(subcarriers) * sample_period_us * 1e-6;
}

PilotPlan SimConfig::pilot_plan() const {
  if (!pilot_indices.empty())
    return make_pilot_plan(subcarriers, pilot_indices, doa.n_t, pilot_seed);
  if (pilot_spacing == 0) throw ConfigError("pilot.spacing must be >= 1");
  return evenly_spaced_pilot_plan(subcarriers, pilot_spacing, doa.n_t, pilot_seed);
}

void SimConfig::validate() const {
  if (frames < 1) throw ConfigError("frames must be >= 1");
  if (snr_db.empty()) throw ConfigError("snr_db: at least one SNR point required");
  if (!(delay_us >= 0.0) || !(sample_period_us > 0.0))
    throw ConfigError("delay_us must be >= 0 and sample_period_us > 0");
  if (!(doppler_hz >= 0.0)) throw ConfigError("doppler_hz must be >= 0");
  if (std::isnan(sir_db)) throw ConfigError("sir_db must be a number or inf");
  if (cp_len >= subcarriers) throw ConfigError("cp_len must be shorter than the frame");
  DoaScenario s = doa;
  s.delays = {0, delay_samples()};
  s.validate(cp_len);
  if (grid_points < doa.n_r) throw ConfigError("grid.points must be >= n_r");
  if (code.n_tx() != 2 || code.order() != 4)
    throw ConfigError("sttc: two-antenna QPSK code required");
  if (variant == Canceller::null_steering && s.all_doas().size() != doa.n_r)
    throw ConfigError("null steering needs exactly n_r DOAs (desired plus interferer paths)");
  lms.validate();
  if (conventional_antennas > doa.n_r) throw ConfigError("conventional.antennas must be <= n_r");
  if (!(null_width_deg > 0.0)) throw ConfigError("deepen.width_deg must be > 0");
}

std::pair<double, double> clopper_pearson(std::size_t errors, std::size_t trials,
                                          double confidence) {
  if (trials == 0 || errors > trials) throw InvalidDimension("clopper_pearson: need 0 <= errors <= trials > 0");
  const double a = (1.0 - confidence) / 2.0;
  const double x = static_cast<double>(errors), n = static_cast<double>(trials);
  double lo = 0.0, hi = 1.0;
  if (errors > 0) lo = boost::math::quantile(boost::math::beta_distribution<double>(x, n - x + 1), a);
  if (errors < trials) hi = boost::math::quantile(boost::math::beta_distribution<double>(x + 1, n - x), 1 - a);
  return {lo, hi};
}

FerPoint make_fer_point(double snr_db, std::size_t errors, std::size_t trials) {
  FerPoint p;
  p.snr_db = snr_db;
  p.frames = trials;
  p.errors = errors;
  p.fer = static_cast<double>(errors) / static_cast<double>(trials);
  std::tie(p.ci_lo, p.ci_hi) = clopper_pearson(errors, trials);
  return p;
}

struct Simulator::Realization {
  std::vector<ArraySnapshot> snapshots;  // warm-up frames then the data frame
  std::vector<PathGains> desired_gains;  // per snapshot
  Bits info_bits;                        // data frame payload
};

Simulator::Simulator(SimConfig config)
    : cfg_(std::move(config)),
      plan_((cfg_.validate(), cfg_.pilot_plan())),
      grid_(AngleGrid::uniform(cfg_.grid_points, cfg_.doa.n_r)) {
  cfg_.doa.delays = {0, cfg_.delay_samples()};
  if (plan_.data_count() < cfg_.code.tail_length() + 1)
    throw ConfigError("too few data subcarriers for the trellis tail");
}

namespace {

Bits random_bits(std::size_t n, Rng& rng) {
  Bits b(n);
  std::uniform_int_distribution<int> bit(0, 1);
  for (auto& v : b) v = static_cast<std::uint8_t>(bit(rng));
  return b;
}

MobileFrames modulate_rows(const std::vector<ComplexVector>& spectra, std::size_t cp) {
  const auto len = static_cast<Eigen::Index>(spectra[0].size()) + static_cast<Eigen::Index>(cp);
  MobileFrames out(static_cast<Eigen::Index>(spectra.size()), len);
  for (std::size_t i = 0; i < spectra.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = modulate(spectra[i], cp).samples.transpose();
  return out;
}

MobileFrames sttc_frames(const Bits& bits, const TrellisCode& code, const PilotPlan& plan,
                         std::size_t cp, const std::vector<std::vector<cd>>& pilots) {
  const SpaceTimeCodeword cw = encode(bits, code);
  std::vector<ComplexVector> spectra;
  for (std::size_t i = 0; i < pilots.size(); ++i) {
    const ComplexRow row = cw.symbols.row(static_cast<Eigen::Index>(i));
    spectra.push_back(multiplex(std::span<const cd>(row.data(), static_cast<std::size_t>(row.size())),
                                pilots[i], plan));
  }
  return modulate_rows(spectra, cp);
}

std::vector<cd> random_qpsk(std::size_t n, Rng& rng, cd rotation) {
  std::uniform_int_distribution<int> pick(0, 3);
  std::vector<cd> v(n);
  for (auto& x : v) x = psk_point(pick(rng), 4) * rotation;
  return v;
}

const cd kPilotRotation{std::sqrt(0.5), std::sqrt(0.5)};

ComplexVector demod_row(const ComplexRow& r, std::size_t K, std::size_t cp) {
  return demodulate(std::span<const cd>(r.data(), static_cast<std::size_t>(r.size())), K, cp);
}

}  // namespace

Simulator::Realization Simulator::realize(double snr_db, std::uint64_t trial) const {
  const auto& doa = cfg_.doa;
  const std::size_t K = cfg_.subcarriers, cp = cfg_.cp_len;
  const std::size_t n_int = doa.interferers.size();
  Rng data_rng(derive_seed(cfg_.seed, trial, 1));
  Rng fade_rng(derive_seed(cfg_.seed, trial, 2));
  Rng noise_rng(derive_seed(cfg_.seed, trial, 3));

  // Jakes processes, indexed [mobile][path][antenna].
  std::vector<std::array<std::array<JakesProcess, 2>, 2>> fading;
  fading.reserve(1 + n_int);
  const double T = cfg_.frame_duration_s();
  for (std::size_t m = 0; m < 1 + n_int; ++m) {
    auto mk = [&] { return JakesProcess(cfg_.doppler_hz, T, fade_rng, kJakesOscillators); };
    JakesProcess a = mk(), b = mk(), c = mk(), d = mk();
    fading.push_back({{{a, b}, {c, d}}});
  }

  const double noise_var = time_domain_noise_var(snr_to_noise_var(snr_db, 1.0), K);
  const double cci = sir_to_cci_scale(cfg_.sir_db);
  const std::size_t n_bits = cfg_.code.info_bits(plan_.data_count());

  Realization real;
  const std::size_t n_frames = cfg_.warmup_frames + 1;
  for (std::size_t f = 0; f < n_frames; ++f) {
    Bits bits = random_bits(n_bits, data_rng);
    const MobileFrames desired = sttc_frames(bits, cfg_.code, plan_, cp, plan_.pilots);
    std::vector<MobileFrames> others;
    for (std::size_t j = 0; j < n_int; ++j) {
      MobileFrames y;
      if (cfg_.cci_signal == InterfererSignal::sttc) {
        const Bits ib = random_bits(n_bits, data_rng);
        std::vector<std::vector<cd>> pil;
        for (std::size_t i = 0; i < doa.n_t; ++i)
          pil.push_back(random_qpsk(plan_.pilot_count(), data_rng, kPilotRotation));
        y = sttc_frames(ib, cfg_.code, plan_, cp, pil);
      } else {
        std::vector<ComplexVector> spectra;
        for (std::size_t i = 0; i < doa.n_t; ++i) {
          const auto v = random_qpsk(K, data_rng, cd{1.0, 0.0});
          spectra.emplace_back(Eigen::Map<const ComplexVector>(v.data(), static_cast<Eigen::Index>(K)));
        }
        y = modulate_rows(spectra, cp);
      }
      others.push_back(y * cci);
    }
    std::vector<PathGains> gains;
    for (std::size_t m = 0; m < 1 + n_int; ++m) {
      PathGains h;
      for (int p = 0; p < 2; ++p)
        for (int i = 0; i < 2; ++i)
          h(p, i) = std::sqrt(doa.path_powers[static_cast<std::size_t>(p)]) *
                    fading[m][static_cast<std::size_t>(p)][static_cast<std::size_t>(i)].at(static_cast<double>(f));
      gains.push_back(h);
    }
    real.snapshots.push_back(synthesize_received(desired, others, doa, gains, noise_var, noise_rng));
    real.desired_gains.push_back(gains[0]);
    if (f + 1 == n_frames) real.info_bits = std::move(bits);
  }
  return real;
}

std::array<BeamWeights, 2> Simulator::null_steering() const {
  const auto doas = cfg_.doa.all_doas();
  return {null_steering_weights(doas, 1, cfg_.doa.n_r), null_steering_weights(doas, 2, cfg_.doa.n_r)};
}

TrialBeams Simulator::train(const Realization& real, bool need_adaptive) const {
  TrialBeams tb;
  const auto doas = cfg_.doa.all_doas();
  if (doas.size() == cfg_.doa.n_r) {
    tb.null_steering = null_steering();
    tb.has_null_steering = true;
  }
  if (!need_adaptive) return tb;
  const std::size_t K = cfg_.subcarriers, cp = cfg_.cp_len;
  std::vector<ComplexMatrix> blocks;
  for (const auto& V : real.snapshots) blocks.push_back(strip_prefix(V, K, cp));
  std::vector<PilotObservation> obs;
  for (const auto& b : blocks) obs.push_back(observe_pilots(b, plan_, ComplexVector::Zero(static_cast<Eigen::Index>(plan_.pilot_count()))));

  for (int l = 1; l <= 2; ++l) {
    const auto p = static_cast<std::size_t>(l - 1);
    for (std::size_t f = 0; f < obs.size(); ++f) {
      obs[f].reference = cfg_.lms_reference == LmsReference::path
          ? path_pilot_reference(plan_, real.desired_gains[f], p, cfg_.doa.delays[p])
          : ComplexVector(Eigen::Map<const ComplexVector>(plan_.pilots[p].data(), static_cast<Eigen::Index>(plan_.pilot_count())));
    }
    // Steered initialization looks at the beamformer's own path.
    LmsConfig lc = cfg_.lms;
    lc.init_doa_deg = p == 0 ? cfg_.doa.desired.path1_deg : cfg_.doa.desired.path2_deg;
    tb.lms[p] = train_lms(lc, obs, l);
    tb.adaptive_pre[p] = normalize_to_peak(tb.lms[p].weights, grid_);
    if (cfg_.deepen_passes == 0) {
      tb.adaptive_post[p] = tb.adaptive_pre[p];
      continue;
    }
    NullSpec spec;
    spec.width_deg = cfg_.null_width_deg;
    spec.passes = cfg_.deepen_passes;
    spec.centers_deg.push_back(p == 0 ? cfg_.doa.desired.path2_deg : cfg_.doa.desired.path1_deg);
    for (const auto& m : cfg_.doa.interferers) {
      spec.centers_deg.push_back(m.path1_deg);
      spec.centers_deg.push_back(m.path2_deg);
    }
    tb.adaptive_post[p] = normalize_to_peak(deepen_nulls(tb.adaptive_pre[p], spec, grid_), grid_);
  }
  return tb;
}

TrialBeams Simulator::inspect_trial(double snr_db, std::uint64_t trial) const {
  return train(realize(snr_db, trial), true);
}

TrialOutcome Simulator::run_trial(double snr_db, std::uint64_t trial) const {
  const Realization real = realize(snr_db, trial);
  const std::size_t K = cfg_.subcarriers, cp = cfg_.cp_len;
  const auto& data = plan_.data_indices;
  const std::size_t L = data.size();
  const ArraySnapshot& V = real.snapshots.back();
  const PathGains& h = real.desired_gains.back();
  const auto& doa = cfg_.doa;
  const std::size_t tau = doa.delays[1];

  DecoderInput in;
  in.steps = L;
  in.n_tx = 2;
  if (cfg_.variant == Canceller::none) {
    const std::size_t n_r = cfg_.conventional_antennas ? cfg_.conventional_antennas : doa.n_r;
    in.rows = n_r;
    in.row_scale.assign(n_r, 1.0);
    std::vector<ComplexVector> R;
    for (std::size_t j = 0; j < n_r; ++j) R.push_back(demod_row(V.row(static_cast<Eigen::Index>(j)), K, cp));
    const ComplexVector a1 = steering_vector(doa.desired.path1_deg, doa.n_r);
    const ComplexVector a2 = steering_vector(doa.desired.path2_deg, doa.n_r);
    in.received.resize(L * n_r);
    in.channel.resize(L * n_r * 2);
    for (std::size_t t = 0; t < L; ++t) {
      const std::size_t k = data[t];
      const cd om = delay_phase(k, tau, K);
      for (std::size_t j = 0; j < n_r; ++j) {
        const auto J = static_cast<Eigen::Index>(j);
        in.received[t * n_r + j] = R[j](static_cast<Eigen::Index>(k));
        for (int i = 0; i < 2; ++i)
          in.channel[(t * n_r + j) * 2 + static_cast<std::size_t>(i)] = a1(J) * h(0, i) + a2(J) * h(1, i) * om;
      }
    }
  } else {
    const TrialBeams tb = train(real, cfg_.variant == Canceller::adaptive);
    const auto& w = cfg_.variant == Canceller::adaptive ? tb.adaptive_post : tb.null_steering;
    const auto variant = cfg_.variant == Canceller::adaptive ? BeamformerVariant::adaptive
                                                              : BeamformerVariant::null_steering;
    const EffectiveChannel ch = effective_channel(variant, w[0], w[1], h, doa.desired.path1_deg,
                                                  doa.desired.path2_deg, tau, K, data);
    in.rows = 2;
    in.row_scale = {w[0].w.squaredNorm(), w[1].w.squaredNorm()};
    std::array<ComplexVector, 2> R{demod_row(beamformer_output(w[0], V), K, cp),
                                   demod_row(beamformer_output(w[1], V), K, cp)};
    in.received.resize(L * 2);
    in.channel.resize(L * 4);
    for (std::size_t t = 0; t < L; ++t) {
      for (int l = 0; l < 2; ++l) {
        in.received[t * 2 + static_cast<std::size_t>(l)] = R[static_cast<std::size_t>(l)](static_cast<Eigen::Index>(data[t]));
        for (int i = 0; i < 2; ++i)
          in.channel[(t * 2 + static_cast<std::size_t>(l)) * 2 + static_cast<std::size_t>(i)] = ch.per_subcarrier[t](l, i);
      }
    }
  }
  const Bits decoded = viterbi_decode(in, cfg_.code);
  TrialOutcome out;
  for (std::size_t i = 0; i < decoded.size(); ++i) out.bit_errors += decoded[i] != real.info_bits[i];
  out.frame_error = out.bit_errors > 0;
  return out;
}

FerPoint Simulator::run_point(double snr_db) const {
  std::size_t threads = cfg_.threads ? cfg_.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg_.frames);
  std::atomic<std::size_t> next{0}, errors{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < cfg_.frames; t = next++)
        if (run_trial(snr_db, t).frame_error) ++errors;
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = cfg_.frames;
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return make_fer_point(snr_db, errors.load(), cfg_.frames);
}

bool run_trial(const SimConfig& config, double snr_db, std::uint64_t trial) {
  return Simulator(config).run_trial(snr_db, trial).frame_error;
}

std::vector<FerPoint> run_curve(const SimConfig& config, const ProgressFn& progress) {
  const Simulator sim(config);
  std::vector<FerPoint> out;
  for (double snr : config.snr_db) {
    out.push_back(sim.run_point(snr));
    if (progress) progress(out.back());
  }
  return out;
}

std::vector<std::pair<std::string, SimConfig>> Experiment::expand() const {
  std::vector<std::pair<std::string, SimConfig>> out;
  if (curves.empty()) {
    out.emplace_back("", base);
    return out;
  }
  for (const auto& c : curves) {
    SimConfig cfg = base;
    for (const auto& [k, v] : c.settings) apply_setting(cfg, k, v);
    out.emplace_back(c.label, std::move(cfg));
  }
  return out;
}

namespace {

Experiment::Curve curve(std::string label, std::vector<std::pair<std::string, std::string>> s) {
  return {std::move(label), std::move(s)};
}

Experiment preset(std::string name, std::string description, Canceller variant) {
  Experiment e;
  e.name = std::move(name);
  e.description = std::move(description);
  e.base.variant = variant;
  e.base.sir_db = 5.0;
  return e;
}

}  // namespace

std::vector<Experiment> scenario_presets() {
  std::vector<Experiment> out;

  Experiment fig4 = preset("fig4_pattern", "beam patterns before/after null deepening and null steering",
                           Canceller::adaptive);
  fig4.base.snr_db = {10.0};
  fig4.base.sir_db = 10.0;
  out.push_back(fig4);

  Experiment fig6 = preset("fig6_conventional_sir", "conventional receiver, SIR 5/10/15 dB", Canceller::none);
  fig6.sweep_key = "sir_db";
  for (const char* v : {"5", "10", "15"}) fig6.curves.push_back(curve(v, {{"sir_db", v}}));
  out.push_back(fig6);

  Experiment fig7 = preset("fig7_conventional_delay", "conventional receiver, delay 5/15/30 us", Canceller::none);
  fig7.sweep_key = "delay_us";
  for (const char* v : {"5", "15", "30"}) fig7.curves.push_back(curve(v, {{"delay_us", v}}));
  out.push_back(fig7);

  Experiment fig8 = preset("fig8_proposed_delay", "adaptive beamforming with null deepening, delay 5/15/30 us",
                           Canceller::adaptive);
  fig8.sweep_key = "delay_us";
  for (const char* v : {"5", "15", "30"}) fig8.curves.push_back(curve(v, {{"delay_us", v}}));
  out.push_back(fig8);

  Experiment fig9 = preset("fig9_interferers", "adaptive beamforming, 1/2/3 interferers", Canceller::adaptive);
  fig9.sweep_key = "interferers";
  fig9.curves.push_back(curve("1", {{"desired_doa", "10,-20"}, {"cci_doa", "-60,40"}}));
  fig9.curves.push_back(curve("2", {{"desired_doa", "20,-60"}, {"cci_doa", "50,-20,80,0"}}));
  fig9.curves.push_back(curve("3", {{"desired_doa", "20,-60"}, {"cci_doa", "50,-20,80,0,35,-45"}}));
  out.push_back(fig9);

  Experiment fig10 = preset("fig10_angle_separation",
                            "adaptive vs null steering for shrinking desired-path separation",
                            Canceller::adaptive);
  fig10.sweep_key = "curve";
  for (const char* d : {"10,-20", "10,-5", "10,5"}) {
    const std::string tag = std::string(d);
    fig10.curves.push_back(curve("adaptive@" + tag, {{"variant", "adaptive"}, {"desired_doa", d}}));
    fig10.curves.push_back(curve("null_steering@" + tag, {{"variant", "null_steering"}, {"desired_doa", d}}));
  }
  out.push_back(fig10);

  Experiment fig11 = preset("fig11_comparison", "conventional vs null steering vs adaptive with deepening",
                            Canceller::adaptive);
  fig11.sweep_key = "variant";
  for (const char* v : {"none", "null_steering", "adaptive"}) fig11.curves.push_back(curve(v, {{"variant", v}}));
  out.push_back(fig11);
  return out;
}

Experiment find_preset(const std::string& name) {
  for (auto& e : scenario_presets())
    if (e.name == name) return e;
  throw ConfigError("unknown preset '" + name + "'");
}

double two_proportion_z(std::size_t e1, std::size_t n1, std::size_t e2, std::size_t n2) {
  if (n1 == 0 || n2 == 0) throw InvalidDimension("two_proportion_z: empty sample");
  const double p1 = static_cast<double>(e1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(e2) / static_cast<double>(n2);
  const double p = static_cast<double>(e1 + e2) / static_cast<double>(n1 + n2);
  const double se = std::sqrt(p * (1 - p) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
  if (se == 0.0) return 0.0;
  return (p1 - p2) / se;
}

double homogeneity_p_value(const std::vector<std::pair<std::size_t, std::size_t>>& groups) {
  if (groups.size() < 2) throw InvalidDimension("homogeneity_p_value: need >= 2 groups");
  double E = 0, N = 0;
  for (const auto& [e, n] : groups) {
    if (n == 0 || e > n) throw InvalidDimension("homogeneity_p_value: bad group");
    E += static_cast<double>(e);
    N += static_cast<double>(n);
  }
  const double p = E / N;
  if (p == 0.0 || p == 1.0) return 1.0;
  double chi2 = 0;
  for (const auto& [e, n] : groups) {
    const double exp_e = p * static_cast<double>(n), exp_s = (1 - p) * static_cast<double>(n);
    const double de = static_cast<double>(e) - exp_e;
    chi2 += de * de / exp_e + de * de / exp_s;
  }
  boost::math::chi_squared_distribution<double> dist(static_cast<double>(groups.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi2));
}

}  // namespace stbf
