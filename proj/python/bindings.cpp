#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "stbf/beamform.hpp"
#include "stbf/channel.hpp"
#include "stbf/config.hpp"
#include "stbf/errors.hpp"
#include "stbf/numerics.hpp"
#include "stbf/ofdm.hpp"
#include "stbf/sim.hpp"
#include "stbf/sttc.hpp"

namespace py = pybind11;
using namespace stbf;

namespace {

using Settings = std::vector<std::pair<std::string, std::string>>;

SimConfig make_config(const std::string& preset, const Settings& settings) {
  SimConfig cfg = preset.empty() ? SimConfig{} : find_preset(preset).base;
  for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
  return cfg;
}

py::dict weights_dict(const std::array<BeamWeights, 2>& w) {
  py::dict d;
  d["w1"] = w[0].w;
  d["w2"] = w[1].w;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "STTC-OFDM uplink with adaptive beamforming and null deepening";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<SingularMatrix>(m, "SingularMatrix", base.ptr());
  py::register_exception<InvalidDimension>(m, "InvalidDimension", base.ptr());

  py::class_<FerPoint>(m, "FerPoint")
      .def_readonly("snr_db", &FerPoint::snr_db)
      .def_readonly("frames", &FerPoint::frames)
      .def_readonly("errors", &FerPoint::errors)
      .def_readonly("fer", &FerPoint::fer)
      .def_readonly("ci_lo", &FerPoint::ci_lo)
      .def_readonly("ci_hi", &FerPoint::ci_hi)
      .def("__repr__", [](const FerPoint& p) {
        return "FerPoint(snr_db=" + std::to_string(p.snr_db) +
               ", errors=" + std::to_string(p.errors) + "/" + std::to_string(p.frames) + ")";
      });

  m.def("presets", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : scenario_presets()) out.emplace_back(e.name, e.description);
    return out;
  });

  m.def("config_keys", &config_keys);

  m.def(
      "preset_curves",
      [](const std::string& name) {
        std::vector<std::pair<std::string, Settings>> out;
        for (const auto& c : find_preset(name).curves) out.emplace_back(c.label, c.settings);
        return out;
      },
      py::arg("name"));

  m.def(
      "run_curve",
      [](const std::string& preset, const Settings& settings) {
        SimConfig cfg = make_config(preset, settings);
        py::gil_scoped_release release;
        return run_curve(cfg);
      },
      py::arg("preset") = "", py::arg("settings") = Settings{},
      "FER per SNR point for a preset base (or defaults) with key/value overrides.");

  m.def(
      "run_trial",
      [](double snr_db, std::uint64_t trial, const std::string& preset,
         const Settings& settings) {
        return run_trial(make_config(preset, settings), snr_db, trial);
      },
      py::arg("snr_db"), py::arg("trial"), py::arg("preset") = "",
      py::arg("settings") = Settings{});

  m.def(
      "inspect_trial",
      [](double snr_db, std::uint64_t trial, const std::string& preset,
         const Settings& settings) {
        Simulator sim(make_config(preset, settings));
        TrialBeams beams = sim.inspect_trial(snr_db, trial);
        py::dict d;
        d["grid"] = sim.grid().angles();
        d["adaptive_pre"] = weights_dict(beams.adaptive_pre);
        d["adaptive_post"] = weights_dict(beams.adaptive_post);
        if (beams.has_null_steering) d["null_steering"] = weights_dict(beams.null_steering);
        d["mse"] = std::vector<std::vector<double>>{beams.lms[0].mse, beams.lms[1].mse};
        d["mu"] = std::vector<double>{beams.lms[0].mu, beams.lms[1].mu};
        return d;
      },
      py::arg("snr_db"), py::arg("trial") = 0, py::arg("preset") = "",
      py::arg("settings") = Settings{},
      "Beamformer weights and LMS trace of one trial.");

  m.def("steering_vector", &steering_vector, py::arg("theta_deg"), py::arg("n_r") = 4);

  m.def(
      "beam_response",
      [](const ComplexVector& w, const std::vector<double>& angles_deg) {
        return beam_response(BeamWeights{w, 1}, angles_deg).response;
      },
      py::arg("w"), py::arg("angles_deg"));

  m.def(
      "null_steering_weights",
      [](const std::vector<double>& doas_deg, int index) {
        return null_steering_weights(doas_deg, index, doas_deg.size()).w;
      },
      py::arg("doas_deg"), py::arg("index"));

  m.def(
      "deepen_nulls",
      [](const ComplexVector& w, const std::vector<double>& centers_deg, double width_deg,
         std::size_t passes, std::size_t grid_points) {
        AngleGrid grid = AngleGrid::uniform(grid_points, static_cast<std::size_t>(w.size()));
        NullSpec spec{centers_deg, width_deg, passes};
        return deepen_nulls(BeamWeights{w, 1}, spec, grid).w;
      },
      py::arg("w"), py::arg("centers_deg"), py::arg("width_deg") = 5.0,
      py::arg("passes") = 50, py::arg("grid_points") = 181);

  m.def(
      "ofdm_modulate",
      [](const ComplexVector& x, std::size_t cp_len) { return modulate(x, cp_len).samples; },
      py::arg("x"), py::arg("cp_len"));

  m.def(
      "ofdm_demodulate",
      [](const std::vector<cd>& r, std::size_t K, std::size_t cp_len) {
        return demodulate(r, K, cp_len);
      },
      py::arg("r"), py::arg("K"), py::arg("cp_len"));

  m.def(
      "sttc_encode",
      [](const std::vector<std::uint8_t>& bits) {
        return encode(bits, default_sttc()).symbols;
      },
      py::arg("bits"), "Space-time codeword (n_T x L) of the default 16-state code.");

  m.def("jakes_process", &jakes_process, py::arg("doppler_hz"), py::arg("n_frames"),
        py::arg("frame_duration_s"), py::arg("seed"));

  m.def("clopper_pearson", &clopper_pearson, py::arg("errors"), py::arg("trials"),
        py::arg("confidence") = 0.95);
}
