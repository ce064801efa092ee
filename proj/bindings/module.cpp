// Python bindings for the score follower core. Spans in the C++ API are
// wrapped by value-converting lambdas; everything else binds directly.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <vector>

#include "attacca/calibration.hpp"
#include "attacca/decoder.hpp"
#include "attacca/errors.hpp"
#include "attacca/kernel.hpp"
#include "attacca/likelihood.hpp"
#include "attacca/pipeline.hpp"
#include "attacca/score.hpp"

namespace py = pybind11;
using namespace attacca;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Real-time score follower: spectral-mixture GP likelihoods over "
              "a duration-aware left-to-right decoder";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<io_error>(m, "IoError", PyExc_OSError);
    py::register_exception<numeric_error>(m, "NumericError",
                                          PyExc_ArithmeticError);

    // ── kernel ──────────────────────────────────────────────────────────
    py::class_<HumSettings>(m, "HumSettings")
        .def(py::init<>())
        .def_readwrite("enabled", &HumSettings::enabled)
        .def_readwrite("frequency", &HumSettings::frequency)
        .def_readwrite("amplitude", &HumSettings::amplitude);

    py::class_<SpectralParams>(m, "SpectralParams")
        .def(py::init<>())
        .def_readwrite("fundamentals", &SpectralParams::fundamentals)
        .def_readwrite("weights", &SpectralParams::weights)
        .def_readwrite("num_harmonics", &SpectralParams::num_harmonics)
        .def_readwrite("envelope_T", &SpectralParams::envelope_T)
        .def_readwrite("envelope_v", &SpectralParams::envelope_v)
        .def_readwrite("sigma_f", &SpectralParams::sigma_f)
        .def_readwrite("noise_sigma", &SpectralParams::noise_sigma)
        .def_readwrite("inharmonicity", &SpectralParams::inharmonicity)
        .def_readwrite("hum", &SpectralParams::hum)
        .def("validate", &SpectralParams::validate)
        .def("inharmonicity_for", &SpectralParams::inharmonicity_for);

    py::class_<FrameSpec>(m, "FrameSpec")
        .def(py::init<>())
        .def_readwrite("frame_length", &FrameSpec::frame_length)
        .def_readwrite("hop_length", &FrameSpec::hop_length)
        .def_readwrite("sample_rate", &FrameSpec::sample_rate);

    m.def("envelope_weight", &envelope_weight, py::arg("m"), py::arg("T"),
          py::arg("v"));
    m.def("inharmonic_factor", &inharmonic_factor, py::arg("m"), py::arg("B"));
    m.def("spectral_density", &spectral_density, py::arg("freq"),
          py::arg("params"));
    m.def("kernel_value", &kernel_value, py::arg("tau"), py::arg("params"));
    m.def("clamp_noise_sigma", &clamp_noise_sigma);
    m.def("build_covariance", &build_covariance, py::arg("n"),
          py::arg("sample_rate"), py::arg("params"));
    m.def("sample_gp", &sample_gp, py::arg("n"), py::arg("sample_rate"),
          py::arg("params"), py::arg("seed"));
    m.def("parse_params_text", &parse_params_text, py::arg("text"),
          py::arg("base") = SpectralParams{});
    m.def("load_params_file", &load_params_file, py::arg("path"),
          py::arg("base") = SpectralParams{});

    // ── likelihood ──────────────────────────────────────────────────────
    py::class_<CholeskyFactor>(m, "CholeskyFactor")
        .def_property_readonly("size", &CholeskyFactor::size)
        .def_readonly("log_det_half", &CholeskyFactor::log_det_half)
        .def_readonly("noise_sigma", &CholeskyFactor::noise_sigma);

    m.def(
        "lml_direct",
        [](const std::vector<double>& y, const Eigen::MatrixXd& k,
           double noise_sigma) { return lml_direct(y, k, noise_sigma); },
        py::arg("y"), py::arg("K"), py::arg("noise_sigma"));
    m.def("make_cholesky", &make_cholesky, py::arg("K"), py::arg("noise_sigma"));
    m.def(
        "lml_cholesky",
        [](const std::vector<double>& y, const CholeskyFactor& factor) {
            return lml_cholesky(y, factor);
        },
        py::arg("y"), py::arg("factor"));

    // ── score ───────────────────────────────────────────────────────────
    py::class_<ScoreState>(m, "ScoreState")
        .def_readonly("index", &ScoreState::index)
        .def_readonly("notes", &ScoreState::notes)
        .def_readonly("fundamentals", &ScoreState::fundamentals)
        .def_readonly("time_to_next", &ScoreState::time_to_next);

    py::class_<Score>(m, "Score")
        .def_readonly("states", &Score::states)
        .def("__len__", [](const Score& s) { return s.states.size(); });

    m.def("midi_to_freq", &midi_to_freq, py::arg("note"));
    m.def("make_score", &make_score, py::arg("states"),
          "Build a score from [(notes, seconds_to_next), ...]");
    m.def("parse_midi", &parse_midi, py::arg("path"));
    m.def(
        "parse_midi_bytes",
        [](const py::bytes& data) {
            const std::string buf = data;
            return parse_midi_bytes(std::span<const std::uint8_t>(
                reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size()));
        },
        py::arg("data"));
    m.def("apply_sustain", &apply_sustain, py::arg("score"), py::arg("depth"));
    m.def("dump_score", &dump_score, py::arg("score"));
    m.def("load_score_dump", &load_score_dump, py::arg("text"));

    // ── audio ───────────────────────────────────────────────────────────
    py::class_<Wave>(m, "Wave")
        .def(py::init([](std::vector<double> samples, int sample_rate) {
                 return Wave{std::move(samples), sample_rate};
             }),
             py::arg("samples"), py::arg("sample_rate"))
        .def_readwrite("samples", &Wave::samples)
        .def_readwrite("sample_rate", &Wave::sample_rate);

    py::class_<Audioframe>(m, "Audioframe")
        .def_readonly("frame_index", &Audioframe::frame_index)
        .def_readonly("samples", &Audioframe::samples);

    py::class_<PowerSpectrum>(m, "PowerSpectrum")
        .def(py::init<>())
        .def_readwrite("freq", &PowerSpectrum::freq)
        .def_readwrite("power", &PowerSpectrum::power);

    m.def("read_wav", &read_wav, py::arg("path"));
    m.def("write_wav", &write_wav, py::arg("path"), py::arg("wave"),
          py::arg("bits") = 16);
    m.def(
        "slice_samples",
        [](const std::vector<double>& samples, const FrameSpec& frames,
           double energy_threshold) {
            return slice_samples(samples, {frames, energy_threshold});
        },
        py::arg("samples"), py::arg("frames"),
        py::arg("energy_threshold") = 1e-4);
    m.def(
        "hann_power_spectrum",
        [](const std::vector<double>& frame, int sample_rate) {
            return hann_power_spectrum(frame, sample_rate);
        },
        py::arg("frame"), py::arg("sample_rate"));

    // ── duration ────────────────────────────────────────────────────────
    py::class_<TransitionProbs>(m, "TransitionProbs")
        .def_readonly("self_prob", &TransitionProbs::self_prob)
        .def_readonly("advance_prob", &TransitionProbs::advance_prob);

    m.def("transition_probs", &transition_probs, py::arg("expected_frames"),
          py::arg("run_length"));
    m.def("fixed_transition_probs", &fixed_transition_probs,
          py::arg("self_prob"));
    m.def("expected_frames_static", &expected_frames_static,
          py::arg("time_to_next"), py::arg("frame_rate"));

    py::class_<TempoTracker>(m, "TempoTracker")
        .def(py::init<int, double>(), py::arg("window"), py::arg("frame_rate"))
        .def("record", &TempoTracker::record, py::arg("frames_spent"),
             py::arg("time_to_next"))
        .def("conversion_rate", &TempoTracker::conversion_rate)
        .def("expected_frames", &TempoTracker::expected_frames,
             py::arg("time_to_next"))
        .def_property_readonly("window", &TempoTracker::window)
        .def_property_readonly("history_size", &TempoTracker::history_size);

    // ── decoder ─────────────────────────────────────────────────────────
    py::class_<DecoderConfig>(m, "DecoderConfig")
        .def(py::init<>())
        .def_readwrite("window_length", &DecoderConfig::window_length)
        .def_readwrite("window_threshold", &DecoderConfig::window_threshold)
        .def_readwrite("state_duration", &DecoderConfig::state_duration)
        .def_readwrite("fallback_self_prob", &DecoderConfig::fallback_self_prob)
        .def_readwrite("tempo_window", &DecoderConfig::tempo_window)
        .def_readwrite("frame_rate", &DecoderConfig::frame_rate);

    py::class_<TraceEntry>(m, "TraceEntry")
        .def_readonly("frame", &TraceEntry::frame)
        .def_readonly("state", &TraceEntry::state)
        .def_readonly("log_prob", &TraceEntry::log_prob)
        .def("__repr__", [](const TraceEntry& e) {
            return "TraceEntry(frame=" + std::to_string(e.frame) +
                   ", state=" + std::to_string(e.state) + ")";
        });

    py::class_<Decoder>(m, "Decoder")
        .def(py::init<const Score&, const DecoderConfig&>(), py::arg("score"),
             py::arg("config"))
        .def("step", &Decoder::step, py::arg("frame_lmls"),
             "Consume {state: lml} for the current window; returns the "
             "updated estimate")
        .def_property_readonly("window_begin", &Decoder::window_begin)
        .def_property_readonly("window_end", &Decoder::window_end)
        .def_property_readonly("num_states", &Decoder::num_states)
        .def_property_readonly("estimate", &Decoder::estimate)
        .def_property_readonly("estimate_log_prob", &Decoder::estimate_log_prob)
        .def_property_readonly("frame_count", &Decoder::frame_count)
        .def_property_readonly("trace", &Decoder::trace);

    py::class_<ViterbiResult>(m, "ViterbiResult")
        .def_readonly("path", &ViterbiResult::path)
        .def_readonly("online_estimates", &ViterbiResult::online_estimates)
        .def_readonly("final_scores", &ViterbiResult::final_scores)
        .def_readonly("trace", &ViterbiResult::trace);

    m.def("full_viterbi", &full_viterbi, py::arg("score"), py::arg("frames"),
          py::arg("config"));
    m.def("write_trace", &write_trace, py::arg("trace"));
    m.def("read_trace", &read_trace, py::arg("text"));

    // ── calibration ─────────────────────────────────────────────────────
    py::class_<SweepPoint>(m, "SweepPoint")
        .def_readonly("frequency", &SweepPoint::frequency)
        .def_readonly("lml", &SweepPoint::lml);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("points", &SweepResult::points)
        .def_readonly("best_frequency", &SweepResult::best_frequency)
        .def_readonly("best_lml", &SweepResult::best_lml);

    py::class_<SweepModel>(m, "SweepModel")
        .def(py::init<const std::vector<double>&, int, int,
                      const SpectralParams&>(),
             py::arg("grid"), py::arg("frame_length"), py::arg("sample_rate"),
             py::arg("base"))
        .def(
            "evaluate",
            [](const SweepModel& model, const std::vector<double>& frame) {
                return model.evaluate(frame);
            },
            py::arg("frame"))
        .def_property_readonly("grid", &SweepModel::grid)
        .def_property_readonly("frame_length", &SweepModel::frame_length);

    m.def(
        "lml_sweep",
        [](const std::vector<double>& frame, int sample_rate,
           const SpectralParams& base, const std::vector<double>& grid) {
            return lml_sweep(frame, sample_rate, base, grid);
        },
        py::arg("frame"), py::arg("sample_rate"), py::arg("base"),
        py::arg("grid"));

    py::class_<HarmonicPeak>(m, "HarmonicPeak")
        .def(py::init([](int harmonic, double frequency, double power) {
                 return HarmonicPeak{harmonic, frequency, power};
             }),
             py::arg("m"), py::arg("frequency"), py::arg("power"))
        .def_readonly("m", &HarmonicPeak::m)
        .def_readonly("frequency", &HarmonicPeak::frequency)
        .def_readonly("power", &HarmonicPeak::power);

    py::class_<EnvelopeFit>(m, "EnvelopeFit")
        .def_readonly("T", &EnvelopeFit::T)
        .def_readonly("v", &EnvelopeFit::v)
        .def_readonly("objective", &EnvelopeFit::objective)
        .def_readonly("iterations", &EnvelopeFit::iterations);

    py::class_<InharmonicityFit>(m, "InharmonicityFit")
        .def_readonly("B", &InharmonicityFit::B)
        .def_readonly("objective", &InharmonicityFit::objective);

    m.def("extract_harmonic_peaks", &extract_harmonic_peaks,
          py::arg("spectrum"), py::arg("f0"), py::arg("max_harmonics"),
          py::arg("rel_window") = 0.03);
    m.def("fit_envelope", &fit_envelope, py::arg("harmonic_powers"),
          py::arg("T0") = 0.465, py::arg("v0") = 2.37,
          py::arg("max_iterations") = 200);
    m.def("fit_inharmonicity", &fit_inharmonicity, py::arg("peaks"),
          py::arg("f0"));
    m.def("estimate_weights", &estimate_weights, py::arg("spectrum"),
          py::arg("fundamentals"), py::arg("base"));

    // ── pipeline ────────────────────────────────────────────────────────
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("live", &RunConfig::live)
        .def_readwrite("audio_path", &RunConfig::audio_path)
        .def_readwrite("frames", &RunConfig::frames)
        .def_readwrite("energy_threshold", &RunConfig::energy_threshold)
        .def_readwrite("sustain_depth", &RunConfig::sustain_depth)
        .def_readwrite("params", &RunConfig::params)
        .def_readwrite("decoder", &RunConfig::decoder)
        .def_readwrite("udp_host", &RunConfig::udp_host)
        .def_readwrite("udp_port", &RunConfig::udp_port)
        .def_readwrite("trace_path", &RunConfig::trace_path)
        .def_readwrite("lml_csv_path", &RunConfig::lml_csv_path)
        .def_readwrite("paced", &RunConfig::paced)
        .def_readwrite("play", &RunConfig::play);

    py::class_<RunStats>(m, "RunStats")
        .def_readonly("frames_total", &RunStats::frames_total)
        .def_readonly("frames_gated", &RunStats::frames_gated)
        .def_readonly("frames_decoded", &RunStats::frames_decoded)
        .def_readonly("datagrams_sent", &RunStats::datagrams_sent)
        .def_readonly("send_errors", &RunStats::send_errors)
        .def_readonly("overruns", &RunStats::overruns)
        .def_readonly("latency_violations", &RunStats::latency_violations)
        .def_readonly("mean_step_seconds", &RunStats::mean_step_seconds)
        .def_readonly("precompute_seconds", &RunStats::precompute_seconds)
        .def_readonly("wall_seconds", &RunStats::wall_seconds)
        .def_readonly("cache_factorizations", &RunStats::cache_factorizations)
        .def_readonly("cache_hits", &RunStats::cache_hits)
        .def_readonly("final_estimate", &RunStats::final_estimate)
        .def_readonly("trace", &RunStats::trace);

    m.def("run_follow", &run_follow, py::arg("score"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Follow a prerecorded performance end to end");
    m.def("format_datagram", &UdpEmitter::format_datagram, py::arg("frame"),
          py::arg("state"), py::arg("num_states"));
}
