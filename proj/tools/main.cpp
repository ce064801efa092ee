// attacca: GP score follower command line.
//
// Subcommands: follow (run the follower on a WAV or live source), sweep,
// fit-envelope, fit-inharmonicity, estimate-weights (instrument calibration),
// dump-score (score debug dump). Exit codes: 0 success, 1 configuration or
// usage error, 2 I/O error, 3 numeric error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attacca/calibration.hpp"
#include "attacca/errors.hpp"
#include "attacca/pipeline.hpp"

using namespace attacca;

namespace {

struct FollowArgs {
    std::string mode = "prerecorded";
    std::string score_path;
    std::string audio_path;
    std::string params_path;
    std::string udp;
    std::string trace_path;
    std::string lml_csv_path;
    RunConfig cfg; // numeric defaults live here
    double sigma_n = 0.1;
    bool sigma_n_set = false;
    bool no_state_duration = false;
};

struct FrameArgs {
    std::string audio_path;
    std::string params_path;
    long long offset = 0;
    int frame_length = 4096;
    std::string out_path;
};

// Writes to out_path when set, stdout otherwise.
void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw io_error("cannot write output file: " + out_path);
    out << text;
    if (!out) throw io_error("failed writing output file: " + out_path);
}

SpectralParams params_for(const std::string& params_path) {
    return params_path.empty() ? SpectralParams{}
                               : load_params_file(params_path);
}

// One analysis frame cut from a WAV file at a sample offset.
struct LoadedFrame {
    std::vector<double> samples;
    int sample_rate;
};

LoadedFrame load_frame(const FrameArgs& a) {
    if (a.frame_length < 2)
        throw config_error("frame length must be at least 2 samples");
    if (a.offset < 0) throw config_error("offset must be >= 0");
    Wave wave = read_wav(a.audio_path);
    if (a.offset + a.frame_length > (long long)wave.samples.size())
        throw config_error("frame runs past the end of the file: offset " +
                           std::to_string(a.offset) + " + length " +
                           std::to_string(a.frame_length) + " > " +
                           std::to_string(wave.samples.size()) + " samples");
    return {std::vector<double>(wave.samples.begin() + a.offset,
                                wave.samples.begin() + a.offset + a.frame_length),
            wave.sample_rate};
}

std::string csv_header() { return "frequency,value\n"; }

std::string csv_row(double frequency, double value) {
    char buf[80];
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", frequency, value);
    return buf;
}

void parse_udp_target(const std::string& text, RunConfig& cfg) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw config_error("UDP target must be host:port, got '" + text + "'");
    cfg.udp_host = text.substr(0, colon);
    // Bracketed IPv6 literals: [::1]:9000.
    if (cfg.udp_host.size() >= 2 && cfg.udp_host.front() == '[' &&
        cfg.udp_host.back() == ']')
        cfg.udp_host = cfg.udp_host.substr(1, cfg.udp_host.size() - 2);
    try {
        cfg.udp_port = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw config_error("UDP port is not a number in '" + text + "'");
    }
}

void run_follow_command(const FollowArgs& a) {
    RunConfig cfg = a.cfg;
    cfg.live = a.mode == "live";
    cfg.audio_path = a.audio_path;
    cfg.trace_path = a.trace_path;
    cfg.lml_csv_path = a.lml_csv_path;
    if (!a.params_path.empty()) cfg.params = load_params_file(a.params_path);
    if (a.sigma_n_set || a.params_path.empty())
        cfg.params.noise_sigma = a.sigma_n;
    cfg.decoder.state_duration = !a.no_state_duration;
    if (!a.udp.empty()) parse_udp_target(a.udp, cfg);

    const Score score = parse_midi(a.score_path);
    const RunStats s = cfg.live ? [&] {
        auto source = open_default_input(); // throws: no backend in this build
        return run_follow_with_source(score, cfg, *source);
    }() : run_follow(score, cfg);

    std::printf("frames: %lld total, %lld gated, %lld decoded\n",
                (long long)s.frames_total, (long long)s.frames_gated,
                (long long)s.frames_decoded);
    std::printf("cache: %lld factorizations, %lld hits (%.3f s precompute)\n",
                (long long)s.cache_factorizations, (long long)s.cache_hits,
                s.precompute_seconds);
    std::printf("step: %.3f ms mean, %lld latency violations, %lld overruns\n",
                s.mean_step_seconds * 1e3, (long long)s.latency_violations,
                (long long)s.overruns);
    if (!cfg.udp_host.empty())
        std::printf("udp: %lld datagrams sent, %lld send errors\n",
                    (long long)s.datagrams_sent, (long long)s.send_errors);
    std::printf("final estimate: state %d of %d (%.2f s wall)\n",
                s.final_estimate, (int)score.states.size(), s.wall_seconds);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attacca: real-time score follower on a spectral-mixture "
                 "Gaussian process"};
    app.require_subcommand(1);

    FollowArgs fa;
    CLI::App* follow = app.add_subcommand(
        "follow", "Follow a performance against a MIDI score");
    // --h (tempo window) precludes the short help flag here.
    follow->set_help_flag("--help", "print this help message and exit");
    follow->add_option("--mode", fa.mode, "prerecorded or live")
        ->check(CLI::IsMember({"prerecorded", "live"}))
        ->capture_default_str();
    follow->add_option("--score", fa.score_path, "MIDI score file")->required();
    follow->add_option("--audio", fa.audio_path, "WAV input (prerecorded mode)");
    follow->add_option("--frame-length", fa.cfg.frames.frame_length,
                       "samples per analysis frame")->capture_default_str();
    follow->add_option("--hop-length", fa.cfg.frames.hop_length,
                       "samples between frame starts")->capture_default_str();
    follow->add_option("--sample-rate", fa.cfg.frames.sample_rate,
                       "expected sample rate, Hz")->capture_default_str();
    follow->add_option("--energy-threshold", fa.cfg.energy_threshold,
                       "RMS below this gates a frame as silence")
        ->capture_default_str();
    follow->add_option("--sigma-n", fa.sigma_n, "observation noise level")
        ->capture_default_str();
    follow->add_option("--sustain", fa.cfg.sustain_depth,
                       "carry notes of this many previous states")
        ->capture_default_str();
    follow->add_flag("--no-state-duration", fa.no_state_duration,
                     "fixed self-transition probability instead of the "
                     "duration-dependent one");
    follow->add_option("--fallback-p-self", fa.cfg.decoder.fallback_self_prob,
                       "self-transition probability when duration modeling "
                       "is off")->capture_default_str();
    follow->add_option("--window-length", fa.cfg.decoder.window_length,
                       "states kept alive at once")->capture_default_str();
    follow->add_option("--window-threshold", fa.cfg.decoder.window_threshold,
                       "window slides once the estimate runs this far ahead")
        ->capture_default_str();
    follow->add_option("--h", fa.cfg.decoder.tempo_window,
                       "completed states averaged for tempo adaptation; "
                       "0 plays strictly at the notated tempo")
        ->capture_default_str();
    follow->add_option("--udp", fa.udp, "send estimates to host:port");
    follow->add_option("--trace", fa.trace_path, "write the alignment trace");
    follow->add_option("--lml-csv", fa.lml_csv_path,
                       "dump per-frame per-state likelihoods as CSV");
    follow->add_flag("--paced", fa.cfg.paced,
                     "deliver prerecorded frames at the hop cadence");
    follow->add_flag("--play", fa.cfg.play, "play the recording (no backend "
                                            "in this build: warns)");
    follow->add_option("--params", fa.params_path,
                       "hyperparameter file (key = value)");
    follow->callback([&] {
        fa.sigma_n_set = follow->count("--sigma-n") > 0;
        run_follow_command(fa);
    });

    FrameArgs sweep_fa;
    sweep_fa.frame_length = 800;
    std::vector<double> sweep_grid;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Score candidate fundamentals against one audio frame");
    sweep->add_option("--audio", sweep_fa.audio_path, "WAV input")->required();
    sweep->add_option("--offset", sweep_fa.offset, "frame start, samples")
        ->capture_default_str();
    sweep->add_option("--frame-length", sweep_fa.frame_length,
                      "samples per frame")->capture_default_str();
    sweep->add_option("--grid", sweep_grid, "candidate frequencies, Hz")
        ->required()
        ->delimiter(',');
    sweep->add_option("--params", sweep_fa.params_path,
                      "hyperparameter file (key = value)");
    sweep->add_option("--out", sweep_fa.out_path, "output file (default stdout)");
    sweep->callback([&] {
        const LoadedFrame frame = load_frame(sweep_fa);
        const SweepResult r =
            lml_sweep(frame.samples, frame.sample_rate,
                      params_for(sweep_fa.params_path), sweep_grid);
        std::string text;
        char head[64];
        std::snprintf(head, sizeof head, "# best_frequency = %.9g\n",
                      r.best_frequency);
        text += head;
        text += csv_header();
        for (const SweepPoint& p : r.points) text += csv_row(p.frequency, p.lml);
        emit(sweep_fa.out_path, text);
    });

    FrameArgs env_fa;
    double env_f0 = 0.0;
    int env_harmonics = 9;
    double env_t0 = 0.465, env_v0 = 2.37;
    CLI::App* env = app.add_subcommand(
        "fit-envelope", "Fit the harmonic roll-off (T, v) to one frame");
    env->add_option("--audio", env_fa.audio_path, "WAV input")->required();
    env->add_option("--offset", env_fa.offset, "frame start, samples")
        ->capture_default_str();
    env->add_option("--frame-length", env_fa.frame_length, "samples per frame")
        ->capture_default_str();
    env->add_option("--f0", env_f0, "fundamental frequency, Hz")->required();
    env->add_option("--harmonics", env_harmonics, "harmonics considered")
        ->capture_default_str();
    env->add_option("--t0", env_t0, "starting T")->capture_default_str();
    env->add_option("--v0", env_v0, "starting v")->capture_default_str();
    env->add_option("--out", env_fa.out_path, "output file (default stdout)");
    env->callback([&] {
        const LoadedFrame frame = load_frame(env_fa);
        const PowerSpectrum spectrum =
            hann_power_spectrum(frame.samples, frame.sample_rate);
        const auto peaks =
            extract_harmonic_peaks(spectrum, env_f0, env_harmonics);
        // The fitter wants powers for harmonics 1..M; stop at the first gap.
        std::vector<double> powers;
        for (const HarmonicPeak& p : peaks) {
            if (p.m != (int)powers.size() + 1) break;
            powers.push_back(p.power);
        }
        if ((int)powers.size() < env_harmonics)
            std::fprintf(stderr,
                         "warning: only %d of %d harmonics located; fitting "
                         "the contiguous prefix\n",
                         (int)powers.size(), env_harmonics);
        if (powers.empty())
            throw numeric_error("no harmonic peaks found near f0 = " +
                                std::to_string(env_f0) + " Hz");
        const EnvelopeFit fit = fit_envelope({powers}, env_t0, env_v0);
        std::string text;
        char head[128];
        std::snprintf(head, sizeof head,
                      "# T = %.9g\n# v = %.9g\n# objective = %.9g\n", fit.T,
                      fit.v, fit.objective);
        text += head;
        text += csv_header();
        for (int m = 1; m <= (int)powers.size(); ++m)
            text += csv_row(m * env_f0, envelope_weight(m, fit.T, fit.v));
        emit(env_fa.out_path, text);
    });

    FrameArgs inh_fa;
    double inh_f0 = 0.0;
    int inh_note = -1, inh_harmonics = 9;
    CLI::App* inh = app.add_subcommand(
        "fit-inharmonicity",
        "Fit the string stiffness B for one note from one frame");
    inh->add_option("--audio", inh_fa.audio_path, "WAV input")->required();
    inh->add_option("--offset", inh_fa.offset, "frame start, samples")
        ->capture_default_str();
    inh->add_option("--frame-length", inh_fa.frame_length, "samples per frame")
        ->capture_default_str();
    inh->add_option("--f0", inh_f0, "fundamental frequency, Hz")->required();
    inh->add_option("--note", inh_note, "MIDI note number for the output key")
        ->required()
        ->check(CLI::Range(0, 127));
    inh->add_option("--harmonics", inh_harmonics, "harmonics considered")
        ->capture_default_str();
    inh->add_option("--out", inh_fa.out_path, "output file (default stdout)");
    inh->callback([&] {
        const LoadedFrame frame = load_frame(inh_fa);
        const PowerSpectrum spectrum =
            hann_power_spectrum(frame.samples, frame.sample_rate);
        const auto peaks =
            extract_harmonic_peaks(spectrum, inh_f0, inh_harmonics);
        const InharmonicityFit fit = fit_inharmonicity(peaks, inh_f0);
        // Loadable as a hyperparameter file fragment.
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "# objective = %.9g Hz^2 over %d peaks\n%d = %.9g\n",
                      fit.objective, (int)peaks.size(), inh_note, fit.B);
        emit(inh_fa.out_path, buf);
    });

    FrameArgs w_fa;
    std::vector<double> w_fundamentals;
    CLI::App* weights = app.add_subcommand(
        "estimate-weights",
        "Least-squares note weights explaining one frame's spectrum");
    weights->add_option("--audio", w_fa.audio_path, "WAV input")->required();
    weights->add_option("--offset", w_fa.offset, "frame start, samples")
        ->capture_default_str();
    weights->add_option("--frame-length", w_fa.frame_length,
                        "samples per frame")->capture_default_str();
    weights->add_option("--fundamentals", w_fundamentals,
                        "candidate note fundamentals, Hz")
        ->required()
        ->delimiter(',');
    weights->add_option("--params", w_fa.params_path,
                        "hyperparameter file (key = value)");
    weights->add_option("--out", w_fa.out_path, "output file (default stdout)");
    weights->callback([&] {
        const LoadedFrame frame = load_frame(w_fa);
        const PowerSpectrum spectrum =
            hann_power_spectrum(frame.samples, frame.sample_rate);
        const std::vector<double> w = estimate_weights(
            spectrum, w_fundamentals, params_for(w_fa.params_path));
        std::string text = csv_header();
        for (size_t i = 0; i < w.size(); ++i)
            text += csv_row(w_fundamentals[i], w[i]);
        emit(w_fa.out_path, text);
    });

    std::string ds_score, ds_out;
    int ds_sustain = 0;
    CLI::App* ds = app.add_subcommand(
        "dump-score", "Print the parsed score, one line per state");
    ds->add_option("--score", ds_score, "MIDI score file")->required();
    ds->add_option("--sustain", ds_sustain,
                   "carry notes of this many previous states")
        ->capture_default_str();
    ds->add_option("--out", ds_out, "output file (default stdout)");
    ds->callback([&] {
        if (ds_sustain < 0) throw config_error("sustain depth must be >= 0");
        emit(ds_out, dump_score(apply_sustain(parse_midi(ds_score), ds_sustain)));
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1; // usage problems are configuration errors
    } catch (const config_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
