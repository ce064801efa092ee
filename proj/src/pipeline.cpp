#include "attacca/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include "attacca/errors.hpp"
#include "attacca/likelihood.hpp"
#include "attacca/queue.hpp"

namespace attacca {

namespace {

struct EstimateMsg {
    int frame; // 0-based slot ordinal
    int state;
    double log_prob;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

void validate_run_config(const RunConfig& config) {
    if (config.frames.frame_length < 1)
        throw config_error("frame_length must be positive");
    if (config.frames.hop_length < 1)
        throw config_error("hop_length must be positive");
    if (config.frames.sample_rate < 1)
        throw config_error("sample_rate must be positive");
    if (!(config.energy_threshold >= 0.0))
        throw config_error("energy_threshold must be >= 0");
    if (config.sustain_depth < 0)
        throw config_error("sustain depth must be >= 0");
}

RunStats run_pipeline(const Score& score, const RunConfig& config,
                      SampleSource* live_source) {
    validate_run_config(config);
    if (live_source == nullptr && !config.live && config.audio_path.empty())
        throw config_error("prerecorded mode requires an audio path");
    const auto t_start = std::chrono::steady_clock::now();

    if (config.play)
        std::fprintf(stderr,
                     "warning: no audio playback backend in this build; "
                     "--play is ignored\n");

    const Score effective = config.sustain_depth > 0
                                ? apply_sustain(score, config.sustain_depth)
                                : score;
    SpectralParams params = config.params;
    params.noise_sigma = clamp_noise_sigma(params.noise_sigma);

    RunStats stats;
    PrecomputeResult pre =
        precompute_cache(effective, params, config.frames.frame_length,
                         config.frames.sample_rate);
    stats.precompute_seconds = pre.seconds;

    DecoderConfig dcfg = config.decoder;
    dcfg.frame_rate =
        (double)config.frames.sample_rate / (double)config.frames.hop_length;
    Decoder decoder(effective, dcfg);

    const int num_states = (int)effective.states.size();
    const double hop_seconds = (double)config.frames.hop_length /
                               (double)config.frames.sample_rate;
    const SliceConfig slice_cfg{config.frames, config.energy_threshold};

    // The emitter opens before any thread spawns so resolution errors
    // surface synchronously.
    std::optional<UdpEmitter> emitter;
    if (!config.udp_host.empty()) emitter.emplace(config.udp_host, config.udp_port);

    // Prerecorded input is read up front; slicing errors also stay
    // synchronous. Live capture starts inside the source thread.
    std::vector<Audioframe> recorded;
    if (live_source == nullptr) {
        if (config.live)
            throw io_error("no live input device available in this build");
        Wave wave = read_wav(config.audio_path);
        if (wave.sample_rate != config.frames.sample_rate)
            throw config_error(
                "sample rate mismatch: file has " +
                std::to_string(wave.sample_rate) + " Hz, configured " +
                std::to_string(config.frames.sample_rate) + " Hz");
        const std::int64_t n = (std::int64_t)wave.samples.size();
        stats.frames_total =
            n >= config.frames.frame_length
                ? (n - config.frames.frame_length) / config.frames.hop_length + 1
                : 0;
        recorded = slice_samples(wave.samples, slice_cfg);
        stats.frames_gated = stats.frames_total - (std::int64_t)recorded.size();
    }

    BoundedQueue<Audioframe> frame_q(64);
    BoundedQueue<EstimateMsg> out_q(1024);
    std::unique_ptr<LiveCapture> capture;
    if (live_source)
        capture = std::make_unique<LiveCapture>(*live_source, slice_cfg, 64);

    std::exception_ptr source_error, decode_error;
    double step_seconds_total = 0.0;
    std::string csv;
    if (!config.lml_csv_path.empty()) csv = "frame,state,lml\n";

    std::thread source_thread([&] {
        try {
            if (capture) {
                // The source delivers from inside start(); stop() then lets
                // the consumer drain.
                capture->start();
                capture->stop();
            } else {
                std::int64_t last_slot = -1;
                for (Audioframe& f : recorded) {
                    if (config.paced) {
                        const std::int64_t gap = f.frame_index - last_slot;
                        std::this_thread::sleep_for(std::chrono::duration<double>(
                            hop_seconds * (double)gap));
                        last_slot = f.frame_index;
                    }
                    if (!frame_q.push(std::move(f))) break; // consumer died
                }
                frame_q.close();
            }
        } catch (...) {
            source_error = std::current_exception();
            frame_q.close();
            if (capture) capture->stop();
        }
    });

    std::thread decode_thread([&] {
        try {
            char row[96];
            auto next = [&](Audioframe& f) {
                if (capture) return capture->pop(f);
                auto item = frame_q.pop();
                if (!item) return false;
                f = std::move(*item);
                return true;
            };
            Audioframe f;
            while (next(f)) {
                const auto t0 = std::chrono::steady_clock::now();
                std::map<int, double> lmls;
                for (int k = decoder.window_begin(); k <= decoder.window_end(); ++k)
                    lmls[k] = lml_cholesky(
                        f.samples, pre.cache.lookup(effective.states[k - 1].notes));
                const int est = decoder.step(lmls);
                const double took = seconds_since(t0);
                step_seconds_total += took;
                if (took > hop_seconds) ++stats.latency_violations;
                if (!config.lml_csv_path.empty())
                    for (const auto& [k, lml] : lmls) {
                        std::snprintf(row, sizeof row, "%d,%d,%.9g\n",
                                      f.frame_index, k, lml);
                        csv += row;
                    }
                ++stats.frames_decoded;
                if (!out_q.push({f.frame_index, est, decoder.estimate_log_prob()}))
                    break;
            }
        } catch (...) {
            decode_error = std::current_exception();
            frame_q.close(); // unblock the producer
            if (capture) capture->stop();
        }
        out_q.close();
    });

    std::thread emit_thread([&] {
        while (auto m = out_q.pop()) {
            stats.trace.push_back({m->frame, m->state, m->log_prob});
            if (emitter && emitter->send(m->frame, m->state, num_states))
                ++stats.datagrams_sent;
        }
    });

    source_thread.join();
    decode_thread.join();
    emit_thread.join();

    if (source_error) std::rethrow_exception(source_error);
    if (decode_error) std::rethrow_exception(decode_error);

    if (capture) {
        stats.frames_gated = capture->frames_gated();
        stats.overruns = capture->overruns();
        stats.frames_total =
            stats.frames_decoded + stats.frames_gated + stats.overruns;
    }
    if (emitter) stats.send_errors = emitter->send_errors();
    if (stats.frames_decoded > 0)
        stats.mean_step_seconds =
            step_seconds_total / (double)stats.frames_decoded;
    stats.cache_factorizations = pre.cache.factorizations();
    stats.cache_hits = pre.cache.hits();
    stats.final_estimate = decoder.estimate();

    if (!config.trace_path.empty()) {
        std::ofstream out(config.trace_path, std::ios::binary);
        if (!out) throw io_error("cannot write trace file: " + config.trace_path);
        out << write_trace(stats.trace);
        if (!out) throw io_error("failed writing trace file: " + config.trace_path);
    }
    if (!config.lml_csv_path.empty()) {
        std::ofstream out(config.lml_csv_path, std::ios::binary);
        if (!out)
            throw io_error("cannot write likelihood dump: " + config.lml_csv_path);
        out << csv;
    }

    stats.wall_seconds = seconds_since(t_start);
    return stats;
}

} // namespace

RunStats run_follow(const Score& score, const RunConfig& config) {
    return run_pipeline(score, config, nullptr);
}

RunStats run_follow_with_source(const Score& score, const RunConfig& config,
                                SampleSource& source) {
    return run_pipeline(score, config, &source);
}

} // namespace attacca
