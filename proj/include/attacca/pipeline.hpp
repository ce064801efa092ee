#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attacca/audio.hpp"
#include "attacca/decoder.hpp"
#include "attacca/kernel.hpp"
#include "attacca/score.hpp"

namespace attacca {

// Fire-and-forget datagram sink for position estimates. Construction
// resolves the peer and opens the socket (io_error on failure); individual
// send failures are counted, never thrown.
class UdpEmitter {
  public:
    UdpEmitter(const std::string& host, int port);
    ~UdpEmitter();
    UdpEmitter(const UdpEmitter&) = delete;
    UdpEmitter& operator=(const UdpEmitter&) = delete;

    // "<frame> <state> <num_states>\n"; frame is the 0-based slot ordinal,
    // state is 1-based. False when the send failed.
    bool send(int frame, int state, int num_states);
    std::int64_t send_errors() const { return errors_; }

    static std::string format_datagram(int frame, int state, int num_states);

  private:
    int fd_ = -1;
    std::vector<std::uint8_t> addr_; // packed sockaddr
    std::int64_t errors_ = 0;
};

struct RunConfig {
    bool live = false;      // capture instead of a prerecorded file
    std::string audio_path; // WAV input for prerecorded runs

    FrameSpec frames;
    double energy_threshold = 1e-4;
    int sustain_depth = 0;
    SpectralParams params;

    // window_length, window_threshold, state_duration, fallback_self_prob
    // and tempo_window are honored; frame_rate is derived from `frames`.
    DecoderConfig decoder;

    std::string udp_host; // empty disables emission
    int udp_port = 0;
    std::string trace_path;   // alignment trace, written after the run
    std::string lml_csv_path; // per-frame per-state likelihood dump
    bool paced = false;       // deliver frames at the hop cadence
    bool play = false;        // no playback backend in this build: warns
};

struct RunStats {
    std::int64_t frames_total = 0; // slots sliced from the source
    std::int64_t frames_gated = 0; // slots dropped as silence
    std::int64_t frames_decoded = 0;
    std::int64_t datagrams_sent = 0;
    std::int64_t send_errors = 0;
    std::int64_t overruns = 0;           // live mode: evicted before decoding
    std::int64_t latency_violations = 0; // one frame took longer than one hop
    double mean_step_seconds = 0.0;      // LML window + decoder step, averaged
    double precompute_seconds = 0.0;
    double wall_seconds = 0.0;
    std::int64_t cache_factorizations = 0;
    std::int64_t cache_hits = 0;
    int final_estimate = 0;
    // Per decoded slot, in order. Entry `frame` fields are 0-based slot
    // ordinals (gated slots leave gaps), matching the datagram payload.
    std::vector<TraceEntry> trace; // also written to trace_path when set
};

// Follows a performance end to end: source, decoder, and emission run on
// their own threads joined by bounded queues. Prerecorded sources block on
// a full queue (lossless); live capture evicts the oldest frame instead.
RunStats run_follow(const Score& score, const RunConfig& config);

// Live-mode entry with an injected capture source, used by tests and by any
// embedding that owns a real input device.
RunStats run_follow_with_source(const Score& score, const RunConfig& config,
                                SampleSource& source);

} // namespace attacca
