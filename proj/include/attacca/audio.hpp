#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "attacca/kernel.hpp"
#include "attacca/queue.hpp"

namespace attacca {

struct Wave {
    std::vector<double> samples; // mono, in [-1, 1]
    int sample_rate = 44100;
};

// RIFF/WAVE reader: 16- or 24-bit PCM and 32-bit float, mono or stereo
// (stereo averages to mono). Anything else throws io_error naming the offset.
Wave read_wav(const std::string& path);
Wave parse_wav_bytes(std::span<const std::uint8_t> data);

// Writes mono PCM. `bits` is 16 (integer) or 32 (float).
void write_wav(const std::string& path, const Wave& wave, int bits = 16);

// Slicing geometry and the silence gate live in FrameSpec (kernel.hpp) plus
// this threshold on root-mean-square energy.
struct SliceConfig {
    FrameSpec frames;
    double energy_threshold = 1e-4;
};

struct Audioframe {
    int frame_index = 0; // slot ordinal; gated slots still consume an index
    std::vector<double> samples;
};

// Root-mean-square of a frame. Empty input is a contract error.
double frame_energy(std::span<const double> samples);

// Frames at starts 0, hop, 2*hop, ... while a full frame fits. Slots whose
// energy falls below the gate are dropped but keep consuming indices.
std::vector<Audioframe> slice_samples(std::span<const double> samples,
                                      const SliceConfig& cfg);

struct PowerSpectrum {
    std::vector<double> freq;  // Hz, bins 0..n/2
    std::vector<double> power; // |DFT|^2 of the windowed frame
};

// Periodogram of one frame under a symmetric Hann window.
PowerSpectrum hann_power_spectrum(std::span<const double> frame, int sample_rate);

// Push source of raw samples. start() begins delivery into the callback from
// the source's own context; stop() halts it. Implementations own pacing.
class SampleSource {
  public:
    using Callback = std::function<void(const double*, size_t)>;
    virtual ~SampleSource() = default;
    virtual int sample_rate() const = 0;
    virtual void start(Callback cb) = 0;
    virtual void stop() = 0;
};

// Deterministic in-memory source for tests and loopback runs. Delivery is
// synchronous inside start(), in `chunk` sized pieces.
class MockSampleSource : public SampleSource {
  public:
    MockSampleSource(std::vector<double> samples, int sample_rate, size_t chunk);
    int sample_rate() const override { return sample_rate_; }
    void start(Callback cb) override;
    void stop() override {}

  private:
    std::vector<double> samples_;
    int sample_rate_;
    size_t chunk_;
};

// This build carries no hardware audio backend; the call always reports the
// missing device as an io_error so callers can degrade deliberately.
std::unique_ptr<SampleSource> open_default_input();

// Assembles gated frames from a SampleSource into a bounded queue. Overruns
// evict the oldest pending frame and are counted.
class LiveCapture {
  public:
    LiveCapture(SampleSource& source, SliceConfig cfg, size_t capacity = 64);
    ~LiveCapture();

    void start();
    // Blocks for the next frame; false once stopped and drained.
    bool pop(Audioframe& out);
    void stop();

    std::int64_t overruns() const { return overruns_; }
    std::int64_t frames_gated() const { return gated_; }

  private:
    void on_samples(const double* data, size_t n);

    SampleSource& source_;
    SliceConfig cfg_;
    BoundedQueue<Audioframe> queue_;
    std::vector<double> pending_;
    std::int64_t base_ = 0;       // absolute index of pending_[0]
    std::int64_t next_start_ = 0; // absolute index of the next frame start
    std::int64_t overruns_ = 0;
    std::int64_t gated_ = 0;
    bool running_ = false;
};

} // namespace attacca
