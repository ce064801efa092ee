#include "attacca/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "attacca/errors.hpp"

namespace attacca {

// ── WAV ────────────────────────────────────────────────────────────────

namespace {

struct WavCursor {
    std::span<const std::uint8_t> data;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw io_error("malformed WAV at byte " + std::to_string(pos) + ": " + what);
    }
    void need(size_t n) const {
        if (pos + n > data.size()) fail("unexpected end of file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = 0;
        std::memcpy(&v, data.data() + pos, 2);
        pos += 2;
        return v;
    }
    std::uint32_t tag() { return u32(); }
};

constexpr std::uint32_t fourcc(const char (&s)[5]) {
    return (std::uint32_t)s[0] | ((std::uint32_t)s[1] << 8) |
           ((std::uint32_t)s[2] << 16) | ((std::uint32_t)s[3] << 24);
}

double sample_from(const std::uint8_t* p, int bits, bool is_float) {
    if (is_float) {
        float v;
        std::memcpy(&v, p, 4);
        return (double)v;
    }
    if (bits == 16) {
        std::int16_t v;
        std::memcpy(&v, p, 2);
        return v / 32768.0;
    }
    // 24-bit little endian, sign-extended through the top byte
    const std::int32_t v =
        (std::int32_t)((std::uint32_t)p[0] << 8 | (std::uint32_t)p[1] << 16 |
                       (std::uint32_t)p[2] << 24) >>
        8;
    return v / 8388608.0;
}

} // namespace

Wave parse_wav_bytes(std::span<const std::uint8_t> data) {
    WavCursor c{data};
    if (c.tag() != fourcc("RIFF")) c.fail("missing RIFF header");
    (void)c.u32(); // riff size, unreliable in the wild
    if (c.tag() != fourcc("WAVE")) c.fail("not a WAVE file");

    int channels = 0, bits = 0, sample_rate = 0;
    bool is_float = false, have_fmt = false;
    Wave wave;

    while (c.pos + 8 <= data.size()) {
        const std::uint32_t id = c.tag();
        const std::uint32_t size = c.u32();
        c.need(size);
        const size_t body = c.pos;
        if (id == fourcc("fmt ")) {
            if (size < 16) c.fail("fmt chunk too short");
            std::uint16_t format = c.u16();
            channels = c.u16();
            sample_rate = (int)c.u32();
            (void)c.u32(); // byte rate
            (void)c.u16(); // block align
            bits = c.u16();
            if (format == 0xfffe) {
                if (size < 40) c.fail("extensible fmt chunk too short");
                (void)c.u16(); // extension size
                (void)c.u16(); // valid bits
                (void)c.u32(); // channel mask
                format = c.u16();
            }
            if (format == 3) {
                is_float = true;
                if (bits != 32) c.fail("float WAV must be 32-bit");
            } else if (format == 1) {
                if (bits != 16 && bits != 24) c.fail("PCM WAV must be 16- or 24-bit");
            } else {
                c.fail("unsupported WAV encoding " + std::to_string(format));
            }
            if (channels != 1 && channels != 2) c.fail("only mono or stereo supported");
            have_fmt = true;
        } else if (id == fourcc("data")) {
            if (!have_fmt) c.fail("data chunk before fmt chunk");
            const int bytes = bits / 8;
            const size_t stride = (size_t)bytes * channels;
            const size_t count = size / stride;
            wave.samples.reserve(count);
            const std::uint8_t* p = data.data() + body;
            for (size_t i = 0; i < count; ++i, p += stride) {
                double acc = 0.0;
                for (int ch = 0; ch < channels; ++ch)
                    acc += sample_from(p + ch * bytes, bits, is_float);
                wave.samples.push_back(acc / channels);
            }
            wave.sample_rate = sample_rate;
            return wave;
        }
        c.pos = body + size + (size & 1); // chunks are word aligned
    }
    c.fail(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Wave read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open WAV file: " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return parse_wav_bytes(data);
}

void write_wav(const std::string& path, const Wave& wave, int bits) {
    if (bits != 16 && bits != 32)
        throw std::invalid_argument("write_wav: bits must be 16 or 32");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot create WAV file: " + path);
    const std::uint32_t n = (std::uint32_t)wave.samples.size();
    const std::uint16_t bytes = (std::uint16_t)(bits / 8);
    const std::uint32_t data_size = n * bytes;
    auto u16 = [&](std::uint16_t v) { out.write((const char*)&v, 2); };
    auto u32 = [&](std::uint32_t v) { out.write((const char*)&v, 4); };
    out.write("RIFF", 4);
    u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(bits == 16 ? 1 : 3);
    u16(1);
    u32((std::uint32_t)wave.sample_rate);
    u32((std::uint32_t)wave.sample_rate * bytes);
    u16(bytes);
    u16((std::uint16_t)bits);
    out.write("data", 4);
    u32(data_size);
    for (double s : wave.samples) {
        if (bits == 16) {
            const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
            const std::int16_t v = (std::int16_t)std::lrint(clamped * 32768.0);
            out.write((const char*)&v, 2);
        } else {
            const float v = (float)s;
            out.write((const char*)&v, 4);
        }
    }
    if (!out) throw io_error("short write: " + path);
}

// ── slicing ────────────────────────────────────────────────────────────

double frame_energy(std::span<const double> samples) {
    if (samples.empty())
        throw std::invalid_argument("frame_energy: empty frame");
    double acc = 0.0;
    for (double s : samples) acc += s * s;
    return std::sqrt(acc / (double)samples.size());
}

std::vector<Audioframe> slice_samples(std::span<const double> samples,
                                      const SliceConfig& cfg) {
    if (cfg.frames.frame_length < 1 || cfg.frames.hop_length < 1)
        throw std::invalid_argument("slice: frame and hop must be positive");
    if (cfg.energy_threshold < 0.0)
        throw std::invalid_argument("slice: negative energy threshold");
    std::vector<Audioframe> frames;
    const size_t len = (size_t)cfg.frames.frame_length;
    for (size_t index = 0;; ++index) {
        const size_t start = index * (size_t)cfg.frames.hop_length;
        if (start + len > samples.size()) break;
        const std::span<const double> window = samples.subspan(start, len);
        if (frame_energy(window) < cfg.energy_threshold) continue;
        frames.push_back({(int)index, {window.begin(), window.end()}});
    }
    return frames;
}

// ── spectrum ───────────────────────────────────────────────────────────

PowerSpectrum hann_power_spectrum(std::span<const double> frame, int sample_rate) {
    const int n = (int)frame.size();
    if (n < 2) throw std::invalid_argument("hann_power_spectrum: frame too short");
    if (sample_rate < 1) throw std::invalid_argument("hann_power_spectrum: bad rate");
    std::vector<double> windowed(n);
    for (int i = 0; i < n; ++i) {
        const double w =
            0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n - 1)));
        windowed[i] = frame[i] * w;
    }
    const int bins = n / 2 + 1;
    std::vector<fftw_complex> out(bins);
    {
        // FFTW planning is not thread safe; execution of a fresh plan is.
        static std::mutex plan_mu;
        std::lock_guard lock(plan_mu);
        fftw_plan plan = fftw_plan_dft_r2c_1d(n, windowed.data(), out.data(),
                                              FFTW_ESTIMATE);
        if (!plan) throw numeric_error("hann_power_spectrum: FFT planning failed");
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    PowerSpectrum spec;
    spec.freq.resize(bins);
    spec.power.resize(bins);
    for (int i = 0; i < bins; ++i) {
        spec.freq[i] = (double)i * sample_rate / n;
        spec.power[i] = out[i][0] * out[i][0] + out[i][1] * out[i][1];
    }
    return spec;
}

// ── live capture ───────────────────────────────────────────────────────

MockSampleSource::MockSampleSource(std::vector<double> samples, int sample_rate,
                                   size_t chunk)
    : samples_(std::move(samples)), sample_rate_(sample_rate),
      chunk_(chunk ? chunk : 1) {}

void MockSampleSource::start(Callback cb) {
    for (size_t i = 0; i < samples_.size(); i += chunk_)
        cb(samples_.data() + i, std::min(chunk_, samples_.size() - i));
}

std::unique_ptr<SampleSource> open_default_input() {
    throw io_error("no audio input device available in this build");
}

LiveCapture::LiveCapture(SampleSource& source, SliceConfig cfg, size_t capacity)
    : source_(source), cfg_(cfg), queue_(capacity) {
    if (cfg_.frames.frame_length < 1 || cfg_.frames.hop_length < 1)
        throw std::invalid_argument("live capture: frame and hop must be positive");
}

LiveCapture::~LiveCapture() { stop(); }

void LiveCapture::start() {
    running_ = true;
    source_.start([this](const double* data, size_t n) { on_samples(data, n); });
}

void LiveCapture::on_samples(const double* data, size_t n) {
    pending_.insert(pending_.end(), data, data + n);
    const int len = cfg_.frames.frame_length;
    while (base_ + (std::int64_t)pending_.size() >= next_start_ + len) {
        const std::span<const double> window(pending_.data() + (next_start_ - base_),
                                             (size_t)len);
        const int index = (int)(next_start_ / cfg_.frames.hop_length);
        if (frame_energy(window) >= cfg_.energy_threshold) {
            if (!queue_.push_drop_oldest({index, {window.begin(), window.end()}}))
                ++overruns_;
        } else {
            ++gated_;
        }
        next_start_ += cfg_.frames.hop_length;
        const std::int64_t drop = std::min<std::int64_t>(
            next_start_ - base_, (std::int64_t)pending_.size());
        if (drop > 0) {
            pending_.erase(pending_.begin(), pending_.begin() + drop);
            base_ += drop;
        }
    }
}

bool LiveCapture::pop(Audioframe& out) {
    auto item = queue_.pop();
    if (!item) return false;
    out = std::move(*item);
    return true;
}

void LiveCapture::stop() {
    if (!running_) return;
    running_ = false;
    source_.stop();
    queue_.close();
}

} // namespace attacca
