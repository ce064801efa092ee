#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "attacca/audio.hpp"
#include "attacca/errors.hpp"

using namespace attacca;

namespace {

std::vector<double> sine(int n, int fs, double freq, double amp) {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i)
        y[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / fs);
    return y;
}

std::string temp_path(const std::string& name) {
    return "/tmp/attacca_test_" + name;
}

} // namespace

TEST_CASE("16-bit wav round trip") {
    Wave w;
    w.sample_rate = 44100;
    w.samples = sine(2048, 44100, 440.0, 0.7);
    const std::string path = temp_path("rt16.wav");
    write_wav(path, w, 16);
    const Wave r = read_wav(path);
    REQUIRE(r.samples.size() == w.samples.size());
    CHECK(r.sample_rate == 44100);
    for (size_t i = 0; i < r.samples.size(); ++i)
        CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
    std::remove(path.c_str());
}

TEST_CASE("32-bit float wav round trip") {
    Wave w;
    w.sample_rate = 22050;
    w.samples = sine(512, 22050, 1000.0, 0.9);
    const std::string path = temp_path("rt32.wav");
    write_wav(path, w, 32);
    const Wave r = read_wav(path);
    REQUIRE(r.samples.size() == w.samples.size());
    CHECK(r.sample_rate == 22050);
    for (size_t i = 0; i < r.samples.size(); ++i)
        CHECK(std::abs(r.samples[i] - w.samples[i]) <= 1e-7);
    std::remove(path.c_str());
}

TEST_CASE("24-bit pcm and stereo downmix decode") {
    // Handcrafted: stereo 16-bit, two frames: (L=+16384, R=-16384) then
    // (L=8192, R=8192). Downmix averages to 0 and 0.25.
    auto u16 = [](std::vector<std::uint8_t>& v, std::uint16_t x) {
        v.push_back(x & 0xff);
        v.push_back(x >> 8);
    };
    auto u32 = [](std::vector<std::uint8_t>& v, std::uint32_t x) {
        for (int i = 0; i < 4; ++i) v.push_back((x >> (8 * i)) & 0xff);
    };
    std::vector<std::uint8_t> f;
    f.insert(f.end(), {'R', 'I', 'F', 'F'});
    u32(f, 36 + 8);
    f.insert(f.end(), {'W', 'A', 'V', 'E'});
    f.insert(f.end(), {'f', 'm', 't', ' '});
    u32(f, 16);
    u16(f, 1);     // pcm
    u16(f, 2);     // stereo
    u32(f, 8000);  // rate
    u32(f, 32000); // byte rate
    u16(f, 4);     // block align
    u16(f, 16);    // bits
    f.insert(f.end(), {'d', 'a', 't', 'a'});
    u32(f, 8);
    u16(f, 16384);
    u16(f, (std::uint16_t)-16384);
    u16(f, 8192);
    u16(f, 8192);
    const Wave stereo = parse_wav_bytes(f);
    REQUIRE(stereo.samples.size() == 2);
    CHECK(stereo.samples[0] == doctest::Approx(0.0));
    CHECK(stereo.samples[1] == doctest::Approx(0.25));

    // Mono 24-bit with one full-scale positive and one half-scale negative.
    std::vector<std::uint8_t> g;
    g.insert(g.end(), {'R', 'I', 'F', 'F'});
    u32(g, 36 + 6);
    g.insert(g.end(), {'W', 'A', 'V', 'E'});
    g.insert(g.end(), {'f', 'm', 't', ' '});
    u32(g, 16);
    u16(g, 1);
    u16(g, 1);
    u32(g, 8000);
    u32(g, 24000);
    u16(g, 3);
    u16(g, 24);
    g.insert(g.end(), {'d', 'a', 't', 'a'});
    u32(g, 6);
    g.insert(g.end(), {0xff, 0xff, 0x7f}); // +8388607
    g.insert(g.end(), {0x00, 0x00, 0xc0}); // -4194304
    const Wave mono = parse_wav_bytes(g);
    REQUIRE(mono.samples.size() == 2);
    CHECK(mono.samples[0] == doctest::Approx(8388607.0 / 8388608.0));
    CHECK(mono.samples[1] == doctest::Approx(-0.5));
}

TEST_CASE("malformed wav reports the byte offset") {
    const std::vector<std::uint8_t> junk = {'R', 'I', 'F', 'F', 1, 0, 0, 0};
    CHECK_THROWS_WITH_AS((void)parse_wav_bytes(junk),
                         doctest::Contains("byte"), io_error);
    CHECK_THROWS_AS((void)read_wav("/nonexistent/file.wav"), io_error);
}

TEST_CASE("frame energy is the root mean square") {
    const std::vector<double> flat(100, 0.5);
    CHECK(frame_energy(flat) == doctest::Approx(0.5).epsilon(1e-12));
    const std::vector<double> tone = sine(44100, 44100, 100.0, 0.8);
    CHECK(frame_energy(tone) == doctest::Approx(0.8 / std::sqrt(2.0)).epsilon(1e-4));
    CHECK_THROWS_AS((void)frame_energy({}), std::invalid_argument);
}

TEST_CASE("slicing yields every full frame at the hop cadence") {
    SliceConfig cfg;
    cfg.frames.frame_length = 800;
    cfg.frames.hop_length = 2000;
    cfg.energy_threshold = 0.0;
    const std::vector<double> pcm(10000, 0.1);
    const auto frames = slice_samples(pcm, cfg);
    REQUIRE(frames.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(frames[i].frame_index == i);
        CHECK(frames[i].samples.size() == 800);
    }
}

TEST_CASE("gated slots keep consuming frame indices") {
    SliceConfig cfg;
    cfg.frames.frame_length = 100;
    cfg.frames.hop_length = 100;
    cfg.energy_threshold = 1e-3;
    std::vector<double> pcm = sine(300, 44100, 441.0, 0.5);
    pcm.resize(600, 0.0); // slots 3..5 are silent
    auto tail = sine(300, 44100, 441.0, 0.5);
    pcm.insert(pcm.end(), tail.begin(), tail.end());
    const auto frames = slice_samples(pcm, cfg);
    REQUIRE(frames.size() == 6);
    CHECK(frames[2].frame_index == 2);
    CHECK(frames[3].frame_index == 6); // silence consumed indices 3, 4, 5
}

TEST_CASE("hann spectrum peaks at the tone and respects the energy bound") {
    const int n = 1024;
    const int fs = 44100;
    const double bin_freq = 64.0 * fs / n;
    const std::vector<double> tone = sine(n, fs, bin_freq, 0.5);
    const PowerSpectrum spec = hann_power_spectrum(tone, fs);
    REQUIRE((int)spec.power.size() == n / 2 + 1);
    CHECK(spec.freq[1] == doctest::Approx((double)fs / n));
    size_t peak = 0;
    for (size_t i = 1; i < spec.power.size(); ++i)
        if (spec.power[i] > spec.power[peak]) peak = i;
    CHECK(spec.freq[peak] == doctest::Approx(bin_freq).epsilon(1e-9));

    // Windowing only removes energy: sum of powers <= n^2 * rms^2.
    double total = 0.0;
    for (double p : spec.power) total += p;
    const double rms = frame_energy(tone);
    CHECK(total <= (double)n * n * rms * rms);
}

TEST_CASE("live capture matches offline slicing through a mock device") {
    SliceConfig cfg;
    cfg.frames.frame_length = 256;
    cfg.frames.hop_length = 160;
    cfg.energy_threshold = 1e-3;
    std::vector<double> pcm = sine(4000, 44100, 500.0, 0.4);
    for (int i = 1200; i < 2200; ++i) pcm[i] = 0.0; // force a gated stretch

    const auto want = slice_samples(pcm, cfg);

    MockSampleSource source(pcm, 44100, 777);
    LiveCapture capture(source, cfg, 4096);
    capture.start();
    capture.stop();
    std::vector<Audioframe> got;
    Audioframe frame;
    while (capture.pop(frame)) got.push_back(frame);

    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].frame_index == want[i].frame_index);
        CHECK(got[i].samples == want[i].samples);
    }
    CHECK(capture.overruns() == 0);
    CHECK(capture.frames_gated() > 0);
}

TEST_CASE("capture overruns evict the oldest frame and are counted") {
    SliceConfig cfg;
    cfg.frames.frame_length = 100;
    cfg.frames.hop_length = 100;
    cfg.energy_threshold = 0.0;
    const std::vector<double> pcm(1000, 0.25); // 10 frames
    MockSampleSource source(pcm, 44100, 333);
    LiveCapture capture(source, cfg, 3);
    capture.start(); // synchronous mock: all frames arrive before any pop
    capture.stop();
    CHECK(capture.overruns() == 7);
    std::vector<int> indices;
    Audioframe frame;
    while (capture.pop(frame)) indices.push_back(frame.frame_index);
    CHECK(indices == std::vector<int>{7, 8, 9});
}

TEST_CASE("default input device is absent in this build") {
    CHECK_THROWS_AS((void)open_default_input(), io_error);
}
