#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace attacca {

// Additive mains-hum component. Disabled by default; when enabled it behaves
// like one extra spectral line at `frequency` with weight `amplitude`.
struct HumSettings {
    bool enabled = false;
    double frequency = 50.0;
    double amplitude = 0.0;
};

// Hyperparameters of the harmonic spectral model. The prior over a frame is a
// zero-mean stationary GP whose spectral density is a mixture of Gaussians
// mirrored at +-(m * f_q * b), one pair per harmonic m of each fundamental q.
struct SpectralParams {
    std::vector<double> fundamentals;    // Hz, one per sounding note
    std::vector<double> weights;         // per-note, nonnegative, sums to 1
    int num_harmonics = 9;               // M
    double envelope_T = 0.465;           // harmonic roll-off scale
    double envelope_v = 2.37;            // harmonic roll-off exponent
    double sigma_f = 0.005;              // per-line Gaussian width, Hz
    double noise_sigma = 0.1;            // observation noise stddev
    std::map<int, double> inharmonicity; // MIDI note -> B, stiffness constant
    HumSettings hum;

    // Throws std::invalid_argument when any field is out of contract:
    // empty/nonpositive fundamentals, weight count mismatch, negative weights,
    // |sum(w) - 1| > 1e-9, M < 1, sigma_f <= 0, T < 0, negative B.
    void validate() const;

    // B for a fundamental, resolved through the MIDI-keyed table by nearest
    // equal-tempered note. Missing entries mean a rigid string (B = 0).
    double inharmonicity_for(double freq) const;
};

// Noise stddev values outside this range are clamped at config boundaries.
inline constexpr double kNoiseSigmaMin = 1e-4;
inline constexpr double kNoiseSigmaMax = 10.0;
double clamp_noise_sigma(double sigma);

// Relative weight of harmonic m >= 1: 1 / (1 + T * m^v).
double envelope_weight(int m, double T, double v);

// Frequency-stretch factor of harmonic m for stiffness B: sqrt(1 + B * m^2).
double inharmonic_factor(int m, double B);

// Power spectral density at frequency f (two-sided, symmetric in f).
double spectral_density(double freq, const SpectralParams& p);

// Stationary covariance at lag tau seconds. Even in tau, maximal at 0.
double kernel_value(double tau, const SpectralParams& p);

// Frame geometry shared by covariance construction and slicing.
struct FrameSpec {
    int frame_length = 800;  // samples per analysis frame
    int hop_length = 4000;   // samples between frame starts
    int sample_rate = 44100; // Hz
};

// Dense n x n Toeplitz covariance for n consecutive samples. Costs n kernel
// evaluations, not n^2. Throws config_error when n is so large the matrix
// cannot be sensibly allocated.
Eigen::MatrixXd build_covariance(int n, int sample_rate, const SpectralParams& p);

// Deterministic draw from the prior: chol(K + eps*I) * z with z ~ N(0, I)
// seeded by `seed`. Jitter eps starts at 1e-10 * k(0) and escalates tenfold
// up to 1e-4 * k(0) before giving up with numeric_error.
std::vector<double> sample_gp(int n, int sample_rate, const SpectralParams& p,
                              std::uint64_t seed);

// Plain-text key/value hyperparameter file. Recognized keys: M, T, v,
// sigma_f, sigma_n, hum_freq, hum_amp; a bare MIDI note number as key adds an
// inharmonicity entry. '#' starts a comment. Values overlay the defaults in
// `base`. Fundamentals and weights are per-state and never come from files.
SpectralParams load_params_file(const std::string& path, SpectralParams base = {});
SpectralParams parse_params_text(const std::string& text, SpectralParams base = {});

} // namespace attacca
