#pragma once

#include <span>
#include <vector>

#include "attacca/audio.hpp"
#include "attacca/kernel.hpp"
#include "attacca/likelihood.hpp"

namespace attacca {

struct SweepPoint {
    double frequency;
    double lml;
};

struct SweepResult {
    std::vector<SweepPoint> points; // grid order
    double best_frequency;          // highest lml; lowest frequency on ties
    double best_lml;
};

// Prebuilt single-note models over a fixed frequency grid, reusable across
// any number of frames of the same length. Each candidate gets fundamentals
// {f}, unit weight, and the stiffness of its nearest equal-tempered note.
class SweepModel {
  public:
    SweepModel(const std::vector<double>& grid, int frame_length,
               int sample_rate, const SpectralParams& base);

    SweepResult evaluate(std::span<const double> frame) const;
    const std::vector<double>& grid() const { return grid_; }
    int frame_length() const;

  private:
    std::vector<double> grid_;
    std::vector<CholeskyFactor> factors_;
};

// One-shot convenience: builds the models and scores a single frame.
SweepResult lml_sweep(std::span<const double> frame, int sample_rate,
                      const SpectralParams& base,
                      const std::vector<double>& grid);

// A located spectral peak near harmonic m of some fundamental.
struct HarmonicPeak {
    int m;
    double frequency; // interpolated, Hz
    double power;     // interpolated height
};

// Finds the strongest bin inside a +-rel_window band around each harmonic
// m * f0 and refines it by parabolic interpolation on log power (exact for
// Gaussian-shaped peaks). Harmonics whose maximum sits on a band edge or
// whose neighbourhood is not a proper peak are skipped.
std::vector<HarmonicPeak> extract_harmonic_peaks(const PowerSpectrum& spectrum,
                                                 double f0, int max_harmonics,
                                                 double rel_window = 0.03);

struct EnvelopeFit {
    double T;
    double v;
    double objective;
    int iterations;
};

// Fits the harmonic roll-off (T, v) to measured per-harmonic powers. Each
// sample is the power of harmonics 1..M of one tone; samples and the model
// envelope are compared as unit vectors, so absolute level drops out.
// Finite-difference gradient descent with backtracking: the result never
// scores worse than the starting point.
EnvelopeFit fit_envelope(const std::vector<std::vector<double>>& harmonic_powers,
                         double T0 = 0.465, double v0 = 2.37,
                         int max_iterations = 200);

struct InharmonicityFit {
    double B;
    double objective; // sum of squared peak position errors, Hz^2
};

// Fits the stiffness constant from measured harmonic positions by
// golden-section search over [0, 0.01]. Needs at least three peaks; the
// result is never worse than the rigid-string baseline B = 0.
InharmonicityFit fit_inharmonicity(const std::vector<HarmonicPeak>& peaks,
                                   double f0);

// Nonnegative per-note weights that best explain an observed power spectrum
// as a combination of single-note model densities (hum excluded). Least
// squares, negatives clamped to zero, then normalized to sum 1. Throws
// numeric_error when the fit degenerates to all-zero weights.
std::vector<double> estimate_weights(const PowerSpectrum& spectrum,
                                     const std::vector<double>& fundamentals,
                                     const SpectralParams& base);

} // namespace attacca
