#include "attacca/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "attacca/errors.hpp"

namespace attacca {

SweepModel::SweepModel(const std::vector<double>& grid, int frame_length,
                       int sample_rate, const SpectralParams& base)
    : grid_(grid) {
    if (grid_.empty())
        throw std::invalid_argument("SweepModel: empty frequency grid");
    if (frame_length < 1)
        throw std::invalid_argument("SweepModel: frame_length must be positive");
    factors_.reserve(grid_.size());
    for (double f : grid_) {
        if (!(f > 0.0))
            throw std::invalid_argument("SweepModel: grid frequencies must be positive");
        SpectralParams p = base;
        p.fundamentals = {f};
        p.weights = {1.0};
        const Eigen::MatrixXd K = build_covariance(frame_length, sample_rate, p);
        factors_.push_back(make_cholesky(K, p.noise_sigma));
    }
}

int SweepModel::frame_length() const { return factors_.front().size(); }

SweepResult SweepModel::evaluate(std::span<const double> frame) const {
    if ((int)frame.size() != frame_length())
        throw std::invalid_argument("SweepModel::evaluate: frame length mismatch");
    SweepResult out;
    out.points.reserve(grid_.size());
    out.best_frequency = grid_.front();
    out.best_lml = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid_.size(); ++i) {
        const double lml = lml_cholesky(frame, factors_[i]);
        out.points.push_back({grid_[i], lml});
        if (lml > out.best_lml ||
            (lml == out.best_lml && grid_[i] < out.best_frequency)) {
            out.best_lml = lml;
            out.best_frequency = grid_[i];
        }
    }
    return out;
}

SweepResult lml_sweep(std::span<const double> frame, int sample_rate,
                      const SpectralParams& base,
                      const std::vector<double>& grid) {
    return SweepModel(grid, (int)frame.size(), sample_rate, base).evaluate(frame);
}

std::vector<HarmonicPeak> extract_harmonic_peaks(const PowerSpectrum& spectrum,
                                                 double f0, int max_harmonics,
                                                 double rel_window) {
    if (!(f0 > 0.0))
        throw std::invalid_argument("extract_harmonic_peaks: f0 must be positive");
    if (max_harmonics < 1)
        throw std::invalid_argument("extract_harmonic_peaks: need at least one harmonic");
    if (!(rel_window > 0.0) || rel_window >= 0.5)
        throw std::invalid_argument("extract_harmonic_peaks: rel_window out of range");
    const size_t bins = spectrum.freq.size();
    if (bins < 3 || spectrum.power.size() != bins)
        throw std::invalid_argument("extract_harmonic_peaks: malformed spectrum");

    auto lower_bin = [&](double f) {
        return (size_t)(std::lower_bound(spectrum.freq.begin(), spectrum.freq.end(), f) -
                        spectrum.freq.begin());
    };

    std::vector<HarmonicPeak> peaks;
    for (int m = 1; m <= max_harmonics; ++m) {
        const double center = m * f0;
        const size_t lo = lower_bin(center * (1.0 - rel_window));
        size_t hi = lower_bin(center * (1.0 + rel_window));
        if (hi >= bins) hi = bins; // half-open upper bound
        if (lo + 1 >= hi) continue;
        size_t best = lo;
        for (size_t j = lo; j < hi; ++j)
            if (spectrum.power[j] > spectrum.power[best]) best = j;
        // The maximum must be interior to the band and to the spectrum, with
        // strictly positive neighbours, to support log-domain interpolation.
        if (best == lo || best + 1 >= hi) continue;
        const double pl = spectrum.power[best - 1];
        const double pc = spectrum.power[best];
        const double pr = spectrum.power[best + 1];
        if (!(pl > 0.0) || !(pc > 0.0) || !(pr > 0.0)) continue;
        const double ll = std::log(pl), lc = std::log(pc), lr = std::log(pr);
        const double denom = ll - 2.0 * lc + lr;
        if (!(denom < 0.0)) continue; // not a curvature maximum
        const double delta = 0.5 * (ll - lr) / denom;
        const double bin_width = spectrum.freq[best + 1] - spectrum.freq[best];
        peaks.push_back({m, spectrum.freq[best] + delta * bin_width,
                         std::exp(lc - 0.25 * (ll - lr) * delta)});
    }
    return peaks;
}

namespace {

// Squared distance between the unit-normalized measurement and the
// unit-normalized model envelope, summed over samples.
double envelope_objective(const std::vector<std::vector<double>>& samples,
                          double T, double v) {
    double total = 0.0;
    for (const auto& powers : samples) {
        const int M = (int)powers.size();
        double norm_p = 0.0, norm_e = 0.0;
        std::vector<double> env(M);
        for (int m = 1; m <= M; ++m) {
            env[m - 1] = envelope_weight(m, T, v);
            norm_e += env[m - 1] * env[m - 1];
            norm_p += powers[m - 1] * powers[m - 1];
        }
        norm_e = std::sqrt(norm_e);
        norm_p = std::sqrt(norm_p);
        for (int m = 0; m < M; ++m) {
            const double d = powers[m] / norm_p - env[m] / norm_e;
            total += d * d;
        }
    }
    return total;
}

} // namespace

EnvelopeFit fit_envelope(const std::vector<std::vector<double>>& harmonic_powers,
                         double T0, double v0, int max_iterations) {
    if (harmonic_powers.empty())
        throw std::invalid_argument("fit_envelope: no samples");
    for (const auto& powers : harmonic_powers) {
        if (powers.empty())
            throw std::invalid_argument("fit_envelope: empty sample");
        double norm = 0.0;
        for (double p : powers) {
            if (!(p >= 0.0))
                throw std::invalid_argument("fit_envelope: negative power");
            norm += p * p;
        }
        if (!(norm > 0.0))
            throw std::invalid_argument("fit_envelope: all-zero sample");
    }
    if (!(T0 >= 0.0) || !(v0 >= 0.0))
        throw std::invalid_argument("fit_envelope: start must be nonnegative");
    if (max_iterations < 0)
        throw std::invalid_argument("fit_envelope: negative iteration budget");

    constexpr double kFloor = 1e-9;
    double T = std::max(T0, kFloor), v = std::max(v0, kFloor);
    double obj = envelope_objective(harmonic_powers, T, v);
    int iterations = 0;
    for (; iterations < max_iterations; ++iterations) {
        const double hT = 1e-6 * std::max(1.0, std::abs(T));
        const double hv = 1e-6 * std::max(1.0, std::abs(v));
        const double gT = (envelope_objective(harmonic_powers, T + hT, v) -
                           envelope_objective(harmonic_powers, std::max(T - hT, kFloor), v)) /
                          (T - hT >= kFloor ? 2.0 * hT : hT + (T - kFloor));
        const double gv = (envelope_objective(harmonic_powers, T, v + hv) -
                           envelope_objective(harmonic_powers, T, std::max(v - hv, kFloor))) /
                          (v - hv >= kFloor ? 2.0 * hv : hv + (v - kFloor));
        const double grad_sq = gT * gT + gv * gv;
        if (grad_sq < 1e-20) break;

        // Backtracking: shrink until the step actually descends.
        double alpha = 1.0;
        bool moved = false;
        while (alpha > 1e-14) {
            const double Tn = std::max(T - alpha * gT, kFloor);
            const double vn = std::max(v - alpha * gv, kFloor);
            const double candidate = envelope_objective(harmonic_powers, Tn, vn);
            if (candidate < obj - 1e-12 * alpha * grad_sq &&
                (Tn != T || vn != v)) {
                T = Tn;
                v = vn;
                obj = candidate;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    return {T, v, obj, iterations};
}

InharmonicityFit fit_inharmonicity(const std::vector<HarmonicPeak>& peaks,
                                   double f0) {
    if (peaks.size() < 3)
        throw numeric_error("fit_inharmonicity: need at least three harmonic peaks");
    if (!(f0 > 0.0))
        throw std::invalid_argument("fit_inharmonicity: f0 must be positive");

    auto objective = [&](double B) {
        double total = 0.0;
        for (const HarmonicPeak& p : peaks) {
            const double predicted = p.m * f0 * inharmonic_factor(p.m, B);
            const double d = p.frequency - predicted;
            total += d * d;
        }
        return total;
    };

    // Golden-section search over the physically plausible stiffness range.
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 0.01;
    double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    while (hi - lo > 1e-12) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        }
    }
    double best = 0.5 * (lo + hi);
    double best_obj = objective(best);
    // Never report a fit worse than the rigid string.
    if (objective(0.0) <= best_obj) {
        best = 0.0;
        best_obj = objective(0.0);
    }
    return {best, best_obj};
}

std::vector<double> estimate_weights(const PowerSpectrum& spectrum,
                                     const std::vector<double>& fundamentals,
                                     const SpectralParams& base) {
    const size_t bins = spectrum.freq.size();
    if (bins == 0 || spectrum.power.size() != bins)
        throw std::invalid_argument("estimate_weights: malformed spectrum");
    if (fundamentals.empty())
        throw std::invalid_argument("estimate_weights: no fundamentals");
    const size_t Q = fundamentals.size();

    Eigen::MatrixXd A(bins, Q);
    for (size_t q = 0; q < Q; ++q) {
        if (!(fundamentals[q] > 0.0))
            throw std::invalid_argument("estimate_weights: fundamentals must be positive");
        SpectralParams p = base;
        p.fundamentals = {fundamentals[q]};
        p.weights = {1.0};
        p.hum.enabled = false; // hum is not attributable to any note
        for (size_t i = 0; i < bins; ++i)
            A((Eigen::Index)i, (Eigen::Index)q) = spectral_density(spectrum.freq[i], p);
    }
    Eigen::VectorXd b(bins);
    for (size_t i = 0; i < bins; ++i) b[(Eigen::Index)i] = spectrum.power[i];

    const Eigen::VectorXd w = A.colPivHouseholderQr().solve(b);
    std::vector<double> out(Q);
    double sum = 0.0;
    for (size_t q = 0; q < Q; ++q) {
        out[q] = std::max(w[(Eigen::Index)q], 0.0);
        sum += out[q];
    }
    if (!(sum > 0.0))
        throw numeric_error("estimate_weights: degenerate fit, all weights vanish");
    for (double& x : out) x /= sum;
    return out;
}

} // namespace attacca
