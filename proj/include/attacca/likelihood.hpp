#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "attacca/kernel.hpp"
#include "attacca/score.hpp"

namespace attacca {

// Log marginal likelihood of frame y under the prior K plus iid noise,
// computed by explicit solve and log-determinant of K + sigma^2 I.
double lml_direct(std::span<const double> y, const Eigen::MatrixXd& K,
                  double noise_sigma);

// Lower-triangular factor of K + sigma^2 I with its cached log-det half.
// Reusable across frames; one factorization amortizes over a whole run.
struct CholeskyFactor {
    Eigen::MatrixXd L;        // L * L^T = K + sigma^2 I
    double log_det_half = 0;  // sum_i log L(i,i)
    double noise_sigma = 0;

    int size() const { return (int)L.rows(); }
};

// Factorizes K + sigma^2 I. Throws numeric_error when the matrix is not
// positive definite at this noise level.
CholeskyFactor make_cholesky(const Eigen::MatrixXd& K, double noise_sigma);

// Log marginal likelihood via two triangular solves against a prebuilt
// factor. No factorization happens here.
double lml_cholesky(std::span<const double> y, const CholeskyFactor& factor);

// Factors keyed by the canonical note set of a score state. States sharing a
// note set share one factor.
class CholeskyCache {
  public:
    void insert(std::vector<int> notes, CholeskyFactor factor);
    bool contains(const std::vector<int>& notes) const;
    // Throws std::invalid_argument when the note set was never precomputed.
    const CholeskyFactor& lookup(const std::vector<int>& notes) const;

    int size() const { return (int)factors_.size(); }
    std::int64_t hits() const { return hits_; }
    std::int64_t factorizations() const { return factorizations_; }

  private:
    std::map<std::vector<int>, std::shared_ptr<const CholeskyFactor>> factors_;
    mutable std::int64_t hits_ = 0;
    std::int64_t factorizations_ = 0;
};

// Builds one factor per distinct note set in the score. Each state's kernel
// uses that state's fundamentals with uniform weights 1/Q; every other
// hyperparameter comes from `base`. Returns the cache plus wall seconds spent.
struct PrecomputeResult {
    CholeskyCache cache;
    double seconds = 0.0;
};
PrecomputeResult precompute_cache(const Score& score, const SpectralParams& base,
                                  int frame_length, int sample_rate);

// Per-state params as used by the cache: fundamentals from the state's notes,
// uniform weights, everything else from base.
SpectralParams state_params(const ScoreState& state, const SpectralParams& base);

} // namespace attacca
