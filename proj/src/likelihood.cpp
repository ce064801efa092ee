#include "attacca/likelihood.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "attacca/errors.hpp"

namespace attacca {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> y) {
    return {y.data(), (Eigen::Index)y.size()};
}

} // namespace

double lml_direct(std::span<const double> y, const Eigen::MatrixXd& K,
                  double noise_sigma) {
    const auto n = (Eigen::Index)y.size();
    if (K.rows() != n || K.cols() != n)
        throw std::invalid_argument("lml_direct: frame length != covariance size");
    if (!(noise_sigma > 0.0))
        throw std::invalid_argument("lml_direct: noise sigma must be positive");
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise_sigma * noise_sigma;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    // A is symmetric positive definite, so det > 0 and |U_ii| carries it all.
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = lu.matrixLU()(i, i);
        if (u == 0.0 || !std::isfinite(u))
            throw numeric_error("lml_direct: singular system");
        log_det += std::log(std::abs(u));
    }
    const Eigen::VectorXd yv = as_vector(y);
    const Eigen::VectorXd alpha = lu.solve(yv);
    return -0.5 * yv.dot(alpha) - 0.5 * log_det - 0.5 * (double)n * kLogTwoPi;
}

CholeskyFactor make_cholesky(const Eigen::MatrixXd& K, double noise_sigma) {
    if (K.rows() != K.cols())
        throw std::invalid_argument("make_cholesky: matrix not square");
    if (!(noise_sigma > 0.0))
        throw std::invalid_argument("make_cholesky: noise sigma must be positive");
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise_sigma * noise_sigma;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw numeric_error("make_cholesky: matrix not positive definite");
    CholeskyFactor f;
    f.L = llt.matrixL();
    f.noise_sigma = noise_sigma;
    f.log_det_half = f.L.diagonal().array().log().sum();
    return f;
}

double lml_cholesky(std::span<const double> y, const CholeskyFactor& factor) {
    const auto n = (Eigen::Index)y.size();
    if (n != factor.L.rows())
        throw std::invalid_argument("lml_cholesky: frame length != factor size");
    const Eigen::VectorXd yv = as_vector(y);
    Eigen::VectorXd alpha = factor.L.triangularView<Eigen::Lower>().solve(yv);
    factor.L.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha);
    return -0.5 * yv.dot(alpha) - factor.log_det_half - 0.5 * (double)n * kLogTwoPi;
}

void CholeskyCache::insert(std::vector<int> notes, CholeskyFactor factor) {
    factors_[std::move(notes)] =
        std::make_shared<const CholeskyFactor>(std::move(factor));
    ++factorizations_;
}

bool CholeskyCache::contains(const std::vector<int>& notes) const {
    return factors_.count(notes) != 0;
}

const CholeskyFactor& CholeskyCache::lookup(const std::vector<int>& notes) const {
    const auto it = factors_.find(notes);
    if (it == factors_.end())
        throw std::invalid_argument("cholesky cache: note set was not precomputed");
    ++hits_;
    return *it->second;
}

SpectralParams state_params(const ScoreState& state, const SpectralParams& base) {
    SpectralParams p = base;
    p.fundamentals = state.fundamentals;
    p.weights.assign(state.fundamentals.size(),
                     1.0 / (double)state.fundamentals.size());
    return p;
}

PrecomputeResult precompute_cache(const Score& score, const SpectralParams& base,
                                  int frame_length, int sample_rate) {
    if (score.states.empty())
        throw std::invalid_argument("precompute_cache: empty score");
    const auto t0 = std::chrono::steady_clock::now();
    PrecomputeResult result;
    for (const ScoreState& state : score.states) {
        if (state.notes.empty())
            throw std::invalid_argument("precompute_cache: state with no notes");
        if (result.cache.contains(state.notes)) continue;
        const SpectralParams p = state_params(state, base);
        const Eigen::MatrixXd K = build_covariance(frame_length, sample_rate, p);
        result.cache.insert(state.notes, make_cholesky(K, p.noise_sigma));
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace attacca
