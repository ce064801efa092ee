#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "attacca/errors.hpp"
#include "attacca/kernel.hpp"
#include "helpers/oracles.hpp"

using namespace attacca;

namespace {

SpectralParams single_note(double f0) {
    SpectralParams p;
    p.fundamentals = {f0};
    p.weights = {1.0};
    return p;
}

double total_weight(const SpectralParams& p) {
    double acc = 0.0;
    for (size_t q = 0; q < p.fundamentals.size(); ++q) {
        double inner = 0.0;
        for (int m = 1; m <= p.num_harmonics; ++m)
            inner += envelope_weight(m, p.envelope_T, p.envelope_v);
        acc += p.weights[q] * inner;
    }
    if (p.hum.enabled) acc += p.hum.amplitude;
    return acc;
}

} // namespace

TEST_CASE("envelope weight reference values") {
    CHECK(envelope_weight(1, 0.465, 2.37) == doctest::Approx(0.682594).epsilon(1e-6));
    // Extended-precision cross-check at a non-trivial harmonic.
    const double got = envelope_weight(4, 0.465, 2.37);
    const long double want = oracle::envelope_ld(4, 0.465L, 2.37L);
    CHECK(std::abs(got - (double)want) / (double)want < 1e-12);
    CHECK(envelope_weight(1, 0.0, 2.37) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS((void)envelope_weight(0, 0.465, 2.37), std::invalid_argument);
    CHECK_THROWS_AS((void)envelope_weight(1, -0.1, 2.37), std::invalid_argument);
}

TEST_CASE("envelope decreases in m for positive T") {
    for (int m = 1; m < 24; ++m)
        CHECK(envelope_weight(m, 0.465, 2.37) > envelope_weight(m + 1, 0.465, 2.37));
}

TEST_CASE("inharmonic stretch factor") {
    CHECK(inharmonic_factor(10, 0.001) == doctest::Approx(1.048809).epsilon(1e-6));
    CHECK(inharmonic_factor(7, 0.0) == 1.0);
    CHECK_THROWS_AS((void)inharmonic_factor(2, -1e-6), std::invalid_argument);
}

TEST_CASE("density integrates to the total component weight") {
    SpectralParams p;
    p.fundamentals = {220.0, 330.0};
    p.weights = {0.4, 0.6};
    p.num_harmonics = 6;

    std::vector<double> centers;
    for (size_t q = 0; q < p.fundamentals.size(); ++q)
        for (int m = 1; m <= p.num_harmonics; ++m) {
            const double mu = m * p.fundamentals[q];
            centers.push_back(mu);
            centers.push_back(-mu);
        }
    const double integral = oracle::integrate_peaks(
        [&](double f) { return spectral_density(f, p); }, centers,
        10.0 * p.sigma_f, p.sigma_f / 50.0);
    CHECK(integral == doctest::Approx(total_weight(p)).epsilon(1e-6));
}

TEST_CASE("density is symmetric and nonnegative") {
    SpectralParams p = single_note(261.6256);
    p.hum.enabled = true;
    p.hum.amplitude = 0.02;
    for (double f : {0.0, 50.0, 261.6256, 523.2, 1000.0, 3141.5}) {
        CHECK(spectral_density(f, p) >= 0.0);
        CHECK(spectral_density(f, p) == doctest::Approx(spectral_density(-f, p))
                                            .epsilon(1e-12));
    }
}

TEST_CASE("kernel at lag zero equals the summed envelope weights") {
    SpectralParams p;
    p.fundamentals = {196.0, 293.66};
    p.weights = {0.3, 0.7};
    double want = 0.0;
    for (int m = 1; m <= p.num_harmonics; ++m)
        want += envelope_weight(m, p.envelope_T, p.envelope_v);
    // Uniform envelope across notes, so k(0) is weight-independent here.
    CHECK(std::abs(kernel_value(0.0, p) - want) < 1e-12);

    p.hum.enabled = true;
    p.hum.amplitude = 0.05;
    CHECK(std::abs(kernel_value(0.0, p) - (want + 0.05)) < 1e-12);
}

TEST_CASE("kernel is even and peaks at zero lag") {
    SpectralParams p;
    p.fundamentals = {220.0, 440.0, 554.37};
    p.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    const double k0 = kernel_value(0.0, p);
    for (int i = 1; i <= 200; ++i) {
        const double tau = i * 1.3e-4;
        const double k = kernel_value(tau, p);
        CHECK(k == kernel_value(-tau, p)); // cos and the decay are both even
        CHECK(std::abs(k) <= k0 + 1e-12);
    }
}

TEST_CASE("kernel transform matches the density on the bin grid") {
    // Fundamentals sit on exact DFT bins (10 Hz spacing over a 0.1 s span),
    // so spectral leakage stays far below the comparison tolerance.
    const int fs = 44100;
    const int n = 4410;
    for (int harmonics : {1, 9}) {
        for (int q = 1; q <= 3; ++q) {
            SpectralParams p;
            const std::vector<double> pool = {220.0, 440.0, 880.0};
            p.fundamentals.assign(pool.begin(), pool.begin() + q);
            p.weights.assign(q, 1.0 / q);
            p.num_harmonics = harmonics;

            std::vector<double> k(n);
            for (int i = 0; i < n; ++i)
                k[i] = kernel_value((double)(i - n / 2) / fs, p);
            const std::vector<double> mag = oracle::dft_magnitudes(k);

            std::vector<double> want(n);
            for (int j = 0; j < n; ++j) {
                const double f = (j < n / 2 ? j : j - n) * (double)fs / n;
                want[j] = spectral_density(f, p);
            }
            double nm = 0.0, nw = 0.0;
            for (int j = 0; j < n; ++j) {
                nm += mag[j] * mag[j];
                nw += want[j] * want[j];
            }
            nm = std::sqrt(nm);
            nw = std::sqrt(nw);
            double err = 0.0;
            for (int j = 0; j < n; ++j) {
                const double d = mag[j] / nm - want[j] / nw;
                err += d * d;
            }
            CHECK(std::sqrt(err) < 1e-3);
        }
    }
}

TEST_CASE("covariance matches the naive construction and is SPD with noise") {
    SpectralParams p;
    p.fundamentals = {261.6256, 329.63};
    p.weights = {0.5, 0.5};
    const int n = 96;
    const int fs = 44100;
    const Eigen::MatrixXd K = build_covariance(n, fs, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double naive = kernel_value((double)(i - j) / fs, p);
            CHECK(std::abs(K(i, j) - naive) <= 1e-14);
        }
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);

    Eigen::MatrixXd A = K;
    A.diagonal().array() += 0.1 * 0.1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("covariance rejects absurd frame lengths") {
    CHECK_THROWS_AS((void)build_covariance(100000, 44100, single_note(440.0)),
                    config_error);
    CHECK_THROWS_AS((void)build_covariance(0, 44100, single_note(440.0)),
                    std::invalid_argument);
}

TEST_CASE("prior draws are deterministic and carry the right variance") {
    SpectralParams p = single_note(440.0);
    const int n = 64;
    const auto a = sample_gp(n, 44100, p, 1234);
    const auto b = sample_gp(n, 44100, p, 1234);
    CHECK(a == b);
    const auto c = sample_gp(n, 44100, p, 1235);
    CHECK(a != c);

    // Variance across many draws at a fixed index approaches k(0).
    const double k0 = kernel_value(0.0, p);
    double acc = 0.0, acc2 = 0.0;
    const int draws = 500;
    for (int s = 0; s < draws; ++s) {
        const double v = sample_gp(n, 44100, p, 9000 + s)[n / 2];
        acc += v;
        acc2 += v * v;
    }
    const double var = acc2 / draws - (acc / draws) * (acc / draws);
    CHECK(std::abs(var - k0) / k0 < 0.15);
}

TEST_CASE("hyperparameter validation catches contract breaches") {
    SpectralParams p = single_note(440.0);
    p.weights = {0.5};
    CHECK_THROWS_AS((void)kernel_value(0.0, p), std::invalid_argument);
    p.weights = {1.0};
    p.fundamentals = {-2.0};
    CHECK_THROWS_AS((void)kernel_value(0.0, p), std::invalid_argument);
    p = single_note(440.0);
    p.sigma_f = 0.0;
    CHECK_THROWS_AS((void)spectral_density(440.0, p), std::invalid_argument);
    p = single_note(440.0);
    p.num_harmonics = 0;
    CHECK_THROWS_AS((void)kernel_value(0.0, p), std::invalid_argument);
}

TEST_CASE("params file loading") {
    const std::string text =
        "# fitted on the practice piano\n"
        "M = 11\n"
        "T = 0.5\n"
        "v = 2.1\n"
        "sigma_f = 0.01\n"
        "sigma_n = 50   # clamped to the legal ceiling\n"
        "hum_freq = 60\n"
        "hum_amp = 0.02\n"
        "60 = 0.0004\n"
        "61 = 0.00042\n";
    const SpectralParams p = parse_params_text(text);
    CHECK(p.num_harmonics == 11);
    CHECK(p.envelope_T == 0.5);
    CHECK(p.envelope_v == 2.1);
    CHECK(p.sigma_f == 0.01);
    CHECK(p.noise_sigma == 10.0);
    CHECK(p.hum.enabled);
    CHECK(p.hum.frequency == 60.0);
    CHECK(p.hum.amplitude == 0.02);
    CHECK(p.inharmonicity.at(60) == 0.0004);
    CHECK(p.inharmonicity.at(61) == 0.00042);
    CHECK(p.inharmonicity_for(261.6256) == 0.0004);
    CHECK(p.inharmonicity_for(880.0) == 0.0);

    CHECK_THROWS_AS((void)parse_params_text("bogus = 1\n"), config_error);
    CHECK_THROWS_AS((void)parse_params_text("M = 2.5\n"), config_error);
    CHECK_THROWS_AS((void)parse_params_text("sigma_f\n"), config_error);
    CHECK_THROWS_AS((void)load_params_file("/nonexistent/params"), io_error);
    CHECK(parse_params_text("sigma_n = 1e-9\n").noise_sigma == 1e-4);
}

TEST_CASE("hum adds a matched cosine and density line") {
    SpectralParams with = single_note(440.0);
    with.hum.enabled = true;
    with.hum.frequency = 50.0;
    with.hum.amplitude = 0.03;
    SpectralParams without = single_note(440.0);
    for (double tau : {1e-4, 3.7e-3, 0.011}) {
        const double decay = std::exp(-2.0 * std::numbers::pi * std::numbers::pi *
                                      with.sigma_f * with.sigma_f * tau * tau);
        const double diff = kernel_value(tau, with) - kernel_value(tau, without);
        CHECK(diff == doctest::Approx(decay * 0.03 *
                                      std::cos(2.0 * std::numbers::pi * 50.0 * tau))
                          .epsilon(1e-12));
    }
    // The added line integrates to the hum amplitude.
    const double integral = oracle::integrate_peaks(
        [&](double f) {
            return spectral_density(f, with) - spectral_density(f, without);
        },
        {50.0, -50.0}, 10.0 * with.sigma_f, with.sigma_f / 50.0);
    CHECK(integral == doctest::Approx(0.03).epsilon(1e-6));
}
