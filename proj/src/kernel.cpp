#include "attacca/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "attacca/errors.hpp"

namespace attacca {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gaussian_pdf(double x, double mean, double sigma) {
    const double z = (x - mean) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
}

int nearest_midi_note(double freq) {
    const int note = (int)std::lround(69.0 + 12.0 * std::log2(freq / 440.0));
    return std::clamp(note, 0, 127);
}

} // namespace

void SpectralParams::validate() const {
    if (fundamentals.empty())
        throw std::invalid_argument("spectral params: no fundamentals");
    for (double f : fundamentals)
        if (!(f > 0.0) || !std::isfinite(f))
            throw std::invalid_argument("spectral params: fundamentals must be positive");
    if (weights.size() != fundamentals.size())
        throw std::invalid_argument("spectral params: weight count != fundamental count");
    double wsum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("spectral params: weights must be nonnegative");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("spectral params: weights must sum to 1");
    if (num_harmonics < 1)
        throw std::invalid_argument("spectral params: need at least one harmonic");
    if (!(sigma_f > 0.0))
        throw std::invalid_argument("spectral params: sigma_f must be positive");
    if (envelope_T < 0.0)
        throw std::invalid_argument("spectral params: T must be nonnegative");
    for (const auto& [note, b] : inharmonicity)
        if (b < 0.0 || note < 0 || note > 127)
            throw std::invalid_argument("spectral params: bad inharmonicity entry");
    if (hum.enabled && (!(hum.frequency > 0.0) || hum.amplitude < 0.0))
        throw std::invalid_argument("spectral params: bad hum settings");
}

double SpectralParams::inharmonicity_for(double freq) const {
    if (inharmonicity.empty()) return 0.0;
    auto it = inharmonicity.find(nearest_midi_note(freq));
    return it == inharmonicity.end() ? 0.0 : it->second;
}

double clamp_noise_sigma(double sigma) {
    return std::clamp(sigma, kNoiseSigmaMin, kNoiseSigmaMax);
}

double envelope_weight(int m, double T, double v) {
    if (m < 1) throw std::invalid_argument("envelope_weight: m must be >= 1");
    if (T < 0.0) throw std::invalid_argument("envelope_weight: T must be >= 0");
    return 1.0 / (1.0 + T * std::pow((double)m, v));
}

double inharmonic_factor(int m, double B) {
    if (m < 1) throw std::invalid_argument("inharmonic_factor: m must be >= 1");
    if (B < 0.0) throw std::invalid_argument("inharmonic_factor: B must be >= 0");
    return std::sqrt(1.0 + B * (double)m * (double)m);
}

double spectral_density(double freq, const SpectralParams& p) {
    p.validate();
    double acc = 0.0;
    for (size_t q = 0; q < p.fundamentals.size(); ++q) {
        const double f0 = p.fundamentals[q];
        const double B = p.inharmonicity_for(f0);
        double component = 0.0;
        for (int m = 1; m <= p.num_harmonics; ++m) {
            const double em = envelope_weight(m, p.envelope_T, p.envelope_v);
            const double mu = m * f0 * inharmonic_factor(m, B);
            component += 0.5 * em * (gaussian_pdf(freq, mu, p.sigma_f) +
                                     gaussian_pdf(freq, -mu, p.sigma_f));
        }
        acc += p.weights[q] * component;
    }
    if (p.hum.enabled)
        acc += 0.5 * p.hum.amplitude * (gaussian_pdf(freq, p.hum.frequency, p.sigma_f) +
                                        gaussian_pdf(freq, -p.hum.frequency, p.sigma_f));
    return acc;
}

double kernel_value(double tau, const SpectralParams& p) {
    p.validate();
    double acc = 0.0;
    for (size_t q = 0; q < p.fundamentals.size(); ++q) {
        const double f0 = p.fundamentals[q];
        const double B = p.inharmonicity_for(f0);
        double component = 0.0;
        for (int m = 1; m <= p.num_harmonics; ++m) {
            const double em = envelope_weight(m, p.envelope_T, p.envelope_v);
            component += em * std::cos(kTwoPi * m * f0 * inharmonic_factor(m, B) * tau);
        }
        acc += p.weights[q] * component;
    }
    if (p.hum.enabled)
        acc += p.hum.amplitude * std::cos(kTwoPi * p.hum.frequency * tau);
    const double decay = std::exp(-2.0 * std::numbers::pi * std::numbers::pi *
                                  p.sigma_f * p.sigma_f * tau * tau);
    return decay * acc;
}

Eigen::MatrixXd build_covariance(int n, int sample_rate, const SpectralParams& p) {
    if (n < 1) throw std::invalid_argument("build_covariance: n must be >= 1");
    if (sample_rate < 1) throw std::invalid_argument("build_covariance: bad sample rate");
    // 8192^2 doubles is 512 MiB; anything beyond that is a misconfiguration.
    if (n > 8192)
        throw config_error("covariance matrix too large: frame_length " + std::to_string(n));
    std::vector<double> lag(n);
    for (int i = 0; i < n; ++i)
        lag[i] = kernel_value((double)i / sample_rate, p);
    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            K(i, j) = lag[std::abs(i - j)];
    return K;
}

std::vector<double> sample_gp(int n, int sample_rate, const SpectralParams& p,
                              std::uint64_t seed) {
    const Eigen::MatrixXd K = build_covariance(n, sample_rate, p);
    const double k0 = kernel_value(0.0, p);
    Eigen::LLT<Eigen::MatrixXd> llt;
    double eps = 1e-10 * k0;
    const double eps_max = 1e-4 * k0;
    for (;; eps *= 10.0) {
        Eigen::MatrixXd jittered = K;
        jittered.diagonal().array() += eps;
        llt.compute(jittered);
        if (llt.info() == Eigen::Success) break;
        if (eps >= eps_max)
            throw numeric_error("sample_gp: covariance not factorizable at max jitter");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = normal(rng);
    const Eigen::VectorXd draw = llt.matrixL() * z;
    return {draw.data(), draw.data() + n};
}

namespace {

double parse_double(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        while (pos < value.size() && std::isspace((unsigned char)value[pos])) ++pos;
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw config_error("params file: bad value '" + value + "' for key '" + key + "'");
    }
}

} // namespace

SpectralParams parse_params_text(const std::string& text, SpectralParams base) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("params file line " + std::to_string(lineno) +
                               ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "M") {
            const double m = parse_double(value, key);
            if (m < 1 || m != std::floor(m))
                throw config_error("params file: M must be a positive integer");
            base.num_harmonics = (int)m;
        } else if (key == "T") {
            base.envelope_T = parse_double(value, key);
        } else if (key == "v") {
            base.envelope_v = parse_double(value, key);
        } else if (key == "sigma_f") {
            base.sigma_f = parse_double(value, key);
        } else if (key == "sigma_n") {
            base.noise_sigma = clamp_noise_sigma(parse_double(value, key));
        } else if (key == "hum_freq") {
            base.hum.frequency = parse_double(value, key);
            base.hum.enabled = true;
        } else if (key == "hum_amp") {
            base.hum.amplitude = parse_double(value, key);
            base.hum.enabled = base.hum.amplitude > 0.0;
        } else if (!key.empty() &&
                   key.find_first_not_of("0123456789") == std::string::npos) {
            const int note = std::stoi(key);
            if (note > 127)
                throw config_error("params file: MIDI note out of range: " + key);
            const double b = parse_double(value, key);
            if (b < 0.0)
                throw config_error("params file: inharmonicity must be >= 0");
            base.inharmonicity[note] = b;
        } else {
            throw config_error("params file: unknown key '" + key + "'");
        }
    }
    return base;
}

SpectralParams load_params_file(const std::string& path, SpectralParams base) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open params file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_params_text(buf.str(), std::move(base));
}

} // namespace attacca
