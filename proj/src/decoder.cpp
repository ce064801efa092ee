#include "attacca/decoder.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "attacca/errors.hpp"

namespace attacca {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void DecoderConfig::validate() const {
    if (window_length < 1)
        throw config_error("window_length must be >= 1");
    if (window_threshold < 0)
        throw config_error("window_threshold must be >= 0");
    if (!(fallback_self_prob > 0.0) || !(fallback_self_prob < 1.0))
        throw config_error("fallback_self_prob must be in (0, 1)");
    if (tempo_window < 0)
        throw config_error("tempo_window must be >= 0");
    if (!(frame_rate > 0.0))
        throw config_error("frame_rate must be positive");
}

Decoder::Decoder(const Score& score, const DecoderConfig& config)
    : config_((config.validate(), config)),
      tempo_(config.tempo_window, config.frame_rate) {
    if (score.states.empty())
        throw std::invalid_argument("Decoder: score has no states");
    ttn_.reserve(score.states.size());
    for (const ScoreState& s : score.states) {
        if (!(s.time_to_next > 0.0))
            throw std::invalid_argument("Decoder: state with nonpositive time_to_next");
        ttn_.push_back(s.time_to_next);
    }
    win_lo_ = 1;
    win_hi_ = std::min(config_.window_length, num_states());
    col_.assign(win_hi_ - win_lo_ + 1, {kNegInf, 0});
    col_[0] = {0.0, 0}; // the piece starts at state 1
}

TransitionProbs Decoder::probs_for(int state, int run) const {
    if (!config_.state_duration)
        return fixed_transition_probs(config_.fallback_self_prob);
    return transition_probs(tempo_.expected_frames(ttn_[state - 1]), run);
}

int Decoder::step(const std::map<int, double>& frame_lmls) {
    for (int k = win_lo_; k <= win_hi_; ++k)
        if (!frame_lmls.count(k))
            throw std::invalid_argument("Decoder::step: missing log likelihood for state " +
                                        std::to_string(k));
    ++frame_count_;

    // One trellis column: each state is entered either by staying put or by
    // advancing from its predecessor; ties go to the advance.
    const int n = win_hi_ - win_lo_ + 1;
    std::vector<Cell> next(n);
    std::vector<int> preds(keep_backpointers_ ? n : 0);
    for (int i = 0; i < n; ++i) {
        const int k = win_lo_ + i;
        double self = kNegInf, advance = kNegInf;
        if (col_[i].score != kNegInf)
            self = col_[i].score + std::log(probs_for(k, col_[i].run).self_prob);
        if (i > 0 && col_[i - 1].score != kNegInf)
            advance = col_[i - 1].score +
                      std::log(probs_for(k - 1, col_[i - 1].run).advance_prob);
        const double emit = frame_lmls.at(k);
        if (advance >= self && advance != kNegInf) {
            next[i] = {emit + advance, 0};
            if (keep_backpointers_) preds[i] = k - 1;
        } else if (self != kNegInf) {
            next[i] = {emit + self, col_[i].run + 1};
            if (keep_backpointers_) preds[i] = k;
        } else {
            next[i] = {kNegInf, 0}; // not yet reachable inside the window
            if (keep_backpointers_) preds[i] = k;
        }
    }
    col_ = std::move(next);
    if (keep_backpointers_) backpointers_.push_back(std::move(preds));

    // Position estimate: best column score, later state on a tie.
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (col_[i].score >= col_[best].score) best = i;
    const int new_estimate = win_lo_ + best;
    const double best_score = col_[best].score;

    // Tempo bookkeeping: leaving a state forward records how long it was
    // held; a backward correction discards the occupancy instead.
    if (new_estimate == estimate_) {
        ++est_frames_;
    } else {
        if (new_estimate > estimate_ && est_frames_ > 0)
            tempo_.record((double)est_frames_, ttn_[estimate_ - 1]);
        estimate_ = new_estimate;
        est_frames_ = 1;
    }

    shift_window();
    trace_.push_back({frame_count_, estimate_, best_score});
    return estimate_;
}

void Decoder::shift_window() {
    const int K = num_states();
    const int max_lo = std::max(1, K - config_.window_length + 1);
    if (estimate_ > win_lo_ + config_.window_threshold) {
        int new_lo = std::min(estimate_ - config_.window_threshold, max_lo);
        new_lo = std::max(new_lo, win_lo_); // the window never retreats
        if (new_lo > win_lo_) {
            col_.erase(col_.begin(), col_.begin() + (new_lo - win_lo_));
            win_lo_ = new_lo;
        }
    }
    const int new_hi = std::min(win_lo_ + config_.window_length - 1, K);
    while (win_hi_ < new_hi) {
        col_.push_back({kNegInf, 0}); // entering states start unreachable
        ++win_hi_;
    }
}

double Decoder::estimate_log_prob() const {
    if (trace_.empty())
        throw std::invalid_argument("Decoder::estimate_log_prob: no frames decoded");
    return trace_.back().log_prob;
}

// Offline decoding reuses the online engine with the window spanning every
// state, so the two share one column recursion by construction.
struct ViterbiRun {
    static ViterbiResult run(const Score& score,
                             const std::vector<std::map<int, double>>& frames,
                             const DecoderConfig& config) {
        const int K = (int)score.states.size();
        DecoderConfig cfg = config;
        cfg.window_length = std::max(K, 1);
        cfg.window_threshold = std::max(K, 1); // never slides
        Decoder dec(score, cfg);
        dec.keep_backpointers_ = true;
        for (const auto& frame : frames) dec.step(frame);

        ViterbiResult out;
        out.trace = dec.trace();
        out.online_estimates.reserve(out.trace.size());
        for (const TraceEntry& e : out.trace) out.online_estimates.push_back(e.state);
        out.final_scores.reserve(K);
        for (const Decoder::Cell& c : dec.col_) out.final_scores.push_back(c.score);

        const int N = (int)frames.size();
        out.path.assign(N, 0);
        if (N == 0) return out;
        int k = 1;
        for (int i = 1; i < K; ++i)
            if (out.final_scores[i] >= out.final_scores[k - 1]) k = i + 1;
        for (int n = N - 1; n >= 0; --n) {
            out.path[n] = k;
            k = dec.backpointers_[n][k - 1];
        }
        return out;
    }
};

ViterbiResult full_viterbi(const Score& score,
                           const std::vector<std::map<int, double>>& frames,
                           const DecoderConfig& config) {
    return ViterbiRun::run(score, frames, config);
}

std::string write_trace(const std::vector<TraceEntry>& trace) {
    std::string out;
    char buf[80];
    for (const TraceEntry& e : trace) {
        std::snprintf(buf, sizeof buf, "%d\t%d\t%.6f\n", e.frame, e.state, e.log_prob);
        out += buf;
    }
    return out;
}

std::vector<TraceEntry> read_trace(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<TraceEntry> out;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        TraceEntry e;
        char extra;
        if (std::sscanf(line.c_str(), "%d\t%d\t%lf %c", &e.frame, &e.state,
                        &e.log_prob, &extra) != 3)
            throw io_error("trace line " + std::to_string(lineno) +
                           ": expected frame, state, log probability");
        out.push_back(e);
    }
    return out;
}

} // namespace attacca
