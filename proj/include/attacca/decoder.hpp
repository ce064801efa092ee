#pragma once

#include <map>
#include <string>
#include <vector>

#include "attacca/duration.hpp"
#include "attacca/score.hpp"

namespace attacca {

struct DecoderConfig {
    // States kept alive at once and how far the estimate may run ahead of
    // the window start before the window slides after it.
    int window_length = 6;
    int window_threshold = 4;

    // When true, the self-transition probability decays with the number of
    // frames already spent in the state; when false it is fallback_self_prob
    // at every frame.
    bool state_duration = true;
    double fallback_self_prob = 0.95;

    // Completed states averaged for tempo adaptation; 0 plays strictly at
    // the notated tempo.
    int tempo_window = 4;

    // Frames per second of the audio slicing (sample_rate / hop_length).
    double frame_rate = 44100.0 / 4000.0;

    void validate() const;
};

struct TraceEntry {
    // Frame number. The decoder's own trace counts steps from 1; pipeline
    // traces carry 0-based audio slot ordinals (gated slots leave gaps).
    int frame;
    int state;       // 1-based estimate after this frame
    double log_prob; // path score of that estimate

    bool operator==(const TraceEntry&) const = default;
};

// Online score follower. Each step consumes the per-state data log
// likelihoods for the states inside the current window and returns the new
// position estimate. The path score recursion adds, per frame, one
// transition (stay or advance, duration dependent) and one emission; the
// piece is assumed to start at state 1.
class Decoder {
  public:
    Decoder(const Score& score, const DecoderConfig& config);

    // frame_lmls must hold every state in [window_begin(), window_end()];
    // other keys are ignored. Returns the updated estimate.
    int step(const std::map<int, double>& frame_lmls);

    int window_begin() const { return win_lo_; }
    int window_end() const { return win_hi_; }
    int num_states() const { return (int)ttn_.size(); }
    int estimate() const { return estimate_; }
    double estimate_log_prob() const;
    int frame_count() const { return frame_count_; }
    const std::vector<TraceEntry>& trace() const { return trace_; }
    const TempoTracker& tempo() const { return tempo_; }

  private:
    friend struct ViterbiRun;
    struct Cell {
        double score;
        int run; // frames already spent in the state along the best path
    };

    TransitionProbs probs_for(int state, int run) const;
    void shift_window();

    DecoderConfig config_;
    std::vector<double> ttn_;
    TempoTracker tempo_;
    int win_lo_ = 1;
    int win_hi_ = 1;
    std::vector<Cell> col_; // col_[i] is state win_lo_ + i
    int estimate_ = 1;
    int est_frames_ = 0; // consecutive frames the estimate has persisted
    int frame_count_ = 0;
    std::vector<TraceEntry> trace_;

    bool keep_backpointers_ = false;
    std::vector<std::vector<int>> backpointers_; // per frame, state 1..K
};

struct ViterbiResult {
    std::vector<int> path;             // MAP state per frame, 1-based
    std::vector<int> online_estimates; // per-frame estimate, as the online
                                       // decoder with a full window yields
    std::vector<double> final_scores;  // last-column score per state 1..K
    std::vector<TraceEntry> trace;
};

// Offline decode over the whole trellis: the same column recursion with the
// window spanning every state, plus a traceback of the jointly best path.
// frames[n] must hold a log likelihood for every state.
ViterbiResult full_viterbi(const Score& score,
                           const std::vector<std::map<int, double>>& frames,
                           const DecoderConfig& config);

// One line per entry: frame, state, log probability (six decimals),
// tab-separated.
std::string write_trace(const std::vector<TraceEntry>& trace);
std::vector<TraceEntry> read_trace(const std::string& text);

} // namespace attacca
