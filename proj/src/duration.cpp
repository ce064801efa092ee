#include "attacca/duration.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace attacca {

TransitionProbs transition_probs(double expected_frames, int run_length) {
    if (!(expected_frames > 0.0))
        throw std::invalid_argument("transition_probs: expected_frames must be positive");
    if (run_length < 0)
        throw std::invalid_argument("transition_probs: run_length must be >= 0");
    const double self =
        std::pow(expected_frames / (1.0 + expected_frames), run_length + 1);
    return {self, 1.0 - self};
}

TransitionProbs fixed_transition_probs(double self_prob) {
    if (!(self_prob > 0.0) || !(self_prob < 1.0))
        throw std::invalid_argument("fixed_transition_probs: self_prob must be in (0, 1)");
    return {self_prob, 1.0 - self_prob};
}

double expected_frames_static(double time_to_next, double frame_rate) {
    if (!(time_to_next > 0.0))
        throw std::invalid_argument("expected_frames_static: time_to_next must be positive");
    if (!(frame_rate > 0.0))
        throw std::invalid_argument("expected_frames_static: frame_rate must be positive");
    return time_to_next * frame_rate;
}

TempoTracker::TempoTracker(int window, double frame_rate)
    : window_(window), frame_rate_(frame_rate) {
    if (window < 0)
        throw std::invalid_argument("TempoTracker: window must be >= 0");
    if (!(frame_rate > 0.0))
        throw std::invalid_argument("TempoTracker: frame_rate must be positive");
}

void TempoTracker::record(double frames_spent, double time_to_next) {
    if (!(frames_spent >= 0.0))
        throw std::invalid_argument("TempoTracker::record: frames_spent must be >= 0");
    if (!(time_to_next > 0.0))
        throw std::invalid_argument("TempoTracker::record: time_to_next must be positive");
    if (window_ == 0) return;
    rates_.push_back(frames_spent / time_to_next);
    while ((int)rates_.size() > window_) rates_.pop_front();
}

double TempoTracker::conversion_rate() const {
    if (rates_.empty()) return frame_rate_;
    return std::accumulate(rates_.begin(), rates_.end(), 0.0) / (double)rates_.size();
}

double TempoTracker::expected_frames(double time_to_next) const {
    if (!(time_to_next > 0.0))
        throw std::invalid_argument("TempoTracker::expected_frames: time_to_next must be positive");
    return conversion_rate() * time_to_next;
}

} // namespace attacca
