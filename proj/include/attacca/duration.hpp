#pragma once

#include <deque>

namespace attacca {

struct TransitionProbs {
    double self_prob;
    double advance_prob;
};

// Probability of staying in a state that has already lasted `run_length`
// frames, given it is expected to last `expected_frames` in total:
// self = (E[Z] / (1 + E[Z]))^(run_length + 1). Longer runs make leaving
// more likely. Throws std::invalid_argument unless expected_frames > 0 and
// run_length >= 0.
TransitionProbs transition_probs(double expected_frames, int run_length);

// Duration-blind variant: the same self probability at every run length.
// self_prob must lie strictly inside (0, 1).
TransitionProbs fixed_transition_probs(double self_prob);

// Frames a state should occupy when the performer plays at notated tempo.
double expected_frames_static(double time_to_next, double frame_rate);

// Moving-average tempo estimator. Records how many frames each completed
// state actually took versus its notated length, and converts notated
// lengths to expected frame counts at the observed rate. With no history
// (or window 0) it falls back to the notated frame rate.
class TempoTracker {
  public:
    // window: completed states to average over; 0 pins the notated tempo.
    // frame_rate: frames per second of the incoming audio slicing.
    TempoTracker(int window, double frame_rate);

    // One completed state: it lasted frames_spent frames and was notated
    // time_to_next seconds. Ignored when window is 0.
    void record(double frames_spent, double time_to_next);

    // Frames per notated second, averaged over the retained history.
    double conversion_rate() const;

    // conversion_rate() * time_to_next.
    double expected_frames(double time_to_next) const;

    int window() const { return window_; }
    int history_size() const { return (int)rates_.size(); }

  private:
    int window_;
    double frame_rate_;
    std::deque<double> rates_; // frames_spent / time_to_next per record
};

} // namespace attacca
