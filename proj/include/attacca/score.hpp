#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace attacca {

// One position in the piece: the set of notes struck together plus the
// notated time until the next position begins.
struct ScoreState {
    int index = 0;                    // 1-based position in the piece
    std::vector<int> notes;           // sorted, deduplicated MIDI numbers
    std::vector<double> fundamentals; // Hz, parallel to notes
    double time_to_next = 0.0;        // seconds; final state holds its duration

    bool operator==(const ScoreState&) const = default;
};

struct Score {
    std::vector<ScoreState> states;

    bool operator==(const Score&) const = default;
};

// Equal-tempered fundamental of a MIDI note number: 440 * 2^((n - 69) / 12).
double midi_to_freq(int note);

// Builds a Score from (notes, time_to_next) pairs. Notes are deduplicated and
// sorted; indices are assigned 1..K. Throws std::invalid_argument on empty
// input, empty note lists, or nonpositive times.
Score make_score(const std::vector<std::pair<std::vector<int>, double>>& states);

// Parses a standard MIDI file (format 0 or 1). Note-on events with positive
// velocity are onsets; onsets within 10 ms of a group's first onset form one
// state. Tempo meta events from all tracks build one global tempo map
// (120 BPM before the first). Note-offs and pedal events do not create
// states; the final state's time_to_next is its longest sounding duration.
// Malformed input throws io_error naming the byte offset. A file with no
// onsets throws std::invalid_argument.
Score parse_midi(const std::string& path);
Score parse_midi_bytes(std::span<const std::uint8_t> data);

// Ring-out approximation: state k additionally carries the notes of the
// `depth` preceding states (union over original note sets). depth 0 copies.
Score apply_sustain(const Score& score, int depth);

// Plain-text dump, one line per state: index, comma-separated notes, and
// time_to_next, tab-separated. Doubles print with full round-trip precision.
std::string dump_score(const Score& score);
Score load_score_dump(const std::string& text);

} // namespace attacca
