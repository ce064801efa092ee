#include "attacca/score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "attacca/errors.hpp"

namespace attacca {

namespace {

constexpr double kSimultaneityToleranceSec = 0.010;
constexpr double kDefaultUsPerQuarter = 500000.0; // 120 BPM

std::vector<double> fundamentals_for(const std::vector<int>& notes) {
    std::vector<double> f;
    f.reserve(notes.size());
    for (int n : notes) f.push_back(midi_to_freq(n));
    return f;
}

std::vector<int> canonical_notes(std::vector<int> notes) {
    std::sort(notes.begin(), notes.end());
    notes.erase(std::unique(notes.begin(), notes.end()), notes.end());
    return notes;
}

// ── MIDI byte stream ───────────────────────────────────────────────────

struct Cursor {
    std::span<const std::uint8_t> data;
    size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw io_error("malformed MIDI at byte " + std::to_string(pos) + ": " + what);
    }
    std::uint8_t u8() {
        if (pos >= data.size()) fail("unexpected end of file");
        return data[pos++];
    }
    std::uint32_t u16() {
        const std::uint32_t hi = u8();
        return (hi << 8) | u8();
    }
    std::uint32_t u32() {
        const std::uint32_t hi = u16();
        return (hi << 16) | u16();
    }
    std::uint32_t varint() {
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            const std::uint8_t b = u8();
            value = (value << 7) | (b & 0x7f);
            if (!(b & 0x80)) return value;
        }
        fail("variable-length quantity longer than 4 bytes");
    }
    void skip(size_t n) {
        if (pos + n > data.size()) fail("unexpected end of file");
        pos += n;
    }
};

struct NoteEvent {
    std::int64_t tick;
    int order; // file position, breaks ties deterministically
    int channel;
    int note;
    bool on;
};

struct TempoEvent {
    std::int64_t tick;
    int order;
    double us_per_quarter;
};

// Piecewise-linear tick clock over the merged tempo events of all tracks.
class TempoMap {
  public:
    TempoMap(std::vector<TempoEvent> events, int division) : division_(division) {
        std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
            return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
        });
        double sec = 0.0;
        std::int64_t tick = 0;
        double usq = kDefaultUsPerQuarter;
        for (const TempoEvent& e : events) {
            sec += (double)(e.tick - tick) * usq / (division_ * 1e6);
            tick = e.tick;
            usq = e.us_per_quarter; // last event at a tick wins
            segments_.push_back({tick, sec, usq});
        }
    }
    double seconds(std::int64_t tick) const {
        std::int64_t seg_tick = 0;
        double seg_sec = 0.0;
        double usq = kDefaultUsPerQuarter;
        for (const auto& s : segments_) {
            if (s.tick > tick) break;
            seg_tick = s.tick;
            seg_sec = s.sec;
            usq = s.usq;
        }
        return seg_sec + (double)(tick - seg_tick) * usq / (division_ * 1e6);
    }

  private:
    struct Segment {
        std::int64_t tick;
        double sec;
        double usq;
    };
    int division_;
    std::vector<Segment> segments_;
};

struct Onset {
    double sec;
    int note;
    double off_sec; // matched release or end of track
};

} // namespace

double midi_to_freq(int note) {
    if (note < 0 || note > 127)
        throw std::invalid_argument("midi_to_freq: note out of range");
    return 440.0 * std::pow(2.0, (note - 69) / 12.0);
}

Score make_score(const std::vector<std::pair<std::vector<int>, double>>& states) {
    if (states.empty())
        throw std::invalid_argument("make_score: no states");
    Score score;
    int index = 1;
    for (const auto& [notes, time_to_next] : states) {
        if (notes.empty())
            throw std::invalid_argument("make_score: state with no notes");
        for (int n : notes)
            if (n < 0 || n > 127)
                throw std::invalid_argument("make_score: note out of range");
        if (!(time_to_next > 0.0))
            throw std::invalid_argument("make_score: time_to_next must be positive");
        ScoreState s;
        s.index = index++;
        s.notes = canonical_notes(notes);
        s.fundamentals = fundamentals_for(s.notes);
        s.time_to_next = time_to_next;
        score.states.push_back(std::move(s));
    }
    return score;
}

Score parse_midi_bytes(std::span<const std::uint8_t> data) {
    Cursor c{data};
    if (c.u32() != 0x4d546864) c.fail("missing MThd header"); // "MThd"
    const std::uint32_t header_len = c.u32();
    if (header_len < 6) c.fail("header too short");
    const std::uint32_t format = c.u16();
    if (format > 1) c.fail("unsupported format " + std::to_string(format));
    const std::uint32_t ntrks = c.u16();
    const std::uint32_t division = c.u16();
    if (division & 0x8000) c.fail("SMPTE division not supported");
    if (division == 0) c.fail("zero division");
    c.skip(header_len - 6);

    std::vector<NoteEvent> notes;
    std::vector<TempoEvent> tempos;
    std::int64_t max_tick = 0;
    int order = 0;

    for (std::uint32_t trk = 0; trk < ntrks; ++trk) {
        if (c.u32() != 0x4d54726b) c.fail("missing MTrk header");
        const std::uint32_t track_len = c.u32();
        const size_t track_end = c.pos + track_len;
        if (track_end > data.size()) c.fail("track length past end of file");
        std::int64_t tick = 0;
        std::uint8_t running = 0;
        while (c.pos < track_end) {
            tick += c.varint();
            if (c.pos >= data.size()) c.fail("unexpected end of file");
            std::uint8_t status = data[c.pos];
            if (status & 0x80) {
                c.skip(1);
                running = status < 0xf0 ? status : 0;
            } else {
                if (running == 0) c.fail("data byte without running status");
                status = running;
            }
            if (status == 0xff) {
                const std::uint8_t type = c.u8();
                const std::uint32_t len = c.varint();
                if (type == 0x51) {
                    if (len != 3) c.fail("bad tempo event length");
                    const double usq = (double)((c.u8() << 16) | (c.u8() << 8) | c.u8());
                    tempos.push_back({tick, order++, usq});
                } else {
                    c.skip(len);
                }
            } else if (status == 0xf0 || status == 0xf7) {
                c.skip(c.varint());
            } else if (status >= 0xf0) {
                c.fail("unexpected system byte in file");
            } else {
                const int kind = status >> 4;
                const int channel = status & 0x0f;
                const std::uint8_t d1 = c.u8();
                if (d1 & 0x80) c.fail("bad data byte");
                if (kind == 0xc || kind == 0xd) continue; // one data byte
                const std::uint8_t d2 = c.u8();
                if (d2 & 0x80) c.fail("bad data byte");
                if (kind == 0x9)
                    notes.push_back({tick, order++, channel, d1, d2 > 0});
                else if (kind == 0x8)
                    notes.push_back({tick, order++, channel, d1, false});
                // control changes (pedal included) and other voice messages
                // never create or close states
            }
        }
        if (c.pos != track_end) c.fail("event ran past declared track length");
        max_tick = std::max(max_tick, tick);
    }

    const TempoMap clock(std::move(tempos), (int)division);
    const double end_sec = clock.seconds(max_tick);

    // FIFO matching per channel+note pairs releases with their strikes.
    std::sort(notes.begin(), notes.end(), [](const auto& a, const auto& b) {
        return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
    });
    std::vector<Onset> onsets;
    std::map<int, std::vector<size_t>> open; // channel<<8|note -> onset indices
    for (const NoteEvent& e : notes) {
        const int key = (e.channel << 8) | e.note;
        if (e.on) {
            onsets.push_back({clock.seconds(e.tick), e.note, end_sec});
            open[key].push_back(onsets.size() - 1);
        } else if (auto& stack = open[key]; !stack.empty()) {
            onsets[stack.front()].off_sec = clock.seconds(e.tick);
            stack.erase(stack.begin());
        }
    }
    if (onsets.empty())
        throw std::invalid_argument("MIDI file contains no note onsets");

    std::stable_sort(onsets.begin(), onsets.end(), [](const auto& a, const auto& b) {
        return a.sec != b.sec ? a.sec < b.sec : a.note < b.note;
    });
    Score score;
    size_t i = 0;
    std::vector<double> group_start;
    while (i < onsets.size()) {
        const double start = onsets[i].sec;
        ScoreState s;
        s.index = (int)score.states.size() + 1;
        double longest = 0.0;
        while (i < onsets.size() &&
               onsets[i].sec - start <= kSimultaneityToleranceSec + 1e-12) {
            s.notes.push_back(onsets[i].note);
            longest = std::max(longest, onsets[i].off_sec - start);
            ++i;
        }
        s.notes = canonical_notes(std::move(s.notes));
        s.fundamentals = fundamentals_for(s.notes);
        s.time_to_next = longest; // overwritten below except for the final state
        group_start.push_back(start);
        score.states.push_back(std::move(s));
    }
    for (size_t k = 0; k + 1 < score.states.size(); ++k)
        score.states[k].time_to_next = group_start[k + 1] - group_start[k];
    if (!(score.states.back().time_to_next > 0.0))
        score.states.back().time_to_next = 0.5; // no release found, assume a beat
    return score;
}

Score parse_midi(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open MIDI file: " + path);
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return parse_midi_bytes(data);
}

Score apply_sustain(const Score& score, int depth) {
    if (depth < 0)
        throw std::invalid_argument("apply_sustain: depth must be >= 0");
    Score out;
    out.states.reserve(score.states.size());
    for (size_t k = 0; k < score.states.size(); ++k) {
        ScoreState s = score.states[k];
        for (size_t back = 1; back <= (size_t)depth && back <= k; ++back)
            for (int n : score.states[k - back].notes)
                s.notes.push_back(n);
        s.notes = canonical_notes(std::move(s.notes));
        s.fundamentals = fundamentals_for(s.notes);
        out.states.push_back(std::move(s));
    }
    return out;
}

std::string dump_score(const Score& score) {
    std::ostringstream out;
    char buf[32];
    for (const ScoreState& s : score.states) {
        out << s.index << '\t';
        for (size_t i = 0; i < s.notes.size(); ++i) {
            if (i) out << ',';
            out << s.notes[i];
        }
        std::snprintf(buf, sizeof buf, "%.17g", s.time_to_next);
        out << '\t' << buf << '\n';
    }
    return out.str();
}

Score load_score_dump(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Score score;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string index_s, notes_s, ttn_s;
        if (!std::getline(fields, index_s, '\t') ||
            !std::getline(fields, notes_s, '\t') || !std::getline(fields, ttn_s))
            throw io_error("score dump line " + std::to_string(lineno) +
                           ": expected three tab-separated fields");
        try {
            ScoreState s;
            s.index = std::stoi(index_s);
            std::istringstream notes(notes_s);
            std::string note;
            while (std::getline(notes, note, ','))
                s.notes.push_back(std::stoi(note));
            s.time_to_next = std::stod(ttn_s);
            if (s.index != (int)score.states.size() + 1)
                throw io_error("score dump line " + std::to_string(lineno) +
                               ": indices must run 1..K");
            s.notes = canonical_notes(std::move(s.notes));
            s.fundamentals = fundamentals_for(s.notes);
            score.states.push_back(std::move(s));
        } catch (const std::invalid_argument&) {
            throw io_error("score dump line " + std::to_string(lineno) +
                           ": unparseable field");
        } catch (const std::out_of_range&) {
            throw io_error("score dump line " + std::to_string(lineno) +
                           ": value out of range");
        }
    }
    if (score.states.empty())
        throw io_error("score dump: no states");
    return score;
}

} // namespace attacca
