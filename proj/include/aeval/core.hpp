#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aeval/annotations.hpp"
#include "aeval/errors.hpp"
#include "aeval/random.hpp"

namespace aeval {

// Binary target for one training snippet: at most one positive entry,
// placed at the accident's future offset A (1-based, in horizon steps).
struct LabelVector {
    std::vector<std::uint8_t> values;   // y_1..y_T
    std::optional<int> accident_offset; // A, set iff values has a positive

    bool operator==(const LabelVector&) const = default;
};

// Per-video predictions: current-frame index -> scores a_1..a_T, where a_i
// is the confidence that the accident occurs exactly i steps ahead. With
// horizon length 1 this degenerates to a per-frame risk score.
struct ScoreMatrix {
    std::string video_id;
    std::map<int, std::vector<double>> rows;

    bool operator==(const ScoreMatrix&) const = default;
};

// S consecutive observed frames; end_frame is the current frame t0.
struct SnippetWindow {
    int start_frame = 0;
    int end_frame = 0;

    bool operator==(const SnippetWindow&) const = default;
};

inline void validate_scores(const ScoreMatrix& m, const VideoAnnotation& a,
                            const HorizonConfig& h) {
    auto fail = [&](const std::string& rule) {
        throw ValidationError("scores for video '" + m.video_id + "': " + rule);
    };
    if (m.video_id != a.video_id) fail("video_id does not match annotation");
    for (const auto& [frame, row] : m.rows) {
        if (frame < 0 || frame >= a.num_frames)
            fail("frame " + std::to_string(frame) + " outside [0, num_frames)");
        if (static_cast<int>(row.size()) != h.horizon_steps)
            fail("row at frame " + std::to_string(frame) + " has length " +
                 std::to_string(row.size()) + ", expected " + std::to_string(h.horizon_steps));
        for (double s : row)
            if (!(s >= 0.0 && s <= 1.0))
                fail("score out of [0, 1] at frame " + std::to_string(frame));
    }
}

// Label for a snippet ending at t0: A = accident_frame - t0; the A-th unit
// vector when 1 <= A <= T, all-zero otherwise (A = 0, beyond-horizon, and
// accident-free videos all map to all-zero).
inline LabelVector make_label_vector(int t0, const VideoAnnotation& a, const HorizonConfig& h) {
    if (t0 < 0 || t0 >= a.num_frames)
        throw std::invalid_argument("make_label_vector: t0 out of video range");
    if (a.has_accident() && t0 > *a.accident_frame)
        throw std::invalid_argument("make_label_vector: t0 after the accident frame");
    LabelVector label;
    label.values.assign(static_cast<std::size_t>(h.horizon_steps), 0);
    if (a.has_accident()) {
        const int offset = *a.accident_frame - t0;
        if (offset >= 1 && offset <= h.horizon_steps) {
            label.values[static_cast<std::size_t>(offset - 1)] = 1;
            label.accident_offset = offset;
        }
    }
    return label;
}

// Training windows: drawn uniformly with replacement from all snippets that
// end at or before the accident. Deterministic for a fixed seed.
inline std::vector<SnippetWindow> sample_training_snippets(const VideoAnnotation& a,
                                                           const HorizonConfig& h, int count,
                                                           std::uint64_t seed) {
    if (!a.has_accident())
        throw std::invalid_argument("sample_training_snippets: video '" + a.video_id +
                                    "' has no accident");
    if (count < 0) throw std::invalid_argument("sample_training_snippets: negative count");
    const int first_end = h.snippet_len - 1;
    const int last_end = *a.accident_frame;
    if (last_end < first_end)
        throw ValidationError("video '" + a.video_id + "': too short for any training snippet");
    rng::Engine engine(seed);
    std::vector<SnippetWindow> windows;
    windows.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int end = static_cast<int>(engine.uniform_int(first_end, last_end));
        windows.push_back({end - h.snippet_len + 1, end});
    }
    return windows;
}

// Test-time windows: slide across the whole video, covering frames before,
// during, and after the accident.
inline std::vector<SnippetWindow> sliding_windows(const VideoAnnotation& a,
                                                  const HorizonConfig& h, int stride) {
    if (stride < 1) throw std::invalid_argument("sliding_windows: stride must be >= 1");
    if (a.num_frames < h.snippet_len)
        throw ValidationError("video '" + a.video_id + "': shorter than one snippet");
    std::vector<SnippetWindow> windows;
    for (int end = h.snippet_len - 1; end < a.num_frames; end += stride)
        windows.push_back({end - h.snippet_len + 1, end});
    return windows;
}

// Weighted binary cross-entropy over one score vector. Scores are clamped
// to [eps, 1-eps] before the logs; the all-zero label reduces to the
// negative-only term.
inline double weighted_bce_loss(std::span<const double> scores, const LabelVector& labels,
                                double w_plus) {
    constexpr double kEps = 1e-7;
    if (scores.size() != labels.values.size())
        throw std::invalid_argument("weighted_bce_loss: score/label length mismatch");
    if (!(w_plus > 0.0)) throw std::invalid_argument("weighted_bce_loss: w_plus must be > 0");
    const auto horizon = scores.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < horizon; ++i) {
        const double s = std::clamp(scores[i], kEps, 1.0 - kEps);
        if (labels.accident_offset &&
            i + 1 == static_cast<std::size_t>(*labels.accident_offset)) {
            sum += w_plus * std::log(s);
        } else {
            sum += std::log(1.0 - s);
        }
    }
    return -sum / static_cast<double>(horizon);
}

// Alert trigger: a frame alarms when any score in its vector reaches tau.
inline bool row_triggers(const std::vector<double>& row, double tau) {
    return std::ranges::any_of(row, [tau](double s) { return s >= tau; });
}

// Per-frame alarm state at threshold tau. Frames without a score row are
// non-alarming and carry no entry.
inline std::map<int, bool> frame_alarm_series(const ScoreMatrix& m, double tau) {
    std::map<int, bool> alarms;
    for (const auto& [frame, row] : m.rows) alarms[frame] = row_triggers(row, tau);
    return alarms;
}

// First alarming frame in [first, last], if any.
inline std::optional<int> first_alarm_in(const ScoreMatrix& m, int first, int last, double tau) {
    for (auto it = m.rows.lower_bound(first); it != m.rows.end() && it->first <= last; ++it)
        if (row_triggers(it->second, tau)) return it->first;
    return std::nullopt;
}

} // namespace aeval
