#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aeval/annotations.hpp"
#include "aeval/core.hpp"
#include "aeval/errors.hpp"
#include "aeval/random.hpp"

namespace aeval {

using ScoreSet = std::map<std::string, ScoreMatrix>;

// ROC vertices sorted by descending threshold; FPR and TPR are
// non-decreasing along the sequence, anchored at (0,0) and ending at (1,1).
struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;
};

enum class TtaMode { Revised, Legacy };

struct SampleSet {
    std::vector<double> positives;
    std::vector<double> negatives;
};

struct MetricsReport {
    double lambda = 0.0;
    double auc = 0.0;      // anomaly->accident positives vs pre-anomaly/safe negatives
    double auc_0_5s = 0.0; // positives 0.5s-1.0s before the accident
    double auc_1_0s = 0.0; // positives 1.0s-1.5s before the accident
    double auc_1_5s = 0.0; // positives 1.5s-2.0s before the accident
    double mauc = 0.0;
    double operating_threshold = 0.0; // most sensitive threshold with FAR <= lambda
    double far_at_threshold = 0.0;
    double mtta_revised = 0.0;
    double mtta_legacy = 0.0;
    double false_alarms_per_minute = 0.0;
    std::size_t positive_count = 0;
    std::size_t negative_count = 0;

    bool operator==(const MetricsReport&) const = default;
};

namespace detail {

inline const ScoreMatrix& scores_for(const ScoreSet& scores, const std::string& video_id) {
    const auto it = scores.find(video_id);
    if (it == scores.end())
        throw EvalError("missing scores for video '" + video_id + "'");
    return it->second;
}

// Videos in deterministic video_id order, so reductions do not depend on
// manifest ordering.
inline std::vector<const VideoAnnotation*> sorted_videos(const DatasetManifest& d) {
    std::vector<const VideoAnnotation*> vs;
    vs.reserve(d.videos.size());
    for (const auto& v : d.videos) vs.push_back(&v);
    std::ranges::sort(vs, {}, [](const VideoAnnotation* v) { return v->video_id; });
    return vs;
}

inline double mean(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

} // namespace detail

// Scalar score of a clip: the highest score anywhere in the clip's rows,
// matching the trigger rule (a clip alarms iff its max reaches tau).
inline double segment_score(const ScoreMatrix& m, int first, int last) {
    if (first < 0 || first > last)
        throw std::invalid_argument("segment_score: invalid frame range");
    double best = 0.0;
    for (auto it = m.rows.lower_bound(first); it != m.rows.end() && it->first <= last; ++it)
        for (double s : it->second) best = std::max(best, s);
    return best;
}

// Fraction of negatives at or above tau (false alarm rate of the trigger).
inline double far_at(std::span<const double> negatives, double tau) {
    if (negatives.empty()) throw EvalError("far_at: no negative samples");
    const auto hits = std::ranges::count_if(negatives, [tau](double n) { return n >= tau; });
    return static_cast<double>(hits) / static_cast<double>(negatives.size());
}

// Main protocol samples: per accident video one positive (anomaly->accident
// segment) and one negative (everything before the anomaly, when non-empty);
// per accident-free video one negative spanning the whole video.
inline SampleSet main_samples(const DatasetManifest& d, const ScoreSet& scores) {
    SampleSet out;
    for (const VideoAnnotation* v : detail::sorted_videos(d)) {
        const ScoreMatrix& m = detail::scores_for(scores, v->video_id);
        if (v->has_accident()) {
            out.positives.push_back(segment_score(m, *v->anomaly_frame, *v->accident_frame));
            if (*v->anomaly_frame > 0)
                out.negatives.push_back(segment_score(m, 0, *v->anomaly_frame - 1));
        } else {
            out.negatives.push_back(segment_score(m, 0, v->num_frames - 1));
        }
    }
    return out;
}

// Threshold sweep over the descending unique sample values. Tied scores move
// together, producing a single vertex per unique value.
inline RocCurve build_roc(std::span<const double> positives, std::span<const double> negatives) {
    if (positives.empty() || negatives.empty())
        throw EvalError("build_roc: needs at least one positive and one negative sample");

    std::vector<double> thresholds;
    thresholds.reserve(positives.size() + negatives.size());
    thresholds.insert(thresholds.end(), positives.begin(), positives.end());
    thresholds.insert(thresholds.end(), negatives.begin(), negatives.end());
    std::ranges::sort(thresholds, std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    std::vector<double> pos_desc(positives.begin(), positives.end());
    std::vector<double> neg_desc(negatives.begin(), negatives.end());
    std::ranges::sort(pos_desc, std::greater<>());
    std::ranges::sort(neg_desc, std::greater<>());

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t pi = 0;
    std::size_t ni = 0;
    for (double tau : thresholds) {
        while (pi < pos_desc.size() && pos_desc[pi] >= tau) ++pi;
        while (ni < neg_desc.size() && neg_desc[ni] >= tau) ++ni;
        curve.points.push_back({tau, static_cast<double>(ni) / static_cast<double>(neg_desc.size()),
                                static_cast<double>(pi) / static_cast<double>(pos_desc.size())});
    }
    return curve;
}

// Average recall over the false-alarm range [0, lambda]:
// (1/lambda) * integral of the trapezoidal TPR(f) up to f = lambda, with the
// cut at lambda taken by linear interpolation between bracketing vertices.
// Normalization makes lambda = 1 coincide with conventional AUC.
inline double truncated_auc(const RocCurve& curve, double lambda) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("truncated_auc: lambda must be in (0, 1]");
    if (curve.points.size() < 2 || curve.points.front().fpr != 0.0)
        throw std::invalid_argument("truncated_auc: curve must start at FPR 0");
    if (curve.points.back().fpr < lambda)
        throw std::invalid_argument("truncated_auc: curve does not reach FPR lambda");

    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        if (b.fpr <= lambda) {
            area += 0.5 * (a.tpr + b.tpr) * (b.fpr - a.fpr);
        } else if (a.fpr < lambda) {
            const double t = a.tpr + (b.tpr - a.tpr) * (lambda - a.fpr) / (b.fpr - a.fpr);
            area += 0.5 * (a.tpr + t) * (lambda - a.fpr);
            break;
        } else {
            break;
        }
    }
    return area / lambda;
}

inline double mauc(double auc_0_5s, double auc_1_0s, double auc_1_5s) {
    return (auc_0_5s + auc_1_0s + auc_1_5s) / 3.0;
}

// Per-horizon samples: for each accident video the 0.5s-long clip ending
// h_offset seconds before the accident is one positive; negatives are
// equally many 0.5s clips drawn (seeded) from accident-free videos, falling
// back to pre-anomaly regions when the dataset has no accident-free videos.
inline SampleSet interval_samples(const DatasetManifest& d, const ScoreSet& scores,
                                  double h_offset_seconds, std::uint64_t seed) {
    if (h_offset_seconds < 0.0)
        throw std::invalid_argument("interval_samples: negative horizon offset");
    const double fps = d.horizon.fps;
    const int clip_len = static_cast<int>(std::lround(0.5 * fps));
    if (clip_len < 1) throw EvalError("interval_samples: fps too low for 0.5s clips");

    SampleSet out;
    const auto videos = detail::sorted_videos(d);
    for (const VideoAnnotation* v : videos) {
        if (!v->has_accident()) continue;
        const int lo = *v->accident_frame -
                       static_cast<int>(std::lround((h_offset_seconds + 0.5) * fps));
        const int hi =
            *v->accident_frame - static_cast<int>(std::lround(h_offset_seconds * fps)) - 1;
        if (lo < 0 || hi < lo) continue; // clip underflows the video start
        out.positives.push_back(segment_score(detail::scores_for(scores, v->video_id), lo, hi));
    }
    if (out.positives.empty()) throw EvalError("interval_samples: no valid positive clips");

    const bool have_safe =
        std::ranges::any_of(videos, [](const VideoAnnotation* v) { return !v->has_accident(); });
    struct Clip {
        const VideoAnnotation* video;
        int start;
    };
    std::vector<Clip> pool;
    for (const VideoAnnotation* v : videos) {
        if (have_safe) {
            if (v->has_accident()) continue;
            for (int s = 0; s + clip_len <= v->num_frames; ++s) pool.push_back({v, s});
        } else {
            // Fallback: clips entirely inside the pre-anomaly region.
            for (int s = 0; s + clip_len <= *v->anomaly_frame; ++s) pool.push_back({v, s});
        }
    }
    if (pool.empty()) throw EvalError("interval_samples: no negative clip source");

    const auto tag = "interval:" + std::to_string(std::lround(h_offset_seconds * 10.0));
    rng::Engine engine(rng::sub_seed(seed, tag));
    for (std::size_t i = 0; i < out.positives.size(); ++i) {
        const Clip& clip = pool[engine.bounded(pool.size())];
        out.negatives.push_back(segment_score(detail::scores_for(scores, clip.video->video_id),
                                              clip.start, clip.start + clip_len - 1));
    }
    return out;
}

// Most sensitive admissible operating point: the smallest candidate
// threshold whose false alarm rate stays within lambda. Candidates are the
// unique negative scores plus a sentinel just above the largest one, so a
// FAR of 0 is always attainable.
inline double operating_threshold(std::span<const double> negatives, double lambda) {
    if (negatives.empty()) throw EvalError("operating_threshold: no negative samples");
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("operating_threshold: lambda must be in (0, 1]");
    std::vector<double> candidates(negatives.begin(), negatives.end());
    std::ranges::sort(candidates);
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    candidates.push_back(
        std::nextafter(candidates.back(), std::numeric_limits<double>::infinity()));
    for (double tau : candidates)
        if (far_at(negatives, tau) <= lambda) return tau;
    return candidates.back(); // unreachable: the sentinel has FAR 0
}

// Seconds between the first qualifying alarm and the accident. Revised mode
// only counts alarms at or after the annotated anomaly; alarms before it are
// false alarms, not early warnings. Misses score 0.
inline double tta(const ScoreMatrix& m, const VideoAnnotation& a, double tau, TtaMode mode) {
    if (!a.has_accident())
        throw std::invalid_argument("tta: video '" + a.video_id + "' has no accident");
    const int first = mode == TtaMode::Revised ? *a.anomaly_frame : 0;
    const auto alarm = first_alarm_in(m, first, *a.accident_frame, tau);
    if (!alarm) return 0.0;
    return static_cast<double>(*a.accident_frame - *alarm) / a.fps;
}

// Mean TTA at the FAR-constrained operating threshold; misses contribute 0.
inline double mtta(const DatasetManifest& d, const ScoreSet& scores, double lambda,
                   TtaMode mode) {
    const SampleSet samples = main_samples(d, scores);
    const double tau = operating_threshold(samples.negatives, lambda);
    std::vector<double> ttas;
    for (const VideoAnnotation* v : detail::sorted_videos(d))
        if (v->has_accident())
            ttas.push_back(tta(detail::scores_for(scores, v->video_id), *v, tau, mode));
    if (ttas.empty()) throw EvalError("mtta: dataset has no accident videos");
    return detail::mean(ttas);
}

// Alarm events (maximal runs of consecutive alarming frames) inside negative
// footage, per minute of negative footage.
inline double false_alarms_per_minute(const DatasetManifest& d, const ScoreSet& scores,
                                      double tau) {
    double negative_seconds = 0.0;
    std::int64_t events = 0;
    for (const VideoAnnotation* v : detail::sorted_videos(d)) {
        int last = -1;
        if (v->has_accident()) {
            if (*v->anomaly_frame == 0) continue;
            last = *v->anomaly_frame - 1;
        } else {
            last = v->num_frames - 1;
        }
        negative_seconds += static_cast<double>(last + 1) / v->fps;
        const ScoreMatrix& m = detail::scores_for(scores, v->video_id);
        int prev_alarm_frame = -2;
        for (auto it = m.rows.begin(); it != m.rows.end() && it->first <= last; ++it) {
            if (!row_triggers(it->second, tau)) continue;
            if (it->first != prev_alarm_frame + 1) ++events;
            prev_alarm_frame = it->first;
        }
    }
    if (!(negative_seconds > 0.0))
        throw EvalError("false_alarms_per_minute: dataset has no negative footage");
    return static_cast<double>(events) / (negative_seconds / 60.0);
}

// Full protocol report at one FAR bound. Deterministic given the manifest,
// scores, lambda, and seed; invariant to video ordering in the manifest.
inline MetricsReport evaluate(const DatasetManifest& d, const ScoreSet& scores, double lambda,
                              std::uint64_t seed = 0) {
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("evaluate: lambda must be in (0, 1]");

    MetricsReport report;
    report.lambda = lambda;

    const SampleSet main = main_samples(d, scores);
    report.positive_count = main.positives.size();
    report.negative_count = main.negatives.size();
    report.auc = truncated_auc(build_roc(main.positives, main.negatives), lambda);

    const auto horizon_auc = [&](double h_offset) {
        const SampleSet s = interval_samples(d, scores, h_offset, seed);
        return truncated_auc(build_roc(s.positives, s.negatives), lambda);
    };
    report.auc_0_5s = horizon_auc(0.5);
    report.auc_1_0s = horizon_auc(1.0);
    report.auc_1_5s = horizon_auc(1.5);
    report.mauc = mauc(report.auc_0_5s, report.auc_1_0s, report.auc_1_5s);

    report.operating_threshold = operating_threshold(main.negatives, lambda);
    report.far_at_threshold = far_at(main.negatives, report.operating_threshold);

    std::vector<double> revised;
    std::vector<double> legacy;
    for (const VideoAnnotation* v : detail::sorted_videos(d)) {
        if (!v->has_accident()) continue;
        const ScoreMatrix& m = detail::scores_for(scores, v->video_id);
        revised.push_back(tta(m, *v, report.operating_threshold, TtaMode::Revised));
        legacy.push_back(tta(m, *v, report.operating_threshold, TtaMode::Legacy));
    }
    if (revised.empty()) throw EvalError("evaluate: dataset has no accident videos");
    report.mtta_revised = detail::mean(revised);
    report.mtta_legacy = detail::mean(legacy);

    report.false_alarms_per_minute =
        false_alarms_per_minute(d, scores, report.operating_threshold);
    return report;
}

} // namespace aeval
