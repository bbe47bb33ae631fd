#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "aeval/annotations.hpp"
#include "aeval/core.hpp"
#include "aeval/errors.hpp"
#include "aeval/metrics.hpp"
#include "aeval/random.hpp"

namespace aeval {

struct ScenarioConfig {
    int n_accident_videos = 10;
    int n_safe_videos = 10;
    double fps = 10.0;
    int video_len_min = 100; // frames, inclusive range
    int video_len_max = 200;
    double interval_min_seconds = 0.5; // accident minus anomaly, inclusive range
    double interval_max_seconds = 3.0;
    int accident_margin_frames = 30; // accident happens no earlier than this frame
    int horizon_steps = 20;
    int snippet_len = 5;
    std::uint64_t seed = 0;
};

enum class PredictorKind { Oracle, Constant, Random, EarlyFalseAlarm, NoisyDecay };

struct PredictorSpec {
    PredictorKind kind = PredictorKind::Oracle;
    double constant_value = 0.5;  // constant
    double lead_seconds = 2.0;    // early_false_alarm, noisy_decay
    int spike_len = 5;            // early_false_alarm, frames
    double noise_sigma = 0.1;     // noisy_decay
    std::uint64_t seed = 0;
};

inline const char* to_string(PredictorKind kind) {
    switch (kind) {
    case PredictorKind::Oracle: return "oracle";
    case PredictorKind::Constant: return "constant";
    case PredictorKind::Random: return "random";
    case PredictorKind::EarlyFalseAlarm: return "early_false_alarm";
    case PredictorKind::NoisyDecay: return "noisy_decay";
    }
    throw std::invalid_argument("to_string: bad PredictorKind");
}

inline PredictorKind predictor_kind_from_string(const std::string& name) {
    if (name == "oracle") return PredictorKind::Oracle;
    if (name == "constant") return PredictorKind::Constant;
    if (name == "random") return PredictorKind::Random;
    if (name == "early_false_alarm") return PredictorKind::EarlyFalseAlarm;
    if (name == "noisy_decay") return PredictorKind::NoisyDecay;
    throw std::invalid_argument("unknown predictor kind '" + name + "'");
}

inline void validate_scenario(const ScenarioConfig& cfg) {
    if (cfg.n_accident_videos < 0 || cfg.n_safe_videos < 0)
        throw ValidationError("scenario: negative video count");
    if (!(cfg.fps > 0.0)) throw ValidationError("scenario: fps must be positive");
    if (cfg.video_len_min < 1 || cfg.video_len_min > cfg.video_len_max)
        throw ValidationError("scenario: empty video length range");
    if (cfg.interval_min_seconds < 0.0 || cfg.interval_min_seconds > cfg.interval_max_seconds)
        throw ValidationError("scenario: empty anomaly interval range");
    if (cfg.accident_margin_frames < 0) throw ValidationError("scenario: negative margin");
    if (cfg.horizon_steps < 1 || cfg.snippet_len < 1)
        throw ValidationError("scenario: horizon_steps and snippet_len must be >= 1");
    if (cfg.n_accident_videos > 0) {
        // The accident frame must fit even in the shortest video with the
        // longest interval and the full margin before it.
        const int interval_frames =
            static_cast<int>(std::lround(cfg.interval_max_seconds * cfg.fps));
        const int earliest = std::max(cfg.accident_margin_frames, interval_frames);
        if (earliest > cfg.video_len_min - 1)
            throw ValidationError(
                "scenario: infeasible ranges, anomaly interval or margin exceeds the "
                "shortest video");
    }
}

inline void validate_predictor(const PredictorSpec& spec) {
    switch (spec.kind) {
    case PredictorKind::Oracle:
    case PredictorKind::Random: return;
    case PredictorKind::Constant:
        if (spec.constant_value < 0.0 || spec.constant_value > 1.0)
            throw ValidationError("predictor: constant value outside [0, 1]");
        return;
    case PredictorKind::EarlyFalseAlarm:
        if (spec.lead_seconds < 0.0) throw ValidationError("predictor: negative lead");
        if (spec.spike_len < 1) throw ValidationError("predictor: spike_len must be >= 1");
        return;
    case PredictorKind::NoisyDecay:
        if (!(spec.lead_seconds > 0.0))
            throw ValidationError("predictor: lead must be positive");
        if (spec.noise_sigma < 0.0) throw ValidationError("predictor: negative noise sigma");
        return;
    }
    throw ValidationError("predictor: bad kind");
}

namespace detail {

inline std::string numbered_id(const char* prefix, int index) {
    std::string digits = std::to_string(index + 1);
    if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
    return std::string(prefix) + digits;
}

} // namespace detail

// Seeded scenario sampling. Every video draws from its own engine keyed by
// (seed, video_id), so the manifest is identical no matter how or in what
// order the videos are produced. Per-video draw order: video length, then
// anomaly interval, then accident frame.
inline DatasetManifest generate_dataset(const ScenarioConfig& cfg) {
    validate_scenario(cfg);

    DatasetManifest d;
    d.horizon.horizon_steps = cfg.horizon_steps;
    d.horizon.snippet_len = cfg.snippet_len;
    d.horizon.fps = cfg.fps;

    for (int k = 0; k < cfg.n_accident_videos; ++k) {
        VideoAnnotation v;
        v.video_id = detail::numbered_id("acc_", k);
        v.fps = cfg.fps;
        rng::Engine engine(rng::sub_seed(cfg.seed, v.video_id));
        v.num_frames = static_cast<int>(
            engine.uniform_int(cfg.video_len_min, cfg.video_len_max));
        const double interval_s =
            engine.uniform_real(cfg.interval_min_seconds, cfg.interval_max_seconds);
        const int interval_frames = static_cast<int>(std::lround(interval_s * cfg.fps));
        const int earliest = std::max(cfg.accident_margin_frames, interval_frames);
        const int accident =
            static_cast<int>(engine.uniform_int(earliest, v.num_frames - 1));
        v.accident_frame = accident;
        v.anomaly_frame = accident - interval_frames;
        v.accident_end_frame = std::min(
            v.num_frames - 1, accident + static_cast<int>(std::lround(0.5 * cfg.fps)));
        d.videos.push_back(std::move(v));
    }
    for (int k = 0; k < cfg.n_safe_videos; ++k) {
        VideoAnnotation v;
        v.video_id = detail::numbered_id("safe_", k);
        v.fps = cfg.fps;
        rng::Engine engine(rng::sub_seed(cfg.seed, v.video_id));
        v.num_frames = static_cast<int>(
            engine.uniform_int(cfg.video_len_min, cfg.video_len_max));
        d.videos.push_back(std::move(v));
    }

    validate_manifest(d);
    return d;
}

// Reference score matrices over the deployment-style window sweep: one row
// per snippet end frame. All kinds emit zero rows after the accident frame.
inline ScoreMatrix predict(const PredictorSpec& spec, const VideoAnnotation& a,
                           const HorizonConfig& h, int stride = 1) {
    validate_predictor(spec);
    validate_annotation(a);
    validate_horizon(h);
    if (stride < 1) throw std::invalid_argument("predict: stride must be >= 1");

    ScoreMatrix m;
    m.video_id = a.video_id;
    if (a.num_frames < h.snippet_len) return m; // too short for one snippet

    const int T = h.horizon_steps;
    const int accident = a.has_accident() ? *a.accident_frame : -1;

    // Saturated false-alarm burst: spike_len frames starting lead_seconds
    // before the anomaly, clamped to the video start.
    int spike_first = -1;
    int spike_last = -2;
    if (spec.kind == PredictorKind::EarlyFalseAlarm && a.has_accident()) {
        spike_first = std::max(
            0, *a.anomaly_frame - static_cast<int>(std::lround(spec.lead_seconds * a.fps)));
        spike_last = spike_first + spec.spike_len - 1;
    }

    rng::Engine engine(rng::sub_seed(spec.seed, a.video_id));
    for (int t0 = h.snippet_len - 1; t0 < a.num_frames; t0 += stride) {
        std::vector<double> row(static_cast<std::size_t>(T), 0.0);
        const bool after_accident = a.has_accident() && t0 > accident;
        if (!after_accident) {
            switch (spec.kind) {
            case PredictorKind::Oracle:
                if (a.has_accident()) {
                    const int i = accident - t0;
                    if (i >= 1 && i <= T) row[static_cast<std::size_t>(i - 1)] = 1.0;
                }
                break;
            case PredictorKind::Constant:
                std::ranges::fill(row, spec.constant_value);
                break;
            case PredictorKind::Random:
                for (double& s : row) s = engine.uniform01();
                break;
            case PredictorKind::EarlyFalseAlarm:
                if (a.has_accident()) {
                    const int i = accident - t0;
                    if (i >= 1 && i <= T) row[static_cast<std::size_t>(i - 1)] = 1.0;
                }
                if (t0 >= spike_first && t0 <= spike_last) std::ranges::fill(row, 1.0);
                break;
            case PredictorKind::NoisyDecay:
                for (int i = 1; i <= T; ++i) {
                    double base = 0.0;
                    if (a.has_accident())
                        base = std::max(0.0, 1.0 - static_cast<double>(accident - t0 - i) /
                                                      (spec.lead_seconds * a.fps));
                    const double s = base + engine.gaussian(0.0, spec.noise_sigma);
                    row[static_cast<std::size_t>(i - 1)] = std::clamp(s, 0.0, 1.0);
                }
                break;
            }
        }
        m.rows.emplace(t0, std::move(row));
    }
    return m;
}

inline ScoreSet predict_all(const PredictorSpec& spec, const DatasetManifest& d,
                            int stride = 1) {
    ScoreSet scores;
    for (const VideoAnnotation& v : d.videos)
        scores.emplace(v.video_id, predict(spec, v, d.horizon, stride));
    return scores;
}

inline double mean_anomaly_interval(const DatasetManifest& d) {
    double sum = 0.0;
    int count = 0;
    for (const VideoAnnotation& v : d.videos) {
        if (!v.has_accident()) continue;
        sum += anomaly_interval_seconds(v);
        ++count;
    }
    if (count == 0) throw EvalError("mean_anomaly_interval: dataset has no accident videos");
    return sum / static_cast<double>(count);
}

} // namespace aeval
