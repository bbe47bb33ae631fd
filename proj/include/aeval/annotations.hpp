#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "aeval/errors.hpp"

namespace aeval {

// Temporal ground truth for one video. Frame indices are 0-based and
// inclusive; everything second-valued derives from frames via fps.
struct VideoAnnotation {
    std::string video_id;
    double fps = 0.0;
    int num_frames = 0;
    std::optional<int> anomaly_frame;      // earliest humanly-predictable precursor
    std::optional<int> accident_frame;     // collision frame
    std::optional<int> accident_end_frame;

    bool has_accident() const { return accident_frame.has_value(); }

    bool operator==(const VideoAnnotation&) const = default;
};

// Shared timing layout: score vectors cover horizon_steps future steps of
// one frame each, snippets observe snippet_len consecutive frames.
struct HorizonConfig {
    int horizon_steps = 20; // T
    int snippet_len = 5;    // S
    double fps = 10.0;

    // One horizon step spans exactly one frame, so step_seconds * fps == 1.
    double step_seconds() const { return 1.0 / fps; }

    bool operator==(const HorizonConfig&) const = default;
};

struct DatasetManifest {
    HorizonConfig horizon;
    std::vector<VideoAnnotation> videos;

    bool operator==(const DatasetManifest&) const = default;
};

inline void validate_annotation(const VideoAnnotation& a) {
    auto fail = [&](const std::string& rule) {
        throw ValidationError("video '" + a.video_id + "': " + rule);
    };
    if (a.video_id.empty()) throw ValidationError("video with empty id");
    if (!(a.fps > 0.0)) fail("fps must be > 0");
    if (a.num_frames < 1) fail("num_frames must be >= 1");
    if (a.accident_frame) {
        if (!a.anomaly_frame) fail("accident_frame present without anomaly_frame");
        if (*a.anomaly_frame < 0) fail("anomaly_frame < 0");
        if (*a.anomaly_frame > *a.accident_frame) fail("anomaly_frame > accident_frame");
        const int last_event =
            a.accident_end_frame ? *a.accident_end_frame : *a.accident_frame;
        if (a.accident_end_frame && *a.accident_frame > *a.accident_end_frame)
            fail("accident_frame > accident_end_frame");
        if (last_event >= a.num_frames) fail("event frame beyond num_frames");
    } else {
        if (a.anomaly_frame) fail("anomaly_frame present without accident_frame");
        if (a.accident_end_frame) fail("accident_end_frame present without accident_frame");
    }
}

inline void validate_horizon(const HorizonConfig& h) {
    if (h.horizon_steps < 1) throw ValidationError("horizon: T must be >= 1");
    if (h.snippet_len < 1) throw ValidationError("horizon: snippet_len must be >= 1");
    if (!(h.fps > 0.0)) throw ValidationError("horizon: fps must be > 0");
}

inline void validate_manifest(const DatasetManifest& m) {
    validate_horizon(m.horizon);
    std::set<std::string> seen;
    for (const auto& v : m.videos) {
        validate_annotation(v);
        if (v.fps != m.horizon.fps)
            throw ValidationError("video '" + v.video_id +
                                  "': fps differs from manifest fps (mixed fps rejected)");
        if (!seen.insert(v.video_id).second)
            throw ValidationError("duplicate video_id '" + v.video_id + "'");
    }
}

// Seconds between anomaly appearance and the accident.
inline double anomaly_interval_seconds(const VideoAnnotation& a) {
    if (!a.has_accident())
        throw std::invalid_argument("anomaly_interval_seconds: video '" + a.video_id +
                                    "' has no accident");
    return static_cast<double>(*a.accident_frame - *a.anomaly_frame) / a.fps;
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key()))
            throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
}

inline int require_int(const nlohmann::json& obj, const std::string& key,
                       const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ValidationError(where + ": key '" + key + "' must be an integer");
    return v.get<int>();
}

inline std::optional<int> optional_int(const nlohmann::json& obj, const std::string& key,
                                       const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + ": missing key '" + key + "'");
    const auto& v = obj.at(key);
    if (v.is_null()) return std::nullopt;
    if (!v.is_number_integer())
        throw ValidationError(where + ": key '" + key + "' must be an integer or null");
    return v.get<int>();
}

} // namespace detail

// Parse and validate a manifest document:
//   {"fps": number, "horizon": {"T": int, "snippet_len": int},
//    "videos": [{"id": str, "num_frames": int, "anomaly_frame": int|null,
//                "accident_frame": int|null, "accident_end_frame": int|null}]}
// Unknown keys are rejected at every level.
inline DatasetManifest parse_manifest(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("manifest: top level must be an object");
    detail::reject_unknown_keys(doc, {"fps", "horizon", "videos"}, "manifest");

    DatasetManifest m;
    if (!doc.contains("fps") || !doc.at("fps").is_number())
        throw ValidationError("manifest: missing or non-numeric 'fps'");
    m.horizon.fps = doc.at("fps").get<double>();

    if (!doc.contains("horizon") || !doc.at("horizon").is_object())
        throw ValidationError("manifest: missing 'horizon' object");
    const auto& h = doc.at("horizon");
    detail::reject_unknown_keys(h, {"T", "snippet_len"}, "horizon");
    m.horizon.horizon_steps = detail::require_int(h, "T", "horizon");
    m.horizon.snippet_len = detail::require_int(h, "snippet_len", "horizon");

    if (!doc.contains("videos") || !doc.at("videos").is_array())
        throw ValidationError("manifest: missing 'videos' array");
    for (const auto& vj : doc.at("videos")) {
        if (!vj.is_object()) throw ValidationError("videos: entries must be objects");
        detail::reject_unknown_keys(
            vj, {"id", "num_frames", "anomaly_frame", "accident_frame", "accident_end_frame"},
            "video entry");
        VideoAnnotation v;
        if (!vj.contains("id") || !vj.at("id").is_string())
            throw ValidationError("video entry: missing or non-string 'id'");
        v.video_id = vj.at("id").get<std::string>();
        const std::string where = "video '" + v.video_id + "'";
        v.fps = m.horizon.fps;
        v.num_frames = detail::require_int(vj, "num_frames", where);
        v.anomaly_frame = detail::optional_int(vj, "anomaly_frame", where);
        v.accident_frame = detail::optional_int(vj, "accident_frame", where);
        v.accident_end_frame = detail::optional_int(vj, "accident_end_frame", where);
        m.videos.push_back(std::move(v));
    }

    validate_manifest(m);
    return m;
}

// Inverse of parse_manifest; parse(serialize(m)) == m for valid manifests.
inline std::string serialize_manifest(const DatasetManifest& m) {
    validate_manifest(m);
    nlohmann::ordered_json doc;
    doc["fps"] = m.horizon.fps;
    doc["horizon"] = {{"T", m.horizon.horizon_steps}, {"snippet_len", m.horizon.snippet_len}};
    auto& videos = doc["videos"] = nlohmann::ordered_json::array();
    auto opt = [](const std::optional<int>& f) {
        return f ? nlohmann::ordered_json(*f) : nlohmann::ordered_json(nullptr);
    };
    for (const auto& v : m.videos) {
        videos.push_back({{"id", v.video_id},
                          {"num_frames", v.num_frames},
                          {"anomaly_frame", opt(v.anomaly_frame)},
                          {"accident_frame", opt(v.accident_frame)},
                          {"accident_end_frame", opt(v.accident_end_frame)}});
    }
    return doc.dump(2) + "\n";
}

} // namespace aeval
