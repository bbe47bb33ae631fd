#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <aeval/aeval.hpp>

namespace testutil {

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline aeval::VideoAnnotation video(std::string id, int num_frames,
                                    std::optional<int> anomaly = std::nullopt,
                                    std::optional<int> accident = std::nullopt,
                                    std::optional<int> end = std::nullopt,
                                    double fps = 10.0) {
    aeval::VideoAnnotation v;
    v.video_id = std::move(id);
    v.fps = fps;
    v.num_frames = num_frames;
    v.anomaly_frame = anomaly;
    v.accident_frame = accident;
    v.accident_end_frame = end;
    return v;
}

inline aeval::DatasetManifest manifest(std::vector<aeval::VideoAnnotation> videos,
                                       int horizon_steps = 20, int snippet_len = 5,
                                       double fps = 10.0) {
    aeval::DatasetManifest d;
    d.horizon.horizon_steps = horizon_steps;
    d.horizon.snippet_len = snippet_len;
    d.horizon.fps = fps;
    d.videos = std::move(videos);
    return d;
}

// Random but always-valid manifest for round-trip and invariance properties.
inline aeval::DatasetManifest random_manifest(std::uint64_t seed) {
    aeval::rng::Engine engine(seed);
    aeval::DatasetManifest d;
    d.horizon.horizon_steps = static_cast<int>(engine.uniform_int(1, 30));
    d.horizon.snippet_len = static_cast<int>(engine.uniform_int(1, 8));
    d.horizon.fps = static_cast<double>(engine.uniform_int(1, 30));
    const int n = static_cast<int>(engine.uniform_int(1, 12));
    for (int k = 0; k < n; ++k) {
        const int frames = static_cast<int>(engine.uniform_int(1, 300));
        aeval::VideoAnnotation v =
            video("vid_" + std::to_string(k), frames, std::nullopt, std::nullopt, std::nullopt,
                  d.horizon.fps);
        if (engine.bounded(2) == 1) {
            const int accident = static_cast<int>(engine.uniform_int(0, frames - 1));
            const int anomaly = static_cast<int>(engine.uniform_int(0, accident));
            v.anomaly_frame = anomaly;
            v.accident_frame = accident;
            if (engine.bounded(2) == 1)
                v.accident_end_frame =
                    static_cast<int>(engine.uniform_int(accident, frames - 1));
        }
        d.videos.push_back(std::move(v));
    }
    return d;
}

// Score matrix literal: {frame, scores...} rows.
inline aeval::ScoreMatrix scores(std::string video_id,
                                 std::vector<std::pair<int, std::vector<double>>> rows) {
    aeval::ScoreMatrix m;
    m.video_id = std::move(video_id);
    for (auto& [frame, row] : rows) m.rows.emplace(frame, std::move(row));
    return m;
}

} // namespace testutil
