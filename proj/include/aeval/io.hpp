#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "aeval/annotations.hpp"
#include "aeval/core.hpp"
#include "aeval/errors.hpp"
#include "aeval/metrics.hpp"

namespace aeval {

enum class TtaSelection { Revised, Legacy, Both };

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path.string() + "'");
    return std::move(buf).str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed on '" + path.string() + "'");
}

namespace detail {

// Shortest round-trip decimal form, so curve files carry full precision.
inline std::string dtoa(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

inline int parse_int_field(std::string_view token, const std::string& where) {
    int value = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ValidationError(where + ": bad integer '" + std::string(token) + "'");
    return value;
}

inline double parse_double_field(std::string_view token, const std::string& where) {
    double value = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
    if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
        throw ValidationError(where + ": bad number '" + std::string(token) + "'");
    return value;
}

inline std::string score_csv_header(int horizon_steps) {
    std::string header = "frame";
    for (int i = 1; i <= horizon_steps; ++i) header += ",a" + std::to_string(i);
    return header;
}

} // namespace detail

inline std::string format_score_csv(const ScoreMatrix& m, int horizon_steps) {
    std::string out = detail::score_csv_header(horizon_steps) + "\n";
    for (const auto& [frame, row] : m.rows) {
        out += std::to_string(frame);
        for (double s : row) {
            out += ',';
            out += detail::dtoa(s);
        }
        out += '\n';
    }
    return out;
}

// Strict score CSV reader: exact header for the manifest horizon, strictly
// ascending frames, absent frames permitted. `context` names the file in
// error messages.
inline ScoreMatrix parse_score_csv(const std::string& video_id, std::string_view text,
                                   int horizon_steps, const std::string& context) {
    ScoreMatrix m;
    m.video_id = video_id;

    std::vector<std::string_view> lines = detail::split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ValidationError(context + ": missing header");

    const std::string expected = detail::score_csv_header(horizon_steps);
    std::string_view header = lines.front();
    if (header.ends_with('\r')) header.remove_suffix(1);
    if (header != expected)
        throw ValidationError(context + ": header must be '" + expected + "'");

    int prev_frame = -1;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        std::string_view line = lines[k];
        if (line.ends_with('\r')) line.remove_suffix(1);
        const std::string where = context + ":" + std::to_string(k + 1);
        if (line.empty()) throw ValidationError(where + ": empty line");
        const auto tokens = detail::split(line, ',');
        if (tokens.size() != static_cast<std::size_t>(horizon_steps) + 1)
            throw ValidationError(where + ": expected " +
                                  std::to_string(horizon_steps + 1) + " columns, got " +
                                  std::to_string(tokens.size()));
        const int frame = detail::parse_int_field(tokens[0], where);
        if (frame <= prev_frame)
            throw ValidationError(where + ": frames must be strictly ascending");
        prev_frame = frame;
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(horizon_steps));
        for (std::size_t c = 1; c < tokens.size(); ++c)
            row.push_back(detail::parse_double_field(tokens[c], where));
        m.rows.emplace(frame, std::move(row));
    }
    return m;
}

// Loads and validates <video_id>.csv for every manifest video. A listed
// video without a score file is a validation failure, not an I/O one.
inline ScoreSet read_score_dir(const std::filesystem::path& dir, const DatasetManifest& d) {
    ScoreSet scores;
    for (const VideoAnnotation& v : d.videos) {
        const std::filesystem::path path = dir / (v.video_id + ".csv");
        std::error_code ec;
        if (!std::filesystem::exists(path, ec) || ec)
            throw ValidationError("missing score file '" + path.string() + "' for video '" +
                                  v.video_id + "'");
        ScoreMatrix m = parse_score_csv(v.video_id, read_text_file(path),
                                        d.horizon.horizon_steps, path.string());
        validate_scores(m, v, d.horizon);
        scores.emplace(v.video_id, std::move(m));
    }
    return scores;
}

inline DatasetManifest read_manifest_file(const std::filesystem::path& path) {
    try {
        return parse_manifest(read_text_file(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

inline void write_manifest_file(const std::filesystem::path& path, const DatasetManifest& d) {
    write_text_file(path, serialize_manifest(d));
}

// Six fixed decimals keep report files byte-stable across runs.
inline std::string format_report_json(const MetricsReport& r,
                                      TtaSelection tta = TtaSelection::Both) {
    std::string out = "{\n";
    const auto num = [&out](const char* key, double value, bool comma = true) {
        out += "  \"";
        out += key;
        out += "\": ";
        out += detail::fixed6(value);
        out += comma ? ",\n" : "\n";
    };
    num("lambda", r.lambda);
    num("auc", r.auc);
    num("auc_0_5s", r.auc_0_5s);
    num("auc_1_0s", r.auc_1_0s);
    num("auc_1_5s", r.auc_1_5s);
    num("mauc", r.mauc);
    num("operating_threshold", r.operating_threshold);
    num("far_at_threshold", r.far_at_threshold);
    if (tta != TtaSelection::Legacy) num("mtta_revised", r.mtta_revised);
    if (tta != TtaSelection::Revised) num("mtta_legacy", r.mtta_legacy);
    num("false_alarms_per_minute", r.false_alarms_per_minute);
    out += "  \"positive_count\": " + std::to_string(r.positive_count) + ",\n";
    out += "  \"negative_count\": " + std::to_string(r.negative_count) + "\n";
    out += "}\n";
    return out;
}

inline std::string format_roc_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        out += detail::dtoa(p.threshold);
        out += ',';
        out += detail::dtoa(p.fpr);
        out += ',';
        out += detail::dtoa(p.tpr);
        out += '\n';
    }
    return out;
}

// Collects outputs in memory and writes them together, removing anything
// already written if a write fails. Commands stage everything so an error
// leaves no partial output behind.
class OutputStager {
  public:
    void add(std::filesystem::path path, std::string content) {
        files_.emplace_back(std::move(path), std::move(content));
    }

    void commit() {
        std::vector<std::filesystem::path> written;
        try {
            for (const auto& [path, content] : files_) {
                if (path.has_parent_path()) {
                    std::error_code ec;
                    std::filesystem::create_directories(path.parent_path(), ec);
                    if (ec)
                        throw IoError("cannot create directory '" +
                                      path.parent_path().string() + "': " + ec.message());
                }
                write_text_file(path, content);
                written.push_back(path);
            }
        } catch (...) {
            for (const auto& path : written) {
                std::error_code ec;
                std::filesystem::remove(path, ec);
            }
            throw;
        }
        files_.clear();
    }

  private:
    std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

} // namespace aeval
