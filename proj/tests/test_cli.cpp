#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>

#include <sys/wait.h>

#include <aeval/aeval.hpp>

#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace aeval;
using testutil::TempDir;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the installed binary through the shell, capturing exit code and both
// streams. `prefix` can set environment variables for the child.
RunResult run_cli(const TempDir& tmp, const std::string& args, const std::string& prefix = "") {
    static int counter = 0;
    const fs::path out_file = tmp.path / ("stdout_" + std::to_string(counter));
    const fs::path err_file = tmp.path / ("stderr_" + std::to_string(counter));
    ++counter;
    const std::string cmd = prefix + (prefix.empty() ? "" : " ") + AEVAL_BIN + " " + args +
                            " > " + out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text_file(out_file);
    result.err = read_text_file(err_file);
    return result;
}

// All regular files under a directory, keyed by relative path.
std::map<std::string, std::string> dir_contents(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            files.emplace(fs::relative(entry.path(), root).string(),
                          read_text_file(entry.path()));
    return files;
}

const std::string kScenario = "--accident-videos 6 --safe-videos 6 --len-min 100 --len-max 140 "
                              "--interval-min 2.0 --interval-max 3.5 --margin 40 --seed 11";

} // namespace

TEST_CASE("full pipeline runs are byte-identical for a fixed seed") {
    const TempDir tmp("aeval_cli_determinism");
    for (const char* run : {"one", "two"}) {
        const fs::path base = tmp.path / run;
        const std::string sim = run_cli(tmp, "simulate " + kScenario +
                                                 " --predictor noisy_decay --noise-sigma 0.2 "
                                                 "--predictor-seed 4 --out " +
                                                 (base / "data").string())
                                    .err;
        CHECK(sim.empty());
        CHECK(run_cli(tmp, "evaluate --manifest " + (base / "data" / "manifest.json").string() +
                               " --scores " + (base / "data").string() +
                               " --lambda 0.1 --lambda 1 --roc --seed 2 --out " +
                               (base / "eval").string())
                  .exit_code == 0);
        CHECK(run_cli(tmp, "compare-tta --manifest " +
                               (base / "data" / "manifest.json").string() + " --scores " +
                               (base / "data").string() + " --lambda 0.1 --out " +
                               (base / "cmp").string())
                  .exit_code == 0);
        CHECK(run_cli(tmp, "labels --manifest " + (base / "data" / "manifest.json").string() +
                               " --scores " + (base / "data").string() +
                               " --snippets-per-video 3 --seed 6 --out " +
                               (base / "lab").string())
                  .exit_code == 0);
    }
    CHECK(dir_contents(tmp.path / "one") == dir_contents(tmp.path / "two"));
}

TEST_CASE("permuting the manifest changes no metric value") {
    const TempDir tmp("aeval_cli_permute");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --predictor random --out " + data.string())
                .exit_code == 0);

    DatasetManifest d = read_manifest_file(data / "manifest.json");
    std::reverse(d.videos.begin(), d.videos.end());
    write_manifest_file(data / "manifest_reversed.json", d);

    for (const char* name : {"manifest.json", "manifest_reversed.json"})
        REQUIRE(run_cli(tmp, "evaluate --manifest " + (data / name).string() + " --scores " +
                                 data.string() + " --lambda 0.1 --seed 3 --out " +
                                 (tmp.path / name).string() + ".out")
                    .exit_code == 0);
    CHECK(dir_contents(tmp.path / "manifest.json.out") ==
          dir_contents(tmp.path / "manifest_reversed.json.out"));
}

TEST_CASE("evaluate reports oracle perfection on well-separated scenarios") {
    const TempDir tmp("aeval_cli_oracle");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --predictor oracle --out " + data.string())
                .exit_code == 0);
    const RunResult eval =
        run_cli(tmp, "evaluate --manifest " + (data / "manifest.json").string() + " --scores " +
                         data.string() + " --lambda 0.1 --out " + (tmp.path / "eval").string());
    REQUIRE(eval.exit_code == 0);
    const std::string report = read_text_file(tmp.path / "eval" / "report_lambda0.1.json");
    CHECK(report.find("\"auc\": 1.000000") != std::string::npos);
    CHECK(report.find("\"mauc\": 1.000000") != std::string::npos);
    CHECK(report.find("\"mtta_revised\": 2.000000") != std::string::npos);
}

TEST_CASE("tta-mode filters the report fields") {
    const TempDir tmp("aeval_cli_ttamode");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --out " + data.string()).exit_code == 0);
    REQUIRE(run_cli(tmp, "evaluate --manifest " + (data / "manifest.json").string() +
                             " --scores " + data.string() + " --tta-mode revised --out " +
                             (tmp.path / "eval").string())
                .exit_code == 0);
    const std::string report = read_text_file(tmp.path / "eval" / "report_lambda0.1.json");
    CHECK(report.find("mtta_revised") != std::string::npos);
    CHECK(report.find("mtta_legacy") == std::string::npos);
}

TEST_CASE("a missing score file exits 1 and leaves no partial output") {
    const TempDir tmp("aeval_cli_missing");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --out " + data.string()).exit_code == 0);
    fs::remove(data / "acc_00003.csv");

    const fs::path out = tmp.path / "eval";
    const RunResult eval =
        run_cli(tmp, "evaluate --manifest " + (data / "manifest.json").string() + " --scores " +
                         data.string() + " --lambda 0.1 --lambda 1 --out " + out.string());
    CHECK(eval.exit_code == 1);
    CHECK(eval.err.find("acc_00003") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("invalid lambda exits 1") {
    const TempDir tmp("aeval_cli_lambda");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --out " + data.string()).exit_code == 0);
    const RunResult eval =
        run_cli(tmp, "evaluate --manifest " + (data / "manifest.json").string() + " --scores " +
                         data.string() + " --lambda 1.5 --out " + (tmp.path / "eval").string());
    CHECK(eval.exit_code == 1);
    CHECK_FALSE(fs::exists(tmp.path / "eval"));
}

TEST_CASE("missing manifest is an I/O failure (exit 2)") {
    const TempDir tmp("aeval_cli_iofail");
    const RunResult eval = run_cli(tmp, "evaluate --manifest " +
                                            (tmp.path / "absent.json").string() + " --scores " +
                                            tmp.path.string());
    CHECK(eval.exit_code == 2);
}

TEST_CASE("unwritable output destination exits 2") {
    const TempDir tmp("aeval_cli_unwritable");
    write_text_file(tmp.path / "blocker", "file");
    const RunResult sim = run_cli(tmp, "simulate " + kScenario + " --out " +
                                           (tmp.path / "blocker" / "nested").string());
    CHECK(sim.exit_code == 2);
}

TEST_CASE("infeasible scenario ranges exit 1 with a diagnostic") {
    const TempDir tmp("aeval_cli_infeasible");
    const RunResult sim = run_cli(tmp, "simulate --accident-videos 2 --len-min 10 --len-max 10 "
                                       "--interval-min 5 --interval-max 5 --margin 0 --out " +
                                           (tmp.path / "data").string());
    CHECK(sim.exit_code == 1);
    CHECK(sim.err.find("infeasible") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "data"));
}

TEST_CASE("AEVAL_OUT provides the default output directory") {
    const TempDir tmp("aeval_cli_envout");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --out " + data.string()).exit_code == 0);
    const RunResult eval =
        run_cli(tmp,
                "evaluate --manifest " + (data / "manifest.json").string() + " --scores " +
                    data.string(),
                "AEVAL_OUT=" + (tmp.path / "from_env").string());
    REQUIRE(eval.exit_code == 0);
    CHECK(fs::exists(tmp.path / "from_env" / "report_lambda0.1.json"));
}

TEST_CASE("compare-tta emits per-video rows with legacy at least revised") {
    const TempDir tmp("aeval_cli_cmp");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario +
                             " --predictor early_false_alarm --lead 3.5 --spike-len 5 --out " +
                             data.string())
                .exit_code == 0);
    const RunResult cmp = run_cli(tmp, "compare-tta --manifest " +
                                           (data / "manifest.json").string() + " --scores " +
                                           data.string() + " --out " + (tmp.path / "cmp").string());
    REQUIRE(cmp.exit_code == 0);

    const std::string csv = read_text_file(tmp.path / "cmp" / "compare_tta.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "video_id,interval_s,tta_legacy_s,tta_revised_s");
    int rows = 0;
    std::string last;
    while (std::getline(lines, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        const double legacy = std::stod(line.substr(c2 + 1, c3 - c2 - 1));
        const double revised = std::stod(line.substr(c3 + 1));
        CHECK(legacy >= revised);
        ++rows;
        last = line;
    }
    CHECK(rows == 7); // 6 accident videos plus the mean row
    CHECK(last.substr(0, 5) == "mean,");
}

TEST_CASE("labels on oracle scores reports a vanishing mean loss") {
    const TempDir tmp("aeval_cli_labels");
    const fs::path data = tmp.path / "data";
    REQUIRE(run_cli(tmp, "simulate " + kScenario + " --predictor oracle --out " + data.string())
                .exit_code == 0);
    const RunResult lab =
        run_cli(tmp, "labels --manifest " + (data / "manifest.json").string() + " --scores " +
                         data.string() + " --snippets-per-video 4 --out " +
                         (tmp.path / "lab").string());
    REQUIRE(lab.exit_code == 0);
    CHECK(lab.out.find("mean_loss 0.000000") != std::string::npos);

    const std::string csv = read_text_file(tmp.path / "lab" / "labels.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "video_id,t0,A,y1,y2,y3,y4,y5,y6,y7,y8,y9,y10,y11,y12,y13,y14,y15,y16,y17,y18,y19,"
          "y20,loss");
    int rows = 0;
    for (std::string line; std::getline(lines, line);) ++rows;
    CHECK(rows == 24); // 6 accident videos, 4 snippets each
}

TEST_CASE("unknown flags are usage errors with exit 1") {
    const TempDir tmp("aeval_cli_usage");
    CHECK(run_cli(tmp, "evaluate --nonsense").exit_code == 1);
    CHECK(run_cli(tmp, "").exit_code == 1);
    CHECK(run_cli(tmp, "--help").exit_code == 0);
}
