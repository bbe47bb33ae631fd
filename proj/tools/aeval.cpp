#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <aeval/aeval.hpp>

namespace fs = std::filesystem;

namespace {

std::string default_out_dir() {
    if (const char* env = std::getenv("AEVAL_OUT"); env != nullptr && *env != '\0') return env;
    return "aeval_out";
}

std::string lambda_tag(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", lambda);
    return buf;
}

aeval::TtaSelection parse_tta_selection(const std::string& mode) {
    if (mode == "revised") return aeval::TtaSelection::Revised;
    if (mode == "legacy") return aeval::TtaSelection::Legacy;
    if (mode == "both") return aeval::TtaSelection::Both;
    throw aeval::ValidationError("--tta-mode must be one of: revised, legacy, both");
}

std::vector<const aeval::VideoAnnotation*> sorted_accident_videos(
    const aeval::DatasetManifest& d) {
    std::vector<const aeval::VideoAnnotation*> vs;
    for (const auto* v : aeval::detail::sorted_videos(d))
        if (v->has_accident()) vs.push_back(v);
    return vs;
}

struct EvaluateArgs {
    std::string manifest_path;
    std::string scores_dir;
    std::vector<double> lambdas{0.1};
    std::string tta_mode = "both";
    std::uint64_t seed = 0;
    std::string out_dir;
    bool roc = false;
};

void run_evaluate(const EvaluateArgs& args) {
    const aeval::TtaSelection tta = parse_tta_selection(args.tta_mode);
    if (args.lambdas.empty()) throw aeval::ValidationError("--lambda needs at least one value");
    const aeval::DatasetManifest d = aeval::read_manifest_file(args.manifest_path);
    const aeval::ScoreSet scores = aeval::read_score_dir(args.scores_dir, d);

    const fs::path out(args.out_dir);
    aeval::OutputStager stager;
    std::vector<std::string> wrote;
    for (double lambda : args.lambdas) {
        const aeval::MetricsReport report = aeval::evaluate(d, scores, lambda, args.seed);
        const fs::path path = out / ("report_lambda" + lambda_tag(lambda) + ".json");
        stager.add(path, aeval::format_report_json(report, tta));
        wrote.push_back(path.string());
    }
    if (args.roc) {
        const auto add_curve = [&](const char* name, const aeval::SampleSet& s) {
            const fs::path path = out / name;
            stager.add(path, aeval::format_roc_csv(aeval::build_roc(s.positives, s.negatives)));
            wrote.push_back(path.string());
        };
        add_curve("roc_main.csv", aeval::main_samples(d, scores));
        add_curve("roc_0.5s.csv", aeval::interval_samples(d, scores, 0.5, args.seed));
        add_curve("roc_1.0s.csv", aeval::interval_samples(d, scores, 1.0, args.seed));
        add_curve("roc_1.5s.csv", aeval::interval_samples(d, scores, 1.5, args.seed));
    }
    stager.commit();
    for (const std::string& path : wrote) std::printf("wrote %s\n", path.c_str());
}

struct SimulateArgs {
    aeval::ScenarioConfig scenario;
    std::string predictor = "oracle";
    double constant_value = 0.5;
    double lead_seconds = 2.0;
    int spike_len = 5;
    double noise_sigma = 0.1;
    std::uint64_t predictor_seed = 0;
    int stride = 1;
    std::string out_dir;
};

void run_simulate(const SimulateArgs& args) {
    aeval::PredictorSpec spec;
    spec.kind = aeval::predictor_kind_from_string(args.predictor);
    spec.constant_value = args.constant_value;
    spec.lead_seconds = args.lead_seconds;
    spec.spike_len = args.spike_len;
    spec.noise_sigma = args.noise_sigma;
    spec.seed = args.predictor_seed;

    const aeval::DatasetManifest d = aeval::generate_dataset(args.scenario);
    const aeval::ScoreSet scores = aeval::predict_all(spec, d, args.stride);

    const fs::path out(args.out_dir);
    aeval::OutputStager stager;
    stager.add(out / "manifest.json", aeval::serialize_manifest(d));
    for (const auto& [video_id, m] : scores)
        stager.add(out / (video_id + ".csv"),
                   aeval::format_score_csv(m, d.horizon.horizon_steps));
    stager.commit();
    std::printf("wrote %s with %zu videos (%s predictor)\n", (out / "manifest.json").string().c_str(),
                d.videos.size(), args.predictor.c_str());
}

struct CompareTtaArgs {
    std::string manifest_path;
    std::string scores_dir;
    double lambda = 0.1;
    std::string out_dir;
};

void run_compare_tta(const CompareTtaArgs& args) {
    const aeval::DatasetManifest d = aeval::read_manifest_file(args.manifest_path);
    const aeval::ScoreSet scores = aeval::read_score_dir(args.scores_dir, d);

    const aeval::SampleSet main = aeval::main_samples(d, scores);
    const double tau = aeval::operating_threshold(main.negatives, args.lambda);

    const auto videos = sorted_accident_videos(d);
    if (videos.empty()) throw aeval::EvalError("compare-tta: dataset has no accident videos");

    const auto fixed6 = aeval::detail::fixed6;
    std::string csv = "video_id,interval_s,tta_legacy_s,tta_revised_s\n";
    double interval_sum = 0.0;
    double legacy_sum = 0.0;
    double revised_sum = 0.0;
    for (const auto* v : videos) {
        const aeval::ScoreMatrix& m = scores.at(v->video_id);
        const double interval = aeval::anomaly_interval_seconds(*v);
        const double legacy = aeval::tta(m, *v, tau, aeval::TtaMode::Legacy);
        const double revised = aeval::tta(m, *v, tau, aeval::TtaMode::Revised);
        interval_sum += interval;
        legacy_sum += legacy;
        revised_sum += revised;
        csv += v->video_id + "," + fixed6(interval) + "," + fixed6(legacy) + "," +
               fixed6(revised) + "\n";
    }
    const double n = static_cast<double>(videos.size());
    csv += "mean," + fixed6(interval_sum / n) + "," + fixed6(legacy_sum / n) + "," +
           fixed6(revised_sum / n) + "\n";

    const fs::path path = fs::path(args.out_dir) / "compare_tta.csv";
    aeval::OutputStager stager;
    stager.add(path, csv);
    stager.commit();
    std::printf("wrote %s\n", path.string().c_str());
    std::printf("threshold %s mean_tta_legacy %s mean_tta_revised %s\n", fixed6(tau).c_str(),
                fixed6(legacy_sum / n).c_str(), fixed6(revised_sum / n).c_str());
}

struct LabelsArgs {
    std::string manifest_path;
    std::string scores_dir; // optional: adds a loss column
    int snippets_per_video = 1;
    double w_plus = 10.0;
    std::uint64_t seed = 0;
    std::string out_dir;
};

void run_labels(const LabelsArgs& args) {
    if (args.snippets_per_video < 1)
        throw aeval::ValidationError("--snippets-per-video must be >= 1");
    const aeval::DatasetManifest d = aeval::read_manifest_file(args.manifest_path);
    const bool with_loss = !args.scores_dir.empty();
    aeval::ScoreSet scores;
    if (with_loss) scores = aeval::read_score_dir(args.scores_dir, d);

    std::string csv = "video_id,t0,A";
    for (int i = 1; i <= d.horizon.horizon_steps; ++i) csv += ",y" + std::to_string(i);
    if (with_loss) csv += ",loss";
    csv += "\n";

    double loss_sum = 0.0;
    std::size_t row_count = 0;
    for (const auto* v : sorted_accident_videos(d)) {
        const auto windows = aeval::sample_training_snippets(
            *v, d.horizon, args.snippets_per_video, aeval::rng::sub_seed(args.seed, v->video_id));
        for (const aeval::SnippetWindow& w : windows) {
            const aeval::LabelVector label = aeval::make_label_vector(w.end_frame, *v, d.horizon);
            csv += v->video_id + "," + std::to_string(w.end_frame) + ",";
            if (label.accident_offset) csv += std::to_string(*label.accident_offset);
            for (std::uint8_t y : label.values) csv += y ? ",1" : ",0";
            if (with_loss) {
                const aeval::ScoreMatrix& m = scores.at(v->video_id);
                const auto it = m.rows.find(w.end_frame);
                if (it == m.rows.end())
                    throw aeval::ValidationError("scores for video '" + v->video_id +
                                                 "': no row for sampled frame " +
                                                 std::to_string(w.end_frame));
                const double loss = aeval::weighted_bce_loss(it->second, label, args.w_plus);
                loss_sum += loss;
                csv += "," + aeval::detail::fixed6(loss);
            }
            csv += "\n";
            ++row_count;
        }
    }
    if (row_count == 0) throw aeval::EvalError("labels: dataset has no accident videos");

    const fs::path path = fs::path(args.out_dir) / "labels.csv";
    aeval::OutputStager stager;
    stager.add(path, csv);
    stager.commit();
    std::printf("wrote %s (%zu rows)\n", path.string().c_str(), row_count);
    if (with_loss)
        std::printf("mean_loss %s\n",
                    aeval::detail::fixed6(loss_sum / static_cast<double>(row_count)).c_str());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online accident anticipation evaluation harness"};
    app.require_subcommand(1);

    EvaluateArgs ev;
    ev.out_dir = default_out_dir();
    CLI::App* evaluate = app.add_subcommand("evaluate", "Compute the metric report from a manifest and score files");
    evaluate->add_option("--manifest", ev.manifest_path, "Dataset manifest JSON")->required();
    evaluate->add_option("--scores", ev.scores_dir, "Directory of <video_id>.csv score files")->required();
    evaluate->add_option("--lambda", ev.lambdas, "FAR bound(s), each in (0, 1]");
    evaluate->add_option("--tta-mode", ev.tta_mode, "TTA fields to report: revised, legacy, or both");
    evaluate->add_option("--seed", ev.seed, "Seed for clip sampling");
    evaluate->add_option("--out", ev.out_dir, "Output directory");
    evaluate->add_flag("--roc", ev.roc, "Also write ROC curve CSVs");
    evaluate->callback([&ev] { run_evaluate(ev); });

    SimulateArgs sim;
    sim.out_dir = default_out_dir();
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic dataset and predictor scores");
    simulate->add_option("--accident-videos", sim.scenario.n_accident_videos, "Accident video count");
    simulate->add_option("--safe-videos", sim.scenario.n_safe_videos, "Accident-free video count");
    simulate->add_option("--fps", sim.scenario.fps, "Frames per second");
    simulate->add_option("--len-min", sim.scenario.video_len_min, "Minimum video length, frames");
    simulate->add_option("--len-max", sim.scenario.video_len_max, "Maximum video length, frames");
    simulate->add_option("--interval-min", sim.scenario.interval_min_seconds,
                         "Minimum anomaly-to-accident interval, seconds");
    simulate->add_option("--interval-max", sim.scenario.interval_max_seconds,
                         "Maximum anomaly-to-accident interval, seconds");
    simulate->add_option("--margin", sim.scenario.accident_margin_frames,
                         "Earliest accident frame");
    simulate->add_option("--horizon-steps", sim.scenario.horizon_steps, "Score vector length T");
    simulate->add_option("--snippet-len", sim.scenario.snippet_len, "Snippet length S, frames");
    simulate->add_option("--seed", sim.scenario.seed, "Scenario seed");
    simulate->add_option("--predictor", sim.predictor,
                         "oracle, constant, random, early_false_alarm, or noisy_decay");
    simulate->add_option("--constant-value", sim.constant_value, "Score for the constant predictor");
    simulate->add_option("--lead", sim.lead_seconds, "Lead seconds (early_false_alarm, noisy_decay)");
    simulate->add_option("--spike-len", sim.spike_len, "Spike length in frames (early_false_alarm)");
    simulate->add_option("--noise-sigma", sim.noise_sigma, "Noise sigma (noisy_decay)");
    simulate->add_option("--predictor-seed", sim.predictor_seed, "Predictor seed");
    simulate->add_option("--stride", sim.stride, "Frames between scored windows");
    simulate->add_option("--out", sim.out_dir, "Output directory");
    simulate->callback([&sim] { run_simulate(sim); });

    CompareTtaArgs cmp;
    cmp.out_dir = default_out_dir();
    CLI::App* compare = app.add_subcommand("compare-tta", "Per-video legacy vs revised TTA at the operating threshold");
    compare->add_option("--manifest", cmp.manifest_path, "Dataset manifest JSON")->required();
    compare->add_option("--scores", cmp.scores_dir, "Directory of <video_id>.csv score files")->required();
    compare->add_option("--lambda", cmp.lambda, "FAR bound in (0, 1]");
    compare->add_option("--out", cmp.out_dir, "Output directory");
    compare->callback([&cmp] { run_compare_tta(cmp); });

    LabelsArgs lab;
    lab.out_dir = default_out_dir();
    CLI::App* labels = app.add_subcommand("labels", "Sample training snippets and emit their label vectors");
    labels->add_option("--manifest", lab.manifest_path, "Dataset manifest JSON")->required();
    labels->add_option("--scores", lab.scores_dir, "Score directory; adds a reference loss column");
    labels->add_option("--snippets-per-video", lab.snippets_per_video, "Sampled windows per accident video");
    labels->add_option("--w-plus", lab.w_plus, "Positive-entry loss weight");
    labels->add_option("--seed", lab.seed, "Sampling seed");
    labels->add_option("--out", lab.out_dir, "Output directory");
    labels->callback([&lab] { run_labels(lab); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const aeval::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const aeval::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const aeval::EvalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
