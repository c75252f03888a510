// kernsat: saturation-lab command line.
//
//   analyze    dataset information metrics (ME, SNR) as JSON or a table
//   augment    materialize negative/supplemented sets in the source format
//   train      run a configured experiment (training, snapshots, figures)
//   stats      normality + paired t-test over a run-results CSV
//   visualize  kernel grids from snapshots, activation maps from checkpoints

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kernsat/augment.hpp"
#include "kernsat/checkpoint.hpp"
#include "kernsat/experiment.hpp"
#include "kernsat/loaders.hpp"
#include "kernsat/metrics.hpp"
#include "kernsat/render.hpp"
#include "kernsat/saturation.hpp"
#include "kernsat/stats.hpp"
#include "kernsat/train.hpp"

namespace fs = std::filesystem;
using namespace kernsat;

namespace {

fs::path resolve_root(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("KERNSAT_DATA_DIR")) {
        if (*env != '\0') return env;
    }
    throw std::runtime_error("no dataset directory: pass --data-dir or set KERNSAT_DATA_DIR");
}

DatasetSplit split_from_string(const std::string& name) {
    if (name == "train") return DatasetSplit::Train;
    if (name == "test") return DatasetSplit::Test;
    throw std::runtime_error("unknown split '" + name + "' (expected train|test)");
}

int cmd_analyze(const std::string& data_dir, const std::string& dataset,
                const std::string& split, const std::string& variant,
                const std::string& pooling, const std::string& format) {
    LabeledDataset data = load_dataset(dataset, resolve_root(data_dir), split_from_string(split));
    std::string note;
    if (variant == "negative") {
        data = build_training_set(data, AugmentationMode::NegativesOnly);
        note = "empirical maximum entropy is invariant under pixel negation (histogram index "
               "reversal), so this set reports the same ME as its source by construction";
    } else if (variant == "supplemented") {
        data = build_training_set(data, AugmentationMode::Supplemented);
        note = "supplemented set: originals plus their negatives";
    } else if (variant != "original") {
        throw std::runtime_error("unknown variant '" + variant +
                                 "' (expected original|negative|supplemented)");
    }
    const MetricsReport report = metrics_report(data, pooling_from_string(pooling));
    if (format == "json" || format == "both") {
        std::cout << metrics_to_json(report, note);
    }
    if (format == "table" || format == "both") {
        std::cout << metrics_to_table(report);
    }
    if (format != "json" && format != "table" && format != "both") {
        throw std::runtime_error("unknown format '" + format + "' (expected json|table|both)");
    }
    return 0;
}

int cmd_augment(const std::string& data_dir, const std::string& dataset,
                const std::string& split, const std::string& mode_name,
                const std::string& out_dir) {
    const DatasetSplit which = split_from_string(split);
    const LabeledDataset source = load_dataset(dataset, resolve_root(data_dir), which);
    const AugmentationMode mode = augmentation_mode_from_string(mode_name);
    const LabeledDataset augmented = build_training_set(source, mode);
    write_dataset(augmented, dataset, out_dir, which);
    size_t negatives = 0;
    for (Provenance origin : augmented.provenance) {
        if (origin == Provenance::Negative) ++negatives;
    }
    std::cout << "wrote " << augmented.size() << " images (" << negatives << " negative) to "
              << out_dir << " in " << dataset << " binary format\n";
    return 0;
}

int cmd_stats(const std::string& input, const std::string& baseline,
              const std::string& treatment, double alpha, const std::string& out_path) {
    // CSV schema: condition,run,accuracy
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open " + input);
    std::string line;
    if (!std::getline(in, line) || line != "condition,run,accuracy") {
        throw std::runtime_error(input + ":1: expected header 'condition,run,accuracy'");
    }
    std::map<std::string, std::map<int, double>> by_condition;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const std::string where = input + ":" + std::to_string(line_number);
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw std::runtime_error(where + ": expected 3 fields");
        }
        const std::string condition = line.substr(0, c1);
        const std::string run_text = line.substr(c1 + 1, c2 - c1 - 1);
        const std::string acc_text = line.substr(c2 + 1);
        int run = 0;
        try {
            run = std::stoi(run_text);
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": bad run '" + run_text + "'");
        }
        char* end = nullptr;
        const double accuracy = std::strtod(acc_text.c_str(), &end);
        if (acc_text.empty() || end != acc_text.c_str() + acc_text.size()) {
            throw std::runtime_error(where + ": bad accuracy '" + acc_text + "'");
        }
        if (accuracy < 0.0 || accuracy > 100.0) {
            throw std::runtime_error(where + ": accuracy outside [0, 100]");
        }
        by_condition[condition][run] = accuracy;
    }

    std::vector<RunResults> conditions;
    for (const auto& [label, runs] : by_condition) {
        RunResults results;
        results.label = label;
        for (const auto& [run, accuracy] : runs) results.accuracies.push_back(accuracy);
        conditions.push_back(std::move(results));
    }
    const auto summaries = summarize(conditions);

    char buffer[160];
    std::snprintf(buffer, sizeof(buffer), "%-28s %5s %12s %12s\n", "condition", "runs", "mean",
                  "variance");
    std::cout << buffer;
    for (const auto& summary : summaries) {
        if (summary.variance) {
            std::snprintf(buffer, sizeof(buffer), "%-28s %5zu %12.4f %12.6f\n",
                          summary.label.c_str(), summary.runs, summary.mean, *summary.variance);
        } else {
            std::snprintf(buffer, sizeof(buffer), "%-28s %5zu %12.4f %12s\n",
                          summary.label.c_str(), summary.runs, summary.mean, "-");
        }
        std::cout << buffer;
    }

    nlohmann::ordered_json doc;
    doc["summaries"] = nlohmann::ordered_json::array();
    for (const auto& summary : summaries) {
        nlohmann::ordered_json item;
        item["condition"] = summary.label;
        item["runs"] = summary.runs;
        item["mean"] = summary.mean;
        if (summary.variance) item["variance"] = *summary.variance;
        doc["summaries"].push_back(item);
    }
    doc["tests"] = nlohmann::ordered_json::array();
    auto outcome_to_json = [](const TestOutcome& outcome, const std::string& condition) {
        return nlohmann::ordered_json{{"condition", condition},
                                      {"test", outcome.test_name},
                                      {"statistic", outcome.statistic},
                                      {"p_value", outcome.p_value},
                                      {"alpha", outcome.alpha},
                                      {"reject_null", outcome.reject}};
    };
    for (const auto& condition : conditions) {
        if (condition.accuracies.size() >= 3 && condition.accuracies.size() <= 50) {
            try {
                doc["tests"].push_back(
                    outcome_to_json(shapiro_wilk(condition.accuracies, alpha), condition.label));
            } catch (const std::exception& error) {
                doc["tests"].push_back(nlohmann::ordered_json{{"condition", condition.label},
                                                              {"test", "shapiro_wilk"},
                                                              {"error", error.what()}});
            }
        }
    }
    if (!baseline.empty() && !treatment.empty()) {
        const auto base_it = by_condition.find(baseline);
        const auto treat_it = by_condition.find(treatment);
        if (base_it == by_condition.end() || treat_it == by_condition.end()) {
            throw std::runtime_error("baseline/treatment condition not present in " + input);
        }
        // pair by run id; only runs present in both conditions are used
        std::vector<double> a, b;
        for (const auto& [run, accuracy] : base_it->second) {
            const auto match = treat_it->second.find(run);
            if (match != treat_it->second.end()) {
                a.push_back(accuracy);
                b.push_back(match->second);
            }
        }
        const TestOutcome outcome = paired_t_test(a, b, /*two_tailed=*/true, alpha);
        doc["tests"].push_back(outcome_to_json(outcome, baseline + " vs " + treatment));
        std::snprintf(buffer, sizeof(buffer), "paired t (%s vs %s): t=%.4f p=%.4f %s\n",
                      baseline.c_str(), treatment.c_str(), outcome.statistic, outcome.p_value,
                      outcome.reject ? "reject H0" : "fail to reject H0");
        std::cout << buffer;
    }

    const std::string json = doc.dump(2) + "\n";
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
        out << json;
    } else {
        std::cout << json;
    }
    return 0;
}

int cmd_visualize(const std::string& snapshot_path, const std::string& checkpoint_path,
                  const std::string& data_dir, const std::string& dataset,
                  const std::string& split, int image_index, const std::string& layer,
                  const std::string& out_path) {
    if (!snapshot_path.empty()) {
        const KernelSnapshot snapshot = load_snapshot(snapshot_path);
        render_kernel_grid(snapshot, out_path);
        std::cout << "kernel grid for layer '" << snapshot.layer << "' (epoch " << snapshot.epoch
                  << ") -> " << out_path << "\n";
        return 0;
    }
    if (checkpoint_path.empty()) {
        throw std::runtime_error("visualize needs --snapshot or --checkpoint");
    }
    const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    const LabeledDataset data =
        load_dataset(dataset, resolve_root(data_dir), split_from_string(split));
    if (image_index < 0 || static_cast<size_t>(image_index) >= data.size()) {
        throw std::runtime_error("--index out of range (dataset has " +
                                 std::to_string(data.size()) + " images)");
    }
    capture_activation_maps(checkpoint.network, normalize(data.images[image_index]), layer,
                            out_path);
    std::cout << "activation map of layer '" << layer << "' for image " << image_index << " -> "
              << out_path << "\n";
    return 0;
}

void print_results(const ResultsTable& table) {
    char buffer[160];
    std::snprintf(buffer, sizeof(buffer), "%-16s %-8s %-14s %4s %10s\n", "arch", "dataset",
                  "mode", "run", "accuracy");
    std::cout << buffer;
    for (const ResultRow& row : table.rows) {
        std::snprintf(buffer, sizeof(buffer), "%-16s %-8s %-14s %4d %9.3f%%\n", row.arch.c_str(),
                      row.dataset.c_str(), row.mode.c_str(), row.run, row.accuracy);
        std::cout << buffer;
    }
    std::snprintf(buffer, sizeof(buffer), "mean accuracy over %zu run(s): %.3f%%\n",
                  table.rows.size(), table.mean_accuracy());
    std::cout << buffer;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernsat: convolutional kernel saturation laboratory"};
    app.require_subcommand(1);

    std::string data_dir;
    app.add_option("--data-dir", data_dir, "dataset root (default: $KERNSAT_DATA_DIR)");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "compute ME/SNR metrics for a dataset");
    std::string an_dataset = "cifar10", an_split = "train", an_variant = "original";
    std::string an_pooling = "per_image_mean", an_format = "json";
    analyze->add_option("--dataset", an_dataset, "mnist|cifar10|stl10")->required();
    analyze->add_option("--split", an_split, "train|test");
    analyze->add_option("--variant", an_variant, "original|negative|supplemented");
    analyze->add_option("--pooling", an_pooling, "per_image_mean|global_flatten");
    analyze->add_option("--format", an_format, "json|table|both");

    // augment
    auto* augment = app.add_subcommand("augment", "write negatives in the source binary format");
    std::string au_dataset = "cifar10", au_split = "train", au_mode = "supplemented", au_out;
    augment->add_option("--dataset", au_dataset, "mnist|cifar10|stl10")->required();
    augment->add_option("--split", au_split, "train|test");
    augment->add_option("--mode", au_mode, "standard|supplemented|negatives_only");
    augment->add_option("--out", au_out, "output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "run a configured experiment");
    std::string tr_config, tr_preset, tr_dataset, tr_mode, tr_arch, tr_out;
    int tr_epochs = -1, tr_runs = -1, tr_batch = -1, tr_subset = -1;
    double tr_lr = -1.0, tr_fraction = -1.0, tr_epsilon = -1.0;
    int64_t tr_seed = -1;
    bool tr_quiet = false;
    train_cmd->add_option("--config", tr_config, "JSON config file (flags override it)");
    train_cmd->add_option("--preset", tr_preset, "desk|paper");
    train_cmd->add_option("--dataset", tr_dataset, "mnist|cifar10|stl10");
    train_cmd->add_option("--mode", tr_mode, "standard|supplemented|negatives_only");
    train_cmd->add_option("--epochs", tr_epochs, "training epochs");
    train_cmd->add_option("--runs", tr_runs, "independent runs");
    train_cmd->add_option("--seed", tr_seed, "master seed");
    train_cmd->add_option("--lr", tr_lr, "learning rate (default 0.001)");
    train_cmd->add_option("--batch-size", tr_batch, "batch size (default 128)");
    train_cmd->add_option("--train-fraction", tr_fraction, "train/val split (default 0.8)");
    train_cmd->add_option("--arch", tr_arch, "architecture descriptor, e.g. res-16-32-64");
    train_cmd->add_option("--epsilon", tr_epsilon, "saturation threshold (default 1e-7)");
    train_cmd->add_option("--subset", tr_subset, "cap on training images (0 = all)");
    train_cmd->add_option("--out", tr_out, "output directory (default runs)");
    train_cmd->add_flag("--quiet", tr_quiet, "suppress per-epoch progress");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "summaries and tests over a results CSV");
    std::string st_input, st_baseline, st_treatment, st_out;
    double st_alpha = 0.05;
    stats_cmd->add_option("--input", st_input, "CSV with header condition,run,accuracy")
        ->required();
    stats_cmd->add_option("--baseline", st_baseline, "condition for the paired test baseline");
    stats_cmd->add_option("--treatment", st_treatment, "condition for the paired test treatment");
    stats_cmd->add_option("--alpha", st_alpha, "significance cut-off (default 0.05)");
    stats_cmd->add_option("--out", st_out, "write the JSON report here instead of stdout");

    // visualize
    auto* visualize = app.add_subcommand("visualize", "render kernel grids / activation maps");
    std::string vz_snapshot, vz_checkpoint, vz_dataset = "cifar10", vz_split = "test";
    std::string vz_layer = "final", vz_out;
    int vz_index = 0;
    visualize->add_option("--snapshot", vz_snapshot, "kernel snapshot (.ksnap) to tile");
    visualize->add_option("--checkpoint", vz_checkpoint, "checkpoint (.ksnet) for activations");
    visualize->add_option("--dataset", vz_dataset, "dataset for the probe image");
    visualize->add_option("--split", vz_split, "train|test");
    visualize->add_option("--index", vz_index, "probe image index");
    visualize->add_option("--layer", vz_layer, "stem|block<i>|final");
    visualize->add_option("--out", vz_out, "output image path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            return cmd_analyze(data_dir, an_dataset, an_split, an_variant, an_pooling, an_format);
        }
        if (*augment) {
            return cmd_augment(data_dir, au_dataset, au_split, au_mode, au_out);
        }
        if (*train_cmd) {
            ExperimentConfig config;
            if (!tr_config.empty()) config = config_from_json_file(tr_config);
            if (!tr_dataset.empty()) config.dataset = tr_dataset;
            if (!tr_mode.empty()) config.mode = augmentation_mode_from_string(tr_mode);
            if (tr_epochs >= 0) config.epochs = tr_epochs;
            if (tr_runs >= 0) config.runs = tr_runs;
            if (tr_seed >= 0) config.seed = static_cast<uint64_t>(tr_seed);
            if (tr_lr >= 0.0) config.learning_rate = tr_lr;
            if (tr_batch >= 0) config.batch_size = tr_batch;
            if (tr_fraction >= 0.0) config.train_fraction = tr_fraction;
            if (!tr_arch.empty()) config.arch = tr_arch;
            if (tr_epsilon >= 0.0) config.saturation_epsilon = tr_epsilon;
            if (tr_subset >= 0) config.subset = tr_subset;
            if (!tr_out.empty()) config.output_dir = tr_out;
            if (!data_dir.empty()) config.data_dir = data_dir;
            if (!tr_preset.empty()) apply_preset(config, preset_from_string(tr_preset));
            config.validate();

            std::streambuf* saved = nullptr;
            std::ofstream null_sink;
            if (tr_quiet) {
                null_sink.open("/dev/null");
                saved = std::cerr.rdbuf(null_sink.rdbuf());
            }
            const ResultsTable table = run_experiment(config);
            if (saved) std::cerr.rdbuf(saved);
            print_results(table);
            return 0;
        }
        if (*stats_cmd) {
            return cmd_stats(st_input, st_baseline, st_treatment, st_alpha, st_out);
        }
        if (*visualize) {
            return cmd_visualize(vz_snapshot, vz_checkpoint, data_dir, vz_dataset, vz_split,
                                 vz_index, vz_layer, vz_out);
        }
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 1;
    }
    return 0;
}
