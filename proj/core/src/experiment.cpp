#include "kernsat/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "kernsat/checkpoint.hpp"
#include "kernsat/loaders.hpp"
#include "kernsat/metrics.hpp"
#include "kernsat/render.hpp"
#include "kernsat/rng.hpp"
#include "kernsat/saturation.hpp"
#include "kernsat/train.hpp"

namespace fs = std::filesystem;

namespace kernsat {
namespace {

std::string fmt_g17(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

LabeledDataset take_subset(const LabeledDataset& dataset, int count, uint64_t seed) {
    if (count <= 0 || static_cast<size_t>(count) >= dataset.size()) return dataset;
    std::mt19937_64 gen(seed);
    const std::vector<size_t> order = rng::permutation(dataset.size(), gen);
    LabeledDataset out;
    out.num_classes = dataset.num_classes;
    for (int i = 0; i < count; ++i) {
        const size_t src = order[static_cast<size_t>(i)];
        out.push_back(dataset.images[src], dataset.labels[src], dataset.provenance[src]);
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << text;
}

std::string sanitize_for_filename(std::string name) {
    for (char& ch : name) {
        if (ch == '/' || ch == '\\') ch = '_';
    }
    return name;
}

}  // namespace

Preset preset_from_string(const std::string& name) {
    if (name == "none" || name.empty()) return Preset::None;
    if (name == "desk") return Preset::Desk;
    if (name == "paper") return Preset::Paper;
    throw std::invalid_argument("unknown preset '" + name + "' (expected desk|paper|none)");
}

void ExperimentConfig::validate() const {
    if (dataset != "mnist" && dataset != "cifar10" && dataset != "stl10") {
        throw std::invalid_argument("config: unknown dataset '" + dataset + "'");
    }
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("config: train_fraction must be in (0, 1)");
    }
    if (learning_rate <= 0.0) throw std::invalid_argument("config: learning_rate must be > 0");
    if (saturation_epsilon <= 0.0) {
        throw std::invalid_argument("config: saturation_epsilon must be > 0");
    }
    if (subset < 0) throw std::invalid_argument("config: subset must be >= 0");
    parse_descriptor(arch);
}

void apply_preset(ExperimentConfig& config, Preset preset) {
    switch (preset) {
        case Preset::None:
            return;
        case Preset::Desk:
            config.epochs = std::min(config.epochs, 30);
            if (config.subset == 0) {
                config.subset = (config.dataset == "stl10") ? 1000 : 5000;
            }
            return;
        case Preset::Paper:
            config.epochs = 500;
            config.runs = 3;
            config.subset = 0;
            return;
    }
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    if (!doc.is_object()) {
        throw std::invalid_argument("config: top-level JSON value must be an object");
    }
    ExperimentConfig config;
    for (const auto& [key, value] : doc.items()) {
        if (key == "dataset") {
            config.dataset = value.get<std::string>();
        } else if (key == "mode") {
            config.mode = augmentation_mode_from_string(value.get<std::string>());
        } else if (key == "epochs") {
            config.epochs = value.get<int>();
        } else if (key == "runs") {
            config.runs = value.get<int>();
        } else if (key == "seed") {
            config.seed = value.get<uint64_t>();
        } else if (key == "learning_rate") {
            config.learning_rate = value.get<double>();
        } else if (key == "batch_size") {
            config.batch_size = value.get<int>();
        } else if (key == "train_fraction") {
            config.train_fraction = value.get<double>();
        } else if (key == "arch") {
            config.arch = value.get<std::string>();
        } else if (key == "saturation_epsilon") {
            config.saturation_epsilon = value.get<double>();
        } else if (key == "output_dir") {
            config.output_dir = value.get<std::string>();
        } else if (key == "data_dir") {
            config.data_dir = value.get<std::string>();
        } else if (key == "subset") {
            config.subset = value.get<int>();
        } else {
            throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    }
    config.validate();
    return config;
}

ExperimentConfig config_from_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json(buffer.str());
}

std::string config_to_json(const ExperimentConfig& config) {
    nlohmann::ordered_json doc;
    doc["dataset"] = config.dataset;
    doc["mode"] = to_string(config.mode);
    doc["epochs"] = config.epochs;
    doc["runs"] = config.runs;
    doc["seed"] = config.seed;
    doc["learning_rate"] = config.learning_rate;
    doc["batch_size"] = config.batch_size;
    doc["train_fraction"] = config.train_fraction;
    doc["arch"] = config.arch;
    doc["saturation_epsilon"] = config.saturation_epsilon;
    doc["output_dir"] = config.output_dir;
    doc["data_dir"] = config.data_dir;
    doc["subset"] = config.subset;
    return doc.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
    std::string key = config.dataset + "|" + to_string(config.mode) + "|" +
                      std::to_string(config.epochs) + "|" + std::to_string(config.runs) + "|" +
                      std::to_string(config.seed) + "|" + fmt_g17(config.learning_rate) + "|" +
                      std::to_string(config.batch_size) + "|" + fmt_g17(config.train_fraction) +
                      "|" + config.arch + "|" + fmt_g17(config.saturation_epsilon) + "|" +
                      std::to_string(config.subset);
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a(key)));
    return buffer;
}

double ResultsTable::mean_accuracy() const {
    if (rows.empty()) return 0.0;
    double sum = 0.0;
    for (const ResultRow& row : rows) sum += row.accuracy;
    return sum / static_cast<double>(rows.size());
}

void persist_results(const ResultsTable& table, const fs::path& path) {
    std::ostringstream out;
    out << "arch,dataset,mode,run,accuracy\n";
    for (const ResultRow& row : table.rows) {
        out << row.arch << "," << row.dataset << "," << row.mode << "," << row.run << ","
            << fmt_g17(row.accuracy) << "\n";
    }
    write_text_file(path, out.str());
}

ResultsTable load_results(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != "arch,dataset,mode,run,accuracy") {
        throw std::runtime_error(path.string() + ":1: bad results header");
    }
    ResultsTable table;
    int line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            const size_t comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        const std::string where = path.string() + ":" + std::to_string(line_number);
        if (fields.size() != 5) {
            throw std::runtime_error(where + ": expected 5 fields, got " +
                                     std::to_string(fields.size()));
        }
        ResultRow row;
        row.arch = fields[0];
        row.dataset = fields[1];
        row.mode = fields[2];
        try {
            size_t used = 0;
            row.run = std::stoi(fields[3], &used);
            if (used != fields[3].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::runtime_error(where + ": bad run field '" + fields[3] + "'");
        }
        char* end = nullptr;
        row.accuracy = std::strtod(fields[4].c_str(), &end);
        if (end != fields[4].c_str() + fields[4].size() || fields[4].empty()) {
            throw std::runtime_error(where + ": bad accuracy field '" + fields[4] + "'");
        }
        if (row.accuracy < 0.0 || row.accuracy > 100.0) {
            throw std::runtime_error(where + ": accuracy " + fields[4] + " outside [0, 100]");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::filesystem::path resolve_data_dir(const ExperimentConfig& config) {
    if (!config.data_dir.empty()) return config.data_dir;
    if (const char* env = std::getenv("KERNSAT_DATA_DIR")) {
        if (*env != '\0') return env;
    }
    throw std::runtime_error(
        "no dataset directory: pass data_dir in the config (or --data-dir) or set "
        "KERNSAT_DATA_DIR");
}

ResultsTable run_experiment(const ExperimentConfig& config) {
    config.validate();
    const fs::path data_dir = resolve_data_dir(config);
    const fs::path out_root = fs::path(config.output_dir) / config_hash(config);
    fs::create_directories(out_root);
    write_text_file(out_root / "config.json", config_to_json(config));

    LabeledDataset train_full = load_dataset(config.dataset, data_dir, DatasetSplit::Train);
    const LabeledDataset test_set = load_dataset(config.dataset, data_dir, DatasetSplit::Test);
    train_full = take_subset(train_full, config.subset, rng::derive_seed(config.seed, 0x5eed));

    const ImageU8& probe = train_full.images.at(0);
    ResultsTable table;

    for (int run = 1; run <= config.runs; ++run) {
        const uint64_t run_seed = rng::derive_seed(config.seed, static_cast<uint64_t>(run));
        const fs::path run_dir = out_root / ("run_" + std::to_string(run));
        const fs::path snapshot_dir = run_dir / "snapshots";
        const fs::path figure_dir = run_dir / "figures";
        fs::create_directories(snapshot_dir);
        fs::create_directories(figure_dir);

        const auto [train_part, val_part] =
            split(train_full, SplitSpec{config.train_fraction, run_seed});
        const LabeledDataset train_set = build_training_set(train_part, config.mode);

        NetworkT<float> net =
            build_network<float>(config.arch, probe.channels, probe.height, probe.width,
                                 test_set.num_classes, rng::derive_seed(run_seed, 1001));

        // Snapshot bookkeeping: epoch 0 is the initialization; later epochs
        // are persisted only when validation accuracy improves.
        std::vector<SnapshotManifestEntry> manifest;
        std::vector<std::vector<KernelSnapshot>> persisted;
        auto persist_epoch = [&](const std::vector<KernelSnapshot>& snapshots) {
            for (const KernelSnapshot& snapshot : snapshots) {
                char name[128];
                std::snprintf(name, sizeof(name), "epoch_%04d_%s.ksnap", snapshot.epoch,
                              sanitize_for_filename(snapshot.layer).c_str());
                save_snapshot(snapshot, snapshot_dir / name);
                manifest.push_back({snapshot.epoch, snapshot.layer, name});
            }
            persisted.push_back(snapshots);
            // Fig-2-style grid for the first conv layer at each persisted epoch.
            char grid_name[64];
            std::snprintf(grid_name, sizeof(grid_name), "kernels_stem_epoch%04d.%s",
                          snapshots.front().epoch,
                          snapshots.front().in_channels == 1 ? "pgm" : "ppm");
            render_kernel_grid(snapshots.front(), figure_dir / grid_name);
        };
        persist_epoch(snapshot_kernels(net, 0));

        double best_val_accuracy = -1.0;
        TrainConfig train_config;
        train_config.epochs = config.epochs;
        train_config.batch_size = config.batch_size;
        train_config.seed = run_seed;
        train_config.learning_rate = static_cast<float>(config.learning_rate);
        train_config.epoch_hook = [&](int epoch, const NetworkT<float>& current,
                                      const LossRecord& record) {
            std::vector<KernelSnapshot> snapshots = snapshot_kernels(current, epoch);
            if (record.val_accuracy > best_val_accuracy) {
                best_val_accuracy = record.val_accuracy;
                persist_epoch(snapshots);
            }
            std::cerr << config.dataset << "/" << to_string(config.mode) << " run " << run
                      << " epoch " << epoch << ": train_loss=" << record.train_loss
                      << " val_loss=" << record.val_loss << " val_acc=" << record.val_accuracy
                      << "%\n";
        };

        const std::vector<LossRecord> records = train(net, train_set, val_part, train_config);

        // Per-epoch records (validation accuracy per epoch enables
        // per-epoch statistical analysis alongside per-run finals).
        {
            std::ostringstream csv;
            csv << "epoch,train_loss,val_loss,val_accuracy\n";
            for (const LossRecord& record : records) {
                csv << record.epoch << "," << fmt_g17(record.train_loss) << ","
                    << fmt_g17(record.val_loss) << "," << fmt_g17(record.val_accuracy) << "\n";
            }
            write_text_file(run_dir / "loss_records.csv", csv.str());
        }

        write_snapshot_manifest(manifest, snapshot_dir / "manifest.json");

        // Update-magnitude statistics between consecutive persisted epochs,
        // plus an overall init-to-final row per layer.
        {
            std::ostringstream csv;
            csv << "layer,epoch_a,epoch_b,epsilon,mean_abs_delta,max_abs_delta,"
                   "saturated_fraction\n";
            auto emit = [&csv, &config](const KernelSnapshot& a, const KernelSnapshot& b) {
                const SaturationReport report = delta_stats(a, b, config.saturation_epsilon);
                csv << report.layer << "," << report.epoch_a << "," << report.epoch_b << ","
                    << fmt_g17(report.epsilon) << "," << fmt_g17(report.mean_abs_delta) << ","
                    << fmt_g17(report.max_abs_delta) << ","
                    << fmt_g17(report.saturated_fraction) << "\n";
            };
            for (size_t layer = 0; layer < persisted.front().size(); ++layer) {
                for (size_t i = 0; i + 1 < persisted.size(); ++i) {
                    emit(persisted[i][layer], persisted[i + 1][layer]);
                }
                if (persisted.size() > 2) {  // overall row, init to final
                    emit(persisted.front()[layer], persisted.back()[layer]);
                }
            }
            write_text_file(run_dir / "saturation.csv", csv.str());
        }

        save_checkpoint(net, run_dir / "checkpoint.ksnet", config.epochs, run_seed);

        write_text_file(run_dir / "metrics_train.json",
                        metrics_to_json(metrics_report(train_set, Pooling::PerImageMean)));
        write_text_file(run_dir / "metrics_test.json",
                        metrics_to_json(metrics_report(test_set, Pooling::PerImageMean)));

        // Fig-3-style activation map of the first test image after training.
        capture_activation_maps(net, normalize(test_set.images.front()), "final",
                                figure_dir / "activation_final.pgm");

        const double accuracy = evaluate(net, test_set);
        table.rows.push_back(
            {config.arch, config.dataset, to_string(config.mode), run, accuracy});
        std::cerr << config.dataset << "/" << to_string(config.mode) << " run " << run
                  << ": test accuracy " << accuracy << "%\n";
    }

    persist_results(table, out_root / "results.csv");
    return table;
}

}  // namespace kernsat
