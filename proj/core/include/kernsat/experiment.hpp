#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kernsat/augment.hpp"
#include "kernsat/dataset.hpp"

namespace kernsat {

// Desk keeps runs workstation-sized (training subset caps, <= 30 epochs);
// Paper encodes the full protocol (all data, 500 epochs, 3 runs).
enum class Preset { None, Desk, Paper };

Preset preset_from_string(const std::string& name);

struct ExperimentConfig {
    std::string dataset = "cifar10";  // mnist | cifar10 | stl10
    AugmentationMode mode = AugmentationMode::Standard;
    int epochs = 15;
    int runs = 1;
    uint64_t seed = 0;
    double learning_rate = 0.001;
    int batch_size = 128;
    double train_fraction = 0.8;
    std::string arch = "res-16-32-64";
    double saturation_epsilon = 1e-7;
    std::string output_dir = "runs";
    std::string data_dir;  // empty: use $KERNSAT_DATA_DIR
    int subset = 0;        // cap on training images before augmentation; 0 = all

    void validate() const;
};

void apply_preset(ExperimentConfig& config, Preset preset);

// Flat-key JSON round trip. Parsing rejects unknown keys.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig config_from_json_file(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

// Stable FNV-1a hash over the science-relevant fields (everything except
// output_dir and data_dir), so a rerun of the same experiment lands in the
// same directory and overwrites deterministically.
std::string config_hash(const ExperimentConfig& config);

// One row of the results table; run numbers are 1-based.
struct ResultRow {
    std::string arch;
    std::string dataset;
    std::string mode;
    int run = 0;
    double accuracy = 0.0;  // percent
};

struct ResultsTable {
    std::vector<ResultRow> rows;

    double mean_accuracy() const;
};

// CSV schema: arch,dataset,mode,run,accuracy. Round trips losslessly
// (accuracy at full double precision). Malformed rows report line numbers.
void persist_results(const ResultsTable& table, const std::filesystem::path& path);
ResultsTable load_results(const std::filesystem::path& path);

// Resolves config.data_dir or $KERNSAT_DATA_DIR; throws when neither is set.
std::filesystem::path resolve_data_dir(const ExperimentConfig& config);

// Runs the full protocol: per run, derive a sub-seed, split the originals,
// build the training set for the configured mode, train with kernel-snapshot
// instrumentation, then evaluate on the original (never augmented) test set.
// All artifacts land under <output_dir>/<config_hash>/.
ResultsTable run_experiment(const ExperimentConfig& config);

}  // namespace kernsat
