#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kernsat/network.hpp"

namespace kernsat {

// Epoch-stamped deep copy of one conv layer's kernel weights; immutable
// after capture.
struct KernelSnapshot {
    int epoch = 0;
    std::string layer;
    int out_channels = 0;
    int in_channels = 0;
    int kernel = 0;
    std::vector<float> weights;
};

// Inter-epoch weight-update statistics for one layer. saturated_fraction is
// the share of weights whose absolute change stayed below epsilon.
struct SaturationReport {
    std::string layer;
    int epoch_a = 0;
    int epoch_b = 0;
    double epsilon = 0.0;
    double mean_abs_delta = 0.0;
    double max_abs_delta = 0.0;
    double saturated_fraction = 0.0;
};

// One snapshot per conv layer, in forward order.
std::vector<KernelSnapshot> snapshot_kernels(const NetworkT<float>& net, int epoch);

// Elementwise |w_b - w_a| statistics. Symmetric in its arguments; throws on
// layer or shape mismatch.
SaturationReport delta_stats(const KernelSnapshot& a, const KernelSnapshot& b, double epsilon);

// Snapshot persistence reuses the checkpoint block primitives
// (magic "KSNAP001" | layer string | epoch i32 | shape i32x3 | f32 block).
void save_snapshot(const KernelSnapshot& snapshot, const std::filesystem::path& path);
KernelSnapshot load_snapshot(const std::filesystem::path& path);

// JSON manifest mapping persisted snapshots to epochs and files.
struct SnapshotManifestEntry {
    int epoch = 0;
    std::string layer;
    std::string file;
};
void write_snapshot_manifest(const std::vector<SnapshotManifestEntry>& entries,
                             const std::filesystem::path& path);
std::vector<SnapshotManifestEntry> read_snapshot_manifest(const std::filesystem::path& path);

}  // namespace kernsat
