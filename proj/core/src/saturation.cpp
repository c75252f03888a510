#include "kernsat/saturation.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "kernsat/binio.hpp"

namespace kernsat {

namespace {
const std::string kMagic = "KSNAP001";
}

std::vector<KernelSnapshot> snapshot_kernels(const NetworkT<float>& net, int epoch) {
    std::vector<KernelSnapshot> snapshots;
    net.for_each_conv([&](const std::string& name, const ConvLayerT<float>& conv) {
        KernelSnapshot snapshot;
        snapshot.epoch = epoch;
        snapshot.layer = name;
        snapshot.out_channels = conv.out_channels;
        snapshot.in_channels = conv.in_channels;
        snapshot.kernel = conv.kernel;
        snapshot.weights = conv.weights;  // deep copy
        snapshots.push_back(std::move(snapshot));
    });
    return snapshots;
}

SaturationReport delta_stats(const KernelSnapshot& a, const KernelSnapshot& b, double epsilon) {
    if (a.layer != b.layer) {
        throw std::invalid_argument("delta_stats: layer mismatch '" + a.layer + "' vs '" +
                                    b.layer + "'");
    }
    if (a.weights.size() != b.weights.size() || a.out_channels != b.out_channels ||
        a.in_channels != b.in_channels || a.kernel != b.kernel) {
        throw std::invalid_argument("delta_stats: shape mismatch for layer '" + a.layer + "'");
    }
    if (a.weights.empty()) {
        throw std::invalid_argument("delta_stats: empty snapshot for layer '" + a.layer + "'");
    }

    SaturationReport report;
    report.layer = a.layer;
    report.epoch_a = a.epoch;
    report.epoch_b = b.epoch;
    report.epsilon = epsilon;

    double sum = 0.0;
    double max = 0.0;
    size_t below = 0;
    for (size_t i = 0; i < a.weights.size(); ++i) {
        const double delta = std::abs(static_cast<double>(b.weights[i]) - a.weights[i]);
        sum += delta;
        if (delta > max) max = delta;
        if (delta < epsilon) ++below;
    }
    report.mean_abs_delta = sum / static_cast<double>(a.weights.size());
    report.max_abs_delta = max;
    report.saturated_fraction = static_cast<double>(below) / static_cast<double>(a.weights.size());
    return report;
}

void save_snapshot(const KernelSnapshot& snapshot, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    binio::write_magic(out, kMagic);
    binio::write_string(out, snapshot.layer);
    binio::write_i32(out, snapshot.epoch);
    binio::write_i32(out, snapshot.out_channels);
    binio::write_i32(out, snapshot.in_channels);
    binio::write_i32(out, snapshot.kernel);
    binio::write_f32_block(out, snapshot.weights);
    if (!out) {
        throw std::runtime_error("failed to write " + path.string());
    }
}

KernelSnapshot load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    binio::expect_magic(in, kMagic, path.string());
    KernelSnapshot snapshot;
    snapshot.layer = binio::read_string(in);
    snapshot.epoch = binio::read_i32(in);
    snapshot.out_channels = binio::read_i32(in);
    snapshot.in_channels = binio::read_i32(in);
    snapshot.kernel = binio::read_i32(in);
    snapshot.weights = binio::read_f32_block(in);
    const size_t expected = static_cast<size_t>(snapshot.out_channels) * snapshot.in_channels *
                            snapshot.kernel * snapshot.kernel;
    if (snapshot.weights.size() != expected) {
        throw std::runtime_error("snapshot " + path.string() + " has " +
                                 std::to_string(snapshot.weights.size()) + " weights, shape needs " +
                                 std::to_string(expected));
    }
    return snapshot;
}

void write_snapshot_manifest(const std::vector<SnapshotManifestEntry>& entries,
                             const std::filesystem::path& path) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const SnapshotManifestEntry& entry : entries) {
        doc.push_back({{"epoch", entry.epoch}, {"layer", entry.layer}, {"file", entry.file}});
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << doc.dump(2) << "\n";
}

std::vector<SnapshotManifestEntry> read_snapshot_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<SnapshotManifestEntry> entries;
    for (const auto& item : doc) {
        SnapshotManifestEntry entry;
        entry.epoch = item.at("epoch").get<int>();
        entry.layer = item.at("layer").get<std::string>();
        entry.file = item.at("file").get<std::string>();
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace kernsat
