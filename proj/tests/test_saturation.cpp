#include "doctest.h"
#include "kernsat/augment.hpp"
#include "kernsat/render.hpp"
#include "kernsat/saturation.hpp"
#include "test_support.hpp"

using namespace kernsat;

TEST_CASE("snapshot_kernels deep-copies every conv layer") {
    Network net = build_network<float>("res-4-8", 3, 12, 12, 2, 5);
    const auto snapshots = snapshot_kernels(net, 0);
    // stem + 2 blocks * 2 convs + 1 projection (block 2 changes width)
    REQUIRE(snapshots.size() == 6);
    CHECK(snapshots[0].layer == "stem");
    CHECK(snapshots[0].epoch == 0);
    CHECK(snapshots[0].weights == net.stem.weights);

    SUBCASE("mutating the network leaves the snapshot untouched") {
        const std::vector<float> before = snapshots[0].weights;
        net.stem.weights[0] += 1.0f;
        CHECK(snapshots[0].weights == before);
    }
    SUBCASE("snapshot at epoch 0 equals initialization") {
        const Network fresh = build_network<float>("res-4-8", 3, 12, 12, 2, 5);
        CHECK(snapshots[0].weights == fresh.stem.weights);
    }
}

TEST_CASE("delta_stats") {
    KernelSnapshot a;
    a.epoch = 0;
    a.layer = "stem";
    a.out_channels = 1;
    a.in_channels = 1;
    a.kernel = 2;
    a.weights = {0.0f, 0.0f, 0.0f, 0.0f};

    SUBCASE("identical snapshots have zero deltas and full saturation") {
        const SaturationReport report = delta_stats(a, a, 1e-7);
        CHECK(report.mean_abs_delta == 0.0);
        CHECK(report.max_abs_delta == 0.0);
        CHECK(report.saturated_fraction == 1.0);
    }
    SUBCASE("all deltas of 1.0 give zero saturation") {
        KernelSnapshot b = a;
        b.epoch = 1;
        b.weights = {1.0f, 1.0f, 1.0f, 1.0f};
        const SaturationReport report = delta_stats(a, b, 1e-7);
        CHECK(report.saturated_fraction == 0.0);
        CHECK(report.mean_abs_delta == doctest::Approx(1.0));
        CHECK(report.max_abs_delta == doctest::Approx(1.0));
    }
    SUBCASE("deltas {0, 0, 1e-8, 1.0} with eps 1e-7 give fraction 0.75") {
        KernelSnapshot b = a;
        b.epoch = 3;
        b.weights = {0.0f, 0.0f, 1e-8f, 1.0f};
        const SaturationReport report = delta_stats(a, b, 1e-7);
        CHECK(report.saturated_fraction == 0.75);
        CHECK(report.epoch_a == 0);
        CHECK(report.epoch_b == 3);
    }
    SUBCASE("symmetric in its arguments") {
        std::mt19937_64 gen(83);
        KernelSnapshot b = a;
        b.epoch = 2;
        for (float& w : b.weights) w = rng::uniform_float(gen, -1.0f, 1.0f);
        const SaturationReport ab = delta_stats(a, b, 1e-3);
        const SaturationReport ba = delta_stats(b, a, 1e-3);
        CHECK(ab.mean_abs_delta == ba.mean_abs_delta);
        CHECK(ab.max_abs_delta == ba.max_abs_delta);
        CHECK(ab.saturated_fraction == ba.saturated_fraction);
    }
    SUBCASE("saturation fraction is monotone in epsilon") {
        std::mt19937_64 gen(89);
        KernelSnapshot big = a;
        big.out_channels = 8;
        big.weights.assign(32, 0.0f);
        KernelSnapshot other = big;
        other.epoch = 1;
        for (float& w : other.weights) w = rng::uniform_float(gen, -1e-4f, 1e-4f);
        double previous = -1.0;
        for (double eps : {1e-9, 1e-7, 1e-5, 1e-3, 1e-1}) {
            const double fraction = delta_stats(big, other, eps).saturated_fraction;
            CHECK(fraction >= previous);
            previous = fraction;
        }
    }
    SUBCASE("mismatches rejected") {
        KernelSnapshot b = a;
        b.layer = "block1.conv1";
        CHECK_THROWS_AS(delta_stats(a, b, 1e-7), std::invalid_argument);
        KernelSnapshot c = a;
        c.weights.push_back(0.0f);
        c.out_channels = 2;
        CHECK_THROWS_AS(delta_stats(a, c, 1e-7), std::invalid_argument);
    }
}

TEST_CASE("snapshot persistence round trip and manifest") {
    test::TempDir dir("snap");
    Network net = build_network<float>("res-4", 3, 8, 8, 2, 3);
    const auto snapshots = snapshot_kernels(net, 12);
    const auto path = dir.path() / "stem.ksnap";
    save_snapshot(snapshots[0], path);
    const KernelSnapshot loaded = load_snapshot(path);
    CHECK(loaded.layer == snapshots[0].layer);
    CHECK(loaded.epoch == 12);
    CHECK(loaded.weights == snapshots[0].weights);

    std::vector<SnapshotManifestEntry> manifest = {{12, "stem", "stem.ksnap"}};
    write_snapshot_manifest(manifest, dir.path() / "manifest.json");
    const auto read_back = read_snapshot_manifest(dir.path() / "manifest.json");
    REQUIRE(read_back.size() == 1);
    CHECK(read_back[0].epoch == 12);
    CHECK(read_back[0].layer == "stem");
    CHECK(read_back[0].file == "stem.ksnap");
}

TEST_CASE("render_kernel_grid") {
    test::TempDir dir("grid");

    SUBCASE("16 3x3 gray kernels tile into a 4x4 grid") {
        KernelSnapshot snapshot;
        snapshot.layer = "stem";
        snapshot.out_channels = 16;
        snapshot.in_channels = 1;
        snapshot.kernel = 3;
        std::mt19937_64 gen(97);
        snapshot.weights.assign(16 * 9, 0.0f);
        for (float& w : snapshot.weights) w = rng::uniform_float(gen, -1.0f, 1.0f);

        const auto path = dir.path() / "grid.pgm";
        render_kernel_grid(snapshot, path);
        const auto bytes = test::slurp(path);
        // 4x4 tiles of 3x3 with 1px separators: 4*3+3 = 15 per side
        const std::string header = "P5\n15 15\n255\n";
        REQUIRE(bytes.size() == header.size() + 15 * 15);
        CHECK(std::equal(header.begin(), header.end(), bytes.begin()));

        SUBCASE("re-render is byte-identical") {
            const auto again = dir.path() / "grid2.pgm";
            render_kernel_grid(snapshot, again);
            CHECK(test::slurp(again) == bytes);
        }
    }
    SUBCASE("constant kernel renders mid-gray 128") {
        KernelSnapshot snapshot;
        snapshot.layer = "stem";
        snapshot.out_channels = 1;
        snapshot.in_channels = 1;
        snapshot.kernel = 2;
        snapshot.weights = {0.5f, 0.5f, 0.5f, 0.5f};
        const auto path = dir.path() / "flat.pgm";
        render_kernel_grid(snapshot, path);
        const auto bytes = test::slurp(path);
        const std::string header = "P5\n2 2\n255\n";
        REQUIRE(bytes.size() == header.size() + 4);
        for (size_t i = header.size(); i < bytes.size(); ++i) {
            CHECK(bytes[i] == 128);
        }
    }
    SUBCASE("rgb kernels produce P6") {
        KernelSnapshot snapshot;
        snapshot.layer = "stem";
        snapshot.out_channels = 2;
        snapshot.in_channels = 3;
        snapshot.kernel = 1;
        snapshot.weights = {0.0f, 0.5f, 1.0f, 1.0f, 0.5f, 0.0f};
        const auto path = dir.path() / "grid.ppm";
        render_kernel_grid(snapshot, path);
        const auto bytes = test::slurp(path);
        const std::string header = "P6\n3 1\n255\n";
        REQUIRE(bytes.size() == header.size() + 9);
        // first kernel normalized across its channels: 0 -> 0, 0.5 -> 128, 1 -> 255
        CHECK(bytes[header.size() + 0] == 0);
        CHECK(bytes[header.size() + 1] == 128);
        CHECK(bytes[header.size() + 2] == 255);
    }
}

TEST_CASE("capture_activation_maps") {
    test::TempDir dir("act");

    SUBCASE("identity stem reproduces the normalized input") {
        // width-1 net whose stem is replaced by a 1x1 identity, so the stem
        // activation equals the (non-negative) input
        Network net = build_network<float>("res-1", 1, 6, 6, 2, 1);
        net.stem = make_conv_layer<float>(1, 1, 1, 1, 0);
        net.stem.weights[0] = 1.0f;

        ImageU8 image(1, 6, 6);
        for (size_t i = 0; i < image.data.size(); ++i) {
            image.data[i] = static_cast<uint8_t>(i * 7 % 256);
        }
        const ImageF32 norm = normalize(image);
        const auto path = dir.path() / "stem.pgm";
        capture_activation_maps(net, norm, "stem", path);

        const auto bytes = test::slurp(path);
        const std::string header = "P5\n6 6\n255\n";
        REQUIRE(bytes.size() == header.size() + 36);
        // expected: min-max normalization of the (non-negative) input values
        float lo = norm.data[0], hi = norm.data[0];
        for (float v : norm.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (size_t i = 0; i < 36; ++i) {
            const auto expected = static_cast<uint8_t>(
                std::lround((norm.data[i] - lo) / (hi - lo) * 255.0));
            CHECK(bytes[header.size() + i] == expected);
        }
    }
    SUBCASE("all-zero weights give a uniform map") {
        Network net = build_network<float>("res-4", 1, 6, 6, 2, 1);
        net.for_each_param([](const std::string&, std::vector<float>& values) {
            std::fill(values.begin(), values.end(), 0.0f);
        });
        ImageU8 image(1, 6, 6);
        for (size_t i = 0; i < image.data.size(); ++i) {
            image.data[i] = static_cast<uint8_t>(i);
        }
        const auto path = dir.path() / "zero.pgm";
        capture_activation_maps(net, normalize(image), "final", path);
        const auto bytes = test::slurp(path);
        bool uniform = true;
        // find pixel payload start (after third newline)
        size_t start = 0;
        for (int newlines = 0; start < bytes.size() && newlines < 3; ++start) {
            if (bytes[start] == '\n') ++newlines;
        }
        for (size_t i = start; i < bytes.size(); ++i) {
            const bool on_separator = bytes[i] == 0;
            if (!on_separator && bytes[i] != 128) uniform = false;
        }
        CHECK(uniform);
    }
    SUBCASE("negated input yields a different map than the original") {
        std::mt19937_64 gen(201);
        Network net = build_network<float>("res-8", 3, 8, 8, 2, 303);
        const ImageU8 image = test::random_varied_image(gen, 3, 8, 8);
        capture_activation_maps(net, normalize(image), "final", dir.path() / "orig.pgm");
        capture_activation_maps(net, normalize(negate_image(image)), "final",
                                dir.path() / "neg.pgm");
        CHECK(test::slurp(dir.path() / "orig.pgm") != test::slurp(dir.path() / "neg.pgm"));
    }
    SUBCASE("invalid selector rejected") {
        Network net = build_network<float>("res-4", 1, 6, 6, 2, 1);
        ImageU8 image(1, 6, 6);
        CHECK_THROWS_WITH_AS(
            capture_activation_maps(net, normalize(image), "block9", dir.path() / "x.pgm"),
            doctest::Contains("invalid layer selector"), std::invalid_argument);
    }
}
