#include <algorithm>
#include <fstream>
#include <set>

#include "doctest.h"
#include "kernsat/loaders.hpp"
#include "test_support.hpp"

using namespace kernsat;

TEST_CASE("normalize maps 0..255 onto [0,1] and rounds back exactly") {
    ImageU8 image(1, 16, 16);
    for (size_t i = 0; i < 256; ++i) image.data[i] = static_cast<uint8_t>(i);
    const ImageF32 norm = normalize(image);
    CHECK(norm.data[0] == 0.0f);
    CHECK(norm.data[255] == 1.0f);
    CHECK(norm.data[51] == doctest::Approx(0.2f).epsilon(1e-6));
    for (size_t i = 0; i < 256; ++i) {
        CHECK(norm.data[i] >= 0.0f);
        CHECK(norm.data[i] <= 1.0f);
        CHECK(std::lround(norm.data[i] * 255.0f) == static_cast<long>(image.data[i]));
    }
}

TEST_CASE("mnist idx round trip and header validation") {
    test::TempDir dir("mnist");
    std::mt19937_64 gen(7);
    LabeledDataset dataset = test::random_dataset(gen, 23, 1, 28, 28, 10);
    const auto images = dir.path() / "train-images-idx3-ubyte";
    const auto labels = dir.path() / "train-labels-idx1-ubyte";
    write_mnist(dataset, images, labels);

    const LabeledDataset loaded = load_mnist(images, labels);
    REQUIRE(loaded.size() == dataset.size());
    CHECK(loaded.images[0].height == 28);
    CHECK(loaded.images[0].width == 28);
    CHECK(loaded.images[0].channels == 1);
    for (size_t i = 0; i < dataset.size(); ++i) {
        CHECK(loaded.images[i].data == dataset.images[i].data);
        CHECK(loaded.labels[i] == dataset.labels[i]);
        CHECK(loaded.provenance[i] == Provenance::Original);
    }

    SUBCASE("bad magic rejected") {
        auto bytes = test::slurp(images);
        bytes[3] = 0x07;  // corrupt the IDX3 magic
        std::ofstream(images, std::ios::binary)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_mnist(images, labels),
                             doctest::Contains("bad magic"), std::runtime_error);
    }
    SUBCASE("count mismatch rejected") {
        auto bytes = test::slurp(labels);
        bytes[7] = static_cast<uint8_t>(dataset.size() + 1);
        std::ofstream(labels, std::ios::binary)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_mnist(images, labels),
                             doctest::Contains("count mismatch"), std::runtime_error);
    }
    SUBCASE("truncated image file rejected") {
        auto bytes = test::slurp(images);
        bytes.resize(bytes.size() - 10);
        std::ofstream(images, std::ios::binary | std::ios::trunc)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_mnist(images, labels),
                             doctest::Contains("truncated"), std::runtime_error);
    }
}

TEST_CASE("cifar10 record round trip is bit-identical") {
    test::TempDir dir("cifar");
    std::mt19937_64 gen(11);
    LabeledDataset dataset = test::random_dataset(gen, 57, 3, 32, 32, 10);
    write_cifar10(dataset, dir.path(), DatasetSplit::Train);
    write_cifar10(dataset, dir.path(), DatasetSplit::Test);

    for (DatasetSplit split : {DatasetSplit::Train, DatasetSplit::Test}) {
        const LabeledDataset loaded = load_cifar10(dir.path(), split);
        REQUIRE(loaded.size() == dataset.size());
        for (size_t i = 0; i < dataset.size(); ++i) {
            CHECK(loaded.images[i].data == dataset.images[i].data);
            CHECK(loaded.labels[i] == dataset.labels[i]);
        }
    }

    SUBCASE("file size not a multiple of 3073 rejected") {
        std::ofstream out(dir.path() / "test_batch.bin", std::ios::binary | std::ios::app);
        out.put('\0');
        out.close();
        CHECK_THROWS_WITH_AS(load_cifar10(dir.path(), DatasetSplit::Test),
                             doctest::Contains("multiple of 3073"), std::runtime_error);
    }
    SUBCASE("label byte over 9 rejected") {
        auto bytes = test::slurp(dir.path() / "test_batch.bin");
        bytes[0] = 10;
        std::ofstream(dir.path() / "test_batch.bin", std::ios::binary | std::ios::trunc)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_cifar10(dir.path(), DatasetSplit::Test),
                             doctest::Contains("label byte"), std::runtime_error);
    }
    SUBCASE("missing directory rejected") {
        CHECK_THROWS_AS(load_cifar10(dir.path() / "nowhere", DatasetSplit::Train),
                        std::runtime_error);
    }
}

TEST_CASE("stl10 transpose and label mapping") {
    test::TempDir dir("stl");
    std::mt19937_64 gen(13);
    LabeledDataset dataset = test::random_dataset(gen, 5, 3, 96, 96, 10);
    write_stl10(dataset, dir.path(), DatasetSplit::Train);

    const LabeledDataset loaded = load_stl10(dir.path(), DatasetSplit::Train);
    REQUIRE(loaded.size() == dataset.size());
    for (size_t i = 0; i < dataset.size(); ++i) {
        CHECK(loaded.images[i].data == dataset.images[i].data);
        CHECK(loaded.labels[i] == dataset.labels[i]);
    }

    SUBCASE("column-major source pixel lands at transposed internal index") {
        // Source (row 0, col 1) of channel 0 sits at file offset 96 within
        // the record; internally it must be data[width*0 + 1].
        const auto bytes = test::slurp(dir.path() / "train_X.bin");
        CHECK(loaded.images[0].data[1] == bytes[96]);
        CHECK(loaded.images[0].at(0, 0, 1) == bytes[96]);
    }
    SUBCASE("label outside 1..10 rejected") {
        auto bytes = test::slurp(dir.path() / "train_y.bin");
        bytes[0] = 11;
        std::ofstream(dir.path() / "train_y.bin", std::ios::binary | std::ios::trunc)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_stl10(dir.path(), DatasetSplit::Train),
                             doctest::Contains("outside 1..10"), std::runtime_error);
    }
    SUBCASE("missing label file rejected") {
        std::filesystem::remove(dir.path() / "train_y.bin");
        CHECK_THROWS_WITH_AS(load_stl10(dir.path(), DatasetSplit::Train),
                             doctest::Contains("missing label file"), std::runtime_error);
    }
    SUBCASE("bad image file size rejected") {
        std::ofstream out(dir.path() / "train_X.bin", std::ios::binary | std::ios::app);
        out.put('\0');
        out.close();
        CHECK_THROWS_WITH_AS(load_stl10(dir.path(), DatasetSplit::Train),
                             doctest::Contains("multiple of 27648"), std::runtime_error);
    }
}

TEST_CASE("split is a deterministic partition") {
    std::mt19937_64 gen(17);
    LabeledDataset dataset = test::random_dataset(gen, 10, 1, 4, 4, 3);

    const auto [train_a, val_a] = split(dataset, SplitSpec{0.8, 42});
    const auto [train_b, val_b] = split(dataset, SplitSpec{0.8, 42});
    CHECK(train_a.size() == 8);
    CHECK(val_a.size() == 2);

    // Identical on repeat.
    for (size_t i = 0; i < train_a.size(); ++i) {
        CHECK(train_a.images[i].data == train_b.images[i].data);
        CHECK(train_a.labels[i] == train_b.labels[i]);
    }

    // Partition: multiset of (content hash, label) preserved.
    auto hashes = [](const LabeledDataset& d) {
        std::vector<std::pair<uint64_t, int32_t>> out;
        for (size_t i = 0; i < d.size(); ++i) {
            out.emplace_back(content_hash(d.images[i]), d.labels[i]);
        }
        std::sort(out.begin(), out.end());
        return out;
    };
    auto combined = hashes(train_a);
    auto val_hashes = hashes(val_a);
    combined.insert(combined.end(), val_hashes.begin(), val_hashes.end());
    std::sort(combined.begin(), combined.end());
    CHECK(combined == hashes(dataset));

    // Different seed: same sizes, (almost surely) different membership.
    const auto [train_c, val_c] = split(dataset, SplitSpec{0.8, 43});
    CHECK(train_c.size() == 8);
    bool any_difference = false;
    for (size_t i = 0; i < train_a.size(); ++i) {
        if (train_a.images[i].data != train_c.images[i].data) any_difference = true;
    }
    CHECK(any_difference);

    CHECK_THROWS_AS(split(LabeledDataset{}, SplitSpec{0.8, 0}), std::invalid_argument);
    CHECK_THROWS_AS(split(dataset, SplitSpec{1.5, 0}), std::invalid_argument);
}

TEST_CASE("split of 50000 at 0.8 gives 40000/10000") {
    // Shape-only check, tiny images to keep it cheap.
    std::mt19937_64 gen(19);
    LabeledDataset dataset = test::random_dataset(gen, 50000, 1, 1, 1, 10);
    const auto [train, val] = split(dataset, SplitSpec{0.8, 0});
    CHECK(train.size() == 40000);
    CHECK(val.size() == 10000);
}

TEST_CASE("batches cover the dataset exactly once") {
    std::mt19937_64 gen(23);
    LabeledDataset dataset = test::random_dataset(gen, 300, 1, 3, 3, 4);

    SUBCASE("batch sizes 128,128,44 and exact cover") {
        BatchStream stream(dataset, 128, 5, true);
        std::vector<size_t> sizes;
        std::set<size_t> seen;
        while (auto batch = stream.next()) {
            sizes.push_back(batch->size());
            for (size_t idx : batch->indices) {
                CHECK(seen.insert(idx).second);  // no duplicates
            }
        }
        CHECK(sizes == std::vector<size_t>{128, 128, 44});
        CHECK(seen.size() == dataset.size());
    }
    SUBCASE("shuffle off preserves dataset order") {
        BatchStream stream(dataset, 7, 99, false);
        size_t expected = 0;
        while (auto batch = stream.next()) {
            for (size_t idx : batch->indices) {
                CHECK(idx == expected++);
            }
        }
        CHECK(expected == dataset.size());
    }
    SUBCASE("same seed twice gives identical batch order") {
        BatchStream a(dataset, 32, 1234, true);
        BatchStream b(dataset, 32, 1234, true);
        while (true) {
            auto batch_a = a.next();
            auto batch_b = b.next();
            CHECK(batch_a.has_value() == batch_b.has_value());
            if (!batch_a) break;
            CHECK(batch_a->indices == batch_b->indices);
        }
    }
    SUBCASE("batch_size 0 rejected") {
        CHECK_THROWS_AS(BatchStream(dataset, 0, 0, true), std::invalid_argument);
    }
}
