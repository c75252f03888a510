#include "doctest.h"
#include "kernsat/augment.hpp"
#include "kernsat/checkpoint.hpp"
#include "kernsat/train.hpp"
#include "test_support.hpp"

using namespace kernsat;

TEST_CASE("training on separable blobs strictly decreases the loss") {
    const LabeledDataset blobs = test::make_blob_dataset(240, 777);
    const auto [train_set, val_set] = split(blobs, SplitSpec{0.8, 1});

    Network net = build_network<float>("res-8", 1, 10, 10, 2, 42);
    TrainConfig config;
    config.epochs = 6;
    config.batch_size = 32;
    config.seed = 7;
    config.learning_rate = 0.003f;

    const auto records = train(net, train_set, val_set, config);
    REQUIRE(records.size() == 6);
    for (int e = 1; e < 5; ++e) {
        CHECK(records[e].train_loss < records[e - 1].train_loss);
    }
    // learns the toy problem comfortably above the 50% chance level
    CHECK(records.back().val_accuracy > 80.0);
}

TEST_CASE("training is bit-reproducible under a fixed seed") {
    const LabeledDataset blobs = test::make_blob_dataset(96, 999);
    const auto [train_set, val_set] = split(blobs, SplitSpec{0.8, 3});

    auto run_once = [&]() {
        Network net = build_network<float>("res-4-8", 1, 10, 10, 2, 11);
        TrainConfig config;
        config.epochs = 3;
        config.batch_size = 16;
        config.seed = 21;
        config.learning_rate = 0.003f;
        const auto records = train(net, train_set, val_set, config);
        std::vector<float> weights;
        net.for_each_param([&weights](const std::string&, std::vector<float>& values) {
            weights.insert(weights.end(), values.begin(), values.end());
        });
        return std::make_pair(records, weights);
    };

    const auto [records_a, weights_a] = run_once();
    const auto [records_b, weights_b] = run_once();
    REQUIRE(records_a.size() == records_b.size());
    for (size_t i = 0; i < records_a.size(); ++i) {
        CHECK(records_a[i].train_loss == records_b[i].train_loss);  // bitwise
        CHECK(records_a[i].val_loss == records_b[i].val_loss);
        CHECK(records_a[i].val_accuracy == records_b[i].val_accuracy);
    }
    CHECK(weights_a == weights_b);
}

TEST_CASE("epoch hook fires every epoch with the current network") {
    const LabeledDataset blobs = test::make_blob_dataset(48, 5);
    const auto [train_set, val_set] = split(blobs, SplitSpec{0.8, 3});
    Network net = build_network<float>("res-4", 1, 10, 10, 2, 1);
    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 16;
    std::vector<int> seen;
    config.epoch_hook = [&seen](int epoch, const Network&, const LossRecord& record) {
        CHECK(record.epoch == epoch);
        seen.push_back(epoch);
    };
    train(net, train_set, val_set, config);
    CHECK(seen == std::vector<int>{1, 2, 3});
}

TEST_CASE("evaluate") {
    SUBCASE("zeroed head gives uniform logits and chance accuracy on a balanced set") {
        LabeledDataset balanced;
        balanced.num_classes = 4;
        std::mt19937_64 gen(51);
        for (int i = 0; i < 400; ++i) {
            balanced.push_back(test::random_image(gen, 1, 6, 6), i % 4);
        }
        Network net = build_network<float>("res-4", 1, 6, 6, 4, 9);
        std::fill(net.head.weights.begin(), net.head.weights.end(), 0.0f);
        std::fill(net.head.bias.begin(), net.head.bias.end(), 0.0f);
        // argmax of identical logits is class 0, which holds exactly 1/4 of
        // the labels, i.e. chance level for 4 classes.
        CHECK(evaluate(net, balanced) == doctest::Approx(25.0));
    }
    SUBCASE("memorizable toy set reaches 100%") {
        const LabeledDataset blobs = test::make_blob_dataset(64, 13);
        Network net = build_network<float>("res-8", 1, 10, 10, 2, 4);
        TrainConfig config;
        config.epochs = 12;
        config.batch_size = 16;
        config.learning_rate = 0.005f;
        config.seed = 2;
        train(net, blobs, blobs, config);
        CHECK(evaluate(net, blobs) == doctest::Approx(100.0));
    }
    SUBCASE("accuracy is invariant under test-set permutation") {
        const LabeledDataset blobs = test::make_blob_dataset(50, 29);
        Network net = build_network<float>("res-4", 1, 10, 10, 2, 3);
        const double base = evaluate(net, blobs);
        LabeledDataset permuted;
        permuted.num_classes = blobs.num_classes;
        for (size_t i = blobs.size(); i-- > 0;) {
            permuted.push_back(blobs.images[i], blobs.labels[i], blobs.provenance[i]);
        }
        CHECK(evaluate(net, permuted) == doctest::Approx(base));
    }
    SUBCASE("negative provenance in the test set is rejected") {
        LabeledDataset blobs = test::make_blob_dataset(10, 31);
        const LabeledDataset negatives = build_training_set(blobs, AugmentationMode::NegativesOnly);
        Network net = build_network<float>("res-4", 1, 10, 10, 2, 3);
        CHECK_THROWS_WITH_AS(evaluate(net, negatives), doctest::Contains("original test set"),
                             std::invalid_argument);
    }
    SUBCASE("empty test set rejected") {
        Network net = build_network<float>("res-4", 1, 10, 10, 2, 3);
        CHECK_THROWS_AS(evaluate(net, LabeledDataset{}), std::invalid_argument);
    }
}

TEST_CASE("a negated input produces a different stem activation pattern") {
    std::mt19937_64 gen(61);
    const Network net = build_network<float>("res-8", 3, 8, 8, 2, 77);
    const ImageU8 image = test::random_varied_image(gen, 3, 8, 8);

    auto stem_activations = [&net](const ImageU8& img) {
        const ImageF32 norm = normalize(img);
        Tensor4 input(1, norm.channels, norm.height, norm.width);
        input.data = norm.data;
        NetworkCacheT<float> cache;
        network_forward(net, input, &cache);
        return cache.stem_act.data;
    };

    CHECK(stem_activations(image) != stem_activations(negate_image(image)));
}

TEST_CASE("checkpoint round trip restores the network exactly") {
    test::TempDir dir("ckpt");
    Network net = build_network<float>("res-4-8", 3, 12, 12, 5, 404);
    const auto path = dir.path() / "model.ksnet";
    save_checkpoint(net, path, 17, 909);

    const Checkpoint restored = load_checkpoint(path);
    CHECK(restored.epoch == 17);
    CHECK(restored.seed == 909);
    CHECK(restored.network.descriptor == "res-4-8");
    CHECK(restored.network.stem.weights == net.stem.weights);
    CHECK(restored.network.head.weights == net.head.weights);
    CHECK(restored.network.blocks[1].projection->weights ==
          net.blocks[1].projection->weights);

    SUBCASE("and the restored network computes identical outputs") {
        std::mt19937_64 gen(71);
        const ImageU8 image = test::random_image(gen, 3, 12, 12);
        const ImageF32 norm = normalize(image);
        Tensor4 input(1, 3, 12, 12);
        input.data = norm.data;
        const Tensor4 a = network_forward(net, input);
        const Tensor4 b = network_forward(restored.network, input);
        CHECK(a.data == b.data);
    }
    SUBCASE("corrupted magic rejected") {
        auto bytes = test::slurp(path);
        bytes[0] = 'X';
        std::ofstream(path, std::ios::binary | std::ios::trunc)
            .write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"),
                             std::runtime_error);
    }
}
