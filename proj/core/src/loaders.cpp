#include "kernsat/loaders.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace fs = std::filesystem;

namespace kernsat {
namespace {

constexpr uint32_t kIdxImageMagic = 0x00000803;
constexpr uint32_t kIdxLabelMagic = 0x00000801;
constexpr size_t kCifarRecordBytes = 3073;
constexpr int kStlSide = 96;
constexpr size_t kStlImageBytes = 3 * kStlSide * kStlSide;  // 27648

std::vector<uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<uint8_t> bytes(static_cast<size_t>(size));
    if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
        throw std::runtime_error("failed to read " + path.string());
    }
    return bytes;
}

void write_file(const fs::path& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("failed to write " + path.string());
    }
}

uint32_t read_be_u32(const std::vector<uint8_t>& bytes, size_t offset, const fs::path& path) {
    if (offset + 4 > bytes.size()) {
        throw std::runtime_error("truncated file: " + path.string());
    }
    return (uint32_t(bytes[offset]) << 24) | (uint32_t(bytes[offset + 1]) << 16) |
           (uint32_t(bytes[offset + 2]) << 8) | uint32_t(bytes[offset + 3]);
}

void append_be_u32(std::vector<uint8_t>& bytes, uint32_t v) {
    bytes.push_back(static_cast<uint8_t>(v >> 24));
    bytes.push_back(static_cast<uint8_t>(v >> 16));
    bytes.push_back(static_cast<uint8_t>(v >> 8));
    bytes.push_back(static_cast<uint8_t>(v));
}

}  // namespace

LabeledDataset load_mnist(const fs::path& image_path, const fs::path& label_path) {
    const std::vector<uint8_t> image_bytes = read_file(image_path);
    const std::vector<uint8_t> label_bytes = read_file(label_path);

    const uint32_t image_magic = read_be_u32(image_bytes, 0, image_path);
    if (image_magic != kIdxImageMagic) {
        throw std::runtime_error("bad magic number in " + image_path.string() +
                                 " (expected IDX3 0x00000803)");
    }
    const uint32_t label_magic = read_be_u32(label_bytes, 0, label_path);
    if (label_magic != kIdxLabelMagic) {
        throw std::runtime_error("bad magic number in " + label_path.string() +
                                 " (expected IDX1 0x00000801)");
    }

    const uint32_t n_images = read_be_u32(image_bytes, 4, image_path);
    const uint32_t rows = read_be_u32(image_bytes, 8, image_path);
    const uint32_t cols = read_be_u32(image_bytes, 12, image_path);
    const uint32_t n_labels = read_be_u32(label_bytes, 4, label_path);

    if (n_images != n_labels) {
        throw std::runtime_error("image/label count mismatch: " + std::to_string(n_images) +
                                 " images vs " + std::to_string(n_labels) + " labels");
    }
    const size_t plane = static_cast<size_t>(rows) * cols;
    if (image_bytes.size() != 16 + static_cast<size_t>(n_images) * plane) {
        throw std::runtime_error("truncated image file: " + image_path.string());
    }
    if (label_bytes.size() != 8 + static_cast<size_t>(n_labels)) {
        throw std::runtime_error("truncated label file: " + label_path.string());
    }

    LabeledDataset dataset;
    dataset.num_classes = 10;
    dataset.images.reserve(n_images);
    for (uint32_t i = 0; i < n_images; ++i) {
        ImageU8 image(1, static_cast<int>(rows), static_cast<int>(cols));
        std::memcpy(image.data.data(), image_bytes.data() + 16 + static_cast<size_t>(i) * plane, plane);
        const uint8_t label = label_bytes[8 + i];
        if (label > 9) {
            throw std::runtime_error("label byte " + std::to_string(label) + " > 9 at record " +
                                     std::to_string(i) + " in " + label_path.string());
        }
        dataset.push_back(std::move(image), label);
    }
    return dataset;
}

void write_mnist(const LabeledDataset& dataset, const fs::path& image_path,
                 const fs::path& label_path) {
    if (dataset.empty()) {
        throw std::invalid_argument("write_mnist: empty dataset");
    }
    const int rows = dataset.images[0].height;
    const int cols = dataset.images[0].width;

    std::vector<uint8_t> image_bytes;
    image_bytes.reserve(16 + dataset.size() * dataset.images[0].pixel_count());
    append_be_u32(image_bytes, kIdxImageMagic);
    append_be_u32(image_bytes, static_cast<uint32_t>(dataset.size()));
    append_be_u32(image_bytes, static_cast<uint32_t>(rows));
    append_be_u32(image_bytes, static_cast<uint32_t>(cols));

    std::vector<uint8_t> label_bytes;
    append_be_u32(label_bytes, kIdxLabelMagic);
    append_be_u32(label_bytes, static_cast<uint32_t>(dataset.size()));

    for (size_t i = 0; i < dataset.size(); ++i) {
        const ImageU8& image = dataset.images[i];
        if (image.channels != 1 || image.height != rows || image.width != cols) {
            throw std::invalid_argument("write_mnist: inconsistent image shape at index " +
                                        std::to_string(i));
        }
        image_bytes.insert(image_bytes.end(), image.data.begin(), image.data.end());
        label_bytes.push_back(static_cast<uint8_t>(dataset.labels[i]));
    }
    write_file(image_path, image_bytes);
    write_file(label_path, label_bytes);
}

namespace {

void load_cifar_file(const fs::path& path, LabeledDataset& dataset) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (bytes.size() % kCifarRecordBytes != 0) {
        throw std::runtime_error("file size " + std::to_string(bytes.size()) +
                                 " of " + path.string() + " is not a multiple of 3073");
    }
    const size_t n = bytes.size() / kCifarRecordBytes;
    for (size_t i = 0; i < n; ++i) {
        const uint8_t* record = bytes.data() + i * kCifarRecordBytes;
        if (record[0] > 9) {
            throw std::runtime_error("label byte " + std::to_string(record[0]) +
                                     " > 9 at record " + std::to_string(i) + " in " + path.string());
        }
        ImageU8 image(3, 32, 32);
        std::memcpy(image.data.data(), record + 1, 3072);
        dataset.push_back(std::move(image), record[0]);
    }
}

}  // namespace

LabeledDataset load_cifar10(const fs::path& directory, DatasetSplit split) {
    LabeledDataset dataset;
    dataset.num_classes = 10;
    if (split == DatasetSplit::Test) {
        load_cifar_file(directory / "test_batch.bin", dataset);
        return dataset;
    }
    int batch = 1;
    while (fs::exists(directory / ("data_batch_" + std::to_string(batch) + ".bin"))) {
        load_cifar_file(directory / ("data_batch_" + std::to_string(batch) + ".bin"), dataset);
        ++batch;
    }
    if (batch == 1) {
        throw std::runtime_error("no data_batch_1.bin under " + directory.string());
    }
    return dataset;
}

void write_cifar10(const LabeledDataset& dataset, const fs::path& directory, DatasetSplit split) {
    fs::create_directories(directory);
    auto encode = [&dataset](size_t begin, size_t end) {
        std::vector<uint8_t> bytes;
        bytes.reserve((end - begin) * kCifarRecordBytes);
        for (size_t i = begin; i < end; ++i) {
            const ImageU8& image = dataset.images[i];
            if (image.channels != 3 || image.height != 32 || image.width != 32) {
                throw std::invalid_argument("write_cifar10: image at index " + std::to_string(i) +
                                            " is not 3x32x32");
            }
            bytes.push_back(static_cast<uint8_t>(dataset.labels[i]));
            bytes.insert(bytes.end(), image.data.begin(), image.data.end());
        }
        return bytes;
    };

    if (split == DatasetSplit::Test) {
        write_file(directory / "test_batch.bin", encode(0, dataset.size()));
        return;
    }
    // Official chunking: 10000 records per batch file, as many files as needed.
    constexpr size_t kPerFile = 10000;
    size_t offset = 0;
    int batch = 1;
    do {
        const size_t end = std::min(offset + kPerFile, dataset.size());
        write_file(directory / ("data_batch_" + std::to_string(batch) + ".bin"),
                   encode(offset, end));
        offset = end;
        ++batch;
    } while (offset < dataset.size());
}

LabeledDataset load_stl10(const fs::path& directory, DatasetSplit split) {
    const std::string stem = (split == DatasetSplit::Train) ? "train" : "test";
    const fs::path image_path = directory / (stem + "_X.bin");
    const fs::path label_path = directory / (stem + "_y.bin");
    if (!fs::exists(label_path)) {
        throw std::runtime_error("missing label file " + label_path.string());
    }

    const std::vector<uint8_t> image_bytes = read_file(image_path);
    const std::vector<uint8_t> label_bytes = read_file(label_path);
    if (image_bytes.size() % kStlImageBytes != 0) {
        throw std::runtime_error("file size " + std::to_string(image_bytes.size()) + " of " +
                                 image_path.string() + " is not a multiple of 27648");
    }
    const size_t n = image_bytes.size() / kStlImageBytes;
    if (label_bytes.size() != n) {
        throw std::runtime_error("image/label count mismatch: " + std::to_string(n) +
                                 " images vs " + std::to_string(label_bytes.size()) + " labels");
    }

    LabeledDataset dataset;
    dataset.num_classes = 10;
    dataset.images.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const uint8_t* src = image_bytes.data() + i * kStlImageBytes;
        ImageU8 image(3, kStlSide, kStlSide);
        // File stores each channel column-major: src[c][x*96 + y] -> image(c, y, x).
        for (int c = 0; c < 3; ++c) {
            const uint8_t* plane = src + static_cast<size_t>(c) * kStlSide * kStlSide;
            for (int x = 0; x < kStlSide; ++x) {
                for (int y = 0; y < kStlSide; ++y) {
                    image.at(c, y, x) = plane[static_cast<size_t>(x) * kStlSide + y];
                }
            }
        }
        const uint8_t raw_label = label_bytes[i];
        if (raw_label < 1 || raw_label > 10) {
            throw std::runtime_error("label value " + std::to_string(raw_label) +
                                     " outside 1..10 at record " + std::to_string(i) + " in " +
                                     label_path.string());
        }
        dataset.push_back(std::move(image), raw_label - 1);
    }
    return dataset;
}

void write_stl10(const LabeledDataset& dataset, const fs::path& directory, DatasetSplit split) {
    fs::create_directories(directory);
    const std::string stem = (split == DatasetSplit::Train) ? "train" : "test";

    std::vector<uint8_t> image_bytes;
    image_bytes.reserve(dataset.size() * kStlImageBytes);
    std::vector<uint8_t> label_bytes;
    label_bytes.reserve(dataset.size());

    for (size_t i = 0; i < dataset.size(); ++i) {
        const ImageU8& image = dataset.images[i];
        if (image.channels != 3 || image.height != kStlSide || image.width != kStlSide) {
            throw std::invalid_argument("write_stl10: image at index " + std::to_string(i) +
                                        " is not 3x96x96");
        }
        for (int c = 0; c < 3; ++c) {
            for (int x = 0; x < kStlSide; ++x) {
                for (int y = 0; y < kStlSide; ++y) {
                    image_bytes.push_back(image.at(c, y, x));
                }
            }
        }
        label_bytes.push_back(static_cast<uint8_t>(dataset.labels[i] + 1));
    }
    write_file(directory / (stem + "_X.bin"), image_bytes);
    write_file(directory / (stem + "_y.bin"), label_bytes);
}

LabeledDataset load_dataset(const std::string& name, const fs::path& root, DatasetSplit split) {
    if (name == "mnist") {
        const fs::path dir = root / "mnist";
        if (split == DatasetSplit::Train) {
            return load_mnist(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
        }
        return load_mnist(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    }
    if (name == "cifar10") {
        return load_cifar10(root / "cifar-10-batches-bin", split);
    }
    if (name == "stl10") {
        return load_stl10(root / "stl10_binary", split);
    }
    throw std::invalid_argument("unknown dataset '" + name + "' (expected mnist|cifar10|stl10)");
}

void write_dataset(const LabeledDataset& dataset, const std::string& name,
                   const fs::path& directory, DatasetSplit split) {
    if (name == "mnist") {
        fs::create_directories(directory);
        if (split == DatasetSplit::Train) {
            write_mnist(dataset, directory / "train-images-idx3-ubyte",
                        directory / "train-labels-idx1-ubyte");
        } else {
            write_mnist(dataset, directory / "t10k-images-idx3-ubyte",
                        directory / "t10k-labels-idx1-ubyte");
        }
        return;
    }
    if (name == "cifar10") {
        write_cifar10(dataset, directory, split);
        return;
    }
    if (name == "stl10") {
        write_stl10(dataset, directory, split);
        return;
    }
    throw std::invalid_argument("unknown dataset '" + name + "' (expected mnist|cifar10|stl10)");
}

bool dataset_present(const std::string& name, const fs::path& root) {
    if (name == "mnist") {
        const fs::path dir = root / "mnist";
        return fs::exists(dir / "train-images-idx3-ubyte") &&
               fs::exists(dir / "train-labels-idx1-ubyte") &&
               fs::exists(dir / "t10k-images-idx3-ubyte") &&
               fs::exists(dir / "t10k-labels-idx1-ubyte");
    }
    if (name == "cifar10") {
        const fs::path dir = root / "cifar-10-batches-bin";
        return fs::exists(dir / "data_batch_1.bin") && fs::exists(dir / "test_batch.bin");
    }
    if (name == "stl10") {
        const fs::path dir = root / "stl10_binary";
        return fs::exists(dir / "train_X.bin") && fs::exists(dir / "train_y.bin") &&
               fs::exists(dir / "test_X.bin") && fs::exists(dir / "test_y.bin");
    }
    return false;
}

}  // namespace kernsat
