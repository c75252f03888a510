#pragma once

#include <filesystem>
#include <string>

#include "kernsat/dataset.hpp"

namespace kernsat {

enum class DatasetSplit { Train, Test };

// ---------------------------------------------------------------------------
// MNIST, IDX format (all integers big-endian):
//   images: magic 0x00000803 | count | rows | cols | count*rows*cols uint8
//   labels: magic 0x00000801 | count | count uint8
// Errors: bad magic, truncated file, image/label count mismatch.
// ---------------------------------------------------------------------------
LabeledDataset load_mnist(const std::filesystem::path& image_path,
                          const std::filesystem::path& label_path);
void write_mnist(const LabeledDataset& dataset,
                 const std::filesystem::path& image_path,
                 const std::filesystem::path& label_path);

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches: records of 3073 bytes, 1 label byte (0-9) then
// 3072 pixel bytes in channel-major R,G,B order, row-major within a channel.
// Train split reads data_batch_<i>.bin for consecutive i starting at 1
// (official layout has 5); test split reads test_batch.bin.
// Errors: file size not a multiple of 3073, label byte > 9.
// ---------------------------------------------------------------------------
LabeledDataset load_cifar10(const std::filesystem::path& directory, DatasetSplit split);
void write_cifar10(const LabeledDataset& dataset,
                   const std::filesystem::path& directory, DatasetSplit split);

// ---------------------------------------------------------------------------
// STL-10 binary: train_X.bin/train_y.bin (or test_*). Each image is
// 3*96*96 = 27648 bytes, channel-major, COLUMN-major within a channel;
// pixels are transposed into the internal row-major layout at load time.
// Label bytes are 1..10 in the published files and are mapped to 0..9.
// Errors: image file size not a multiple of 27648, missing label file,
// label byte outside 1..10, image/label count mismatch.
// ---------------------------------------------------------------------------
LabeledDataset load_stl10(const std::filesystem::path& directory, DatasetSplit split);
void write_stl10(const LabeledDataset& dataset,
                 const std::filesystem::path& directory, DatasetSplit split);

// Dispatch by dataset name ("mnist" | "cifar10" | "stl10") using the official
// archive layout under a root directory:
//   <root>/mnist/train-images-idx3-ubyte ...
//   <root>/cifar-10-batches-bin/data_batch_1.bin ...
//   <root>/stl10_binary/train_X.bin ...
LabeledDataset load_dataset(const std::string& name,
                            const std::filesystem::path& root, DatasetSplit split);

// Write `dataset` in `name`'s source binary record format (used by the
// `augment` subcommand). The output directory gets the same file names the
// loader expects, so written sets can be re-loaded.
void write_dataset(const LabeledDataset& dataset, const std::string& name,
                   const std::filesystem::path& directory, DatasetSplit split);

// True when the files load_dataset() would read are all present.
bool dataset_present(const std::string& name, const std::filesystem::path& root);

}  // namespace kernsat
