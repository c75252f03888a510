#pragma once

#include <string>

#include "kernsat/dataset.hpp"

namespace kernsat {

// The three training regimes: the source dataset as-is, the source followed
// by a negative of every image, or the negatives alone.
enum class AugmentationMode { Standard, Supplemented, NegativesOnly };

std::string to_string(AugmentationMode mode);
AugmentationMode augmentation_mode_from_string(const std::string& name);

// Bitwise NOT of every 8-bit value (equivalently 255 - v), per channel.
// Shape unchanged. An involution: negate(negate(img)) == img.
ImageU8 negate_image(const ImageU8& image);

// Standard       -> identity copy.
// Supplemented   -> originals followed by their negatives; each negative
//                   keeps its source label and carries Provenance::Negative.
// NegativesOnly  -> the negatives alone.
// Presentation order during training comes from the epoch shuffle, not from
// this ordering.
LabeledDataset build_training_set(const LabeledDataset& dataset, AugmentationMode mode);

}  // namespace kernsat
