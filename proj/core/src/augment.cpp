#include "kernsat/augment.hpp"

#include <stdexcept>

namespace kernsat {

std::string to_string(AugmentationMode mode) {
    switch (mode) {
        case AugmentationMode::Standard: return "standard";
        case AugmentationMode::Supplemented: return "supplemented";
        case AugmentationMode::NegativesOnly: return "negatives_only";
    }
    throw std::logic_error("unreachable AugmentationMode");
}

AugmentationMode augmentation_mode_from_string(const std::string& name) {
    if (name == "standard") return AugmentationMode::Standard;
    if (name == "supplemented") return AugmentationMode::Supplemented;
    if (name == "negatives_only") return AugmentationMode::NegativesOnly;
    throw std::invalid_argument("unknown augmentation mode '" + name +
                                "' (expected standard|supplemented|negatives_only)");
}

ImageU8 negate_image(const ImageU8& image) {
    ImageU8 out = image;
    for (uint8_t& v : out.data) {
        v = static_cast<uint8_t>(~v);
    }
    return out;
}

LabeledDataset build_training_set(const LabeledDataset& dataset, AugmentationMode mode) {
    LabeledDataset out;
    out.num_classes = dataset.num_classes;
    if (mode == AugmentationMode::Standard || mode == AugmentationMode::Supplemented) {
        out.images = dataset.images;
        out.labels = dataset.labels;
        out.provenance = dataset.provenance;
    }
    if (mode == AugmentationMode::Supplemented || mode == AugmentationMode::NegativesOnly) {
        out.images.reserve(out.size() + dataset.size());
        for (size_t i = 0; i < dataset.size(); ++i) {
            out.push_back(negate_image(dataset.images[i]), dataset.labels[i], Provenance::Negative);
        }
    }
    return out;
}

}  // namespace kernsat
