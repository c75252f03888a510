#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernsat/dataset.hpp"

namespace kernsat {

// Thrown instead of returning an infinite SNR when the signal has zero
// standard deviation (constant image / constant dataset).
struct DegenerateSignalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// How dataset-level SNR is pooled. PerImageMean averages per-image SNRs;
// GlobalFlatten computes one SNR over all pixels of all images.
enum class Pooling { PerImageMean, GlobalFlatten };

std::string to_string(Pooling pooling);
Pooling pooling_from_string(const std::string& name);

struct ChannelMetrics {
    double me_bits = 0.0;
    double snr = 0.0;
    double mean_signal = 0.0;
    double noise_std = 0.0;
};

// Dataset information metrics on raw 8-bit values. Under GlobalFlatten,
// snr == mean_signal / noise_std exactly; under PerImageMean every field is
// a per-image average, so snr is a mean of ratios rather than the ratio of
// the mean fields.
struct MetricsReport {
    double me_bits = 0.0;
    double snr = 0.0;
    double mean_signal = 0.0;
    double noise_std = 0.0;
    std::vector<ChannelMetrics> per_channel;
    Pooling pooling = Pooling::PerImageMean;
    size_t image_count = 0;
};

// i * log2(s): capacity in bits of i independent choices among s symbols.
// Callers pass the roles as the measurement convention dictates (for images
// here: s = pixels per channel, i = gray levels).
double hartley_capacity(uint64_t num_distinct_symbols, uint64_t num_choices);

// Shannon entropy of the 256-bin pixel-value histogram, per channel, channels
// averaged. A scan window covering the whole image reduces local entropy to
// exactly this global histogram entropy. Range [0, 8] bits.
double image_entropy(const ImageU8& image);

// Mean of image_entropy over the dataset (sequential summation order, so
// reports are bit-reproducible).
double dataset_me(const LabeledDataset& dataset);

// Arithmetic mean of all pixel values, all channels flattened.
double signal_mean(const ImageU8& image);

// Population standard deviation (divisor n) of all pixel values.
double noise_std(const ImageU8& image);

// signal_mean / noise_std. Throws DegenerateSignalError when noise_std == 0.
double image_snr(const ImageU8& image);

double dataset_snr(const LabeledDataset& dataset, Pooling pooling);

MetricsReport metrics_report(const LabeledDataset& dataset, Pooling pooling);

// JSON document / aligned plain-text table for the `analyze` subcommand.
// `note` is emitted verbatim when non-empty.
std::string metrics_to_json(const MetricsReport& report, const std::string& note = "");
std::string metrics_to_table(const MetricsReport& report);

}  // namespace kernsat
