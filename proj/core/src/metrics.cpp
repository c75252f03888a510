#include "kernsat/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace kernsat {
namespace {

// Exact integer pixel sums; converted to double only at the end so the
// result does not depend on accumulation order.
struct MomentSums {
    uint64_t count = 0;
    uint64_t sum = 0;
    uint64_t sum_sq = 0;

    void add(uint8_t v) {
        ++count;
        sum += v;
        sum_sq += static_cast<uint64_t>(v) * v;
    }
    void add(const MomentSums& other) {
        count += other.count;
        sum += other.sum;
        sum_sq += other.sum_sq;
    }
    double mean() const { return static_cast<double>(sum) / static_cast<double>(count); }
    double pop_std() const {
        const double m = mean();
        const double ex2 = static_cast<double>(sum_sq) / static_cast<double>(count);
        const double var = ex2 - m * m;
        return var > 0.0 ? std::sqrt(var) : 0.0;
    }
};

std::array<uint64_t, 256> channel_histogram(const ImageU8& image, int channel) {
    std::array<uint64_t, 256> hist{};
    const size_t plane = image.plane_size();
    const uint8_t* begin = image.data.data() + static_cast<size_t>(channel) * plane;
    for (size_t i = 0; i < plane; ++i) {
        ++hist[begin[i]];
    }
    return hist;
}

double histogram_entropy(const std::array<uint64_t, 256>& hist, uint64_t total) {
    // Summed over symmetric bin pairs (v, 255-v) so the result is bitwise
    // identical for an index-reversed histogram (negated image).
    auto term = [total](uint64_t count) {
        if (count == 0) return 0.0;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        return -p * std::log2(p);
    };
    double h = 0.0;
    for (int v = 0; v < 128; ++v) {
        h += term(hist[v]) + term(hist[255 - v]);
    }
    return h;
}

MomentSums channel_moments(const ImageU8& image, int channel) {
    MomentSums sums;
    const size_t plane = image.plane_size();
    const uint8_t* begin = image.data.data() + static_cast<size_t>(channel) * plane;
    for (size_t i = 0; i < plane; ++i) {
        sums.add(begin[i]);
    }
    return sums;
}

void require_non_empty(const LabeledDataset& dataset, const char* op) {
    if (dataset.empty()) {
        throw std::invalid_argument(std::string(op) + ": empty dataset");
    }
}

}  // namespace

std::string to_string(Pooling pooling) {
    return pooling == Pooling::PerImageMean ? "per_image_mean" : "global_flatten";
}

Pooling pooling_from_string(const std::string& name) {
    if (name == "per_image_mean" || name == "per-image") return Pooling::PerImageMean;
    if (name == "global_flatten" || name == "global") return Pooling::GlobalFlatten;
    throw std::invalid_argument("unknown pooling '" + name +
                                "' (expected per_image_mean|global_flatten)");
}

double hartley_capacity(uint64_t num_distinct_symbols, uint64_t num_choices) {
    if (num_distinct_symbols == 0) {
        throw std::invalid_argument("hartley_capacity: num_distinct_symbols must be >= 1");
    }
    if (num_choices == 0) {
        throw std::invalid_argument("hartley_capacity: num_choices must be >= 1");
    }
    return static_cast<double>(num_choices) * std::log2(static_cast<double>(num_distinct_symbols));
}

double image_entropy(const ImageU8& image) {
    const uint64_t plane = image.plane_size();
    double sum = 0.0;
    for (int c = 0; c < image.channels; ++c) {
        sum += histogram_entropy(channel_histogram(image, c), plane);
    }
    return sum / image.channels;
}

double dataset_me(const LabeledDataset& dataset) {
    require_non_empty(dataset, "dataset_me");
    double sum = 0.0;
    for (const ImageU8& image : dataset.images) {
        sum += image_entropy(image);
    }
    return sum / static_cast<double>(dataset.size());
}

double signal_mean(const ImageU8& image) {
    MomentSums sums;
    for (uint8_t v : image.data) sums.add(v);
    return sums.mean();
}

double noise_std(const ImageU8& image) {
    MomentSums sums;
    for (uint8_t v : image.data) sums.add(v);
    return sums.pop_std();
}

double image_snr(const ImageU8& image) {
    const double sigma = noise_std(image);
    if (sigma == 0.0) {
        throw DegenerateSignalError("image_snr: zero signal standard deviation (constant image)");
    }
    return signal_mean(image) / sigma;
}

double dataset_snr(const LabeledDataset& dataset, Pooling pooling) {
    require_non_empty(dataset, "dataset_snr");
    if (pooling == Pooling::PerImageMean) {
        double sum = 0.0;
        for (const ImageU8& image : dataset.images) {
            sum += image_snr(image);
        }
        return sum / static_cast<double>(dataset.size());
    }
    MomentSums all;
    for (const ImageU8& image : dataset.images) {
        for (uint8_t v : image.data) all.add(v);
    }
    const double sigma = all.pop_std();
    if (sigma == 0.0) {
        throw DegenerateSignalError("dataset_snr: zero signal standard deviation");
    }
    return all.mean() / sigma;
}

MetricsReport metrics_report(const LabeledDataset& dataset, Pooling pooling) {
    require_non_empty(dataset, "metrics_report");
    const int channels = dataset.images[0].channels;

    MetricsReport report;
    report.pooling = pooling;
    report.image_count = dataset.size();
    report.per_channel.resize(channels);

    report.me_bits = dataset_me(dataset);
    for (int c = 0; c < channels; ++c) {
        double me = 0.0;
        for (const ImageU8& image : dataset.images) {
            me += histogram_entropy(channel_histogram(image, c), image.plane_size());
        }
        report.per_channel[c].me_bits = me / static_cast<double>(dataset.size());
    }

    if (pooling == Pooling::PerImageMean) {
        double sum_snr = 0.0, sum_mean = 0.0, sum_std = 0.0;
        std::vector<double> ch_snr(channels, 0.0), ch_mean(channels, 0.0), ch_std(channels, 0.0);
        for (const ImageU8& image : dataset.images) {
            MomentSums whole;
            for (int c = 0; c < channels; ++c) {
                const MomentSums sums = channel_moments(image, c);
                const double sigma = sums.pop_std();
                if (sigma == 0.0) {
                    throw DegenerateSignalError(
                        "metrics_report: constant channel under per-image pooling");
                }
                ch_snr[c] += sums.mean() / sigma;
                ch_mean[c] += sums.mean();
                ch_std[c] += sigma;
                whole.add(sums);
            }
            const double sigma = whole.pop_std();
            if (sigma == 0.0) {
                throw DegenerateSignalError("metrics_report: constant image under per-image pooling");
            }
            sum_snr += whole.mean() / sigma;
            sum_mean += whole.mean();
            sum_std += sigma;
        }
        const double n = static_cast<double>(dataset.size());
        report.snr = sum_snr / n;
        report.mean_signal = sum_mean / n;
        report.noise_std = sum_std / n;
        for (int c = 0; c < channels; ++c) {
            report.per_channel[c].snr = ch_snr[c] / n;
            report.per_channel[c].mean_signal = ch_mean[c] / n;
            report.per_channel[c].noise_std = ch_std[c] / n;
        }
    } else {
        MomentSums whole;
        std::vector<MomentSums> per_channel(channels);
        for (const ImageU8& image : dataset.images) {
            for (int c = 0; c < channels; ++c) {
                per_channel[c].add(channel_moments(image, c));
            }
        }
        for (int c = 0; c < channels; ++c) {
            whole.add(per_channel[c]);
            const double sigma = per_channel[c].pop_std();
            if (sigma == 0.0) {
                throw DegenerateSignalError("metrics_report: constant channel across dataset");
            }
            report.per_channel[c].mean_signal = per_channel[c].mean();
            report.per_channel[c].noise_std = sigma;
            report.per_channel[c].snr = per_channel[c].mean() / sigma;
        }
        const double sigma = whole.pop_std();
        if (sigma == 0.0) {
            throw DegenerateSignalError("metrics_report: constant dataset");
        }
        report.mean_signal = whole.mean();
        report.noise_std = sigma;
        report.snr = whole.mean() / sigma;
    }
    return report;
}

std::string metrics_to_json(const MetricsReport& report, const std::string& note) {
    nlohmann::ordered_json doc;
    doc["image_count"] = report.image_count;
    doc["pooling"] = to_string(report.pooling);
    doc["me_bits"] = report.me_bits;
    doc["snr"] = report.snr;
    doc["mean_signal"] = report.mean_signal;
    doc["noise_std"] = report.noise_std;
    doc["per_channel"] = nlohmann::ordered_json::array();
    for (size_t c = 0; c < report.per_channel.size(); ++c) {
        const ChannelMetrics& ch = report.per_channel[c];
        doc["per_channel"].push_back({{"channel", c},
                                      {"me_bits", ch.me_bits},
                                      {"snr", ch.snr},
                                      {"mean_signal", ch.mean_signal},
                                      {"noise_std", ch.noise_std}});
    }
    if (!note.empty()) {
        doc["note"] = note;
    }
    return doc.dump(2) + "\n";
}

std::string metrics_to_table(const MetricsReport& report) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %10s %10s %12s %10s\n", "scope", "ME(bits)", "SNR",
                  "mean", "std");
    out += line;
    std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %12.4f %10.4f\n", "all", report.me_bits,
                  report.snr, report.mean_signal, report.noise_std);
    out += line;
    for (size_t c = 0; c < report.per_channel.size(); ++c) {
        const ChannelMetrics& ch = report.per_channel[c];
        std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %12.4f %10.4f\n",
                      ("channel_" + std::to_string(c)).c_str(), ch.me_bits, ch.snr, ch.mean_signal,
                      ch.noise_std);
        out += line;
    }
    std::snprintf(line, sizeof(line), "pooling: %s, images: %zu\n",
                  to_string(report.pooling).c_str(), report.image_count);
    out += line;
    return out;
}

}  // namespace kernsat
