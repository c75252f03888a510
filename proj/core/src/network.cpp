#include "kernsat/network.hpp"

#include <stdexcept>

namespace kernsat {

std::vector<int> parse_descriptor(const std::string& descriptor) {
    if (descriptor.rfind("res-", 0) != 0) {
        throw std::invalid_argument("bad architecture descriptor '" + descriptor +
                                    "' (expected res-<w1>-<w2>-..., e.g. res-16-32-64)");
    }
    std::vector<int> widths;
    size_t pos = 4;
    while (pos < descriptor.size()) {
        size_t end = descriptor.find('-', pos);
        if (end == std::string::npos) end = descriptor.size();
        const std::string token = descriptor.substr(pos, end - pos);
        if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos) {
            throw std::invalid_argument("bad width '" + token + "' in descriptor '" + descriptor +
                                        "'");
        }
        const int width = std::stoi(token);
        if (width < 1) {
            throw std::invalid_argument("width must be >= 1 in descriptor '" + descriptor + "'");
        }
        widths.push_back(width);
        pos = end + 1;
    }
    if (widths.empty()) {
        throw std::invalid_argument("descriptor '" + descriptor + "' names no block widths");
    }
    return widths;
}

}  // namespace kernsat
