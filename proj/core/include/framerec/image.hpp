#pragma once

#include <string>
#include <vector>

namespace framerec {

/// Row-major, channel-interleaved image with values in [0,1].
/// channels == 1 for silhouettes (P5), 3 for color (P6).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          data(static_cast<size_t>(w) * h * c, fill) {}

    double& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }
};

/// Reads P5 (1 channel) or P6 (3 channels), 8- or 16-bit.
Image read_pnm(const std::string& path);

/// Writes 8-bit P5/P6 depending on channel count; values clamped to [0,1].
void write_pnm(const Image& img, const std::string& path);

/// Writes a single-channel image as 16-bit P5 (loss-grade precision).
void write_pgm16(const Image& img, const std::string& path);

}  // namespace framerec
