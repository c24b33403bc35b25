#include "framerec/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace framerec {

namespace {

int next_token(std::istream& in) {
    // skips whitespace and '#' comments
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int v;
    if (!(in >> v)) throw std::runtime_error("malformed PNM header");
    return v;
}

uint8_t quantize8(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<uint8_t>(std::lround(c * 255.0));
}

}  // namespace

Image read_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image: " + path);
    char magic[2];
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6'))
        throw std::runtime_error("unsupported PNM magic in " + path);
    const int channels = magic[1] == '6' ? 3 : 1;
    const int w = next_token(in);
    const int h = next_token(in);
    const int maxval = next_token(in);
    in.get();  // single whitespace after header
    if (w <= 0 || h <= 0 || (maxval != 255 && maxval != 65535))
        throw std::runtime_error("unsupported PNM header in " + path);

    Image img(w, h, channels);
    const size_t n = img.size();
    if (maxval == 255) {
        std::vector<uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (!in) throw std::runtime_error("truncated PNM data in " + path);
        for (size_t i = 0; i < n; ++i) img.data[i] = buf[i] / 255.0;
    } else {
        std::vector<uint8_t> buf(n * 2);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * 2));
        if (!in) throw std::runtime_error("truncated PNM data in " + path);
        for (size_t i = 0; i < n; ++i) {
            const unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
            img.data[i] = v / 65535.0;
        }
    }
    return img;
}

void write_pnm(const Image& img, const std::string& path) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("write_pnm: channels must be 1 or 3");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(f, "P%c\n%d %d\n255\n", img.channels == 3 ? '6' : '5', img.width, img.height);
    std::vector<uint8_t> buf(img.size());
    for (size_t i = 0; i < img.size(); ++i) buf[i] = quantize8(img.data[i]);
    std::fwrite(buf.data(), 1, buf.size(), f);
    if (std::fclose(f) != 0) throw std::runtime_error("write failure: " + path);
}

void write_pgm16(const Image& img, const std::string& path) {
    if (img.channels != 1) throw std::invalid_argument("write_pgm16: single channel only");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    std::fprintf(f, "P5\n%d %d\n65535\n", img.width, img.height);
    std::vector<uint8_t> buf(img.size() * 2);
    for (size_t i = 0; i < img.size(); ++i) {
        const double c = std::clamp(img.data[i], 0.0, 1.0);
        const unsigned v = static_cast<unsigned>(std::lround(c * 65535.0));
        buf[2 * i] = static_cast<uint8_t>(v >> 8);
        buf[2 * i + 1] = static_cast<uint8_t>(v & 0xff);
    }
    std::fwrite(buf.data(), 1, buf.size(), f);
    if (std::fclose(f) != 0) throw std::runtime_error("write failure: " + path);
}

}  // namespace framerec
