#pragma once

// Binary netpbm I/O: 8-bit grayscale PGM (P5) and 8-bit RGB PPM (P6).
// Writers always emit "P5\n<w> <h>\n255\n" / "P6\n..." followed by raw bytes.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ofnav/error.hpp"
#include "ofnav/image.hpp"

namespace ofnav::pnm {

namespace detail {

inline void skip_space_and_comments(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string dummy;
            std::getline(in, dummy);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            return;
        }
    }
}

inline int read_header_int(std::istream& in, const char* what) {
    skip_space_and_comments(in);
    int v = -1;
    if (!(in >> v) || v <= 0) fail(ErrorKind::DataFormat, std::string("pnm: bad ") + what);
    return v;
}

struct Header {
    std::string magic;
    int width = 0;
    int height = 0;
    int maxval = 0;
};

inline Header read_header(std::istream& in) {
    Header h;
    char m[2] = {0, 0};
    if (!in.read(m, 2)) fail(ErrorKind::DataFormat, "pnm: truncated magic");
    h.magic.assign(m, 2);
    h.width = read_header_int(in, "width");
    h.height = read_header_int(in, "height");
    h.maxval = read_header_int(in, "maxval");
    if (h.maxval > 255) fail(ErrorKind::DataFormat, "pnm: only 8-bit maxval is supported");
    // exactly one whitespace byte separates the header from the raster
    if (!std::isspace(in.get())) fail(ErrorKind::DataFormat, "pnm: missing raster separator");
    return h;
}

inline std::vector<std::uint8_t> read_raster(std::istream& in, std::size_t n) {
    std::vector<std::uint8_t> buf(n);
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n))) {
        fail(ErrorKind::DataFormat, "pnm: truncated raster");
    }
    return buf;
}

inline std::uint8_t rescale(std::uint8_t v, int maxval) {
    if (maxval == 255) return v;
    return static_cast<std::uint8_t>((static_cast<int>(v) * 255 + maxval / 2) / maxval);
}

}  // namespace detail

inline GrayImage read_pgm(std::istream& in) {
    const auto h = detail::read_header(in);
    if (h.magic != "P5") fail(ErrorKind::DataFormat, "pgm: expected P5 magic, got '" + h.magic + "'");
    const auto raw = detail::read_raster(in, static_cast<std::size_t>(h.width) * h.height);
    std::vector<double> data(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) data[i] = detail::rescale(raw[i], h.maxval);
    return GrayImage(h.width, h.height, std::move(data));
}

inline ColorImage read_ppm(std::istream& in) {
    const auto h = detail::read_header(in);
    if (h.magic != "P6") fail(ErrorKind::DataFormat, "ppm: expected P6 magic, got '" + h.magic + "'");
    const auto raw = detail::read_raster(in, static_cast<std::size_t>(h.width) * h.height * 3);
    ColorImage img(h.width, h.height);
    std::size_t k = 0;
    for (int y = 0; y < h.height; ++y) {
        for (int x = 0; x < h.width; ++x, k += 3) {
            img.at(x, y) = Rgb{detail::rescale(raw[k], h.maxval), detail::rescale(raw[k + 1], h.maxval),
                               detail::rescale(raw[k + 2], h.maxval)};
        }
    }
    return img;
}

inline void write_pgm(std::ostream& out, const GrayImage& img) {
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<char> buf(img.size());
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<char>(to_u8(img.data()[i]));
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline void write_ppm(std::ostream& out, const ColorImage& img) {
    out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<char> buf;
    buf.reserve(img.pixels().size() * 3);
    for (const auto& p : img.pixels()) {
        buf.push_back(static_cast<char>(p.r));
        buf.push_back(static_cast<char>(p.g));
        buf.push_back(static_cast<char>(p.b));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    return read_pgm(in);
}

inline ColorImage load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    return read_ppm(in);
}

inline void save_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    write_pgm(out, img);
}

inline void save_ppm(const std::string& path, const ColorImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    write_ppm(out, img);
}

}  // namespace ofnav::pnm
