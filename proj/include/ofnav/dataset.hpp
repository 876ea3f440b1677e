#pragma once

// Dataset CSV: "norm_0,phase_0,...,norm_{P-1},phase_{P-1},distance_cm,label",
// one row per sample, distance_cm empty when absent.
// Manifest CSV: "recording,start,count", contiguous row ranges per recording.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ofnav/error.hpp"
#include "ofnav/features.hpp"

namespace ofnav {

struct Dataset {
    std::vector<LabeledSample> samples;
    std::vector<int> recording;  // group id per sample; empty when unknown

    std::size_t size() const noexcept { return samples.size(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().features.size(); }

    std::size_t count(Label l) const {
        std::size_t n = 0;
        for (const auto& s : samples) n += (s.label == l) ? 1 : 0;
        return n;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t row) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::DataFormat, "csv row " + std::to_string(row) + ": bad number '" + std::string(s) + "'");
    }
    return v;
}

inline long parse_long(std::string_view s, std::size_t row) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::DataFormat, "csv row " + std::to_string(row) + ": bad integer '" + std::string(s) + "'");
    }
    return v;
}

inline std::string_view trim_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline std::string dataset_header(std::size_t points) {
    std::string h;
    for (std::size_t i = 0; i < points; ++i) {
        h += "norm_" + std::to_string(i) + ",phase_" + std::to_string(i) + ",";
    }
    h += "distance_cm,label";
    return h;
}

inline void write_dataset(std::ostream& out, const Dataset& ds) {
    const std::size_t d = ds.dim();
    require(d % 2 == 0, "dataset: feature length must be even");
    out << dataset_header(d / 2) << '\n';
    for (const auto& s : ds.samples) {
        require(s.features.size() == d, "dataset: inconsistent feature length");
        for (double v : s.features.values) out << detail::format_double(v) << ',';
        if (s.distance_cm) out << detail::format_double(*s.distance_cm);
        out << ',' << to_int(s.label) << '\n';
    }
}

inline Dataset read_dataset(std::istream& in) {
    Dataset ds;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::DataFormat, "dataset: empty input");
    const auto header = detail::split_csv(detail::trim_cr(line));
    if (header.size() < 2 || header[header.size() - 2] != "distance_cm" || header.back() != "label") {
        fail(ErrorKind::DataFormat, "dataset: header must end with distance_cm,label");
    }
    const std::size_t d = header.size() - 2;
    if (d % 2 != 0) fail(ErrorKind::DataFormat, "dataset: odd number of feature columns");
    if (detail::trim_cr(line) != dataset_header(d / 2)) fail(ErrorKind::DataFormat, "dataset: unexpected column names");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split_csv(sv);
        if (cells.size() != d + 2) fail(ErrorKind::DataFormat, "dataset row " + std::to_string(row) + ": wrong column count");
        LabeledSample s;
        s.features.values.resize(d);
        for (std::size_t j = 0; j < d; ++j) s.features.values[j] = detail::parse_double(cells[j], row);
        if (!cells[d].empty()) s.distance_cm = detail::parse_double(cells[d], row);
        const long lab = detail::parse_long(cells[d + 1], row);
        if (lab != 1 && lab != -1) fail(ErrorKind::DataFormat, "dataset row " + std::to_string(row) + ": label must be -1 or 1");
        s.label = lab > 0 ? Label::Positive : Label::Negative;
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

struct ManifestEntry {
    int recording = 0;
    std::size_t start = 0;
    std::size_t count = 0;
};

/// Collapses per-sample recording ids into contiguous ranges.
inline std::vector<ManifestEntry> make_manifest(const std::vector<int>& recording) {
    std::vector<ManifestEntry> out;
    for (std::size_t i = 0; i < recording.size(); ++i) {
        if (out.empty() || out.back().recording != recording[i]) {
            out.push_back({recording[i], i, 0});
        }
        ++out.back().count;
    }
    return out;
}

inline void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& m) {
    out << "recording,start,count\n";
    for (const auto& e : m) out << e.recording << ',' << e.start << ',' << e.count << '\n';
}

inline std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim_cr(line) != "recording,start,count") {
        fail(ErrorKind::DataFormat, "manifest: bad header");
    }
    std::vector<ManifestEntry> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto sv = detail::trim_cr(line);
        if (sv.empty()) continue;
        const auto cells = detail::split_csv(sv);
        if (cells.size() != 3) fail(ErrorKind::DataFormat, "manifest row " + std::to_string(row) + ": expected 3 columns");
        const long rec = detail::parse_long(cells[0], row);
        const long start = detail::parse_long(cells[1], row);
        const long count = detail::parse_long(cells[2], row);
        if (start < 0 || count < 0) fail(ErrorKind::DataFormat, "manifest: negative range");
        out.push_back({static_cast<int>(rec), static_cast<std::size_t>(start), static_cast<std::size_t>(count)});
    }
    return out;
}

/// Expands a manifest into per-sample ids; ranges must tile [0, n) exactly.
inline std::vector<int> expand_manifest(const std::vector<ManifestEntry>& m, std::size_t n) {
    std::vector<int> ids;
    ids.reserve(n);
    for (const auto& e : m) {
        if (e.start != ids.size()) fail(ErrorKind::DataFormat, "manifest: ranges are not contiguous");
        ids.insert(ids.end(), e.count, e.recording);
    }
    if (ids.size() != n) fail(ErrorKind::DataFormat, "manifest: ranges do not cover the dataset");
    return ids;
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    return read_dataset(in);
}

inline void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    write_dataset(out, ds);
}

inline std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    return read_manifest(in);
}

inline void save_manifest(const std::string& path, const std::vector<ManifestEntry>& m) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    write_manifest(out, m);
}

}  // namespace ofnav
