#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "h12/grid.hpp"
#include "h12/scale_functionals.hpp"
#include "h12/shapes.hpp"

namespace h12 {

// Raw field format: 16-byte header
//   [0:4)   magic "H12F"
//   [4]     u8 dimension
//   [5:8)   reserved (zero)
//   [8:12)  u32 N, little endian
//   [12:16) reserved (zero)
// followed by f64 L at offset 16, then row-major little-endian f64 samples.

inline void write_field(const SampledField& field, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw h12_error("write_field: cannot open " + path);
    char header[16] = {};
    std::memcpy(header, "H12F", 4);
    header[4] = static_cast<char>(field.grid().dimension());
    const std::uint32_t n = static_cast<std::uint32_t>(field.grid().resolution());
    std::memcpy(header + 8, &n, 4);
    os.write(header, 16);
    const double L = field.grid().period();
    os.write(reinterpret_cast<const char*>(&L), 8);
    os.write(reinterpret_cast<const char*>(field.samples().data()),
             static_cast<std::streamsize>(field.samples().size() * sizeof(double)));
    if (!os) throw h12_error("write_field: write failed for " + path);
}

inline SampledField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw h12_error("read_field: cannot open " + path);
    char header[16];
    is.read(header, 16);
    if (!is || std::memcmp(header, "H12F", 4) != 0)
        throw h12_error("read_field: bad magic in " + path);
    const int dim = header[4];
    std::uint32_t n = 0;
    std::memcpy(&n, header + 8, 4);
    double L = 0.0;
    is.read(reinterpret_cast<char*>(&L), 8);
    Grid grid(dim, L, static_cast<std::int64_t>(n));
    std::vector<double> samples(grid.size());
    is.read(reinterpret_cast<char*>(samples.data()),
            static_cast<std::streamsize>(samples.size() * sizeof(double)));
    if (!is) throw h12_error("read_field: truncated file " + path);
    return SampledField(grid, std::move(samples));
}

// Shape description: JSON with a "variant" discriminator. Bitmaps reference
// a raw field file.

inline nlohmann::ordered_json shape_to_json(const ShapeSet& shape) {
    nlohmann::ordered_json j;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Intervals>) {
                j["variant"] = "intervals";
                j["period"] = s.period;
                auto arr = nlohmann::ordered_json::array();
                for (auto& [a, b] : s.parts) arr.push_back({a, b});
                j["parts"] = arr;
            } else if constexpr (std::is_same_v<T, Ball>) {
                j["variant"] = "ball";
                j["center"] = {s.center[0], s.center[1]};
                j["radius"] = s.radius;
            } else if constexpr (std::is_same_v<T, Box>) {
                j["variant"] = "box";
                j["corner"] = {s.corner[0], s.corner[1]};
                j["widths"] = {s.widths[0], s.widths[1]};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                j["variant"] = "polygon";
                auto arr = nlohmann::ordered_json::array();
                for (auto& v : s.vertices) arr.push_back({v[0], v[1]});
                j["vertices"] = arr;
            } else if constexpr (std::is_same_v<T, Subgraph>) {
                j["variant"] = "subgraph";
                j["axis"] = s.axis;
                j["sign"] = s.sign;
                j["window"] = {s.window_lo, s.window_hi};
                j["offset"] = s.offset;
                j["amp"] = s.amp;
                j["cycles"] = s.cycles;
                j["phase"] = s.phase;
            } else {
                j["variant"] = "bitmap";
                j["note"] = "bitmap shapes are serialized through a raw field file";
            }
        },
        shape);
    return j;
}

inline ShapeSet shape_from_json(const nlohmann::json& j) {
    const std::string variant = j.at("variant");
    if (variant == "intervals") {
        Intervals s;
        s.period = j.value("period", 1.0);
        for (auto& p : j.at("parts")) s.parts.emplace_back(p[0], p[1]);
        return s;
    }
    if (variant == "ball") {
        Ball s;
        s.center = {j.at("center")[0], j.at("center")[1]};
        s.radius = j.at("radius");
        return s;
    }
    if (variant == "box") {
        Box s;
        s.corner = {j.at("corner")[0], j.at("corner")[1]};
        s.widths = {j.at("widths")[0], j.at("widths")[1]};
        return s;
    }
    if (variant == "polygon") {
        Polygon s;
        for (auto& v : j.at("vertices")) s.vertices.push_back({v[0], v[1]});
        return s;
    }
    if (variant == "subgraph") {
        Subgraph s;
        s.axis = j.value("axis", 1);
        s.sign = j.value("sign", 1.0);
        s.window_lo = j.at("window")[0];
        s.window_hi = j.at("window")[1];
        s.offset = j.at("offset");
        s.amp = j.at("amp");
        s.cycles = j.value("cycles", 1.0);
        s.phase = j.value("phase", 0.0);
        return s;
    }
    if (variant == "bitmap") {
        const SampledField f = read_field(j.at("field_file"));
        if (f.grid().dimension() != 2) throw h12_error("bitmap shape: field must be 2-D");
        return Bitmap{f.grid(), f.samples()};
    }
    throw h12_error("shape_from_json: unknown variant " + variant);
}

// CSV: header row, comma separators, '.' decimal, LF line endings,
// shortest-roundtrip doubles so repeated runs are byte-identical.

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string trace_to_csv(const ScaleTrace& tr) {
    std::ostringstream os;
    os << "r,value\n";
    for (auto& [r, v] : tr.entries) os << format_double(r) << "," << format_double(v) << "\n";
    return os.str();
}

inline nlohmann::ordered_json trace_to_json(const ScaleTrace& tr) {
    nlohmann::ordered_json j;
    auto entries = nlohmann::ordered_json::array();
    for (auto& [r, v] : tr.entries) entries.push_back({{"r", r}, {"value", v}});
    j["entries"] = entries;
    j["limit_estimate"] = tr.limit_estimate;
    j["fit_residual"] = tr.fit_residual;
    j["beta"] = tr.beta;
    j["raw"] = tr.raw;
    return j;
}

/// FNV-1a of the canonical dump; stamped on artifacts for reproducibility.
inline std::string config_hash(const nlohmann::ordered_json& config) {
    const std::string s = config.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw h12_error("write_text: cannot open " + path);
    os << content;
}

}  // namespace h12
