#include "quakecast/raster_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "quakecast/errors.hpp"

static_assert(std::endian::native == std::endian::little, "raster containers assume a little-endian host");

namespace quakecast {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

std::uint32_t get_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    if (!in) throw ValidationError("raster stream truncated in header");
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

void write_header(std::ostream& out, const char magic[4], std::uint32_t d, std::uint32_t rows, std::uint32_t cols) {
    out.write(magic, 4);
    put_u32(out, d);
    put_u32(out, rows);
    put_u32(out, cols);
}

void read_magic(std::istream& in, const char expect[4]) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, expect, 4) != 0) {
        throw ValidationError(std::string("bad raster magic, expected ") + std::string(expect, 4));
    }
}

}  // namespace

void write_heatmaps(std::ostream& out, const HeatMapSeq& seq) {
    write_header(out, "QGRD", static_cast<std::uint32_t>(seq.days), static_cast<std::uint32_t>(seq.n_rows),
                 static_cast<std::uint32_t>(seq.n_cols));
    for (double v : seq.values) {
        const float f = static_cast<float>(v);
        char buf[4];
        std::memcpy(buf, &f, 4);
        out.write(buf, 4);
    }
    if (!out) throw std::runtime_error("raster write failed");
}

HeatMapSeq read_heatmaps(std::istream& in) {
    read_magic(in, "QGRD");
    HeatMapSeq seq;
    seq.days = static_cast<int>(get_u32(in));
    seq.n_rows = static_cast<int>(get_u32(in));
    seq.n_cols = static_cast<int>(get_u32(in));
    const std::size_t n = static_cast<std::size_t>(seq.days) * seq.n_rows * seq.n_cols;
    seq.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        char buf[4];
        in.read(buf, 4);
        if (!in) throw ValidationError("raster stream truncated in payload");
        float f;
        std::memcpy(&f, buf, 4);
        seq.values[i] = static_cast<double>(f);
    }
    return seq;
}

void write_heatmaps_file(const std::string& path, const HeatMapSeq& seq) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_heatmaps(out, seq);
}

HeatMapSeq read_heatmaps_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open raster file: " + path);
    return read_heatmaps(in);
}

void write_tensor_block(std::ostream& out, const Tensor& t) {
    write_header(out, "QGR8", 1u, 1u, static_cast<std::uint32_t>(t.numel()));
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!out) throw std::runtime_error("tensor block write failed");
}

Tensor read_tensor_block(std::istream& in, const std::vector<int>& shape) {
    read_magic(in, "QGR8");
    const std::uint32_t d = get_u32(in);
    const std::uint32_t rows = get_u32(in);
    const std::uint32_t cols = get_u32(in);
    Tensor t(shape);
    if (static_cast<std::size_t>(d) * rows * cols != t.numel()) {
        throw ValidationError("tensor block element count does not match expected shape " + t.shape_str());
    }
    in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!in) throw ValidationError("tensor block truncated");
    return t;
}

}  // namespace quakecast
