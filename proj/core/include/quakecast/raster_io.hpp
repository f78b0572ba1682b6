#pragma once

#include <iosfwd>
#include <string>

#include "quakecast/catalog.hpp"
#include "quakecast/tensor.hpp"

namespace quakecast {

// Raster container: 16-byte header (magic, u32 D, u32 n_rows, u32 n_cols,
// little-endian) followed by D*n_rows*n_cols little-endian IEEE-754 floats,
// row-major, day-major. Magic `QGRD` carries 32-bit payloads (heat maps,
// prior maps); `QGR8` is the same layout with 64-bit payloads and is used
// for checkpoint parameter blocks, which must survive a round trip exactly.

void write_heatmaps(std::ostream& out, const HeatMapSeq& seq);
HeatMapSeq read_heatmaps(std::istream& in);
void write_heatmaps_file(const std::string& path, const HeatMapSeq& seq);
HeatMapSeq read_heatmaps_file(const std::string& path);

/// Writes a flat f64 block (D=1, rows=1, cols=numel).
void write_tensor_block(std::ostream& out, const Tensor& t);
/// Reads a flat f64 block into the given shape; element count must match.
Tensor read_tensor_block(std::istream& in, const std::vector<int>& shape);

}  // namespace quakecast
