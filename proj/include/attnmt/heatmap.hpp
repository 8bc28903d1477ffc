#pragma once

#include <string>
#include <vector>

#include "attnmt/decoding.hpp"

namespace nmt {

// Renders an alignment matrix as a binary grayscale raster (PGM, P5):
// weight 0 maps to black and 1 to white, one target word per row (top to
// bottom), one source word per column (left to right, original order),
// each cell drawn cell_size x cell_size pixels. A text legend with the row
// and column labels lands next to the image (".txt"), and with_svg adds a
// labeled vector rendition (".svg"). Throws std::invalid_argument when the
// matrix does not match the token counts or is empty, NumericError on
// non-finite weights, and DataError on I/O failure.
void plot_attn(const AlignmentMatrix& alignment,
               const std::vector<std::string>& source_tokens,
               const std::vector<std::string>& target_tokens,
               const std::string& path, int cell_size = 16,
               bool with_svg = false);

// One force-decoded sentence ready for plotting: the tokens (original
// order, no terminators) and the attributed weight matrix.
struct AlignmentDumpEntry {
  std::vector<std::string> source_tokens;
  std::vector<std::string> target_tokens;
  AlignmentMatrix alignment;
};

// Tab-separated, full-precision dump of attributed alignments, the
// interchange between alignment extraction and plotting. Throws DataError
// on I/O failure (write) or malformed input (read).
void write_alignment_dump(const std::vector<AlignmentDumpEntry>& entries,
                          const std::string& path);
std::vector<AlignmentDumpEntry> read_alignment_dump(const std::string& path);

}  // namespace nmt
