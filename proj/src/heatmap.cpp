#include "attnmt/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnmt/errors.hpp"

namespace nmt {
namespace {

// "foo.pgm" -> "foo" + suffix; anything else just gets the suffix appended.
std::string sibling_path(const std::string& path, const std::string& suffix) {
  const std::string ext = ".pgm";
  if (path.size() > ext.size() &&
      path.compare(path.size() - ext.size(), ext.size(), ext) == 0) {
    return path.substr(0, path.size() - ext.size()) + suffix;
  }
  return path + suffix;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

int gray_level(double w) {
  double v = std::clamp(w, 0.0, 1.0);
  return static_cast<int>(std::lround(v * 255.0));
}

void write_legend(const std::string& path,
                  const std::vector<std::string>& source_tokens,
                  const std::vector<std::string>& target_tokens) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open legend file for writing: " + path);
  out << "rows (target words, top to bottom):\n";
  for (std::size_t t = 0; t < target_tokens.size(); ++t) {
    out << t << '\t' << target_tokens[t] << '\n';
  }
  out << "columns (source words, left to right):\n";
  for (std::size_t s = 0; s < source_tokens.size(); ++s) {
    out << s << '\t' << source_tokens[s] << '\n';
  }
  if (!out) throw DataError("failed writing legend file: " + path);
}

void write_svg(const std::string& path, const AlignmentMatrix& alignment,
               const std::vector<std::string>& source_tokens,
               const std::vector<std::string>& target_tokens, int cell) {
  const std::size_t rows = target_tokens.size();
  const std::size_t cols = source_tokens.size();
  const int margin_left = 8 * cell;
  const int margin_top = 8 * cell;
  const int width = margin_left + static_cast<int>(cols) * cell;
  const int height = margin_top + static_cast<int>(rows) * cell;
  const int font = std::max(6, (cell * 3) / 5);

  std::ofstream out(path);
  if (!out) throw DataError("cannot open svg file for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"monospace\" font-size=\""
      << font << "\">\n";
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t s = 0; s < cols; ++s) {
      int v = gray_level(alignment.weights[t][s]);
      out << "<rect x=\"" << margin_left + static_cast<int>(s) * cell
          << "\" y=\"" << margin_top + static_cast<int>(t) * cell
          << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"rgb(" << v << ',' << v << ',' << v << ")\"/>\n";
    }
  }
  for (std::size_t t = 0; t < rows; ++t) {
    int y = margin_top + static_cast<int>(t) * cell + (cell + font) / 2;
    out << "<text x=\"" << margin_left - cell / 2 << "\" y=\"" << y
        << "\" text-anchor=\"end\">" << xml_escape(target_tokens[t])
        << "</text>\n";
  }
  for (std::size_t s = 0; s < cols; ++s) {
    int x = margin_left + static_cast<int>(s) * cell + cell / 2;
    int y = margin_top - cell / 2;
    out << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"start\""
        << " transform=\"rotate(-60 " << x << ' ' << y << ")\">"
        << xml_escape(source_tokens[s]) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw DataError("failed writing svg file: " + path);
}

std::string format_weight(double w) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", w);
  return buf;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

double parse_weight(const std::string& s, const std::string& path) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty()) {
    throw DataError("malformed weight '" + s + "' in " + path);
  }
  return v;
}

int parse_link(const std::string& s, const std::string& path) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw DataError("malformed link '" + s + "' in " + path);
  }
  if (used != s.size()) {
    throw DataError("malformed link '" + s + "' in " + path);
  }
  return v;
}

}  // namespace

void plot_attn(const AlignmentMatrix& alignment,
               const std::vector<std::string>& source_tokens,
               const std::vector<std::string>& target_tokens,
               const std::string& path, int cell_size, bool with_svg) {
  if (cell_size < 1) {
    throw std::invalid_argument("plot_attn: cell_size must be at least 1");
  }
  if (source_tokens.empty() || target_tokens.empty()) {
    throw std::invalid_argument("plot_attn: nothing to plot (empty axis)");
  }
  if (alignment.weights.size() != target_tokens.size()) {
    throw std::invalid_argument(
        "plot_attn: matrix has " + std::to_string(alignment.weights.size()) +
        " rows but there are " + std::to_string(target_tokens.size()) +
        " target words");
  }
  for (const auto& row : alignment.weights) {
    if (row.size() != source_tokens.size()) {
      throw std::invalid_argument(
          "plot_attn: matrix row has " + std::to_string(row.size()) +
          " columns but there are " + std::to_string(source_tokens.size()) +
          " source words");
    }
    for (double w : row) {
      if (!std::isfinite(w)) {
        throw NumericError("plot_attn: non-finite attention weight");
      }
    }
  }

  const std::size_t rows = target_tokens.size();
  const std::size_t cols = source_tokens.size();
  const std::size_t cell = static_cast<std::size_t>(cell_size);
  const std::size_t width = cols * cell;
  const std::size_t height = rows * cell;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open image file for writing: " + path);
  out << "P5\n" << width << ' ' << height << "\n255\n";
  std::vector<unsigned char> scanline(width);
  for (std::size_t t = 0; t < rows; ++t) {
    for (std::size_t s = 0; s < cols; ++s) {
      unsigned char v =
          static_cast<unsigned char>(gray_level(alignment.weights[t][s]));
      std::fill(scanline.begin() + s * cell, scanline.begin() + (s + 1) * cell,
                v);
    }
    for (std::size_t repeat = 0; repeat < cell; ++repeat) {
      out.write(reinterpret_cast<const char*>(scanline.data()),
                static_cast<std::streamsize>(scanline.size()));
    }
  }
  if (!out) throw DataError("failed writing image file: " + path);
  out.close();

  write_legend(sibling_path(path, ".txt"), source_tokens, target_tokens);
  if (with_svg) {
    write_svg(sibling_path(path, ".svg"), alignment, source_tokens,
              target_tokens, cell_size);
  }
}

void write_alignment_dump(const std::vector<AlignmentDumpEntry>& entries,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open alignment dump for writing: " + path);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const AlignmentDumpEntry& e = entries[i];
    out << "sentence\t" << i << '\n';
    out << "source";
    for (const auto& w : e.source_tokens) out << '\t' << w;
    out << '\n';
    out << "target";
    for (const auto& w : e.target_tokens) out << '\t' << w;
    out << '\n';
    out << "links";
    for (int link : e.alignment.links) out << '\t' << link;
    out << '\n';
    for (const auto& row : e.alignment.weights) {
      for (std::size_t s = 0; s < row.size(); ++s) {
        if (s) out << '\t';
        out << format_weight(row[s]);
      }
      out << '\n';
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing alignment dump: " + path);
}

std::vector<AlignmentDumpEntry> read_alignment_dump(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open alignment dump: " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }

  std::vector<AlignmentDumpEntry> entries;
  std::size_t i = 0;
  while (true) {
    while (i < lines.size() && lines[i].empty()) ++i;
    if (i >= lines.size()) break;

    auto header = split_tabs(lines[i]);
    if (header.size() != 2 || header[0] != "sentence") {
      throw DataError("expected 'sentence' header in " + path + ", got: " +
                      lines[i]);
    }
    if (parse_link(header[1], path) != static_cast<int>(entries.size())) {
      throw DataError("out-of-order sentence index in " + path + ": " +
                      lines[i]);
    }
    ++i;

    AlignmentDumpEntry entry;
    if (i >= lines.size()) throw DataError("truncated entry in " + path);
    auto source = split_tabs(lines[i]);
    if (source.empty() || source[0] != "source") {
      throw DataError("expected 'source' line in " + path + ", got: " +
                      lines[i]);
    }
    entry.source_tokens.assign(source.begin() + 1, source.end());
    ++i;

    if (i >= lines.size()) throw DataError("truncated entry in " + path);
    auto target = split_tabs(lines[i]);
    if (target.empty() || target[0] != "target") {
      throw DataError("expected 'target' line in " + path + ", got: " +
                      lines[i]);
    }
    entry.target_tokens.assign(target.begin() + 1, target.end());
    ++i;

    if (i >= lines.size()) throw DataError("truncated entry in " + path);
    auto links = split_tabs(lines[i]);
    if (links.empty() || links[0] != "links") {
      throw DataError("expected 'links' line in " + path + ", got: " +
                      lines[i]);
    }
    for (std::size_t k = 1; k < links.size(); ++k) {
      entry.alignment.links.push_back(parse_link(links[k], path));
    }
    ++i;

    while (i < lines.size() && !lines[i].empty()) {
      auto fields = split_tabs(lines[i]);
      std::vector<double> row;
      row.reserve(fields.size());
      for (const auto& f : fields) row.push_back(parse_weight(f, path));
      if (row.size() != entry.source_tokens.size()) {
        throw DataError("weight row width mismatch in " + path);
      }
      entry.alignment.weights.push_back(std::move(row));
      ++i;
    }
    if (entry.alignment.links.size() != entry.alignment.weights.size()) {
      throw DataError("links/rows count mismatch in " + path);
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace nmt
