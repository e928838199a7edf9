#include "element/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "element/error.hpp"

namespace element {

EntropyValue eval_episode_entropy(const Episode& ep) {
  if (ep.states.empty()) fail(ErrorKind::empty_input, "cannot evaluate an empty episode");
  const auto states = subsample_evenly(ep.states, 256);
  return renyi_matrix_entropy(states, 1.001, KernelConfig{1.0});
}

CoverageCounter::CoverageCounter(int bins) : bins_(bins) {
  if (bins < 1) fail(ErrorKind::invalid_argument, "coverage bins must be >= 1");
}

std::size_t CoverageCounter::update(std::span<const double> position, const Box& bounds) {
  return update_cell(discretize(position, bounds, bins_));
}

std::size_t CoverageCounter::update_cell(StateKey cell) {
  visited_.insert(cell);
  return visited_.size();
}

void CoverageCounter::snapshot(std::uint64_t step) { history_.push_back({step, visited_.size()}); }

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

template <typename T>
T parse_field(std::string_view field, std::size_t line, std::size_t column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError::at_line(line, column, "bad numeric field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string format_csv(const RunLog& log) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const EpisodeRecord& r : log.episodes) {
    out += std::to_string(r.episode);
    out += ',';
    out += std::to_string(r.steps);
    out += ',';
    append_number(out, r.entropy_eval);
    out += ',';
    append_number(out, r.mean_r_ep);
    out += ',';
    append_number(out, r.mean_r_l);
    out += ',';
    out += std::to_string(r.graph_size);
    out += ',';
    out += std::to_string(r.unique_cells);
    out += '\n';
  }
  return out;
}

std::vector<EpisodeRecord> parse_csv(std::string_view text) {
  std::vector<EpisodeRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError::at_line(line_no, 1, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::pair<std::string_view, std::size_t>> fields;  // text, column
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - start),
                          start + 1);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 7) {
      throw ParseError::at_line(line_no, 1, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    EpisodeRecord r;
    r.episode = parse_field<std::size_t>(fields[0].first, line_no, fields[0].second);
    r.steps = parse_field<std::uint64_t>(fields[1].first, line_no, fields[1].second);
    r.entropy_eval = parse_field<double>(fields[2].first, line_no, fields[2].second);
    r.mean_r_ep = parse_field<double>(fields[3].first, line_no, fields[3].second);
    r.mean_r_l = parse_field<double>(fields[4].first, line_no, fields[4].second);
    r.graph_size = parse_field<std::size_t>(fields[5].first, line_no, fields[5].second);
    r.unique_cells = parse_field<std::size_t>(fields[6].first, line_no, fields[6].second);
    out.push_back(r);
  }
  if (!header_seen) throw ParseError::at_line(1, 1, "missing CSV header");
  return out;
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::io_error, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io_error, "failed writing " + path);
}

void emit_csv(const RunLog& log, const std::string& path) { write_file(path, format_csv(log)); }

std::string format_heatmap(const Matrix& grid) {
  if (grid.rows() == 0 || grid.cols() == 0) fail(ErrorKind::empty_input, "empty heatmap grid");
  const auto& v = grid.data();
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::invalid_argument, "non-finite heatmap value");
  }
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  std::string out = "P5\n" + std::to_string(grid.cols()) + " " + std::to_string(grid.rows()) + "\n255\n";
  out.reserve(out.size() + v.size());
  for (double x : v) {
    const double scaled = range > 0.0 ? (x - *lo) / range * 255.0 : 0.0;
    out += static_cast<char>(static_cast<unsigned char>(std::lround(scaled)));
  }
  return out;
}

void emit_heatmap(const Matrix& grid, const std::string& path) { write_file(path, format_heatmap(grid)); }

Matrix coverage_grid(const CoverageCounter& counter, std::size_t rows, std::size_t cols) {
  Matrix grid(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (counter.visited(static_cast<StateKey>(r * cols + c))) grid(r, c) = 1.0;
  return grid;
}

}  // namespace element
