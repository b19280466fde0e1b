#include "nsplat/chain_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <system_error>
#include <vector>

#include "nsplat/errors.hpp"

namespace nsplat {

namespace {

constexpr std::string_view kMetaHeader = "# nsplat chain metadata v1";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t parse_count(std::string_view text, std::string_view key) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ParseError(0, "metadata key '" + std::string(key) + "': expected an unsigned integer, got '" +
                            std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_real(double v) {
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_real(std::string_view cell, std::size_t row) {
  cell = trim(cell);
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || cell.empty() || std::isnan(v)) {
    throw ParseError(row, "non-numeric cell '" + std::string(cell) + "'");
  }
  return v;
}

void write_chain(const RunRecord& run, std::ostream& out) {
  out << "logL,logL_birth";
  for (std::size_t d = 0; d < run.meta.dimension; ++d) out << ",x" << d;
  out << '\n';
  for (const DeadPoint& p : run.points) {
    out << format_real(p.log_like) << ',' << format_real(p.log_like_birth);
    for (double x : p.coords) out << ',' << format_real(x);
    out << '\n';
  }
}

void write_meta(const RunMeta& meta, std::ostream& out) {
  out << kMetaHeader << '\n'
      << "n_live_target=" << meta.n_live_target << '\n'
      << "seed=" << meta.seed << '\n'
      << "likelihood_id=" << meta.likelihood_id << '\n'
      << "termination=" << to_string(meta.termination) << '\n'
      << "dimension=" << meta.dimension << '\n';
}

RunMeta read_meta(std::istream& in) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string_view::npos) throw ParseError(0, "metadata line without '=': '" + line + "'");
    const std::string key(trim(t.substr(0, eq)));
    if (!kv.emplace(key, std::string(trim(t.substr(eq + 1)))).second) {
      throw ParseError(0, "duplicate metadata key '" + key + "'");
    }
  }

  auto take = [&](std::string_view key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(0, "metadata key '" + std::string(key) + "' missing");
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  RunMeta meta;
  meta.n_live_target = parse_count(take("n_live_target"), "n_live_target");
  meta.seed = parse_count(take("seed"), "seed");
  meta.likelihood_id = take("likelihood_id");
  try {
    meta.termination = termination_from_string(take("termination"));
  } catch (const StructuralError& e) {
    throw ParseError(0, e.what());
  }
  meta.dimension = parse_count(take("dimension"), "dimension");
  if (!kv.empty()) throw ParseError(0, "unknown metadata key '" + kv.begin()->first + "'");
  if (meta.n_live_target < 1) throw ParseError(0, "n_live_target must be >= 1");
  if (meta.dimension < 1) throw ParseError(0, "dimension must be >= 1");
  return meta;
}

RunRecord read_chain(std::istream& in, const RunMeta& meta, const ReadOptions& options) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split(trim(line), ',');

  bool has_birth = header.size() >= 2 && trim(header[1]) == "logL_birth";
  if (!has_birth && options.births == BirthPolicy::required) {
    throw ParseError(1, "malformed header: expected 'logL,logL_birth,x0,...'");
  }
  const std::size_t first_coord = has_birth ? 2 : 1;
  const std::size_t width = first_coord + meta.dimension;
  if (header.empty() || trim(header[0]) != "logL" || header.size() != width) {
    throw ParseError(1, "malformed header: expected logL" + std::string(has_birth ? ",logL_birth" : "") +
                            " followed by " + std::to_string(meta.dimension) + " coordinate columns");
  }
  for (std::size_t d = 0; d < meta.dimension; ++d) {
    if (trim(header[first_coord + d]) != "x" + std::to_string(d)) {
      throw ParseError(1, "malformed header: column " + std::to_string(first_coord + d + 1) +
                              " should be x" + std::to_string(d));
    }
  }

  RunRecord run;
  run.meta = meta;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width) {
      throw ParseError(row, "ragged row: " + std::to_string(cells.size()) + " cells, expected " +
                                std::to_string(width));
    }
    DeadPoint p;
    p.log_like = parse_real(cells[0], row);
    p.log_like_birth = has_birth ? parse_real(cells[1], row) : -std::numeric_limits<double>::infinity();
    if (p.log_like == std::numeric_limits<double>::infinity()) throw ParseError(row, "logL is +inf");
    if (!born_below(p.log_like_birth, p.log_like)) {
      throw ParseError(row, "birth contour " + std::string(trim(cells[1])) + " is not below death contour " +
                                std::string(trim(cells[0])));
    }
    p.coords.reserve(meta.dimension);
    for (std::size_t d = 0; d < meta.dimension; ++d) {
      const double x = parse_real(cells[first_coord + d], row);
      if (!(x >= 0.0 && x <= 1.0)) throw ParseError(row, "coordinate x" + std::to_string(d) + " outside [0,1]");
      p.coords.push_back(x);
    }
    run.points.push_back(std::move(p));
  }
  return run;
}

std::filesystem::path meta_path_for(const std::filesystem::path& chain_path) {
  std::filesystem::path p = chain_path;
  p += ".meta";
  return p;
}

void save_run(const RunRecord& run, const std::filesystem::path& chain_path) {
  std::ofstream chain(chain_path, std::ios::binary);
  if (!chain) throw std::runtime_error("cannot write " + chain_path.string());
  write_chain(run, chain);
  std::ofstream meta(meta_path_for(chain_path), std::ios::binary);
  if (!meta) throw std::runtime_error("cannot write " + meta_path_for(chain_path).string());
  write_meta(run.meta, meta);
  if (!chain || !meta) throw std::runtime_error("write failed for " + chain_path.string());
}

RunRecord load_run(const std::filesystem::path& chain_path, const ReadOptions& options) {
  std::ifstream meta_in(meta_path_for(chain_path), std::ios::binary);
  if (!meta_in) throw ParseError(0, "cannot open metadata sidecar " + meta_path_for(chain_path).string());
  const RunMeta meta = read_meta(meta_in);
  std::ifstream chain(chain_path, std::ios::binary);
  if (!chain) throw ParseError(0, "cannot open chain file " + chain_path.string());
  return read_chain(chain, meta, options);
}

}  // namespace nsplat
