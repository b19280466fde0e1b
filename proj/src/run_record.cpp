#include "nsplat/run_record.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nsplat/errors.hpp"

namespace nsplat {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::max_iterations: return "max_iterations";
    case Termination::evidence_remainder: return "evidence_remainder";
    case Termination::all_live_equal: return "all_live_equal";
  }
  return "unknown";
}

Termination termination_from_string(std::string_view s) {
  if (s == "max_iterations") return Termination::max_iterations;
  if (s == "evidence_remainder") return Termination::evidence_remainder;
  if (s == "all_live_equal") return Termination::all_live_equal;
  throw StructuralError("unknown termination '" + std::string(s) + "'");
}

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void validate(const RunRecord& run) {
  const RunMeta& meta = run.meta;
  if (meta.n_live_target < 1) throw StructuralError("n_live_target must be >= 1");
  if (meta.dimension < 1) throw StructuralError("dimension must be >= 1");

  for (std::size_t i = 0; i < run.points.size(); ++i) {
    const DeadPoint& p = run.points[i];
    const std::string where = "point " + std::to_string(i);
    if (p.coords.size() != meta.dimension) {
      throw StructuralError(where + ": has " + std::to_string(p.coords.size()) +
                            " coordinates, run dimension is " + std::to_string(meta.dimension));
    }
    for (double x : p.coords) {
      if (!(x >= 0.0 && x <= 1.0)) throw StructuralError(where + ": coordinate outside [0,1]");
    }
    if (std::isnan(p.log_like) || p.log_like == std::numeric_limits<double>::infinity()) {
      throw StructuralError(where + ": log-likelihood must be finite or -inf");
    }
    if (std::isnan(p.log_like_birth)) throw StructuralError(where + ": birth contour is NaN");
    if (!born_below(p.log_like_birth, p.log_like)) {
      throw StructuralError(where + ": birth contour " + describe(p.log_like_birth) +
                            " is not below death contour " + describe(p.log_like));
    }
  }
}

CanonicalRun canonical_order(const RunRecord& run, const OrderOptions& options) {
  validate(run);
  const std::size_t n = run.points.size();

  CanonicalRun out;
  out.source_index.resize(n);
  std::iota(out.source_index.begin(), out.source_index.end(), std::size_t{0});
  std::stable_sort(out.source_index.begin(), out.source_index.end(),
                   [&](std::size_t a, std::size_t b) {
                     return run.points[a].log_like < run.points[b].log_like;
                   });

  out.run.meta = run.meta;
  out.run.points.reserve(n);
  for (std::size_t idx : out.source_index) out.run.points.push_back(run.points[idx]);
  const auto& pts = out.run.points;

  std::vector<double> deaths(n);
  std::vector<double> births;
  for (std::size_t i = 0; i < n; ++i) {
    deaths[i] = pts[i].log_like;
    if (!std::isinf(pts[i].log_like_birth)) births.push_back(pts[i].log_like_birth);
  }
  std::sort(births.begin(), births.end());

  for (double b : births) {
    if (!std::binary_search(deaths.begin(), deaths.end(), b)) {
      throw StructuralError("birth contour " + describe(b) + " is not the death contour of any point");
    }
  }

  std::size_t start = 0;
  while (start < n) {
    const double level = deaths[start];
    std::size_t end = start + 1;
    if (options.merge_tolerance > 0.0) {
      while (end < n && deaths[end] - level <= options.merge_tolerance) ++end;
    } else {
      while (end < n && deaths[end] == level) ++end;
    }

    TieGroup group;
    group.level = level;
    group.members.resize(end - start);
    std::iota(group.members.begin(), group.members.end(), start);
    // Everything from `start` on dies at or above the level; subtract those
    // whose birth contour is at or above it.
    const auto born_at_or_above =
        static_cast<std::size_t>(births.end() - std::lower_bound(births.begin(), births.end(), level));
    group.n_base = (n - start) - born_at_or_above;
    if (group.size() > group.n_base) {
      throw StructuralError("tie group at level " + describe(level) + " has " +
                            std::to_string(group.size()) + " members but only " +
                            std::to_string(group.n_base) + " live points");
    }
    out.groups.push_back(std::move(group));
    start = end;
  }
  return out;
}

}  // namespace nsplat
