#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace nsplat {

// One evicted sample. `log_like_birth` is the contour the point was sampled
// above; -inf marks a draw from the unconstrained prior, which precedes every
// contour including a -inf one.
struct DeadPoint {
  std::vector<double> coords;
  double log_like = 0.0;
  double log_like_birth = 0.0;

  friend bool operator==(const DeadPoint&, const DeadPoint&) = default;
};

enum class Termination { max_iterations, evidence_remainder, all_live_equal };

std::string_view to_string(Termination t);
Termination termination_from_string(std::string_view s);

struct RunMeta {
  std::size_t n_live_target = 1;
  std::uint64_t seed = 0;
  std::string likelihood_id;
  Termination termination = Termination::evidence_remainder;
  std::size_t dimension = 1;

  friend bool operator==(const RunMeta&, const RunMeta&) = default;
};

struct RunRecord {
  std::vector<DeadPoint> points;
  RunMeta meta;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Points sharing one death contour. `members` index the canonical order.
struct TieGroup {
  double level = 0.0;
  std::vector<std::size_t> members;
  std::size_t n_base = 0;  // points alive when the contour is reached

  std::size_t size() const { return members.size(); }

  friend bool operator==(const TieGroup&, const TieGroup&) = default;
};

struct CanonicalRun {
  RunRecord run;                          // points sorted by death contour
  std::vector<std::size_t> source_index;  // input position of each point
  std::vector<TieGroup> groups;           // partition of the canonical order
};

struct OrderOptions {
  // Death contours within this distance of a group's lowest member join the
  // group. Zero means bitwise-equal values only.
  double merge_tolerance = 0.0;
};

// True when a point born at `birth` was alive as the contour reached `level`.
constexpr bool born_below(double birth, double level) {
  return birth < level || birth == -std::numeric_limits<double>::infinity();
}

// Throws StructuralError on meta problems, dimension mismatches, coordinates
// outside the unit cube, NaNs, or a birth contour at or above the death.
void validate(const RunRecord& run);

// Stable sort by death contour, tie detection, and the live count at each
// contour: n_base = #{j : logL_j >= level and born_below(birth_j, level)}.
// Also checks that every finite birth contour is some point's death contour.
CanonicalRun canonical_order(const RunRecord& run, const OrderOptions& options = {});

}  // namespace nsplat
