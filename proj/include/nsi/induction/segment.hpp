#pragma once

// Sub-goal segmentation. Recorded annotations pass through unchanged; a
// provider can segment unannotated traces. Either way the segment
// invariants are enforced before anything downstream sees them.

#include <vector>

#include "nsi/world/trace.hpp"

namespace nsi {

struct SegmentsUnavailable : Error {
  explicit SegmentsUnavailable(const std::string& why) : Error("segments unavailable: " + why) {}
};

struct ProviderError : Error {
  explicit ProviderError(const std::string& why) : Error("provider error: " + why) {}
};

class SegmenterProvider {
 public:
  virtual ~SegmenterProvider() = default;
  virtual std::vector<Segment> segment(const Trace& trace) = 0;
};

inline std::vector<std::pair<const Trace*, std::vector<Segment>>> segment_trajectories(
    const std::vector<Trace>& traces, SegmenterProvider* provider = nullptr) {
  std::vector<std::pair<const Trace*, std::vector<Segment>>> out;
  for (const auto& t : traces) {
    std::vector<Segment> segments = t.segments;
    if (segments.empty()) {
      if (!provider) throw SegmentsUnavailable("trace " + t.id + " has no annotations");
      segments = provider->segment(t);
    }
    Trace probe = t;
    probe.segments = segments;
    try {
      validate_segments(probe);
    } catch (const Error& e) {
      throw SegmentsUnavailable(std::string(e.what()));
    }
    out.emplace_back(&t, std::move(segments));
  }
  return out;
}

}  // namespace nsi
