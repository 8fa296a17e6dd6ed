#pragma once

// Language-conditioned observation model: a three-event mixture (true
// positive, false positive, negative) whose noise parameters are chosen per
// observation from the detector's confidence score.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/log.hpp"
#include "lcom/rng.hpp"

namespace lcom {

struct SensorObservation {
  std::optional<Cell> detection;  // nullopt is the NULL observation
  double confidence = 0.0;

  bool is_null() const { return !detection.has_value(); }
  friend bool operator==(const SensorObservation&, const SensorObservation&) = default;
};

struct NoiseParams {
  double sigma = 0.827;  // std-dev of a true-positive detection, in cells
  double tpr = 0.581;
  double tnr = 0.918;
  double smoothing = 1e-3;

  friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

// smoothing = 0 is accepted so that the unsmoothed closed forms can be checked.
inline void validate(const NoiseParams& p) {
  if (!(p.sigma > 0.0)) throw ContractViolation("noise sigma must be positive");
  if (!(p.tpr >= 0.0 && p.tpr <= 1.0)) throw ContractViolation("noise tpr must lie in [0, 1]");
  if (!(p.tnr >= 0.0 && p.tnr <= 1.0)) throw ContractViolation("noise tnr must lie in [0, 1]");
  if (!(p.smoothing >= 0.0 && p.smoothing <= 0.1)) {
    throw ContractViolation("noise smoothing must lie in [0, 0.1]");
  }
}

struct ConfidenceBand {
  double threshold = 0.0;
  NoiseParams params;

  friend bool operator==(const ConfidenceBand&, const ConfidenceBand&) = default;
};

/// Step function from confidence to noise parameters. Bands are ordered by
/// strictly decreasing threshold; the first band with threshold <= c wins.
struct ConfidenceMap {
  std::vector<ConfidenceBand> bands;
  NoiseParams fallback;

  friend bool operator==(const ConfidenceMap&, const ConfidenceMap&) = default;
};

inline void validate(const ConfidenceMap& m) {
  if (m.bands.empty()) throw ContractViolation("confidence map needs at least one band");
  for (std::size_t i = 0; i < m.bands.size(); ++i) {
    validate(m.bands[i].params);
    if (i > 0 && !(m.bands[i].threshold < m.bands[i - 1].threshold)) {
      throw ContractViolation("confidence map thresholds must be strictly decreasing");
    }
  }
  validate(m.fallback);
}

inline NoiseParams g_L(double confidence, const ConfidenceMap& map) {
  if (confidence < 0.0) throw ContractViolation("confidence must be nonnegative");
  for (const auto& band : map.bands) {
    if (confidence >= band.threshold) return band.params;
  }
  return map.fallback;
}

/// A detector's static (fixed-noise) parameters plus its confidence mapping.
struct DetectorProfile {
  std::string name;
  NoiseParams static_params;
  ConfidenceMap confidence_map;

  friend bool operator==(const DetectorProfile&, const DetectorProfile&) = default;
};

/// Referring-expression segmentation detector: TPR 0.581, TNR 0.918,
/// sigma 0.827; confidence >= 1 maps to (TPR 0.7, sigma 0.6), otherwise
/// (TPR 0.5, sigma 1.0), with TNR held at 0.918.
inline DetectorProfile hu_segmentation_profile() {
  return {"hu-segmentation",
          {0.827, 0.581, 0.918, 1e-3},
          {{{1.0, {0.6, 0.7, 0.918, 1e-3}}}, {1.0, 0.5, 0.918, 1e-3}}};
}

/// Open-vocabulary detector: TPR 0.976, TNR 0.118, sigma 1.825; confidence
/// >= 0.25 maps to (TNR 0.1, sigma 1.0), otherwise (TNR 0.3, sigma 2.0), with
/// TPR held at 0.976.
inline DetectorProfile vild_profile() {
  return {"vild",
          {1.825, 0.976, 0.118, 1e-3},
          {{{0.25, {1.0, 0.976, 0.1, 1e-3}}}, {2.0, 0.976, 0.3, 1e-3}}};
}

inline std::optional<DetectorProfile> builtin_profile(std::string_view name) {
  if (name == "hu-segmentation") return hu_segmentation_profile();
  if (name == "vild") return vild_profile();
  return std::nullopt;
}

/// Which noise fields follow the confidence score; the rest stay static.
enum class LcomMode { Static, DynamicSigma, DynamicTpr, DynamicBoth, DynamicTnr, DynamicTnrSigma };

inline constexpr std::string_view to_string(LcomMode m) {
  switch (m) {
    case LcomMode::Static: return "static";
    case LcomMode::DynamicSigma: return "dynamic-sigma";
    case LcomMode::DynamicTpr: return "dynamic-tpr";
    case LcomMode::DynamicBoth: return "dynamic-both";
    case LcomMode::DynamicTnr: return "dynamic-tnr";
    case LcomMode::DynamicTnrSigma: return "dynamic-tnr-sigma";
  }
  return "?";
}

inline std::optional<LcomMode> parse_lcom_mode(std::string_view s) {
  for (auto m : {LcomMode::Static, LcomMode::DynamicSigma, LcomMode::DynamicTpr,
                 LcomMode::DynamicBoth, LcomMode::DynamicTnr, LcomMode::DynamicTnrSigma}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

inline NoiseParams noise_for(LcomMode mode, const DetectorProfile& profile, double confidence) {
  NoiseParams out = profile.static_params;
  if (mode == LcomMode::Static) return out;
  const NoiseParams mapped = g_L(confidence, profile.confidence_map);
  switch (mode) {
    case LcomMode::DynamicSigma: out.sigma = mapped.sigma; break;
    case LcomMode::DynamicTpr: out.tpr = mapped.tpr; break;
    case LcomMode::DynamicBoth:
      out.sigma = mapped.sigma;
      out.tpr = mapped.tpr;
      break;
    case LcomMode::DynamicTnr: out.tnr = mapped.tnr; break;
    case LcomMode::DynamicTnrSigma:
      out.sigma = mapped.sigma;
      out.tnr = mapped.tnr;
      break;
    case LcomMode::Static: break;
  }
  return out;
}

struct EventProbs {
  double alpha = 0.0;  // true positive
  double beta = 0.0;   // false positive
  double gamma = 0.0;  // negative
};

inline EventProbs event_probs(bool object_in_view, const NoiseParams& p) {
  if (object_in_view) return {p.tpr, 0.0, 1.0 - p.tpr};
  return {0.0, 1.0 - p.tnr, p.tnr};
}

/// Discrete Gaussian of a true-positive detection: exp(-d^2 / 2 sigma^2) at
/// cell centres, normalized over the cells of `view`. Entries follow the
/// order of `view`.
inline std::vector<double> detection_density(Cell object, const CellSet& view, double sigma) {
  std::vector<double> w(view.size());
  if (view.empty()) return w;
  std::vector<double> d2(view.size());
  double min_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < view.size(); ++i) {
    const double dx = view[i].x - object.x;
    const double dy = view[i].y - object.y;
    d2[i] = dx * dx + dy * dy;
    min_d2 = std::min(min_d2, d2[i]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    w[i] = std::exp(-(d2[i] - min_d2) / (2.0 * sigma * sigma));
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

// Each event's outcome distribution is smoothed: A and B leak `smoothing` of
// their mass onto NULL, C leaks `smoothing` uniformly over the view. The
// outcome space {NULL} u V therefore always sums to one.
inline double observation_likelihood(const SensorObservation& z, Cell object, const CellSet& view,
                                     const NoiseParams& p) {
  const double d = p.smoothing;
  const auto ev = event_probs(view.contains(object), p);
  if (z.is_null()) {
    if (view.empty()) return 1.0;
    return ev.gamma * (1.0 - d) + (1.0 - ev.gamma) * d;
  }
  if (view.empty()) throw ContractViolation("non-NULL observation against an empty view");
  const auto idx = view.index_of(*z.detection);
  if (!idx) throw ContractViolation("detection lies outside the view");
  const double n = static_cast<double>(view.size());
  double tp = 0.0;
  if (ev.alpha > 0.0) tp = ev.alpha * detection_density(object, view, p.sigma)[*idx];
  return (1.0 - d) * (tp + ev.beta / n) + ev.gamma * d / n;
}

namespace detail {

inline std::size_t sample_weighted(Rng& rng, const std::vector<double>& w) {
  double u = uniform01(rng);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

}  // namespace detail

enum class DetectionEvent { TruePositive, FalsePositive, Negative };

struct SampledObservation {
  DetectionEvent event;
  std::optional<Cell> detection;
};

/// Draws the event, then the outcome, from the same smoothed mixture that
/// observation_likelihood evaluates.
inline SampledObservation sample_observation_event(Cell object, const CellSet& view,
                                                   const NoiseParams& p, Rng& rng) {
  const auto ev = event_probs(view.contains(object), p);
  const double u = uniform01(rng);
  DetectionEvent event = DetectionEvent::Negative;
  if (u < ev.alpha) event = DetectionEvent::TruePositive;
  else if (u < ev.alpha + ev.beta) event = DetectionEvent::FalsePositive;

  if (view.empty()) {
    if (event != DetectionEvent::Negative) {
      log::debug("detection event drawn against an empty view; emitting NULL");
    }
    return {event, std::nullopt};
  }
  const double leak = uniform01(rng);
  switch (event) {
    case DetectionEvent::TruePositive:
      if (leak < p.smoothing) return {event, std::nullopt};
      return {event, view[detail::sample_weighted(rng, detection_density(object, view, p.sigma))]};
    case DetectionEvent::FalsePositive:
      if (leak < p.smoothing) return {event, std::nullopt};
      return {event, view[uniform_index(rng, view.size())]};
    case DetectionEvent::Negative:
      if (leak < p.smoothing) return {event, view[uniform_index(rng, view.size())]};
      return {event, std::nullopt};
  }
  return {event, std::nullopt};
}

inline SensorObservation sample_observation(Cell object, const CellSet& view, const NoiseParams& p,
                                            Rng& rng) {
  return {sample_observation_event(object, view, p, rng).detection, 0.0};
}

inline SensorObservation sample_observation(Cell object, const CellSet& view, const NoiseParams& p,
                                            std::uint64_t seed) {
  Rng rng(seed);
  return sample_observation(object, view, p, rng);
}

}  // namespace lcom
