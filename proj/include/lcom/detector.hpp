#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "lcom/bridge.hpp"
#include "lcom/errors.hpp"
#include "lcom/grid_world.hpp"
#include "lcom/observation_model.hpp"
#include "lcom/rng.hpp"

namespace lcom {

enum class DetectorKind { Perfect, Static, Confidence, Bridge };

inline std::string_view to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::Perfect: return "perfect";
    case DetectorKind::Static: return "static";
    case DetectorKind::Confidence: return "confidence";
    case DetectorKind::Bridge: return "bridge";
  }
  return "?";
}

inline std::optional<DetectorKind> parse_detector_kind(std::string_view s) {
  for (auto k : {DetectorKind::Perfect, DetectorKind::Static, DetectorKind::Confidence,
                 DetectorKind::Bridge}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

/// Two-point confidence emitter: a true-positive detection reports
/// `high_value` with probability p_high_given_A, anything else with
/// probability p_high_given_notA; otherwise `low_value`.
struct ConfidenceModel {
  double p_high_given_A = 0.9;
  double p_high_given_notA = 0.2;
  double high_value = 1.2;
  double low_value = 0.5;

  friend bool operator==(const ConfidenceModel&, const ConfidenceModel&) = default;
};

struct BridgeSpec {
  std::string endpoint;
  int timeout_ms = 5000;
  bridge::CameraModel camera;

  friend bool operator==(const BridgeSpec&, const BridgeSpec&) = default;
};

/// Noise model the noise-free detector is paired with: near-certain events and
/// a tight spatial spread.
inline NoiseParams perfect_sensor_params() { return {0.3, 1.0, 1.0, 1e-3}; }

struct DetectorSpec {
  DetectorKind kind = DetectorKind::Static;
  // Generative noise of the simulated sensor (static and confidence kinds).
  NoiseParams params = hu_segmentation_profile().static_params;
  ConfidenceModel confidence;
  BridgeSpec bridge;

  friend bool operator==(const DetectorSpec&, const DetectorSpec&) = default;
};

inline void validate(const DetectorSpec& d) {
  validate(d.params);
  const auto& c = d.confidence;
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(c.p_high_given_A) || !prob(c.p_high_given_notA)) {
    throw ContractViolation("confidence model probabilities must lie in [0, 1]");
  }
  if (!(c.high_value > c.low_value && c.low_value >= 0.0)) {
    throw ContractViolation("confidence model needs high_value > low_value >= 0");
  }
  if (d.kind == DetectorKind::Bridge && d.bridge.endpoint.empty()) {
    throw ContractViolation("bridge detector needs an endpoint");
  }
}

struct SimulatedDetection {
  SensorObservation observation;
  bool true_positive = false;
};

/// One Look of a simulated detector against ground truth. Bridge detectors
/// are served by the episode runner instead.
inline SimulatedDetection simulate_detection(const DetectorSpec& spec, Cell object,
                                             const CellSet& view, Rng& rng) {
  switch (spec.kind) {
    case DetectorKind::Perfect: {
      const bool seen = view.contains(object);
      return {{seen ? std::optional<Cell>(object) : std::nullopt, spec.confidence.high_value}, seen};
    }
    case DetectorKind::Static: {
      const auto s = sample_observation_event(object, view, spec.params, rng);
      const bool tp = s.event == DetectionEvent::TruePositive && s.detection.has_value();
      return {{s.detection, spec.confidence.high_value}, tp};
    }
    case DetectorKind::Confidence: {
      const auto s = sample_observation_event(object, view, spec.params, rng);
      const bool tp = s.event == DetectionEvent::TruePositive && s.detection.has_value();
      const double p_high = tp ? spec.confidence.p_high_given_A : spec.confidence.p_high_given_notA;
      const double c =
          uniform01(rng) < p_high ? spec.confidence.high_value : spec.confidence.low_value;
      return {{s.detection, c}, tp};
    }
    case DetectorKind::Bridge:
      throw ContractViolation("simulate_detection: bridge detectors are queried over the wire");
  }
  return {};
}

}  // namespace lcom
