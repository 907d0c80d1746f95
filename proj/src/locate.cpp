#include "locfuse/locate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "locfuse/dataset.hpp"
#include "locfuse/error.hpp"

namespace locfuse {

Position proximity_locate(std::span<const double> features,
                          const std::vector<AccessPoint>& roster,
                          const std::vector<std::string>& columns) {
  if (features.size() != columns.size()) {
    throw Error("width-mismatch", "feature vector width != column count");
  }
  const std::string* best_id = nullptr;
  double best_rssi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (features[i] <= kRssiFloorDbm) continue;
    if (features[i] > best_rssi ||
        (features[i] == best_rssi && best_id != nullptr && columns[i] < *best_id)) {
      best_rssi = features[i];
      best_id = &columns[i];
    }
  }
  if (best_id == nullptr) throw Error("no-coverage", "every rssi entry is at the floor");
  for (const AccessPoint& ap : roster) {
    if (ap.ap_id == *best_id) return ap.position;
  }
  throw Error("unknown-ap", "column '" + *best_id + "' missing from roster");
}

double rssi_to_range(double rssi_dbm, double tx_power_dbm, const PropagationParams& params) {
  if (rssi_dbm <= kRssiFloorDbm) {
    throw Error("unrangeable", "rssi at the floor carries no range information");
  }
  return std::pow(10.0, (tx_power_dbm - params.pl0_db - rssi_dbm) /
                            (10.0 * params.path_loss_exponent));
}

namespace {

// Residual 2-norm of || ||p - ap_i|| - d_i || over the observation set.
double residual_norm(const std::vector<RangeObservation>& obs, const Position& p) {
  double sum = 0.0;
  for (const RangeObservation& o : obs) {
    const double r = dist2d(p, o.ap_position) - o.distance_m;
    sum += r * r;
  }
  return std::sqrt(sum);
}

bool anchors_collinear(const std::vector<RangeObservation>& obs) {
  // Largest pairwise triangle area vs. the squared geometry scale.
  double scale = 0.0;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    scale = std::max(scale, dist2d(obs[i].ap_position, obs[0].ap_position));
  }
  if (scale <= 0.0) return true;
  double max_cross = 0.0;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    const double ax = obs[i].ap_position.x - obs[0].ap_position.x;
    const double ay = obs[i].ap_position.y - obs[0].ap_position.y;
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      const double bx = obs[j].ap_position.x - obs[0].ap_position.x;
      const double by = obs[j].ap_position.y - obs[0].ap_position.y;
      max_cross = std::max(max_cross, std::abs(ax * by - ay * bx));
    }
  }
  return max_cross < 1e-9 * scale * scale;
}

// Closed-form linearized LS: subtracting the first sphere equation from the
// i-th gives 2(xi-x1)x + 2(yi-y1)y = xi^2-x1^2 + yi^2-y1^2 + d1^2-di^2.
Position linearized_start(const std::vector<RangeObservation>& obs) {
  const Position& a0 = obs[0].ap_position;
  const double d0 = obs[0].distance_m;
  double ata00 = 0.0, ata01 = 0.0, ata11 = 0.0, atb0 = 0.0, atb1 = 0.0;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    const Position& ai = obs[i].ap_position;
    const double a = 2.0 * (ai.x - a0.x);
    const double b = 2.0 * (ai.y - a0.y);
    const double rhs = ai.x * ai.x - a0.x * a0.x + ai.y * ai.y - a0.y * a0.y +
                       d0 * d0 - obs[i].distance_m * obs[i].distance_m;
    ata00 += a * a;
    ata01 += a * b;
    ata11 += b * b;
    atb0 += a * rhs;
    atb1 += b * rhs;
  }
  const double det = ata00 * ata11 - ata01 * ata01;
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
    throw Error("degenerate-geometry", "anchors are collinear in 2D");
  }
  return {(ata11 * atb0 - ata01 * atb1) / det, (ata00 * atb1 - ata01 * atb0) / det, 0.0};
}

}  // namespace

Position multilaterate(const std::vector<RangeObservation>& observations,
                       std::optional<Position> initial_guess) {
  if (observations.size() < 3) {
    throw Error("underdetermined", "multilateration needs >= 3 range observations");
  }
  if (anchors_collinear(observations)) {
    throw Error("degenerate-geometry", "anchors are collinear in 2D");
  }

  Position p = initial_guess.has_value() ? *initial_guess : linearized_start(observations);
  if (!is_finite(p)) throw Error("diverged", "non-finite initial estimate");

  Position best = p;
  double best_res = residual_norm(observations, p);

  for (int iter = 0; iter < 50; ++iter) {
    // Gauss-Newton normal equations for r_i = ||p - ap_i|| - d_i.
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (const RangeObservation& o : observations) {
      const double dx = p.x - o.ap_position.x;
      const double dy = p.y - o.ap_position.y;
      const double dist = std::hypot(dx, dy);
      double ux = 0.0, uy = 0.0;
      if (dist > 1e-12) {
        ux = dx / dist;
        uy = dy / dist;
      }
      const double r = dist - o.distance_m;
      jtj00 += ux * ux;
      jtj01 += ux * uy;
      jtj11 += uy * uy;
      jtr0 += ux * r;
      jtr1 += uy * r;
    }
    const double det = jtj00 * jtj11 - jtj01 * jtj01;
    if (!std::isfinite(det) || std::abs(det) < 1e-15) break;
    const double step_x = (jtj11 * jtr0 - jtj01 * jtr1) / det;
    const double step_y = (jtj00 * jtr1 - jtj01 * jtr0) / det;
    p.x -= step_x;
    p.y -= step_y;
    if (!is_finite(p)) throw Error("diverged", "non-finite iterate");
    const double res = residual_norm(observations, p);
    if (res < best_res) {
      best = p;
      best_res = res;
    }
    if (std::hypot(step_x, step_y) < 1e-6) break;
  }
  return best;
}

Position knn_locate(const FingerprintDb& db, std::span<const double> query, std::size_t k) {
  if (db.entries.empty()) throw Error("empty-db", "fingerprint database is empty");
  if (k < 1 || k > db.entries.size()) {
    throw Error("bad-argument", "k must be in [1, |db|]");
  }
  const std::size_t width = db.entries.front().first.size();
  if (query.size() != width) throw Error("width-mismatch", "query width != fingerprint width");

  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const std::vector<double>& f = db.entries[i].first;
    if (f.size() != width) throw Error("width-mismatch", "fingerprint db is not rectangular");
    double d2 = 0.0;
    for (std::size_t j = 0; j < width; ++j) d2 += (f[j] - query[j]) * (f[j] - query[j]);
    by_distance.emplace_back(d2, i);
  }
  // Pair ordering breaks distance ties by entry index.
  std::sort(by_distance.begin(), by_distance.end());

  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Position& p = db.entries[by_distance[i].second].second;
    sx += p.x;
    sy += p.y;
    sz += p.z;
  }
  const double n = static_cast<double>(k);
  return {sx / n, sy / n, sz / n};
}

std::string classify_pipeline(const Forest& classifier, std::span<const double> features) {
  return predict_class(classifier, features);
}

std::string regress_then_classify(const Forest& regressor, std::span<const double> features,
                                  const std::vector<Zone>& zones) {
  return zone_of(predict_position(regressor, features), zones);
}

}  // namespace locfuse
