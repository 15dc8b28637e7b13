#include "gaspower/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gaspower/error.hpp"

namespace gaspower {

TimeSeries::TimeSeries(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
  if (points_.empty()) throw InputError("time series needs at least one breakpoint");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].first) || !std::isfinite(points_[i].second)) {
      throw InputError("time series contains a non-finite value");
    }
    if (i > 0 && !(points_[i].first > points_[i - 1].first)) {
      throw InputError("time series breakpoints must be strictly increasing in time");
    }
  }
}

double TimeSeries::at(double t) const {
  if (points_.empty()) throw InputError("evaluating an empty time series");
  if (t <= points_.front().first) return points_.front().second;
  if (t >= points_.back().first) return points_.back().second;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = std::prev(hi);
  const double w = (t - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

TimeSeries TimeSeries::scaled(double factor) const {
  auto pts = points_;
  for (auto& p : pts) p.second *= factor;
  return TimeSeries(std::move(pts));
}

namespace {

const TimeSeries* require(const std::map<std::string, TimeSeries>& series, const std::string& id,
                          const char* what, std::string_view kind) {
  auto it = series.find(id);
  if (it == series.end() || it->second.empty()) {
    throw InputError("missing boundary \"" + std::string(what) + "\" for " + std::string(kind) +
                     " \"" + id + "\"");
  }
  return &it->second;
}

}  // namespace

BoundarySchedule::BoundarySchedule(const Network& network, const BoundaryData& data)
    : data_(data) {
  for (const auto& node : network.gas_nodes) {
    switch (node.kind) {
      case NodeKind::pressure_boundary:
        node_.push_back(require(data_.pressure, node.id, "pressure", "pressure-boundary node"));
        break;
      case NodeKind::flow_boundary:
        node_.push_back(require(data_.outflow, node.id, "outflow", "flow-boundary node"));
        break;
      default:
        node_.push_back(nullptr);
    }
  }
  for (const auto& bus : network.busses) {
    const auto kind = to_string(bus.kind);
    switch (bus.kind) {
      case BusKind::slack:
        bus_.push_back({require(data_.V, bus.id, "V", kind), require(data_.phi, bus.id, "phi", kind)});
        break;
      case BusKind::generator:
        bus_.push_back({require(data_.P, bus.id, "P", kind), require(data_.V, bus.id, "V", kind)});
        break;
      case BusKind::load:
        bus_.push_back({require(data_.P, bus.id, "P", kind), require(data_.Q, bus.id, "Q", kind)});
        break;
    }
  }
}

BoundaryValues BoundarySchedule::at(double t) const {
  BoundaryValues v;
  v.node.reserve(node_.size());
  for (const auto* s : node_) v.node.push_back(s ? s->at(t) : 0.0);
  v.bus.reserve(bus_.size());
  for (const auto& pair : bus_) v.bus.push_back({pair[0]->at(t), pair[1]->at(t)});
  return v;
}

std::size_t Scenario::steps() const {
  const double m = horizon_hours * 60.0 / dt_minutes;
  return static_cast<std::size_t>(std::lround(m));
}

std::vector<std::string> step_ratio_advisories(const Network& network, const Scenario& s) {
  std::vector<std::string> out;
  for (const auto& pipe : network.pipes) {
    if (!(pipe.length > 0.0) || pipe.cell_count < 1) continue;
    const double ratio = s.dt_seconds() / pipe.cell_length();
    if (ratio > 10.0 * kReferenceStepRatio || ratio < 0.1 * kReferenceStepRatio) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "pipe \"%s\": dt/dx = %.3g s/m is far from the reference %.3g s/m",
                    pipe.id.c_str(), ratio, kReferenceStepRatio);
      out.emplace_back(buf);
    }
  }
  return out;
}

void check_scenario(const Network& network, const Scenario& s) {
  if (!(s.horizon_hours > 0.0) || !(s.dt_minutes > 0.0)) {
    throw InputError("scenario: horizon and time step must be positive");
  }
  const double m = s.horizon_hours * 60.0 / s.dt_minutes;
  if (std::abs(m - std::round(m)) > 1e-9 * m) {
    throw InputError("scenario: horizon is not a multiple of the time step");
  }
  for (const auto& [id, p] : s.pressure_bounds) {
    if (!network.node_index(id)) throw InputError("pressure bound references unknown node \"" + id + "\"");
    if (!(p > 0.0)) throw InputError("pressure bound at \"" + id + "\" must be positive");
  }
  if (!(s.control_bounds.max > s.control_bounds.min)) {
    throw InputError("scenario: control upper bound must exceed the lower bound");
  }
  const auto& o = s.optimizer;
  if (!(o.mu0 > 0.0) || !(o.mu_factor > 0.0 && o.mu_factor < 1.0) || !(o.mu_min > 0.0)) {
    throw InputError("optimizer: need mu0 > 0, mu_factor in (0, 1), mu_min > 0");
  }
  if (!(s.newton.tol > 0.0) || s.newton.max_iter < 1) {
    throw InputError("newton: tol must be positive and max_iter >= 1");
  }
  BoundarySchedule(network, s.boundary);
}

}  // namespace gaspower
