#include "kfp/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kfp/errors.hpp"

namespace kfp {

namespace {

constexpr double kBoundaryTol = 1e-9;

void check_iota(const std::vector<double>& table) {
  require(!table.empty(), "accommodation table must not be empty");
  for (double v : table) {
    require(v >= 0.0 && v <= 1.0, "accommodation coefficient must lie in [0,1], got " + std::to_string(v));
  }
}

}  // namespace

Accommodation::Accommodation(double constant) : table_{constant} { check_iota(table_); }

Accommodation::Accommodation(std::vector<double> table) : table_(std::move(table)) { check_iota(table_); }

Domain::Domain(DomainKind kind, double extent, Accommodation iota)
    : kind_(kind), extent_(extent), iota_(std::move(iota)) {
  require(extent > 0.0, "domain extent must be positive");
  if (kind == DomainKind::Interval) {
    require(iota_.table().size() <= 2, "interval accommodation table has at most two entries");
  }
}

Domain Domain::interval(double length, Accommodation iota) {
  return Domain(DomainKind::Interval, length, std::move(iota));
}

Domain Domain::disk(double radius, Accommodation iota) {
  return Domain(DomainKind::Disk, radius, std::move(iota));
}

double Domain::signed_distance(const Vec2& x) const {
  if (kind_ == DomainKind::Interval) return std::min(x[0], extent_ - x[0]);
  return extent_ - x.norm();
}

Vec2 Domain::outward_normal(const Vec2& x) const {
  const double d = signed_distance(x);
  require(std::abs(d) <= kBoundaryTol,
          "outward_normal: point is not on the boundary (delta = " + std::to_string(d) + ")");
  if (kind_ == DomainKind::Interval) {
    return x[0] < 0.5 * extent_ ? Vec2(-1.0, 0.0) : Vec2(1.0, 0.0);
  }
  return x / x.norm();
}

Vec2 Domain::normal_field(const Vec2& x) const {
  if (kind_ == DomainKind::Interval) {
    const double mid = 0.5 * extent_;
    if (x[0] < mid) return {-1.0, 0.0};
    if (x[0] > mid) return {1.0, 0.0};
    return Vec2::Zero();
  }
  const double r = x.norm();
  if (r == 0.0) return Vec2::Zero();
  return x / r;
}

double Domain::iota_at(const Vec2& x) const {
  const auto& table = iota_.table();
  if (table.size() == 1) return table.front();
  if (kind_ == DomainKind::Interval) return x[0] < 0.5 * extent_ ? table[0] : table[1];
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0.0) theta += 2.0 * std::numbers::pi;
  auto sector = static_cast<std::size_t>(theta / (2.0 * std::numbers::pi) * static_cast<double>(table.size()));
  if (sector >= table.size()) sector = table.size() - 1;
  return table[sector];
}

double Domain::measure() const {
  if (kind_ == DomainKind::Interval) return extent_;
  return std::numbers::pi * extent_ * extent_;
}

double Domain::boundary_measure() const {
  if (kind_ == DomainKind::Interval) return 2.0;
  return 2.0 * std::numbers::pi * extent_;
}

std::vector<BoundaryNode> Domain::boundary_quadrature(int resolution) const {
  require(resolution >= 1, "boundary_quadrature: resolution must be >= 1");
  std::vector<BoundaryNode> nodes;
  if (kind_ == DomainKind::Interval) {
    for (double x : {0.0, extent_}) {
      const Vec2 p(x, 0.0);
      nodes.push_back({p, outward_normal(p), 1.0, iota_at(p)});
    }
    return nodes;
  }
  nodes.reserve(static_cast<std::size_t>(resolution));
  const double dtheta = 2.0 * std::numbers::pi / resolution;
  for (int b = 0; b < resolution; ++b) {
    const double theta = (b + 0.5) * dtheta;
    const Vec2 n(std::cos(theta), std::sin(theta));
    const Vec2 p = extent_ * n;
    nodes.push_back({p, n, extent_ * dtheta, iota_at(p)});
  }
  return nodes;
}

}  // namespace kfp
