#pragma once

#include <Eigen/Core>
#include <vector>

namespace kfp {

/// Points and vectors of the ambient space. The interval only uses the first
/// component; the second one is kept at zero.
using Vec2 = Eigen::Vector2d;

enum class DomainKind { Interval, Disk };

/// Accommodation coefficient on the boundary: either a constant or a
/// piecewise-constant table. For the interval the table has one entry per
/// endpoint (left, right); for the disk it splits [0, 2pi) into equal sectors.
class Accommodation {
 public:
  Accommodation(double constant = 1.0);  // NOLINT(google-explicit-constructor)
  explicit Accommodation(std::vector<double> table);

  bool is_constant() const { return table_.size() == 1; }
  const std::vector<double>& table() const { return table_; }
  double entry(std::size_t i) const { return table_[i % table_.size()]; }

 private:
  std::vector<double> table_;
};

struct BoundaryNode {
  Vec2 position;
  Vec2 normal;
  double weight;  // surface measure carried by the node
  double iota;
};

/// Spatial region described through its signed distance function delta.
/// Immutable after construction.
class Domain {
 public:
  static Domain interval(double length, Accommodation iota = Accommodation(1.0));
  static Domain disk(double radius, Accommodation iota = Accommodation(1.0));

  DomainKind kind() const { return kind_; }
  int dim() const { return kind_ == DomainKind::Interval ? 1 : 2; }
  double extent() const { return extent_; }
  const Accommodation& accommodation() const { return iota_; }

  /// delta(x): distance to the boundary inside, negative outside.
  double signed_distance(const Vec2& x) const;

  /// Unit outward normal at a boundary point (|delta(x)| <= 1e-9 required).
  Vec2 outward_normal(const Vec2& x) const;

  /// -grad(delta) at any point; zero where delta has a kink (interval
  /// midpoint, disk center).
  Vec2 normal_field(const Vec2& x) const;

  /// Accommodation at a boundary point.
  double iota_at(const Vec2& x) const;

  /// D = sup delta (half the diameter for both supported shapes).
  double diameter_bound() const { return kind_ == DomainKind::Interval ? 0.5 * extent_ : extent_; }
  double measure() const;
  double boundary_measure() const;

  /// Interval: the two endpoints with unit (counting) weight.
  /// Disk: `resolution` equally spaced nodes at sector midpoints.
  std::vector<BoundaryNode> boundary_quadrature(int resolution) const;

 private:
  Domain(DomainKind kind, double extent, Accommodation iota);

  DomainKind kind_;
  double extent_;
  Accommodation iota_;
};

}  // namespace kfp
