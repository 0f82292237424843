#pragma once

// Compact planar sets, their rasterization onto uniform node-centered grids,
// and node classification into exterior / interior / boundary.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dbarlab/error.hpp"

namespace dbarlab {

struct BoundingBox {
  cplx lo;
  cplx hi;
};

class CompactDomain {
 public:
  enum class Kind {
    Disk,
    Union,
    AnnulusSector,
    SectorChain,
    DiskChain,
    Comb,
    InnerSpiral,
    Polygon,
  };

  /// Comb geometry: a base bar [0, 1 + w_1/2] x [-base, 0] carrying teeth
  /// centered at x = 1/n (n = 1..count) of width width_factor*(1/n - 1/(n+1))
  /// and height `height`. The limit segment {0} x [0, height] belongs to K.
  struct CombParams {
    int count = 8;
    double height = 1.0;
    double base = 0.2;
    double width_factor = 0.3;
  };

  static CompactDomain disk(cplx center, double radius);
  static CompactDomain union_of(std::vector<CompactDomain> parts);
  /// {r_in <= |z| <= r_out, |arg z| <= half_angle}.
  static CompactDomain annulus_sector(double r_in, double r_out, double half_angle);
  /// {0} u S_1 u ... u S_count with S_n = {4^-n/2 <= |z| <= 4^-n, |arg z| <= pi/4}.
  static CompactDomain sector_chain(int count);
  /// {|z+1| <= 1} u D_3 u ... u D_{count+2} with D_n = {|z - 1/n| <= 1/n^3}.
  static CompactDomain disk_chain(int count);
  static CompactDomain comb(CombParams params);
  static CompactDomain comb() { return comb(CombParams{}); }
  /// {r e^{i theta} : 1/(theta+1) <= r <= 1/theta, pi <= theta <= theta_max}.
  static CompactDomain inner_spiral(double theta_max = 16.0 * std::numbers::pi);
  /// Closed polygon (even-odd rule, edges included). Needs >= 3 vertices.
  static CompactDomain polygon(std::vector<cplx> vertices);

  Kind kind() const;
  bool contains(cplx z) const;
  BoundingBox bounding_box() const;
  /// Points of K that matter exactly but are not resolved by a grid: the
  /// accumulation point of the chains, the spiral center, the comb spine.
  std::vector<cplx> tagged_points() const;
  std::string describe() const;

  int count() const;         // chains / comb
  double theta_max() const;  // inner spiral

 private:
  struct Shape;
  explicit CompactDomain(std::shared_ptr<const Shape> shape);
  std::shared_ptr<const Shape> shape_;
};

/// Index n of the sector S_n of sector_chain containing z, or nullopt.
std::optional<int> sector_chain_index(cplx z);
/// Upper right corner C_n = 4^-n e^{i pi/4} of S_n.
cplx sector_chain_corner(int n);
/// Index n >= 3 of the small disk D_n of disk_chain containing z, 0 for the
/// big disk, nullopt otherwise.
std::optional<int> disk_chain_index(cplx z, int count);

struct GridSpec {
  cplx origin;
  double h = 0.0;
  int nx = 0;
  int ny = 0;

  /// Grid whose origin is snapped to integer multiples of h and which covers
  /// the box with `margin` extra cells on each side.
  static GridSpec covering(const BoundingBox& box, double h, int margin = 2);

  std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
  }
  int col(std::size_t idx) const { return static_cast<int>(idx % static_cast<std::size_t>(nx)); }
  int row(std::size_t idx) const { return static_cast<int>(idx / static_cast<std::size_t>(nx)); }
  cplx node(int i, int j) const { return origin + h * cplx(i, j); }
  cplx node(std::size_t idx) const { return node(col(idx), row(idx)); }
  bool covers(const BoundingBox& box) const;
  /// Index of the node nearest to z, or nullopt if z is off the grid.
  std::optional<std::size_t> nearest(cplx z) const;
};

enum class NodeClass : std::uint8_t { Exterior, Inside, Interior, Boundary };

class RegionMask {
 public:
  /// `inside[k]` marks nodes where the membership predicate holds; the
  /// constructor derives Interior (all 8 neighbors inside) and Boundary.
  RegionMask(GridSpec grid, const std::vector<bool>& inside);

  const GridSpec& grid() const { return grid_; }
  std::size_t size() const { return classes_.size(); }
  NodeClass at(std::size_t idx) const { return classes_[idx]; }
  bool inside(std::size_t idx) const { return classes_[idx] != NodeClass::Exterior; }
  bool interior(std::size_t idx) const { return classes_[idx] == NodeClass::Interior; }
  bool boundary(std::size_t idx) const { return classes_[idx] == NodeClass::Boundary; }

  std::size_t inside_count() const { return inside_count_; }
  std::size_t interior_count() const { return interior_count_; }
  std::size_t boundary_count() const { return inside_count_ - interior_count_; }

  std::vector<std::size_t> inside_nodes() const;
  std::vector<std::size_t> interior_nodes() const;

  /// Mask whose Inside set is this mask's Interior set.
  RegionMask interior_mask() const;

  /// Chessboard (8-neighbor) distance in cells from each node to the nearest
  /// Boundary node; -1 where no boundary node is reachable.
  std::vector<int> boundary_distance() const;

 private:
  GridSpec grid_;
  std::vector<NodeClass> classes_;
  std::size_t inside_count_ = 0;
  std::size_t interior_count_ = 0;
};

using MaskPtr = std::shared_ptr<const RegionMask>;

RegionMask build_mask(const CompactDomain& domain, const GridSpec& grid);

struct Components {
  std::vector<int> label;  // -1 on Exterior nodes
  int count = 0;
};

/// 4-connected labeling of Inside nodes; labels are numbered in order of the
/// first node met in row-major scan.
Components connected_components(const RegionMask& mask);

/// Text dump: header "nx ny h origin_re origin_im", then ny rows (j = 0 first)
/// of nx characters E/I/N/B (exterior / inside-unclassified / interior /
/// boundary).
void write_mask(std::ostream& os, const RegionMask& mask);
RegionMask read_mask(std::istream& is);

/// Inline domain spec such as "disk:0,0,1", "union:disk:0,0,1|disk:3,0,1",
/// "sector_chain:4", "inner_spiral:50.2", "polygon:0,0,1,0,0,1".
CompactDomain parse_domain(const std::string& spec);

}  // namespace dbarlab
