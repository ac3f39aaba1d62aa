#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace flatcone {

/// Two copies of a strictly convex polygon glued along the boundary.
class DoubledPolygon {
 public:
  /// Counterclockwise vertex loop; InvalidSurface unless strictly convex.
  explicit DoubledPolygon(std::vector<Eigen::Vector2d> vertices);

  const std::vector<Eigen::Vector2d>& vertices() const noexcept { return vertices_; }
  int size() const noexcept { return static_cast<int>(vertices_.size()); }
  /// Area of both faces together.
  double area() const;
  DoubledPolygon scaled(double factor) const;
  /// Rescaled to total area 1.
  DoubledPolygon normalized() const;

 private:
  std::vector<Eigen::Vector2d> vertices_;
};

/// Boundary of a convex polyhedron with outward-oriented polygonal faces.
class ConvexPolyhedron {
 public:
  /// InvalidSurface on open or inconsistently oriented meshes, nonplanar
  /// faces or a nonconvex vertex set.
  ConvexPolyhedron(std::vector<Eigen::Vector3d> vertices, std::vector<std::vector<int>> faces);

  const std::vector<Eigen::Vector3d>& vertices() const noexcept { return vertices_; }
  const std::vector<std::vector<int>>& faces() const noexcept { return faces_; }
  int size() const noexcept { return static_cast<int>(vertices_.size()); }
  double area() const;
  ConvexPolyhedron scaled(double factor) const;
  ConvexPolyhedron normalized() const;

  /// Face on the other side of the edge (u, v) of face f.
  int neighbor(int face, int u, int v) const;

 private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<std::vector<int>> faces_;
  std::vector<std::vector<int>> neighbors_;  // per face, per edge k -> k+1
};

/// 2 (pi - interior angle) per vertex.
std::vector<double> cone_defects(const DoubledPolygon& poly);
/// 2 pi minus the incident face angles per vertex.
std::vector<double> cone_defects(const ConvexPolyhedron& poly);

/// Straight segment between two vertices, after rescaling to unit area unless
/// `normalize` is false.
double doubled_distance(const DoubledPolygon& poly, int i, int j, bool normalize = true);

/// Shortest geodesic between two vertices on the boundary, found by
/// enumerating face unfoldings with branch and bound. UnfoldingCapReached if a
/// sequence of more than `max_faces` faces is still below the bound.
double polyhedron_distance(const ConvexPolyhedron& poly, int i, int j, bool normalize = true,
                           int max_faces = 32);

/// Double of the triangle with angles phi1/2, phi2/2 at the ends of a unit side.
double doubled_triangle_area(double phi1, double phi2);

/// Polygonal coordinates of a doubled polygon cut along the diagonals from
/// vertex 0. P_k is the reflection of V_0 across the edge V_k V_{k+1};
/// z_k = (-1)^k (P_k - V_0) and the defects are ordered (V_1, ..., V_{m-1}, V_0).
/// The alternating sign matches the sign convention of the area matrix.
struct DevelopingData {
  std::vector<double> defects;
  Eigen::VectorXcd z;
};

DevelopingData developing_data(const DoubledPolygon& poly);

// ------------------------------------------------------------ torus quotient

/// Flat torus C / (Z + tau Z) divided by z -> -z: a sphere with four cone
/// points of angle pi at the half-lattice points, distinguished pair (0, 1/2).
class TorusQuotient {
 public:
  /// InvalidSurface unless tau lies in the fundamental domain
  /// |Re tau| <= 1, |tau +- 1/2| >= 1/2.
  explicit TorusQuotient(std::complex<double> tau);
  std::complex<double> tau() const noexcept { return tau_; }

 private:
  std::complex<double> tau_;
};

struct Sample {
  double l;
  double area;
  double a;
};

/// Invariants for any tau in the upper half plane.
Sample torus_invariants(std::complex<double> tau);
Sample torus_quotient_invariants(const TorusQuotient& tq);

struct SampleBatch {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  double epsilon = 0.01;
};

/// Samples per RNG stream; stream k is seeded with seed + k, so the batch
/// does not depend on the worker count.
inline constexpr std::size_t kSamplesPerStream = 1 << 16;

/// Rejection sampler for dx dy / y^2 on the fundamental domain with the
/// cusps below height epsilon removed.
SampleBatch sample_torus_quotient(std::size_t n, std::uint64_t seed, double epsilon,
                                  int workers = 1);

/// Relative hyperbolic mass removed by the cusp truncation, 3 eps / (2 pi).
double truncation_bias_bound(double epsilon);

// ------------------------------------------------------------ io

inline constexpr const char* kPolyhedronFormat = "flatcone-polyhedron/1";

ConvexPolyhedron polyhedron_from_json(const nlohmann::json& doc);
nlohmann::json polyhedron_to_json(const ConvexPolyhedron& poly);
DoubledPolygon polygon_from_json(const nlohmann::json& doc);
nlohmann::json polygon_to_json(const DoubledPolygon& poly);

/// CSV `l,area,a`, one sample per row.
std::string samples_to_csv(const SampleBatch& batch);
nlohmann::json samples_sidecar(const SampleBatch& batch);

// ------------------------------------------------------------ builders

DoubledPolygon regular_polygon(int sides);
ConvexPolyhedron regular_tetrahedron();
/// Square pyramid with unit base and lateral apex angles `apex_angle`.
ConvexPolyhedron square_pyramid(double apex_angle);
/// Square pyramid with unit base and the given height.
ConvexPolyhedron square_pyramid_with_height(double height);

}  // namespace flatcone
