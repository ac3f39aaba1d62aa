#include "flatcone/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/dijkstra_shortest_paths.hpp>

#include "flatcone/error.hpp"
#include "flatcone/parallel.hpp"
#include "flatcone/signature.hpp"

namespace flatcone {

namespace {

[[noreturn]] void invalid_surface(const std::string& what) {
  throw Error(ErrorKind::InvalidSurface, what);
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double shoelace(const std::vector<Eigen::Vector2d>& loop) {
  double sum = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    sum += cross2(loop[k], loop[(k + 1) % loop.size()]);
  }
  return 0.5 * sum;
}

/// Interior angle at vertex b of the corner a-b-c.
template <typename Vec>
double corner_angle(const Vec& a, const Vec& b, const Vec& c) {
  const Vec u = a - b;
  const Vec v = c - b;
  return std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0));
}

Eigen::Vector3d newell_normal(const std::vector<Eigen::Vector3d>& points,
                              const std::vector<int>& loop) {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Eigen::Vector3d& p = points[static_cast<std::size_t>(loop[k])];
    const Eigen::Vector3d& q = points[static_cast<std::size_t>(loop[(k + 1) % loop.size()])];
    n += p.cross(q);
  }
  return n;
}

Eigen::Vector3d centroid(const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const auto& p : points) c += p;
  return c / static_cast<double>(points.size());
}

void require_vertex(int index, int count) {
  if (index < 0 || index >= count) {
    std::ostringstream msg;
    msg << "vertex index " << index << " outside [0, " << count << ")";
    throw Error(ErrorKind::InvalidSurface, msg.str());
  }
}

/// Uniform double in [0, 1) from the top 53 bits; fixed across platforms.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

// ------------------------------------------------------------ DoubledPolygon

DoubledPolygon::DoubledPolygon(std::vector<Eigen::Vector2d> vertices)
    : vertices_(std::move(vertices)) {
  const std::size_t m = vertices_.size();
  if (m < 3) invalid_surface("a polygon needs at least three vertices");
  double scale = 0.0;
  for (const auto& v : vertices_) {
    if (!v.allFinite()) invalid_surface("polygon vertices must be finite");
    scale = std::max(scale, (v - vertices_.front()).norm());
  }
  double turning = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Eigen::Vector2d e0 = vertices_[(k + 1) % m] - vertices_[k];
    const Eigen::Vector2d e1 = vertices_[(k + 2) % m] - vertices_[(k + 1) % m];
    if (!(cross2(e0, e1) > 1e-12 * scale * scale)) {
      invalid_surface("polygon is not strictly convex and counterclockwise");
    }
    turning += std::atan2(cross2(e0, e1), e0.dot(e1));
  }
  if (std::abs(turning - kTwoPi) > 1e-9) invalid_surface("polygon loop winds more than once");
}

double DoubledPolygon::area() const { return 2.0 * shoelace(vertices_); }

DoubledPolygon DoubledPolygon::scaled(double factor) const {
  std::vector<Eigen::Vector2d> v = vertices_;
  for (auto& p : v) p *= factor;
  return DoubledPolygon(std::move(v));
}

DoubledPolygon DoubledPolygon::normalized() const { return scaled(1.0 / std::sqrt(area())); }

std::vector<double> cone_defects(const DoubledPolygon& poly) {
  const auto& v = poly.vertices();
  const std::size_t m = v.size();
  std::vector<double> defects(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double angle = corner_angle(v[(k + m - 1) % m], v[k], v[(k + 1) % m]);
    defects[k] = 2.0 * (kPi - angle);
  }
  return defects;
}

double doubled_distance(const DoubledPolygon& poly, int i, int j, bool normalize) {
  require_vertex(i, poly.size());
  require_vertex(j, poly.size());
  const double factor = normalize ? 1.0 / std::sqrt(poly.area()) : 1.0;
  const auto& v = poly.vertices();
  return factor * (v[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(j)]).norm();
}

DevelopingData developing_data(const DoubledPolygon& poly) {
  const auto& v = poly.vertices();
  const int m = poly.size();
  const std::vector<double> d = cone_defects(poly);
  DevelopingData out;
  for (int k = 1; k < m; ++k) out.defects.push_back(d[static_cast<std::size_t>(k)]);
  out.defects.push_back(d.front());
  out.z.resize(m - 2);
  const Eigen::Vector2d& origin = v.front();
  for (int k = 1; k <= m - 2; ++k) {
    const Eigen::Vector2d& a = v[static_cast<std::size_t>(k)];
    const Eigen::Vector2d& b = v[static_cast<std::size_t>(k + 1)];
    const Eigen::Vector2d dir = (b - a).normalized();
    const Eigen::Vector2d foot = a + (origin - a).dot(dir) * dir;
    const Eigen::Vector2d z = (k % 2 == 0 ? 2.0 : -2.0) * (foot - origin);
    out.z[k - 1] = {z.x(), z.y()};
  }
  return out;
}

double doubled_triangle_area(double phi1, double phi2) {
  const double a = 0.5 * phi1;
  const double b = 0.5 * phi2;
  if (!(a > 0.0 && b > 0.0 && a + b < kPi)) {
    throw Error(ErrorKind::DegenerateTriangle, "half angles must be positive with sum below pi");
  }
  // Law of sines puts the apex at distance sin b / sin(a + b) from the origin.
  const double r = std::sin(b) / std::sin(a + b);
  const std::vector<Eigen::Vector2d> triangle{
      {0.0, 0.0}, {1.0, 0.0}, {r * std::cos(a), r * std::sin(a)}};
  return 2.0 * shoelace(triangle);
}

// ------------------------------------------------------------ ConvexPolyhedron

ConvexPolyhedron::ConvexPolyhedron(std::vector<Eigen::Vector3d> vertices,
                                   std::vector<std::vector<int>> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int count = static_cast<int>(vertices_.size());
  if (count < 4 || faces_.size() < 4) invalid_surface("a polyhedron needs four vertices and faces");
  double scale = 0.0;
  const Eigen::Vector3d center = centroid(vertices_);
  for (const auto& p : vertices_) {
    if (!p.allFinite()) invalid_surface("polyhedron vertices must be finite");
    scale = std::max(scale, (p - center).norm());
  }

  std::map<std::pair<int, int>, std::pair<int, int>> directed;  // (u, v) -> (face, slot)
  std::vector<int> used(static_cast<std::size_t>(count), 0);
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    if (loop.size() < 3) invalid_surface("faces need at least three vertices");
    for (std::size_t k = 0; k < loop.size(); ++k) {
      require_vertex(loop[k], count);
      used[static_cast<std::size_t>(loop[k])] = 1;
      const int u = loop[k];
      const int v = loop[(k + 1) % loop.size()];
      if (u == v) invalid_surface("face repeats a vertex");
      if (!directed.emplace(std::pair{u, v}, std::pair{static_cast<int>(f), static_cast<int>(k)})
               .second) {
        invalid_surface("edge used twice in the same direction (inconsistent orientation)");
      }
    }
  }
  if (std::find(used.begin(), used.end(), 0) != used.end()) {
    invalid_surface("every vertex must belong to a face");
  }

  neighbors_.resize(faces_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const auto& loop = faces_[f];
    neighbors_[f].resize(loop.size());
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const auto it = directed.find({loop[(k + 1) % loop.size()], loop[k]});
      if (it == directed.end()) invalid_surface("mesh is not closed");
      neighbors_[f][k] = it->second.first;
    }
  }
  const std::size_t edges = directed.size() / 2;
  if (static_cast<long>(count) - static_cast<long>(edges) + static_cast<long>(faces_.size()) != 2) {
    invalid_surface("mesh is not a sphere");
  }

  for (const auto& loop : faces_) {
    const Eigen::Vector3d n = newell_normal(vertices_, loop);
    if (!(n.norm() > 0.0)) invalid_surface("degenerate face");
    const Eigen::Vector3d unit = n.normalized();
    const Eigen::Vector3d& p = vertices_[static_cast<std::size_t>(loop.front())];
    for (int w : loop) {
      if (std::abs(unit.dot(vertices_[static_cast<std::size_t>(w)] - p)) > 1e-10 * scale) {
        invalid_surface("face is not planar");
      }
    }
    if (!(unit.dot(p - center) > 0.0)) invalid_surface("face is not outward oriented");
    for (const auto& q : vertices_) {
      if (unit.dot(q - p) > 1e-9 * scale) invalid_surface("vertex set is not convex");
    }
  }
}

double ConvexPolyhedron::area() const {
  double sum = 0.0;
  for (const auto& loop : faces_) sum += 0.5 * newell_normal(vertices_, loop).norm();
  return sum;
}

ConvexPolyhedron ConvexPolyhedron::scaled(double factor) const {
  std::vector<Eigen::Vector3d> v = vertices_;
  for (auto& p : v) p *= factor;
  return ConvexPolyhedron(std::move(v), faces_);
}

ConvexPolyhedron ConvexPolyhedron::normalized() const { return scaled(1.0 / std::sqrt(area())); }

int ConvexPolyhedron::neighbor(int face, int u, int v) const {
  const auto& loop = faces_[static_cast<std::size_t>(face)];
  for (std::size_t k = 0; k < loop.size(); ++k) {
    if (loop[k] == u && loop[(k + 1) % loop.size()] == v) {
      return neighbors_[static_cast<std::size_t>(face)][k];
    }
  }
  throw Error(ErrorKind::NotConnected, "edge does not belong to the face");
}

std::vector<double> cone_defects(const ConvexPolyhedron& poly) {
  const auto& v = poly.vertices();
  std::vector<double> defects(v.size(), kTwoPi);
  for (const auto& loop : poly.faces()) {
    const std::size_t m = loop.size();
    for (std::size_t k = 0; k < m; ++k) {
      const auto at = [&](std::size_t idx) -> const Eigen::Vector3d& {
        return v[static_cast<std::size_t>(loop[idx % m])];
      };
      defects[static_cast<std::size_t>(loop[k])] -= corner_angle(at(k + m - 1), at(k), at(k + 1));
    }
  }
  return defects;
}

// ------------------------------------------------------------ geodesics

namespace {

double edge_graph_distance(const ConvexPolyhedron& poly, int source, int target) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS,
                                      boost::no_property,
                                      boost::property<boost::edge_weight_t, double>>;
  Graph graph(static_cast<std::size_t>(poly.size()));
  const auto& v = poly.vertices();
  for (const auto& loop : poly.faces()) {
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const int a = loop[k];
      const int b = loop[(k + 1) % loop.size()];
      if (a < b) {
        boost::add_edge(static_cast<std::size_t>(a), static_cast<std::size_t>(b),
                        (v[static_cast<std::size_t>(a)] - v[static_cast<std::size_t>(b)]).norm(),
                        graph);
      }
    }
  }
  std::vector<double> dist(static_cast<std::size_t>(poly.size()));
  boost::dijkstra_shortest_paths(graph, static_cast<std::size_t>(source),
                                 boost::distance_map(dist.data()));
  const double d = dist[static_cast<std::size_t>(target)];
  if (!(d < std::numeric_limits<double>::max())) {
    throw Error(ErrorKind::NotConnected, "vertices are not connected by edges");
  }
  return d;
}

/// A face laid out in the plane with the source vertex at the origin, and the
/// angular window (relative to a fixed reference direction) of straight rays
/// from the source that reach it through the chain of unfolded edges.
struct Unfolded {
  int face;
  std::vector<Eigen::Vector2d> pos;
  double lo;
  double hi;
  int depth;
};

double distance_to_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double t = std::clamp(-a.dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + t * d).norm();
}

}  // namespace

double polyhedron_distance(const ConvexPolyhedron& input, int i, int j, bool normalize,
                           int max_faces) {
  require_vertex(i, input.size());
  require_vertex(j, input.size());
  if (i == j) return 0.0;
  const ConvexPolyhedron poly = normalize ? input.normalized() : input;
  const auto& verts = poly.vertices();
  const auto& faces = poly.faces();
  const auto vertex = [&](int w) -> const Eigen::Vector3d& {
    return verts[static_cast<std::size_t>(w)];
  };

  double best = edge_graph_distance(poly, i, j);
  constexpr double kAngleSlack = 1e-12;

  // Angles are measured from a reference direction inside the first face's
  // corner, so every window stays inside (-pi/2, pi/2) and never wraps.
  std::deque<Unfolded> queue;
  std::vector<double> references;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& loop = faces[f];
    const auto slot = std::find(loop.begin(), loop.end(), i);
    if (slot == loop.end()) continue;
    const std::size_t m = loop.size();
    const std::size_t k = static_cast<std::size_t>(slot - loop.begin());
    const Eigen::Vector3d normal = newell_normal(verts, loop).normalized();
    const Eigen::Vector3d e1 = (vertex(loop[(k + 1) % m]) - vertex(i)).normalized();
    const Eigen::Vector3d e2 = normal.cross(e1);
    Unfolded start{static_cast<int>(f), std::vector<Eigen::Vector2d>(m), 0.0, 0.0, 1};
    for (std::size_t w = 0; w < m; ++w) {
      const Eigen::Vector3d d = vertex(loop[w]) - vertex(i);
      start.pos[w] = {d.dot(e1), d.dot(e2)};
    }
    const Eigen::Vector2d& back = start.pos[(k + m - 1) % m];
    const double corner = std::atan2(back.y(), back.x());
    start.lo = -0.5 * corner;
    start.hi = 0.5 * corner;
    // Rotate so the corner bisector is the reference direction.
    const Eigen::Rotation2Dd turn(-0.5 * corner);
    for (auto& p : start.pos) p = turn * p;
    for (std::size_t w = 0; w < m; ++w) {
      if (loop[w] == j) best = std::min(best, start.pos[w].norm());
    }
    queue.push_back(std::move(start));
  }

  while (!queue.empty()) {
    Unfolded cur = std::move(queue.front());
    queue.pop_front();
    const auto& loop = faces[static_cast<std::size_t>(cur.face)];
    const std::size_t m = loop.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Eigen::Vector2d& a = cur.pos[k];
      const Eigen::Vector2d& b = cur.pos[(k + 1) % m];
      // Only edges on the far side of the face (seen counterclockwise from
      // the source) are exits; this also skips the entry edge.
      const double turn = cross2(a, b);
      if (!(turn > 0.0)) continue;
      const double angle_a = std::atan2(a.y(), a.x());
      const double angle_b = angle_a + std::atan2(turn, a.dot(b));
      const double lo = std::max(cur.lo, angle_a);
      const double hi = std::min(cur.hi, angle_b);
      if (!(hi > lo)) continue;
      if (distance_to_segment(a, b) >= best) continue;

      const int u = loop[k];
      const int v = loop[(k + 1) % m];
      const int next = poly.neighbor(cur.face, u, v);
      const auto& next_loop = faces[static_cast<std::size_t>(next)];
      const std::size_t nm = next_loop.size();
      // Unfold across (u, v): the neighbour lies to the right of a -> b.
      const Eigen::Vector2d ex = (b - a).normalized();
      const Eigen::Vector2d ey(ex.y(), -ex.x());
      const Eigen::Vector3d axis = (vertex(v) - vertex(u)).normalized();
      Unfolded child{next, std::vector<Eigen::Vector2d>(nm), lo, hi, cur.depth + 1};
      for (std::size_t w = 0; w < nm; ++w) {
        const int id = next_loop[w];
        if (id == u) {
          child.pos[w] = a;
        } else if (id == v) {
          child.pos[w] = b;
        } else {
          const Eigen::Vector3d d = vertex(id) - vertex(u);
          const double along = d.dot(axis);
          const double across = (d - along * axis).norm();
          child.pos[w] = a + along * ex + across * ey;
        }
        if (id == j) {
          const Eigen::Vector2d& p = child.pos[w];
          const double angle = std::atan2(p.y(), p.x());
          if (angle >= lo - kAngleSlack && angle <= hi + kAngleSlack) {
            best = std::min(best, p.norm());
          }
        }
      }
      if (child.depth > max_faces) {
        throw Error(ErrorKind::UnfoldingCapReached,
                    "unfolding sequence exceeds " + std::to_string(max_faces) + " faces");
      }
      queue.push_back(std::move(child));
    }
  }
  return best;
}

// ------------------------------------------------------------ torus quotient

TorusQuotient::TorusQuotient(std::complex<double> tau) : tau_(tau) {
  constexpr double kSlack = 1e-12;
  if (!(tau.imag() > 0.0) || !std::isfinite(tau.real()) || !std::isfinite(tau.imag())) {
    invalid_surface("tau must lie in the upper half plane");
  }
  if (std::abs(tau.real()) > 1.0 + kSlack || std::abs(tau - 0.5) < 0.5 - kSlack ||
      std::abs(tau + 0.5) < 0.5 - kSlack) {
    invalid_surface("tau lies outside the fundamental domain");
  }
}

Sample torus_invariants(std::complex<double> tau) {
  const double y = tau.imag();
  if (!(y > 0.0)) invalid_surface("tau must lie in the upper half plane");
  // Any lattice vector with |1/2 + lambda| <= 1/2 has |lambda| <= 1.
  double l = 0.5;
  const long n_max = static_cast<long>(std::floor(1.0 / y));
  for (long n = -n_max; n <= n_max; ++n) {
    const double shift = static_cast<double>(n) * tau.real();
    const long m_lo = static_cast<long>(std::ceil(-1.0 - shift));
    const long m_hi = static_cast<long>(std::floor(1.0 - shift));
    for (long m = m_lo; m <= m_hi; ++m) {
      l = std::min(l, std::abs(0.5 + static_cast<double>(m) + static_cast<double>(n) * tau));
    }
  }
  const double area = 0.5 * y;
  return {l, area, area / (l * l)};
}

Sample torus_quotient_invariants(const TorusQuotient& tq) { return torus_invariants(tq.tau()); }

SampleBatch sample_torus_quotient(std::size_t n, std::uint64_t seed, double epsilon,
                                  int workers) {
  if (!(epsilon > 0.0 && epsilon <= 0.05)) {
    throw Error(ErrorKind::InvalidConfig, "epsilon must lie in (0, 0.05]");
  }
  if (n == 0) throw Error(ErrorKind::InvalidConfig, "sample count must be positive");
  const std::size_t streams = (n + kSamplesPerStream - 1) / kSamplesPerStream;
  std::vector<std::vector<Sample>> parts(streams);
  parallel_for(streams, workers, [&](std::size_t s) {
    const std::size_t want = std::min(kSamplesPerStream, n - s * kSamplesPerStream);
    std::mt19937_64 rng(seed + s);
    auto& out = parts[s];
    out.reserve(want);
    while (out.size() < want) {
      const double x = 2.0 * unit_uniform(rng) - 1.0;
      const double y = epsilon / (1.0 - unit_uniform(rng));
      const std::complex<double> tau(x, y);
      if (std::abs(tau - 0.5) < 0.5 || std::abs(tau + 0.5) < 0.5) continue;
      out.push_back(torus_invariants(tau));
    }
  });
  SampleBatch batch;
  batch.seed = seed;
  batch.epsilon = epsilon;
  batch.samples.reserve(n);
  for (auto& part : parts) batch.samples.insert(batch.samples.end(), part.begin(), part.end());
  return batch;
}

double truncation_bias_bound(double epsilon) { return 3.0 * epsilon / kTwoPi; }

// ------------------------------------------------------------ io

namespace {

template <typename F>
auto parse_guarded(const char* what, F&& body) {
  try {
    return body();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string(what) + ": " + e.what());
  }
}

}  // namespace

ConvexPolyhedron polyhedron_from_json(const nlohmann::json& doc) {
  return parse_guarded("polyhedron", [&] {
    if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("faces")) {
      throw Error(ErrorKind::ParseError, "polyhedron needs vertices and faces");
    }
    if (doc.contains("format_version") && doc.at("format_version") != kPolyhedronFormat) {
      throw Error(ErrorKind::ParseError, "unsupported polyhedron format");
    }
    std::vector<Eigen::Vector3d> vertices;
    for (const auto& p : doc.at("vertices")) {
      if (!p.is_array() || p.size() != 3) throw Error(ErrorKind::ParseError, "vertex needs 3 coordinates");
      vertices.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    auto faces = doc.at("faces").get<std::vector<std::vector<int>>>();
    return ConvexPolyhedron(std::move(vertices), std::move(faces));
  });
}

nlohmann::json polyhedron_to_json(const ConvexPolyhedron& poly) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const auto& p : poly.vertices()) vertices.push_back({p.x(), p.y(), p.z()});
  return {{"format_version", kPolyhedronFormat}, {"vertices", vertices}, {"faces", poly.faces()}};
}

DoubledPolygon polygon_from_json(const nlohmann::json& doc) {
  return parse_guarded("polygon", [&] {
    if (!doc.is_object() || !doc.contains("vertices")) {
      throw Error(ErrorKind::ParseError, "polygon needs vertices");
    }
    std::vector<Eigen::Vector2d> vertices;
    for (const auto& p : doc.at("vertices")) {
      if (!p.is_array() || p.size() != 2) throw Error(ErrorKind::ParseError, "vertex needs 2 coordinates");
      vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    return DoubledPolygon(std::move(vertices));
  });
}

nlohmann::json polygon_to_json(const DoubledPolygon& poly) {
  nlohmann::json vertices = nlohmann::json::array();
  for (const auto& p : poly.vertices()) vertices.push_back({p.x(), p.y()});
  return {{"vertices", vertices}};
}

std::string samples_to_csv(const SampleBatch& batch) {
  std::string out = "l,area,a\n";
  out.reserve(out.size() + batch.samples.size() * 64);
  char line[96];
  for (const Sample& s : batch.samples) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.l, s.area, s.a);
    out += line;
  }
  return out;
}

nlohmann::json samples_sidecar(const SampleBatch& batch) {
  return {{"seed", batch.seed}, {"epsilon", batch.epsilon}, {"n", batch.samples.size()}};
}

// ------------------------------------------------------------ builders

namespace {

/// Flips face loops whose normal points toward the centroid.
std::vector<std::vector<int>> orient_outward(const std::vector<Eigen::Vector3d>& vertices,
                                             std::vector<std::vector<int>> faces) {
  const Eigen::Vector3d center = centroid(vertices);
  for (auto& loop : faces) {
    const Eigen::Vector3d n = newell_normal(vertices, loop);
    if (n.dot(vertices[static_cast<std::size_t>(loop.front())] - center) < 0.0) {
      std::reverse(loop.begin(), loop.end());
    }
  }
  return faces;
}

}  // namespace

DoubledPolygon regular_polygon(int sides) {
  if (sides < 3) invalid_surface("a polygon needs at least three sides");
  std::vector<Eigen::Vector2d> v;
  for (int k = 0; k < sides; ++k) {
    const double t = kTwoPi * k / sides;
    v.emplace_back(std::cos(t), std::sin(t));
  }
  return DoubledPolygon(std::move(v));
}

ConvexPolyhedron regular_tetrahedron() {
  std::vector<Eigen::Vector3d> v{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  auto faces = orient_outward(v, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
  return ConvexPolyhedron(std::move(v), std::move(faces));
}

ConvexPolyhedron square_pyramid_with_height(double height) {
  if (!(height > 0.0)) invalid_surface("pyramid height must be positive");
  std::vector<Eigen::Vector3d> v{
      {-0.5, -0.5, 0.0}, {0.5, -0.5, 0.0}, {0.5, 0.5, 0.0}, {-0.5, 0.5, 0.0}, {0.0, 0.0, height}};
  auto faces = orient_outward(v, {{0, 1, 2, 3}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
  return ConvexPolyhedron(std::move(v), std::move(faces));
}

ConvexPolyhedron square_pyramid(double apex_angle) {
  const double slant = 0.5 / std::sin(0.5 * apex_angle);
  const double h2 = slant * slant - 0.5;
  if (!(apex_angle > 0.0) || !(h2 > 0.0)) invalid_surface("apex angle too wide for a pyramid");
  return square_pyramid_with_height(std::sqrt(h2));
}

}  // namespace flatcone
