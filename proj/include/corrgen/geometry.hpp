#pragma once

#include "corrgen/body_model.hpp"
#include "corrgen/camera.hpp"
#include "corrgen/common.hpp"

#include <algorithm>
#include <optional>
#include <queue>
#include <vector>

namespace corrgen {

struct SurfaceHit {
  int face = -1;
  double t = 0;    // ray parameter, meters
  Vec3 bary;       // (b0, b1, b2), sums to 1
};

// ---------------------------------------------------------------- triangles

// Moller-Trumbore in double precision. Returns hits with t > 1e-9; the
// caller owns face indexing and tie-breaking.
inline std::optional<SurfaceHit> intersect_triangle(const Ray& ray, const Vec3& v0,
                                                    const Vec3& v1, const Vec3& v2) {
  constexpr double kDetEps = 1e-14;
  constexpr double kTMin = 1e-9;
  constexpr double kBaryEps = 1e-12;
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 pvec = ray.dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < kDetEps) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = ray.origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < -kBaryEps || u > 1.0 + kBaryEps) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = ray.dir.dot(qvec) * inv_det;
  if (v < -kBaryEps || u + v > 1.0 + kBaryEps) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t <= kTMin) return std::nullopt;
  return SurfaceHit{-1, t, Vec3(1.0 - u - v, u, v)};
}

// ---------------------------------------------------------------- bvh

struct BvhNode {
  Vec3 lo, hi;
  int left = -1, right = -1;  // interior children
  int first = 0, count = 0;   // leaf triangle range into tri_order
  bool is_leaf() const { return count > 0; }
};

struct Bvh {
  std::vector<BvhNode> nodes;  // node 0 is the root
  std::vector<int> tri_order;
};

namespace detail {

struct TriRef {
  int index;
  Vec3 centroid, lo, hi;
};

inline int build_bvh_node(Bvh& bvh, std::vector<TriRef>& refs, int begin, int end,
                          int leaf_size) {
  const int node_index = static_cast<int>(bvh.nodes.size());
  bvh.nodes.push_back({});
  Vec3 lo(kInf, kInf, kInf), hi(-kInf, -kInf, -kInf);
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(refs[i].lo);
    hi = hi.cwiseMax(refs[i].hi);
  }
  bvh.nodes[node_index].lo = lo;
  bvh.nodes[node_index].hi = hi;

  if (end - begin <= leaf_size) {
    bvh.nodes[node_index].first = static_cast<int>(bvh.tri_order.size());
    bvh.nodes[node_index].count = end - begin;
    for (int i = begin; i < end; ++i) bvh.tri_order.push_back(refs[i].index);
    return node_index;
  }

  // Median split on centroids along the longest extent; ties on the
  // original triangle index keep the build deterministic.
  const Vec3 extent = hi - lo;
  int axis = 0;
  if (extent.y() > extent.x()) axis = 1;
  if (extent.z() > extent[axis]) axis = 2;
  std::sort(refs.begin() + begin, refs.begin() + end,
            [axis](const TriRef& a, const TriRef& b) {
              return a.centroid[axis] != b.centroid[axis]
                         ? a.centroid[axis] < b.centroid[axis]
                         : a.index < b.index;
            });
  const int mid = begin + (end - begin) / 2;
  const int left = build_bvh_node(bvh, refs, begin, mid, leaf_size);
  const int right = build_bvh_node(bvh, refs, mid, end, leaf_size);
  bvh.nodes[node_index].left = left;
  bvh.nodes[node_index].right = right;
  return node_index;
}

inline bool slab_hit(const BvhNode& node, const Ray& ray, const Vec3& inv_dir,
                     double t_max, double& t_enter) {
  double t0 = 1e-9, t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    if (std::isinf(inv_dir[a])) {
      if (ray.origin[a] < node.lo[a] - 1e-12 || ray.origin[a] > node.hi[a] + 1e-12)
        return false;
      continue;
    }
    double ta = (node.lo[a] - ray.origin[a]) * inv_dir[a];
    double tb = (node.hi[a] - ray.origin[a]) * inv_dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1 + 1e-12) return false;
  }
  t_enter = t0;
  return true;
}

}  // namespace detail

inline Bvh build_bvh(const std::vector<Vec3>& vertices,
                     const std::vector<std::array<int, 3>>& faces, int leaf_size = 4) {
  require(!faces.empty(), ErrorCode::EmptyInput, "cannot build a BVH over an empty mesh");
  std::vector<detail::TriRef> refs(faces.size());
  for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
    const Vec3& a = vertices[faces[i][0]];
    const Vec3& b = vertices[faces[i][1]];
    const Vec3& c = vertices[faces[i][2]];
    refs[i].index = i;
    refs[i].lo = a.cwiseMin(b).cwiseMin(c);
    refs[i].hi = a.cwiseMax(b).cwiseMax(c);
    refs[i].centroid = (a + b + c) / 3.0;
  }
  Bvh bvh;
  bvh.nodes.reserve(faces.size() * 2);
  bvh.tri_order.reserve(faces.size());
  detail::build_bvh_node(bvh, refs, 0, static_cast<int>(faces.size()), leaf_size);
  return bvh;
}

inline Bvh build_bvh(const PosedMesh& mesh, int leaf_size = 4) {
  return build_bvh(mesh.vertices, mesh.faces, leaf_size);
}

inline int bvh_depth(const Bvh& bvh, int node = 0) {
  const BvhNode& n = bvh.nodes[node];
  if (n.is_leaf()) return 1;
  return 1 + std::max(bvh_depth(bvh, n.left), bvh_depth(bvh, n.right));
}

// Nearest positive hit; exact ties on t resolved to the lowest face index.
inline std::optional<SurfaceHit> ray_cast(const Bvh& bvh, const std::vector<Vec3>& vertices,
                                          const std::vector<std::array<int, 3>>& faces,
                                          const Ray& ray) {
  const Vec3 inv_dir = ray.dir.cwiseInverse();
  std::optional<SurfaceHit> best;
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = bvh.nodes[stack[--top]];
    double t_enter;
    if (!detail::slab_hit(node, ray, inv_dir, best ? best->t + 1e-12 : kInf, t_enter))
      continue;
    if (node.is_leaf()) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = bvh.tri_order[i];
        const auto hit =
            intersect_triangle(ray, vertices[faces[f][0]], vertices[faces[f][1]],
                               vertices[faces[f][2]]);
        if (!hit) continue;
        if (!best || hit->t < best->t || (hit->t == best->t && f < best->face)) {
          best = *hit;
          best->face = f;
        }
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best;
}

inline std::optional<SurfaceHit> ray_cast(const Bvh& bvh, const PosedMesh& mesh,
                                          const Ray& ray) {
  return ray_cast(bvh, mesh.vertices, mesh.faces, ray);
}

// ---------------------------------------------------------------- visibility

// Eq.-style per-vertex visibility: the vertex must project inside the image
// in front of the near plane, and the segment from the vertex (offset
// outward along its normal) to the camera center must be unobstructed.
inline std::vector<std::uint8_t> vertex_visibility(const PosedMesh& mesh, const Bvh& bvh,
                                                   const CameraModel& camera,
                                                   double normal_offset = 1e-5) {
  std::vector<std::uint8_t> visible(mesh.vertices.size(), 0);
  const Vec3 cam_pos = camera.position();
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const auto proj = project_full(camera, mesh.vertices[v]);
    if (!proj || !pixel_in_bounds(camera, proj->pixel)) continue;
    const Vec3 origin = mesh.vertices[v] + normal_offset * mesh.normals[v];
    const Vec3 to_cam = cam_pos - origin;
    const double dist = to_cam.norm();
    if (dist < 1e-12) {
      visible[v] = 1;
      continue;
    }
    const auto hit = ray_cast(bvh, mesh, Ray{origin, to_cam / dist});
    if (!hit || hit->t >= dist - 1e-9) visible[v] = 1;
  }
  return visible;
}

inline std::optional<SurfaceHit> pixel_to_surface(const CameraModel& camera, const Bvh& bvh,
                                                  const PosedMesh& mesh, const Vec2& pixel) {
  require(pixel_in_bounds(camera, pixel), ErrorCode::InvalidArgument,
          "pixel outside image bounds");
  return ray_cast(bvh, mesh, pixel_ray(camera, pixel));
}

// ---------------------------------------------------------------- geodesics

// Undirected edge graph of a triangle mesh, weighted by Euclidean length.
struct EdgeGraph {
  std::vector<int> offsets;
  std::vector<std::pair<int, double>> neighbors;  // (vertex, edge length)

  EdgeGraph() = default;
  EdgeGraph(const std::vector<Vec3>& vertices, const std::vector<std::array<int, 3>>& faces) {
    const int n = static_cast<int>(vertices.size());
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    auto add_edge = [&](int a, int b) {
      for (const auto& [v, w] : adj[a])
        if (v == b) return;
      const double len = (vertices[a] - vertices[b]).norm();
      adj[a].push_back({b, len});
      adj[b].push_back({a, len});
    };
    for (const auto& f : faces) {
      add_edge(f[0], f[1]);
      add_edge(f[1], f[2]);
      add_edge(f[2], f[0]);
    }
    offsets.assign(n + 1, 0);
    for (int v = 0; v < n; ++v) {
      std::sort(adj[v].begin(), adj[v].end());
      offsets[v + 1] = offsets[v] + static_cast<int>(adj[v].size());
    }
    neighbors.reserve(offsets[n]);
    for (int v = 0; v < n; ++v)
      neighbors.insert(neighbors.end(), adj[v].begin(), adj[v].end());
  }

  int vertex_count() const { return static_cast<int>(offsets.size()) - 1; }

  std::vector<double> dijkstra(int source) const {
    const int n = vertex_count();
    require(source >= 0 && source < n, ErrorCode::OutOfRange,
            "geodesic source vertex out of range: " + std::to_string(source));
    std::vector<double> dist(n, kInf);
    dist[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.push({0.0, source});
    while (!queue.empty()) {
      const auto [d, v] = queue.top();
      queue.pop();
      if (d > dist[v]) continue;
      for (int i = offsets[v]; i < offsets[v + 1]; ++i) {
        const auto& [u, w] = neighbors[i];
        const double nd = d + w;
        if (nd < dist[u]) {
          dist[u] = nd;
          queue.push({nd, u});
        }
      }
    }
    return dist;
  }
};

inline std::vector<double> geodesic_distances(const std::vector<Vec3>& vertices,
                                              const std::vector<std::array<int, 3>>& faces,
                                              int source_vertex) {
  return EdgeGraph(vertices, faces).dijkstra(source_vertex);
}

}  // namespace corrgen
