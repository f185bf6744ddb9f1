//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/faces/faces.h"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/boyer_myrvold_planar_test.hpp>
#include <boost/property_map/property_map.hpp>

namespace dualretro {
namespace {
std::vector<int> components_of(int num_nodes, std::span<const Edge> edges) {
  std::vector<int> parent(num_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v)
      v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto &[a, b]: edges)
    parent[find(a)] = find(b);
  // Relabel by smallest member so ids are stable.
  std::vector<int> label(num_nodes, -1), comp(num_nodes);
  int next = 0;
  for (int v = 0; v < num_nodes; ++v) {
    const int r = find(v);
    if (label[r] < 0)
      label[r] = next++;
    comp[v] = label[r];
  }
  return comp;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Cycle over edge ids turned into a closed walk starting at its smallest
// node and stepping first to the smaller neighbor.
Face cycle_face(std::span<const Edge> edges, const std::vector<int> &cycle) {
  std::unordered_map<int, std::vector<std::pair<int, int>>> adj;
  for (int e: cycle) {
    adj[edges[e].first].push_back({ edges[e].second, e });
    adj[edges[e].second].push_back({ edges[e].first, e });
  }
  int start = edges[cycle.front()].first;
  for (const auto &[v, _]: adj)
    start = std::min(start, v);
  for (auto &[v, nbs]: adj)
    std::sort(nbs.begin(), nbs.end());

  Face f;
  int prev_edge = -1, u = start;
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    f.nodes.push_back(u);
    for (const auto &[w, e]: adj[u]) {
      if (e != prev_edge) {
        f.edges.push_back(e);
        prev_edge = e;
        u = w;
        break;
      }
    }
  }
  return f;
}

using Bits = std::vector<std::uint64_t>;

int first_set(const Bits &b) {
  for (std::size_t w = 0; w < b.size(); ++w)
    if (b[w])
      return static_cast<int>(w * 64 + __builtin_ctzll(b[w]));
  return -1;
}
}  // namespace

std::optional<PlanarEmbedding> planar_embed(int num_nodes,
                                            std::span<const Edge> edges) {
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::undirectedS,
      boost::property<boost::vertex_index_t, int>,
      boost::property<boost::edge_index_t, int>>;
  using EdgeDesc = boost::graph_traits<Graph>::edge_descriptor;

  Graph g(num_nodes);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const auto [desc, added] = boost::add_edge(edges[e].first,
                                               edges[e].second, g);
    (void)added;
    boost::put(boost::edge_index, g, desc, e);
  }

  std::vector<std::vector<EdgeDesc>> order(num_nodes);
  const bool planar = boost::boyer_myrvold_planarity_test(
      boost::boyer_myrvold_params::graph = g,
      boost::boyer_myrvold_params::embedding = boost::make_iterator_property_map(
          order.begin(), boost::get(boost::vertex_index, g)));
  if (!planar)
    return std::nullopt;

  PlanarEmbedding emb;
  emb.num_nodes = num_nodes;
  emb.edges.assign(edges.begin(), edges.end());
  emb.rotation.resize(num_nodes);
  for (int v = 0; v < num_nodes; ++v)
    for (const EdgeDesc &d: order[v])
      emb.rotation[v].push_back(boost::get(boost::edge_index, g, d));
  return emb;
}

std::optional<PlanarEmbedding> planar_embed(const Molecule &mol) {
  const auto edges = edge_list(mol);
  return planar_embed(mol.num_atoms(), edges);
}

FaceSet enumerate_faces(const PlanarEmbedding &emb) {
  const int n = emb.num_nodes;
  const int m = static_cast<int>(emb.edges.size());

  // Position of each edge in the rotation of each endpoint.
  std::vector<std::array<int, 2>> slot(m, { -1, -1 });
  for (int v = 0; v < n; ++v) {
    for (int k = 0; k < static_cast<int>(emb.rotation[v].size()); ++k) {
      const int e = emb.rotation[v][k];
      slot[e][emb.edges[e].first == v ? 0 : 1] = k;
    }
  }

  // Half-edge 2e leaves edges[e].first, 2e + 1 leaves edges[e].second.
  auto tail = [&](int h) {
    return h % 2 == 0 ? emb.edges[h / 2].first : emb.edges[h / 2].second;
  };
  auto head = [&](int h) {
    return h % 2 == 0 ? emb.edges[h / 2].second : emb.edges[h / 2].first;
  };
  auto next = [&](int h) {
    const int e = h / 2, v = head(h);
    const auto &rot = emb.rotation[v];
    const int k = slot[e][h % 2 == 0 ? 1 : 0];
    const int e2 = rot[(k + 1) % rot.size()];
    return 2 * e2 + (emb.edges[e2].first == v ? 0 : 1);
  };

  FaceSet out;
  out.edge_faces.assign(m, { -1, -1 });
  std::vector<int> face_of(2 * m, -1);
  for (int h = 0; h < 2 * m; ++h) {
    if (face_of[h] >= 0)
      continue;
    const int id = static_cast<int>(out.faces.size());
    Face f;
    int cur = h;
    do {
      face_of[cur] = id;
      f.nodes.push_back(tail(cur));
      f.edges.push_back(cur / 2);
      out.edge_faces[cur / 2][cur % 2] = id;
      cur = next(cur);
    } while (cur != h);
    out.faces.push_back(std::move(f));
  }

  std::vector<int> degree(n, 0);
  for (const auto &[a, b]: emb.edges) {
    ++degree[a];
    ++degree[b];
  }
  for (int v = 0; v < n; ++v) {
    if (degree[v] == 0) {
      Face f;
      f.nodes.push_back(v);
      out.faces.push_back(std::move(f));
    }
  }

  const std::vector<int> comp = components_of(n, emb.edges);
  const int ncomp = n == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  std::vector<int> best(ncomp, -1);
  std::vector<std::vector<int>> best_key(ncomp);
  for (int f = 0; f < static_cast<int>(out.faces.size()); ++f) {
    const int c = comp[out.faces[f].nodes.front()];
    std::vector<int> key = out.faces[f].nodes;
    std::sort(key.begin(), key.end());
    const int b = best[c];
    if (b < 0 || out.faces[f].nodes.size() > out.faces[b].nodes.size()
        || (out.faces[f].nodes.size() == out.faces[b].nodes.size()
            && key < best_key[c])) {
      best[c] = f;
      best_key[c] = std::move(key);
    }
  }
  for (int b: best)
    out.faces[b].outer = true;
  return out;
}

std::vector<Face> smallest_rings(int num_nodes, std::span<const Edge> edges) {
  const int m = static_cast<int>(edges.size());
  const std::vector<int> comp = components_of(num_nodes, edges);
  const int ncomp =
      num_nodes == 0 ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  const int rank = m - num_nodes + ncomp;
  if (rank <= 0)
    return {};

  std::vector<std::vector<std::pair<int, int>>> adj(num_nodes);
  for (int e = 0; e < m; ++e) {
    adj[edges[e].first].push_back({ edges[e].second, e });
    adj[edges[e].second].push_back({ edges[e].first, e });
  }

  // Horton candidates: for root v and edge (x, y), the shortest paths v..x
  // and v..y closed by (x, y), kept when the paths meet only at v.
  const int words = (m + 63) / 64;
  std::vector<std::pair<std::vector<int>, Bits>> candidates;
  std::vector<int> dist(num_nodes), parent_edge(num_nodes);
  for (int v = 0; v < num_nodes; ++v) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(parent_edge.begin(), parent_edge.end(), -1);
    std::deque<int> queue = { v };
    dist[v] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto &[w, e]: adj[u])
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          parent_edge[w] = e;
          queue.push_back(w);
        }
    }

    auto path = [&](int x, std::vector<int> &nodes, std::vector<int> &es) {
      while (x != v) {
        nodes.push_back(x);
        const int e = parent_edge[x];
        es.push_back(e);
        x = edges[e].first == x ? edges[e].second : edges[e].first;
      }
    };

    for (int e = 0; e < m; ++e) {
      const auto [x, y] = edges[e];
      if (dist[x] < 0 || dist[y] < 0 || parent_edge[x] == e
          || parent_edge[y] == e)
        continue;
      std::vector<int> nx, ex, ny, ey;
      path(x, nx, ex);
      path(y, ny, ey);
      std::vector<int> sx = sorted_unique(nx), sy = sorted_unique(ny);
      std::vector<int> common;
      std::set_intersection(sx.begin(), sx.end(), sy.begin(), sy.end(),
                            std::back_inserter(common));
      if (!common.empty())
        continue;
      std::vector<int> cycle = ex;
      cycle.insert(cycle.end(), ey.begin(), ey.end());
      cycle.push_back(e);
      std::sort(cycle.begin(), cycle.end());
      Bits bits(words, 0);
      for (int c: cycle)
        bits[c / 64] |= std::uint64_t { 1 } << (c % 64);
      candidates.emplace_back(std::move(cycle), std::move(bits));
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto &a, const auto &b) {
              if (a.first.size() != b.first.size())
                return a.first.size() < b.first.size();
              return a.first < b.first;
            });
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const auto &a, const auto &b) {
                                 return a.first == b.first;
                               }),
                   candidates.end());

  // Greedy GF(2) independence: keep a candidate when it is not a sum of the
  // rings already chosen.
  std::vector<Bits> basis;
  std::vector<int> pivots;
  std::vector<Face> rings;
  for (const auto &[cycle, bits]: candidates) {
    Bits r = bits;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const int p = pivots[k];
      if (r[p / 64] >> (p % 64) & 1)
        for (int w = 0; w < words; ++w)
          r[w] ^= basis[k][w];
    }
    const int p = first_set(r);
    if (p < 0)
      continue;
    // Keep the basis reduced on the new pivot.
    for (auto &b: basis)
      if (b[p / 64] >> (p % 64) & 1)
        for (int w = 0; w < words; ++w)
          b[w] ^= r[w];
    basis.push_back(std::move(r));
    pivots.push_back(p);
    rings.push_back(cycle_face(edges, cycle));
    if (static_cast<int>(rings.size()) == rank)
      break;
  }
  return rings;
}

FaceSet fallback_faces(int num_nodes, std::span<const Edge> edges) {
  FaceSet out;
  out.planar = false;
  out.faces = smallest_rings(num_nodes, edges);
  const int catch_all = static_cast<int>(out.faces.size());
  Face all;
  all.nodes.resize(num_nodes);
  std::iota(all.nodes.begin(), all.nodes.end(), 0);
  all.outer = true;
  out.faces.push_back(std::move(all));

  std::vector<std::vector<int>> rings_of(edges.size());
  for (int f = 0; f < catch_all; ++f)
    for (int e: out.faces[f].edges)
      rings_of[e].push_back(f);
  out.edge_faces.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto &r = rings_of[e];
    if (r.size() >= 2)
      out.edge_faces[e] = { r[0], r[1] };
    else if (r.size() == 1)
      out.edge_faces[e] = { r[0], catch_all };
    else
      out.edge_faces[e] = { catch_all, catch_all };
  }
  return out;
}

FaceSet fallback_faces(const Molecule &mol) {
  const auto edges = edge_list(mol);
  return fallback_faces(mol.num_atoms(), edges);
}

DualGraph build_dual(int num_nodes, std::span<const int> edge_types,
                     FaceSet faces) {
  DualGraph dual;
  dual.face_set = std::move(faces);
  const auto &fs = dual.face_set;
  if (edge_types.size() != fs.edge_faces.size())
    throw std::invalid_argument("edge type count does not match edges");

  for (int e = 0; e < static_cast<int>(fs.edge_faces.size()); ++e) {
    const auto [a, b] = fs.edge_faces[e];
    if (a != b)
      dual.edges.push_back({ a, b, edge_types[e], e });
  }

  dual.membership.assign(num_nodes, {});
  for (int f = 0; f < dual.num_faces(); ++f) {
    dual.face_nodes.push_back(sorted_unique(fs.faces[f].nodes));
    for (int v: dual.face_nodes.back())
      dual.membership[v].push_back(f);
  }
  return dual;
}

DualGraph build_dual(const Molecule &mol) {
  const auto edges = edge_list(mol);
  std::vector<int> types;
  for (const Bond &b: mol.bonds())
    types.push_back(static_cast<int>(b.type));

  if (auto emb = planar_embed(mol.num_atoms(), edges))
    return build_dual(mol.num_atoms(), types, enumerate_faces(*emb));

  // Forests are always planar.
  if (mol.num_bonds() < mol.num_atoms())
    throw std::logic_error("non-planar graph without cycles");
  return build_dual(mol.num_atoms(), types,
                    fallback_faces(mol.num_atoms(), edges));
}

Tensor dual_node_features(const Tensor &x, const DualGraph &dual) {
  const int f = dual.num_faces();
  Tensor out = Tensor::matrix(f, x.cols());
  for (int k = 0; k < f; ++k) {
    const auto &nodes = dual.face_nodes[k];
    if (nodes.empty())
      continue;
    const double w = 1.0 / static_cast<double>(nodes.size());
    for (int v: nodes)
      for (int c = 0; c < x.cols(); ++c)
        out(k, c) += w * x(v, c);
  }
  return out;
}

}  // namespace dualretro
