#pragma once

#include <deque>
#include <vector>

#include <Eigen/Dense>

namespace activemap {

// Density clustering labels: -1 noise, otherwise 0..n_clusters-1 in order
// of discovery. A point is core when at least min_pts points (itself
// included) lie within eps; border points join the first core cluster that
// reaches them. Deterministic for a fixed input order.
struct DbscanResult {
  std::vector<int> labels;
  int n_clusters = 0;

  std::vector<int> cluster(int id) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
      if (labels[i] == id) out.push_back(i);
    }
    return out;
  }

  // Index of the most populated cluster, -1 when everything is noise.
  int largest_cluster() const {
    std::vector<int> counts(n_clusters, 0);
    for (int l : labels) {
      if (l >= 0) ++counts[l];
    }
    int best = -1, best_n = 0;
    for (int i = 0; i < n_clusters; ++i) {
      if (counts[i] > best_n) {
        best = i;
        best_n = counts[i];
      }
    }
    return best;
  }
};

inline DbscanResult dbscan(const std::vector<Eigen::Vector2d>& pts, double eps, int min_pts) {
  const int n = static_cast<int>(pts.size());
  const double eps2 = eps * eps;
  DbscanResult res;
  res.labels.assign(n, -2);  // -2: unvisited

  auto neighbors = [&](int i) {
    std::vector<int> out;
    for (int j = 0; j < n; ++j) {
      if ((pts[j] - pts[i]).squaredNorm() <= eps2) out.push_back(j);
    }
    return out;
  };

  for (int i = 0; i < n; ++i) {
    if (res.labels[i] != -2) continue;
    auto nb = neighbors(i);
    if (static_cast<int>(nb.size()) < min_pts) {
      res.labels[i] = -1;
      continue;
    }
    const int cluster = res.n_clusters++;
    res.labels[i] = cluster;
    std::deque<int> queue(nb.begin(), nb.end());
    while (!queue.empty()) {
      const int j = queue.front();
      queue.pop_front();
      if (res.labels[j] == -1) res.labels[j] = cluster;  // noise becomes border
      if (res.labels[j] != -2) continue;
      res.labels[j] = cluster;
      auto nb2 = neighbors(j);
      if (static_cast<int>(nb2.size()) >= min_pts) {
        queue.insert(queue.end(), nb2.begin(), nb2.end());
      }
    }
  }
  return res;
}

}  // namespace activemap
