#pragma once

#include <algorithm>
#include <queue>
#include <vector>

namespace quasiwarp {

/// Max-flow on double capacities: FIFO push-relabel with current-arc and
/// periodic global relabeling. The operation bounds are combinatorial, so the
/// runtime does not blow up when the flow decomposes into a huge number of
/// tiny augmenting paths, which is exactly what seam graphs over nearly
/// identical images produce. Deterministic: arcs are scanned in a fixed order
/// and the active queue is FIFO, so ties between equal-cost cuts always
/// resolve the same way.
class MaxFlow {
 public:
  explicit MaxFlow(int nodes) : head_(nodes, -1) {}

  void add_edge(int u, int v, double cap, double rev_cap = 0.0) {
    max_cap_ = std::max({max_cap_, cap, rev_cap});
    edges_.push_back({v, head_[u], cap});
    head_[u] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({u, head_[v], rev_cap});
    head_[v] = static_cast<int>(edges_.size()) - 1;
  }

  double solve(int s, int t) {
    const int n = static_cast<int>(head_.size());
    eps_ = 1e-12 * std::max(max_cap_, 1.0);
    if (s == t) return 0.0;
    height_.assign(n, 0);
    excess_.assign(n, 0.0);
    cur_ = head_;
    queued_.assign(n, 0);
    queue_.clear();
    qhead_ = 0;

    for (int e = head_[s]; e != -1; e = edges_[e].next) {
      const double c = edges_[e].cap;
      if (!(c > eps_)) continue;
      edges_[e].cap = 0.0;
      edges_[e ^ 1].cap += c;
      excess_[edges_[e].to] += c;
    }
    global_relabel(s, t);
    for (int v = 0; v < n; ++v)
      if (v != s && v != t && excess_[v] > eps_) enqueue(v);

    // refresh heights roughly once per this much arc work
    const long budget = 6L * n + static_cast<long>(edges_.size()) / 2;
    long work = 0;
    while (qhead_ < queue_.size()) {
      const int u = queue_[qhead_++];
      queued_[u] = 0;
      while (excess_[u] > eps_) {
        if (cur_[u] == -1) {
          int minh = 2 * n;
          for (int e = head_[u]; e != -1; e = edges_[e].next) {
            ++work;
            if (edges_[e].cap > eps_) minh = std::min(minh, height_[edges_[e].to]);
          }
          if (minh + 1 >= 2 * n) break;  // nothing admissible, leave the dust
          height_[u] = minh + 1;
          cur_[u] = head_[u];
        }
        const int e = cur_[u];
        Edge& ed = edges_[e];
        ++work;
        if (ed.cap > eps_ && height_[u] == height_[ed.to] + 1) {
          const double d = std::min(excess_[u], ed.cap);
          ed.cap -= d;
          edges_[e ^ 1].cap += d;
          excess_[u] -= d;
          excess_[ed.to] += d;
          if (ed.to != s && ed.to != t) enqueue(ed.to);
        } else {
          cur_[u] = ed.next;
        }
      }
      if (qhead_ == queue_.size()) {
        queue_.clear();
        qhead_ = 0;
      }
      if (work > budget) {
        work = 0;
        global_relabel(s, t);
        std::fill(queued_.begin(), queued_.end(), 0);
        queue_.clear();
        qhead_ = 0;
        for (int v = 0; v < n; ++v)
          if (v != s && v != t && excess_[v] > eps_) enqueue(v);
      }
    }
    return excess_[t];
  }

  /// Nodes reachable from s in the residual graph after solve().
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e = head_[u]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > eps_ && !seen[edges_[e].to]) {
          seen[edges_[e].to] = 1;
          q.push(edges_[e].to);
        }
      }
    }
    return seen;
  }

 private:
  struct Edge {
    int to;
    int next;
    double cap;
  };

  void enqueue(int v) {
    if (queued_[v]) return;
    queued_[v] = 1;
    queue_.push_back(v);
  }

  // Exact distance labels: height = residual distance to t, or n + residual
  // distance to s for nodes that can no longer reach t. Resets current arcs.
  void global_relabel(int s, int t) {
    const int n = static_cast<int>(head_.size());
    height_.assign(n, 2 * n);
    height_[t] = 0;
    height_[s] = n;
    bfs_heights(t);
    bfs_heights(s);
    cur_ = head_;
  }

  void bfs_heights(int root) {
    const int n = static_cast<int>(head_.size());
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e != -1; e = edges_[e].next) {
        const int w = edges_[e].to;
        // w may push along w->v, the reverse of arc e
        if (height_[w] == 2 * n && edges_[e ^ 1].cap > eps_) {
          height_[w] = height_[v] + 1;
          q.push(w);
        }
      }
    }
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> height_;
  std::vector<double> excess_;
  std::vector<int> cur_;
  std::vector<char> queued_;
  std::vector<int> queue_;
  size_t qhead_ = 0;
  double max_cap_ = 0.0;
  double eps_ = 0.0;
};

}  // namespace quasiwarp
