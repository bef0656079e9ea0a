#include "fpot/ot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace fpot {
namespace {

constexpr long long kMassScale = 1000000000000LL;  // integer units per marginal
constexpr double kCostScale = 1e12;

// Largest-remainder rounding to integers summing exactly to kMassScale.
std::vector<long long> scale_weights(const std::vector<double>& w, double mass) {
  const std::size_t n = w.size();
  std::vector<long long> units(n);
  std::vector<std::pair<double, std::size_t>> rem(n);
  long long assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = w[i] / mass * static_cast<double>(kMassScale);
    const double fl = std::floor(exact);
    units[i] = static_cast<long long>(fl);
    rem[i] = {exact - fl, i};
    assigned += units[i];
  }
  long long left = kMassScale - assigned;
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (long long c = 0; c < left; ++c) units[rem[static_cast<std::size_t>(c) % n].second] += 1;
  return units;
}

std::vector<int> sort_order(const DiscreteMeasure& mu) {
  std::vector<int> ord(mu.size());
  std::iota(ord.begin(), ord.end(), 0);
  const auto& pts = mu.points();
  std::sort(ord.begin(), ord.end(), [&pts](int a, int b) {
    if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
    return pts[a].y < pts[b].y;
  });
  return ord;
}

struct Simplex {
  int m = 0;
  int k = 0;
  std::vector<long long> cost_int;
  std::vector<long long> supply;
  std::vector<long long> demand;

  struct BasisArc {
    int s = 0;
    int t = 0;
    long long flow = 0;
  };
  std::vector<BasisArc> basis;

  std::vector<int> parent, parent_edge, depth, order;
  std::vector<long long> u, v;
  std::vector<int> adj_head, adj_next;  // half-edge 2e sits at s, 2e+1 at t

  long long cursor = 0;
  bool bland = false;
  int degenerate_run = 0;
  long long pivots = 0;
  std::vector<std::pair<int, int>> cycle;

  long long reduced(long long a) const {
    const int i = static_cast<int>(a / k);
    const int j = static_cast<int>(a % k);
    return cost_int[static_cast<std::size_t>(a)] - u[i] - v[j];
  }

  void init_northwest() {
    basis.clear();
    basis.reserve(static_cast<std::size_t>(m) + k - 1);
    long long a = supply[0];
    long long b = demand[0];
    int i = 0, j = 0;
    for (int guard = 0; guard < m + k; ++guard) {
      const long long f = std::min(a, b);
      basis.push_back({i, j, f});
      a -= f;
      b -= f;
      if (i == m - 1 && j == k - 1) return;
      if (a == 0 && i < m - 1) {
        ++i;
        a = supply[i];
      } else {
        ++j;
        b = demand[j];
      }
    }
    throw std::runtime_error("transport basis construction failed");
  }

  void rebuild_tree() {
    const int nodes = m + k;
    parent.assign(nodes, -2);
    parent_edge.assign(nodes, -1);
    depth.assign(nodes, 0);
    u.assign(m, 0);
    v.assign(k, 0);
    adj_head.assign(nodes, -1);
    adj_next.assign(2 * basis.size(), -1);
    for (int e = 0; e < static_cast<int>(basis.size()); ++e) {
      const int s = basis[e].s;
      const int t = m + basis[e].t;
      adj_next[2 * e] = adj_head[s];
      adj_head[s] = 2 * e;
      adj_next[2 * e + 1] = adj_head[t];
      adj_head[t] = 2 * e + 1;
    }
    order.clear();
    order.push_back(0);
    parent[0] = -1;
    for (std::size_t q = 0; q < order.size(); ++q) {
      const int cur = order[q];
      for (int he = adj_head[cur]; he >= 0; he = adj_next[he]) {
        const int e = he >> 1;
        const int other = (he & 1) ? basis[e].s : m + basis[e].t;
        if (parent[other] != -2) continue;
        parent[other] = cur;
        parent_edge[other] = e;
        depth[other] = depth[cur] + 1;
        const long long c = cost_int[static_cast<std::size_t>(basis[e].s) * k + basis[e].t];
        if (other >= m) {
          v[basis[e].t] = c - u[basis[e].s];
        } else {
          u[basis[e].s] = c - v[basis[e].t];
        }
        order.push_back(other);
      }
    }
    if (static_cast<int>(order.size()) != nodes) {
      throw std::runtime_error("transport basis lost connectivity");
    }
  }

  long long find_entering() {
    const long long total = static_cast<long long>(m) * k;
    if (bland) {
      for (long long a = 0; a < total; ++a) {
        if (reduced(a) < 0) return a;
      }
      return -1;
    }
    const long long bsize = std::max<long long>(64, total / 256);
    long long scanned = 0;
    while (scanned < total) {
      const long long end = std::min(cursor + bsize, total);
      long long best = -1;
      long long best_rc = 0;
      for (long long a = cursor; a < end; ++a) {
        const long long r = reduced(a);
        if (r < best_rc) {
          best_rc = r;
          best = a;
        }
      }
      scanned += end - cursor;
      cursor = (end >= total) ? 0 : end;
      if (best >= 0) return best;
    }
    return -1;
  }

  void pivot(long long arc) {
    const int ei = static_cast<int>(arc / k);
    const int ej = static_cast<int>(arc % k);
    // Cycle = entering arc plus the tree path between its endpoints. Signs
    // mark whether an edge gains or loses flow when the entering arc gains.
    cycle.clear();
    int x = ei;
    int y = m + ej;
    while (x != y) {
      if (depth[x] >= depth[y]) {
        cycle.push_back({parent_edge[x], x >= m ? +1 : -1});
        x = parent[x];
      } else {
        cycle.push_back({parent_edge[y], y < m ? +1 : -1});
        y = parent[y];
      }
    }
    long long theta = std::numeric_limits<long long>::max();
    int leaving = -1;
    long long leaving_arc_id = 0;
    for (const auto& [e, sign] : cycle) {
      if (sign < 0) {
        const long long id = static_cast<long long>(basis[e].s) * k + basis[e].t;
        if (basis[e].flow < theta || (basis[e].flow == theta && id < leaving_arc_id)) {
          theta = basis[e].flow;
          leaving = e;
          leaving_arc_id = id;
        }
      }
    }
    if (leaving < 0) throw std::runtime_error("transport pivot found no leaving arc");
    for (const auto& [e, sign] : cycle) basis[e].flow += sign * theta;
    basis[leaving] = {ei, ej, theta};
    ++pivots;
    if (theta == 0) {
      if (++degenerate_run >= 256) bland = true;
    } else {
      degenerate_run = 0;
    }
    rebuild_tree();
  }

  void solve() {
    init_northwest();
    rebuild_tree();
    const long long max_pivots =
        4000000LL + 400LL * (static_cast<long long>(m) + k) * (static_cast<long long>(m) + k);
    while (true) {
      const long long arc = find_entering();
      if (arc < 0) return;
      if (pivots >= max_pivots) throw std::runtime_error("transport solve stalled");
      pivot(arc);
    }
  }

  // Recomputes tree flows for unperturbed marginals on the final basis.
  // Dual feasibility of the tree does not depend on the right-hand side,
  // and the perturbation is below one unperturbed unit per cut, so the
  // restored flows are nonnegative and the basis stays optimal.
  void restore_flows(const std::vector<long long>& s0, const std::vector<long long>& d0) {
    std::vector<long long> imb(static_cast<std::size_t>(m) + k);
    for (int i = 0; i < m; ++i) imb[i] = s0[i];
    for (int j = 0; j < k; ++j) imb[m + j] = -d0[j];
    for (std::size_t q = order.size(); q-- > 1;) {
      const int x = order[q];
      const int e = parent_edge[x];
      basis[e].flow = (x < m) ? imb[x] : -imb[x];
      if (basis[e].flow < 0) throw std::runtime_error("transport flow restoration failed");
      imb[parent[x]] += imb[x];
    }
    if (imb[order[0]] != 0) throw std::runtime_error("transport flow restoration failed");
  }
};

TransportResult solve_transport(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                const CostFn& h, int n_max, bool sort_supports) {
  if (mu1.dim() != mu2.dim()) throw std::invalid_argument("measure dimension mismatch");
  if (static_cast<int>(mu1.size()) > n_max || static_cast<int>(mu2.size()) > n_max) {
    throw std::invalid_argument("exceeds exact-solver budget");
  }
  const double m1 = mu1.total_mass();
  const double m2 = mu2.total_mass();
  if (std::abs(m1 - m2) > 1e-9 * std::max({m1, m2, 1.0})) {
    throw std::invalid_argument("marginal mass mismatch");
  }

  const int m = static_cast<int>(mu1.size());
  const int k = static_cast<int>(mu2.size());
  std::vector<int> ord1(m), ord2(k);
  if (sort_supports) {
    ord1 = sort_order(mu1);
    ord2 = sort_order(mu2);
  } else {
    std::iota(ord1.begin(), ord1.end(), 0);
    std::iota(ord2.begin(), ord2.end(), 0);
  }

  std::vector<double> w1(m), w2(k);
  for (int i = 0; i < m; ++i) w1[i] = mu1.weights()[ord1[i]];
  for (int j = 0; j < k; ++j) w2[j] = mu2.weights()[ord2[j]];

  std::vector<double> cost_true(static_cast<std::size_t>(m) * k);
  double max_cost = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec& x = mu1.points()[ord1[i]];
    for (int j = 0; j < k; ++j) {
      const double c = h(distance(x, mu2.points()[ord2[j]]));
      cost_true[static_cast<std::size_t>(i) * k + j] = c;
      max_cost = std::max(max_cost, c);
    }
  }
  const double cscale = max_cost > 0.0 ? kCostScale / max_cost : 1.0;

  // Zero-unit points stay out of the solver; their duals are filled in by
  // h-transform afterwards and they carry no flow.
  const std::vector<long long> units1 = scale_weights(w1, m1);
  const std::vector<long long> units2 = scale_weights(w2, m2);
  std::vector<int> keep1, keep2;
  for (int i = 0; i < m; ++i) {
    if (units1[i] > 0) keep1.push_back(i);
  }
  for (int j = 0; j < k; ++j) {
    if (units2[j] > 0) keep2.push_back(j);
  }
  const int ms = static_cast<int>(keep1.size());
  const int ks = static_cast<int>(keep2.size());

  Simplex sx;
  sx.m = ms;
  sx.k = ks;
  sx.cost_int.resize(static_cast<std::size_t>(ms) * ks);
  for (int a = 0; a < ms; ++a) {
    for (int b = 0; b < ks; ++b) {
      sx.cost_int[static_cast<std::size_t>(a) * ks + b] =
          std::llround(cost_true[static_cast<std::size_t>(keep1[a]) * k + keep2[b]] * cscale);
    }
  }

  // One extra unit per supply at scale N, collected on the last demand.
  // No spanning-tree cut can then balance exactly, so every basic flow is
  // positive and every pivot strictly lowers the objective.
  const long long scale = static_cast<long long>(ms) + ks + 1;
  std::vector<long long> s0(ms), d0(ks);
  sx.supply.resize(ms);
  sx.demand.resize(ks);
  for (int a = 0; a < ms; ++a) {
    s0[a] = units1[keep1[a]];
    sx.supply[a] = s0[a] * scale + 1;
  }
  for (int b = 0; b < ks; ++b) {
    d0[b] = units2[keep2[b]];
    sx.demand[b] = d0[b] * scale + (b == ks - 1 ? ms : 0);
  }

  sx.solve();
  sx.restore_flows(s0, d0);

  TransportResult result;
  result.pivots = sx.pivots;
  result.fast_path = sort_supports && mu1.dim() == 1 && h.convex() && sx.pivots == 0;

  const double descale = m1 / static_cast<double>(kMassScale);
  std::vector<double> row_sum(m, 0.0), col_sum(k, 0.0);
  for (const auto& arc : sx.basis) {
    if (arc.flow == 0) continue;
    const int si = keep1[arc.s];
    const int tj = keep2[arc.t];
    const double w = static_cast<double>(arc.flow) * descale;
    result.cost += w * cost_true[static_cast<std::size_t>(si) * k + tj];
    result.coupling.rows.push_back(ord1[si]);
    result.coupling.cols.push_back(ord2[tj]);
    result.coupling.weights.push_back(w);
    row_sum[si] += w;
    col_sum[tj] += w;
  }
  for (int i = 0; i < m; ++i) {
    result.max_marginal_error = std::max(result.max_marginal_error, std::abs(row_sum[i] - w1[i]));
  }
  for (int j = 0; j < k; ++j) {
    result.max_marginal_error = std::max(result.max_marginal_error, std::abs(col_sum[j] - w2[j]));
  }

  // Duals descaled to true cost units. Dropped demands take the transform
  // of the kept supply duals, dropped supplies the transform of all demand
  // duals, so feasibility holds on every pair. Shift makes phi1[0] = 0 in
  // the original support order.
  std::vector<double> phi1(m), phi2(k);
  for (int a = 0; a < ms; ++a) phi1[ord1[keep1[a]]] = static_cast<double>(sx.u[a]) / cscale;
  for (int b = 0; b < ks; ++b) phi2[ord2[keep2[b]]] = static_cast<double>(sx.v[b]) / cscale;
  for (int j = 0; j < k; ++j) {
    if (units2[j] > 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < ms; ++a) {
      best = std::min(best, cost_true[static_cast<std::size_t>(keep1[a]) * k + j] -
                                static_cast<double>(sx.u[a]) / cscale);
    }
    phi2[ord2[j]] = best;
  }
  for (int i = 0; i < m; ++i) {
    if (units1[i] > 0) continue;
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      best = std::min(best, cost_true[static_cast<std::size_t>(i) * k + j] - phi2[ord2[j]]);
    }
    phi1[ord1[i]] = best;
  }
  const double shift = phi1[0];
  for (double& p : phi1) p -= shift;
  for (double& p : phi2) p += shift;
  result.phi1 = std::move(phi1);
  result.phi2 = std::move(phi2);

  double dual_obj = 0.0;
  for (int i = 0; i < m; ++i) dual_obj += result.phi1[ord1[i]] * w1[i];
  for (int j = 0; j < k; ++j) dual_obj += result.phi2[ord2[j]] * w2[j];
  result.gap = result.cost - dual_obj;

  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const double viol = result.phi1[ord1[i]] + result.phi2[ord2[j]] -
                          cost_true[static_cast<std::size_t>(i) * k + j];
      worst = std::max(worst, viol);
    }
  }
  result.worst_feasibility = worst;
  return result;
}

}  // namespace

void TransportResult::write_coupling_csv(std::ostream& os) const {
  os << "i,j,w\n";
  char line[96];
  for (std::size_t a = 0; a < coupling.weights.size(); ++a) {
    std::snprintf(line, sizeof line, "%d,%d,%.17g\n", coupling.rows[a], coupling.cols[a],
                  coupling.weights[a]);
    os << line;
  }
}

void TransportResult::write_summary(std::ostream& os) const {
  char line[256];
  std::snprintf(line, sizeof line,
                "cost=%.17g\ngap=%.17g\nworst_feasibility=%.17g\nmax_marginal_error=%.17g\n"
                "fast_path=%d\npivots=%lld\n",
                cost, gap, worst_feasibility, max_marginal_error, fast_path ? 1 : 0, pivots);
  os << line;
}

TransportResult transport_cost(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                               const CostFn& h, int n_max) {
  return solve_transport(mu1, mu2, h, n_max, true);
}

TransportResult transport_cost_general(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                       const CostFn& h, int n_max) {
  return solve_transport(mu1, mu2, h, n_max, false);
}

double wasserstein_p(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, double p,
                     int n_max) {
  if (!(p >= 1.0)) throw std::invalid_argument("wasserstein order must be >= 1");
  const double cost = transport_cost(mu1, mu2, CostFn::power(p), n_max).cost;
  return std::pow(std::max(cost, 0.0), 1.0 / p);
}

CoarsenedTransport transport_cost_coarsened(const DiscreteMeasure& mu1,
                                            const DiscreteMeasure& mu2, const CostFn& h,
                                            int n_max) {
  CoarsenedTransport out;
  const CoarsenResult c1 = coarsen_support(mu1, n_max);
  const CoarsenResult c2 = coarsen_support(mu2, n_max);
  out.radius1 = c1.radius;
  out.radius2 = c2.radius;
  out.coarsened = c1.coarsened || c2.coarsened;
  out.result = transport_cost(c1.measure, c2.measure, h, n_max);
  return out;
}

StabilityReport stability_check(const CostFn& h, const std::vector<CostFn>& approximants,
                                const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                int n_max) {
  StabilityReport report;
  report.limit_cost = transport_cost(mu1, mu2, h, n_max).cost;
  double prev = -std::numeric_limits<double>::infinity();
  for (const CostFn& hn : approximants) {
    const double c = transport_cost(mu1, mu2, hn, n_max).cost;
    if (c < prev - 1e-12 * (1.0 + std::abs(prev))) report.monotone = false;
    if (c > report.limit_cost + 1e-9 * (1.0 + std::abs(report.limit_cost))) {
      report.monotone = false;
    }
    report.approx_costs.push_back(c);
    prev = c;
  }
  report.deviation =
      report.approx_costs.empty() ? 0.0 : report.limit_cost - report.approx_costs.back();
  return report;
}

}  // namespace fpot
