#pragma once

#include <iosfwd>
#include <vector>

#include "fpot/cost.hpp"
#include "fpot/measure.hpp"

namespace fpot {

/// Sparse coupling between two discrete measures; indices refer to the
/// support points of the inputs. Row sums recover the first marginal and
/// column sums the second, up to integer-quantization error below 1e-10.
struct Coupling {
  std::vector<int> rows;
  std::vector<int> cols;
  std::vector<double> weights;
};

struct TransportResult {
  double cost = 0.0;
  Coupling coupling;
  std::vector<double> phi1;  // dual potential on supp mu1, phi1[0] = 0
  std::vector<double> phi2;  // dual potential on supp mu2
  double gap = 0.0;                // cost - dual objective
  double worst_feasibility = 0.0;  // max over pairs of phi1 + phi2 - h(|x-y|)
  double max_marginal_error = 0.0;
  bool fast_path = false;  // sorted monotone coupling certified optimal
  long long pivots = 0;

  void write_coupling_csv(std::ostream& os) const;
  void write_summary(std::ostream& os) const;
};

/// Exact optimum of the discrete transport program min sum h(|x_i-y_j|) pi_ij
/// over couplings, by network simplex on integer-scaled weights and costs.
/// In one dimension with convex h the sorted northwest start is already the
/// optimal quantile coupling and is only certified. Throws
/// "exceeds exact-solver budget" past n_max support points and
/// "marginal mass mismatch" when total masses differ beyond 1e-9.
TransportResult transport_cost(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                               const CostFn& h, int n_max = 1024);

/// Same solve without the sorted warm start; exercises the full pivot
/// sequence and is used to cross-check the certified fast path.
TransportResult transport_cost_general(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                       const CostFn& h, int n_max = 1024);

/// C_h^{1/p} with h(r) = r^p, p >= 1.
double wasserstein_p(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2, double p,
                     int n_max = 1024);

/// transport_cost after coarsening each support to at most n_max points;
/// the merge radii quantify the induced error.
struct CoarsenedTransport {
  TransportResult result;
  double radius1 = 0.0;
  double radius2 = 0.0;
  bool coarsened = false;
};

CoarsenedTransport transport_cost_coarsened(const DiscreteMeasure& mu1,
                                            const DiscreteMeasure& mu2, const CostFn& h,
                                            int n_max = 512);

/// Costs along an increasing ladder of approximants h_n <= h: checks the
/// sequence C_{h_n} is nondecreasing and converges to C_h from below.
struct StabilityReport {
  std::vector<double> approx_costs;
  double limit_cost = 0.0;
  bool monotone = true;
  double deviation = 0.0;  // limit_cost - last approx cost
};

StabilityReport stability_check(const CostFn& h, const std::vector<CostFn>& approximants,
                                const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                                int n_max = 1024);

}  // namespace fpot
