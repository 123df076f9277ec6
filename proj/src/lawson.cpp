#include <algorithm>

#include "assocfam/analysis.hpp"
#include "assocfam/errors.hpp"
#include "assocfam/family.hpp"
#include "assocfam/gallery.hpp"

namespace assocfam {

// a_1 h_{theta_1} + ... + a_n h_{theta_n} in orthogonal 4-blocks, each member
// of the associated family integrated from the base node of the grid. The
// integration loses two jet orders, so the result has order min(K, 10).
Chart lawson_sum_chart(const SurfaceSpec& spec, const GridParams& grid, int order) {
  const int base_order = std::min(order + 2, kMaxJetOrder);
  const SurfaceAnalysis h = analyze(evaluate_chart(*spec.base, grid, base_order));
  const int k = static_cast<int>(spec.weights.size());
  Chart out;
  out.ambient = spec.ambient;
  out.grid = grid;
  out.source = ChartSource::AnalyticGallery;
  out.order = std::min(order, base_order - 2);
  out.jets.assign(grid.nodes(), VJet::Zero(4 * k, jet_size(out.order)));
  for (int j = 0; j < k; ++j) {
    const Chart member = spec.angles[j] == 0.0
                             ? h.chart
                             : standard_minimal_family(h.chart, h.flag, h.cs, spec.angles[j]).chart;
    for (int n = 0; n < grid.nodes(); ++n)
      out.jets[n].middleRows(4 * j, 4) = spec.weights[j] * member.jets[n].leftCols(jet_size(out.order));
  }
  finalize_chart(out);
  return out;
}

}  // namespace assocfam
