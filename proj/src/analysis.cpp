#include "assocfam/analysis.hpp"

namespace assocfam {

SurfaceAnalysis analyze(Chart chart, const AnalysisOptions& opt) {
  SurfaceAnalysis a;
  a.chart = std::move(chart);
  a.flag = build_flag(a.chart, opt.flag);
  a.forms = higher_forms(a.chart, a.flag, opt.flag);
  if (a.flag.frame_order >= 2) {
    a.tensors = frenet_tensors(a.chart, a.flag, a.forms);
    a.has_tensors = true;
  }
  a.cs = detect_ellipticity(a.chart, a.flag, a.forms, opt.elliptic);
  a.ellipses = curvature_ellipses(a.chart, a.flag, a.forms, a.cs);
  return a;
}

}  // namespace assocfam
