#pragma once

#include "assocfam/chart.hpp"
#include "assocfam/elliptic.hpp"
#include "assocfam/flag.hpp"

namespace assocfam {

struct AnalysisOptions {
  FlagOptions flag;
  EllipticOptions elliptic;
};

// Flag, forms, Frenet tensors, complex structures and ellipses of one chart.
struct SurfaceAnalysis {
  Chart chart;
  NormalFlag flag;
  HigherFormTable forms;
  bool has_tensors = false;  // needs jet order >= tau + 3
  FrenetTensors tensors;
  ComplexStructures cs;
  EllipseReport ellipses;
};

SurfaceAnalysis analyze(Chart chart, const AnalysisOptions& opt = {});

}  // namespace assocfam
