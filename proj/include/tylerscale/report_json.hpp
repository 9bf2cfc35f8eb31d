#pragma once

#include <iosfwd>
#include <string>

#include "tylerscale/expansion.hpp"
#include "tylerscale/experiments.hpp"
#include "tylerscale/scaler.hpp"
#include "tylerscale/tyler.hpp"

namespace tylerscale {

// JSON reports. Numbers carry 17 significant digits; NaN and infinities are
// written as null. Matrices are flattened row-major.

void write_estimate_json(std::ostream& out, const EstimatorResult& result);

void write_scaling_json(std::ostream& out, const ScalingResult& result,
                        ScalingMethod method, double tol);

/// Subset indices in the witness are written 1-based.
void write_expansion_json(std::ostream& out, const ExpansionReport& report, Index n);

void write_diagnostics_json(std::ostream& out, const DiagnosticsResult& result);

}  // namespace tylerscale
