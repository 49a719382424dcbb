#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "krf/flow.hpp"

namespace krf {

// One row of a Bergman scan: t, nu, inf F, sup F, D(t), max_k sup|S_k|, max_k sup|grad S_k|.
struct ScanRow {
  double t = 0.0;
  int nu = 1;
  double inf_F = 0.0;
  double sup_F = 0.0;
  double defect = 0.0;
  double max_S = 0.0;
  double max_grad_S = 0.0;
};

// Scans every snapshot for each nu, with the first snapshot as the reference system. Snapshots
// must carry the potential.
std::vector<ScanRow> bergman_scan(std::span<const FlowState> run, std::span<const int> nus);

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows);
std::vector<ScanRow> read_scan_csv(std::istream& in);

}  // namespace krf
