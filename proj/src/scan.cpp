#include "krf/scan.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "krf/bergman.hpp"
#include "krf/errors.hpp"
#include "krf/format.hpp"

namespace krf {

namespace {

constexpr const char* kHeader = "t,nu,inf_F,sup_F,defect,max_S,max_grad_S";

}  // namespace

std::vector<ScanRow> bergman_scan(std::span<const FlowState> run, std::span<const int> nus) {
  if (run.empty()) fail(ErrorCode::InsufficientSnapshots, "empty run");
  std::vector<ScanRow> rows;
  for (int nu : nus) {
    if (nu < 1) fail(ErrorCode::InvalidArgument, "nu must be >= 1");
    const SectionSystem ref = gram(run.front().profile, nu);
    for (const auto& state : run) {
      const SectionSystem sys = gram(state.profile, nu);
      const BergmanDensity F = bergman_density(sys);
      const SectionNorms norms = section_sup_norms(sys);
      ScanRow r;
      r.t = state.t;
      r.nu = nu;
      r.inf_F = F.inf;
      r.sup_F = F.sup;
      r.defect = partial_c0_defect(state, transition(ref, sys), ref);
      r.max_S = norms.max_S;
      r.max_grad_S = norms.max_grad_S;
      rows.push_back(r);
    }
  }
  return rows;
}

void write_scan_csv(std::ostream& out, std::span<const ScanRow> rows) {
  out << kHeader << '\n';
  for (const auto& r : rows)
    out << fmt_double(r.t) << ',' << r.nu << ',' << fmt_double(r.inf_F) << ',' << fmt_double(r.sup_F) << ','
        << fmt_double(r.defect) << ',' << fmt_double(r.max_S) << ',' << fmt_double(r.max_grad_S) << '\n';
}

std::vector<ScanRow> read_scan_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) fail(ErrorCode::ParseError, "scan CSV header must be " + std::string(kHeader));
  std::vector<ScanRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7) fail(ErrorCode::ParseError, "scan CSV line " + std::to_string(lineno) + ": expected 7 fields");
    ScanRow r;
    r.t = parse_double(f[0]);
    const double nu = parse_double(f[1]);
    r.nu = static_cast<int>(nu);
    if (r.nu != nu || r.nu < 1) fail(ErrorCode::ParseError, "scan CSV line " + std::to_string(lineno) + ": bad nu");
    r.inf_F = parse_double(f[2]);
    r.sup_F = parse_double(f[3]);
    r.defect = parse_double(f[4]);
    r.max_S = parse_double(f[5]);
    r.max_grad_S = parse_double(f[6]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace krf
