#include "krf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "krf/bergman.hpp"
#include "krf/criteria.hpp"
#include "krf/errors.hpp"
#include "krf/format.hpp"
#include "krf/functionals.hpp"
#include "krf/geometry.hpp"
#include "krf/scan.hpp"

namespace krf {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& path, const std::string& msg) {
  fail(ErrorCode::ConfigError, path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) config_error(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) config_error(path.empty() ? k : path + "." + k, "unknown key");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) config_error(path, "must be finite");
  return x;
}

long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) config_error(path, "expected an integer");
  return j.get<long>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

template <class F>
auto parse_enum(const json& j, const std::string& path, F parse) {
  const std::string s = get_string(j, path);
  try {
    return parse(s);
  } catch (const Error& e) {
    config_error(path, e.detail());
  }
}

std::string_view to_string(Model m) { return m == Model::Sphere ? "sphere" : "product"; }
std::string_view to_string(FlowForm f) { return f == FlowForm::Density ? "density" : "potential"; }

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Rethrows module errors with the run context prepended.
template <class F>
auto in_context(const std::string& what, F f) {
  try {
    return f();
  } catch (const Error& e) {
    fail(e.code(), what + ": " + e.detail());
  }
}

json series_json(const MonitorSeries& s) {
  json j;
  j["max"] = s.max;
  j["max_abs"] = s.max_abs;
  j["bounded"] = s.bounded;
  return j;
}

constexpr const char* kRunHeader =
    "t,max_dev,volume,min_w,sup_phi,inf_phi,osc_phi,neg_mean_phi_evolved,mean_phi_ref,I_energy,dirichlet,perelman";

struct RunRow {
  double t = 0.0, max_dev = 0.0, volume = 0.0, min_w = 0.0;
  FunctionalReport f;
  bool has_f = false;
  double perelman = 0.0;
};

void write_run_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << kRunHeader << '\n';
  auto opt = [](bool has, double x) { return has ? fmt_double(x) : std::string(); };
  for (const auto& r : rows) {
    out << fmt_double(r.t) << ',' << fmt_double(r.max_dev) << ',' << fmt_double(r.volume) << ','
        << fmt_double(r.min_w) << ',' << opt(r.has_f, r.f.sup_phi) << ',' << opt(r.has_f, r.f.inf_phi) << ','
        << opt(r.has_f, r.f.osc_phi) << ',' << opt(r.has_f, r.f.neg_mean_phi_evolved) << ','
        << opt(r.has_f, r.f.mean_phi_ref) << ',' << opt(r.has_f, r.f.I_energy) << ',' << opt(r.has_f, r.f.dirichlet)
        << ',' << fmt_double(r.perelman) << '\n';
  }
}

double perelman_sum(const GeometryReport& g) { return g.sup_abs_R + g.diam + g.sup_abs_u + g.sup_grad_u; }

// Exact for R, diam, u and |grad u| of the product of two curves.
double product_perelman(const MetricProfile& a, const MetricProfile& b) {
  const ProductGeometry pg = product_compose(a, b);
  const auto [ua_lo, ua_hi] = std::minmax_element(pg.ra.u.begin(), pg.ra.u.end());
  const auto [ub_lo, ub_hi] = std::minmax_element(pg.rb.u.begin(), pg.rb.u.end());
  const double sup_u = std::max(std::abs(*ua_hi + *ub_hi), std::abs(*ua_lo + *ub_lo));
  return std::max(std::abs(pg.sup_R), std::abs(pg.inf_R)) + pg.diam + sup_u +
         std::hypot(pg.ra.sup_grad_u, pg.rb.sup_grad_u);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + p.string());
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for " + p.string());
}

constexpr const char* kConventions = R"(krf-conventions-1
coordinate: s = log|z|^2 on the sphere minus the poles, window [-L, L], uniform samples s_i = -L + i h, h = 2L/(N-1)
metric: omega = w(s) ds dtheta / 2, area form; Fubini-Study w0 = 2 e^s / (1 + e^s)^2, volume 4 pi
class: canonical class, discrete volume of w equals the discrete volume of w0
potential: w = w0 + phi'' (Neumann second difference), phi relative to w0
flow: d/dt w = (log(w/w0))'' + w - w0; potential form phi_t = log(w/w0) + phi
curvature: K = (w0 - (log(w/w0))'') / w, R = K for curves
functionals: averages (1/V) int ... with V the discrete FS volume
sections: z^k, k = 0..2 nu, |z^k|^2_{h^nu} = e^{(k-nu)s} w^nu, Gram weights d_k = 2 pi int e^{(k-nu)s} w^{nu+1} ds
bergman: F_nu = (1/nu) log sum_k |z^k|^2 / d_k
drift rule: bounded iff max|q| over [T/2, T] <= 1.1 max|q| over [0, T/2] + 1e-10
csv: '.' decimal separator, shortest round-trip doubles, no locale
)";

}  // namespace

bool ExperimentConfig::monitor(std::string_view name) const {
  return std::find(monitors.begin(), monitors.end(), name) != monitors.end();
}

const std::vector<std::string>& known_monitors() {
  static const std::vector<std::string> names = {"functionals", "inequalities", "equivalence", "bergman"};
  return names;
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "", {"version", "model", "grid", "initial", "integrator", "bergman", "monitors", "output", "seed"});
  if (!j.contains("version")) config_error("version", "missing");
  if (get_integer(j["version"], "version") != kConfigVersion)
    config_error("version", "unsupported version, expected " + std::to_string(kConfigVersion));

  ExperimentConfig c;
  if (j.contains("model")) {
    const std::string m = get_string(j["model"], "model");
    if (m == "sphere")
      c.model = Model::Sphere;
    else if (m == "product")
      c.model = Model::Product;
    else
      config_error("model", "expected sphere or product");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"L", "N"});
    double L = c.grid.L;
    long N = c.grid.N;
    if (g.contains("L")) L = get_number(g["L"], "grid.L");
    if (g.contains("N")) N = get_integer(g["N"], "grid.N");
    if (N < kMinSamples) config_error("grid.N", "must be at least " + std::to_string(kMinSamples));
    if (N > 1 << 22) config_error("grid.N", "too large");
    if (!(L > 0.0)) config_error("grid.L", "must be positive");
    c.grid = Grid(L, static_cast<int>(N));
  }
  auto family = [](const json& v, const std::string& path) {
    const std::string f = get_string(v, path);
    const auto& fams = perturbation_families();
    if (std::find(fams.begin(), fams.end(), f) == fams.end()) config_error(path, "unknown family '" + f + "'");
    return f;
  };
  if (j.contains("initial")) {
    const json& i = j["initial"];
    check_keys(i, "initial", {"family", "amplitude", "offset", "family_b", "amplitude_b"});
    if (i.contains("family")) c.family = family(i["family"], "initial.family");
    if (i.contains("amplitude")) c.amplitude = get_number(i["amplitude"], "initial.amplitude");
    if (i.contains("offset")) c.potential_offset = get_number(i["offset"], "initial.offset");
    if (i.contains("family_b")) c.family_b = family(i["family_b"], "initial.family_b");
    if (i.contains("amplitude_b")) c.amplitude_b = get_number(i["amplitude_b"], "initial.amplitude_b");
  }
  if (j.contains("integrator")) {
    const json& i = j["integrator"];
    check_keys(i, "integrator", {"form", "scheme", "gauge", "dt", "T", "snapshot_every"});
    if (i.contains("form")) {
      const std::string f = get_string(i["form"], "integrator.form");
      if (f == "density")
        c.form = FlowForm::Density;
      else if (f == "potential")
        c.form = FlowForm::Potential;
      else
        config_error("integrator.form", "expected density or potential");
    }
    if (i.contains("scheme")) c.scheme = parse_enum(i["scheme"], "integrator.scheme", parse_scheme);
    c.gauge = c.form == FlowForm::Density ? Gauge::DensityOnly : Gauge::Raw;
    if (i.contains("gauge")) c.gauge = parse_enum(i["gauge"], "integrator.gauge", parse_gauge);
    if (i.contains("dt")) c.dt = get_number(i["dt"], "integrator.dt");
    if (i.contains("T")) c.T = get_number(i["T"], "integrator.T");
    if (i.contains("snapshot_every")) c.snapshot_every = get_number(i["snapshot_every"], "integrator.snapshot_every");
  }
  if (!(c.dt > 0.0)) config_error("integrator.dt", "must be positive");
  if (!(c.T > 0.0)) config_error("integrator.T", "must be positive");
  if (!(c.snapshot_every > 0.0)) config_error("integrator.snapshot_every", "must be positive");
  if (c.form == FlowForm::Density && c.gauge != Gauge::DensityOnly)
    config_error("integrator.gauge", "density form uses gauge density-only");
  if (c.form == FlowForm::Potential && c.gauge == Gauge::DensityOnly)
    config_error("integrator.gauge", "potential form needs gauge raw or shoot");
  if (c.model == Model::Product && c.form != FlowForm::Density)
    config_error("integrator.form", "the product model runs in density form");
  if (j.contains("bergman")) {
    const json& b = j["bergman"];
    check_keys(b, "bergman", {"nu"});
    if (b.contains("nu")) {
      if (!b["nu"].is_array() || b["nu"].empty()) config_error("bergman.nu", "expected a nonempty array");
      c.nus.clear();
      for (size_t k = 0; k < b["nu"].size(); ++k) {
        const std::string path = "bergman.nu[" + std::to_string(k) + "]";
        const long nu = get_integer(b["nu"][k], path);
        if (nu < 1 || nu > 64) config_error(path, "must lie in [1, 64]");
        c.nus.push_back(static_cast<int>(nu));
      }
    }
  }
  if (j.contains("monitors")) {
    if (!j["monitors"].is_array()) config_error("monitors", "expected an array");
    c.monitors.clear();
    for (size_t k = 0; k < j["monitors"].size(); ++k) {
      const std::string path = "monitors[" + std::to_string(k) + "]";
      const std::string m = get_string(j["monitors"][k], path);
      const auto& known = known_monitors();
      if (std::find(known.begin(), known.end(), m) == known.end()) config_error(path, "unknown monitor '" + m + "'");
      c.monitors.push_back(m);
    }
  }
  if (j.contains("output")) c.output = get_string(j["output"], "output");
  if (c.output.empty()) config_error("output", "must not be empty");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_error("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = kConfigVersion;
  j["model"] = to_string(c.model);
  j["grid"] = {{"L", c.grid.L}, {"N", c.grid.N}};
  j["initial"] = {{"family", c.family},
                  {"amplitude", c.amplitude},
                  {"offset", c.potential_offset},
                  {"family_b", c.family_b},
                  {"amplitude_b", c.amplitude_b}};
  j["integrator"] = {{"form", to_string(c.form)}, {"scheme", to_string(c.scheme)}, {"gauge", to_string(c.gauge)},
                     {"dt", c.dt},                {"T", c.T},                      {"snapshot_every", c.snapshot_every}};
  j["bergman"] = {{"nu", c.nus}};
  j["monitors"] = c.monitors;
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string_view convention_sheet() { return kConventions; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  FlowConfig fc;
  fc.grid = cfg.grid;
  fc.dt = cfg.dt;
  fc.T = cfg.T;
  fc.scheme = cfg.scheme;
  fc.gauge = cfg.gauge;
  fc.snapshot_every = cfg.snapshot_every;

  const bool want_potential = cfg.monitor("functionals") || cfg.monitor("inequalities") ||
                              cfg.monitor("equivalence") || cfg.monitor("bergman");
  auto evolve = [&](const std::string& fam, double amp, const char* tag) {
    return in_context(std::string("run_experiment ") + tag, [&] {
      const MetricProfile init = perturbed_profile(cfg.grid, fam, amp);
      FlowRun run;
      if (cfg.form == FlowForm::Density) {
        run = run_density(init, fc);
        if (want_potential)
          for (auto& s : run.snapshots) attach_potential(s);
      } else {
        std::vector<double> phi0 = reconstruct_potential(init);
        for (auto& v : phi0) v += cfg.potential_offset;
        run = run_potential(std::move(phi0), fc);
      }
      return run;
    });
  };

  const FlowRun run_a = evolve(cfg.family, cfg.amplitude, "factor a");
  FlowRun run_b;
  const bool product = cfg.model == Model::Product;
  if (product) run_b = evolve(cfg.family_b, cfg.amplitude_b, "factor b");
  const auto& sa = run_a.snapshots;
  const size_t count = product ? std::min(sa.size(), run_b.snapshots.size()) : sa.size();

  std::vector<RunRow> rows;
  std::vector<double> t, dev;
  for (size_t i = 0; i < count; ++i) {
    RunRow r;
    r.t = sa[i].t;
    if (!product) {
      r.max_dev = max_deviation_from_fs(sa[i].profile);
      r.volume = sa[i].profile.volume();
      r.min_w = sa[i].profile.min_density();
      if (sa[i].has_potential() && cfg.monitor("functionals")) {
        r.f = report(sa[i]);
        r.has_f = true;
      }
      r.perelman = perelman_sum(curvature(sa[i].profile));
    } else {
      const FlowState& b = run_b.snapshots[i];
      r.max_dev = std::max(max_deviation_from_fs(sa[i].profile), max_deviation_from_fs(b.profile));
      r.volume = sa[i].profile.volume() * b.profile.volume();
      r.min_w = sa[i].profile.min_density() * b.profile.min_density();
      if (sa[i].has_potential() && cfg.monitor("functionals")) {
        r.f = product_report(sa[i], b).sum;
        r.has_f = true;
      }
      r.perelman = product_perelman(sa[i].profile, b.profile);
    }
    t.push_back(r.t);
    dev.push_back(r.max_dev);
    rows.push_back(r);
  }

  ExperimentResult res;
  res.dir = dir;
  res.decay_rate = fitted_decay_rate(t, dev, 0.25 * cfg.T);
  res.final_deviation = dev.empty() ? 0.0 : dev.back();

  json summary;
  summary["schema_version"] = kSummarySchemaVersion;
  summary["config"] = json::parse(config_to_json(cfg));
  summary["termination"] = run_a.termination;
  summary["snapshots"] = count;
  summary["decay_rate"] = res.decay_rate;
  summary["final_max_deviation"] = res.final_deviation;

  const bool have_potential = !sa.empty() && sa.front().has_potential();
  if (have_potential && cfg.monitor("inequalities")) {
    json ineq;
    if (!product) {
      for (const auto& s : inequality_monitor(std::span(sa.data(), count))) ineq[s.name] = series_json(s);
    } else {
      std::vector<double> c_sup, c_delta, c_per;
      const double delta = 0.4;
      for (size_t i = 0; i < count; ++i) {
        const FunctionalReport f = product_report(sa[i], run_b.snapshots[i]).sum;
        c_sup.push_back(f.neg_mean_phi_evolved - 2.0 * f.sup_phi);
        c_delta.push_back(f.sup_phi - ((1.0 - delta) / delta) * f.neg_mean_phi_evolved);
        c_per.push_back(rows[i].perelman);
      }
      ineq["supphi"] = series_json(make_series("supphi", t, c_sup));
      ineq["deltainv"] = series_json(make_series("deltainv", t, c_delta));
      ineq["perelman"] = series_json(make_series("perelman", t, c_per));
    }
    summary["inequality_constants"] = ineq;
  }
  if (have_potential && cfg.monitor("equivalence") && !product) {
    json eq;
    for (const auto& s : equivalence_quantities(std::span(sa.data(), count))) eq[s.name] = series_json(s);
    summary["equivalence"] = eq;
  }

  std::vector<ScanRow> scan;
  if (have_potential && cfg.monitor("bergman")) {
    scan = in_context("run_experiment bergman scan", [&] {
      if (!product) return bergman_scan(std::span(sa.data(), count), cfg.nus);
      // Tensor sections z^k y^l: F, sup|S| and the defect bound combine factorwise.
      const auto a = bergman_scan(std::span(sa.data(), count), cfg.nus);
      const auto b = bergman_scan(std::span(run_b.snapshots.data(), count), cfg.nus);
      std::vector<ScanRow> out;
      for (size_t i = 0; i < a.size(); ++i) {
        ScanRow r = a[i];
        r.inf_F += b[i].inf_F;
        r.sup_F += b[i].sup_F;
        r.defect += b[i].defect;
        r.max_grad_S = std::hypot(a[i].max_grad_S * b[i].max_S, a[i].max_S * b[i].max_grad_S);
        r.max_S *= b[i].max_S;
        out.push_back(r);
      }
      return out;
    });
    std::ofstream out(dir / "bergman_scan.csv", std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write bergman_scan.csv");
    write_scan_csv(out, scan);

    const TamedVerdict tv = tamed_verdict(scan, cfg.nus);
    res.tamed = tv.tamed;
    json tj;
    tj["tamed"] = tv.tamed;
    for (const auto& n : tv.per_nu) {
      std::vector<double> tt, d;
      for (const auto& r : scan)
        if (r.nu == n.nu) {
          tt.push_back(r.t);
          d.push_back(r.defect);
        }
      const MonitorSeries ds = make_series("defect", tt, d);
      res.defect_max = std::max(res.defect_max, ds.max);
      json pn;
      pn["nu"] = n.nu;
      pn["inf_F"] = series_json(n.inf_F);
      pn["sup_form"] = series_json(n.sup_form);
      pn["bounded"] = n.bounded;
      pn["defect"] = series_json(ds);
      tj["per_nu"].push_back(pn);
    }
    summary["tamed"] = tj;
    summary["defect_bound"] = res.defect_max;
    summary["defect_is_upper_bound"] = product;

    if (!product) {
      const int nu = cfg.nus.front();
      const SectionSystem ref = gram(sa.front().profile, nu);
      std::vector<double> gap;
      for (size_t i = 0; i < count; ++i) {
        const SectionSystem sys = gram(sa[i].profile, nu);
        const auto X = comparison_function(transition(ref, sys), ref);
        gap.push_back(gradient_energy_gap(sa[i], X, ref.profile));
      }
      json gj = series_json(make_series("gap", t, gap));
      gj["nu"] = nu;
      summary["gradient_energy_gap"] = gj;
    }
  }

  {
    std::ofstream out(dir / "run.csv", std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot write run.csv");
    write_run_csv(out, rows);
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  std::ostringstream m;
  m << "code_version " << kCodeVersion << '\n'
    << "convention_version " << kConventionVersion << '\n'
    << "convention_sheet_fnv1a64 " << hex64(fnv1a64(convention_sheet())) << '\n'
    << "config_fnv1a64 " << hex64(fnv1a64(config_to_json(cfg))) << '\n'
    << "seed " << cfg.seed << '\n'
    << "field decay_rate <- flow.fitted_decay_rate\n"
    << "field final_max_deviation <- flow.max_deviation_from_fs\n"
    << "field inequality_constants <- functionals.inequality_monitor\n"
    << "field equivalence <- functionals.equivalence_quantities\n"
    << "field tamed <- criteria.tamed_verdict\n"
    << "field defect_bound <- bergman.partial_c0_defect\n"
    << "field gradient_energy_gap <- functionals.gradient_energy_gap\n"
    << "file run.csv <- functionals.report, geometry.curvature\n"
    << "file bergman_scan.csv <- bergman.gram, bergman.bergman_density, bergman.section_sup_norms\n";
  write_text(dir / "MANIFEST", m.str());
  return res;
}

const std::vector<Table2Row>& table2_rows() {
  static const std::vector<Table2Row> rows = {
      {"smooth", "z", 1},
      {"transversal intersection of two lines", "z*w", 1},
      {"transversal intersection of a line and a conic curve", "z*w", 1},
      {"ordinary double point", "z^2-w^2*(w+1)", 1},
      {"cusp", "z^3-w^2", ratio(5, 6)},
      {"tangential intersection of a line and a conic curve", "z*(z+w^2)", ratio(3, 4)},
      {"intersection of three different lines", "z*w*(z+w)", ratio(2, 3)},
      {"a point on a double line", "z^2", ratio(1, 2)},
      {"a point on a triple line", "z^3", ratio(1, 3)},
  };
  return rows;
}

Table2Report reproduce_table2() {
  Table2Report rep;
  rep.all_match = true;
  for (const auto& row : table2_rows()) {
    Table2Line line;
    line.row = row;
    const CurveGerm g = parse_germ(row.equation, true);
    line.computed = lct_auto(g);
    const LctResult nw = lct_newton(g);
    const LctResult rs = lct_resolution(g);
    line.engines_agree = nw.degenerate || nw.value == rs.value;
    line.match = !line.computed.infinite && line.computed.exact && line.computed.value == row.expected &&
                 rs.value == row.expected && line.engines_agree;
    rep.all_match = rep.all_match && line.match;
    rep.lines.push_back(std::move(line));
  }
  return rep;
}

void print_table2(std::ostream& out, const Table2Report& rep) {
  for (const auto& l : rep.lines) {
    out << std::left << std::setw(54) << l.row.label << std::setw(16) << l.row.equation << std::setw(6)
        << l.row.expected.get_str() << std::setw(6) << l.computed.value.get_str() << std::setw(11)
        << to_string(l.computed.method) << (l.match ? "OK" : "MISMATCH") << "  " << l.computed.witness.describe()
        << '\n';
  }
  out << (rep.all_match ? "all rows match" : "MISMATCH in table") << '\n';
}

}  // namespace krf
