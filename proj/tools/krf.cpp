#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "krf/bergman.hpp"
#include "krf/criteria.hpp"
#include "krf/errors.hpp"
#include "krf/experiment.hpp"
#include "krf/lct.hpp"
#include "krf/scan.hpp"

using json = nlohmann::ordered_json;
using namespace krf;

namespace {

json lct_json(const std::string& text, const LctResult& r) {
  json j;
  j["germ"] = text;
  j["infinite"] = r.infinite;
  if (!r.infinite) {
    j["value_num"] = r.value.get_num().get_str();
    j["value_den"] = r.value.get_den().get_str();
    j["value"] = r.value.get_str();
  }
  j["method"] = std::string(to_string(r.method));
  j["witness"] = r.witness.describe();
  j["exact"] = r.exact;
  if (r.degenerate) j["degenerate"] = true;
  if (r.bracket) j["bracket"] = {r.bracket->first, r.bracket->second};
  return j;
}

json verdict_json(const CriterionVerdict& v) {
  json j;
  j["theorem"] = std::string(to_string(v.theorem));
  j["n"] = v.n;
  j["alpha1"] = v.alpha1.to_string();
  if (v.theorem == Theorem::NuConvR) j["alpha2"] = v.alpha2.to_string();
  j["threshold"] = v.threshold.get_str();
  j["margin"] = v.margin.get_str();
  j["pass"] = v.pass;
  j["reason"] = v.reason;
  return j;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kaehler-Ricci flow laboratory: symmetric flows, Bergman densities, local alpha-invariants"};
  app.require_subcommand(1);
  int exit_code = 0;

  // flow run
  auto* flow = app.add_subcommand("flow", "evolve a metric");
  flow->require_subcommand(1);
  auto* flow_run = flow->add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path, out_override;
  flow_run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  flow_run->add_option("--out", out_override, "override the output directory");
  flow_run->callback([&] {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_override.empty()) cfg.output = out_override;
    const auto res = run_experiment(cfg);
    json j;
    j["dir"] = res.dir.string();
    j["decay_rate"] = res.decay_rate;
    j["final_max_deviation"] = res.final_deviation;
    j["tamed"] = res.tamed;
    j["defect_bound"] = res.defect_max;
    std::cout << j.dump(2) << '\n';
  });

  // bergman scan
  auto* bergman = app.add_subcommand("bergman", "Bergman densities");
  bergman->require_subcommand(1);
  auto* scan = bergman->add_subcommand("scan", "scan F_nu, the defect and section norms along a density run");
  std::string family = "sech2", scan_out;
  double amplitude = 0.3, L = 20.0, T = 5.0, dt = 0.01, every = 0.25;
  int N = 1024;
  std::vector<int> nus{1, 2, 3};
  scan->add_option("--family", family, "initial perturbation family")->capture_default_str();
  scan->add_option("--amplitude", amplitude)->capture_default_str();
  scan->add_option("--L", L)->capture_default_str();
  scan->add_option("--N", N)->capture_default_str();
  scan->add_option("--T", T)->capture_default_str();
  scan->add_option("--dt", dt)->capture_default_str();
  scan->add_option("--every", every, "snapshot cadence")->capture_default_str();
  scan->add_option("--nu", nus, "tensor powers")->delimiter(',')->capture_default_str();
  scan->add_option("--out", scan_out, "CSV path (default stdout)");
  scan->callback([&] {
    FlowConfig fc;
    fc.grid = Grid(L, N);
    fc.T = T;
    fc.dt = dt;
    fc.snapshot_every = every;
    FlowRun run = run_density(perturbed_profile(fc.grid, family, amplitude), fc);
    for (auto& s : run.snapshots) attach_potential(s);
    const auto rows = bergman_scan(run.snapshots, nus);
    if (scan_out.empty()) {
      write_scan_csv(std::cout, rows);
    } else {
      std::ofstream out(scan_out, std::ios::binary);
      if (!out) fail(ErrorCode::IoError, "cannot write " + scan_out);
      write_scan_csv(out, rows);
    }
  });

  // lct eval / lct table2
  auto* lct = app.add_subcommand("lct", "local alpha-invariants of plane curve germs");
  lct->require_subcommand(1);
  auto* eval = lct->add_subcommand("eval", "log canonical threshold of germs at the origin");
  std::vector<std::string> germs, weights;
  std::string method = "auto", batch;
  eval->add_option("germs", germs, "polynomials in z, w");
  eval->add_option("--weights", weights, "monomial divisor factors, e.g. z:2");
  eval->add_option("--method", method, "auto, pattern, newton, resolution or oracle")->capture_default_str();
  eval->add_option("--batch", batch, "file with one germ per line")->check(CLI::ExistingFile);
  eval->callback([&] {
    std::vector<std::string> all = germs;
    if (!batch.empty())
      for (auto& l : read_lines(batch)) all.push_back(l);
    if (all.empty()) fail(ErrorCode::InvalidArgument, "no germ given");
    for (const auto& text : all) {
      CurveGerm g = parse_germ(text);
      for (const auto& w : weights) g.weights.push_back(parse_weight(w));
      const LctResult r = method == "auto" ? lct_auto(g) : lct_with(g, parse_method(method));
      std::cout << lct_json(text, r).dump() << '\n';
    }
  });
  auto* table2 = lct->add_subcommand("table2", "recompute the table of local alpha-invariants");
  table2->callback([&] {
    const auto rep = reproduce_table2();
    print_table2(std::cout, rep);
    if (!rep.all_match) exit_code = 1;
  });

  // criteria check / criteria tamed
  auto* criteria = app.add_subcommand("criteria", "convergence criteria");
  criteria->require_subcommand(1);
  auto* check = criteria->add_subcommand("check", "evaluate a threshold theorem");
  int n = 2;
  std::string alpha1, alpha2, theorem;
  check->add_option("--n", n, "complex dimension")->capture_default_str();
  check->add_option("--alpha1", alpha1, "alpha_{nu,1} or alpha_G, e.g. 5/6 or 2/3:strict")->required();
  check->add_option("--alpha2", alpha2, "alpha_{nu,2}");
  check->add_option("--theorem", theorem, "nuconv, nuconvr or alphag (default from the inputs)");
  check->callback([&] {
    const AlphaBound a1 = parse_alpha(alpha1);
    std::string th = theorem.empty() ? (alpha2.empty() ? "nuconv" : "nuconvr") : theorem;
    CriterionVerdict v;
    if (th == "nuconv")
      v = check_nuconv(n, a1);
    else if (th == "alphag")
      v = check_alphag(n, a1);
    else if (th == "nuconvr") {
      if (alpha2.empty()) fail(ErrorCode::InvalidArgument, "nuconvr needs --alpha2");
      v = check_nuconvr(n, a1, parse_alpha(alpha2));
    } else
      fail(ErrorCode::InvalidArgument, "unknown theorem '" + th + "'");
    std::cout << verdict_json(v).dump(2) << '\n';
    if (!v.pass) exit_code = 2;
  });
  auto* tamed = criteria->add_subcommand("tamed", "tamed-flow verdict from a Bergman scan CSV");
  std::string scan_path;
  std::vector<int> tnus{1, 2, 3};
  tamed->add_option("--scan", scan_path)->required()->check(CLI::ExistingFile);
  tamed->add_option("--nu", tnus)->delimiter(',')->capture_default_str();
  tamed->callback([&] {
    std::ifstream in(scan_path);
    const auto rows = read_scan_csv(in);
    const auto tv = tamed_verdict(rows, tnus);
    json j;
    j["tamed"] = tv.tamed;
    for (const auto& p : tv.per_nu)
      j["per_nu"].push_back({{"nu", p.nu},
                             {"bounded", p.bounded},
                             {"inf_F_max_abs", p.inf_F.max_abs},
                             {"sup_form_max_abs", p.sup_form.max_abs}});
    std::cout << j.dump(2) << '\n';
  });

  // report summarize
  auto* rep = app.add_subcommand("report", "inspect run directories");
  rep->require_subcommand(1);
  auto* summarize = rep->add_subcommand("summarize", "print the summary of a run directory");
  std::string run_dir;
  summarize->add_option("dir", run_dir)->required()->check(CLI::ExistingDirectory);
  summarize->callback([&] {
    std::ifstream in(run_dir + "/summary.json");
    if (!in) fail(ErrorCode::IoError, "no summary.json in " + run_dir);
    const json s = json::parse(in);
    std::cout << "schema " << s.value("schema_version", 0) << ", " << s.value("snapshots", 0) << " snapshots, "
              << s.value("termination", std::string("?")) << '\n';
    std::cout << "decay rate " << s["decay_rate"] << ", final max|w - w0| " << s["final_max_deviation"] << '\n';
    for (const char* group : {"inequality_constants", "equivalence"})
      if (s.contains(group))
        for (const auto& [k, v] : s[group].items())
          std::cout << group << '.' << k << ": max " << v["max"] << ", max|.| " << v["max_abs"] << (v["bounded"].get<bool>() ? " bounded" : " UNBOUNDED")
                    << '\n';
    if (s.contains("tamed")) {
      std::cout << "tamed: " << (s["tamed"]["tamed"].get<bool>() ? "yes" : "no") << '\n';
      for (const auto& p : s["tamed"]["per_nu"])
        std::cout << "  nu=" << p["nu"] << (p["bounded"].get<bool>() ? " bounded" : " unbounded") << ", max defect "
                  << p["defect"]["max"] << '\n';
    }
    if (s.contains("gradient_energy_gap"))
      std::cout << "gradient energy gap: max " << s["gradient_energy_gap"]["max"] << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return exit_code;
}
