// Command-line front end: refracted distances, facility location (with and
// without the rapid-transit hyperplane), conic exports, instance generation,
// benchmark reports, SVG plots, and the rapid-transit condition check.
//
// Exit codes: 0 success, 2 usage or input-format error, 3 numerical failure,
// 4 missing data.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "refloc/refloc.hpp"

using nlohmann::json;
using namespace refloc;

namespace {

json vec_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json path_json(const PathResult& r, bool swapped) {
  json j;
  j["gates"] = json::array();
  for (const auto& g : r.gates) j["gates"].push_back(vec_json(g));
  j["leg_lengths"] = r.leg_lengths;
  j["total"] = r.total;
  j["snell_residual"] = r.snell_residual;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["endpoints_swapped"] = swapped;
  return j;
}

const DemandPoint& point_by_index(const LocationInstance& inst, int idx) {
  const int na = static_cast<int>(inst.points_a.size());
  const int n = static_cast<int>(inst.total_points());
  if (idx < 0 || idx >= n)
    throw std::invalid_argument("point index " + std::to_string(idx) + " out of range [0, " +
                                std::to_string(n - 1) + "]");
  return idx < na ? inst.points_a[idx] : inst.points_b[idx - na];
}

struct GlobalFlags {
  double tol = 1e-9;
  int max_iter = 500;
  int threads = 1;
  std::uint64_t seed = 1;
};

LocateOptions locate_options(const GlobalFlags& g) {
  LocateOptions o;
  o.control.grad_tol = g.tol;
  o.control.max_iter = g.max_iter;
  o.threads = g.threads;
  return o;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << text;
}

json locate_json(const LocationInstance& inst, const LocateResult& res, double wall_seconds) {
  json j;
  j["x_star"] = vec_json(res.x_star);
  j["f_star"] = res.f_star;
  j["side"] = std::string(1, side_char(res.side));
  j["f_side_a"] = res.f_side_a;
  j["f_side_b"] = res.f_side_b;
  j["iterations_a"] = res.diag_a.iterations;
  j["iterations_b"] = res.diag_b.iterations;
  j["kkt_a"] = res.diag_a.kkt_residual;
  j["kkt_b"] = res.diag_b.kkt_residual;
  j["converged_a"] = res.diag_a.converged;
  j["converged_b"] = res.diag_b.converged;
  j["wall_seconds"] = wall_seconds;
  if (inst.standing_assumption_violated())
    j["warnings"] = json::array({"side norms are ordered p_A < p_B; movement is faster in H_B"});
  return j;
}

std::string locate_csv(const LocateResult& res, double wall_seconds) {
  std::ostringstream os;
  os << "f_star,side,";
  for (int k = 0; k < res.x_star.size(); ++k) os << "x" << k + 1 << ",";
  os << "f_side_a,f_side_b,iterations_a,iterations_b,wall_seconds\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", res.f_star);
  os << buf << "," << side_char(res.side) << ",";
  for (int k = 0; k < res.x_star.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.9f", res.x_star[k]);
    os << buf << ",";
  }
  std::snprintf(buf, sizeof buf, "%.9f,%.9f,%d,%d,%.4f", res.f_side_a, res.f_side_b,
                res.diag_a.iterations, res.diag_b.iterations, wall_seconds);
  os << buf << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refloc: single-facility location with hyperplane-split mixed norms"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--tol", g.tol, "solver gradient tolerance (relative)");
  app.add_option("--max-iter", g.max_iter, "iteration cap per solve stage");
  app.add_option("--threads", g.threads, "worker threads for independent gate solves");
  app.add_option("--seed", g.seed, "seed for generated instances");

  // distance
  auto* cmd_distance = app.add_subcommand("distance", "shortest refracted path between two demand points");
  std::string dist_instance;
  int dist_from = 0, dist_to = 0;
  bool dist_transit = false;
  cmd_distance->add_option("--instance", dist_instance, "instance file")->required();
  cmd_distance->add_option("--from", dist_from, "index of the first point (file order, 0-based)")->required();
  cmd_distance->add_option("--to", dist_to, "index of the second point")->required();
  cmd_distance->add_flag("--transit", dist_transit, "allow travel along the hyperplane");

  // locate / locate-transit
  auto* cmd_locate = app.add_subcommand("locate", "solve the single-facility problem");
  auto* cmd_locate_t = app.add_subcommand("locate-transit", "solve the rapid-transit variant");
  std::string loc_instance;
  bool loc_csv = false, loc_json_flag = false;
  for (auto* c : {cmd_locate, cmd_locate_t}) {
    c->add_option("--instance", loc_instance, "instance file")->required();
    c->add_flag("--csv", loc_csv, "CSV output");
    c->add_flag("--json", loc_json_flag, "JSON output (default)");
  }

  // export-socp
  auto* cmd_export = app.add_subcommand("export-socp", "write the conic formulation of one halfspace program");
  std::string exp_instance, exp_side = "A", exp_out = "-";
  bool exp_transit = false, exp_minlp = false, exp_expand = false, exp_sdp = false;
  cmd_export->add_option("--instance", exp_instance, "instance file")->required();
  cmd_export->add_option("--side", exp_side, "A or B")->check(CLI::IsMember({"A", "B"}));
  cmd_export->add_flag("--transit", exp_transit, "transit formulation");
  cmd_export->add_flag("--minlp", exp_minlp, "big-M mixed-binary formulation instead of one side");
  cmd_export->add_flag("--expand", exp_expand, "expand rational powers into rotated cones");
  cmd_export->add_flag("--emit-sdp", exp_sdp, "annotate the file with the PSD form of a rotated cone");
  cmd_export->add_option("-o,--output", exp_out, "output path ('-' for stdout)");

  // gen
  auto* cmd_gen = app.add_subcommand("gen", "generate a random instance in the unit cube");
  int gen_n = 100, gen_d = 2;
  std::string gen_out = "-";
  cmd_gen->add_option("--n", gen_n, "number of demand points")->required();
  cmd_gen->add_option("--dim", gen_d, "dimension (>= 2)")->required();
  cmd_gen->add_option("-o,--output", gen_out, "output path ('-' for stdout)");

  // bench
  auto* cmd_bench_app = app.add_subcommand("bench", "run a benchmark suite and report gaps");
  std::string bench_suite, bench_data, bench_csv, bench_json;
  bool bench_no_timing = false;
  cmd_bench_app->add_option("--suite", bench_suite, "examples|table1|table2|random")->required();
  cmd_bench_app->add_option("--data", bench_data, "directory with external datasets (*.loc)");
  cmd_bench_app->add_option("--out-csv", bench_csv, "write the CSV report here");
  cmd_bench_app->add_option("--out-json", bench_json, "write the JSON report here");
  cmd_bench_app->add_flag("--no-timing", bench_no_timing, "omit timing (byte-deterministic output)");

  // plot
  auto* cmd_plot = app.add_subcommand("plot", "solve a planar instance and render it as SVG");
  std::string plot_instance, plot_out = "-";
  bool plot_transit = false;
  cmd_plot->add_option("--instance", plot_instance, "instance file")->required();
  cmd_plot->add_flag("--transit", plot_transit, "transit model");
  cmd_plot->add_option("-o,--output", plot_out, "output path ('-' for stdout)");

  // check-retm
  auto* cmd_retm = app.add_subcommand("check-retm", "sampled falsifier for the rapid-transit condition");
  std::string retm_instance;
  int retm_from = 0, retm_to = 0, retm_samples = 10000;
  cmd_retm->add_option("--instance", retm_instance, "instance file (needs norm_h)")->required();
  cmd_retm->add_option("--from", retm_from, "index of the H_A-side point")->required();
  cmd_retm->add_option("--to", retm_to, "index of the H_B-side point")->required();
  cmd_retm->add_option("--samples", retm_samples, "hyperplane sample count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*cmd_distance) {
      LocationInstance inst = load_instance(dist_instance);
      const DemandPoint& p = point_by_index(inst, dist_from);
      const DemandPoint& q = point_by_index(inst, dist_to);
      const Side sp = side_of(inst.h, p.coords);
      const Side sq = side_of(inst.h, q.coords);
      if (sp != Side::On && sp == sq) {
        // Same halfspace: the plain norm of that side applies, no gate.
        const NormSpec& n = sp == Side::A ? inst.norm_a : inst.norm_b;
        json j;
        j["gates"] = json::array();
        j["leg_lengths"] = {p.weight * n.eval(p.coords - q.coords)};
        j["total"] = p.weight * n.eval(p.coords - q.coords);
        j["snell_residual"] = 0.0;
        j["iterations"] = 0;
        j["converged"] = true;
        j["endpoints_swapped"] = false;
        std::cout << j.dump(2) << "\n";
        return 0;
      }
      const bool swapped = sp == Side::B || sq == Side::A;
      PathQuery query;
      query.h = inst.h;
      query.norm_a = inst.norm_a;
      query.norm_b = inst.norm_b;
      query.a = swapped ? q : p;
      query.b = swapped ? p : q;
      if (dist_transit) {
        if (!inst.norm_h) throw MissingDataError("instance has no norm_h; cannot use --transit");
        query.norm_h = *inst.norm_h;
        query.weight_h = 1.0;
      }
      GateOptions gopt;
      gopt.control.grad_tol = g.tol;
      gopt.control.max_iter = g.max_iter;
      PathResult r = dist_transit ? gate_transit(query, gopt) : gate_single(query, gopt);
      std::cout << path_json(r, swapped).dump(2) << "\n";
      if (!r.converged) return 3;
      return 0;
    }

    if (*cmd_locate || *cmd_locate_t) {
      const bool transit = static_cast<bool>(*cmd_locate_t);
      LocationInstance inst = load_instance(loc_instance);
      if (transit && !inst.norm_h)
        throw MissingDataError("instance has no norm_h; add one or use 'locate'");
      if (inst.standing_assumption_violated())
        std::cerr << "warning: side norms are ordered p_A < p_B; movement is faster in H_B\n";
      const auto t0 = std::chrono::steady_clock::now();
      LocateResult res = solve(inst, transit, locate_options(g));
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (loc_csv && !loc_json_flag)
        std::cout << locate_csv(res, wall);
      else
        std::cout << locate_json(inst, res, wall).dump(2) << "\n";
      return 0;
    }

    if (*cmd_export) {
      LocationInstance inst = load_instance(exp_instance);
      ConicModel model = exp_minlp
                             ? build_minlp(inst, exp_transit)
                             : build_side_model(inst, exp_side == "A" ? Side::A : Side::B,
                                                exp_transit);
      if (exp_expand) model = expand_powers(model);
      std::ostringstream os;
      write_model(model, os, exp_sdp);
      write_text(exp_out, os.str());
      return 0;
    }

    if (*cmd_gen) {
      InstanceFile f = generate_random(gen_n, gen_d, g.seed);
      std::ostringstream os;
      write_instance(f, os);
      write_text(gen_out, os.str());
      return 0;
    }

    if (*cmd_bench_app) {
      BenchOptions opts;
      opts.data_dir = bench_data;
      opts.seed = g.seed;
      opts.threads = g.threads;
      opts.include_timing = !bench_no_timing;
      opts.locate = locate_options(g);
      BenchReport rep = cmd_bench(bench_suite, opts);
      const std::string csv = rep.to_csv(opts.include_timing);
      std::cout << csv;
      if (!bench_csv.empty()) write_text(bench_csv, csv);
      if (!bench_json.empty()) write_text(bench_json, rep.to_json(opts.include_timing).dump(2) + "\n");
      return 0;
    }

    if (*cmd_plot) {
      LocationInstance inst = load_instance(plot_instance);
      if (inst.dim() != 2) throw std::invalid_argument("plot: only planar instances can be drawn");
      if (plot_transit && !inst.norm_h)
        throw MissingDataError("instance has no norm_h; cannot use --transit");
      LocateResult res = solve(inst, plot_transit, locate_options(g));
      write_text(plot_out, render_svg(inst, res));
      return 0;
    }

    if (*cmd_retm) {
      LocationInstance inst = load_instance(retm_instance);
      if (!inst.norm_h) throw MissingDataError("check-retm needs an instance with norm_h");
      const DemandPoint& p = point_by_index(inst, retm_from);
      const DemandPoint& q = point_by_index(inst, retm_to);
      const bool swapped = side_of(inst.h, p.coords) == Side::B;
      RetmResult r = retm_check(swapped ? q : p, swapped ? p : q, inst.h, inst.norm_a,
                                inst.norm_b, *inst.norm_h, retm_samples);
      json j;
      j["holds"] = r.holds;
      j["samples"] = retm_samples;
      if (!r.holds) {
        j["violated_condition"] = r.violated_condition;
        j["witness"] = vec_json(r.witness);
      }
      std::cout << j.dump(2) << "\n";
      return 0;
    }
  } catch (const MissingDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
