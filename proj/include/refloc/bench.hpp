#pragma once

// Benchmark harness: reruns the canonical experiment blocks (worked examples,
// the two comparison tables, random instances) and reports objective values,
// facilities, and solve wall time next to the published reference values.
// Gaps are reported, never asserted; the acceptance suite owns thresholds.

#include <chrono>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "refloc/instances.hpp"
#include "refloc/refraction.hpp"

namespace refloc {

struct BenchRow {
  std::string id;
  std::string norms;
  std::string hyperplane;
  char side = '-';
  double f_star = std::numeric_limits<double>::quiet_NaN();
  Vec x_star;
  double cpu_seconds = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> reference_value;
  std::optional<double> abs_gap;
  std::string status = "ok";
  std::string note;
};

struct BenchReport {
  std::string suite;
  std::vector<BenchRow> rows;
  std::vector<std::string> notes;

  std::string to_csv(bool include_timing = true) const {
    std::ostringstream os;
    os << "id,norms,hyperplane,side,f_star,x_star";
    if (include_timing) os << ",cpu_seconds";
    os << ",reference_value,abs_gap,status,note\n";
    char buf[64];
    auto f9 = [&](double v) {
      std::snprintf(buf, sizeof buf, "%.9f", v);
      return std::string(buf);
    };
    for (const auto& r : rows) {
      os << r.id << "," << r.norms << "," << r.hyperplane << "," << r.side << ",";
      os << (std::isnan(r.f_star) ? "" : f9(r.f_star)) << ",";
      std::string xs;
      for (int k = 0; k < r.x_star.size(); ++k) {
        if (k) xs += ";";
        std::snprintf(buf, sizeof buf, "%.9f", r.x_star[k]);
        xs += buf;
      }
      os << xs << ",";
      if (include_timing) {
        if (!std::isnan(r.cpu_seconds)) {
          std::snprintf(buf, sizeof buf, "%.4f", r.cpu_seconds);
          os << buf;
        }
        os << ",";
      }
      os << (r.reference_value ? f9(*r.reference_value) : "") << ",";
      if (r.abs_gap) {
        std::snprintf(buf, sizeof buf, "%.3e", *r.abs_gap);
        os << buf;
      }
      os << "," << r.status << "," << r.note << "\n";
    }
    return os.str();
  }

  nlohmann::json to_json(bool include_timing = true) const {
    nlohmann::json j;
    j["suite"] = suite;
    j["notes"] = notes;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json row;
      row["id"] = r.id;
      row["norms"] = r.norms;
      row["hyperplane"] = r.hyperplane;
      row["side"] = std::string(1, r.side);
      if (!std::isnan(r.f_star)) row["f_star"] = r.f_star;
      row["x_star"] = std::vector<double>(r.x_star.data(), r.x_star.data() + r.x_star.size());
      if (include_timing && !std::isnan(r.cpu_seconds)) row["cpu_seconds"] = r.cpu_seconds;
      if (r.reference_value) row["reference_value"] = *r.reference_value;
      if (r.abs_gap) row["abs_gap"] = *r.abs_gap;
      row["status"] = r.status;
      if (!r.note.empty()) row["note"] = r.note;
      j["rows"].push_back(std::move(row));
    }
    return j;
  }
};

struct BenchOptions {
  std::string data_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  bool include_timing = true;
  LocateOptions locate;
};

namespace detail {

inline std::string norm_triple_label(const LocationInstance& inst) {
  std::string s = inst.norm_a.to_string() + "/" + inst.norm_b.to_string();
  if (inst.norm_h) s += "/" + inst.norm_h->to_string();
  return s;
}

// Wall time of the solve call only (median of `runs`), I/O excluded.
inline std::pair<LocateResult, double> timed_solve(const LocationInstance& inst, bool transit,
                                                   const LocateOptions& opts, int runs) {
  LocateResult res;
  std::vector<double> times;
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    res = solve(inst, transit, opts);
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return {std::move(res), times[times.size() / 2]};
}

inline BenchRow locate_row(const std::string& id, const LocationInstance& inst, bool transit,
                           std::optional<double> ref, const std::string& hp,
                           const BenchOptions& opts) {
  BenchRow row;
  row.id = id;
  row.norms = norm_triple_label(inst);
  row.hyperplane = hp;
  row.reference_value = ref;
  try {
    LocateOptions lo = opts.locate;
    lo.threads = opts.threads;
    auto [res, secs] = timed_solve(inst, transit, lo, opts.include_timing ? 3 : 1);
    row.f_star = res.f_star;
    row.x_star = res.x_star;
    row.side = side_char(res.side);
    if (opts.include_timing) row.cpu_seconds = secs;
    if (ref) row.abs_gap = std::abs(res.f_star - *ref);
  } catch (const std::exception& e) {
    row.status = "failed";
    row.note = e.what();
  }
  return row;
}

struct TableSpec {
  const char* dataset;
  const char* hyperplane;
  double ref_single;
  double ref_transit;
};

// Reference objective values of the two published comparison tables
// (single-gate model, then the transit model with the quarter-linf norm).
inline const std::vector<TableSpec>& table_specs() {
  static const std::vector<TableSpec> specs = {
      {"parlar4", "y=x", 26.951942, 20.5307},
      {"parlar18", "y=1.5x", 112.350633, 108.3362},
      {"zaferanieh30", "y=0.5x", 301.378686, 254.7805},
      {"zaferanieh30", "y=x", 265.971645, 230.7513},
      {"zaferanieh30", "y=1.5x", 257.814199, 244.4072},
      {"zaferanieh50", "y=0.5x", 1126.392248, 917.1736},
      {"zaferanieh50", "y=x", 966.377027, 808.2990},
      {"zaferanieh50", "y=1.5x", 939.487369, 892.4482},
  };
  return specs;
}

inline void run_table_block(BenchReport& rep, bool transit, const BenchOptions& opts) {
  for (const auto& s : table_specs()) {
    InstanceFile file;
    try {
      file = embedded_dataset(s.dataset, opts.data_dir);
    } catch (const MissingDataError& e) {
      BenchRow row;
      row.id = std::string(s.dataset) + "_" + s.hyperplane + (transit ? "_pt" : "_p");
      row.hyperplane = s.hyperplane;
      row.reference_value = transit ? s.ref_transit : s.ref_single;
      row.status = "skipped";
      row.note = e.what();
      rep.rows.push_back(std::move(row));
      continue;
    }
    file.h = Hyperplane::parse(s.hyperplane);
    for (auto& p : file.points) p.set = 'u';
    // The published runs use the l1 and l2 norms; the assignment per side is
    // not stated, so both are solved and the matching one is flagged.
    const std::pair<NormSpec, NormSpec> assignments[2] = {
        {NormSpec::l1(), NormSpec::lp(2, 1)},
        {NormSpec::lp(2, 1), NormSpec::l1()},
    };
    BenchRow cand[2];
    for (int k = 0; k < 2; ++k) {
      file.norm_a = assignments[k].first;
      file.norm_b = assignments[k].second;
      if (transit) file.norm_h = NormSpec::linf(0.25);
      LocationInstance inst = materialize(file);
      const double ref = transit ? s.ref_transit : s.ref_single;
      cand[k] = locate_row(std::string(s.dataset) + "_" + s.hyperplane + (transit ? "_pt" : "_p") +
                               (k == 0 ? "_l1l2" : "_l2l1"),
                           inst, transit, ref, s.hyperplane, opts);
    }
    const int match = (cand[0].abs_gap.value_or(1e30) <= cand[1].abs_gap.value_or(1e30)) ? 0 : 1;
    cand[match].note = "matches reference assignment";
    rep.rows.push_back(cand[0]);
    rep.rows.push_back(cand[1]);
  }
}

}  // namespace detail

// suite: examples | table1 | table2 | random.
inline BenchReport cmd_bench(const std::string& suite, const BenchOptions& opts = {}) {
  BenchReport rep;
  rep.suite = suite;
  rep.notes.push_back("all demand weights set to 1 (benchmark sources do not publish weights)");
  if (suite == "examples") {
    InstanceFile f = embedded_parlar18();
    LocationInstance inst = materialize(f);
    rep.rows.push_back(detail::locate_row("example1_p", inst, false, 103.934734, "y=1.5x", opts));
    inst.norm_h = NormSpec::linf(0.25);
    rep.rows.push_back(detail::locate_row("example2_pt", inst, true, 100.442353, "y=1.5x", opts));
    if (rep.rows[0].status == "ok" && rep.rows[1].status == "ok") {
      char buf[64];
      std::snprintf(buf, sizeof buf, "saving_vs_single=%.6f", rep.rows[0].f_star - rep.rows[1].f_star);
      rep.rows[1].note = buf;
    }
    // Two-point transit path with the l1/l1/linf triple.
    BenchRow row;
    row.id = "example3_gates";
    row.norms = "l1/l1/linf";
    row.hyperplane = "y=x";
    row.reference_value = 8.0;
    try {
      PathQuery q;
      q.h = Hyperplane::parse("y=x");
      q.norm_a = NormSpec::l1();
      q.norm_b = NormSpec::l1();
      q.norm_h = NormSpec::linf();
      q.a = DemandPoint((Vec(2) << 4, 5).finished(), 1.0);
      q.b = DemandPoint((Vec(2) << 12, 11).finished(), 1.0);
      const auto t0 = std::chrono::steady_clock::now();
      PathResult r = gate_transit(q);
      const auto t1 = std::chrono::steady_clock::now();
      row.f_star = r.total;
      row.x_star = r.gates[0];
      row.abs_gap = std::abs(r.total - 8.0);
      if (opts.include_timing) row.cpu_seconds = std::chrono::duration<double>(t1 - t0).count();
      char buf[128];
      std::snprintf(buf, sizeof buf, "gates (%.6f;%.6f) (%.6f;%.6f)", r.gates[0][0], r.gates[0][1],
                    r.gates[1][0], r.gates[1][1]);
      row.note = buf;
    } catch (const std::exception& e) {
      row.status = "failed";
      row.note = e.what();
    }
    rep.rows.push_back(std::move(row));
  } else if (suite == "table1") {
    detail::run_table_block(rep, false, opts);
  } else if (suite == "table2") {
    rep.notes.push_back("transit model with the quarter-linf hyperplane norm");
    detail::run_table_block(rep, true, opts);
  } else if (suite == "random") {
    struct RandomSpec {
      int n, d;
      bool transit;
    };
    const RandomSpec specs[] = {{5000, 2, false}, {5000, 2, true}, {2000, 3, false}};
    for (const auto& s : specs) {
      InstanceFile f = generate_random(s.n, s.d, opts.seed);
      if (s.transit) f.norm_h = NormSpec::lp(3, 1);
      LocationInstance inst = materialize(f);
      char id[64];
      std::snprintf(id, sizeof id, "random_n%d_d%d%s", s.n, s.d, s.transit ? "_pt" : "_p");
      rep.rows.push_back(detail::locate_row(id, inst, s.transit, std::nullopt, "x_d=0.5", opts));
    }
  } else {
    throw std::invalid_argument("unknown bench suite '" + suite +
                                "' (want examples, table1, table2, or random)");
  }
  return rep;
}

}  // namespace refloc
