#pragma once

// Instance file I/O, the embedded canonical datasets, and reproducible random
// instance generation.
//
// Instance format (UTF-8, line oriented, '#' comments):
//   version 1
//   dim <d>
//   hyperplane <alpha=a1,...,ad;beta=b | y=<slope>x>
//   norm_a <token>          # lp:r/s[:scale] l1[:scale] linf[:scale] poly:<file>[:scale]
//   norm_b <token>
//   norm_h <token>          # optional: enables the transit model
//   point <c1> ... <cd> <weight> <a|b|auto>
//   ...
// `auto` points are classified by sidedness; explicit labels may not
// contradict strict sidedness (points on H may carry either label).

#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "refloc/detail/rng.hpp"
#include "refloc/locate.hpp"

namespace refloc {

struct InstancePoint {
  Vec coords;
  double weight = 1.0;
  char set = 'u';  // 'a', 'b', or 'u' for auto
};

struct InstanceFile {
  int version = 1;
  int dim = 0;
  Hyperplane h;
  NormSpec norm_a = NormSpec::lp(2, 1);
  NormSpec norm_b = NormSpec::lp(2, 1);
  std::optional<NormSpec> norm_h;
  std::vector<InstancePoint> points;
};

inline InstanceFile parse_instance(std::istream& in, const std::string& base_dir = {}) {
  InstanceFile f;
  bool saw_version = false, saw_dim = false, saw_h = false, saw_na = false, saw_nb = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (key == "version") {
      if (!(ls >> f.version) || f.version != 1)
        throw ParseError("unsupported instance version", lineno);
      saw_version = true;
    } else if (key == "dim") {
      if (!(ls >> f.dim) || f.dim < 1) throw ParseError("bad dimension", lineno);
      saw_dim = true;
    } else if (key == "hyperplane") {
      std::string rest;
      std::getline(ls, rest);
      try {
        f.h = Hyperplane::parse(rest);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      }
      saw_h = true;
    } else if (key == "norm_a" || key == "norm_b" || key == "norm_h") {
      std::string tok;
      if (!(ls >> tok)) throw ParseError("missing norm token after " + key, lineno);
      NormSpec n = NormSpec::lp(2, 1);
      try {
        n = NormSpec::parse(tok, base_dir);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      }
      if (key == "norm_a") {
        f.norm_a = n;
        saw_na = true;
      } else if (key == "norm_b") {
        f.norm_b = n;
        saw_nb = true;
      } else {
        f.norm_h = n;
      }
    } else if (key == "point") {
      if (!saw_dim) throw ParseError("point before dim", lineno);
      InstancePoint p;
      std::vector<double> c(f.dim);
      for (int k = 0; k < f.dim; ++k)
        if (!(ls >> c[k])) throw ParseError("point needs " + std::to_string(f.dim) + " coordinates", lineno);
      if (!(ls >> p.weight)) throw ParseError("point is missing its weight", lineno);
      if (!(p.weight > 0.0)) throw ParseError("point weight must be positive", lineno);
      std::string set;
      if (!(ls >> set)) throw ParseError("point is missing its set label (a|b|auto)", lineno);
      if (set != "a" && set != "b" && set != "auto")
        throw ParseError("bad set label '" + set + "' (want a, b, or auto)", lineno);
      p.set = set == "auto" ? 'u' : set[0];
      p.coords = Eigen::Map<Vec>(c.data(), f.dim);
      f.points.push_back(std::move(p));
    } else {
      throw ParseError("unknown directive '" + key + "'", lineno);
    }
  }
  if (!saw_version) throw ParseError("missing 'version' line");
  if (!saw_dim) throw ParseError("missing 'dim' line");
  if (!saw_h) throw ParseError("missing 'hyperplane' line");
  if (!saw_na || !saw_nb) throw ParseError("missing norm_a/norm_b line");
  if (f.h.dim() != f.dim) throw ParseError("hyperplane dimension disagrees with dim");
  return f;
}

// Classify auto points and validate explicit labels against sidedness.
inline LocationInstance materialize(const InstanceFile& f) {
  LocationInstance inst;
  inst.h = f.h;
  inst.norm_a = f.norm_a;
  inst.norm_b = f.norm_b;
  inst.norm_h = f.norm_h;
  const double tol = f.h.on_tol();
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    const auto& p = f.points[i];
    const Side s = side_of(f.h, p.coords, tol);
    char label = p.set;
    if (label == 'u') {
      label = (s == Side::B) ? 'b' : 'a';
    } else if (s != Side::On) {
      const char strict = s == Side::A ? 'a' : 'b';
      if (label != strict)
        throw ParseError("point " + std::to_string(i) + " labeled '" + std::string(1, label) +
                         "' lies strictly on side " + std::string(1, strict == 'a' ? 'A' : 'B'));
    }
    (label == 'a' ? inst.points_a : inst.points_b).emplace_back(p.coords, p.weight);
  }
  return inst;
}

inline InstanceFile load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingDataError("cannot open instance file '" + path + "'");
  std::string dir = ".";
  const auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return parse_instance(in, dir);
}

inline LocationInstance load_instance(const std::string& path) {
  return materialize(load_instance_file(path));
}

inline void write_instance(const InstanceFile& f, std::ostream& os) {
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "version " << f.version << "\n";
  os << "dim " << f.dim << "\n";
  os << "hyperplane " << f.h.to_string() << "\n";
  os << "norm_a " << f.norm_a.to_string() << "\n";
  os << "norm_b " << f.norm_b.to_string() << "\n";
  if (f.norm_h) os << "norm_h " << f.norm_h->to_string() << "\n";
  for (const auto& p : f.points) {
    os << "point";
    for (int k = 0; k < f.dim; ++k) os << " " << num(p.coords[k]);
    os << " " << num(p.weight) << " " << (p.set == 'u' ? "auto" : std::string(1, p.set)) << "\n";
  }
}

// The 18-point planar benchmark set; unit weights, points classified by the
// configured hyperplane (default y = 1.5x with the l2 / l3 norm pair).
inline InstanceFile embedded_parlar18() {
  const double pts[18][2] = {{1, 2},  {2, 8},  {3, 12}, {6, 11}, {5, 5},   {6, 1},
                             {7, 4},  {8, 8},  {9, 1},  {9, 5},  {9, 10},  {10, 12},
                             {14, 2}, {14, 4}, {16, 8}, {17, 4}, {17, 10}, {19, 13}};
  InstanceFile f;
  f.dim = 2;
  f.h = Hyperplane::parse("y=1.5x");
  f.norm_a = NormSpec::lp(2, 1);
  f.norm_b = NormSpec::lp(3, 1);
  for (auto& p : pts) {
    InstancePoint ip;
    ip.coords = (Vec(2) << p[0], p[1]).finished();
    ip.weight = 1.0;
    ip.set = 'u';
    f.points.push_back(std::move(ip));
  }
  return f;
}

// Canonical datasets by name. Only the 18-point set is distributed with the
// library; the older 4-, 30- and 50-point sets are not printed in a citable
// form, so they load from user-supplied files <data_dir>/<name>.loc instead.
inline InstanceFile embedded_dataset(const std::string& name, const std::string& data_dir = {}) {
  if (name == "parlar18") return embedded_parlar18();
  if (name == "parlar4" || name == "zaferanieh30" || name == "zaferanieh50" ||
      name == "eilon50") {
    if (!data_dir.empty()) {
      const std::string path = data_dir + "/" + name + ".loc";
      std::ifstream probe(path);
      if (probe) return load_instance_file(path);
      throw MissingDataError("dataset '" + name + "' needs the external file " + path +
                             " (not distributed with the library)");
    }
    throw MissingDataError("dataset '" + name +
                           "' is not embedded; supply it as <data-dir>/" + name +
                           ".loc via --data");
  }
  throw MissingDataError("unknown dataset '" + name + "'");
}

// n uniform points in [0,1]^d with unit weights, split by x_d = 0.5.
// Deterministic for a fixed seed: xoshiro256++ seeded by splitmix64, top 53
// bits per coordinate, coordinates drawn point-major.
inline InstanceFile generate_random(int n, int d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_random: n must be >= 1");
  if (d < 2) throw std::invalid_argument("generate_random: d must be >= 2");
  InstanceFile f;
  f.dim = d;
  Vec alpha = Vec::Zero(d);
  alpha[d - 1] = 1.0;
  f.h = Hyperplane(alpha, 0.5);
  f.norm_a = NormSpec::lp(2, 1);
  f.norm_b = NormSpec::lp(3, 2);
  detail::Xoshiro256pp rng(seed);
  f.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    InstancePoint p;
    p.coords.resize(d);
    for (int k = 0; k < d; ++k) p.coords[k] = rng.uniform01();
    p.weight = 1.0;
    p.set = 'u';
    f.points.push_back(std::move(p));
  }
  return f;
}

}  // namespace refloc
