#include <sstream>

#include "routecorr/error.hpp"
#include "routecorr/netgraph.hpp"

namespace routecorr {

namespace {

double param(const Params& p, const char* key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

void check_keys(std::string_view name, const Params& p, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : p) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) throw ValidationError("unknown parameter '" + k + "' for " + std::string(name));
  }
}

void require_positive(const char* key, double v) {
  if (!(v > 0.0)) throw ValidationError(std::string("parameter ") + key + " must be positive");
}

Fixture fourlink(const Params& p) {
  check_keys("fourlink", p, {"c", "h"});
  const double c = param(p, "c", 10.0), h = param(p, "h", 1.0);
  require_positive("c", c);
  require_positive("h", h);
  if (!(h < c)) throw ValidationError("fourlink requires h < c");
  std::vector<Link> ls{{1, 1, 3, c}, {2, 1, 2, c - h}, {3, 2, 3, h}, {4, 2, 3, h}};
  return {Network({}, ls), {1, 3}};
}

// The bridge carries b - a + h so that h = 0 leaves all three routes at cost a + b.
Fixture braess(const Params& p) {
  check_keys("braess", p, {"a", "b", "h"});
  const double a = param(p, "a", 4.0), b = param(p, "b", 5.0), h = param(p, "h", 0.0);
  require_positive("a", a);
  require_positive("b", b);
  if (h < 0.0) throw ValidationError("parameter h must be non-negative");
  if (!(b - a + h > 0.0)) throw ValidationError("braess requires b - a + h > 0");
  std::vector<Link> ls{{1, 1, 2, a}, {2, 1, 3, b}, {3, 2, 3, b - a + h}, {4, 2, 4, b}, {5, 3, 4, a}};
  return {Network({}, ls), {1, 4}};
}

std::vector<Link> grid(int rows, int cols, double c) {
  std::vector<Link> ls;
  LinkId id = 1;
  for (int r = 0; r < rows; ++r)
    for (int k = 0; k < cols; ++k) {
      NodeId u = r * cols + k + 1;
      if (k + 1 < cols) ls.push_back({id++, u, u + 1, c});
      if (r + 1 < rows) ls.push_back({id++, u, u + cols, c});
    }
  return ls;
}

Fixture mesh2x2(const Params& p) {
  check_keys("mesh2x2", p, {"c"});
  const double c = param(p, "c", 1.0);
  require_positive("c", c);
  return {Network({}, grid(3, 3, c)), {1, 9}};
}

// 3x4 grid with two diagonal shortcuts and a long bypass from the origin.
Fixture mesh_bypass(const Params& p) {
  check_keys("mesh_bypass", p, {});
  auto ls = grid(3, 4, 1.0);
  LinkId id = static_cast<LinkId>(ls.size()) + 1;
  ls.push_back({id++, 1, 6, 1.5});
  ls.push_back({id++, 7, 12, 1.5});
  ls.push_back({id++, 1, 9, 2.5});
  return {Network({}, ls), {1, 12}};
}

Fixture sioux_falls(const Params& p) {
  check_keys("sioux_falls", p, {});
  std::istringstream in{std::string(sioux_falls_text())};
  auto f = load_network(in);
  return {std::move(f.network), {1, 15}};
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"fourlink", "braess", "mesh2x2", "mesh_bypass", "sioux_falls"};
}

Fixture builtin_network(std::string_view name, const Params& params) {
  if (name == "fourlink") return fourlink(params);
  if (name == "braess") return braess(params);
  if (name == "mesh2x2") return mesh2x2(params);
  if (name == "mesh_bypass") return mesh_bypass(params);
  if (name == "sioux_falls") return sioux_falls(params);
  throw ValidationError("unknown network '" + std::string(name) + "'");
}

}  // namespace routecorr
