#include "asep/dual_space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <set>

#include "asep/error.hpp"

namespace asep {

DualLattice DualLattice::infinite(int dimension) {
  require(dimension == 1 || dimension == 2, "dual lattice: dimension must be 1 or 2");
  return DualLattice{dimension, std::nullopt};
}

DualLattice DualLattice::on_torus(const TorusGeometry& geometry) { return DualLattice{geometry.dimension(), geometry}; }

Vec2i DualLattice::wrap(Vec2i x) const {
  if (dimension == 1) x[1] = 0;
  if (!torus) return x;
  return torus->coords(torus->index(x));
}

int DualLattice::distance(Vec2i x, Vec2i y) const {
  Vec2i z{x[0] - y[0], x[1] - y[1]};
  if (torus) z = torus->minimal_image(z);
  return std::abs(z[0]) + std::abs(z[1]);
}

std::vector<Vec2i> DualLattice::unit_steps() const {
  if (dimension == 1) return {{1, 0}, {-1, 0}};
  return {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
}

MonomialFunction::MonomialFunction(DualLattice lattice, int degree, Representation rep)
    : lattice_(std::move(lattice)), degree_(degree), rep_(rep) {
  require(degree >= 1, "monomial function: degree must be >= 1");
}

Support MonomialFunction::canonical(Support points) const {
  require(static_cast<int>(points.size()) == degree_, "monomial function: support size differs from degree");
  for (auto& p : points) p = lattice_.wrap(p);
  std::sort(points.begin(), points.end());
  return points;
}

namespace {

bool has_collision(const Support& sorted) { return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end(); }

// 1 / prod m_u! for a sorted tuple: the weight of one multiset among ordered tuples, divided by n!.
double multiset_weight(const Support& sorted) {
  double w = 1.0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
      w /= static_cast<double>(run);
    } else {
      run = 1;
    }
  }
  return w;
}

}  // namespace

double MonomialFunction::get(Support points) const {
  auto key = canonical(std::move(points));
  if (rep_ == Representation::HardCore && has_collision(key)) return 0.0;
  auto it = terms_.find(key);
  return it == terms_.end() ? 0.0 : it->second;
}

void MonomialFunction::set(Support points, double value) {
  auto key = canonical(std::move(points));
  require(rep_ == Representation::Symmetric || !has_collision(key),
          "hard-core function cannot take values on coinciding points");
  if (value == 0.0)
    terms_.erase(key);
  else
    terms_[key] = value;
}

void MonomialFunction::add(Support points, double value) {
  if (value == 0.0) return;
  auto key = canonical(std::move(points));
  require(rep_ == Representation::Symmetric || !has_collision(key),
          "hard-core function cannot take values on coinciding points");
  double& v = terms_[key];
  v += value;
  if (v == 0.0) terms_.erase(key);
}

MonomialFunction MonomialFunction::translated(Vec2i z) const {
  MonomialFunction out(lattice_, degree_, rep_);
  for (const auto& [s, v] : terms_) {
    Support t = s;
    for (auto& p : t) p = lattice_.add(p, z);
    out.add(std::move(t), v);
  }
  return out;
}

MonomialFunction& MonomialFunction::operator+=(const MonomialFunction& other) {
  require(other.degree_ == degree_ && other.rep_ == rep_, "monomial function: mismatched degree or representation");
  for (const auto& [s, v] : other.terms_) add(s, v);
  return *this;
}

MonomialFunction& MonomialFunction::operator*=(double c) {
  if (c == 0.0) terms_.clear();
  for (auto& [s, v] : terms_) v *= c;
  return *this;
}

void MonomialFunction::prune(double tolerance) {
  std::erase_if(terms_, [&](const auto& kv) { return std::abs(kv.second) <= tolerance; });
}

MonomialFunction operator+(MonomialFunction a, const MonomialFunction& b) { return a += b; }
MonomialFunction operator-(MonomialFunction a, const MonomialFunction& b) { return a += (-1.0) * b; }
MonomialFunction operator*(double c, MonomialFunction a) { return a *= c; }

double max_abs_difference(const MonomialFunction& a, const MonomialFunction& b) {
  double m = 0.0;
  for (const auto& [s, v] : a.terms()) m = std::max(m, std::abs(v - b.get(s)));
  for (const auto& [s, v] : b.terms()) m = std::max(m, std::abs(v - a.get(s)));
  return m;
}

GradedFunction decompose_local_function(const DualLattice& lattice, std::span<const Vec2i> window,
                                        std::span<const double> table, double density) {
  require(density > 0.0 && density < 1.0, "decompose: density must lie in (0,1)");
  const std::size_t m = window.size();
  require(m >= 1 && m <= 24, "decompose: window must have 1..24 sites");
  require(table.size() == (std::size_t{1} << m), "decompose: truth table incomplete (needs 2^|window| entries)");
  {
    std::set<Vec2i> distinct;
    for (auto x : window) distinct.insert(lattice.wrap(x));
    require(distinct.size() == m, "decompose: window sites must be distinct");
  }
  const double sd = std::sqrt(density * (1.0 - density));
  const double xi0 = -density / sd, xi1 = (1.0 - density) / sd;
  std::vector<double> a(table.begin(), table.end());
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j & bit) continue;
      const double f0 = a[j], f1 = a[j | bit];
      a[j] = (1.0 - density) * f0 + density * f1;
      a[j | bit] = (1.0 - density) * xi0 * f0 + density * xi1 * f1;
    }
  }
  GradedFunction out;
  out.mean = a[0];
  for (std::size_t k = 1; k <= m; ++k) out.parts.emplace_back(lattice, static_cast<int>(k));
  for (std::size_t mask = 1; mask < a.size(); ++mask) {
    if (a[mask] == 0.0) continue;
    Support s;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (std::size_t{1} << i)) s.push_back(window[i]);
    out.parts[s.size() - 1].add(std::move(s), a[mask]);
  }
  return out;
}

double evaluate_local_function(const GradedFunction& f, std::span<const Vec2i> window, std::uint64_t bits, double density) {
  const double sd = std::sqrt(density * (1.0 - density));
  double total = f.mean;
  for (const auto& part : f.parts)
    for (const auto& [s, v] : part.terms()) {
      double prod = v;
      for (const auto& p : s) {
        auto it = std::find_if(window.begin(), window.end(), [&](Vec2i w) { return part.lattice().wrap(w) == p; });
        require(it != window.end(), "evaluate: function depends on a site outside the window");
        const bool occ = (bits >> (it - window.begin())) & 1u;
        prod *= ((occ ? 1.0 : 0.0) - density) / sd;
      }
      total += prod;
    }
  return total;
}

namespace {

struct ShapeKey {
  Support shape;
  int stabilizer = 1;
};

// Translation class representative: the lexicographically smallest anchored copy.
ShapeKey shape_of(const DualLattice& lattice, const Support& s) {
  if (!lattice.torus) {
    Support t = s;
    for (auto& p : t) p = {p[0] - s[0][0], p[1] - s[0][1]};
    return {t, 1};
  }
  ShapeKey best;
  bool first = true;
  const std::set<Vec2i> anchors(s.begin(), s.end());
  for (const auto& anchor : anchors) {
    Support t = s;
    for (auto& p : t) p = lattice.add(p, {-anchor[0], -anchor[1]});
    std::sort(t.begin(), t.end());
    if (first || t < best.shape) {
      best = {t, 1};
      first = false;
    } else if (t == best.shape) {
      ++best.stabilizer;
    }
  }
  return best;
}

void require_compatible(const MonomialFunction& g, const MonomialFunction& h) {
  require(g.representation() == h.representation(), "inner product: mixed representations");
  require(g.lattice().dimension == h.lattice().dimension && g.lattice().torus.has_value() == h.lattice().torus.has_value(),
          "inner product: functions live on different lattices");
}

}  // namespace

double semi_inner_product(const MonomialFunction& g, const MonomialFunction& h) {
  require_compatible(g, h);
  if (g.degree() != h.degree()) return 0.0;
  std::map<Support, std::pair<double, double>> sums;  // shape -> (g-bar, h-bar)
  std::map<Support, double> weight;
  for (const auto& [s, v] : g.terms()) {
    auto key = shape_of(g.lattice(), s);
    sums[key.shape].first += v;
    weight[key.shape] = key.stabilizer * multiset_weight(s);
  }
  for (const auto& [s, v] : h.terms()) {
    auto key = shape_of(h.lattice(), s);
    sums[key.shape].second += v;
    weight[key.shape] = key.stabilizer * multiset_weight(s);
  }
  double total = 0.0;
  for (const auto& [shape, gh] : sums) total += gh.first * gh.second * weight[shape];
  return total;
}

double semi_inner_product(const GradedFunction& g, const GradedFunction& h) {
  double total = 0.0;
  for (const auto& a : g.parts)
    for (const auto& b : h.parts)
      if (a.degree() == b.degree()) total += semi_inner_product(a, b);
  return total;
}

double l2_inner_product(const MonomialFunction& g, const MonomialFunction& h) {
  require_compatible(g, h);
  if (g.degree() != h.degree()) return 0.0;
  double total = 0.0;
  for (const auto& [s, v] : g.terms()) {
    auto it = h.terms().find(s);
    if (it != h.terms().end()) total += v * it->second * multiset_weight(s);
  }
  return total;
}

std::vector<PairRate> pair_rates(const JumpLaw& law) {
  std::vector<PairRate> out;
  for (const auto& e : law.entries()) {
    const Vec2i neg{-e.displacement[0], -e.displacement[1]};
    const bool positive = e.displacement > neg;
    const Vec2i rep = positive ? e.displacement : neg;
    auto it = std::find_if(out.begin(), out.end(), [&](const PairRate& p) { return p.z == rep; });
    if (it == out.end()) {
      out.push_back({rep, 0.0, 0.0});
      it = out.end() - 1;
    }
    it->s += 0.5 * e.rate;
    it->a += (positive ? 0.5 : -0.5) * e.rate;
  }
  return out;
}

namespace {

bool contains(const Support& s, Vec2i p) { return std::binary_search(s.begin(), s.end(), p); }

Support with(Support s, Vec2i p) {
  s.insert(std::upper_bound(s.begin(), s.end(), p), p);
  return s;
}

Support without(Support s, Vec2i p) {
  auto it = std::lower_bound(s.begin(), s.end(), p);
  if (it != s.end() && *it == p) s.erase(it);
  return s;
}

void require_hardcore(const MonomialFunction& f, const char* what) {
  require(f.representation() == Representation::HardCore, what);
}

void require_symmetric(const MonomialFunction& f, const char* what) {
  require(f.representation() == Representation::Symmetric, what);
}

// Multiplicity of p in a sorted tuple.
int count(const Support& s, Vec2i p) {
  auto [lo, hi] = std::equal_range(s.begin(), s.end(), p);
  return static_cast<int>(hi - lo);
}

// Evaluate a symmetric-representation operator at candidate outputs.
template <class Candidates, class Eval>
MonomialFunction evaluate_on(const MonomialFunction& f, int out_degree, Candidates&& candidates, Eval&& eval) {
  std::set<Support> points;
  for (const auto& [s, v] : f.terms()) candidates(s, points);
  MonomialFunction out(f.lattice(), out_degree, Representation::Symmetric);
  for (const auto& x : points) out.set(x, eval(x));
  return out;
}

}  // namespace

MonomialFunction apply_S_hardcore(const MonomialFunction& f, const JumpLaw& law) {
  require_hardcore(f, "S: expects the hard-core representation");
  const auto& lat = f.lattice();
  MonomialFunction out(lat, f.degree());
  for (const auto& pr : pair_rates(law)) {
    if (pr.s == 0.0) continue;
    for (const auto& [s, v] : f.terms())
      for (const auto& p : s)
        for (int sign : {1, -1}) {
          const Vec2i q = lat.add(p, {sign * pr.z[0], sign * pr.z[1]});
          if (contains(s, q)) continue;
          out.add(with(without(s, p), q), pr.s * v);
          out.add(s, -pr.s * v);
        }
  }
  return out;
}

MonomialFunction apply_Aplus_hardcore(const MonomialFunction& f, const JumpLaw& law) {
  require_hardcore(f, "A+: expects the hard-core representation");
  const auto& lat = f.lattice();
  MonomialFunction out(lat, f.degree() + 1);
  for (const auto& pr : pair_rates(law)) {
    if (pr.a == 0.0) continue;
    for (const auto& [s, v] : f.terms())
      for (const auto& p : s)
        for (int sign : {1, -1}) {
          const Vec2i q = lat.add(p, {sign * pr.z[0], sign * pr.z[1]});
          if (contains(s, q)) continue;
          out.add(with(s, q), sign * pr.a * v);
        }
  }
  return out;
}

MonomialFunction apply_Aplus_adjoint(const MonomialFunction& g, const JumpLaw& law) {
  require_hardcore(g, "A+*: expects the hard-core representation");
  if (g.degree() == 1) return MonomialFunction(g.lattice(), 1);  // A+ never produces degree 1; returned as zero
  const auto& lat = g.lattice();
  MonomialFunction out(lat, g.degree() - 1);
  for (const auto& pr : pair_rates(law)) {
    if (pr.a == 0.0) continue;
    for (const auto& [s, v] : g.terms())
      for (const auto& q : s) {
        const double c = (contains(s, lat.add(q, {-pr.z[0], -pr.z[1]})) ? 1.0 : 0.0) -
                         (contains(s, lat.add(q, pr.z)) ? 1.0 : 0.0);
        if (c != 0.0) out.add(without(s, q), c * pr.a * v);
      }
  }
  return out;
}

MonomialFunction to_symmetric(const MonomialFunction& f) {
  if (f.representation() == Representation::Symmetric) return f;
  MonomialFunction out(f.lattice(), f.degree(), Representation::Symmetric);
  for (const auto& [s, v] : f.terms()) out.set(s, v);
  return out;
}

MonomialFunction apply_Delta_free(const MonomialFunction& f) {
  require_symmetric(f, "free Laplacian: expects the symmetric representation");
  const auto& lat = f.lattice();
  const auto steps = lat.unit_steps();
  auto candidates = [&](const Support& s, std::set<Support>& pts) {
    pts.insert(s);
    for (const auto& p : s)
      for (const auto& e : steps) pts.insert(f.canonical(with(without(s, p), lat.add(p, e))));
  };
  auto eval = [&](const Support& x) {
    const double fx = f.get(x);
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0 && x[i] == x[i - 1]) continue;
      const int m = count(x, x[i]);
      for (const auto& e : steps) total += m * (f.get(with(without(x, x[i]), lat.add(x[i], e))) - fx);
    }
    return total;
  };
  return evaluate_on(f, f.degree(), candidates, eval);
}

MonomialFunction apply_Aplus_free(const MonomialFunction& f, const JumpLaw& law) {
  require_symmetric(f, "free A+: expects the symmetric representation");
  const auto& lat = f.lattice();
  const auto rates = pair_rates(law);
  auto candidates = [&](const Support& s, std::set<Support>& pts) {
    for (const auto& pr : rates)
      for (const auto& p : s) {
        pts.insert(with(s, lat.add(p, pr.z)));
        pts.insert(with(s, lat.add(p, {-pr.z[0], -pr.z[1]})));
      }
  };
  auto eval = [&](const Support& x) {
    double total = 0.0;
    for (const auto& pr : rates) {
      if (pr.a == 0.0) continue;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (i > 0 && x[i] == x[i - 1]) continue;
        const Vec2i u = x[i], up = lat.add(u, pr.z);
        const int pairs = count(x, u) * count(x, up);
        if (pairs == 0) continue;
        total -= pr.a * pairs * (f.get(without(x, u)) - f.get(without(x, up)));
      }
    }
    return total;
  };
  return evaluate_on(f, f.degree() + 1, candidates, eval);
}

CollisionClass classify(const DualLattice& lattice, const Support& points) {
  Support s = points;
  for (auto& p : s) p = lattice.wrap(p);
  std::sort(s.begin(), s.end());
  if (!has_collision(s)) return CollisionClass::E1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const int m = count(s, s[i]);
    if (m > 2) return CollisionClass::E3;
    if (m == 2)
      for (std::size_t k = 0; k < s.size(); ++k)
        if (s[k] != s[i] && lattice.distance(s[k], s[i]) < kIsolationRadius) return CollisionClass::E3;
  }
  return CollisionClass::E2;
}

MonomialFunction extend_T(const MonomialFunction& f) {
  require_hardcore(f, "T: expects a hard-core function");
  const auto& lat = f.lattice();
  const auto steps = lat.unit_steps();

  // Candidates: supports with some disjoint nearest-neighbour pairs collapsed onto one point.
  auto candidates = [&](const Support& s, std::set<Support>& pts) {
    std::function<void(Support, std::size_t)> rec = [&](Support cur, std::size_t from) {
      pts.insert(f.canonical(cur));
      for (std::size_t i = from; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) {
          if (i == j || lat.distance(s[i], s[j]) != 1) continue;
          if (!contains(cur, s[i]) || count(cur, s[j]) != 1 || count(cur, s[i]) != 1) continue;
          rec(with(without(cur, s[j]), s[i]), i + 1);
        }
    };
    rec(s, 0);
  };
  auto eval = [&](const Support& x) -> double {
    switch (classify(lat, x)) {
      case CollisionClass::E1:
        return f.get(x);
      case CollisionClass::E3:
        return 0.0;
      case CollisionClass::E2:
        break;
    }
    Support base;
    std::vector<Vec2i> doubles;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i > 0 && x[i] == x[i - 1]) continue;
      base.push_back(x[i]);
      if (count(x, x[i]) == 2) doubles.push_back(x[i]);
    }
    // average over one neighbour y_k for each double site
    const std::size_t k = doubles.size(), b = steps.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < k; ++i) combos *= b;
    double total = 0.0;
    for (std::size_t c = 0; c < combos; ++c) {
      Support y = base;
      std::size_t code = c;
      for (std::size_t i = 0; i < k; ++i) {
        y.push_back(lat.add(doubles[i], steps[code % b]));
        code /= b;
      }
      total += f.get(y);
    }
    return total / static_cast<double>(combos);
  };
  return evaluate_on(f, f.degree(), candidates, eval);
}

MonomialFunction restrict_R(const MonomialFunction& f) {
  MonomialFunction out(f.lattice(), f.degree(), Representation::HardCore);
  for (const auto& [s, v] : f.terms())
    if (!has_collision(s)) out.set(s, v);
  return out;
}

}  // namespace asep
