#include "asep/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "asep/error.hpp"

namespace asep {

std::size_t SupportHash::operator()(const Support& s) const noexcept {
  std::size_t h = 0x9e3779b97f4a7c15ull;
  for (const auto& p : s)
    for (int c : p) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(c))) * 0x100000001b3ull + (h >> 29);
  return h;
}

CanonicalClass canonical_class(const DualLattice& lattice, Support points) {
  for (auto& p : points) p = lattice.wrap(p);
  std::sort(points.begin(), points.end());
  CanonicalClass out;
  if (points.empty()) return out;
  if (!lattice.torus) {
    const Vec2i a = points.front();
    for (auto& p : points) p = {p[0] - a[0], p[1] - a[1]};
    out.representative = std::move(points);
    return out;
  }
  bool first = true;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && points[i] == points[i - 1]) continue;
    Support t = points;
    for (auto& p : t) p = lattice.wrap({p[0] - points[i][0], p[1] - points[i][1]});
    std::sort(t.begin(), t.end());
    if (first || t < out.representative) {
      out.representative = std::move(t);
      out.stabiliser = 1;
      first = false;
    } else if (t == out.representative) {
      ++out.stabiliser;
    }
  }
  return out;
}

namespace {

double multiplicity_weight(const Support& s) {
  double w = 1.0;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    w /= std::tgamma(static_cast<double>(j - i) + 1.0);
    i = j;
  }
  return w;
}

int multiplicity(const Support& s, Vec2i p) {
  auto r = std::equal_range(s.begin(), s.end(), p);
  return static_cast<int>(r.second - r.first);
}

Support remove_one(Support s, Vec2i p) {
  auto it = std::lower_bound(s.begin(), s.end(), p);
  s.erase(it);
  return s;
}

Support move_one(Support s, Vec2i from, Vec2i to) {
  s = remove_one(std::move(s), from);
  s.insert(std::upper_bound(s.begin(), s.end(), to), to);
  return s;
}

}  // namespace

QuotientSpace::QuotientSpace(DualLattice lattice, int degree, Dynamics dynamics, int window)
    : lattice_(std::move(lattice)), degree_(degree), dynamics_(dynamics), window_(window) {
  require(degree >= 1, "quotient space: degree must be >= 1");
  const bool free = dynamics == Dynamics::Free;
  std::vector<Vec2i> candidates;
  if (lattice_.torus) {
    const auto& g = *lattice_.torus;
    for (int s = 0; s < g.sites(); ++s) candidates.push_back(g.coords(s));
  } else {
    require(window >= 1, "quotient space: window must be >= 1");
    // lexicographically >= 0 points with every coordinate within the window
    const int lo = lattice_.dimension == 2 ? -window : 0;
    for (int x = 0; x <= window; ++x)
      for (int y = lo; y <= (lattice_.dimension == 2 ? window : 0); ++y)
        if (x > 0 || y >= 0) candidates.push_back({x, y});
  }
  std::sort(candidates.begin(), candidates.end());
  const std::size_t total_cap = 20'000'000;

  Support current;
  std::function<void(std::size_t)> extend = [&](std::size_t start) {
    if (static_cast<int>(current.size()) == degree_) {
      auto c = canonical_class(lattice_, current);
      if (index_.count(c.representative)) return;
      if (!lattice_.torus && !inside(c.representative)) return;
      require(states_.size() < total_cap, "quotient space: too many states for this window");
      index_.emplace(c.representative, static_cast<long>(states_.size()));
      double w = 1.0 / c.stabiliser;
      if (free) w *= multiplicity_weight(c.representative);
      weight_.push_back(w);
      states_.push_back(std::move(c.representative));
      return;
    }
    for (std::size_t i = start; i < candidates.size(); ++i) {
      current.push_back(candidates[i]);
      if (lattice_.torus || inside(current)) extend(free ? i : i + 1);
      current.pop_back();
    }
  };
  if (lattice_.torus) {
    extend(0);
  } else {
    // anchor the lexicographically smallest point at the origin
    current.push_back({0, 0});
    extend(free ? 0 : 1);
  }
}

bool QuotientSpace::inside(const Support& s) const {
  for (int k = 0; k < lattice_.dimension; ++k) {
    int lo = s.front()[k], hi = lo;
    for (const auto& p : s) {
      lo = std::min(lo, p[k]);
      hi = std::max(hi, p[k]);
    }
    if (hi - lo > window_) return false;
  }
  return true;
}

long QuotientSpace::find(const Support& points) const {
  const auto c = canonical_class(lattice_, points);
  auto it = index_.find(c.representative);
  return it == index_.end() ? -1 : it->second;
}

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrixD assemble(std::size_t rows, std::size_t cols, std::vector<Triplet>& t) {
  SparseMatrixD m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

SparseMatrixD negative_symmetric_part(const QuotientSpace& space, const JumpLaw& law) {
  const auto& lat = space.lattice();
  std::vector<Triplet> t;
  auto push = [&](std::size_t row, long col, double rate) {
    // K(row, col) for the operator L acting on u; stored as -K in orthonormal coordinates
    if (col < 0) return;
    const double scale = std::sqrt(space.weight(row) / space.weight(static_cast<std::size_t>(col)));
    t.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), -rate * scale);
  };
  for (std::size_t r = 0; r < space.size(); ++r) {
    const Support& g = space.state(r);
    if (space.dynamics() == Dynamics::HardCore) {
      for (const auto& pr : pair_rates(law)) {
        if (pr.s == 0.0) continue;
        for (const auto& x : g)
          for (Vec2i z : {pr.z, Vec2i{-pr.z[0], -pr.z[1]}}) {
            const Vec2i y = lat.add(x, z);
            if (std::binary_search(g.begin(), g.end(), y)) continue;
            push(r, space.find(move_one(g, x, y)), pr.s);
            push(r, static_cast<long>(r), -pr.s);
          }
      }
    } else {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i > 0 && g[i] == g[i - 1]) continue;
        const double m = multiplicity(g, g[i]);
        for (const auto& e : lat.unit_steps()) {
          push(r, space.find(move_one(g, g[i], lat.add(g[i], e))), m);
          push(r, static_cast<long>(r), -m);
        }
      }
    }
  }
  return assemble(space.size(), space.size(), t);
}

SparseMatrixD raising_operator(const QuotientSpace& from, const QuotientSpace& to, const JumpLaw& law) {
  require(to.degree() == from.degree() + 1, "raising operator: degrees must differ by one");
  require(to.dynamics() == from.dynamics(), "raising operator: dynamics differ");
  const auto& lat = to.lattice();
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < to.size(); ++r) {
    const Support& g = to.state(r);
    for (const auto& pr : pair_rates(law)) {
      if (pr.a == 0.0) continue;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (i > 0 && g[i] == g[i - 1]) continue;
        const Vec2i u = g[i], v = lat.add(u, pr.z);
        const double pairs = static_cast<double>(multiplicity(g, u)) * multiplicity(g, v);
        if (pairs == 0.0) continue;
        // (A+ F)(G) = -a m_u m_{u+z} [F(G - u) - F(G - (u+z))]
        for (auto [drop, sign] : {std::pair{u, -1.0}, std::pair{v, 1.0}}) {
          const long c = from.find(remove_one(g, drop));
          if (c < 0) continue;
          const double scale = std::sqrt(to.weight(r) / from.weight(static_cast<std::size_t>(c)));
          t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c), sign * pr.a * pairs * scale);
        }
      }
    }
  }
  return assemble(to.size(), from.size(), t);
}

Eigen::VectorXd current_vector(const QuotientSpace& space, const JumpLaw& law) {
  require(space.degree() == 2, "current vector: needs the degree-two space");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  const double chi = 0.25;
  for (const auto& e : law.entries()) {
    const double c = chi * e.rate * e.displacement[0];
    if (c == 0.0) continue;
    const long k = space.find({{0, 0}, e.displacement});
    if (k >= 0) u[k] += c;
  }
  for (Eigen::Index k = 0; k < u.size(); ++k) u[k] *= std::sqrt(space.weight(static_cast<std::size_t>(k)));
  return u;
}

}  // namespace asep
