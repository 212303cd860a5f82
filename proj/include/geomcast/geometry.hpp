#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geomcast {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct dimension_mismatch : error {
  using error::error;
};

// Two peers share a coordinate value in some dimension; the algorithms
// assume per-dimension distinct coordinates.
struct distinctness_violation : error {
  using error::error;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A point in D-dimensional space; doubles compared exactly (the peer
// generator guarantees per-dimension distinctness).
using Coord = std::vector<double>;

struct SpaceSpec {
  int d = 2;
  double vmax = 1000.0;

  void validate() const {
    if (d < 1) throw error("SpaceSpec: dimension must be >= 1");
    if (!(vmax > 0.0)) throw error("SpaceSpec: vmax must be positive");
  }
};

enum class Distance { L1, L2 };

inline void require_same_dim(const Coord& a, const Coord& b) {
  if (a.size() != b.size())
    throw dimension_mismatch("coordinate dimensions differ: " +
                             std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
}

inline double l1_distance(const Coord& a, const Coord& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double l2_distance(const Coord& a, const Coord& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double distance(const Coord& a, const Coord& b, Distance metric) {
  return metric == Distance::L1 ? l1_distance(a, b) : l2_distance(a, b);
}

// Sign vector identifying one region of a space partition: one sign per
// dimension for orthants, one per hyperplane in the general case.
struct RegionId {
  std::vector<std::int8_t> signs;  // each +1 or -1

  bool operator==(const RegionId&) const = default;

  // Compact key: bit i set iff sign i is +. Valid for up to 64 planes.
  std::uint64_t key() const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < signs.size(); ++i)
      if (signs[i] > 0) k |= (std::uint64_t{1} << i);
    return k;
  }
};

// One per-dimension interval of a hyper-rectangle. Bounds may be +/-inf.
struct Interval {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double x) const {
    if (lo_open ? !(x > lo) : !(x >= lo)) return false;
    if (hi_open ? !(x < hi) : !(x <= hi)) return false;
    return true;
  }

  bool empty() const {
    if (lo > hi) return true;
    if (lo == hi && (lo_open || hi_open)) return true;
    return false;
  }

  bool operator==(const Interval&) const = default;
};

struct HyperRect {
  std::vector<Interval> sides;

  static HyperRect all_space(int d) {
    HyperRect r;
    r.sides.resize(static_cast<std::size_t>(d));
    return r;
  }

  int dim() const { return static_cast<int>(sides.size()); }

  bool contains(const Coord& x) const {
    if (x.size() != sides.size())
      throw dimension_mismatch("HyperRect/Coord dimension mismatch");
    for (std::size_t i = 0; i < sides.size(); ++i)
      if (!sides[i].contains(x[i])) return false;
    return true;
  }

  bool operator==(const HyperRect&) const = default;
};

inline bool contains(const HyperRect& r, const Coord& x) {
  return r.contains(x);
}

// Sign of (q - origin) per dimension. Any equal component breaks the
// distinct-coordinates assumption and is rejected.
inline RegionId orthant_of(const Coord& origin, const Coord& q) {
  require_same_dim(origin, q);
  RegionId region;
  region.signs.resize(origin.size());
  for (std::size_t i = 0; i < origin.size(); ++i) {
    const double d = q[i] - origin[i];
    if (d == 0.0)
      throw distinctness_violation("equal coordinate in dimension " +
                                   std::to_string(i + 1));
    region.signs[i] = d > 0.0 ? 1 : -1;
  }
  return region;
}

// A family of hyperplanes through the origin with coefficients in
// {-1, 0, +1}; classifies translated offsets into regions.
struct HyperplaneSet {
  std::vector<std::vector<std::int8_t>> planes;

  int count() const { return static_cast<int>(planes.size()); }

  void validate(int d) const {
    for (const auto& a : planes) {
      if (static_cast<int>(a.size()) != d)
        throw dimension_mismatch("hyperplane coefficient count != D");
      bool all_zero = true;
      for (auto c : a) {
        if (c < -1 || c > 1) throw error("hyperplane coefficient not in {-1,0,+1}");
        if (c != 0) all_zero = false;
      }
      if (all_zero) throw error("all-zero hyperplane");
    }
    for (std::size_t i = 0; i < planes.size(); ++i)
      for (std::size_t j = i + 1; j < planes.size(); ++j) {
        bool same = true, negated = true;
        for (int k = 0; k < d; ++k) {
          if (planes[i][k] != planes[j][k]) same = false;
          if (planes[i][k] != -planes[j][k]) negated = false;
        }
        if (same || negated) throw error("duplicate hyperplane (up to sign)");
      }
  }

  // The D axis-aligned planes x(i) = 0.
  static HyperplaneSet orthogonal(int d) {
    HyperplaneSet hs;
    hs.planes.assign(static_cast<std::size_t>(d),
                     std::vector<std::int8_t>(static_cast<std::size_t>(d), 0));
    for (int i = 0; i < d; ++i) hs.planes[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1;
    return hs;
  }

  // All (3^D - 1) / 2 planes with coefficients in {-1,0,+1}, distinct up
  // to sign (first nonzero coefficient normalized to +1).
  static HyperplaneSet full_family(int d) {
    HyperplaneSet hs;
    std::vector<std::int8_t> a(static_cast<std::size_t>(d), -1);
    while (true) {
      bool keep = false;
      for (auto c : a) {
        if (c == 1) { keep = true; break; }
        if (c == -1) break;
      }
      if (keep) hs.planes.push_back(a);
      int i = d - 1;
      while (i >= 0 && a[static_cast<std::size_t>(i)] == 1) {
        a[static_cast<std::size_t>(i)] = -1;
        --i;
      }
      if (i < 0) break;
      ++a[static_cast<std::size_t>(i)];
    }
    return hs;
  }
};

// Region of a translated offset v. A zero dot product maps to +, so
// classification is total and deterministic.
inline RegionId hyperplane_region(const HyperplaneSet& planes, const Coord& v) {
  RegionId region;
  region.signs.resize(planes.planes.size());
  for (std::size_t h = 0; h < planes.planes.size(); ++h) {
    const auto& a = planes.planes[h];
    if (a.size() != v.size())
      throw dimension_mismatch("hyperplane/offset dimension mismatch");
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += a[i] * v[i];
    region.signs[h] = dot >= 0.0 ? 1 : -1;
  }
  return region;
}

// Closed rectangle with p and q as opposite corners.
inline HyperRect rect_between(const Coord& p, const Coord& q) {
  require_same_dim(p, q);
  HyperRect r;
  r.sides.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    r.sides[i].lo = std::min(p[i], q[i]);
    r.sides[i].hi = std::max(p[i], q[i]);
  }
  return r;
}

// Open half-bounded rectangle: side i is (-inf, p_i) for sign -, (p_i, +inf)
// for sign +.
inline HyperRect orthant_rect(const Coord& p, const RegionId& region) {
  if (region.signs.size() != p.size())
    throw dimension_mismatch("orthant_rect: region/coordinate dimension mismatch");
  HyperRect r;
  r.sides.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (region.signs[i] > 0) {
      r.sides[i] = Interval{p[i], kInf, true, false};
    } else {
      r.sides[i] = Interval{-kInf, p[i], false, true};
    }
  }
  return r;
}

// Per-dimension interval intersection, keeping the stricter bound flag.
// nullopt when some dimension's intersection is empty.
inline std::optional<HyperRect> intersect(const HyperRect& a, const HyperRect& b) {
  if (a.sides.size() != b.sides.size())
    throw dimension_mismatch("intersect: rectangle dimensions differ");
  HyperRect out;
  out.sides.resize(a.sides.size());
  for (std::size_t i = 0; i < a.sides.size(); ++i) {
    const Interval& x = a.sides[i];
    const Interval& y = b.sides[i];
    Interval r;
    if (x.lo > y.lo) {
      r.lo = x.lo; r.lo_open = x.lo_open;
    } else if (y.lo > x.lo) {
      r.lo = y.lo; r.lo_open = y.lo_open;
    } else {
      r.lo = x.lo; r.lo_open = x.lo_open || y.lo_open;
    }
    if (x.hi < y.hi) {
      r.hi = x.hi; r.hi_open = x.hi_open;
    } else if (y.hi < x.hi) {
      r.hi = y.hi; r.hi_open = y.hi_open;
    } else {
      r.hi = x.hi; r.hi_open = x.hi_open || y.hi_open;
    }
    if (r.empty()) return std::nullopt;
    out.sides[i] = r;
  }
  return out;
}

}  // namespace geomcast
