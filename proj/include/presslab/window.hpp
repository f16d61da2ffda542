#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace presslab {

using Coord = std::int64_t;
// A lattice point of Z^d (the acting group is Z^d throughout).
using Site = std::vector<Coord>;

// Axis-aligned box [lo, hi] with inclusive corners; the window type for every
// finite computation. Sites are ordered lexicographically (first coordinate
// most significant) and index_of/site_at convert between sites and that rank.
struct BoxWindow {
  Site lo;
  Site hi;

  BoxWindow() = default;
  BoxWindow(Site lo_, Site hi_);

  static BoxWindow cube(int dim, Coord side);  // [0, side-1]^dim

  int dim() const { return static_cast<int>(lo.size()); }
  Coord extent(int axis) const { return hi[axis] - lo[axis] + 1; }
  std::uint64_t volume() const;

  bool contains(const Site& g) const;
  bool contains_box(const BoxWindow& other) const;
  bool operator==(const BoxWindow& other) const { return lo == other.lo && hi == other.hi; }

  BoxWindow translated(const Site& g) const;
  BoxWindow inflated(Coord r) const;                  // Minkowski sum with [-r, r]^d
  BoxWindow minkowski_sum(const BoxWindow& s) const;  // [lo+s.lo, hi+s.hi]
  // Largest box W with W + stencil inside *this; empty if none.
  std::optional<BoxWindow> eroded_by(const BoxWindow& stencil) const;
  std::optional<BoxWindow> intersect(const BoxWindow& other) const;

  std::uint64_t index_of(const Site& g) const;
  Site site_at(std::uint64_t index) const;
};

// Standard Folner sequence element: the cube [0, n-1]^dim.
BoxWindow standard_folner(int dim, Coord n);

// Sites of the K-boundary of omega: {g : (K+g) meets omega and its complement}.
// Computed exactly by interval arithmetic as dilation(omega, K) minus
// erosion(omega, K); no scanning.
std::vector<Site> k_boundary(const BoxWindow& omega, const BoxWindow& k);
std::uint64_t k_boundary_size(const BoxWindow& omega, const BoxWindow& k);

// |k_boundary(omega, k)| / |omega|.
double boundary_ratio(const BoxWindow& omega, const BoxWindow& k);

// |(omega + g) symmetric-difference omega|, by inclusion-exclusion on boxes.
std::uint64_t translate_symdiff_size(const BoxWindow& omega, const Site& g);

}  // namespace presslab
