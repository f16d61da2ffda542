#include "presslab/window.hpp"

#include "presslab/errors.hpp"

namespace presslab {

BoxWindow::BoxWindow(Site lo_, Site hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw DomainError("box corners have different dimensions");
  if (lo.empty()) throw DomainError("box dimension must be >= 1");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) throw DomainError("box has empty extent on some axis");
  }
}

BoxWindow BoxWindow::cube(int dim, Coord side) {
  if (dim < 1) throw DomainError("cube dimension must be >= 1");
  if (side < 1) throw DomainError("cube side must be >= 1");
  return BoxWindow(Site(dim, 0), Site(dim, side - 1));
}

std::uint64_t BoxWindow::volume() const {
  std::uint64_t v = 1;
  for (int a = 0; a < dim(); ++a) {
    std::uint64_t e = static_cast<std::uint64_t>(extent(a));
    if (__builtin_mul_overflow(v, e, &v)) throw CapExceeded("box volume overflows 64 bits");
  }
  return v;
}

bool BoxWindow::contains(const Site& g) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (g[i] < lo[i] || g[i] > hi[i]) return false;
  }
  return true;
}

bool BoxWindow::contains_box(const BoxWindow& other) const {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
  }
  return true;
}

BoxWindow BoxWindow::translated(const Site& g) const {
  BoxWindow out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] += g[i];
    out.hi[i] += g[i];
  }
  return out;
}

BoxWindow BoxWindow::inflated(Coord r) const {
  BoxWindow out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] -= r;
    out.hi[i] += r;
  }
  return out;
}

BoxWindow BoxWindow::minkowski_sum(const BoxWindow& s) const {
  BoxWindow out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] += s.lo[i];
    out.hi[i] += s.hi[i];
  }
  return out;
}

std::optional<BoxWindow> BoxWindow::eroded_by(const BoxWindow& stencil) const {
  BoxWindow out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] -= stencil.lo[i];
    out.hi[i] -= stencil.hi[i];
    if (out.lo[i] > out.hi[i]) return std::nullopt;
  }
  return out;
}

std::optional<BoxWindow> BoxWindow::intersect(const BoxWindow& other) const {
  BoxWindow out = *this;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    out.lo[i] = std::max(out.lo[i], other.lo[i]);
    out.hi[i] = std::min(out.hi[i], other.hi[i]);
    if (out.lo[i] > out.hi[i]) return std::nullopt;
  }
  return out;
}

std::uint64_t BoxWindow::index_of(const Site& g) const {
  std::uint64_t idx = 0;
  for (int a = 0; a < dim(); ++a) {
    idx = idx * static_cast<std::uint64_t>(extent(a)) + static_cast<std::uint64_t>(g[a] - lo[a]);
  }
  return idx;
}

Site BoxWindow::site_at(std::uint64_t index) const {
  Site g(lo.size());
  for (int a = dim() - 1; a >= 0; --a) {
    std::uint64_t e = static_cast<std::uint64_t>(extent(a));
    g[a] = lo[a] + static_cast<Coord>(index % e);
    index /= e;
  }
  return g;
}

BoxWindow standard_folner(int dim, Coord n) { return BoxWindow::cube(dim, n); }

namespace {

// (K+g) meets omega  <=>  g in [omega.lo - k.hi, omega.hi - k.lo]  (dilation).
// (K+g) inside omega <=>  g in [omega.lo - k.lo, omega.hi - k.hi]  (erosion).
struct BoundaryBoxes {
  BoxWindow dilation;
  std::optional<BoxWindow> erosion;
};

BoundaryBoxes boundary_boxes(const BoxWindow& omega, const BoxWindow& k) {
  if (omega.dim() != k.dim()) throw DomainError("boundary window dimensions disagree");
  BoxWindow dil = omega;
  BoxWindow ero = omega;
  bool ero_empty = false;
  for (int a = 0; a < omega.dim(); ++a) {
    dil.lo[a] = omega.lo[a] - k.hi[a];
    dil.hi[a] = omega.hi[a] - k.lo[a];
    ero.lo[a] = omega.lo[a] - k.lo[a];
    ero.hi[a] = omega.hi[a] - k.hi[a];
    if (ero.lo[a] > ero.hi[a]) ero_empty = true;
  }
  BoundaryBoxes out{dil, std::nullopt};
  if (!ero_empty) out.erosion = ero;
  return out;
}

}  // namespace

std::vector<Site> k_boundary(const BoxWindow& omega, const BoxWindow& k) {
  BoundaryBoxes bb = boundary_boxes(omega, k);
  std::vector<Site> out;
  std::uint64_t n = bb.dilation.volume();
  std::uint64_t keep = k_boundary_size(omega, k);
  out.reserve(keep);
  for (std::uint64_t i = 0; i < n; ++i) {
    Site g = bb.dilation.site_at(i);
    if (bb.erosion && bb.erosion->contains(g)) continue;
    out.push_back(std::move(g));
  }
  return out;
}

std::uint64_t k_boundary_size(const BoxWindow& omega, const BoxWindow& k) {
  BoundaryBoxes bb = boundary_boxes(omega, k);
  std::uint64_t n = bb.dilation.volume();
  // The erosion box is always contained in the dilation box.
  return bb.erosion ? n - bb.erosion->volume() : n;
}

double boundary_ratio(const BoxWindow& omega, const BoxWindow& k) {
  return static_cast<double>(k_boundary_size(omega, k)) / static_cast<double>(omega.volume());
}

std::uint64_t translate_symdiff_size(const BoxWindow& omega, const Site& g) {
  if (static_cast<int>(g.size()) != omega.dim()) throw DomainError("translation dimension disagrees");
  auto common = omega.intersect(omega.translated(g));
  std::uint64_t inter = common ? common->volume() : 0;
  return 2 * (omega.volume() - inter);
}

}  // namespace presslab
