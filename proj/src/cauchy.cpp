#include "dbarlab/cauchy.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace dbarlab {

namespace {

constexpr double kInvPi = 1.0 / std::numbers::pi;

// \int_0^b (1/2) log(c^2 + t^2) dt
double phi(double c, double b) {
  const double r2 = c * c + b * b;
  const double log_term = r2 > 0.0 ? 0.5 * b * std::log(r2) : 0.0;
  const double atan_term = c != 0.0 ? c * std::atan(b / c) : 0.0;
  return log_term - b + atan_term;
}

std::size_t fft_size(std::size_t n) {
  for (std::size_t m = n;; ++m) {
    std::size_t r = m;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

// Weight of a unit source at offset (di, dj) cells from the target, for a
// grid of spacing h: the contribution to u is f * weight.
cplx offset_weight(int di, int dj, double h, const QuadratureConfig& cfg) {
  const double r2 = static_cast<double>(di) * di + static_cast<double>(dj) * dj;
  const double near = static_cast<double>(cfg.near_radius_cells);
  if (r2 > near * near || cfg.cell_rule == QuadratureConfig::CellRule::Midpoint) {
    if (r2 == 0.0) return {};  // midpoint rule drops the singular cell
    return -kInvPi * h / cplx(di, dj);
  }
  return -kInvPi * cell_kernel_integral(h * cplx(di, dj), h, cplx(0.0, 0.0));
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : data(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n))), size(n) {
    if (!data) throw std::bad_alloc();
    for (std::size_t k = 0; k < n; ++k) data[k][0] = data[k][1] = 0.0;
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
  std::size_t size;
};

}  // namespace

void QuadratureConfig::validate() const {
  if (near_radius_cells < 1) throw ConfigError("near_radius_cells must be >= 1");
  if (!(shrink_distance >= 0.0)) throw ConfigError("shrink_distance must be >= 0");
}

cplx cell_kernel_integral(cplx c, double h, cplx z) {
  const double a0 = c.real() - 0.5 * h - z.real(), a1 = a0 + h;
  const double b0 = c.imag() - 0.5 * h - z.imag(), b1 = b0 + h;
  const double re = phi(a1, b1) - phi(a1, b0) - phi(a0, b1) + phi(a0, b0);
  const double im = -(phi(b1, a1) - phi(b1, a0) - phi(b0, a1) + phi(b0, a0));
  return {re, im};
}

std::vector<cplx> pompeiu(const SampledField& f, const std::vector<cplx>& targets,
                          const QuadratureConfig& cfg) {
  cfg.validate();
  const auto& mask = *f.mask;
  if (mask.inside_count() == 0) throw PreconditionError("pompeiu: field has no Inside nodes");
  const auto& g = mask.grid();
  const double h = g.h;
  const double near = cfg.near_radius_cells * h;
  const bool exact = cfg.cell_rule == QuadratureConfig::CellRule::ExactKernel;
  const auto nodes = mask.inside_nodes();
  std::vector<cplx> out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const cplx z = targets[t];
    cplx acc;
    for (std::size_t k : nodes) {
      const cplx fv = f.values[k];
      if (fv == cplx(0.0, 0.0)) continue;
      const cplx w = g.node(k);
      const cplx d = w - z;
      if (std::abs(d) > near || !exact) {
        if (d == cplx(0.0, 0.0)) continue;
        acc += fv * (h * h) / d;
      } else {
        acc += fv * cell_kernel_integral(w, h, z);
      }
    }
    out[t] = -kInvPi * acc;
  }
  return out;
}

SampledField pompeiu_grid(const SampledField& f, const QuadratureConfig& cfg) {
  cfg.validate();
  const auto& mask = *f.mask;
  if (mask.inside_count() == 0) throw PreconditionError("pompeiu: field has no Inside nodes");
  const auto& g = mask.grid();
  const int nx = g.nx, ny = g.ny;
  const std::size_t px = fft_size(2 * static_cast<std::size_t>(nx));
  const std::size_t py = fft_size(2 * static_cast<std::size_t>(ny));
  const std::size_t total = px * py;

  FftwBuffer src(total), ker(total);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!mask.inside(k)) continue;
      auto& slot = src.data[static_cast<std::size_t>(j) * px + static_cast<std::size_t>(i)];
      slot[0] = f.values[k].real();
      slot[1] = f.values[k].imag();
    }
  // u(t) = sum_s f(s) W(s - t) = (f * K)(t) with K(o) = W(-o).
  for (int dj = -(ny - 1); dj <= ny - 1; ++dj)
    for (int di = -(nx - 1); di <= nx - 1; ++di) {
      const cplx w = offset_weight(-di, -dj, g.h, cfg);
      const std::size_t a = static_cast<std::size_t>((di + static_cast<long>(px)) % static_cast<long>(px));
      const std::size_t b = static_cast<std::size_t>((dj + static_cast<long>(py)) % static_cast<long>(py));
      ker.data[b * px + a][0] = w.real();
      ker.data[b * px + a][1] = w.imag();
    }

  const int n0 = static_cast<int>(py), n1 = static_cast<int>(px);
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> fwd_src(
      fftw_plan_dft_2d(n0, n1, src.data, src.data, FFTW_FORWARD, FFTW_ESTIMATE));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> fwd_ker(
      fftw_plan_dft_2d(n0, n1, ker.data, ker.data, FFTW_FORWARD, FFTW_ESTIMATE));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> back(
      fftw_plan_dft_2d(n0, n1, src.data, src.data, FFTW_BACKWARD, FFTW_ESTIMATE));
  fftw_execute(fwd_src.get());
  fftw_execute(fwd_ker.get());
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t k = 0; k < total; ++k) {
    const cplx p = cplx(src.data[k][0], src.data[k][1]) * cplx(ker.data[k][0], ker.data[k][1]) * scale;
    src.data[k][0] = p.real();
    src.data[k][1] = p.imag();
  }
  fftw_execute(back.get());

  SampledField u(f.mask);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = g.index(i, j);
      if (!mask.inside(k)) continue;
      const auto& slot = src.data[static_cast<std::size_t>(j) * px + static_cast<std::size_t>(i)];
      u.values[k] = cplx(slot[0], slot[1]);
    }
  return u;
}

SampledField dbar_fd(const SampledField& f) {
  const auto& mask = *f.mask;
  if (mask.interior_count() == 0) throw PreconditionError("dbar_fd: no Interior nodes");
  auto inner = share(mask.interior_mask());
  SampledField out(inner);
  const auto& g = mask.grid();
  const double inv2h = 0.5 / g.h;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    if (!mask.interior(k)) continue;
    const int i = g.col(k), j = g.row(k);
    const cplx fx = (f.values[g.index(i + 1, j)] - f.values[g.index(i - 1, j)]) * inv2h;
    const cplx fy = (f.values[g.index(i, j + 1)] - f.values[g.index(i, j - 1)]) * inv2h;
    out.values[k] = 0.5 * (fx + cplx(0.0, 1.0) * fy);
  }
  return out;
}

std::vector<bool> shrunk_interior(const RegionMask& mask, double shrink_distance) {
  const int cells =
      std::max(3, static_cast<int>(std::ceil(shrink_distance / mask.grid().h - 1e-9)));
  const auto dist = mask.boundary_distance();
  std::vector<bool> keep(mask.size(), false);
  for (std::size_t k = 0; k < keep.size(); ++k)
    keep[k] = mask.interior(k) && (dist[k] < 0 || dist[k] >= cells);
  return keep;
}

DbarCheck verify_dbar_solution(const SampledField& f, const QuadratureConfig& cfg) {
  const SampledField u = pompeiu_grid(f, cfg);
  const SampledField d = dbar_fd(u);
  const auto keep = shrunk_interior(*f.mask, cfg.shrink_distance);
  DbarCheck r;
  r.h = f.grid().h;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (!keep[k]) continue;
    ++r.nodes;
    r.max_deviation = std::max(r.max_deviation, std::abs(d.values[k] - f.values[k]));
  }
  if (r.nodes == 0)
    throw NumericalError("verify_dbar_solution: no nodes left after shrinking; refine the grid");
  return r;
}

}  // namespace dbarlab
