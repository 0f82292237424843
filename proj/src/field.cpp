#include "dbarlab/field.hpp"

#include <cmath>
#include <string>

namespace dbarlab {

void SampledField::check_finite(const char* what) const {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!mask->inside(k)) continue;
    const cplx v = values[k];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      const cplx z = grid().node(k);
      throw NumericalError(std::string(what) + ": non-finite value at node (" +
                           std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")");
    }
  }
}

MaskPtr share(RegionMask mask) { return std::make_shared<const RegionMask>(std::move(mask)); }

SampledField sample(const Expr& expr, const MaskPtr& mask) {
  SampledField f(mask);
  const CompiledExpr e(expr);
  const auto& g = mask->grid();
  for (std::size_t k = 0; k < f.values.size(); ++k)
    if (mask->inside(k)) f.values[k] = e(g.node(k));
  return f;
}

SampledField sample_zero_extended(const Expr& expr, const MaskPtr& mask,
                                  const std::function<bool(std::size_t)>& zero_here) {
  SampledField f(mask);
  const CompiledExpr e(expr);
  const auto& g = mask->grid();
  for (std::size_t k = 0; k < f.values.size(); ++k)
    if (mask->inside(k) && !zero_here(k)) f.values[k] = e(g.node(k));
  return f;
}

SampledField combine(const SampledField& a, const SampledField& b,
                     const std::function<cplx(cplx, cplx)>& op) {
  if (a.values.size() != b.values.size()) throw Error("combine: fields live on different grids");
  SampledField out(a.mask);
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (a.mask->inside(k)) out.values[k] = op(a.values[k], b.values[k]);
  return out;
}

SampledField map(const SampledField& a, const std::function<cplx(cplx, cplx)>& op) {
  SampledField out(a.mask);
  const auto& g = a.grid();
  for (std::size_t k = 0; k < a.values.size(); ++k)
    if (a.mask->inside(k)) out.values[k] = op(a.values[k], g.node(k));
  return out;
}

SampledField restrict_to(const SampledField& a, const MaskPtr& mask) {
  if (a.values.size() != mask->size()) throw Error("restrict_to: grids differ");
  SampledField out(mask);
  for (std::size_t k = 0; k < out.values.size(); ++k)
    if (mask->inside(k) && a.mask->inside(k)) out.values[k] = a.values[k];
  return out;
}

double max_abs(const SampledField& a, const std::vector<bool>& keep) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    if (!a.mask->inside(k)) continue;
    if (!keep.empty() && !keep[k]) continue;
    m = std::max(m, std::abs(a.values[k]));
  }
  return m;
}

}  // namespace dbarlab
