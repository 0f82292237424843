#pragma once

#include <functional>
#include <vector>

#include "dbarlab/domain.hpp"
#include "dbarlab/expr.hpp"

namespace dbarlab {

/// Complex values on the Inside nodes of a mask. Storage is grid-sized;
/// entries off the Inside set are kept at zero.
struct SampledField {
  MaskPtr mask;
  std::vector<cplx> values;

  SampledField() = default;
  explicit SampledField(MaskPtr m) : mask(std::move(m)), values(mask->size()) {}

  const GridSpec& grid() const { return mask->grid(); }
  cplx operator[](std::size_t k) const { return values[k]; }
  cplx& operator[](std::size_t k) { return values[k]; }

  /// Throws NumericalError if any Inside value is NaN or infinite.
  void check_finite(const char* what) const;
};

MaskPtr share(RegionMask mask);

/// Evaluates expr at every Inside node; PoleError propagates.
SampledField sample(const Expr& expr, const MaskPtr& mask);
/// Same, with the value fixed to zero wherever `zero_here` holds.
SampledField sample_zero_extended(const Expr& expr, const MaskPtr& mask,
                                  const std::function<bool(std::size_t)>& zero_here);

/// Node-wise combination over the Inside nodes of a's mask (b must share it).
SampledField combine(const SampledField& a, const SampledField& b,
                     const std::function<cplx(cplx, cplx)>& op);
SampledField map(const SampledField& a, const std::function<cplx(cplx, cplx)>& op);  // (value, z)

/// Copies values onto another mask over the same grid (zero where a lacks data).
SampledField restrict_to(const SampledField& a, const MaskPtr& mask);

/// Max |value| over the Inside nodes for which `keep` holds (all if empty).
double max_abs(const SampledField& a, const std::vector<bool>& keep = {});

}  // namespace dbarlab
