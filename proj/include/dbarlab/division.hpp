#pragma once

// Principal and multi-generator division with zero-extension, numerical
// smoothness certificates, and the sharpness battery.

#include <optional>
#include <string>
#include <vector>

#include "dbarlab/field.hpp"

namespace dbarlab {

enum class SmoothClass { C0, A0, C1, A1, Dbar1 };
enum class Verdict { Pass, Fail, Inconclusive };

const char* to_string(SmoothClass c);
const char* to_string(Verdict v);
SmoothClass parse_smooth_class(const std::string& s);  // ConfigError on unknown names

/// Combined verdict: any Fail wins, then any Inconclusive.
Verdict combine(Verdict a, Verdict b);

/// The set {|g| <= 1e-12 max|g|} on Inside nodes, plus nodes where g fails to evaluate.
std::vector<bool> zero_set(const Expr& g, const MaskPtr& mask);

/// h = f^N / g off Z(g) and 0 on Z(g). Throws PreconditionError naming the
/// worst node when |f| > |g| somewhere off Z(g).
SampledField divide(const Expr& f, const Expr& g, int power, const MaskPtr& mask);

/// The quotient as an expression (valid off Z(g)).
Expr quotient_expr(const Expr& f, const Expr& g, int power);

/// Slope of log max|h| over the annuli r/2 < |z - z0| <= r, r in {8h, 16h, 32h}.
double decay_exponent(const SampledField& h, cplx z0);

struct ProbeConfig {
  double rho = 0.2;    // largest arc radius
  int levels = 10;     // radii rho * 2^-k, k < levels
  int angles = 64;     // samples per full circle
  double pass = 0.05;  // spread / scale thresholds
  double fail = 0.5;
};

/// Oscillation of one quantity on shrinking arcs around a point.
struct ProbeEvidence {
  std::string quantity;
  cplx point;
  std::vector<double> radii;    // both scales, descending within each
  std::vector<double> spreads;  // value-set width over arcs with radius <= r
  double scale = 0.0;           // max |Q| over all samples
  double ratio = 0.0;           // worst of the two scales
  std::size_t samples = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
};

struct DivisionCertificate {
  int power = 1;
  SmoothClass claimed = SmoothClass::C0;
  double h = 0.0;  // grid used to locate Z(g)
  std::vector<cplx> points;
  std::vector<ProbeEvidence> evidence;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> notes;
};

struct DivisionSpec {
  Expr f, g;
  int power = 2;
  CompactDomain domain;
};

/// Locates Z(g) on a grid of spacing h (plus the domain's tagged points and
/// `extra_points`) and probes the quantities that the class requires:
/// C0/A0: h; C1: h, d/dx h, d/dy h (central differences); A1: h, h';
/// Dbar1: h, dbar h, d dbar h, dbar dbar h. PASS needs spread/scale <= pass
/// at both radius scales, FAIL needs >= fail at both.
DivisionCertificate certify_class(const DivisionSpec& spec, SmoothClass claimed, double h = 1.0 / 64,
                                  const ProbeConfig& cfg = {}, std::vector<cplx> extra_points = {});

enum class DerivativeKind { Holomorphic, Mixed };

struct DerivativeBoundScan {
  std::vector<double> h;
  std::vector<double> C;
  std::vector<std::size_t> nodes;
  double rescale = 1.0;  // g and f were divided by this so that ||g|| <= 1
  double ratio = 0.0;    // C(finest) / C(previous)
  bool stable = false;   // ratio in [0.5, 2]
};

/// C = max |D^n(f^{m+2}/g)| / |g|^{m+1-n} over shrunk Interior nodes off Z(g).
DerivativeBoundScan derivative_bound_scan(const Expr& f, const Expr& g, int m, int n,
                                          const CompactDomain& domain, std::vector<double> levels,
                                          DerivativeKind kind = DerivativeKind::Holomorphic);

struct MultiDivision {
  std::vector<SampledField> g;  // sum g_j f_j = h^power
  std::vector<Expr> q;          // symbolic q_j, valid off the common zero set
  double residual = 0.0;        // off the zero set
  double max_q = 0.0;           // max |q_j| (continuous variant)
  std::size_t zero_nodes = 0;
};

/// q_j = h conj(f_j) / |f|^2, g_j = h q_j zero-extended: sum g_j f_j = h^2.
MultiDivision multi_division_continuous(const Expr& h, const std::vector<Expr>& f, const MaskPtr& mask);

struct C1Evidence {
  MultiDivision division;
  std::vector<double> h;
  std::vector<double> C;        // max |D q_j| / |f| per level (central differences)
  double slope = 0.0;           // d log C / d log h
  std::vector<ProbeEvidence> probes;  // C1 probes at the common zeros
  Verdict verdict = Verdict::Inconclusive;
};

/// q_j = conj(f_j) h^power / |f|^2 (power 3 is the theorem). Checks that the
/// common zero set is discrete, then measures the gradient bound on each
/// level and probes the derivatives at the zeros.
C1Evidence multi_division_c1(const Expr& h, const std::vector<Expr>& f, const CompactDomain& domain,
                             std::vector<double> levels, int power = 3, const ProbeConfig& cfg = {});

struct QuotientLemma {
  SampledField q;                 // g^power / |f|^2, zero-extended
  std::vector<cplx> points;       // zeros of |f| probed
  std::vector<double> radii;
  std::vector<double> max_gradient;  // max central-difference |D q| on arcs of radius r
  double slope = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

/// power 4 requires |g| <= |f|, power 7 requires |g|^2 <= |f| (|f| Euclidean).
/// PASS: gradient decays with slope >= 0.8; FAIL: slope < 0.2.
QuotientLemma quotient_extension_lemma(const Expr& g, const std::vector<Expr>& f, int power,
                                       const MaskPtr& mask, const ProbeConfig& cfg = {},
                                       bool check_hypothesis = true);

struct SharpnessRow {
  std::string item;
  std::string claim;
  int power = 0;
  Verdict at_power = Verdict::Inconclusive;
  Verdict below = Verdict::Inconclusive;
  bool ok = false;  // Pass at the power and Fail one below
  std::string detail;
};

/// Items a)-f) of the powers theorem, the power-4 lemma, and the h^3 case,
/// each with the published counterexample functions.
std::vector<SharpnessRow> sharpness_battery(double h = 1.0 / 64, const ProbeConfig& cfg = {});

/// Smallest power p in [lo, hi] whose lemma probe passes for g = z and the
/// given f, under |g|^2 <= |f|. Evidence only: no optimality claim.
std::optional<int> smallest_passing_power(const std::vector<Expr>& f, int lo, int hi, const MaskPtr& mask,
                                          const ProbeConfig& cfg = {});

}  // namespace dbarlab
