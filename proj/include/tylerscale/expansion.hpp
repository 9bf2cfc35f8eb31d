#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tylerscale/frame.hpp"
#include "tylerscale/rng.hpp"

namespace tylerscale {

// Random lane used for subset sampling.
inline constexpr std::uint32_t kSubsetLane = 3;

enum class CertificateMode { kExact, kSampled };

CertificateMode parse_certificate_mode(const std::string& text);
std::string to_string(CertificateMode mode);

/// Positive fraction p/q in lowest terms.
struct Rational {
  long num = 1;
  long den = 2;

  // Parses "P/Q" (or a bare integer); rejects non-positive values.
  static Rational parse(const std::string& text);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
};

/// Extremal object behind a certificate. `subset` holds 0-based column
/// indices in increasing order. For sign-vertex probes y = 1 - 2 * 1_B; for
/// Cheeger probes `a_dim` and `a_basis` describe the subspace.
struct SubsetProbe {
  Vector y;
  std::vector<Index> subset;
  Index a_dim = 0;
  std::optional<Matrix> a_basis;
};

struct ExpansionValue {
  double lambda = 0.0;  // 1 - sup * scale / s, not clamped
  double sup = 0.0;
  SubsetProbe witness;
  CertificateMode mode = CertificateMode::kExact;
  long evaluated = 0;  // vertices or singular vectors examined
};

/// Quantum expansion: sup over unit y with sum(y) = 0 of
/// ||sum_j y_j v_j v_j^T||_F, and lambda = 1 - sqrt(d n) sup / s.
ExpansionValue quantum_expansion_exact(const Frame& frame);

/// Infinity-expansion by enumerating every balanced sign vertex:
/// sup of ||V diag(1 - 2 1_B) V^T||_op over |B| = n/2, lambda = 1 - d sup / s.
/// Requires even n <= 20.
ExpansionValue infty_expansion_exact(const Frame& frame);

inline constexpr Index kMaxExactInftyColumns = 20;

/// The same supremum over `trials` random balanced vertices. The result is an
/// upper bound on lambda; when `trials` covers every vertex class the run
/// enumerates them all and reports exact mode.
ExpansionValue infty_expansion_sampled(const Frame& frame, long trials, SeedSpec seed);

struct PseudorandomResult {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  Rational beta;
  CertificateMode mode = CertificateMode::kExact;
  SubsetProbe min_witness;
  SubsetProbe max_witness;
  long evaluated = 0;
};

inline constexpr double kMaxExactSubsets = 2e6;

/// alpha_min = (d / beta) min_B lambda_min(V_B V_B^T) and
/// alpha_max = (d / beta) max_B lambda_max(V_B V_B^T) over |B| = beta n.
///
/// Sampled mode examines `trials` random subsets, giving an upper bound on
/// alpha_min and a lower bound on alpha_max. Exact mode needs
/// C(n, beta n) <= 2e6.
PseudorandomResult pseudorandom_check(const Frame& frame, Rational beta,
                                      CertificateMode mode, long trials,
                                      SeedSpec seed);

/// Lower bound on lambda for an eps-doubly balanced frame from its beta = 1/2
/// pseudorandomness constants, clamped to [0, 1].
double pseudo_to_infty_bounds(double alpha_min, double alpha_max, double s,
                              double eps);

struct PseudoBounds {
  double alpha_min_lower = 0.0;
  double alpha_max_upper = 0.0;
};

/// Converse direction: s (lambda - eps) <= alpha_min and
/// alpha_max <= s (2 - (lambda - eps)).
PseudoBounds infty_to_pseudo_bounds(double lambda, double s, double eps);

/// Lower bound s_v alpha_min / (2 alpha_max) on alpha_min of the
/// column-normalized frame at twice the subset fraction, where s_v = n.
double infty_to_pseudo_halving(double alpha_min_g, double alpha_max_g, double s_v);

inline constexpr Index kMaxCheegerColumns = 16;

struct CheegerResult {
  double ch = 0.0;
  SubsetProbe witness;
};

/// Cheeger quantity of a doubly balanced frame (op_error / s <= 1e-8, n <= 16).
///
/// For each subset B and dimension k with k/d + |B|/n <= 1 the best rank-k
/// subspace is spanned by the k lowest eigenvectors of V V^T - 2 V_B V_B^T.
CheegerResult cheeger_constant(const Frame& frame);

inline constexpr double kCheegerBalanceTolerance = 1e-8;

struct ChainReport {
  double lambda_infty = 0.0;
  double cheeger = 0.0;
  double lambda_quantum = 0.0;
  bool cheeger_link = false;  // ch >= lambda_infty / 6
  bool quantum_link = false;  // lambda_quantum >= ch^2
  bool holds() const { return cheeger_link && quantum_link; }
};

// Absolute slack for the floating-point comparisons of the chain.
inline constexpr double kChainSlack = 1e-12;

ChainReport infty_implies_quantum_check(const Frame& frame);

struct ExpansionReport {
  std::optional<double> lambda_quantum;
  std::optional<double> lambda_infty;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  Rational beta;
  std::optional<double> cheeger;
  CertificateMode mode = CertificateMode::kExact;
  std::optional<SubsetProbe> witness;
  std::optional<SeedSpec> seed;
  long trials = 0;
};

/// Runs the expansion certificates that apply to the frame: quantum always,
/// infinity-expansion for even n (exact when n <= 20 in exact mode),
/// pseudorandomness at `beta`, and the Cheeger quantity for doubly balanced
/// frames with n <= 16 in exact mode.
ExpansionReport expansion_report(const Frame& frame, Rational beta,
                                 CertificateMode mode, long trials, SeedSpec seed);

}  // namespace tylerscale
