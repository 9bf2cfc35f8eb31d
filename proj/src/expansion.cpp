#include "tylerscale/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "tylerscale/errors.hpp"

namespace tylerscale {

CertificateMode parse_certificate_mode(const std::string& text) {
  if (text == "exact") return CertificateMode::kExact;
  if (text == "sampled") return CertificateMode::kSampled;
  throw ConfigurationError("unknown mode '" + text + "' (expected exact or sampled)");
}

std::string to_string(CertificateMode mode) {
  return mode == CertificateMode::kExact ? "exact" : "sampled";
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  long p = 0;
  long q = 1;
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      p = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
    } else {
      const std::string a = text.substr(0, slash);
      const std::string b = text.substr(slash + 1);
      p = std::stol(a, &used);
      if (used != a.size()) throw std::invalid_argument(text);
      q = std::stol(b, &used);
      if (used != b.size()) throw std::invalid_argument(text);
    }
  } catch (const std::logic_error&) {
    throw ConfigurationError("cannot parse fraction '" + text + "'");
  }
  if (p <= 0 || q <= 0) {
    throw ConfigurationError("fraction '" + text + "' must be positive");
  }
  const long g = std::gcd(p, q);
  return {p / g, q / g};
}

std::string Rational::to_string() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

namespace {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (Index i = 1; i <= k; ++i) {
    out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(out);
}

// Advances c to the next k-subset of {0..n-1} in lexicographic order.
bool next_combination(std::vector<Index>& c, Index n) {
  const Index k = static_cast<Index>(c.size());
  Index i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (Index j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

std::vector<Index> first_combination(Index k) {
  std::vector<Index> c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), Index{0});
  return c;
}

Matrix subset_gram(const Matrix& v, const std::vector<Index>& subset) {
  Matrix g = Matrix::Zero(v.rows(), v.rows());
  for (Index j : subset) g.selfadjointView<Eigen::Lower>().rankUpdate(v.col(j));
  return g.selfadjointView<Eigen::Lower>();
}

Vector eigenvalues(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

Vector sign_vertex(Index n, const std::vector<Index>& subset) {
  Vector y = Vector::Ones(n);
  for (Index j : subset) y(j) = -1.0;
  return y;
}

// Random k-subset of {0..n-1}, sorted.
std::vector<Index> random_subset(CounterRng& rng, Index n, Index k) {
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    const auto span = static_cast<double>(n - i);
    const Index pick = i + std::min(static_cast<Index>(rng.uniform() * span), n - i - 1);
    std::swap(pool[i], pool[pick]);
  }
  std::vector<Index> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> complement(Index n, const std::vector<Index>& subset) {
  std::vector<Index> out;
  std::size_t p = 0;
  for (Index j = 0; j < n; ++j) {
    if (p < subset.size() && subset[p] == j) {
      ++p;
    } else {
      out.push_back(j);
    }
  }
  return out;
}

struct VertexScan {
  const Matrix& v;
  Matrix gram;
  double best = -1.0;
  std::vector<Index> best_subset;
  long evaluated = 0;

  explicit VertexScan(const Matrix& frame)
      : v(frame), gram(symmetrize(frame * frame.transpose())) {}

  void visit(const std::vector<Index>& subset) {
    const Vector ev = eigenvalues(gram - 2.0 * subset_gram(v, subset));
    const double value = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    ++evaluated;
    if (value > best || (value == best && subset < best_subset)) {
      best = value;
      best_subset = subset;
    }
  }
};

ExpansionValue finish_infty(const Frame& frame, VertexScan& scan, CertificateMode mode) {
  const double d = static_cast<double>(frame.dim());
  const double s = size(frame);
  ExpansionValue out;
  out.sup = scan.best;
  out.lambda = 1.0 - d * scan.best / s;
  out.witness.subset = scan.best_subset;
  out.witness.y = sign_vertex(frame.count(), scan.best_subset);
  out.mode = mode;
  out.evaluated = scan.evaluated;
  return out;
}

// Every balanced vertex up to sign: the subsets of size n/2 containing 0.
ExpansionValue enumerate_infty(const Frame& frame) {
  const Index n = frame.count();
  VertexScan scan(frame.matrix());
  std::vector<Index> c = first_combination(n / 2);
  do {
    if (c[0] != 0) break;
    scan.visit(c);
  } while (next_combination(c, n));
  return finish_infty(frame, scan, CertificateMode::kExact);
}

void require_even(const Frame& frame) {
  if (frame.count() % 2 != 0) {
    throw ConfigurationError(
        "infinity-expansion needs an even number of columns; odd n would need "
        "fractional polytope vertices, which are not supported");
  }
}

}  // namespace

ExpansionValue quantum_expansion_exact(const Frame& frame) {
  const Index d = frame.dim();
  const Index n = frame.count();
  const Matrix& v = frame.matrix();
  Matrix m(d * d, n);
  for (Index j = 0; j < n; ++j) {
    const Matrix outer = v.col(j) * v.col(j).transpose();
    m.col(j) = Eigen::Map<const Vector>(outer.data(), d * d);
  }
  // Restrict to y orthogonal to the ones vector.
  const Vector mean = m.rowwise().mean();
  m.colwise() -= mean;
  const SymmetricEigen eig = symmetric_eigen(symmetrize(m * m.transpose()));
  const double top = eig.values(eig.values.size() - 1);
  const double sigma = top > 0.0 ? std::sqrt(top) : 0.0;

  ExpansionValue out;
  out.sup = sigma;
  out.lambda = 1.0 - std::sqrt(static_cast<double>(d * n)) * sigma / size(frame);
  out.evaluated = 1;
  Vector y = Vector::Zero(n);
  if (sigma > 0.0) {
    y = m.transpose() * eig.vectors.col(eig.vectors.cols() - 1) / sigma;
    y.array() -= y.mean();
    y.normalize();
  } else if (n >= 2) {
    y(0) = 1.0 / std::sqrt(2.0);
    y(1) = -1.0 / std::sqrt(2.0);
  }
  out.witness.y = y;
  return out;
}

ExpansionValue infty_expansion_exact(const Frame& frame) {
  require_even(frame);
  if (frame.count() > kMaxExactInftyColumns) {
    throw ConfigurationError("exact infinity-expansion supports n <= 20; use sampled mode");
  }
  return enumerate_infty(frame);
}

ExpansionValue infty_expansion_sampled(const Frame& frame, long trials, SeedSpec seed) {
  require_even(frame);
  if (trials < 1) throw ConfigurationError("trials must be positive");
  const Index n = frame.count();
  const double classes = binomial(n - 1, n / 2 - 1);
  if (static_cast<double>(trials) >= classes) return enumerate_infty(frame);

  CounterRng rng(seed, kSubsetLane);
  VertexScan scan(frame.matrix());
  for (long t = 0; t < trials; ++t) {
    std::vector<Index> b = random_subset(rng, n, n / 2);
    if (b[0] != 0) b = complement(n, b);
    scan.visit(b);
  }
  return finish_infty(frame, scan, CertificateMode::kSampled);
}

PseudorandomResult pseudorandom_check(const Frame& frame, Rational beta,
                                      CertificateMode mode, long trials,
                                      SeedSpec seed) {
  const Index n = frame.count();
  const double d = static_cast<double>(frame.dim());
  if (beta.num <= 0 || beta.den <= 0 || beta.num > beta.den) {
    throw ConfigurationError("beta must lie in (0, 1]");
  }
  if ((n * beta.num) % beta.den != 0) {
    throw ConfigurationError("beta * n must be an integer (beta = " +
                             beta.to_string() + ", n = " + std::to_string(n) + ")");
  }
  const Index k = n * beta.num / beta.den;
  const double count = binomial(n, k);
  bool exhaustive = mode == CertificateMode::kExact;
  if (exhaustive && count > kMaxExactSubsets) {
    throw ConfigurationError("exact pseudorandomness needs C(n, beta n) <= 2e6; use sampled mode");
  }
  if (!exhaustive) {
    if (trials < 1) throw ConfigurationError("trials must be positive");
    exhaustive = static_cast<double>(trials) >= count && count <= kMaxExactSubsets;
  }

  const Matrix& v = frame.matrix();
  double lo = INFINITY;
  double hi = -INFINITY;
  std::vector<Index> lo_subset;
  std::vector<Index> hi_subset;
  long evaluated = 0;
  auto visit = [&](const std::vector<Index>& b) {
    const Vector ev = eigenvalues(subset_gram(v, b));
    ++evaluated;
    if (ev(0) < lo || (ev(0) == lo && b < lo_subset)) {
      lo = ev(0);
      lo_subset = b;
    }
    const double top = ev(ev.size() - 1);
    if (top > hi || (top == hi && b < hi_subset)) {
      hi = top;
      hi_subset = b;
    }
  };

  if (exhaustive) {
    std::vector<Index> c = first_combination(k);
    do {
      visit(c);
    } while (next_combination(c, n));
  } else {
    CounterRng rng(seed, kSubsetLane);
    for (long t = 0; t < trials; ++t) visit(random_subset(rng, n, k));
  }

  PseudorandomResult out;
  out.alpha_min = (d / beta.value()) * std::max(lo, 0.0);
  out.alpha_max = (d / beta.value()) * hi;
  out.beta = beta;
  out.mode = exhaustive ? CertificateMode::kExact : CertificateMode::kSampled;
  out.min_witness.subset = lo_subset;
  out.max_witness.subset = hi_subset;
  out.evaluated = evaluated;
  return out;
}

double pseudo_to_infty_bounds(double alpha_min, double alpha_max, double s, double eps) {
  const double gap = std::min(s * (1.0 + eps) - alpha_min, alpha_max - s * (1.0 - eps));
  return std::clamp(1.0 - gap / s, 0.0, 1.0);
}

PseudoBounds infty_to_pseudo_bounds(double lambda, double s, double eps) {
  return {s * (lambda - eps), s * (2.0 - (lambda - eps))};
}

double infty_to_pseudo_halving(double alpha_min_g, double alpha_max_g, double s_v) {
  return s_v * alpha_min_g / (2.0 * alpha_max_g);
}

CheegerResult cheeger_constant(const Frame& frame) {
  const Index d = frame.dim();
  const Index n = frame.count();
  const ErrorReport rep = error_report(frame);
  if (rep.op_error / rep.size > kCheegerBalanceTolerance) {
    throw PreconditionError(
        "Cheeger quantity needs a doubly balanced frame (op_error / s <= 1e-8); "
        "run solve_scaling first");
  }
  if (n > kMaxCheegerColumns) {
    throw ConfigurationError("Cheeger enumeration supports n <= 16");
  }
  const Matrix& v = frame.matrix();
  const Matrix gram = symmetrize(v * v.transpose());
  const Vector norms = v.colwise().squaredNorm().transpose();
  const double per_dim = rep.size / static_cast<double>(d);

  double best = INFINITY;
  std::vector<Index> best_subset;
  Index best_k = 0;
  Matrix best_basis;
  const unsigned long total = 1UL << n;
  for (unsigned long mask = 0; mask < total; ++mask) {
    std::vector<Index> b;
    double norm_b = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (mask & (1UL << j)) {
        b.push_back(j);
        norm_b += norms(j);
      }
    }
    const Index size_b = static_cast<Index>(b.size());
    if (size_b * d > d * n) continue;
    const SymmetricEigen eig = symmetric_eigen(gram - 2.0 * subset_gram(v, b));
    double partial = 0.0;
    for (Index k = 0; k <= d; ++k) {
      if (k > 0) partial += eig.values(k - 1);
      if (k * n + size_b * d > d * n) break;
      if (k == 0 && size_b == 0) continue;
      const double value = (norm_b + partial) / (per_dim * static_cast<double>(k) + norm_b);
      const bool better = value < best ||
                          (value == best && (b < best_subset ||
                                             (b == best_subset && k < best_k)));
      if (better) {
        best = value;
        best_subset = b;
        best_k = k;
        best_basis = eig.vectors.leftCols(k);
      }
    }
  }
  CheegerResult out;
  out.ch = std::max(best, 0.0);
  out.witness.subset = best_subset;
  out.witness.a_dim = best_k;
  out.witness.a_basis = best_basis;
  return out;
}

ChainReport infty_implies_quantum_check(const Frame& frame) {
  if (frame.count() > kMaxCheegerColumns) {
    throw ConfigurationError("the expansion chain check supports n <= 16");
  }
  ChainReport out;
  out.cheeger = cheeger_constant(frame).ch;
  out.lambda_infty = infty_expansion_exact(frame).lambda;
  out.lambda_quantum = quantum_expansion_exact(frame).lambda;
  out.cheeger_link = out.cheeger >= out.lambda_infty / 6.0 - kChainSlack;
  out.quantum_link = out.lambda_quantum >= out.cheeger * out.cheeger - kChainSlack;
  return out;
}

ExpansionReport expansion_report(const Frame& frame, Rational beta,
                                 CertificateMode mode, long trials, SeedSpec seed) {
  ExpansionReport out;
  out.beta = beta;
  out.trials = trials;
  bool all_exact = true;
  out.lambda_quantum = quantum_expansion_exact(frame).lambda;

  const bool even = frame.count() % 2 == 0;
  if (mode == CertificateMode::kExact) {
    const ExpansionValue inf = infty_expansion_exact(frame);
    out.lambda_infty = inf.lambda;
    out.witness = inf.witness;
  } else if (even) {
    const ExpansionValue inf = infty_expansion_sampled(frame, trials, seed);
    out.lambda_infty = inf.lambda;
    out.witness = inf.witness;
    all_exact = all_exact && inf.mode == CertificateMode::kExact;
  }

  const PseudorandomResult pr = pseudorandom_check(frame, beta, mode, trials, seed);
  out.alpha_min = pr.alpha_min;
  out.alpha_max = pr.alpha_max;
  all_exact = all_exact && pr.mode == CertificateMode::kExact;

  if (mode == CertificateMode::kExact && frame.count() <= kMaxCheegerColumns) {
    const ErrorReport rep = error_report(frame);
    if (rep.op_error / rep.size <= kCheegerBalanceTolerance) {
      out.cheeger = cheeger_constant(frame).ch;
    }
  }
  out.mode = all_exact ? CertificateMode::kExact : CertificateMode::kSampled;
  if (!all_exact) out.seed = seed;
  return out;
}

}  // namespace tylerscale
