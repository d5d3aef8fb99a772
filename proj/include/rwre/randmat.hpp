#pragma once
// Transfer matrices of bounded-jump walks and their Lyapunov spectra.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rwre/annealed.hpp"
#include "rwre/envgen.hpp"

namespace rwre {

/// Order d = L + R - 1 matrix propagating hitting-probability differences:
/// top row a(R-1), ..., a(1), b(1), ..., b(L) with
/// a(i) = -(p(i) + ... + p(R)) / p(R) and b(i) = (p(-i) + ... + p(-L)) / p(R);
/// ones on the sub-diagonal.
struct TransferMatrix {
  int L = 0;
  int R = 0;
  Eigen::MatrixXd m;
  int order() const { return static_cast<int>(m.rows()); }
};

/// probs holds p(-L)..p(R). Throws DomainError when p(-L) or p(R) is zero or
/// the vector does not sum to 1.
TransferMatrix transfer_matrix(const std::vector<double>& probs, int L, int R);

/// ln |det M| = ln(p(-L)/p(R)) for every order.
double log_abs_det(const TransferMatrix& tm);

/// Stream of i.i.d. transfer matrices drawn from a bounded-jump law.
class MatrixStream {
 public:
  MatrixStream(const BoundedJump& law, uint64_t seed);
  const TransferMatrix& next();
  int64_t index() const { return index_; }

 private:
  std::vector<TransferMatrix> atoms_;
  std::vector<double> cdf_;
  uint64_t seed_;
  int64_t index_ = 0;
};

struct LyapunovEstimate {
  double gamma = 0;
  double se = 0;
  int64_t n = 0;
};

/// Renormalized product M_n ... M_1 w for a unit vector w. `cadence`
/// multiplies that many matrices between renormalizations.
LyapunovEstimate top_lyapunov(const BoundedJump& law, int64_t n, uint64_t seed, int cadence = 1,
                              int batches = 100);

struct LyapunovSpectrum {
  std::vector<double> gamma;  ///< gamma_1 >= ... >= gamma_k
  std::vector<double> se;
  int64_t n = 0;
  uint64_t seed = 0;
  int restarts = 0;
};

/// Evolves an orthonormal k-frame with QR re-orthonormalization every
/// `cadence` steps; log |R_ii| accumulates the individual exponents.
LyapunovSpectrum lyapunov_spectrum(const BoundedJump& law, int k, int64_t n, uint64_t seed,
                                   int cadence = 1, int batches = 100);

enum class BoundedClass { TransientPlus, TransientMinus, Indeterminate };
const char* to_string(BoundedClass c);

struct BoundedClassification {
  BoundedClass kind = BoundedClass::Indeterminate;
  double gamma_R = 0;
  double se = 0;
  double ci_lo = 0;
  double ci_hi = 0;
};

/// Sign of gamma_R with a z-sigma interval; an interval containing 0 is
/// indeterminate. gamma_R < 0 means drift to +infinity.
BoundedClassification classify_bounded(const BoundedJump& law, int64_t n, uint64_t seed,
                                       double z = 3.0);

/// Nearest-neighbour site law viewed as a bounded-jump law with L = R = 1.
BoundedJump as_bounded_jump(const EnvironmentLaw& site_law);

}  // namespace rwre
