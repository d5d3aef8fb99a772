#include "rwre/randmat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/error.hpp"
#include "rwre/philox.hpp"

namespace rwre {
namespace {

struct BatchMeans {
  explicit BatchMeans(int64_t n, int batches) : size(std::max<int64_t>(1, n / std::max(1, batches))) {}
  void add(int64_t step, double v) {
    cur += v;
    if ((step + 1) % size == 0) {
      means.push_back(cur / static_cast<double>(size));
      cur = 0;
    }
  }
  double se() const {
    const auto b = static_cast<double>(means.size());
    if (means.size() < 2) return std::numeric_limits<double>::infinity();
    double m = 0;
    for (double v : means) m += v;
    m /= b;
    double ss = 0;
    for (double v : means) ss += (v - m) * (v - m);
    return std::sqrt(ss / (b - 1) / b);
  }
  int64_t size;
  double cur = 0;
  std::vector<double> means;
};

}  // namespace

TransferMatrix transfer_matrix(const std::vector<double>& probs, int L, int R) {
  if (L < 1 || R < 1) throw DomainError("transfer_matrix: L and R must be >= 1");
  if (probs.size() != static_cast<size_t>(L + R + 1))
    throw DomainError("transfer_matrix: need L + R + 1 probabilities");
  double s = 0;
  for (double q : probs) s += q;
  if (std::abs(s - 1.0) > 1e-12) throw DomainError("transfer_matrix: probabilities do not sum to 1");
  const auto p = [&](int j) { return probs[static_cast<size_t>(j + L)]; };
  if (!(p(-L) > 0.0) || !(p(R) > 0.0)) throw DomainError("transfer_matrix: p(-L) and p(R) must be positive");
  const int d = L + R - 1;
  TransferMatrix tm;
  tm.L = L;
  tm.R = R;
  tm.m = Eigen::MatrixXd::Zero(d, d);
  const double pr = p(R);
  for (int i = 1; i <= R - 1; ++i) {
    double tail = 0;
    for (int j = i; j <= R; ++j) tail += p(j);
    tm.m(0, R - 1 - i) = -tail / pr;
  }
  for (int i = 1; i <= L; ++i) {
    double tail = 0;
    for (int j = i; j <= L; ++j) tail += p(-j);
    tm.m(0, R - 2 + i) = tail / pr;
  }
  for (int r = 1; r < d; ++r) tm.m(r, r - 1) = 1.0;
  return tm;
}

double log_abs_det(const TransferMatrix& tm) {
  const int d = tm.order();
  return std::log(std::abs(tm.m(0, d - 1)));
}

MatrixStream::MatrixStream(const BoundedJump& law, uint64_t seed) : seed_(seed) {
  check_law(EnvironmentLaw{law});
  double acc = 0;
  for (const auto& a : law.atoms) {
    if (a.weight <= 0) continue;
    atoms_.push_back(transfer_matrix(a.probs, law.L, law.R));
    cdf_.push_back(acc += a.weight);
  }
  cdf_.back() = std::numeric_limits<double>::infinity();
}

const TransferMatrix& MatrixStream::next() {
  const auto w = philox4x32(make_counter(static_cast<uint64_t>(index_++), Stream::Matrix), key_from_seed(seed_));
  const double u = unit_closed_open(w[0], w[1]);
  return atoms_[static_cast<size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin())];
}

LyapunovEstimate top_lyapunov(const BoundedJump& law, int64_t n, uint64_t seed, int cadence, int batches) {
  if (n < 1) throw DomainError("top_lyapunov: n must be >= 1");
  if (cadence < 1) throw DomainError("top_lyapunov: cadence must be >= 1");
  MatrixStream ms(law, seed);
  const int d = law.L + law.R - 1;
  Eigen::VectorXd w = Eigen::VectorXd::Ones(d) / std::sqrt(static_cast<double>(d));
  double total = 0;
  BatchMeans bm(n / cadence, batches);
  int64_t block = 0;
  for (int64_t t = 0; t < n; t += cadence) {
    const int64_t m = std::min<int64_t>(cadence, n - t);
    for (int64_t j = 0; j < m; ++j) w = ms.next().m * w;
    const double norm = w.norm();
    const double l = std::log(norm);
    w /= norm;
    total += l;
    bm.add(block++, l / static_cast<double>(m));
  }
  return {total / static_cast<double>(n), bm.se(), n};
}

LyapunovSpectrum lyapunov_spectrum(const BoundedJump& law, int k, int64_t n, uint64_t seed, int cadence,
                                   int batches) {
  const int d = law.L + law.R - 1;
  if (k < 1 || k > d) throw DomainError("lyapunov_spectrum: need 1 <= k <= d");
  if (n < 1 || cadence < 1) throw DomainError("lyapunov_spectrum: n and cadence must be >= 1");
  MatrixStream ms(law, seed);
  LyapunovSpectrum out;
  out.n = n;
  out.seed = seed;
  Eigen::MatrixXd frame = Eigen::MatrixXd::Identity(d, k);
  std::vector<double> total(static_cast<size_t>(k), 0.0);
  std::vector<BatchMeans> bm(static_cast<size_t>(k), BatchMeans(n / cadence, batches));
  int64_t block = 0;
  for (int64_t t = 0; t < n; t += cadence) {
    const int64_t m = std::min<int64_t>(cadence, n - t);
    for (int64_t j = 0; j < m; ++j) frame = ms.next().m * frame;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(frame);
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (int i = 0; i < k; ++i) degenerate |= !(std::abs(r(i, i)) > 0.0) || !std::isfinite(r(i, i));
    if (degenerate) {
      frame = Eigen::MatrixXd::Identity(d, k);
      ++out.restarts;
      continue;
    }
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
    frame = q;
    for (int i = 0; i < k; ++i) {
      const double l = std::log(std::abs(r(i, i)));
      total[static_cast<size_t>(i)] += l;
      bm[static_cast<size_t>(i)].add(block, l / static_cast<double>(m));
      // keep the frame orientation so the next QR sees positive diagonals
      if (r(i, i) < 0) frame.col(i) = -frame.col(i);
    }
    ++block;
  }
  for (int i = 0; i < k; ++i) {
    out.gamma.push_back(total[static_cast<size_t>(i)] / static_cast<double>(n));
    out.se.push_back(bm[static_cast<size_t>(i)].se());
  }
  return out;
}

const char* to_string(BoundedClass c) {
  switch (c) {
    case BoundedClass::TransientPlus: return "TransientPlus";
    case BoundedClass::TransientMinus: return "TransientMinus";
    case BoundedClass::Indeterminate: return "Indeterminate";
  }
  return "?";
}

BoundedClassification classify_bounded(const BoundedJump& law, int64_t n, uint64_t seed, double z) {
  const int d = law.L + law.R - 1;
  const LyapunovSpectrum s = lyapunov_spectrum(law, d, n, seed);
  BoundedClassification c;
  c.gamma_R = s.gamma[static_cast<size_t>(law.R - 1)];
  c.se = s.se[static_cast<size_t>(law.R - 1)];
  c.ci_lo = c.gamma_R - z * c.se;
  c.ci_hi = c.gamma_R + z * c.se;
  if (c.ci_hi < 0) c.kind = BoundedClass::TransientPlus;
  else if (c.ci_lo > 0) c.kind = BoundedClass::TransientMinus;
  else c.kind = BoundedClass::Indeterminate;
  return c;
}

BoundedJump as_bounded_jump(const EnvironmentLaw& site_law) {
  BoundedJump bj{1, 1, {}};
  for (const auto& a : site_atoms(site_law)) bj.atoms.push_back({{1.0 - a.p, 0.0, a.p}, a.weight});
  return bj;
}

}  // namespace rwre
