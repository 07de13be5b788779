#include "mchjm/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mchjm {

double PcaResult::explained(Index f) const {
  const double total = eigenvalues.sum();
  if (f <= 0 || !(total > 0.0)) return 0.0;
  return eigenvalues.head(std::min(f, eigenvalues.size())).sum() / total;
}

PcaResult decompose(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw std::invalid_argument("covariance must be square");
  if (!c.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
  const double scale = std::max(c.cwiseAbs().maxCoeff(), 1e-300);
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (c + c.transpose()));
  if (eig.info() != Eigen::Success) throw std::runtime_error("eigen-decomposition failed");

  const Index d = c.rows();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  const Eigen::VectorXd& ev = eig.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev(a) > ev(b); });

  PcaResult res;
  res.eigenvalues.resize(d);
  res.eigenvectors.resize(d, d);
  for (Index m = 0; m < d; ++m) {
    const Index src = order[static_cast<std::size_t>(m)];
    res.eigenvalues(m) = std::max(ev(src), 0.0);
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    res.eigenvectors.col(m) = v;
  }
  return res;
}

PcaResult select_components(PcaResult res, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw std::invalid_argument("threshold must lie in (0, 1]");
  const Index d = res.eigenvalues.size();
  const double total = res.eigenvalues.sum();
  Index f = d;
  double acc = 0.0;
  for (Index m = 0; m < d; ++m) {
    acc += res.eigenvalues(m);
    // Small slack so that exact fractions such as 21/22 are not lost to rounding.
    if (acc >= threshold * total * (1.0 - 1e-14)) {
      f = m + 1;
      break;
    }
  }
  res.F = f;
  res.threshold = threshold;
  res.phi = res.explained(f);
  res.W = res.eigenvectors.leftCols(f) * res.eigenvalues.head(f).cwiseSqrt().asDiagonal();
  return res;
}

Eigen::MatrixXd reduced_volatility(const PcaResult& res) {
  if (res.F <= 0) throw std::logic_error("components not selected");
  return res.W;
}

std::vector<Eigen::MatrixXd> split_by_curve(const Eigen::MatrixXd& w, const CurveSystem& sys) {
  if (w.rows() != sys.dimension()) throw std::invalid_argument("W rows do not match the curve system");
  std::vector<Eigen::MatrixXd> parts;
  for (std::size_t b = 0; b < sys.block_count(); ++b) {
    parts.emplace_back(w.middleRows(sys.block_offset(b), sys.block_size(b)));
  }
  return parts;
}

Eigen::MatrixXd join_curves(const std::vector<Eigen::MatrixXd>& parts) {
  Index rows = 0;
  const Index cols = parts.empty() ? 0 : parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("blocks have different column counts");
    rows += p.rows();
  }
  Eigen::MatrixXd w(rows, cols);
  Index off = 0;
  for (const auto& p : parts) {
    w.middleRows(off, p.rows()) = p;
    off += p.rows();
  }
  return w;
}

}  // namespace mchjm
