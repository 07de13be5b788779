#include "mchjm/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mchjm/log.hpp"

namespace mchjm {

CurveSystem::CurveSystem(std::string discount_id, BucketGrid discount_grid,
                         std::vector<TenorCurve> tenors, double dt)
    : dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");

  names_.push_back(std::move(discount_id));
  tenors_.push_back(0.0);
  splines_.emplace_back(std::move(discount_grid));
  for (auto& t : tenors) {
    if (!(t.tenor > 0.0)) throw std::invalid_argument("tenor of " + t.curve_id + " must be positive");
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
      if (t.grid[i] < t.tenor - 1e-12) {
        throw std::invalid_argument("bucket " + t.grid.label(i) + " of " + t.curve_id +
                                    " is shorter than its tenor");
      }
    }
    if (t.grid.back() > splines_.front().grid().back() + 1e-12) {
      throw std::invalid_argument("grid of " + t.curve_id + " extends beyond the discount grid");
    }
    names_.push_back(std::move(t.curve_id));
    tenors_.push_back(t.tenor);
    splines_.emplace_back(std::move(t.grid));
  }

  for (const auto& sp : splines_) {
    offsets_.push_back(dim_);
    dim_ += static_cast<Index>(sp.size());
    Eigen::MatrixXd a = sp.derivative() * dt_;
    a.diagonal().array() += 1.0;
    transitions_.push_back(std::move(a));
  }

  full_transition_ = Eigen::MatrixXd::Zero(dim_, dim_);
  drift_integral_ = Eigen::MatrixXd::Zero(dim_, dim_);
  const Index k = static_cast<Index>(splines_.front().size());
  for (std::size_t b = 0; b < splines_.size(); ++b) {
    const Index off = offsets_[b];
    const Index n = static_cast<Index>(splines_[b].size());
    full_transition_.block(off, off, n, n) = transitions_[b];
    drift_integral_.block(off, 0, n, k) =
        b == 0 ? splines_.front().integral() : splines_.front().cross_integral(splines_[b].grid());
  }

  for (std::size_t b = 0; b < splines_.size(); ++b) {
    const double rho = spectral_radius(b);
    std::ostringstream msg;
    msg << "spectral radius of I + M dt for " << names_[b] << ": " << rho;
    log_debug(msg.str());
    if (rho > 1.05) log_warning(msg.str() + " exceeds 1.05");
  }
}

void CurveSystem::check_block(std::size_t block) const {
  if (block >= splines_.size()) {
    throw std::out_of_range("unknown curve block " + std::to_string(block));
  }
}

Index CurveSystem::block_offset(std::size_t block) const {
  check_block(block);
  return offsets_[block];
}

Index CurveSystem::block_size(std::size_t block) const {
  check_block(block);
  return static_cast<Index>(splines_[block].size());
}

const std::string& CurveSystem::block_name(std::size_t block) const {
  check_block(block);
  return names_[block];
}

double CurveSystem::block_tenor(std::size_t block) const {
  check_block(block);
  return tenors_[block];
}

const BucketGrid& CurveSystem::grid(std::size_t block) const {
  check_block(block);
  return splines_[block].grid();
}

const SplineOperators& CurveSystem::spline(std::size_t block) const {
  check_block(block);
  return splines_[block];
}

std::string CurveSystem::component_label(Index i) const {
  if (i < 0 || i >= dim_) throw std::out_of_range("component index out of range");
  std::size_t b = splines_.size() - 1;
  while (offsets_[b] > i) --b;
  return names_[b] + ":" + splines_[b].grid().label(static_cast<std::size_t>(i - offsets_[b]));
}

Eigen::MatrixXd CurveSystem::transition_matrix(std::size_t block) const {
  check_block(block);
  return transitions_[block];
}

const Eigen::MatrixXd& CurveSystem::transition(std::size_t block) const {
  check_block(block);
  return transitions_[block];
}

double CurveSystem::spectral_radius(std::size_t block) const {
  check_block(block);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(transitions_[block], false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

RiskPremiumBlocks::RiskPremiumBlocks(const CurveSystem& sys, Index short_buckets)
    : dim_(sys.dimension()), short_buckets_(short_buckets) {
  const Index k = sys.block_size(0);
  if (short_buckets < 0 || short_buckets > k) {
    throw std::invalid_argument("short-bucket count must lie in [0, K]");
  }
  if (short_buckets == 0 || short_buckets == k) {
    blocks_.push_back({"lambda_" + sys.block_name(0), 0, k});
  } else {
    blocks_.push_back({"lambda_s", 0, short_buckets});
    blocks_.push_back({"lambda_l", short_buckets, k});
  }
  for (std::size_t b = 1; b < sys.block_count(); ++b) {
    const Index off = sys.block_offset(b);
    blocks_.push_back({"lambda_" + sys.block_name(b), off, off + sys.block_size(b)});
  }
}

RiskPremiumBlocks::RiskPremiumBlocks(std::vector<Block> blocks, Index dimension)
    : blocks_(std::move(blocks)), dim_(dimension) {
  Index next = 0;
  for (const auto& b : blocks_) {
    if (b.begin != next || b.end <= b.begin) {
      throw std::invalid_argument("risk-premium blocks must tile the state contiguously");
    }
    next = b.end;
  }
  if (next != dim_) throw std::invalid_argument("risk-premium blocks do not cover the state");
  if (!blocks_.empty()) short_buckets_ = blocks_.front().end;
}

Eigen::VectorXd RiskPremiumBlocks::expand(const Eigen::VectorXd& per_block) const {
  if (static_cast<std::size_t>(per_block.size()) != blocks_.size()) {
    throw std::invalid_argument("lambda block vector has the wrong length");
  }
  Eigen::VectorXd full(dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    full.segment(blocks_[i].begin, blocks_[i].end - blocks_[i].begin).setConstant(per_block(static_cast<Index>(i)));
  }
  return full;
}

Eigen::VectorXd RiskPremiumBlocks::project(const Eigen::VectorXd& full) const {
  if (full.size() != dim_) throw std::invalid_argument("lambda vector has the wrong length");
  Eigen::VectorXd out(static_cast<Index>(blocks_.size()));
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    out(static_cast<Index>(i)) = full.segment(blocks_[i].begin, blocks_[i].end - blocks_[i].begin).mean();
  }
  return out;
}

Eigen::MatrixXd RiskPremiumBlocks::indicator() const {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim_, static_cast<Index>(blocks_.size()));
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    b.block(blocks_[i].begin, static_cast<Index>(i), blocks_[i].end - blocks_[i].begin, 1).setOnes();
  }
  return b;
}

Eigen::MatrixXd ModelParams::covariance() const {
  return omega.asDiagonal() * gamma * omega.asDiagonal();
}

CorrelationFactor factor_correlation(const Eigen::MatrixXd& gamma) {
  if (gamma.rows() != gamma.cols()) throw std::invalid_argument("correlation matrix must be square");
  if (!gamma.allFinite()) throw std::domain_error("correlation matrix has non-finite entries");
  CorrelationFactor out;
  out.gamma = 0.5 * (gamma + gamma.transpose());
  out.gamma.diagonal().setOnes();

  Eigen::LLT<Eigen::MatrixXd> llt(out.gamma);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 1e-7) {
    out.chol = llt.matrixL();
    return out;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.gamma);
  Eigen::VectorXd ev = eig.eigenvalues().cwiseMax(1e-10);
  Eigen::MatrixXd fixed = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::VectorXd scale = fixed.diagonal().cwiseSqrt().cwiseInverse();
  fixed = scale.asDiagonal() * fixed * scale.asDiagonal();
  fixed = 0.5 * (fixed + fixed.transpose());
  fixed.diagonal().setOnes();
  out.gamma = fixed;
  out.repaired = true;

  Eigen::LLT<Eigen::MatrixXd> llt2(out.gamma);
  if (llt2.info() == Eigen::Success) {
    out.chol = llt2.matrixL();
  } else {
    // Numerically semidefinite even after clipping: LDLT with zero pivots floored.
    Eigen::LDLT<Eigen::MatrixXd> ldlt(out.gamma);
    Eigen::MatrixXd l = ldlt.matrixL();
    Eigen::VectorXd d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    out.chol = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  }
  log_debug("correlation matrix repaired by eigenvalue clipping");
  return out;
}

ModelParams make_params(Eigen::VectorXd omega, const Eigen::MatrixXd& gamma, RiskPremiumBlocks blocks,
                        Eigen::VectorXd lambda_blocks) {
  const Index d = omega.size();
  if (gamma.rows() != d || gamma.cols() != d) throw std::invalid_argument("Gamma dimension mismatch");
  if (blocks.dimension() != d) throw std::invalid_argument("lambda blocks dimension mismatch");
  if (static_cast<std::size_t>(lambda_blocks.size()) != blocks.count()) {
    throw std::invalid_argument("lambda block count mismatch");
  }
  if (!omega.allFinite() || (omega.array() < 0.0).any()) {
    throw std::invalid_argument("volatilities must be finite and non-negative");
  }
  CorrelationFactor f = factor_correlation(gamma);
  return ModelParams{std::move(omega), std::move(f.gamma), std::move(f.chol), std::move(blocks),
                     std::move(lambda_blocks)};
}

Eigen::VectorXd drift_from_params(const CurveSystem& sys, const ModelParams& params) {
  const Index d = sys.dimension();
  if (params.omega.size() != d || params.gamma.rows() != d) {
    throw std::invalid_argument("parameter dimension does not match the curve system");
  }
  const Eigen::MatrixXd hjm = sys.drift_integral().cwiseProduct(params.gamma);
  return params.omega.cwiseProduct(hjm * params.omega) -
         params.omega.cwiseProduct(params.chol * params.lambda());
}

Eigen::VectorXd compute_y(const CurveSystem& sys, const StateVector& prev, const StateVector& next) {
  const Index d = sys.dimension();
  if (prev.values.size() != d || next.values.size() != d) {
    throw std::invalid_argument("state dimension does not match the curve system");
  }
  if (!(prev.date < next.date)) throw std::invalid_argument("next state must be dated after prev");
  return next.values - sys.full_transition() * prev.values;
}

Eigen::MatrixXd compute_y_series(const CurveSystem& sys, const Eigen::MatrixXd& states) {
  if (states.cols() != sys.dimension()) throw std::invalid_argument("state panel dimension mismatch");
  if (states.rows() < 2) return Eigen::MatrixXd(0, states.cols());
  const Index n = states.rows() - 1;
  return states.bottomRows(n) - states.topRows(n) * sys.full_transition().transpose();
}

Eigen::VectorXd step(const CurveSystem& sys, const Eigen::VectorXd& drift, const Eigen::MatrixXd& volatility,
                     const Eigen::VectorXd& state, const Eigen::VectorXd& eps) {
  const Index d = sys.dimension();
  if (state.size() != d || drift.size() != d || volatility.rows() != d || eps.size() != volatility.cols()) {
    throw std::invalid_argument("step: dimension mismatch");
  }
  const double dt = sys.dt();
  return sys.full_transition() * state + drift * dt + volatility * eps * std::sqrt(dt);
}

StateVector step(const CurveSystem& sys, const ModelParams& params, const StateVector& state,
                 const Eigen::VectorXd& eps) {
  Eigen::VectorXd next = step(sys, drift_from_params(sys, params), params.volatility(), state.values, eps);
  const int days = static_cast<int>(std::lround(sys.dt() * 364.0));
  return StateVector{state.date.plus_days(std::max(days, 1)), std::move(next)};
}

}  // namespace mchjm
