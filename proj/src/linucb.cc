#include "curriculum/linucb.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

namespace curriculum {

LinUcb::LinUcb(int d, double alpha, double lambda,
               std::uint64_t refresh_interval)
    : alpha_(alpha), lambda_(lambda), refresh_interval_(refresh_interval) {
  if (d < 1) throw std::invalid_argument("LinUcb: dimension must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("LinUcb: alpha must be finite and >= 0");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("LinUcb: lambda must be finite and > 0");
  }
  a_ = lambda * Eigen::MatrixXd::Identity(d, d);
  a_inv_ = Eigen::MatrixXd::Identity(d, d) / lambda;
  b_ = Eigen::VectorXd::Zero(d);
  theta_ = Eigen::VectorXd::Zero(d);
}

LinUcb LinUcb::Restore(double alpha, double lambda, std::uint64_t update_count,
                       Eigen::MatrixXd a, Eigen::MatrixXd a_inv,
                       Eigen::VectorXd b, std::uint64_t refresh_interval) {
  LinUcb check(static_cast<int>(std::max<Eigen::Index>(b.size(), 1)), alpha,
               lambda, refresh_interval);
  const Eigen::Index d = b.size();
  if (d < 1 || a.rows() != d || a.cols() != d || a_inv.rows() != d ||
      a_inv.cols() != d) {
    throw std::invalid_argument("LinUcb::Restore: inconsistent dimensions");
  }
  if (!a.allFinite() || !a_inv.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("LinUcb::Restore: non-finite statistics");
  }
  LinUcb out;
  out.alpha_ = alpha;
  out.lambda_ = lambda;
  out.update_count_ = update_count;
  out.refresh_interval_ = refresh_interval;
  out.a_ = std::move(a);
  out.a_inv_ = std::move(a_inv);
  out.b_ = std::move(b);
  out.theta_ = out.a_inv_ * out.b_;
  return out;
}

void LinUcb::CheckDimension(const Eigen::VectorXd& x) const {
  if (x.size() != b_.size()) {
    throw std::invalid_argument("LinUcb: context has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(b_.size()));
  }
}

double LinUcb::Uncertainty(const Eigen::VectorXd& x) const {
  CheckDimension(x);
  return std::sqrt(std::max(0.0, x.dot(a_inv_ * x)));
}

double LinUcb::Score(const Eigen::VectorXd& x) const {
  const double s = theta_.dot(x) + alpha_ * Uncertainty(x);
  if (!std::isfinite(s)) {
    throw std::runtime_error("LinUcb: non-finite score (corrupted statistics?)");
  }
  return s;
}

std::size_t LinUcb::Select(std::span<const Eigen::VectorXd> candidates) const {
  if (candidates.empty()) {
    throw std::invalid_argument("LinUcb::Select: no candidates");
  }
  std::size_t best = 0;
  double best_score = Score(candidates[0]);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double s = Score(candidates[i]);
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

void LinUcb::Update(const Eigen::VectorXd& x, double r) {
  CheckDimension(x);
  if (!std::isfinite(r) || !x.allFinite()) {
    throw std::invalid_argument("LinUcb::Update: non-finite context or reward");
  }
  a_.noalias() += x * x.transpose();
  b_.noalias() += r * x;
  ++update_count_;
  if (refresh_interval_ != 0 && update_count_ % refresh_interval_ == 0) {
    Reinvert();
  } else {
    const Eigen::VectorXd u = a_inv_ * x;
    a_inv_.noalias() -= (u * u.transpose()) / (1.0 + x.dot(u));
  }
  theta_.noalias() = a_inv_ * b_;
}

void LinUcb::Reinvert() {
  const Eigen::Index d = a_.rows();
  a_inv_ = a_.llt().solve(Eigen::MatrixXd::Identity(d, d));
}

double LinUcb::InverseResidual() const {
  const Eigen::Index d = a_.rows();
  return (a_ * a_inv_ - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
}

}  // namespace curriculum
