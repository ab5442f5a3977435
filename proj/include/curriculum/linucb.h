#ifndef CURRICULUM_LINUCB_H_
#define CURRICULUM_LINUCB_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace curriculum {

// Shared-parameter LinUCB. One ridge estimate theta = A^-1 b over joint
// (student, action) features; a candidate x scores
//
//   theta' x + alpha * sqrt(x' A^-1 x).
//
// A starts at lambda * I. A^-1 is maintained with Sherman-Morrison rank-1
// updates and recomputed from A by Cholesky every `refresh_interval` updates
// (0 disables the refresh).
//
// Score/Select/Theta are const and may run concurrently with each other;
// Update needs exclusive access.
class LinUcb {
 public:
  static constexpr std::uint64_t kDefaultRefreshInterval = 1000;

  // Throws std::invalid_argument unless d >= 1, alpha >= 0, lambda > 0.
  LinUcb(int d, double alpha, double lambda,
         std::uint64_t refresh_interval = kDefaultRefreshInterval);

  // Rebuilds a bandit from checkpointed statistics. a_inv is trusted as the
  // cached inverse so restored scores match the original bit for bit.
  static LinUcb Restore(double alpha, double lambda, std::uint64_t update_count,
                        Eigen::MatrixXd a, Eigen::MatrixXd a_inv,
                        Eigen::VectorXd b,
                        std::uint64_t refresh_interval = kDefaultRefreshInterval);

  // Throws std::invalid_argument on a dimension mismatch and
  // std::runtime_error if the result is not finite.
  double Score(const Eigen::VectorXd& x) const;
  // Exploration bonus sqrt(x' A^-1 x), without alpha.
  double Uncertainty(const Eigen::VectorXd& x) const;

  // Index of the highest score, lowest index on ties. Throws on empty input.
  std::size_t Select(std::span<const Eigen::VectorXd> candidates) const;

  // Throws std::invalid_argument for a dimension mismatch or non-finite
  // x or r.
  void Update(const Eigen::VectorXd& x, double r);

  const Eigen::VectorXd& Theta() const { return theta_; }

  // max |A * A^-1 - I|, for on-demand health checks.
  double InverseResidual() const;

  int dimension() const { return static_cast<int>(b_.size()); }
  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  std::uint64_t update_count() const { return update_count_; }
  std::uint64_t refresh_interval() const { return refresh_interval_; }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& a_inv() const { return a_inv_; }
  const Eigen::VectorXd& b() const { return b_; }

 private:
  LinUcb() = default;
  void CheckDimension(const Eigen::VectorXd& x) const;
  void Reinvert();

  Eigen::MatrixXd a_;
  Eigen::MatrixXd a_inv_;
  Eigen::VectorXd b_;
  Eigen::VectorXd theta_;
  double alpha_ = 1.0;
  double lambda_ = 1.0;
  std::uint64_t update_count_ = 0;
  std::uint64_t refresh_interval_ = kDefaultRefreshInterval;
};

}  // namespace curriculum

#endif  // CURRICULUM_LINUCB_H_
