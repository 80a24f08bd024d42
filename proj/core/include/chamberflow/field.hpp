#pragma once

#include "chamberflow/chamber.hpp"

#include <Eigen/Core>

namespace chamberflow {

// Value, gradient and Hessian of the potential at one interior point.
struct FieldEval {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

// rho(w) = -sum_walls m+ log sinh(u+) - sum_minus m- log cosh(u-),
// u_i^± = d_i^± - beta_i(w). Strictly interior points only.
double rho(const ChamberModel& model, const Eigen::VectorXd& w);

// X_w = grad rho = sum_walls m+ coth(u+) b_i + sum_minus m- tanh(u-) b_i.
Eigen::VectorXd grad(const ChamberModel& model, const Eigen::VectorXd& w);

// Entries sum_i [m+ / sinh^2(u+) - m- / cosh^2(u-)] root_i root_i^T.
Eigen::MatrixXd hessian(const ChamberModel& model, const Eigen::VectorXd& w);

FieldEval evaluate(const ChamberModel& model, const Eigen::VectorXd& w);

// Mean-curvature field of the focal translate through a point of the stratum
// sigma_S: the same sums with the walls (and minus radials) in S dropped.
// Computed literally; tangency to the stratum is a property of root-closed
// data, not a precondition, so bad inputs surface in tests instead of being
// silently projected away.
Eigen::VectorXd stratum_field(const ChamberModel& model, const StratumId& S,
                              const Eigen::VectorXd& w, double tol = kStratumTol);

// Potential whose gradient (within the stratum) is stratum_field.
double stratum_rho(const ChamberModel& model, const StratumId& S,
                   const Eigen::VectorXd& w, double tol = kStratumTol);

}  // namespace chamberflow
