#pragma once

#include "chamberflow/catalog.hpp"

#include <Eigen/Core>

#include <vector>

namespace chamberflow {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default tolerance for deciding which walls a point sits on; matched to the
// flow module's wall_eps.
inline constexpr double kStratumTol = 1e-8;

// Sorted set of active wall indices; empty set = the open chamber.
struct StratumId {
    std::vector<int> walls;

    StratumId() = default;
    explicit StratumId(std::vector<int> w);

    bool is_interior() const { return walls.empty(); }
    bool contains(int i) const;
    bool operator==(const StratumId& other) const { return walls == other.walls; }
};

// Finite reflection group about the concurrent point, as linear parts.
struct CoxeterGroup {
    std::vector<Eigen::MatrixXd> elements;  // orthogonal, includes identity
    int order() const { return static_cast<int>(elements.size()); }
};

// beta_i(w) < d_i^+ strictly for every wall.
bool contains(const ChamberModel& model, const Eigen::VectorXd& w);

// Gaps u_i = d_i^+ - beta_i(w) per wall, in radial order (walls only).
std::vector<double> wall_gaps(const ChamberModel& model, const Eigen::VectorXd& w);

// Active-wall set { i : |u_i(w)| <= tol }. Errors if w lies outside the
// closed chamber beyond tol.
StratumId stratum_of(const ChamberModel& model, const Eigen::VectorXd& w,
                     double tol = kStratumTol);

// Orbit closure of the wall reflections r_i(x) = x - 2<b,x>/<b,b> b in the
// coordinates x = w - O. Requires a concurrent point; errors if the closure
// exceeds max_order (non-root-system input).
CoxeterGroup coxeter_group(const ChamberModel& model, int max_order = 1024);

}  // namespace chamberflow
