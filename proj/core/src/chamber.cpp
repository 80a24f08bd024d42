#include "chamberflow/chamber.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace chamberflow {

StratumId::StratumId(std::vector<int> w) : walls(std::move(w)) {
    std::sort(walls.begin(), walls.end());
    walls.erase(std::unique(walls.begin(), walls.end()), walls.end());
}

bool StratumId::contains(int i) const {
    return std::binary_search(walls.begin(), walls.end(), i);
}

namespace {

void check_dim(const ChamberModel& model, const Eigen::VectorXd& w) {
    if (w.size() != model.rank) {
        std::ostringstream os;
        os << "point has dimension " << w.size() << ", model rank is " << model.rank;
        throw DimensionError(os.str());
    }
}

}  // namespace

bool contains(const ChamberModel& model, const Eigen::VectorXd& w) {
    check_dim(model, w);
    for (const auto& r : model.radials)
        if (r.is_wall() && !(r.root.dot(w) < *r.d_plus)) return false;
    return true;
}

std::vector<double> wall_gaps(const ChamberModel& model, const Eigen::VectorXd& w) {
    check_dim(model, w);
    std::vector<double> gaps;
    for (const auto& r : model.radials)
        if (r.is_wall()) gaps.push_back(*r.d_plus - r.root.dot(w));
    return gaps;
}

StratumId stratum_of(const ChamberModel& model, const Eigen::VectorXd& w, double tol) {
    check_dim(model, w);
    std::vector<int> active;
    for (const auto& r : model.radials) {
        if (!r.is_wall()) continue;
        const double u = *r.d_plus - r.root.dot(w);
        if (u < -tol) {
            std::ostringstream os;
            os << "point lies outside the closed chamber: wall " << r.id
               << " overshoot " << -u;
            throw DomainError(os.str());
        }
        if (std::fabs(u) <= tol) active.push_back(r.id);
    }
    return StratumId(std::move(active));
}

namespace {

constexpr double kElementTol = 1e-9;  // entrywise merge tolerance in the closure

bool matrix_in(const std::vector<Eigen::MatrixXd>& set, const Eigen::MatrixXd& g) {
    for (const auto& h : set)
        if ((h - g).cwiseAbs().maxCoeff() <= kElementTol) return true;
    return false;
}

}  // namespace

CoxeterGroup coxeter_group(const ChamberModel& model, int max_order) {
    if (!model.concurrent_point)
        throw DomainError("walls not concurrent: no common point O, the reflection group "
                          "about O is undefined");
    const int n = model.rank;
    std::vector<Eigen::MatrixXd> generators;
    for (const auto& r : model.radials) {
        if (!r.is_wall()) continue;
        const Eigen::VectorXd& b = r.root;
        Eigen::MatrixXd refl =
            Eigen::MatrixXd::Identity(n, n) - 2.0 / b.squaredNorm() * (b * b.transpose());
        if (!matrix_in(generators, refl)) generators.push_back(std::move(refl));
    }

    CoxeterGroup group;
    group.elements.push_back(Eigen::MatrixXd::Identity(n, n));
    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const Eigen::MatrixXd g = group.elements[frontier.front()];
        frontier.pop_front();
        for (const auto& s : generators) {
            Eigen::MatrixXd h = s * g;
            if (matrix_in(group.elements, h)) continue;
            group.elements.push_back(std::move(h));
            frontier.push_back(group.elements.size() - 1);
            if (static_cast<int>(group.elements.size()) > max_order)
                throw DomainError("reflection closure exceeds max_order " +
                                  std::to_string(max_order) +
                                  " (input roots do not generate a finite group)");
        }
    }
    return group;
}

}  // namespace chamberflow
