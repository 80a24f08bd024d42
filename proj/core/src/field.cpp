#include "chamberflow/field.hpp"

#include "chamberflow/hyperbolic.hpp"

#include <sstream>

namespace chamberflow {

namespace {

void require_interior(const ChamberModel& model, const Eigen::VectorXd& w) {
    if (!contains(model, w)) throw DomainError("point is not strictly interior");
}

double gap_plus(const RadialDatum& r, const Eigen::VectorXd& w) {
    return *r.d_plus - r.root.dot(w);
}

double gap_minus(const RadialDatum& r, const Eigen::VectorXd& w) {
    return *r.d_minus - r.root.dot(w);
}

}  // namespace

double rho(const ChamberModel& model, const Eigen::VectorXd& w) {
    require_interior(model, w);
    double val = 0.0;
    for (const auto& r : model.radials) {
        if (r.is_wall()) val -= r.m_plus * log_sinh_pos(gap_plus(r, w));
        if (r.has_minus()) val -= r.m_minus * log_cosh(gap_minus(r, w));
    }
    return val;
}

Eigen::VectorXd grad(const ChamberModel& model, const Eigen::VectorXd& w) {
    require_interior(model, w);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(model.rank);
    for (const auto& r : model.radials) {
        if (r.is_wall()) g += r.m_plus * coth_pos(gap_plus(r, w)) * r.root;
        if (r.has_minus()) g += r.m_minus * tanh_any(gap_minus(r, w)) * r.root;
    }
    return g;
}

Eigen::MatrixXd hessian(const ChamberModel& model, const Eigen::VectorXd& w) {
    require_interior(model, w);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(model.rank, model.rank);
    for (const auto& r : model.radials) {
        double coeff = 0.0;
        if (r.is_wall()) coeff += r.m_plus * inv_sinh_sq(gap_plus(r, w));
        if (r.has_minus()) coeff -= r.m_minus * inv_cosh_sq(gap_minus(r, w));
        if (coeff != 0.0) h += coeff * (r.root * r.root.transpose());
    }
    return h;
}

FieldEval evaluate(const ChamberModel& model, const Eigen::VectorXd& w) {
    FieldEval out;
    out.value = rho(model, w);
    out.gradient = grad(model, w);
    out.hessian = hessian(model, w);
    return out;
}

namespace {

void require_on_stratum(const ChamberModel& model, const StratumId& S,
                        const Eigen::VectorXd& w, double tol) {
    for (const auto& r : model.radials) {
        if (!r.is_wall()) continue;
        const double u = *r.d_plus - r.root.dot(w);
        if (S.contains(r.id)) {
            if (std::fabs(u) > tol) {
                std::ostringstream os;
                os << "point is not on stratum wall " << r.id << " (gap " << u << ")";
                throw DomainError(os.str());
            }
        } else if (u <= tol) {
            std::ostringstream os;
            os << "wall " << r.id << " is active but not listed in the stratum";
            throw DomainError(os.str());
        }
    }
}

}  // namespace

Eigen::VectorXd stratum_field(const ChamberModel& model, const StratumId& S,
                              const Eigen::VectorXd& w, double tol) {
    if (S.is_interior()) return grad(model, w);
    require_on_stratum(model, S, w, tol);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(model.rank);
    for (const auto& r : model.radials) {
        if (S.contains(r.id)) continue;
        if (r.is_wall()) g += r.m_plus * coth_pos(gap_plus(r, w)) * r.root;
        if (r.has_minus()) g += r.m_minus * tanh_any(gap_minus(r, w)) * r.root;
    }
    return g;
}

double stratum_rho(const ChamberModel& model, const StratumId& S,
                   const Eigen::VectorXd& w, double tol) {
    if (S.is_interior()) return rho(model, w);
    require_on_stratum(model, S, w, tol);
    double val = 0.0;
    for (const auto& r : model.radials) {
        if (S.contains(r.id)) continue;
        if (r.is_wall()) val -= r.m_plus * log_sinh_pos(gap_plus(r, w));
        if (r.has_minus()) val -= r.m_minus * log_cosh(gap_minus(r, w));
    }
    return val;
}

}  // namespace chamberflow
