#include "chamberflow/spectrum.hpp"

#include "chamberflow/field.hpp"
#include "chamberflow/hyperbolic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chamberflow {

namespace {

constexpr double kPi = std::numbers::pi;

void require_interior(const ChamberModel& model, const Eigen::VectorXd& w) {
    if (!contains(model, w)) throw DomainError("point is not strictly interior");
}

bool spectral_less(const SpectrumEntry& a, const SpectrumEntry& b) {
    const double ma = std::abs(a.value), mb = std::abs(b.value);
    if (ma != mb) return ma > mb;
    if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
    return a.value.imag() > b.value.imag();
}

}  // namespace

SpectrumSlice lifted_spectrum(const ChamberModel& model, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& v, int j_max) {
    require_interior(model, w);
    if (v.size() != model.rank) throw DimensionError("direction length must equal rank");
    if (v.isZero(0.0)) throw DomainError("direction v must be nonzero");

    SpectrumSlice slice;
    slice.w = w;
    slice.v = v;
    for (const auto& r : model.radials) {
        const double bv = r.root.dot(v);
        if (r.is_wall()) {
            slice.periods.push_back({r.id, Branch::Plus, {kPi / *r.d_plus, 0.0}});
            if (bv != 0.0) {
                const double u = *r.d_plus - r.root.dot(w);
                for (int j = -j_max; j <= j_max; ++j)
                    slice.entries.push_back(
                        {r.id, j, Branch::Plus, bv / std::complex<double>(u, j * kPi)});
            }
        }
        if (r.has_minus()) {
            slice.periods.push_back(
                {r.id, Branch::Minus,
                 kPi / std::complex<double>(*r.d_minus, 0.5 * kPi)});
            if (bv != 0.0) {
                const double u = *r.d_minus - r.root.dot(w);
                for (int j = -j_max; j <= j_max; ++j)
                    slice.entries.push_back(
                        {r.id, j, Branch::Minus,
                         bv / std::complex<double>(u, (j + 0.5) * kPi)});
            }
        }
    }
    std::stable_sort(slice.entries.begin(), slice.entries.end(), spectral_less);
    return slice;
}

double regularized_trace_series(const ChamberModel& model, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v, long N) {
    require_interior(model, w);
    if (N < 0) throw DomainError("truncation N must be non-negative");

    // Conjugate pairs are summed together so each contribution is real up to
    // one rounding; the principal-value identity only converges this way.
    std::complex<double> total = 0.0;
    for (const auto& r : model.radials) {
        const double bv = r.root.dot(v);
        if (bv == 0.0) continue;
        if (r.is_wall()) {
            const double u = *r.d_plus - r.root.dot(w);
            std::complex<double> s = std::complex<double>(bv / u, 0.0);
            for (long j = 1; j <= N; ++j)
                s += bv / std::complex<double>(u, j * kPi) +
                     bv / std::complex<double>(u, -j * kPi);
            total += static_cast<double>(r.m_plus) * s;
        }
        if (r.has_minus()) {
            const double u = *r.d_minus - r.root.dot(w);
            std::complex<double> s = 0.0;
            for (long j = 0; j < N; ++j)
                s += bv / std::complex<double>(u, (j + 0.5) * kPi) +
                     bv / std::complex<double>(u, -(j + 0.5) * kPi);
            total += static_cast<double>(r.m_minus) * s;
        }
    }
    const double magnitude = std::max(1.0, std::abs(total));
    if (std::fabs(total.imag()) > 1e-12 * magnitude) {
        std::ostringstream os;
        os << "symmetric partial sum has non-cancelling imaginary part " << total.imag();
        throw DomainError(os.str());
    }
    return total.real();
}

double regularized_trace_closed(const ChamberModel& model, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v, const StratumId& S, double tol) {
    if (v.size() != model.rank) throw DimensionError("direction length must equal rank");
    double trace = 0.0;
    for (const auto& r : model.radials) {
        if (S.contains(r.id)) continue;
        const double bv = r.root.dot(v);
        if (r.is_wall()) {
            const double u = *r.d_plus - r.root.dot(w);
            if (u <= tol && S.is_interior() == false) {
                std::ostringstream os;
                os << "wall " << r.id << " is active but not listed in the stratum";
                throw DomainError(os.str());
            }
            if (u <= 0.0) throw DomainError("point is not inside the chamber off-stratum");
            trace += r.m_plus * coth_pos(u) * bv;
        }
        if (r.has_minus()) trace += r.m_minus * tanh_any(*r.d_minus - r.root.dot(w)) * bv;
    }
    return trace;
}

HyperplaneArrangement real_focal_arrangement(const ChamberModel& model) {
    HyperplaneArrangement arr;
    for (const auto& r : model.radials)
        if (r.is_wall()) arr.items.push_back({r.id, Branch::Plus, 0, {*r.d_plus, 0.0}, r.root});
    return arr;
}

HyperplaneArrangement complex_focal_arrangement(const ChamberModel& model, int j_max) {
    if (j_max < 0) throw DomainError("j_max must be non-negative");
    HyperplaneArrangement arr;
    for (const auto& r : model.radials) {
        if (r.is_wall())
            for (int j = -j_max; j <= j_max; ++j)
                arr.items.push_back(
                    {r.id, Branch::Plus, j, {*r.d_plus, j * kPi}, r.root});
        if (r.has_minus())
            for (int j = -j_max; j <= j_max; ++j)
                arr.items.push_back(
                    {r.id, Branch::Minus, j, {*r.d_minus, (j + 0.5) * kPi}, r.root});
    }
    return arr;
}

namespace {

const RadialDatum& radial_by_id(const ChamberModel& model, int id) {
    for (const auto& r : model.radials)
        if (r.id == id) return r;
    throw DomainError("no radial with id " + std::to_string(id));
}

}  // namespace

double ambient_lambda_plus(const ChamberModel& model, int radial, const Eigen::VectorXd& v) {
    const auto& r = radial_by_id(model, radial);
    if (!r.is_wall()) throw DomainError("radial has no plus branch");
    return r.root.dot(v) / std::tanh(*r.d_plus);
}

double ambient_lambda_minus(const ChamberModel& model, int radial, const Eigen::VectorXd& v) {
    const auto& r = radial_by_id(model, radial);
    if (!r.has_minus()) throw DomainError("radial has no minus branch");
    return std::tanh(*r.d_minus) * r.root.dot(v);
}

}  // namespace chamberflow
