#include "chamberflow/flow.hpp"

#include "chamberflow/field.hpp"
#include "chamberflow/hyperbolic.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

namespace chamberflow {

const char* to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Interior: return "interior";
        case FlowStatus::Collapsed: return "collapsed";
        case FlowStatus::Stationary: return "stationary";
        case FlowStatus::Budget: return "budget";
    }
    return "unknown";
}

Eigen::VectorXd Trajectory::eval_at(double t) const {
    if (samples.empty()) throw DomainError("empty trajectory");
    if (t <= samples.front().t) return samples.front().w;
    if (t >= samples.back().t) return samples.back().w;
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const FlowSample& s, double tt) { return s.t < tt; });
    const FlowSample& b = *it;
    const FlowSample& a = *(it - 1);
    const double h = b.t - a.t;
    if (h <= 0.0) return a.w;
    const double s = (t - a.t) / h;
    // Cubic Hermite on (w, dw/dt) of the bracketing samples.
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * a.w + h10 * h * a.deriv + h01 * b.w + h11 * h * b.deriv;
}

namespace {

constexpr double kPiHalf = std::numbers::pi / 2.0;

// Flow coordinates: w = origin + basis * y with orthonormal basis columns.
// The interior flow uses the identity frame; stratum flows use a basis of the
// intersection of the active wall hyperplanes, so the constraint is exact by
// construction instead of being re-projected each step.
struct Frame {
    Eigen::VectorXd origin;
    Eigen::MatrixXd basis;

    Eigen::VectorXd to_full(const Eigen::VectorXd& y) const { return origin + basis * y; }
    int dim() const { return static_cast<int>(basis.cols()); }
};

Frame identity_frame(int rank) {
    return {Eigen::VectorXd::Zero(rank), Eigen::MatrixXd::Identity(rank, rank)};
}

// One monitored wall: a wall not pinned by the stratum, able to collapse.
struct MonitoredWall {
    int id;
    Eigen::VectorXd root;
    double d;
    int m_plus;
    double reduced_norm_sq;  // ||basis^T root||^2, the effective normal speed
};

struct FlowProblem {
    const ChamberModel* model;
    Frame frame;
    std::vector<MonitoredWall> walls;
    StratumId pinned;      // walls held at zero gap (stratum flows)
    double direction = 1;  // +1 gradient ascent, -1 backward (basin tracing)

    // Raw field/potential sums over the non-pinned radials. The public
    // stratum_field guards against active walls missing from S; the stepper
    // must keep evaluating right down to wall_eps, so it sums directly and
    // relies on the hyperbolic evaluators' 1e-12 floor.
    Eigen::VectorXd field_full(const Eigen::VectorXd& w) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(model->rank);
        for (const auto& r : model->radials) {
            if (pinned.contains(r.id)) continue;
            if (r.is_wall()) g += r.m_plus * coth_pos(*r.d_plus - r.root.dot(w)) * r.root;
            if (r.has_minus())
                g += r.m_minus * tanh_any(*r.d_minus - r.root.dot(w)) * r.root;
        }
        return g;
    }
    Eigen::VectorXd rhs(const Eigen::VectorXd& y) const {
        return direction * (frame.basis.transpose() * field_full(frame.to_full(y)));
    }
    double potential(const Eigen::VectorXd& w) const {
        double val = 0.0;
        for (const auto& r : model->radials) {
            if (pinned.contains(r.id)) continue;
            if (r.is_wall()) val -= r.m_plus * log_sinh_pos(*r.d_plus - r.root.dot(w));
            if (r.has_minus()) val -= r.m_minus * log_cosh(*r.d_minus - r.root.dot(w));
        }
        return val;
    }
    double min_gap(const Eigen::VectorXd& w, int* argmin = nullptr) const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& mw : walls) {
            const double u = mw.d - mw.root.dot(w);
            if (u < best) {
                best = u;
                if (argmin) *argmin = mw.id;
            }
        }
        return best;
    }
    double max_reduced_root_norm() const {
        double m = 0.0;
        for (const auto& mw : walls) m = std::max(m, std::sqrt(mw.reduced_norm_sq));
        return m;
    }
    bool inside(const Eigen::VectorXd& w) const {
        for (const auto& mw : walls)
            if (!(mw.root.dot(w) < mw.d)) return false;
        return true;
    }
};

FlowProblem make_problem(const ChamberModel& model, const StratumId& S, Frame frame) {
    FlowProblem p;
    p.model = &model;
    p.frame = std::move(frame);
    p.pinned = S;
    for (const auto& r : model.radials) {
        if (!r.is_wall() || S.contains(r.id)) continue;
        const Eigen::VectorXd reduced = p.frame.basis.transpose() * r.root;
        p.walls.push_back({r.id, r.root, *r.d_plus, r.m_plus, reduced.squaredNorm()});
    }
    return p;
}

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = B1 - 5179.0 / 57600, E3 = B3 - 7571.0 / 16695,
                 E4 = B4 - 393.0 / 640, E5 = B5 + 92097.0 / 339200,
                 E6 = B6 - 187.0 / 2100, E7 = -1.0 / 40;

struct StepResult {
    Eigen::VectorXd y;
    Eigen::VectorXd k_last;  // FSAL derivative at the new point
    double error;            // scaled embedded-pair error estimate
};

// Throws NearWallError / DomainError when a stage leaves the admissible set;
// the caller treats that as a rejected step.
StepResult dp45_step(const FlowProblem& p, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& k1, double h, double rtol) {
    const auto f = [&](const Eigen::VectorXd& yy) { return p.rhs(yy); };
    const Eigen::VectorXd k2 = f(y + h * (A21 * k1));
    const Eigen::VectorXd k3 = f(y + h * (A31 * k1 + A32 * k2));
    const Eigen::VectorXd k4 = f(y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    const Eigen::VectorXd k5 = f(y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
    const Eigen::VectorXd k6 =
        f(y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
    StepResult out;
    out.y = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    out.k_last = f(out.y);
    const Eigen::VectorXd err =
        h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * out.k_last);
    double scaled = 0.0;
    for (int i = 0; i < y.size(); ++i) {
        const double sc = rtol * std::max({1.0, std::fabs(y(i)), std::fabs(out.y(i))});
        scaled = std::max(scaled, std::fabs(err(i)) / sc);
    }
    out.error = scaled;
    return out;
}

struct Terminator {
    double rho_floor = -std::numeric_limits<double>::infinity();  // basin span stop
};

void push_sample(Trajectory& traj, const FlowProblem& p, double t,
                 const Eigen::VectorXd& y, const Eigen::VectorXd& k) {
    FlowSample s;
    s.t = t;
    s.w = p.frame.to_full(y);
    s.rho = p.potential(s.w);
    s.deriv = p.frame.basis * k;  // k is rhs(y), already oriented by direction
    s.grad_norm = k.norm();
    traj.samples.push_back(std::move(s));
}

// Least-squares correction putting the given walls exactly on zero gap.
Eigen::VectorXd project_to_walls(const ChamberModel& model, const FlowProblem& p,
                                 const Eigen::VectorXd& w, const std::vector<int>& active) {
    if (active.empty()) return w;
    Eigen::MatrixXd A(static_cast<int>(active.size()), p.frame.dim());
    Eigen::VectorXd b(static_cast<int>(active.size()));
    int k = 0;
    for (int id : active) {
        for (const auto& r : model.radials)
            if (r.id == id) {
                A.row(k) = (p.frame.basis.transpose() * r.root).transpose();
                b(k) = *r.d_plus - r.root.dot(w);
            }
        ++k;
    }
    const Eigen::VectorXd dy = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    return w + p.frame.basis * dy;
}

void finalize_collapse(Trajectory& traj, const ChamberModel& model, const FlowProblem& p,
                       double t, const Eigen::VectorXd& y, double wall_eps) {
    const Eigen::VectorXd w = p.frame.to_full(y);
    const double u_min = p.min_gap(w);

    // Active set: walls shrinking together with the minimum; a generous
    // multiple separates corner approaches (proportional gaps) from walls
    // sitting at macroscopic distance.
    std::vector<int> active;
    const MonitoredWall* single = nullptr;
    for (const auto& mw : p.walls) {
        const double u = mw.d - mw.root.dot(w);
        if (u <= std::max(100.0 * wall_eps, 2.0 * u_min)) {
            active.push_back(mw.id);
            single = &mw;
        }
    }

    double T;
    if (active.size() == 1) {
        // Leading term of coth gives u du/dt = -m+ ||b||^2 near the face, so
        // the remaining time is u^2 / (2 m+ ||b||^2) (reduced norm for
        // constrained flows).
        const double u = single->d - single->root.dot(w);
        T = t + u * u / (2.0 * single->m_plus * single->reduced_norm_sq);
    } else {
        // Corner approach: u_min^2 shrinks linearly in t. Fit over samples
        // where T - t is still well above the time resolution; right at the
        // stop the t increments fall below double precision and the fit
        // would read pure roundoff.
        const double u0 = p.min_gap(traj.samples.front().w);
        const double u_lo = std::max(1e3 * wall_eps, 1e-5 * u0);
        const double u_hi = std::max(1e-2 * u0, 10.0 * u_lo);
        double st = 0, su = 0, stt = 0, stu = 0;
        int cnt = 0;
        for (const auto& s : traj.samples) {
            const double ui = p.min_gap(s.w);
            if (ui < u_lo || ui > u_hi) continue;
            st += s.t;
            su += ui * ui;
            stt += s.t * s.t;
            stu += s.t * ui * ui;
            ++cnt;
        }
        const double denom = cnt * stt - st * st;
        if (cnt >= 2 && std::fabs(denom) > 0.0) {
            const double slope = (cnt * stu - st * su) / denom;
            const double intercept = (su - slope * st) / cnt;
            T = slope < 0.0 ? -intercept / slope : t;
            if (!(T >= t)) T = t;
        } else {
            T = t;
        }
    }

    Eigen::VectorXd w_limit = project_to_walls(*p.model, p, w, active);
    StratumId stratum = stratum_of(model, w_limit, wall_eps);
    // Merge the pinned walls of stratum flows into the reported stratum.
    std::vector<int> all = stratum.walls;
    all.insert(all.end(), p.pinned.walls.begin(), p.pinned.walls.end());
    traj.status = FlowStatus::Collapsed;
    traj.T = T;
    traj.w_limit = std::move(w_limit);
    traj.stratum = StratumId(std::move(all));
}

void check_options(const FlowOptions& opts) {
    if (!(opts.rtol > 0.0) || !(opts.max_step_frac > 0.0) ||
        !(opts.max_step_frac < 1.0) || !(opts.t_max > 0.0) || opts.max_steps <= 0 ||
        !(opts.h_max > 0.0))
        throw DomainError("flow options must be positive with max_step_frac < 1");
    if (!(opts.wall_eps >= 10.0 * kMinGap))
        throw DomainError("wall_eps must stay above the 1e-12 field evaluation floor");
}

Trajectory run_flow(const ChamberModel& model, const FlowProblem& p,
                    const Eigen::VectorXd& y0, const FlowOptions& opts,
                    const Terminator& term = {}) {
    check_options(opts);
    Trajectory traj;
    traj.convexity_warning = !p.pinned.is_interior() && model.has_minus_radials();

    Eigen::VectorXd y = y0;
    double t = 0.0;
    Eigen::VectorXd k1 = p.rhs(y);
    push_sample(traj, p, t, y, k1);

    const double root_norm_max = p.max_reduced_root_norm();
    double h_carry = 0.0;  // accepted-step suggestion carried across iterations

    for (long step = 0; step < opts.max_steps; ++step) {
        const Eigen::VectorXd w = p.frame.to_full(y);
        const double u_min = p.min_gap(w);
        if (!p.walls.empty() && u_min <= opts.wall_eps) {
            finalize_collapse(traj, model, p, t, y, opts.wall_eps);
            return traj;
        }
        if (k1.norm() < kStationaryNorm) {
            traj.status = FlowStatus::Stationary;
            traj.w_limit = w;
            return traj;
        }
        if (traj.samples.back().rho <= term.rho_floor) {
            traj.status = FlowStatus::Interior;
            return traj;
        }
        if (t >= opts.t_max) {
            traj.status = FlowStatus::Budget;
            return traj;
        }

        double h_cap = opts.h_max;
        if (!p.walls.empty())
            h_cap = std::min(h_cap, opts.max_step_frac * u_min /
                                        (k1.norm() * root_norm_max + 1e-300));
        h_cap = std::min(h_cap, opts.t_max - t);
        double h = h_carry > 0.0 ? std::min(h_cap, h_carry) : h_cap;
        if (!(h > 0.0)) h = h_cap;

        bool accepted = false;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            StepResult res;
            try {
                res = dp45_step(p, y, k1, h, opts.rtol);
            } catch (const std::exception&) {
                h *= 0.5;  // stage left the chamber; the cap was optimistic
                continue;
            }
            const Eigen::VectorXd w_new = p.frame.to_full(res.y);
            if (!p.inside(w_new) || p.min_gap(w_new) < 2.0 * kMinGap) {
                h *= 0.5;
                continue;
            }
            if (res.error > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(res.error, -0.25));
                continue;
            }
            t += h;
            y = res.y;
            k1 = res.k_last;
            push_sample(traj, p, t, y, k1);
            const double grow = res.error > 0.0
                                    ? std::min(5.0, 0.9 * std::pow(res.error, -0.2))
                                    : 5.0;
            h_carry = std::min(h * grow, opts.h_max);
            accepted = true;
        }
        if (!accepted) {
            traj.status = FlowStatus::Budget;  // step size collapsed without progress
            return traj;
        }
    }
    traj.status = FlowStatus::Budget;
    return traj;
}

}  // namespace

Trajectory integrate(const ChamberModel& model, const Eigen::VectorXd& w0,
                     const FlowOptions& opts) {
    if (!contains(model, w0)) throw DomainError("flow start is not strictly interior");
    FlowProblem p = make_problem(model, StratumId{}, identity_frame(model.rank));
    return run_flow(model, p, w0, opts);
}

namespace {

Frame stratum_frame(const ChamberModel& model, const StratumId& S,
                    const Eigen::VectorXd& w0) {
    Eigen::MatrixXd B(static_cast<int>(S.walls.size()), model.rank);
    int k = 0;
    for (int id : S.walls)
        for (const auto& r : model.radials)
            if (r.id == id) B.row(k++) = r.root.transpose();

    // Orthonormal basis of the intersection of the wall hyperplanes.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullV);
    const double tol = 1e-12 * svd.singularValues().maxCoeff();
    int rank_b = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank_b;
    Frame frame;
    frame.basis = svd.matrixV().rightCols(model.rank - rank_b);

    // Pin the offsets exactly: least-squares shift of w0 onto the subspace.
    Eigen::VectorXd d(static_cast<int>(S.walls.size()));
    k = 0;
    for (int id : S.walls)
        for (const auto& r : model.radials)
            if (r.id == id) d(k++) = *r.d_plus;
    frame.origin = w0 + B.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(d - B * w0);
    return frame;
}

}  // namespace

Trajectory stratum_integrate(const ChamberModel& model, const StratumId& S,
                             const Eigen::VectorXd& w0, const FlowOptions& opts) {
    if (S.is_interior()) return integrate(model, w0, opts);
    for (int id : S.walls) {
        bool is_wall = false;
        for (const auto& r : model.radials)
            if (r.id == id && r.is_wall()) is_wall = true;
        if (!is_wall)
            throw DomainError("stratum index " + std::to_string(id) + " is not a wall");
    }
    if (!(stratum_of(model, w0, /*tol=*/1e-6) == S))
        throw DomainError("start point is not on the requested stratum");

    Frame frame = stratum_frame(model, S, w0);
    FlowProblem p = make_problem(model, S, frame);
    const Eigen::VectorXd y0 = Eigen::VectorXd::Zero(frame.dim());
    return run_flow(model, p, y0, opts);
}

namespace {

// max over unit v of the squared sup-norm of the complexified shape operator
// of the translate through w: the numerator beta(v) peaks at v = b/||b|| and
// the j = 0 denominator is the smallest in each family.
double max_shape_sq(const ChamberModel& model, const Eigen::VectorXd& w) {
    double best = 0.0;
    for (const auto& r : model.radials) {
        const double n2 = r.root.squaredNorm();
        if (r.is_wall()) {
            const double u = *r.d_plus - r.root.dot(w);
            best = std::max(best, n2 / (u * u));
        }
        if (r.has_minus()) {
            const double u = *r.d_minus - r.root.dot(w);
            best = std::max(best, n2 / (u * u + kPiHalf * kPiHalf));
        }
    }
    return best;
}

}  // namespace

TypeOneReport type_one_estimate(const ChamberModel& model, const Trajectory& traj) {
    if (traj.status != FlowStatus::Collapsed)
        throw DomainError("type-I analysis needs a collapsed trajectory");
    if (traj.stratum.walls.size() != 1)
        throw DomainError("corner-limit trajectory: the type-I constant is derived for "
                          "open-face collapse only");
    const int i0 = traj.stratum.walls.front();
    const RadialDatum* wall = nullptr;
    for (const auto& r : model.radials)
        if (r.id == i0) wall = &r;
    if (!wall || !wall->is_wall()) throw DomainError("limit stratum is not a wall");

    TypeOneReport rep;
    rep.wall = i0;
    rep.predicted = 1.0 / (2.0 * wall->m_plus);

    const double u0 = *wall->d_plus - wall->root.dot(traj.samples.front().w);
    double u_lo = std::max(1e3 * 1e-8, 1e-5 * u0);
    double u_hi = std::max(1e-2 * u0, 10.0 * u_lo);

    // Least-squares fit of f = (T - t) * max ||A||^2 against u^2; the
    // intercept extrapolates the u -> 0 limit.
    std::vector<double> xs, ys, ts;
    for (int pass = 0; pass < 6 && static_cast<int>(xs.size()) < 10; ++pass) {
        xs.clear();
        ys.clear();
        ts.clear();
        for (const auto& s : traj.samples) {
            const double u = *wall->d_plus - wall->root.dot(s.w);
            if (u < u_lo || u > u_hi) continue;
            const double f = (traj.T - s.t) * max_shape_sq(model, s.w);
            xs.push_back(u * u);
            ys.push_back(f);
            ts.push_back(s.t);
        }
        u_hi *= 4.0;  // widen the window if the tail is under-sampled
    }
    if (xs.size() < 2) throw DomainError("not enough late samples for the type-I fit");

    const int n = static_cast<int>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    rep.estimate = (sy - slope * sx) / n;
    rep.rel_error = std::fabs(rep.estimate - rep.predicted) / rep.predicted;
    rep.fit_t_lo = *std::min_element(ts.begin(), ts.end());
    rep.fit_t_hi = *std::max_element(ts.begin(), ts.end());
    rep.fit_samples = n;
    return rep;
}

std::vector<Eigen::VectorXd> BasinCurve::points() const {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(backward.samples.size());
    for (const auto& s : backward.samples) pts.push_back(s.w);
    return pts;
}

BasinCurve basin_curve(const ChamberModel& model, const Eigen::VectorXd& w_star,
                       const FlowOptions& opts, double rho_span, double boundary_tol) {
    StratumId S = stratum_of(model, w_star, boundary_tol);
    if (S.is_interior())
        throw DomainError("basin target is not on the chamber boundary (within tol)");

    FlowProblem interior = make_problem(model, StratumId{}, identity_frame(model.rank));
    std::vector<int> active = S.walls;
    const Eigen::VectorXd target = project_to_walls(model, interior, w_star, active);

    // Inward direction: flow lines meet an open face along the normal; at a
    // corner, the multiplicity-weighted sum of the active normals renormalizes
    // the blow-up direction.
    Eigen::VectorXd outward = Eigen::VectorXd::Zero(model.rank);
    for (const auto& r : model.radials)
        if (r.is_wall() && S.contains(r.id)) outward += r.m_plus * r.root;
    Eigen::VectorXd inward = -outward.normalized();

    BasinCurve curve;
    curve.target = target;
    curve.target_stratum = S;
    curve.inward = inward;

    const Eigen::VectorXd seed = target + 10.0 * opts.wall_eps * inward;
    if (!contains(model, seed))
        throw DomainError("backward seed fell outside the chamber; target stratum "
                          "normals do not point inward");

    FlowProblem p = make_problem(model, StratumId{}, identity_frame(model.rank));
    p.direction = -1.0;
    Terminator term;
    term.rho_floor = rho(model, seed) - rho_span;
    curve.backward = run_flow(model, p, seed, opts, term);
    return curve;
}

BasinVerification basin_verify(const ChamberModel& model, const BasinCurve& curve,
                               const FlowOptions& opts, int n_samples) {
    const auto& samples = curve.backward.samples;
    BasinVerification out;
    if (samples.empty()) return out;

    std::vector<Eigen::VectorXd> starts;
    const int n = static_cast<int>(samples.size());
    for (int k = 0; k < n_samples; ++k) {
        const int idx = static_cast<int>((static_cast<double>(k + 1) / n_samples) * (n - 1));
        starts.push_back(samples[idx].w);
    }

    std::vector<std::future<double>> futs;
    futs.reserve(starts.size());
    for (const auto& s : starts)
        futs.push_back(std::async(std::launch::async, [&model, &curve, &opts, s] {
            Trajectory t = integrate(model, s, opts);
            if (t.status != FlowStatus::Collapsed)
                return std::numeric_limits<double>::infinity();
            return (t.w_limit - curve.target).norm();
        }));

    for (auto& f : futs) {
        const double miss = f.get();
        ++out.samples_checked;
        out.max_miss = std::max(out.max_miss, miss);
        if (miss <= 10.0 * opts.wall_eps) ++out.forward_hits;
    }
    return out;
}

}  // namespace chamberflow
