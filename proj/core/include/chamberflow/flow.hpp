#pragma once

#include "chamberflow/chamber.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace chamberflow {

struct FlowOptions {
    double rtol = 1e-9;          // embedded-pair relative error control
    double max_step_frac = 0.1;  // step cap relative to min wall gap / ||X||
    double wall_eps = 1e-8;      // gap below which asymptotic extrapolation takes over
    double t_max = 1e3;
    long max_steps = 200000;
    std::uint64_t seed = 0;      // for sampling utilities built on top of runs
    double h_max = 1e308;        // optional absolute step cap (dense sampling)
};

enum class FlowStatus { Interior, Collapsed, Stationary, Budget };

const char* to_string(FlowStatus s);

struct FlowSample {
    double t = 0.0;
    Eigen::VectorXd w;
    double rho = 0.0;
    double grad_norm = 0.0;
    Eigen::VectorXd deriv;  // dw/dt at the sample; kept for dense evaluation
};

// ||X|| below this counts as an interior stationary point.
inline constexpr double kStationaryNorm = 1e-12;

struct Trajectory {
    std::vector<FlowSample> samples;
    FlowStatus status = FlowStatus::Interior;

    // Collapsed only: extrapolated blow-up time, limit point on the boundary,
    // and its stratum. T always comes from the asymptotic law, never from the
    // last accepted step.
    double T = 0.0;
    Eigen::VectorXd w_limit;
    StratumId stratum;

    // Stratum flows on models with minus radials carry no convexity
    // guarantee; flag propagates into summaries.
    bool convexity_warning = false;

    const FlowSample& back() const { return samples.back(); }
    // Cubic Hermite evaluation between samples; t clamped to the sampled range.
    Eigen::VectorXd eval_at(double t) const;
};

// Integrates dw/dt = grad rho from an interior start with a Dormand-Prince
// 5(4) pair. Steps are capped at max_step_frac * u_min / (||X|| ||b||_max) and
// any proposed step leaving the chamber is rejected and halved. Terminates:
//   Collapsed   min wall gap <= wall_eps (T extrapolated from the local law)
//   Stationary  ||grad|| < 1e-12
//   Budget      t_max or max_steps exhausted
Trajectory integrate(const ChamberModel& model, const Eigen::VectorXd& w0,
                     const FlowOptions& opts = {});

// Theorem-B flow: integrates dw/dt = stratum_field(S, w) constrained to the
// affine subspace { beta_i(w) = d_i^+ : i in S }. Sets convexity_warning when
// the model has minus radials.
Trajectory stratum_integrate(const ChamberModel& model, const StratumId& S,
                             const Eigen::VectorXd& w0, const FlowOptions& opts = {});

struct TypeOneReport {
    double estimate = 0.0;   // fitted limit of (T-t) * max_v ||A_v||^2_inf
    double predicted = 0.0;  // 1 / (2 m+_{i0}) for the limit wall
    double rel_error = 0.0;
    double fit_t_lo = 0.0;
    double fit_t_hi = 0.0;
    int fit_samples = 0;
    int wall = -1;
    // The radial reduction cannot check that the collapse fibration is
    // spherical; reports state the predicted constant without claiming it.
    static constexpr const char* kScopeNote =
        "predicted constant assumes the collapse fibration is spherical; "
        "not verifiable from radial data";
};

// Fits (T-t) * max_v ||A_v||^2_inf against u^2 over late samples of a
// single-wall collapse. Corner-limit trajectories (|S| > 1) are rejected: the
// constant is only derived for open-face collapse.
TypeOneReport type_one_estimate(const ChamberModel& model, const Trajectory& traj);

struct BasinCurve {
    Eigen::VectorXd target;        // cleaned boundary point
    StratumId target_stratum;
    Eigen::VectorXd inward;        // renormalized limit direction of -X at the target
    Trajectory backward;           // samples parametrized by backward time
    std::vector<Eigen::VectorXd> points() const;
};

// Reconstructs the curve of interior points flowing to w_star by backward
// integration seeded at w_star + 10*wall_eps * inward. Runs until rho drops
// by rho_span below the seed value or the budget ends.
BasinCurve basin_curve(const ChamberModel& model, const Eigen::VectorXd& w_star,
                       const FlowOptions& opts = {}, double rho_span = 10.0,
                       double boundary_tol = 1e-6);

struct BasinVerification {
    int forward_hits = 0;      // samples whose forward flow re-collapses to target
    int samples_checked = 0;
    double max_miss = 0.0;     // largest distance |w_limit - target| over samples
};

// Forward-flows n evenly spaced curve samples concurrently and measures how
// close each re-collapse lands to the target.
BasinVerification basin_verify(const ChamberModel& model, const BasinCurve& curve,
                               const FlowOptions& opts = {}, int n_samples = 10);

}  // namespace chamberflow
