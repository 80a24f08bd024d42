#pragma once

#include "chamberflow/chamber.hpp"

#include <Eigen/Core>

#include <complex>
#include <vector>

namespace chamberflow {

enum class Branch { Plus, Minus };

// One nonzero complex principal curvature of the lifted parallel submanifold:
// beta_i(v) / (d_i^+ + j*pi*i - beta_i(w))        (plus branch)
// beta_i(v) / (d_i^- + (j+1/2)*pi*i - beta_i(w))  (minus branch)
struct SpectrumEntry {
    int radial = 0;
    int j = 0;
    Branch branch = Branch::Plus;
    std::complex<double> value;
};

// Complex step parameter per radial: b+ = pi/d+, b- = pi/(d- + i*pi/2).
struct SpectrumPeriod {
    int radial = 0;
    Branch branch = Branch::Plus;
    std::complex<double> b;
};

struct SpectrumSlice {
    Eigen::VectorXd w;
    Eigen::VectorXd v;
    std::vector<SpectrumEntry> entries;   // sorted: |value| desc, Re desc, Im desc
    std::vector<SpectrumPeriod> periods;
};

struct HyperplaneItem {
    int radial = 0;
    Branch branch = Branch::Plus;
    int j = 0;
    std::complex<double> level;  // real part d^+, or d^± + offset*pi*i
    Eigen::VectorXd normal;      // the root vector
};

struct HyperplaneArrangement {
    std::vector<HyperplaneItem> items;
};

// All entries with |j| <= j_max for an interior w and nonzero direction v;
// exact-zero eigenvalues (beta_i(v) == 0) are omitted.
SpectrumSlice lifted_spectrum(const ChamberModel& model, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& v, int j_max = 64);

// Multiplicity-weighted symmetric partial sum of the spectrum: j paired with
// -j on the plus branch and with -j-1 on the minus branch, so the sum is real
// up to roundoff (asserted below 1e-12 relative).
double regularized_trace_series(const ChamberModel& model, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v, long N);

// Closed form of the same trace for the translate through w with the walls in
// S focalized away: sum_{walls not in S} m+ coth(u+) beta(v)
//                 + sum_{minus not in S} m- tanh(u-) beta(v).
// S = {} reproduces <grad(w), v>.
double regularized_trace_closed(const ChamberModel& model, const Eigen::VectorXd& w,
                                const Eigen::VectorXd& v, const StratumId& S = StratumId{},
                                double tol = kStratumTol);

// Real focal hyperplanes {w : beta_i(w) = d_i^+}, one per wall.
HyperplaneArrangement real_focal_arrangement(const ChamberModel& model);

// Complexified focal hyperplanes with levels d+ + j*pi*i and d- + (j+1/2)*pi*i.
HyperplaneArrangement complex_focal_arrangement(const ChamberModel& model, int j_max);

// Ambient principal curvature helpers recovered from the offsets:
// lambda+ (v) = beta_i(v) / tanh(d_i^+), lambda- (v) = tanh(d_i^-) * beta_i(v).
double ambient_lambda_plus(const ChamberModel& model, int radial, const Eigen::VectorXd& v);
double ambient_lambda_minus(const ChamberModel& model, int radial, const Eigen::VectorXd& v);

}  // namespace chamberflow
