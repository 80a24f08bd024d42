#include "chamberflow/serialize.hpp"

#include <nlohmann/json.hpp>

#include <ostream>

namespace chamberflow {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json to_json(const StratumId& s) {
    json arr = json::array();
    for (int i : s.walls) arr.push_back(i);
    return arr;
}

json to_json(const FlowSample& s) {
    return json{{"t", s.t}, {"w", to_json(s.w)}, {"rho", s.rho},
                {"grad_norm", s.grad_norm}};
}

json to_json(const TypeOneReport& r) {
    return json{{"estimate", r.estimate},
                {"predicted", r.predicted},
                {"rel_error", r.rel_error},
                {"fit_window", json::array({r.fit_t_lo, r.fit_t_hi})},
                {"fit_samples", r.fit_samples},
                {"wall", r.wall},
                {"note", TypeOneReport::kScopeNote}};
}

namespace {

const char* branch_name(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

}  // namespace

json to_json(const SpectrumSlice& s) {
    json entries = json::array();
    for (const auto& e : s.entries)
        entries.push_back(json{{"i", e.radial},
                               {"j", e.j},
                               {"branch", branch_name(e.branch)},
                               {"re", e.value.real()},
                               {"im", e.value.imag()},
                               {"modulus", std::abs(e.value)}});
    json periods = json::array();
    for (const auto& p : s.periods)
        periods.push_back(json{{"i", p.radial},
                               {"branch", branch_name(p.branch)},
                               {"re", p.b.real()},
                               {"im", p.b.imag()}});
    return json{{"w", to_json(s.w)}, {"v", to_json(s.v)}, {"entries", entries},
                {"periods", periods}};
}

json to_json(const HyperplaneArrangement& a) {
    json items = json::array();
    for (const auto& it : a.items)
        items.push_back(json{{"i", it.radial},
                             {"branch", branch_name(it.branch)},
                             {"j", it.j},
                             {"level_re", it.level.real()},
                             {"level_im", it.level.imag()},
                             {"normal", to_json(it.normal)}});
    return json{{"items", items}};
}

json trajectory_summary(const Trajectory& traj) {
    json out;
    out["status"] = to_string(traj.status);
    out["steps"] = traj.samples.size();
    if (traj.status == FlowStatus::Collapsed) {
        out["T"] = traj.T;
        out["w_limit"] = to_json(traj.w_limit);
        out["stratum"] = to_json(traj.stratum);
    } else if (traj.status == FlowStatus::Stationary) {
        out["w_limit"] = to_json(traj.w_limit);
    }
    if (traj.convexity_warning)
        out["warning"] =
            "model has minus radials: no convexity guarantee on stratum flows";
    return out;
}

void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj) {
    for (const auto& s : traj.samples) out << to_json(s).dump() << "\n";
    out << trajectory_summary(traj).dump() << "\n";
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    if (traj.samples.empty()) return;
    const int rank = static_cast<int>(traj.samples.front().w.size());
    out << "t";
    for (int i = 0; i < rank; ++i) out << ",w" << i;
    out << ",rho,grad_norm\n";
    // Shortest round-trip formatting, matching the JSON emitter.
    for (const auto& s : traj.samples) {
        out << json(s.t).dump();
        for (int i = 0; i < rank; ++i) out << "," << json(s.w(i)).dump();
        out << "," << json(s.rho).dump() << "," << json(s.grad_norm).dump() << "\n";
    }
}

}  // namespace chamberflow
