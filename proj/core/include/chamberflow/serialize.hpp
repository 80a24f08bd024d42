#pragma once

#include "chamberflow/flow.hpp"
#include "chamberflow/spectrum.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <string>

namespace chamberflow {

// JSON forms used by the CLI and by downstream plot tooling. All doubles are
// emitted in shortest round-trip decimal form (nlohmann's dtoa), so every
// number reparses bit-identically.

nlohmann::json to_json(const StratumId& s);
nlohmann::json to_json(const FlowSample& s);
nlohmann::json to_json(const TypeOneReport& r);
nlohmann::json to_json(const SpectrumSlice& s);
nlohmann::json to_json(const HyperplaneArrangement& a);
nlohmann::json to_json(const Eigen::VectorXd& v);

// One sample object per line, then one summary object line.
void write_trajectory_jsonl(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

// Summary object shared by the CLI subcommands (status, T, w_limit, stratum,
// type_one); never includes wall-clock fields, callers append those.
nlohmann::json trajectory_summary(const Trajectory& traj);

}  // namespace chamberflow
