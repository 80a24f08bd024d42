#pragma once

#include <Eigen/Core>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chamberflow {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One curvature-sphere direction: root covector, multiplicities, focal
// offsets. Offsets are stored as d = arctanh(c) because every downstream
// formula consumes arctanh(c); c = tanh(d) is recovered for display only.
struct RadialDatum {
    int id = 0;
    Eigen::VectorXd root;          // coordinates of beta^sharp, beta(w) = <root, w>
    int m_plus = 0;
    int m_minus = 0;
    std::optional<double> d_plus;  // required iff m_plus > 0
    std::optional<double> d_minus; // required iff m_minus > 0

    bool is_wall() const { return m_plus > 0; }
    bool has_minus() const { return m_minus > 0; }
};

// A scenario: the chamber {w : beta_i(w) < d_i^+} with the origin interior.
// Immutable after construction; safe to share across threads.
struct ChamberModel {
    std::string name;
    int rank = 0;
    std::vector<RadialDatum> radials;
    bool theorem_a = false;
    // The common point O with beta_i(O) = d_i^+ for every wall, when the wall
    // hyperplanes are concurrent (least-squares residual <= 1e-10).
    std::optional<Eigen::VectorXd> concurrent_point;

    std::vector<int> wall_indices() const;
    std::vector<int> minus_indices() const;
    bool has_minus_radials() const;
    double max_wall_root_norm() const;
};

struct Finding {
    std::string field;    // e.g. "radials[2].d_plus"
    std::string message;  // names the violated invariant
};

// Residual bound under which the wall system counts as concurrent.
inline constexpr double kConcurrencyTol = 1e-10;

// Pure invariant check; returns one finding per violation, empty iff valid.
std::vector<Finding> validate(const ChamberModel& model);

// Parses and validates a scenario document (schema: name, rank, theorem_a,
// radials[{root, m_plus, m_minus, d_plus?, d_minus?}]; unknown fields are an
// error). Computes the concurrent point. Throws ParseError / ValidationError.
ChamberModel load_scenario(const std::string& text);
ChamberModel load_scenario_file(const std::string& path);

// Serializes a model back to its document form; reals round-trip bit-exactly.
std::string serialize(const ChamberModel& model);

// Recomputes concurrent_point on a model assembled by hand.
void refresh_concurrent_point(ChamberModel& model);

// Synthetic scenario constructors.
ChamberModel make_rank1(int m_plus, int m_minus, double d);
ChamberModel make_slab(int m, double d);
ChamberModel make_a2(int m, double d);
ChamberModel make_b2(int m_short, int m_long, double d);

// Catalog entry: a builtin generator or a named scenario template.
struct BuiltinInfo {
    std::string name;
    std::string signature;  // e.g. "a2(m,d)"
    std::string summary;
    bool is_template = false;  // template rows need user-supplied numeric data
};

const std::vector<BuiltinInfo>& builtin_catalog();

// Dispatches "name(arg,...)" calls, e.g. "rank1(2,1,1)" or "a2" (documented
// defaults). Unknown names throw ValidationError. Template rows (named
// scenario labels with no published numeric data) throw until the user fills
// in a skeleton document; see emit_builtin_document.
ChamberModel builtin(const std::string& call);

// Document text for `catalog --emit`: generator names produce a complete
// scenario; template rows produce a skeleton the user must fill in.
std::string emit_builtin_document(const std::string& call);

}  // namespace chamberflow
