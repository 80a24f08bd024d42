#include "chamberflow/catalog.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace chamberflow {

using nlohmann::json;

std::vector<int> ChamberModel::wall_indices() const {
    std::vector<int> out;
    for (const auto& r : radials)
        if (r.is_wall()) out.push_back(r.id);
    return out;
}

std::vector<int> ChamberModel::minus_indices() const {
    std::vector<int> out;
    for (const auto& r : radials)
        if (r.has_minus()) out.push_back(r.id);
    return out;
}

bool ChamberModel::has_minus_radials() const {
    return std::any_of(radials.begin(), radials.end(),
                       [](const RadialDatum& r) { return r.has_minus(); });
}

double ChamberModel::max_wall_root_norm() const {
    double m = 0.0;
    for (const auto& r : radials)
        if (r.is_wall()) m = std::max(m, r.root.norm());
    return m;
}

namespace {

std::string radial_field(int i, const char* name) {
    std::ostringstream os;
    os << "radials[" << i << "]." << name;
    return os.str();
}

bool same_direction(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return false;
    return (a / na - b / nb).norm() <= 1e-9;
}

}  // namespace

std::vector<Finding> validate(const ChamberModel& model) {
    std::vector<Finding> findings;
    auto add = [&](std::string field, std::string msg) {
        findings.push_back({std::move(field), std::move(msg)});
    };

    if (model.rank <= 0) add("rank", "rank must be positive");
    if (model.radials.empty()) add("radials", "at least one radial is required");

    for (std::size_t k = 0; k < model.radials.size(); ++k) {
        const auto& r = model.radials[k];
        const int i = static_cast<int>(k);
        if (model.rank > 0 && r.root.size() != model.rank)
            add(radial_field(i, "root"), "root length must equal rank");
        if (r.root.size() == 0 || r.root.isZero(0.0))
            add(radial_field(i, "root"), "root must be nonzero");
        if (r.m_plus < 0) add(radial_field(i, "m_plus"), "m_plus must be non-negative");
        if (r.m_minus < 0) add(radial_field(i, "m_minus"), "m_minus must be non-negative");
        if (r.m_plus + r.m_minus < 1)
            add(radial_field(i, "m_plus"), "m_plus + m_minus must be at least 1");
        if (r.m_plus > 0 && !r.d_plus)
            add(radial_field(i, "d_plus"), "d_plus is required when m_plus > 0");
        if (r.m_minus > 0 && !r.d_minus)
            add(radial_field(i, "d_minus"), "d_minus is required when m_minus > 0");
        if (r.d_plus && !(*r.d_plus > 0.0))
            add(radial_field(i, "d_plus"), "d_plus must be positive");
        if (r.d_minus && !(*r.d_minus > 0.0))
            add(radial_field(i, "d_minus"), "d_minus must be positive");
        if (model.theorem_a) {
            if (r.m_plus < r.m_minus)
                add(radial_field(i, "m_plus"),
                    "m_plus < m_minus violates the theorem_a hypothesis");
            if (r.m_minus > 0 && r.d_plus && r.d_minus && *r.d_plus != *r.d_minus)
                add(radial_field(i, "d_minus"),
                    "d_minus must equal d_plus in theorem_a mode");
        }
    }

    // One radial per covector direction; two entries pointing the same way
    // would describe the same curvature distribution twice.
    for (std::size_t a = 0; a < model.radials.size(); ++a)
        for (std::size_t b = a + 1; b < model.radials.size(); ++b)
            if (model.radials[a].root.size() == model.radials[b].root.size() &&
                same_direction(model.radials[a].root, model.radials[b].root))
                add(radial_field(static_cast<int>(b), "root"),
                    "duplicate root direction (one radial per curvature distribution)");

    if (model.concurrent_point) {
        if (model.concurrent_point->size() != model.rank) {
            add("concurrent_point", "length must equal rank");
        } else {
            for (const auto& r : model.radials)
                if (r.is_wall() && r.root.size() == model.rank &&
                    std::fabs(r.root.dot(*model.concurrent_point) - r.d_plus.value_or(0.0)) >
                        kConcurrencyTol)
                    add("concurrent_point", "walls are not concurrent at the stored point");
        }
    }
    return findings;
}

void refresh_concurrent_point(ChamberModel& model) {
    model.concurrent_point.reset();
    std::vector<const RadialDatum*> walls;
    for (const auto& r : model.radials)
        if (r.is_wall()) walls.push_back(&r);
    if (walls.empty() || model.rank <= 0) return;

    Eigen::MatrixXd A(static_cast<int>(walls.size()), model.rank);
    Eigen::VectorXd b(static_cast<int>(walls.size()));
    for (std::size_t k = 0; k < walls.size(); ++k) {
        if (walls[k]->root.size() != model.rank) return;
        A.row(static_cast<int>(k)) = walls[k]->root.transpose();
        b(static_cast<int>(k)) = *walls[k]->d_plus;
    }
    Eigen::VectorXd O = A.colPivHouseholderQr().solve(b);
    if ((A * O - b).cwiseAbs().maxCoeff() <= kConcurrencyTol) model.concurrent_point = O;
}

namespace {

void throw_findings(const std::vector<Finding>& findings) {
    if (findings.empty()) return;
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& f : findings) os << "\n  " << f.field << ": " << f.message;
    throw ValidationError(os.str());
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ParseError(where + ": unknown field \"" + it.key() + "\"");
    }
}

ChamberModel finalize(ChamberModel model) {
    throw_findings(validate(model));
    refresh_concurrent_point(model);
    return model;
}

}  // namespace

namespace {

int require_int(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ParseError(where + "." + key + ": expected an integer");
    return v.get<int>();
}

}  // namespace

ChamberModel load_scenario(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scenario document must be a JSON object");
    reject_unknown_keys(doc, {"name", "rank", "theorem_a", "radials"}, "scenario");

    ChamberModel model;
    try {
        model.name = doc.value("name", std::string{});
        if (!doc.contains("rank")) throw ParseError("scenario.rank: missing");
        model.rank = require_int(doc, "rank", 0, "scenario");
        model.theorem_a = doc.value("theorem_a", false);
        const auto& rads = doc.at("radials");
        if (!rads.is_array()) throw ParseError("radials: expected an array");
        int id = 0;
        for (const auto& rj : rads) {
            const std::string where = "radials[" + std::to_string(id) + "]";
            if (!rj.is_object()) throw ParseError(where + ": expected an object");
            reject_unknown_keys(rj, {"root", "m_plus", "m_minus", "d_plus", "d_minus"},
                                where);
            RadialDatum r;
            r.id = id++;
            const auto& root = rj.at("root");
            if (!root.is_array()) throw ParseError(where + ".root: expected an array");
            r.root.resize(static_cast<int>(root.size()));
            for (int k = 0; k < r.root.size(); ++k) r.root(k) = root.at(k).get<double>();
            r.m_plus = require_int(rj, "m_plus", 0, where);
            r.m_minus = require_int(rj, "m_minus", 0, where);
            if (rj.contains("d_plus")) r.d_plus = rj.at("d_plus").get<double>();
            if (rj.contains("d_minus")) r.d_minus = rj.at("d_minus").get<double>();
            model.radials.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }
    return finalize(std::move(model));
}

ChamberModel load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

std::string serialize(const ChamberModel& model) {
    json doc;
    doc["name"] = model.name;
    doc["rank"] = model.rank;
    doc["theorem_a"] = model.theorem_a;
    json rads = json::array();
    for (const auto& r : model.radials) {
        json rj;
        rj["root"] = std::vector<double>(r.root.data(), r.root.data() + r.root.size());
        rj["m_plus"] = r.m_plus;
        rj["m_minus"] = r.m_minus;
        if (r.d_plus) rj["d_plus"] = *r.d_plus;
        if (r.d_minus) rj["d_minus"] = *r.d_minus;
        rads.push_back(std::move(rj));
    }
    doc["radials"] = std::move(rads);
    return doc.dump(2) + "\n";
}

namespace {

RadialDatum radial(int id, std::initializer_list<double> root, int mp, int mm,
                   std::optional<double> dp, std::optional<double> dm) {
    RadialDatum r;
    r.id = id;
    r.root.resize(static_cast<int>(root.size()));
    int k = 0;
    for (double x : root) r.root(k++) = x;
    r.m_plus = mp;
    r.m_minus = mm;
    r.d_plus = dp;
    r.d_minus = dm;
    return r;
}

}  // namespace

ChamberModel make_rank1(int m_plus, int m_minus, double d) {
    ChamberModel m;
    m.name = "rank1";
    m.rank = 1;
    m.theorem_a = m_plus >= m_minus;
    m.radials.push_back(radial(0, {1.0}, m_plus, m_minus,
                               m_plus > 0 ? std::optional<double>(d) : std::nullopt,
                               m_minus > 0 ? std::optional<double>(d) : std::nullopt));
    return finalize(std::move(m));
}

ChamberModel make_slab(int m, double d) {
    ChamberModel model;
    model.name = "slab";
    model.rank = 1;
    model.theorem_a = false;  // parallel walls, no concurrent point
    model.radials.push_back(radial(0, {1.0}, m, 0, d, std::nullopt));
    model.radials.push_back(radial(1, {-1.0}, m, 0, d, std::nullopt));
    return finalize(std::move(model));
}

ChamberModel make_a2(int m, double d) {
    // Simple roots get offset d; the highest root inherits 2d so that all
    // three walls pass through O = (d, sqrt(3) d).
    const double s = std::sqrt(3.0) / 2.0;
    ChamberModel model;
    model.name = "a2";
    model.rank = 2;
    model.theorem_a = true;
    model.radials.push_back(radial(0, {1.0, 0.0}, m, 0, d, std::nullopt));
    model.radials.push_back(radial(1, {-0.5, s}, m, 0, d, std::nullopt));
    model.radials.push_back(radial(2, {0.5, s}, m, 0, 2.0 * d, std::nullopt));
    return finalize(std::move(model));
}

ChamberModel make_b2(int m_short, int m_long, double d) {
    // Simple roots e1 - e2 (long) and e2 (short) get offset d; the derived
    // positive roots e1 and e1 + e2 inherit 2d and 3d. O = (2d, d).
    ChamberModel model;
    model.name = "b2";
    model.rank = 2;
    model.theorem_a = true;
    model.radials.push_back(radial(0, {1.0, -1.0}, m_long, 0, d, std::nullopt));
    model.radials.push_back(radial(1, {0.0, 1.0}, m_short, 0, d, std::nullopt));
    model.radials.push_back(radial(2, {1.0, 0.0}, m_short, 0, 2.0 * d, std::nullopt));
    model.radials.push_back(radial(3, {1.0, 1.0}, m_long, 0, 3.0 * d, std::nullopt));
    return finalize(std::move(model));
}

namespace {

// Hermann-type action labels from the worked table of examples. Their radial
// data (roots, multiplicities, offsets) depend on the group pair and are not
// published as numbers anywhere we can cite, so these rows are templates: the
// user supplies the numeric data in an emitted skeleton.
const char* const kTemplateRows[] = {
    "so_star_2n__su_star_2n",
    "so_star_2p__su_p_p",
    "so_n_c__sl_n_c",
    "su_star_2p_u1__sp_p_p",
    "sl_n_c_so2c__sp_n_c",
    "sp_1_3__e6_2",
    "su_1_5_sl2r__e6_m14",
    "sp_4_c__e6_c",
    "su_2_6__e7_m5",
    "sl_8_c__e7_c",
    "so_16_c__e8_c",
    "sp_3_c_sl2c__f4_c",
    "sl2c_sl2c__g2_c",
};

std::vector<BuiltinInfo> build_catalog() {
    std::vector<BuiltinInfo> cat = {
        {"rank1", "rank1(m_plus,m_minus,d)", "single wall at w = d; defaults (1,0,1)", false},
        {"slab", "slab(m,d)", "opposing walls at w = +/-d, not concurrent; defaults (1,1)",
         false},
        {"a2", "a2(m,d)", "three concurrent walls, dihedral symmetry of order 6; defaults (1,1)",
         false},
        {"b2", "b2(m_short,m_long,d)",
         "four concurrent walls, dihedral symmetry of order 8; defaults (1,1,1)", false},
    };
    for (const char* row : kTemplateRows)
        cat.push_back({row, std::string(row),
                       "scenario template; radial data must be supplied by the user", true});
    return cat;
}

struct BuiltinCall {
    std::string name;
    std::vector<double> args;
};

BuiltinCall parse_call(const std::string& call) {
    BuiltinCall out;
    auto lp = call.find('(');
    if (lp == std::string::npos) {
        out.name = call;
        return out;
    }
    if (call.back() != ')') throw ValidationError("malformed builtin call: " + call);
    out.name = call.substr(0, lp);
    std::string args = call.substr(lp + 1, call.size() - lp - 2);
    std::istringstream is(args);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        try {
            out.args.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ValidationError("malformed builtin argument \"" + tok + "\" in " + call);
        }
    }
    return out;
}

double arg_at(const BuiltinCall& c, std::size_t i, double fallback) {
    return i < c.args.size() ? c.args[i] : fallback;
}

}  // namespace

const std::vector<BuiltinInfo>& builtin_catalog() {
    static const std::vector<BuiltinInfo> cat = build_catalog();
    return cat;
}

ChamberModel builtin(const std::string& call) {
    const BuiltinCall c = parse_call(call);
    if (c.name == "rank1") {
        if (c.args.size() > 3) throw ValidationError("rank1 takes (m_plus,m_minus,d)");
        return make_rank1(static_cast<int>(arg_at(c, 0, 1)), static_cast<int>(arg_at(c, 1, 0)),
                          arg_at(c, 2, 1.0));
    }
    if (c.name == "slab") {
        if (c.args.size() > 2) throw ValidationError("slab takes (m,d)");
        return make_slab(static_cast<int>(arg_at(c, 0, 1)), arg_at(c, 1, 1.0));
    }
    if (c.name == "a2") {
        if (c.args.size() > 2) throw ValidationError("a2 takes (m,d)");
        return make_a2(static_cast<int>(arg_at(c, 0, 1)), arg_at(c, 1, 1.0));
    }
    if (c.name == "b2") {
        if (c.args.size() > 3) throw ValidationError("b2 takes (m_short,m_long,d)");
        return make_b2(static_cast<int>(arg_at(c, 0, 1)), static_cast<int>(arg_at(c, 1, 1)),
                       arg_at(c, 2, 1.0));
    }
    for (const auto& info : builtin_catalog())
        if (info.is_template && info.name == c.name)
            throw ValidationError(
                "scenario template \"" + c.name +
                "\" carries no published numeric data; emit its skeleton with "
                "`catalog --emit " +
                c.name + "` and fill in roots, multiplicities and offsets");
    throw ValidationError("unknown builtin \"" + c.name + "\"");
}

std::string emit_builtin_document(const std::string& call) {
    const BuiltinCall c = parse_call(call);
    for (const auto& info : builtin_catalog()) {
        if (!info.is_template || info.name != c.name) continue;
        json doc;
        doc["name"] = info.name;
        doc["rank"] = 0;  // fill in: codimension of the orbit
        doc["theorem_a"] = true;
        doc["radials"] = json::array();  // fill in: root, m_plus, m_minus, d_plus[, d_minus]
        return doc.dump(2) + "\n";
    }
    return serialize(builtin(call));
}

}  // namespace chamberflow
