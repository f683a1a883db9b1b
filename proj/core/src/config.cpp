#include "relids/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace relids {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& reason) {
    throw ConfigError("config field '" + field + "': " + reason);
}

double get_number(const json& j, const std::string& field, double fallback,
                  bool required = false) {
    if (!j.contains(field)) {
        if (required) fail(field, "missing");
        return fallback;
    }
    if (!j.at(field).is_number()) fail(field, "expected a number");
    return j.at(field).get<double>();
}

SmallMatrix parse_matrix(const json& j, int d, const std::string& field) {
    if (!j.is_array() || static_cast<int>(j.size()) != d) fail(field, "expected a d x d array");
    SmallMatrix m = SmallMatrix::zero(d);
    for (int i = 0; i < d; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != d)
            fail(field, "expected a d x d array");
        for (int k = 0; k < d; ++k) m.at(i, k) = j[i][k].get<double>();
    }
    return m;
}

std::function<double(const Point&)> parse_scalar_field(const json& j, int d,
                                                       const std::string& field) {
    if (j.is_null()) return [](const Point&) { return 0.0; };
    const std::string type = j.value("type", "");
    if (type == "zero") return [](const Point&) { return 0.0; };
    if (type == "constant") {
        const double v = get_number(j, "value", 0.0, true);
        if (v < 0.0) fail(field + ".value", "potential parts must be nonnegative");
        return [v](const Point&) { return v; };
    }
    if (type == "gaussian") {
        const double amp = get_number(j, "amp", 1.0);
        const double width = get_number(j, "width", 1.0);
        if (amp < 0.0) fail(field + ".amp", "must be nonnegative");
        if (width <= 0.0) fail(field + ".width", "must be positive");
        Point center(d, 0.0);
        if (j.contains("center")) {
            if (!j["center"].is_array() || static_cast<int>(j["center"].size()) != d)
                fail(field + ".center", "expected a d-vector");
            for (int c = 0; c < d; ++c) center[c] = j["center"][c].get<double>();
        }
        return [amp, width, center](const Point& x) {
            double r2 = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c)
                r2 += (x[c] - center[c]) * (x[c] - center[c]);
            return amp * std::exp(-r2 / (width * width));
        };
    }
    if (type == "cosine") {
        // amp * (offset + prod_c cos(2 pi x_c / period_c)); requires offset >= 1
        const double amp = get_number(j, "amp", 1.0);
        const double offset = get_number(j, "offset", 2.0);
        if (amp < 0.0) fail(field + ".amp", "must be nonnegative");
        if (offset < 1.0) fail(field + ".offset", "must be >= 1 to keep the part nonnegative");
        if (!j.contains("period") || !j["period"].is_array() ||
            static_cast<int>(j["period"].size()) != d)
            fail(field + ".period", "expected a d-vector of periods");
        Point period(d);
        for (int c = 0; c < d; ++c) {
            period[c] = j["period"][c].get<double>();
            if (period[c] <= 0.0) fail(field + ".period", "periods must be positive");
        }
        return [amp, offset, period](const Point& x) {
            double prod = 1.0;
            for (std::size_t c = 0; c < x.size(); ++c)
                prod *= std::cos(2.0 * M_PI * x[c] / period[c]);
            return amp * (offset + prod);
        };
    }
    fail(field + ".type", "unknown scalar field type '" + type + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    RunConfig cfg;
    cfg.d = static_cast<int>(get_number(j, "d", 2));
    if (cfg.d < 2 || cfg.d > 3) fail("d", "dimension must be 2 or 3");
    cfg.L = get_number(j, "L", 16.0);
    if (!(cfg.L > 0.0)) fail("L", "box side must be positive");
    cfg.N = static_cast<int>(get_number(j, "N", 32));
    if (cfg.N < 4 || cfg.N % 2 != 0) fail("N", "points per axis must be an even integer >= 4");
    cfg.budget = static_cast<std::int64_t>(get_number(j, "budget", kDefaultMatrixBudget));
    double total = 1.0;
    for (int c = 0; c < cfg.d; ++c) total *= cfg.N;
    if (total > static_cast<double>(cfg.budget)) {
        std::ostringstream os;
        os << "N^d = " << total << " exceeds the matrix budget " << cfg.budget;
        throw BudgetError(os.str());
    }
    cfg.quad_order = static_cast<int>(get_number(j, "quad_order", 16));
    if (cfg.quad_order < 2 || cfg.quad_order > 128) fail("quad_order", "expected 2..128");

    // field
    cfg.field = make_zero_field(cfg.d, cfg.quad_order);
    if (j.contains("field")) {
        const json& f = j["field"];
        SmallMatrix b0 = SmallMatrix::zero(cfg.d);
        if (f.contains("b")) {
            if (cfg.d != 2) fail("field.b", "scalar shorthand is d = 2 only");
            const double b = f["b"].get<double>();
            b0.at(0, 1) = b;
            b0.at(1, 0) = -b;
        } else if (f.contains("constant")) {
            b0 = parse_matrix(f["constant"], cfg.d, "field.constant");
            for (int a = 0; a < cfg.d; ++a)
                for (int c = 0; c < cfg.d; ++c)
                    if (b0.at(a, c) + b0.at(c, a) != 0.0)
                        fail("field.constant", "matrix must be antisymmetric");
        }
        SmallMatrix lattice = SmallMatrix::zero(cfg.d);
        for (int c = 0; c < cfg.d; ++c) lattice.at(c, c) = get_number(f, "cell", 2.0);
        if (f.contains("lattice")) lattice = parse_matrix(f["lattice"], cfg.d, "field.lattice");
        std::vector<FieldMode> modes;
        if (f.contains("modes")) {
            if (!f["modes"].is_array()) fail("field.modes", "expected an array");
            for (std::size_t i = 0; i < f["modes"].size(); ++i) {
                const json& m = f["modes"][i];
                if (!m.contains("m") || !m["m"].is_array() ||
                    static_cast<int>(m["m"].size()) != cfg.d)
                    fail("field.modes.m", "expected an integer d-vector");
                std::vector<int> mi(cfg.d);
                for (int c = 0; c < cfg.d; ++c) mi[c] = m["m"][c].get<int>();
                const SmallMatrix amp = parse_matrix(m["amp"], cfg.d, "field.modes.amp");
                for (int a = 0; a < cfg.d; ++a)
                    for (int c = 0; c < cfg.d; ++c)
                        if (amp.at(a, c) + amp.at(c, a) != 0.0)
                            fail("field.modes.amp", "matrix must be antisymmetric");
                modes.push_back(FieldMode{lattice_dual_frequency(lattice, mi), amp,
                                          get_number(m, "phase", 0.0)});
            }
        }
        cfg.field = make_field(cfg.d, b0, std::move(modes), lattice, cfg.quad_order);
    }

    // potential
    cfg.potential = make_zero_potential(cfg.d);
    if (j.contains("potential")) {
        const json& p = j["potential"];
        cfg.potential.v_plus = parse_scalar_field(p.value("plus", json()), cfg.d, "potential.plus");
        cfg.potential.v_minus =
            parse_scalar_field(p.value("minus", json()), cfg.d, "potential.minus");
        cfg.potential.periodic = p.value("periodic", false);
        cfg.potential.lattice = cfg.field.lattice;
    }

    cfg.epsilon = get_number(j, "epsilon", 0.01);
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) fail("epsilon", "need 0 < epsilon < 1");
    cfg.n_paths = static_cast<std::int64_t>(get_number(j, "n_paths", 10000));
    if (cfg.n_paths < 100) fail("n_paths", "need at least 100 paths");
    if (j.contains("seed")) {
        // read as an integer: a detour through double would round large seeds
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            fail("seed", "expected an unsigned integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }

    if (j.contains("boxes")) {
        cfg.box_sides.clear();
        for (const auto& s : j["boxes"]) cfg.box_sides.push_back(s.get<double>());
        for (std::size_t i = 1; i < cfg.box_sides.size(); ++i)
            if (!(cfg.box_sides[i] > cfg.box_sides[i - 1]))
                fail("boxes", "sides must be strictly increasing");
    }
    if (j.contains("box_offset")) {
        for (const auto& s : j["box_offset"]) cfg.box_offset.push_back(s.get<double>());
        if (static_cast<int>(cfg.box_offset.size()) != cfg.d)
            fail("box_offset", "expected a d-vector");
    }
    if (j.contains("lambdas")) {
        cfg.lambdas.clear();
        for (const auto& s : j["lambdas"]) cfg.lambdas.push_back(s.get<double>());
    }
    if (j.contains("tents")) {
        cfg.tents.clear();
        for (const auto& t : j["tents"]) {
            if (!t.is_array() || t.size() != 2) fail("tents", "expected [center, half_width] pairs");
            cfg.tents.emplace_back(t[0].get<double>(), t[1].get<double>());
        }
    }

    if (j.contains("study")) {
        const json& s = j["study"];
        cfg.study.lambda_shift = get_number(s, "lambda_shift", 2.0);
        cfg.study.r = get_number(s, "r", static_cast<double>(cfg.d + 1));
        cfg.study.m = static_cast<int>(get_number(s, "m", 4 * (cfg.d + 1)));
        if (cfg.study.m < 2) fail("study.m", "need m >= 2");
    } else {
        cfg.study.r = static_cast<double>(cfg.d + 1);
        cfg.study.m = 4 * (cfg.d + 1);
    }

    if (j.contains("kernel")) {
        const json& k = j["kernel"];
        if (k.contains("t_list")) {
            cfg.kernel.t_list.clear();
            for (const auto& t : k["t_list"]) {
                const double tv = t.get<double>();
                if (!(tv > 0.0)) fail("kernel.t_list", "times must be positive");
                cfg.kernel.t_list.push_back(tv);
            }
        }
        cfg.kernel.r_max = get_number(k, "r_max", 20.0);
        cfg.kernel.samples = static_cast<int>(get_number(k, "samples", 200));
        if (cfg.kernel.samples < 2) fail("kernel.samples", "need at least 2 samples");
    }

    cfg.fk.probes = {Point(cfg.d, 0.0)};
    if (j.contains("fk")) {
        const json& f = j["fk"];
        cfg.fk.t = get_number(f, "t", 0.5);
        if (!(cfg.fk.t > 0.0)) fail("fk.t", "horizon must be positive");
        if (f.contains("probes")) {
            cfg.fk.probes.clear();
            for (const auto& p : f["probes"]) {
                if (!p.is_array() || static_cast<int>(p.size()) != cfg.d)
                    fail("fk.probes", "expected d-vectors");
                Point q(cfg.d);
                for (int c = 0; c < cfg.d; ++c) q[c] = p[c].get<double>();
                cfg.fk.probes.push_back(std::move(q));
            }
        }
    }

    cfg.cell_side = get_number(j, "cell", 2.0);
    if (!(cfg.cell_side > 0.0)) fail("cell", "cell side must be positive");
    cfg.out_dir = j.value("out", "out");

    // canonical echo: defaults resolved, keys sorted by nlohmann's object order
    json echo;
    echo["d"] = cfg.d;
    echo["L"] = cfg.L;
    echo["N"] = cfg.N;
    echo["budget"] = cfg.budget;
    echo["quad_order"] = cfg.quad_order;
    echo["epsilon"] = cfg.epsilon;
    echo["n_paths"] = cfg.n_paths;
    echo["seed"] = cfg.seed;
    echo["boxes"] = cfg.box_sides;
    if (!cfg.box_offset.empty()) echo["box_offset"] = cfg.box_offset;
    echo["lambdas"] = cfg.lambdas;
    echo["tents"] = cfg.tents;
    echo["study"] = {{"lambda_shift", cfg.study.lambda_shift},
                     {"r", cfg.study.r},
                     {"m", cfg.study.m}};
    echo["kernel"] = {{"t_list", cfg.kernel.t_list},
                      {"r_max", cfg.kernel.r_max},
                      {"samples", cfg.kernel.samples}};
    echo["fk"] = {{"t", cfg.fk.t}, {"probes", cfg.fk.probes}};
    echo["cell"] = cfg.cell_side;
    echo["out"] = cfg.out_dir;
    if (j.contains("field")) echo["field"] = j["field"];
    if (j.contains("potential")) echo["potential"] = j["potential"];
    cfg.resolved_json = echo.dump(2) + "\n";
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

}  // namespace relids
