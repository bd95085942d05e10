#include "lapode/loader.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <map>
#include <sstream>

namespace lapode {

namespace {

using json = nlohmann::json;

[[noreturn]] void schema(const std::string& where, const std::string& what) {
    fail(ErrorKind::Schema, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        schema(where, "expected an object");
    }
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            schema(where, "unknown key '" + key + "'");
        }
    }
}

const json& require(const json& j, const std::string& where, const char* key) {
    if (!j.contains(key)) {
        schema(where, std::string("missing key '") + key + "'");
    }
    return j.at(key);
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        schema(where, "expected a number");
    }
    const double x = j.get<double>();
    if (!std::isfinite(x)) {
        schema(where, "expected a finite number");
    }
    return x;
}

long integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        schema(where, "expected an integer");
    }
    return j.get<long>();
}

const json& array(const json& j, const std::string& where) {
    if (!j.is_array()) {
        schema(where, "expected an array");
    }
    return j;
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) {
        schema(where, "expected a string");
    }
    return j.get<std::string>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) {
        schema(where, "expected true or false");
    }
    return j.get<bool>();
}

VectorD vector(const json& j, const std::string& where, Index expected) {
    array(j, where);
    if (static_cast<Index>(j.size()) != expected) {
        fail(ErrorKind::Dimension,
             where + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(j.size()));
    }
    VectorD v(expected);
    for (Index i = 0; i < expected; ++i) {
        v(i) = number(j[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
    }
    return v;
}

std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

/// Empty function = constant 1.
RateFn time_factor(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "sigma") {
            return [](double t) { return stratospheric_sigma(t); };
        }
        if (name == "sigma2") {
            return [](double t) { return std::pow(stratospheric_sigma(t), 2); };
        }
        if (name == "sigma3") {
            return [](double t) { return std::pow(stratospheric_sigma(t), 3); };
        }
        schema(where, "unknown time factor '" + name + "' (expected sigma, sigma2, sigma3 or a piecewise object)");
    }
    only_keys(j, where, {"piecewise"});
    const std::string pw = where + ".piecewise";
    const json& spec = require(j, where, "piecewise");
    only_keys(spec, pw, {"breaks", "values"});
    const json& jb = array(require(spec, pw, "breaks"), pw + ".breaks");
    const json& jv = array(require(spec, pw, "values"), pw + ".values");
    std::vector<double> breaks, values;
    for (std::size_t i = 0; i < jb.size(); ++i) {
        breaks.push_back(number(jb[i], at(pw + ".breaks", i)));
        if (i > 0 && !(breaks[i] > breaks[i - 1])) {
            schema(at(pw + ".breaks", i), "breaks must be strictly increasing");
        }
    }
    for (std::size_t i = 0; i < jv.size(); ++i) {
        values.push_back(number(jv[i], at(pw + ".values", i)));
    }
    if (values.size() != breaks.size() + 1) {
        fail(ErrorKind::Dimension, pw + ": need one more value than breaks");
    }
    return [breaks, values](double t) {
        const auto k = std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin();
        return values[static_cast<std::size_t>(k)];
    };
}

struct Monomial {
    double coeff = 0.0;
    std::vector<int> powers;
    RateFn factor;

    double operator()(double t, const VectorD& y) const {
        double v = coeff;
        for (std::size_t i = 0; i < powers.size(); ++i) {
            if (powers[i] > 0) {
                v *= std::pow(y(static_cast<Index>(i)), powers[i]);
            }
        }
        return factor ? v * factor(t) : v;
    }
};

Monomial monomial(const json& j, const std::string& where, Index dim, bool& timed) {
    only_keys(j, where, {"coeff", "powers", "time_factor"});
    Monomial m;
    m.coeff = number(require(j, where, "coeff"), where + ".coeff");
    if (j.contains("powers")) {
        const json& jp = array(j.at("powers"), where + ".powers");
        if (static_cast<Index>(jp.size()) != dim) {
            fail(ErrorKind::Dimension, where + ".powers: expected " + std::to_string(dim) + " entries, got " +
                                           std::to_string(jp.size()));
        }
        for (std::size_t i = 0; i < jp.size(); ++i) {
            const long p = integer(jp[i], at(where + ".powers", i));
            if (p < 0) {
                schema(at(where + ".powers", i), "powers must be nonnegative");
            }
            m.powers.push_back(static_cast<int>(p));
        }
    } else {
        m.powers.assign(static_cast<std::size_t>(dim), 0);
    }
    if (j.contains("time_factor")) {
        m.factor = time_factor(j.at("time_factor"), where + ".time_factor");
        timed = true;
    }
    return m;
}

std::vector<Monomial> monomials(const json& j, const std::string& where, Index dim, bool& timed) {
    array(j, where);
    std::vector<Monomial> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(monomial(j[i], at(where, i), dim, timed));
    }
    return out;
}

RateFn rate(const json& j, const std::string& where, bool& timed) {
    if (j.is_number()) {
        const double k = number(j, where);
        if (k < 0.0) {
            schema(where, "rate must be nonnegative");
        }
        return [k](double) { return k; };
    }
    if (j.is_string()) {
        timed = true;
        return time_factor(j, where);
    }
    only_keys(j, where, {"coeff", "time_factor"});
    const double k = number(require(j, where, "coeff"), where + ".coeff");
    if (k < 0.0) {
        schema(where + ".coeff", "rate must be nonnegative");
    }
    if (!j.contains("time_factor")) {
        return [k](double) { return k; };
    }
    timed = true;
    RateFn f = time_factor(j.at("time_factor"), where + ".time_factor");
    return [k, f](double t) { return k * f(t); };
}

Index one_based(const json& j, const std::string& where, Index dim) {
    const long v = integer(j, where);
    if (v < 1 || v > dim) {
        fail(ErrorKind::Dimension, where + ": index " + std::to_string(v) + " outside 1.." + std::to_string(dim));
    }
    return static_cast<Index>(v - 1);
}

struct Entry {
    Index row;
    Index col;
    std::vector<Monomial> terms;
};

void matrix_template(const json& sys, const std::string& where, Problem& p, LoadedProblem& out, bool& timed) {
    only_keys(sys, where, {"kind", "entries", "rhs"});
    const Index d = p.dim;
    const std::string we = where + ".entries";
    const json& je = array(require(sys, where, "entries"), we);
    auto entries = std::make_shared<std::vector<Entry>>();
    for (std::size_t k = 0; k < je.size(); ++k) {
        const std::string w = at(we, k);
        only_keys(je[k], w, {"row", "col", "monomials"});
        Entry e{one_based(require(je[k], w, "row"), w + ".row", d), one_based(require(je[k], w, "col"), w + ".col", d),
                monomials(require(je[k], w, "monomials"), w + ".monomials", d, timed)};
        entries->push_back(std::move(e));
    }
    p.matrix_fn = [entries, d](double t, const VectorD& y) {
        MatrixD a = MatrixD::Zero(d, d);
        for (const auto& e : *entries) {
            for (const auto& m : e.terms) {
                a(e.row, e.col) += m(t, y);
            }
        }
        return a;
    };
    if (sys.contains("rhs")) {
        const std::string wr = where + ".rhs";
        const json& jr = array(sys.at("rhs"), wr);
        if (static_cast<Index>(jr.size()) != d) {
            fail(ErrorKind::Dimension, wr + ": expected " + std::to_string(d) + " components, got " +
                                           std::to_string(jr.size()));
        }
        auto comps = std::make_shared<std::vector<std::vector<Monomial>>>();
        for (std::size_t i = 0; i < jr.size(); ++i) {
            comps->push_back(monomials(jr[i], at(wr, i), d, timed));
        }
        out.rhs = [comps, d](double t, const VectorD& y) {
            VectorD f = VectorD::Zero(d);
            for (Index i = 0; i < d; ++i) {
                for (const auto& m : (*comps)[static_cast<std::size_t>(i)]) {
                    f(i) += m(t, y);
                }
            }
            return f;
        };
    }
}

std::vector<int> orders(const json& j, const std::string& where, const std::map<std::string, Index>& index, Index m) {
    if (!j.is_object()) {
        schema(where, "expected an object mapping species to orders");
    }
    std::vector<int> v(static_cast<std::size_t>(m), 0);
    for (const auto& [name, order] : j.items()) {
        const auto it = index.find(name);
        if (it == index.end()) {
            schema(where, "unknown species '" + name + "'");
        }
        const long o = integer(order, where + "." + name);
        if (o < 0) {
            schema(where + "." + name, "orders must be nonnegative");
        }
        v[static_cast<std::size_t>(it->second)] = static_cast<int>(o);
    }
    return v;
}

void reaction_network(const json& sys, const std::string& where, Problem& p, LoadedProblem& out, bool& timed) {
    only_keys(sys, where, {"kind", "species", "reactions"});
    const std::string ws = where + ".species";
    const json& js = array(require(sys, where, "species"), ws);
    if (js.empty()) {
        schema(ws, "species list is empty");
    }
    ReactionNetwork net;
    std::map<std::string, Index> index;
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string name = text(js[i], at(ws, i));
        if (name.empty() || !index.emplace(name, static_cast<Index>(i)).second) {
            schema(at(ws, i), "species names must be non-empty and unique");
        }
        net.species_names.push_back(name);
    }
    net.species = static_cast<Index>(js.size());
    if (net.species != p.dim) {
        fail(ErrorKind::Dimension, ws + ": " + std::to_string(net.species) + " species but dim is " +
                                       std::to_string(p.dim));
    }
    const std::string wr = where + ".reactions";
    const json& jr = array(require(sys, where, "reactions"), wr);
    if (jr.empty()) {
        schema(wr, "no reactions");
    }
    for (std::size_t j = 0; j < jr.size(); ++j) {
        const std::string w = at(wr, j);
        only_keys(jr[j], w, {"reactants", "products", "rate"});
        auto r = orders(require(jr[j], w, "reactants"), w + ".reactants", index, net.species);
        auto q = orders(require(jr[j], w, "products"), w + ".products", index, net.species);
        net.add(std::move(r), std::move(q), rate(require(jr[j], w, "rate"), w + ".rate", timed));
    }
    net.time_dependent = timed;
    std::shared_ptr<const MassActionLaplacian> l;
    try {
        l = std::make_shared<const MassActionLaplacian>(net);
    } catch (const Error& e) {
        throw Error(e.kind(), where + ": " + e.what());
    }
    p.matrix_fn = [l](double t, const VectorD& y) { return (*l)(t, y); };
    out.rhs = [l](double t, const VectorD& y) { return l->network().rhs(t, y); };
}

}  // namespace

LoadedProblem parse_problem(const std::string& contents, const std::string& origin, bool allow_nonlaplacian) {
    json doc;
    try {
        doc = json::parse(contents);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Schema, origin + ": invalid JSON (" + std::string(e.what()) + ")");
    }
    const std::string& w = origin;
    only_keys(doc, w, {"name", "description", "dim", "autonomous", "strict", "y0", "tspan", "conservation",
                       "controls", "system"});
    LoadedProblem out;
    ModelEntry& e = out.entry;
    Problem& p = e.problem;
    e.id = text(require(doc, w, "name"), w + ".name");
    if (e.id.empty()) {
        schema(w + ".name", "name must be non-empty");
    }
    p.name = e.id;
    e.description = doc.contains("description") ? text(doc.at("description"), w + ".description") : "loaded from " + origin;
    const long dim = integer(require(doc, w, "dim"), w + ".dim");
    if (dim < 1) {
        schema(w + ".dim", "dim must be positive");
    }
    p.dim = static_cast<Index>(dim);
    p.y0 = vector(require(doc, w, "y0"), w + ".y0", p.dim);
    const VectorD span = vector(require(doc, w, "tspan"), w + ".tspan", 2);
    p.t0 = span(0);
    p.tf = span(1);
    if (!(p.t0 <= p.tf)) {
        schema(w + ".tspan", "need t0 <= tf");
    }
    if (doc.contains("strict")) {
        p.strict = boolean(doc.at("strict"), w + ".strict");
    }
    if (doc.contains("conservation")) {
        const std::string wc = w + ".conservation";
        const json& jc = array(doc.at("conservation"), wc);
        for (std::size_t k = 0; k < jc.size(); ++k) {
            const std::string wk = at(wc, k);
            only_keys(jc[k], wk, {"label", "w"});
            const std::string label =
                jc[k].contains("label") ? text(jc[k].at("label"), wk + ".label") : "w" + std::to_string(k + 1);
            try {
                p.conservation.emplace_back(vector(require(jc[k], wk, "w"), wk + ".w", p.dim), label);
            } catch (const Error& err) {
                if (err.kind() != ErrorKind::Domain) {
                    throw;
                }
                schema(wk + ".w", err.what());
            }
        }
    }

    const std::string wsys = w + ".system";
    const json& sys = require(doc, w, "system");
    if (!sys.is_object()) {
        schema(wsys, "expected an object");
    }
    const std::string kind = text(require(sys, wsys, "kind"), wsys + ".kind");
    bool timed = false;
    if (kind == "matrix-template") {
        matrix_template(sys, wsys, p, out, timed);
    } else if (kind == "reaction-network") {
        reaction_network(sys, wsys, p, out, timed);
    } else {
        schema(wsys + ".kind", "unknown system kind '" + kind + "' (expected matrix-template or reaction-network)");
    }
    out.kind = kind;
    p.autonomous = !timed;
    if (doc.contains("autonomous")) {
        const bool declared = boolean(doc.at("autonomous"), w + ".autonomous");
        if (declared && timed) {
            schema(w + ".autonomous", "declared autonomous but the system has time factors");
        }
        p.autonomous = declared;
    }

    const double span_len = p.tf - p.t0;
    e.controls = {span_len > 0.0 ? span_len / 8.0 : 1.0, 6, {}};
    if (doc.contains("controls")) {
        const std::string wc = w + ".controls";
        const json& jc = doc.at("controls");
        only_keys(jc, wc, {"h0", "levels", "components"});
        if (jc.contains("h0")) {
            e.controls.h0 = number(jc.at("h0"), wc + ".h0");
            if (!(e.controls.h0 > 0.0)) {
                schema(wc + ".h0", "h0 must be positive");
            }
        }
        if (jc.contains("levels")) {
            const long lv = integer(jc.at("levels"), wc + ".levels");
            if (lv < 1) {
                schema(wc + ".levels", "levels must be positive");
            }
            e.controls.levels = static_cast<int>(lv);
        }
        if (jc.contains("components")) {
            const json& comp = array(jc.at("components"), wc + ".components");
            for (std::size_t i = 0; i < comp.size(); ++i) {
                e.controls.error_components.push_back(one_based(comp[i], at(wc + ".components", i), p.dim));
            }
        }
    }

    try {
        p.validate(kDefaultLaplacianTol, allow_nonlaplacian);
    } catch (const Error& err) {
        throw Error(err.kind(), origin + ": " + err.what());
    }
    return out;
}

LoadedProblem load_problem(const std::string& path, bool allow_nonlaplacian) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorKind::Io, "cannot open problem file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        fail(ErrorKind::Io, "cannot read problem file '" + path + "'");
    }
    return parse_problem(buf.str(), path, allow_nonlaplacian);
}

ProblemCheck check_problem(const LoadedProblem& lp, int samples, std::uint64_t seed, double residual_tol) {
    if (samples < 1) {
        fail(ErrorKind::Usage, "check_problem: need at least one sample");
    }
    const Problem& p = lp.entry.problem;
    ProblemCheck out;
    const double top = p.y0.maxCoeff();
    const VectorD scale = top > 0.0 ? VectorD(p.y0.cwiseMax(1e-3 * top)) : VectorD(VectorD::Ones(p.dim));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto where = [](double t, const VectorD& y) {
        std::ostringstream os;
        os.precision(6);
        os << "t = " << t << ", y = [";
        for (Index i = 0; i < y.size(); ++i) {
            os << (i ? ", " : "") << y(i);
        }
        os << "]";
        return os.str();
    };
    for (int n = 0; n < samples; ++n) {
        VectorD y(p.dim);
        for (Index i = 0; i < p.dim; ++i) {
            y(i) = 2.0 * scale(i) * u(rng);
        }
        const double t = p.t0 + (p.tf - p.t0) * u(rng);
        const MatrixD a = p.matrix(t, y);
        const auto sign = validate_laplacian(a, false);
        if (!sign.ok && out.sign_ok) {
            out.sign_ok = false;
            out.first_failure = where(t, y) + ": " + sign.describe();
        }
        if (p.strict && sign.ok) {
            const auto strict = validate_laplacian(a, true);
            if (!strict.ok && out.strict_ok) {
                out.strict_ok = false;
                if (out.first_failure.empty()) {
                    out.first_failure = where(t, y) + ": " + strict.describe();
                }
            }
        }
    }
    if (lp.rhs) {
        out.representation = verify_representation(
            *lp.rhs, [&p](double t, const VectorD& y) { return p.matrix(t, y); }, p.dim, samples, seed, p.t0, p.tf,
            scale);
        out.representation_ok = out.representation->max_residual <= residual_tol;
        if (!out.representation_ok && out.first_failure.empty()) {
            out.first_failure = where(out.representation->worst_t, out.representation->worst_y) +
                                ": right-hand side and matrix form disagree (relative residual " +
                                std::to_string(out.representation->max_residual) + ")";
        }
    }
    return out;
}

}  // namespace lapode
