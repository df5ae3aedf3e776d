#pragma once

// Command-line front end. Output goes to `out` (JSON by default, CSV for
// tables), diagnostics to `err`. Exit codes: 0 ok, 1 usage, 2 precision or
// convergence failure, 3 failed check suite or internal inconsistency.

#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cuspmi/checks.hpp"

namespace cuspmi::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* config_env = "CUSPMI_CONFIG";
inline constexpr const char* default_config_file = "cuspmi.conf";

enum Exit : int { ok = 0, usage = 1, precision = 2, check_failed = 3 };

/// Everything that determines a run; embedded verbatim in each output.
struct RunConfig {
    std::int64_t C = 40;
    std::int64_t D = 400;
    std::size_t N = 120;
    int M = 64;
    double h = 1e-3;
    double tol = 1e-6;
    double fd_tol = 1e-4;
    std::string form = "delta";
    int r = 10;
    int s = 10;
    double x = 0.0;
    double y = 2.0;
    std::string sign = "plus";
    std::string format = "json";
    unsigned threads = 1;

    cplx z() const { return {x, y}; }
    Sign sign_value() const { return sign == "minus" ? Sign::Minus : Sign::Plus; }
    BiWeight weights() const { return BiWeight::make(r, s); }
    TruncationParams trunc() const {
        TruncationParams t;
        t.C = C;
        t.D = D;
        t.N = N;
        t.M = M;
        t.h = h;
        t.tol = tol;
        t.threads = threads;
        return t;
    }
    json to_json() const {
        return {{"C", C},         {"D", D},       {"N", N},       {"M", M},           {"h", h},
                {"tol", tol},     {"fd_tol", fd_tol}, {"form", form}, {"r", r},         {"s", s},
                {"z", {x, y}},    {"sign", sign}, {"format", format}, {"threads", threads}};
    }
};

inline json to_json(cplx v) { return json::array({v.real(), v.imag()}); }
inline json to_json(const std::vector<cplx>& v) {
    json a = json::array();
    for (const auto& c : v) a.push_back(to_json(c));
    return a;
}
inline json to_json(const PolyC& p) { return to_json(p.coeffs()); }
inline json to_json(const TruncationParams& t) {
    return {{"C", t.C}, {"D", t.D}, {"N", t.N}, {"M", t.M}, {"h", t.h}, {"tol", t.tol}, {"threads", t.threads}};
}

/// Command result: a JSON document plus an optional table for CSV output.
struct Output {
    json doc = json::object();
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int code = Exit::ok;
};

inline std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void add_poly_rows(Output& o, const std::vector<cplx>& v) {
    o.header = {"degree", "re", "im"};
    for (std::size_t i = 0; i < v.size(); ++i) o.rows.push_back({std::to_string(i), num(v[i].real()), num(v[i].imag())});
}

/// A word over S, T and t = T^{-1}, or four integers "a,b,c,d".
inline GroupElement parse_gamma(const std::string& text) {
    if (text.find(',') != std::string::npos) {
        std::vector<std::int64_t> v;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t used = 0;
            v.push_back(std::stoll(item, &used));
            if (used != item.size()) throw std::invalid_argument("gamma: bad integer '" + item + "'");
        }
        if (v.size() != 4) throw std::invalid_argument("gamma: expected a,b,c,d");
        return GroupElement::make(v[0], v[1], v[2], v[3]);
    }
    GroupElement g = GroupElement::identity();
    for (char ch : text) {
        if (ch == 'S') g = g * GroupElement::S();
        else if (ch == 'T') g = g * GroupElement::T();
        else if (ch == 't') g = g * GroupElement::T_inv();
        else throw std::invalid_argument(std::string("gamma: unknown letter '") + ch + "'");
    }
    return g;
}

inline json gamma_json(const GroupElement& g) { return json::array({g.a, g.b, g.c, g.d}); }

inline QExpansion load_form(const RunConfig& c) { return form_by_name(c.form, c.N); }

inline QExpansion load_cusp_form(const RunConfig& c) {
    QExpansion f = load_form(c);
    if (!f.is_cusp()) throw std::invalid_argument("form '" + c.form + "' is not a cusp form");
    return f;
}

inline Output cmd_forms(const RunConfig& c, std::size_t count) {
    const QExpansion f = load_form(c);
    count = std::min(count, f.N());
    Output o;
    json exact = json::array(), dbl = json::array();
    o.header = {"n", "a_n"};
    for (std::size_t n = 0; n <= count; ++n) {
        std::ostringstream os;
        os << f.coeff(n);
        exact.push_back(os.str());
        dbl.push_back(f.coeffs_double()[n]);
        o.rows.push_back({std::to_string(n), os.str()});
    }
    o.doc["form"] = c.form;
    o.doc["weight"] = f.weight();
    o.doc["cusp"] = f.is_cusp();
    o.doc["coeffs"] = exact;
    o.doc["coeffs_double"] = dbl;
    o.doc["tail"] = 0.0;
    return o;
}

inline Output cmd_eval(const RunConfig& c) {
    const QExpansion f = load_form(c);
    const auto v = eval_form(f, c.z());
    Output o;
    o.doc["form"] = c.form;
    o.doc["z"] = to_json(c.z());
    o.doc["value"] = to_json(v.value);
    o.doc["tail"] = v.tail;
    return o;
}

inline Output cmd_period(const RunConfig& c, const std::string& gamma) {
    const QExpansion f = load_cusp_form(c);
    const GroupElement g = parse_gamma(gamma);
    const Sign sg = c.sign_value();
    const PolyC p = PeriodCocycle(f, sg)(g);
    // r(S) is the only quadrature; its primitive tail bounds the rest up to the word length.
    const double tail = centred_primitives(f, cplx(0.0, 1.0), f.weight() - 2).tail;
    Output o;
    o.doc["form"] = c.form;
    o.doc["gamma"] = gamma_json(g);
    o.doc["word"] = word_decompose(g).str();
    o.doc["sign"] = c.sign;
    o.doc["coeffs"] = to_json(p);
    o.doc["tail"] = tail;
    add_poly_rows(o, p.coeffs());
    return o;
}

inline Output cmd_lvalue(const RunConfig& c, int s, std::int64_t p, std::int64_t q, const std::string& method) {
    const QExpansion f = load_cusp_form(c);
    const LMethod m = method == "series" ? LMethod::Series : method == "extraction" ? LMethod::Extraction : LMethod::Auto;
    const QExpansion flong = form_by_name(c.form, std::max<std::size_t>(c.N, 1024));
    const PeriodCocycle rc(f);
    const LValue v = twisted_L(m == LMethod::Extraction ? f : flong, s, p, q, m, &rc);
    double err = 0.0;
    if (v.method == LMethod::Series) {
        // change when the smoothed sum is cut at half the length
        const cplx half = twisted_L(flong.truncated(flong.N() / 2), s, p, q, LMethod::Series).value;
        err = std::abs(half - v.value);
    } else {
        err = centred_primitives(f, cplx(0.0, 1.0), f.weight() - 2).tail * rc.r_S().max_abs();
    }
    Output o;
    o.doc["form"] = c.form;
    o.doc["s"] = s;
    o.doc["twist"] = json::array({p, q});
    o.doc["method"] = method_name(v.method);
    o.doc["value"] = to_json(v.value);
    o.doc["tail"] = err;
    return o;
}

inline Output cmd_eisenstein(const RunConfig& c) {
    const auto v = eisenstein_rs(c.weights(), c.z(), c.trunc());
    Output o;
    o.doc["weights"] = json::array({c.r, c.s});
    o.doc["z"] = to_json(c.z());
    o.doc["value"] = to_json(v.value);
    o.doc["tail"] = v.tail_estimate;
    o.doc["trunc"] = to_json(v.trunc);
    return o;
}

inline Output cmd_phi(const RunConfig& c) {
    const QExpansion f = load_cusp_form(c);
    const auto t = c.trunc();
    t.validate(c.z());
    const SeriesContext ctx(f, t.C);
    const auto v = phi(ctx, c.weights(), c.sign_value(), c.z(), t);
    const auto basis = coeff_decompose(v.value, c.z(), f.weight());
    Output o;
    o.doc["form"] = c.form;
    o.doc["weights"] = json::array({c.r, c.s});
    o.doc["sign"] = c.sign;
    o.doc["z"] = to_json(c.z());
    o.doc["coeffs"] = to_json(v.value);
    o.doc["tail"] = v.tail_estimate;
    o.doc["basis_coeffs"] = to_json(basis);
    o.doc["basis_tail"] = v.tail_estimate * decompose_gain(c.z(), f.weight());
    o.doc["trunc"] = to_json(v.trunc);
    o.header = {"degree", "re", "im", "basis_re", "basis_im"};
    for (std::size_t i = 0; i < basis.size(); ++i)
        o.rows.push_back({std::to_string(i), num(v.value[i].real()), num(v.value[i].imag()), num(basis[i].real()),
                          num(basis[i].imag())});
    return o;
}

inline Output cmd_fourier(const RunConfig& c, std::optional<int> j_opt, const std::vector<int>& modes) {
    const QExpansion f = load_cusp_form(c);
    const int j = j_opt.value_or(f.weight() - 2);
    const auto t = c.trunc();
    t.validate(cplx(1.0, c.y));
    const SeriesContext ctx(f, t.C);
    const Sign sg = c.sign_value();
    const auto coef = [&](cplx z) { return psi_series_coefficient(ctx, c.weights(), sg, j, z, t).value; };
    const auto at = psi_series_coefficient(ctx, c.weights(), sg, j, cplx(0.0, c.y), t);
    Output o;
    json arr = json::array();
    o.header = {"l", "re", "im"};
    for (int l : modes) {
        const cplx a = fourier_coefficient(coef, l, c.y, c.M);
        arr.push_back({{"l", l}, {"value", to_json(a)}});
        o.rows.push_back({std::to_string(l), num(a.real()), num(a.imag())});
    }
    o.doc["form"] = c.form;
    o.doc["weights"] = json::array({c.r, c.s});
    o.doc["sign"] = c.sign;
    o.doc["j"] = j;
    o.doc["y"] = c.y;
    o.doc["coeffs"] = arr;
    o.doc["tail"] = at.tail_estimate;
    o.doc["trunc"] = to_json(t);
    return o;
}

inline Output cmd_iterated(const RunConfig& c, int depth) {
    if (depth < 1 || depth > 3) throw std::invalid_argument("iterated: depth must be 1, 2 or 3");
    const QExpansion f = load_cusp_form(c);
    const IteratedIntegrand data(std::vector<QExpansion>(std::size_t(depth - 1), f));
    const auto v = iterated_F(data, c.z());
    Output o;
    o.doc["depth"] = depth;
    o.doc["forms"] = std::vector<std::string>(std::size_t(depth - 1), c.form);
    o.doc["weights"] = data.weights();
    o.doc["z"] = to_json(c.z());
    o.header = {"i", "j", "re", "im"};
    if (depth == 3) {
        const auto& dims = v.value.degree_bounds();
        json rows = json::array();
        for (std::size_t i = 0; i <= dims[0]; ++i) {
            json row = json::array();
            for (std::size_t jj = 0; jj <= dims[1]; ++jj) {
                const cplx a = v.value.at(i, jj);
                row.push_back(to_json(a));
                o.rows.push_back({std::to_string(i), std::to_string(jj), num(a.real()), num(a.imag())});
            }
            rows.push_back(row);
        }
        o.doc["coeffs"] = rows;
    } else {
        const PolyC p = depth == 2 ? v.value.as_poly() : PolyC(std::vector<cplx>{v.value.flat(0)});
        o.doc["coeffs"] = to_json(p);
        for (std::size_t i = 0; i < p.size(); ++i)
            o.rows.push_back({std::to_string(i), "0", num(p[i].real()), num(p[i].imag())});
    }
    o.doc["tail"] = v.tail;
    if (depth >= 2) {
        const auto F = [&](cplx z) { return iterated_F(data, z).value; };
        const auto rep = order_check(F, depth, {GroupElement::S(), GroupElement::T() * GroupElement::S()},
                                     {cplx(0, 1), cplx(1, 2)}, data.weights());
        o.doc["order_check"] = {{"order", depth}, {"base_points", {to_json(cplx(0, 1)), to_json(cplx(1, 2))}},
                                {"worst_residual", rep.worst}};
    }
    return o;
}

inline Output cmd_dim(int k, int k1, std::optional<int> table) {
    Output o;
    if (table) {
        json rows = json::array();
        o.header = {"k", "k1", "dim_Mk_rho", "dim_M2c"};
        for (const auto& row : dim_table(*table)) {
            rows.push_back({{"k", row.k}, {"k1", row.k1}, {"dim_Mk_rho", row.mk_rho}, {"dim_M2c", row.m2c}});
            o.rows.push_back({std::to_string(row.k), std::to_string(row.k1), std::to_string(row.mk_rho),
                              std::to_string(row.m2c)});
        }
        o.doc["kmax"] = *table;
        o.doc["rows"] = rows;
        return o;
    }
    o.doc["k"] = k;
    o.doc["k1"] = k1;
    o.doc["dim_Mk_rho"] = dim_Mk_rho(k, k1);
    o.doc["dim_M2c"] = dim_M2c(k, k1);
    o.header = {"k", "k1", "dim_Mk_rho", "dim_M2c"};
    o.rows.push_back({std::to_string(k), std::to_string(k1), o.doc["dim_Mk_rho"].dump(), o.doc["dim_M2c"].dump()});
    return o;
}

inline Output cmd_check(const RunConfig& c, const std::string& suite) {
    CheckConfig cc;
    cc.form = c.form;
    cc.w = c.weights();
    cc.z = c.z();
    cc.trunc = c.trunc();
    cc.fd = FDScheme::central4(c.h);
    cc.fd_tol = c.fd_tol;
    const CheckResult r = run_check(suite, cc);
    Output o;
    json items = json::array();
    o.header = {"label", "residual", "bound", "passed"};
    for (const auto& it : r.items) {
        items.push_back({{"label", it.label}, {"residual", it.residual}, {"bound", it.bound}, {"passed", it.passed()}});
        o.rows.push_back({it.label, num(it.residual), num(it.bound), it.passed() ? "true" : "false"});
    }
    o.doc["suite"] = suite;
    o.doc["passed"] = r.passed();
    o.doc["items"] = items;
    o.code = r.passed() ? Exit::ok : Exit::check_failed;
    return o;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

inline void write(const Output& o, const RunConfig& c, const std::string& command, std::ostream& out) {
    if (c.format == "csv") {
        std::vector<std::string> header = o.header;
        std::vector<std::vector<std::string>> rows = o.rows;
        if (header.empty()) {
            // scalar results: flatten the document to key,value pairs
            header = {"key", "value"};
            for (const auto& [key, val] : o.doc.items()) rows.push_back({key, val.dump()});
        }
        for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_field(header[i]);
        out << '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
            out << '\n';
        }
        return;
    }
    json doc = {{"command", command}};
    for (const auto& [key, val] : o.doc.items()) doc[key] = val;
    doc["config"] = c.to_json();
    out << doc.dump() << '\n';
}

/// Parses argv, runs one subcommand, writes its output; returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cusp forms, period polynomials and real-analytic modular iterated integrals"};
    // --h is the finite-difference step, so help is long-form only
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", default_config_file, "key=value configuration file")->envname(config_env);
    app.allow_config_extras(CLI::config_extras_mode::error);

    RunConfig c;
    app.add_option("--C", c.C, "coset cutoff in c")->check(CLI::PositiveNumber);
    app.add_option("--D", c.D, "coset cutoff in |d|")->check(CLI::PositiveNumber);
    app.add_option("--N", c.N, "q-expansion length")->check(CLI::Range(std::size_t(8), std::size_t(1) << 20));
    app.add_option("--M", c.M, "trapezoid nodes for Fourier modes")->check(CLI::Range(64, 1 << 20));
    app.add_option("--h", c.h, "finite-difference step")->check(CLI::PositiveNumber);
    app.add_option("--tol", c.tol, "series tolerance")->check(CLI::PositiveNumber);
    app.add_option("--fd_tol", c.fd_tol, "finite-difference tolerance")->check(CLI::PositiveNumber);
    app.add_option("--form", c.form, "delta, e4, e6, eisenstein:k or cusp:k:i");
    app.add_option("--r", c.r, "holomorphic weight");
    app.add_option("--s", c.s, "antiholomorphic weight");
    app.add_option("--x", c.x, "Re z");
    app.add_option("--y", c.y, "Im z")->check(CLI::PositiveNumber);
    app.add_option("--sign", c.sign, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
    app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", c.threads, "worker threads for coset sums")->check(CLI::Range(1u, 256u));

    std::function<Output()> action;
    std::string command;
    const auto on = [&](CLI::App* sub, std::function<Output()> fn) {
        sub->callback([&, sub, fn] {
            command = sub->get_name();
            action = fn;
        });
    };

    std::size_t count = 10;
    auto* forms = app.add_subcommand("forms", "q-expansion coefficients");
    forms->add_option("--count", count, "largest index printed");
    on(forms, [&] { return cmd_forms(c, count); });

    on(app.add_subcommand("eval", "evaluate the form at z"), [&] { return cmd_eval(c); });

    std::string gamma = "S";
    auto* period = app.add_subcommand("period", "period polynomial r(gamma)");
    period->add_option("--gamma", gamma, "word in S, T, t=T^-1 or a,b,c,d");
    on(period, [&] { return cmd_period(c, gamma); });

    int lval_s = 0;
    std::int64_t p = 0, q = 1;
    std::string method = "auto";
    auto* lvalue = app.add_subcommand("lvalue", "twisted completed L-value Lambda(s, p/q)");
    lvalue->add_option("point", lval_s, "integer s")->required();
    lvalue->add_option("--p", p, "twist numerator");
    lvalue->add_option("--q", q, "twist denominator")->check(CLI::PositiveNumber);
    lvalue->add_option("--method", method, "auto, series or extraction")
        ->check(CLI::IsMember({"auto", "series", "extraction"}));
    on(lvalue, [&] { return cmd_lvalue(c, lval_s, p, q, method); });

    on(app.add_subcommand("eisenstein", "real-analytic Eisenstein series E_{r,s}(z)"), [&] { return cmd_eisenstein(c); });
    on(app.add_subcommand("phi", "the series phi_{r,s} at z"), [&] { return cmd_phi(c); });

    std::optional<int> fj;
    std::vector<int> modes{1, 2};
    auto* fourier = app.add_subcommand("fourier", "Fourier modes of a psi coefficient at height y");
    fourier->add_option("--j", fj, "basis coefficient index (default k-2)");
    fourier->add_option("--l", modes, "modes")->delimiter(',');
    on(fourier, [&] { return cmd_fourier(c, fj, modes); });

    int depth = 2;
    auto* iter = app.add_subcommand("iterated", "iterated Eichler integral F_n at z");
    iter->add_option("--depth", depth, "1, 2 or 3");
    on(iter, [&] { return cmd_iterated(c, depth); });

    int k = 16, k1 = 12;
    std::optional<int> table;
    auto* dim = app.add_subcommand("dim", "dimensions of M_k(rho) and the order-2 space");
    dim->add_option("--k", k, "weight k");
    dim->add_option("--k1", k1, "weight k1 of rho");
    dim->add_option("--table", table, "all pairs up to kmax");
    on(dim, [&] { return cmd_dim(k, k1, table); });

    std::string suite;
    auto* check = app.add_subcommand("check", "run a named invariant suite");
    check->add_option("suite", suite, "suite name")->required()->check(CLI::IsMember(check_suite_names()));
    on(check, [&] { return cmd_check(c, suite); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? Exit::ok : Exit::usage;
    }

    try {
        const Output o = action();
        write(o, c, command, out);
        return o.code;
    } catch (const precision_error& e) {
        err << "precision: " << e.what() << '\n';
        return Exit::precision;
    } catch (const convergence_error& e) {
        err << "convergence: " << e.what() << '\n';
        return Exit::precision;
    } catch (const consistency_error& e) {
        err << "inconsistency: " << e.what() << '\n';
        return Exit::check_failed;
    } catch (const std::invalid_argument& e) {
        err << "usage: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::domain_error& e) {
        err << "usage: " << e.what() << '\n';
        return Exit::usage;
    } catch (const std::out_of_range& e) {
        err << "usage: " << e.what() << '\n';
        return Exit::usage;
    }
}

}  // namespace cuspmi::cli
