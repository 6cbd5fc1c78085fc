// husimi-kit: command-line driver. Every run writes exactly one <out>/manifest.json.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "husimi/benchmarks.hpp"
#include "husimi/checks.hpp"
#include "husimi/husimi.hpp"
#include "husimi/io.hpp"

namespace {

using namespace husimi;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---- settings: CLI flags > config file > preset > defaults -------------------

struct Setting {
    CLI::Option* opt;
    std::string key;
    std::function<json()> get;
    std::string source = "default";
};

class Settings {
public:
    template <class T>
    CLI::Option* add(CLI::App* app, const std::string& key, T& var, const std::string& help) {
        CLI::Option* o = app->add_option("--" + key, var, help)->capture_default_str();
        items_.push_back({o, key, [&var] { return json(var); }});
        return o;
    }

    CLI::Option* flag(CLI::App* app, const std::string& key, bool& var, const std::string& help) {
        CLI::Option* o = app->add_flag("--" + key, var, help);
        items_.push_back({o, key, [&var] { return json(var); }});
        return o;
    }

    bool has(const std::string& key) const { return find(key) != nullptr; }

    void mark_cli() {
        for (auto& s : items_)
            if (s.opt->count() > 0) s.source = "cli";
    }

    // Fills settings that no higher layer has set.
    void apply(const json& layer, const std::string& source) {
        for (auto it = layer.begin(); it != layer.end(); ++it) {
            Setting* s = find(it.key());
            if (!s) throw ParseError("unknown " + source + " key '" + it.key() + "'");
            if (s->source != "default") continue;
            std::string v = it->is_string() ? it->get<std::string>() : it->dump();
            s->opt->clear();
            s->opt->add_result(v);
            try {
                s->opt->run_callback();
            } catch (const CLI::Error& e) {
                throw ParseError(source + " key '" + it.key() + "': " + e.what());
            }
            s->source = source;
        }
    }

    json echo() const {
        json j = json::object();
        for (const auto& s : items_) j[s.key] = {{"value", s.get()}, {"source", s.source}};
        return j;
    }

private:
    Setting* find(const std::string& key) {
        for (auto& s : items_)
            if (s.key == key) return &s;
        return nullptr;
    }
    const Setting* find(const std::string& key) const {
        for (const auto& s : items_)
            if (s.key == key) return &s;
        return nullptr;
    }
    std::vector<Setting> items_;
};

struct Common {
    int dim = 32;
    std::string grid = "-8:8:256";
    double tol = 1e-8;
    int order = 0;
    unsigned long seed = 1;
    std::string out = "husimi_out";
    std::string config;
};

const char* const kCommonKeys[] = {"dim", "grid", "tol", "order", "seed", "out"};

void add_common(CLI::App* app, Settings& s, Common& c) {
    s.add(app, "dim", c.dim, "basis dimension for builtin operators and states");
    s.add(app, "grid", c.grid, "phase-space grid lo:hi:n or xlo:xhi:nx,plo:phi:np");
    s.add(app, "tol", c.tol, "series tolerance");
    s.add(app, "order", c.order, "series order or bracket order");
    s.add(app, "seed", c.seed, "seed for generated inputs");
    s.add(app, "out", c.out, "output directory");
    app->add_option("--config", c.config, "JSON config file");
}

// Top level holds the common keys and one object per subcommand.
void apply_config(const std::string& path, const std::string& sub, Settings& s,
                  const std::vector<std::string>& subcommands) {
    json cfg;
    try {
        cfg = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what(), 1, static_cast<int>(e.byte));
    }
    if (!cfg.is_object()) throw ParseError("config must be a JSON object", 1, 1);
    if (cfg.contains(sub)) {
        if (!cfg[sub].is_object()) throw ParseError("config section '" + sub + "' must be an object");
        s.apply(cfg[sub], "config");
    }
    json top = json::object();
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (std::find(subcommands.begin(), subcommands.end(), it.key()) != subcommands.end()) continue;
        if (std::find(std::begin(kCommonKeys), std::end(kCommonKeys), it.key()) == std::end(kCommonKeys))
            throw ParseError("unknown config key '" + it.key() + "'");
        top[it.key()] = it.value();
    }
    s.apply(top, "config");
}

// ---- shared helpers ---------------------------------------------------------

// Operator specs plus quartic(lambda) = a†a + lambda (a + a†)^4.
FockOperator load_operator(const std::string& spec, int dim) {
    if (spec == "quartic" || spec.rfind("quartic(", 0) == 0) {
        double lambda = 0.1;
        if (spec != "quartic") {
            if (spec.back() != ')') throw ParseError("missing ')'", 1, static_cast<int>(spec.size()) + 1);
            if (!parse_double(std::string_view(spec).substr(8, spec.size() - 9), lambda))
                throw ParseError("quartic takes one number", 1, 9);
        }
        if (dim < 1) throw InvalidDimension("builtin operators need --dim");
        return quartic_hamiltonian(dim, lambda);
    }
    return parse_operator_spec(spec, dim);
}

std::string cell(double v) { return format_double(v); }

struct Run {
    RunManifest manifest;
    fs::path out;

    void emit(const std::string& name, const std::string& text) {
        write_file((out / name).string(), text);
        manifest.outputs.push_back(name);
    }
};

// ---- subcommands ------------------------------------------------------------

struct SymbolArgs {
    std::string op;
    std::string kind = "husimi";
};

int cmd_symbol(Run& run, const Common& c, const SymbolArgs& a) {
    if (a.op.empty()) throw ParseError("symbol needs --op");
    run.manifest.hash_input("op", a.op);
    FockOperator A = load_operator(a.op, c.dim);
    GridSpec g = parse_grid_spec(c.grid);
    if (a.kind == "husimi") {
        run.emit("symbol.csv", write_grid_csv(husimi_symbol_grid(A, g)));
    } else if (a.kind == "weyl") {
        run.emit("symbol.csv", write_grid_csv(weyl_symbol_grid(A, g)));
    } else if (a.kind == "anti-husimi") {
        if (c.order < 1) throw ValidationError("anti-husimi needs --order >= 1");
        std::vector<SeriesResult> res(static_cast<size_t>(g.size()));
        parallel_for(g.nx, [&](long i) {
            for (int j = 0; j < g.np; ++j)
                res[i * g.np + j] = anti_husimi_partial_sums(A, {g.x(static_cast<int>(i)), g.p(j)}, c.order, c.tol);
        });
        PhaseGrid v(g);
        std::string table = "x,p,verdict,terms,last_magnitude\n";
        json counts = {{"converged", 0}, {"diverging", 0}, {"inconclusive", 0}};
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.np; ++j) {
                const SeriesResult& s = res[i * g.np + j];
                v.values(i, j) = s.value();
                std::string verdict = to_string(s.verdict);
                counts[verdict] = counts[verdict].get<int>() + 1;
                table += cell(g.x(i)) + "," + cell(g.p(j)) + "," + verdict + "," + std::to_string(s.terms_used()) +
                         "," + cell(s.term_magnitudes.empty() ? 0.0 : s.term_magnitudes.back()) + "\n";
            }
        run.emit("symbol.csv", write_grid_csv(v));
        run.emit("verdicts.csv", table);
        run.manifest.extra["verdicts"] = counts;
    } else {
        throw ParseError("--kind must be husimi, weyl or anti-husimi");
    }
    return 0;
}

struct ProductArgs {
    std::string a, b, points;
    int count = 5;
};

int cmd_product(Run& run, const Common& c, const ProductArgs& p) {
    if (p.a.empty() || p.b.empty()) throw ParseError("product needs --left and --right");
    run.manifest.hash_input("left", p.a);
    run.manifest.hash_input("right", p.b);
    FockOperator A = load_operator(p.a, c.dim), B = load_operator(p.b, c.dim);
    if (A.dim() != B.dim()) throw DimensionMismatch("product factors must share dim");
    std::vector<PhasePoint> pts;
    if (!p.points.empty()) {
        run.manifest.hash_input("points", "file:" + p.points);
        pts = parse_points(read_file(p.points));
    } else {
        std::mt19937_64 g(c.seed);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int k = 0; k < p.count; ++k) {
            double x = u(g);
            pts.push_back({x, u(g)});
        }
    }
    FockOperator AB = A * B;
    Report rep;
    rep.title = "Husimi symbol of A B by the product series";
    auto& sec = rep.section("product", {"x", "p", "value", "terms", "tail_bound", "verdict", "oracle", "abs_diff"});
    int unconverged = 0;
    for (const PhasePoint& pt : pts) {
        SeriesResult s = mizrahi_product(A, B, pt, c.tol, c.order);
        cplx oracle = husimi_symbol(AB, pt);
        if (s.verdict != Verdict::converged) ++unconverged;
        sec.rows.push_back({cell(pt.x), cell(pt.p), format_cplx(s.value()), std::to_string(s.terms_used()),
                            s.tail_bound ? cell(*s.tail_bound) : "", to_string(s.verdict), format_cplx(oracle),
                            cell(std::abs(s.value() - oracle))});
    }
    run.emit("product.txt", rep.text());
    run.emit("product.csv", rep.csv());
    run.manifest.extra["points"] = pts.size();
    run.manifest.extra["unconverged"] = unconverged;
    if (unconverged) {
        run.manifest.status = "inconclusive";
        run.manifest.diagnostic = std::to_string(unconverged) + " point(s) did not converge";
        return 3;
    }
    return 0;
}

struct EvolveArgs {
    std::string h, rho, preset;
    double dt = 0.01, t = 0.0;
    int steps = 1;
    std::string filter = "top";
    double fraction = 0.125, cutoff = 0.0, strength = 36.0;
    int filter_order = 8;
    double support_radius = 0.0;
    int support_order = 16, substeps = 0, snapshot_every = 0;
    double growth_limit = 10.0;
    bool oracle = false;
};

json preset_layer(const std::string& name) {
    DynamicsBenchmark b;
    json j;
    if (name == "harmonic") {
        b = harmonic_benchmark();
        j = {{"hamiltonian", "number"}, {"rho", "coherent(2,0)"}};
    } else if (name == "quartic") {
        b = quartic_benchmark();
        j = {{"hamiltonian", "quartic(0.1)"}, {"rho", "vacuum"}, {"oracle", true}};
    } else {
        throw ParseError("--preset must be harmonic or quartic");
    }
    const EvolutionConfig& cfg = b.config;
    j["dim"] = b.H.dim();
    j["grid"] = format_grid_spec(cfg.grid);
    j["dt"] = cfg.dt;
    j["steps"] = cfg.steps;
    j["order"] = cfg.bracket_order;
    switch (cfg.filter.kind) {
    case SpectralFilter::Kind::none: j["filter"] = "none"; break;
    case SpectralFilter::Kind::top_fraction: j["filter"] = "top"; break;
    case SpectralFilter::Kind::isotropic: j["filter"] = "isotropic"; break;
    }
    j["fraction"] = cfg.filter.fraction;
    j["cutoff"] = cfg.filter.cutoff;
    j["strength"] = cfg.filter.strength;
    j["filter-order"] = cfg.filter.order;
    j["support-radius"] = cfg.support_radius;
    j["support-order"] = cfg.support_order;
    return j;
}

int cmd_evolve(Run& run, const Common& c, const EvolveArgs& e) {
    if (e.h.empty() || e.rho.empty()) throw ParseError("evolve needs --hamiltonian and --rho, or --preset");
    run.manifest.hash_input("hamiltonian", e.h);
    run.manifest.hash_input("rho", e.rho);
    FockOperator H = load_operator(e.h, c.dim);
    FockOperator rho = parse_state_spec(e.rho, H.dim());
    EvolutionConfig cfg;
    cfg.dt = e.dt;
    cfg.steps = e.t > 0 ? static_cast<int>(std::lround(e.t / e.dt)) : e.steps;
    cfg.bracket_order = c.order;
    cfg.grid = parse_grid_spec(c.grid);
    cfg.resolution_tol = c.tol;
    if (e.filter == "none") cfg.filter.kind = SpectralFilter::Kind::none;
    else if (e.filter == "top") cfg.filter.kind = SpectralFilter::Kind::top_fraction;
    else if (e.filter == "isotropic") cfg.filter.kind = SpectralFilter::Kind::isotropic;
    else throw ParseError("--filter must be none, top or isotropic");
    if (cfg.filter.kind == SpectralFilter::Kind::isotropic && !(e.cutoff > 0))
        throw ValidationError("isotropic filter needs --cutoff > 0");
    cfg.filter.fraction = e.fraction;
    cfg.filter.cutoff = e.cutoff;
    cfg.filter.strength = e.strength;
    cfg.filter.order = e.filter_order;
    cfg.support_radius = e.support_radius;
    cfg.support_order = e.support_order;
    cfg.substeps = e.substeps;
    cfg.snapshot_every = e.snapshot_every;
    cfg.growth_limit = e.growth_limit;

    EvolutionResult r = evolve_husimi(H, rho, cfg, false);

    for (const std::string& name : write_snapshot_series((run.out / "snapshots").string(), r.snapshots))
        run.manifest.outputs.push_back("snapshots/" + name);
    std::string log = "step,t,mass_defect,max_change\n";
    for (size_t k = 0; k < r.mass_defect.size(); ++k)
        log += std::to_string(k) + "," + cell(k * cfg.dt) + "," + cell(r.mass_defect[k]) + "," +
               cell(k < r.max_change.size() ? r.max_change[k] : 0.0) + "\n";
    run.emit("evolution.csv", log);
    std::string index = e.oracle ? "index,t,file,oracle_sup_err\n" : "index,t,file\n";
    double worst = 0.0;
    for (size_t k = 0; k < r.snapshots.size(); ++k) {
        index += std::to_string(k) + "," + cell(r.snapshot_times[k]) + ",snapshots/" + snapshot_name(static_cast<int>(k));
        if (e.oracle) {
            double err = sup_diff(r.snapshots[k], evolve_oracle(H, rho, r.snapshot_times[k], cfg.grid));
            worst = std::max(worst, err);
            index += "," + cell(err);
        }
        index += "\n";
    }
    run.emit("snapshots.csv", index);

    run.manifest.extra["substeps"] = r.substeps;
    run.manifest.extra["spectral_radius"] = r.spectral_radius;
    if (!r.snapshots.empty()) {
        const PhaseGrid& last = r.snapshots.back();
        auto [i, j] = last.argmax_real();
        run.manifest.extra["final_argmax"] = {last.spec.x(i), last.spec.p(j)};
    }
    if (e.oracle) run.manifest.extra["oracle_sup_err"] = worst;
    if (r.aborted) {
        run.manifest.status = "failed";
        run.manifest.diagnostic = r.diagnostic;
        return 4;
    }
    return 0;
}

struct ExpectArgs {
    std::string a, rho;
    std::string methods = "trace,wigner,husimi";
    std::string route = "chord";
    bool probe = false;
};

int cmd_expect(Run& run, const Common& c, const ExpectArgs& x) {
    if (x.a.empty() || x.rho.empty()) throw ParseError("expect needs --op and --rho");
    run.manifest.hash_input("op", x.a);
    run.manifest.hash_input("rho", x.rho);
    FockOperator A = load_operator(x.a, c.dim);
    FockOperator rho = parse_state_spec(x.rho, A.dim());
    GridSpec g = parse_grid_spec(c.grid);
    std::vector<std::string> methods;
    for (size_t s = 0; s <= x.methods.size();) {
        size_t e = x.methods.find(',', s);
        if (e == std::string::npos) e = x.methods.size();
        std::string m = x.methods.substr(s, e - s);
        if (m != "trace" && m != "wigner" && m != "husimi")
            throw ParseError("unknown method '" + m + "'", 1, static_cast<int>(s) + 1);
        methods.push_back(m);
        s = e + 1;
    }
    HusimiSeriesOptions opt;
    if (x.route == "phase-space") opt.route = HusimiSeriesOptions::Route::phase_space;
    else if (x.route != "chord") throw ParseError("--route must be chord or phase-space");
    opt.tol = c.tol;
    if (c.order > 0) opt.n_max = c.order;

    Report rep;
    rep.title = "Expectation value of A";
    auto& table = rep.section("methods", {"method", "value", "status", "detail"});
    int code = 0;
    std::optional<HusimiSeriesResult> series;
    for (const std::string& m : methods) {
        try {
            if (m == "trace") {
                table.rows.push_back({m, format_cplx(trace_direct(rho, A)), "ok", ""});
            } else if (m == "wigner") {
                WignerExpectation w = expectation_wigner(rho, A, g);
                table.rows.push_back({m, format_cplx(w.value), "ok", "instability " + cell(w.instability)});
            } else {
                series = expectation_husimi_series(rho, A, opt, g);
                const SeriesResult& s = series->series;
                std::string detail = std::to_string(s.terms_used()) + " terms";
                if (s.tail_bound) detail += ", remainder <= " + cell(*s.tail_bound);
                if (!s.note.empty()) detail += ", " + s.note;
                table.rows.push_back({m, format_cplx(s.value()), to_string(s.verdict), detail});
                if (s.verdict != Verdict::converged) code = 3;
            }
        } catch (const ResolutionError& e) {
            table.rows.push_back({m, "", "refused", e.what()});
        }
    }
    if (series) {
        auto& sec = rep.section("series", {"n", "term", "partial_sum", "abs_cumulative", "remainder_bound"});
        const SeriesResult& s = series->series;
        for (size_t n = 0; n < s.terms.size(); ++n)
            sec.rows.push_back({std::to_string(n), format_cplx(s.terms[n]), format_cplx(s.partial_sums[n]),
                                cell(series->abs_cumulative[n]),
                                n < series->remainder_bound.size() ? cell(series->remainder_bound[n]) : ""});
    }
    if (x.probe) {
        BoundProbeReport b = bound_probe(A, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0}, 16, true);
        auto& sec = rep.section("probe", {"quantity", "K", "N", "slope", "residual"});
        auto row = [&](const std::string& q, const EnvelopeFit& f) {
            sec.rows.push_back({q, cell(f.K), std::to_string(f.N), cell(f.slope), cell(f.residual)});
        };
        row("|A phi|", b.minus);
        row("|A+ phi|", b.plus);
        for (size_t k = 0; k < b.derivative_fits.size(); ++k)
            row("d_x^" + std::to_string(b.derivative_orders[k].first) + " d_p^" +
                    std::to_string(b.derivative_orders[k].second) + " H_A",
                b.derivative_fits[k]);
    }
    run.emit("expect.txt", rep.text());
    run.emit("expect.csv", rep.csv());
    if (code) {
        run.manifest.status = "inconclusive";
        run.manifest.diagnostic = "husimi series did not converge";
    }
    return code;
}

int cmd_verify(Run& run, int only) {
    auto checks = acceptance_checks();
    if (only < 0 || only > static_cast<int>(checks.size()))
        throw ValidationError("--only must be 0 or a criterion number");
    std::string text;
    json list = json::array();
    int failed = 0;
    for (size_t k = 0; k < checks.size(); ++k) {
        if (only && only != static_cast<int>(k) + 1) continue;
        CheckResult r = checks[k]();
        char line[64];
        std::snprintf(line, sizeof line, " [%.1f s / %.0f s]", r.seconds, r.budget_seconds);
        std::string l = std::string(r.passed() ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + " (" +
                        r.name + "): " + r.detail + line;
        std::cout << l << std::endl;
        text += l + "\n";
        list.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed()}, {"seconds", r.seconds},
                        {"budget_seconds", r.budget_seconds}, {"detail", r.detail}});
        if (!r.passed()) ++failed;
    }
    run.emit("verify.txt", text);
    run.manifest.extra["criteria"] = list;
    if (failed) {
        run.manifest.status = "failed";
        run.manifest.diagnostic = std::to_string(failed) + " criterion check(s) failed";
        return 1;
    }
    return 0;
}

// --out as given on the command line, for runs whose parse stopped before reaching it.
std::string scan_out(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) return argv[i + 1];
        if (a.rfind("--out=", 0) == 0) return a.substr(6);
    }
    return "";
}

std::string joined_args(int argc, char** argv) {
    std::string s;
    for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Husimi and Weyl phase-space toolkit"};
    app.require_subcommand(1);

    Common c_symbol, c_product, c_evolve, c_expect, c_verify;
    c_symbol.order = 40;
    c_symbol.tol = 1e-10;
    c_product.order = -1;
    c_evolve.order = 3;
    c_evolve.tol = 1e-6;
    c_expect.grid = "-8:8:128";
    c_expect.tol = 1e-5;
    c_expect.order = 80;

    Settings s_symbol, s_product, s_evolve, s_expect, s_verify;
    SymbolArgs a_symbol;
    ProductArgs a_product;
    EvolveArgs a_evolve;
    ExpectArgs a_expect;
    int verify_only = 0;

    CLI::App* symbol = app.add_subcommand("symbol", "Husimi, Weyl or anti-Husimi symbol on a grid");
    add_common(symbol, s_symbol, c_symbol);
    s_symbol.add(symbol, "op", a_symbol.op, "operator spec");
    s_symbol.add(symbol, "kind", a_symbol.kind, "husimi | weyl | anti-husimi");

    CLI::App* product = app.add_subcommand("product", "Husimi symbol of A B from the product series");
    add_common(product, s_product, c_product);
    s_product.add(product, "left", a_product.a, "left factor spec");
    s_product.add(product, "right", a_product.b, "right factor spec");
    s_product.add(product, "points", a_product.points, "file of x,p lines (default: --count seeded points)");
    s_product.add(product, "count", a_product.count, "number of seeded points");

    CLI::App* evolve = app.add_subcommand("evolve", "Husimi-function dynamics with the generalized bracket");
    add_common(evolve, s_evolve, c_evolve);
    s_evolve.add(evolve, "hamiltonian", a_evolve.h, "Hamiltonian spec (also quartic(lambda))");
    s_evolve.add(evolve, "rho", a_evolve.rho, "initial state spec");
    evolve->add_option("--preset", a_evolve.preset, "harmonic | quartic benchmark settings");
    s_evolve.add(evolve, "dt", a_evolve.dt, "output time step");
    s_evolve.add(evolve, "steps", a_evolve.steps, "number of output steps");
    s_evolve.add(evolve, "time", a_evolve.t, "final time; overrides --steps when > 0");
    s_evolve.add(evolve, "filter", a_evolve.filter, "none | top | isotropic");
    s_evolve.add(evolve, "fraction", a_evolve.fraction, "top filter: damped fraction of each axis");
    s_evolve.add(evolve, "cutoff", a_evolve.cutoff, "isotropic filter wavenumber");
    s_evolve.add(evolve, "strength", a_evolve.strength, "filter strength");
    s_evolve.add(evolve, "filter-order", a_evolve.filter_order, "filter order");
    s_evolve.add(evolve, "support-radius", a_evolve.support_radius, "support mask radius (0: off)");
    s_evolve.add(evolve, "support-order", a_evolve.support_order, "support mask order");
    s_evolve.add(evolve, "substeps", a_evolve.substeps, "RK4 substeps per step (0: from the stability guard)");
    s_evolve.add(evolve, "snapshot-every", a_evolve.snapshot_every, "snapshot cadence in steps (0: first and last)");
    s_evolve.add(evolve, "growth-limit", a_evolve.growth_limit, "abort when sup |Q| grows by this factor");
    s_evolve.flag(evolve, "oracle", a_evolve.oracle, "compare snapshots with the density-matrix oracle");

    CLI::App* expect = app.add_subcommand("expect", "Expectation value by trace, Wigner integral and Husimi series");
    add_common(expect, s_expect, c_expect);
    s_expect.add(expect, "op", a_expect.a, "observable spec");
    s_expect.add(expect, "rho", a_expect.rho, "state spec");
    s_expect.add(expect, "methods", a_expect.methods, "comma list of trace, wigner, husimi");
    s_expect.add(expect, "route", a_expect.route, "husimi series route: chord | phase-space");
    s_expect.flag(expect, "probe", a_expect.probe, "add polynomial-growth envelope fits");

    CLI::App* verify = app.add_subcommand("verify", "Run the acceptance checks");
    add_common(verify, s_verify, c_verify);
    s_verify.add(verify, "only", verify_only, "run a single criterion (0: all)");

    struct Sub {
        CLI::App* app;
        Common* common;
        Settings* settings;
    };
    const std::vector<Sub> subs = {{symbol, &c_symbol, &s_symbol},
                                   {product, &c_product, &s_product},
                                   {evolve, &c_evolve, &s_evolve},
                                   {expect, &c_expect, &s_expect},
                                   {verify, &c_verify, &s_verify}};
    const std::vector<std::string> names = {"symbol", "product", "evolve", "expect", "verify"};

    auto t0 = std::chrono::steady_clock::now();
    Run run;
    run.manifest.command = joined_args(argc, argv);
    const Sub* active = nullptr;
    int code = 0;
    auto finish = [&](const std::string& kind, const std::string& what, int rc) {
        run.manifest.status = "failed";
        run.manifest.diagnostic = what;
        run.manifest.extra["error_kind"] = kind;
        std::cerr << "husimi-kit: " << what << "\n";
        return rc;
    };

    try {
        app.parse(argc, argv);
        for (const Sub& s : subs)
            if (s.app->parsed()) active = &s;
        run.out = active->common->out;
        Settings& st = *active->settings;
        st.mark_cli();
        if (!active->common->config.empty()) {
            run.manifest.hash_input("config", "file:" + active->common->config);
            apply_config(active->common->config, active->app->get_name(), st, names);
        }
        if (active->app == evolve && !a_evolve.preset.empty()) st.apply(preset_layer(a_evolve.preset), "preset");
        run.out = active->common->out;
        run.manifest.config = st.echo();
        run.manifest.config["config"] = active->common->config;
        if (active->app == evolve) run.manifest.config["preset"] = a_evolve.preset;
        run.manifest.config["threads"] = thread_count();

        if (active->app == symbol) code = cmd_symbol(run, c_symbol, a_symbol);
        else if (active->app == product) code = cmd_product(run, c_product, a_product);
        else if (active->app == evolve) code = cmd_evolve(run, c_evolve, a_evolve);
        else if (active->app == expect) code = cmd_expect(run, c_expect, a_expect);
        else code = cmd_verify(run, verify_only);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        for (const Sub& s : subs)
            if (s.app->parsed()) active = &s;
        if (run.out.empty()) run.out = scan_out(argc, argv);
        if (run.out.empty()) run.out = active ? active->common->out : "husimi_out";
        code = finish("parse", e.what(), 2);
    } catch (const Error& e) {
        if (run.out.empty()) run.out = active ? active->common->out : "husimi_out";
        code = finish(e.kind(), e.what(), exit_code(e));
    } catch (const std::exception& e) {
        if (run.out.empty()) run.out = active ? active->common->out : "husimi_out";
        code = finish("internal", e.what(), 3);
    }

    run.manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.manifest.extra["exit_code"] = code;
    try {
        run.manifest.write((run.out / "manifest.json").string());
    } catch (const std::exception& e) {
        std::cerr << "husimi-kit: cannot write manifest: " << e.what() << "\n";
        if (code == 0) code = 3;
    }
    return code;
}
