#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fock.hpp"
#include "grid.hpp"

namespace husimi {

inline constexpr const char* library_version = "0.3.0";

// ---- number formatting ------------------------------------------------------

// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool parse_int(std::string_view s, long& out) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

// ---- operator text format ---------------------------------------------------
//
//   # comment
//   dim 3
//   hermitian true            (optional)
//   representation finite     (optional: finite | truncated)
//   entries
//   re im re im re im         row-major, one row per line
//   ...

namespace detail {

struct Token {
    std::string_view text;
    int line;
    int column;
};

inline std::vector<Token> tokenize_line(std::string_view line, int lineno) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '#') break;
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) && line[j] != '#') ++j;
        out.push_back({line.substr(i, j - i), lineno, static_cast<int>(i) + 1});
        i = j;
    }
    return out;
}

}  // namespace detail

inline std::string write_operator(const FockOperator& A) {
    std::ostringstream os;
    const int dim = A.dim();
    os << "dim " << dim << '\n';
    if (A.hermitian()) os << "hermitian true\n";
    os << "representation " << (A.truncated() ? "truncated" : "finite") << '\n';
    os << "entries\n";
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (j) os << ' ';
            os << format_double(A(i, j).real()) << ' ' << format_double(A(i, j).imag());
        }
        os << '\n';
    }
    return os.str();
}

inline FockOperator parse_operator(std::string_view text) {
    long dim = -1;
    bool herm = false;
    Representation rep = Representation::finite;
    std::vector<detail::Token> values;
    bool in_entries = false;
    int last_line = 0;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        auto toks = detail::tokenize_line(line, lineno);
        if (!toks.empty()) {
            last_line = lineno;
            if (in_entries) {
                values.insert(values.end(), toks.begin(), toks.end());
            } else {
                const auto& key = toks[0];
                auto need_value = [&](size_t n) {
                    if (toks.size() != n)
                        throw ParseError("'" + std::string(key.text) + "' expects " + std::to_string(n - 1) + " value",
                                         key.line, key.column);
                };
                if (key.text == "dim") {
                    need_value(2);
                    if (!parse_int(toks[1].text, dim) || dim < 1)
                        throw ParseError("dim must be a positive integer", toks[1].line, toks[1].column);
                } else if (key.text == "hermitian") {
                    need_value(2);
                    if (toks[1].text == "true") herm = true;
                    else if (toks[1].text == "false") herm = false;
                    else throw ParseError("hermitian must be true or false", toks[1].line, toks[1].column);
                } else if (key.text == "representation") {
                    need_value(2);
                    if (toks[1].text == "finite") rep = Representation::finite;
                    else if (toks[1].text == "truncated") rep = Representation::truncated;
                    else throw ParseError("representation must be finite or truncated", toks[1].line, toks[1].column);
                } else if (key.text == "entries") {
                    need_value(1);
                    if (dim < 0) throw ParseError("entries before dim", key.line, key.column);
                    in_entries = true;
                } else {
                    throw ParseError("unknown field '" + std::string(key.text) + "'", key.line, key.column);
                }
            }
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (dim < 0) throw ParseError("missing dim", last_line + 1, 1);
    if (!in_entries) throw ParseError("missing entries", last_line + 1, 1);
    const size_t want = 2 * static_cast<size_t>(dim) * dim;
    if (values.size() != want) {
        const auto& at = values.size() > want ? values[want] : detail::Token{{}, last_line + 1, 1};
        throw ParseError("expected " + std::to_string(want) + " numbers after entries, found " +
                             std::to_string(values.size()),
                         at.line, at.column);
    }
    Mat m(dim, dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) {
            double re, im;
            const auto& tr = values[2 * (i * dim + j)];
            const auto& ti = values[2 * (i * dim + j) + 1];
            if (!parse_double(tr.text, re)) throw ParseError("not a number: " + std::string(tr.text), tr.line, tr.column);
            if (!parse_double(ti.text, im)) throw ParseError("not a number: " + std::string(ti.text), ti.line, ti.column);
            m(i, j) = cplx(re, im);
        }
    return FockOperator(m, rep, herm);
}

// ---- operator and state specs -----------------------------------------------
//
// name or name(args): identity, ladder (annihilation), creation, number, parity,
// position, momentum, polynomial(c:j:k;...) for sum c (a†)^j a^k with c real or re/im,
// random(seed), random-hermitian(seed), matrix(re im re im ...), file:path.

namespace detail {

struct SpecCall {
    std::string name;
    std::vector<std::string> args;
    std::vector<int> arg_col;  // 1-based column of each argument in the spec string
};

inline SpecCall split_call(std::string_view s, char sep = ',') {
    SpecCall c;
    size_t open = s.find('(');
    if (open == std::string_view::npos) {
        c.name = std::string(s);
        return c;
    }
    if (s.back() != ')') throw ParseError("missing ')'", 1, static_cast<int>(s.size()) + 1);
    c.name = std::string(s.substr(0, open));
    std::string_view body = s.substr(open + 1, s.size() - open - 2);
    size_t start = 0;
    while (true) {
        size_t e = body.find(sep, start);
        std::string_view a = body.substr(start, e == std::string_view::npos ? std::string_view::npos : e - start);
        size_t lead = 0;
        while (lead < a.size() && a[lead] == ' ') ++lead;
        a.remove_prefix(lead);
        while (!a.empty() && a.back() == ' ') a.remove_suffix(1);
        c.args.emplace_back(a);
        c.arg_col.push_back(static_cast<int>(open + 2 + start + lead));
        if (e == std::string_view::npos) break;
        start = e + 1;
    }
    if (c.args.size() == 1 && c.args[0].empty()) c.args.clear(), c.arg_col.clear();
    return c;
}

inline double arg_double(const SpecCall& c, size_t k) {
    double v;
    if (!parse_double(c.args[k], v)) throw ParseError("not a number: '" + c.args[k] + "'", 1, c.arg_col[k]);
    return v;
}

inline long arg_int(const SpecCall& c, size_t k) {
    long v;
    if (!parse_int(c.args[k], v)) throw ParseError("not an integer: '" + c.args[k] + "'", 1, c.arg_col[k]);
    return v;
}

inline void arity(const SpecCall& c, size_t n) {
    if (c.args.size() != n)
        throw ParseError(c.name + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"), 1,
                         static_cast<int>(c.name.size()) + 1);
}

}  // namespace detail

inline FockOperator parse_operator_spec(const std::string& spec, int dim) {
    if (spec.rfind("file:", 0) == 0) {
        FockOperator A = parse_operator(read_file(spec.substr(5)));
        if (dim > 0 && A.dim() != dim)
            throw DimensionMismatch("operator file has dim " + std::to_string(A.dim()) + ", expected " +
                                    std::to_string(dim));
        return A;
    }
    if (spec.empty()) throw ParseError("empty operator spec", 1, 1);
    if (spec.rfind("polynomial(", 0) == 0) {
        detail::SpecCall c = detail::split_call(spec, ';');
        std::vector<LadderTerm> terms;
        for (size_t k = 0; k < c.args.size(); ++k) {
            detail::SpecCall t;
            t.name = "term";
            std::string_view a = c.args[k];
            int col = c.arg_col[k];
            size_t s = 0;
            while (true) {
                size_t e = a.find(':', s);
                t.args.emplace_back(a.substr(s, e == std::string_view::npos ? std::string_view::npos : e - s));
                t.arg_col.push_back(col + static_cast<int>(s));
                if (e == std::string_view::npos) break;
                s = e + 1;
            }
            if (t.args.size() != 3) throw ParseError("polynomial term must be c:j:k", 1, col);
            cplx coef;
            std::string cs = t.args[0];
            size_t slash = cs.find('/');
            if (slash == std::string::npos) {
                coef = detail::arg_double(t, 0);
            } else {
                double re, im;
                if (!parse_double(std::string_view(cs).substr(0, slash), re) ||
                    !parse_double(std::string_view(cs).substr(slash + 1), im))
                    throw ParseError("coefficient must be re or re/im", 1, col);
                coef = cplx(re, im);
            }
            long j = detail::arg_int(t, 1), kk = detail::arg_int(t, 2);
            if (j < 0 || kk < 0) throw ParseError("ladder powers must be non-negative", 1, t.arg_col[j < 0 ? 1 : 2]);
            terms.push_back({coef, static_cast<int>(j), static_cast<int>(kk)});
        }
        return build_ladder_polynomial(terms, dim);
    }
    if (spec.rfind("matrix(", 0) == 0) {
        detail::SpecCall c = detail::split_call(spec, ' ');
        std::vector<std::string> nums;
        std::vector<int> cols;
        for (size_t k = 0; k < c.args.size(); ++k)
            if (!c.args[k].empty()) nums.push_back(c.args[k]), cols.push_back(c.arg_col[k]);
        long n = std::lround(std::sqrt(nums.size() / 2.0));
        if (n < 1 || static_cast<size_t>(2 * n * n) != nums.size())
            throw ParseError("matrix needs 2 dim^2 numbers", 1, 8);
        if (dim > 0 && n != dim) throw DimensionMismatch("inline matrix has dim " + std::to_string(n));
        Mat m(n, n);
        for (long i = 0; i < n; ++i)
            for (long j = 0; j < n; ++j) {
                double re, im;
                size_t at = 2 * (i * n + j);
                if (!parse_double(nums[at], re)) throw ParseError("not a number: " + nums[at], 1, cols[at]);
                if (!parse_double(nums[at + 1], im)) throw ParseError("not a number: " + nums[at + 1], 1, cols[at + 1]);
                m(i, j) = cplx(re, im);
            }
        return FockOperator(m);
    }
    detail::SpecCall c = detail::split_call(spec);
    if (dim < 1) throw InvalidDimension("builtin operators need --dim");
    if (c.name == "identity") return detail::arity(c, 0), build_identity(dim);
    if (c.name == "ladder" || c.name == "annihilation") return detail::arity(c, 0), build_ladder(dim).first;
    if (c.name == "creation") return detail::arity(c, 0), build_ladder(dim).second;
    if (c.name == "number") return detail::arity(c, 0), build_number(dim);
    if (c.name == "parity") return detail::arity(c, 0), build_parity(dim);
    if (c.name == "position") return detail::arity(c, 0), build_position(dim);
    if (c.name == "momentum") return detail::arity(c, 0), build_momentum(dim);
    if (c.name == "random-hermitian" || c.name == "random") {
        detail::arity(c, 1);
        long seed = detail::arg_int(c, 0);
        return random_operator(dim, static_cast<std::uint64_t>(seed), c.name == "random-hermitian");
    }
    throw ParseError("unknown operator '" + c.name + "'", 1, 1);
}

// vacuum, coherent(x,p), fock(n), thermal(q), file:path (operator format).
inline FockOperator parse_state_spec(const std::string& spec, int dim) {
    if (spec.rfind("file:", 0) == 0) {
        FockOperator rho = parse_operator_spec(spec, dim);
        validate_density(rho);
        return rho;
    }
    detail::SpecCall c = detail::split_call(spec);
    if (dim < 1) throw InvalidDimension("states need --dim");
    if (c.name == "vacuum") return detail::arity(c, 0), coherent_density({0, 0}, dim);
    if (c.name == "coherent") {
        detail::arity(c, 2);
        return coherent_density({detail::arg_double(c, 0), detail::arg_double(c, 1)}, dim);
    }
    if (c.name == "fock") {
        detail::arity(c, 1);
        long n = detail::arg_int(c, 0);
        if (n < 0 || n >= dim) throw IndexError("fock level outside the basis");
        return pure_density(Vec::Unit(dim, n));
    }
    if (c.name == "thermal") {
        detail::arity(c, 1);
        double q = detail::arg_double(c, 0);
        if (!(q >= 0 && q < 1)) throw ParseError("thermal ratio must lie in [0, 1)", 1, c.arg_col[0]);
        return thermal_density(q, dim);
    }
    throw ParseError("unknown state '" + c.name + "'", 1, 1);
}

// "lo:hi:n" for both axes, or "xlo:xhi:nx,plo:phi:np".
inline GridSpec parse_grid_spec(const std::string& s) {
    auto axis = [&](std::string_view a, int col, double& lo, double& hi, int& n) {
        std::vector<std::string_view> parts;
        size_t st = 0;
        while (true) {
            size_t e = a.find(':', st);
            parts.push_back(a.substr(st, e == std::string_view::npos ? std::string_view::npos : e - st));
            if (e == std::string_view::npos) break;
            st = e + 1;
        }
        if (parts.size() != 3) throw ParseError("grid axis must be lo:hi:n", 1, col);
        long nn;
        if (!parse_double(parts[0], lo) || !parse_double(parts[1], hi) || !parse_int(parts[2], nn) || nn < 1)
            throw ParseError("bad grid axis '" + std::string(a) + "'", 1, col);
        n = static_cast<int>(nn);
    };
    GridSpec g;
    size_t comma = s.find(',');
    if (comma == std::string::npos) {
        axis(s, 1, g.x_min, g.x_max, g.nx);
        g.p_min = g.x_min, g.p_max = g.x_max, g.np = g.nx;
    } else {
        axis(std::string_view(s).substr(0, comma), 1, g.x_min, g.x_max, g.nx);
        axis(std::string_view(s).substr(comma + 1), static_cast<int>(comma) + 2, g.p_min, g.p_max, g.np);
    }
    g.validate();
    return g;
}

inline std::string format_grid_spec(const GridSpec& g) {
    return format_double(g.x_min) + ":" + format_double(g.x_max) + ":" + std::to_string(g.nx) + "," +
           format_double(g.p_min) + ":" + format_double(g.p_max) + ":" + std::to_string(g.np);
}

// One "x,p" pair per line; blank lines and # comments skipped.
inline std::vector<PhasePoint> parse_points(std::string_view text) {
    std::vector<PhasePoint> pts;
    size_t pos = 0;
    int lineno = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
        size_t lead = 0;
        while (lead < line.size() && std::isspace(static_cast<unsigned char>(line[lead]))) ++lead;
        line.remove_prefix(lead);
        if (!line.empty()) {
            size_t comma = line.find(',');
            if (comma == std::string_view::npos) throw ParseError("point must be x,p", lineno, static_cast<int>(lead) + 1);
            auto trim = [](std::string_view v) {
                while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
                while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
                return v;
            };
            PhasePoint p;
            if (!parse_double(trim(line.substr(0, comma)), p.x))
                throw ParseError("bad x coordinate", lineno, static_cast<int>(lead) + 1);
            if (!parse_double(trim(line.substr(comma + 1)), p.p))
                throw ParseError("bad p coordinate", lineno, static_cast<int>(lead + comma) + 2);
            pts.push_back(p);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return pts;
}

// ---- PhaseGrid CSV ----------------------------------------------------------

inline std::string write_grid_csv(const PhaseGrid& g) {
    const GridSpec& s = g.spec;
    std::string out = "x_min,x_max,nx,p_min,p_max,np\n";
    out += format_double(s.x_min) + "," + format_double(s.x_max) + "," + std::to_string(s.nx) + "," +
           format_double(s.p_min) + "," + format_double(s.p_max) + "," + std::to_string(s.np) + "\n";
    out.reserve(out.size() + static_cast<size_t>(s.size()) * 40);
    for (int i = 0; i < s.nx; ++i)
        for (int j = 0; j < s.np; ++j) {
            out += format_double(g.values(i, j).real());
            out += ',';
            out += format_double(g.values(i, j).imag());
            out += '\n';
        }
    return out;
}

inline PhaseGrid read_grid_csv(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        lines.push_back(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (lines.size() < 2 || lines[0] != "x_min,x_max,nx,p_min,p_max,np")
        throw ParseError("missing grid header", 1, 1);
    std::vector<std::string_view> h;
    size_t st = 0;
    while (true) {
        size_t e = lines[1].find(',', st);
        h.push_back(lines[1].substr(st, e == std::string_view::npos ? std::string_view::npos : e - st));
        if (e == std::string_view::npos) break;
        st = e + 1;
    }
    GridSpec s;
    long nx, np;
    if (h.size() != 6 || !parse_double(h[0], s.x_min) || !parse_double(h[1], s.x_max) || !parse_int(h[2], nx) ||
        !parse_double(h[3], s.p_min) || !parse_double(h[4], s.p_max) || !parse_int(h[5], np) || nx < 1 || np < 1)
        throw ParseError("bad grid header values", 2, 1);
    s.nx = static_cast<int>(nx);
    s.np = static_cast<int>(np);
    s.validate();
    if (lines.size() - 2 != static_cast<size_t>(s.size()))
        throw ParseError("expected " + std::to_string(s.size()) + " value rows, found " +
                             std::to_string(lines.size() - 2),
                         static_cast<int>(lines.size()), 1);
    PhaseGrid g(s);
    for (long k = 0; k < s.size(); ++k) {
        std::string_view l = lines[2 + k];
        size_t comma = l.find(',');
        double re, im;
        int lineno = static_cast<int>(k) + 3;
        if (comma == std::string_view::npos || !parse_double(l.substr(0, comma), re))
            throw ParseError("bad real part", lineno, 1);
        if (!parse_double(l.substr(comma + 1), im)) throw ParseError("bad imaginary part", lineno, static_cast<int>(comma) + 2);
        g.values(k / s.np, k % s.np) = cplx(re, im);
    }
    return g;
}

// ---- run manifest -----------------------------------------------------------

struct RunManifest {
    std::string command;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json input_hashes = nlohmann::ordered_json::object();
    std::vector<std::string> outputs;
    std::string status = "ok";
    std::string diagnostic;
    double wall_seconds = 0.0;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    // Hash of a spec string, plus the file contents for file: specs.
    void hash_input(const std::string& key, const std::string& spec) {
        std::string material = spec;
        if (spec.rfind("file:", 0) == 0) material += '\n' + read_file(spec.substr(5));
        input_hashes[key] = hex64(fnv1a(material));
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["command"] = command;
        j["library_version"] = library_version;
        j["config"] = config;
        j["input_hashes"] = input_hashes;
        j["outputs"] = outputs;
        j["status"] = status;
        if (!diagnostic.empty()) j["diagnostic"] = diagnostic;
        j["wall_seconds"] = wall_seconds;
        for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
        return j;
    }

    void write(const std::string& path) const { write_file(path, to_json().dump(2) + "\n"); }
};

// ---- snapshot series --------------------------------------------------------

inline std::string snapshot_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%04d.csv", k);
    return buf;
}

// Writes each grid under dir and returns the file names in order.
inline std::vector<std::string> write_snapshot_series(const std::string& dir, const std::vector<PhaseGrid>& snaps) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> names;
    for (size_t k = 0; k < snaps.size(); ++k) {
        std::string name = snapshot_name(static_cast<int>(k));
        write_file((std::filesystem::path(dir) / name).string(), write_grid_csv(snaps[k]));
        names.push_back(name);
    }
    return names;
}

// ---- reports ----------------------------------------------------------------

// Named sections of string tables; rendered as aligned text or as CSV with a
// leading section column.
struct Report {
    struct Section {
        std::string name;
        std::vector<std::string> columns;
        std::vector<std::vector<std::string>> rows;
    };
    std::string title;
    std::vector<Section> sections;

    Section& section(const std::string& name, std::vector<std::string> columns) {
        sections.push_back({name, std::move(columns), {}});
        return sections.back();
    }

    std::string text() const {
        std::ostringstream os;
        if (!title.empty()) os << title << "\n\n";
        for (const auto& s : sections) {
            os << "[" << s.name << "]\n";
            std::vector<size_t> w(s.columns.size());
            for (size_t c = 0; c < w.size(); ++c) w[c] = s.columns[c].size();
            for (const auto& r : s.rows)
                for (size_t c = 0; c < r.size() && c < w.size(); ++c) w[c] = std::max(w[c], r[c].size());
            auto emit = [&](const std::vector<std::string>& r) {
                std::string line;
                for (size_t c = 0; c < r.size(); ++c) {
                    std::string cell = r[c];
                    if (c + 1 < r.size() && c < w.size()) cell.resize(w[c], ' ');
                    line += (c ? "  " : "") + cell;
                }
                os << line << '\n';
            };
            emit(s.columns);
            for (const auto& r : s.rows) emit(r);
            os << '\n';
        }
        return os.str();
    }

    std::string csv() const {
        auto quote = [](const std::string& v) {
            if (v.find_first_of(",\"\n") == std::string::npos) return v;
            std::string q = "\"";
            for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            return q + "\"";
        };
        std::string out;
        for (const auto& s : sections) {
            out += "section";
            for (const auto& c : s.columns) out += "," + quote(c);
            out += '\n';
            for (const auto& r : s.rows) {
                out += quote(s.name);
                for (const auto& v : r) out += "," + quote(v);
                out += '\n';
            }
        }
        return out;
    }
};

inline std::string format_cplx(cplx v) {
    return format_double(v.real()) + (std::signbit(v.imag()) ? "" : "+") + format_double(v.imag()) + "i";
}

}  // namespace husimi
