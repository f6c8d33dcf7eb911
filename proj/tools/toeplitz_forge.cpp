#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "toeplitz_forge/acceptance.hpp"

using namespace tforge;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0, kExitAcceptance = 1, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4;
constexpr int kSchemaVersion = 1;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using param_map = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// typed access to string parameters

struct params {
    param_map values;

    const std::string& str(const std::string& k) const {
        const auto it = values.find(k);
        if (it == values.end()) throw config_error("missing parameter '" + k + "'");
        return it->second;
    }
    double real(const std::string& k) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(str(k), &used);
            if (used != str(k).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("parameter '" + k + "' is not a number: '" + str(k) + "'");
        }
    }
    int integer(const std::string& k) const {
        const double v = real(k);
        if (v != std::floor(v)) throw config_error("parameter '" + k + "' must be an integer");
        return static_cast<int>(v);
    }
    std::vector<int> int_list(const std::string& k) const {
        std::vector<int> out;
        std::stringstream ss(str(k));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw config_error("parameter '" + k + "' is not an integer list: '" + str(k) + "'");
            }
        }
        if (out.empty()) throw config_error("parameter '" + k + "' is empty");
        for (std::size_t i = 1; i < out.size(); ++i)
            if (out[i] <= out[i - 1]) throw config_error("parameter '" + k + "' must be strictly increasing");
        for (int v : out)
            if (v < 1) throw config_error("parameter '" + k + "' must hold positive values");
        return out;
    }
    model_geometry geometry() const {
        const auto& g = str("geometry");
        if (g == "sphere") return model_geometry::sphere();
        if (g == "bargmann") return model_geometry::bargmann();
        throw config_error("invalid geometry '" + g + "' (sphere or bargmann)");
    }
    int K() const {
        const int k = integer("K");
        if (k < 0) throw config_error("K must be non-negative");
        return k;
    }
};

// ---------------------------------------------------------------------------
// output

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct result {
    table csv;
    json summary = json::object();
    bool acceptance_failed = false;
};

void write_outputs(const std::string& name, const params& p, const result& r, const std::string& out_dir) {
    std::ostringstream csv;
    for (std::size_t i = 0; i < r.csv.header.size(); ++i) csv << (i ? "," : "") << r.csv.header[i];
    csv << "\n";
    for (const auto& row : r.csv.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
        csv << "\n";
    }
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["experiment"] = name;
    doc["parameters"] = p.values;
    doc["results"] = r.summary;
    doc["csv_header"] = r.csv.header;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    doc["metadata"] = {{"generated_at", stamp}, {"tool", "toeplitz-forge"}};
    if (out_dir.empty()) {
        std::cout << csv.str();
        std::cerr << doc.dump(2) << "\n";
        return;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory '" + out_dir + "': " + ec.message());
    const auto base = std::filesystem::path(out_dir) / name;
    std::ofstream fc(base.string() + ".csv"), fj(base.string() + ".json");
    if (!fc || !fj) throw io_error("cannot open output files under '" + out_dir + "'");
    fc << csv.str();
    fj << doc.dump(2) << "\n";
    if (!fc || !fj) throw io_error("write failed under '" + out_dir + "'");
}

template <class T, class Fn>
std::vector<T> parallel_map(const std::vector<int>& keys, Fn fn) {
    std::vector<std::future<T>> jobs;
    for (int k : keys) jobs.push_back(std::async(std::launch::async, fn, k));
    std::vector<T> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

// ---------------------------------------------------------------------------
// region predicates: conjunctions of "x<i> <op> <value>", e.g. "x3>=0.5 && x1<0"

region parse_region(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw config_error("empty region predicate");
    struct clause {
        int var;
        std::string op;
        double value;
    };
    std::vector<clause> cs;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto next = s.find("&&", pos);
        const std::string part = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        pos = next == std::string::npos ? s.size() : next + 2;
        if (part.size() < 4 || part[0] != 'x' || part[1] < '1' || part[1] > '3') throw config_error("bad region clause '" + part + "'");
        std::string op;
        std::size_t i = 2;
        while (i < part.size() && (part[i] == '<' || part[i] == '>' || part[i] == '=')) op += part[i++];
        if (op != "<" && op != "<=" && op != ">" && op != ">=") throw config_error("bad comparison in region clause '" + part + "'");
        try {
            std::size_t used = 0;
            const double v = std::stod(part.substr(i), &used);
            if (used != part.size() - i) throw std::invalid_argument("trailing");
            cs.push_back({part[1] - '1', op, v});
        } catch (const std::exception&) {
            throw config_error("bad number in region clause '" + part + "'");
        }
    }
    region r;
    r.predicate = [cs](const std::vector<double>& x) {
        for (const auto& c : cs) {
            const double v = x[static_cast<std::size_t>(c.var)];
            const bool ok = c.op == "<" ? v < c.value : c.op == "<=" ? v <= c.value : c.op == ">" ? v > c.value : v >= c.value;
            if (!ok) return false;
        }
        return true;
    };
    bool only_x3 = true;
    double lo = -1.0, hi = 1.0;
    for (const auto& c : cs) {
        if (c.var != 2) only_x3 = false;
        if (c.op[0] == '>') lo = std::max(lo, c.value);
        else hi = std::min(hi, c.value);
    }
    // strict and non-strict bounds agree up to a null set
    if (only_x3) r.x3_band = std::make_pair(lo, hi);
    return r;
}

polynomial parse_symbol(const std::string& text, const model_geometry& g) {
    const std::string body = text.rfind("poly:", 0) == 0 ? text.substr(5) : text;
    try {
        return parse_polynomial(body, ambient_vars(g));
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
}

// ---------------------------------------------------------------------------
// experiments

result run_lemmas(const params& p) {
    const int n = p.integer("n"), d = p.integer("d"), m_max = p.integer("m-max"), ell_max = p.integer("ell-max");
    if (n < 2 || d < 0 || ell_max < 0) throw config_error("lemmas: need n >= 2, d >= 0, ell-max >= 0");
    result r;
    r.csv.header = {"n", "d", "m", "ell", "value", "bound", "holds"};
    int rows = 0, fails = 0;
    for (int m = lem_hard_min_m(n, d); m <= m_max; ++m)
        for (int ell = 0; ell <= ell_max; ++ell) {
            const auto h = lem_hard_sum(n, d, m, ell);
            r.csv.rows.push_back({std::to_string(n), std::to_string(d), std::to_string(m), std::to_string(ell), num(h.value), num(h.bound),
                                  h.bound_holds ? "true" : "false"});
            ++rows;
            fails += !h.bound_holds;
        }
    if (rows == 0) throw config_error("lemmas: m-max below the legal minimum " + std::to_string(lem_hard_min_m(n, d)));
    r.summary = {{"rows", rows}, {"violations", fails}, {"calibrated", calibration::lem_hard_constant(n, d).has_value()}};
    r.acceptance_failed = fails > 0;
    return r;
}

result run_symbols(const params& p) {
    const double R = p.real("R"), c1 = p.real("c1");
    const auto Ns = p.int_list("N-list");
    if (R <= 0) throw config_error("symbols: R must be positive");
    const int K = summation_cutoff(Ns.back(), R) + 1;
    std::vector<cplx> ones(static_cast<std::size_t>(K) + 1, 1.0);
    std::vector<double> ls;
    for (int k = 0; k <= K; ++k) ls.push_back(std::lgamma(k + 1.0) + k * std::log(R));
    const auto a = constant_symbol(ones, {1.0, R, 0}, ls);
    result r;
    r.csv.header = {"N", "K_used", "value", "max_term_ratio", "uniform_bound", "bound_holds", "log_tail"};
    std::vector<double> xs, ys;
    bool ok = true;
    for (int N : Ns) {
        const auto s = summation(a, N, c1);
        r.csv.rows.push_back({std::to_string(N), std::to_string(s.K_used), num(s.values[0].constant_term().real()), num(s.max_term_ratio),
                              num(s.uniform_bound), s.uniform_bound_holds ? "true" : "false", num(s.log_tail)});
        ok = ok && s.uniform_bound_holds && s.max_term_ratio <= std::numbers::e / 3.0 * (1.0 + 1e-12);
        if (std::isfinite(s.log_tail)) {
            xs.push_back(N);
            ys.push_back(-s.log_tail);
        }
    }
    r.summary = {{"family", "a_k = R^k k!"}, {"contract_holds", ok}};
    if (xs.size() >= 2) {
        const auto f = linear_fit(xs, ys);
        r.summary["tail_rate"] = f.slope;
        r.summary["tail_r2"] = f.r_squared;
    }
    r.acceptance_failed = !ok;
    return r;
}

result run_geometry(const params& p) {
    const auto g = p.geometry();
    const int N = p.integer("N");
    if (N < 1) throw config_error("geometry: N must be positive");
    result r;
    r.csv.header = {"x_re", "x_im", "y_re", "y_im", "dist", "psi_norm", "bergman_re", "bergman_im", "bergman_h_norm"};
    const std::vector<cplx> pts{0.0, cplx(0.3, 0.1), cplx(-0.5, 0.4), cplx(1.2, -0.7)};
    for (cplx x : pts)
        for (cplx y : pts) {
            const auto b = g.exact_bergman(N, x, std::conj(y));
            const double h = std::exp(-N * (g.phi(x) + g.phi(y)));
            r.csv.rows.push_back({num(x.real()), num(x.imag()), num(y.real()), num(y.imag()), num(g.dist(x, y)), num(g.psi_pointwise_norm(N, x, y)),
                                  num(b.value.real()), num(b.value.imag()), num(std::abs(b.value) * h)});
        }
    r.summary = {{"geometry", g.name()}, {"diagonal_density", g.exact_bergman(N, 0.0, 0.0).value.real()}};
    if (g.is_sphere()) r.summary["mixed_log_derivative"] = mixed_log_derivative(g).real();
    return r;
}

result run_phase(const params& p) {
    const auto g = p.geometry();
    const int K = p.K();
    const cplx x(p.real("x-re"), p.real("x-im"));
    const int order = 2 * K + 2;
    const auto phase = phase_data<cplx>::from(g.phase_phi1_series(x, std::conj(x), order));
    const auto v = series::variable(2, 0, order), vb = series::variable(2, 1, order);
    const auto a = exp((v + vb) * cplx(p.real("amp-slope")));
    const auto w = wick_expand(phase, a, K).coeffs;
    const auto mo = morse_expand(phase, a, K).coeffs;
    result r;
    r.csv.header = {"k", "wick_re", "wick_im", "morse_re", "morse_im", "gap"};
    double gap = 0.0;
    for (int k = 0; k <= K; ++k) {
        const auto wk = w[static_cast<std::size_t>(k)], mk = mo[static_cast<std::size_t>(k)];
        gap = std::max(gap, std::abs(wk - mk));
        r.csv.rows.push_back({std::to_string(k), num(wk.real()), num(wk.imag()), num(mk.real()), num(mk.imag()), num(std::abs(wk - mk))});
    }
    r.summary = {{"amplitude", "exp(s (v + vbar))"}, {"max_gap", gap}};
    return r;
}

result run_compose(const params& p) {
    const auto g = p.geometry();
    if (!g.is_sphere()) throw config_error("compose: operator-level composition runs on the sphere");
    const auto f = parse_symbol(p.str("f"), g), h = parse_symbol(p.str("g"), g);
    const int K = p.K();
    const auto rep = composition_sweep(f, h, K, p.int_list("N-list"));
    result r;
    r.csv.header = {"N", "error"};
    for (const auto& row : rep.rows) r.csv.rows.push_back({std::to_string(row.N), num(row.error)});
    const double target = -(K + acceptance::kC8SlopeMargin);
    r.summary = {{"slope", rep.fit.slope}, {"r2", rep.fit.r_squared}, {"slope_target", target}, {"global_residual", rep.global_residual},
                 {"pass", rep.fit.slope <= target}};
    r.acceptance_failed = rep.fit.slope > target;
    return r;
}

result run_bergman(const params& p) {
    const auto g = p.geometry();
    const int K = p.K();
    const auto a = bergman_symbol(g, K);
    result r;
    r.csv.header = {"point_re", "point_im", "k", "re", "im"};
    double gap = 0.0;
    for (int pt = 0; pt < a.num_points(); ++pt)
        for (int k = 0; k <= K; ++k) {
            const cplx v = a.coeff(pt, k).constant_term();
            const cplx want = k == 0 ? 1.0 : (k == 1 && g.is_sphere() ? 1.0 : 0.0);
            gap = std::max(gap, std::abs(v - want));
            r.csv.rows.push_back({num(a.base[static_cast<std::size_t>(pt)].real()), num(a.base[static_cast<std::size_t>(pt)].imag()), std::to_string(k),
                                  num(v.real()), num(v.imag())});
        }
    r.summary = {{"geometry", g.name()}, {"max_gap_to_closed_form", gap}, {"uniqueness_gap", bergman_uniqueness_gap(a, K)}};
    return r;
}

result run_bergman_check(const params& p) {
    const auto g = p.geometry();
    const int Nmax = p.integer("Nmax"), step = p.integer("N-step");
    if (Nmax < 16 || step < 1) throw config_error("bergman-check: need Nmax >= 16 and N-step >= 1");
    std::vector<int> Ns;
    for (int N = 8; N <= Nmax; N += step) Ns.push_back(N);
    const auto a = bergman_symbol(g, 3, {0.0});
    const auto G = global_form(a, 0, 0);
    const double eps = p.str("eps") == "default" ? (g.is_sphere() ? default_cutoff() : 1.0) : p.real("eps");
    std::vector<std::pair<cplx, cplx>> samples = acceptance::sphere_sample_pairs();
    if (!g.is_sphere())
        for (auto& [x, y] : samples) {
            x /= 1.5;
            y /= 1.5;
        }
    const auto rep = bergman_sweep(G, 1.0, Ns, eps, samples);
    result r;
    r.csv.header = {"N", "sup_error", "slope"};
    std::vector<double> xs, ys;
    for (const auto& row : rep.rows) {
        xs.push_back(row.N);
        ys.push_back(std::log(row.sup_error));
        r.csv.rows.push_back({std::to_string(row.N), num(row.sup_error), xs.size() >= 2 ? num(linear_fit(xs, ys).slope) : "nan"});
    }
    r.summary = {{"slope", rep.fit.slope}, {"r2", rep.fit.r_squared}, {"eps", eps}, {"pass", rep.fit.slope < 0 && rep.fit.r_squared > acceptance::kC7R2}};
    r.acceptance_failed = !(rep.fit.slope < 0 && rep.fit.r_squared > acceptance::kC7R2);
    return r;
}

result run_decay(const params& p) {
    const auto g = model_geometry::sphere();
    if (p.str("geometry") != "sphere") throw config_error("decay: the decay experiment runs on the sphere");
    const auto f = parse_symbol(p.str("f"), g);
    const double E = p.real("E");
    const auto V = parse_region(p.str("V"));
    const auto Ns = p.int_list("N-list");
    struct row {
        double lambda, mass;
    };
    const auto rows = parallel_map<row>(Ns, [&](int N) {
        const auto eig = eigenpairs(contravariant_matrix(g, f, N));
        const auto best = std::min_element(eig.begin(), eig.end(),
                                           [E](const eigenpair& a, const eigenpair& b) { return std::abs(a.value - E) < std::abs(b.value - E); });
        return row{best->value, forbidden_mass(g, N, best->vector, V).mass};
    });
    result r;
    r.csv.header = {"N", "lambda", "mass", "c_fit_partial"};
    std::vector<std::pair<int, double>> pts;
    int skipped = 0;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        pts.emplace_back(Ns[i], rows[i].mass);
        std::string partial = "nan";
        if (rows[i].mass <= 0.0) {
            ++skipped;
            std::cerr << "warning: N=" << Ns[i] << " has non-positive mass; skipped in the fit\n";
        }
        try {
            if (pts.size() >= 4) partial = num(decay_rate_fit(pts).slope);
        } catch (const std::invalid_argument&) {
        }
        r.csv.rows.push_back({std::to_string(Ns[i]), num(rows[i].lambda), num(rows[i].mass), partial});
    }
    const auto fit = decay_rate_fit(pts);
    bool decreasing = true;
    for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].mass < rows[i - 1].mass;
    const double floor_c = p.real("c-min"), floor_r2 = p.real("r2-min");
    const bool pass = decreasing && fit.slope > floor_c && fit.r_squared > floor_r2;
    r.summary = {{"c", fit.slope}, {"r2", fit.r_squared}, {"skipped", skipped}, {"decreasing", decreasing}, {"pass", pass}};
    r.acceptance_failed = !pass;
    return r;
}

result run_acceptance(const params&) {
    result r;
    r.csv.header = {"criterion", "name", "passed", "detail"};
    json items = json::array();
    for (const auto& run : acceptance::all_criteria()) {
        const auto c = run();
        std::string detail = c.detail;
        for (auto& ch : detail)
            if (ch == ',') ch = ';';
        r.csv.rows.push_back({std::to_string(c.id), c.name, c.passed ? "true" : "false", detail});
        items.push_back({{"criterion", c.id}, {"name", c.name}, {"passed", c.passed}, {"metrics", c.metrics}});
        r.acceptance_failed = r.acceptance_failed || !c.passed;
    }
    r.summary = {{"criteria", items}};
    return r;
}

struct experiment {
    std::string name;
    std::string help;
    param_map defaults;
    result (*run)(const params&);
};

const std::vector<experiment>& experiments() {
    static const std::vector<experiment> all = {
        {"lemmas", "sum-lemma sweep with the calibrated constant", {{"n", "3"}, {"d", "1"}, {"m-max", "16"}, {"ell-max", "40"}}, run_lemmas},
        {"symbols", "summation contract for a_k = R^k k!", {{"R", "1"}, {"c1", "0.45"}, {"N-list", "5,10,20,40,80,160"}}, run_symbols},
        {"geometry", "potentials, distances and exact Bergman kernels", {{"geometry", "sphere"}, {"N", "8"}}, run_geometry},
        {"phase", "Wick and Morse stationary-phase coefficients",
         {{"geometry", "sphere"}, {"K", "3"}, {"x-re", "0"}, {"x-im", "0"}, {"amp-slope", "0.3"}},
         run_phase},
        {"compose", "operator-level composition error sweep",
         {{"geometry", "sphere"}, {"f", "x3+0.5*x1"}, {"g", "x1*x3+x2"}, {"K", "2"}, {"N-list", "8,16,24,32,40,48,56,64"}},
         run_compose},
        {"bergman", "Bergman symbol coefficients at the base points", {{"geometry", "sphere"}, {"K", "3"}}, run_bergman},
        {"bergman-check", "exact kernel against the cut-off expansion",
         {{"geometry", "sphere"}, {"Nmax", "64"}, {"N-step", "8"}, {"eps", "default"}},
         run_bergman_check},
        {"decay", "eigenvector mass in a forbidden region",
         {{"geometry", "sphere"}, {"f", "x3"}, {"E", "0"}, {"V", "x3>=0.5"}, {"N-list", "8,12,16,20,24,28,32,36,40,44,48"}, {"c-min", "0.2"}, {"r2-min", "0.99"}},
         run_decay},
        {"acceptance", "all acceptance criteria", {}, run_acceptance},
    };
    return all;
}

const experiment& find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    throw config_error("unknown experiment '" + name + "'");
}

// flat "key = value" lines; '#' starts a comment
param_map read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read config '" + path + "'");
    param_map m;
    std::string line;
    int lineno = 0;
    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error(path + ":" + std::to_string(lineno) + ": empty key");
        if (m.count(key)) throw config_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        m[key] = value;
    }
    return m;
}

int execute(const experiment& e, const param_map& given, const std::string& out_dir) {
    params p{e.defaults};
    for (const auto& [k, v] : given) {
        if (!p.values.count(k)) throw config_error("experiment '" + e.name + "' has no parameter '" + k + "'");
        p.values[k] = v;
    }
    const auto r = e.run(p);
    write_outputs(e.name, p, r, out_dir);
    return r.acceptance_failed ? kExitAcceptance : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Toeplitz operator and analytic-symbol experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir;
    app.add_option("--out", out_dir, "directory for <experiment>.csv and <experiment>.json (default: CSV on stdout, JSON on stderr)");

    std::map<std::string, param_map> cli_values;
    std::map<std::string, CLI::App*> subs;
    for (const auto& e : experiments()) {
        auto* holder = e.name == "lemmas" ? app.add_subcommand("lemmas", "combinatorial lemma checks")->require_subcommand(1) : nullptr;
        auto* sub = holder ? holder->add_subcommand("verify", e.help) : app.add_subcommand(e.name, e.help);
        for (const auto& [k, v] : e.defaults) {
            cli_values[e.name][k];  // create the slot before binding
            sub->add_option("--" + k, cli_values[e.name][k], "default " + v);
        }
        subs[e.name] = sub;
    }
    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from a flat key = value config (key 'experiment' names it)");
    run->add_option("--config", config_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            auto cfg = read_config(config_path);
            if (!cfg.count("experiment")) throw config_error(config_path + ": missing key 'experiment'");
            const auto& e = find_experiment(cfg.at("experiment"));
            cfg.erase("experiment");
            if (cfg.count("out")) {
                if (out_dir.empty()) out_dir = cfg.at("out");
                cfg.erase("out");
            }
            return execute(e, cfg, out_dir);
        }
        for (const auto& e : experiments()) {
            if (!subs[e.name]->parsed()) continue;
            param_map given;
            for (const auto& [k, v] : cli_values[e.name])
                if (subs[e.name]->count("--" + k)) given[k] = v;
            return execute(e, given, out_dir);
        }
        throw config_error("no experiment selected");
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
