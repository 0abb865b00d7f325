#include "owns/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "owns/testbeds.hpp"

namespace owns::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OwnsError("cannot open output file: " + path.string());
    return out;
}

std::string fd(double v) { return format_double(v); }

cxd parse_complex(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw BadConfig(ctx + " must be a [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

RMat parse_matrix(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) throw BadConfig(ctx + " must be a nonempty array of rows");
    const size_t cols = j[0].size();
    RMat m(j.size(), cols);
    for (size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw BadConfig(ctx + " rows are ragged");
        for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

BoundaryKind parse_bc(const std::string& s, const std::string& ctx) {
    if (s == "periodic") return BoundaryKind::Periodic;
    if (s == "zero_dirichlet") return BoundaryKind::ZeroDirichlet;
    if (s == "wall_reflective") return BoundaryKind::WallReflective;
    throw BadConfig(ctx + ": unknown boundary condition '" + s + "'");
}

}  // namespace

void require_keys(const json& j, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional_keys, const std::string& ctx) {
    if (!j.is_object()) throw BadConfig(ctx + " must be a JSON object");
    std::set<std::string> allowed(required.begin(), required.end());
    allowed.insert(optional_keys.begin(), optional_keys.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!allowed.count(key)) throw BadConfig(ctx + ": unknown key '" + key + "'");
    }
    for (const auto& key : required)
        if (!j.contains(key)) throw BadConfig(ctx + ": missing required key '" + key + "'");
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec) {
    auto out = open_out(path);
    out << "index,re_alpha,im_alpha,label,re_alpha_eta,im_alpha_eta\n";
    for (int k = 0; k < spec.dim(); ++k) {
        out << k << ',' << fd(spec.alphas[k].real()) << ',' << fd(spec.alphas[k].imag()) << ','
            << (k < spec.n_plus ? "downstream" : "upstream") << ','
            << fd(spec.alphas_eta[k].real()) << ',' << fd(spec.alphas_eta[k].imag()) << '\n';
    }
}

void write_xi_csv(const std::filesystem::path& path, const RecursionParamSet& xi) {
    auto out = open_out(path);
    out << "j,re_beta_plus,im_beta_plus,re_beta_minus,im_beta_minus,origin\n";
    for (int j = 0; j < xi.n_beta(); ++j) {
        out << j << ',' << fd(xi.beta_plus[j].real()) << ',' << fd(xi.beta_plus[j].imag()) << ','
            << fd(xi.beta_minus[j].real()) << ',' << fd(xi.beta_minus[j].imag()) << ','
            << to_string(xi.origin) << '\n';
    }
}

void write_xi_json(const std::filesystem::path& path, const RecursionParamSet& xi) {
    ordered_json j;
    j["schema_version"] = 1;
    j["origin"] = to_string(xi.origin);
    ordered_json pairs = ordered_json::array();
    for (int k = 0; k < xi.n_beta(); ++k) {
        ordered_json p;
        p["j"] = k;
        p["beta_plus"] = {xi.beta_plus[k].real(), xi.beta_plus[k].imag()};
        p["beta_minus"] = {xi.beta_minus[k].real(), xi.beta_minus[k].imag()};
        pairs.push_back(p);
    }
    j["pairs"] = std::move(pairs);
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

RecursionParamSet read_xi_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw BadConfig("cannot open xi file: " + path.string());
    json j = json::parse(in, nullptr, true, true);
    require_keys(j, {"schema_version", "pairs"}, {"origin"}, "xi");
    if (j["schema_version"].get<int>() != 1) throw BadConfig("xi: unsupported schema_version");
    RecursionParamSet xi;
    const auto& pairs = j["pairs"];
    xi.beta_plus.resize(pairs.size());
    xi.beta_minus.resize(pairs.size());
    for (size_t k = 0; k < pairs.size(); ++k) {
        require_keys(pairs[k], {"j", "beta_plus", "beta_minus"}, {}, "xi.pairs");
        xi.beta_plus[k] = parse_complex(pairs[k]["beta_plus"], "beta_plus");
        xi.beta_minus[k] = parse_complex(pairs[k]["beta_minus"], "beta_minus");
    }
    xi.origin = ParamOrigin::User;
    return xi;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows) {
    auto out = open_out(path);
    out << "n_beta,selector,j_ownsp,j_ownsr,j_plus_max,j_minus_max\n";
    for (const auto& r : rows) {
        out << r.n_beta << ',' << r.selector << ',' << fd(r.j_ownsp) << ',' << fd(r.j_ownsr) << ','
            << fd(r.j_plus_max) << ',' << fd(r.j_minus_max) << '\n';
    }
}

void write_study_csv(const std::filesystem::path& path, const std::vector<ErrorStudyRecord>& records,
                     bool with_timings) {
    auto out = open_out(path);
    out << "n_beta,selector,method,J,proj_err,mode_err,bound,precondition_ok,beta_star_residual,"
           "wall_ms\n";
    for (const auto& r : records) {
        out << r.n_beta << ',' << to_string(r.selector) << ',' << to_string(r.method) << ','
            << fd(r.J) << ',' << fd(r.proj_err) << ',' << fd(r.mode_err) << ',' << fd(r.bound) << ','
            << (r.precondition_ok ? 1 : 0) << ',' << fd(r.beta_star_residual) << ',';
        if (with_timings) out << fd(r.wall_ms);
        out << '\n';
    }
}

void write_march_csv(const std::filesystem::path& path, const MarchResult& result,
                     bool with_timings) {
    auto out = open_out(path);
    out << "x,amplitude,n_factor_running,refresh_flag,j_ownsp,j_ownsr,wall_ms\n";
    for (size_t i = 0; i < result.xi_log.size(); ++i) {
        const auto& rec = result.xi_log[i];
        out << fd(rec.x) << ',' << fd(result.amplitude[static_cast<int>(i)]) << ','
            << fd(result.n_factor_running[static_cast<int>(i)]) << ',' << (rec.refreshed ? 1 : 0)
            << ',' << fd(rec.j_ownsp) << ',' << fd(rec.j_ownsr) << ',';
        if (with_timings) out << fd(rec.wall_ms);
        out << '\n';
    }
}

SystemConfig parse_system(const json& j) {
    require_keys(j, {}, {"testbed", "matrices", "disc"}, "system");
    SystemConfig cfg;
    if (j.contains("testbed")) {
        const auto& t = j["testbed"];
        require_keys(t,
                     {"name"},
                     {"u", "u0", "du", "delta", "a", "rho", "nodes", "span", "order", "bc"},
                     "system.testbed");
        const std::string name = t["name"].get<std::string>();
        const auto span = t.contains("span")
                              ? std::pair<double, double>{t["span"][0].get<double>(),
                                                          t["span"][1].get<double>()}
                              : std::pair<double, double>{0.0, 6.283185307179586};
        const int nodes = t.value("nodes", 8);
        const int order = t.value("order", 4);
        const double a = t.value("a", 1.0);
        const double rho = t.value("rho", 1.0);

        if (name == "uniform_euler_2d" || name == "uniform_euler_3d") {
            const double u = t.value("u", 0.5);
            const auto bc = parse_bc(t.value("bc", std::string("periodic")), "system.testbed");
            auto make = [=](double uu) {
                if (name == "uniform_euler_2d") {
                    UniformEuler2D p{uu, a, rho, nodes, span.first, span.second, order, bc};
                    return make_uniform_euler_2d(p);
                }
                UniformEuler3D p{uu, a, rho, nodes, span.first, span.second, order, bc};
                return make_uniform_euler_3d(p, {});
            };
            cfg.builder = make(u);
            cfg.builder_at_fraction = [=](double frac, double u_to) {
                return make(u + frac * (u_to - u));
            };
            cfg.description = name;
        } else if (name == "shear_2d") {
            ShearLayer2D p;
            p.u0 = t.value("u0", 0.5);
            p.du = t.value("du", 0.25);
            p.delta = t.value("delta", 0.8);
            p.a = a;
            p.rho = rho;
            p.nodes = nodes;
            p.span_lo = span.first;
            p.span_hi = span.second;
            p.scheme_order = order;
            p.bc = parse_bc(t.value("bc", std::string("zero_dirichlet")), "system.testbed");
            cfg.builder = make_shear_layer_2d(p);
            cfg.builder_at_fraction = [p](double frac, double u_to) {
                ShearLayer2D q = p;
                q.u0 = p.u0 + frac * (u_to - p.u0);
                return make_shear_layer_2d(q);
            };
            cfg.description = name;
        } else {
            throw BadConfig("unknown testbed '" + name + "'");
        }
        return cfg;
    }

    if (!j.contains("matrices") || !j.contains("disc"))
        throw BadConfig("system needs either a testbed or matrices + disc");
    const auto& m = j["matrices"];
    require_keys(m, {"A"}, {"B", "C"}, "system.matrices");
    const RMat A = parse_matrix(m["A"], "A");
    std::vector<RMat> B;
    if (m.contains("B"))
        for (const auto& b : m["B"]) B.push_back(parse_matrix(b, "B"));
    RMat C;
    if (m.contains("C")) C = parse_matrix(m["C"], "C");
    HyperbolicSystem sys(A, B, C);

    const auto& d = j["disc"];
    require_keys(d, {"nodes"}, {"span", "order", "bc", "wall_zero_chars"}, "system.disc");
    const int nodes = d["nodes"].get<int>();
    if (nodes < 1) throw BadConfig("system.disc.nodes must be >= 1");
    const double lo = d.contains("span") ? d["span"][0].get<double>() : 0.0;
    const double hi = d.contains("span") ? d["span"][1].get<double>() : 1.0;
    const int order = d.value("order", 4);
    const auto bc = parse_bc(d.value("bc", std::string("periodic")), "system.disc");
    std::vector<int> wall;
    if (d.contains("wall_zero_chars"))
        for (const auto& w : d["wall_zero_chars"]) wall.push_back(w.get<int>());

    cfg.builder.forms = {characteristic_form(sys)};
    cfg.builder.disc = nodes == 1 ? TransverseDiscretization::none()
                                  : make_transverse_uniform(nodes, lo, hi, order, bc, wall);
    cfg.description = "explicit";
    return cfg;
}

StudyConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw BadConfig("cannot open config: " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw BadConfig(std::string("config is not valid JSON: ") + e.what());
    }

    require_keys(j,
                 {"schema_version", "system", "s"},
                 {"omega_t", "selector", "n_beta", "n_beta_grid", "method", "c", "n_trials",
                  "march"},
                 "config");
    StudyConfig cfg;
    cfg.schema_version = j["schema_version"].get<int>();
    if (cfg.schema_version != 1) throw BadConfig("unsupported schema_version");
    cfg.system = parse_system(j["system"]);
    cfg.s = parse_complex(j["s"], "s");
    if (j.contains("omega_t")) {
        for (const auto& w : j["omega_t"]) cfg.omega_t.push_back(w.get<double>());
        cfg.system.builder.omega_t = cfg.omega_t;
    }
    if (j.contains("selector")) {
        const auto& sel = j["selector"];
        require_keys(sel, {}, {"kind", "seed", "n_starts", "exclude_im_above", "heuristic"},
                     "selector");
        cfg.selector_kind = sel.value("kind", std::string("greedy"));
        cfg.seed = sel.value("seed", std::uint64_t{1});
        cfg.n_starts = sel.value("n_starts", 8);
        if (sel.contains("exclude_im_above"))
            cfg.exclude_im_above = sel["exclude_im_above"].get<double>();
        if (sel.contains("heuristic")) {
            const auto& h = sel["heuristic"];
            require_keys(h, {}, {"anchor_plus", "anchor_minus", "ratio"}, "selector.heuristic");
            if (h.contains("anchor_plus"))
                cfg.heuristic.anchor_plus = parse_complex(h["anchor_plus"], "anchor_plus");
            if (h.contains("anchor_minus"))
                cfg.heuristic.anchor_minus = parse_complex(h["anchor_minus"], "anchor_minus");
            cfg.heuristic.ratio = h.value("ratio", 1.0);
        }
    }
    if (j.contains("n_beta")) {
        const int nb = j["n_beta"].get<int>();
        if (nb < 1) throw BadConfig("n_beta must be >= 1");
        cfg.n_beta_grid = {nb};
    }
    if (j.contains("n_beta_grid")) {
        for (const auto& nb : j["n_beta_grid"]) {
            cfg.n_beta_grid.push_back(nb.get<int>());
            if (cfg.n_beta_grid.back() < 1) throw BadConfig("n_beta grid entries must be >= 1");
        }
    }
    cfg.method = j.value("method", std::string("ownsp"));
    if (cfg.method != "ownsp" && cfg.method != "ownsr" && cfg.method != "both" &&
        cfg.method != "exact")
        throw BadConfig("method must be ownsp | ownsr | both | exact");
    if (j.contains("c")) cfg.c = parse_complex(j["c"], "c");
    cfg.n_trials = j.value("n_trials", 20);
    if (j.contains("march")) {
        const auto& m = j["march"];
        require_keys(m,
                     {"stations"},
                     {"x0", "x1", "substeps", "amplitude_var", "strategy", "flavor",
                      "with_objectives", "u_ramp_to"},
                     "march");
        cfg.stations = m["stations"].get<int>();
        if (cfg.stations < 2) throw BadConfig("march.stations must be >= 2");
        cfg.x0 = m.value("x0", 0.0);
        cfg.x1 = m.value("x1", 1.0);
        cfg.substeps = m.value("substeps", 1);
        cfg.amplitude_var = m.value("amplitude_var", 1);
        cfg.strategy = m.value("strategy", std::string("track"));
        cfg.flavor = m.value("flavor", std::string("ownsp"));
        cfg.with_objectives = m.value("with_objectives", true);
        if (m.contains("u_ramp_to")) cfg.u_ramp_to = m["u_ramp_to"].get<double>();
    }
    return cfg;
}

std::string error_json(const std::string& type, const std::string& message) {
    ordered_json j;
    j["error"]["type"] = type;
    j["error"]["message"] = message;
    return j.dump();
}

void write_metadata(const std::filesystem::path& path, const std::string& command,
                    const std::filesystem::path& config_path, std::uint64_t seed, int threads) {
    ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["config"] = config_path.string();
    j["seed"] = seed;
    j["threads"] = threads;
    j["code_version"] = "0.1.0";
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    j["generated_at"] = buf;
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace owns::io
