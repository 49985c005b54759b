#include "bethe/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "bethe/errors.hpp"
#include "bethe/greens.hpp"
#include "bethe/susy.hpp"
#include "bethe/tree.hpp"

namespace bethe {

using nlohmann::json;

namespace {

std::string variant_name(DisorderVariant v) {
    switch (v) {
        case DisorderVariant::Zero: return "zero";
        case DisorderVariant::DiagonalGaussianIID: return "diagonal_gaussian_iid";
        case DisorderVariant::GOE: return "goe";
    }
    return "zero";
}

DisorderVariant variant_from(const std::string& s) {
    if (s == "zero") return DisorderVariant::Zero;
    if (s == "diagonal_gaussian_iid" || s == "diagonal_gaussian" || s == "diagonal")
        return DisorderVariant::DiagonalGaussianIID;
    if (s == "goe" || s == "GOE") return DisorderVariant::GOE;
    throw validation_error("unknown disorder variant: " + s);
}

// round-trip formatting so equal doubles encode to equal bytes
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot open output file: " + path);
    os << body;
}

}  // namespace

json model_params_to_json(const ModelParams& p) {
    std::vector<double> a;
    a.reserve(static_cast<std::size_t>(p.m) * static_cast<std::size_t>(p.m));
    for (int i = 0; i < p.m; ++i)
        for (int j = 0; j < p.m; ++j) a.push_back(p.A(i, j));
    return json{{"K", p.K},
                {"m", p.m},
                {"A", a},
                {"lambda", p.lambda},
                {"disorder",
                 {{"variant", variant_name(p.disorder.variant)}, {"sigma", p.disorder.sigma}}}};
}

ModelParams model_params_from_json(const json& j) {
    const int K = j.at("K").get<int>();
    const int m = j.at("m").get<int>();
    const auto a = j.at("A").get<std::vector<double>>();
    if (a.size() != static_cast<std::size_t>(m) * static_cast<std::size_t>(m))
        throw validation_error("A must have m*m entries (row-major)");
    RMatrix A(m, m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            A(i, k) = a[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) +
                        static_cast<std::size_t>(k)];
    DisorderSpec d;
    if (j.contains("disorder")) {
        d.variant = variant_from(j.at("disorder").at("variant").get<std::string>());
        d.sigma = j.at("disorder").value("sigma", 1.0);
    }
    return validate_params(K, m, A, j.value("lambda", 0.0), d);
}

json green_to_json(const CMatrix& G) {
    const int m = static_cast<int>(G.rows());
    std::vector<std::vector<double>> re(static_cast<std::size_t>(m)),
        im(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            re[static_cast<std::size_t>(i)].push_back(G(i, j).real());
            im[static_cast<std::size_t>(i)].push_back(G(i, j).imag());
        }
    return json{{"re", re}, {"im", im}};
}

CMatrix green_from_json(const json& j) {
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    const auto im = j.at("im").get<std::vector<std::vector<double>>>();
    const int m = static_cast<int>(re.size());
    CMatrix G(m, m);
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            G(i, k) = cplx(re[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)],
                           im[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
    return G;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    c.model = model_params_from_json(j.at("model"));
    c.experiment = j.at("experiment").get<std::string>();
    if (j.contains("grids")) {
        const auto& g = j.at("grids");
        if (g.contains("E")) c.E_list = g.at("E").get<std::vector<double>>();
        if (g.contains("eta")) c.eta_list = g.at("eta").get<std::vector<double>>();
        if (g.contains("t")) c.t_list = g.at("t").get<std::vector<double>>();
        c.r_max = g.value("r_max", 1);
        c.r_top = g.value("r_top", 3);
        c.depth = g.value("depth", 0);
        c.ball_ell = g.value("ball_ell", 3);
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        c.n_samples = s.value("n_samples", static_cast<std::size_t>(2));
        if (s.contains("seed")) {
            c.seed = s.at("seed").get<uint64_t>();
            c.seed_set = true;
        }
    }
    if (j.contains("output")) {
        c.out_csv = j.at("output").value("csv", "");
        c.out_json = j.at("output").value("json", "");
    }
    c.workers = j.value("workers", 0);
    c.verify_level = j.value("level", "fast");

    static const char* known[] = {"interval",   "green",      "transport", "indicator",
                                  "wavepacket", "plancherel", "ward",      "verify"};
    bool ok = false;
    for (const char* k : known) ok = ok || c.experiment == k;
    if (!ok) throw validation_error("unknown experiment: " + c.experiment);

    const bool stochastic = !c.model.deterministic() &&
                            (c.experiment == "transport" || c.experiment == "indicator" ||
                             c.experiment == "ward" || c.experiment == "green" ||
                             c.experiment == "wavepacket" || c.experiment == "plancherel");
    if (stochastic && !c.seed_set)
        throw validation_error("seed is mandatory for stochastic experiments");
    return c;
}

std::string transport_csv(const std::vector<TransportRow>& rows) {
    std::string s = "E,eta,lambda,r_max,J,J_stderr,indicator\n";
    for (const auto& r : rows) {
        s += fmt(r.E) + "," + fmt(r.eta) + "," + fmt(r.lambda) + "," + std::to_string(r.r_max) +
             "," + fmt(r.J) + "," + fmt(r.J_stderr) + "," + fmt(r.indicator) + "\n";
    }
    return s;
}

json ward_report_to_json(const WardReport& rep, const ModelParams& p, ComplexEnergy z) {
    json checks = json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"stderr", c.stderr_},
                          {"pass", c.pass},
                          {"inconclusive", c.inconclusive}});
    return json{{"E", z.E},
                {"eta", z.eta},
                {"lambda", p.lambda},
                {"r_top", rep.r_top},
                {"n_samples", rep.n_samples},
                {"a_mean", rep.a_mean},
                {"a_stderr", rep.a_stderr},
                {"b_mean", rep.b_mean},
                {"b_stderr", rep.b_stderr},
                {"theta_theta_mean", rep.tt_mean},
                {"theta_theta_stderr", rep.tt_stderr},
                {"checks", checks},
                {"all_pass", rep.all_pass},
                {"inconclusive", rep.inconclusive}};
}

json plancherel_report_to_json(const PlancherelReport& pr, const UpperBoundReport& ub) {
    return json{{"lhs", pr.lhs},
                {"rhs", pr.rhs},
                {"reldiff", pr.reldiff},
                {"eta", pr.eta},
                {"quad_evals", pr.quad_evals},
                {"upper_bound",
                 {{"integral", ub.integral},
                  {"bound", ub.bound},
                  {"margin", ub.margin},
                  {"holds", ub.holds}}}};
}

json identity_results_to_json(const std::vector<IdentityResult>& results) {
    json arr = json::array();
    for (const auto& r : results) {
        json e{{"identity", r.name}, {"parameters", r.params}, {"pass", r.pass}};
        if (!r.pass) e["counterexample"] = r.detail;
        arr.push_back(e);
    }
    return arr;
}

// ---------------------------------------------------------------------------

int run_experiment(const RunConfig& cfg, std::ostream& out) {
    const ModelParams& p = cfg.model;

    auto depth_for = [&](double eta) {
        return cfg.depth > 0 ? cfg.depth : default_depth(p.K, eta);
    };
    auto need = [&](bool cond, const char* what) {
        if (!cond) throw validation_error(std::string("missing/empty grid: ") + what);
    };

    if (cfg.experiment == "interval") {
        const auto iv = spectral_interval(p);
        if (iv)
            out << "I_AK = (" << iv->first << ", " << iv->second << ")\n";
        else
            out << "I_AK = empty\n";
        out << "theorems_applicable = " << (p.theorems_applicable ? "true" : "false") << "\n";
        out << "free_spectrum =";
        for (const auto& b : free_spectrum(p)) out << " [" << b.first << ", " << b.second << "]";
        out << "\n";
        if (!cfg.out_json.empty()) {
            json j{{"model", model_params_to_json(p)},
                   {"theorems_applicable", p.theorems_applicable}};
            if (iv) j["I_AK"] = {iv->first, iv->second};
            json bands = json::array();
            for (const auto& b : free_spectrum(p)) bands.push_back({b.first, b.second});
            j["free_spectrum"] = bands;
            write_file(cfg.out_json, j.dump(2) + "\n");
        }
        return 0;
    }

    if (cfg.experiment == "green") {
        need(!cfg.E_list.empty() && !cfg.eta_list.empty(), "E/eta");
        json arr = json::array();
        for (double E : cfg.E_list)
            for (double eta : cfg.eta_list) {
                const ComplexEnergy z{E, eta};
                json e{{"E", E}, {"eta", eta}};
                if (p.deterministic()) {
                    e["halfspace"] = green_to_json(halfspace_green_fixedpoint(p, z));
                    e["diagonal"] = green_to_json(full_green_diag(p, z, depth_for(eta)));
                    const auto iv = spectral_interval(p);
                    if (iv && E > iv->first && E < iv->second) {
                        // closed-form transfer bilinears, oracle values for
                        // downstream transport checks
                        const auto b = closed_form_bilinears(p, E);
                        std::vector<std::vector<double>> tf;
                        for (int i = 0; i < p.m; ++i) {
                            tf.emplace_back();
                            for (int k = 0; k < p.m; ++k)
                                tf.back().push_back(b.theta_factor(i, k));
                        }
                        e["bilinears"] = json{{"xi_xi", b.xi_xi},
                                              {"xi_theta", b.xi_theta},
                                              {"theta_theta", b.theta_theta},
                                              {"theta_factor", tf}};
                    }
                } else {
                    const uint64_t key = rng_key(cfg.seed, 0u);
                    e["halfspace"] =
                        green_to_json(halfspace_green_sample(p, z, depth_for(eta), key));
                    e["diagonal"] = green_to_json(
                        full_green_diag_sample(p, z, depth_for(eta), rng_key(cfg.seed, 1u)));
                }
                arr.push_back(e);
            }
        const std::string body = arr.dump(2) + "\n";
        if (!cfg.out_json.empty()) write_file(cfg.out_json, body);
        out << "green: " << arr.size() << " entries\n";
        return 0;
    }

    if (cfg.experiment == "transport" || cfg.experiment == "indicator") {
        need(!cfg.E_list.empty() && !cfg.eta_list.empty(), "E/eta");
        std::vector<TransportRow> rows;
        for (double E : cfg.E_list)
            for (double eta : cfg.eta_list)
                rows.push_back(j_function(p, ComplexEnergy{E, eta}, cfg.r_max, depth_for(eta),
                                          cfg.n_samples, cfg.seed, cfg.workers));
        const std::string csv = transport_csv(rows);
        if (!cfg.out_csv.empty()) write_file(cfg.out_csv, csv);
        out << csv;
        bool all_tails = true;
        for (const auto& r : rows) all_tails = all_tails && r.tail_converged;
        if (!all_tails) out << "# note: tail estimate above 1% of J on some rows\n";
        return 0;
    }

    if (cfg.experiment == "wavepacket") {
        need(!cfg.t_list.empty(), "t");
        const auto tree = build_tree(p.K, cfg.ball_ell, TreeKind::Ball);
        const auto pots = sample_potential(p.disorder, p.m, cfg.seed,
                                           static_cast<std::size_t>(tree.n_vertices));
        std::string csv = "t,r2\n";
        for (double t : cfg.t_list) csv += fmt(t) + "," + fmt(r2_origin(p, tree, pots, t)) + "\n";
        if (!cfg.out_csv.empty()) write_file(cfg.out_csv, csv);
        out << csv;
        return 0;
    }

    if (cfg.experiment == "plancherel") {
        need(!cfg.eta_list.empty(), "eta");
        const auto tree = build_tree(p.K, cfg.ball_ell, TreeKind::Ball);
        const auto pots = sample_potential(p.disorder, p.m, cfg.seed,
                                           static_cast<std::size_t>(tree.n_vertices));
        json arr = json::array();
        for (double eta : cfg.eta_list) {
            const auto pr = plancherel_check(p, tree, pots, eta);
            const auto ub = upper_bound_check(p, tree, pots, eta);
            arr.push_back(plancherel_report_to_json(pr, ub));
            out << "plancherel eta=" << eta << " lhs=" << pr.lhs << " rhs=" << pr.rhs
                << " reldiff=" << pr.reldiff << " bound_holds=" << (ub.holds ? "yes" : "no")
                << "\n";
        }
        if (!cfg.out_json.empty()) write_file(cfg.out_json, arr.dump(2) + "\n");
        return 0;
    }

    if (cfg.experiment == "ward") {
        need(!cfg.E_list.empty() && !cfg.eta_list.empty(), "E/eta");
        const ComplexEnergy z{cfg.E_list.front(), cfg.eta_list.front()};
        const auto rep = ward_identity_check(p, z, cfg.r_top, depth_for(z.eta), cfg.n_samples,
                                             cfg.seed, cfg.workers);
        const json j = ward_report_to_json(rep, p, z);
        if (!cfg.out_json.empty()) write_file(cfg.out_json, j.dump(2) + "\n");
        for (const auto& c : rep.checks)
            out << (c.pass ? "[pass] " : (c.inconclusive ? "[????] " : "[FAIL] ")) << c.name
                << " value=" << c.value << " stderr=" << c.stderr_ << "\n";
        if (rep.inconclusive) {
            out << "statistical-inconclusive at the configured budget\n";
            return 4;
        }
        if (!rep.all_pass) throw numerical_error("ward identity suite failed");
        return 0;
    }

    if (cfg.experiment == "verify") {
        const auto results = verify_suite(cfg.verify_level == "full", cfg.seed_set ? cfg.seed : 1);
        if (!cfg.out_json.empty())
            write_file(cfg.out_json, identity_results_to_json(results).dump(2) + "\n");
        bool all = true;
        for (const auto& r : results) {
            out << (r.pass ? "[pass] " : "[FAIL] ") << r.name << " (" << r.params << ")"
                << (r.pass ? "" : " " + r.detail) << "\n";
            all = all && r.pass;
        }
        if (!all) throw numerical_error("identity suite failed");
        out << "all " << results.size() << " identities pass\n";
        return 0;
    }

    throw validation_error("unknown experiment: " + cfg.experiment);
}

}  // namespace bethe
