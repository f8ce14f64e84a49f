#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "formdecomp/counterexample.hpp"
#include "formdecomp/decompose.hpp"
#include "formdecomp/errors.hpp"
#include "formdecomp/gauges.hpp"
#include "formdecomp/linalg.hpp"
#include "formdecomp/matrix_io.hpp"
#include "formdecomp/rng.hpp"
#include "formdecomp/tensor.hpp"

using nlohmann::json;
using namespace formdecomp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitInternal = 2;
constexpr int kExitCertifiedInfeasible = 3;
constexpr int kExitUndecided = 4;
constexpr int kExitIllConditioned = 5;

const char* membership_name(Membership m) {
    switch (m) {
        case Membership::inside: return "inside";
        case Membership::outside: return "outside";
        default: return "undecided";
    }
}

const char* status_name(SolveStatus s) {
    switch (s) {
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::certified_infeasible: return "certified_infeasible";
        default: return "undecided";
    }
}

json certificate_to_json(const SeparationCertificate& cert) {
    return json{{"T0", matrix_to_json(cert.t0)},
                {"delta_value", cert.delta_value},
                {"dual_pair_value", cert.dual_pair_value}};
}

int cmd_counterexample(std::uint64_t seed, bool as_json, const std::string& instance_path) {
    CounterexampleInstance inst;
    if (instance_path.empty()) {
        inst = build_instance();
    } else {
        json j = load_json(instance_path);
        if (!j.is_object() || !j.contains("A") || !j.contains("C") || !j.contains("U"))
            throw InvalidInput("instance file needs A, C, U");
        double c_scale = j.value("c", 0.0);
        inst = build_instance(matrix_from_json(j["A"]), matrix_from_json(j["C"]),
                              matrix_from_json(j["U"]), c_scale);
    }
    CounterexampleReport rep = verify_all(inst, seed);

    if (as_json) {
        json stages = json::array();
        for (const auto& s : rep.stages)
            stages.push_back(json{{"name", s.name}, {"pass", s.pass}, {"value", s.value}});
        json out{{"stages", stages},
                 {"all_pass", rep.all_pass},
                 {"N1", rep.n1},
                 {"N2", rep.n2},
                 {"N3", rep.n3},
                 {"delta", rep.delta_value},
                 {"kstar", rep.kstar_value},
                 {"convk_lower", rep.convk_lower},
                 {"convk_upper", rep.convk_upper},
                 {"separation_value", rep.separation_value},
                 {"decompose_residual", rep.decompose_residual}};
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("N1 = %.17g\nN2 = %.17g\nN3 = %.17g\n", rep.n1, rep.n2, rep.n3);
        for (const auto& s : rep.stages)
            std::printf("[%s] %-22s value %.12g  (%s)\n", s.pass ? "PASS" : "FAIL",
                        s.name.c_str(), s.value, s.detail.c_str());
        std::printf("%s\n", rep.all_pass ? "all stages passed" : "some stage FAILED");
    }
    return rep.all_pass ? kExitOk : kExitParse;
}

int cmd_gauge(const std::string& family_path, const std::string& t_path, double tol,
              std::uint64_t seed, bool as_json) {
    FormFamily fam = load_family(family_path);
    CMatrix t = load_matrix(t_path);
    MembershipResult mem = in_convk_full(fam, t, tol, seed);
    const GaugeReport& rep = mem.report;
    if (as_json) {
        json atoms = json::array();
        for (const auto& a : rep.atoms)
            atoms.push_back(json{{"x", cvector_to_json(a.x)},
                                 {"y", cvector_to_json(a.y)},
                                 {"weight", a.weight}});
        json out{{"delta", rep.delta_value},
                 {"convk_lower", rep.convk_lower},
                 {"convk_upper", rep.convk_upper},
                 {"membership", membership_name(mem.status)},
                 {"iterations", rep.iterations},
                 {"converged", rep.converged},
                 {"atoms", atoms},
                 {"dual", matrix_to_json(rep.dual_w)}};
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("delta      = %.17g\n", rep.delta_value);
        std::printf("convK in  [%.17g, %.17g]\n", rep.convk_lower, rep.convk_upper);
        std::printf("membership = %s\n", membership_name(mem.status));
    }
    return kExitOk;
}

std::vector<double> parse_eps_grid(const std::string& csv) {
    std::vector<double> grid;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        if (comma == std::string::npos) comma = csv.size();
        try {
            grid.push_back(std::stod(csv.substr(pos, comma - pos)));
        } catch (const std::exception&) {
            throw InvalidInput("--eps-grid: not a number: " + csv.substr(pos, comma - pos));
        }
        pos = comma + 1;
    }
    if (grid.empty()) throw InvalidInput("--eps-grid: empty grid");
    return grid;
}

int cmd_decompose(const std::string& family_path, const std::string& u_path, double tol,
                  int max_iter, const std::string& eps_spec, const std::string& out_dir,
                  std::uint64_t seed, bool as_json) {
    FormFamily fam = load_family(family_path);
    CMatrix u = load_matrix(u_path);

    EpsDecomposeResult eps_result;
    DecomposeResult result;
    bool used_eps = false;
    if (!eps_spec.empty() || !fam.all_invertible()) {
        std::vector<double> grid =
            eps_spec.empty() ? default_eps_grid() : parse_eps_grid(eps_spec);
        eps_result = eps_decompose(fam, u, grid, tol, max_iter);
        result = eps_result.result;
        used_eps = true;
    } else {
        result = decompose_with_certification(fam, u, tol, max_iter, seed);
    }
    if (used_eps && result.status == SolveStatus::undecided) {
        auto cert = find_certificate(fam, u, seed);
        if (cert) {
            result.status = SolveStatus::certified_infeasible;
            result.certificate = std::move(*cert);
        }
    }

    std::filesystem::create_directories(out_dir);
    json report{{"status", status_name(result.status)},
                {"residual", result.decomposition.residual},
                {"per_term_norms", result.decomposition.per_term_norms},
                {"iterations", result.decomposition.iterations}};
    if (used_eps) {
        report["eps_used"] = eps_result.eps_used;
        json traj = json::array();
        for (const auto& step : eps_result.trajectory)
            traj.push_back(json{{"eps", step.eps},
                                {"status", status_name(step.status)},
                                {"per_term_norms", step.per_term_norms},
                                {"residual", step.residual}});
        report["eps_trajectory"] = traj;
    }
    if (result.status == SolveStatus::feasible) {
        VerifyReport check =
            verify_decomposition(fam, u, result.decomposition.terms, std::max(tol, 1e-10), seed);
        report["verified"] = check.ok;
        report["term_slack"] = check.slack;
        for (std::size_t i = 0; i < result.decomposition.terms.size(); ++i) {
            save_matrix(out_dir + "/term_" + std::to_string(i + 1) + ".json",
                        result.decomposition.terms[i]);
            save_matrix(out_dir + "/witness_" + std::to_string(i + 1) + ".json",
                        result.decomposition.witnesses[i]);
        }
    }
    if (result.certificate) {
        report["certificate"] = certificate_to_json(*result.certificate);
        save_matrix(out_dir + "/certificate_T0.json", result.certificate->t0);
    }
    save_json(out_dir + "/report.json", report);

    if (as_json)
        std::cout << report.dump(2) << '\n';
    else
        std::printf("status: %s  residual %.3g  (report in %s)\n", status_name(result.status),
                    result.decomposition.residual, out_dir.c_str());
    switch (result.status) {
        case SolveStatus::feasible: return kExitOk;
        case SolveStatus::certified_infeasible: return kExitCertifiedInfeasible;
        default: return kExitUndecided;
    }
}

int cmd_svd_demo(const std::string& c_path, const std::string& d_path, const std::string& w_path,
                 const std::vector<std::string>& second_pair, bool as_json) {
    CMatrix c = load_matrix(c_path);
    CMatrix d = load_matrix(d_path);
    TensorRep w = load_tensor(w_path);
    TensorRep canon = canonical_rep(w);

    AlphaBeta ab = alpha_beta(canon, c, d);
    HatSystem hats = hat_construction(canon, c, d);

    double diag_resid = 0.0;
    for (std::size_t i = 0; i < canon.size(); ++i) {
        diag_resid = std::max(
            diag_resid, vnorm(vsub(c.apply(hats.xi_hat[i]), vscale(hats.d[i], hats.rho_hat[i]))));
        diag_resid = std::max(
            diag_resid, vnorm(vsub(d.apply(hats.eta_hat[i]),
                                   vscale(1.0 / hats.d[i], hats.sigma_hat[i]))));
    }
    TensorRep hat_rep;
    for (std::size_t i = 0; i < canon.size(); ++i)
        hat_rep.pairs.emplace_back(hats.xi_hat[i], hats.eta_hat[i]);
    double recon_resid =
        canon.empty() ? 0.0 : max_abs_diff(induced_matrix(hat_rep), induced_matrix(canon));

    json out{{"alpha", matrix_to_json(ab.alpha)},
             {"beta", matrix_to_json(ab.beta)},
             {"d", hats.d},
             {"degenerate", hats.degenerate},
             {"pi_w", pi_norm(w)},
             {"pi_moved", pi_norm(apply_pair(c, d, w))},
             {"diag_residual", diag_resid},
             {"reconstruction_residual", recon_resid}};

    if (!second_pair.empty()) {
        CMatrix e = load_matrix(second_pair[0]);
        CMatrix f = load_matrix(second_pair[1]);
        CompatReport compat = three_term_compat(canon, c, d, e, f);
        out["compatible"] = compat.compatible;
        out["compat_degenerate"] = compat.degenerate;
        out["max_unitary_diff"] = compat.max_entry_diff;
    }

    if (as_json) {
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("pi(w) = %.17g, pi((C(x)D)w) = %.17g\n", out["pi_w"].get<double>(),
                    out["pi_moved"].get<double>());
        std::printf("d =");
        for (double dv : hats.d) std::printf(" %.12g", dv);
        std::printf("%s\n", hats.degenerate ? "  (degenerate singular values)" : "");
        std::printf("diagonalization residual %.3g, reconstruction residual %.3g\n", diag_resid,
                    recon_resid);
        if (out.contains("compatible"))
            std::printf("second pair compatible: %s (max unitary diff %.3g)\n",
                        out["compatible"].get<bool>() ? "yes" : "no",
                        out["max_unitary_diff"].get<double>());
    }
    return kExitOk;
}

int cmd_random_suite(int trials, std::size_t dim, std::uint64_t seed, int terms, bool as_json) {
    Rng rng(seed);
    int passed = 0, failed = 0;
    json details = json::array();

    if (terms == 2) {
        for (int t = 0; t < trials; ++t) {
            std::size_t n = dim > 0 ? dim : 2 + static_cast<std::size_t>(rng.uniform() * 3);
            CMatrix id = CMatrix::identity(n);
            CMatrix a = random_invertible(rng, n, 1e3);
            CMatrix b = random_invertible(rng, n, 1e3);
            CMatrix u = random_contraction(rng, n, 0.99) +
                        b.adjoint() * random_contraction(rng, n, 0.99) * a;
            FormFamily fam = FormFamily::make({{id, id}, {a, b}});
            DecomposeResult r = decompose(fam, u, 1e-8, 20000);
            bool ok = r.status == SolveStatus::feasible && r.decomposition.residual <= 1e-8;
            ok ? ++passed : ++failed;
            details.push_back(json{{"trial", t},
                                   {"dim", n},
                                   {"status", status_name(r.status)},
                                   {"residual", r.decomposition.residual}});
        }
    } else if (terms == 3) {
        CounterexampleInstance inst = build_instance();
        FormFamily fam = inst.family();
        for (int t = 0; t < trials; ++t) {
            std::uint64_t s = seed + static_cast<std::uint64_t>(t);
            bool ok = false;
            double value = 0.0;
            try {
                SeparatingForm sf = find_separating_form(fam, inst.T0, 1e-6, s);
                DecomposeResult r = decompose_with_certification(fam, sf.u_star, 1e-8, 20000, s);
                ok = r.status == SolveStatus::certified_infeasible;
                value = sf.certificate.dual_pair_value;
            } catch (const PreconditionFailed&) {
                ok = false;
            }
            ok ? ++passed : ++failed;
            details.push_back(json{{"trial", t}, {"pair_value", value}, {"certified", ok}});
        }
    } else {
        throw InvalidInput("random-suite: only --terms 2 and --terms 3 are available");
    }

    if (as_json) {
        json out{{"terms", terms}, {"passed", passed}, {"failed", failed}, {"trials", details}};
        std::cout << out.dump(2) << '\n';
    } else {
        std::printf("suite terms=%d: %d/%d passed\n", terms, passed, passed + failed);
    }
    return failed == 0 ? kExitOk : kExitParse;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gauges, decompositions and certificates for sesquilinear forms"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    bool as_json = false;
    std::string instance_path;
    auto* cx = app.add_subcommand("counterexample", "run the two-dimensional instance pipeline");
    cx->add_option("--seed", seed, "search seed");
    cx->add_flag("--json", as_json, "machine-readable output");
    cx->add_option("--instance", instance_path, "override the built-in instance (JSON)");

    std::string family_path, t_path;
    double gauge_tol = 1e-6;
    std::uint64_t gauge_seed = 1;
    bool gauge_json = false;
    auto* gauge = app.add_subcommand("gauge", "delta and conv(K) gauges of an operator");
    gauge->add_option("family", family_path, "family JSON file")->required();
    gauge->add_option("T", t_path, "operator JSON file")->required();
    gauge->add_option("--tol", gauge_tol, "membership tolerance");
    gauge->add_option("--seed", gauge_seed, "search seed");
    gauge->add_flag("--json", gauge_json, "machine-readable output");

    std::string dec_family, dec_u, eps_spec, out_dir = "decomp_out";
    double dec_tol = 1e-8;
    int max_iter = 20000;
    std::uint64_t dec_seed = 1;
    bool dec_json = false;
    auto* dec = app.add_subcommand("decompose", "split an operator against a family");
    dec->add_option("family", dec_family, "family JSON file")->required();
    dec->add_option("U", dec_u, "operator JSON file")->required();
    dec->add_option("--tol", dec_tol, "residual tolerance");
    dec->add_option("--max-iter", max_iter, "projection iteration cap");
    dec->add_option("--eps-grid", eps_spec, "comma-separated regularization grid");
    dec->add_option("--out", out_dir, "output directory");
    dec->add_option("--seed", dec_seed, "certificate search seed");
    dec->add_flag("--json", dec_json, "machine-readable output");

    std::string svd_c, svd_d, svd_w;
    std::vector<std::string> second_pair;
    bool svd_json = false;
    auto* demo = app.add_subcommand("svd-demo", "diagonalization data for a tensor and a pair");
    demo->add_option("C", svd_c, "left operator JSON file")->required();
    demo->add_option("D", svd_d, "right operator JSON file")->required();
    demo->add_option("w", svd_w, "tensor JSON file")->required();
    demo->add_option("--second-pair", second_pair, "E and F JSON files")->expected(2);
    demo->add_flag("--json", svd_json, "machine-readable output");

    int trials = 20, terms = 2;
    std::size_t suite_dim = 0;
    std::uint64_t suite_seed = 1;
    bool suite_json = false;
    auto* suite = app.add_subcommand("random-suite", "randomized solver and gauge suites");
    suite->add_option("--trials", trials, "number of trials");
    suite->add_option("--dim", suite_dim, "fixed dimension (0 = random 2..4)");
    suite->add_option("--seed", suite_seed, "suite seed");
    suite->add_option("--terms", terms, "2 = feasibility suite, 3 = separation suite");
    suite->add_flag("--json", suite_json, "machine-readable output");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cx->parsed()) return cmd_counterexample(seed, as_json, instance_path);
        if (gauge->parsed())
            return cmd_gauge(family_path, t_path, gauge_tol, gauge_seed, gauge_json);
        if (dec->parsed())
            return cmd_decompose(dec_family, dec_u, dec_tol, max_iter, eps_spec, out_dir,
                                 dec_seed, dec_json);
        if (demo->parsed()) return cmd_svd_demo(svd_c, svd_d, svd_w, second_pair, svd_json);
        if (suite->parsed())
            return cmd_random_suite(trials, suite_dim, suite_seed, terms, suite_json);
    } catch (const IllConditioned& e) {
        std::cerr << "ill-conditioned input: " << e.what() << '\n';
        return kExitIllConditioned;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
