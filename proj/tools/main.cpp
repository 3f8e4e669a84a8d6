// Command-line front end: derivative certification, covering-number and rate
// tables, noisy-recovery fits, Gronwall verification, and simulation ladders.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "odes/builtins.hpp"
#include "odes/covering.hpp"
#include "odes/deriv.hpp"
#include "odes/estimators.hpp"
#include "odes/gronwall.hpp"
#include "odes/rates.hpp"
#include "odes/simulate.hpp"

using json = nlohmann::json;
using namespace odes;

namespace {

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

OdeInstance ode_from_arg(const std::string& arg) {
    if (std::filesystem::exists(arg)) {
        const auto kv = read_kv_file(arg);
        OdeInstance ode = builtin_ode(kv.count("f") ? kv.at("f") : "sin");
        if (kv.count("x0")) ode.x0 = std::stod(kv.at("x0"));
        if (kv.count("y0")) ode.y0 = std::stod(kv.at("y0"));
        if (kv.count("a")) ode.a = std::stod(kv.at("a"));
        if (kv.count("b")) ode.b = std::stod(kv.at("b"));
        if (kv.count("beta_max")) ode.beta_max = std::stoi(kv.at("beta_max"));
        return ode;
    }
    return builtin_ode(arg);
}

void write_or_print(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(path);
        if (!out) throw IoError("cannot open " + path);
        out << j.dump(2) << "\n";
    }
}

std::vector<double> parse_sweep(const std::string& spec, double fallback) {
    // "lo:hi:count" -> linear grid; empty -> the single fallback delta
    if (spec.empty()) return {fallback};
    std::istringstream is(spec);
    std::string a, b, c;
    std::getline(is, a, ':');
    std::getline(is, b, ':');
    std::getline(is, c, ':');
    const double lo = std::stod(a), hi = std::stod(b);
    const int count = std::stoi(c);
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = (count == 1) ? lo : lo + (hi - lo) * i / (count - 1);
    return out;
}

ClassConstants consts_from_file(const std::string& path) {
    if (path.empty()) return ClassConstants::make(1.0, 1.0);
    const auto kv = read_kv_file(path);
    auto get = [&](const char* key, double dflt) {
        return kv.count(key) ? std::stod(kv.at(key)) : dflt;
    };
    return ClassConstants::make(get("C0", 1.0), get("b", 1.0), get("L", 1.0), get("L_K", 1.0),
                                static_cast<int>(get("K", 1)), static_cast<int>(get("m", 1)));
}

int cmd_derivs(const std::string& ode_arg, int kmax, int grid_points,
               const std::string& json_out) {
    const OdeInstance ode = ode_from_arg(ode_arg);
    const double alpha = existence_interval(ode);
    std::vector<double> grid(grid_points);
    for (int i = 0; i < grid_points; ++i)
        grid[i] = ode.x0 + alpha * i / std::max(grid_points - 1, 1);

    const auto certs = certify_bounds(ode, kmax, grid);
    json arr = json::array();
    for (const auto& c : certs) {
        arr.push_back({{"k", c.order},
                       {"observed_max", c.observed_max},
                       {"bound", c.bound},
                       {"slack", c.slack}});
        std::cout << "k=" << c.order << "  max|y^(k)| = " << c.observed_max
                  << "  bound = " << c.bound << "  slack = " << c.slack << "\n";
    }
    const auto expansion = (ode.kind == OdeKind::autonomous) ? expand_autonomous(kmax)
                                                             : expand_nonautonomous(kmax);
    std::cout << "expansion order " << kmax << ": " << expansion.terms.size()
              << " distinct terms, total multiplicity " << expansion.total_multiplicity()
              << "\n";
    if (!json_out.empty())
        write_or_print({{"ode", ode_arg},
                        {"alpha", alpha},
                        {"certificates", arr},
                        {"total_multiplicity", expansion.total_multiplicity()}},
                       json_out);
    return 0;
}

int cmd_bounds(const std::string& formula, double delta, int beta, int gamma,
               const std::string& consts_path, const std::string& sweep,
               const std::string& kind, const std::string& target,
               const std::string& csv_out) {
    const ClassConstants consts = consts_from_file(consts_path);
    const OdeKind ode_kind =
        (kind == "autonomous") ? OdeKind::autonomous : OdeKind::nonautonomous;
    const CoverTarget cover_target = (target == "first_derivatives")
                                         ? CoverTarget::first_derivatives
                                         : CoverTarget::solutions;

    std::vector<std::pair<double, BoundReport>> rows;
    for (double d : parse_sweep(sweep, delta)) {
        if (formula == "kolmogorov") {
            rows.push_back({d, BoundReport::from_terms(
                                   BoundFormula::KolmogorovUpper,
                                   {{"power", kolmogorov_lower(d, gamma)},
                                    {"log_count", (gamma + 1) * std::log(1.0 / d)}},
                                   gamma)});
            rows.push_back({d, BoundReport::from_terms(BoundFormula::KolmogorovLower,
                                                       {{"power", kolmogorov_lower(d, gamma)}},
                                                       gamma)});
        } else if (formula == "general") {
            auto cover = [&](double dd) { return kolmogorov_upper(dd, gamma); };
            rows.push_back({d, general_bound(d, cover, consts)});
        } else if (formula == "parametric") {
            rows.push_back({d, parametric_bound(d, consts)});
        } else if (formula == "z") {
            const auto z = z_bounds(d, gamma, consts);
            rows.push_back({d, BoundReport::from_terms(BoundFormula::Z1, {{"Z1", z.z1}}, gamma)});
            rows.push_back({d, BoundReport::from_terms(BoundFormula::Z2, {{"Z2", z.z2}}, gamma)});
            rows.push_back({d, BoundReport::from_terms(BoundFormula::Z3, {{"Z3", z.z3}}, gamma)});
        } else if (formula == "w") {
            const auto w = w_bounds(d, gamma, consts);
            rows.push_back({d, BoundReport::from_terms(BoundFormula::W1, {{"W1", w.w1}}, gamma)});
            rows.push_back({d, BoundReport::from_terms(BoundFormula::W2, {{"W2", w.w2}}, gamma)});
            rows.push_back({d, BoundReport::from_terms(BoundFormula::W3, {{"W3", w.w3}}, gamma)});
        } else if (formula == "solution") {
            rows.push_back({d, solution_class_bound(d, beta, consts, ode_kind, cover_target)});
        } else if (formula == "separable") {
            rows.push_back(
                {d, BoundReport::from_terms(BoundFormula::SeparableLower,
                                            {{"power", separable_lower(d, beta, cover_target)}})});
        } else {
            throw DomainError("unknown formula: " + formula);
        }
    }
    for (const auto& [d, rep] : rows)
        std::cout << to_string(rep.formula) << " delta=" << d << " value=" << rep.value
                  << (rep.minimizing_gamma ? " gamma=" + std::to_string(*rep.minimizing_gamma)
                                           : "")
                  << "\n";
    if (!csv_out.empty()) write_bound_reports_csv(rows, csv_out);
    return 0;
}

int cmd_rates(long long n, double sigma, int beta, const std::string& kind, int figure,
              double delta, const std::string& csv_out) {
    if (figure == 1) {
        const auto rows = figure1_series(delta, std::max(beta, 8));
        if (!csv_out.empty())
            write_figure_csv(rows, csv_out);
        else
            for (const auto& r : rows)
                std::cout << r.gamma << "," << r.series << "," << r.value << "\n";
        std::cout << "crossover gamma* = " << figure1_crossover(delta, std::max(beta, 8))
                  << "\n";
        return 0;
    }
    RateParams p{n, sigma, beta};
    if (figure == 2) {
        const auto rows = figure2_series(p, std::max(beta, 8));
        if (!csv_out.empty())
            write_figure_csv(rows, csv_out);
        else
            for (const auto& r : rows)
                std::cout << r.gamma << "," << r.series << "," << r.value << "\n";
        return 0;
    }
    const OdeKind ode_kind =
        (kind == "autonomous") ? OdeKind::autonomous : OdeKind::nonautonomous;
    const RadiusReport cr = critical_radius(p, ode_kind);
    const RadiusReport kr = kernel_radius(p);
    json j{{"n", n},
           {"sigma", sigma},
           {"beta", beta},
           {"critical_radius",
            {{"r_squared", cr.r_squared},
             {"gamma", cr.minimizing_gamma},
             {"branch", to_string(cr.branch)},
             {"active_term", cr.active_term}}},
           {"kernel_radius",
            {{"r_squared", kr.r_squared},
             {"gamma", kr.minimizing_gamma},
             {"active_term", kr.active_term}}},
           {"standard_class_radius", standard_class_radius(beta + 1, p)},
           {"sample_threshold", sample_threshold(beta, sigma)},
           {"asymptotic_constants_unity", true}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

DesignSample read_xy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file " + path);
    DesignSample s;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        std::getline(ls, a, ',');
        std::getline(ls, b, ',');
        try {
            const double x = std::stod(a), y = std::stod(b);
            s.xs.push_back(x);
            s.ys.push_back(y);
        } catch (...) {
            continue;  // header line
        }
    }
    return s;
}

int cmd_fit(const std::string& method, int beta, const std::string& variant, double C, bool cv,
            int R, int T, const std::string& data_path, const std::string& truth_id,
            const std::string& json_out) {
    const DesignSample data = read_xy_csv(data_path);
    const OdeKind kind =
        (variant == "autonomous") ? OdeKind::autonomous : OdeKind::nonautonomous;

    FitModel fit;
    if (method == "krr")
        fit = cv ? fit_constrained_krr_cv(data, beta, kind)
                 : fit_constrained_krr(data, beta, kind, C);
    else if (method == "spline")
        fit = fit_standard_spline(data);
    else if (method == "nls" || method == "picard") {
        OdeParamModel model;
        model.f_param = [](double, double y, const std::vector<double>& th) {
            return -th[0] * y;
        };
        model.theta_dim = 1;
        model.y0_bound = 1.0;
        model.b = 1.0;
        fit = (method == "nls") ? fit_nls(data, model)
                                : fit_picard(data, model, lookup_truth(truth_id.empty()
                                                                          ? "linear:0.5"
                                                                          : truth_id)
                                                              .y0,
                                             R, T);
    } else {
        throw DomainError("unknown method: " + method);
    }

    json j{{"method", to_string(fit.kind)},
           {"coefficients",
            {{"intercepts", fit.intercepts}, {"weights", fit.weights}, {"y0_hat", fit.y0_hat}}},
           {"chosen_C", fit.chosen_C},
           {"diagnostics",
            {{"objective", fit.diagnostics.objective},
             {"kkt_residual", fit.diagnostics.kkt_residual},
             {"iterations", fit.diagnostics.iterations},
             {"converged", fit.diagnostics.converged},
             {"constraint_slacks", fit.diagnostics.constraint_slacks}}}};
    if (!truth_id.empty()) {
        const TruthSpec truth = lookup_truth(truth_id);
        j["in_sample_mse"] = in_sample_mse(fit, truth.y, data.xs);
    }
    write_or_print(j, json_out);
    return 0;
}

std::function<double(double, const std::vector<double>&)> rhs_from_name(const std::string& id) {
    const auto split = id.find(':');
    const std::string head = id.substr(0, split);
    const double arg = (split == std::string::npos) ? 0.0 : std::stod(id.substr(split + 1));
    if (head == "exp") return [](double, const std::vector<double>& w) { return w[0]; };
    if (head == "decay")
        return [arg](double, const std::vector<double>& w) { return -arg * w[0]; };
    if (head == "siny") return [](double, const std::vector<double>& w) { return std::sin(w[0]); };
    if (head == "siny_plus_cosx")
        return [arg](double x, const std::vector<double>& w) {
            return std::sin(w[0]) + arg * std::cos(x);
        };
    if (head == "zero") return [](double, const std::vector<double>&) { return 0.0; };
    throw DomainError("unknown pair right-hand side: " + id);
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

int cmd_gronwall(const std::string& pair_path, int m, int grid_points,
                 const std::string& json_out) {
    OdePair pair;
    if (!pair_path.empty()) {
        const auto kv = read_kv_file(pair_path);
        pair.m = m;
        pair.f = rhs_from_name(kv.count("f") ? kv.at("f") : "exp");
        pair.g = rhs_from_name(kv.count("g") ? kv.at("g") : "exp");
        pair.y0 = kv.count("y0") ? parse_doubles(kv.at("y0")) : std::vector<double>{1.0};
        pair.z0 = kv.count("z0") ? parse_doubles(kv.at("z0")) : std::vector<double>{0.9};
        pair.L = kv.count("L") ? std::stod(kv.at("L")) : 1.0;
        const double phi0 = kv.count("phi") ? std::stod(kv.at("phi")) : 0.0;
        pair.phi = [phi0](double) { return phi0; };
        pair.a0 = kv.count("a0") ? std::stod(kv.at("a0")) : 0.0;
        pair.a = kv.count("a") ? std::stod(kv.at("a")) : 1.0;
        pair.b = kv.count("b") ? std::stod(kv.at("b")) : 3.0;
        pair.C0 = kv.count("C0") ? std::stod(kv.at("C0")) : 1.0;
    } else {
        pair.m = 1;
        pair.f = rhs_from_name("exp");
        pair.g = rhs_from_name("exp");
        pair.y0 = {1.0};
        pair.z0 = {0.9};
        pair.L = 1.0;
        pair.phi = [](double) { return 0.0; };
        pair.a = 1.0;
        pair.b = 3.0;
        pair.C0 = 1.0;
    }

    std::vector<double> grid(grid_points);
    for (int i = 0; i < grid_points; ++i)
        grid[i] = pair.a0 + pair.a * i / std::max(grid_points - 1, 1);
    const ViolationReport rep = verify_pair(pair, grid, pair.m);
    json j{{"max_ratio", rep.max_ratio},
           {"worst_x", rep.worst_x},
           {"k", rep.k},
           {"zero_over_zero", rep.zero_over_zero}};
    std::cout << "max_ratio = " << rep.max_ratio << " at x = " << rep.worst_x << " (k = " << rep.k
              << ")\n";
    if (!json_out.empty()) write_or_print(j, json_out);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, int jobs,
                 bool bounds) {
    ExperimentConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (jobs > 0) cfg.jobs = jobs;
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    std::filesystem::create_directories(cfg.out_dir);

    const auto records = simulate(cfg);
    const std::string runs_path = cfg.out_dir + "/runs.csv";
    write_runs_csv(records, runs_path);
    std::cout << "wrote " << records.size() << " records to " << runs_path << "\n";

    try {
        const RateReport rep = rate_regression(records, cfg.method, cfg.trimmed_mean);
        write_rates_json(rep, cfg, cfg.out_dir + "/rates.json");
        std::cout << "log-log slope = " << rep.slope << " (stderr " << rep.stderr_ << ", r2 "
                  << rep.r2 << ")\n";
    } catch (const InsufficientData& e) {
        std::cout << "rate regression skipped: " << e.what() << "\n";
    }
    if (bounds) {
        write_theory_bounds_csv(cfg, cfg.out_dir + "/bounds.csv");
        std::cout << "wrote theory bounds to " << cfg.out_dir << "/bounds.csv\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ODE solution classes: smoothness certificates, covering bounds, rates, "
                 "noisy-recovery fits, and simulations"};
    app.require_subcommand(1);

    // derivs
    auto* derivs = app.add_subcommand("derivs", "derivative expansions and factorial bounds");
    std::string ode_arg = "extremal", derivs_json;
    int kmax = 6, grid_points = 101;
    derivs->add_option("--ode", ode_arg, "builtin name or spec file");
    derivs->add_option("--kmax", kmax, "highest derivative order");
    derivs->add_option("--grid-points", grid_points, "certification grid size");
    derivs->add_option("--json-out", derivs_json, "write certificates as JSON");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "covering-number bound formulas");
    std::string formula = "solution", consts_path, sweep, bounds_csv;
    std::string kind = "nonautonomous", target = "solutions";
    double delta = 0.5;
    int beta = 4, gamma = 0;
    bounds->add_option("--formula", formula,
                       "kolmogorov|general|parametric|z|w|solution|separable");
    bounds->add_option("--delta", delta, "covering radius");
    bounds->add_option("--beta", beta, "smoothness degree of f");
    bounds->add_option("--gamma", gamma, "fixed gamma for the raw formulas");
    bounds->add_option("--consts", consts_path, "class constants file (key = value)");
    bounds->add_option("--sweep", sweep, "delta grid lo:hi:count");
    bounds->add_option("--kind", kind, "autonomous|nonautonomous");
    bounds->add_option("--target", target, "solutions|first_derivatives");
    bounds->add_option("--csv-out", bounds_csv, "CSV output path");

    // rates
    auto* rates = app.add_subcommand("rates", "critical radii and figure series");
    long long rn = 50;
    double rsigma = 1.0, rdelta = 0.01;
    int rbeta = 4, figure = 0;
    std::string rkind = "nonautonomous", rates_csv;
    rates->add_option("--n", rn, "sample size");
    rates->add_option("--sigma", rsigma, "noise scale");
    rates->add_option("--beta", rbeta, "smoothness degree");
    rates->add_option("--kind", rkind, "autonomous|nonautonomous");
    rates->add_option("--figure", figure, "1 or 2: emit the figure series");
    rates->add_option("--delta", rdelta, "delta for figure 1");
    rates->add_option("--csv-out", rates_csv, "CSV output path");

    // fit
    auto* fit = app.add_subcommand("fit", "noisy-recovery estimators");
    std::string method = "spline", variant = "nonautonomous", data_path, truth_id, fit_json;
    double C = 1.0;
    bool cv = false;
    int R = 8, T = 256, fbeta = 0;
    fit->add_option("--method", method, "krr|spline|nls|picard");
    fit->add_option("--beta", fbeta, "constraint family degree (krr)");
    fit->add_option("--variant", variant, "autonomous|nonautonomous (krr)");
    fit->add_option("--C", C, "constraint radius multiplier (krr)");
    fit->add_flag("--cv", cv, "pick C by 5-fold cross-validation");
    fit->add_option("--R", R, "Picard iterations");
    fit->add_option("--T", T, "quadrature slices");
    fit->add_option("--data", data_path, "CSV with columns x,y")->required();
    fit->add_option("--truth", truth_id, "builtin truth for MSE reporting");
    fit->add_option("--json-out", fit_json, "write the fitted model as JSON");

    // gronwall
    auto* gron = app.add_subcommand("gronwall", "stability bound verification");
    std::string pair_path, gron_json;
    int gm = 1, gpoints = 101;
    gron->add_option("--pair", pair_path, "pair spec file (key = value)");
    gron->add_option("--m", gm, "ODE order");
    gron->add_option("--grid-points", gpoints, "verification grid size");
    gron->add_option("--json-out", gron_json, "write the report as JSON");

    // simulate
    auto* sim = app.add_subcommand("simulate", "replication ladders and rate regression");
    std::string config_path, out_dir;
    int jobs = 0;
    bool with_bounds = false;
    sim->add_option("--config", config_path, "experiment config file")->required();
    sim->add_option("--out-dir", out_dir, "output directory");
    sim->add_option("--jobs", jobs, "worker threads");
    sim->add_flag("--bounds", with_bounds, "also emit theory bounds.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*derivs) return cmd_derivs(ode_arg, kmax, grid_points, derivs_json);
        if (*bounds)
            return cmd_bounds(formula, delta, beta, gamma, consts_path, sweep, kind, target,
                              bounds_csv);
        if (*rates) return cmd_rates(rn, rsigma, rbeta, rkind, figure, rdelta, rates_csv);
        if (*fit)
            return cmd_fit(method, fbeta, variant, C, cv, R, T, data_path, truth_id, fit_json);
        if (*gron) return cmd_gronwall(pair_path, gm, gpoints, gron_json);
        if (*sim) return cmd_simulate(config_path, out_dir, jobs, with_bounds);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
