#include "odes/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "odes/rng.hpp"

namespace odes {

using json = nlohmann::json;

void ExperimentConfig::validate() const {
    if (n_ladder.empty()) throw DomainError("config: n_ladder is empty");
    for (std::size_t i = 0; i + 1 < n_ladder.size(); ++i)
        if (!(n_ladder[i] < n_ladder[i + 1])) throw DomainError("config: n_ladder must ascend");
    for (int n : n_ladder)
        if (n < 2) throw DomainError("config: ladder entries must be >= 2");
    if (replications < 1) throw DomainError("config: replications must be >= 1");
    if (!(sigma >= 0.0)) throw DomainError("config: sigma must be >= 0");
    if (design != "equispaced" && design != "uniform")
        throw DomainError("config: design must be equispaced or uniform");
    if (method != "spline" && method != "krr" && method != "nls" && method != "picard")
        throw DomainError("config: unknown method " + method);
    if (jobs < 1) throw DomainError("config: jobs must be >= 1");
}

namespace {

std::string canonical_string(const ExperimentConfig& c) {
    std::ostringstream os;
    os << c.truth << '|' << c.design << '|';
    for (int n : c.n_ladder) os << n << ',';
    os << '|' << c.sigma << '|' << c.method << '|' << c.beta << '|' << c.variant << '|' << c.C
       << '|' << c.cv << '|' << c.R << '|' << c.T << '|' << c.replications << '|' << c.seed
       << '|' << c.trimmed_mean;
    return os.str();
}

}  // namespace

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string s = canonical_string(cfg);
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

TruthSpec lookup_truth(const std::string& id) {
    const auto split = id.find(':');
    const std::string head = id.substr(0, split);
    const std::string arg = (split == std::string::npos) ? "" : id.substr(split + 1);

    if (head == "separable" && (arg == "cos2pi" || arg.empty())) {
        // y' = cos(2 pi x)/(2 pi), y(0) = 0
        const double pi = 3.14159265358979323846;
        return {[pi](double x) { return std::sin(2.0 * pi * x) / (4.0 * pi * pi); }, 0.95, 0.0};
    }
    if (head == "separable" && arg == "sinx") {
        // y' = sin(x), y(0) = 0
        return {[](double x) { return 1.0 - std::cos(x); }, 0.95, 0.0};
    }
    if (head == "linear") {
        const double theta = arg.empty() ? 0.5 : std::stod(arg);
        return {[theta](double x) { return std::exp(-theta * x); }, 0.95, 1.0};
    }
    if (head == "sin") {
        // y' = sin(y), y(0) = 0.8; separable closed form
        const double y0 = 0.8;
        const double c = std::tan(0.5 * y0);
        return {[c](double x) { return 2.0 * std::atan(c * std::exp(x)); }, 0.8636, y0};
    }
    if (head == "const") {
        const double v = arg.empty() ? 0.0 : std::stod(arg);
        return {[v](double) { return v; }, 0.95, v};
    }
    if (head == "extremal") {
        return {[](double x) { return -0.5 + std::log1p(x); }, 0.2619, -0.5};
    }
    throw DomainError("unknown builtin truth: " + id);
}

namespace {

std::vector<double> make_design(const ExperimentConfig& cfg, int n, double x_max,
                                CounterRng& rng) {
    std::vector<double> xs(n);
    if (cfg.design == "equispaced") {
        for (int i = 0; i < n; ++i) xs[i] = x_max * i / (n - 1);
    } else {
        for (int i = 0; i < n; ++i) xs[i] = x_max * rng.uniform();
        std::sort(xs.begin(), xs.end());
        for (int i = 1; i < n; ++i)  // fixed design needs strict ascent
            if (xs[i] <= xs[i - 1]) xs[i] = std::nextafter(xs[i - 1], x_max * 2.0);
    }
    return xs;
}

OdeParamModel linear_decay_model() {
    OdeParamModel m;
    m.f_param = [](double, double y, const std::vector<double>& th) { return -th[0] * y; };
    m.theta_dim = 1;
    m.q = 2.0;
    m.L_K = 1.0;
    m.y0_bound = 1.0;
    m.b = 1.0;
    return m;
}

struct MethodRunner {
    const ExperimentConfig& cfg;
    const TruthSpec truth;
    std::map<int, SplineFitter> spline_cache;  // equispaced designs only

    explicit MethodRunner(const ExperimentConfig& c) : cfg(c), truth(lookup_truth(c.truth)) {
        if (cfg.method == "spline" && cfg.design == "equispaced") {
            for (int n : cfg.n_ladder) {
                CounterRng dummy(0);
                spline_cache.emplace(n, SplineFitter(make_design(cfg, n, truth.x_max, dummy)));
            }
        }
    }

    RunRecord run(int n, int rep) const {
        RunRecord rec;
        rec.n = n;
        rec.rep = rep;
        rec.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(rep));
        rec.method = cfg.method;

        CounterRng rng(rec.seed);
        const std::vector<double> xs = make_design(cfg, n, truth.x_max, rng);
        DesignSample sample;
        sample.xs = xs;
        sample.sigma = cfg.sigma;
        sample.ys.resize(n);
        for (int i = 0; i < n; ++i) sample.ys[i] = truth.y(xs[i]) + cfg.sigma * rng.gaussian();

        const auto t0 = std::chrono::steady_clock::now();
        try {
            FitModel fit;
            if (cfg.method == "spline") {
                auto it = spline_cache.find(n);
                fit = (it != spline_cache.end() && cfg.design == "equispaced")
                          ? it->second.fit(sample.ys)
                          : fit_standard_spline(sample);
            } else if (cfg.method == "krr") {
                const OdeKind kind = (cfg.variant == "autonomous") ? OdeKind::autonomous
                                                                   : OdeKind::nonautonomous;
                fit = cfg.cv ? fit_constrained_krr_cv(sample, cfg.beta, kind)
                             : fit_constrained_krr(sample, cfg.beta, kind, cfg.C);
            } else if (cfg.method == "nls") {
                fit = fit_nls(sample, linear_decay_model());
            } else {
                fit = fit_picard(sample, linear_decay_model(), truth.y0, cfg.R, cfg.T);
            }
            rec.mse = in_sample_mse(fit, truth.y, xs);
        } catch (const Error&) {
            rec.failed = true;
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
        return rec;
    }
};

}  // namespace

std::vector<RunRecord> simulate(const ExperimentConfig& cfg) {
    cfg.validate();
    if ((cfg.method == "nls" || cfg.method == "picard") &&
        cfg.truth.rfind("linear", 0) != 0)
        throw DomainError("simulate: parametric methods support the linear truth family only");

    MethodRunner runner(cfg);
    struct Task {
        int n, rep;
    };
    std::vector<Task> tasks;
    for (int n : cfg.n_ladder)
        for (int r = 0; r < cfg.replications; ++r) tasks.push_back({n, r});

    std::vector<RunRecord> records(tasks.size());
    const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks.size())));
    if (jobs == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i)
            records[i] = runner.run(tasks[i].n, tasks[i].rep);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < tasks.size(); i = next++)
                    records[i] = runner.run(tasks[i].n, tasks[i].rep);
            });
        for (auto& th : pool) th.join();
    }
    return records;  // already in deterministic (n, rep) order
}

RateReport rate_regression(const std::vector<RunRecord>& records, const std::string& method_filter,
                           bool trimmed) {
    std::map<int, std::vector<double>> by_n;
    for (const auto& r : records) {
        if (r.failed) continue;
        if (!method_filter.empty() && r.method != method_filter) continue;
        by_n[r.n].push_back(r.mse);
    }
    if (by_n.size() < 3) throw InsufficientData("rate_regression: need >= 3 distinct n");
    for (const auto& [n, v] : by_n)
        if (v.size() < 10)
            throw InsufficientData("rate_regression: need >= 10 replications per n");

    std::vector<double> lx, ly;
    for (auto& [n, v] : by_n) {
        std::vector<double> vals = v;
        std::sort(vals.begin(), vals.end());
        std::size_t lo = 0, hi = vals.size();
        if (trimmed) {
            const std::size_t cut = static_cast<std::size_t>(0.05 * vals.size());
            lo = cut;
            hi = vals.size() - cut;
        }
        double mean = 0.0;
        for (std::size_t i = lo; i < hi; ++i) mean += vals[i];
        mean /= static_cast<double>(hi - lo);
        lx.push_back(std::log(static_cast<double>(n)));
        ly.push_back(std::log(mean));
    }

    const std::size_t m = lx.size();
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sx += lx[i];
        sy += ly[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    RateReport rep;
    rep.points = static_cast<int>(m);
    rep.slope = sxy / sxx;
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double fit = my + rep.slope * (lx[i] - mx);
        rss += (ly[i] - fit) * (ly[i] - fit);
    }
    rep.stderr_ = (m > 2) ? std::sqrt(rss / (m - 2) / sxx) : 0.0;
    rep.r2 = (syy > 0.0) ? 1.0 - rss / syy : 1.0;
    return rep;
}

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

}  // namespace

void write_runs_csv(const std::vector<RunRecord>& records, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "n,rep,seed,method,mse,failed\n";
    for (const auto& r : records)
        out << r.n << ',' << r.rep << ',' << r.seed << ',' << r.method << ','
            << fmt_double(r.mse) << ',' << (r.failed ? 1 : 0) << '\n';
}

std::vector<RunRecord> read_runs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        RunRecord r;
        std::getline(ls, field, ',');
        r.n = std::stoi(field);
        std::getline(ls, field, ',');
        r.rep = std::stoi(field);
        std::getline(ls, field, ',');
        r.seed = std::stoull(field);
        std::getline(ls, r.method, ',');
        std::getline(ls, field, ',');
        r.mse = std::stod(field);
        std::getline(ls, field, ',');
        r.failed = (field == "1");
        out.push_back(std::move(r));
    }
    return out;
}

void write_runs_json(const std::vector<RunRecord>& records, const std::string& path) {
    json arr = json::array();
    for (const auto& r : records)
        arr.push_back({{"n", r.n},
                       {"rep", r.rep},
                       {"seed", r.seed},
                       {"method", r.method},
                       {"mse", r.mse},
                       {"failed", r.failed}});
    std::ofstream out = open_out(path);
    out << arr.dump(2) << '\n';
}

void write_rates_json(const RateReport& report, const ExperimentConfig& cfg,
                      const std::string& path) {
    json j{{"method", cfg.method},
           {"slope", report.slope},
           {"stderr", report.stderr_},
           {"r2", report.r2},
           {"points", report.points},
           {"design", cfg.design},
           {"design_note", "fixed-design convention; equispaced by default"},
           {"asymptotic_constants_unity", true},
           {"config_hash", config_hash(cfg)}};
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_figure_csv(const std::vector<FigureRow>& rows, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "gamma,series_name,value\n";
    for (const auto& r : rows)
        out << r.gamma << ',' << r.series << ',' << fmt_double(r.value) << '\n';
}

void write_bound_reports_csv(const std::vector<std::pair<double, BoundReport>>& rows,
                             const std::string& path) {
    std::size_t max_terms = 0;
    for (const auto& [d, rep] : rows) max_terms = std::max(max_terms, rep.terms.size());
    std::ofstream out = open_out(path);
    out << "formula,delta,gamma,value";
    for (std::size_t t = 1; t <= max_terms; ++t) out << ",term_" << t;
    out << '\n';
    for (const auto& [delta, rep] : rows) {
        out << to_string(rep.formula) << ',' << fmt_double(delta) << ','
            << (rep.minimizing_gamma ? std::to_string(*rep.minimizing_gamma) : "") << ','
            << fmt_double(rep.value);
        for (std::size_t t = 0; t < max_terms; ++t)
            out << ',' << (t < rep.terms.size() ? fmt_double(rep.terms[t].second) : "");
        out << '\n';
    }
}

void write_theory_bounds_csv(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "n,formula,gamma,value\n";
    for (int n : cfg.n_ladder) {
        RateParams p{n, cfg.sigma > 0.0 ? cfg.sigma : 1.0, cfg.beta};
        const RadiusReport cr = critical_radius(
            p, cfg.variant == "autonomous" ? OdeKind::autonomous : OdeKind::nonautonomous);
        const RadiusReport kr = kernel_radius(p);
        out << n << ",critical_radius:" << to_string(cr.branch) << ',' << cr.minimizing_gamma
            << ',' << fmt_double(cr.r_squared) << '\n';
        out << n << ",kernel_radius," << kr.minimizing_gamma << ',' << fmt_double(kr.r_squared)
            << '\n';
        out << n << ",standard_class," << cfg.beta + 1 << ','
            << fmt_double(standard_class_radius(cfg.beta + 1, p)) << '\n';
    }
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = t.substr(1, t.size() - 2);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw IoError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;

        if (full == "experiment.truth") cfg.truth = value;
        else if (full == "experiment.design") cfg.design = value;
        else if (full == "experiment.n_ladder") cfg.n_ladder = parse_int_list(value);
        else if (full == "experiment.sigma") cfg.sigma = std::stod(value);
        else if (full == "experiment.replications") cfg.replications = std::stoi(value);
        else if (full == "experiment.seed") cfg.seed = std::stoull(value);
        else if (full == "method.name") cfg.method = value;
        else if (full == "method.beta") cfg.beta = std::stoi(value);
        else if (full == "method.variant") cfg.variant = value;
        else if (full == "method.C") cfg.C = std::stod(value);
        else if (full == "method.cv") cfg.cv = (value == "true" || value == "1");
        else if (full == "method.R") cfg.R = std::stoi(value);
        else if (full == "method.T") cfg.T = std::stoi(value);
        else if (full == "output.dir") cfg.out_dir = value;
        else if (full == "output.trimmed_mean") cfg.trimmed_mean = (value == "true" || value == "1");
        else if (full == "output.jobs") cfg.jobs = std::stoi(value);
        else throw IoError("config line " + std::to_string(lineno) + ": unknown key " + full);
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    return parse_config(in);
}

}  // namespace odes
