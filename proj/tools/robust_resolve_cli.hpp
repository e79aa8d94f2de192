#pragma once
// Command-line front end. `run` is the whole program minus process plumbing, so tests can drive it.
#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <robust_resolve/robust_resolve.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace robust_resolve::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kSchemaVersion = 1;

using ordered_json = nlohmann::ordered_json;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string family = "normal";
    std::string table;  // CSV path for --family table
    double sigma = 1.0;
    double alpha = 0.1;
    std::optional<double> r;
    double delta_max = 4.0;
    double delta_step = 0.1;
    std::size_t grid_n = 0;        // 0: per-command default
    double grid_span = 0.0;        // 0: family default
    std::size_t theta_grid_n = 0;  // 0: per-command default
    bool almost_sure = false;
    bool densities = false;
    std::string format = "csv";
    std::string out;
    std::uint64_t seed = 1;
    double tol = 0.0;  // 0: library default

    // confset
    std::string data;
    std::string mixture;
    std::optional<double> least_favorable;
    std::optional<double> theta_lo, theta_hi;
    bool with_residual = false;
    // phase
    std::string r_grid = "0:1.9:20";
    std::string alpha_grid = "0:0.475:20";
    // estimate
    std::string estimator = "huber";
    double delta = 1.0;
    std::optional<double> width;
    // simulate
    std::string model = "least-favorable";
    double offset = 1e4;
    double theta_star = 0.0;
    std::string n_list = "50,100,200,400";
    std::size_t trials = 2000;
    std::string sampling = "direct";
};

// Numbers in CSV use %.10g; +-inf print as inf / -inf, missing values as an empty field.
inline std::string csv_cell(const ordered_json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_float()) {
        double d = v.get<double>();
        if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", d);
        return buf;
    }
    if (v.is_number()) return v.dump();
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

// Rows of one table plus document-level fields (JSON only).
class Report {
public:
    Report(std::string command, bool json) : command_(std::move(command)), json_(json) {}

    ordered_json& row() { return rows_.emplace_back(ordered_json::object()); }

    // Radius-like value: CSV keeps inf, JSON writes null and a `<key>_infinite` flag.
    void put_unbounded(ordered_json& row, const std::string& key, double v) const {
        if (!json_) {
            row[key] = v;
            return;
        }
        row[key] = std::isinf(v) ? ordered_json(nullptr) : ordered_json(v);
        row[key + "_infinite"] = std::isinf(v);
    }
    void put_optional(ordered_json& row, const std::string& key, std::optional<double> v) const {
        row[key] = v ? ordered_json(*v) : ordered_json(nullptr);
    }
    ordered_json& extra() { return extra_; }
    void warn(std::string w) { warnings_.push_back(std::move(w)); }
    const std::vector<std::string>& warnings() const { return warnings_; }

    void write(std::ostream& os, const ordered_json& config) const {
        if (json_) {
            ordered_json doc;
            doc["schema_version"] = kSchemaVersion;
            doc["command"] = command_;
            doc["config"] = config;
            for (auto it = extra_.begin(); it != extra_.end(); ++it) doc[it.key()] = it.value();
            doc["rows"] = rows_;
            os << doc.dump(2) << '\n';
            return;
        }
        if (rows_.empty()) return;
        bool first = true;
        for (auto it = rows_.front().begin(); it != rows_.front().end(); ++it) {
            os << (first ? "" : ",") << it.key();
            first = false;
        }
        os << '\n';
        for (const auto& r : rows_) {
            first = true;
            for (auto it = r.begin(); it != r.end(); ++it) {
                os << (first ? "" : ",") << csv_cell(it.value());
                first = false;
            }
            os << '\n';
        }
    }

private:
    std::string command_;
    bool json_;
    ordered_json extra_ = ordered_json::object();
    std::vector<ordered_json> rows_;
    std::vector<std::string> warnings_;
};

inline LocationFamily make_family(const RunConfig& c) {
    if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) throw config_error("--sigma must be positive");
    if (c.family == "normal") return LocationFamily::normal(c.sigma);
    if (c.family == "logistic") return LocationFamily::logistic(c.sigma);
    if (c.family == "laplace") return LocationFamily::laplace(c.sigma);
    if (c.family == "table") {
        if (c.table.empty()) throw config_error("--family table needs --table FILE");
        return LocationFamily::load_custom_table(c.table);
    }
    throw config_error("unknown family '" + c.family + "'");
}

// "lo:hi:n" -> n evenly spaced values
inline std::vector<double> parse_range(const std::string& text, const std::string& what) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    try {
        if (parts.size() != 3) throw std::invalid_argument("");
        double lo = std::stod(parts[0]), hi = std::stod(parts[1]);
        long n = std::stol(parts[2]);
        if (n < 1 || !(hi >= lo) || (n == 1 && hi != lo)) throw std::invalid_argument("");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        return v;
    } catch (const std::exception&) {
        throw config_error(what + ": expected lo:hi:n with lo <= hi and n >= 1, got '" + text + "'");
    }
}

inline std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            long v = std::stol(item, &pos);
            if (pos != item.size() || v < 1) throw std::invalid_argument("");
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw config_error("--n-list: bad entry '" + item + "'");
        }
    }
    if (out.empty()) throw config_error("--n-list is empty");
    return out;
}

// "w:mu,w:mu,..." -> (weight, mean) pairs
inline std::vector<std::pair<double, double>> parse_mixture(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        double weight = 0.0, mu = 0.0;
        try {
            if (colon == std::string::npos) throw std::invalid_argument("");
            weight = std::stod(item.substr(0, colon));
            mu = std::stod(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw config_error("--mixture: expected weight:mean pairs, got '" + item + "'");
        }
        if (!(weight > 0.0)) throw config_error("--mixture: weights must be positive");
        out.emplace_back(weight, mu);
    }
    if (out.empty()) throw config_error("--mixture is empty");
    return out;
}

inline DiscreteDistribution mixture_on(const std::vector<std::pair<double, double>>& comps, const LocationFamily& f,
                                       const Grid& grid) {
    std::vector<double> w(grid.n, 0.0);
    for (const auto& [weight, mu] : comps) {
        auto d = discretize(f, mu, grid);
        for (std::size_t i = 0; i < grid.n; ++i) w[i] += weight * d[i];
    }
    return DiscreteDistribution::normalized(grid, std::move(w));
}

inline ordered_json config_json(const RunConfig& c) {
    ordered_json j;
    j["family"] = c.family;
    if (c.family == "table") j["table"] = c.table;
    j["sigma"] = c.sigma;
    j["alpha"] = c.alpha;
    j["seed"] = c.seed;
    return j;
}

// Least-favorable triple at delta-max as densities on the working grid.
inline void cmd_densities(const RunConfig& c, const LocationFamily& f, Report& rep) {
    if (!(c.delta_max > 0.0)) throw config_error("--densities needs --delta-max > 0");
    Grid g = working_grid(f, c.delta_max, c.grid_n ? c.grid_n : 801, c.grid_span);
    auto pair = build_pair(f, c.delta_max, c.alpha, g);
    const double h = g.step();
    for (std::size_t i = 0; i < g.n; ++i) {
        auto& row = rep.row();
        row["xi"] = g.node(i);
        row["q_minus"] = pair.q_minus[i] / h;
        row["q_plus"] = pair.q_plus[i] / h;
        row["p_hat_star"] = pair.p_hat_star[i] / h;
    }
    rep.extra()["delta"] = c.delta_max;
    rep.extra()["c_prime"] = pair.c_prime;
}

inline void cmd_resolution(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    if (c.densities) return cmd_densities(c, f, rep);
    if (!(c.delta_max >= 0.0) || !(c.delta_step > 0.0)) throw config_error("need --delta-max >= 0 and --delta-step > 0");
    const auto count = static_cast<std::size_t>(std::floor(c.delta_max / c.delta_step + 1e-9)) + 1;
    std::vector<double> deltas(count);
    for (std::size_t i = 0; i < count; ++i) deltas[i] = c.delta_step * static_cast<double>(i);
    Grid g = working_grid(f, deltas.back(), c.grid_n ? c.grid_n : 4001, c.grid_span);
    auto curve = resolution_curve(f, c.alpha, deltas, g);
    if (!curve.monotone)
        rep.warn("resolution curve decreases by " + std::to_string(curve.worst_drop) + " near delta = " +
                 std::to_string(curve.worst_drop_at));
    std::optional<AlmostSureCurve> as;
    if (c.almost_sure) {
        AlmostSureOptions o;
        if (c.grid_n) o.grid_n = c.grid_n;
        o.grid_span = c.grid_span;
        if (c.theta_grid_n) o.theta_nodes = c.theta_grid_n;
        as = almost_sure_curve(f, c.alpha, deltas, o);
    }
    for (std::size_t i = 0; i < count; ++i) {
        auto& row = rep.row();
        const auto& p = curve.points[i];
        row["delta"] = p.delta;
        row["r"] = p.resolution;
        row["c_prime"] = p.c_prime;
        row["overlap"] = p.overlap;
        if (as) {
            row["r_prime"] = as->points[i].r_prime;
            row["theta_witness"] = as->points[i].theta;
        }
    }
    rep.extra()["monotone"] = curve.monotone;
}

inline void cmd_radius(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    if (!c.r) throw config_error("radius needs --r");
    const double r = *c.r;
    auto& row = rep.row();
    row["r"] = r;
    row["alpha"] = c.alpha;
    if (!c.almost_sure) {
        RadiusOptions o;
        if (c.grid_n) o.grid_n = c.grid_n;
        o.grid_span = c.grid_span;
        if (c.tol > 0.0) o.tol = c.tol;
        auto k = worst_case_radius(f, r, c.alpha, o);
        row["mode"] = "worst_case";
        rep.put_unbounded(row, "kappa", k.value);
        row["threshold"] = rbar(c.alpha);
        // the least-favorable observation sits midway between -kappa and kappa
        rep.put_optional(row, "witness_theta", k.infinite() ? std::nullopt : std::optional<double>(0.0));
        return;
    }
    AlmostSureOptions o;
    if (c.grid_n) o.grid_n = c.grid_n;
    o.grid_span = c.grid_span;
    if (c.theta_grid_n) o.theta_nodes = c.theta_grid_n;
    if (c.tol > 0.0) o.delta_tol = c.tol;
    auto k = almost_sure_radius(f, r, c.alpha, o);
    row["mode"] = "almost_sure";
    rep.put_unbounded(row, "kappa", k.value);
    row["threshold"] = rbar_prime(c.alpha);
    std::optional<double> witness;
    if (!k.infinite() && k.value > 0.0) witness = std::abs(almost_sure_resolution(f, k.value, c.alpha, o).theta_witness);
    rep.put_optional(row, "witness_theta", witness);
}

inline void cmd_confset(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    if (!c.r) throw config_error("confset needs --r");
    const int sources = !c.data.empty() + !c.mixture.empty() + c.least_favorable.has_value();
    if (sources != 1) throw config_error("confset needs exactly one of --data, --mixture, --least-favorable");
    const double span = (c.grid_span > 0.0 ? c.grid_span : default_span(f)) * f.sigma();
    const std::size_t n = c.grid_n ? c.grid_n : 4001;

    DiscreteDistribution p;
    double lo = 0.0, hi = 0.0;
    if (c.least_favorable) {
        const double d = *c.least_favorable;
        if (!(d > 0.0)) throw config_error("--least-favorable needs delta > 0");
        p = build_pair(f, d, c.alpha, working_grid(f, d, n, c.grid_span)).p_hat_star;
        lo = -d - 1.0 * f.sigma();
        hi = d + 1.0 * f.sigma();
    } else if (!c.mixture.empty()) {
        auto comps = parse_mixture(c.mixture);
        lo = hi = comps.front().second;
        for (const auto& cm : comps) {
            lo = std::min(lo, cm.second);
            hi = std::max(hi, cm.second);
        }
        lo -= 3.0 * f.sigma();
        hi += 3.0 * f.sigma();
        p = mixture_on(comps, f,
                       Grid::make(std::min(lo, c.theta_lo.value_or(lo)) - span, std::max(hi, c.theta_hi.value_or(hi)) + span, n));
    } else {
        auto data = load_sample_csv(c.data);
        lo = *std::min_element(data.points.begin(), data.points.end());
        hi = *std::max_element(data.points.begin(), data.points.end());
        p = bin_sample(data, Grid::make(std::min(lo, c.theta_lo.value_or(lo)) - span,
                                        std::max(hi, c.theta_hi.value_or(hi)) + span, n));
    }
    lo = c.theta_lo.value_or(lo);
    hi = c.theta_hi.value_or(hi);
    const std::size_t tn = c.theta_grid_n ? c.theta_grid_n : 301;
    if (!(hi > lo) || tn < 2) throw config_error("confset: need theta-lo < theta-hi and --theta-grid-n >= 2");
    auto region = confidence_region(p, f, *c.r, c.alpha, Grid::make(lo, hi, tn));
    for (const auto& iv : region.intervals) {
        auto& row = rep.row();
        row["lo"] = iv.lo;
        row["hi"] = iv.hi;
    }
    rep.extra()["r"] = *c.r;
    rep.extra()["region_radius"] = region_radius(region);
    rep.extra()["interval_count"] = region.intervals.size();
    if (c.with_residual) {
        ordered_json res = ordered_json::array();
        for (std::size_t i = 0; i < region.theta_grid.n; ++i)
            res.push_back({{"theta", region.theta_grid.node(i)}, {"residual", region.residual[i]}});
        rep.extra()["residual"] = res;
    }
}

inline void cmd_phase(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    auto rs = parse_range(c.r_grid, "--r-grid");
    auto as = parse_range(c.alpha_grid, "--alpha-grid");
    for (double r : rs)
        if (r < 0.0) throw config_error("--r-grid must be >= 0");
    for (double a : as)
        if (a < 0.0 || a > 0.5) throw config_error("--alpha-grid must lie in [0, 0.5]");
    PhaseOptions o;
    if (c.grid_n) o.almost_sure.grid_n = c.grid_n;
    o.almost_sure.grid_span = c.grid_span;
    o.radius.grid_span = c.grid_span;
    if (c.theta_grid_n) o.almost_sure.theta_nodes = c.theta_grid_n;
    if (c.tol > 0.0) o.radius.tol = c.tol;
    for (const auto& p : phase_diagram(f, rs, as, o)) {
        auto& row = rep.row();
        row["r"] = p.r;
        row["alpha"] = p.alpha;
        rep.put_unbounded(row, "kappa", p.kappa.value);
        rep.put_unbounded(row, "kappa_prime", p.kappa_prime.value);
        row["regime"] = to_string(p.regime);
    }
}

inline InfluenceFunction make_phi(const RunConfig& c, const LocationFamily& f, std::optional<std::string>& warning) {
    if (c.estimator == "mean") return InfluenceFunction::mean();
    if (c.estimator == "median") return InfluenceFunction::sign();
    if (!(c.delta > 0.0)) throw config_error("--delta must be positive");
    if (c.estimator == "gm") return InfluenceFunction::generalized_mean(f, c.delta);
    if (c.estimator == "huber") {
        auto h = huber_from_alpha(f, c.delta, c.alpha);
        warning = h.warning;
        return h.phi;
    }
    throw config_error("unknown estimator '" + c.estimator + "'");
}

inline void cmd_estimate(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    if (c.data.empty()) throw config_error("estimate needs --data");
    auto data = load_sample_csv(c.data);
    std::optional<std::string> warning;
    auto phi = make_phi(c, f, warning);
    if (warning) rep.warn(*warning);
    auto& row = rep.row();
    row["estimator"] = to_string(phi.kind);
    row["n"] = data.size();
    row["estimate"] = estimate(phi, data);
    rep.put_unbounded(row, "k", phi.k);
    if (c.width) {
        auto iv = confidence_interval(phi, data, *c.width);
        row["lo"] = iv.lo;
        row["hi"] = iv.hi;
    }
}

inline void cmd_simulate(const RunConfig& c, Report& rep) {
    auto f = make_family(c);
    auto ns = parse_n_list(c.n_list);
    if (c.trials == 0) throw config_error("--trials must be >= 1");
    std::optional<CorruptionModel> model;
    if (c.model == "least-favorable")
        model = CorruptionModel::least_favorable_minus(f, c.theta_star, c.delta, c.alpha);
    else if (c.model == "outlier")
        model = CorruptionModel::mixture_outlier(f, c.theta_star, c.offset, c.alpha);
    else
        throw config_error("unknown model '" + c.model + "'");
    SetEstimator est;
    if (c.estimator == "huber")
        est = SetEstimator::huber_interval(c.delta, c.alpha);
    else if (c.estimator == "median")
        est = SetEstimator::median_interval(c.delta);
    else if (c.estimator == "mean")
        est = SetEstimator::mean_interval(c.delta);
    else if (c.estimator == "dro") {
        if (!c.r) throw config_error("dro estimator needs --r");
        const double half = c.delta + default_span(f) * f.sigma();
        est = SetEstimator::dro_region(*c.r, c.alpha, Grid::make(c.theta_star - half, c.theta_star + half, c.grid_n ? c.grid_n : 201));
    } else
        throw config_error("unknown estimator '" + c.estimator + "'");
    Sampling s;
    if (c.sampling == "direct")
        s = Sampling::Direct;
    else if (c.sampling == "tilted")
        s = Sampling::Tilted;
    else
        throw config_error("--sampling must be direct or tilted");
    auto reports = coverage_experiment(*model, est, ns, c.trials, c.seed, s);
    for (const auto& t : reports) {
        auto& row = rep.row();
        row["estimator"] = t.estimator;
        row["n"] = t.n;
        row["trials"] = t.trials;
        row["failures"] = t.failures;
        row["rate"] = t.rate;
        rep.put_optional(row, "exponent_estimate", t.exponent_estimate);
        row["seed"] = t.seed;
        row["tilted"] = t.tilted;
        row["std_error"] = t.std_error;
    }
    auto slope = failure_slope(reports);
    rep.extra()["slope"] = slope ? ordered_json(*slope) : ordered_json(nullptr);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Robust location estimation under TV corruption: resolution, radii, confidence sets."};
    app.set_config("--config", "", "TOML recipe file");
    app.require_subcommand(1);

    app.add_option("--family", c.family, "normal | logistic | laplace | table")->capture_default_str();
    app.add_option("--table", c.table, "xi,log_density CSV for --family table");
    app.add_option("--sigma", c.sigma, "family scale")->capture_default_str();
    app.add_option("--alpha", c.alpha, "corruption level in [0, 0.5]")->capture_default_str();
    app.add_option("--r", c.r, "statistical resolution");
    app.add_option("--delta-max", c.delta_max, "largest separation")->capture_default_str();
    app.add_option("--delta-step", c.delta_step, "separation spacing")->capture_default_str();
    app.add_option("--grid-n", c.grid_n, "working grid nodes (0: command default)");
    app.add_option("--grid-span", c.grid_span, "grid half-width beyond delta in sigmas (0: family default)");
    app.add_option("--theta-grid-n", c.theta_grid_n, "location grid nodes (0: command default)");
    app.add_flag("--almost-sure", c.almost_sure, "use the almost-sure program");
    app.add_option("--format", c.format, "csv | json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--out", c.out, "output file (default stdout)");
    app.add_option("--seed", c.seed, "random seed")->capture_default_str();
    app.add_option("--tol", c.tol, "radius bisection tolerance (0: default)");

    auto* res = app.add_subcommand("resolution", "r(delta) curve on [0, delta-max]");
    res->add_flag("--densities", c.densities, "emit the least-favorable densities at delta-max instead");
    auto* rad = app.add_subcommand("radius", "worst-case or almost-sure radius for --r, --alpha");
    auto* conf = app.add_subcommand("confset", "DRO confidence region");
    conf->add_option("--data", c.data, "sample CSV");
    conf->add_option("--mixture", c.mixture, "weight:mean,... mixture of family members");
    conf->add_option("--least-favorable", c.least_favorable, "use the least-favorable observation for this delta");
    conf->add_option("--theta-lo", c.theta_lo, "location range start");
    conf->add_option("--theta-hi", c.theta_hi, "location range end");
    conf->add_flag("--residual", c.with_residual, "include the residual curve (JSON)");
    auto* ph = app.add_subcommand("phase", "phase diagram over (r, alpha)");
    ph->add_option("--r-grid", c.r_grid, "lo:hi:n")->capture_default_str();
    ph->add_option("--alpha-grid", c.alpha_grid, "lo:hi:n")->capture_default_str();
    auto* est = app.add_subcommand("estimate", "location estimate of a sample");
    est->add_option("--data", c.data, "sample CSV")->required();
    est->add_option("--estimator", c.estimator, "mean | median | gm | huber")->capture_default_str();
    est->add_option("--delta", c.delta, "design separation for gm / huber")->capture_default_str();
    est->add_option("--width", c.width, "also report the interval estimate +- width");
    auto* sim = app.add_subcommand("simulate", "coverage experiment");
    sim->add_option("--model", c.model, "least-favorable | outlier")->capture_default_str();
    sim->add_option("--estimator", c.estimator, "huber | median | mean | dro")->capture_default_str();
    sim->add_option("--delta", c.delta, "interval half-width and adversary separation")->capture_default_str();
    sim->add_option("--offset", c.offset, "outlier offset")->capture_default_str();
    sim->add_option("--theta-star", c.theta_star, "true location")->capture_default_str();
    sim->add_option("--n-list", c.n_list, "comma-separated sample sizes")->capture_default_str();
    sim->add_option("--trials", c.trials, "trials per sample size")->capture_default_str();
    sim->add_option("--sampling", c.sampling, "direct | tilted")->capture_default_str();
    for (auto* s : {res, rad, conf, ph, est, sim}) s->fallthrough()->configurable();

    std::vector<const char*> argv{"robust-resolve"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    Report rep(app.get_subcommands().front()->get_name(), c.format == "json");
    try {
        if (res->parsed()) cmd_resolution(c, rep);
        if (rad->parsed()) cmd_radius(c, rep);
        if (conf->parsed()) cmd_confset(c, rep);
        if (ph->parsed()) cmd_phase(c, rep);
        if (est->parsed()) cmd_estimate(c, rep);
        if (sim->parsed()) cmd_simulate(c, rep);
    } catch (const config_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const degenerate_sample_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "solver error: " << e.what() << '\n';
        return kExitSolver;
    }

    for (const auto& w : rep.warnings()) err << "warning: " << w << '\n';
    if (c.out.empty()) {
        rep.write(out, config_json(c));
    } else {
        std::ofstream file(c.out);
        if (!file) {
            err << "error: cannot write " << c.out << '\n';
            return kExitConfig;
        }
        rep.write(file, config_json(c));
    }
    return kExitOk;
}

}  // namespace robust_resolve::cli
