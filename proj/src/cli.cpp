#include "qlab/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qlab/covering.hpp"
#include "qlab/decomposition.hpp"
#include "qlab/kernels.hpp"

namespace qlab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + ": no file given");
    std::ifstream in(path);
    if (!in) throw ConfigError(what + ": cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(what + ": '" + path + "' is not valid JSON (" + e.what() + ")");
    }
}

double number_at(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing");
    if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
    return j[key].get<double>();
}

std::vector<double> numbers_at(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key) || !j[key].is_array()) throw ConfigError(where + "." + key + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        if (!j[key][i].is_number())
            throw ConfigError(where + "." + key + "[" + std::to_string(i) + "]: expected a number");
        out.push_back(j[key][i].get<double>());
    }
    return out;
}

std::string file_stem(const std::string& path) { return fs::path(path).stem().string(); }

// Parameters of one run, with range checks that name the field.
class Params {
public:
    Params(const std::string& experiment, const std::map<std::string, double>& given) {
        for (const auto& [name, value] : experiment_parameters(experiment)) values_[name] = value;
        for (const auto& [name, value] : given) {
            if (!values_.count(name)) throw ConfigError("params." + name + ": unknown parameter for " + experiment);
            values_[name] = value;
        }
    }
    double real(const std::string& name, double lo, double hi) const {
        double v = values_.at(name);
        if (!(v >= lo && v <= hi))
            throw ConfigError("params." + name + ": " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");
        return v;
    }
    int integer(const std::string& name, int lo, int hi) const {
        double v = real(name, lo, hi);
        if (v != std::floor(v)) throw ConfigError("params." + name + ": expected an integer");
        return int(v);
    }
    const std::map<std::string, double>& all() const { return values_; }

private:
    std::map<std::string, double> values_;
};

struct Metric {
    std::string name;
    double value = 0.0;
    double factor = 2.0;  // multiplicative tolerance, unless abs > 0
    double abs = 0.0;
};

struct Outcome {
    json measured = json::object();
    json assertions = json::array();
    json warnings = json::array();
    std::vector<Metric> metrics;
    std::vector<std::string> csv;

    void check(const std::string& name, bool pass, const std::string& detail) {
        assertions.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    }
    void metric(const std::string& name, double value, double factor = 2.0, double abs = 0.0) {
        measured[name] = value;
        metrics.push_back({name, value, factor, abs});
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string write_csv(const std::string& dir, const std::string& name, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
    fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("out: cannot write '" + path.string() + "'");
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
        out << "\n";
    }
    return path.string();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quick_kappa(const ConvexDomain& domain) {
    return std::clamp(kappa_estimate(domain, 6, 9, 1024).slope, 0.0, 0.5);
}

void run_covering(const DomainPtr& domain, const Params& p, const std::string& out, Outcome& o) {
    int kmin = p.integer("kmin", 2, 24), kmax = p.integer("kmax", kmin, 24);
    int angles = p.integer("angles", 16, 1 << 22);
    DimensionFit fit = kappa_estimate(*domain, kmin, kmax, angles);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < fit.ks.size(); ++i)
        rows.push_back({double(fit.ks[i]), fit.deltas[i], double(fit.Ns[i]), std::log2(double(fit.Ns[i]))});
    o.csv.push_back(write_csv(out, "covering.csv", "k,delta,N,log2N", rows));
    o.metric("kappa_hat", fit.slope, 0.0, 0.05);
    o.measured["intercept"] = fit.intercept;
    o.measured["max_residual"] = fit.max_residual;
    o.measured["tail_slope"] = fit.tail_slope;
    o.measured["angles_used"] = fit.angles.back();
}

void run_partition(const DomainPtr& domain, const Params& p, const std::string& out, Outcome& o) {
    int kmin = p.integer("kmin", 0, 40), kmax = p.integer("k", kmin, 40);
    int sector = p.integer("sector", 0, (1 << (2 * domain->M())) - 1);
    BoundaryArc arc = boundary_arc(domain, SectorFrame{sector, domain->M()});
    std::vector<std::vector<double>> rows;
    bool flat_ok = true, slope_ok = true, coomp_ok = true;
    double q_lo = 1e300, q_hi = 0.0, card_hi = 0.0, comp = 0.0, slope = 0.0, sum = 0.0;
    for (int k = kmin; k <= kmax; ++k) {
        double delta = std::ldexp(1.0, -k);
        FlatPartition fp = flatness_partition(arc, delta);
        RefinedPartition rp = refine_partition(arc, fp);
        RefinedCheck rc = check_refined_partition(arc, rp);
        flat_ok = flat_ok && check_flat_partition(arc, fp).ok;
        slope_ok = slope_ok && rc.slope_ok;
        coomp_ok = coomp_ok && rc.coomp_ok;
        double scale = std::sqrt(delta);
        q_lo = std::min(q_lo, fp.Q() * scale);
        q_hi = std::max(q_hi, fp.Q() * scale);
        card_hi = std::max(card_hi, double(rc.card) * scale);
        comp = std::max(comp, rc.max_comp_ratio);
        slope = std::max(slope, rc.max_slope_ratio);
        sum = std::max(sum, rc.sum_delta_over_len);
        rows.push_back({delta, double(fp.Q()), double(rp.intervals()), rc.max_comp_ratio, rc.sum_delta_over_len});
    }
    o.csv.push_back(write_csv(out, "partition.csv", "delta,Q,Qtilde,max_comp_ratio,sum_delta_over_len", rows));
    o.check("flatness conditions", flat_ok, "flatness product at most delta on every interval and above it just past each endpoint");
    o.check("refined slope condition", slope_ok, "slope jump times previous length at most delta");
    o.check("comparable lengths", coomp_ok, "neighbouring refined lengths within the allowed ratio");
    o.metric("q_sqrt_delta_max", q_hi);
    o.metric("q_sqrt_delta_min", q_lo);
    o.metric("card_sqrt_delta_max", card_hi);
    o.metric("max_comp_ratio", comp);
    o.metric("max_slope_ratio", slope);
    o.metric("sum_delta_over_len_max", sum);
}

void run_surrogate(const DomainPtr& domain, const Params& p, const std::string& out, Outcome& o) {
    int k = p.integer("k", 2, 20), l = p.integer("l", 0, k);
    int sector = p.integer("sector", 0, (1 << (2 * domain->M())) - 1);
    BoundaryArc arc = boundary_arc(domain, SectorFrame{sector, domain->M()});
    SmoothSurrogate s(arc, k);
    SurrogateReport r = measure_surrogate(arc, s, l);
    std::vector<std::vector<double>> rows;
    for (std::size_t m = 0; m < r.p3_per_interval.size(); ++m)
        rows.push_back({double(m), r.p3_per_interval[m], r.p4_per_interval[m]});
    o.csv.push_back(write_csv(out, "surrogate.csv", "m,p3,p4", rows));
    o.measured["p1"] = r.max_p1;
    o.measured["p2"] = r.max_p2;
    o.check("p1", r.max_p1 <= 1e-9, "surrogate equals the arc at grid points to 1e-9");
    o.check("p2", r.max_p2 <= 1e-9, "surrogate slope equals the arc slope at grid points to 1e-9");
    o.metric("p3", r.p3);
    o.metric("p4", r.p4);
    o.metric("p5", r.p5);
    o.metric("p6", r.p6);
    o.metric("p7", r.p7);
    o.metric("p8", r.p8);
    o.metric("cs_count", r.cs_count);
}

void run_kernel_decay(const DomainPtr& domain, const Params& p, const std::string& out, Outcome& o) {
    double eps = p.real("eps", 1e-6, 4.0);
    double kappa = p.real("kappa", -1.0, 0.5);
    if (kappa < 0.0) kappa = quick_kappa(*domain);
    int kmin = p.integer("kmin", 0, 16), kmax = p.integer("kmax", kmin, 16);
    int n = p.integer("grid", 16, 1 << 14);
    double margin = p.real("margin", 2.0, 64.0);
    SymbolSpec a = make_symbol(-(kappa + eps), eps, domain->M());
    DecayReport r = decay_experiment(domain, a, kmin, kmax, std::size_t(n), margin);
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    for (std::size_t i = 0; i < r.ks.size(); ++i) {
        rows.push_back({double(r.ks[i]), r.norms[i], r.normalized[i], r.refine_err[i]});
        if (!r.vanishing[i]) worst = std::max(worst, r.refine_err[i]);
    }
    o.csv.push_back(write_csv(out, "decay.csv", "k,l1_norm,normalized,refine_err", rows));
    o.measured["kappa_used"] = kappa;
    o.measured["symbol_order"] = a.order;
    o.measured["max_refine_err"] = worst;
    o.check("grid refinement", worst < 0.05, "every l1 norm moves by less than 5% from n/2 to n");
    o.metric("c_star", r.c_star);
    o.metric("spread", r.spread);
    o.metric("slope", r.slope, 0.0, 0.25);
}

void run_atoms(const DomainPtr& domain, const Params& p, std::mt19937_64& rng, const std::string& out,
               Outcome& o) {
    int lmax = p.integer("lmax", 0, 12), seeds = p.integer("seeds", 1, 100);
    int kmax = p.integer("kmax", 0, 16), n = p.integer("grid", 16, 1 << 14);
    double order = p.real("order", -4.0, 0.0);
    SymbolSpec a = make_symbol(order, 0.25, domain->M());
    Grid grid = make_grid(0.5 * n, std::size_t(n));
    std::vector<std::vector<double>> per_seed(static_cast<std::size_t>(seeds));
    json ratios = json::array();
    double worst = 0.0;
    for (auto& series : per_seed) {
        std::uint64_t seed = rng();
        for (int l = 0; l <= lmax; ++l) series.push_back(atom_response(domain, a, make_atom(l, seed), grid, kmax).l1);
        double ratio = *std::max_element(series.begin(), series.end()) / median(series);
        ratios.push_back(ratio);
        worst = std::max(worst, ratio);
    }
    std::vector<std::vector<double>> rows;
    for (int l = 0; l <= lmax; ++l) {
        double hi = 0.0;
        for (const auto& series : per_seed) hi = std::max(hi, series[std::size_t(l)]);
        rows.push_back({double(l), hi});
    }
    o.csv.push_back(write_csv(out, "atoms.csv", "l,response", rows));
    o.measured["max_over_median_per_seed"] = ratios;
    o.metric("max_over_median", worst);
    o.metric("response_l0", rows.front()[1]);
}

void run_square_function(const DomainPtr& domain, const Params& p, std::mt19937_64& rng, const std::string& out,
                         Outcome& o) {
    double alpha = p.real("alpha", 0.51, 16.0);
    if (alpha < 0.6) o.warnings.push_back("alpha below 0.6: the trapezoid rule in t is near its stability limit");
    int trials = p.integer("trials", 1, 1000);
    double rho_max = p.real("rho_max", 1e-3, 1e3);
    double L = p.real("L", 1.0, 1e4);
    int n = p.integer("grid", 0, 1 << 13);
    if (n == 0) {
        n = 64;
        while (kPi * n / (2.0 * L) < 2.0 * rho_max * domain->circumscribed_radius()) n *= 2;
    }
    double tmin = p.real("tmin", 1e-6, 1e6), tmax = p.real("tmax", tmin, 1e9);
    int per_octave = p.integer("per_octave", 1, 1024);
    Grid grid = make_grid(L, std::size_t(n));
    std::vector<double> t = log_t_grid(tmin, tmax, per_octave);
    std::vector<std::vector<double>> rows;
    double lo = 1e300, hi = 0.0, total = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        SampledField f = random_band_limited(domain, grid, rho_max, rng());
        double ratio = square_function(domain, f, alpha, t).ratio;
        rows.push_back({double(trial), ratio});
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        total += ratio;
    }
    o.csv.push_back(write_csv(out, "gsq.csv", "trial,ratio", rows));
    o.measured["grid"] = n;
    o.metric("ratio_spread", hi / lo);
    o.metric("ratio_mean", total / trials);
}

void run_norms(const ProfileFunction& profile, const Params& p, Outcome& o) {
    double kappa = p.real("kappa", 0.0, 0.5), eps = p.real("eps", 0.0, 4.0), theta = p.real("theta", 0.0, 1.0);
    NormValue b = b_norm(profile, kappa, eps);
    NormValue th = theta_norm(profile, theta, kappa, eps);
    o.measured["b_tail"] = b.tail_bound;
    o.measured["theta_tail"] = th.tail_bound;
    o.check("b tail", b.tail_bound <= 1e-2 * b.value + 1e-300, "tail bound below 1% of the b norm");
    o.check("theta tail", th.tail_bound <= 1e-2 * th.value + 1e-300, "tail bound below 1% of the theta norm");
    o.metric("b_norm", b.value);
    o.metric("theta_norm", th.value);
}

void run_subordination(const DomainPtr& domain, const ProfileFunction& profile, const Params& p,
                       std::mt19937_64& rng, Outcome& o) {
    int samples = p.integer("samples", 1, 1000000);
    double lo = p.real("rho_lo", 0.0, 1e3), hi = p.real("rho_hi", lo, 1e3);
    std::uniform_real_distribution<double> angle(0.0, kTwoPi), rho(lo, hi);
    std::vector<Vec2> xs;
    for (int i = 0; i < samples; ++i) {
        double theta = angle(rng), r = rho(rng);
        xs.push_back(r * domain->boundary(theta));
    }
    SubordinationResult r = subordination_check(domain, profile, xs);
    o.measured["max_error"] = r.max_error;
    o.measured["tail_bound"] = r.tail_bound;
    o.measured["samples"] = r.samples;
    o.check("subordination", r.max_error <= 1e-6, "m(rho) reproduced from its transform to 1e-6");
}

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr))
        throw ConfigError("config hash: SHA-256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < length; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

bool needs_domain(const std::string& e) { return e != "norms"; }
bool needs_profile(const std::string& e) { return e == "norms" || e == "subordination"; }

json canonical_config(const ExperimentConfig& c) {
    json j;
    j["experiment"] = c.experiment;
    j["params"] = Params(c.experiment, c.params).all();
    j["seed"] = c.seed;
    if (needs_domain(c.experiment)) j["domain"] = read_json_file(c.domain_path, "domain");
    if (needs_profile(c.experiment)) j["profile"] = read_json_file(c.profile_path, "profile");
    return j;
}

std::string baseline_key(const ExperimentConfig& c) {
    std::string key = c.experiment;
    if (needs_domain(c.experiment)) key += "/" + file_stem(c.domain_path);
    if (needs_profile(c.experiment)) key += "/" + file_stem(c.profile_path);
    return key;
}

// Compares metrics with the stored entry, or rewrites it under --update-baselines.
json apply_baselines(const ExperimentConfig& c, const std::string& hash, const std::vector<Metric>& metrics,
                     bool& pass) {
    json report{{"path", c.baseline_path}, {"key", baseline_key(c)}, {"checks", json::array()}};
    if (c.baseline_path.empty()) {
        report["status"] = "none";
        return report;
    }
    json file = fs::exists(c.baseline_path) ? read_json_file(c.baseline_path, "baseline") : json::object();
    const std::string key = baseline_key(c);
    if (c.update_baselines) {
        json entry{{"config_hash", hash}, {"metrics", json::object()}};
        for (const Metric& m : metrics) {
            json rule = file.contains(key) && file[key]["metrics"].contains(m.name) ? file[key]["metrics"][m.name]
                                                                                     : json::object();
            if (!rule.contains("factor") && !rule.contains("abs")) {
                if (m.abs > 0.0) rule["abs"] = m.abs;
                else rule["factor"] = m.factor;
            }
            rule["value"] = m.value;
            entry["metrics"][m.name] = rule;
        }
        file[key] = entry;
        std::ofstream out(c.baseline_path);
        if (!out) throw ConfigError("baseline: cannot write '" + c.baseline_path + "'");
        out << file.dump(2) << "\n";
        report["status"] = "updated";
        return report;
    }
    if (!file.contains(key)) {
        report["status"] = "missing";
        return report;
    }
    if (file[key].value("config_hash", "") != hash) {
        report["status"] = "stale";
        return report;
    }
    report["status"] = "checked";
    for (const Metric& m : metrics) {
        if (!file[key]["metrics"].contains(m.name)) continue;
        const json& rule = file[key]["metrics"][m.name];
        double expected = rule.at("value").get<double>();
        bool ok;
        std::string text;
        if (rule.contains("abs")) {
            double tol = rule["abs"].get<double>();
            ok = std::abs(m.value - expected) <= tol;
            text = "|measured - baseline| <= " + fmt(tol);
        } else {
            double factor = rule.value("factor", 2.0);
            const double slack = 1e-12;
            ok = m.value <= expected * factor + slack && m.value >= expected / factor - slack;
            text = "within " + fmt(factor) + "x of baseline";
        }
        pass = pass && ok;
        report["checks"].push_back(
            {{"metric", m.name}, {"measured", m.value}, {"baseline", expected}, {"rule", text}, {"pass", ok}});
    }
    return report;
}

}  // namespace

DomainSpec parse_domain_spec(const json& j) {
    if (!j.is_object()) throw ConfigError("domain: expected an object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("domain.kind: missing or not a string");
    DomainSpec spec;
    try {
        spec.kind = domain_kind_from_string(j["kind"].get<std::string>());
    } catch (const Error& e) {
        throw ConfigError("domain.kind: " + std::string(e.what()));
    }
    switch (spec.kind) {
        case DomainKind::Polygon: {
            if (!j.contains("vertices") || !j["vertices"].is_array())
                throw ConfigError("domain.vertices: expected an array of [x, y]");
            for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
                const json& v = j["vertices"][i];
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw ConfigError("domain.vertices[" + std::to_string(i) + "]: expected [x, y]");
                spec.vertices.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            break;
        }
        case DomainKind::Disc: spec.radius = number_at(j, "radius", "domain"); break;
        case DomainKind::Cantor:
            if (j.contains("ratio")) spec.ratio = number_at(j, "ratio", "domain");
            break;
        case DomainKind::CustomSupport: spec.support = numbers_at(j, "support", "domain"); break;
    }
    return spec;
}

DomainSpec load_domain_spec(const std::string& path) { return parse_domain_spec(read_json_file(path, "domain")); }

ProfileFunction parse_profile(const json& j) {
    if (!j.is_object()) throw ConfigError("profile: expected an object");
    if (!j.contains("type") || !j["type"].is_string()) throw ConfigError("profile.type: missing or not a string");
    const std::string type = j["type"].get<std::string>();
    if (type == "bump") return bump_profile();
    if (type == "gaussian-modulated")
        return gaussian_modulated_profile(number_at(j, "center", "profile"), number_at(j, "width", "profile"),
                                          number_at(j, "frequency", "profile"));
    if (type == "table") return table_profile(numbers_at(j, "s", "profile"), numbers_at(j, "values", "profile"));
    throw ConfigError("profile.type: unknown type '" + type + "'");
}

ProfileFunction load_profile(const std::string& path) { return parse_profile(read_json_file(path, "profile")); }

const std::vector<std::pair<std::string, double>>& experiment_parameters(const std::string& experiment) {
    static const std::map<std::string, std::vector<std::pair<std::string, double>>> table{
        {"covering", {{"kmin", 4}, {"kmax", 12}, {"angles", 4096}}},
        {"partition", {{"k", 12}, {"kmin", 4}, {"sector", 0}}},
        {"surrogate", {{"k", 8}, {"l", 5}, {"sector", 0}}},
        {"kernel-decay", {{"eps", 0.25}, {"kmax", 8}, {"grid", 1024}, {"kmin", 1}, {"kappa", -1}, {"margin", 8}}},
        {"atoms", {{"lmax", 6}, {"seeds", 5}, {"kmax", 8}, {"grid", 1024}, {"order", -0.5}}},
        {"square-function",
         {{"alpha", 1.0},
          {"trials", 10},
          {"rho_max", 1.0},
          {"L", 16.0},
          {"grid", 0},
          {"tmin", 0.0625},
          {"tmax", 1024.0},
          {"per_octave", 8}}},
        {"norms", {{"kappa", 0.5}, {"eps", 0.25}, {"theta", 0.5}}},
        {"subordination", {{"samples", 1000}, {"rho_lo", 0.25}, {"rho_hi", 2.5}}},
    };
    auto it = table.find(experiment);
    if (it == table.end()) throw ConfigError("experiment: unknown tag '" + experiment + "'");
    return it->second;
}

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(canonical_config(config).dump()); }

ReportBundle run_experiment(const ExperimentConfig& c) {
    const auto start = std::chrono::steady_clock::now();
    const json canonical = canonical_config(c);  // validates the tag, parameters and files
    const std::string hash = sha256_hex(canonical.dump());
    const Params params(c.experiment, c.params);
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (!fs::is_directory(c.out_dir)) throw ConfigError("out: cannot create directory '" + c.out_dir + "'");

    DomainPtr domain;
    if (needs_domain(c.experiment)) domain = construct_domain(parse_domain_spec(canonical["domain"]));
    ProfileFunction profile;
    if (needs_profile(c.experiment)) profile = parse_profile(canonical["profile"]);
    std::mt19937_64 rng(c.seed);

    Outcome o;
    const std::string& e = c.experiment;
    if (e == "covering") run_covering(domain, params, c.out_dir, o);
    else if (e == "partition") run_partition(domain, params, c.out_dir, o);
    else if (e == "surrogate") run_surrogate(domain, params, c.out_dir, o);
    else if (e == "kernel-decay") run_kernel_decay(domain, params, c.out_dir, o);
    else if (e == "atoms") run_atoms(domain, params, rng, c.out_dir, o);
    else if (e == "square-function") run_square_function(domain, params, rng, c.out_dir, o);
    else if (e == "norms") run_norms(profile, params, o);
    else run_subordination(domain, profile, params, rng, o);

    bool pass = true;
    for (const auto& a : o.assertions) pass = pass && a["pass"].get<bool>();
    json baseline = apply_baselines(c, hash, o.metrics, pass);

    ReportBundle bundle;
    bundle.csv_paths = o.csv;
    json csv_names = json::array();
    for (const auto& path : o.csv) csv_names.push_back(fs::path(path).filename().string());
    bundle.summary = {{"version", kVersionTag},
                      {"config_hash", hash},
                      {"config", canonical},
                      {"measured", o.measured},
                      {"assertions", o.assertions},
                      {"warnings", o.warnings},
                      {"baseline", baseline},
                      {"csv", csv_names},
                      {"pass", pass}};
    if (domain) bundle.summary["grid_M"] = domain->M();
    bundle.pass = pass;
    bundle.summary_path = (fs::path(c.out_dir) / (c.experiment + ".json")).string();
    std::ofstream out(bundle.summary_path);
    if (!out) throw ConfigError("out: cannot write '" + bundle.summary_path + "'");
    out << bundle.summary.dump(2) << "\n";
    bundle.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return bundle;
}

json validate_domain(const std::string& path) {
    DomainSpec spec = load_domain_spec(path);
    DomainPtr domain = construct_domain(spec);
    DomainDiagnostics d = check_domain(*domain);
    json report{{"path", path},
                {"kind", to_string(domain->kind())},
                {"M", d.M},
                {"inscribed_radius", d.inscribed},
                {"circumscribed_radius", d.circumscribed},
                {"convexity_margin", d.convexity_margin},
                {"max_lipschitz_ratio", d.max_lipschitz_ratio},
                {"failures", d.failures},
                {"ok", d.ok}};
    report["kappa_hint"] = kappa_estimate(*domain, 6, 9, 1024).slope;
    return report;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Quasiradial multiplier experiments", "qlab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out_dir = ".", baseline;
    std::uint64_t seed = 1;
    bool update = false;
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "seed of the single random generator")->capture_default_str();
    app.add_option("--baseline", baseline, "baseline JSON (default: the checked-in data/baselines.json)");
    app.add_flag("--update-baselines", update, "overwrite the baseline entry with this run's measurements");

    std::string domain_path, profile_path;
    CLI::App* validate = app.add_subcommand("validate", "check a domain file and print M, radii and margins");
    validate->add_option("--domain", domain_path, "domain JSON file")->required();

    const std::vector<std::string> experiments{"covering",        "partition", "surrogate", "kernel-decay", "atoms",
                                               "square-function", "norms",     "subordination"};
    std::map<std::string, std::map<std::string, double>> values;
    std::map<std::string, CLI::App*> commands;
    for (const auto& name : experiments) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        commands[name] = sub;
        if (needs_domain(name)) sub->add_option("--domain", domain_path, "domain JSON file")->required();
        if (needs_profile(name)) sub->add_option("--profile", profile_path, "profile JSON file")->required();
        for (const auto& [param, fallback] : experiment_parameters(name)) {
            values[name][param] = fallback;
            sub->add_option("--" + param, values[name][param])->capture_default_str();
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            json report = validate_domain(domain_path);
            std::cout << report.dump(2) << std::endl;
            return report["ok"].get<bool>() ? 0 : 1;
        }
        ExperimentConfig config;
        for (const auto& [name, sub] : commands)
            if (sub->parsed()) config.experiment = name;
        config.domain_path = domain_path;
        config.profile_path = profile_path;
        config.params = values[config.experiment];
        config.seed = seed;
        config.out_dir = out_dir;
        config.update_baselines = update;
        config.baseline_path = baseline;
        if (baseline.empty() && fs::exists(QLAB_DATA_DIR "/baselines.json"))
            config.baseline_path = QLAB_DATA_DIR "/baselines.json";
        if (update && config.baseline_path.empty()) config.baseline_path = QLAB_DATA_DIR "/baselines.json";

        ReportBundle bundle = run_experiment(config);
        for (const auto& w : bundle.summary["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        std::cout << bundle.summary["measured"].dump() << "\n";
        for (const auto& a : bundle.summary["assertions"])
            if (!a["pass"].get<bool>()) std::cout << "FAIL " << a["name"].get<std::string>() << "\n";
        for (const auto& b : bundle.summary["baseline"]["checks"])
            if (!b["pass"].get<bool>())
                std::cout << "FAIL baseline " << b["metric"].get<std::string>() << ": " << fmt(b["measured"].get<double>())
                          << " vs " << fmt(b["baseline"].get<double>()) << "\n";
        std::cout << "baseline: " << bundle.summary["baseline"]["status"].get<std::string>() << "\n";
        std::cout << "summary: " << bundle.summary_path << " (" << fmt(bundle.wall_seconds) << " s)\n";
        return bundle.pass ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return e.budget() ? 3 : 2;
    } catch (const json::exception& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace qlab
