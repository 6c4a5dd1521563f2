#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twinbarrier/errors.hpp"
#include "twinbarrier/kinematics.hpp"
#include "twinbarrier/modulation.hpp"
#include "twinbarrier/version.hpp"

namespace twinbarrier {

using Json = nlohmann::json;

/// The runnable experiments; CLI subcommands mirror this list one-to-one.
enum class Experiment {
    amplitude_scan,
    series_convergence,
    opaque_limit_scan,
    hartman_check,
    asymmetric_multipeak,
    resonance_scan,
    filter_sweep,
};

inline const std::vector<std::pair<Experiment, const char*>>& experiment_names() {
    static const std::vector<std::pair<Experiment, const char*>> names = {
        {Experiment::amplitude_scan, "amplitude_scan"},
        {Experiment::series_convergence, "series_convergence"},
        {Experiment::opaque_limit_scan, "opaque_limit_scan"},
        {Experiment::hartman_check, "hartman_check"},
        {Experiment::asymmetric_multipeak, "asymmetric_multipeak"},
        {Experiment::resonance_scan, "resonance_scan"},
        {Experiment::filter_sweep, "filter_sweep"},
    };
    return names;
}

inline std::string to_string(Experiment e) {
    for (const auto& [exp, name] : experiment_names())
        if (exp == e) return name;
    throw std::invalid_argument("unknown experiment");
}

inline Experiment experiment_from_string(const std::string& s) {
    for (const auto& [exp, name] : experiment_names())
        if (s == name) return exp;
    throw ValidationError("experiment", "unknown experiment '" + s + "'");
}

struct GridSpec {
    double x_min = -100.0, x_max = 100.0;
    int n_x = 128;
    double t_min = 0.0, t_max = 200.0;
    int n_t = 512;
    int n_k = 256;
};

struct Thresholds {
    double prominence = 0.05;   ///< peak prominence, fraction of the series maximum
    double resonance = 0.1;     ///< |sin(2 phi - k (L-a))| below this is near-resonant
    double mean_vs_max = 0.25;  ///< mean-vs-first-peak gap, fraction of peak spacing
    double timing = 0.10;       ///< relative tolerance for predicted vs measured times
};

struct QuadratureSpec {
    double rel_tol = 1e-6;
    int max_intervals = (1 << 16);
    bool auto_refine = true;
};

struct ScanSpec {
    std::optional<double> k_lo, k_hi;  ///< defaults depend on the experiment
    int n = 400;
};

/// Declarative description of one experiment run.  Everything that affects
/// the numbers lives here, so identical configs give identical outputs.
struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::optional<Experiment> experiment;
    PhysicalConfig physical;
    ModulationSpec modulation;
    std::optional<double> launch_x0;  ///< default -2/sigma
    GridSpec grids;
    std::vector<double> detectors;
    Thresholds thresholds;
    QuadratureSpec quadrature;
    ScanSpec scan;
    std::vector<double> opaque_chi_levels{3.0, 5.0, 8.0};
    int series_max_terms = 50;
    std::vector<double> filter_b_factors{1.0, 2.0};
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

inline void validate(const ScenarioConfig& c) {
    validate(c.physical);
    validate(c.modulation, c.physical);
    if (c.schema_version != kSchemaVersion)
        throw ValidationError("schema_version", "unsupported schema version");
    if (!(c.grids.x_max > c.grids.x_min))
        throw ValidationError("grids.x_max", "must exceed grids.x_min");
    if (!(c.grids.t_max > c.grids.t_min))
        throw ValidationError("grids.t_max", "must exceed grids.t_min");
    if (c.grids.n_x < 16) throw ValidationError("grids.n_x", "must be >= 16");
    if (c.grids.n_t < 16) throw ValidationError("grids.n_t", "must be >= 16");
    if (c.grids.n_k < 16) throw ValidationError("grids.n_k", "must be >= 16");
    for (std::size_t i = 0; i < c.detectors.size(); ++i)
        if (c.detectors[i] < c.grids.x_min || c.detectors[i] > c.grids.x_max)
            throw ValidationError("detectors[" + std::to_string(i) + "]",
                                  "detector lies outside the x window");
    if (!(c.thresholds.prominence > 0.0 && c.thresholds.prominence < 1.0))
        throw ValidationError("thresholds.prominence", "must lie in (0, 1)");
    if (!(c.thresholds.resonance > 0.0 && c.thresholds.resonance < 1.0))
        throw ValidationError("thresholds.resonance", "must lie in (0, 1)");
    if (!(c.thresholds.mean_vs_max > 0.0))
        throw ValidationError("thresholds.mean_vs_max", "must be > 0");
    if (!(c.thresholds.timing > 0.0))
        throw ValidationError("thresholds.timing", "must be > 0");
    if (!(c.quadrature.rel_tol > 0.0))
        throw ValidationError("quadrature.rel_tol", "must be > 0");
    if (c.quadrature.max_intervals < c.grids.n_k)
        throw ValidationError("quadrature.max_intervals", "must be >= grids.n_k");
    if (c.scan.n < 2) throw ValidationError("scan.n", "must be >= 2");
    if (c.scan.k_lo && c.scan.k_hi && !(*c.scan.k_hi > *c.scan.k_lo))
        throw ValidationError("scan.k_hi", "must exceed scan.k_lo");
    for (std::size_t i = 0; i < c.opaque_chi_levels.size(); ++i)
        if (!(c.opaque_chi_levels[i] > 0.0))
            throw ValidationError("opaque.chi_levels[" + std::to_string(i) + "]",
                                  "levels must be > 0");
    if (c.series_max_terms < 1)
        throw ValidationError("series.max_terms", "must be >= 1");
    for (std::size_t i = 0; i < c.filter_b_factors.size(); ++i)
        if (!(c.filter_b_factors[i] > 0.0))
            throw ValidationError("filter.b_factors[" + std::to_string(i) + "]",
                                  "factors must be > 0");
}

namespace detail {

inline const Json* find_member(const Json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double json_number(const Json& j, const std::string& path) {
    if (!j.is_number())
        throw ValidationError(path, "expected a number");
    return j.get<double>();
}

inline void read_number(const Json& obj, const char* key, const std::string& path, double& out) {
    if (const Json* m = find_member(obj, key)) out = json_number(*m, path);
}

inline void read_int(const Json& obj, const char* key, const std::string& path, int& out) {
    if (const Json* m = find_member(obj, key)) {
        if (!m->is_number_integer())
            throw ValidationError(path, "expected an integer");
        out = m->get<int>();
    }
}

}  // namespace detail

inline Json to_json(const ScenarioConfig& c) {
    Json j;
    j["schema_version"] = c.schema_version;
    if (c.experiment) j["experiment"] = to_string(*c.experiment);
    j["physical"] = {{"m", c.physical.m},   {"hbar", c.physical.hbar}, {"V0", c.physical.V0},
                     {"a", c.physical.a},   {"L", c.physical.L},       {"b", c.physical.b}};
    j["modulation"] = {
        {"k0", c.modulation.k0},
        {"sigma", c.modulation.sigma},
        {"k_min", c.modulation.k_min},
        {"k_max", c.modulation.k_max},
        {"shape",
         c.modulation.shape == ModulationShape::gaussian ? "gaussian" : "raised_cosine"},
    };
    if (c.launch_x0) j["modulation"]["launch_x0"] = *c.launch_x0;
    j["grids"] = {{"x_min", c.grids.x_min}, {"x_max", c.grids.x_max}, {"n_x", c.grids.n_x},
                  {"t_min", c.grids.t_min}, {"t_max", c.grids.t_max}, {"n_t", c.grids.n_t},
                  {"n_k", c.grids.n_k}};
    j["detectors"] = c.detectors;
    j["thresholds"] = {{"prominence", c.thresholds.prominence},
                       {"resonance", c.thresholds.resonance},
                       {"mean_vs_max", c.thresholds.mean_vs_max},
                       {"timing", c.thresholds.timing}};
    j["quadrature"] = {{"rel_tol", c.quadrature.rel_tol},
                       {"max_intervals", c.quadrature.max_intervals},
                       {"auto_refine", c.quadrature.auto_refine}};
    Json scan = Json::object();
    if (c.scan.k_lo) scan["k_lo"] = *c.scan.k_lo;
    if (c.scan.k_hi) scan["k_hi"] = *c.scan.k_hi;
    scan["n"] = c.scan.n;
    j["scan"] = scan;
    j["opaque"] = {{"chi_levels", c.opaque_chi_levels}};
    j["series"] = {{"max_terms", c.series_max_terms}};
    j["filter"] = {{"b_factors", c.filter_b_factors}};
    if (c.seed) j["seed"] = *c.seed;
    if (c.threads) j["threads"] = c.threads;
    return j;
}

inline ScenarioConfig config_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("", "configuration must be a JSON object");
    ScenarioConfig c;
    using detail::find_member;
    using detail::read_int;
    using detail::read_number;

    if (const Json* m = find_member(j, "schema_version")) c.schema_version = m->get<int>();
    if (const Json* m = find_member(j, "experiment")) {
        if (!m->is_string()) throw ValidationError("experiment", "expected a string");
        c.experiment = experiment_from_string(m->get<std::string>());
    }

    if (const Json* p = find_member(j, "physical")) {
        read_number(*p, "m", "physical.m", c.physical.m);
        read_number(*p, "hbar", "physical.hbar", c.physical.hbar);
        read_number(*p, "V0", "physical.V0", c.physical.V0);
        read_number(*p, "a", "physical.a", c.physical.a);
        read_number(*p, "L", "physical.L", c.physical.L);
        read_number(*p, "b", "physical.b", c.physical.b);
    } else {
        throw ValidationError("physical", "section is required");
    }

    if (const Json* m = find_member(j, "modulation")) {
        read_number(*m, "k0", "modulation.k0", c.modulation.k0);
        read_number(*m, "sigma", "modulation.sigma", c.modulation.sigma);
        read_number(*m, "k_min", "modulation.k_min", c.modulation.k_min);
        read_number(*m, "k_max", "modulation.k_max", c.modulation.k_max);
        if (const Json* s = find_member(*m, "shape")) {
            if (!s->is_string()) throw ValidationError("modulation.shape", "expected a string");
            const std::string shape = s->get<std::string>();
            if (shape == "gaussian")
                c.modulation.shape = ModulationShape::gaussian;
            else if (shape == "raised_cosine")
                c.modulation.shape = ModulationShape::raised_cosine;
            else
                throw ValidationError("modulation.shape", "unknown shape '" + shape + "'");
        }
        if (const Json* x = find_member(*m, "launch_x0"))
            c.launch_x0 = detail::json_number(*x, "modulation.launch_x0");
    } else {
        throw ValidationError("modulation", "section is required");
    }

    if (const Json* g = find_member(j, "grids")) {
        read_number(*g, "x_min", "grids.x_min", c.grids.x_min);
        read_number(*g, "x_max", "grids.x_max", c.grids.x_max);
        read_int(*g, "n_x", "grids.n_x", c.grids.n_x);
        read_number(*g, "t_min", "grids.t_min", c.grids.t_min);
        read_number(*g, "t_max", "grids.t_max", c.grids.t_max);
        read_int(*g, "n_t", "grids.n_t", c.grids.n_t);
        read_int(*g, "n_k", "grids.n_k", c.grids.n_k);
    }

    if (const Json* d = find_member(j, "detectors")) {
        if (!d->is_array()) throw ValidationError("detectors", "expected an array");
        for (std::size_t i = 0; i < d->size(); ++i)
            c.detectors.push_back(
                detail::json_number((*d)[i], "detectors[" + std::to_string(i) + "]"));
    }

    if (const Json* t = find_member(j, "thresholds")) {
        read_number(*t, "prominence", "thresholds.prominence", c.thresholds.prominence);
        read_number(*t, "resonance", "thresholds.resonance", c.thresholds.resonance);
        read_number(*t, "mean_vs_max", "thresholds.mean_vs_max", c.thresholds.mean_vs_max);
        read_number(*t, "timing", "thresholds.timing", c.thresholds.timing);
    }

    if (const Json* q = find_member(j, "quadrature")) {
        read_number(*q, "rel_tol", "quadrature.rel_tol", c.quadrature.rel_tol);
        read_int(*q, "max_intervals", "quadrature.max_intervals", c.quadrature.max_intervals);
        if (const Json* a = find_member(*q, "auto_refine")) {
            if (!a->is_boolean())
                throw ValidationError("quadrature.auto_refine", "expected a boolean");
            c.quadrature.auto_refine = a->get<bool>();
        }
    }

    if (const Json* s = find_member(j, "scan")) {
        if (const Json* lo = find_member(*s, "k_lo"))
            c.scan.k_lo = detail::json_number(*lo, "scan.k_lo");
        if (const Json* hi = find_member(*s, "k_hi"))
            c.scan.k_hi = detail::json_number(*hi, "scan.k_hi");
        read_int(*s, "n", "scan.n", c.scan.n);
    }

    if (const Json* o = find_member(j, "opaque")) {
        if (const Json* lv = find_member(*o, "chi_levels")) {
            if (!lv->is_array()) throw ValidationError("opaque.chi_levels", "expected an array");
            c.opaque_chi_levels.clear();
            for (std::size_t i = 0; i < lv->size(); ++i)
                c.opaque_chi_levels.push_back(detail::json_number(
                    (*lv)[i], "opaque.chi_levels[" + std::to_string(i) + "]"));
        }
    }
    if (const Json* s = find_member(j, "series"))
        read_int(*s, "max_terms", "series.max_terms", c.series_max_terms);
    if (const Json* f = find_member(j, "filter")) {
        if (const Json* bf = find_member(*f, "b_factors")) {
            if (!bf->is_array()) throw ValidationError("filter.b_factors", "expected an array");
            c.filter_b_factors.clear();
            for (std::size_t i = 0; i < bf->size(); ++i)
                c.filter_b_factors.push_back(detail::json_number(
                    (*bf)[i], "filter.b_factors[" + std::to_string(i) + "]"));
        }
    }
    if (const Json* s = find_member(j, "seed")) c.seed = s->get<std::uint64_t>();
    if (const Json* t = find_member(j, "threads")) c.threads = t->get<unsigned>();

    validate(c);
    return c;
}

/// Loads and eagerly validates a scenario configuration file.
inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw ParseError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

/// One named value in the run summary, tagged with the formula that produced
/// it: eq3 (closed-form amplitudes), eq4 (opaque limit), eq5 (series),
/// eq9 (exit times), or measured (wave-packet observation).
struct Metric {
    double value = 0.0;
    std::string provenance;
};

/// Column-oriented numeric table destined for one CSV file.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> data;  // one vector per column

    explicit Table(std::string n = {}, std::vector<std::string> cols = {})
        : name(std::move(n)), columns(std::move(cols)) {
        data.resize(columns.size());
    }

    void append_row(std::initializer_list<double> row) {
        if (row.size() != columns.size())
            throw std::invalid_argument("row width does not match table " + name);
        std::size_t i = 0;
        for (double v : row) data[i++].push_back(v);
    }

    std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

struct ScenarioReport {
    Experiment experiment = Experiment::amplitude_scan;
    std::map<std::string, Metric> metrics;
    std::map<std::string, bool> checks;
    std::vector<Table> tables;
    ScenarioConfig config;
};

}  // namespace twinbarrier
