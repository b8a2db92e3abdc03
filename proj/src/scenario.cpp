#include "tcsim/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tcsim {

using nlohmann::json;

namespace {

const json& require(const json& node, const std::string& key, const std::string& path) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    auto it = node.find(key);
    if (it == node.end()) throw ConfigError(path + "." + key, "missing required key");
    return *it;
}

double as_number(const json& node, const std::string& path) {
    if (!node.is_number()) throw ConfigError(path, "expected a number");
    return node.get<double>();
}

double number_at(const json& node, const std::string& key, const std::string& path) {
    return as_number(require(node, key, path), path + "." + key);
}

double number_or(const json& node, const std::string& key, const std::string& path,
                 double fallback) {
    if (!node.is_object() || !node.contains(key)) return fallback;
    return as_number(node.at(key), path + "." + key);
}

int int_at(const json& node, const std::string& key, const std::string& path) {
    const json& v = require(node, key, path);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
    return v.get<int>();
}

int int_or(const json& node, const std::string& key, const std::string& path, int fallback) {
    if (!node.is_object() || !node.contains(key)) return fallback;
    const json& v = node.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
    return v.get<int>();
}

std::string string_at(const json& node, const std::string& key, const std::string& path) {
    const json& v = require(node, key, path);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

Scheme parse_scheme(const std::string& s, const std::string& path) {
    if (s == "none") return Scheme::none;
    if (s == "tcs_distance") return Scheme::tcs_distance;
    if (s == "tcs_time") return Scheme::tcs_time;
    if (s == "congestion_pricing") return Scheme::congestion_pricing;
    throw ConfigError(path, "unknown scheme '" + s +
                                "' (expected none|tcs_distance|tcs_time|congestion_pricing)");
}

TollProfile parse_toll(const json& node, const std::string& path, Scheme scheme,
                       double distance_scale, double time_scale) {
    TollProfile toll;
    const std::string shape = string_at(node, "shape", path);
    if (shape == "gaussian") {
        GaussianToll g;
        g.amplitude = number_at(node, "amplitude", path);
        g.center = number_at(node, "center", path);
        g.width = number_at(node, "width", path);
        if (!(g.width > 0.0)) throw ConfigError(path + ".width", "must be positive");
        if (g.amplitude < 0.0) throw ConfigError(path + ".amplitude", "must be nonnegative");
        toll.shape = g;
    } else if (shape == "step") {
        StepToll s;
        const json& levels = require(node, "levels", path);
        if (!levels.is_array() || levels.size() != 5)
            throw ConfigError(path + ".levels", "expected an array of 5 numbers");
        for (std::size_t i = 0; i < 5; ++i) {
            s.levels[i] = as_number(levels[i], path + ".levels[" + std::to_string(i) + "]");
            if (s.levels[i] < 0.0)
                throw ConfigError(path + ".levels[" + std::to_string(i) + "]",
                                  "must be nonnegative");
        }
        s.center = number_at(node, "center", path);
        s.band_width = number_or(node, "band_width", path, 15.0);
        if (!(s.band_width > 0.0)) throw ConfigError(path + ".band_width", "must be positive");
        toll.shape = s;
    } else if (shape == "triangular") {
        TriangularToll t;
        t.height = number_at(node, "height", path);
        t.base = number_at(node, "base", path);
        t.center = number_at(node, "center", path);
        if (!(t.base > 0.0)) throw ConfigError(path + ".base", "must be positive");
        if (t.height < 0.0) throw ConfigError(path + ".height", "must be nonnegative");
        toll.shape = t;
    } else {
        throw ConfigError(path + ".shape",
                          "unknown shape '" + shape + "' (expected gaussian|step|triangular)");
    }

    const std::string basis =
        node.contains("basis") ? string_at(node, "basis", path)
                               : (scheme == Scheme::tcs_time ? "per_travel_time" : "per_distance");
    if (basis == "per_distance") {
        toll.basis = TollBasis::per_distance;
        toll.unit_scale = distance_scale;
    } else if (basis == "per_travel_time") {
        toll.basis = TollBasis::per_travel_time;
        toll.unit_scale = time_scale;
    } else {
        throw ConfigError(path + ".basis", "expected per_distance|per_travel_time");
    }
    return toll;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin, std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError(origin, "top level must be an object");

    ScenarioConfig cfg;
    if (root.contains("name")) cfg.name = string_at(root, "name", origin);
    cfg.seed = static_cast<std::uint64_t>(int_at(root, "seed", origin));
    cfg.days = int_at(root, "days", origin);
    if (cfg.days < 1) throw ConfigError(origin + ".days", "must be >= 1");

    const json& pop = require(root, "population", origin);
    const std::string ppath = origin + ".population";
    cfg.population.count = int_at(pop, "count", ppath);
    if (cfg.population.count <= 0) throw ConfigError(ppath + ".count", "must be positive");
    {
        const json& tl = require(pop, "trip_length", ppath);
        const std::string tpath = ppath + ".trip_length";
        cfg.population.trip_length.mean = number_at(tl, "mean", tpath);
        cfg.population.trip_length.stddev = number_at(tl, "stddev", tpath);
        cfg.population.trip_length.lower = number_or(tl, "min", tpath, 0.0);
        cfg.population.trip_length.upper = number_or(tl, "max", tpath, 1e300);
    }
    {
        const json& dep = require(pop, "departure", ppath);
        const std::string dpath = ppath + ".departure";
        cfg.population.departure.mean = number_at(dep, "mean", dpath);
        cfg.population.departure.stddev = number_at(dep, "stddev", dpath);
        cfg.population.departure.lower = number_at(dep, "min", dpath);
        cfg.population.departure.upper = number_at(dep, "max", dpath);
    }
    if (pop.contains("penalties")) {
        const json& pen = pop.at("penalties");
        const std::string qpath = ppath + ".penalties";
        PenaltySpec& p = cfg.population.penalties;
        p.mean_early = number_or(pen, "mean_early", qpath, p.mean_early);
        p.mean_late = number_or(pen, "mean_late", qpath, p.mean_late);
        p.var_early = number_or(pen, "var_early", qpath, p.var_early);
        p.var_late = number_or(pen, "var_late", qpath, p.var_late);
        p.covariance = number_or(pen, "covariance", qpath, p.covariance);
        p.early_lower = number_or(pen, "early_min", qpath, p.early_lower);
        p.early_upper = number_or(pen, "early_max", qpath, p.early_upper);
        p.late_lower = number_or(pen, "late_min", qpath, p.late_lower);
        p.late_upper = number_or(pen, "late_max", qpath, p.late_upper);
    }
    cfg.population.value_of_time = number_or(pop, "value_of_time", ppath, 1.1);
    cfg.population.window_half_steps = int_or(pop, "window_half_steps", ppath, 30);
    cfg.population.step_minutes = number_or(pop, "step_minutes", ppath, 3.0);
    cfg.population.seed = cfg.seed;

    const json& net = require(root, "network", origin);
    const std::string npath = origin + ".network";
    const double vf_m_s = number_at(net, "free_flow_speed_m_s", npath);
    if (!(vf_m_s > 0.0)) throw ConfigError(npath + ".free_flow_speed_m_s", "must be positive");
    cfg.speed.free_flow_m_min = vf_m_s * 60.0;  // minutes are the internal time unit
    cfg.speed.jam_accumulation = number_at(net, "jam_accumulation", npath);
    if (!(cfg.speed.jam_accumulation > 0.0))
        throw ConfigError(npath + ".jam_accumulation", "must be positive");
    cfg.population.free_flow_speed_m_min = cfg.speed.free_flow_m_min;

    cfg.scheme = parse_scheme(string_at(root, "scheme", origin), origin + ".scheme");

    const json& mkt = require(root, "market", origin);
    const std::string mpath = origin + ".market";
    cfg.market.endowment = number_at(mkt, "endowment", mpath);
    cfg.market.price = number_or(mkt, "initial_price", mpath, 0.0);
    cfg.market.adjustment_rate = number_or(mkt, "adjustment_rate", mpath, 2e-4);
    if (cfg.market.price < 0.0) throw ConfigError(mpath + ".initial_price", "must be nonnegative");
    const double w = number_or(mkt, "distance_scale", mpath, 2e-4);
    const double w_time = number_or(mkt, "time_scale", mpath, 0.08);

    if (cfg.scheme != Scheme::none) {
        cfg.toll = parse_toll(require(root, "toll", origin), origin + ".toll", cfg.scheme, w,
                              w_time);
        if (cfg.scheme == Scheme::tcs_time && cfg.toll.basis != TollBasis::per_travel_time)
            throw ConfigError(origin + ".toll.basis", "tcs_time requires per_travel_time basis");
        if ((cfg.scheme == Scheme::tcs_distance || cfg.scheme == Scheme::congestion_pricing) &&
            cfg.toll.basis != TollBasis::per_distance)
            throw ConfigError(origin + ".toll.basis", "this scheme requires per_distance basis");
    }

    if (root.contains("behavior")) {
        const json& beh = root.at("behavior");
        const std::string bpath = origin + ".behavior";
        cfg.learning_weight = number_or(beh, "learning_weight", bpath, 0.7);
        cfg.logit_scale = number_or(beh, "logit_scale", bpath, 0.15);
    }
    if (!(cfg.learning_weight > 0.0) || !(cfg.learning_weight < 1.0))
        throw ConfigError(origin + ".behavior.learning_weight", "must lie in (0, 1)");
    if (!(cfg.logit_scale > 0.0))
        throw ConfigError(origin + ".behavior.logit_scale", "must be positive");

    if (root.contains("convergence")) {
        const json& con = root.at("convergence");
        const std::string cpath = origin + ".convergence";
        cfg.convergence.gap_threshold_pct =
            number_or(con, "gap_threshold_pct", cpath, 0.5);
        cfg.convergence.consecutive_days = int_or(con, "consecutive_days", cpath, 5);
        cfg.convergence.tail_days = int_or(con, "tail_days", cpath, 10);
        if (!(cfg.convergence.gap_threshold_pct > 0.0))
            throw ConfigError(cpath + ".gap_threshold_pct", "must be positive");
    }

    if (root.contains("record_days")) {
        const json& rd = root.at("record_days");
        if (!rd.is_array()) throw ConfigError(origin + ".record_days", "expected an array");
        cfg.record_days.clear();
        for (const auto& v : rd) {
            if (!v.is_number_integer())
                throw ConfigError(origin + ".record_days", "expected integers");
            cfg.record_days.push_back(v.get<int>());
        }
    }

    if (root.contains("warm_start") && !root.at("warm_start").is_null())
        cfg.warm_start = string_at(root, "warm_start", origin);

    if (root.contains("optimize")) {
        const json& opt = root.at("optimize");
        const std::string opath = origin + ".optimize";
        OptimizeConfig oc;
        const json& params = require(opt, "parameters", opath);
        if (!params.is_array() || params.empty())
            throw ConfigError(opath + ".parameters", "expected a nonempty array of names");
        const json& bounds = require(opt, "bounds", opath);
        for (const auto& p : params) {
            if (!p.is_string()) throw ConfigError(opath + ".parameters", "expected strings");
            const std::string name = p.get<std::string>();
            oc.parameters.push_back(name);
            const json& b = require(bounds, name, opath + ".bounds");
            if (!b.is_array() || b.size() != 2)
                throw ConfigError(opath + ".bounds." + name, "expected [lower, upper]");
            const double lo = as_number(b[0], opath + ".bounds." + name);
            const double hi = as_number(b[1], opath + ".bounds." + name);
            if (!(lo < hi)) throw ConfigError(opath + ".bounds." + name, "lower must be < upper");
            oc.bounds.emplace_back(lo, hi);
        }
        oc.n_init = int_or(opt, "n_init", opath, 30);
        oc.n_iter = int_or(opt, "n_iter", opath, 40);
        oc.beta = number_or(opt, "beta", opath, 2.0);
        if (oc.n_init < 1) throw ConfigError(opath + ".n_init", "must be >= 1");
        if (oc.n_iter < 0) throw ConfigError(opath + ".n_iter", "must be >= 0");
        if (oc.beta < 0.0) throw ConfigError(opath + ".beta", "must be nonnegative");
        cfg.optimize = oc;
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

namespace {

json toll_to_json(const TollProfile& toll) {
    json t;
    if (const auto* g = std::get_if<GaussianToll>(&toll.shape)) {
        t["shape"] = "gaussian";
        t["amplitude"] = g->amplitude;
        t["center"] = g->center;
        t["width"] = g->width;
    } else if (const auto* s = std::get_if<StepToll>(&toll.shape)) {
        t["shape"] = "step";
        t["levels"] = s->levels;
        t["center"] = s->center;
        t["band_width"] = s->band_width;
    } else if (const auto* tr = std::get_if<TriangularToll>(&toll.shape)) {
        t["shape"] = "triangular";
        t["height"] = tr->height;
        t["base"] = tr->base;
        t["center"] = tr->center;
    }
    t["basis"] = toll.basis == TollBasis::per_distance ? "per_distance" : "per_travel_time";
    t["unit_scale"] = toll.unit_scale;
    return t;
}

json population_to_json(const ScenarioConfig& cfg) {
    const PopulationSpec& p = cfg.population;
    json pop;
    pop["count"] = p.count;
    pop["trip_length"] = {{"mean", p.trip_length.mean},
                          {"stddev", p.trip_length.stddev},
                          {"min", p.trip_length.lower},
                          {"max", p.trip_length.upper}};
    pop["departure"] = {{"mean", p.departure.mean},
                        {"stddev", p.departure.stddev},
                        {"min", p.departure.lower},
                        {"max", p.departure.upper}};
    pop["penalties"] = {{"mean_early", p.penalties.mean_early},
                        {"mean_late", p.penalties.mean_late},
                        {"var_early", p.penalties.var_early},
                        {"var_late", p.penalties.var_late},
                        {"covariance", p.penalties.covariance},
                        {"early_min", p.penalties.early_lower},
                        {"early_max", p.penalties.early_upper},
                        {"late_min", p.penalties.late_lower},
                        {"late_max", p.penalties.late_upper}};
    pop["value_of_time"] = p.value_of_time;
    pop["window_half_steps"] = p.window_half_steps;
    pop["step_minutes"] = p.step_minutes;
    return pop;
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
    json root;
    root["name"] = cfg.name;
    root["seed"] = cfg.seed;
    root["days"] = cfg.days;
    root["population"] = population_to_json(cfg);
    root["network"] = {{"free_flow_speed_m_s", cfg.speed.free_flow_m_min / 60.0},
                       {"jam_accumulation", cfg.speed.jam_accumulation}};
    root["scheme"] = scheme_name(cfg.scheme);
    root["market"] = {{"endowment", cfg.market.endowment},
                      {"initial_price", cfg.market.price},
                      {"adjustment_rate", cfg.market.adjustment_rate}};
    if (cfg.scheme != Scheme::none) root["toll"] = toll_to_json(cfg.toll);
    root["behavior"] = {{"learning_weight", cfg.learning_weight},
                        {"logit_scale", cfg.logit_scale}};
    root["convergence"] = {{"gap_threshold_pct", cfg.convergence.gap_threshold_pct},
                           {"consecutive_days", cfg.convergence.consecutive_days},
                           {"tail_days", cfg.convergence.tail_days}};
    root["record_days"] = cfg.record_days;
    if (cfg.warm_start) root["warm_start"] = *cfg.warm_start;
    // nlohmann orders object keys, so the dump is canonical.
    return root.dump(2);
}

std::string config_hash(const ScenarioConfig& cfg) {
    const std::string canonical = scenario_to_json(cfg);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string population_identity(const ScenarioConfig& cfg) {
    json id;
    id["population"] = population_to_json(cfg);
    id["seed"] = cfg.seed;
    id["free_flow_speed_m_min"] = cfg.speed.free_flow_m_min;
    return id.dump();
}

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::none: return "none";
        case Scheme::tcs_distance: return "tcs_distance";
        case Scheme::tcs_time: return "tcs_time";
        case Scheme::congestion_pricing: return "congestion_pricing";
    }
    return "unknown";
}

bool scheme_uses_credits(Scheme scheme) {
    return scheme == Scheme::tcs_distance || scheme == Scheme::tcs_time;
}

void set_toll_parameter(TollProfile& toll, const std::string& name, double value) {
    if (auto* g = std::get_if<GaussianToll>(&toll.shape)) {
        if (name == "amplitude") { g->amplitude = value; return; }
        if (name == "center") { g->center = value; return; }
        if (name == "width") { g->width = value; return; }
    } else if (auto* s = std::get_if<StepToll>(&toll.shape)) {
        if (name == "center") { s->center = value; return; }
        if (name == "band_width") { s->band_width = value; return; }
        if (name.size() == 6 && name.rfind("level", 0) == 0) {
            const int idx = name[5] - '0';
            if (idx >= 0 && idx < 5) { s->levels[static_cast<std::size_t>(idx)] = value; return; }
        }
    } else if (auto* t = std::get_if<TriangularToll>(&toll.shape)) {
        if (name == "height") { t->height = value; return; }
        if (name == "base") { t->base = value; return; }
        if (name == "center") { t->center = value; return; }
    }
    throw ConfigError("optimize.parameters", "parameter '" + name +
                                                 "' does not apply to the configured toll shape");
}

}  // namespace tcsim
