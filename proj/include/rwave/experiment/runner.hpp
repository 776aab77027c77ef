#pragma once

// Registry of experiments and the run/verify entry points used by the CLI.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwave/experiment/experiments.hpp"

#ifndef RWAVE_VERSION
#define RWAVE_VERSION "dev"
#endif

namespace rwave::experiment {

struct ExperimentInfo {
    std::string name;
    std::string anchor;        // statement the experiment probes
    std::string description;
    std::vector<std::string> required_keys;
    ExperimentFn fn;
};

inline const std::vector<ExperimentInfo>& registry() {
    static const std::vector<ExperimentInfo> r = {
        {"sogge_ratio", "Prop 2.4", "L^p norms of eigenfunctions against (1+lambda^2)^exponent", {}, sogge_ratio_experiment},
        {"deviation", "Lemma 3.1", "tail of sum c_n l_n: Monte Carlo with Wilson intervals, exact when enumerable",
         {"c"}, deviation_experiment},
        {"khinchin", "Lemma 3.1", "L^p norms, sub-Gaussian rate fit and 2k-th moment bounds", {"c"}, khinchin_experiment},
        {"averaging", "Prop 4.1", "tail of the weighted space-time norm of randomized free waves", {},
         [](ConfigReader& r, const Context* c, Outcome& o) { averaging_like(r, c, o, false); }},
        {"chaos", "Prop 4.3", "L^p(Omega) growth of the averaged norm against sqrt(p)", {},
         [](ConfigReader& r, const Context* c, Outcome& o) { averaging_like(r, c, o, true); }},
        {"strichartz_probe", "Prop 2.2", "half-wave L^p L^q norms over H^s-normalized data", {}, strichartz_experiment},
        {"local_existence", "Thm 1", "Picard success fraction over a T grid", {}, local_existence_experiment_cfg},
        {"no_regularization", "Lemma B.1", "H^{s+eps} partial sums of randomized data", {}, no_regularization_cfg},
        {"norm_inflation", "Prop A.1", "concentrating bubbles: H^s norms at 0 and t_n", {}, norm_inflation_cfg},
        {"hs_lower_bound", "Lemma A.4", "||psi V(lambda phi)||_Hs / lambda^s over a lambda grid", {}, hs_lower_bound_cfg},
        {"picard_single", "Prop 5.1", "one Picard solve against the splitting reference", {}, picard_single_cfg},
        {"reference_convergence", "Eq. (1)", "splitting solver order, energy drift and constant-data check", {},
         reference_convergence_cfg},
    };
    return r;
}

inline const ExperimentInfo& find_experiment(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e;
    throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

// Smallest config accepted for `name`.
inline json minimal_config(const std::string& name) {
    json j = {{"experiment", name}};
    if (name == "deviation" || name == "khinchin") j["c"] = {1.0};
    return j;
}

struct RunOptions {
    int threads = 0;                          // 0: all cores
    std::optional<std::uint64_t> seed;        // overrides the config
    std::optional<std::filesystem::path> output_dir;
};

struct ResolvedConfig {
    const ExperimentInfo* info = nullptr;
    json config;                              // fully resolved
    std::uint64_t seed = 1;
    std::filesystem::path output_dir;
};

inline std::filesystem::path default_output_root() {
    if (const char* env = std::getenv("RWAVE_OUTPUT_ROOT"); env && *env) return env;
    return "rwave_runs";
}

// Accepts a config or a manifest (whose "config" is reused).
inline const json& config_of(const json& j) {
    if (j.is_object() && j.contains("manifest_version") && j.contains("config")) return j.at("config");
    return j;
}

namespace detail {

inline ResolvedConfig resolve(const RunOptions& opt, ConfigReader& reader) {
    ResolvedConfig rc;
    const auto name = reader.require<std::string>("experiment");
    rc.info = &find_experiment(name);
    rc.seed = reader.get<std::uint64_t>("seed", 1);
    if (opt.seed) rc.seed = *opt.seed;
    const auto out_cfg = reader.get<std::string>("output_dir", "");
    rc.output_dir = opt.output_dir ? *opt.output_dir
                                   : (!out_cfg.empty() ? std::filesystem::path(out_cfg) : default_output_root() / name);
    return rc;
}

} // namespace detail

// Parses and checks a config without running it.
inline ResolvedConfig validate_config(const json& input, const RunOptions& opt = {}) {
    const json& cfg = config_of(input);
    ConfigReader reader(cfg);
    auto rc = detail::resolve(opt, reader);
    Outcome dummy;
    rc.info->fn(reader, nullptr, dummy);
    rc.config = reader.resolved();
    rc.config["seed"] = rc.seed;
    rc.config["output_dir"] = rc.output_dir.generic_string();
    return rc;
}

struct FileRecord {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
    std::size_t rows = 0;
};

struct RunResult {
    ResolvedConfig resolved;
    Outcome outcome;
    std::vector<FileRecord> files;
    json manifest;
};

// Runs without touching the file system.
inline RunResult execute(const json& input, const RunOptions& opt = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const json& cfg = config_of(input);
    ConfigReader reader(cfg);
    RunResult res;
    res.resolved = detail::resolve(opt, reader);
    Context ctx{res.resolved.seed, opt.threads <= 0 ? default_thread_count() : opt.threads};
    res.resolved.info->fn(reader, &ctx, res.outcome);
    res.resolved.config = reader.resolved();
    res.resolved.config["seed"] = res.resolved.seed;
    res.resolved.config["output_dir"] = res.resolved.output_dir.generic_string();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json files = json::array();
    for (const auto& t : res.outcome.tables) {
        const auto text = t.render();
        res.files.push_back({t.name, sha256_hex(text), text.size(), t.rows.size()});
        files.push_back({{"name", t.name}, {"sha256", res.files.back().sha256}, {"bytes", text.size()},
                         {"rows", t.rows.size()}});
    }
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    res.manifest = {{"manifest_version", 1},
                    {"experiment", res.resolved.info->name},
                    {"anchor", res.resolved.info->anchor},
                    {"config", res.resolved.config},
                    {"code_version", RWAVE_VERSION},
                    {"threads", ctx.threads},
                    {"created_utc", stamp},
                    {"wall_time_seconds", wall},
                    {"summary", res.outcome.summary},
                    {"files", files}};
    return res;
}

inline RunResult run(const json& input, const RunOptions& opt = {}) {
    auto res = execute(input, opt);
    std::filesystem::create_directories(res.resolved.output_dir);
    for (const auto& t : res.outcome.tables) write_file(res.resolved.output_dir / t.name, t.render());
    write_file(res.resolved.output_dir / "manifest.json", res.manifest.dump(2) + "\n");
    return res;
}

struct VerifyReport {
    bool identical = true;
    std::vector<std::string> mismatches;
};

// Re-runs a manifest's config in memory and compares checksums.
inline VerifyReport verify(const json& manifest, const RunOptions& opt = {}) {
    if (!manifest.contains("files")) throw ConfigError("files", "not a manifest");
    const auto res = execute(manifest, opt);
    VerifyReport rep;
    std::map<std::string, std::string> fresh;
    for (const auto& f : res.files) fresh[f.name] = f.sha256;
    for (const auto& f : manifest.at("files")) {
        const auto name = f.at("name").get<std::string>();
        const auto it = fresh.find(name);
        if (it == fresh.end() || it->second != f.at("sha256").get<std::string>()) {
            rep.identical = false;
            rep.mismatches.push_back(name);
        }
        if (it != fresh.end()) fresh.erase(it);
    }
    for (const auto& [name, _] : fresh) {
        rep.identical = false;
        rep.mismatches.push_back(name);
    }
    return rep;
}

inline json read_json_file(const std::filesystem::path& p) {
    const auto text = read_file(p);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("cannot parse ") + p.string() + ": " + e.what());
    }
}

} // namespace rwave::experiment
