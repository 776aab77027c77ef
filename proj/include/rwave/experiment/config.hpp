#pragma once

// Typed access to a JSON experiment config. Every key read is echoed, with its
// resolved value, into `resolved()`; keys never read are rejected by finish().

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwave/errors.hpp"
#include "rwave/randomization.hpp"
#include "rwave/spectral_basis.hpp"

namespace rwave::experiment {

using nlohmann::json;

// Invalid config; `key_path` names the offending entry ("geometry.dimension", "trials", ...).
struct ConfigError : Error {
    ConfigError(std::string path, const std::string& what)
        : Error("config key '" + path + "': " + what), key_path(std::move(path)) {}
    std::string key_path;
};

class ConfigReader {
public:
    explicit ConfigReader(const json& j, std::string prefix = {}) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    T get(const std::string& key, const T& fallback) {
        used_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) {
            resolved_[key] = fallback;
            return fallback;
        }
        return convert<T>(key);
    }

    template <class T>
    T require(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null()) throw ConfigError(path(key), "required key is missing");
        return convert<T>(key);
    }

    // Raw sub-object access; the caller records its resolved form with set_resolved().
    const json* raw(const std::string& key) {
        used_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null() ? &j_.at(key) : nullptr;
    }
    void set_resolved(const std::string& key, json v) { resolved_[key] = std::move(v); }

    ConfigReader child(const std::string& key) {
        used_.insert(key);
        static const json empty = json::object();
        return ConfigReader(j_.contains(key) ? j_.at(key) : empty, path(key));
    }

    // Mark keys handled elsewhere (the experiment name, for example).
    void ignore(const std::string& key) { used_.insert(key); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError(path(it.key()), "unknown key");
    }

    const json& resolved() const { return resolved_; }

private:
    template <class T>
    T convert(const std::string& key) {
        const json& v = j_.at(key);
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError(path(key), "expected a number");
            } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(path(key), "expected an integer");
                if constexpr (std::is_unsigned_v<T>)
                    if (v.is_number_integer() && v.get<std::int64_t>() < 0)
                        throw ConfigError(path(key), "expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError(path(key), "expected a string");
            } else {
                if (!v.is_array()) throw ConfigError(path(key), "expected an array");
            }
            T out = v.get<T>();
            resolved_[key] = out;
            return out;
        } catch (const json::exception& e) {
            throw ConfigError(path(key), e.what());
        }
    }

    const json& j_;
    std::string prefix_;
    std::set<std::string> used_;
    json resolved_ = json::object();
};

// Range checks raising ConfigError with the key path.
inline void check(bool ok, const ConfigReader& r, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(r.path(key), what);
}

template <class T>
T positive(ConfigReader& r, const std::string& key, T fallback) {
    const T v = r.get<T>(key, fallback);
    check(v > T(0), r, key, "must be positive");
    return v;
}

template <class T>
std::vector<T> nonempty_list(ConfigReader& r, const std::string& key, std::vector<T> fallback, bool positive_entries) {
    auto v = r.get<std::vector<T>>(key, std::move(fallback));
    check(!v.empty(), r, key, "must not be empty");
    if (positive_entries)
        for (const T& x : v) check(x > T(0), r, key, "entries must be positive");
    return v;
}

// geometry: "torus" or {kind, dimension, side}
inline Geometry read_geometry(ConfigReader& parent, const std::string& key, GeometryKind kind = GeometryKind::torus,
                              int dimension = 1) {
    const json* raw = parent.raw(key);
    json obj = json::object();
    if (raw && raw->is_string())
        obj["kind"] = *raw;
    else if (raw)
        obj = *raw;
    ConfigReader r(obj, parent.path(key));
    const auto kind_s = r.get<std::string>("kind", std::string(to_string(kind)));
    GeometryKind k;
    try {
        k = parse_geometry_kind(kind_s);
    } catch (const DomainError& e) {
        throw ConfigError(r.path("kind"), e.what());
    }
    const int d = r.get<int>("dimension", dimension);
    check(d >= 1 && d <= 3, r, "dimension", "must be 1, 2 or 3");
    const double side = positive<double>(r, "side", k == GeometryKind::torus ? 2.0 * std::numbers::pi : std::numbers::pi);
    r.finish();
    json res = r.resolved();
    res["kind"] = std::string(to_string(k));
    parent.set_resolved(key, res);
    return Geometry::make(k, d, side);
}

// family: "gaussian" or {kind, variance | half_width | support + probabilities}
inline RandomFamily read_family(ConfigReader& parent, const std::string& key, const std::string& fallback = "gaussian") {
    const json* raw = parent.raw(key);
    json obj = json::object();
    if (raw && raw->is_string())
        obj["kind"] = *raw;
    else if (raw)
        obj = *raw;
    ConfigReader r(obj, parent.path(key));
    FamilyKind k;
    try {
        k = parse_family_kind(r.get<std::string>("kind", fallback));
    } catch (const DomainError& e) {
        throw ConfigError(r.path("kind"), e.what());
    }
    RandomFamily fam;
    try {
        switch (k) {
        case FamilyKind::gaussian: fam = RandomFamily::gaussian(positive<double>(r, "variance", 1.0)); break;
        case FamilyKind::bernoulli: fam = RandomFamily::bernoulli(); break;
        case FamilyKind::uniform_pm: fam = RandomFamily::uniform_pm(positive<double>(r, "half_width", std::sqrt(3.0))); break;
        case FamilyKind::custom_table:
            fam = RandomFamily::custom(r.require<std::vector<double>>("support"),
                                       r.require<std::vector<double>>("probabilities"));
            break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(parent.path(key), e.what());
    }
    r.finish();
    json res = r.resolved();
    res["kind"] = std::string(to_string(k));
    parent.set_resolved(key, res);
    return certify(fam);
}

} // namespace rwave::experiment
