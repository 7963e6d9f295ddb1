// Copyright 2026 The qnpusim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qnpu/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qnpu/error.hpp"

namespace qnpu::sim {

namespace {

using nlohmann::json;

std::uint32_t* field_ptr(LatencyModel& m, std::string_view key) {
    if (key == "single_qubit_gate") return &m.single_qubit_gate;
    if (key == "two_qubit_gate") return &m.two_qubit_gate;
    if (key == "measurement") return &m.measurement;
    if (key == "conditional_gate") return &m.conditional_gate;
    if (key == "zone_move") return &m.zone_move;
    if (key == "classical_link_hop") return &m.classical_link_hop;
    if (key == "qpu_qnpu_signal") return &m.qpu_qnpu_signal;
    if (key == "decode") return &m.decode;
    if (key == "uop_issue") return &m.uop_issue;
    if (key == "epr_reserve_lookup") return &m.epr_reserve_lookup;
    return nullptr;
}

std::uint32_t as_u32(const json& v, std::string_view key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0 || v.get<std::int64_t>() > 1'000'000) {
        throw ConfigError("config key '" + std::string(key) + "' must be a non-negative integer");
    }
    return v.get<std::uint32_t>();
}

std::string as_str(const json& v, std::string_view key) {
    if (!v.is_string()) throw ConfigError("config key '" + std::string(key) + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::uint32_t& latency_field(LatencyModel& m, std::string_view key) {
    std::uint32_t* p = field_ptr(m, key);
    if (p == nullptr) throw ConfigError("unknown latency key '" + std::string(key) + "'");
    return *p;
}

std::uint32_t latency_field(const LatencyModel& m, std::string_view key) {
    return latency_field(const_cast<LatencyModel&>(m), key);
}

std::string latency_text(const LatencyModel& m) {
    std::string out;
    for (auto k : kLatencyKeys) {
        if (!out.empty()) out += ';';
        out += std::string(k) + "=" + std::to_string(latency_field(m, k));
    }
    return out;
}

std::string_view mode_name(Mode m) { return m == Mode::Monolithic ? "monolithic" : "decoupled"; }

Mode mode_from_name(std::string_view s) {
    if (s == "monolithic") return Mode::Monolithic;
    if (s == "decoupled") return Mode::Decoupled;
    throw ConfigError("unknown mode '" + std::string(s) + "' (expected monolithic or decoupled)");
}

void ArchConfig::check() const {
    if (qnpu_width == 0) throw ConfigError("qnpu_width must be positive");
    if (mode == Mode::Monolithic && qnpu_width != 1) {
        throw ConfigError("qnpu_width is meaningless in monolithic mode");
    }
    if (latency.single_qubit_gate == 0 || latency.two_qubit_gate == 0 || latency.measurement == 0) {
        throw ConfigError("gate and measurement latencies must be at least one cycle");
    }
    if (proxy_policy == compiler::ProxyPolicy::Fixed && proxy_pool == 0) throw ConfigError("proxy_pool must be positive");
    if (epr_mode == EprMode::Finite && epr_capacity == 0) throw ConfigError("epr_capacity must be positive");
}

compiler::LowerOptions ArchConfig::lower_options() const {
    compiler::LowerOptions o;
    o.protocol = protocol;
    o.proxy_policy = proxy_policy;
    o.proxy_pool = proxy_pool;
    return o;
}

ArchConfig config_from_json(std::string_view text, bool strict) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ArchConfig cfg;
    std::set<std::string> seen;
    const json* lat = nullptr;
    for (const auto& [key, v] : j.items()) {
        seen.insert(key);
        if (key == "mode") {
            cfg.mode = mode_from_name(as_str(v, key));
        } else if (key == "qnpu_width") {
            cfg.qnpu_width = as_u32(v, key);
        } else if (key == "protocol") {
            cfg.protocol = compiler::protocol_from_name(as_str(v, key));
        } else if (key == "proxy_policy") {
            cfg.proxy_policy = compiler::proxy_policy_from_name(as_str(v, key));
        } else if (key == "proxy_pool") {
            cfg.proxy_pool = as_u32(v, key);
        } else if (key == "epr_mode") {
            std::string s = as_str(v, key);
            if (s == "perfect") {
                cfg.epr_mode = EprMode::PerfectPrefetch;
            } else if (s == "finite") {
                cfg.epr_mode = EprMode::Finite;
            } else {
                throw ConfigError("unknown epr_mode '" + s + "' (expected perfect or finite)");
            }
        } else if (key == "epr_capacity") {
            cfg.epr_capacity = as_u32(v, key);
        } else if (key == "network_capacity") {
            cfg.network_capacity = as_u32(v, key);
        } else if (key == "comm_zone_size") {
            cfg.comm_zone_size = as_u32(v, key);
        } else if (key == "latency") {
            if (!v.is_object()) throw ConfigError("config key 'latency' must be an object");
            lat = &v;
        } else if (strict) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (strict) {
        for (const char* k : {"mode", "qnpu_width", "protocol", "latency"}) {
            if (!seen.count(k)) throw ConfigError(std::string("missing config key '") + k + "'");
        }
    }
    if (lat != nullptr) {
        std::set<std::string> lseen;
        for (const auto& [key, v] : lat->items()) {
            std::uint32_t* p = field_ptr(cfg.latency, key);
            if (p == nullptr) throw ConfigError("unknown latency key '" + key + "'");
            *p = as_u32(v, key);
            lseen.insert(key);
        }
        if (strict) {
            for (auto k : kLatencyKeys) {
                if (!lseen.count(std::string(k))) throw ConfigError("missing latency key '" + std::string(k) + "'");
            }
        }
    }
    cfg.check();
    return cfg;
}

std::string config_to_json(const ArchConfig& cfg) {
    json lat = json::object();
    for (auto k : kLatencyKeys) lat[std::string(k)] = latency_field(cfg.latency, k);
    json j = {
        {"mode", mode_name(cfg.mode)},
        {"qnpu_width", cfg.qnpu_width},
        {"protocol", compiler::protocol_name(cfg.protocol)},
        {"proxy_policy", compiler::proxy_policy_name(cfg.proxy_policy)},
        {"proxy_pool", cfg.proxy_pool},
        {"epr_mode", cfg.epr_mode == EprMode::PerfectPrefetch ? "perfect" : "finite"},
        {"epr_capacity", cfg.epr_capacity},
        {"network_capacity", cfg.network_capacity},
        {"comm_zone_size", cfg.comm_zone_size},
        {"latency", lat},
    };
    return j.dump(2) + "\n";
}

ArchConfig load_config(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json(ss.str(), strict);
}

void save_config(const ArchConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    out << config_to_json(cfg);
}

}  // namespace qnpu::sim
