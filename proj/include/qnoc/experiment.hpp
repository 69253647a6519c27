#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qnoc/benchgen.hpp"
#include "qnoc/circuit.hpp"
#include "qnoc/engine.hpp"
#include "qnoc/errors.hpp"

namespace qnoc {

// ---------------------------------------------------------------------------
// Flat key-value configuration: `key = value`, `#` comments, dotted keys.

struct ConfigEntry {
    std::string value;
    std::string origin;  // "file:line" or "flag"
};

class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<config>") {
        Config cfg;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const std::string where = source + ":" + std::to_string(line_no);
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
            const auto key = trim(line.substr(0, eq));
            const auto value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(where + ": empty key");
            if (value.empty()) throw ConfigError(where + ": empty value for '" + std::string(key) + "'");
            if (cfg.entries_.count(std::string(key))) {
                throw ConfigError(where + ": duplicate key '" + std::string(key) + "'");
            }
            cfg.entries_[std::string(key)] = {std::string(value), where};
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path.string() + ": cannot open");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path.string());
    }

    void set(const std::string& key, std::string value, std::string origin = "flag") {
        entries_[key] = {std::move(value), std::move(origin)};
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::map<std::string, ConfigEntry>& entries() const { return entries_; }

    std::string origin(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? "<default>" : it->second.origin;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }

    template <typename T>
    T get_number(const std::string& key, T fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return to_number<T>(it->second.value, it->second.origin, key);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        const auto& v = it->second.value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(it->second.origin + ": '" + key + "' expects true or false, got '" + v + "'");
    }

    template <typename T>
    static T to_number(std::string_view text, const std::string& where, const std::string& key) {
        T v{};
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw ConfigError(where + ": '" + key + "' expects a number, got '" + std::string(text) + "'");
        }
        return v;
    }

    static std::string_view trim(std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

private:
    std::map<std::string, ConfigEntry> entries_;
};

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto item = Config::trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

// "1,2,8", "1..32" or "5..40:5", mixed freely.
inline std::vector<std::uint64_t> parse_int_list(std::string_view s, const std::string& where, const std::string& key) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(s)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(Config::to_number<std::uint64_t>(item, where, key));
            continue;
        }
        const auto colon = item.find(':', dots);
        const auto lo = Config::to_number<std::uint64_t>(std::string_view(item).substr(0, dots), where, key);
        const auto hi = Config::to_number<std::uint64_t>(
            std::string_view(item).substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2),
            where, key);
        const std::uint64_t step =
            colon == std::string::npos ? 1 : Config::to_number<std::uint64_t>(std::string_view(item).substr(colon + 1), where, key);
        if (step == 0 || hi < lo) throw ConfigError(where + ": bad range '" + item + "' in '" + key + "'");
        for (std::uint64_t v = lo; v <= hi; v += step) out.push_back(v);
    }
    if (out.empty()) throw ConfigError(where + ": '" + key + "' must not be empty");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment specification.

enum class WorkloadKind { synthetic, qft, cuccaro, mcmt, quantum_volume, file };

struct ExperimentSpec {
    std::string name = "experiment";
    std::string kind = "compare";  // run | compare | sweep
    WorkloadKind workload = WorkloadKind::synthetic;
    std::string workload_label;  // CSV workload column

    SimConfig sim;
    std::vector<Strategy> strategies{Strategy::hop_by_hop, Strategy::two_way};

    // synthetic
    std::optional<int> synth_depth;  // empty: serial, one request per layer
    Strategy synth_reference = Strategy::hop_by_hop;
    std::vector<std::uint64_t> requests{1};
    std::vector<CrMode> cr_modes{CrMode::fixed(1)};

    // named benchmarks
    std::uint32_t size_a = 0;  // qft.n, cuccaro.bits, mcmt.controls, qv.n
    std::uint32_t size_b = 0;  // mcmt.targets, qv.layers
    std::filesystem::path circuit_path;

    std::vector<std::uint64_t> seeds{0};

    std::filesystem::path output_dir = "out";
    bool write_csv = true;
    bool write_json = true;
};

inline std::string_view to_string(WorkloadKind w) {
    switch (w) {
        case WorkloadKind::synthetic: return "synthetic";
        case WorkloadKind::qft: return "qft";
        case WorkloadKind::cuccaro: return "cuccaro";
        case WorkloadKind::mcmt: return "mcmt";
        case WorkloadKind::quantum_volume: return "qv";
        case WorkloadKind::file: return "file";
    }
    return "?";
}

/// Builds a spec from configuration keys. Unknown keys are rejected so typos
/// do not silently fall back to defaults.
inline ExperimentSpec make_spec(const Config& cfg) {
    static const std::vector<std::string> known{
        "name", "kind", "workload", "circuit", "strategy", "seed",
        "mesh.width", "mesh.height", "core.n", "core.m",
        "timing.t_epr", "timing.t_meas", "timing.t_classical", "timing.t_correct", "timing.t_gate",
        "timing.p_bsm", "timing.max_attempts", "engine.pipeline_hops",
        "synth.depth", "synth.cr", "synth.requests", "synth.reference",
        "qft.n", "cuccaro.bits", "mcmt.controls", "mcmt.targets", "qv.n", "qv.layers",
        "sweep.requests", "sweep.cr", "sweep.seeds", "sweep.strategies",
        "output.dir", "output.format"};
    for (const auto& [key, entry] : cfg.entries()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(entry.origin + ": unknown key '" + key + "'");
        }
    }

    auto wrap = [&](const std::string& key, auto&& fn) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ConfigError(cfg.origin(key) + ": " + e.what());
        }
    };

    ExperimentSpec s;
    s.name = cfg.get("name", s.name);
    s.kind = cfg.get("kind", s.kind);
    if (s.kind != "run" && s.kind != "compare" && s.kind != "sweep") {
        throw ConfigError(cfg.origin("kind") + ": kind must be run, compare or sweep");
    }

    const std::string wl = cfg.get("workload", "synthetic");
    static const std::map<std::string, WorkloadKind> workloads{
        {"synthetic", WorkloadKind::synthetic}, {"qft", WorkloadKind::qft},
        {"cuccaro", WorkloadKind::cuccaro},     {"mcmt", WorkloadKind::mcmt},
        {"qv", WorkloadKind::quantum_volume},   {"file", WorkloadKind::file}};
    const auto wit = workloads.find(wl);
    if (wit == workloads.end()) throw ConfigError(cfg.origin("workload") + ": unknown workload '" + wl + "'");
    s.workload = wit->second;

    const int width = cfg.get_number<int>("mesh.width", 4);
    const int height = cfg.get_number<int>("mesh.height", 4);
    s.sim.topology = wrap("mesh.width", [&] { return MeshTopology(width, height); });
    s.sim.n_per_core = cfg.get_number<std::uint32_t>("core.n", s.sim.n_per_core);
    s.sim.m_per_core = cfg.get_number<std::uint32_t>("core.m", s.sim.m_per_core);
    auto& t = s.sim.timing;
    t.t_epr = cfg.get_number<double>("timing.t_epr", t.t_epr);
    t.t_meas = cfg.get_number<double>("timing.t_meas", t.t_meas);
    t.t_classical = cfg.get_number<double>("timing.t_classical", t.t_classical);
    t.t_correct = cfg.get_number<double>("timing.t_correct", t.t_correct);
    t.t_gate = cfg.get_number<double>("timing.t_gate", t.t_gate);
    t.p_bsm = cfg.get_number<double>("timing.p_bsm", t.p_bsm);
    t.max_attempts = cfg.get_number<std::uint32_t>("timing.max_attempts", t.max_attempts);
    s.sim.pipeline_hops = cfg.get_bool("engine.pipeline_hops", false);
    try {
        s.sim.validate();
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("invalid simulation settings: ") + e.what());
    }

    if (s.kind == "run") {
        s.strategies = {wrap("strategy", [&] { return parse_strategy(cfg.get("strategy", "hh")); })};
    } else if (cfg.has("sweep.strategies")) {
        s.strategies.clear();
        for (const auto& tok : detail::split_list(cfg.get("sweep.strategies", ""))) {
            s.strategies.push_back(wrap("sweep.strategies", [&] { return parse_strategy(tok); }));
        }
        if (s.strategies.empty()) throw ConfigError(cfg.origin("sweep.strategies") + ": must not be empty");
    } else if (cfg.has("strategy")) {
        s.strategies = {wrap("strategy", [&] { return parse_strategy(cfg.get("strategy", "")); })};
    }

    const std::string depth = cfg.get("synth.depth", "serial");
    if (depth != "serial") {
        const int d = Config::to_number<int>(depth, cfg.origin("synth.depth"), "synth.depth");
        if (d <= 0) throw ConfigError(cfg.origin("synth.depth") + ": depth must be positive or 'serial'");
        s.synth_depth = d;
    }
    s.synth_reference = wrap("synth.reference", [&] { return parse_strategy(cfg.get("synth.reference", "hh")); });

    if (cfg.has("sweep.cr")) {
        s.cr_modes.clear();
        for (const auto& tok : detail::split_list(cfg.get("sweep.cr", ""))) {
            s.cr_modes.push_back(wrap("sweep.cr", [&] { return CrMode::parse(tok); }));
        }
        if (s.cr_modes.empty()) throw ConfigError(cfg.origin("sweep.cr") + ": must not be empty");
    } else {
        s.cr_modes = {wrap("synth.cr", [&] { return CrMode::parse(cfg.get("synth.cr", "fixed:1")); })};
    }

    const std::string req_key = cfg.has("sweep.requests") ? "sweep.requests" : "synth.requests";
    const std::string default_requests = s.synth_depth ? std::to_string(*s.synth_depth) : "1";
    s.requests = detail::parse_int_list(cfg.get(req_key, default_requests), cfg.origin(req_key), req_key);
    for (auto r : s.requests) {
        if (r == 0) throw ConfigError(cfg.origin(req_key) + ": request counts must be positive");
        if (s.synth_depth && r % static_cast<std::uint64_t>(*s.synth_depth) != 0 &&
            s.workload == WorkloadKind::synthetic) {
            throw ConfigError(cfg.origin(req_key) + ": request count " + std::to_string(r) +
                              " is not a multiple of synth.depth " + std::to_string(*s.synth_depth));
        }
    }

    const std::string seed_key = cfg.has("sweep.seeds") ? "sweep.seeds" : "seed";
    s.seeds = detail::parse_int_list(cfg.get(seed_key, "0"), cfg.origin(seed_key), seed_key);

    switch (s.workload) {
        case WorkloadKind::qft: s.size_a = cfg.get_number<std::uint32_t>("qft.n", 32); break;
        case WorkloadKind::cuccaro: s.size_a = cfg.get_number<std::uint32_t>("cuccaro.bits", 15); break;
        case WorkloadKind::mcmt:
            s.size_a = cfg.get_number<std::uint32_t>("mcmt.controls", 8);
            s.size_b = cfg.get_number<std::uint32_t>("mcmt.targets", 17);
            break;
        case WorkloadKind::quantum_volume:
            s.size_a = cfg.get_number<std::uint32_t>("qv.n", 32);
            s.size_b = cfg.get_number<std::uint32_t>("qv.layers", s.size_a);
            break;
        case WorkloadKind::file:
            if (!cfg.has("circuit")) throw ConfigError("workload 'file' requires a 'circuit' path");
            s.circuit_path = cfg.get("circuit", "");
            break;
        case WorkloadKind::synthetic: break;
    }
    s.workload_label = s.workload == WorkloadKind::file ? s.circuit_path.stem().string()
                                                        : std::string(to_string(s.workload));

    s.output_dir = cfg.get("output.dir", s.output_dir.string());
    const std::string fmt = cfg.get("output.format", "both");
    if (fmt != "csv" && fmt != "json" && fmt != "both") {
        throw ConfigError(cfg.origin("output.format") + ": format must be csv, json or both");
    }
    s.write_csv = fmt != "json";
    s.write_json = fmt != "csv";
    return s;
}

// ---------------------------------------------------------------------------
// Running.

struct ResultRow {
    std::string workload;
    Strategy strategy = Strategy::hop_by_hop;
    std::string cr_mode;
    std::uint64_t num_requests = 0;
    std::uint64_t seed = 0;
    double comm_delay_sum = 0;
    double comm_delay_critical = 0;
    double total_delay = 0;
    std::size_t original_depth = 0;
    std::size_t expanded_depth = 0;
    std::size_t congestion_events = 0;
    std::uint32_t max_core_occupancy = 0;
    AuditResult audit;
};

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "workload",       "strategy",           "cr_mode",       "num_requests",   "seed",
        "comm_delay_sum", "comm_delay_critical", "total_delay",   "original_depth", "expanded_depth",
        "congestion_events", "max_core_occupancy"};
    return cols;
}

namespace detail {

// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline Circuit load_circuit_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open circuit file");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_circuit(ss.str());
    } catch (const ParseError& e) {
        throw ConfigError(path.string() + ":" + std::to_string(e.line()) + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

struct SweepPoint {
    CrMode cr;
    std::uint64_t requests = 0;
    std::uint64_t seed = 0;
};

}  // namespace detail

/// Circuit for one sweep point. Non-synthetic workloads ignore `cr` and
/// `requests`; quantum volume draws its layers from `seed`.
inline Circuit build_workload(const ExperimentSpec& spec, const CrMode& cr, std::uint64_t requests,
                              std::uint64_t seed) {
    switch (spec.workload) {
        case WorkloadKind::synthetic: {
            SynthSpec ss;
            const auto depth = spec.synth_depth ? static_cast<std::uint64_t>(*spec.synth_depth) : requests;
            ss.target_depth = static_cast<int>(depth);
            ss.requests_per_layer = static_cast<int>(requests / depth);
            ss.cr = cr;
            ss.seed = seed;
            ss.reference = spec.synth_reference;
            return gen_synthetic(ss, spec.sim.topology, spec.sim.n_per_core);
        }
        case WorkloadKind::qft: return gen_qft(spec.size_a);
        case WorkloadKind::cuccaro: return gen_cuccaro(spec.size_a);
        case WorkloadKind::mcmt: return gen_mcmt(spec.size_a, spec.size_b);
        case WorkloadKind::quantum_volume: return gen_quantum_volume(spec.size_a, spec.size_b, seed);
        case WorkloadKind::file: return detail::load_circuit_file(spec.circuit_path);
    }
    throw std::logic_error("unhandled workload");
}

struct ExperimentResult {
    std::vector<ResultRow> rows;  // spec order
    std::optional<std::string> error;  // first failing point, rows hold everything before it
};

/// Runs every sweep point (cr modes x request counts x seeds, then strategies)
/// on up to `jobs` threads. Rows come back in spec order whatever the
/// completion order.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned jobs = 0) {
    std::vector<detail::SweepPoint> points;
    const bool synthetic = spec.workload == WorkloadKind::synthetic;
    const std::vector<CrMode> crs = synthetic ? spec.cr_modes : std::vector<CrMode>{CrMode::fixed(1)};
    const std::vector<std::uint64_t> reqs = synthetic ? spec.requests : std::vector<std::uint64_t>{0};
    for (const auto& cr : crs) {
        for (auto r : reqs) {
            for (auto seed : spec.seeds) points.push_back({cr, r, seed});
        }
    }

    const std::size_t per_point = spec.strategies.size();
    std::vector<std::optional<ResultRow>> slots(points.size() * per_point);
    std::vector<std::string> errors(points.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            const auto& p = points[i];
            try {
                const Circuit c = build_workload(spec, p.cr, p.requests, p.seed);
                for (std::size_t k = 0; k < per_point; ++k) {
                    SimConfig cfg = spec.sim;
                    cfg.strategy = spec.strategies[k];
                    cfg.seed = p.seed;
                    const SimReport rep = run(c, cfg);
                    ResultRow row;
                    row.workload = spec.workload_label;
                    row.strategy = cfg.strategy;
                    row.cr_mode = synthetic ? p.cr.to_string() : "na";
                    row.num_requests = synthetic ? p.requests : rep.inter_core_requests;
                    row.seed = p.seed;
                    row.comm_delay_sum = rep.comm_delay_sum;
                    row.comm_delay_critical = rep.comm_delay_critical;
                    row.total_delay = rep.total_delay;
                    row.original_depth = rep.original_depth;
                    row.expanded_depth = rep.expanded_depth;
                    row.congestion_events = rep.congestion_events;
                    row.max_core_occupancy = rep.max_core_occupancy;
                    row.audit = rep.audit;
                    slots[i * per_point + k] = std::move(row);
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };

    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(points.size(), 1)));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    ExperimentResult out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!errors[i].empty()) {
            const auto& p = points[i];
            out.error = spec.workload_label + " (cr " + p.cr.to_string() + ", requests " + std::to_string(p.requests) +
                        ", seed " + std::to_string(p.seed) + "): " + errors[i];
            break;
        }
        for (std::size_t k = 0; k < per_point; ++k) out.rows.push_back(std::move(*slots[i * per_point + k]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output.

inline std::string to_csv(const std::vector<ResultRow>& rows) {
    std::string out;
    for (std::size_t i = 0; i < csv_columns().size(); ++i) {
        if (i) out += ',';
        out += csv_columns()[i];
    }
    out += '\n';
    for (const auto& r : rows) {
        out += r.workload + ',' + std::string(to_string(r.strategy)) + ',' + r.cr_mode + ',' +
               std::to_string(r.num_requests) + ',' + std::to_string(r.seed) + ',' +
               detail::format_double(r.comm_delay_sum) + ',' + detail::format_double(r.comm_delay_critical) + ',' +
               detail::format_double(r.total_delay) + ',' + std::to_string(r.original_depth) + ',' +
               std::to_string(r.expanded_depth) + ',' + std::to_string(r.congestion_events) + ',' +
               std::to_string(r.max_core_occupancy) + '\n';
    }
    return out;
}

namespace detail {

struct Means {
    std::size_t runs = 0;
    double comm_delay_sum = 0;
    double comm_delay_critical = 0;
    double total_delay = 0;
    double expanded_depth = 0;
    double original_depth = 0;

    void add(const ResultRow& r) {
        ++runs;
        comm_delay_sum += r.comm_delay_sum;
        comm_delay_critical += r.comm_delay_critical;
        total_delay += r.total_delay;
        expanded_depth += static_cast<double>(r.expanded_depth);
        original_depth += static_cast<double>(r.original_depth);
    }

    nlohmann::ordered_json json() const {
        const double n = runs ? static_cast<double>(runs) : 1.0;
        return {{"runs", runs},
                {"comm_delay_critical", comm_delay_critical / n},
                {"comm_delay_sum", comm_delay_sum / n},
                {"total_delay", total_delay / n},
                {"original_depth", original_depth / n},
                {"expanded_depth", expanded_depth / n}};
    }
};

inline nlohmann::ordered_json summarize(const std::vector<const ResultRow*>& rows) {
    std::map<std::string, Means> by_strategy;
    for (const auto* r : rows) by_strategy[std::string(to_string(r->strategy))].add(*r);
    nlohmann::ordered_json j;
    j["strategies"] = nlohmann::ordered_json::object();
    for (const auto& [name, m] : by_strategy) j["strategies"][name] = m.json();
    if (by_strategy.count("hh") && by_strategy.count("twt")) {
        const auto hh = by_strategy["hh"].json();
        const auto twt = by_strategy["twt"].json();
        j["reduction"] = {
            {"comm_delay_critical", reduction(hh["comm_delay_critical"], twt["comm_delay_critical"])},
            {"comm_delay_sum", reduction(hh["comm_delay_sum"], twt["comm_delay_sum"])},
            {"expanded_depth", reduction(hh["expanded_depth"], twt["expanded_depth"])}};
    }
    return j;
}

}  // namespace detail

/// Per-strategy means and hh-vs-twt reductions, overall, per workload and per
/// (workload, cr_mode, num_requests) group. Reductions are taken on means.
inline nlohmann::ordered_json summary_json(const std::string& name, const std::vector<ResultRow>& rows) {
    nlohmann::ordered_json j;
    j["experiment"] = name;
    j["rows"] = rows.size();
    std::vector<const ResultRow*> all;
    for (const auto& r : rows) all.push_back(&r);
    const auto overall = detail::summarize(all);
    for (const auto& [k, v] : overall.items()) j[k] = v;

    std::vector<std::string> order;
    std::map<std::string, std::vector<const ResultRow*>> by_workload;
    for (const auto& r : rows) {
        if (!by_workload.count(r.workload)) order.push_back(r.workload);
        by_workload[r.workload].push_back(&r);
    }
    j["workloads"] = nlohmann::ordered_json::object();
    for (const auto& w : order) j["workloads"][w] = detail::summarize(by_workload[w]);

    using Key = std::tuple<std::string, std::string, std::uint64_t>;
    std::vector<Key> gorder;
    std::map<Key, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) {
        // Non-synthetic counts vary by strategy, so they do not split groups.
        const Key k{r.workload, r.cr_mode, r.cr_mode == "na" ? 0 : r.num_requests};
        if (!groups.count(k)) gorder.push_back(k);
        groups[k].push_back(&r);
    }
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& k : gorder) {
        auto g = detail::summarize(groups[k]);
        nlohmann::ordered_json entry{{"workload", std::get<0>(k)}, {"cr_mode", std::get<1>(k)}};
        if (std::get<1>(k) != "na") entry["num_requests"] = std::get<2>(k);
        for (const auto& [key, v] : g.items()) entry[key] = v;
        j["groups"].push_back(entry);
    }

    AuditResult audit;
    for (const auto& r : rows) {
        audit.link_overlaps += r.audit.link_overlaps;
        audit.comm_overholds += r.audit.comm_overholds;
    }
    j["audit"] = {{"link_overlaps", audit.link_overlaps}, {"comm_overholds", audit.comm_overholds}};
    return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << content;
}

/// Writes `<dir>/<name>.csv` and/or `<dir>/<name>.json` per the output format and
/// returns the paths written. Rows that completed before a failure are still
/// written.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentSpec& spec, const ExperimentResult& result) {
    std::vector<std::filesystem::path> written;
    if (spec.write_csv) {
        written.push_back(spec.output_dir / (spec.name + ".csv"));
        write_file(written.back(), to_csv(result.rows));
    }
    if (spec.write_json) {
        written.push_back(spec.output_dir / (spec.name + ".json"));
        write_file(written.back(), summary_json(spec.name, result.rows).dump(2) + "\n");
    }
    return written;
}

// ---------------------------------------------------------------------------
// Plot data.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t p = 0;
        while (true) {
            const auto comma = line.find(',', p);
            cells.emplace_back(line.substr(p, comma == std::string_view::npos ? std::string_view::npos : comma - p));
            if (comma == std::string_view::npos) break;
            p = comma + 1;
        }
        if (t.header.empty()) {
            t.header = std::move(cells);
        } else {
            if (cells.size() != t.header.size()) {
                throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, got " + std::to_string(cells.size()));
            }
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw SchemaError("empty CSV");
    return t;
}

namespace detail {

inline double cell_double(const std::string& s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw SchemaError("not a number: '" + s + "'");
    return v;
}

}  // namespace detail

/// From a results CSV, writes tidy files for plotting:
///  - delay_vs_requests.csv  panel,x,series,y   (mean critical delay per request count)
///  - delay_by_benchmark.csv x,series,y,reduction
///  - depth_by_benchmark.csv x,series,y          (original / hh / twt)
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& csv_path,
                                                         const std::filesystem::path& out_dir) {
    std::ifstream in(csv_path);
    if (!in) throw SchemaError(csv_path.string() + ": cannot open");
    std::stringstream ss;
    ss << in.rdbuf();
    const CsvTable t = parse_csv(ss.str());
    const auto c_work = t.column("workload");
    const auto c_strat = t.column("strategy");
    const auto c_cr = t.column("cr_mode");
    const auto c_req = t.column("num_requests");
    const auto c_crit = t.column("comm_delay_critical");
    const auto c_orig = t.column("original_depth");
    const auto c_exp = t.column("expanded_depth");

    struct Acc {
        double sum = 0;
        std::size_t n = 0;
        void add(double v) { sum += v, ++n; }
        double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    };

    std::vector<std::string> work_order;
    std::map<std::tuple<std::string, std::string, double>, Acc> fig6;  // (panel, series, x)
    std::map<std::pair<std::string, std::string>, Acc> delay, depth;    // (workload, series)
    std::map<std::string, Acc> original;
    for (const auto& row : t.rows) {
        const auto& w = row[c_work];
        const auto& s = row[c_strat];
        if (std::find(work_order.begin(), work_order.end(), w) == work_order.end()) work_order.push_back(w);
        const double crit = detail::cell_double(row[c_crit]);
        if (row[c_cr] != "na") fig6[{w + "/" + row[c_cr], s, detail::cell_double(row[c_req])}].add(crit);
        delay[{w, s}].add(crit);
        depth[{w, s}].add(detail::cell_double(row[c_exp]));
        original[w].add(detail::cell_double(row[c_orig]));
    }

    std::string f6 = "panel,x,series,y\n";
    for (const auto& [k, acc] : fig6) {
        f6 += std::get<0>(k) + ',' + detail::format_double(std::get<2>(k)) + ',' + std::get<1>(k) + ',' +
              detail::format_double(acc.mean()) + '\n';
    }

    std::string f7 = "x,series,y,reduction\n";
    std::string f8 = "x,series,y\n";
    for (const auto& w : work_order) {
        const double hh = delay.count({w, "hh"}) ? delay[{w, "hh"}].mean() : 0.0;
        const double twt = delay.count({w, "twt"}) ? delay[{w, "twt"}].mean() : 0.0;
        const std::string red =
            delay.count({w, "hh"}) && delay.count({w, "twt"}) ? detail::format_double(reduction(hh, twt)) : "";
        for (const char* s : {"hh", "twt"}) {
            if (delay.count({w, s})) f7 += w + ',' + s + ',' + detail::format_double(delay[{w, s}].mean()) + ',' + red + '\n';
        }
        f8 += w + ",original," + detail::format_double(original[w].mean()) + '\n';
        for (const char* s : {"hh", "twt"}) {
            if (depth.count({w, s})) f8 += w + ',' + s + ',' + detail::format_double(depth[{w, s}].mean()) + '\n';
        }
    }

    const std::vector<std::filesystem::path> paths{out_dir / "delay_vs_requests.csv", out_dir / "delay_by_benchmark.csv",
                                                   out_dir / "depth_by_benchmark.csv"};
    write_file(paths[0], f6);
    write_file(paths[1], f7);
    write_file(paths[2], f8);
    return paths;
}

}  // namespace qnoc
