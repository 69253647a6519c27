// qnoc: run, compare and sweep mesh interconnect simulations.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qnoc/experiment.hpp"

namespace {

struct Common {
    std::string config;
    std::string strategy;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::string depth;
    std::string cr;
    std::optional<std::uint32_t> qubits;
    std::string requests;
    std::string circuit;
    std::string workload;
    std::vector<std::string> sets;
    unsigned jobs = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--config", c.config, "Experiment file (key = value lines)");
    app->add_option("--strategy", c.strategy, "hh or twt")->check(CLI::IsMember({"hh", "twt"}));
    app->add_option("--seed", c.seed, "Seed, or a seed list for sweep");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--format", c.format, "csv, json or both")->check(CLI::IsMember({"csv", "json", "both"}));
    app->add_option("--workload", c.workload, "synthetic, qft, cuccaro, mcmt, qv or file");
    app->add_option("--circuit", c.circuit, "Gate-list file (implies --workload file)");
    app->add_option("--depth", c.depth, "Synthetic depth, or 'serial'");
    app->add_option("--cr", c.cr, "fixed:<r> or random:<max>");
    app->add_option("--qubits", c.qubits, "Computation qubits per core");
    app->add_option("--requests", c.requests, "Synthetic request count (list or range for sweep)");
    app->add_option("--set", c.sets, "Override any key: --set timing.p_bsm=0.5")->take_all();
    app->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)");
}

qnoc::Config build_config(const Common& c, const std::string& kind) {
    qnoc::Config cfg = c.config.empty() ? qnoc::Config{} : qnoc::Config::load(c.config);
    cfg.set("kind", kind);
    const bool sweep = kind == "sweep";
    if (!c.workload.empty()) cfg.set("workload", c.workload);
    if (!c.circuit.empty()) {
        cfg.set("workload", "file");
        cfg.set("circuit", c.circuit);
    }
    if (!c.strategy.empty()) cfg.set(sweep ? "sweep.strategies" : "strategy", c.strategy);
    if (c.seed) cfg.set(sweep ? "sweep.seeds" : "seed", std::to_string(*c.seed));
    if (!c.out.empty()) cfg.set("output.dir", c.out);
    if (!c.format.empty()) cfg.set("output.format", c.format);
    if (!c.depth.empty()) cfg.set("synth.depth", c.depth);
    if (!c.cr.empty()) cfg.set(sweep ? "sweep.cr" : "synth.cr", c.cr);
    if (c.qubits) cfg.set("core.n", std::to_string(*c.qubits));
    if (!c.requests.empty()) cfg.set(sweep ? "sweep.requests" : "synth.requests", c.requests);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw qnoc::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(std::string(qnoc::Config::trim(kv.substr(0, eq))), std::string(qnoc::Config::trim(kv.substr(eq + 1))));
    }
    return cfg;
}

void print_rows(const std::vector<qnoc::ResultRow>& rows) {
    for (const auto& r : rows) {
        std::cout << r.workload << " " << qnoc::to_string(r.strategy) << " " << r.cr_mode << " requests=" << r.num_requests
                  << " seed=" << r.seed << " comm_delay_critical=" << r.comm_delay_critical
                  << " comm_delay_sum=" << r.comm_delay_sum << " total_delay=" << r.total_delay
                  << " depth=" << r.original_depth << "->" << r.expanded_depth << " congestion=" << r.congestion_events
                  << "\n";
    }
}

int run_kind(const Common& c, const std::string& kind) {
    const qnoc::ExperimentSpec spec = qnoc::make_spec(build_config(c, kind));
    const auto result = qnoc::run_experiment(spec, c.jobs);
    const bool write = !c.out.empty() || !c.config.empty();
    if (write) {
        for (const auto& p : qnoc::write_outputs(spec, result)) std::cerr << "wrote " << p.string() << "\n";
    }
    if (kind != "sweep" || !write) print_rows(result.rows);
    if (kind == "compare" && !result.rows.empty()) {
        const auto j = qnoc::summary_json(spec.name, result.rows);
        if (j.contains("reduction")) {
            std::cout << "reduction comm_delay_critical=" << j["reduction"]["comm_delay_critical"].get<double>()
                      << " expanded_depth=" << j["reduction"]["expanded_depth"].get<double>() << "\n";
        }
    }
    if (result.error) {
        std::cerr << "error: " << *result.error << "\n";
        return 1;
    }
    return 0;
}

int gen(const std::string& name, const Common& c, std::uint32_t bits, std::uint32_t controls, std::uint32_t targets,
        std::uint32_t layers) {
    qnoc::Config cfg = build_config(c, "run");
    cfg.set("workload", name);
    if (bits) cfg.set(name == "cuccaro" ? "cuccaro.bits" : name == "qv" ? "qv.n" : "qft.n", std::to_string(bits));
    if (controls) cfg.set("mcmt.controls", std::to_string(controls));
    if (targets) cfg.set("mcmt.targets", std::to_string(targets));
    if (layers) cfg.set("qv.layers", std::to_string(layers));
    const auto spec = qnoc::make_spec(cfg);
    const auto circuit =
        qnoc::build_workload(spec, spec.cr_modes.front(), spec.requests.front(), spec.seeds.front());
    const std::string text = qnoc::serialize_circuit(circuit);
    if (c.out.empty()) {
        std::cout << text;
    } else {
        qnoc::write_file(c.out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-core quantum interconnect simulator"};
    app.require_subcommand(1);

    Common run_opts, cmp_opts, sweep_opts, gen_opts;
    auto* run_cmd = app.add_subcommand("run", "Simulate one strategy");
    add_common(run_cmd, run_opts);
    auto* cmp_cmd = app.add_subcommand("compare", "Simulate hh and twt on the same workload");
    add_common(cmp_cmd, cmp_opts);
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write CSV/JSON");
    add_common(sweep_cmd, sweep_opts);

    auto* gen_cmd = app.add_subcommand("gen", "Print a generated circuit in gate-list form");
    std::string gen_name;
    std::uint32_t bits = 0, controls = 0, targets = 0, layers = 0;
    gen_cmd->add_option("generator", gen_name, "synthetic, qft, cuccaro, mcmt or qv")
        ->required()
        ->check(CLI::IsMember({"synthetic", "qft", "cuccaro", "mcmt", "qv"}));
    add_common(gen_cmd, gen_opts);
    gen_cmd->add_option("--size", bits, "qft/qv qubits or cuccaro bits");
    gen_cmd->add_option("--controls", controls, "mcmt controls");
    gen_cmd->add_option("--targets", targets, "mcmt targets");
    gen_cmd->add_option("--layers", layers, "qv layers");

    auto* plot_cmd = app.add_subcommand("plotdata", "Turn a results CSV into per-figure data files");
    std::string csv_in, plot_out = ".";
    plot_cmd->add_option("csv", csv_in, "Results CSV")->required();
    plot_cmd->add_option("--out", plot_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return run_kind(run_opts, "run");
        if (*cmp_cmd) return run_kind(cmp_opts, "compare");
        if (*sweep_cmd) return run_kind(sweep_opts, "sweep");
        if (*gen_cmd) return gen(gen_name, gen_opts, bits, controls, targets, layers);
        if (*plot_cmd) {
            for (const auto& p : qnoc::emit_plot_data(csv_in, plot_out)) std::cerr << "wrote " << p.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
