#include "qnoc/experiment.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <set>

using namespace qnoc;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = QNOC_SOURCE_DIR;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("qnoc_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ExperimentSpec spec_from(const std::string& text) { return make_spec(Config::parse(text, "test.cfg")); }

std::string error_of(const std::string& text) {
    try {
        spec_from(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

struct Exec {
    int status;
    std::string output;
};

Exec exec(const std::string& cmd) {
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    if (!pipe) return {-1, ""};
    while (fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
    return {pclose(pipe), out};
}

}  // namespace

TEST(ConfigTest, ParsesKeysCommentsAndWhitespace) {
    const Config c = Config::parse("# top\n\n  mesh.width = 6   # trailing\ntiming.p_bsm=0.25\r\nstrategy = twt\n");
    EXPECT_EQ(c.get_number<int>("mesh.width", 0), 6);
    EXPECT_EQ(c.get_number<double>("timing.p_bsm", 1), 0.25);
    EXPECT_EQ(c.get("strategy", ""), "twt");
    EXPECT_EQ(c.get("missing", "fallback"), "fallback");
    EXPECT_EQ(c.origin("strategy"), "<config>:5");
}

TEST(ConfigTest, ErrorsNameFileAndLine) {
    EXPECT_EQ(error_of("seed = 1\nthis line is wrong\n"), "test.cfg:2: expected 'key = value'");
    EXPECT_EQ(error_of("seed = 1\nseed = 2\n"), "test.cfg:2: duplicate key 'seed'");
    EXPECT_EQ(error_of("\n\nmesh.widht = 4\n"), "test.cfg:3: unknown key 'mesh.widht'");
    EXPECT_EQ(error_of("core.n = two\n"), "test.cfg:1: 'core.n' expects a number, got 'two'");
    EXPECT_EQ(error_of("kind = run\nstrategy = xy\n").rfind("test.cfg:2: ", 0), 0u);
    EXPECT_EQ(error_of("sweep.cr = fixed:3, near:2\n").rfind("test.cfg:1: ", 0), 0u);
    EXPECT_EQ(error_of("synth.depth = 5\nsweep.requests = 5, 7\n"),
              "test.cfg:2: request count 7 is not a multiple of synth.depth 5");
    EXPECT_EQ(error_of("sweep.seeds = 5..1\n"), "test.cfg:1: bad range '5..1' in 'sweep.seeds'");
    EXPECT_NE(error_of("timing.p_bsm = 0\n"), "");
    EXPECT_NE(error_of("workload = file\n"), "");
    EXPECT_NE(error_of("output.format = xml\n"), "");
    EXPECT_NE(error_of("engine.pipeline_hops = maybe\n"), "");
}

TEST(ConfigTest, ListsAndRanges) {
    EXPECT_EQ(detail::parse_int_list("1..4", "x", "k"), (std::vector<std::uint64_t>{1, 2, 3, 4}));
    EXPECT_EQ(detail::parse_int_list("5..20:5, 100", "x", "k"), (std::vector<std::uint64_t>{5, 10, 15, 20, 100}));
    EXPECT_EQ(detail::parse_int_list("7", "x", "k"), (std::vector<std::uint64_t>{7}));
    EXPECT_THROW(detail::parse_int_list("", "x", "k"), ConfigError);
    EXPECT_THROW(detail::parse_int_list("1..3:0", "x", "k"), ConfigError);
}

TEST(ExperimentSpecTest, DefaultsAndOverrides) {
    const auto s = spec_from("");
    EXPECT_EQ(s.kind, "compare");
    EXPECT_EQ(s.strategies.size(), 2u);
    EXPECT_EQ(s.sim.topology.core_count(), 16u);
    EXPECT_EQ(s.sim.m_per_core, 2u);
    EXPECT_FALSE(s.synth_depth);

    Config c = Config::parse("kind = run\nstrategy = hh\nmesh.width = 3\nmesh.height = 2\nsynth.depth = 4\n");
    c.set("strategy", "twt");
    const auto r = make_spec(c);
    EXPECT_EQ(r.strategies, std::vector<Strategy>{Strategy::two_way});
    EXPECT_EQ(r.sim.topology.core_count(), 6u);
    EXPECT_EQ(r.synth_depth, 4);
}

TEST(ExperimentTest, RadiusOneSweepHasEqualDelays) {
    auto spec = spec_from("kind = sweep\ncore.n = 32\nsweep.requests = 1..32\nsweep.cr = fixed:1\nsweep.seeds = 0..2\n");
    const auto res = run_experiment(spec, 4);
    ASSERT_FALSE(res.error);
    ASSERT_EQ(res.rows.size(), 32u * 3 * 2);
    for (std::size_t i = 0; i < res.rows.size(); i += 2) {
        const auto& hh = res.rows[i];
        const auto& twt = res.rows[i + 1];
        ASSERT_EQ(hh.strategy, Strategy::hop_by_hop);
        ASSERT_EQ(twt.strategy, Strategy::two_way);
        ASSERT_EQ(hh.num_requests, twt.num_requests);
        ASSERT_EQ(hh.comm_delay_critical, twt.comm_delay_critical);
        ASSERT_EQ(hh.comm_delay_sum, twt.comm_delay_sum);
    }
}

TEST(ExperimentTest, SeedOnlyAffectsSeededFields) {
    // QFT does not depend on the seed and p_bsm = 1 draws nothing.
    auto spec = spec_from("workload = qft\nqft.n = 12\ncore.n = 1\nsweep.seeds = 0..3\n");
    const auto res = run_experiment(spec, 2);
    ASSERT_EQ(res.rows.size(), 8u);
    for (std::size_t i = 2; i < res.rows.size(); ++i) {
        auto a = res.rows[i];
        const auto& b = res.rows[i % 2];
        EXPECT_NE(a.seed, b.seed);
        a.seed = b.seed;
        EXPECT_EQ(to_csv({a}), to_csv({b}));
    }
    EXPECT_EQ(res.rows[0].cr_mode, "na");
}

TEST(ExperimentTest, GoldenCsvIsReproducedByteForByte) {
    const auto out = scratch("golden");
    Config c = Config::load(kSource / "tests/golden/small.cfg");
    c.set("output.dir", out.string());
    const auto spec = make_spec(c);
    const auto res = run_experiment(spec, 3);
    ASSERT_FALSE(res.error);
    write_outputs(spec, res);
    const std::string expected = slurp(kSource / "tests/golden/small.csv");
    EXPECT_EQ(slurp(out / "small.csv"), expected);

    // Re-running overwrites with the same bytes, whatever the thread count.
    write_outputs(spec, run_experiment(spec, 1));
    EXPECT_EQ(slurp(out / "small.csv"), expected);
    EXPECT_FALSE(fs::exists(out / "small.json"));
}

TEST(ExperimentTest, CsvFormatting) {
    ResultRow r;
    r.workload = "w";
    r.cr_mode = "fixed:2";
    r.num_requests = 3;
    r.seed = 18446744073709551615ull;
    r.comm_delay_sum = 0.1 + 0.2;
    r.comm_delay_critical = 84;
    r.total_delay = 1e21;
    const auto csv = to_csv({r});
    EXPECT_EQ(csv.substr(csv.find('\n') + 1), "w,hh,fixed:2,3,18446744073709551615,0.30000000000000004,84,1e+21,0,0,0,0\n");
    const auto t = parse_csv(csv);
    EXPECT_EQ(t.header, csv_columns());
    EXPECT_EQ(detail::cell_double(t.rows[0][t.column("comm_delay_sum")]), 0.1 + 0.2);
}

TEST(ExperimentTest, FailingPointKeepsEarlierRows) {
    // One qubit per corner core: the second serial request at C_r = 6 has no
    // fresh source left.
    auto spec = spec_from("core.n = 1\nsweep.cr = fixed:6\nsweep.requests = 1, 2, 3\n");
    spec.output_dir = scratch("partial");
    const auto res = run_experiment(spec, 2);
    ASSERT_TRUE(res.error);
    EXPECT_NE(res.error->find("requests 2"), std::string::npos);
    EXPECT_EQ(res.rows.size(), 2u);
    write_outputs(spec, res);
    EXPECT_EQ(parse_csv(slurp(spec.output_dir / "experiment.csv")).rows.size(), 2u);
}

TEST(ExperimentTest, CircuitFileWorkload) {
    const auto dir = scratch("file");
    write_file(dir / "pair.txt", "qubits 16\ncx 0 15\n");
    auto spec = spec_from("workload = file\ncircuit = " + (dir / "pair.txt").string() + "\ncore.n = 1\n");
    const auto res = run_experiment(spec);
    ASSERT_EQ(res.rows.size(), 2u);
    EXPECT_EQ(res.rows[0].workload, "pair");
    EXPECT_EQ(res.rows[0].comm_delay_critical, 84);
    EXPECT_EQ(res.rows[1].comm_delay_critical, 42);

    write_file(dir / "bad.txt", "qubits 2\ncx 0 5\n");
    spec.circuit_path = dir / "bad.txt";
    const auto bad = run_experiment(spec);
    ASSERT_TRUE(bad.error);
    EXPECT_NE(bad.error->find("bad.txt: line 2:"), std::string::npos);
}

TEST(PlotDataTest, SchemaAndReductionCrossCheck) {
    const auto dir = scratch("plot");
    auto spec = spec_from("core.n = 32\nsynth.depth = 2\nsweep.requests = 2, 4, 6\nsweep.cr = fixed:1, fixed:4\n"
                          "sweep.seeds = 0..2\nname = mixed\n");
    spec.output_dir = dir;
    auto rows = run_experiment(spec).rows;
    for (const char* b : {"workload = qft\nqft.n = 16\ncore.n = 1\n", "workload = cuccaro\ncuccaro.bits = 7\ncore.n = 1\n"}) {
        const auto more = run_experiment(spec_from(b)).rows;
        rows.insert(rows.end(), more.begin(), more.end());
    }
    write_outputs(spec, {rows, std::nullopt});
    const auto paths = emit_plot_data(dir / "mixed.csv", dir);
    const auto json = nlohmann::json::parse(slurp(dir / "mixed.json"));

    // Delay vs requests: one series per strategy in every panel, x strictly increasing.
    const auto f6 = parse_csv(slurp(paths[0]));
    EXPECT_EQ(f6.header, (std::vector<std::string>{"panel", "x", "series", "y"}));
    std::map<std::pair<std::string, std::string>, std::vector<double>> xs;
    for (const auto& r : f6.rows) xs[{r[0], r[2]}].push_back(detail::cell_double(r[1]));
    EXPECT_EQ(xs.size(), 4u);  // 2 panels x 2 strategies
    for (const auto& [k, v] : xs) {
        ASSERT_EQ(v.size(), 3u);
        for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LT(v[i - 1], v[i]);
    }

    // Delay per benchmark, reduction recomputed from the raw rows.
    const auto f7 = parse_csv(slurp(paths[1]));
    EXPECT_EQ(f7.header, (std::vector<std::string>{"x", "series", "y", "reduction"}));
    std::set<std::string> benchmarks;
    for (const auto& r : f7.rows) {
        benchmarks.insert(r[0]);
        double hh = 0, twt = 0;
        int nh = 0, nt = 0;
        for (const auto& row : rows) {
            if (row.workload != r[0]) continue;
            (row.strategy == Strategy::hop_by_hop ? hh : twt) += row.comm_delay_critical;
            ++(row.strategy == Strategy::hop_by_hop ? nh : nt);
        }
        const double expected = (hh / nh - twt / nt) / (hh / nh);
        const double got = detail::cell_double(r[3]);
        const double from_json = json["workloads"][r[0]]["reduction"]["comm_delay_critical"];
        EXPECT_NEAR(got, expected, 1e-9 * std::max(1.0, std::abs(expected)));
        EXPECT_NEAR(from_json, expected, 1e-9 * std::max(1.0, std::abs(expected)));
    }
    EXPECT_EQ(benchmarks, (std::set<std::string>{"synthetic", "qft", "cuccaro"}));

    // Depth bars: original, hh and twt for each benchmark.
    const auto f8 = parse_csv(slurp(paths[2]));
    std::map<std::string, std::vector<std::string>> bars;
    for (const auto& r : f8.rows) bars[r[0]].push_back(r[1]);
    ASSERT_EQ(bars.size(), 3u);
    for (const auto& [b, series] : bars) EXPECT_EQ(series, (std::vector<std::string>{"original", "hh", "twt"}));
}

TEST(PlotDataTest, MissingColumnIsSchemaError) {
    const auto dir = scratch("schema");
    write_file(dir / "bad.csv", "workload,strategy,seed\nqft,hh,0\n");
    EXPECT_THROW(emit_plot_data(dir / "bad.csv", dir), SchemaError);
    write_file(dir / "ragged.csv", "a,b\n1\n");
    EXPECT_THROW(parse_csv(slurp(dir / "ragged.csv")), SchemaError);
}

TEST(CliTest, CompareSweepGenAndPlotdata) {
    const std::string cli = QNOC_CLI_PATH;
    const auto dir = scratch("cli");

    auto r = exec(cli + " compare --workload qft --set qft.n=8 --qubits 1 --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "experiment.csv"));
    EXPECT_NE(r.output.find("reduction"), std::string::npos);

    r = exec(cli + " sweep --config " + (kSource / "tests/golden/small.cfg").string() + " --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(slurp(dir / "small.csv"), slurp(kSource / "tests/golden/small.csv"));

    r = exec(cli + " plotdata " + (dir / "small.csv").string() + " --out " + dir.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(dir / "depth_by_benchmark.csv"));

    r = exec(cli + " gen synthetic --depth 3 --requests 6 --cr fixed:2 --qubits 4 --seed 9 --out " +
             (dir / "g.txt").string());
    ASSERT_EQ(r.status, 0) << r.output;
    const Circuit g = parse_circuit(slurp(dir / "g.txt"));
    EXPECT_EQ(depth(g), 3u);
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g, gen_synthetic({3, 2, CrMode::fixed(2), 9}, MeshTopology(4, 4), 4));

    r = exec(cli + " run --circuit " + (dir / "g.txt").string() + " --qubits 4 --strategy twt");
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("g twt na"), std::string::npos);

    write_file(dir / "broken.cfg", "seed = 1\nmesh.width 4\n");
    r = exec(cli + " run --config " + (dir / "broken.cfg").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("broken.cfg:2"), std::string::npos);

    r = exec(cli + " run --strategy diagonal");
    EXPECT_NE(r.status, 0);
}
