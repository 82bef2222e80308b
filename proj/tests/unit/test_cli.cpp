#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include <pnshape/errors.hpp>

#include "commands.hpp"
#include "config.hpp"

using namespace pnshape;
using namespace pnshape::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pnshape_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

/// Writes `text` as the config file and runs the subcommand into `dir/out`.
int run(const std::string& sub, const fs::path& dir, const std::string& text, Overrides o = {}) {
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << text;
    o.config_path = cfg.string();
    if (!o.out_dir)
        o.out_dir = (dir / "out").string();
    std::ostringstream log, err;
    const int rc = run_subcommand(sub, o, log, err);
    if (rc != 0)
        MESSAGE(err.str());
    return rc;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ','))
            f.push_back(cell);
        rows.push_back(f);
    }
    return rows;
}

/// metric name -> value from a metric CSV (single cell).
std::map<std::string, double> metrics(const fs::path& p) {
    std::map<std::string, double> m;
    const auto rows = read_csv(p);
    for (std::size_t i = 1; i < rows.size(); ++i)
        m[rows[i][5]] = std::stod(rows[i][6]);
    return m;
}

} // namespace

TEST_CASE("config parsing") {
    auto c = RunConfig::parse("# comment\nseed = 5\nsnr_db = 10:0.5:11\nconstellations = qam16, psk8 # trailing\n"
                              "flag = true\n");
    CHECK(c.get_u64("seed", 1) == 5);
    CHECK(c.get_doubles("snr_db", {}) == std::vector<double>{10.0, 10.5, 11.0});
    CHECK(c.get_strings("constellations", {}) == std::vector<std::string>{"qam16", "psk8"});
    CHECK(c.get_bool("flag", false));
    CHECK(c.get_double("missing", 2.5) == 2.5);
    CHECK(c.resolved().at("missing") == "2.5");
    CHECK_NOTHROW(c.require_all_used());

    CHECK_THROWS_AS(RunConfig::parse("a = 1\na = 2\n"), ParseError);
    CHECK_THROWS_AS(RunConfig::parse("just words\n"), ParseError);
    auto u = RunConfig::parse("typo_key = 1\n");
    CHECK_THROWS_AS(u.require_all_used(), ParseError);
    auto bad = RunConfig::parse("x = abc\nn = -3\n");
    CHECK_THROWS_AS(bad.get_double("x", 0), ParseError);
    CHECK_THROWS_AS(bad.get_size("n", 0), ParseError);
    CHECK(split_list(" a ,b,, c") == std::vector<std::string>{"a", "b", "c"});
    CHECK(parse_doubles("1:1:3", "k") == std::vector<double>{1, 2, 3});
}

TEST_CASE("flags override config keys") {
    const auto dir = scratch("override");
    std::ofstream(dir / "c.cfg") << "seed = 5\nout_dir = from_file\n";
    Overrides o;
    o.config_path = (dir / "c.cfg").string();
    auto a = build_config(o);
    CHECK(a.get_u64("seed", 1) == 5);
    o.seed = 9;
    o.out_dir = "from_flag";
    o.net = true;
    auto b = build_config(o);
    CHECK(b.get_u64("seed", 1) == 9);
    CHECK(b.get_string("out_dir", "") == "from_flag");
    CHECK(b.get_bool("net", false));
    fs::remove_all(dir);
}

TEST_CASE("evaluate: outputs, net discount, gauss-hermite row, determinism, manifest") {
    const auto dir = scratch("evaluate");
    const std::string cfg = "constellations = qam16\nsnr_db = 10\nlw_mhz = 0\nn_symbols = 262144\nseed = 4\n";
    Overrides o;
    o.net = true;
    o.workers = 1;
    REQUIRE(run("evaluate", dir, cfg, o) == kExitOk);
    const auto m = metrics(dir / "out" / "evaluate.csv");
    CHECK(m.at("gmi_net") / m.at("gmi") == doctest::Approx(32.0 / 33.0).epsilon(1e-8));
    CHECK(m.at("mi_net") / m.at("mi") == doctest::Approx(32.0 / 33.0).epsilon(1e-8));
    CHECK(std::abs(m.at("gmi_gh") - m.at("gmi")) < 0.01);
    CHECK(m.at("gmi") <= m.at("mi") + 1e-9);
    const auto first = slurp(dir / "out" / "evaluate.csv");
    CHECK(first.rfind("constellation_id,M,snr_db,linewidth_hz,model,metric,value,n_symbols,seed\n", 0) == 0);
    CHECK(slurp(dir / "out" / "crossings.csv").rfind("constellation_id,M,linewidth_hz,model,metric,", 0) == 0);

    const auto j = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(j["subcommand"] == "evaluate");
    CHECK(j["version"] == tool_version());
    CHECK(j["config"]["seed"] == "4");
    CHECK(j["config"]["n_symbols"] == "262144");
    CHECK(j["config"].contains("threshold_ratio"));
    CHECK(!j["config"].contains("workers"));
    CHECK(j["runtime"]["workers"] == 1);

    o.workers = 3;
    REQUIRE(run("evaluate", dir, cfg, o) == kExitOk);
    CHECK(slurp(dir / "out" / "evaluate.csv") == first);
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const auto dir = scratch("exit");
    CHECK(run("evaluate", dir, "n_symbols = 100\n") == kExitInsufficient);
    CHECK(run("evaluate", dir, "no_such_key = 1\n") == kExitConfig);
    CHECK(run("evaluate", dir, "constellations = /does/not/exist.json\n") == kExitConfig);
    CHECK(run("evaluate", dir, "channel = random_walk\n") == kExitConfig);
    CHECK(run("fec", dir, "channel = gaussian_rpn\n") == kExitConfig);
    CHECK(run("optimize", dir, "rpn_mc_symbols = 16384\n") == kExitInsufficient);
    CHECK(run("bogus", dir, "") == kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("validate: zero linewidth matches evaluate, residual column present") {
    const auto dir = scratch("validate");
    const std::string common = "constellations = qam16\nsnr_db = 12\nn_symbols = 262144\nseed = 3\n";
    REQUIRE(run("evaluate", dir, common + "lw_mhz = 0\n") == kExitOk);
    const auto ev = metrics(dir / "out" / "evaluate.csv");
    REQUIRE(run("validate", dir, common + "lw_mhz = 0\n") == kExitOk);
    const auto va = metrics(dir / "out" / "validate.csv");
    CHECK(std::abs(va.at("gmi") - ev.at("gmi")) < 0.02);
    CHECK(va.count("residual_var") == 1);
    CHECK(va.count("cpe_taps") == 1);

    REQUIRE(run("validate", dir, common + "lw_mhz = 1\n") == kExitOk);
    const auto v1 = metrics(dir / "out" / "validate.csv");
    CHECK(v1.at("residual_var") > 0.0);
    CHECK(v1.at("gmi") <= v1.at("gmi_ideal_rpn") + 0.02);
    fs::remove_all(dir);
}

TEST_CASE("fec: noiseless waterfall and threshold schema") {
    const auto dir = scratch("fec");
    REQUIRE(run("fec", dir,
                "constellations = qam16\nsnr_db = 40\nlw_mhz = 0\nn_codewords = 500\npool_symbols = 16384\n") ==
            kExitOk);
    const auto w = read_csv(dir / "out" / "waterfall.csv");
    REQUIRE(w.size() == 2);
    CHECK(w[0] == std::vector<std::string>{"snr_db", "linewidth_hz", "constellation_id", "n_info_bits", "pre_fec_ber",
                                           "post_fec_ber", "n_codewords", "reuse_factor", "seed", "post_fec_ci_lo",
                                           "post_fec_ci_hi"});
    CHECK(std::stod(w[1][5]) == 0.0);
    CHECK(w[1][3] == "60000");
    CHECK(slurp(dir / "out" / "fec_thresholds.csv")
              .rfind("constellation_id,M,linewidth_hz,target_ber,snr_db,n_info_bits,seed\n", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("optimize: single cell writes both stages and improves on qam") {
    const auto dir = scratch("optimize");
    REQUIRE(run("optimize", dir,
                "orders = 8\nsnr_db = 11.5\nlw_mhz = 1\nawgn_max_iters = 40\nawgn_label_rounds = 4\n"
                "rpn_max_iters = 4\nrpn_label_rounds = 2\nrpn_mc_symbols = 65536\ncalibration_symbols = 131072\n") ==
            kExitOk);
    const auto cat = dir / "out" / "catalog";
    for (const char* f : {"gs8-awgn_lw1_snr11.5.json", "gs8-awgn_lw1_snr11.5_trace.csv", "gs8-rpn_lw1_snr11.5.json",
                          "gs8-rpn_lw1_snr11.5_trace.csv"})
        CHECK(fs::exists(cat / f));
    const auto rows = read_csv(dir / "out" / "catalog.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0][6] == "gmi_qam_gh");
    CHECK(rows[0][7] == "gmi_awgn_gh");
    CHECK(std::stod(rows[1][7]) > std::stod(rows[1][6]));

    const auto trace = read_csv(cat / "gs8-awgn_lw1_snr11.5_trace.csv");
    REQUIRE(trace.size() > 2);
    CHECK(std::stod(trace.back()[4]) > std::stod(trace[1][3]));
    fs::remove_all(dir);
}
