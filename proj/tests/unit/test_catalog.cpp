#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <pnshape/catalog.hpp>
#include <pnshape/errors.hpp>
#include <pnshape/metrics.hpp>

using namespace pnshape;
namespace fs = std::filesystem;

namespace {

GridConfig small_grid() {
    GridConfig g;
    g.orders = {8};
    g.snrs_db = {12.0};
    g.linewidths_mhz = {2.0};
    g.awgn.max_iters = 60;
    g.awgn.workers = 1;
    g.rpn = g.awgn;
    g.rpn.target = OptimizerTarget::RpnGmi;
    g.rpn.mc_symbols_per_iter = 1 << 16;
    g.rpn.max_iters = 25;
    g.calibration_symbols = 1 << 17;
    g.workers = 1;
    return g;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("file stems") {
    CHECK(catalog_stem({16, 14.5, 2.0}, true) == "gs16-rpn_lw2_snr14.5");
    CHECK(catalog_stem({64, 20.0, 0.5}, false) == "gs64-awgn_lw0.5_snr20");
    CHECK(to_string(RpnDesign::Nominal) == "nominal");
    CHECK(parse_rpn_design("residual") == RpnDesign::Residual);
    CHECK_THROWS_AS(parse_rpn_design("x"), InvalidArgument);
}

TEST_CASE("grid validation") {
    auto g = small_grid();
    CHECK_NOTHROW(g.validate());
    g.orders.clear();
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
    g = small_grid();
    g.rpn.target = OptimizerTarget::AwgnGmi;
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
    g = small_grid();
    g.linewidths_mhz = {-1.0};
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
}

TEST_CASE("design variance") {
    auto g = small_grid();
    g.rpn_design = RpnDesign::Nominal;
    CHECK(design_phase_variance(g, {8, 12.0, 2.0}) == rpn_variance(2e6, 60e9));
    g.rpn_design = RpnDesign::Residual;
    CHECK(design_phase_variance(g, {8, 12.0, 0.0}) == 0.0);
    const double res = design_phase_variance(g, {8, 12.0, 2.0});
    CHECK(res > rpn_variance(2e6, 60e9));
    CHECK(res == design_phase_variance(g, {8, 12.0, 2.0}));
}

TEST_CASE("single cell: stages chain, invariants hold, files are written") {
    const auto g = small_grid();
    int calls = 0;
    const auto cat = grid_run(g, [&](const CatalogEntry&) { ++calls; });
    CHECK(calls == 1);
    REQUIRE(cat.entries.size() == 1);
    const auto& e = cat.entries[0];
    REQUIRE(e.error.empty());
    REQUIRE(e.awgn);
    REQUIRE(e.rpn);
    CHECK(!e.invariant_violation);
    CHECK(e.design_variance == design_phase_variance(g, e.cell));

    // The AWGN stage equals a direct call; the RPN stage starts from it.
    const auto direct = shape_awgn(make_qam_gray(8), 12.0, g.awgn);
    CHECK(e.awgn->constellation == direct.constellation);
    CHECK(e.rpn->trace.records.front().gmi_before <= e.rpn->trace.records.front().best_gmi);

    for (const auto* r : {&*e.awgn, &*e.rpn}) {
        CHECK(r->constellation.has_unit_energy());
        CHECK(r->constellation.order() == 8);
        for (const auto& t : r->trace.records)
            CHECK(t.best_gmi >= t.gmi_before);
    }

    // The RPN design beats the AWGN design on the channel it was shaped for
    // (fresh seed, large sample).
    ChannelSpec spec;
    spec.snr_db = 12.0;
    spec.linewidth_hz = equivalent_linewidth(e.design_variance, 60e9);
    spec.mode = ChannelMode::GaussianRpn;
    const auto m = matched_model(spec);
    const double ga = gmi_montecarlo(e.awgn->constellation, spec, m, 1 << 20, 77).gmi_bits;
    const double gr = gmi_montecarlo(e.rpn->constellation, spec, m, 1 << 20, 77).gmi_bits;
    CHECK(gr >= ga - 2e-3);

    const fs::path dir = fs::temp_directory_path() / "pnshape_catalog_test";
    fs::remove_all(dir);
    save_entry(e, dir.string());
    for (const char* name : {"gs8-awgn_lw2_snr12.json", "gs8-awgn_lw2_snr12_trace.csv", "gs8-rpn_lw2_snr12.json",
                             "gs8-rpn_lw2_snr12_trace.csv"})
        CHECK(fs::exists(dir / name));
    CHECK(load_constellation((dir / "gs8-rpn_lw2_snr12.json").string()) == e.rpn->constellation);
    CHECK(slurp(dir / "gs8-awgn_lw2_snr12_trace.csv").rfind("iter,stage,", 0) == 0);
    fs::remove_all(dir);

    // Rerun is bit-identical, including with cell parallelism.
    auto g2 = g;
    g2.workers = 3;
    const auto again = grid_run(g2);
    CHECK(again.entries[0].rpn->constellation == e.rpn->constellation);
}

TEST_CASE("failing cells are captured without aborting the grid") {
    auto g = small_grid();
    g.orders = {8, 5};
    g.linewidths_mhz = {0.0};
    g.awgn.max_iters = 5;
    g.rpn.max_iters = 3;
    const auto cat = grid_run(g);
    REQUIRE(cat.entries.size() == 2);
    CHECK(cat.entries[0].error.empty());
    CHECK(!cat.entries[1].error.empty());
    CHECK(!cat.entries[1].awgn);
}
