#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include <pnshape/catalog.hpp>
#include <pnshape/channel.hpp>
#include <pnshape/constellation.hpp>
#include <pnshape/cpe.hpp>
#include <pnshape/csv.hpp>
#include <pnshape/errors.hpp>
#include <pnshape/fec.hpp>
#include <pnshape/metrics.hpp>
#include <pnshape/optimizer.hpp>
#include <pnshape/parallel.hpp>

#ifndef PNSHAPE_VERSION
#define PNSHAPE_VERSION "unknown"
#endif

namespace fs = std::filesystem;

namespace pnshape::cli {

const char* tool_version() { return PNSHAPE_VERSION; }

namespace {

constexpr std::size_t kDefaultSymbols = std::size_t{1} << 20;

struct Named {
    std::string id;
    Constellation c;
};

Named resolve_constellation(const std::string& ref) {
    auto builtin = [&](const char* prefix) -> std::optional<std::size_t> {
        const std::string p(prefix);
        if (ref.rfind(p, 0) != 0 || ref.size() == p.size())
            return std::nullopt;
        const std::string digits = ref.substr(p.size());
        if (digits.find_first_not_of("0123456789") != std::string::npos)
            return std::nullopt;
        return std::stoul(digits);
    };
    if (const auto m = builtin("qam"))
        return {ref, make_qam_gray(*m)};
    if (const auto m = builtin("psk"))
        return {ref, make_psk(*m)};
    if (!fs::exists(ref))
        throw ParseError("constellations", "no such constellation file or builtin: '" + ref + "'");
    return {fs::path(ref).stem().string(), load_constellation(ref)};
}

std::vector<Named> read_constellations(RunConfig& cfg) {
    std::vector<Named> out;
    for (const auto& ref : cfg.get_strings("constellations", {"qam16"}))
        out.push_back(resolve_constellation(ref));
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    std::string out_dir;
    double rate_baud = 60e9;
};

Common read_common(RunConfig& cfg) {
    Common c;
    c.seed = cfg.get_u64("seed", 1);
    c.out_dir = cfg.get_string("out_dir", "out");
    c.rate_baud = cfg.get_double("rate_gbd", 60.0) * 1e9;
    if (!(c.rate_baud > 0.0))
        throw ParseError("rate_gbd", "must be positive");
    return c;
}

unsigned read_workers(RunConfig& cfg) { return static_cast<unsigned>(cfg.get_u64("workers", 0)); }

void require_mc(std::size_t n, const std::string& key, std::size_t min = kMinMonteCarloSymbols) {
    if (n < min)
        throw InsufficientSamples(key + " = " + std::to_string(n) + " is below the minimum of " +
                                  std::to_string(min));
}

/// Manifest: the resolved config (every key, defaults included) plus the
/// tool version. Worker count is recorded separately since outputs do not
/// depend on it.
void write_manifest(const RunConfig& cfg, const std::string& subcommand, const std::string& out_dir,
                    unsigned workers) {
    cfg.require_all_used();
    fs::create_directories(out_dir);
    nlohmann::ordered_json j;
    j["tool"] = "pnshape";
    j["version"] = tool_version();
    j["subcommand"] = subcommand;
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.resolved())
        if (k != "workers")
            conf[k] = v;
    j["config"] = conf;
    j["runtime"] = {{"workers", workers}};
    write_file_atomic((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

/// Splits a worker budget between an outer cell loop and the inner kernels.
struct Split {
    unsigned outer = 1;
    unsigned inner = 1;
};

Split split_workers(unsigned workers, std::size_t n_cells) {
    const unsigned w = resolve_workers(workers);
    if (n_cells >= w)
        return {w, 1};
    return {1, w};
}

struct Cell {
    std::size_t ci = 0; ///< constellation index
    double lw_mhz = 0.0;
    double snr_db = 0.0;
};

std::vector<Cell> make_cells(std::size_t n_const, const std::vector<double>& lws, const std::vector<double>& snrs) {
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < n_const; ++c)
        for (double lw : lws)
            for (double s : snrs)
                cells.push_back({c, lw, s});
    return cells;
}

std::string crossings_header() { return "constellation_id,M,linewidth_hz,model,metric,threshold,snr_db,n_symbols,seed\n"; }

/// One crossing row per (constellation, linewidth) series of `metric`.
std::string crossing_rows(const std::vector<Named>& consts, const std::vector<double>& lws,
                          const std::vector<double>& snrs, const std::vector<std::vector<double>>& series,
                          const std::string& model, const std::string& metric, double ratio, std::size_t n,
                          std::uint64_t seed) {
    std::ostringstream os;
    os.precision(10);
    std::size_t s = 0;
    for (const auto& nc : consts) {
        const double thr = ratio * nc.c.bits_per_symbol();
        for (double lw : lws) {
            const double x = interpolate_crossing(snrs, series[s++], thr);
            os << csv_field(nc.id) << ',' << nc.c.order() << ',' << lw * 1e6 << ',' << model << ',' << metric << ','
               << thr << ',' << (std::isnan(x) ? std::string("nan") : fmt(x)) << ',' << n << ',' << seed << '\n';
        }
    }
    return os.str();
}

std::string join_rows(const std::vector<std::string>& per_cell) {
    std::string out;
    for (const auto& r : per_cell)
        out += r;
    return out;
}

} // namespace

RunConfig build_config(const Overrides& o) {
    RunConfig cfg = o.config_path ? RunConfig::load(*o.config_path) : RunConfig{};
    if (o.seed)
        cfg.set("seed", std::to_string(*o.seed));
    if (o.out_dir)
        cfg.set("out_dir", *o.out_dir);
    if (o.workers)
        cfg.set("workers", std::to_string(*o.workers));
    if (o.net)
        cfg.set("net", "true");
    return cfg;
}

int cmd_optimize(RunConfig& cfg, std::ostream& log) {
    const Common com = read_common(cfg);
    GridConfig g;
    g.orders = cfg.get_sizes("orders", {8});
    g.snrs_db = cfg.get_doubles("snr_db", {11.5});
    g.linewidths_mhz = cfg.get_doubles("lw_mhz", {1.0});
    g.symbol_rate_baud = com.rate_baud;
    g.rpn_design = parse_rpn_design(cfg.get_string("rpn_design", "residual"));
    g.pilot_spacing = cfg.get_size("pilot_spacing", kDefaultPilotSpacing);
    g.cpe_taps = cfg.get_size("cpe_taps", 0);
    g.calibration_symbols = cfg.get_size("calibration_symbols", kDefaultSymbols);

    const double step_decay = cfg.get_double("step_decay", 0.5);
    const double min_step = cfg.get_double("min_step", 1e-4);
    const auto model = parse_demapper_kind(cfg.get_string("model", "gaussian"));

    g.awgn.target = OptimizerTarget::AwgnGmi;
    g.awgn.initial_step = cfg.get_double("awgn_initial_step", 0.05);
    g.awgn.max_iters = cfg.get_size("awgn_max_iters", 500);
    g.awgn.gh_nodes = cfg.get_size("awgn_gh_nodes", kDefaultGaussHermiteOrder);
    g.awgn.label_switch_rounds = cfg.get_size("awgn_label_rounds", 64);
    g.awgn.stages = cfg.get_size("awgn_stages", 1);

    g.rpn.target = OptimizerTarget::RpnGmi;
    g.rpn.initial_step = cfg.get_double("rpn_initial_step", 0.05);
    g.rpn.max_iters = cfg.get_size("rpn_max_iters", 500);
    g.rpn.mc_symbols_per_iter = cfg.get_size("rpn_mc_symbols", std::size_t{1} << 19);
    g.rpn.label_switch_rounds = cfg.get_size("rpn_label_rounds", 64);
    g.rpn.stages = cfg.get_size("rpn_stages", 1);
    g.rpn.candidate_screen = cfg.get_size("rpn_candidate_screen", 0);
    g.rpn.probe_ratio = cfg.get_double("rpn_probe_ratio", 0.1);
    g.rpn.model = model;

    for (auto* oc : {&g.awgn, &g.rpn}) {
        oc->step_decay = step_decay;
        oc->min_step = min_step;
        oc->seed = com.seed;
        oc->workers = 1;
    }
    const unsigned workers = read_workers(cfg);
    g.workers = workers;

    require_mc(g.rpn.mc_symbols_per_iter, "rpn_mc_symbols", std::size_t{1} << 16);
    if (g.rpn_design == RpnDesign::Residual)
        require_mc(g.calibration_symbols, "calibration_symbols");
    g.validate();
    write_manifest(cfg, "optimize", com.out_dir, workers);

    const std::string cat_dir = (fs::path(com.out_dir) / "catalog").string();
    std::mutex log_mutex;
    const Catalog cat = grid_run(g, [&](const CatalogEntry& e) {
        save_entry(e, cat_dir);
        std::lock_guard lock(log_mutex);
        log << "cell M=" << e.cell.order << " snr_db=" << e.cell.snr_db << " lw_mhz=" << e.cell.lw_mhz
            << (e.error.empty() ? " ok" : " error: " + e.error) << '\n';
    });

    std::ostringstream os;
    os.precision(10);
    os << "M,snr_db,lw_mhz,awgn_id,rpn_id,design_phase_variance,gmi_qam_gh,gmi_awgn_gh,gmi_rpn_mc,"
          "mc_symbols_per_iter,seed,error\n";
    bool invariant = false;
    bool failed = false;
    for (const auto& e : cat.entries) {
        invariant = invariant || e.invariant_violation;
        failed = failed || !e.error.empty();
        auto first = [](const std::optional<ShapeResult>& r) {
            return r && !r->trace.records.empty() ? fmt(r->trace.records.front().gmi_before) : std::string("nan");
        };
        auto last = [](const std::optional<ShapeResult>& r) {
            return r && !r->trace.records.empty() ? fmt(r->trace.records.back().best_gmi) : std::string("nan");
        };
        os << e.cell.order << ',' << e.cell.snr_db << ',' << e.cell.lw_mhz << ','
           << (e.awgn ? catalog_stem(e.cell, false) : "") << ',' << (e.rpn ? catalog_stem(e.cell, true) : "") << ','
           << e.design_variance << ',' << first(e.awgn) << ',' << last(e.awgn) << ',' << last(e.rpn) << ','
           << g.rpn.mc_symbols_per_iter << ',' << com.seed << ',' << csv_field(e.error) << '\n';
    }
    write_file_atomic((fs::path(com.out_dir) / "catalog.csv").string(), os.str());
    if (invariant)
        return kExitInvariant;
    return failed ? kExitConfig : kExitOk;
}

int cmd_evaluate(RunConfig& cfg, std::ostream& log) {
    const Common com = read_common(cfg);
    const auto consts = read_constellations(cfg);
    const auto snrs = cfg.get_doubles("snr_db", {10.0});
    const auto lws = cfg.get_doubles("lw_mhz", {0.0});
    const auto mode = parse_channel_mode(cfg.get_string("channel", "gaussian_rpn"));
    const auto kind = parse_demapper_kind(cfg.get_string("model", "gaussian"));
    const std::size_t n = cfg.get_size("n_symbols", kDefaultSymbols);
    const std::size_t gh_nodes = cfg.get_size("gh_nodes", kDefaultGaussHermiteOrder);
    const bool gh = cfg.get_bool("gh", true);
    const bool net = cfg.get_bool("net", false);
    const std::size_t spacing = cfg.get_size("pilot_spacing", kDefaultPilotSpacing);
    const double ratio = cfg.get_double("threshold_ratio", 0.96);
    const unsigned workers = read_workers(cfg);
    if (mode == ChannelMode::RandomWalk)
        throw ParseError("channel", "evaluate uses awgn or gaussian_rpn; run validate for random_walk");
    if (spacing == 0)
        throw ParseError("pilot_spacing", "must be positive");
    require_mc(n, "n_symbols");
    write_manifest(cfg, "evaluate", com.out_dir, workers);

    const auto cells = make_cells(consts.size(), lws, snrs);
    const Split split = split_workers(workers, cells.size());
    std::vector<std::string> rows(cells.size());
    std::vector<double> gmi(cells.size());
    parallel_for(cells.size(), split.outer, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const Named& nc = consts[cell.ci];
        ChannelSpec spec;
        spec.snr_db = cell.snr_db;
        spec.linewidth_hz = cell.lw_mhz * 1e6;
        spec.symbol_rate_baud = com.rate_baud;
        spec.mode = cell.lw_mhz == 0.0 ? ChannelMode::AwgnOnly : mode;
        const auto model = matched_model(spec, kind);
        const auto r = gmi_montecarlo(nc.c, spec, model, n, com.seed, split.inner);
        gmi[i] = r.gmi_bits;

        std::ostringstream os;
        auto row = [&](const std::string& metric, double v, std::size_t count) {
            write_metric_row(os, {nc.id, nc.c.order(), cell.snr_db, spec.linewidth_hz, to_string(kind), metric, v,
                                  count, com.seed});
        };
        row("mi", r.mi_bits, n);
        row("gmi", r.gmi_bits, n);
        row("ser", r.ser, n);
        row("pre_fec_ber", r.pre_fec_ber, n);
        if (net) {
            row("mi_net", apply_pilot_discount(r.mi_bits, spacing), n);
            row("gmi_net", apply_pilot_discount(r.gmi_bits, spacing), n);
        }
        if (gh && spec.phase_variance() == 0.0 && kind == DemapperKind::MismatchedGaussian &&
            std::isfinite(cell.snr_db))
            row("gmi_gh", gmi_gauss_hermite(nc.c, cell.snr_db, gh_nodes), gh_nodes * gh_nodes);
        rows[i] = os.str();
    });

    std::ostringstream head;
    write_metric_header(head);
    write_file_atomic((fs::path(com.out_dir) / "evaluate.csv").string(), head.str() + join_rows(rows));

    std::vector<std::vector<double>> series;
    for (std::size_t i = 0; i < cells.size(); i += snrs.size())
        series.emplace_back(gmi.begin() + static_cast<std::ptrdiff_t>(i),
                            gmi.begin() + static_cast<std::ptrdiff_t>(i + snrs.size()));
    write_file_atomic((fs::path(com.out_dir) / "crossings.csv").string(),
                      crossings_header() +
                          crossing_rows(consts, lws, snrs, series, to_string(kind), "gmi", ratio, n, com.seed));
    log << "evaluate: " << cells.size() << " cells written to " << com.out_dir << '\n';
    return kExitOk;
}

int cmd_validate(RunConfig& cfg, std::ostream& log) {
    const Common com = read_common(cfg);
    const auto consts = read_constellations(cfg);
    const auto snrs = cfg.get_doubles("snr_db", {10.0});
    const auto lws = cfg.get_doubles("lw_mhz", {1.0});
    const auto kind = parse_demapper_kind(cfg.get_string("model", "gaussian"));
    const std::size_t n = cfg.get_size("n_symbols", kDefaultSymbols);
    const std::size_t spacing = cfg.get_size("pilot_spacing", kDefaultPilotSpacing);
    const std::size_t taps = cfg.get_size("cpe_taps", 0);
    const bool net = cfg.get_bool("net", false);
    const bool ideal = cfg.get_bool("ideal", true);
    const double ratio = cfg.get_double("threshold_ratio", 0.96);
    const unsigned workers = read_workers(cfg);
    if (spacing == 0)
        throw ParseError("pilot_spacing", "must be positive");
    require_mc(n, "n_symbols");
    write_manifest(cfg, "validate", com.out_dir, workers);

    const auto cells = make_cells(consts.size(), lws, snrs);
    const Split split = split_workers(workers, cells.size());
    std::vector<std::string> rows(cells.size());
    std::vector<double> gmi(cells.size());
    parallel_for(cells.size(), split.outer, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const Named& nc = consts[cell.ci];
        ChannelSpec spec;
        spec.snr_db = cell.snr_db;
        spec.linewidth_hz = cell.lw_mhz * 1e6;
        spec.symbol_rate_baud = com.rate_baud;
        spec.mode = ChannelMode::RandomWalk;
        const auto cpe = cpe_config_for(spec, taps, spacing);
        const auto model = matched_model(spec, kind);
        const auto res = validate_chain(nc.c, spec, model, n, cpe, spacing, com.seed, split.inner);
        gmi[i] = res.report.gmi_bits;

        std::ostringstream os;
        auto row = [&](const std::string& metric, double v) {
            write_metric_row(os, {nc.id, nc.c.order(), cell.snr_db, spec.linewidth_hz, to_string(kind), metric, v,
                                  n, com.seed});
        };
        row("mi", res.report.mi_bits);
        row("gmi", res.report.gmi_bits);
        row("ser", res.report.ser);
        row("pre_fec_ber", res.report.pre_fec_ber);
        if (net) {
            row("mi_net", apply_pilot_discount(res.report.mi_bits, spacing));
            row("gmi_net", apply_pilot_discount(res.report.gmi_bits, spacing));
        }
        row("residual_var", res.residual_variance);
        row("cpe_taps", static_cast<double>(cpe.filter_taps));
        if (ideal) {
            ChannelSpec iid = spec;
            iid.mode = ChannelMode::GaussianRpn;
            row("gmi_ideal_rpn", gmi_montecarlo(nc.c, iid, matched_model(iid, kind), n, com.seed, split.inner).gmi_bits);
        }
        rows[i] = os.str();
    });

    std::ostringstream head;
    write_metric_header(head);
    write_file_atomic((fs::path(com.out_dir) / "validate.csv").string(), head.str() + join_rows(rows));

    std::vector<std::vector<double>> series;
    for (std::size_t i = 0; i < cells.size(); i += snrs.size())
        series.emplace_back(gmi.begin() + static_cast<std::ptrdiff_t>(i),
                            gmi.begin() + static_cast<std::ptrdiff_t>(i + snrs.size()));
    write_file_atomic((fs::path(com.out_dir) / "crossings.csv").string(),
                      crossings_header() +
                          crossing_rows(consts, lws, snrs, series, to_string(kind), "gmi", ratio, n, com.seed));
    log << "validate: " << cells.size() << " cells written to " << com.out_dir << '\n';
    return kExitOk;
}

int cmd_fec(RunConfig& cfg, std::ostream& log) {
    const Common com = read_common(cfg);
    const auto consts = read_constellations(cfg);
    const auto snrs = cfg.get_doubles("snr_db", {10.0});
    const auto lws = cfg.get_doubles("lw_mhz", {0.0});
    const auto mode = parse_channel_mode(cfg.get_string("channel", "random_walk"));
    const auto kind = parse_demapper_kind(cfg.get_string("model", "gaussian"));
    const std::size_t taps = cfg.get_size("cpe_taps", 0);
    FecPipelineConfig f;
    f.n_codewords = cfg.get_size("n_codewords", f.n_codewords);
    f.pool_symbols = cfg.get_size("pool_symbols", f.pool_symbols);
    f.max_reuse = cfg.get_double("max_reuse", f.max_reuse);
    f.target_ber = cfg.get_double("target_ber", f.target_ber);
    f.pilot_spacing = cfg.get_size("pilot_spacing", f.pilot_spacing);
    const std::string chase = cfg.get_string("chase", "standard");
    if (chase != "standard" && chase != "full")
        throw ParseError("chase", "expected standard or full");
    f.patterns = chase == "full" ? ChasePatterns::Full : ChasePatterns::Standard;
    const std::string dec = cfg.get_string("decoder", "chase3");
    if (dec != "chase3" && dec != "hd")
        throw ParseError("decoder", "expected chase3 or hd");
    f.decoder = dec == "hd" ? DecoderKind::HardDecision : DecoderKind::Chase3;
    const unsigned workers = read_workers(cfg);
    if (mode == ChannelMode::GaussianRpn)
        throw ParseError("channel", "fec uses awgn or random_walk");
    f.validate();
    write_manifest(cfg, "fec", com.out_dir, workers);

    const auto cells = make_cells(consts.size(), lws, snrs);
    const Split split = split_workers(workers, cells.size());
    f.workers = split.inner;
    std::vector<WaterfallRow> rows(cells.size());
    parallel_for(cells.size(), split.outer, [&](std::size_t i) {
        const Cell& cell = cells[i];
        const Named& nc = consts[cell.ci];
        ChannelSpec spec;
        spec.snr_db = cell.snr_db;
        spec.linewidth_hz = cell.lw_mhz * 1e6;
        spec.symbol_rate_baud = com.rate_baud;
        spec.mode = mode;
        const auto cpe = cpe_config_for(spec, taps, f.pilot_spacing);
        const auto r = post_fec_ber(nc.c, spec, matched_model(spec, kind), cpe, f, com.seed);
        const auto ci = wilson_interval(r.info_bit_errors, r.n_info_bits);
        rows[i] = {cell.snr_db, spec.linewidth_hz, nc.id, r.n_info_bits, r.pre_fec_ber, r.post_fec_ber, ci.lo,
                   ci.hi, r.n_codewords, r.reuse_factor, com.seed};
    });

    std::ostringstream os;
    write_waterfall_header(os);
    for (const auto& r : rows)
        write_waterfall_row(os, r);
    write_file_atomic((fs::path(com.out_dir) / "waterfall.csv").string(), os.str());

    // Crossing of log10(post-FEC BER) with log10(target); a zero count is
    // placed at half an error for interpolation.
    std::ostringstream th;
    th.precision(10);
    th << "constellation_id,M,linewidth_hz,target_ber,snr_db,n_info_bits,seed\n";
    std::size_t k = 0;
    for (const auto& nc : consts) {
        for (double lw : lws) {
            std::vector<double> y;
            std::size_t bits = 0;
            for (std::size_t s = 0; s < snrs.size(); ++s, ++k) {
                const auto& r = rows[k];
                bits = r.n_info_bits;
                y.push_back(std::log10(std::max(r.post_fec_ber, 0.5 / static_cast<double>(r.n_info_bits))));
            }
            const double x = interpolate_crossing(snrs, y, std::log10(f.target_ber));
            th << csv_field(nc.id) << ',' << nc.c.order() << ',' << lw * 1e6 << ',' << f.target_ber << ','
               << (std::isnan(x) ? std::string("nan") : fmt(x)) << ',' << bits << ',' << com.seed << '\n';
        }
    }
    write_file_atomic((fs::path(com.out_dir) / "fec_thresholds.csv").string(), th.str());
    log << "fec: " << cells.size() << " cells written to " << com.out_dir << '\n';
    return kExitOk;
}

int run_subcommand(const std::string& name, const Overrides& o, std::ostream& log, std::ostream& err) {
    try {
        RunConfig cfg = build_config(o);
        if (name == "optimize")
            return cmd_optimize(cfg, log);
        if (name == "evaluate")
            return cmd_evaluate(cfg, log);
        if (name == "validate")
            return cmd_validate(cfg, log);
        if (name == "fec")
            return cmd_fec(cfg, log);
        err << "unknown subcommand '" << name << "'\n";
        return kExitConfig;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const InsufficientSamples& e) {
        err << "insufficient samples: " << e.what() << '\n';
        return kExitInsufficient;
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace pnshape::cli
