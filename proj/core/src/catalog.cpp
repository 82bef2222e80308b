#include "pnshape/catalog.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pnshape/cpe.hpp"
#include "pnshape/errors.hpp"
#include "pnshape/metrics.hpp"
#include "pnshape/parallel.hpp"
#include "pnshape/rng.hpp"

namespace pnshape {

namespace {

std::string fmt_num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::string to_string(RpnDesign d) { return d == RpnDesign::Nominal ? "nominal" : "residual"; }

RpnDesign parse_rpn_design(const std::string& s) {
    if (s == "nominal")
        return RpnDesign::Nominal;
    if (s == "residual")
        return RpnDesign::Residual;
    throw InvalidArgument("unknown rpn_design '" + s + "' (expected nominal or residual)");
}

double design_phase_variance(const GridConfig& cfg, const GridCell& cell) {
    const double lw_hz = cell.lw_mhz * 1e6;
    if (cfg.rpn_design == RpnDesign::Nominal || lw_hz == 0.0)
        return rpn_variance(lw_hz, cfg.symbol_rate_baud);
    ChannelSpec rw;
    rw.snr_db = cell.snr_db;
    rw.linewidth_hz = lw_hz;
    rw.symbol_rate_baud = cfg.symbol_rate_baud;
    rw.mode = ChannelMode::RandomWalk;
    const auto cpe = cpe_config_for(rw, cfg.cpe_taps, cfg.pilot_spacing);
    return measure_residual_variance(rw, cpe, cfg.pilot_spacing, cfg.calibration_symbols,
                                     derive_seed(cfg.rpn.seed, 0xca1b), 1);
}

void GridConfig::validate() const {
    if (orders.empty() || snrs_db.empty() || linewidths_mhz.empty())
        throw InvalidArgument("GridConfig: orders, snrs and linewidths must be nonempty");
    if (awgn.target != OptimizerTarget::AwgnGmi || rpn.target != OptimizerTarget::RpnGmi)
        throw InvalidArgument("GridConfig: stage targets must be awgn_gmi then rpn_gmi");
    awgn.validate();
    rpn.validate();
    for (double lw : linewidths_mhz)
        if (!(lw >= 0.0))
            throw InvalidArgument("GridConfig: linewidths must be nonnegative");
}

std::string catalog_stem(const GridCell& cell, bool rpn) {
    return "gs" + std::to_string(cell.order) + (rpn ? "-rpn" : "-awgn") + "_lw" + fmt_num(cell.lw_mhz) + "_snr" +
           fmt_num(cell.snr_db);
}

Catalog grid_run(const GridConfig& cfg, const std::function<void(const CatalogEntry&)>& on_cell) {
    cfg.validate();
    std::vector<GridCell> cells;
    for (auto m : cfg.orders)
        for (double s : cfg.snrs_db)
            for (double lw : cfg.linewidths_mhz)
                cells.push_back({m, s, lw});

    // The AWGN stage depends only on (M, SNR); shape it once per pair.
    std::map<std::pair<std::size_t, double>, std::size_t> awgn_index;
    std::vector<std::pair<std::size_t, double>> awgn_keys;
    for (const auto& c : cells) {
        const auto key = std::make_pair(c.order, c.snr_db);
        if (awgn_index.emplace(key, awgn_keys.size()).second)
            awgn_keys.push_back(key);
    }
    std::vector<std::optional<ShapeResult>> awgn(awgn_keys.size());
    std::vector<std::string> awgn_err(awgn_keys.size());
    std::vector<char> awgn_inv(awgn_keys.size(), 0);
    parallel_for(awgn_keys.size(), cfg.workers, [&](std::size_t i) {
        try {
            awgn[i] = shape_awgn(make_qam_gray(awgn_keys[i].first), awgn_keys[i].second, cfg.awgn);
        } catch (const std::exception& e) {
            awgn_err[i] = e.what();
            awgn_inv[i] = dynamic_cast<const InvariantViolation*>(&e) != nullptr;
        }
    });

    Catalog cat;
    cat.entries.resize(cells.size());
    parallel_for(cells.size(), cfg.workers, [&](std::size_t i) {
        CatalogEntry& e = cat.entries[i];
        e.cell = cells[i];
        const std::size_t a = awgn_index.at({cells[i].order, cells[i].snr_db});
        if (!awgn[a]) {
            e.error = "awgn stage: " + awgn_err[a];
            e.invariant_violation = awgn_inv[a] != 0;
        } else {
            e.awgn = awgn[a];
            try {
                e.design_variance = design_phase_variance(cfg, cells[i]);
                ChannelSpec spec;
                spec.snr_db = cells[i].snr_db;
                spec.symbol_rate_baud = cfg.symbol_rate_baud;
                spec.linewidth_hz = equivalent_linewidth(e.design_variance, cfg.symbol_rate_baud);
                spec.mode = ChannelMode::GaussianRpn;
                e.rpn = shape_rpn(e.awgn->constellation, spec, matched_model(spec, cfg.rpn.model), cfg.rpn);
            } catch (const InvariantViolation& ex) {
                e.error = std::string("rpn stage: ") + ex.what();
                e.invariant_violation = true;
            } catch (const std::exception& ex) {
                e.error = std::string("rpn stage: ") + ex.what();
            }
        }
        if (on_cell)
            on_cell(e);
    });
    return cat;
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("cannot write " + tmp);
        os << text;
        if (!os)
            throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

void save_entry(const CatalogEntry& e, const std::string& dir) {
    std::filesystem::create_directories(dir);
    auto save = [&](const ShapeResult& r, bool rpn) {
        const std::string stem = (std::filesystem::path(dir) / catalog_stem(e.cell, rpn)).string();
        write_file_atomic(stem + ".json", serialize(r.constellation));
        std::ostringstream os;
        write_trace_csv(os, r.trace);
        write_file_atomic(stem + "_trace.csv", os.str());
    };
    if (e.awgn)
        save(*e.awgn, false);
    if (e.rpn)
        save(*e.rpn, true);
}

} // namespace pnshape
