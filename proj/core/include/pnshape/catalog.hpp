#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnshape/constellation.hpp"
#include "pnshape/optimizer.hpp"

namespace pnshape {

struct GridCell {
    std::size_t order = 0;
    double snr_db = 0.0;
    double lw_mhz = 0.0;
};

/// Phase variance the RPN stage designs for: the nominal 2 pi lw / Rs, or
/// the post-CPE residual measured on the random-walk validation channel at
/// the cell's SNR and linewidth.
enum class RpnDesign { Nominal, Residual };

std::string to_string(RpnDesign d);
RpnDesign parse_rpn_design(const std::string& s);

struct GridConfig {
    std::vector<std::size_t> orders;
    std::vector<double> snrs_db;
    std::vector<double> linewidths_mhz;
    double symbol_rate_baud = 60e9;
    OptimizerConfig awgn;  ///< target must be AwgnGmi
    OptimizerConfig rpn;   ///< target must be RpnGmi
    RpnDesign rpn_design = RpnDesign::Residual;
    std::size_t pilot_spacing = 32;
    std::size_t cpe_taps = 0; ///< 0 = Wiener length
    std::size_t calibration_symbols = std::size_t{1} << 20;
    unsigned workers = 0;  ///< cells in parallel

    void validate() const;
};

struct CatalogEntry {
    GridCell cell;
    std::optional<ShapeResult> awgn;
    std::optional<ShapeResult> rpn;
    double design_variance = 0.0; ///< phase variance used by the RPN stage
    std::string error; ///< non-empty if the cell failed
    bool invariant_violation = false;
};

struct Catalog {
    std::vector<CatalogEntry> entries;
};

/// File stem such as "gs16-rpn_lw2_snr14.5".
std::string catalog_stem(const GridCell& cell, bool rpn);

/// Phase variance the RPN stage of `cell` designs for.
double design_phase_variance(const GridConfig& cfg, const GridCell& cell);

/// For every (M, SNR, LW): shape_awgn from Gray QAM, then shape_rpn seeded
/// from the AWGN result. Every cell uses the configured stage seeds.
/// Failures are captured per cell. `on_cell` runs after each cell
/// completes (from the worker that finished it).
Catalog grid_run(const GridConfig& cfg, const std::function<void(const CatalogEntry&)>& on_cell = {});

/// One constellation document and one trace CSV per shaped result; files
/// are written to a temporary name and renamed.
void save_entry(const CatalogEntry& e, const std::string& dir);

/// Write text to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& text);

} // namespace pnshape
