#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace pnshape {

/// One metric value; the long format shared by evaluate and validate output.
struct MetricRow {
    std::string constellation_id;
    std::size_t order = 0;
    double snr_db = 0.0;
    double linewidth_hz = 0.0;
    std::string model;
    std::string metric; ///< mi, gmi, gmi_net, ser, pre_fec_ber, gmi_gh, residual_var, ...
    double value = 0.0;
    std::size_t n_symbols = 0;
    std::uint64_t seed = 0;
};

void write_metric_header(std::ostream& os);
void write_metric_row(std::ostream& os, const MetricRow& r);

struct WaterfallRow {
    double snr_db = 0.0;
    double linewidth_hz = 0.0;
    std::string constellation_id;
    std::size_t n_info_bits = 0;
    double pre_fec_ber = 0.0;
    double post_fec_ber = 0.0;
    double post_fec_ci_lo = 0.0; ///< 95% Wilson interval on post_fec_ber
    double post_fec_ci_hi = 0.0;
    std::size_t n_codewords = 0;
    double reuse_factor = 0.0;
    std::uint64_t seed = 0;
};

void write_waterfall_header(std::ostream& os);
void write_waterfall_row(std::ostream& os, const WaterfallRow& r);

/// Quote a CSV field if it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

} // namespace pnshape
