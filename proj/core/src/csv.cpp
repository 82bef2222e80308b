#include "pnshape/csv.hpp"

#include <ostream>

namespace pnshape {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + '"';
}

void write_metric_header(std::ostream& os) {
    os << "constellation_id,M,snr_db,linewidth_hz,model,metric,value,n_symbols,seed\n";
}

void write_metric_row(std::ostream& os, const MetricRow& r) {
    const auto old = os.precision(10);
    os << csv_field(r.constellation_id) << ',' << r.order << ',' << r.snr_db << ',' << r.linewidth_hz << ','
       << csv_field(r.model) << ',' << r.metric << ',' << r.value << ',' << r.n_symbols << ',' << r.seed << '\n';
    os.precision(old);
}

void write_waterfall_header(std::ostream& os) {
    os << "snr_db,linewidth_hz,constellation_id,n_info_bits,pre_fec_ber,post_fec_ber,n_codewords,reuse_factor,seed,post_fec_ci_lo,post_fec_ci_hi\n";
}

void write_waterfall_row(std::ostream& os, const WaterfallRow& r) {
    const auto old = os.precision(10);
    os << r.snr_db << ',' << r.linewidth_hz << ',' << csv_field(r.constellation_id) << ',' << r.n_info_bits << ','
       << r.pre_fec_ber << ',' << r.post_fec_ber << ',' << r.n_codewords << ',' << r.reuse_factor << ',' << r.seed
       << ',' << r.post_fec_ci_lo << ',' << r.post_fec_ci_hi << '\n';
    os.precision(old);
}

} // namespace pnshape
