#include "pnshape/constellation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pnshape/errors.hpp"

namespace pnshape {

namespace {

unsigned log2_exact(std::size_t m) {
    if (m < 2 || !std::has_single_bit(m))
        throw InvariantViolation("constellation order must be a power of two >= 2, got " + std::to_string(m));
    return static_cast<unsigned>(std::countr_zero(m));
}

constexpr unsigned gray(unsigned v) { return v ^ (v >> 1); }

// Amplitude levels for one axis, most positive first: {+(L-1), ..., -(L-1)}.
double axis_level(unsigned index, unsigned levels) {
    return static_cast<double>(static_cast<int>(levels) - 1 - 2 * static_cast<int>(index));
}

Constellation grid_qam(unsigned i_levels, unsigned q_levels) {
    const unsigned i_bits = static_cast<unsigned>(std::countr_zero(i_levels));
    std::vector<cd> pts;
    std::vector<Label> labels;
    for (unsigned qi = 0; qi < q_levels; ++qi) {
        for (unsigned ii = 0; ii < i_levels; ++ii) {
            pts.emplace_back(axis_level(ii, i_levels), axis_level(qi, q_levels));
            labels.push_back((gray(qi) << i_bits) | gray(ii));
        }
    }
    return normalize(Constellation(std::move(pts), std::move(labels)));
}

// Cross 32QAM: 8x4 Gray rectangle with the |I| = 7 columns folded onto the
// |Q| = 5 rows. The fold minimises summed neighbour Hamming distance
// (4 of 52 grid edges differ in more than one bit).
Constellation cross32() {
    std::vector<cd> pts;
    std::vector<Label> labels;
    for (unsigned qi = 0; qi < 4; ++qi) {
        for (unsigned ii = 0; ii < 8; ++ii) {
            double x = axis_level(ii, 8);
            double y = axis_level(qi, 4);
            if (std::abs(x) == 7.0) {
                const double nx = std::copysign(std::abs(y) == 3.0 ? 1.0 : 3.0, x);
                y = std::copysign(5.0, y);
                x = nx;
            }
            pts.emplace_back(x, y);
            labels.push_back((gray(qi) << 3) | gray(ii));
        }
    }
    return normalize(Constellation(std::move(pts), std::move(labels)));
}

} // namespace

Constellation::Constellation(std::vector<cd> points, std::vector<Label> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
    if (points_.size() != labels_.size())
        throw InvariantViolation("points/labels size mismatch: " + std::to_string(points_.size()) + " vs " +
                                 std::to_string(labels_.size()));
    bits_ = log2_exact(points_.size());
    const std::size_t m = points_.size();

    std::vector<bool> seen(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (labels_[i] >= m)
            throw InvariantViolation("label " + std::to_string(labels_[i]) + " out of range at index " +
                                     std::to_string(i));
        if (seen[labels_[i]])
            throw InvariantViolation("duplicate label " + label_string(labels_[i], bits_) + " at index " +
                                     std::to_string(i));
        seen[labels_[i]] = true;
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!std::isfinite(points_[i].real()) || !std::isfinite(points_[i].imag()))
            throw InvariantViolation("non-finite point at index " + std::to_string(i));
        for (std::size_t k = 0; k < i; ++k) {
            if (std::abs(points_[i] - points_[k]) < kMinSeparation)
                throw InvariantViolation("points " + std::to_string(k) + " and " + std::to_string(i) + " coincide");
        }
    }
}

std::size_t Constellation::index_of(Label label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end())
        throw InvalidArgument("label not present: " + std::to_string(label));
    return static_cast<std::size_t>(it - labels_.begin());
}

double Constellation::mean_energy() const noexcept {
    double s = 0.0;
    for (const auto& p : points_)
        s += std::norm(p);
    return s / static_cast<double>(points_.size());
}

bool Constellation::has_unit_energy(double tol) const noexcept { return std::abs(mean_energy() - 1.0) <= tol; }

void Constellation::require_unit_energy(double tol) const {
    if (!has_unit_energy(tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "mean energy " << mean_energy() << " differs from 1 by more than " << tol;
        throw InvariantViolation(os.str());
    }
}

Constellation make_qam_gray(std::size_t order) {
    switch (order) {
    case 4:
        return grid_qam(2, 2);
    case 8:
        return grid_qam(4, 2);
    case 16:
        return grid_qam(4, 4);
    case 32:
        return cross32();
    case 64:
        return grid_qam(8, 8);
    default:
        throw InvalidArgument("make_qam_gray: unsupported order " + std::to_string(order));
    }
}

Constellation make_psk(std::size_t order) {
    const unsigned bits = log2_exact(order);
    (void)bits;
    std::vector<cd> pts;
    std::vector<Label> labels;
    for (std::size_t k = 0; k < order; ++k) {
        pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(order)));
        labels.push_back(gray(static_cast<unsigned>(k)));
    }
    return Constellation(std::move(pts), std::move(labels));
}

Constellation normalize(const Constellation& c) {
    const double e = c.mean_energy();
    if (!(e > 0.0))
        throw InvalidArgument("normalize: all-zero constellation");
    const double g = 1.0 / std::sqrt(e);
    std::vector<cd> pts(c.points().begin(), c.points().end());
    for (auto& p : pts)
        p *= g;
    return Constellation(std::move(pts), {c.labels().begin(), c.labels().end()});
}

Constellation swap_labels(const Constellation& c, std::size_t i, std::size_t k) {
    if (i >= c.order() || k >= c.order())
        throw InvalidArgument("swap_labels: index out of range");
    std::vector<Label> labels(c.labels().begin(), c.labels().end());
    std::swap(labels[i], labels[k]);
    return Constellation({c.points().begin(), c.points().end()}, std::move(labels));
}

Constellation with_point(const Constellation& c, std::size_t i, cd p) {
    if (i >= c.order())
        throw InvalidArgument("with_point: index out of range");
    std::vector<cd> pts(c.points().begin(), c.points().end());
    pts[i] = p;
    return Constellation(std::move(pts), {c.labels().begin(), c.labels().end()});
}

std::string label_string(Label label, unsigned bits) {
    std::string s(bits, '0');
    for (unsigned b = 0; b < bits; ++b) {
        if ((label >> (bits - 1 - b)) & 1U)
            s[b] = '1';
    }
    return s;
}

Label parse_label(std::string_view bits) {
    if (bits.empty() || bits.size() > 16)
        throw ParseError("", "label must be 1..16 bits");
    Label v = 0;
    for (char ch : bits) {
        if (ch != '0' && ch != '1')
            throw ParseError("", "label contains non-binary character");
        v = (v << 1) | static_cast<Label>(ch == '1');
    }
    return v;
}

std::string serialize(const Constellation& c) {
    nlohmann::ordered_json doc;
    doc["order"] = c.order();
    auto pts = nlohmann::json::array();
    for (const auto& p : c.points())
        pts.push_back({p.real(), p.imag()});
    doc["points"] = std::move(pts);
    auto labels = nlohmann::json::array();
    for (auto l : c.labels())
        labels.push_back(label_string(l, c.bits_per_symbol()));
    doc["labels"] = std::move(labels);
    return doc.dump(2) + "\n";
}

Constellation deserialize(std::string_view text, DeserializeOptions opts) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("", "document must be an object");
    for (const char* key : {"order", "points", "labels"}) {
        if (!doc.contains(key))
            throw ParseError(std::string("/") + key, "missing field");
    }
    if (!doc["order"].is_number_unsigned())
        throw ParseError("/order", "must be a positive integer");
    const auto order = doc["order"].get<std::size_t>();
    const auto& jp = doc["points"];
    const auto& jl = doc["labels"];
    if (!jp.is_array() || jp.size() != order)
        throw ParseError("/points", "must be an array of " + std::to_string(order) + " [re, im] pairs");
    if (!jl.is_array() || jl.size() != order)
        throw ParseError("/labels", "must be an array of " + std::to_string(order) + " bit strings");

    std::vector<cd> pts;
    std::vector<Label> labels;
    for (std::size_t i = 0; i < order; ++i) {
        const auto path = "/points/" + std::to_string(i);
        const auto& e = jp[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ParseError(path, "expected [re, im]");
        pts.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    unsigned bits = 0;
    while ((std::size_t{1} << bits) < order)
        ++bits;
    for (std::size_t i = 0; i < order; ++i) {
        const auto path = "/labels/" + std::to_string(i);
        if (!jl[i].is_string())
            throw ParseError(path, "expected bit string");
        const auto s = jl[i].get<std::string>();
        if (s.size() != bits)
            throw ParseError(path, "expected " + std::to_string(bits) + " bits, got \"" + s + "\"");
        try {
            labels.push_back(parse_label(s));
        } catch (const ParseError& e) {
            throw ParseError(path, e.what());
        }
    }

    std::optional<Constellation> c;
    try {
        c.emplace(std::move(pts), std::move(labels));
    } catch (const InvariantViolation& e) {
        throw ParseError("/", e.what());
    }
    if (opts.renormalize)
        return normalize(*c);
    try {
        c->require_unit_energy();
    } catch (const InvariantViolation& e) {
        throw ParseError("/points", e.what());
    }
    return *c;
}

Constellation load_constellation(const std::string& path, DeserializeOptions opts) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(path, "cannot open constellation file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str(), opts);
}

void save_constellation(const Constellation& c, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw InvalidArgument("cannot write " + path);
    out << serialize(c);
}

} // namespace pnshape
