#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pnshape {

using cd = std::complex<double>;

/// Bit label of a constellation point. Bit 0 of the m-bit string is the MSB,
/// so label 0b0110 with m = 4 reads "0110".
using Label = std::uint32_t;

/// M complex points with a bijective m-bit labelling.
///
/// Construction enforces the structural invariants (M a power of two, labels a
/// permutation of 0..M-1, finite and pairwise distinct points). Unit average
/// energy is *not* enforced by the constructor so that `normalize` can accept
/// raw layouts; every generator and optimizer output is checked with
/// `require_unit_energy`.
class Constellation {
  public:
    static constexpr double kEnergyTolerance = 1e-9;
    static constexpr double kMinSeparation = 1e-9;

    Constellation(std::vector<cd> points, std::vector<Label> labels);

    std::size_t order() const noexcept { return points_.size(); }
    unsigned bits_per_symbol() const noexcept { return bits_; }

    std::span<const cd> points() const noexcept { return points_; }
    std::span<const Label> labels() const noexcept { return labels_; }
    const cd& point(std::size_t i) const { return points_.at(i); }
    Label label(std::size_t i) const { return labels_.at(i); }

    /// Bit `b` (0 = MSB) of the label of point `i`.
    int bit(std::size_t i, unsigned b) const noexcept {
        return static_cast<int>((labels_[i] >> (bits_ - 1 - b)) & 1U);
    }

    /// Index of the point carrying `label`.
    std::size_t index_of(Label label) const;

    double mean_energy() const noexcept;
    bool has_unit_energy(double tol = kEnergyTolerance) const noexcept;

    /// Throws InvariantViolation when the mean energy is off by more than `tol`.
    void require_unit_energy(double tol = kEnergyTolerance) const;

    bool operator==(const Constellation&) const = default;

  private:
    std::vector<cd> points_;
    std::vector<Label> labels_;
    unsigned bits_ = 0;
};

/// Gray-labelled square QAM (4, 16, 64), rectangular 2x4 8QAM and cross 32QAM
/// with quasi-Gray labels, all at unit mean energy.
Constellation make_qam_gray(std::size_t order);

/// Ring/PSK layout used for tests and initialisation experiments.
Constellation make_psk(std::size_t order);

/// Scale by one positive factor to unit mean energy. Throws on an all-zero input.
Constellation normalize(const Constellation& c);

/// Copy with the labels of points i and k exchanged.
Constellation swap_labels(const Constellation& c, std::size_t i, std::size_t k);

/// Copy with point i moved to `p`, labels untouched (not normalized).
Constellation with_point(const Constellation& c, std::size_t i, cd p);

std::string label_string(Label label, unsigned bits);
Label parse_label(std::string_view bits);

struct DeserializeOptions {
    bool renormalize = false; ///< rescale instead of rejecting non-unit energy
};

/// JSON document {"order": M, "points": [[re, im], ...], "labels": ["0101", ...]}.
std::string serialize(const Constellation& c);
Constellation deserialize(std::string_view text, DeserializeOptions opts = {});

Constellation load_constellation(const std::string& path, DeserializeOptions opts = {});
void save_constellation(const Constellation& c, const std::string& path);

} // namespace pnshape
