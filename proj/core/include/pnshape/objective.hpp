#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pnshape/channel.hpp"
#include "pnshape/constellation.hpp"
#include "pnshape/demapper.hpp"

namespace pnshape {

/// A scalar functional of a constellation, maximized by the optimizer.
///
/// Stochastic objectives draw a new sample set on refresh(); between two
/// refresh() calls every evaluation uses the same samples, so candidate
/// comparisons within one iteration share common random numbers.
class Objective {
  public:
    virtual ~Objective() = default;

    virtual double value(const Constellation& c) const = 0;

    /// Gradient with respect to the point coordinates (re + j im), labels
    /// and energy held fixed. The default uses central differences with
    /// probe `h`.
    virtual std::vector<cd> gradient(const Constellation& c, double h) const;

    /// Objective value after swapping the labels of every pair (i, k), as a
    /// row-major M x M matrix (diagonal = value(c)).
    virtual std::vector<double> swap_values(const Constellation& c) const;

    virtual void refresh(std::uint64_t /*round*/) {}
    virtual std::string describe() const = 0;
};

/// Wraps an arbitrary function; useful for toy problems and tests.
class FunctionObjective final : public Objective {
  public:
    explicit FunctionObjective(std::function<double(const Constellation&)> f, std::string name = "function")
        : f_(std::move(f)), name_(std::move(name)) {}
    double value(const Constellation& c) const override { return f_(c); }
    std::string describe() const override { return name_; }

  private:
    std::function<double(const Constellation&)> f_;
    std::string name_;
};

/// GMI over a weighted sample set y_k = c[tx_k] * rot_k + offset_k, with
/// the per-sample weights summing to one. Shared machinery for the
/// quadrature and Monte-Carlo objectives.
class SampledGmiObjective : public Objective {
  public:
    double value(const Constellation& c) const override;
    /// Analytic for the Gaussian demapper; central differences for PCAWGN.
    std::vector<cd> gradient(const Constellation& c, double h) const override;
    std::vector<double> swap_values(const Constellation& c) const override;

    const DemapperModel& model() const noexcept { return model_; }
    std::size_t sample_count() const noexcept { return tx_.size(); }

  protected:
    SampledGmiObjective(DemapperModel model, unsigned workers) : model_(model), workers_(workers) {}

    DemapperModel model_;
    unsigned workers_;
    std::vector<std::uint32_t> tx_;
    std::vector<cd> rot_;
    std::vector<cd> offset_;
    std::vector<double> weight_;
};

/// AWGN GMI by tensor Gauss-Hermite quadrature (deterministic).
class GaussHermiteObjective final : public SampledGmiObjective {
  public:
    GaussHermiteObjective(std::size_t order_m, double snr_db, std::size_t nodes, unsigned workers = 0);
    std::string describe() const override;

  private:
    double snr_db_;
    std::size_t nodes_;
};

/// Monte-Carlo GMI on a fresh channel realization per refresh(round).
class MonteCarloObjective final : public SampledGmiObjective {
  public:
    MonteCarloObjective(std::size_t order_m, const ChannelSpec& spec, const DemapperModel& model,
                        std::size_t n_symbols, std::uint64_t seed, unsigned workers = 0);
    void refresh(std::uint64_t round) override;
    std::string describe() const override;

  private:
    std::size_t order_;
    ChannelSpec spec_;
    std::size_t n_;
    std::uint64_t seed_;
};

} // namespace pnshape
