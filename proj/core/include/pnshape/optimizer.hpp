#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pnshape/channel.hpp"
#include "pnshape/constellation.hpp"
#include "pnshape/demapper.hpp"
#include "pnshape/objective.hpp"

namespace pnshape {

enum class OptimizerTarget { AwgnGmi, RpnGmi };

std::string to_string(OptimizerTarget t);

struct OptimizerConfig {
    OptimizerTarget target = OptimizerTarget::AwgnGmi;
    std::size_t mc_symbols_per_iter = std::size_t{1} << 19;
    double initial_step = 0.05; ///< fraction of sqrt(Es)
    double step_decay = 0.5;
    double min_step = 1e-4;
    std::size_t max_iters = 500;
    std::size_t label_switch_rounds = 64;
    /// Number of (positions, labels) passes.
    std::size_t stages = 1;
    std::size_t gh_nodes = 16;
    /// Gradient probe as a fraction of the current step (finite-difference path).
    double probe_ratio = 0.1;
    /// 0 evaluates all 2M candidates; K > 0 evaluates only the K with the
    /// largest first-order gain.
    std::size_t candidate_screen = 0;
    DemapperKind model = DemapperKind::MismatchedGaussian;
    std::uint64_t seed = 1;
    unsigned workers = 0;

    void validate() const;
};

struct TraceRecord {
    std::size_t iter = 0;
    std::string stage; ///< "perturb" or "label"
    double step = 0.0;
    double gmi_before = 0.0; ///< current constellation on this iteration's samples
    double best_gmi = 0.0;   ///< after the iteration, same samples
    std::string accepted_move; ///< e.g. "p3-im", "swap 2 7", "none"
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;
    std::string objective;
    OptimizerConfig config;
};

void write_trace_csv(std::ostream& os, const OptimizationTrace& t);

struct ShapeResult {
    Constellation constellation;
    OptimizationTrace trace;
};

struct PerturbationResult {
    Constellation constellation;
    double value = 0.0;      ///< objective of the returned constellation
    double base_value = 0.0; ///< objective of the input
    int point = -1;          ///< moved point, -1 if no candidate improved
    int axis = 0;            ///< 0 = real, 1 = imaginary
    double signed_step = 0.0;
};

/// One coordinate-perturbation step: 2M candidates (every point, both axes,
/// direction from the sign of the energy-projected gradient), each
/// renormalized; the best strictly improving candidate wins, ties going to
/// the lowest point index and then the real axis.
PerturbationResult perturbation_iteration(const Constellation& c, const Objective& objective, double step,
                                          double probe_ratio = 0.1, std::size_t screen = 0);

/// Best-improvement hill climbing over pairwise label swaps. When `objective`
/// is stochastic it is refreshed once per round with round index
/// `first_round + r`. Positions are never changed.
Constellation label_switch(const Constellation& c, Objective& objective, std::size_t rounds,
                           OptimizationTrace* trace = nullptr, std::uint64_t first_round = 0);

/// Maximize the Gauss-Hermite AWGN GMI at `snr_db`.
ShapeResult shape_awgn(const Constellation& init, double snr_db, const OptimizerConfig& cfg);

/// Maximize the Monte-Carlo GMI on the i.i.d. Gaussian phase-noise channel.
ShapeResult shape_rpn(const Constellation& init, const ChannelSpec& spec, const DemapperModel& model,
                      const OptimizerConfig& cfg);

/// Shared driver: `stages` passes of perturbation descent then label switching.
ShapeResult run_optimizer(const Constellation& init, Objective& objective, const OptimizerConfig& cfg);

} // namespace pnshape
