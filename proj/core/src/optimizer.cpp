#include "pnshape/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "pnshape/errors.hpp"
#include "pnshape/metrics.hpp"

namespace pnshape {

std::string to_string(OptimizerTarget t) { return t == OptimizerTarget::AwgnGmi ? "awgn_gmi" : "rpn_gmi"; }

void OptimizerConfig::validate() const {
    if (!(min_step > 0.0) || !(initial_step > min_step))
        throw InvalidArgument("OptimizerConfig: need initial_step > min_step > 0");
    if (!(step_decay > 0.0 && step_decay < 1.0))
        throw InvalidArgument("OptimizerConfig: step_decay must lie in (0, 1)");
    if (target == OptimizerTarget::RpnGmi && mc_symbols_per_iter < (std::size_t{1} << 16))
        throw InvalidArgument("OptimizerConfig: mc_symbols_per_iter must be >= 2^16");
    if (gh_nodes < 8)
        throw InvalidArgument("OptimizerConfig: gh_nodes must be >= 8");
    if (!(probe_ratio > 0.0))
        throw InvalidArgument("OptimizerConfig: probe_ratio must be positive");
    if (stages == 0)
        throw InvalidArgument("OptimizerConfig: stages must be >= 1");
}

void write_trace_csv(std::ostream& os, const OptimizationTrace& t) {
    const auto old = os.precision(12);
    os << "iter,stage,step,gmi_before,best_gmi,accepted_move\n";
    for (const auto& r : t.records)
        os << r.iter << ',' << r.stage << ',' << r.step << ',' << r.gmi_before << ',' << r.best_gmi << ','
           << r.accepted_move << '\n';
    os.precision(old);
}

PerturbationResult perturbation_iteration(const Constellation& c, const Objective& objective, double step,
                                          double probe_ratio, std::size_t screen) {
    if (!(step > 0.0))
        throw InvalidArgument("perturbation_iteration: step must be positive");
    const std::size_t m = c.order();
    PerturbationResult res{c, 0.0, 0.0};
    res.base_value = objective.value(c);
    res.value = res.base_value;

    // Gradient projected onto the tangent of the renormalization map.
    const auto g = objective.gradient(c, step * probe_ratio);
    double dot = 0.0;
    for (std::size_t j = 0; j < m; ++j)
        dot += g[j].real() * c.point(j).real() + g[j].imag() * c.point(j).imag();
    std::vector<double> slope(2 * m);
    for (std::size_t j = 0; j < m; ++j) {
        slope[2 * j] = g[j].real() - c.point(j).real() * dot / static_cast<double>(m);
        slope[2 * j + 1] = g[j].imag() - c.point(j).imag() * dot / static_cast<double>(m);
    }

    std::vector<std::size_t> cand(2 * m);
    std::iota(cand.begin(), cand.end(), 0);
    if (screen > 0 && screen < cand.size()) {
        std::stable_sort(cand.begin(), cand.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(slope[a]) > std::abs(slope[b]); });
        cand.resize(screen);
        std::sort(cand.begin(), cand.end());
    }

    for (std::size_t idx : cand) {
        const std::size_t i = idx / 2;
        const int axis = static_cast<int>(idx % 2);
        const double s = slope[idx] >= 0.0 ? step : -step;
        const cd delta = axis == 0 ? cd{s, 0.0} : cd{0.0, s};
        Constellation trial = c;
        try {
            trial = normalize(with_point(c, i, c.point(i) + delta));
        } catch (const InvalidArgument&) {
            continue; // moved onto another point
        }
        const double v = objective.value(trial);
        if (v > res.value) {
            res.value = v;
            res.constellation = std::move(trial);
            res.point = static_cast<int>(i);
            res.axis = axis;
            res.signed_step = s;
        }
    }
    return res;
}

Constellation label_switch(const Constellation& c, Objective& objective, std::size_t rounds,
                           OptimizationTrace* trace, std::uint64_t first_round) {
    if (rounds == 0)
        throw InvalidArgument("label_switch: rounds must be >= 1");
    Constellation cur = c;
    const std::size_t m = c.order();
    for (std::size_t r = 0; r < rounds; ++r) {
        objective.refresh(first_round + r);
        const auto vals = objective.swap_values(cur);
        const double base = vals[0];
        double best = base;
        std::size_t bi = 0, bk = 0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t k = i + 1; k < m; ++k) {
                if (vals[i * m + k] > best + 1e-12) {
                    best = vals[i * m + k];
                    bi = i;
                    bk = k;
                }
            }
        }
        TraceRecord rec{r, "label", 0.0, base, base, "none"};
        bool accepted = false;
        if (bk != 0) {
            Constellation next = swap_labels(cur, bi, bk);
            const double v = objective.value(next);
            if (v > base) {
                cur = std::move(next);
                rec.best_gmi = v;
                rec.accepted_move = "swap " + std::to_string(bi) + " " + std::to_string(bk);
                accepted = true;
            }
        }
        if (trace)
            trace->records.push_back(rec);
        if (!accepted)
            break;
    }
    return cur;
}

ShapeResult run_optimizer(const Constellation& init, Objective& objective, const OptimizerConfig& cfg) {
    cfg.validate();
    ShapeResult res{normalize(init), {}};
    res.trace.objective = objective.describe();
    res.trace.config = cfg;
    std::uint64_t round = 0;
    for (std::size_t stage = 0; stage < cfg.stages; ++stage) {
        double step = cfg.initial_step;
        for (std::size_t it = 0; it < cfg.max_iters; ++it) {
            objective.refresh(round++);
            auto p = perturbation_iteration(res.constellation, objective, step, cfg.probe_ratio,
                                            cfg.candidate_screen);
            TraceRecord rec{it, "perturb", step, p.base_value, p.value, "none"};
            if (p.point >= 0) {
                rec.accepted_move = "p" + std::to_string(p.point) + (p.signed_step > 0 ? "+" : "-") +
                                    (p.axis == 0 ? "re" : "im");
                res.constellation = std::move(p.constellation);
                res.constellation.require_unit_energy();
            } else {
                step *= cfg.step_decay;
            }
            res.trace.records.push_back(std::move(rec));
            if (step < cfg.min_step)
                break;
        }
        if (cfg.label_switch_rounds > 0) {
            res.constellation =
                label_switch(res.constellation, objective, cfg.label_switch_rounds, &res.trace, round);
            round += cfg.label_switch_rounds;
        }
    }
    return res;
}

ShapeResult shape_awgn(const Constellation& init, double snr_db, const OptimizerConfig& cfg) {
    if (cfg.target != OptimizerTarget::AwgnGmi)
        throw InvalidArgument("shape_awgn: target must be awgn_gmi");
    GaussHermiteObjective obj(init.order(), snr_db, cfg.gh_nodes, cfg.workers);
    return run_optimizer(init, obj, cfg);
}

ShapeResult shape_rpn(const Constellation& init, const ChannelSpec& spec, const DemapperModel& model,
                      const OptimizerConfig& cfg) {
    if (cfg.target != OptimizerTarget::RpnGmi)
        throw InvalidArgument("shape_rpn: target must be rpn_gmi");
    if (spec.mode != ChannelMode::GaussianRpn)
        throw InvalidArgument("shape_rpn: channel mode must be gaussian_rpn");
    MonteCarloObjective obj(init.order(), spec, model, cfg.mc_symbols_per_iter, cfg.seed, cfg.workers);
    return run_optimizer(init, obj, cfg);
}

} // namespace pnshape
