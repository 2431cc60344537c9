#include "coclab/spectral_radii.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace coclab {

namespace {

void check_ops(std::span<const Operator> ops) {
    if (ops.empty()) throw Error("operator set is empty");
    for (const auto& op : ops)
        if (op.dim() != ops.front().dim()) throw Error("operator set has mixed dimensions");
}

} // namespace

RadiusBounds exhaustive_bounds(std::span<const Operator> ops, int depth, NormKind kind,
                               std::uint64_t budget) {
    check_ops(ops);
    if (depth < 1) throw Error("exhaustive_bounds requires depth >= 1");
    double total = 1.0;
    for (int i = 0; i < depth; ++i) total *= static_cast<double>(ops.size());
    if (total > static_cast<double>(budget))
        throw BudgetExceeded("|ops|^depth exceeds the product budget");

    RadiusBounds out;
    out.depth_reached = depth;
    out.lower = 0.0;
    out.per_length_upper.assign(static_cast<std::size_t>(depth),
                                -std::numeric_limits<double>::infinity());
    std::vector<int> word;
    std::vector<ScaledOperator> stack{ScaledOperator::identity(ops.front().dim())};
    std::function<void()> rec = [&] {
        const int len = static_cast<int>(word.size());
        if (len > 0) {
            const ScaledOperator& p = stack.back();
            const double norm_rate = std::exp(p.log_norm(kind) / len);
            const double r_rate = std::exp(p.log_spectral_radius() / len);
            auto& slot = out.per_length_upper[static_cast<std::size_t>(len - 1)];
            slot = std::max(slot, norm_rate);
            if (r_rate > out.lower) {
                out.lower = r_rate;
                out.witness_word = word;
            }
        }
        if (len == depth) return;
        for (int s = 0; s < static_cast<int>(ops.size()); ++s) {
            word.push_back(s);
            ScaledOperator next = stack.back();
            next.multiply_left(ops[static_cast<std::size_t>(s)]);
            stack.push_back(std::move(next));
            rec();
            stack.pop_back();
            word.pop_back();
        }
    };
    rec();
    out.upper = *std::min_element(out.per_length_upper.begin(), out.per_length_upper.end());
    return out;
}

RadiusBounds branch_and_bound(std::span<const Operator> ops, double target_gap, int max_depth,
                              NormKind kind, std::uint64_t node_budget) {
    check_ops(ops);
    if (!(target_gap > 0.0)) throw Error("branch_and_bound requires target_gap > 0");
    if (max_depth < 1) throw Error("branch_and_bound requires max_depth >= 1");

    // seed with a short exhaustive sweep: certifies an initial bracket and
    // makes the pruning threshold effective from the start
    int seed_depth = 1;
    double count = static_cast<double>(ops.size());
    while (seed_depth < max_depth && count * static_cast<double>(ops.size()) <= 4096.0) {
        ++seed_depth;
        count *= static_cast<double>(ops.size());
    }
    RadiusBounds out = exhaustive_bounds(ops, seed_depth, kind,
                                         std::uint64_t{1} << 20);
    out.depth_reached = seed_depth;
    if (out.upper - out.lower <= target_gap || seed_depth == max_depth) {
        out.per_length_upper.clear();
        return out;
    }

    double frontier_max = -std::numeric_limits<double>::infinity();
    std::uint64_t nodes = 0;
    std::vector<int> word;
    std::vector<ScaledOperator> stack{ScaledOperator::identity(ops.front().dim())};
    // beta(w) = min over prefixes of the prefix norm rate; carried down the DFS
    std::function<void(double)> rec = [&](double beta) {
        const int len = static_cast<int>(word.size());
        if (len > 0) {
            const ScaledOperator& p = stack.back();
            const double norm_rate = std::exp(p.log_norm(kind) / len);
            beta = std::min(beta, norm_rate);
            const double r_rate = std::exp(p.log_spectral_radius() / len);
            if (r_rate > out.lower) {
                out.lower = r_rate;
                out.witness_word = word;
            }
            out.depth_reached = std::max(out.depth_reached, len);
            if (beta <= out.lower + target_gap) return; // pruned
            if (len == max_depth || nodes >= node_budget) {
                frontier_max = std::max(frontier_max, beta);
                return;
            }
        }
        for (int s = 0; s < static_cast<int>(ops.size()); ++s) {
            ++nodes;
            word.push_back(s);
            ScaledOperator next = stack.back();
            next.multiply_left(ops[static_cast<std::size_t>(s)]);
            stack.push_back(std::move(next));
            rec(beta);
            stack.pop_back();
            word.pop_back();
        }
    };
    rec(std::numeric_limits<double>::infinity());

    double upper = out.lower + target_gap;
    if (std::isfinite(frontier_max)) upper = std::max(upper, frontier_max);
    out.upper = std::min(out.upper, upper);
    out.per_length_upper.clear();
    return out;
}

std::vector<std::pair<int, double>> berger_wang_gap(std::span<const Operator> ops,
                                                    std::span<const int> depths, NormKind kind,
                                                    std::uint64_t budget) {
    std::vector<std::pair<int, double>> out;
    out.reserve(depths.size());
    for (int d : depths) {
        const RadiusBounds b = exhaustive_bounds(ops, d, kind, budget);
        out.emplace_back(d, b.upper - b.lower);
    }
    return out;
}

} // namespace coclab
