#pragma once
// Failure-rate assignment and the reliability objective.
//
// Per-branch failure rates are linear in impedance magnitude over the
// non-tie branches: the largest-impedance branch gets lambda_max, the
// smallest lambda_min. Tie branches are fully reliable (lambda = 0).
// The objective is the average curtailed power
//     ACP = sum over demand buses of P_d,k * U_k   [MWh/yr]
// with U_k the annual unavailability: the sum of lambda*r over the branches
// on the path from bus k to the substation.

#include <limits>
#include <optional>
#include <vector>

#include "gridconf/grid_model.hpp"
#include "gridconf/topology.hpp"

namespace gridconf {

struct ReliabilityModel {
    std::vector<double> lambda_per_branch;       // index = branch id, failures/yr
    std::vector<double> repair_hours_per_branch; // index = branch id
    double lambda_min = 0.1;
    double lambda_max = 0.4;
    double repair_hours_default = 6.0;

    double lambda_of(int branch_id) const {
        return lambda_per_branch[static_cast<size_t>(branch_id)];
    }
    double repair_hours_of(int branch_id) const {
        return repair_hours_per_branch[static_cast<size_t>(branch_id)];
    }
};

struct UnavailabilityVector {
    std::vector<double> hours_per_year;  // index = bus id

    double of(int bus_id) const { return hours_per_year[static_cast<size_t>(bus_id)]; }
};

/// Linear interpolation of failure rates over non-tie impedance magnitudes.
/// Degenerate case (all non-tie impedances equal) assigns lambda_min everywhere.
inline ReliabilityModel assign_failure_rates(const Network& net, double lambda_min = 0.1,
                                             double lambda_max = 0.4,
                                             double repair_hours = 6.0) {
    if (lambda_min < 0 || lambda_max < lambda_min)
        throw ValidationError("failure-rate bounds must satisfy 0 <= lambda_min <= lambda_max");
    if (repair_hours <= 0) throw ValidationError("repair hours must be positive");

    double z_min = std::numeric_limits<double>::infinity();
    double z_max = -std::numeric_limits<double>::infinity();
    for (const auto& b : net.branches) {
        if (b.is_tie) continue;
        z_min = std::min(z_min, b.impedance());
        z_max = std::max(z_max, b.impedance());
    }

    ReliabilityModel model;
    model.lambda_min = lambda_min;
    model.lambda_max = lambda_max;
    model.repair_hours_default = repair_hours;
    model.lambda_per_branch.assign(static_cast<size_t>(net.branch_count() + 1), 0.0);
    model.repair_hours_per_branch.assign(static_cast<size_t>(net.branch_count() + 1),
                                         repair_hours);
    for (const auto& b : net.branches) {
        if (b.is_tie) continue;
        double lam = z_max == z_min
                         ? lambda_min
                         : lambda_min + (lambda_max - lambda_min) * (b.impedance() - z_min) /
                                            (z_max - z_min);
        model.lambda_per_branch[static_cast<size_t>(b.id)] = lam;
    }
    return model;
}

/// U_k for every bus in one pass down the tree: u(child) = u(parent) + lambda*r
/// of the connecting branch.
inline UnavailabilityVector unavailability(const Network& net, const ReliabilityModel& model,
                                           const RootedTree& tree) {
    UnavailabilityVector u;
    u.hours_per_year.assign(static_cast<size_t>(net.bus_count() + 1), 0.0);
    for (int bus : tree.bfs_order) {
        if (bus == tree.root) continue;
        const int pb = tree.parent_bus[static_cast<size_t>(bus)];
        const int br = tree.parent_branch[static_cast<size_t>(bus)];
        u.hours_per_year[static_cast<size_t>(bus)] =
            u.hours_per_year[static_cast<size_t>(pb)] +
            model.lambda_of(br) * model.repair_hours_of(br);
    }
    return u;
}

/// The objective, in MWh/yr. Throws ConstraintError for an inoperable cfg.
inline double average_curtailed_power(const Network& net, const ReliabilityModel& model,
                                      const Configuration& cfg) {
    RootedTree tree = build_rooted_tree(net, cfg);  // checks both constraints
    UnavailabilityVector u = unavailability(net, model, tree);
    double acp_kwh = 0.0;
    for (const auto& b : net.buses) acp_kwh += b.demand_kw * u.of(b.id);
    return acp_kwh / 1000.0;
}

}  // namespace gridconf
