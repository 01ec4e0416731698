#pragma once

#include <ablist/graph/residue_graph.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ablist::graph {

/// One antibody-antigen instance. The antibody is represented by its CDR.
struct AbAgPair {
    std::uint32_t id = 0;
    ResidueStructure ab;
    ResidueStructure ag;
    std::optional<double> affinity;   // log-Kd; lower binds tighter
    std::uint32_t family = 0;

    bool labeled() const { return affinity.has_value(); }
};

/// Contact graphs of both chains with node features attached.
struct PairGraphs {
    ResidueGraph ab;
    ResidueGraph ag;
};

} // namespace ablist::graph
