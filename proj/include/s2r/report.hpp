#pragma once

#include <string>

#include "s2r/sim2real.hpp"

namespace s2r {

// Fixed release identifier stamped into every artifact.
std::string version_string();

// Versioned run report (schema "1"). `config_echo` must already exclude
// execution-only fields (worker count) so reruns at any parallelism are
// byte-identical.
std::string report_to_json(const Sim2RealResult& result, const std::string& config_echo_json,
                           int indent = 2);

// One step per line: {h, x, a, r}; r is null when feedback is hidden.
std::string trajectory_to_json(const Trajectory& traj);

}  // namespace s2r
