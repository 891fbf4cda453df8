#pragma once

#include <string>

#include "hbvm/harness.hpp"

namespace hbvm {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double value);

/// Columns t, q1..qm, p1..pm. Throws std::runtime_error naming the path on
/// I/O failure.
void emit_csv(const Trajectory& trajectory, const std::string& path);

/// Columns t, H_error.
void emit_energy_csv(const Trajectory& trajectory, const std::string& path);

}  // namespace hbvm
