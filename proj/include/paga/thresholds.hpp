#pragma once

namespace paga::thresholds {

// The skip-experiment pass/fail thresholds. --check mode and the acceptance
// suite both read these; there are no other tolerances.
inline constexpr double kPagaEvalMse = 1e-3;
inline constexpr double kPagaPassFraction = 0.95;
inline constexpr double kGcnMeanLossLo = 0.02;
inline constexpr double kGcnMeanLossHi = 0.08;
inline constexpr double kGcnMseVertexALo = 0.05;
inline constexpr double kGcnMseVertexAHi = 0.15;
inline constexpr double kGcnOracleGapMax = 0.02;
inline constexpr double kGcnOracleUndershoot = 1e-6;

}  // namespace paga::thresholds
