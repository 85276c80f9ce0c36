#pragma once

#include <string>
#include <vector>

#include "floquet/common.hpp"

namespace floquet {

/// Deterministic CSV body: 17-significant-digit numbers, '\n' line ends.
std::string csvBody(const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);

void writeFile(const std::string& path, const std::string& body);

/// Trajectory CSV with columns t, re_u1..n, im_u1..n.
std::string trajectoryCsv(const std::vector<double>& times, const MatC& samples);
/// Parse the trajectory format back into times and samples.
void parseTrajectoryCsv(const std::string& body, std::vector<double>* times,
                        MatC* samples);

/// FNV-1a hash of a byte string, hex-encoded; used to fingerprint inputs.
std::string fnv1aHex(const std::string& bytes);

}  // namespace floquet
