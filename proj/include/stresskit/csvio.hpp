#pragma once

#include <filesystem>
#include <string>

namespace stresskit::csv {

// Shortest representation that parses back to the exact same double.
std::string format_double(double v);

// Fixed-precision formatting for display output (reports).
std::string format_fixed(double v, int decimals);

// Write-temp-then-rename so partially written outputs are never observed.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace stresskit::csv
