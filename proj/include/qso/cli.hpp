#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qso/verify.hpp"

namespace qso {

// Exit codes shared by every subcommand.
inline constexpr int exit_ok = 0;
inline constexpr int exit_property_failure = 1;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

// Initial-point choice and run parameters for `iterate`.
struct RunConfig {
    std::optional<std::vector<double>> x0;  // explicit vector
    bool uniform = false;
    bool random = false;
    std::uint64_t seed = 0;
    std::size_t max_steps = 10000;
    double tol = 1e-9;
    std::size_t record_stride = 0;  // 0 = automatic
    std::optional<std::string> csv_path;
};

// Each command returns the process exit code and writes its report to `out`
// (diagnostics to `err`). main() is a thin argument-parsing wrapper.
int cmd_build(const std::string& model_path, const std::optional<std::string>& tensor_export,
              std::ostream& out, std::ostream& err);
int cmd_iterate(const std::string& model_path, const RunConfig& cfg, std::ostream& out,
                std::ostream& err);
int cmd_reduce(const std::string& model_path, std::uint64_t seed, std::ostream& out,
               std::ostream& err);
int cmd_tournament(const std::string& model_path, std::optional<int> component, bool confirm,
                   std::uint64_t seed, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace qso
