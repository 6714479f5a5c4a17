#ifndef FPA_CLI_HPP
#define FPA_CLI_HPP

#include <string>

#include "fpa/config.hpp"

namespace fpa {

// Exit codes shared by all subcommands:
//   0 success, 1 config/input error, 2 assumption hard-gate failure,
//   3 numeric abort.
namespace exit_code {
constexpr int ok = 0;
constexpr int config_error = 1;
constexpr int assumption_gate = 2;
constexpr int numeric_abort = 3;
}  // namespace exit_code

// All output files are written via temp-file + rename.
void atomic_write_text(const std::string& path, const std::string& content);

int cmd_solve(const RunConfig& cfg, int threads);
int cmd_particles(const RunConfig& cfg, int threads);
int cmd_check(const RunConfig& cfg, const std::string& snapshot_path, int threads);
int cmd_fit(const std::string& series_csv, double t0, double t1, const std::string& out_path);

// --threads, falling back to FPA_THREADS, falling back to the hardware count.
int resolve_threads(int cli_threads);

}  // namespace fpa

#endif
