#ifndef TQR_CLI_HPP
#define TQR_CLI_HPP

#include <optional>
#include <string>

#include "tqr/model.hpp"
#include "tqr/phonon.hpp"
#include "tqr/physparams.hpp"

// Command-line front end: parameter parsing (flags > config file >
// defaults), deterministic sweep orchestration, CSV/JSON emission, and
// minimal SVG rendering. CSV is the contract: identical configs produce
// byte-identical files (17 significant digits, '\n' line ends); every
// run also writes a JSON sidecar with the full config, library version,
// wall time, and truncation actually used.

namespace tqr {

inline constexpr const char* kVersion = "1.0.0";

enum class Command {
  Spectrum,  // k lowest levels over a g grid
  Gfun,      // G(E) scan over an energy window
  Roots,     // bracketed/validated G-roots, optional ED cross-check
  Meanfield, // mean-field minimum and derivatives over a g grid
  Ground,    // converged ED ground state and phonon observables per g
  Density,   // position density of the ground-state phonon
  Wigner,    // Wigner matrix of the ground-state phonon
  Fidelity,  // fidelities against reference states over a g grid
  Physical,  // hardware-to-model parameter mapping
  Verify,    // operator-identity residuals
};

struct GridSpec {
  // g sweep (start:stop:step syntax on the command line)
  double g_min = 0.0, g_max = 2.0, g_step = 0.05;
  // energy window for gfun/roots
  double e_min = -1.0, e_max = 3.0, e_step = 1e-3;
  // position grid for density
  double x_min = -8.0, x_max = 8.0;
  int x_points = 321;
  PhaseSpaceGrid phase_space;  // wigner
};

struct RunConfig {
  Command command = Command::Spectrum;
  ModelParams params;
  PhysicalIonParams physical;
  double detuning = 0.0;        // physical two-photon detuning, angular
  FockTruncation trunc;
  Sector sector = Sector::Full;
  GridSpec grids;
  int k_levels = 8;             // spectrum
  int n_count = 16;             // singlet overlay rows
  double root_tol = 1e-9;
  double scan_step = 1e-3;
  std::string observable = "all";   // ground: column selection
  std::string verify_what = "all";  // verify: tripartite | appendix | all
  double verify_g = 1.0;
  double verify_eta = 0.1;
  std::string output_dir = ".";
  std::string basename;         // defaults to the command name
  long seed = 0;                // recorded for randomized property suites
  int threads = 1;
  bool plot = false;            // emit SVG next to the CSV
  bool si_units = false;        // report energies via the physical scale
  bool ed_check = true;         // roots: attach ED distances
};

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
// Numerical failures print a one-line JSON object on stderr with the
// module error code and message.
int run(const RunConfig& config);

// Full entry point used by tools/main.cpp and the CLI tests: parses
// argv (including --config key=value files and the TQRM_THREADS
// override), then dispatches to run().
int cli_main(int argc, const char* const* argv);

}  // namespace tqr

#endif
